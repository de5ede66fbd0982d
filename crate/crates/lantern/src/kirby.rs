//! Surgery diagrams at linking-matrix level.
//!
//! Component labels: `U{i}` are the 0-framed unknots, `M{i}.{k}` the (−1)-framed meridians of
//! `U{i}`, `P{i}.{k}` the (−1)-framed circles linking `U{i}` and `U{i+1}`, `G{j}.{k}` the
//! (−1)-framed circles linking `U1`…`U{j}`, and `C`, `D` the two auxiliary curves of the W₃ check.
//! All constructed linkings are +1.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::{FormInvariants, SymMatrix};
use crate::rewrite::Factorization;

#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Component {
    Unknot(u32),
    Chain { left: u32, copy: u32 },
    Meridian { of: u32, copy: u32 },
    Gamma { j: u32, copy: u32 },
    AuxC,
    AuxD,
    Other(String),
}

impl Component {
    pub fn is_unknot(&self) -> bool {
        matches!(self, Component::Unknot(_))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Unknot(i) => write!(f, "U{i}"),
            Component::Chain { left, copy } => write!(f, "P{left}.{copy}"),
            Component::Meridian { of, copy } => write!(f, "M{of}.{copy}"),
            Component::Gamma { j, copy } => write!(f, "G{j}.{copy}"),
            Component::AuxC => write!(f, "C"),
            Component::AuxD => write!(f, "D"),
            Component::Other(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for Component {
    type Err = std::convert::Infallible;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let pair = |rest: &str| -> Option<(u32, u32)> {
            let (a, b) = rest.split_once('.')?;
            Some((a.parse().ok()?, b.parse().ok()?))
        };
        let head = s.get(..1).zip(s.get(1..));
        let parsed = match head {
            Some(("U", rest)) => rest.parse().ok().map(Component::Unknot),
            Some(("P", rest)) => pair(rest).map(|(left, copy)| Component::Chain { left, copy }),
            Some(("M", rest)) => pair(rest).map(|(of, copy)| Component::Meridian { of, copy }),
            Some(("G", rest)) => pair(rest).map(|(j, copy)| Component::Gamma { j, copy }),
            Some(("C", "")) => Some(Component::AuxC),
            Some(("D", "")) => Some(Component::AuxD),
            _ => None,
        };
        Ok(parsed.unwrap_or_else(|| Component::Other(s.to_string())))
    }
}

impl Serialize for Component {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Component {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().expect("infallible"))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawDiagram")]
pub struct FramedDiagram {
    components: Vec<Component>,
    matrix: SymMatrix,
}

#[derive(Deserialize)]
struct RawDiagram {
    components: Option<Vec<Component>>,
    matrix: SymMatrix,
}

impl TryFrom<RawDiagram> for FramedDiagram {
    type Error = Error;
    fn try_from(r: RawDiagram) -> Result<Self> {
        match r.components {
            Some(c) => FramedDiagram::new(c, r.matrix),
            None => Ok(FramedDiagram::anonymous(r.matrix)),
        }
    }
}

impl FramedDiagram {
    pub fn new(components: Vec<Component>, matrix: SymMatrix) -> Result<Self> {
        if components.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                left: components.len(),
                right: matrix.dim(),
            });
        }
        Ok(FramedDiagram { components, matrix })
    }

    /// Components labelled c1, c2, ….
    pub fn anonymous(matrix: SymMatrix) -> Self {
        let components = (1..=matrix.dim())
            .map(|i| Component::Other(format!("c{i}")))
            .collect();
        FramedDiagram { components, matrix }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn matrix(&self) -> &SymMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn index_of(&self, c: &Component) -> Option<usize> {
        self.components.iter().position(|x| x == c)
    }

    pub fn framing(&self, k: usize) -> &BigInt {
        self.matrix.get(k, k)
    }

    pub fn with_framing(&self, k: usize, v: BigInt) -> FramedDiagram {
        let mut out = self.clone();
        out.matrix.set(k, k, v);
        out
    }

    pub fn remove(&self, k: usize) -> FramedDiagram {
        let mut components = self.components.clone();
        components.remove(k);
        FramedDiagram {
            components,
            matrix: self.matrix.remove(k),
        }
    }

    /// Appends a component with the given framing and linking numbers.
    pub fn push(&mut self, label: Component, framing: i64, links: &[(usize, i64)]) {
        let old = self.matrix.dim();
        let mut m = SymMatrix::zeros(old + 1);
        for i in 0..old {
            for j in 0..=i {
                m.set(i, j, self.matrix.get(i, j).clone());
            }
        }
        m.set(old, old, framing.into());
        for &(k, v) in links {
            m.set(old, k, v.into());
        }
        self.matrix = m;
        self.components.push(label);
    }

    /// Reorders components by a permutation (new position → old index).
    pub fn permuted(&self, order: &[usize]) -> FramedDiagram {
        FramedDiagram {
            components: order.iter().map(|&k| self.components[k].clone()).collect(),
            matrix: self.matrix.submatrix(order),
        }
    }

    pub fn invariants(&self) -> FormInvariants {
        self.matrix.invariants()
    }
}

pub fn form_invariants(d: &FramedDiagram) -> FormInvariants {
    d.invariants()
}

/// Removes a ±1-framed component k: Q'ᵢⱼ = Qᵢⱼ − ε·Qᵢₖ·Qⱼₖ with ε = Qₖₖ.
pub fn blow_down(d: &FramedDiagram, k: usize) -> Result<FramedDiagram> {
    if k >= d.dim() {
        return Err(invalid(format!("component {k} out of range")));
    }
    let eps = d.framing(k).clone();
    if eps.abs() != BigInt::one() {
        return Err(invalid(format!(
            "component {} has framing {eps}, not ±1",
            d.components[k]
        )));
    }
    let mut m = d.matrix.clone();
    for i in 0..m.dim() {
        if i == k || d.matrix.get(i, k).is_zero() {
            continue;
        }
        for j in 0..=i {
            if j == k {
                continue;
            }
            let v = m.get(i, j) - &eps * d.matrix.get(i, k) * d.matrix.get(j, k);
            m.set(i, j, v);
        }
    }
    let mut components = d.components.clone();
    components.remove(k);
    Ok(FramedDiagram {
        components,
        matrix: m.remove(k),
    })
}

/// Slides component i over component j (sign ±1): eᵢ ↦ eᵢ ± eⱼ.
pub fn handle_slide(d: &FramedDiagram, i: usize, j: usize, sign: i64) -> Result<FramedDiagram> {
    if i == j || i >= d.dim() || j >= d.dim() || sign.abs() != 1 {
        return Err(invalid("a slide needs two distinct components and sign ±1"));
    }
    let mut out = d.clone();
    out.matrix.add_multiple(i, j, &sign.into());
    Ok(out)
}

/// The model diagram Z(n; p₁…p_{n−1}; q₁…qₙ) of n 0-framed unknots in a chain.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct ModelDiagram {
    n: u32,
    p: Vec<u32>,
    q: Vec<u32>,
}

#[derive(Deserialize)]
struct RawModel {
    n: u32,
    p: Vec<u32>,
    q: Vec<u32>,
}

impl TryFrom<RawModel> for ModelDiagram {
    type Error = Error;
    fn try_from(r: RawModel) -> Result<Self> {
        let m = ModelDiagram::new(r.p, r.q)?;
        if m.n != r.n {
            return Err(invalid(format!(
                "n = {} does not match {} q-entries",
                r.n, m.n
            )));
        }
        Ok(m)
    }
}

impl fmt::Display for ModelDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z(n={}, p={:?}, q={:?})", self.n, self.p, self.q)
    }
}

impl ModelDiagram {
    pub fn new(p: Vec<u32>, q: Vec<u32>) -> Result<Self> {
        let n = q.len() as u32;
        if n == 0 {
            return Err(invalid("a model diagram needs at least one unknot"));
        }
        if p.len() + 1 != q.len() {
            return Err(invalid(format!(
                "expected {} p-entries for n = {n}, got {}",
                n - 1,
                p.len()
            )));
        }
        if let Some(bad) = p.iter().chain(&q).find(|&&x| x < 1) {
            return Err(invalid(format!("parameters must be at least 1, got {bad}")));
        }
        Ok(ModelDiagram { n, p, q })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn p(&self) -> &[u32] {
        &self.p
    }

    pub fn q(&self) -> &[u32] {
        &self.q
    }
}

/// Component order: U₁…Uₙ, chain circles P₁…P_{n−1}, meridians M₁…Mₙ.
pub fn linking_matrix(m: &ModelDiagram) -> FramedDiagram {
    let n = m.n as usize;
    let mut components: Vec<Component> = (1..=m.n).map(Component::Unknot).collect();
    let mut links: Vec<Vec<usize>> = Vec::new();
    for (i, &pi) in m.p.iter().enumerate() {
        for k in 1..=pi {
            components.push(Component::Chain {
                left: i as u32 + 1,
                copy: k,
            });
            links.push(vec![i, i + 1]);
        }
    }
    for (i, &qi) in m.q.iter().enumerate() {
        for k in 1..=qi {
            components.push(Component::Meridian {
                of: i as u32 + 1,
                copy: k,
            });
            links.push(vec![i]);
        }
    }
    let mut q = SymMatrix::zeros(components.len());
    for (c, us) in links.iter().enumerate() {
        q.set(n + c, n + c, BigInt::from(-1));
        for &u in us {
            q.set(n + c, u, BigInt::one());
        }
    }
    FramedDiagram {
        components,
        matrix: q,
    }
}

/// Surgery diagram of the positive monodromy Π δᵢ^{nᵢ} Π γⱼ^{mⱼ}.
pub fn diagram_from_factorization(f: &Factorization) -> Result<FramedDiagram> {
    if !f.is_positive() {
        return Err(invalid("the factorization has a nonempty left-handed tail"));
    }
    let n = f.surface().n() as usize;
    if let Some(i) = (1..=n as u32).find(|&i| f.delta(i) == 0) {
        return Err(invalid(format!("exponent of delta_{i} must be at least 1")));
    }
    if let Some(j) = (2..=n as u32).find(|&j| f.gamma(j) == 0) {
        return Err(invalid(format!("exponent of gamma_{j} must be at least 1")));
    }
    let mut components: Vec<Component> = (1..=n as u32).map(Component::Unknot).collect();
    let mut links: Vec<Vec<usize>> = Vec::new();
    for i in 1..=n as u32 {
        for k in 1..=f.delta(i) as u32 {
            components.push(Component::Meridian { of: i, copy: k });
            links.push(vec![i as usize - 1]);
        }
    }
    for j in 2..=n as u32 {
        for k in 1..=f.gamma(j) as u32 {
            components.push(Component::Gamma { j, copy: k });
            links.push((0..j as usize).collect());
        }
    }
    let mut q = SymMatrix::zeros(components.len());
    for (c, us) in links.iter().enumerate() {
        q.set(n + c, n + c, BigInt::from(-1));
        for &u in us {
            q.set(n + c, u, BigInt::one());
        }
    }
    Ok(FramedDiagram {
        components,
        matrix: q,
    })
}

/// Positions of U1…Un, requiring them to be present exactly once and to span a zero block.
fn unknot_positions(d: &FramedDiagram) -> Result<Vec<usize>> {
    let mut found: BTreeMap<u32, usize> = BTreeMap::new();
    for (k, c) in d.components.iter().enumerate() {
        if let Component::Unknot(i) = c {
            if found.insert(*i, k).is_some() {
                return Err(Error::Shape(format!("U{i} appears twice")));
            }
        }
    }
    let n = found.len() as u32;
    if n == 0 || found.keys().copied().ne(1..=n) {
        return Err(Error::Shape("unknots must be labelled U1..Un".into()));
    }
    let pos: Vec<usize> = found.into_values().collect();
    for &a in &pos {
        for &b in &pos {
            if !d.matrix.get(a, b).is_zero() {
                return Err(Error::Shape(
                    "the 0-framed unknots must be unlinked and 0-framed".into(),
                ));
            }
        }
    }
    Ok(pos)
}

/// The slid diagram of a positive factorization, reoriented and reordered into the
/// [`linking_matrix`] layout, together with the model it realizes.
pub fn chain_slid_diagram(d: &FramedDiagram) -> Result<(FramedDiagram, ModelDiagram)> {
    let us = unknot_positions(d)?;
    let n = us.len();
    let circles: Vec<usize> = (0..d.dim()).filter(|k| !us.contains(k)).collect();
    for (a, &c) in circles.iter().enumerate() {
        if *d.matrix.get(c, c) != BigInt::from(-1) {
            return Err(Error::Shape(format!(
                "{} is not (-1)-framed",
                d.components[c]
            )));
        }
        for &c2 in &circles[..a] {
            if !d.matrix.get(c, c2).is_zero() {
                return Err(Error::Shape(
                    "the (-1)-framed circles must be unlinked".into(),
                ));
            }
        }
        let row: Vec<&BigInt> = us.iter().map(|&u| d.matrix.get(c, u)).collect();
        if row.iter().any(|x| !x.is_zero() && !x.is_one()) {
            return Err(Error::Shape("linking numbers must be 0 or 1".into()));
        }
        let support: Vec<usize> = (0..n).filter(|&i| row[i].is_one()).collect();
        let is_meridian = support.len() == 1;
        let is_prefix = support.len() >= 2 && support.iter().enumerate().all(|(k, &i)| k == i);
        if !is_meridian && !is_prefix {
            return Err(Error::Shape(format!(
                "{} links an unexpected set of unknots",
                d.components[c]
            )));
        }
    }
    let mut m = d.matrix.clone();
    for i in 0..n.saturating_sub(1) {
        m.add_multiple(us[i], us[i + 1], &BigInt::from(-1));
    }
    // Alternate the orientation of the new unknots so that every linking becomes +1.
    for i in 0..n {
        if (n - 1 - i) % 2 == 1 {
            m.negate_basis(us[i]);
        }
    }
    let mut p = vec![0u32; n.saturating_sub(1)];
    let mut q = vec![0u32; n];
    let mut chain_members: Vec<Vec<usize>> = vec![Vec::new(); n.saturating_sub(1)];
    let mut meridian_members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &c in &circles {
        let row: Vec<BigInt> = us.iter().map(|&u| m.get(c, u).clone()).collect();
        if row.iter().any(|x| x.is_negative()) {
            m.negate_basis(c);
        }
        let support: Vec<usize> = (0..n).filter(|&i| !m.get(c, us[i]).is_zero()).collect();
        match support.as_slice() {
            [i] => {
                q[*i] += 1;
                meridian_members[*i].push(c);
            }
            [i, j] if *j == *i + 1 => {
                p[*i] += 1;
                chain_members[*i].push(c);
            }
            _ => {
                return Err(Error::Shape(
                    "slid circle is not a chain circle or a meridian".into(),
                ))
            }
        }
    }
    let model = ModelDiagram::new(p, q)
        .map_err(|e| Error::Shape(format!("slid diagram is not a model diagram: {e}")))?;
    let mut order: Vec<usize> = us.clone();
    order.extend(chain_members.concat());
    order.extend(meridian_members.concat());
    let slid = FramedDiagram {
        components: d.components.clone(),
        matrix: m,
    }
    .permuted(&order);
    let expect = linking_matrix(&model);
    if slid.matrix != expect.matrix {
        return Err(Error::Shape(
            "slid matrix does not match the model linking matrix".into(),
        ));
    }
    Ok((expect, model))
}

/// Reads off the chain-form parameters after the slides Uᵢ ↦ Uᵢ − Uᵢ₊₁.
pub fn chain_slide(d: &FramedDiagram) -> Result<ModelDiagram> {
    chain_slid_diagram(d).map(|(_, m)| m)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReductionMode {
    DeleteMeridian,
    ZeroSurgeryCancel,
}

/// Result of removing the last unknot: an (n−1)-unknot model, connected-summed with the lens
/// space L(lens_order, lens_order − 1) (S³ when the order is 1).
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LastReduction {
    pub model: ModelDiagram,
    pub lens_order: u32,
}

/// Zero-surgery-cancel: the last meridian K of Uₙ is 0-framed, so (Uₙ, K) splits off a
/// hyperbolic pair and the chain circles at Uₙ become meridians of Uₙ₋₁:
/// q'ₙ₋₁ = qₙ₋₁ + pₙ₋₁. Delete-meridian (qₙ = 1): with K gone, Uₙ cancels against a chain
/// circle, the other pₙ₋₁ − 1 chain circles leave a lens summand of order pₙ₋₁.
pub fn cancel_or_delete_last(m: &ModelDiagram, mode: ReductionMode) -> Result<LastReduction> {
    let n = m.n as usize;
    if n < 2 {
        return Err(invalid("removing the last unknot needs n >= 2"));
    }
    let p: Vec<u32> = m.p[..n - 2].to_vec();
    let mut q: Vec<u32> = m.q[..n - 1].to_vec();
    match mode {
        ReductionMode::ZeroSurgeryCancel => {
            q[n - 2] += m.p[n - 2];
            Ok(LastReduction {
                model: ModelDiagram::new(p, q)?,
                lens_order: 1,
            })
        }
        ReductionMode::DeleteMeridian => {
            if m.q[n - 1] != 1 {
                return Err(invalid("delete-meridian needs q_n = 1"));
            }
            Ok(LastReduction {
                model: ModelDiagram::new(p, q)?,
                lens_order: m.p[n - 2],
            })
        }
    }
}

/// The three surgery diagrams of the triad on K = last meridian of Uₙ:
/// Y₁ (K removed), Y₂ (K framed −1, the model itself) and Y₃ (K framed 0).
pub struct TriadDiagrams {
    pub y1: FramedDiagram,
    pub y2: FramedDiagram,
    pub y3: FramedDiagram,
}

pub fn last_meridian(m: &ModelDiagram) -> Component {
    Component::Meridian {
        of: m.n,
        copy: m.q[m.n as usize - 1],
    }
}

pub fn triad_diagrams(m: &ModelDiagram) -> TriadDiagrams {
    let y2 = linking_matrix(m);
    let k = y2
        .index_of(&last_meridian(m))
        .expect("model has a last meridian");
    TriadDiagrams {
        y1: y2.remove(k),
        y3: y2.with_framing(k, BigInt::zero()),
        y2,
    }
}

/// Evidence from the W₃ computation of one triad step.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct W3Evidence {
    pub residual_components: Vec<Component>,
    pub residual: SymMatrix,
    pub invariants: FormInvariants,
    pub positive_definite: bool,
    /// b₂⁺(W₃) = 1, recorded once the residual is positive definite.
    pub b2_plus_w3: Option<u32>,
    pub failure: Option<String>,
}

impl W3Evidence {
    fn failed(d: &FramedDiagram, why: String) -> Self {
        W3Evidence {
            residual_components: d.components.clone(),
            residual: d.matrix.clone(),
            invariants: d.invariants(),
            positive_definite: false,
            b2_plus_w3: None,
            failure: Some(why),
        }
    }

    pub fn passed(&self) -> bool {
        self.positive_definite && self.failure.is_none()
    }
}

/// The ambient diagram: the model with K = last meridian of Uₙ, plus C (−1, meridian of K)
/// and D (−1, meridian of C).
pub fn w3_ambient(m: &ModelDiagram) -> FramedDiagram {
    let mut d = linking_matrix(m);
    let k = d
        .index_of(&last_meridian(m))
        .expect("model has a last meridian");
    d.push(Component::AuxC, -1, &[(k, 1)]);
    let c = d.dim() - 1;
    d.push(Component::AuxD, -1, &[(c, 1)]);
    d
}

/// Blows down C, slides D over Uₙ to unlink it from K, splits off the hyperbolic pair
/// (K, Uₙ), blows down every remaining (−1)-circle and tests the residual for definiteness.
pub fn w3_check(ambient: &FramedDiagram) -> Result<W3Evidence> {
    let us = unknot_positions(ambient).map_err(|e| Error::Shape(format!("W3 ambient: {e}")))?;
    let c = ambient
        .index_of(&Component::AuxC)
        .ok_or_else(|| Error::Shape("no component C".into()))?;
    let partners: Vec<usize> = (0..ambient.dim())
        .filter(|&k| k != c && ambient.components[k] != Component::AuxD)
        .filter(|&k| !ambient.matrix.get(c, k).is_zero())
        .collect();
    let [k_idx] = partners[..] else {
        return Err(Error::Shape(
            "C must link exactly one component besides D".into(),
        ));
    };
    let k_label = ambient.components[k_idx].clone();
    let un_label = ambient.components[*us.last().unwrap()].clone();

    let d1 = match blow_down(ambient, c) {
        Ok(d) => d,
        Err(e) => return Ok(W3Evidence::failed(ambient, format!("blowing down C: {e}"))),
    };
    let at = |d: &FramedDiagram, l: &Component| d.index_of(l).expect("label present");
    let (k, dd, un) = (
        at(&d1, &k_label),
        at(&d1, &Component::AuxD),
        at(&d1, &un_label),
    );
    let mut d2 = d1.clone();
    let coeff = d1.matrix.get(dd, k) * d1.matrix.get(un, k);
    d2.matrix.add_multiple(dd, un, &(-coeff));
    if !d2.matrix.get(dd, k).is_zero() {
        return Ok(W3Evidence::failed(
            &d2,
            "D still links K after the slide".into(),
        ));
    }

    // Orthogonal projection away from the pair e = K, f = Uₙ (needs e² = 0, e·f = ±1).
    let (e, f) = (k, un);
    let ef = d2.matrix.get(e, f).clone();
    if !d2.matrix.get(e, e).is_zero() || ef.abs() != BigInt::one() {
        return Ok(W3Evidence::failed(
            &d2,
            "K and U_n do not span a hyperbolic pair".into(),
        ));
    }
    let ff = d2.matrix.get(f, f).clone();
    let dim = d2.dim();
    let keep: Vec<usize> = (0..dim).filter(|&x| x != e && x != f).collect();
    let vectors: Vec<Vec<BigInt>> = keep
        .iter()
        .map(|&y| {
            let b = d2.matrix.get(y, e) * &ef;
            let a = (d2.matrix.get(y, f) - &b * &ff) * &ef;
            let mut v = vec![BigInt::zero(); dim];
            v[y] = BigInt::one();
            v[e] -= a;
            v[f] -= b;
            v
        })
        .collect();
    let mut proj = SymMatrix::zeros(keep.len());
    for i in 0..keep.len() {
        for j in 0..=i {
            proj.set(i, j, d2.matrix.pair(&vectors[i], &vectors[j]));
        }
    }
    let mut d3 = FramedDiagram {
        components: keep.iter().map(|&x| d2.components[x].clone()).collect(),
        matrix: proj,
    };

    let is_circle = |c: &Component| !c.is_unknot() && *c != Component::AuxD;
    while let Some(x) =
        (0..d3.dim()).find(|&x| is_circle(&d3.components[x]) && *d3.framing(x) == BigInt::from(-1))
    {
        d3 = blow_down(&d3, x)?;
    }
    let invariants = d3.invariants();
    let positive_definite = invariants.is_positive_definite();
    Ok(W3Evidence {
        residual_components: d3.components.clone(),
        residual: d3.matrix.clone(),
        positive_definite,
        b2_plus_w3: positive_definite.then_some(1),
        failure: (!positive_definite).then(|| "residual form is not positive definite".to_string()),
        invariants,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TriadBranch {
    /// qₙ ≥ 2: Y₁ is the same model with qₙ − 1.
    MeridianDecremented,
    /// qₙ = 1: Y₁ is an (n−1)-model plus a lens summand.
    LastUnknotCancelled,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct TriadStep {
    pub y2: ModelDiagram,
    pub branch: TriadBranch,
    pub y1: ModelDiagram,
    pub y1_lens_order: u32,
    pub y3: ModelDiagram,
    #[serde(with = "crate::bigjson")]
    pub h1_y1: BigInt,
    #[serde(with = "crate::bigjson")]
    pub h1_y2: BigInt,
    #[serde(with = "crate::bigjson")]
    pub h1_y3: BigInt,
    pub determinant_identity: bool,
    pub parameters_confirmed: bool,
    pub w3: W3Evidence,
    pub passed: bool,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CertificateStep {
    /// n = 1: blowing down the q₁ meridians leaves one unknot framed q₁, the lens space L(q₁, 1).
    LensBase {
        model: ModelDiagram,
        #[serde(with = "crate::bigjson")]
        framing: BigInt,
        #[serde(with = "crate::bigjson")]
        h1: BigInt,
        passed: bool,
    },
    /// A lens summand L(p, p − 1) split off in the qₙ = 1 branch; its form −(I + J) has
    /// determinant ±p.
    LensSummand {
        order: u32,
        #[serde(with = "crate::bigjson")]
        h1: BigInt,
        passed: bool,
    },
    Triad(Box<TriadStep>),
}

impl CertificateStep {
    pub fn passed(&self) -> bool {
        match self {
            CertificateStep::LensBase { passed, .. }
            | CertificateStep::LensSummand { passed, .. } => *passed,
            CertificateStep::Triad(t) => t.passed,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Failure,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct LSpaceCertificate {
    pub model: ModelDiagram,
    pub verdict: Verdict,
    pub steps: Vec<CertificateStep>,
}

/// Blows down every meridian of the n = 1 model.
pub fn lens_base(m: &ModelDiagram) -> Result<(FramedDiagram, CertificateStep)> {
    if m.n != 1 {
        return Err(invalid("the lens base case needs n = 1"));
    }
    let mut d = linking_matrix(m);
    while d.dim() > 1 {
        d = blow_down(&d, d.dim() - 1)?;
    }
    let framing = d.framing(0).clone();
    let h1 = d.matrix.det().abs();
    let passed = framing == BigInt::from(m.q[0]) && h1 == BigInt::from(m.q[0]);
    Ok((
        d,
        CertificateStep::LensBase {
            model: m.clone(),
            framing,
            h1,
            passed,
        },
    ))
}

fn lens_summand_form(p: u32) -> SymMatrix {
    let k = p.saturating_sub(1) as usize;
    let mut q = SymMatrix::zeros(k);
    for i in 0..k {
        for j in 0..=i {
            q.set(i, j, BigInt::from(if i == j { -2 } else { -1 }));
        }
    }
    q
}

fn lens_summand_step(p: u32) -> CertificateStep {
    let h1 = lens_summand_form(p).det().abs();
    CertificateStep::LensSummand {
        order: p,
        passed: h1 == BigInt::from(p),
        h1,
    }
}

fn abs_det(d: &FramedDiagram) -> BigInt {
    d.matrix.det().abs()
}

/// One inductive step on the triad of K = last meridian of Uₙ (n ≥ 2).
pub fn triad_step(m: &ModelDiagram) -> Result<TriadStep> {
    let n = m.n as usize;
    if n < 2 {
        return Err(invalid("triad steps need n >= 2"));
    }
    let TriadDiagrams { y1, y2, y3 } = triad_diagrams(m);
    let (h1_y1, h1_y2, h1_y3) = (abs_det(&y1), abs_det(&y2), abs_det(&y3));
    let determinant_identity = h1_y2 == &h1_y1 + &h1_y3;

    let qn = m.q[n - 1];
    let (branch, y1_model, lens) = if qn >= 2 {
        let mut q = m.q.clone();
        q[n - 1] -= 1;
        (
            TriadBranch::MeridianDecremented,
            ModelDiagram::new(m.p.clone(), q)?,
            1,
        )
    } else {
        let r = cancel_or_delete_last(m, ReductionMode::DeleteMeridian)?;
        (TriadBranch::LastUnknotCancelled, r.model, r.lens_order)
    };
    let y3_model = cancel_or_delete_last(m, ReductionMode::ZeroSurgeryCancel)?.model;
    let parameters_confirmed = h1_y1 == abs_det(&linking_matrix(&y1_model)) * BigInt::from(lens)
        && h1_y3 == abs_det(&linking_matrix(&y3_model));

    let w3 = w3_check(&w3_ambient(m))?;
    let passed = determinant_identity && parameters_confirmed && w3.passed();
    Ok(TriadStep {
        y2: m.clone(),
        branch,
        y1: y1_model,
        y1_lens_order: lens,
        y3: y3_model,
        h1_y1,
        h1_y2,
        h1_y3,
        determinant_identity,
        parameters_confirmed,
        w3,
        passed,
    })
}

/// Replays the induction on (n, qₙ); every model is certified once, before the steps using it.
pub fn lspace_certificate(m: &ModelDiagram) -> Result<LSpaceCertificate> {
    fn visit(
        m: &ModelDiagram,
        done: &mut std::collections::HashSet<ModelDiagram>,
        lens_done: &mut std::collections::HashSet<u32>,
        steps: &mut Vec<CertificateStep>,
    ) -> Result<()> {
        if done.contains(m) {
            return Ok(());
        }
        if m.n == 1 {
            steps.push(lens_base(m)?.1);
        } else {
            let t = triad_step(m)?;
            visit(&t.y1, done, lens_done, steps)?;
            if t.y1_lens_order > 1 && lens_done.insert(t.y1_lens_order) {
                steps.push(lens_summand_step(t.y1_lens_order));
            }
            visit(&t.y3, done, lens_done, steps)?;
            steps.push(CertificateStep::Triad(Box::new(t)));
        }
        done.insert(m.clone());
        Ok(())
    }
    let mut steps = Vec::new();
    visit(
        m,
        &mut Default::default(),
        &mut Default::default(),
        &mut steps,
    )?;
    let verdict = if steps.iter().all(CertificateStep::passed) {
        Verdict::Success
    } else {
        Verdict::Failure
    };
    Ok(LSpaceCertificate {
        model: m.clone(),
        verdict,
        steps,
    })
}

impl LSpaceCertificate {
    /// Recomputes every step from scratch and checks that each triad only uses manifolds
    /// certified earlier in the list.
    pub fn reverify(&self) -> bool {
        let mut certified: std::collections::HashSet<ModelDiagram> = Default::default();
        let mut lenses: std::collections::HashSet<u32> = [1].into_iter().collect();
        for step in &self.steps {
            match step {
                CertificateStep::LensBase { model, .. } => match lens_base(model) {
                    Ok((_, fresh)) if fresh == *step && fresh.passed() => {
                        certified.insert(model.clone());
                    }
                    _ => return false,
                },
                CertificateStep::LensSummand { order, .. } => {
                    let fresh = lens_summand_step(*order);
                    if fresh != *step || !fresh.passed() {
                        return false;
                    }
                    lenses.insert(*order);
                }
                CertificateStep::Triad(t) => {
                    let Ok(fresh) = triad_step(&t.y2) else {
                        return false;
                    };
                    if fresh != **t || !fresh.passed {
                        return false;
                    }
                    if !certified.contains(&t.y1)
                        || !certified.contains(&t.y3)
                        || !lenses.contains(&t.y1_lens_order)
                    {
                        return false;
                    }
                    certified.insert(t.y2.clone());
                }
            }
        }
        self.verdict == Verdict::Success && certified.contains(&self.model)
    }
}
