//! Twists on a planar surface with boundary B₀ (outer) and B₁…Bₙ (inner).

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{invalid, Error, Result};
use crate::free_group::{FreeWord, Substitution};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Surface {
    n: u32,
}

impl Surface {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(invalid(
                "a surface needs at least one inner boundary component",
            ));
        }
        Ok(Surface { n })
    }

    pub fn n(self) -> u32 {
        self.n
    }

    pub fn check_index(self, i: u32) -> Result<()> {
        if i >= 1 && i <= self.n {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                n: self.n,
            })
        }
    }
}

/// Either −∞ (prefix sets) or the largest index missing below max S.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum ComplexityValue {
    NegInfinity,
    Finite(u32),
}

impl fmt::Display for ComplexityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexityValue::NegInfinity => write!(f, "-inf"),
            ComplexityValue::Finite(v) => write!(f, "{v}"),
        }
    }
}

fn normalize_set(s: &[u32]) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Err(invalid("enclosed set must be nonempty"));
    }
    if s.contains(&0) {
        return Err(invalid("boundary indices start at 1"));
    }
    let mut v = s.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

pub fn complexity(s: &[u32]) -> Result<ComplexityValue> {
    let s = normalize_set(s)?;
    let max = *s.last().unwrap();
    let missing = (1..max).rev().find(|k| s.binary_search(k).is_err());
    Ok(missing.map_or(ComplexityValue::NegInfinity, ComplexityValue::Finite))
}

fn is_prefix(s: &[u32]) -> bool {
    s.iter().enumerate().all(|(k, &a)| a == k as u32 + 1)
}

/// A pair of mutually inverse automorphisms carrying a canonical curve onto this one.
#[derive(Debug)]
pub(crate) struct Frame {
    pub(crate) base: Vec<u32>,
    pub(crate) forward: Substitution,
    pub(crate) backward: Substitution,
}

/// A simple closed curve, recorded by the boundary components it encloses and a based word
/// representing it. Canonical curves pass below the punctures they skip; other curves carry a
/// frame mapping a canonical curve onto them.
#[derive(Clone, Debug)]
pub struct CurveSpec {
    enclosed: Vec<u32>,
    word: FreeWord,
    frame: Option<Arc<Frame>>,
}

impl PartialEq for CurveSpec {
    fn eq(&self, other: &Self) -> bool {
        self.enclosed == other.enclosed && self.word == other.word
    }
}

impl Eq for CurveSpec {}

impl Hash for CurveSpec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.enclosed.hash(state);
        self.word.hash(state);
    }
}

impl Serialize for CurveSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CurveSpec", 2)?;
        st.serialize_field("enclosed", &self.enclosed)?;
        st.serialize_field("word", &self.word)?;
        st.end()
    }
}

impl CurveSpec {
    /// The curve enclosing `s` whose word is the increasing product of its generators.
    pub fn canonical(s: &[u32]) -> Result<Self> {
        let enclosed = normalize_set(s)?;
        let word = FreeWord::product_of(enclosed.iter().copied());
        Ok(CurveSpec {
            enclosed,
            word,
            frame: None,
        })
    }

    pub fn delta(i: u32) -> Self {
        CurveSpec::canonical(&[i]).expect("positive index")
    }

    /// The standard curve around B₁…Bⱼ (δ₁ when j = 1).
    pub fn gamma(j: u32) -> Self {
        CurveSpec::canonical(&(1..=j).collect::<Vec<_>>()).expect("positive index")
    }

    /// Curve around {q, r} (q < r) passing above B_{q+1}…B_{r−1}; word x_q·P·x_r·P⁻¹ with
    /// P = x_{q+1}⋯x_{r−1}. Obtained from canonical({q, q+1}) by σ_{r−1}∘⋯∘σ_{q+1}.
    pub fn bridge(q: u32, r: u32) -> Result<Self> {
        if q == 0 || r <= q {
            return Err(invalid(format!(
                "bridge curve needs 1 <= q < r, got ({q}, {r})"
            )));
        }
        if r == q + 1 {
            return CurveSpec::canonical(&[q, r]);
        }
        let mut forward = Substitution::identity(r);
        let mut backward = Substitution::identity(r);
        for i in q + 1..r {
            forward = crate::free_group::artin(r, i, true).after(&forward);
            backward = backward.after(&crate::free_group::artin(r, i, false));
        }
        let word = forward.apply(&FreeWord::product_of([q, q + 1]));
        Ok(CurveSpec {
            enclosed: vec![q, r],
            word,
            frame: Some(Arc::new(Frame {
                base: vec![q, q + 1],
                forward,
                backward,
            })),
        })
    }

    pub(crate) fn framed(enclosed: Vec<u32>, word: FreeWord, frame: Frame) -> Self {
        let canonical_word = FreeWord::product_of(enclosed.iter().copied());
        if enclosed.len() == 1 || word == canonical_word {
            return CurveSpec {
                enclosed,
                word: canonical_word,
                frame: None,
            };
        }
        CurveSpec {
            enclosed,
            word,
            frame: Some(Arc::new(frame)),
        }
    }

    pub fn enclosed(&self) -> &[u32] {
        &self.enclosed
    }

    pub fn word(&self) -> &FreeWord {
        &self.word
    }

    pub fn max_index(&self) -> u32 {
        *self.enclosed.last().unwrap()
    }

    pub(crate) fn frame(&self) -> Option<&Frame> {
        self.frame.as_deref()
    }

    /// True for the canonical curve of its enclosed set.
    pub fn is_canonical(&self) -> bool {
        self.frame.is_none()
    }

    pub fn is_singleton(&self) -> bool {
        self.enclosed.len() == 1
    }

    pub fn is_prefix_set(&self) -> bool {
        is_prefix(&self.enclosed)
    }

    pub fn complexity(&self) -> ComplexityValue {
        complexity(&self.enclosed).expect("enclosed set is nonempty")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum Sign {
    Left,
    Right,
}

impl Sign {
    pub fn as_i32(self) -> i32 {
        match self {
            Sign::Right => 1,
            Sign::Left => -1,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Right => Sign::Left,
            Sign::Left => Sign::Right,
        }
    }

    pub fn from_i32(v: i32) -> Result<Sign> {
        match v {
            1 => Ok(Sign::Right),
            -1 => Ok(Sign::Left),
            _ => Err(invalid(format!("twist sign must be +1 or -1, got {v}"))),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i32(self.as_i32())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Twist {
    pub curve: CurveSpec,
    pub sign: Sign,
}

impl Twist {
    pub fn new(curve: CurveSpec, sign: Sign) -> Self {
        Twist { curve, sign }
    }

    pub fn right(curve: CurveSpec) -> Self {
        Twist {
            curve,
            sign: Sign::Right,
        }
    }

    pub fn left(curve: CurveSpec) -> Self {
        Twist {
            curve,
            sign: Sign::Left,
        }
    }

    pub fn canonical(s: &[u32], sign: Sign) -> Result<Self> {
        Ok(Twist {
            curve: CurveSpec::canonical(s)?,
            sign,
        })
    }

    pub fn delta(i: u32, sign: Sign) -> Self {
        Twist {
            curve: CurveSpec::delta(i),
            sign,
        }
    }

    pub fn gamma(j: u32, sign: Sign) -> Self {
        Twist {
            curve: CurveSpec::gamma(j),
            sign,
        }
    }

    pub fn inverse(&self) -> Twist {
        Twist {
            curve: self.curve.clone(),
            sign: self.sign.flip(),
        }
    }

    pub fn is_delta(&self) -> bool {
        self.curve.is_singleton()
    }

    /// True for the standard γⱼ with j ≥ 2 (canonical curve around a prefix set).
    pub fn is_gamma(&self) -> bool {
        let c = &self.curve;
        !c.is_singleton() && c.is_prefix_set() && c.is_canonical()
    }
}

/// Left twists, δᵢ and standard γⱼ are terminal for the rewriting.
pub fn is_terminal(t: &Twist) -> bool {
    t.sign == Sign::Left || t.is_delta() || t.is_gamma()
}

impl fmt::Display for Twist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.curve;
        if c.is_singleton() {
            write!(f, "d{}", c.enclosed[0])?;
        } else if c.is_canonical() && c.is_prefix_set() {
            write!(f, "g{}", c.max_index())?;
        } else {
            let set: Vec<String> = c.enclosed.iter().map(|a| a.to_string()).collect();
            write!(f, "t{{{}}}", set.join(","))?;
            if !c.is_canonical() {
                write!(f, "<{}>", c.word)?;
            }
        }
        if self.sign == Sign::Left {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

/// A product of twists read left to right (the leftmost letter acts first).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TwistWord {
    surface: Surface,
    letters: Vec<Twist>,
}

impl Serialize for TwistWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("TwistWord", 3)?;
        st.serialize_field("n", &self.surface.n)?;
        st.serialize_field("text", &self.to_string())?;
        st.serialize_field("letters", &self.letters)?;
        st.end()
    }
}

impl TwistWord {
    pub fn new(surface: Surface, letters: Vec<Twist>) -> Result<Self> {
        for t in &letters {
            if t.curve.max_index() > surface.n {
                return Err(Error::IndexOutOfRange {
                    index: t.curve.max_index(),
                    n: surface.n,
                });
            }
        }
        Ok(TwistWord { surface, letters })
    }

    pub fn empty(surface: Surface) -> Self {
        TwistWord {
            surface,
            letters: Vec::new(),
        }
    }

    pub fn surface(&self) -> Surface {
        self.surface
    }

    pub fn n(&self) -> u32 {
        self.surface.n
    }

    pub fn letters(&self) -> &[Twist] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Twist> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, t: Twist) -> Result<()> {
        if t.curve.max_index() > self.surface.n {
            return Err(Error::IndexOutOfRange {
                index: t.curve.max_index(),
                n: self.surface.n,
            });
        }
        self.letters.push(t);
        Ok(())
    }

    pub fn concat(&self, other: &TwistWord) -> Result<TwistWord> {
        if self.surface != other.surface {
            return Err(Error::DimensionMismatch {
                left: self.surface.n as usize,
                right: other.surface.n as usize,
            });
        }
        let mut letters = self.letters.clone();
        letters.extend(other.letters.iter().cloned());
        Ok(TwistWord {
            surface: self.surface,
            letters,
        })
    }

    pub fn inverse(&self) -> TwistWord {
        TwistWord {
            surface: self.surface,
            letters: self.letters.iter().rev().map(Twist::inverse).collect(),
        }
    }

    pub fn right_count(&self) -> usize {
        self.letters
            .iter()
            .filter(|t| t.sign == Sign::Right)
            .count()
    }
}

impl fmt::Display for TwistWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, t) in self.letters.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

/// (complexity, max index), the key that the rewriting strictly lowers.
pub type MeasureKey = (ComplexityValue, u32);

pub fn measure_key(curve: &CurveSpec) -> MeasureKey {
    (curve.complexity(), curve.max_index())
}

/// Multiset of keys over the non-terminal right-handed letters of a word.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Measure(Vec<MeasureKey>);

impl Measure {
    pub fn of(w: &TwistWord) -> Measure {
        let mut keys: Vec<MeasureKey> = w
            .letters
            .iter()
            .filter(|t| !is_terminal(t))
            .map(|t| measure_key(&t.curve))
            .collect();
        keys.sort_unstable_by(|a, b| b.cmp(a));
        Measure(keys)
    }

    pub fn keys(&self) -> &[MeasureKey] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dershowitz–Manna: `self < other` iff they differ and every key with more copies in
    /// `self` is dominated by some strictly larger key with more copies in `other`.
    pub fn dm_less(&self, other: &Measure) -> bool {
        if self == other {
            return false;
        }
        let count = |m: &Measure, k: &MeasureKey| m.0.iter().filter(|x| *x == k).count();
        self.0.iter().all(|x| {
            count(self, x) <= count(other, x)
                || other
                    .0
                    .iter()
                    .any(|y| y > x && count(other, y) > count(self, y))
        })
    }
}

impl PartialOrd for Measure {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self == other {
            Some(Ordering::Equal)
        } else if self.dm_less(other) {
            Some(Ordering::Less)
        } else if other.dm_less(self) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}
