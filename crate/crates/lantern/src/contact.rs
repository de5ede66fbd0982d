//! The d₃ invariant from filling data and the planarity obstruction rules.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::matrix::SymMatrix;

/// Exact rationals in JSON: integers as numbers, everything else as "a/b" strings.
pub mod rational {
    use super::*;
    use num_traits::ToPrimitive;
    use serde::de::{self, Deserializer, Visitor};
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        match (v.is_integer(), v.numer().to_i64()) {
            (true, Some(x)) => s.serialize_i64(x),
            _ => s.collect_str(v),
        }
    }

    struct RatVisitor;

    impl Visitor<'_> for RatVisitor {
        type Value = BigRational;

        fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
            write!(f, "an integer or a rational string \"a/b\"")
        }

        fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }

        fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<BigRational, E> {
            Ok(BigRational::from_integer(v.into()))
        }

        fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<BigRational, E> {
            parse(v).ok_or_else(|| E::custom(format!("not a rational: {v:?}")))
        }
    }

    pub fn parse(v: &str) -> Option<BigRational> {
        let v = v.trim();
        match v.split_once('/') {
            Some((a, b)) => {
                let (a, b): (BigInt, BigInt) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
                (!b.is_zero()).then(|| BigRational::new(a, b))
            }
            None => Some(BigRational::from_integer(v.parse().ok()?)),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<BigRational, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FillingData {
    pub matrix: SymMatrix,
    #[serde(with = "crate::bigjson::vec")]
    pub rot: Vec<BigInt>,
    pub chi_x0: i64,
    pub sigma: i64,
}

impl FillingData {
    pub fn new(matrix: SymMatrix, rot: Vec<BigInt>, chi_x0: i64, sigma: i64) -> Result<Self> {
        if rot.len() != matrix.dim() {
            return Err(Error::DimensionMismatch {
                left: matrix.dim(),
                right: rot.len(),
            });
        }
        Ok(FillingData {
            matrix,
            rot,
            chi_x0,
            sigma,
        })
    }
}

/// r·a where Qa = r.
pub fn c1_squared(q: &SymMatrix, r: &[BigInt]) -> Result<BigRational> {
    if r.len() != q.dim() {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: r.len(),
        });
    }
    let a = q.solve(r).ok_or_else(|| {
        Error::DegenerateForm("c1^2 needs a nondegenerate intersection form".into())
    })?;
    Ok(r.iter()
        .zip(&a)
        .map(|(x, y)| BigRational::from_integer(x.clone()) * y)
        .sum())
}

/// ¼(c₁² − 3σ − 2χ(X₀)).
pub fn d3_from_filling(f: &FillingData) -> Result<BigRational> {
    let c1 = c1_squared(&f.matrix, &f.rot)?;
    let rest = BigRational::from_integer(BigInt::from(3 * f.sigma + 2 * f.chi_x0));
    Ok((c1 - rest) / BigRational::from_integer(4.into()))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct LegendrianKnotData {
    pub tb: i64,
    pub rot: i64,
}

impl LegendrianKnotData {
    pub fn new(tb: i64, rot: i64) -> Result<Self> {
        if (tb + rot).rem_euclid(2) != 1 {
            return Err(invalid(format!(
                "tb + rot must be odd (tb = {tb}, rot = {rot})"
            )));
        }
        Ok(LegendrianKnotData { tb, rot })
    }
}

/// Contact (−1)-surgery on a Legendrian knot in S³: one 2-handle with framing tb − 1.
pub fn legendrian_surgery_presentation(k: LegendrianKnotData) -> Result<FillingData> {
    let k = LegendrianKnotData::new(k.tb, k.rot)?;
    let framing = k.tb - 1;
    FillingData::new(
        SymMatrix::diagonal(&[framing]),
        vec![k.rot.into()],
        1,
        framing.signum(),
    )
}

fn default_ambient() -> String {
    "S3".into()
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendrianHypothesis {
    pub tb: i64,
    pub rot: i64,
    #[serde(default = "default_ambient")]
    pub ambient: String,
}

/// A fillable structure on a rational homology sphere, with d₃ given directly or through a filling.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FillableQhsHypothesis {
    #[serde(
        default,
        with = "opt_rational",
        skip_serializing_if = "Option::is_none"
    )]
    pub d3: Option<BigRational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filling: Option<FillingData>,
    #[serde(with = "rational")]
    pub correction_term: BigRational,
}

mod opt_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrap(#[serde(with = "super::rational")] BigRational);

    pub fn serialize<S: Serializer>(
        v: &Option<BigRational>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        v.clone().map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<BigRational>, D::Error> {
        Ok(Option::<Wrap>::deserialize(d)?.map(|w| w.0))
    }
}

/// User-declared hypotheses; nothing here is verified, only consequences are derived.
#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rules {
    #[serde(default)]
    pub c1_spin_nontorsion: bool,
    #[serde(default)]
    pub cplus_nonzero: bool,
    #[serde(default)]
    pub stein_c1_nonzero: bool,
    #[serde(default)]
    pub c1_xi_zero: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub legendrian_tb0: Option<LegendrianHypothesis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fillable_qhs: Option<FillableQhsHypothesis>,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypothesisSet {
    #[serde(default)]
    pub rules: Rules,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum RuleTag {
    R1,
    R2,
    R3,
    R4,
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    /// ξ is not supported by a planar open book.
    NotPlanar,
    /// ξ cannot be both fillable and supported by a planar open book.
    NotFillableAndPlanar,
    /// The correction-term condition holds; nothing is obstructed.
    CorrectionTermSatisfied,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RuleVerdict {
    pub rule: RuleTag,
    pub verdict: VerdictKind,
    pub obstructs: bool,
    /// The premises the rule used.
    pub because: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ObstructionReport {
    pub verdicts: Vec<RuleVerdict>,
    pub obstructed: bool,
    pub summary: String,
}

fn rat_json(v: &BigRational) -> serde_json::Value {
    #[derive(Serialize)]
    struct W<'a>(#[serde(with = "rational")] &'a BigRational);
    serde_json::to_value(W(v)).expect("rational serializes")
}

pub fn obstruction_report(h: &HypothesisSet) -> Result<ObstructionReport> {
    let r = &h.rules;
    if r.c1_xi_zero && r.c1_spin_nontorsion {
        return Err(Error::Contradiction(
            "c1(xi) = 0 makes s(xi) torsion, yet s(xi) is declared nontorsion".into(),
        ));
    }
    let mut verdicts = Vec::new();
    if r.c1_spin_nontorsion && r.cplus_nonzero {
        verdicts.push(RuleVerdict {
            rule: RuleTag::R1,
            verdict: VerdictKind::NotPlanar,
            obstructs: true,
            because: "c+(xi) != 0 and s(xi) nontorsion".into(),
            details: None,
        });
    }
    if r.stein_c1_nonzero && r.c1_xi_zero {
        verdicts.push(RuleVerdict {
            rule: RuleTag::R2,
            verdict: VerdictKind::NotPlanar,
            obstructs: true,
            because: "Stein filling with c1(X,J) != 0 and c1(xi) = 0".into(),
            details: None,
        });
    }
    if let Some(k) = &r.legendrian_tb0 {
        if k.tb != 0 {
            return Err(invalid(format!("legendrian_tb0 declares tb = {}", k.tb)));
        }
        if k.ambient != "S3" {
            return Err(invalid(format!(
                "legendrian_tb0 needs ambient S3, got {:?}",
                k.ambient
            )));
        }
        let data = LegendrianKnotData::new(k.tb, k.rot).map_err(|_| {
            Error::Contradiction(format!(
                "a tb = 0 knot has odd rotation number, got {}",
                k.rot
            ))
        })?;
        let d3 = d3_from_filling(&legendrian_surgery_presentation(data)?)?;
        verdicts.push(RuleVerdict {
            rule: RuleTag::R3,
            verdict: VerdictKind::NotPlanar,
            obstructs: true,
            because: "contact (-1)-surgery on a tb = 0 Legendrian knot in S3".into(),
            details: Some(serde_json::json!({ "tb": k.tb, "rot": k.rot, "d3": rat_json(&d3) })),
        });
    }
    if let Some(f) = &r.fillable_qhs {
        let from_filling = f.filling.as_ref().map(d3_from_filling).transpose()?;
        let d3 = match (&f.d3, &from_filling) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::Contradiction(format!(
                    "declared d3 = {a} but the filling gives {b}"
                )));
            }
            (Some(a), _) => a.clone(),
            (None, Some(b)) => b.clone(),
            (None, None) => return Err(invalid("fillable_qhs needs d3 or a filling")),
        };
        let holds = d3 == f.correction_term;
        verdicts.push(RuleVerdict {
            rule: RuleTag::R4,
            verdict: if holds { VerdictKind::CorrectionTermSatisfied } else { VerdictKind::NotFillableAndPlanar },
            obstructs: !holds,
            because: "fillable structure on a rational homology sphere; planarity forces d3(xi) = d(-Y,s)".into(),
            details: Some(serde_json::json!({
                "d3": rat_json(&d3),
                "correction_term": rat_json(&f.correction_term),
                "equal": holds,
            })),
        });
    }
    let obstructed = verdicts.iter().any(|v| v.obstructs);
    let summary = if verdicts.is_empty() {
        "no obstruction derived".to_string()
    } else if obstructed {
        let tags: Vec<String> = verdicts
            .iter()
            .filter(|v| v.obstructs)
            .map(|v| v.rule.to_string())
            .collect();
        format!("obstructed by {}", tags.join(", "))
    } else {
        "no obstruction derived".to_string()
    };
    Ok(ObstructionReport {
        verdicts,
        obstructed,
        summary,
    })
}

pub fn rot_vector(values: &[i64]) -> Vec<BigInt> {
    values.iter().map(|&v| BigInt::from(v)).collect()
}

impl fmt::Display for ObstructionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.summary)?;
        for v in &self.verdicts {
            writeln!(f, "  [{}] {:?}: {}", v.rule, v.verdict, v.because)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(x: i64) -> BigRational {
        BigRational::from_integer(x.into())
    }

    fn filling(rows: &[Vec<i64>], r: &[i64], sigma: i64, chi: i64) -> FillingData {
        FillingData::new(
            SymMatrix::from_i64(rows).unwrap(),
            rot_vector(r),
            chi,
            sigma,
        )
        .unwrap()
    }

    #[test]
    fn c1_squared_examples() {
        let m = |rows: &[Vec<i64>]| SymMatrix::from_i64(rows).unwrap();
        assert_eq!(
            c1_squared(&m(&[vec![-1]]), &rot_vector(&[3])).unwrap(),
            q(-9)
        );
        assert_eq!(
            c1_squared(&m(&[vec![-1, 0], vec![0, -1]]), &rot_vector(&[1, 1])).unwrap(),
            q(-2)
        );
        assert_eq!(
            c1_squared(&m(&[vec![0, 1], vec![1, 0]]), &rot_vector(&[1, 0])).unwrap(),
            q(0)
        );
        assert_eq!(
            c1_squared(&m(&[vec![3]]), &rot_vector(&[1])).unwrap(),
            BigRational::new(1.into(), 3.into())
        );
        assert!(matches!(
            c1_squared(&m(&[vec![0]]), &rot_vector(&[1])),
            Err(Error::DegenerateForm(_))
        ));
    }

    #[test]
    fn d3_examples() {
        assert_eq!(
            d3_from_filling(&filling(&[vec![-1]], &[1], -1, 1)).unwrap(),
            q(0)
        );
        assert_eq!(
            d3_from_filling(&filling(&[vec![-1]], &[3], -1, 1)).unwrap(),
            q(-2)
        );
        assert_eq!(
            d3_from_filling(&filling(&[vec![-1, 0], vec![0, -1]], &[1, 1], -2, 2)).unwrap(),
            q(0)
        );
    }

    #[test]
    fn legendrian_presentations() {
        let f = legendrian_surgery_presentation(LegendrianKnotData { tb: 0, rot: 1 }).unwrap();
        assert_eq!(f, filling(&[vec![-1]], &[1], -1, 1));
        assert_eq!(d3_from_filling(&f).unwrap(), q(0));
        assert!(legendrian_surgery_presentation(LegendrianKnotData { tb: 0, rot: 2 }).is_err());
        let f = legendrian_surgery_presentation(LegendrianKnotData { tb: -1, rot: 0 }).unwrap();
        assert_eq!(f.matrix, SymMatrix::from_i64(&[vec![-2]]).unwrap());
        assert_eq!(c1_squared(&f.matrix, &f.rot).unwrap(), q(0));
        for rot in [-5i64, -3, -1, 1, 3, 5] {
            let f = legendrian_surgery_presentation(LegendrianKnotData { tb: 0, rot }).unwrap();
            assert_eq!(
                d3_from_filling(&f).unwrap(),
                BigRational::new((1 - rot * rot).into(), 4.into())
            );
        }
    }

    fn report(json: &str) -> Result<ObstructionReport> {
        obstruction_report(&serde_json::from_str(json).unwrap())
    }

    #[test]
    fn rule_examples() {
        let r = report(r#"{"rules":{"legendrian_tb0":{"tb":0,"rot":1}}}"#).unwrap();
        assert_eq!(r.verdicts.len(), 1);
        assert_eq!(
            (r.verdicts[0].rule, r.verdicts[0].verdict),
            (RuleTag::R3, VerdictKind::NotPlanar)
        );
        assert!(r.obstructed);

        let r = report(r#"{"rules":{}}"#).unwrap();
        assert!(r.verdicts.is_empty() && !r.obstructed);
        assert_eq!(r.summary, "no obstruction derived");
        assert!(report("{}").unwrap().verdicts.is_empty());

        let r = report(r#"{"rules":{"fillable_qhs":{"d3":-2,"correction_term":0}}}"#).unwrap();
        assert_eq!(r.verdicts[0].verdict, VerdictKind::NotFillableAndPlanar);
        assert!(r.obstructed);
    }

    #[test]
    fn r4_is_exact() {
        let r =
            report(r#"{"rules":{"fillable_qhs":{"d3":"-1/4","correction_term":"-2/8"}}}"#).unwrap();
        assert_eq!(r.verdicts[0].verdict, VerdictKind::CorrectionTermSatisfied);
        assert!(!r.obstructed);
        let r = report(r#"{"rules":{"fillable_qhs":{"d3":"1/3","correction_term":"333333333333/1000000000000"}}}"#).unwrap();
        assert!(r.obstructed);
        let via_filling = r#"{"rules":{"fillable_qhs":{"filling":{"matrix":[[-1]],"rot":[3],"chi_x0":1,"sigma":-1},"correction_term":-2}}}"#;
        assert!(!report(via_filling).unwrap().obstructed);
    }

    #[test]
    fn contradictions_and_bad_input() {
        assert!(matches!(
            report(r#"{"rules":{"c1_xi_zero":true,"c1_spin_nontorsion":true}}"#),
            Err(Error::Contradiction(_))
        ));
        assert!(matches!(
            report(r#"{"rules":{"legendrian_tb0":{"tb":0,"rot":2}}}"#),
            Err(Error::Contradiction(_))
        ));
        assert!(report(r#"{"rules":{"legendrian_tb0":{"tb":1,"rot":0}}}"#).is_err());
        let clash = r#"{"rules":{"fillable_qhs":{"d3":5,"filling":{"matrix":[[-1]],"rot":[1],"chi_x0":1,"sigma":-1},"correction_term":0}}}"#;
        assert!(matches!(report(clash), Err(Error::Contradiction(_))));
        assert!(serde_json::from_str::<HypothesisSet>(r#"{"rules":{"bogus":true}}"#).is_err());
    }

    #[test]
    fn r1_r2_fire_on_full_premises_only() {
        assert!(report(r#"{"rules":{"cplus_nonzero":true}}"#)
            .unwrap()
            .verdicts
            .is_empty());
        let r = report(r#"{"rules":{"cplus_nonzero":true,"c1_spin_nontorsion":true}}"#).unwrap();
        assert_eq!(r.verdicts[0].rule, RuleTag::R1);
        let r = report(r#"{"rules":{"stein_c1_nonzero":true,"c1_xi_zero":true}}"#).unwrap();
        assert_eq!(r.verdicts[0].rule, RuleTag::R2);
    }

    fn arb_rules() -> impl Strategy<Value = Rules> {
        (
            any::<[bool; 4]>(),
            prop::option::of(prop::sample::select(vec![-5i64, -3, -1, 1, 3])),
            prop::option::of((-3i64..3, -3i64..3)),
        )
            .prop_map(|(b, rot, fill)| Rules {
                c1_spin_nontorsion: b[0],
                cplus_nonzero: b[1],
                stein_c1_nonzero: b[2],
                c1_xi_zero: b[3] && !b[0],
                legendrian_tb0: rot.map(|rot| LegendrianHypothesis {
                    tb: 0,
                    rot,
                    ambient: "S3".into(),
                }),
                fillable_qhs: fill.map(|(d, c)| FillableQhsHypothesis {
                    d3: Some(q(d)),
                    filling: None,
                    correction_term: q(c),
                }),
            })
    }

    /// Fills every unset hypothesis of `a` from `b`.
    fn merge(a: &Rules, b: &Rules) -> Rules {
        Rules {
            c1_spin_nontorsion: a.c1_spin_nontorsion || (b.c1_spin_nontorsion && !a.c1_xi_zero),
            cplus_nonzero: a.cplus_nonzero || b.cplus_nonzero,
            stein_c1_nonzero: a.stein_c1_nonzero || b.stein_c1_nonzero,
            c1_xi_zero: a.c1_xi_zero || (b.c1_xi_zero && !a.c1_spin_nontorsion),
            legendrian_tb0: a
                .legendrian_tb0
                .clone()
                .or_else(|| b.legendrian_tb0.clone()),
            fillable_qhs: a.fillable_qhs.clone().or_else(|| b.fillable_qhs.clone()),
        }
    }

    fn congruence(f: &FillingData, ops: &[(usize, usize, i64)]) -> FillingData {
        let mut g = f.clone();
        for &(i, j, s) in ops {
            let (i, j) = (i % g.rot.len(), j % g.rot.len());
            if i == j {
                g.matrix.negate_basis(i);
                g.rot[i] = -g.rot[i].clone();
            } else {
                g.matrix.add_multiple(i, j, &s.into());
                let add = &g.rot[j] * s;
                g.rot[i] += add;
            }
        }
        g
    }

    proptest! {
        #[test]
        fn rule_engine_is_monotone(a in arb_rules(), b in arb_rules()) {
            let small = obstruction_report(&HypothesisSet { rules: a.clone() }).unwrap();
            let big = obstruction_report(&HypothesisSet { rules: merge(&a, &b) }).unwrap();
            for v in &small.verdicts {
                prop_assert!(big.verdicts.contains(v));
            }
            prop_assert!(!small.obstructed || big.obstructed);
        }

        #[test]
        fn r3_fires_for_every_odd_rotation(rot in -20i64..20) {
            let json = format!(r#"{{"rules":{{"legendrian_tb0":{{"tb":0,"rot":{}}}}}}}"#, 2 * rot + 1);
            let r = report(&json).unwrap();
            prop_assert!(r.verdicts.iter().any(|v| v.rule == RuleTag::R3));
        }

        #[test]
        fn d3_invariant_under_congruence(
            diag in prop::collection::vec(prop::sample::select(vec![-3i64, -2, -1, 1, 2, 5]), 1..5),
            r in prop::collection::vec(-4i64..=4, 5),
            ops in prop::collection::vec((0usize..5, 0usize..5, -2i64..=2), 0..8),
        ) {
            let k = diag.len();
            let sigma = diag.iter().map(|x| x.signum()).sum();
            let f = FillingData::new(SymMatrix::diagonal(&diag), rot_vector(&r[..k]), 1 + k as i64, sigma).unwrap();
            let g = congruence(&f, &ops);
            prop_assert_eq!(d3_from_filling(&f).unwrap(), d3_from_filling(&g).unwrap());
        }
    }

    #[test]
    fn rational_json() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W(#[serde(with = "rational")] BigRational);
        assert_eq!(
            serde_json::to_string(&W(BigRational::new(3.into(), (-6).into()))).unwrap(),
            "\"-1/2\""
        );
        assert_eq!(serde_json::to_string(&W(q(4))).unwrap(), "4");
        assert_eq!(
            serde_json::from_str::<W>("\"2/4\"").unwrap(),
            W(BigRational::new(1.into(), 2.into()))
        );
        assert!(serde_json::from_str::<W>("\"1/0\"").is_err());
    }
}
