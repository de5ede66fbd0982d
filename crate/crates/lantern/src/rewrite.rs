//! Lantern rewriting of right-handed twists and the positive normal form
//! Π δᵢ^{nᵢ} · Π γⱼ^{mⱼ} · (left-handed tail).

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::free_group::Substitution;
use crate::oracle::{equal, twist_action, word_to_action, MappingClassAction};
use crate::words::{
    is_terminal, measure_key, ComplexityValue, CurveSpec, Frame, Measure, Sign, Surface, Twist,
    TwistWord,
};

/// One lantern relation: the right twist along canonical(S) equals
/// `[β, δ_r, δ_q, λ₀, λ₁⁻¹, λ₂⁻¹]` with r = max S, A = S∖{r}, q = c(S), β around A,
/// λ₀ around A∪{q,r}, λ₁ around A∪{q} and λ₂ the curve around {q,r} passing above the
/// punctures strictly between q and r.
pub fn lantern_step(t: &Twist) -> Result<[Twist; 6]> {
    if t.sign != Sign::Right {
        return Err(invalid("lantern_step needs a right-handed twist"));
    }
    if is_terminal(t) {
        return Err(invalid(format!("{t} is terminal")));
    }
    if !t.curve.is_canonical() {
        return Err(invalid(format!("{t} is not a canonical curve")));
    }
    let s = t.curve.enclosed();
    let r = t.curve.max_index();
    let ComplexityValue::Finite(q) = t.curve.complexity() else {
        return Err(invalid("prefix sets are terminal"));
    };
    let a: Vec<u32> = s[..s.len() - 1].to_vec();
    let with = |extra: &[u32]| {
        let mut v = a.clone();
        v.extend_from_slice(extra);
        v
    };
    Ok([
        Twist::canonical(&a, Sign::Right)?,
        Twist::delta(r, Sign::Right),
        Twist::delta(q, Sign::Right),
        Twist::canonical(&with(&[q, r]), Sign::Right)?,
        Twist::canonical(&with(&[q]), Sign::Left)?,
        Twist::left(CurveSpec::bridge(q, r)?),
    ])
}

/// Replaces a right-handed prefix-set letter whose word is not the standard one by γⱼ, after
/// checking with the oracle that the two twists agree.
fn normalize_prefix_letter(n: u32, t: &Twist) -> Result<Twist> {
    let j = t.curve.max_index();
    let standard = if j == 1 {
        Twist::delta(1, Sign::Right)
    } else {
        Twist::gamma(j, Sign::Right)
    };
    let a = twist_action(n, &t.curve, Sign::Right)?;
    let b = twist_action(n, &standard.curve, Sign::Right)?;
    if equal(&a, &b)? {
        Ok(standard)
    } else {
        Err(Error::Oracle(format!(
            "curve {} around a prefix set is not the standard gamma_{j}",
            t.curve.word()
        )))
    }
}

/// Rewrites until every right-handed letter is δᵢ or γⱼ; also returns the measure of each
/// intermediate word (first entry = input, last = output).
pub fn reduce_right_twists_traced(w: &TwistWord) -> Result<(TwistWord, Vec<Measure>)> {
    let n = w.n();
    let mut letters: Vec<Twist> = w.letters().to_vec();
    let mut trace = vec![Measure::of(w)];
    let mut start = 0;
    while let Some(pos) = (start..letters.len()).find(|&k| !is_terminal(&letters[k])) {
        let t = letters[pos].clone();
        if t.curve.is_prefix_set() {
            letters[pos] = normalize_prefix_letter(n, &t)?;
        } else {
            let step = lantern_step(&t)?;
            letters.splice(pos..pos + 1, step);
            let snapshot = TwistWord::new(w.surface(), letters.clone())?;
            trace.push(Measure::of(&snapshot));
        }
        start = pos;
    }
    Ok((TwistWord::new(w.surface(), letters)?, trace))
}

pub fn reduce_right_twists(w: &TwistWord) -> Result<TwistWord> {
    reduce_right_twists_traced(w).map(|(out, _)| out)
}

/// Conjugates `t` by a class given through its action: the result is f⁻¹·t·f.
pub fn conjugate_twist_by_action(t: &Twist, f: &MappingClassAction) -> Twist {
    if t.curve.is_singleton() || f.loop_map().is_identity() {
        return t.clone();
    }
    let n = f.n();
    let (base, forward, backward) = match t.curve.frame() {
        Some(fr) => (fr.base.clone(), fr.forward.clone(), fr.backward.clone()),
        None => (
            t.curve.enclosed().to_vec(),
            Substitution::identity(n),
            Substitution::identity(n),
        ),
    };
    let forward = f.loop_map().after(&forward);
    let backward = backward.after(f.inverse_loop_map());
    let word = f.loop_map().apply(t.curve.word());
    let curve = CurveSpec::framed(
        t.curve.enclosed().to_vec(),
        word,
        Frame {
            base,
            forward,
            backward,
        },
    );
    Twist::new(curve, t.sign)
}

/// The twist equal to f⁻¹·t·f: same sign and enclosed set, word moved by f.
pub fn conjugate_twist(t: &Twist, f: &TwistWord) -> Result<Twist> {
    if t.curve.max_index() > f.n() {
        return Err(Error::IndexOutOfRange {
            index: t.curve.max_index(),
            n: f.n(),
        });
    }
    Ok(conjugate_twist_by_action(t, &word_to_action(f)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    delta_exponents: BTreeMap<u32, u64>,
    gamma_exponents: BTreeMap<u32, u64>,
    tail: TwistWord,
}

impl Factorization {
    pub fn surface(&self) -> Surface {
        self.tail.surface()
    }

    pub fn delta_exponents(&self) -> &BTreeMap<u32, u64> {
        &self.delta_exponents
    }

    pub fn gamma_exponents(&self) -> &BTreeMap<u32, u64> {
        &self.gamma_exponents
    }

    pub fn delta(&self, i: u32) -> u64 {
        self.delta_exponents.get(&i).copied().unwrap_or(0)
    }

    pub fn gamma(&self, j: u32) -> u64 {
        self.gamma_exponents.get(&j).copied().unwrap_or(0)
    }

    pub fn tail(&self) -> &TwistWord {
        &self.tail
    }

    /// Builds a factorization with empty tail from exponent lists (n₁…nₙ and m₂…mₙ).
    pub fn positive(deltas: &[u64], gammas: &[u64]) -> Result<Self> {
        let n = deltas.len() as u32;
        let surface = Surface::new(n)?;
        if gammas.len() + 1 != deltas.len() {
            return Err(invalid(format!(
                "expected {} gamma exponents, got {}",
                n - 1,
                gammas.len()
            )));
        }
        Ok(Factorization {
            delta_exponents: (1..=n).zip(deltas.iter().copied()).collect(),
            gamma_exponents: (2..=n).zip(gammas.iter().copied()).collect(),
            tail: TwistWord::empty(surface),
        })
    }

    pub fn is_positive(&self) -> bool {
        self.tail.is_empty()
    }

    /// All exponents ≥ 1 and every tail letter left-handed.
    pub fn check_invariants(&self) -> bool {
        let n = self.surface().n();
        (1..=n).all(|i| self.delta(i) >= 1)
            && (2..=n).all(|j| self.gamma(j) >= 1)
            && self.tail.letters().iter().all(|t| t.sign == Sign::Left)
    }

    pub fn reassemble(&self) -> TwistWord {
        let n = self.surface().n();
        let mut letters = Vec::new();
        for i in 1..=n {
            letters.extend((0..self.delta(i)).map(|_| Twist::delta(i, Sign::Right)));
        }
        for j in 2..=n {
            letters.extend((0..self.gamma(j)).map(|_| Twist::gamma(j, Sign::Right)));
        }
        letters.extend(self.tail.letters().iter().cloned());
        TwistWord::new(self.surface(), letters).expect("indices already checked")
    }

    /// Oracle check that the normal form equals `w`.
    pub fn verify_against(&self, w: &TwistWord) -> Result<bool> {
        Ok(self.check_invariants() && crate::oracle::words_equal(&self.reassemble(), w)?)
    }
}

pub fn factorize(w: &TwistWord) -> Result<Factorization> {
    let n = w.n();
    let reduced = reduce_right_twists(w)?;
    let mut deltas = vec![0u64; n as usize + 1];
    let mut gammas = vec![0u64; n as usize + 1];
    let mut tail: Vec<Twist> = Vec::new();
    let mut gamma_actions: BTreeMap<u32, MappingClassAction> = BTreeMap::new();
    for t in reduced.into_letters() {
        if t.sign == Sign::Left {
            tail.push(t);
        } else if t.is_delta() {
            deltas[t.curve.max_index() as usize] += 1;
        } else if t.is_gamma() {
            let j = t.curve.max_index();
            gammas[j as usize] += 1;
            // γₙ is central, so only γⱼ with j < n moves the tail.
            if j < n && !tail.is_empty() {
                if let std::collections::btree_map::Entry::Vacant(e) = gamma_actions.entry(j) {
                    e.insert(twist_action(n, &t.curve, Sign::Right)?);
                }
                let act = &gamma_actions[&j];
                for s in tail.iter_mut() {
                    *s = conjugate_twist_by_action(s, act);
                }
            }
        } else {
            return Err(Error::Oracle(format!("{t} survived the rewriting")));
        }
    }
    let mut padding = Vec::new();
    for i in 1..=n {
        if deltas[i as usize] == 0 {
            deltas[i as usize] = 1;
            padding.push(Twist::delta(i, Sign::Left));
        }
    }
    for j in 2..=n {
        if gammas[j as usize] == 0 {
            gammas[j as usize] = 1;
            padding.push(Twist::gamma(j, Sign::Left));
        }
    }
    padding.extend(tail);
    Ok(Factorization {
        delta_exponents: (1..=n).map(|i| (i, deltas[i as usize])).collect(),
        gamma_exponents: (2..=n).map(|j| (j, gammas[j as usize])).collect(),
        tail: TwistWord::new(w.surface(), padding)?,
    })
}

/// Giroux stabilization: the same word on n+1 boundary components followed by a right twist
/// around {attach_to, n+1}.
pub fn stabilize(w: &TwistWord, attach_to: u32) -> Result<TwistWord> {
    w.surface().check_index(attach_to)?;
    let n = w.n();
    let mut letters = w.letters().to_vec();
    letters.push(Twist::canonical(&[attach_to, n + 1], Sign::Right)?);
    TwistWord::new(Surface::new(n + 1)?, letters)
}

/// Keys of the six lantern outputs compared with the input key; used by the measure checks.
pub fn lantern_keys(t: &Twist) -> Result<Vec<(bool, (ComplexityValue, u32))>> {
    Ok(lantern_step(t)?
        .iter()
        .map(|x| (is_terminal(x), measure_key(&x.curve)))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::words_equal;
    use ComplexityValue::*;

    fn surf(n: u32) -> Surface {
        Surface::new(n).unwrap()
    }

    fn word(n: u32, letters: Vec<Twist>) -> TwistWord {
        TwistWord::new(surf(n), letters).unwrap()
    }

    fn subsets(n: u32) -> impl Iterator<Item = Vec<u32>> {
        (1u32..(1 << n)).map(move |m| (1..=n).filter(|i| m & (1 << (i - 1)) != 0).collect())
    }

    #[test]
    fn lantern_example_13() {
        let t = Twist::canonical(&[1, 3], Sign::Right).unwrap();
        let out = lantern_step(&t).unwrap();
        let sets: Vec<Vec<u32>> = out.iter().map(|x| x.curve.enclosed().to_vec()).collect();
        assert_eq!(
            sets,
            vec![
                vec![1],
                vec![3],
                vec![2],
                vec![1, 2, 3],
                vec![1, 2],
                vec![2, 3]
            ]
        );
        assert!(out[..4].iter().all(is_terminal));
        assert!(out[4..].iter().all(|x| x.sign == Sign::Left));
        assert!(words_equal(&word(3, vec![t]), &word(3, out.to_vec())).unwrap());
    }

    #[test]
    fn lantern_example_134() {
        let t = Twist::canonical(&[1, 3, 4], Sign::Right).unwrap();
        let out = lantern_step(&t).unwrap();
        let sets: Vec<Vec<u32>> = out.iter().map(|x| x.curve.enclosed().to_vec()).collect();
        assert_eq!(sets[..4], [vec![1, 3], vec![4], vec![2], vec![1, 2, 3, 4]]);
        assert_eq!(sets[4..], [vec![1, 2, 3], vec![2, 4]]);
        assert_eq!(out[0].curve.complexity(), Finite(2));
        assert_eq!(out[0].curve.max_index(), 3);
        assert_eq!(out[3].curve.complexity(), NegInfinity);
        assert!(words_equal(&word(4, vec![t]), &word(4, out.to_vec())).unwrap());
    }

    #[test]
    fn lantern_rejects_terminal_and_left() {
        assert!(lantern_step(&Twist::gamma(3, Sign::Right)).is_err());
        assert!(lantern_step(&Twist::canonical(&[1, 3], Sign::Left).unwrap()).is_err());
        assert!(lantern_step(&Twist::delta(2, Sign::Right)).is_err());
    }

    #[test]
    fn lantern_relation_for_all_subsets_up_to_six() {
        for n in 2..=6 {
            for s in subsets(n) {
                let t = Twist::canonical(&s, Sign::Right).unwrap();
                if is_terminal(&t) {
                    continue;
                }
                let out = lantern_step(&t).unwrap();
                assert!(
                    words_equal(&word(n, vec![t]), &word(n, out.to_vec())).unwrap(),
                    "{s:?}"
                );
            }
        }
    }

    #[test]
    fn lantern_keys_decrease() {
        for s in subsets(6) {
            let t = Twist::canonical(&s, Sign::Right).unwrap();
            if is_terminal(&t) {
                continue;
            }
            let k = measure_key(&t.curve);
            let keys = lantern_keys(&t).unwrap();
            let out = lantern_step(&t).unwrap();
            for (idx, (term, key)) in keys.iter().enumerate() {
                if !term {
                    assert_eq!(out[idx].sign, Sign::Right);
                    assert!(*key < k, "{s:?} output {idx}");
                }
            }
            assert!(keys[3].1 .0 < k.0);
        }
    }

    #[test]
    fn reduce_examples() {
        let e = TwistWord::empty(surf(3));
        assert_eq!(reduce_right_twists(&e).unwrap(), e);
        let t = Twist::canonical(&[1, 3], Sign::Right).unwrap();
        let one = reduce_right_twists(&word(3, vec![t.clone()])).unwrap();
        assert_eq!(one.letters(), lantern_step(&t).unwrap().as_slice());
        let w = word(4, vec![Twist::canonical(&[1, 3, 4], Sign::Right).unwrap()]);
        let (out, trace) = reduce_right_twists_traced(&w).unwrap();
        assert!(out.letters().iter().all(is_terminal));
        assert!(words_equal(&w, &out).unwrap());
        assert!(trace.windows(2).all(|p| p[1].dm_less(&p[0])));
        assert!(trace.last().unwrap().is_empty());
    }

    #[test]
    fn conjugate_examples() {
        let t = Twist::canonical(&[2, 3], Sign::Right).unwrap();
        let e = TwistWord::empty(surf(3));
        assert_eq!(conjugate_twist(&t, &e).unwrap(), t);
        let f = word(3, vec![Twist::gamma(2, Sign::Right)]);
        let c = conjugate_twist(&t, &f).unwrap();
        assert_eq!(c.curve.enclosed(), &[2, 3]);
        let act = word_to_action(&f).unwrap();
        assert_eq!(c.curve.word(), &act.loop_map().apply(t.curve.word()));
        let lhs = f
            .inverse()
            .concat(&word(3, vec![t.clone()]))
            .unwrap()
            .concat(&f)
            .unwrap();
        assert!(words_equal(&lhs, &word(3, vec![c])).unwrap());
        for i in 1..=3 {
            let d = Twist::delta(i, Sign::Right);
            assert_eq!(conjugate_twist(&d, &f).unwrap(), d);
        }
    }

    #[test]
    fn factorize_examples() {
        let f = factorize(&TwistWord::empty(surf(2))).unwrap();
        assert_eq!((f.delta(1), f.delta(2), f.gamma(2)), (1, 1, 1));
        assert_eq!(f.tail().to_string(), "d1^-1 d2^-1 g2^-1");

        let w = word(2, vec![Twist::delta(2, Sign::Right); 3]);
        let f = factorize(&w).unwrap();
        assert_eq!((f.delta(1), f.delta(2), f.gamma(2)), (1, 3, 1));
        assert_eq!(f.tail().to_string(), "d1^-1 g2^-1");
        assert!(f.verify_against(&w).unwrap());

        let w = word(3, vec![Twist::canonical(&[1, 3], Sign::Right).unwrap()]);
        let f = factorize(&w).unwrap();
        assert_eq!(
            (f.delta(1), f.delta(2), f.delta(3), f.gamma(2), f.gamma(3)),
            (1, 1, 1, 1, 1)
        );
        assert_eq!(f.tail().to_string(), "g2^-1 g2^-1 t{2,3}^-1");
        assert!(f.verify_against(&w).unwrap());
    }

    #[test]
    fn gamma_moves_past_tail() {
        let w = word(
            3,
            vec![
                Twist::canonical(&[2, 3], Sign::Left).unwrap(),
                Twist::gamma(2, Sign::Right),
            ],
        );
        let f = factorize(&w).unwrap();
        assert_eq!(f.gamma(2), 1);
        assert!(f.verify_against(&w).unwrap());
        assert!(!f.tail().letters().last().unwrap().curve.is_canonical());
    }

    #[test]
    fn stabilize_examples() {
        let s = stabilize(&TwistWord::empty(surf(1)), 1).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.letters(), &[Twist::gamma(2, Sign::Right)]);
        let s = stabilize(&word(1, vec![Twist::delta(1, Sign::Right)]), 1).unwrap();
        assert_eq!(s.to_string(), "d1 g2");
        assert!(stabilize(&TwistWord::empty(surf(2)), 5).is_err());
    }

    #[test]
    fn prefix_letter_normalization() {
        let g = Twist::gamma(2, Sign::Right);
        let f = word(3, vec![Twist::delta(3, Sign::Right)]);
        assert_eq!(
            normalize_prefix_letter(3, &conjugate_twist(&g, &f).unwrap()).unwrap(),
            g
        );
        // γ₂ dragged by t{2,3} is a different curve around {1,2}: not standard, hard error
        let f = word(3, vec![Twist::canonical(&[2, 3], Sign::Right).unwrap()]);
        let moved = conjugate_twist(&g, &f).unwrap();
        assert!(!moved.curve.is_canonical());
        let w = word(3, vec![moved]);
        assert!(matches!(reduce_right_twists(&w), Err(Error::Oracle(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_twist(n: u32) -> impl Strategy<Value = Twist> {
            (1u32..(1 << n), any::<bool>()).prop_map(move |(mask, right)| {
                let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let sign = if right { Sign::Right } else { Sign::Left };
                Twist::canonical(&s, sign).unwrap()
            })
        }

        fn arb_word(n: u32, max_len: usize) -> impl Strategy<Value = TwistWord> {
            prop::collection::vec(arb_twist(n), 0..=max_len)
                .prop_map(move |v| TwistWord::new(Surface::new(n).unwrap(), v).unwrap())
        }

        fn arb_sized_word() -> impl Strategy<Value = TwistWord> {
            (1u32..=5).prop_flat_map(|n| arb_word(n, 6))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn factorize_round_trip(w in arb_sized_word()) {
                let f = factorize(&w).unwrap();
                prop_assert!(f.check_invariants());
                prop_assert!(words_equal(&f.reassemble(), &w).unwrap());
            }

            #[test]
            fn measure_strictly_decreases(w in arb_sized_word()) {
                let (_, trace) = reduce_right_twists_traced(&w).unwrap();
                for p in trace.windows(2) {
                    prop_assert!(p[1].dm_less(&p[0]));
                }
            }

            #[test]
            fn conjugation_identity(t in arb_twist(4), f in arb_word(4, 4)) {
                let c = conjugate_twist(&t, &f).unwrap();
                prop_assert_eq!(c.sign, t.sign);
                prop_assert_eq!(c.curve.enclosed(), t.curve.enclosed());
                let single = TwistWord::new(f.surface(), vec![t]).unwrap();
                let lhs = f.inverse().concat(&single).unwrap().concat(&f).unwrap();
                let rhs = TwistWord::new(f.surface(), vec![c]).unwrap();
                prop_assert!(words_equal(&lhs, &rhs).unwrap());
            }

            #[test]
            fn conjugated_twists_conjugate_again(t in arb_twist(4), f in arb_word(4, 3), g in arb_word(4, 3)) {
                let once = conjugate_twist(&conjugate_twist(&t, &f).unwrap(), &g).unwrap();
                let both = conjugate_twist(&t, &f.concat(&g).unwrap()).unwrap();
                let a = TwistWord::new(f.surface(), vec![once]).unwrap();
                let b = TwistWord::new(f.surface(), vec![both]).unwrap();
                prop_assert!(words_equal(&a, &b).unwrap());
            }

            #[test]
            fn delta_commutes_with_words(w in arb_word(4, 5), i in 1u32..=4) {
                let d = TwistWord::new(w.surface(), vec![Twist::delta(i, Sign::Right)]).unwrap();
                prop_assert!(words_equal(&d.concat(&w).unwrap(), &w.concat(&d).unwrap()).unwrap());
            }

            #[test]
            fn group_laws(a in arb_word(4, 8), b in arb_word(4, 8), c in arb_word(4, 8)) {
                let (ga, gb, gc) = (word_to_action(&a).unwrap(), word_to_action(&b).unwrap(), word_to_action(&c).unwrap());
                let left = ga.compose(&gb).unwrap().compose(&gc).unwrap();
                let right = ga.compose(&gb.compose(&gc).unwrap()).unwrap();
                prop_assert_eq!(&left, &right);
                prop_assert!(ga.compose(&ga.inverse()).unwrap().is_identity());
                prop_assert_eq!(MappingClassAction::identity(4).compose(&ga).unwrap(), ga.clone());
                prop_assert!(ga.verify_invertible());
                prop_assert!(word_to_action(&a.concat(&a.inverse()).unwrap()).unwrap().is_identity());
            }
        }
    }
}
