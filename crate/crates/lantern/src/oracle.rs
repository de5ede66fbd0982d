//! Mapping classes as actions on loops x₁…xₙ and on arcs a₁…aₙ from B₀ to Bᵢ.
//!
//! The basepoint sits on B₀ and the boundary word x₁⋯xₙ bounds the outer component. A class
//! sends each loop to a conjugate `uᵢ xᵢ uᵢ⁻¹` and each arc aᵢ to `uᵢ·aᵢ`; keeping the arc
//! prefixes separates the boundary twists, which act trivially on loops. Loops and arcs cut the
//! surface into a disk, so agreement on both pins down the class.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_group::{FreeWord, Substitution};
use crate::words::{CurveSpec, Sign, Twist, TwistWord};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MappingClassAction {
    n: u32,
    loops: Substitution,
    arcs: Vec<FreeWord>,
    inverse_loops: Substitution,
}

impl Serialize for MappingClassAction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("MappingClassAction", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("loop_images", self.loops.images())?;
        st.serialize_field("arc_prefixes", &self.arcs)?;
        st.end()
    }
}

impl MappingClassAction {
    pub fn identity(n: u32) -> Self {
        MappingClassAction {
            n,
            loops: Substitution::identity(n),
            arcs: vec![FreeWord::empty(); n as usize],
            inverse_loops: Substitution::identity(n),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn loop_images(&self) -> &[FreeWord] {
        self.loops.images()
    }

    pub fn arc_prefixes(&self) -> &[FreeWord] {
        &self.arcs
    }

    pub fn loop_map(&self) -> &Substitution {
        &self.loops
    }

    pub fn inverse_loop_map(&self) -> &Substitution {
        &self.inverse_loops
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.n as usize,
                right: other.n as usize,
            });
        }
        Ok(())
    }

    /// "self then next".
    pub fn compose(&self, next: &MappingClassAction) -> Result<MappingClassAction> {
        self.check_dim(next)?;
        let loops = next.loops.after(&self.loops);
        let arcs = self
            .arcs
            .iter()
            .zip(&next.arcs)
            .map(|(u, v)| &next.loops.apply(u) * v)
            .collect();
        let inverse_loops = self.inverse_loops.after(&next.inverse_loops);
        Ok(MappingClassAction {
            n: self.n,
            loops,
            arcs,
            inverse_loops,
        })
    }

    pub fn inverse(&self) -> MappingClassAction {
        let arcs = self
            .arcs
            .iter()
            .map(|u| self.inverse_loops.apply(u).inverse())
            .collect();
        MappingClassAction {
            n: self.n,
            loops: self.inverse_loops.clone(),
            arcs,
            inverse_loops: self.loops.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.loops.is_identity() && self.arcs.iter().all(FreeWord::is_empty)
    }

    /// The stored inverse really inverts the loop map, and each loop image is a conjugate of
    /// its generator by the matching arc prefix.
    pub fn verify_invertible(&self) -> bool {
        let shape_ok = (1..=self.n).all(|j| {
            let u = &self.arcs[(j - 1) as usize];
            let expect = &(u * &FreeWord::generator(j)) * &u.inverse();
            self.loops.image(j) == expect
        });
        shape_ok
            && self.loops.after(&self.inverse_loops).is_identity()
            && self.inverse_loops.after(&self.loops).is_identity()
    }

    /// Image of the boundary word; a valid class fixes it.
    pub fn boundary_image(&self) -> FreeWord {
        self.loops.apply(&FreeWord::product_of(1..=self.n))
    }
}

pub fn equal(g: &MappingClassAction, h: &MappingClassAction) -> Result<bool> {
    g.check_dim(h)?;
    Ok(g.loops == h.loops && g.arcs == h.arcs)
}

pub fn compose(g: &MappingClassAction, h: &MappingClassAction) -> Result<MappingClassAction> {
    g.compose(h)
}

/// Loop map and arc prefixes of the twist along the canonical curve around `s`.
///
/// The curve passes below the skipped punctures, so besides conjugating the enclosed loops by
/// W = ∏ x_a it also drags each skipped loop x_k (min S < k < max S) across itself.
fn canonical_twist(n: u32, s: &[u32], sign: Sign) -> (Substitution, Vec<FreeWord>) {
    let w = FreeWord::product_of(s.iter().copied());
    let wt = if sign == Sign::Right {
        w.clone()
    } else {
        w.inverse()
    };
    let mut loops = Substitution::identity(n);
    let mut arcs = vec![FreeWord::empty(); n as usize];
    let conj = |c: &FreeWord, k: u32| &(c * &FreeWord::generator(k)) * &c.inverse();
    for &a in s {
        loops.set_image(a, conj(&wt, a));
        arcs[(a - 1) as usize] = wt.clone();
    }
    let (lo, hi) = (s[0], *s.last().unwrap());
    for k in lo + 1..hi {
        if s.binary_search(&k).is_ok() {
            continue;
        }
        let left = FreeWord::product_of(s.iter().copied().filter(|&a| a < k));
        let right = FreeWord::product_of(s.iter().copied().filter(|&a| a > k));
        let c = match sign {
            Sign::Right => &w * &(&right * &left).inverse(),
            Sign::Left => &(&w.inverse() * &right) * &left,
        };
        loops.set_image(k, conj(&c, k));
        arcs[(k - 1) as usize] = c;
    }
    (loops, arcs)
}

/// Arc prefixes of a twist from its loop map: each image is `v xⱼ v⁻¹`, the prefix is `v`
/// times the power of xⱼ fixed by the exponent-sum count (sign on enclosed, 0 elsewhere).
fn arcs_from_loops(
    loops: &Substitution,
    n: u32,
    enclosed: &[u32],
    sign: Sign,
) -> Result<Vec<FreeWord>> {
    (1..=n)
        .map(|j| {
            let img = loops.image(j);
            let mut v = img.conjugator_of_generator(j).ok_or_else(|| {
                Error::Oracle(format!("image of x{j} is not a conjugate of x{j}: {img}"))
            })?;
            let mut letters = v.letters().to_vec();
            while letters.last().is_some_and(|l| l.index() == j) {
                letters.pop();
            }
            v = FreeWord::from_letters(letters);
            let target = if enclosed.contains(&j) {
                sign.as_i32() as i64
            } else {
                0
            };
            let k = target - v.exponent_sum(j);
            Ok(&v * &FreeWord::generator(j).pow(k))
        })
        .collect()
}

pub fn twist_action(n: u32, curve: &CurveSpec, sign: Sign) -> Result<MappingClassAction> {
    if curve.max_index() > n {
        return Err(Error::IndexOutOfRange {
            index: curve.max_index(),
            n,
        });
    }
    match curve.frame() {
        None => {
            let (loops, arcs) = canonical_twist(n, curve.enclosed(), sign);
            let (inverse_loops, _) = canonical_twist(n, curve.enclosed(), sign.flip());
            Ok(MappingClassAction {
                n,
                loops,
                arcs,
                inverse_loops,
            })
        }
        Some(frame) => {
            let (base, _) = canonical_twist(n, &frame.base, sign);
            let (base_inv, _) = canonical_twist(n, &frame.base, sign.flip());
            let loops = frame.forward.after(&base.after(&frame.backward));
            let inverse_loops = frame.forward.after(&base_inv.after(&frame.backward));
            if loops.rank() != n || inverse_loops.rank() != n {
                return Err(Error::Oracle(format!(
                    "curve frame does not live on n = {n}"
                )));
            }
            let arcs = arcs_from_loops(&loops, n, curve.enclosed(), sign)?;
            Ok(MappingClassAction {
                n,
                loops,
                arcs,
                inverse_loops,
            })
        }
    }
}

pub fn twist_letter_action(n: u32, t: &Twist) -> Result<MappingClassAction> {
    twist_action(n, &t.curve, t.sign)
}

/// Left-to-right fold: the first letter acts first.
pub fn word_to_action(w: &TwistWord) -> Result<MappingClassAction> {
    let n = w.n();
    let mut acc = MappingClassAction::identity(n);
    for t in w.letters() {
        acc = acc.compose(&twist_letter_action(n, t)?)?;
    }
    Ok(acc)
}

pub fn words_equal(a: &TwistWord, b: &TwistWord) -> Result<bool> {
    equal(&word_to_action(a)?, &word_to_action(b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{Surface, Twist};

    fn fw(v: &[i32]) -> FreeWord {
        FreeWord::from_signed(v)
    }

    fn word(n: u32, letters: Vec<Twist>) -> TwistWord {
        TwistWord::new(Surface::new(n).unwrap(), letters).unwrap()
    }

    #[test]
    fn delta_action() {
        let a = twist_action(2, &CurveSpec::delta(1), Sign::Right).unwrap();
        assert_eq!(a.loop_images(), &[fw(&[1]), fw(&[2])]);
        assert_eq!(a.arc_prefixes(), &[fw(&[1]), FreeWord::empty()]);
        assert!(!a.is_identity());
    }

    #[test]
    fn gamma2_action() {
        let a = twist_action(2, &CurveSpec::gamma(2), Sign::Right).unwrap();
        assert_eq!(a.loop_images(), &[fw(&[1, 2, 1, -2, -1]), fw(&[1, 2, -1])]);
        assert_eq!(a.arc_prefixes(), &[fw(&[1, 2]), fw(&[1, 2])]);
    }

    #[test]
    fn inverse_law_for_canonical_twists() {
        for n in 1..=5u32 {
            for mask in 1u32..(1 << n) {
                let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let c = CurveSpec::canonical(&s).unwrap();
                let r = twist_action(n, &c, Sign::Right).unwrap();
                let l = twist_action(n, &c, Sign::Left).unwrap();
                assert!(r.compose(&l).unwrap().is_identity(), "{s:?}");
                assert!(l.compose(&r).unwrap().is_identity(), "{s:?}");
                assert!(r.verify_invertible() && l.verify_invertible());
                assert_eq!(r.boundary_image(), FreeWord::product_of(1..=n), "{s:?}");
                assert_eq!(r.inverse(), l);
            }
        }
    }

    #[test]
    fn arcs_recovered_from_loops_match_formula() {
        for n in 2..=5u32 {
            for mask in 1u32..(1 << n) {
                let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                for sign in [Sign::Right, Sign::Left] {
                    let (loops, arcs) = canonical_twist(n, &s, sign);
                    assert_eq!(arcs_from_loops(&loops, n, &s, sign).unwrap(), arcs, "{s:?}");
                }
            }
        }
    }

    /// Independent route to the canonical twists: move the interval curve {1..h} onto S with
    /// inverse Artin generators and conjugate the interval twist.
    #[test]
    fn canonical_twist_agrees_with_braid_transport() {
        use crate::free_group::artin;
        for n in 2..=5u32 {
            for mask in 1u32..(1 << n) {
                let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let h = s.len() as u32;
                let mut fwd = Substitution::identity(n);
                let mut bwd = Substitution::identity(n);
                let mut cur: Vec<u32> = (1..=h).collect();
                for idx in (0..h as usize).rev() {
                    while cur[idx] < s[idx] {
                        let k = cur[idx];
                        fwd = artin(n, k, false).after(&fwd);
                        bwd = bwd.after(&artin(n, k, true));
                        cur[idx] += 1;
                    }
                }
                let interval: Vec<u32> = (1..=h).collect();
                assert_eq!(
                    fwd.apply(&FreeWord::product_of(interval.iter().copied())),
                    FreeWord::product_of(s.iter().copied())
                );
                let (base, _) = canonical_twist(n, &interval, Sign::Right);
                let transported = fwd.after(&base.after(&bwd));
                let (direct, _) = canonical_twist(n, &s, Sign::Right);
                assert_eq!(transported, direct, "{s:?}");
            }
        }
    }

    #[test]
    fn bridge_twist_is_valid() {
        for n in 3..=6u32 {
            for q in 1..n {
                for r in q + 1..=n {
                    let c = CurveSpec::bridge(q, r).unwrap();
                    let a = twist_action(n, &c, Sign::Right).unwrap();
                    let b = twist_action(n, &c, Sign::Left).unwrap();
                    assert!(a.verify_invertible());
                    assert!(a.compose(&b).unwrap().is_identity());
                    assert_eq!(a.boundary_image(), FreeWord::product_of(1..=n));
                    let w = c.word();
                    for j in 1..=n {
                        // loops outside the bridge stay put
                        if j < q || j > r {
                            assert_eq!(a.loop_map().image(j), FreeWord::generator(j));
                        }
                    }
                    // the curve itself is fixed up to conjugacy by its own twist
                    let img = a.loop_map().apply(w);
                    let u = &a.arc_prefixes()[(q - 1) as usize];
                    assert_eq!(img, &(u * w) * &u.inverse());
                }
            }
        }
    }

    #[test]
    fn equality_examples() {
        let d1 = twist_action(2, &CurveSpec::delta(1), Sign::Right).unwrap();
        assert!(!equal(&d1, &MappingClassAction::identity(2)).unwrap());
        let a = word(
            3,
            vec![Twist::delta(1, Sign::Right), Twist::delta(2, Sign::Right)],
        );
        let b = word(
            3,
            vec![Twist::delta(2, Sign::Right), Twist::delta(1, Sign::Right)],
        );
        assert!(words_equal(&a, &b).unwrap());
        let g2 = twist_action(2, &CurveSpec::gamma(2), Sign::Right).unwrap();
        assert!(!equal(&g2, &d1).unwrap());
        assert!(equal(&g2, &MappingClassAction::identity(3)).is_err());
        let e = word(
            2,
            vec![Twist::delta(1, Sign::Right), Twist::delta(1, Sign::Left)],
        );
        assert!(word_to_action(&e).unwrap().is_identity());
        assert!(word_to_action(&TwistWord::empty(Surface::new(2).unwrap()))
            .unwrap()
            .is_identity());
    }

    #[test]
    fn delta_is_central_for_every_canonical_twist() {
        for n in 1..=4u32 {
            for mask in 1u32..(1 << n) {
                let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
                let t = Twist::canonical(&s, Sign::Right).unwrap();
                for i in 1..=n {
                    let d = Twist::delta(i, Sign::Right);
                    let a = word(n, vec![d.clone(), t.clone()]);
                    let b = word(n, vec![t.clone(), d]);
                    assert!(words_equal(&a, &b).unwrap());
                }
            }
        }
    }

    #[test]
    fn distinct_canonical_twists_are_distinguished() {
        let n = 4u32;
        let mut seen: Vec<MappingClassAction> = Vec::new();
        for mask in 1u32..(1 << n) {
            let s: Vec<u32> = (1..=n).filter(|i| mask & (1 << (i - 1)) != 0).collect();
            let a = twist_action(n, &CurveSpec::canonical(&s).unwrap(), Sign::Right).unwrap();
            assert!(!a.is_identity());
            assert!(seen.iter().all(|b| *b != a), "{s:?}");
            seen.push(a);
        }
    }
}
