//! Reduced words in the free group on x₁…xₙ and substitution endomorphisms.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

/// A generator or its inverse: `+i` is xᵢ, `-i` is xᵢ⁻¹. Zero is never stored.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn gen(i: u32) -> Self {
        assert!(
            i >= 1 && i <= i32::MAX as u32,
            "generator index must be positive"
        );
        Letter(i as i32)
    }

    pub fn gen_inv(i: u32) -> Self {
        Letter::gen(i).inverse()
    }

    /// Builds a letter from its signed encoding; `None` for zero.
    pub fn from_signed(v: i32) -> Option<Self> {
        (v != 0 && v != i32::MIN).then_some(Letter(v))
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn index(self) -> u32 {
        self.0.unsigned_abs()
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "x{}^-1", self.index())
        } else {
            write!(f, "x{}", self.index())
        }
    }
}

/// A freely reduced word. The constructor reduces, so every value is reduced.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct FreeWord(Vec<Letter>);

impl<'de> Deserialize<'de> for FreeWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = Vec::<i32>::deserialize(d)?;
        let mut letters = Vec::with_capacity(raw.len());
        for v in raw {
            letters.push(
                Letter::from_signed(v)
                    .ok_or_else(|| serde::de::Error::custom("zero is not a generator"))?,
            );
        }
        Ok(FreeWord::from_letters(letters))
    }
}

/// Free reduction of an arbitrary letter sequence.
pub fn reduce<I: IntoIterator<Item = Letter>>(letters: I) -> FreeWord {
    let mut out = FreeWord::empty();
    for l in letters {
        out.push(l);
    }
    out
}

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    pub fn generator(i: u32) -> Self {
        FreeWord(vec![Letter::gen(i)])
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        reduce(letters)
    }

    /// Product of x_i over the given indices, in order.
    pub fn product_of<I: IntoIterator<Item = u32>>(indices: I) -> Self {
        reduce(indices.into_iter().map(Letter::gen))
    }

    /// Convenience constructor from signed integers; panics on zero.
    pub fn from_signed(v: &[i32]) -> Self {
        reduce(
            v.iter()
                .map(|&s| Letter::from_signed(s).expect("nonzero letter")),
        )
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Appends one letter, cancelling against the end if possible.
    pub fn push(&mut self, l: Letter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn append(&mut self, other: &FreeWord) {
        for &l in &other.0 {
            self.push(l);
        }
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeWord::empty();
        for _ in 0..k.unsigned_abs() {
            out.append(&base);
        }
        out
    }

    /// Exponent sum of xᵢ in the word.
    pub fn exponent_sum(&self, i: u32) -> i64 {
        self.0
            .iter()
            .filter(|l| l.index() == i)
            .map(|l| if l.is_inverse() { -1 } else { 1 })
            .sum()
    }

    pub fn max_index(&self) -> u32 {
        self.0.iter().map(|l| l.index()).max().unwrap_or(0)
    }

    /// If the word is `v·xᵢ·v⁻¹` (reduced), returns `v`.
    pub fn conjugator_of_generator(&self, i: u32) -> Option<FreeWord> {
        let len = self.0.len();
        if len.is_multiple_of(2) {
            return None;
        }
        let m = len / 2;
        if self.0[m] != Letter::gen(i) {
            return None;
        }
        let v = FreeWord(self.0[..m].to_vec());
        let tail: Vec<Letter> = self.0[m + 1..].to_vec();
        (v.inverse().0 == tail).then_some(v)
    }
}

impl Mul<&FreeWord> for &FreeWord {
    type Output = FreeWord;
    fn mul(self, rhs: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        out.append(rhs);
        out
    }
}

impl Mul for FreeWord {
    type Output = FreeWord;
    fn mul(mut self, rhs: FreeWord) -> FreeWord {
        self.append(&rhs);
        self
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for (k, l) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// Endomorphism given by the images of x₁…x_rank; generators past the rank are fixed.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Substitution {
    images: Vec<FreeWord>,
}

impl Substitution {
    pub fn identity(n: u32) -> Self {
        Substitution {
            images: (1..=n).map(FreeWord::generator).collect(),
        }
    }

    pub fn from_images(images: Vec<FreeWord>) -> Self {
        Substitution { images }
    }

    pub fn rank(&self) -> u32 {
        self.images.len() as u32
    }

    pub fn images(&self) -> &[FreeWord] {
        &self.images
    }

    pub fn image(&self, i: u32) -> FreeWord {
        self.images
            .get((i - 1) as usize)
            .cloned()
            .unwrap_or_else(|| FreeWord::generator(i))
    }

    pub fn set_image(&mut self, i: u32, w: FreeWord) {
        self.images[(i - 1) as usize] = w;
    }

    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        let mut out = FreeWord::empty();
        for &l in w.letters() {
            let Some(img) = self.images.get((l.index() - 1) as usize) else {
                out.push(l);
                continue;
            };
            if l.is_inverse() {
                for &m in img.letters().iter().rev() {
                    out.push(m.inverse());
                }
            } else {
                out.append(img);
            }
        }
        out
    }

    /// `self ∘ inner`: apply `inner` first, then `self`.
    pub fn after(&self, inner: &Substitution) -> Substitution {
        let inner = inner.extended(self.rank().saturating_sub(inner.rank()));
        Substitution {
            images: inner.images.iter().map(|w| self.apply(w)).collect(),
        }
    }

    /// Same map on F_{n+extra}, fixing the new generators.
    pub fn extended(&self, extra: u32) -> Substitution {
        let n = self.rank();
        let mut images = self.images.clone();
        images.extend((n + 1..=n + extra).map(FreeWord::generator));
        Substitution { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(k, w)| *w == FreeWord::generator(k as u32 + 1))
    }
}

/// Artin generator σᵢ (exponent ±1) on F_n:
/// σᵢ: xᵢ ↦ xᵢxᵢ₊₁xᵢ⁻¹, xᵢ₊₁ ↦ xᵢ; its inverse xᵢ ↦ xᵢ₊₁, xᵢ₊₁ ↦ xᵢ₊₁⁻¹xᵢxᵢ₊₁.
pub fn artin(n: u32, i: u32, positive: bool) -> Substitution {
    assert!(i >= 1 && i < n, "Artin generator index out of range");
    let mut s = Substitution::identity(n);
    let (a, b) = (Letter::gen(i), Letter::gen(i + 1));
    if positive {
        s.set_image(i, reduce([a, b, a.inverse()]));
        s.set_image(i + 1, reduce([a]));
    } else {
        s.set_image(i, reduce([b]));
        s.set_image(i + 1, reduce([b.inverse(), a, b]));
    }
    s
}
