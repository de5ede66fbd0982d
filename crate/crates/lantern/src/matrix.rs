//! Symmetric integer matrices: exact determinant, inertia by rational congruence, and the
//! short-vector enumeration behind the diagonalizability test.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct SymMatrix {
    dim: usize,
    data: Vec<BigInt>,
}

#[derive(Serialize, Deserialize)]
#[serde(transparent)]
struct RawMatrix(#[serde(with = "crate::bigjson::rows")] Vec<Vec<BigInt>>);

impl TryFrom<RawMatrix> for SymMatrix {
    type Error = Error;
    fn try_from(r: RawMatrix) -> Result<Self> {
        SymMatrix::new(r.0)
    }
}

impl From<SymMatrix> for RawMatrix {
    fn from(m: SymMatrix) -> Self {
        RawMatrix(m.rows())
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct FormInvariants {
    #[serde(with = "crate::bigjson")]
    pub det: BigInt,
    pub signature: i64,
    pub b2_plus: usize,
    pub b2_minus: usize,
    pub b2_zero: usize,
}

impl FormInvariants {
    pub fn rank(&self) -> usize {
        self.b2_plus + self.b2_minus + self.b2_zero
    }

    pub fn is_positive_definite(&self) -> bool {
        self.b2_minus == 0 && self.b2_zero == 0
    }

    pub fn is_negative_definite(&self) -> bool {
        self.b2_plus == 0 && self.b2_zero == 0
    }
}

impl SymMatrix {
    pub fn new(rows: Vec<Vec<BigInt>>) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: r.len(),
                });
            }
            data.extend(r);
        }
        let m = SymMatrix { dim, data };
        for i in 0..dim {
            for j in 0..i {
                if m.get(i, j) != m.get(j, i) {
                    return Err(invalid(format!(
                        "matrix is not symmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Result<Self> {
        SymMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn diagonal(entries: &[i64]) -> Self {
        let mut m = SymMatrix::zeros(entries.len());
        for (i, &e) in entries.iter().enumerate() {
            m.set(i, i, e.into());
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.dim + j]
    }

    /// Sets both (i, j) and (j, i).
    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.dim + j] = v.clone();
        self.data[j * self.dim + i] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.data
            .chunks(self.dim.max(1))
            .take(self.dim)
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn neg(&self) -> SymMatrix {
        SymMatrix {
            dim: self.dim,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// Deletes row and column k.
    pub fn remove(&self, k: usize) -> SymMatrix {
        let keep: Vec<usize> = (0..self.dim).filter(|&i| i != k).collect();
        self.submatrix(&keep)
    }

    pub fn submatrix(&self, keep: &[usize]) -> SymMatrix {
        let dim = keep.len();
        let mut data = Vec::with_capacity(dim * dim);
        for &i in keep {
            for &j in keep {
                data.push(self.get(i, j).clone());
            }
        }
        SymMatrix { dim, data }
    }

    /// Basis change eᵢ ↦ eᵢ + s·eⱼ (a handle slide of i over j).
    pub fn add_multiple(&mut self, i: usize, j: usize, s: &BigInt) {
        assert_ne!(i, j);
        let qjj = self.get(j, j).clone();
        let qij = self.get(i, j).clone();
        for l in 0..self.dim {
            if l == i {
                continue;
            }
            let v = self.get(i, l) + s * self.get(j, l);
            self.set(i, l, v);
        }
        let qii = self.get(i, i).clone() + BigInt::from(2) * s * &qij + s * s * &qjj;
        self.set(i, i, qii);
    }

    /// Basis change eᵢ ↦ −eᵢ.
    pub fn negate_basis(&mut self, i: usize) {
        for l in 0..self.dim {
            if l != i {
                let v = -self.get(i, l);
                self.set(i, l, v);
            }
        }
    }

    pub fn direct_sum(&self, other: &SymMatrix) -> SymMatrix {
        let dim = self.dim + other.dim;
        let mut m = SymMatrix::zeros(dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m.data[i * dim + j] = self.get(i, j).clone();
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                m.data[(i + self.dim) * dim + j + self.dim] = other.get(i, j).clone();
            }
        }
        m
    }

    /// vᵀQw.
    pub fn pair(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        let mut acc = BigInt::zero();
        for i in 0..self.dim {
            if v[i].is_zero() {
                continue;
            }
            for j in 0..self.dim {
                if !w[j].is_zero() {
                    acc += &v[i] * self.get(i, j) * &w[j];
                }
            }
        }
        acc
    }

    /// Fraction-free Gaussian elimination (Bareiss); the empty matrix has det 1.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> = self.rows();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                    return BigInt::zero();
                };
                a.swap(k, p);
                sign = -sign;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        let d = a[n - 1][n - 1].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Diagonal of a rational congruence diagonalization PᵀQP = D (nonzero entries first).
    pub fn congruence_diagonal(&self) -> Vec<BigRational> {
        let m = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| BigRational::from_integer(self.get(i, j).clone()))
                    .collect()
            })
            .collect();
        let swap = |a: &mut Vec<Vec<BigRational>>, i: usize, j: usize| {
            a.swap(i, j);
            for row in a.iter_mut() {
                row.swap(i, j);
            }
        };
        let mut diag = Vec::with_capacity(m);
        let mut k = 0;
        while k < m {
            if let Some(i) = (k..m).find(|&i| !a[i][i].is_zero()) {
                swap(&mut a, k, i);
            } else if let Some((i, j)) = (k..m)
                .flat_map(|i| (i + 1..m).map(move |j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
            {
                // a_ii = a_jj = 0, so eᵢ ↦ eᵢ + eⱼ gives diagonal 2a_ij ≠ 0
                for l in 0..m {
                    let v = a[j][l].clone();
                    a[i][l] += v;
                }
                for l in 0..m {
                    let v = a[l][j].clone();
                    a[l][i] += v;
                }
                swap(&mut a, k, i);
            } else {
                diag.extend((k..m).map(|_| BigRational::zero()));
                break;
            }
            let p = a[k][k].clone();
            for r in k + 1..m {
                if a[r][k].is_zero() {
                    continue;
                }
                let f = &a[r][k] / &p;
                for c in 0..m {
                    let v = &f * &a[k][c];
                    a[r][c] -= v;
                }
                for c in 0..m {
                    let v = &f * &a[c][k];
                    a[c][r] -= v;
                }
            }
            diag.push(p);
            k += 1;
        }
        diag
    }

    pub fn invariants(&self) -> FormInvariants {
        let diag = self.congruence_diagonal();
        let b2_plus = diag.iter().filter(|d| d.is_positive()).count();
        let b2_minus = diag.iter().filter(|d| d.is_negative()).count();
        let b2_zero = diag.len() - b2_plus - b2_minus;
        FormInvariants {
            det: self.det(),
            signature: b2_plus as i64 - b2_minus as i64,
            b2_plus,
            b2_minus,
            b2_zero,
        }
    }

    /// Solves Qa = r exactly; `None` when Q is singular.
    pub fn solve(&self, r: &[BigInt]) -> Option<Vec<BigRational>> {
        let n = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                let mut row: Vec<BigRational> = (0..n)
                    .map(|j| BigRational::from_integer(self.get(i, j).clone()))
                    .collect();
                row.push(BigRational::from_integer(r[i].clone()));
                row
            })
            .collect();
        for k in 0..n {
            let p = (k..n).find(|&i| !a[i][k].is_zero())?;
            a.swap(k, p);
            let piv = a[k][k].clone();
            for c in k..=n {
                a[k][c] = &a[k][c] / &piv;
            }
            for i in 0..n {
                if i != k && !a[i][k].is_zero() {
                    let f = a[i][k].clone();
                    for c in k..=n {
                        let v = &f * &a[k][c];
                        a[i][c] -= v;
                    }
                }
            }
        }
        Some(a.into_iter().map(|row| row[n].clone()).collect())
    }
}

/// All nonzero v with vᵀGv ≤ bound for a positive definite G (Fincke–Pohst over an exact LDLᵀ).
pub fn short_vectors(g: &SymMatrix, bound: i64) -> Result<Vec<Vec<BigInt>>> {
    let m = g.dim();
    // G = L·D·Lᵀ with L unit lower triangular; vᵀGv = Σ dᵢ (vᵢ + Σ_{j>i} L_{ji} vⱼ)².
    let mut l = vec![vec![BigRational::zero(); m]; m];
    let mut d = vec![BigRational::zero(); m];
    for j in 0..m {
        let mut s = BigRational::from_integer(g.get(j, j).clone());
        for k in 0..j {
            s -= &l[j][k] * &l[j][k] * &d[k];
        }
        if !s.is_positive() {
            return Err(invalid("form is not positive definite"));
        }
        d[j] = s;
        for i in j + 1..m {
            let mut s = BigRational::from_integer(g.get(i, j).clone());
            for k in 0..j {
                s -= &l[i][k] * &l[j][k] * &d[k];
            }
            l[i][j] = s / &d[j];
        }
    }
    let mut out = Vec::new();
    let mut v = vec![BigInt::zero(); m];
    let bound = BigRational::from_integer(bound.into());
    fn walk(
        i: usize,
        used: BigRational,
        bound: &BigRational,
        l: &[Vec<BigRational>],
        d: &[BigRational],
        v: &mut Vec<BigInt>,
        out: &mut Vec<Vec<BigInt>>,
    ) {
        let m = v.len();
        let c: BigRational = (i + 1..m)
            .map(|j| &l[j][i] * BigRational::from_integer(v[j].clone()))
            .fold(BigRational::zero(), |a, b| a + b);
        let room = (bound - &used) / &d[i];
        let centre = -c.clone();
        let radius = room.to_f64().unwrap_or(0.0).max(0.0).sqrt();
        let lo = (centre.to_f64().unwrap_or(0.0) - radius).floor() as i64 - 1;
        let hi = (centre.to_f64().unwrap_or(0.0) + radius).ceil() as i64 + 1;
        for x in lo..=hi {
            let xr = BigRational::from_integer(x.into());
            let t = &xr + &c;
            let here = &d[i] * &t * &t;
            let total = &used + here;
            if &total > bound {
                continue;
            }
            v[i] = x.into();
            if i == 0 {
                if v.iter().any(|e| !e.is_zero()) {
                    out.push(v.clone());
                }
            } else {
                walk(i - 1, total, bound, l, d, v, out);
            }
        }
        v[i] = BigInt::zero();
    }
    if m > 0 {
        walk(m - 1, BigRational::zero(), &bound, &l, &d, &mut v, &mut out);
    }
    Ok(out)
}

/// A definite form is ≅ ±I over ℤ iff it has rank-many orthogonal vectors of square ±1.
///
/// In a definite lattice two unit vectors u ≠ ±w have |u·w| < 1, hence are orthogonal, so it is
/// enough to count unit vectors up to sign.
pub fn is_diagonalizable_over_integers(q: &SymMatrix) -> Result<bool> {
    let inv = q.invariants();
    let g = if inv.is_negative_definite() {
        q.neg()
    } else if inv.is_positive_definite() {
        q.clone()
    } else {
        return Err(invalid(format!(
            "form is not definite (b2+ = {}, b2- = {}, b2_0 = {})",
            inv.b2_plus, inv.b2_minus, inv.b2_zero
        )));
    };
    let units = short_vectors(&g, 1)?;
    Ok(units.len() / 2 == q.dim())
}
