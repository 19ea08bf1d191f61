//! Dense complex matrices and the handful of factorizations the subspace
//! lattice needs: orthonormalization with a rank cut, projectors, orthogonal
//! complements and seeded random unitaries.
//!
//! Every rank or equality decision downstream goes through a single
//! [`Tolerance`].

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative tolerance shared by all rank, inclusion and equality tests.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Tolerance(f64);

impl Tolerance {
    pub const DEFAULT_EPS: f64 = 1e-9;

    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 && eps < 1e-3 {
            Ok(Self(eps))
        } else {
            Err(Error::InvalidTolerance(eps))
        }
    }

    pub fn eps(self) -> f64 {
        self.0
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self(Self::DEFAULT_EPS)
    }
}

impl<'de> Deserialize<'de> for Tolerance {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let eps = f64::deserialize(deserializer)?;
        Tolerance::new(eps).map_err(serde::de::Error::custom)
    }
}

/// Row-major dense complex matrix. Entries are always finite.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Builds a `rows × columns.len()` matrix whose j-th column is `columns[j]`.
    pub fn from_columns(rows: usize, columns: &[Vec<Complex64>]) -> Result<Self> {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            if col.len() != rows {
                return Err(Error::DimensionMismatch {
                    expected: rows,
                    found: col.len(),
                });
            }
            for (i, &z) in col.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        if m.data
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }

    pub fn column_vector(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Complex64>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn row_vecs(&self) -> Vec<Vec<Complex64>> {
        self.data
            .chunks(self.cols.max(1))
            .take(self.rows)
            .map(<[_]>::to_vec)
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Frobenius distance; `f64::INFINITY` when the shapes differ.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let cols = self.cols + other.cols;
        let mut m = Self::zeros(self.rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(m)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let mut m = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                for j in 0..other.cols {
                    m.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(m)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| (0..self.cols).map(|k| self[(i, k)] * v[k]).sum())
            .collect())
    }

    /// `||U*U - I||_F`, or infinity for a non-square matrix.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let gram = &self.adjoint() * self;
        gram.distance(&Self::identity(self.rows))
    }

    pub fn ensure_unitary(&self, tol: Tolerance) -> Result<()> {
        let deviation = self.unitarity_defect();
        if deviation < tol.eps() {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation })
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Panics on shape mismatch; use [`ComplexMatrix::matmul`] for a checked product.
impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix sum shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "matrix difference shape mismatch"
        );
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>9.5}{:+.5}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.row_vecs().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<Complex64>>::deserialize(deserializer)?;
        ComplexMatrix::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components of `v` along each of the orthonormal `basis` vectors.
fn project_out(v: &mut [Complex64], basis: &[Vec<Complex64>]) {
    for q in basis {
        let c = dot(q, v);
        for (x, y) in v.iter_mut().zip(q) {
            *x -= c * y;
        }
    }
}

/// Modified Gram-Schmidt with one reorthogonalization pass.
///
/// A column is dropped when its residual after projection onto the previously
/// kept columns falls below `eps * max_column_norm`; the returned column count
/// is therefore the numerical rank.
pub fn orthonormalize(m: &ComplexMatrix, tol: Tolerance) -> Result<ComplexMatrix> {
    if m.rows() == 0 {
        return Err(Error::EmptyMatrix);
    }
    let columns = m.columns();
    let scale = columns.iter().map(|c| norm(c)).fold(0.0, f64::max);
    let mut kept: Vec<Vec<Complex64>> = Vec::with_capacity(m.rows().min(m.cols()));
    if scale == 0.0 {
        return ComplexMatrix::from_columns(m.rows(), &kept);
    }
    let cutoff = tol.eps() * scale;
    for mut v in columns {
        if kept.len() == m.rows() {
            break;
        }
        project_out(&mut v, &kept);
        project_out(&mut v, &kept);
        let r = norm(&v);
        if r < cutoff {
            continue;
        }
        v.iter_mut().for_each(|z| *z /= r);
        kept.push(v);
    }
    ComplexMatrix::from_columns(m.rows(), &kept)
}

/// `B B*` for a basis with orthonormal columns.
pub fn projector(basis: &ComplexMatrix) -> ComplexMatrix {
    basis * &basis.adjoint()
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`.
///
/// Runs column-pivoted Gram-Schmidt on `I - B B*` and keeps exactly
/// `rows - cols` columns.
pub fn orthogonal_complement(basis: &ComplexMatrix) -> ComplexMatrix {
    let n = basis.rows();
    let want = n.saturating_sub(basis.cols());
    let residual = &ComplexMatrix::identity(n) - &projector(basis);
    let mut candidates = residual.columns();
    let mut kept: Vec<Vec<Complex64>> = Vec::with_capacity(want);
    while kept.len() < want {
        let (best, best_norm) = candidates
            .iter()
            .enumerate()
            .map(|(j, c)| (j, norm(c)))
            .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best_norm <= 0.0 {
            break;
        }
        let mut v = candidates.swap_remove(best);
        project_out(&mut v, &kept);
        let r = norm(&v);
        v.iter_mut().for_each(|z| *z /= r);
        for c in candidates.iter_mut() {
            project_out(c, std::slice::from_ref(&v));
        }
        kept.push(v);
    }
    ComplexMatrix::from_columns(n, &kept).expect("complement columns have matching length")
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect()
}

/// Orthonormalized complex Gaussian matrix drawn from `rng`.
pub fn random_unitary_from<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let columns: Vec<_> = (0..n).map(|_| gaussian_vector(rng, n)).collect();
        let m = ComplexMatrix::from_columns(n, &columns).expect("square gaussian matrix");
        let q = orthonormalize(&m, Tolerance::default()).expect("n >= 1");
        if q.cols() == n {
            return q;
        }
    }
}

/// Deterministic unitary for a given `(n, seed)`.
pub fn random_unitary(n: usize, seed: u64) -> Result<ComplexMatrix> {
    if n == 0 {
        return Err(Error::EmptyMatrix);
    }
    Ok(random_unitary_from(&mut seeded_rng(seed), n))
}
