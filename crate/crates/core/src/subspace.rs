//! Subspaces of C^n and their lattice operations.
//!
//! A [`Subspace`] keeps an orthonormal column basis together with its
//! projector. Equality and inclusion are decided on projectors, so two
//! subspaces with different bases compare equal whenever they span the same
//! space.

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerance};

#[derive(Clone, Debug)]
pub struct Subspace {
    basis: ComplexMatrix,
    projector: ComplexMatrix,
}

impl Subspace {
    fn from_orthonormal_unchecked(basis: ComplexMatrix) -> Self {
        let projector = linalg::projector(&basis);
        Self { basis, projector }
    }

    pub fn null(n: usize) -> Self {
        Self::from_orthonormal_unchecked(ComplexMatrix::zeros(n, 0))
    }

    pub fn full(n: usize) -> Self {
        Self::from_orthonormal_unchecked(ComplexMatrix::identity(n))
    }

    /// Span of the columns of `m`.
    pub fn from_matrix(m: &ComplexMatrix, tol: Tolerance) -> Result<Self> {
        Ok(Self::from_orthonormal_unchecked(linalg::orthonormalize(
            m, tol,
        )?))
    }

    /// Span of the given vectors in `C^n`.
    pub fn span(n: usize, vectors: &[Vec<Complex64>], tol: Tolerance) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyMatrix);
        }
        Self::from_matrix(&ComplexMatrix::from_columns(n, vectors)?, tol)
    }

    /// Span of coordinate axes `axes` in `C^n`.
    pub fn axes(n: usize, axes: &[usize]) -> Self {
        let cols: Vec<_> = axes
            .iter()
            .map(|&a| {
                let mut v = vec![linalg::ZERO; n];
                v[a] = linalg::ONE;
                v
            })
            .collect();
        Self::span(n, &cols, Tolerance::default()).expect("axis vectors are well formed")
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_null(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient_dim()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    fn check_dims(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() == other.ambient_dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: other.ambient_dim(),
            })
        }
    }

    pub fn ortho(&self) -> Subspace {
        Self::from_orthonormal_unchecked(linalg::orthogonal_complement(&self.basis))
    }

    pub fn join(&self, other: &Subspace, tol: Tolerance) -> Result<Subspace> {
        self.check_dims(other)?;
        Self::from_matrix(&self.basis.hstack(&other.basis)?, tol)
    }

    /// Intersection, computed as `(p⊥ ∨ q⊥)⊥`.
    pub fn meet(&self, other: &Subspace, tol: Tolerance) -> Result<Subspace> {
        self.check_dims(other)?;
        Ok(self.ortho().join(&other.ortho(), tol)?.ortho())
    }

    /// `p ≤ q` iff `||P_q P_p - P_p||_F < eps`.
    pub fn leq(&self, other: &Subspace, tol: Tolerance) -> Result<bool> {
        self.check_dims(other)?;
        Ok(self.inclusion_defect(other) < tol.eps())
    }

    /// `||P_q P_p - P_p||_F`, zero exactly when `self ⊆ other`.
    pub fn inclusion_defect(&self, other: &Subspace) -> f64 {
        if self.is_null() {
            return 0.0;
        }
        // P_q B has the same Frobenius defect as P_q P_p against P_p.
        let image = &other.projector * &self.basis;
        image.distance(&self.basis)
    }

    pub fn distance(&self, other: &Subspace) -> f64 {
        self.projector.distance(&other.projector)
    }

    pub fn approx_eq(&self, other: &Subspace, tol: Tolerance) -> bool {
        self.dim() == other.dim() && self.distance(other) < tol.eps()
    }

    /// `true` when `P_p P_q = 0`.
    pub fn is_orthogonal_to(&self, other: &Subspace, tol: Tolerance) -> bool {
        (&self.basis.adjoint() * &other.basis).frobenius_norm() < tol.eps()
    }

    /// `||P_p P_q - P_q P_p||_F`.
    pub fn commutator_norm(&self, other: &Subspace) -> f64 {
        let pq = &self.projector * &other.projector;
        let qp = &other.projector * &self.projector;
        pq.distance(&qp)
    }

    /// `U(p)`: span of `U·basis`. `U` must be unitary within eps.
    pub fn apply_unitary(&self, u: &ComplexMatrix, tol: Tolerance) -> Result<Subspace> {
        if u.rows() != self.ambient_dim() || !u.is_square() {
            return Err(Error::DimensionMismatch {
                expected: self.ambient_dim(),
                found: u.rows(),
            });
        }
        u.ensure_unitary(tol)?;
        Self::from_matrix(&(u * &self.basis), tol)
    }

    /// Orthogonal complement of `self` relative to a containing subspace `within`.
    pub fn relative_complement(&self, within: &Subspace, tol: Tolerance) -> Result<Subspace> {
        self.ortho().meet(within, tol)
    }
}

/// A one-dimensional subspace together with a unit representative vector.
#[derive(Clone, Debug)]
pub struct Ray {
    vector: Vec<Complex64>,
    subspace: Subspace,
}

impl Ray {
    /// Normalizes `v`; rejects zero or non-finite vectors.
    pub fn new(v: &[Complex64]) -> Result<Self> {
        let norm = linalg::norm(v);
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::Precondition(
                "a ray needs a nonzero finite vector".into(),
            ));
        }
        let vector: Vec<_> = v.iter().map(|z| z / norm).collect();
        let basis = ComplexMatrix::column_vector(&vector);
        Ok(Self {
            vector,
            subspace: Subspace::from_orthonormal_unchecked(basis),
        })
    }

    pub fn from_subspace(s: &Subspace) -> Result<Self> {
        if s.dim() != 1 {
            return Err(Error::Precondition(format!(
                "expected a ray, got dimension {}",
                s.dim()
            )));
        }
        Self::new(&s.basis.column(0))
    }

    pub fn vector(&self) -> &[Complex64] {
        &self.vector
    }

    pub fn as_subspace(&self) -> &Subspace {
        &self.subspace
    }

    pub fn ambient_dim(&self) -> usize {
        self.vector.len()
    }
}

impl AsRef<Subspace> for Ray {
    fn as_ref(&self) -> &Subspace {
        &self.subspace
    }
}

impl From<Ray> for Subspace {
    fn from(r: Ray) -> Subspace {
        r.subspace
    }
}

impl Serialize for Ray {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.subspace.serialize(serializer)
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    ambient_dim: usize,
    basis: Vec<Vec<Complex64>>,
}

impl Serialize for Subspace {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SubspaceJson {
            ambient_dim: self.ambient_dim(),
            basis: self.basis.columns(),
        }
        .serialize(serializer)
    }
}

/// Accepts any spanning set; the columns are re-orthonormalized on load.
impl<'de> Deserialize<'de> for Subspace {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SubspaceJson::deserialize(deserializer)?;
        Subspace::span(raw.ambient_dim, &raw.basis, Tolerance::default())
            .map_err(serde::de::Error::custom)
    }
}
