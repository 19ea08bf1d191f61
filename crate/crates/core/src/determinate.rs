//! The determinate sublattice of a pure state and a preferred observable.
//!
//! Given a state ray `e` and the eigenspaces `r_1..r_m` of an observable `R`,
//! the nonzero projections `e_{r_i} = (e ∨ r_i⊥) ∧ r_i` fix the sublattice
//!
//! ```text
//! D(e, R) = { p : e_{r_i} ≤ p or e_{r_i} ≤ p⊥ for every i }.
//! ```
//!
//! This module computes the projections, decides membership, decomposes
//! members, and builds the unitaries that fix `e` and every `r_i`: rotations
//! about `e_{r_i}`, reflections through hyperplanes containing it, and the
//! `diag(i, 1)` phase map on a two-dimensional eigenspace.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerance, ONE};
use crate::subspace::{Ray, Subspace};

/// Eigenvalue clustering tolerance for [`Observable::from_hermitian`].
pub const EIGENVALUE_CLUSTER_TOL: f64 = 1e-8;

/// Sum-of-weights tolerance for a resolution of the state.
pub const WEIGHT_SUM_TOL: f64 = 1e-8;

/// Largest projector distance at which the lattice and projector formulas for
/// `e_{r_i}` are considered to agree.
pub const PROJECTION_AGREEMENT_TOL: f64 = 1e-8;

/// A resolution of `C^n` into mutually orthogonal nonzero eigenspaces.
#[derive(Debug, Clone, Serialize)]
pub struct Observable {
    ambient_dim: usize,
    eigenspaces: Vec<Subspace>,
}

impl Observable {
    pub fn new(eigenspaces: Vec<Subspace>, tol: Tolerance) -> Result<Self> {
        let Some(first) = eigenspaces.first() else {
            return Err(Error::InvalidObservable("no eigenspaces".into()));
        };
        let n = first.ambient_dim();
        if eigenspaces.len() > n {
            return Err(Error::InvalidObservable(format!(
                "{} eigenspaces in dimension {n}",
                eigenspaces.len()
            )));
        }
        for (i, r) in eigenspaces.iter().enumerate() {
            if r.ambient_dim() != n {
                return Err(Error::InvalidObservable(format!(
                    "eigenspace {i} lives in dimension {}, expected {n}",
                    r.ambient_dim()
                )));
            }
            if r.is_null() {
                return Err(Error::InvalidObservable(format!("eigenspace {i} is null")));
            }
            for (j, s) in eigenspaces.iter().enumerate().take(i) {
                let overlap = (r.projector() * s.projector()).frobenius_norm();
                if overlap >= tol.eps() {
                    return Err(Error::InvalidObservable(format!(
                        "eigenspaces {j} and {i} are not orthogonal (|P_j P_i| = {overlap:e})"
                    )));
                }
            }
        }
        let total: usize = eigenspaces.iter().map(Subspace::dim).sum();
        if total != n {
            return Err(Error::InvalidObservable(format!(
                "eigenspace dimensions sum to {total}, expected {n}"
            )));
        }
        Ok(Self {
            ambient_dim: n,
            eigenspaces,
        })
    }

    /// Eigenspaces of a Hermitian matrix, grouping eigenvalues that differ by
    /// less than [`EIGENVALUE_CLUSTER_TOL`] (relative to the spectral radius,
    /// floored at one). Eigenspaces are ordered by ascending eigenvalue.
    pub fn from_hermitian(matrix: &ComplexMatrix, tol: Tolerance) -> Result<Self> {
        let n = matrix.rows();
        if n == 0 || !matrix.is_square() {
            return Err(Error::InvalidObservable(
                "expected a nonempty square matrix".into(),
            ));
        }
        let skew = matrix.distance(&matrix.adjoint());
        let scale = matrix.frobenius_norm().max(1.0);
        if skew >= tol.eps() * scale {
            return Err(Error::InvalidObservable(format!(
                "matrix is not Hermitian (|A - A*| = {skew:e})"
            )));
        }
        let m =
            nalgebra::DMatrix::from_fn(n, n, |i, j| (matrix[(i, j)] + matrix[(j, i)].conj()) / 2.0);
        let eig = m.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let radius = eig
            .eigenvalues
            .iter()
            .fold(1.0_f64, |acc, v| acc.max(v.abs()));

        let mut groups: Vec<Vec<usize>> = Vec::new();
        for &k in &order {
            match groups.last_mut() {
                Some(g)
                    if (eig.eigenvalues[k] - eig.eigenvalues[g[0]]).abs()
                        < EIGENVALUE_CLUSTER_TOL * radius =>
                {
                    g.push(k)
                }
                _ => groups.push(vec![k]),
            }
        }
        let eigenspaces = groups
            .iter()
            .map(|g| {
                let cols: Vec<Vec<Complex64>> = g
                    .iter()
                    .map(|&k| eig.eigenvectors.column(k).iter().copied().collect())
                    .collect();
                Subspace::span(n, &cols, tol)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(eigenspaces, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn eigenspaces(&self) -> &[Subspace] {
        &self.eigenspaces
    }

    pub fn len(&self) -> usize {
        self.eigenspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenspaces.is_empty()
    }
}

/// A pure state: a unit vector up to phase.
#[derive(Debug, Clone, Serialize)]
pub struct State {
    ray: Ray,
}

impl State {
    /// Requires `|v| = 1` within eps.
    pub fn new(v: &[Complex64], tol: Tolerance) -> Result<Self> {
        let norm = linalg::norm(v);
        if !norm.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        if (norm - 1.0).abs() >= tol.eps() {
            return Err(Error::InvalidState(format!("norm {norm} is not 1")));
        }
        Ok(Self { ray: Ray::new(v)? })
    }

    /// Normalizes `v` first.
    pub fn normalized(v: &[Complex64]) -> Result<Self> {
        Ok(Self {
            ray: Ray::new(v).map_err(|_| Error::InvalidState("zero vector".into()))?,
        })
    }

    pub fn ray(&self) -> &Ray {
        &self.ray
    }

    pub fn vector(&self) -> &[Complex64] {
        self.ray.vector()
    }

    pub fn subspace(&self) -> &Subspace {
        self.ray.as_subspace()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ray.ambient_dim()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StateProjection {
    pub eigenspace_index: usize,
    #[serde(skip)]
    pub eigenspace: Subspace,
    pub projection: Ray,
    /// Born weight `|P_{r_i} e|^2`.
    pub weight: f64,
}

/// The nonzero projections `e_{r_i}` of a state onto the eigenspaces of an
/// observable. Eigenspaces orthogonal to the state are listed in `dropped`.
#[derive(Debug, Clone, Serialize)]
pub struct StateProjections {
    pub ambient_dim: usize,
    pub entries: Vec<StateProjection>,
    pub dropped: Vec<usize>,
}

impl StateProjections {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn weight_sum(&self) -> f64 {
        self.entries.iter().map(|e| e.weight).sum()
    }

    /// The entry for eigenspace `i`, if the state projects nontrivially onto it.
    pub fn entry(&self, i: usize) -> Result<&StateProjection> {
        self.entries
            .iter()
            .find(|e| e.eigenspace_index == i)
            .ok_or_else(|| {
                Error::Precondition(format!("state has no projection onto eigenspace {i}"))
            })
    }

    pub fn projections(&self) -> impl Iterator<Item = &Subspace> {
        self.entries.iter().map(|e| e.projection.as_subspace())
    }

    /// `∨ e_{r_i}` over the entries whose eigenspace index is in `selected`.
    pub fn join_of(&self, selected: &[usize], tol: Tolerance) -> Result<Subspace> {
        let mut acc = Subspace::null(self.ambient_dim);
        for e in self
            .entries
            .iter()
            .filter(|e| selected.contains(&e.eigenspace_index))
        {
            acc = acc.join(e.projection.as_subspace(), tol)?;
        }
        Ok(acc)
    }
}

/// `e_{r_i} = (e ∨ r_i⊥) ∧ r_i` for every eigenspace, cross-checked against
/// `span(P_{r_i} e)`.
pub fn project_state(e: &State, r: &Observable, tol: Tolerance) -> Result<StateProjections> {
    let n = r.ambient_dim();
    if e.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: e.ambient_dim(),
        });
    }
    let mut entries = Vec::new();
    let mut dropped = Vec::new();
    for (i, ri) in r.eigenspaces().iter().enumerate() {
        let via_lattice = e.subspace().join(&ri.ortho(), tol)?.meet(ri, tol)?;
        let direct = ri.projector().mul_vec(e.vector())?;
        let amplitude = linalg::norm(&direct);
        if amplitude < tol.eps() {
            if !via_lattice.is_null() {
                return Err(Error::ProjectionMismatch {
                    index: i,
                    distance: via_lattice.distance(&Subspace::null(n)),
                });
            }
            dropped.push(i);
            continue;
        }
        let projection = Ray::new(&direct)?;
        let distance = via_lattice.distance(projection.as_subspace());
        if via_lattice.dim() != 1 || distance >= PROJECTION_AGREEMENT_TOL {
            return Err(Error::ProjectionMismatch { index: i, distance });
        }
        entries.push(StateProjection {
            eigenspace_index: i,
            eigenspace: ri.clone(),
            projection,
            weight: amplitude * amplitude,
        });
    }
    Ok(StateProjections {
        ambient_dim: n,
        entries,
        dropped,
    })
}

fn check_ambient(p: &Subspace, sp: &StateProjections) -> Result<()> {
    if p.ambient_dim() == sp.ambient_dim {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: sp.ambient_dim,
            found: p.ambient_dim(),
        })
    }
}

/// `p ∈ D(e, R)`: every `e_{r_i}` lies in `p` or in `p⊥`.
pub fn membership_in_d(p: &Subspace, sp: &StateProjections, tol: Tolerance) -> Result<bool> {
    Ok(skew_witness(p, sp, tol)?.is_none())
}

/// First eigenspace index whose projection lies neither in `p` nor in `p⊥`.
pub fn skew_witness(p: &Subspace, sp: &StateProjections, tol: Tolerance) -> Result<Option<usize>> {
    check_ambient(p, sp)?;
    let perp = p.ortho();
    for entry in &sp.entries {
        let e_ri = entry.projection.as_subspace();
        if !e_ri.leq(p, tol)? && !e_ri.leq(&perp, tol)? {
            return Ok(Some(entry.eigenspace_index));
        }
    }
    Ok(None)
}

/// Largest, over `i`, of the smaller inclusion defect of `e_{r_i}` in `p` or
/// `p⊥`. Below eps exactly for members.
pub fn membership_defect(p: &Subspace, sp: &StateProjections) -> f64 {
    let perp = p.ortho();
    sp.projections()
        .map(|e_ri| e_ri.inclusion_defect(p).min(e_ri.inclusion_defect(&perp)))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Decomposition {
    /// `p = (∨_{i ∈ selected} e_{r_i}) ∨ residue`, residue orthogonal to every
    /// `e_{r_j}`.
    Member {
        selected: Vec<usize>,
        residue: Subspace,
    },
    NotMember,
}

impl Decomposition {
    pub fn is_member(&self) -> bool {
        matches!(self, Decomposition::Member { .. })
    }

    /// `(∨_S e_{r_i}) ∨ q`, or `None` for a non-member.
    pub fn reconstruct(&self, sp: &StateProjections, tol: Tolerance) -> Result<Option<Subspace>> {
        match self {
            Decomposition::Member { selected, residue } => {
                Ok(Some(sp.join_of(selected, tol)?.join(residue, tol)?))
            }
            Decomposition::NotMember => Ok(None),
        }
    }
}

/// Splits `p` into the projections it contains and a residue orthogonal to
/// all projections. A subspace for which the residue `p ∧ (∨_S e_{r_i})⊥`
/// still overlaps some `e_{r_j}` is not a member.
pub fn canonical_decomposition(
    p: &Subspace,
    sp: &StateProjections,
    tol: Tolerance,
) -> Result<Decomposition> {
    check_ambient(p, sp)?;
    let mut selected = Vec::new();
    for entry in &sp.entries {
        if entry.projection.as_subspace().leq(p, tol)? {
            selected.push(entry.eigenspace_index);
        }
    }
    let contained = sp.join_of(&selected, tol)?;
    let residue = p.meet(&contained.ortho(), tol)?;
    let orthogonal = sp
        .projections()
        .all(|e_rj| residue.is_orthogonal_to(e_rj, tol));
    Ok(if orthogonal {
        Decomposition::Member { selected, residue }
    } else {
        Decomposition::NotMember
    })
}

/// `e_{r_i}′`: the orthocomplement of `e_{r_i}` inside `r_i`.
pub fn complement_in_eigenspace(
    sp: &StateProjections,
    i: usize,
    tol: Tolerance,
) -> Result<Subspace> {
    let entry = sp.entry(i)?;
    entry
        .projection
        .as_subspace()
        .relative_complement(&entry.eigenspace, tol)
}

/// A rotation by `angle` of a seeded 2-plane inside `e_{r_i}′`, identity on
/// `e_{r_i}` and on `r_i⊥`.
///
/// A full or zero turn returns the identity for any eigenspace; a nontrivial
/// angle needs `dim r_i ≥ 3`.
pub fn build_rotation(
    sp: &StateProjections,
    i: usize,
    angle: f64,
    plane_seed: u64,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    let n = sp.ambient_dim;
    let entry = sp.entry(i)?;
    let (sin, cos) = angle.sin_cos();
    if (cos - 1.0).abs() < tol.eps() && sin.abs() < tol.eps() {
        return Ok(ComplexMatrix::identity(n));
    }
    if entry.eigenspace.dim() < 3 {
        return Err(Error::Precondition(format!(
            "a nontrivial rotation about e_r fixing the ray needs an eigenspace of dimension >= 3, got {}",
            entry.eigenspace.dim()
        )));
    }
    let perp = complement_in_eigenspace(sp, i, tol)?;
    let mix = linalg::random_unitary(perp.dim(), plane_seed)?;
    let plane = perp.basis() * &mix;
    let u = ComplexMatrix::column_vector(&plane.column(0));
    let v = ComplexMatrix::column_vector(&plane.column(1));
    let uu = &u * &u.adjoint();
    let vv = &v * &v.adjoint();
    let vu = &v * &u.adjoint();
    let uv = &u * &v.adjoint();
    let id = ComplexMatrix::identity(n);
    let in_plane = (&uu + &vv).scale(Complex64::new(cos - 1.0, 0.0));
    let turn = (&vu - &uv).scale(Complex64::new(sin, 0.0));
    Ok(&(&id + &in_plane) + &turn)
}

/// The reflection fixing `e_{r_i} ∨ c` pointwise, negating its orthocomplement
/// within `r_i`, identity on `r_i⊥`. Requires `c ≤ e_{r_i}′`.
pub fn build_reflection(
    sp: &StateProjections,
    i: usize,
    c: &Subspace,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    let entry = sp.entry(i)?;
    check_ambient(c, sp)?;
    let e_ri = entry.projection.as_subspace();
    if !c.leq(&entry.eigenspace, tol)? {
        return Err(Error::Precondition(
            "reflection subspace c is not inside r_i".into(),
        ));
    }
    if !c.is_orthogonal_to(e_ri, tol) {
        return Err(Error::Precondition(
            "reflection subspace c is not orthogonal to e_r".into(),
        ));
    }
    let hyperplane = e_ri.join(c, tol)?;
    let negated = hyperplane.relative_complement(&entry.eigenspace, tol)?;
    let id = ComplexMatrix::identity(sp.ambient_dim);
    Ok(&id - &negated.projector().scale(Complex64::new(2.0, 0.0)))
}

/// `diag(i, 1)` in the basis `(e_{r_i}, e_{r_i}′)` of a two-dimensional
/// eigenspace.
///
/// On `r_i⊥` the map is the scalar `i`, which fixes every subspace of `r_i⊥`
/// and keeps the whole state ray `e` fixed: `U e = i e`.
pub fn build_phase_map(sp: &StateProjections, i: usize) -> Result<ComplexMatrix> {
    let entry = sp.entry(i)?;
    if entry.eigenspace.dim() != 2 {
        return Err(Error::Precondition(format!(
            "the phase map needs a two-dimensional eigenspace, got {}",
            entry.eigenspace.dim()
        )));
    }
    let untouched = entry
        .projection
        .as_subspace()
        .relative_complement(&entry.eigenspace, Tolerance::default())?;
    let phase = ComplexMatrix::identity(sp.ambient_dim).scale(linalg::I);
    Ok(&phase + &untouched.projector().scale(ONE - linalg::I))
}

/// `U e = e` as rays and `U r_i = r_i` for every eigenspace.
pub fn is_preserving(u: &ComplexMatrix, e: &State, r: &Observable, tol: Tolerance) -> Result<bool> {
    if !e
        .subspace()
        .apply_unitary(u, tol)?
        .approx_eq(e.subspace(), tol)
    {
        return Ok(false);
    }
    for ri in r.eigenspaces() {
        if !ri.apply_unitary(u, tol)?.approx_eq(ri, tol) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `∨ U(b)` over `unitaries`.
pub fn span_orbit(b: &Subspace, unitaries: &[ComplexMatrix], tol: Tolerance) -> Result<Subspace> {
    let mut acc = Subspace::null(b.ambient_dim());
    for u in unitaries {
        acc = acc.join(&b.apply_unitary(u, tol)?, tol)?;
    }
    Ok(acc)
}
