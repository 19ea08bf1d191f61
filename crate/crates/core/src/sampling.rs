//! Seeded random subspaces, members of the determinate sublattice, and
//! state/observable instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::determinate::{membership_defect, Observable, State, StateProjections};
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix, Tolerance};
use crate::subspace::Subspace;

/// Samples closer than this to a membership decision are redrawn.
pub const BOUNDARY_MARGIN: f64 = 1e-6;

/// Uniform dimension in `[0, n]`, basis from the leading columns of a random
/// unitary.
pub fn random_subspace<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Subspace {
    let d = rng.gen_range(0..=n);
    let u = linalg::random_unitary_from(rng, n);
    Subspace::span(n, &u.columns()[..d], Tolerance::default())
        .expect("unitary columns are independent")
}

/// A random subspace of `within`, dimension uniform in `[0, dim within]`.
pub fn random_subspace_of<R: Rng + ?Sized>(rng: &mut R, within: &Subspace) -> Subspace {
    let k = within.dim();
    let n = within.ambient_dim();
    if k == 0 {
        return Subspace::null(n);
    }
    let d = rng.gen_range(0..=k);
    let mix = linalg::random_unitary_from(rng, k);
    let cols = within.basis() * &mix;
    Subspace::span(n, &cols.columns()[..d], Tolerance::default())
        .expect("basis columns are independent")
}

/// `(∨_{i∈S} e_{r_i}) ∨ q` for a random subset `S` of the projections and a
/// random `q` orthogonal to all of them.
pub fn random_member<R: Rng + ?Sized>(
    rng: &mut R,
    sp: &StateProjections,
    tol: Tolerance,
) -> Result<Subspace> {
    let all: Vec<usize> = sp.entries.iter().map(|e| e.eigenspace_index).collect();
    let selected: Vec<usize> = all.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
    let free = sp.join_of(&all, tol)?.ortho();
    let q = random_subspace_of(rng, &free);
    sp.join_of(&selected, tol)?.join(&q, tol)
}

/// Draws from `draw` until the sample is at least [`BOUNDARY_MARGIN`] away
/// from a membership decision boundary. Returns the sample and the number of
/// redraws.
pub fn away_from_boundary<R, F>(
    rng: &mut R,
    sp: &StateProjections,
    tol: Tolerance,
    mut draw: F,
) -> Result<(Subspace, usize)>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R) -> Result<Subspace>,
{
    let mut redraws = 0;
    loop {
        let p = draw(rng)?;
        let defect = membership_defect(&p, sp);
        if defect < tol.eps() || defect >= BOUNDARY_MARGIN {
            return Ok((p, redraws));
        }
        redraws += 1;
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub state: State,
    pub observable: Observable,
}

/// Eigenspaces of the given dimensions in a random orthonormal frame, and a
/// random state with no weight on the eigenspaces listed in `orthogonal_to`.
pub fn random_instance<R: Rng + ?Sized>(
    rng: &mut R,
    dims: &[usize],
    orthogonal_to: &[usize],
    tol: Tolerance,
) -> Result<Instance> {
    let n: usize = dims.iter().sum();
    let frame = linalg::random_unitary_from(rng, n);
    let columns = frame.columns();
    let mut eigenspaces = Vec::with_capacity(dims.len());
    let mut coeffs = linalg::gaussian_vector(rng, n);
    let mut start = 0;
    for (i, &d) in dims.iter().enumerate() {
        eigenspaces.push(Subspace::span(n, &columns[start..start + d], tol)?);
        if orthogonal_to.contains(&i) {
            coeffs[start..start + d]
                .iter_mut()
                .for_each(|c| *c = linalg::ZERO);
        }
        start += d;
    }
    let v = frame.mul_vec(&coeffs)?;
    Ok(Instance {
        state: State::normalized(&v)?,
        observable: Observable::new(eigenspaces, tol)?,
    })
}

/// A unitary acting as a random unitary inside `within` and as the identity
/// on its orthocomplement.
pub fn random_unitary_inside<R: Rng + ?Sized>(rng: &mut R, within: &Subspace) -> ComplexMatrix {
    let n = within.ambient_dim();
    let k = within.dim();
    let id = ComplexMatrix::identity(n);
    if k == 0 {
        return id;
    }
    let inner = linalg::random_unitary_from(rng, k);
    let b = within.basis();
    let rotated = &(b * &inner) * &b.adjoint();
    &(&id - within.projector()) + &rotated
}

/// Picks one element of a nonempty slice.
pub fn pick<'a, T, R: Rng + ?Sized>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("nonempty choice")
}
