//! Finite sublattices of the subspace lattice, materialized by closure, and
//! exhaustive search for their 2-valued homomorphisms.

use std::collections::HashMap;

use serde::Serialize;

use crate::determinate::{membership_in_d, StateProjections};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerance};
use crate::subspace::Subspace;

pub const DEFAULT_MAX_ELEMENTS: usize = 4096;

/// Width of the hash buckets used to deduplicate subspaces during closure.
const BUCKET_WIDTH: f64 = 1e-6;

/// Deduplicating store of subspaces. Two subspaces are the same element when
/// their projectors are within eps; the first representative wins.
///
/// Lookup hashes the scalar `Re tr(M P)` for a fixed random Hermitian `M`.
/// Equal subspaces land in the same or an adjacent bucket.
struct Interner {
    tol: Tolerance,
    max_elements: usize,
    key_matrix: ComplexMatrix,
    elements: Vec<Subspace>,
    buckets: HashMap<(usize, i64), Vec<usize>>,
}

impl Interner {
    fn new(ambient_dim: usize, max_elements: usize, tol: Tolerance) -> Self {
        let g = linalg::random_unitary_from(&mut linalg::seeded_rng(0x5eed), ambient_dim);
        let d: Vec<_> = (0..ambient_dim)
            .map(|i| num_complex::Complex64::new(1.0 + i as f64 * 0.731, 0.0))
            .collect();
        let key_matrix = &(&g * &ComplexMatrix::diag(&d)) * &g.adjoint();
        Self {
            tol,
            max_elements,
            key_matrix,
            elements: Vec::new(),
            buckets: HashMap::new(),
        }
    }

    fn bucket(&self, s: &Subspace) -> i64 {
        let t = (&self.key_matrix * s.projector()).trace().re;
        (t / BUCKET_WIDTH).floor() as i64
    }

    fn find(&self, s: &Subspace, bucket: i64) -> Option<usize> {
        (bucket - 1..=bucket + 1)
            .filter_map(|b| self.buckets.get(&(s.dim(), b)))
            .flatten()
            .copied()
            .find(|&i| self.elements[i].approx_eq(s, self.tol))
    }

    fn intern(&mut self, s: Subspace) -> Result<usize> {
        let bucket = self.bucket(&s);
        if let Some(i) = self.find(&s, bucket) {
            return Ok(i);
        }
        if self.elements.len() >= self.max_elements {
            return Err(Error::ClosureOverflow(self.max_elements));
        }
        let i = self.elements.len();
        self.buckets.entry((s.dim(), bucket)).or_default().push(i);
        self.elements.push(s);
        Ok(i)
    }
}

/// An explicit finite ortholattice of subspaces with precomputed tables.
///
/// Index 0 is always the null subspace and index 1 the full space.
#[derive(Debug, Clone)]
pub struct FiniteOrtholattice {
    ambient_dim: usize,
    tol: Tolerance,
    elements: Vec<Subspace>,
    complement: Vec<usize>,
    meet_table: Vec<Vec<usize>>,
    join_table: Vec<Vec<usize>>,
    order: Vec<Vec<bool>>,
}

pub const NULL: usize = 0;
pub const FULL: usize = 1;

/// Smallest set containing `generators`, the null subspace and the full space
/// that is closed under meet, join and orthocomplement.
pub fn generate(
    ambient_dim: usize,
    generators: &[Subspace],
    max_elements: usize,
    tol: Tolerance,
) -> Result<FiniteOrtholattice> {
    if ambient_dim == 0 {
        return Err(Error::EmptyMatrix);
    }
    if max_elements < 2 {
        return Err(Error::Precondition(
            "max_elements must be at least 2".into(),
        ));
    }
    if let Some(g) = generators.iter().find(|g| g.ambient_dim() != ambient_dim) {
        return Err(Error::DimensionMismatch {
            expected: ambient_dim,
            found: g.ambient_dim(),
        });
    }

    let mut store = Interner::new(ambient_dim, max_elements, tol);
    store.intern(Subspace::null(ambient_dim))?;
    store.intern(Subspace::full(ambient_dim))?;
    for g in generators {
        store.intern(g.clone())?;
    }

    let mut complement = Vec::new();
    // Row x holds meet/join with every y <= x.
    let mut meets: Vec<Vec<usize>> = Vec::new();
    let mut joins: Vec<Vec<usize>> = Vec::new();
    let mut next = 0;
    while next < store.elements.len() {
        let x = store.elements[next].clone();
        complement.push(store.intern(x.ortho())?);
        let mut meet_row = Vec::with_capacity(next + 1);
        let mut join_row = Vec::with_capacity(next + 1);
        for y in 0..=next {
            let other = store.elements[y].clone();
            meet_row.push(store.intern(x.meet(&other, tol)?)?);
            join_row.push(store.intern(x.join(&other, tol)?)?);
        }
        meets.push(meet_row);
        joins.push(join_row);
        next += 1;
    }

    let n = store.elements.len();
    let full_table = |rows: &[Vec<usize>]| -> Vec<Vec<usize>> {
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if j <= i { rows[i][j] } else { rows[j][i] })
                    .collect()
            })
            .collect()
    };
    let meet_table = full_table(&meets);
    let join_table = full_table(&joins);
    let order = (0..n)
        .map(|i| (0..n).map(|j| meet_table[i][j] == i).collect())
        .collect();

    Ok(FiniteOrtholattice {
        ambient_dim,
        tol,
        elements: store.elements,
        complement,
        meet_table,
        join_table,
        order,
    })
}

impl FiniteOrtholattice {
    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn tolerance(&self) -> Tolerance {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[Subspace] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Subspace {
        &self.elements[i]
    }

    pub fn complement(&self, i: usize) -> usize {
        self.complement[i]
    }

    pub fn complements(&self) -> &[usize] {
        &self.complement
    }

    pub fn meet(&self, i: usize, j: usize) -> usize {
        self.meet_table[i][j]
    }

    pub fn join(&self, i: usize, j: usize) -> usize {
        self.join_table[i][j]
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.order[i][j]
    }

    pub fn index_of(&self, s: &Subspace) -> Option<usize> {
        self.elements.iter().position(|e| e.approx_eq(s, self.tol))
    }

    /// Element indices sorted by ascending dimension (ties by index).
    pub fn by_dimension(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| (self.elements[i].dim(), i));
        idx
    }

    /// Checks the table invariants: involutive complement, null/full
    /// complementary, and an order that is a partial order agreeing with the
    /// join table.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let n = self.len();
        if self.complement[NULL] != FULL || self.complement[FULL] != NULL {
            return Err("complement of null is not full".into());
        }
        for i in 0..n {
            if self.complement[self.complement[i]] != i {
                return Err(format!("complement not involutive at {i}"));
            }
            if !self.order[i][i] {
                return Err(format!("order not reflexive at {i}"));
            }
            for j in 0..n {
                if i != j && self.order[i][j] && self.order[j][i] {
                    return Err(format!("order not antisymmetric at ({i},{j})"));
                }
                if self.order[i][j] != (self.join_table[i][j] == j) {
                    return Err(format!(
                        "meet and join tables disagree on order at ({i},{j})"
                    ));
                }
                if self.order[i][j] && !self.order[self.complement[j]][self.complement[i]] {
                    return Err(format!("complement not order-reversing at ({i},{j})"));
                }
                for k in 0..n {
                    if self.order[i][j] && self.order[j][k] && !self.order[i][k] {
                        return Err(format!("order not transitive at ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Full re-check of every homomorphism equation.
    pub fn is_homomorphism(&self, h: &TwoValuedHom) -> bool {
        let v = &h.values;
        if v.len() != self.len() || v[NULL] || !v[FULL] {
            return false;
        }
        (0..self.len()).all(|i| {
            v[self.complement[i]] != v[i]
                && (0..self.len()).all(|j| {
                    v[self.meet_table[i][j]] == (v[i] && v[j])
                        && v[self.join_table[i][j]] == (v[i] || v[j])
                })
        })
    }
}

/// A map from lattice elements to {0,1}, one bit per element index.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TwoValuedHom {
    values: Vec<bool>,
}

impl TwoValuedHom {
    pub fn from_values(values: Vec<bool>) -> Self {
        Self { values }
    }

    pub fn value(&self, i: usize) -> bool {
        self.values[i]
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn to_bitstring(&self) -> String {
        self.values
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }
}

impl Serialize for TwoValuedHom {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_bitstring())
    }
}

struct HomSearch<'a> {
    lattice: &'a FiniteOrtholattice,
    value: Vec<Option<bool>>,
    trail: Vec<usize>,
    queue: Vec<usize>,
    found: Vec<TwoValuedHom>,
}

impl HomSearch<'_> {
    /// Records `x := v`; `false` on conflict.
    fn set(&mut self, x: usize, v: bool) -> bool {
        match self.value[x] {
            Some(old) => old == v,
            None => {
                self.value[x] = Some(v);
                self.trail.push(x);
                self.queue.push(x);
                true
            }
        }
    }

    fn undo_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let x = self.trail.pop().expect("trail longer than mark");
            self.value[x] = None;
        }
    }

    /// Propagates every queued assignment through complement, order, meet and
    /// join constraints.
    fn propagate(&mut self) -> bool {
        let lat = self.lattice;
        while let Some(x) = self.queue.pop() {
            let v = self.value[x].expect("queued elements are assigned");
            if !self.set(lat.complement[x], !v) {
                return false;
            }
            for y in 0..lat.len() {
                let m = lat.meet_table[x][y];
                let j = lat.join_table[x][y];
                let ok = if v {
                    (!lat.order[x][y] || self.set(y, true))
                        && self.set(j, true)
                        && (self.value[y] != Some(true) || self.set(m, true))
                        && (self.value[m] != Some(false) || self.set(y, false))
                } else {
                    (!lat.order[y][x] || self.set(y, false))
                        && self.set(m, false)
                        && (self.value[y] != Some(false) || self.set(j, false))
                        && (self.value[j] != Some(true) || self.set(y, true))
                };
                if !ok {
                    return false;
                }
            }
        }
        true
    }

    fn search(&mut self, order: &[usize], pos: usize) {
        let Some(offset) = order[pos..].iter().position(|&x| self.value[x].is_none()) else {
            let values: Vec<bool> = self
                .value
                .iter()
                .map(|v| v.expect("complete assignment"))
                .collect();
            self.found.push(TwoValuedHom { values });
            return;
        };
        let x = order[pos + offset];
        for v in [false, true] {
            let mark = self.trail.len();
            self.queue.clear();
            if self.set(x, v) && self.propagate() {
                self.search(order, pos + offset + 1);
            }
            self.queue.clear();
            self.undo_to(mark);
        }
    }
}

/// All 2-valued homomorphisms of `lattice`, in lexicographic order of their
/// bit vectors.
pub fn enumerate_homs(lattice: &FiniteOrtholattice) -> Vec<TwoValuedHom> {
    let mut search = HomSearch {
        lattice,
        value: vec![None; lattice.len()],
        trail: Vec::new(),
        queue: Vec::new(),
        found: Vec::new(),
    };
    if !(search.set(NULL, false) && search.set(FULL, true) && search.propagate()) {
        return Vec::new();
    }
    let order = lattice.by_dimension();
    search.search(&order, 0);
    let mut homs = search.found;
    debug_assert!(homs.iter().all(|h| lattice.is_homomorphism(h)));
    homs.sort();
    homs
}

/// `true` iff every element of `lattice` is a member of the determinate
/// sublattice fixed by `sp`.
pub fn is_sublattice_of_d(lattice: &FiniteOrtholattice, sp: &StateProjections) -> Result<bool> {
    for p in lattice.elements() {
        if !membership_in_d(p, sp, lattice.tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Serialize)]
pub struct LatticeExport<'a> {
    pub ambient_dim: usize,
    pub elements: &'a [Subspace],
    pub complement: &'a [usize],
    pub homomorphisms: Vec<String>,
}

impl FiniteOrtholattice {
    pub fn export(&self, homs: &[TwoValuedHom]) -> LatticeExport<'_> {
        LatticeExport {
            ambient_dim: self.ambient_dim,
            elements: &self.elements,
            complement: &self.complement,
            homomorphisms: homs.iter().map(TwoValuedHom::to_bitstring).collect(),
        }
    }
}
