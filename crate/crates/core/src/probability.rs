//! Measures over 2-valued homomorphisms that reproduce Born probabilities.
//!
//! For every family `I` of pairwise compatible lattice elements the measure
//! must satisfy
//!
//! ```text
//! μ({h : h(p_i) = 1 for all i ∈ I}) = tr(P_e Π_{i∈I} P_i)
//! ```
//!
//! With finitely many homomorphisms this is the linear system `A w = b`,
//! `w ≥ 0`, solved here by active-set nonnegative least squares.

use std::collections::HashMap;

use serde::Serialize;

use crate::determinate::State;
use crate::error::{Error, Result};
use crate::linalg;
use crate::ortholattice::{FiniteOrtholattice, TwoValuedHom, FULL};

pub const DEFAULT_MAX_FAMILY: usize = 3;

/// Largest constraint violation accepted as feasible.
pub const FEASIBILITY_TOL: f64 = 1e-7;

/// Weights this far below zero are solver noise and clamp to zero.
const NEGATIVE_WEIGHT_SLACK: f64 = 1e-10;

/// Pairwise-commuting lattice elements, by index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct CompatibleFamily {
    indices: Vec<usize>,
}

impl CompatibleFamily {
    /// Checks pairwise commutation of the projectors.
    pub fn new(lattice: &FiniteOrtholattice, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        let eps = lattice.tolerance().eps();
        for (a, &i) in indices.iter().enumerate() {
            for &j in &indices[a + 1..] {
                if lattice.element(i).commutator_norm(lattice.element(j)) >= eps {
                    return Err(Error::IncompatibleFamily(indices));
                }
            }
        }
        Ok(Self { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

fn commutation_table(lattice: &FiniteOrtholattice) -> Vec<Vec<bool>> {
    let n = lattice.len();
    let eps = lattice.tolerance().eps();
    let mut table = vec![vec![true; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let commute = lattice.element(i).commutator_norm(lattice.element(j)) < eps;
            table[i][j] = commute;
            table[j][i] = commute;
        }
    }
    table
}

/// Every family of at most `max_size` pairwise-commuting elements, ordered by
/// size and then lexicographically.
pub fn compatible_families(lattice: &FiniteOrtholattice, max_size: usize) -> Vec<CompatibleFamily> {
    fn extend(
        table: &[Vec<bool>],
        size: usize,
        current: &mut Vec<usize>,
        start: usize,
        out: &mut Vec<CompatibleFamily>,
    ) {
        if current.len() == size {
            out.push(CompatibleFamily {
                indices: current.clone(),
            });
            return;
        }
        for next in start..table.len() {
            if current.iter().all(|&c| table[c][next]) {
                current.push(next);
                extend(table, size, current, next + 1, out);
                current.pop();
            }
        }
    }

    let table = commutation_table(lattice);
    let mut out = Vec::new();
    for size in 1..=max_size.min(lattice.len()) {
        extend(&table, size, &mut Vec::with_capacity(size), 0, &mut out);
    }
    out
}

/// `tr(P_e Π_{i∈I} P_i)`, clamped to `[0, 1]`.
pub fn born_probability(
    e: &State,
    family: &CompatibleFamily,
    lattice: &FiniteOrtholattice,
) -> Result<f64> {
    if e.ambient_dim() != lattice.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.ambient_dim(),
            found: e.ambient_dim(),
        });
    }
    let eps = lattice.tolerance().eps();
    for (a, &i) in family.indices.iter().enumerate() {
        for &j in &family.indices[a + 1..] {
            if lattice.element(i).commutator_norm(lattice.element(j)) >= eps {
                return Err(Error::IncompatibleFamily(family.indices.clone()));
            }
        }
    }
    Ok(born_unchecked(e, family, lattice))
}

fn born_unchecked(e: &State, family: &CompatibleFamily, lattice: &FiniteOrtholattice) -> f64 {
    let mut v = e.vector().to_vec();
    for &i in family.indices.iter().rev() {
        v = lattice
            .element(i)
            .projector()
            .mul_vec(&v)
            .expect("state and lattice share the ambient dimension");
    }
    linalg::dot(e.vector(), &v).re.clamp(0.0, 1.0)
}

/// A nonnegative weight per homomorphism and the largest constraint violation.
#[derive(Debug, Clone, Serialize)]
pub struct MeasureSolution {
    pub weights: Vec<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub enum TpOutcome {
    Feasible(MeasureSolution),
    /// `witness_families` is a set of constraints that cannot hold jointly and
    /// that stays feasible when any single one of them is removed.
    Infeasible {
        residual: f64,
        witness_families: Vec<CompatibleFamily>,
    },
}

impl TpOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, TpOutcome::Feasible(_))
    }

    pub fn residual(&self) -> f64 {
        match self {
            TpOutcome::Feasible(s) => s.residual,
            TpOutcome::Infeasible { residual, .. } => *residual,
        }
    }

    pub fn report(&self) -> TpReport {
        match self {
            TpOutcome::Feasible(s) => TpReport {
                feasible: true,
                weights: s.weights.clone(),
                residual: s.residual,
                witness_families: Vec::new(),
            },
            TpOutcome::Infeasible {
                residual,
                witness_families,
            } => TpReport {
                feasible: false,
                weights: Vec::new(),
                residual: *residual,
                witness_families: witness_families.iter().map(|f| f.indices.clone()).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TpReport {
    pub feasible: bool,
    pub weights: Vec<f64>,
    pub residual: f64,
    pub witness_families: Vec<Vec<usize>>,
}

/// One row of `A w = b`.
#[derive(Debug, Clone)]
struct Constraint {
    family: CompatibleFamily,
    support: Vec<bool>,
    rhs: f64,
}

fn assemble(
    e: &State,
    lattice: &FiniteOrtholattice,
    homs: &[TwoValuedHom],
    max_family: usize,
) -> Vec<Constraint> {
    let mut rows: Vec<Constraint> = Vec::new();
    let mut seen: HashMap<Vec<bool>, Vec<usize>> = HashMap::new();
    for family in compatible_families(lattice, max_family) {
        let support: Vec<bool> = homs
            .iter()
            .map(|h| family.indices.iter().all(|&i| h.value(i)))
            .collect();
        let rhs = born_unchecked(e, &family, lattice);
        let same = seen.entry(support.clone()).or_default();
        if same.iter().any(|&r| (rows[r].rhs - rhs).abs() <= 1e-12) {
            continue;
        }
        same.push(rows.len());
        rows.push(Constraint {
            family,
            support,
            rhs,
        });
    }
    rows
}

fn max_violation(rows: &[&Constraint], weights: &[f64]) -> f64 {
    rows.iter()
        .map(|c| {
            let lhs: f64 = c
                .support
                .iter()
                .zip(weights)
                .filter(|(s, _)| **s)
                .map(|(_, w)| w)
                .sum();
            (lhs - c.rhs).abs()
        })
        .fold(0.0, f64::max)
}

/// Best nonnegative fit for the given rows and its violation.
fn solve(rows: &[&Constraint], homs: usize) -> (Vec<f64>, f64) {
    if homs == 0 {
        return (
            Vec::new(),
            rows.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max),
        );
    }
    let columns: Vec<Vec<f64>> = (0..homs)
        .map(|j| {
            rows.iter()
                .map(|c| if c.support[j] { 1.0 } else { 0.0 })
                .collect()
        })
        .collect();
    let rhs: Vec<f64> = rows.iter().map(|c| c.rhs).collect();
    let mut weights = nnls(&columns, &rhs);
    for w in weights.iter_mut() {
        if *w < NEGATIVE_WEIGHT_SLACK {
            *w = 0.0;
        }
    }
    let violation = max_violation(rows, &weights);
    (weights, violation)
}

/// Searches for a measure over `homs` reproducing the Born probabilities of
/// every compatible family of at most `max_family` elements of `lattice`.
pub fn tp_verify(
    e: &State,
    lattice: &FiniteOrtholattice,
    homs: &[TwoValuedHom],
    max_family: usize,
) -> Result<TpOutcome> {
    if e.ambient_dim() != lattice.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: lattice.ambient_dim(),
            found: e.ambient_dim(),
        });
    }
    if let Some(h) = homs.iter().find(|h| h.values().len() != lattice.len()) {
        return Err(Error::DimensionMismatch {
            expected: lattice.len(),
            found: h.values().len(),
        });
    }
    let rows = assemble(e, lattice, homs, max_family.max(1));
    let all: Vec<&Constraint> = rows.iter().collect();
    let (weights, residual) = solve(&all, homs.len());
    if residual < FEASIBILITY_TOL {
        return Ok(TpOutcome::Feasible(MeasureSolution { weights, residual }));
    }

    if homs.is_empty() {
        let full = CompatibleFamily {
            indices: vec![FULL],
        };
        return Ok(TpOutcome::Infeasible {
            residual,
            witness_families: vec![full],
        });
    }

    // Greedy deletion down to an irreducible infeasible subset.
    let mut keep: Vec<&Constraint> = all;
    let mut k = 0;
    while k < keep.len() {
        let mut trial = keep.clone();
        trial.remove(k);
        if solve(&trial, homs.len()).1 >= FEASIBILITY_TOL {
            keep = trial;
        } else {
            k += 1;
        }
    }
    Ok(TpOutcome::Infeasible {
        residual,
        witness_families: keep.iter().map(|c| c.family.clone()).collect(),
    })
}

/// Least squares `min |A z - b|` over the given columns by Householder QR.
/// Columns whose pivot collapses get a zero coefficient.
fn least_squares(columns: &[&Vec<f64>], b: &[f64]) -> Vec<f64> {
    let m = b.len();
    let p = columns.len();
    let mut a: Vec<Vec<f64>> = columns.iter().map(|c| c.to_vec()).collect();
    let mut rhs = b.to_vec();
    let scale = a
        .iter()
        .flatten()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1.0);
    let steps = p.min(m);
    let mut pivots = vec![0.0; p];
    for k in 0..steps {
        let norm = a[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm <= 1e-13 * scale {
            pivots[k] = 0.0;
            continue;
        }
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        if vnorm2 > 0.0 {
            for col in a.iter_mut().skip(k) {
                let d: f64 =
                    v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
                for (x, y) in v.iter().zip(col[k..].iter_mut()) {
                    *y -= d * x;
                }
            }
            let d: f64 = v.iter().zip(&rhs[k..]).map(|(x, y)| x * y).sum::<f64>() * 2.0 / vnorm2;
            for (x, y) in v.iter().zip(rhs[k..].iter_mut()) {
                *y -= d * x;
            }
        }
        pivots[k] = a[k][k];
    }
    let mut z = vec![0.0; p];
    for k in (0..steps).rev() {
        if pivots[k].abs() <= 1e-13 * scale {
            continue;
        }
        let tail: f64 = (k + 1..steps).map(|j| a[j][k] * z[j]).sum();
        z[k] = (rhs[k] - tail) / pivots[k];
    }
    z
}

/// Lawson-Hanson active-set nonnegative least squares.
fn nnls(columns: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = columns.len();
    let mut x = vec![0.0; n];
    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let gradient = |x: &[f64]| -> Vec<f64> {
        let mut r = b.to_vec();
        for (col, &xj) in columns.iter().zip(x) {
            if xj != 0.0 {
                for (ri, cij) in r.iter_mut().zip(col) {
                    *ri -= cij * xj;
                }
            }
        }
        columns
            .iter()
            .map(|col| col.iter().zip(&r).map(|(c, r)| c * r).sum())
            .collect()
    };

    for _ in 0..3 * n + 10 {
        let w = gradient(&x);
        let Some(t) = (0..n)
            .filter(|&j| !passive[j] && !blocked[j] && w[j] > 1e-12)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]))
        else {
            break;
        };
        passive[t] = true;
        for _ in 0..3 * n + 10 {
            let active: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let cols: Vec<&Vec<f64>> = active.iter().map(|&j| &columns[j]).collect();
            let z_active = least_squares(&cols, b);
            let mut z = vec![0.0; n];
            for (&j, &v) in active.iter().zip(&z_active) {
                z[j] = v;
            }
            if active.iter().all(|&j| z[j] > 0.0) {
                x = z;
                break;
            }
            let alpha = active
                .iter()
                .filter(|&&j| z[j] <= 0.0)
                .map(|&j| {
                    if x[j] - z[j] > 0.0 {
                        x[j] / (x[j] - z[j])
                    } else {
                        0.0
                    }
                })
                .fold(f64::INFINITY, f64::min);
            for j in 0..n {
                x[j] += alpha * (z[j] - x[j]);
            }
            let mut dropped_any = false;
            for &j in &active {
                if x[j] <= 1e-14 {
                    x[j] = 0.0;
                    passive[j] = false;
                    dropped_any = true;
                }
            }
            if !dropped_any {
                break;
            }
        }
        if passive[t] {
            blocked.iter_mut().for_each(|b| *b = false);
        } else {
            // The entering column could not carry weight; skip it next round.
            blocked[t] = true;
        }
    }
    x
}
