//! Scenario checks of the characterization of the determinate sublattice.
//!
//! Every report carries the numeric evidence it was decided on, and
//! [`VerificationReport::recompute_passed`] re-derives the verdict from that
//! evidence alone.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::Serialize;

use crate::determinate::{
    build_phase_map, build_reflection, build_rotation, canonical_decomposition,
    complement_in_eigenspace, is_preserving, membership_in_d, project_state, skew_witness,
    Observable, State, StateProjections,
};
use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, Tolerance, ONE, ZERO};
use crate::ortholattice::{enumerate_homs, generate, DEFAULT_MAX_ELEMENTS};
use crate::probability::{tp_verify, TpOutcome, DEFAULT_MAX_FAMILY};
use crate::sampling;
use crate::subspace::{Ray, Subspace};

/// Largest fraction of samples allowed to end inconclusive (closure overflow).
pub const MAX_INCONCLUSIVE_RATE: f64 = 0.2;

/// How many member samples feed each generated member sublattice.
const MEMBER_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub tol: Tolerance,
    pub max_elements: usize,
    pub max_family: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol: Tolerance::default(),
            max_elements: DEFAULT_MAX_ELEMENTS,
            max_family: DEFAULT_MAX_FAMILY,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub scenario: String,
    pub passed: bool,
    pub details: Details,
}

impl VerificationReport {
    fn new(scenario: impl Into<String>, details: Details) -> Self {
        Self {
            scenario: scenario.into(),
            passed: details.passes(),
            details,
        }
    }

    pub fn recompute_passed(&self) -> bool {
        self.details.passes()
    }

    pub fn verdict(&self) -> Verdict {
        self.details.verdict()
    }

    /// Number of samples that ended inconclusive.
    pub fn inconclusive(&self) -> usize {
        match &self.details {
            Details::Dichotomy(d) => d.inconclusive,
            Details::Maximality(d) => d.inconclusive,
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Details {
    FourRay(FourRayDetails),
    FortyFive(FortyFiveDetails),
    Dichotomy(DichotomyDetails),
    Maximality(MaximalityDetails),
    DefInvariance(DefInvarianceDetails),
}

/// Three-way verdict of a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Every decided sample conformed but too many were inconclusive.
    Inconclusive,
}

impl Details {
    pub fn passes(&self) -> bool {
        self.verdict() == Verdict::Pass
    }

    pub fn verdict(&self) -> Verdict {
        let (records_ok, inconclusive, total) = match self {
            Details::FourRay(d) => (d.obstruction_established(), 0, 0),
            Details::FortyFive(d) => (
                d.reflection_only.homomorphisms_on_eigenspace >= 1
                    && d.phase_map.homomorphisms_on_eigenspace == 0,
                0,
                0,
            ),
            Details::Dichotomy(d) => (
                d.members.iter().all(MemberRecord::conforms)
                    && d.non_members.iter().all(|r| r.rejected || r.inconclusive),
                d.inconclusive,
                d.members.len() + d.non_members.len(),
            ),
            Details::Maximality(d) => (
                d.rejections.iter().all(|r| r.rejected || r.inconclusive),
                d.inconclusive,
                d.rejections.len(),
            ),
            Details::DefInvariance(d) => (
                d.trials
                    .iter()
                    .all(|t| t.preserving && t.counterexamples.is_empty()),
                0,
                0,
            ),
        };
        if !records_ok {
            Verdict::Fail
        } else if inconclusive_ok(inconclusive, total) {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        }
    }
}

fn inconclusive_ok(inconclusive: usize, total: usize) -> bool {
    total == 0 || (inconclusive as f64) <= MAX_INCONCLUSIVE_RATE * total as f64
}

// ---------------------------------------------------------------------------
// Four rays
// ---------------------------------------------------------------------------

/// The e,R-preserving map applied to `b` in the four-ray argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ObstructionMap {
    /// Reflection through `e_{r_i}` inside the two-dimensional eigenspace.
    Reflection,
    /// `diag(i, 1)` in the basis `(e_{r_i}, e_{r_i}′)`.
    PhaseMap,
}

#[derive(Debug, Clone, Serialize)]
pub struct FourRayDetails {
    pub map: ObstructionMap,
    pub angle_degrees: f64,
    /// `U(b)` differs from both `b` and `b′`.
    pub image_is_new_ray: bool,
    pub lattice_size: usize,
    pub total_homomorphisms: usize,
    /// Homomorphisms with `h(r_i) = 1`; the argument needs one to exist.
    pub homomorphisms_on_eigenspace: usize,
}

impl FourRayDetails {
    pub fn obstruction_established(&self) -> bool {
        self.homomorphisms_on_eigenspace == 0
    }
}

/// Builds `b, b′, U(b), U(b)′` inside the two-dimensional eigenspace
/// `r = e_{r_i} ∨ b`, adds `r⊥`, and counts the 2-valued homomorphisms that
/// send `r` to 1. The obstruction holds when there are none.
pub fn four_ray_obstruction(
    e_ri: &Ray,
    b: &Ray,
    map: ObstructionMap,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let details = four_ray_details(e_ri, b, map, cfg)?;
    let name = match map {
        ObstructionMap::Reflection => "four-ray/reflection",
        ObstructionMap::PhaseMap => "four-ray/phase-map",
    };
    Ok(VerificationReport::new(name, Details::FourRay(details)))
}

fn four_ray_details(
    e_ri: &Ray,
    b: &Ray,
    map: ObstructionMap,
    cfg: &VerifyConfig,
) -> Result<FourRayDetails> {
    let tol = cfg.tol;
    let n = e_ri.ambient_dim();
    if b.ambient_dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: b.ambient_dim(),
        });
    }
    let (a, bs) = (e_ri.as_subspace(), b.as_subspace());
    if bs.approx_eq(a, tol) || bs.is_orthogonal_to(a, tol) {
        return Err(Error::Precondition(
            "b must be skew to e_r (neither equal nor orthogonal)".into(),
        ));
    }
    let r = a.join(bs, tol)?;
    let mut eigenspaces = vec![r.clone()];
    if n > 2 {
        eigenspaces.push(r.ortho());
    }
    let observable = Observable::new(eigenspaces.clone(), tol)?;
    let state = State::normalized(e_ri.vector())?;
    let sp = project_state(&state, &observable, tol)?;
    let u = match map {
        ObstructionMap::Reflection => build_reflection(&sp, 0, &Subspace::null(n), tol)?,
        ObstructionMap::PhaseMap => build_phase_map(&sp, 0)?,
    };
    debug_assert!(is_preserving(&u, &state, &observable, tol)?);

    let b_prime = bs.relative_complement(&r, tol)?;
    let ub = bs.apply_unitary(&u, tol)?;
    let ub_prime = ub.relative_complement(&r, tol)?;
    let image_is_new_ray = !ub.approx_eq(bs, tol) && !ub.approx_eq(&b_prime, tol);

    let mut generators = vec![bs.clone(), b_prime, ub, ub_prime];
    generators.extend(eigenspaces.into_iter().skip(1));
    let lattice = generate(n, &generators, cfg.max_elements, tol)?;
    let homs = enumerate_homs(&lattice);
    let r_index = lattice.index_of(&r).expect("r = b ∨ b′ is generated");
    let cos = linalg::dot(e_ri.vector(), b.vector()).norm().min(1.0);
    Ok(FourRayDetails {
        map,
        angle_degrees: cos.acos().to_degrees(),
        image_is_new_ray,
        lattice_size: lattice.len(),
        total_homomorphisms: homs.len(),
        homomorphisms_on_eigenspace: homs.iter().filter(|h| h.value(r_index)).count(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FortyFiveDetails {
    pub reflection_only: FourRayDetails,
    pub phase_map: FourRayDetails,
}

/// C^3 with eigenspaces `{xy plane, z axis}` and `e = (1,0,1)/√2`, so that
/// `e_{r_1}` is the x axis, `(1, 0)` in eigenspace coordinates. Returns the
/// projection and the ray at `angle` from it inside the plane.
pub fn forty_five_fixture(angle: f64) -> Result<(Ray, Ray)> {
    let tol = Tolerance::default();
    let observable = Observable::new(
        vec![Subspace::axes(3, &[0, 1]), Subspace::axes(3, &[2])],
        tol,
    )?;
    let state = State::normalized(&[ONE, ZERO, ONE])?;
    let sp = project_state(&state, &observable, tol)?;
    let e_r = sp.entry(0)?.projection.clone();
    let b = if (angle - FRAC_PI_4).abs() < 1e-15 {
        // Exactly (1, 1)/√2.
        Ray::new(&[ONE, ONE, ZERO])?
    } else {
        Ray::new(&[
            Complex64::new(angle.cos(), 0.0),
            Complex64::new(angle.sin(), 0.0),
            ZERO,
        ])?
    };
    Ok((e_r, b))
}

/// Reflection-only versus phase-map four-ray runs at 45°.
pub fn forty_five_demo(cfg: &VerifyConfig) -> Result<VerificationReport> {
    forty_five_demo_at(FRAC_PI_4, cfg)
}

/// The same comparison for a ray at `angle` (radians) from `e_{r_1}`.
pub fn forty_five_demo_at(angle: f64, cfg: &VerifyConfig) -> Result<VerificationReport> {
    let (e_r, b) = forty_five_fixture(angle)?;
    let details = FortyFiveDetails {
        reflection_only: four_ray_details(&e_r, &b, ObstructionMap::Reflection, cfg)?,
        phase_map: four_ray_details(&e_r, &b, ObstructionMap::PhaseMap, cfg)?,
    };
    Ok(VerificationReport::new(
        "forty-five",
        Details::FortyFive(details),
    ))
}

// ---------------------------------------------------------------------------
// Members and non-members
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub sample: usize,
    pub dim: usize,
    /// Eigenspace index whose projection is skew to both `p` and `p⊥`.
    pub skew_index: Option<usize>,
    pub lattice_size: Option<usize>,
    pub homomorphisms: Option<usize>,
    pub tp_feasible: Option<bool>,
    pub tp_residual: Option<f64>,
    pub witness_families: Vec<Vec<usize>>,
    pub inconclusive: bool,
    pub rejected: bool,
}

/// Adjoins a non-member `p` to the member sublattice `{0, e_{r_w}, e_{r_w}′, 1}`,
/// where `w` is the skew index, and records the failure of the measure
/// condition. Returns `None` when `p` is a member.
///
/// Every homomorphism of the result sends `e_{r_w}` to 0 while its Born weight
/// is positive, so the measure is infeasible whenever the closure is finite.
pub fn probe_non_member(
    p: &Subspace,
    state: &State,
    sp: &StateProjections,
    sample: usize,
    cfg: &VerifyConfig,
) -> Result<Option<Rejection>> {
    let tol = cfg.tol;
    let Some(w) = skew_witness(p, sp, tol)? else {
        return Ok(None);
    };
    let e_rw = sp.entry(w)?.projection.as_subspace().clone();
    let mut record = Rejection {
        sample,
        dim: p.dim(),
        skew_index: Some(w),
        lattice_size: None,
        homomorphisms: None,
        tp_feasible: None,
        tp_residual: None,
        witness_families: Vec::new(),
        inconclusive: false,
        rejected: false,
    };
    let lattice = match generate(sp.ambient_dim, &[p.clone(), e_rw], cfg.max_elements, tol) {
        Ok(l) => l,
        Err(Error::ClosureOverflow(_)) => {
            record.inconclusive = true;
            return Ok(Some(record));
        }
        Err(e) => return Err(e),
    };
    let homs = enumerate_homs(&lattice);
    let outcome = tp_verify(state, &lattice, &homs, cfg.max_family)?;
    record.lattice_size = Some(lattice.len());
    record.homomorphisms = Some(homs.len());
    record.tp_feasible = Some(outcome.is_feasible());
    record.tp_residual = Some(outcome.residual());
    if let TpOutcome::Infeasible {
        witness_families, ..
    } = &outcome
    {
        record.witness_families = witness_families
            .iter()
            .map(|f| f.indices().to_vec())
            .collect();
    }
    record.rejected = homs.is_empty() || !outcome.is_feasible();
    Ok(Some(record))
}

#[derive(Debug, Clone, Serialize)]
pub struct MemberRecord {
    pub sample: usize,
    pub dim: usize,
    /// Per projection: `(e_{r_i} ≤ p, e_{r_i} ≤ p⊥)`.
    pub dichotomy: Vec<(bool, bool)>,
    pub decomposition_reconstructs: bool,
    pub lattice_size: Option<usize>,
    pub homomorphisms: Option<usize>,
    pub tp_feasible: Option<bool>,
    pub tp_residual: Option<f64>,
    pub inconclusive: bool,
}

impl MemberRecord {
    pub fn conforms(&self) -> bool {
        self.dichotomy
            .iter()
            .all(|&(inside, outside)| inside || outside)
            && self.decomposition_reconstructs
            && (self.inconclusive || self.tp_feasible == Some(true))
    }
}

fn check_member(
    p: &Subspace,
    window: &[Subspace],
    state: &State,
    observable: &Observable,
    sp: &StateProjections,
    sample: usize,
    cfg: &VerifyConfig,
) -> Result<MemberRecord> {
    let tol = cfg.tol;
    let perp = p.ortho();
    let dichotomy = sp
        .projections()
        .map(|e_ri| Ok((e_ri.leq(p, tol)?, e_ri.leq(&perp, tol)?)))
        .collect::<Result<Vec<_>>>()?;
    let decomposition = canonical_decomposition(p, sp, tol)?;
    let decomposition_reconstructs = decomposition
        .reconstruct(sp, tol)?
        .is_some_and(|q| q.approx_eq(p, tol));

    let mut generators: Vec<Subspace> = window.to_vec();
    generators.extend(observable.eigenspaces().iter().cloned());
    generators.extend(sp.projections().cloned());
    let mut record = MemberRecord {
        sample,
        dim: p.dim(),
        dichotomy,
        decomposition_reconstructs,
        lattice_size: None,
        homomorphisms: None,
        tp_feasible: None,
        tp_residual: None,
        inconclusive: false,
    };
    match generate(sp.ambient_dim, &generators, cfg.max_elements, tol) {
        Ok(lattice) => {
            let homs = enumerate_homs(&lattice);
            let outcome = tp_verify(state, &lattice, &homs, cfg.max_family)?;
            record.lattice_size = Some(lattice.len());
            record.homomorphisms = Some(homs.len());
            record.tp_feasible = Some(outcome.is_feasible());
            record.tp_residual = Some(outcome.residual());
        }
        Err(Error::ClosureOverflow(_)) => record.inconclusive = true,
        Err(e) => return Err(e),
    }
    Ok(record)
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyDetails {
    pub requested_samples: usize,
    pub vacuous: bool,
    pub redraws: usize,
    pub members: Vec<MemberRecord>,
    pub non_members: Vec<Rejection>,
    pub inconclusive: usize,
}

/// Random samples, half drawn as generic subspaces and half as members. Each
/// member must satisfy the dichotomy and sit in a sublattice that admits a
/// Born measure; each non-member must break the measure condition once
/// adjoined to a member sublattice.
pub fn membership_dichotomy_scan(
    state: &State,
    observable: &Observable,
    samples: usize,
    seed: u64,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let tol = cfg.tol;
    let sp = project_state(state, observable, tol)?;
    let n = sp.ambient_dim;
    let mut rng = linalg::seeded_rng(seed);
    let mut details = DichotomyDetails {
        requested_samples: samples,
        vacuous: samples == 0,
        redraws: 0,
        members: Vec::new(),
        non_members: Vec::new(),
        inconclusive: 0,
    };
    let mut window: Vec<Subspace> = Vec::new();
    for sample in 0..samples {
        let (p, redraws) = if sample % 2 == 0 {
            sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                Ok(sampling::random_subspace(r, n))
            })?
        } else {
            sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                sampling::random_member(r, &sp, tol)
            })?
        };
        details.redraws += redraws;
        if membership_in_d(&p, &sp, tol)? {
            window.push(p.clone());
            if window.len() > MEMBER_WINDOW {
                window.remove(0);
            }
            let record = check_member(&p, &window, state, observable, &sp, sample, cfg)?;
            details.inconclusive += usize::from(record.inconclusive);
            details.members.push(record);
        } else {
            let record = probe_non_member(&p, state, &sp, sample, cfg)?.expect("p is not a member");
            details.inconclusive += usize::from(record.inconclusive);
            details.non_members.push(record);
        }
    }
    Ok(VerificationReport::new(
        "dichotomy",
        Details::Dichotomy(details),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct MaximalityDetails {
    pub requested_non_members: usize,
    pub draws: usize,
    pub members_skipped: usize,
    pub redraws: usize,
    pub rejections: Vec<Rejection>,
    pub inconclusive: usize,
    /// Sampled probing covers only the drawn subspaces.
    pub coverage: String,
}

/// Draws random subspaces until `samples` non-members have been probed,
/// skipping members; each non-member must be rejected with a witness.
pub fn maximality_probe(
    state: &State,
    observable: &Observable,
    samples: usize,
    seed: u64,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let tol = cfg.tol;
    let sp = project_state(state, observable, tol)?;
    let n = sp.ambient_dim;
    let mut rng = linalg::seeded_rng(seed);
    let max_draws = 20 * samples.max(1);
    let mut details = MaximalityDetails {
        requested_non_members: samples,
        draws: 0,
        members_skipped: 0,
        redraws: 0,
        rejections: Vec::new(),
        inconclusive: 0,
        coverage: String::new(),
    };
    while details.rejections.len() < samples && details.draws < max_draws {
        let (p, redraws) = sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
            Ok(sampling::random_subspace(r, n))
        })?;
        details.redraws += redraws;
        let sample = details.draws;
        details.draws += 1;
        match probe_non_member(&p, state, &sp, sample, cfg)? {
            Some(record) => {
                details.inconclusive += usize::from(record.inconclusive);
                details.rejections.push(record);
            }
            None => details.members_skipped += 1,
        }
    }
    details.coverage = format!(
        "{} sampled non-members out of {} draws; not exhaustive",
        details.rejections.len(),
        details.draws
    );
    Ok(VerificationReport::new(
        "maximality",
        Details::Maximality(details),
    ))
}

// ---------------------------------------------------------------------------
// DEF invariance
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PreservingKind {
    Identity,
    Rotation,
    Reflection,
    PhaseMap,
    /// A unitary inside an eigenspace the state is orthogonal to.
    OrthogonalBlock,
    Composition,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefTrial {
    pub trial: usize,
    pub kind: PreservingKind,
    pub preserving: bool,
    pub unitarity_defect: f64,
    pub members_sampled: usize,
    /// Sample indices whose membership changed under the unitary.
    pub counterexamples: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DefInvarianceDetails {
    pub samples_per_trial: usize,
    pub kind_counts: BTreeMap<String, usize>,
    pub trials: Vec<DefTrial>,
}

/// Kinds of preserving unitaries that the instance supports.
pub fn available_kinds(sp: &StateProjections) -> Vec<PreservingKind> {
    let mut kinds = vec![PreservingKind::Identity];
    if sp.entries.iter().any(|e| e.eigenspace.dim() >= 3) {
        kinds.push(PreservingKind::Rotation);
    }
    if sp.entries.iter().any(|e| e.eigenspace.dim() >= 2) {
        kinds.push(PreservingKind::Reflection);
    }
    if sp.entries.iter().any(|e| e.eigenspace.dim() == 2) {
        kinds.push(PreservingKind::PhaseMap);
    }
    if !sp.dropped.is_empty() {
        kinds.push(PreservingKind::OrthogonalBlock);
    }
    if kinds.len() > 2 {
        kinds.push(PreservingKind::Composition);
    }
    kinds
}

/// One e,R-preserving unitary of the given kind.
pub fn draw_preserving<R: rand::Rng>(
    rng: &mut R,
    kind: PreservingKind,
    observable: &Observable,
    sp: &StateProjections,
    tol: Tolerance,
) -> Result<ComplexMatrix> {
    let n = sp.ambient_dim;
    let entries_with = |pred: &dyn Fn(usize) -> bool| -> Vec<usize> {
        sp.entries
            .iter()
            .filter(|e| pred(e.eigenspace.dim()))
            .map(|e| e.eigenspace_index)
            .collect()
    };
    Ok(match kind {
        PreservingKind::Identity => ComplexMatrix::identity(n),
        PreservingKind::Rotation => {
            let i = *sampling::pick(rng, &entries_with(&|d| d >= 3));
            let angle = rng.gen_range(0.0..std::f64::consts::TAU);
            build_rotation(sp, i, angle, rng.gen(), tol)?
        }
        PreservingKind::Reflection => {
            let i = *sampling::pick(rng, &entries_with(&|d| d >= 2));
            let perp = complement_in_eigenspace(sp, i, tol)?;
            let c = sampling::random_subspace_of(rng, &perp);
            build_reflection(sp, i, &c, tol)?
        }
        PreservingKind::PhaseMap => {
            let i = *sampling::pick(rng, &entries_with(&|d| d == 2));
            build_phase_map(sp, i)?
        }
        PreservingKind::OrthogonalBlock => {
            let j = *sampling::pick(rng, &sp.dropped);
            sampling::random_unitary_inside(rng, &observable.eigenspaces()[j])
        }
        PreservingKind::Composition => {
            let parts: Vec<PreservingKind> = available_kinds(sp)
                .into_iter()
                .filter(|k| !matches!(k, PreservingKind::Identity | PreservingKind::Composition))
                .collect();
            let count = rng.gen_range(2..=3);
            let mut u = ComplexMatrix::identity(n);
            for _ in 0..count {
                let k = *sampling::pick(rng, &parts);
                u = &draw_preserving(rng, k, observable, sp, tol)? * &u;
            }
            u
        }
    })
}

/// Draws `trials` e,R-preserving unitaries, cycling through the supported
/// kinds, and checks that membership is unchanged on `samples_per_trial`
/// subspaces (alternately generic and member samples).
pub fn def_invariance_scan(
    state: &State,
    observable: &Observable,
    trials: usize,
    samples_per_trial: usize,
    seed: u64,
    cfg: &VerifyConfig,
) -> Result<VerificationReport> {
    let tol = cfg.tol;
    let sp = project_state(state, observable, tol)?;
    let n = sp.ambient_dim;
    let kinds = available_kinds(&sp);
    let mut rng = linalg::seeded_rng(seed);
    let mut details = DefInvarianceDetails {
        samples_per_trial,
        kind_counts: BTreeMap::new(),
        trials: Vec::with_capacity(trials),
    };
    for trial in 0..trials {
        let kind = kinds[trial % kinds.len()];
        let u = draw_preserving(&mut rng, kind, observable, &sp, tol)?;
        let preserving = is_preserving(&u, state, observable, tol)?;
        *details.kind_counts.entry(format!("{kind:?}")).or_default() += 1;
        let mut record = DefTrial {
            trial,
            kind,
            preserving,
            unitarity_defect: u.unitarity_defect(),
            members_sampled: 0,
            counterexamples: Vec::new(),
        };
        for s in 0..samples_per_trial {
            let (p, _) = if s % 2 == 0 {
                sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                    Ok(sampling::random_subspace(r, n))
                })?
            } else {
                sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                    sampling::random_member(r, &sp, tol)
                })?
            };
            let before = membership_in_d(&p, &sp, tol)?;
            let after = membership_in_d(&p.apply_unitary(&u, tol)?, &sp, tol)?;
            record.members_sampled += usize::from(before);
            if before != after {
                record.counterexamples.push(s);
            }
        }
        details.trials.push(record);
    }
    Ok(VerificationReport::new(
        "def-invariance",
        Details::DefInvariance(details),
    ))
}
