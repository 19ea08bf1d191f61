//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::panic::{self, AssertUnwindSafe};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use detlat::determinate::{
    canonical_decomposition, membership_in_d, project_state, Observable, State,
};
use detlat::linalg::{self, ComplexMatrix, Tolerance, I, ONE, ZERO};
use detlat::ortholattice::{
    enumerate_homs, generate, is_sublattice_of_d, FiniteOrtholattice, DEFAULT_MAX_ELEMENTS,
};
use detlat::probability::{tp_verify, TpOutcome, DEFAULT_MAX_FAMILY, FEASIBILITY_TOL};
use detlat::sampling;
use detlat::subspace::{Ray, Subspace};
use detlat::verifier::{self, Details, VerifyConfig};

type Check = fn() -> (bool, String);

fn main() {
    let checks: [(u32, &str, Check); 9] = [
        (1, "lattice axioms", lattice_axioms),
        (2, "projection formula equivalence", projection_formula),
        (3, "Born recovery on the axis lattice", born_recovery),
        (4, "members admit a Born measure", members_admit_measure),
        (5, "non-members are rejected", non_members_rejected),
        (6, "45 degree reflection vs phase map", forty_five),
        (7, "invariance under preserving unitaries", def_invariance),
        (8, "decomposition vs membership", decomposition_oracle),
        (
            9,
            "homomorphism enumerator vs truth tables",
            enumerator_oracle,
        ),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (id, name, check) in checks {
        let start = Instant::now();
        let (passed, summary) = match panic::catch_unwind(AssertUnwindSafe(check)) {
            Ok(result) => result,
            Err(payload) => {
                let msg = payload
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| payload.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (false, format!("panicked: {msg}"))
            }
        };
        failures += usize::from(!passed);
        println!(
            "criterion {id} {}: {name}: {summary} [{:.2}s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
    }
    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------------------
// Independent dense linear algebra (nalgebra SVD), used as the oracle.
// ---------------------------------------------------------------------------

const RANK_TOL: f64 = 1e-9;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn dense(m: &ComplexMatrix) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn column(v: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_column_slice(v.len(), 1, v)
}

fn proj_of(basis: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    basis * basis.adjoint()
}

/// Orthogonal projector onto the column range of `m`.
fn range_projector(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.nrows();
    if m.ncols() == 0 {
        return DMatrix::zeros(n, n);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.unwrap();
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax.max(1.0))
        .count();
    proj_of(&u.columns(0, rank).into_owned())
}

/// Orthogonal projector onto the kernel of `m` (n columns).
fn kernel_projector(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = m.ncols();
    let mut padded = DMatrix::zeros(m.nrows().max(n), n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let mut kernel = Vec::new();
    for (k, s) in svd.singular_values.iter().enumerate() {
        if *s <= RANK_TOL * n as f64 {
            kernel.push(v_t.row(k).adjoint());
        }
    }
    if kernel.is_empty() {
        return DMatrix::zeros(n, n);
    }
    proj_of(&DMatrix::from_columns(&kernel))
}

fn oracle_join(p: &Subspace, q: &Subspace) -> DMatrix<Complex64> {
    let (bp, bq) = (dense(p.basis()), dense(q.basis()));
    let n = p.ambient_dim();
    let mut m = DMatrix::zeros(n, bp.ncols() + bq.ncols());
    m.view_mut((0, 0), (n, bp.ncols())).copy_from(&bp);
    m.view_mut((0, bp.ncols()), (n, bq.ncols())).copy_from(&bq);
    range_projector(&m)
}

fn oracle_meet(p: &Subspace, q: &Subspace) -> DMatrix<Complex64> {
    let n = p.ambient_dim();
    let id = DMatrix::<Complex64>::identity(n, n);
    let mut m = DMatrix::zeros(2 * n, n);
    m.view_mut((0, 0), (n, n))
        .copy_from(&(&id - proj_of(&dense(p.basis()))));
    m.view_mut((n, 0), (n, n))
        .copy_from(&(&id - proj_of(&dense(q.basis()))));
    kernel_projector(&m)
}

fn gap(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).norm()
}

fn pgap(s: &Subspace, oracle: &DMatrix<Complex64>) -> f64 {
    gap(&dense(s.projector()), oracle)
}

fn dist(a: &Subspace, b: &Subspace) -> f64 {
    gap(&dense(a.projector()), &dense(b.projector()))
}

/// `|P v|^2` for the projector onto `s`.
fn born(s: &Subspace, v: &[Complex64]) -> f64 {
    (dense(s.projector()) * column(v)).norm_squared()
}

/// Exhaustive truth-table filter: every assignment of {0,1} to the elements
/// that respects complement, meet and join.
fn exhaustive_homs(l: &FiniteOrtholattice) -> BTreeSet<Vec<bool>> {
    let k = l.len();
    assert!(k <= 20, "exhaustive oracle limited to 20 elements");
    let mut out = BTreeSet::new();
    'maps: for mask in 0u32..(1 << k) {
        let bit = |i: usize| mask >> i & 1 == 1;
        for i in 0..k {
            if bit(l.complement(i)) == bit(i) {
                continue 'maps;
            }
        }
        for i in 0..k {
            for j in 0..k {
                if bit(l.meet(i, j)) != (bit(i) && bit(j))
                    || bit(l.join(i, j)) != (bit(i) || bit(j))
                {
                    continue 'maps;
                }
            }
        }
        out.insert((0..k).map(bit).collect());
    }
    out
}

fn cfg() -> VerifyConfig {
    VerifyConfig::default()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

// ---------------------------------------------------------------------------
// 1
// ---------------------------------------------------------------------------

fn lattice_axioms() -> (bool, String) {
    let tol = tol();
    let bound = 10.0 * tol.eps();
    let dims = [2, 3, 4, 6];
    let mut worst = 0.0f64;
    let mut worst_oracle = 0.0f64;
    let mut order_mismatches = 0;
    let mut containments = 0;
    for case in 0..500u64 {
        let n = dims[case as usize % dims.len()];
        let mut rng = linalg::seeded_rng(10_000 + case);
        let p = sampling::random_subspace(&mut rng, n);
        let mut q = sampling::random_subspace(&mut rng, n);
        if case % 3 == 0 {
            q = p.join(&q, tol).unwrap();
        }
        let r = sampling::random_subspace(&mut rng, n);

        let pq_meet = p.meet(&q, tol).unwrap();
        let pq_join = p.join(&q, tol).unwrap();
        let defects = [
            dist(&p.ortho().ortho(), &p),
            dist(&pq_meet.ortho(), &p.ortho().join(&q.ortho(), tol).unwrap()),
            dist(&pq_join.ortho(), &p.ortho().meet(&q.ortho(), tol).unwrap()),
            dist(&p.meet(&pq_join, tol).unwrap(), &p),
            dist(&p.join(&pq_meet, tol).unwrap(), &p),
            dist(
                &pq_meet.meet(&r, tol).unwrap(),
                &p.meet(&q.meet(&r, tol).unwrap(), tol).unwrap(),
            ),
            dist(
                &pq_join.join(&r, tol).unwrap(),
                &p.join(&q.join(&r, tol).unwrap(), tol).unwrap(),
            ),
        ];
        worst = defects.iter().copied().fold(worst, f64::max);
        worst_oracle = worst_oracle
            .max(pgap(&pq_join, &oracle_join(&p, &q)))
            .max(pgap(&pq_meet, &oracle_meet(&p, &q)));

        let leq = p.leq(&q, tol).unwrap();
        let by_meet = pq_meet.approx_eq(&p, tol);
        let by_join = pq_join.approx_eq(&q, tol);
        let by_ortho = q.ortho().leq(&p.ortho(), tol).unwrap();
        if !(leq == by_meet && leq == by_join && leq == by_ortho) {
            order_mismatches += 1;
        }
        if leq {
            containments += 1;
            // Orthomodular law.
            let rebuilt = p.join(&q.meet(&p.ortho(), tol).unwrap(), tol).unwrap();
            worst = worst.max(dist(&rebuilt, &q));
        }
    }
    let passed = worst < bound && worst_oracle < bound && order_mismatches == 0;
    (
        passed,
        format!(
            "500 cases, max law defect {worst:.1e}, max SVD-oracle gap {worst_oracle:.1e} (bound {bound:.0e}), \
             {containments} containments, {order_mismatches} order mismatches"
        ),
    )
}

// ---------------------------------------------------------------------------
// 2
// ---------------------------------------------------------------------------

/// A random composition of `n` into positive parts.
fn composition<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut parts = Vec::new();
    let mut left = n;
    while left > 0 {
        let d = rng.gen_range(1..=left);
        parts.push(d);
        left -= d;
    }
    parts
}

fn projection_formula() -> (bool, String) {
    let tol = tol();
    let mut rng = linalg::seeded_rng(20_000);
    let mut worst_formula = 0.0f64;
    let mut worst_weight = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut degenerate = 0;
    let mut with_dropped = 0;
    let mut drop_errors = 0;
    for _ in 0..200 {
        let n = rng.gen_range(2..=6);
        let dims = composition(&mut rng, n);
        let orth: Vec<usize> = if dims.len() > 1 && rng.gen_bool(0.3) {
            vec![rng.gen_range(0..dims.len())]
        } else {
            vec![]
        };
        degenerate += usize::from(dims.iter().any(|&d| d > 1));
        with_dropped += usize::from(!orth.is_empty());
        let inst = sampling::random_instance(&mut rng, &dims, &orth, tol).unwrap();
        let e = inst.state.vector();
        let sp = project_state(&inst.state, &inst.observable, tol).unwrap();
        let mut total = 0.0;
        for (i, r) in inst.observable.eigenspaces().iter().enumerate() {
            let v = dense(r.projector()) * column(e);
            let w = v.norm_squared();
            if w.sqrt() < tol.eps() {
                drop_errors += usize::from(!sp.dropped.contains(&i));
                continue;
            }
            let oracle = proj_of(&(v.clone() / Complex64::from(v.norm())));
            let lattice = inst
                .state
                .subspace()
                .join(&r.ortho(), tol)
                .unwrap()
                .meet(r, tol)
                .unwrap();
            let entry = sp.entry(i).unwrap();
            worst_formula = worst_formula
                .max(pgap(&lattice, &oracle))
                .max(pgap(entry.projection.as_subspace(), &oracle));
            worst_weight = worst_weight.max((entry.weight - w).abs());
            total += entry.weight;
        }
        worst_sum = worst_sum
            .max((total - 1.0).abs())
            .max((sp.weight_sum() - 1.0).abs());
    }
    let passed =
        worst_formula < 1e-8 && worst_weight < 1e-8 && worst_sum < 1e-8 && drop_errors == 0;
    (
        passed,
        format!(
            "200 instances ({degenerate} degenerate, {with_dropped} with an orthogonal eigenspace), \
             max projector distance {worst_formula:.1e}, max weight error {worst_weight:.1e}, \
             max |sum - 1| {worst_sum:.1e} (bound 1e-8)"
        ),
    )
}

// ---------------------------------------------------------------------------
// 3
// ---------------------------------------------------------------------------

fn born_recovery() -> (bool, String) {
    let tol = tol();
    let axes: Vec<Subspace> = (0..3).map(|i| Subspace::axes(3, &[i])).collect();
    let state = State::normalized(&[ONE, ONE, ONE]).unwrap();
    let l = generate(3, &axes, DEFAULT_MAX_ELEMENTS, tol).unwrap();
    let homs = enumerate_homs(&l);
    let outcome = tp_verify(&state, &l, &homs, DEFAULT_MAX_FAMILY).unwrap();
    let TpOutcome::Feasible(solution) = outcome else {
        return (
            false,
            format!("{} homomorphisms, measure infeasible", homs.len()),
        );
    };
    // The hom sending axis i to 1 must carry the Born weight of axis i.
    let mut worst = 0.0f64;
    for (h, w) in homs.iter().zip(&solution.weights) {
        let true_axes: Vec<usize> = (0..3)
            .filter(|&i| h.value(l.index_of(&axes[i]).unwrap()))
            .collect();
        assert_eq!(true_axes.len(), 1, "each hom selects one atom");
        let oracle = born(&axes[true_axes[0]], state.vector());
        worst = worst.max((w - oracle).abs()).max((w - 1.0 / 3.0).abs());
    }
    let passed = homs.len() == 3 && worst < 1e-7;
    (
        passed,
        format!(
            "{} elements, {} homomorphisms, weights {:?}, max error {worst:.1e} (bound 1e-7)",
            l.len(),
            homs.len(),
            solution
                .weights
                .iter()
                .map(|w| format!("{w:.9}"))
                .collect::<Vec<_>>()
        ),
    )
}

// ---------------------------------------------------------------------------
// 4
// ---------------------------------------------------------------------------

/// Shapes whose complement of the state projections has dimension at most 2,
/// so that member-generated sublattices are finite.
const MEMBER_SHAPES: [&[usize]; 10] = [
    &[1, 1],
    &[2],
    &[1, 1, 1],
    &[2, 1],
    &[1, 2],
    &[3],
    &[2, 2],
    &[1, 1, 1, 1],
    &[3, 1],
    &[2, 1, 1],
];

fn members_admit_measure() -> (bool, String) {
    let tol = tol();
    let mut worst_residual = 0.0f64;
    let mut worst_born = 0.0f64;
    let mut sizes = BTreeSet::new();
    let mut failures = Vec::new();
    for instance in 0..20u64 {
        let mut rng = linalg::seeded_rng(40_000 + instance);
        let dims = MEMBER_SHAPES[instance as usize % MEMBER_SHAPES.len()];
        let inst = sampling::random_instance(&mut rng, dims, &[], tol).unwrap();
        let n = inst.state.ambient_dim();
        let sp = project_state(&inst.state, &inst.observable, tol).unwrap();
        let mut generators: Vec<Subspace> = (0..5)
            .map(|_| sampling::random_member(&mut rng, &sp, tol).unwrap())
            .collect();
        generators.extend(inst.observable.eigenspaces().iter().cloned());
        generators.extend(sp.projections().cloned());
        let l = match generate(n, &generators, DEFAULT_MAX_ELEMENTS, tol) {
            Ok(l) => l,
            Err(e) => {
                failures.push(format!("instance {instance} {dims:?}: {e}"));
                continue;
            }
        };
        sizes.insert(l.len());
        if !is_sublattice_of_d(&l, &sp).unwrap() {
            failures.push(format!("instance {instance}: generated lattice leaves D"));
        }
        let homs = enumerate_homs(&l);
        let outcome = tp_verify(&inst.state, &l, &homs, DEFAULT_MAX_FAMILY).unwrap();
        worst_residual = worst_residual.max(outcome.residual());
        let TpOutcome::Feasible(solution) = outcome else {
            failures.push(format!("instance {instance} {dims:?}: infeasible"));
            continue;
        };
        // Born rule on every element and every commuting pair.
        let e = inst.state.vector();
        for x in 0..l.len() {
            for y in x..l.len() {
                let (px, py) = (
                    dense(l.element(x).projector()),
                    dense(l.element(y).projector()),
                );
                if gap(&(&px * &py), &(&py * &px)) > 1e-9 {
                    continue;
                }
                let quantum = (&px * &py * column(e)).norm_squared();
                let classical: f64 = homs
                    .iter()
                    .zip(&solution.weights)
                    .filter(|(h, _)| h.value(x) && h.value(y))
                    .map(|(_, w)| w)
                    .sum();
                worst_born = worst_born.max((quantum - classical).abs());
            }
        }
    }
    let passed =
        failures.is_empty() && worst_residual < FEASIBILITY_TOL && worst_born < FEASIBILITY_TOL;
    (
        passed,
        format!(
            "20 instances, lattice sizes {:?}..{:?}, max residual {worst_residual:.1e}, \
             max Born mismatch on commuting pairs {worst_born:.1e} (bound 1e-7){}",
            sizes.first().unwrap_or(&0),
            sizes.last().unwrap_or(&0),
            if failures.is_empty() {
                String::new()
            } else {
                format!("; failures: {failures:?}")
            }
        ),
    )
}

// ---------------------------------------------------------------------------
// 5
// ---------------------------------------------------------------------------

fn non_members_rejected() -> (bool, String) {
    let tol = tol();
    let shapes: [(&[usize], &[usize]); 9] = [
        (&[1, 1], &[]),
        (&[2], &[]),
        (&[1, 1, 1], &[]),
        (&[2, 1], &[]),
        (&[3], &[]),
        (&[2, 2], &[]),
        (&[1, 1, 1, 1], &[]),
        (&[3, 1], &[]),
        (&[2, 1, 1], &[1]),
    ];
    let mut rejected = 0;
    let mut inconclusive = 0;
    let mut total = 0;
    let mut unwitnessed = 0;
    let mut oracle_failures = 0;
    let mut reports_failed = 0;
    for (k, (dims, orth)) in shapes.iter().enumerate() {
        let mut rng = linalg::seeded_rng(50_000 + k as u64);
        let inst = sampling::random_instance(&mut rng, dims, orth, tol).unwrap();
        let sp = project_state(&inst.state, &inst.observable, tol).unwrap();
        let scan = verifier::membership_dichotomy_scan(
            &inst.state,
            &inst.observable,
            100,
            k as u64,
            &cfg(),
        )
        .unwrap();
        let probe = verifier::maximality_probe(&inst.state, &inst.observable, 50, k as u64, &cfg())
            .unwrap();
        reports_failed += usize::from(!scan.passed) + usize::from(!probe.passed);
        let (Details::Dichotomy(d), Details::Maximality(m)) = (&scan.details, &probe.details)
        else {
            unreachable!()
        };
        if m.rejections.len() != 50 {
            reports_failed += 1;
        }
        for r in d.non_members.iter().chain(&m.rejections) {
            total += 1;
            inconclusive += usize::from(r.inconclusive);
            rejected += usize::from(r.rejected);
            let obstruction = r.homomorphisms == Some(0) || r.tp_feasible == Some(false);
            if !r.inconclusive && (r.skew_index.is_none() || !obstruction) {
                unwitnessed += 1;
            }
        }

        // Own non-members: the skew witness checked directly, then the
        // obstruction on the adjoined lattice.
        let n = sp.ambient_dim;
        let mut seen = 0;
        while seen < 50 {
            let (p, _) = sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                Ok(sampling::random_subspace(r, n))
            })
            .unwrap();
            let Some(rec) = verifier::probe_non_member(&p, &inst.state, &sp, seen, &cfg()).unwrap()
            else {
                continue;
            };
            seen += 1;
            let w = rec.skew_index.unwrap();
            let v = sp.entry(w).unwrap().projection.vector().to_vec();
            let (inside, outside) = (born(&p, &v), born(&p.ortho(), &v));
            if inside.sqrt() < tol.eps()
                || outside.sqrt() < tol.eps()
                || !(rec.rejected || rec.inconclusive)
            {
                oracle_failures += 1;
            }
        }
    }
    let rate = inconclusive as f64 / total.max(1) as f64;
    let passed = reports_failed == 0
        && unwitnessed == 0
        && oracle_failures == 0
        && rejected + inconclusive == total
        && rate <= verifier::MAX_INCONCLUSIVE_RATE;
    (
        passed,
        format!(
            "{} instances, {total} non-members from scans and probes, {rejected} rejected with witness, \
             {inconclusive} inconclusive (rate {:.1}%, bound 20%), {unwitnessed} without witness, \
             {oracle_failures} failed the direct skew check",
            shapes.len(),
            100.0 * rate
        ),
    )
}

// ---------------------------------------------------------------------------
// 6
// ---------------------------------------------------------------------------

/// Restricted homomorphism count on the four-ray configuration built by hand:
/// rays `b, b′, u, u′` in the xy plane of C^3 plus the z axis.
fn hand_built_count(
    b: [Complex64; 2],
    b_perp: [Complex64; 2],
    u: [Complex64; 2],
    u_perp: [Complex64; 2],
) -> usize {
    let tol = tol();
    let ray = |v: [Complex64; 2]| -> Subspace { Ray::new(&[v[0], v[1], ZERO]).unwrap().into() };
    let generators = vec![
        ray(b),
        ray(b_perp),
        ray(u),
        ray(u_perp),
        Subspace::axes(3, &[2]),
    ];
    let l = generate(3, &generators, DEFAULT_MAX_ELEMENTS, tol).unwrap();
    let plane = l.index_of(&Subspace::axes(3, &[0, 1])).unwrap();
    exhaustive_homs(&l).iter().filter(|h| h[plane]).count()
}

fn forty_five() -> (bool, String) {
    let demo = verifier::forty_five_demo(&cfg()).unwrap();
    let demo30 = verifier::forty_five_demo_at(PI / 6.0, &cfg()).unwrap();
    let (Details::FortyFive(d45), Details::FortyFive(d30)) = (&demo.details, &demo30.details)
    else {
        unreachable!()
    };
    let refl45 = d45.reflection_only.homomorphisms_on_eigenspace;
    let phase45 = d45.phase_map.homomorphisms_on_eigenspace;
    let refl30 = d30.reflection_only.homomorphisms_on_eigenspace;

    let h = c(FRAC_1_SQRT_2);
    let (s, co) = ((PI / 6.0).sin(), (PI / 6.0).cos());
    let oracle_refl45 = hand_built_count([h, h], [h, -h], [h, -h], [h, h]);
    let oracle_phase45 = hand_built_count([h, h], [h, -h], [I * h, h], [I * h, -h]);
    let oracle_refl30 =
        hand_built_count([c(co), c(s)], [c(s), c(-co)], [c(co), c(-s)], [c(s), c(co)]);

    let passed = demo.passed
        && refl45 >= 1
        && phase45 == 0
        && refl30 == 0
        && (refl45, phase45, refl30) == (oracle_refl45, oracle_phase45, oracle_refl30);
    (
        passed,
        format!(
            "homomorphisms with h(r)=1: reflection at 45 deg {refl45}, phase map at 45 deg {phase45}, \
             reflection at 30 deg {refl30}; truth-table oracle {oracle_refl45}/{oracle_phase45}/{oracle_refl30}"
        ),
    )
}

// ---------------------------------------------------------------------------
// 7
// ---------------------------------------------------------------------------

fn preserves(u: &ComplexMatrix, e: &State, obs: &Observable) -> bool {
    let u = dense(u);
    let n = u.nrows();
    let conj = |p: &DMatrix<Complex64>| &u * p * u.adjoint();
    let pe = proj_of(&column(e.vector()));
    gap(&(u.adjoint() * &u), &DMatrix::identity(n, n)) < 1e-8
        && gap(&conj(&pe), &pe) < 1e-8
        && obs.eigenspaces().iter().all(|r| {
            let pr = dense(r.projector());
            gap(&conj(&pr), &pr) < 1e-8
        })
}

fn def_invariance() -> (bool, String) {
    let tol = tol();
    let mut rng = linalg::seeded_rng(70_000);
    let inst = sampling::random_instance(&mut rng, &[3, 2, 1], &[2], tol).unwrap();
    let sp = project_state(&inst.state, &inst.observable, tol).unwrap();
    let kinds = verifier::available_kinds(&sp);
    let mut not_preserving = 0;
    let mut counterexamples = 0;
    let mut members = 0;
    for trial in 0..100 {
        let kind = kinds[trial % kinds.len()];
        let u = verifier::draw_preserving(&mut rng, kind, &inst.observable, &sp, tol).unwrap();
        if !preserves(&u, &inst.state, &inst.observable) {
            not_preserving += 1;
        }
        for s in 0..50 {
            let p = if s % 2 == 0 {
                sampling::random_subspace(&mut rng, 6)
            } else {
                sampling::random_member(&mut rng, &sp, tol).unwrap()
            };
            let before = membership_in_d(&p, &sp, tol).unwrap();
            let after = membership_in_d(&p.apply_unitary(&u, tol).unwrap(), &sp, tol).unwrap();
            members += usize::from(before);
            counterexamples += usize::from(before != after);
        }
    }
    let report =
        verifier::def_invariance_scan(&inst.state, &inst.observable, 100, 50, 7, &cfg()).unwrap();
    let passed = not_preserving == 0 && counterexamples == 0 && report.passed;
    (
        passed,
        format!(
            "100 unitaries of kinds {kinds:?} on C^6, {not_preserving} not preserving, 5000 subspaces \
             ({members} members), {counterexamples} membership changes; scan report passed={}",
            report.passed
        ),
    )
}

// ---------------------------------------------------------------------------
// 8
// ---------------------------------------------------------------------------

fn decomposition_oracle() -> (bool, String) {
    let tol = tol();
    let shapes: [(&[usize], &[usize]); 6] = [
        (&[1, 1], &[]),
        (&[2, 1], &[]),
        (&[2, 2], &[]),
        (&[3, 1], &[]),
        (&[2, 1, 1], &[1]),
        (&[3, 2, 1], &[]),
    ];
    let mut disagreements = 0;
    let mut definitional_mismatch = 0;
    let mut worst_reconstruction = 0.0f64;
    let mut members = 0;
    for k in 0..1000 {
        let (dims, orth) = shapes[k % shapes.len()];
        let mut rng = linalg::seeded_rng(80_000 + k as u64);
        let inst = sampling::random_instance(&mut rng, dims, orth, tol).unwrap();
        let sp = project_state(&inst.state, &inst.observable, tol).unwrap();
        let n = sp.ambient_dim;
        let (p, _) = if k % 2 == 0 {
            sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                Ok(sampling::random_subspace(r, n))
            })
            .unwrap()
        } else {
            sampling::away_from_boundary(&mut rng, &sp, tol, |r| {
                sampling::random_member(r, &sp, tol)
            })
            .unwrap()
        };
        let member = membership_in_d(&p, &sp, tol).unwrap();
        // Definition, computed here: each e_ri lies in p or in p⊥.
        let definitional = sp.entries.iter().all(|e| {
            let v = e.projection.vector();
            let outside = (DMatrix::identity(n, n) - dense(p.projector())) * column(v);
            outside.norm() < tol.eps() || born(&p, v).sqrt() < tol.eps()
        });
        definitional_mismatch += usize::from(definitional != member);
        let d = canonical_decomposition(&p, &sp, tol).unwrap();
        disagreements += usize::from(d.is_member() != member);
        if member {
            members += 1;
            match d.reconstruct(&sp, tol).unwrap() {
                Some(q) => worst_reconstruction = worst_reconstruction.max(dist(&q, &p)),
                None => disagreements += 1,
            }
        }
    }
    let passed =
        disagreements == 0 && definitional_mismatch == 0 && worst_reconstruction < tol.eps();
    (
        passed,
        format!(
            "1000 subspaces ({members} members), {disagreements} disagreements, \
             {definitional_mismatch} mismatches with the definition, max reconstruction distance \
             {worst_reconstruction:.1e} (bound {:.0e})",
            tol.eps()
        ),
    )
}

// ---------------------------------------------------------------------------
// 9
// ---------------------------------------------------------------------------

fn enumerator_oracle() -> (bool, String) {
    let tol = tol();
    let h = c(FRAC_1_SQRT_2);
    let special: Vec<Vec<Complex64>> = vec![
        vec![ONE, ZERO, ZERO],
        vec![ZERO, ONE, ZERO],
        vec![ZERO, ZERO, ONE],
        vec![h, h, ZERO],
        vec![h, -h, ZERO],
        vec![I * h, h, ZERO],
        vec![I * h, -h, ZERO],
        vec![ZERO, h, h],
        vec![h, ZERO, -h],
    ];
    let mut compared = 0;
    let mut mismatches = 0;
    let mut sizes = BTreeSet::new();
    let mut hom_counts = BTreeSet::new();
    for case in 0..200u64 {
        let mut rng = linalg::seeded_rng(90_000 + case);
        let (n, generators): (usize, Vec<Subspace>) = if case % 2 == 0 {
            let count = rng.gen_range(1..=4);
            let g = (0..count)
                .map(|_| Ray::new(sampling::pick(&mut rng, &special)).unwrap().into())
                .collect();
            (3, g)
        } else {
            let n = rng.gen_range(2..=4);
            let count = rng.gen_range(1..=2);
            (
                n,
                (0..count)
                    .map(|_| sampling::random_subspace(&mut rng, n))
                    .collect(),
            )
        };
        let l = match generate(n, &generators, 20, tol) {
            Ok(l) => l,
            Err(_) => continue,
        };
        let fast: BTreeSet<Vec<bool>> = enumerate_homs(&l)
            .iter()
            .map(|h| h.values().to_vec())
            .collect();
        let slow = exhaustive_homs(&l);
        compared += 1;
        mismatches += usize::from(fast != slow);
        sizes.insert(l.len());
        hom_counts.insert(slow.len());
    }
    let passed = mismatches == 0 && compared >= 50 && hom_counts.contains(&0);
    (
        passed,
        format!(
            "{compared} lattices with sizes {sizes:?}, homomorphism counts {hom_counts:?}, {mismatches} mismatches"
        ),
    )
}
