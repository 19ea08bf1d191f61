//! `detlat <command> [flags] [file]`: JSON scenarios in, JSON reports out.

use std::f64::consts::PI;
use std::fs;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::determinate::{
    canonical_decomposition, membership_defect, membership_in_d, project_state, skew_witness,
    Observable, State,
};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, Tolerance, ONE, ZERO};
use crate::ortholattice::{enumerate_homs, generate, is_sublattice_of_d, DEFAULT_MAX_ELEMENTS};
use crate::probability::{tp_verify, DEFAULT_MAX_FAMILY};
use crate::subspace::Subspace;
use crate::verifier::{self, ObstructionMap, Verdict, VerificationReport, VerifyConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "detlat",
    version,
    about = "Determinate sublattices, 2-valued homomorphisms and Born measures"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Numerical tolerance (overrides the scenario's `tolerance`).
    #[arg(long, global = true)]
    pub tol: Option<f64>,

    /// RNG seed (overrides the scenario's `seed`).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Number of random samples for sampled demos.
    #[arg(long, global = true, default_value_t = 50)]
    pub samples: usize,

    /// Cap on generated sublattice size.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ELEMENTS)]
    pub max_elements: usize,

    /// Largest compatible family used in the measure constraints.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_FAMILY)]
    pub max_family: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonzero projections of the state onto the eigenspaces.
    Project { scenario: Option<PathBuf> },
    /// Membership of the scenario's `subspace` and its decomposition.
    Member { scenario: Option<PathBuf> },
    /// 2-valued homomorphisms of the sublattice generated by a lattice file.
    Homs { lattice: Option<PathBuf> },
    /// Born measure over the homomorphisms of the scenario's `generators`.
    Tp { scenario: Option<PathBuf> },
    /// Run a named verification scenario.
    Demo {
        #[arg(value_enum)]
        name: DemoName,
        /// Scenario file (`-` for stdin); a fixed C^3 instance otherwise.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Angle between `b` and `e_r` for four-ray.
        #[arg(long, default_value_t = 45.0)]
        angle_deg: f64,
        /// Map applied to `b` for four-ray.
        #[arg(long, value_enum, default_value_t = MapArg::PhaseMap)]
        map: MapArg,
        /// Unitaries drawn by def-invariance.
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DemoName {
    FortyFive,
    FourRay,
    Dichotomy,
    Maximality,
    DefInvariance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapArg {
    Reflection,
    PhaseMap,
}

/// A complex entry: a bare real number or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl From<Entry> for Complex64 {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Real(re) => Complex64::new(re, 0.0),
            Entry::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

/// A subspace as `{ambient_dim, basis}` or as a bare list of spanning vectors.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum SubspaceInput {
    Object {
        ambient_dim: usize,
        basis: Vec<Vec<Entry>>,
    },
    Vectors(Vec<Vec<Entry>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObservableInput {
    eigenspaces: Option<Vec<SubspaceInput>>,
    matrix: Option<Vec<Vec<Entry>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioInput {
    state: Vec<Entry>,
    observable: ObservableInput,
    tolerance: Option<f64>,
    seed: Option<u64>,
    subspace: Option<SubspaceInput>,
    generators: Option<Vec<SubspaceInput>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeInput {
    ambient_dim: usize,
    generators: Vec<SubspaceInput>,
    tolerance: Option<f64>,
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub state: State,
    pub observable: Observable,
    pub tol: Tolerance,
    pub seed: u64,
    pub subspace: Option<Subspace>,
    pub generators: Option<Vec<Subspace>>,
}

fn vector(entries: &[Entry]) -> Vec<Complex64> {
    entries.iter().map(|&e| e.into()).collect()
}

fn subspace(field: &str, input: &SubspaceInput, n: usize, tol: Tolerance) -> Result<Subspace> {
    let (dim, basis) = match input {
        SubspaceInput::Object { ambient_dim, basis } => (*ambient_dim, basis),
        SubspaceInput::Vectors(basis) => (n, basis),
    };
    if dim != n {
        return Err(Error::input(
            field,
            format!("ambient dimension {dim}, expected {n}"),
        ));
    }
    let vectors: Vec<Vec<Complex64>> = basis.iter().map(|v| vector(v)).collect();
    for (j, v) in vectors.iter().enumerate() {
        if v.len() != n {
            return Err(Error::input(
                format!("{field}[{j}]"),
                format!("length {}, expected {n}", v.len()),
            ));
        }
        if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::input(format!("{field}[{j}]"), "non-finite entry"));
        }
    }
    Subspace::span(n, &vectors, tol).map_err(|e| Error::input(field, e.to_string()))
}

fn resolve_tolerance(flag: Option<f64>, file: Option<f64>) -> Result<Tolerance> {
    match (flag, file) {
        (Some(eps), _) => Tolerance::new(eps).map_err(|e| Error::input("--tol", e.to_string())),
        (None, Some(eps)) => {
            Tolerance::new(eps).map_err(|e| Error::input("tolerance", e.to_string()))
        }
        (None, None) => Ok(Tolerance::default()),
    }
}

fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        let field = if path == "." {
            "<input>".to_string()
        } else {
            path
        };
        Error::input(
            field,
            format!("{inner} (line {}, column {})", inner.line(), inner.column()),
        )
    })
}

impl Scenario {
    /// Parses and validates scenario JSON; flag values override file values.
    pub fn from_json(text: &str, tol_flag: Option<f64>, seed_flag: Option<u64>) -> Result<Self> {
        let raw: ScenarioInput = parse(text)?;
        let tol = resolve_tolerance(tol_flag, raw.tolerance)?;
        let n = raw.state.len();
        if n == 0 {
            return Err(Error::input("state", "empty vector"));
        }
        let v = vector(&raw.state);
        let state = State::normalized(&v).map_err(|e| Error::input("state", e.to_string()))?;

        let observable = match (&raw.observable.eigenspaces, &raw.observable.matrix) {
            (Some(spaces), None) => {
                let spaces = spaces
                    .iter()
                    .enumerate()
                    .map(|(i, s)| subspace(&format!("observable.eigenspaces[{i}]"), s, n, tol))
                    .collect::<Result<Vec<_>>>()?;
                Observable::new(spaces, tol)
                    .map_err(|e| Error::input("observable.eigenspaces", e.to_string()))?
            }
            (None, Some(rows)) => {
                let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| vector(r)).collect();
                let m = ComplexMatrix::from_rows(&rows)
                    .map_err(|e| Error::input("observable.matrix", e.to_string()))?;
                if m.rows() != n || !m.is_square() {
                    return Err(Error::input(
                        "observable.matrix",
                        format!("shape {}x{}, expected {n}x{n}", m.rows(), m.cols()),
                    ));
                }
                Observable::from_hermitian(&m, tol)
                    .map_err(|e| Error::input("observable.matrix", e.to_string()))?
            }
            _ => {
                return Err(Error::input(
                    "observable",
                    "give exactly one of `eigenspaces` or `matrix`",
                ));
            }
        };
        let subspace_field = raw
            .subspace
            .as_ref()
            .map(|s| subspace("subspace", s, n, tol))
            .transpose()?;
        let generators = raw
            .generators
            .as_ref()
            .map(|gs| {
                gs.iter()
                    .enumerate()
                    .map(|(i, g)| subspace(&format!("generators[{i}]"), g, n, tol))
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?;
        Ok(Self {
            state,
            observable,
            tol,
            seed: seed_flag.or(raw.seed).unwrap_or(0),
            subspace: subspace_field,
            generators,
        })
    }

    /// C^3 with eigenspaces `{xy, z}` and state `(1, 0, 1)/√2`.
    pub fn fixture(tol: Tolerance, seed: u64) -> Self {
        let observable = Observable::new(
            vec![Subspace::axes(3, &[0, 1]), Subspace::axes(3, &[2])],
            tol,
        )
        .expect("coordinate eigenspaces");
        Self {
            state: State::normalized(&[ONE, ZERO, ONE]).expect("nonzero"),
            observable,
            tol,
            seed,
            subspace: None,
            generators: None,
        }
    }
}

/// Result of one command: JSON for stdout and an exit code.
struct Outcome {
    json: Value,
    code: i32,
}

impl Outcome {
    fn ok(json: Value) -> Self {
        Self {
            json,
            code: EXIT_OK,
        }
    }

    fn report(report: &VerificationReport) -> Result<Self> {
        let code = match report.verdict() {
            Verdict::Pass => EXIT_OK,
            Verdict::Fail => EXIT_FAILURE,
            Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        };
        Ok(Self {
            json: serde_json::to_value(report)?,
            code,
        })
    }
}

fn read_input(path: Option<&PathBuf>, stdin: &mut dyn Read) -> Result<String> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::read_to_string(p).map_err(|e| Error::input(p.display().to_string(), e.to_string()))
        }
        _ => {
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn config(cli: &Cli, tol: Tolerance) -> Result<VerifyConfig> {
    if cli.max_elements < 2 {
        return Err(Error::input("--max-elements", "must be at least 2"));
    }
    if cli.max_family == 0 {
        return Err(Error::input("--max-family", "must be at least 1"));
    }
    Ok(VerifyConfig {
        tol,
        max_elements: cli.max_elements,
        max_family: cli.max_family,
    })
}

fn lattice_or_inconclusive<T>(r: Result<T>) -> std::result::Result<T, Outcome> {
    match r {
        Ok(v) => Ok(v),
        Err(Error::ClosureOverflow(cap)) => Err(Outcome {
            json: json!({ "inconclusive": true, "reason": format!("generated sublattice exceeds {cap} elements") }),
            code: EXIT_INCONCLUSIVE,
        }),
        Err(e) => Err(Outcome {
            json: error_json(&e),
            code: EXIT_FAILURE,
        }),
    }
}

fn execute(cli: &Cli, stdin: &mut dyn Read) -> Result<Outcome> {
    let load = |path: Option<&PathBuf>, stdin: &mut dyn Read| -> Result<Scenario> {
        Scenario::from_json(&read_input(path, stdin)?, cli.tol, cli.seed)
    };
    match &cli.command {
        Command::Project { scenario } => {
            let s = load(scenario.as_ref(), stdin)?;
            let sp = project_state(&s.state, &s.observable, s.tol)?;
            Ok(Outcome::ok(serde_json::to_value(&sp)?))
        }
        Command::Member { scenario } => {
            let s = load(scenario.as_ref(), stdin)?;
            let p = s
                .subspace
                .ok_or_else(|| Error::input("subspace", "missing"))?;
            let sp = project_state(&s.state, &s.observable, s.tol)?;
            Ok(Outcome::ok(json!({
                "member": membership_in_d(&p, &sp, s.tol)?,
                "skew_witness": skew_witness(&p, &sp, s.tol)?,
                "membership_defect": membership_defect(&p, &sp),
                "decomposition": canonical_decomposition(&p, &sp, s.tol)?,
            })))
        }
        Command::Homs { lattice } => {
            let raw: LatticeInput = parse(&read_input(lattice.as_ref(), stdin)?)?;
            let tol = resolve_tolerance(cli.tol, raw.tolerance)?;
            let cfg = config(cli, tol)?;
            if raw.ambient_dim == 0 {
                return Err(Error::input("ambient_dim", "must be positive"));
            }
            let generators = raw
                .generators
                .iter()
                .enumerate()
                .map(|(i, g)| subspace(&format!("generators[{i}]"), g, raw.ambient_dim, tol))
                .collect::<Result<Vec<_>>>()?;
            let l = match lattice_or_inconclusive(generate(
                raw.ambient_dim,
                &generators,
                cfg.max_elements,
                tol,
            )) {
                Ok(l) => l,
                Err(outcome) => return Ok(outcome),
            };
            let homs = enumerate_homs(&l);
            Ok(Outcome::ok(json!({
                "count": homs.len(),
                "lattice": l.export(&homs),
            })))
        }
        Command::Tp { scenario } => {
            let s = load(scenario.as_ref(), stdin)?;
            let cfg = config(cli, s.tol)?;
            let generators = s
                .generators
                .clone()
                .ok_or_else(|| Error::input("generators", "missing"))?;
            let n = s.state.ambient_dim();
            let l = match lattice_or_inconclusive(generate(n, &generators, cfg.max_elements, s.tol))
            {
                Ok(l) => l,
                Err(outcome) => return Ok(outcome),
            };
            let homs = enumerate_homs(&l);
            let outcome = tp_verify(&s.state, &l, &homs, cfg.max_family)?;
            let sp = project_state(&s.state, &s.observable, s.tol)?;
            let code = if outcome.is_feasible() {
                EXIT_OK
            } else {
                EXIT_FAILURE
            };
            Ok(Outcome {
                json: json!({
                    "lattice_size": l.len(),
                    "homomorphisms": homs.iter().map(|h| h.to_bitstring()).collect::<Vec<_>>(),
                    "sublattice_of_d": is_sublattice_of_d(&l, &sp)?,
                    "measure": outcome.report(),
                }),
                code,
            })
        }
        Command::Demo {
            name,
            scenario,
            angle_deg,
            map,
            trials,
        } => {
            let s = match scenario {
                Some(path) => load(Some(path), stdin)?,
                None => Scenario::fixture(resolve_tolerance(cli.tol, None)?, cli.seed.unwrap_or(0)),
            };
            let cfg = config(cli, s.tol)?;
            let report = match name {
                DemoName::FortyFive => verifier::forty_five_demo(&cfg)?,
                DemoName::FourRay => {
                    if !angle_deg.is_finite() {
                        return Err(Error::input("--angle-deg", "must be finite"));
                    }
                    let angle = angle_deg * PI / 180.0;
                    let (e_r, b) = verifier::forty_five_fixture(angle)?;
                    let map = match map {
                        MapArg::Reflection => ObstructionMap::Reflection,
                        MapArg::PhaseMap => ObstructionMap::PhaseMap,
                    };
                    verifier::four_ray_obstruction(&e_r, &b, map, &cfg)
                        .map_err(|e| Error::input("--angle-deg", e.to_string()))?
                }
                DemoName::Dichotomy => verifier::membership_dichotomy_scan(
                    &s.state,
                    &s.observable,
                    cli.samples,
                    s.seed,
                    &cfg,
                )?,
                DemoName::Maximality => {
                    verifier::maximality_probe(&s.state, &s.observable, cli.samples, s.seed, &cfg)?
                }
                DemoName::DefInvariance => verifier::def_invariance_scan(
                    &s.state,
                    &s.observable,
                    *trials,
                    cli.samples,
                    s.seed,
                    &cfg,
                )?,
            };
            Outcome::report(&report)
        }
    }
}

fn error_json(e: &Error) -> Value {
    match e {
        Error::Input { field, message } => {
            json!({ "error": { "field": field, "message": message } })
        }
        other => json!({ "error": { "message": other.to_string() } }),
    }
}

/// Runs the CLI with explicit streams and returns the exit code.
pub fn run<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let (json, code) = match execute(&cli, stdin) {
        Ok(outcome) => (outcome.json, outcome.code),
        Err(e) => {
            let _ = writeln!(stderr, "detlat: {e}");
            let code = match e {
                Error::Input { .. } | Error::Json(_) | Error::Io(_) => EXIT_INPUT,
                Error::ClosureOverflow(_) => EXIT_INCONCLUSIVE,
                _ => EXIT_FAILURE,
            };
            (error_json(&e), code)
        }
    };
    let text = serde_json::to_string_pretty(&json).expect("JSON values serialize");
    if writeln!(stdout, "{text}").is_err() {
        return EXIT_FAILURE;
    }
    code
}
