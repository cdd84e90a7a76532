//! Experiment specifications, certificates, and JSON/CSV/SVG emission.
//!
//! Every run is driven by an [`ExperimentSpec`]; equal specs give
//! byte-identical output.

pub mod svg;

use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cube::{enumerate_monotone, CubePoint, Family, Membership, MonotoneSet, SetDescription, MAX_ENUM_DIM};
use crate::error::{Error, Result};
use crate::forms::{self, FunctionDescription, SetFunction};
use crate::induction::{self, FeasibilityConfig};
use crate::spectral::{self, SolverMethod};
use crate::walk::{self, ScalingRow};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Nonempty monotone sets per dimension, `1..=5`.
pub const UPSET_COUNTS: [usize; 5] = [2, 5, 19, 167, 7580];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Self::Json),
            "csv" => Ok(Self::Csv),
            _ => Err(Error::Parse(format!("unknown format {s:?}, expected json or csv"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    #[default]
    Verify,
    Lemmas,
    Mix,
    Spectral,
    Simulate,
    Enumerate,
}

/// Full description of a run. Field names double as the JSON config keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Command,
    /// Set descriptions, e.g. `"threshold 10 5"`.
    pub sets: Vec<String>,
    /// Function descriptions, e.g. `"dictator 1"`.
    pub functions: Vec<String>,
    /// Use every nonempty monotone set of this dimension.
    pub enumerate: Option<usize>,
    pub family: Option<String>,
    pub n: Vec<usize>,
    pub theta: f64,
    pub epsilon: f64,
    pub tol: Option<f64>,
    pub grid: usize,
    pub seed: u64,
    pub draws: usize,
    pub c: f64,
    /// Random `(A, f)` pairs for the decomposition identities.
    pub instances: usize,
    /// Random `(A, f)` pairs for the averaging reduction.
    pub jensen: usize,
    pub method: SolverMethodName,
    pub steps: Option<u64>,
    pub chains: usize,
    pub start: Option<String>,
    pub list: bool,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

/// Solver method as written in a spec (`auto`, `dense`, `iterative`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SolverMethodName(pub String);

impl Default for SolverMethodName {
    fn default() -> Self {
        Self("auto".into())
    }
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            command: Command::default(),
            sets: Vec::new(),
            functions: Vec::new(),
            enumerate: None,
            family: None,
            n: Vec::new(),
            theta: walk::DEFAULT_THETA,
            epsilon: walk::DEFAULT_EPSILON,
            tol: None,
            grid: induction::DEFAULT_GRID,
            seed: induction::DEFAULT_SEED,
            draws: induction::DEFAULT_DRAWS,
            c: induction::DEFAULT_C,
            instances: 1000,
            jensen: 100,
            method: SolverMethodName::default(),
            steps: None,
            chains: 64,
            start: None,
            list: false,
            format: Format::Json,
            out: None,
            svg: None,
        }
    }
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// The spec without output paths, as recorded in reports.
    fn provenance(&self) -> Self {
        Self { out: None, svg: None, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Environment {
    pub version: &'static str,
    pub seed: u64,
    pub spec: ExperimentSpec,
}

/// One named check. It fails exactly when it carries a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub instances: u64,
    /// Smallest margin seen; negative means violated.
    pub worst_slack: Option<f64>,
    pub detail: Value,
    #[serde(skip)]
    witnesses: Vec<Value>,
}

impl Check {
    pub fn new(name: &str, instances: u64, worst_slack: Option<f64>, detail: Value, witnesses: Vec<Value>) -> Self {
        Self { name: name.into(), passed: witnesses.is_empty(), instances, worst_slack, detail, witnesses }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub check: String,
    pub data: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certificate {
    pub suite: String,
    pub passed: bool,
    pub instances: u64,
    pub failures: u64,
    pub worst_slack: Option<f64>,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
    pub environment: Environment,
    pub rows: Value,
}

impl Certificate {
    pub fn new(suite: &str, spec: &ExperimentSpec, checks: Vec<Check>, rows: Value) -> Self {
        let witnesses: Vec<Witness> = checks
            .iter()
            .flat_map(|c| c.witnesses.iter().map(|w| Witness { check: c.name.clone(), data: w.clone() }))
            .collect();
        Self {
            suite: suite.into(),
            passed: witnesses.is_empty(),
            instances: checks.iter().map(|c| c.instances).sum(),
            failures: checks.iter().filter(|c| !c.passed).count() as u64,
            worst_slack: checks.iter().filter_map(|c| c.worst_slack).reduce(f64::min),
            checks,
            witnesses,
            environment: Environment { version: VERSION, seed: spec.seed, spec: spec.provenance() },
            rows,
        }
    }
}

/// Rendered result of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub certificate: Certificate,
    /// JSON or CSV, per the spec's format.
    pub body: String,
    pub svg: Option<String>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.certificate.passed
    }
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// `upset n g1,g2,...` over the minimal elements.
pub fn set_id(set: &MonotoneSet) -> String {
    let gens: Vec<CubePoint> = set.minimal_elements().iter().map(|&x| CubePoint::new(set.dim(), x as u64).expect("member")).collect();
    SetDescription::Upset { n: set.dim(), generators: gens }.to_string()
}

fn check_tol(tol: f64) -> Result<f64> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    Ok(tol)
}

fn parse_sets(spec: &ExperimentSpec) -> Result<Vec<SetDescription>> {
    spec.sets.iter().map(|s| s.parse()).collect()
}

/// Sets named in the spec, or every set of the enumerated dimension.
fn collect_sets(spec: &ExperimentSpec) -> Result<Vec<(String, MonotoneSet)>> {
    let mut out = Vec::new();
    if let Some(n) = spec.enumerate {
        if n == 0 || n > MAX_ENUM_DIM {
            return Err(Error::InvalidArgument(format!("--enumerate takes 1..={MAX_ENUM_DIM}, got {n}")));
        }
        out.extend(enumerate_monotone(n)?.map(|a| (set_id(&a), a)));
    }
    for d in parse_sets(spec)? {
        out.push((d.to_string(), d.build()?));
    }
    if out.is_empty() {
        return Err(Error::InvalidArgument("no sets given; use --set or --enumerate".into()));
    }
    Ok(out)
}

/// Certificate, CSV table and SVG plot, as produced by one command.
type Parts = (Certificate, Option<String>, Option<String>);

pub fn run(spec: &ExperimentSpec) -> Result<Outcome> {
    let (cert, csv, plot) = match spec.command {
        Command::Verify => cmd_verify(spec)?,
        Command::Lemmas => cmd_lemmas(spec)?,
        Command::Mix => cmd_mix(spec)?,
        Command::Spectral => cmd_spectral(spec)?,
        Command::Simulate => cmd_simulate(spec)?,
        Command::Enumerate => cmd_enumerate(spec)?,
    };
    let body = match spec.format {
        Format::Json => serde_json::to_string_pretty(&cert).expect("report types serialize") + "\n",
        Format::Csv => match csv {
            Some(t) => t,
            None => to_csv(&cert.checks.iter().map(CheckRow::from).collect::<Vec<_>>())?,
        },
    };
    let svg = match (&spec.svg, plot) {
        (None, _) => None,
        (Some(_), Some(p)) => Some(p),
        (Some(_), None) => return Err(Error::InvalidArgument("--svg is only produced by the mix table".into())),
    };
    Ok(Outcome { certificate: cert, body, svg })
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    passed: bool,
    instances: u64,
    worst_slack: Option<f64>,
}

impl<'a> From<&'a Check> for CheckRow<'a> {
    fn from(c: &'a Check) -> Self {
        Self { name: &c.name, passed: c.passed, instances: c.instances, worst_slack: c.worst_slack }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    pub set_id: String,
    pub n: usize,
    pub size: usize,
    pub density: f64,
    pub lambda2: Option<f64>,
    pub cstar: f64,
    pub bound_fp: f64,
    pub bound_ours: f64,
    pub slack_fp: f64,
    pub slack_ours: f64,
    pub method: String,
    pub residual: f64,
    pub witness_ratio: Option<f64>,
    pub pass: bool,
}

fn verify_rows(spec: &ExperimentSpec) -> Result<Vec<VerifyRow>> {
    let sets = collect_sets(spec)?;
    let method: SolverMethod = spec.method.0.parse()?;
    let tol = check_tol(spec.tol.unwrap_or(spectral::DEFAULT_TOL))?;
    sets.par_iter()
        .map(|(id, a)| {
            let c = spectral::verify_theorem_with(a, method, tol)?;
            Ok(VerifyRow {
                set_id: id.clone(),
                n: c.dim,
                size: c.size,
                density: c.density,
                lambda2: c.lambda2,
                cstar: c.cstar,
                bound_fp: c.bound_fp,
                bound_ours: c.bound_ours,
                slack_fp: c.slack_fp,
                slack_ours: c.slack_ours,
                method: c.method.map_or("none".into(), |m| m.to_string()),
                residual: c.residual,
                witness_ratio: c.witness_ratio,
                pass: c.passed(),
            })
        })
        .collect()
}

fn cmd_verify(spec: &ExperimentSpec) -> Result<Parts> {
    let rows = verify_rows(spec)?;
    let count = rows.len() as u64;
    let bound = |name: &str, pass: fn(&VerifyRow) -> bool, slack: fn(&VerifyRow) -> f64| {
        let w: Vec<Value> = rows.iter().filter(|r| !pass(r)).map(|r| json!({"set": r.set_id, "cstar": r.cstar, "slack": slack(r)})).collect();
        Check::new(name, count, rows.iter().map(slack).reduce(f64::min), json!({}), w)
    };
    let fp = bound("bound_constant_one", |r| r.cstar <= r.bound_fp * (1.0 + spectral::CERT_REL_TOL), |r| r.slack_fp);
    let ours = bound("bound_constant_two", |r| r.cstar <= r.bound_ours * (1.0 + spectral::CERT_REL_TOL), |r| r.slack_ours);
    let ratio_gap = |r: &VerifyRow| r.witness_ratio.map_or(0.0, |w| (w - r.cstar).abs() / r.cstar);
    let ratio_w: Vec<Value> = rows
        .iter()
        .filter(|r| ratio_gap(r) > spectral::CERT_REL_TOL)
        .map(|r| json!({"set": r.set_id, "cstar": r.cstar, "witness_ratio": r.witness_ratio}))
        .collect();
    let worst_ratio = rows.iter().map(ratio_gap).fold(0.0, f64::max);
    let ratio = Check::new("witness_ratio", count, Some(spectral::CERT_REL_TOL - worst_ratio), json!({"max_relative_gap": worst_ratio}), ratio_w);
    let csv = to_csv(&rows)?;
    Ok((Certificate::new("verify", spec, vec![fp, ours, ratio], to_json(&rows)), Some(csv), None))
}

/// The spectral CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralRow {
    pub set_id: String,
    pub n: usize,
    pub size: usize,
    pub density: f64,
    pub lambda2: Option<f64>,
    pub cstar: f64,
    pub bound_fp: f64,
    pub bound_ours: f64,
    pub slack_fp: f64,
    pub method: String,
    pub residual: f64,
}

fn cmd_spectral(spec: &ExperimentSpec) -> Result<Parts> {
    let rows: Vec<SpectralRow> = verify_rows(spec)?
        .into_iter()
        .map(|r| SpectralRow {
            set_id: r.set_id,
            n: r.n,
            size: r.size,
            density: r.density,
            lambda2: r.lambda2,
            cstar: r.cstar,
            bound_fp: r.bound_fp,
            bound_ours: r.bound_ours,
            slack_fp: r.slack_fp,
            method: r.method,
            residual: r.residual,
        })
        .collect();
    let w: Vec<Value> = rows
        .iter()
        .filter(|r| r.cstar > r.bound_fp * (1.0 + spectral::CERT_REL_TOL))
        .map(|r| json!({"set": r.set_id, "cstar": r.cstar, "bound_fp": r.bound_fp}))
        .collect();
    let check = Check::new("bound_constant_one", rows.len() as u64, rows.iter().map(|r| r.slack_fp).reduce(f64::min), json!({}), w);
    let csv = to_csv(&rows)?;
    Ok((Certificate::new("spectral", spec, vec![check], to_json(&rows)), Some(csv), None))
}

/// Random `(A, f)` pair number `i`: `A` is the upward closure of one to
/// three random points in dimension `dims`, `f` is uniform in `[-1, 1]`.
pub fn random_instance(seed: u64, i: u64, dims: std::ops::RangeInclusive<usize>) -> Result<SetFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    let n = rng.gen_range(dims);
    let set = MonotoneSet::random(n, rng.gen_range(1..=3), rng.gen())?;
    SetFunction::random(Arc::new(set), rng.gen())
}

/// Like [`random_instance`] but redrawn until the lower slice is nonempty.
pub fn random_jensen_instance(seed: u64, i: u64) -> Result<SetFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6a65_6e73_656e);
    rng.set_stream(i);
    loop {
        let n = rng.gen_range(2..=8);
        let set = MonotoneSet::random(n, rng.gen_range(1..=3), rng.gen())?;
        if crate::cube::split(&set)?.lower.is_some() {
            return SetFunction::random(Arc::new(set), rng.gen());
        }
    }
}

fn decomposition_check(
    name: &str,
    pairs: &[(String, SetFunction)],
    tol: f64,
    check: fn(&SetFunction, f64) -> Result<forms::DecompositionReport>,
) -> Result<Check> {
    let reports: Vec<forms::DecompositionReport> = pairs.par_iter().map(|(_, f)| check(f, tol)).collect::<Result<_>>()?;
    let worst = reports.iter().map(|r| r.relative_residual.max(r.coefficient_residual.unwrap_or(0.0))).fold(0.0, f64::max);
    let w: Vec<Value> = pairs
        .iter()
        .zip(&reports)
        .filter(|(_, r)| !r.passed)
        .map(|((label, _), r)| json!({"instance": label, "report": r}))
        .collect();
    Ok(Check::new(name, pairs.len() as u64, Some(tol - worst), json!({"max_relative_residual": worst, "tol": tol}), w))
}

fn cmd_lemmas(spec: &ExperimentSpec) -> Result<Parts> {
    if spec.draws == 0 {
        return Err(Error::InvalidArgument("--draws must be positive".into()));
    }
    if spec.grid < 100 {
        return Err(Error::InvalidArgument(format!("--grid must be at least 100, got {}", spec.grid)));
    }
    if !(spec.c > 0.0 && spec.c.is_finite()) {
        return Err(Error::InvalidArgument(format!("--c must be positive, got {}", spec.c)));
    }
    let tol = check_tol(spec.tol.unwrap_or(forms::DEFAULT_REL_TOL))?;
    let (seed, c) = (spec.seed, spec.c);

    let mut pairs: Vec<(String, SetFunction)> = (0..spec.instances as u64)
        .into_par_iter()
        .map(|i| Ok((format!("random {seed}/{i}"), random_instance(seed, i, 2..=10)?)))
        .collect::<Result<_>>()?;
    let funcs: Vec<FunctionDescription> = spec.functions.iter().map(|s| s.parse()).collect::<Result<_>>()?;
    for d in parse_sets(spec)? {
        let set = Arc::new(d.build()?);
        for g in &funcs {
            pairs.push((format!("{d} / {g}"), SetFunction::from_description(set.clone(), g)?));
        }
    }
    let mut checks = vec![
        decomposition_check("dirichlet_decomposition", &pairs, tol, forms::check_dirichlet_decomposition)?,
        decomposition_check("variance_decomposition", &pairs, tol, forms::check_variance_decomposition)?,
    ];

    let g = induction::psd_grid(spec.grid)?;
    let psd_bad = g.min_margin < -induction::SIGN_SLACK || g.max_form_gap > induction::SIGN_SLACK;
    checks.push(Check::new(
        "psd_margin",
        g.points as u64,
        Some(g.min_margin),
        to_json(&g),
        if psd_bad { vec![json!({"a0": g.argmin.0, "a1": g.argmin.1, "margin": g.min_margin, "form_gap": g.max_form_gap})] } else { vec![] },
    ));

    let sq = sqrt_identity_grid(spec.grid);
    checks.push(Check::new(
        "sqrt_identities",
        g.points as u64,
        Some(induction::SIGN_SLACK - sq.0),
        json!({"max_residual": sq.0}),
        if sq.0 > induction::SIGN_SLACK { vec![json!({"a0": sq.1.0, "a1": sq.1.1, "residual": sq.0})] } else { vec![] },
    ));

    let d = induction::discriminant_grid(spec.grid, c)?;
    let d_bad = d.violations > 0 || d.sign_disagreements > 0;
    checks.push(Check::new(
        "discriminant",
        d.points as u64,
        Some(-d.max_delta),
        to_json(&d),
        if d_bad { vec![json!({"a0": d.argmax.0, "a1": d.argmax.1, "delta": d.max_delta, "c": c})] } else { vec![] },
    ));

    let fp = induction::five_point_sweep(spec.draws, seed, c);
    checks.push(Check::new(
        "five_point",
        fp.draws as u64,
        Some(fp.min_margin),
        to_json(&fp),
        fp.witness.iter().map(to_json).collect(),
    ));

    let pairs_q = 100;
    let q = induction::quadratic_sweep(pairs_q, spec.draws.div_ceil(pairs_q), seed, c);
    checks.push(Check::new(
        "quadratic_nonnegative",
        (q.pairs * (q.per_pair + 1)) as u64,
        Some(q.min_scaled_value),
        to_json(&q),
        if q.violations > 0 { vec![json!({"violations": q.violations, "min_scaled_value": q.min_scaled_value})] } else { vec![] },
    ));

    let jensen: Vec<induction::JensenReport> = (0..spec.jensen as u64)
        .into_par_iter()
        .map(|i| induction::jensen_reduction_check(&random_jensen_instance(seed, i)?, c))
        .collect::<Result<_>>()?;
    checks.push(Check::new(
        "jensen_reduction",
        jensen.len() as u64,
        jensen.iter().map(|r| r.lhs_full - r.lhs_averaged).reduce(f64::min),
        json!({"c": c}),
        jensen.iter().filter(|r| !r.holds).map(to_json).collect(),
    ));

    let cfg = FeasibilityConfig { grid: spec.grid, sweep_draws: spec.draws.min(100_000), seed, ..Default::default() };
    let best = induction::best_feasible_c(&cfg)?;
    checks.push(Check::new(
        "best_feasible_c",
        1,
        Some(best.best_c - c),
        to_json(&best),
        if best.best_c < c { vec![to_json(&best)] } else { vec![] },
    ));

    let summary = json!({
        "grid": spec.grid,
        "seed": seed,
        "draws": spec.draws,
        "c": c,
        "min_psd_margin": g.min_margin,
        "max_discriminant": d.max_delta,
        "five_point_violations": fp.violations,
        "best_feasible_c": best.best_c,
    });
    Ok((Certificate::new("lemmas", spec, checks, summary), None, None))
}

/// Largest square-root identity residual on the triangular grid.
fn sqrt_identity_grid(points: usize) -> (f64, (f64, f64)) {
    let d = (points - 1) as f64;
    (0..points)
        .into_par_iter()
        .map(|i| {
            let a0 = i as f64 / d;
            (i..points)
                .map(|j| {
                    let a1 = j as f64 / d;
                    let r = induction::sqrt_identities(a0, a1).expect("grid point is valid");
                    (r.first.max(r.second), (a0, a1))
                })
                .fold((0.0, (0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0.0, (0.0, 0.0)), |acc, x| if x.0 > acc.0 { x } else { acc })
}

fn cmd_mix(spec: &ExperimentSpec) -> Result<Parts> {
    if !(spec.epsilon > 0.0 && spec.epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!("--eps must lie in (0, 1), got {}", spec.epsilon)));
    }
    if !(0.5..1.0).contains(&spec.theta) {
        return Err(Error::InvalidArgument(format!("--theta must lie in [1/2, 1) for the bounds, got {}", spec.theta)));
    }
    if !spec.sets.is_empty() {
        let reports: Vec<walk::MixingReport> = parse_sets(spec)?
            .into_iter()
            .map(|d| walk::mixing_report(Arc::new(d.build()?), &d.to_string(), spec.theta, spec.epsilon))
            .collect::<Result<_>>()?;
        let w: Vec<Value> = reports.iter().filter(|r| !(r.ordered && r.tv_monotone)).map(to_json).collect();
        let slack = reports.iter().map(|r| r.bound_spectral as f64 - r.t_mix as f64).reduce(f64::min);
        let check = Check::new("bound_ordering", reports.len() as u64, slack, json!({}), w);
        let csv = to_csv(&reports)?;
        let rows = to_json(&reports);
        return Ok((Certificate::new("mix", spec, vec![check], rows), Some(csv), None));
    }
    match spec.family.as_deref().unwrap_or("majority") {
        "majority" => {}
        other => return Err(Error::InvalidArgument(format!("unknown family {other:?}; only majority is tabulated"))),
    }
    let ns = if spec.n.is_empty() { vec![3, 5, 7, 9] } else { spec.n.clone() };
    let rows = walk::scaling_experiment(&ns, spec.theta, spec.epsilon)?;
    let w: Vec<Value> = rows.iter().filter(|r| !r.ordered).map(to_json).collect();
    let slack = rows.iter().map(|r| r.bound_spectral as f64 - r.tmix_exact as f64).reduce(f64::min);
    let norm: Vec<f64> = rows.iter().map(|r| r.poincare_normalized).collect();
    let band = norm.iter().copied().fold(f64::NEG_INFINITY, f64::max) / norm.iter().copied().fold(f64::INFINITY, f64::min);
    let check = Check::new("bound_ordering", rows.len() as u64, slack, json!({"poincare_band_ratio": band}), w);
    let csv = to_csv(&rows)?;
    Ok((Certificate::new("mix", spec, vec![check], to_json(&rows)), Some(csv), Some(mix_svg(&rows))))
}

fn mix_svg(rows: &[ScalingRow]) -> String {
    let series = |f: fn(&ScalingRow) -> u64| rows.iter().map(|r| (r.n as f64, f(r) as f64)).collect();
    svg::loglog(
        "mixing time and bounds",
        "n",
        &[
            svg::Series { label: "t_mix", points: series(|r| r.tmix_exact) },
            svg::Series { label: "spectral bound", points: series(|r| r.bound_spectral) },
            svg::Series { label: "Poincare bound", points: series(|r| r.bound_poincare) },
        ],
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct CoordRow {
    coord: usize,
    mean: f64,
    std_error: f64,
}

/// Stationary mean of `|x| / n` under the uniform law on the set, when it
/// can be computed.
fn analytic_weight_fraction(desc: &SetDescription, oracle: &crate::cube::MembershipOracle) -> Result<Option<f64>> {
    if let Family::Threshold { .. } = oracle.family() {
        return oracle.stationary_coordinate_mean(0).map(Some);
    }
    if desc.dim() > crate::cube::MAX_DENSE_DIM {
        return Ok(None);
    }
    let a = desc.build()?;
    let total: f64 = crate::sum::sum(a.members().iter().map(|&x| x.count_ones() as f64));
    Ok(Some(total / (a.size() * a.dim()) as f64))
}

fn cmd_simulate(spec: &ExperimentSpec) -> Result<Parts> {
    let [desc] = parse_sets(spec)?.try_into().map_err(|_| Error::InvalidArgument("simulate takes exactly one --set".into()))?;
    let oracle = desc.oracle()?;
    let n = oracle.dim();
    let start = match &spec.start {
        Some(s) => CubePoint::from_binary(s)?,
        None => CubePoint::all_ones(n)?,
    };
    let steps = spec.steps.unwrap_or(4 * (n * n) as u64);
    let sim = walk::simulate_chains(&oracle, start, steps, spec.chains, spec.theta, spec.seed)?;
    let mut checks = Vec::new();
    let outside: Vec<Value> = sim
        .final_points
        .iter()
        .filter(|p| CubePoint::from_binary(p).map_or(true, |q| !oracle.contains_index(q.index())))
        .map(|p| json!({"final_point": p}))
        .collect();
    checks.push(Check::new("stays_in_set", sim.chains as u64, None, json!({}), outside));
    let analytic = analytic_weight_fraction(&desc, &oracle)?;
    if let Some(mu) = analytic {
        let z = (sim.weight_fraction - mu) / sim.weight_fraction_se;
        let w = if z.abs() <= 3.0 { vec![] } else { vec![json!({"observed": sim.weight_fraction, "expected": mu, "z": z})] };
        checks.push(Check::new(
            "stationary_mean",
            sim.chains as u64,
            Some(3.0 - z.abs()),
            json!({"expected": mu, "observed": sim.weight_fraction, "std_error": sim.weight_fraction_se, "z": z}),
            w,
        ));
    }
    let rows: Vec<CoordRow> = (0..n)
        .map(|i| CoordRow { coord: i + 1, mean: sim.coord_means[i], std_error: sim.coord_std_errors[i] })
        .collect();
    let csv = to_csv(&rows)?;
    let mut body = to_json(&sim);
    body["set"] = json!(desc.to_string());
    body["analytic_weight_fraction"] = json!(analytic);
    Ok((Certificate::new("simulate", spec, checks, body), Some(csv), None))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct EnumRow {
    set_id: String,
    size: usize,
    density: f64,
}

fn cmd_enumerate(spec: &ExperimentSpec) -> Result<Parts> {
    let n = match (spec.enumerate, spec.n.as_slice()) {
        (Some(n), _) | (None, &[n]) => n,
        _ => return Err(Error::InvalidArgument("enumerate takes one dimension".into())),
    };
    if n == 0 || n > MAX_ENUM_DIM {
        return Err(Error::EnumerationCap(n));
    }
    let rows: Vec<EnumRow> = enumerate_monotone(n)?.map(|a| EnumRow { set_id: set_id(&a), size: a.size(), density: a.density() }).collect();
    let expected = UPSET_COUNTS[n - 1];
    let w = if rows.len() == expected { vec![] } else { vec![json!({"n": n, "count": rows.len(), "expected": expected})] };
    let check = Check::new("count", 1, None, json!({"n": n, "count": rows.len()}), w);
    let csv = to_csv(&rows)?;
    let body = if spec.list { json!({"n": n, "count": rows.len(), "sets": rows}) } else { json!({"n": n, "count": rows.len()}) };
    Ok((Certificate::new("enumerate", spec, vec![check], body), Some(csv), None))
}
