//! Batch experiment runner behind the `trm` binary.
//!
//! A config is a JSON object with the common fields `schema_version`, `kind`,
//! `seed` and optional `output`, plus the parameters of its kind. Results are
//! written with a metadata header (config hash, effective seed, library
//! version) so a run can be repeated exactly; identical config and seed give
//! byte-identical output for any worker count.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::checker::{self, Bundle, JointTriple, PairwiseTransitions};
use crate::density::{self, DensitySpec};
use crate::error::TrmError;
use crate::hilbert::{self, HilbertObservable, HilbertState};
use crate::mc;
use crate::simplex::{BarycentricVector, OutcomePartition};
use crate::sphere::{self, BlochVector, Step};
use crate::universal::{self, ScanMode, ScanRow};
use crate::utr;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "TRM_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("{0}")]
    Domain(TrmError),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Schema(_) => EXIT_SCHEMA,
            RunError::Domain(_) => EXIT_DOMAIN,
            RunError::Io { .. } => EXIT_IO,
        }
    }
}

impl From<TrmError> for RunError {
    fn from(e: TrmError) -> Self {
        match e {
            TrmError::Schema(m) => RunError::Schema(m),
            other => RunError::Domain(other),
        }
    }
}

fn schema(msg: impl Into<String>) -> RunError {
    RunError::Schema(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Utr,
    Gtr,
    Universal,
    Sphere,
    Classify,
    Oracle,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Utr => "utr",
            Kind::Gtr => "gtr",
            Kind::Universal => "universal",
            Kind::Sphere => "sphere",
            Kind::Classify => "classify",
            Kind::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// Accepts integer counts written either as integers or as integral floats
/// such as `1e6`.
fn count<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
    let v = f64::deserialize(d)?;
    if v.fract() != 0.0 || !(1.0..=9.007_199_254_740_992e15).contains(&v) {
        return Err(serde::de::Error::custom(format!(
            "expected a positive integer count, got {v}"
        )));
    }
    Ok(v as u64)
}

fn opt_count<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
    count(d).map(Some)
}

fn positive_list<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<usize>, D::Error> {
    let v = Vec::<usize>::deserialize(d)?;
    if v.is_empty() || v.contains(&0) {
        return Err(serde::de::Error::custom(
            "cell counts must be a nonempty list of positive integers",
        ));
    }
    Ok(v)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtrParams {
    #[serde(default, alias = "N")]
    pub n: Option<usize>,
    pub x: Vec<f64>,
    /// 1-based blocks; singletons when absent
    #[serde(default)]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[serde(deserialize_with = "count")]
    pub trials: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GtrParams {
    pub density: DensitySpec,
    #[serde(default)]
    pub cos_theta: Vec<f64>,
    #[serde(default)]
    pub x: Option<Vec<f64>>,
    #[serde(default)]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[serde(default, deserialize_with = "opt_count")]
    pub trials: Option<u64>,
    #[serde(default, deserialize_with = "opt_count")]
    pub mc_samples: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UniversalMode {
    #[default]
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniversalParams {
    pub x: Vec<f64>,
    #[serde(default)]
    pub blocks: Option<Vec<Vec<usize>>>,
    #[serde(deserialize_with = "positive_list")]
    pub n_c: Vec<usize>,
    #[serde(default)]
    pub mode: UniversalMode,
    #[serde(default, deserialize_with = "opt_count")]
    pub density_samples: Option<u64>,
    #[serde(default, deserialize_with = "opt_count")]
    pub point_samples: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereParams {
    /// ε of the three-direction counterexample
    #[serde(default)]
    pub epsilon: Option<f64>,
    /// custom chain; needs `initial` and a 1-D `density`
    #[serde(default)]
    pub initial: Option<BlochVector>,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default)]
    pub density: Option<DensitySpec>,
    #[serde(default, deserialize_with = "opt_count")]
    pub trials: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyParams {
    #[serde(default)]
    pub joints: Vec<JointTriple>,
    #[serde(default)]
    pub transitions: Vec<PairwiseTransitions>,
    #[serde(default)]
    pub tol: Option<f64>,
}

fn default_dims() -> Vec<usize> {
    vec![2, 3, 4, 5]
}

fn default_threshold() -> f64 {
    1e-12
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleParams {
    #[serde(default, deserialize_with = "opt_count")]
    pub states: Option<u64>,
    #[serde(default = "default_dims")]
    pub dims: Vec<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_true")]
    pub random_basis: bool,
    /// Test hook: shifts one Born probability by 1e-3.
    #[serde(default)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone)]
pub enum Params {
    Utr(UtrParams),
    Gtr(GtrParams),
    Universal(UniversalParams),
    Sphere(SphereParams),
    Classify(ClassifyParams),
    Oracle(OracleParams),
}

impl Params {
    pub fn kind(&self) -> Kind {
        match self {
            Params::Utr(_) => Kind::Utr,
            Params::Gtr(_) => Kind::Gtr,
            Params::Universal(_) => Kind::Universal,
            Params::Sphere(_) => Kind::Sphere,
            Params::Classify(_) => Kind::Classify,
            Params::Oracle(_) => Kind::Oracle,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub output: Option<OutputSpec>,
    pub params: Params,
}

fn take<T: DeserializeOwned>(obj: &mut Map<String, Value>, key: &str) -> Result<Option<T>, RunError> {
    obj.remove(key)
        .map(|v| serde_json::from_value(v).map_err(|e| schema(format!("field `{key}`: {e}"))))
        .transpose()
}

fn params<T: DeserializeOwned>(obj: Map<String, Value>) -> Result<T, RunError> {
    serde_json::from_value(Value::Object(obj)).map_err(|e| schema(e.to_string()))
}

impl ExperimentConfig {
    /// Parses a config. A bare classification bundle (an object without
    /// `kind`) is accepted when `default_kind` is `Classify`.
    pub fn parse(text: &str, default_kind: Option<Kind>) -> Result<Self, RunError> {
        let value: Value = serde_json::from_str(text).map_err(|e| schema(format!("malformed JSON: {e}")))?;
        let Value::Object(mut obj) = value else {
            return Err(schema("config must be a JSON object"));
        };
        let kind: Kind = match take(&mut obj, "kind")? {
            Some(k) => k,
            None if default_kind == Some(Kind::Classify) => {
                let bundle: ClassifyParams = params(obj)?;
                return Ok(Self {
                    schema_version: SCHEMA_VERSION,
                    seed: 0,
                    output: None,
                    params: Params::Classify(bundle),
                });
            }
            None => return Err(schema("missing field `kind`")),
        };
        let schema_version: u32 =
            take(&mut obj, "schema_version")?.ok_or_else(|| schema("missing field `schema_version`"))?;
        if schema_version != SCHEMA_VERSION {
            return Err(schema(format!(
                "unsupported schema_version {schema_version}, expected {SCHEMA_VERSION}"
            )));
        }
        let seed: Option<u64> = take(&mut obj, "seed")?;
        let seed = match (seed, kind) {
            (Some(s), _) => s,
            (None, Kind::Classify) => 0,
            (None, _) => return Err(schema("missing field `seed`")),
        };
        let output: Option<OutputSpec> = take(&mut obj, "output")?;
        let params = match kind {
            Kind::Utr => Params::Utr(params(obj)?),
            Kind::Gtr => Params::Gtr(params(obj)?),
            Kind::Universal => Params::Universal(params(obj)?),
            Kind::Sphere => Params::Sphere(params(obj)?),
            Kind::Classify => Params::Classify(params(obj)?),
            Kind::Oracle => Params::Oracle(params(obj)?),
        };
        Ok(Self {
            schema_version,
            seed,
            output,
            params,
        })
    }
}

/// Command-line overrides for one run.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub format: Option<Format>,
    /// Set by the kind-specific subcommands.
    pub expect_kind: Option<Kind>,
    /// Seed override, normally taken from `TRM_SEED`.
    pub seed_override: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub rendered: String,
    pub written_to: Option<PathBuf>,
}

/// A result table: JSON body plus CSV header and rows.
struct Report {
    json: Value,
    columns: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    check_failed: bool,
}

fn fmt_f(v: f64) -> String {
    // shortest round-trip representation, same as serde_json
    let mut s = String::new();
    write!(s, "{v:?}").unwrap();
    s
}

fn state(x: &[f64]) -> Result<BarycentricVector, RunError> {
    Ok(BarycentricVector::new(x.to_vec())?)
}

fn partition(n: usize, blocks: &Option<Vec<Vec<usize>>>) -> Result<OutcomePartition, RunError> {
    Ok(match blocks {
        Some(b) => OutcomePartition::from_one_based(n, b)?,
        None => OutcomePartition::singletons(n)?,
    })
}

fn run_utr(p: &UtrParams, seed: u64) -> Result<Report, RunError> {
    let x = state(&p.x)?;
    if let Some(n) = p.n {
        if n != x.dim() {
            return Err(schema(format!("N={n} but x has {} components", x.dim())));
        }
    }
    let part = partition(x.dim(), &p.blocks)?;
    let exact = utr::outcome_probabilities(&x, &part)?;
    let tally = utr::run_many(&x, &part, p.trials, seed)?;
    let freq = tally.frequencies();
    let sigma = tally.binomial_sigma(&exact);
    let rows = (0..part.len())
        .map(|k| {
            vec![
                (k + 1).to_string(),
                format!("{:?}", part.to_one_based()[k]).replace(' ', ""),
                fmt_f(exact[k]),
                fmt_f(freq[k]),
                tally.counts[k].to_string(),
                fmt_f(sigma[k]),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({
            "x": x,
            "blocks": part.to_one_based(),
            "trials": p.trials,
            "probabilities": exact,
            "frequencies": freq,
            "counts": tally.counts,
            "sigma": sigma,
            "max_z": tally.max_z(&exact),
        }),
        columns: vec!["block_index", "block", "probability", "frequency", "count", "sigma"],
        rows,
        check_failed: false,
    })
}

fn run_gtr(p: &GtrParams, seed: u64) -> Result<Report, RunError> {
    p.density.validate()?;
    if let Some(xs) = &p.x {
        let x = state(xs)?;
        let part = partition(x.dim(), &p.blocks)?;
        let est = density::transition_probabilities_nd(&x, &p.density, &part, p.mc_samples.unwrap_or(100_000), seed)?;
        let rows = (0..part.len())
            .map(|k| vec![(k + 1).to_string(), fmt_f(est.mean[k]), fmt_f(est.stderr[k])])
            .collect();
        return Ok(Report {
            json: json!({
                "x": x,
                "density": p.density,
                "blocks": part.to_one_based(),
                "probabilities": est.mean,
                "stderr": est.stderr,
            }),
            columns: vec!["block_index", "probability", "stderr"],
            rows,
            check_failed: false,
        });
    }
    if p.cos_theta.is_empty() {
        return Err(schema("gtr config needs `cos_theta` (1-D) or `x` (simplex)"));
    }
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (i, &c) in p.cos_theta.iter().enumerate() {
        let (plus, minus) = density::transition_probabilities_1d(c, &p.density)?;
        let tally = p
            .trials
            .map(|t| density::measure_1d_mc(c, &p.density, t, mc::derive_seed(seed, i as u64)))
            .transpose()?;
        let freq = tally.as_ref().map(|t| t.frequencies());
        for (k, (label, prob)) in [("+", plus), ("-", minus)].into_iter().enumerate() {
            rows.push(vec![
                fmt_f(c),
                label.to_string(),
                fmt_f(prob),
                freq.as_ref().map_or(String::new(), |f| fmt_f(f[k])),
            ]);
        }
        entries.push(json!({
            "cos_theta": c,
            "probabilities": [plus, minus],
            "frequencies": freq,
            "counts": tally.as_ref().map(|t| t.counts.clone()),
        }));
    }
    Ok(Report {
        json: json!({ "density": p.density, "points": entries }),
        columns: vec!["cos_theta", "outcome", "probability", "frequency"],
        rows,
        check_failed: false,
    })
}

fn run_universal(p: &UniversalParams, seed: u64) -> Result<Report, RunError> {
    let x = state(&p.x)?;
    let part = partition(x.dim(), &p.blocks)?;
    let exact_ok = |n_c: usize| match x.dim() {
        2 => n_c <= universal::MAX_ENUMERATION_CELLS,
        3 => n_c <= universal::MAX_TRIANGLE_CELLS,
        _ => false,
    };
    let mc_mode = ScanMode::MonteCarlo {
        density_samples: p.density_samples.unwrap_or(10_000),
        point_samples: p.point_samples.unwrap_or(1_000),
        seed,
    };
    let rows: Vec<ScanRow> = match p.mode {
        UniversalMode::Exact => universal::convergence_scan(&x, &p.n_c, &part, ScanMode::Exact)?,
        UniversalMode::Mc => universal::convergence_scan(&x, &p.n_c, &part, mc_mode)?,
        UniversalMode::Auto => {
            let mut out = Vec::new();
            for (pos, &n_c) in p.n_c.iter().enumerate() {
                let mode = if exact_ok(n_c) {
                    ScanMode::Exact
                } else {
                    match mc_mode {
                        ScanMode::MonteCarlo {
                            density_samples,
                            point_samples,
                            ..
                        } => ScanMode::MonteCarlo {
                            density_samples,
                            point_samples,
                            seed: mc::derive_seed(seed, pos as u64),
                        },
                        ScanMode::Exact => unreachable!(),
                    }
                };
                out.extend(universal::convergence_scan(&x, &[n_c], &part, mode)?);
            }
            out
        }
    };
    let max_dev = rows.iter().map(|r| r.deviation).fold(0.0, f64::max);
    let csv_rows = rows
        .iter()
        .map(|r| {
            vec![
                r.n_c.to_string(),
                r.outcome_index.to_string(),
                fmt_f(r.probability),
                fmt_f(r.stderr),
                fmt_f(r.deviation),
            ]
        })
        .collect();
    Ok(Report {
        json: json!({
            "x": x,
            "blocks": part.to_one_based(),
            "rows": rows,
            "max_deviation": max_dev,
        }),
        columns: vec!["n_c", "outcome_index", "probability", "stderr", "deviation"],
        rows: csv_rows,
        check_failed: false,
    })
}

fn run_sphere(p: &SphereParams, seed: u64) -> Result<Report, RunError> {
    let mut body = Map::new();
    let mut rows = Vec::new();
    if p.epsilon.is_none() && p.steps.is_empty() {
        return Err(schema("sphere config needs `epsilon` and/or `steps`"));
    }
    if let Some(eps) = p.epsilon {
        let report = sphere::counterexample(eps)?;
        let bundle = sphere::counterexample_bundle(eps)?;
        let class = checker::classify(&bundle, checker::DEFAULT_TOL)?;
        let j = report.joints;
        for (name, v) in [("pVW", j.pVW), ("pUW", j.pUW), ("pUcV", j.pUcV)] {
            rows.push(vec![name.to_string(), fmt_f(v), String::new()]);
        }
        rows.push(vec!["violation".into(), report.violation.to_string(), String::new()]);
        let mut triple = json!({ "report": report, "classification": class });
        if let Some(trials) = p.trials {
            let [w, v, u] = sphere::counterexample_directions();
            let rho = DensitySpec::Epsilon { epsilon: eps };
            let chains = [
                (
                    "pVW",
                    [Step::new(w, sphere::Sign::Plus), Step::new(v, sphere::Sign::Plus)],
                ),
                (
                    "pUW",
                    [Step::new(w, sphere::Sign::Plus), Step::new(u, sphere::Sign::Plus)],
                ),
                (
                    "pUcV",
                    [Step::new(v, sphere::Sign::Plus), Step::new(u, sphere::Sign::Minus)],
                ),
            ];
            let mut freqs = Map::new();
            for (i, (name, steps)) in chains.iter().enumerate() {
                let t = sphere::sequential_mc(&w, steps, &rho, trials, mc::derive_seed(seed, i as u64))?;
                let f = t.frequencies()[0];
                rows[i][2] = fmt_f(f);
                freqs.insert((*name).into(), json!(f));
            }
            triple["frequencies"] = Value::Object(freqs);
        }
        body.insert("counterexample".into(), triple);
    }
    if !p.steps.is_empty() {
        let initial = p.initial.ok_or_else(|| schema("`steps` needs `initial`"))?;
        let rho = p.density.clone().ok_or_else(|| schema("`steps` needs `density`"))?;
        let record = sphere::sequential_joint(&initial, &p.steps, &rho)?;
        let freq = p
            .trials
            .map(|t| sphere::sequential_mc(&initial, &p.steps, &rho, t, mc::derive_seed(seed, 99)))
            .transpose()?
            .map(|t| t.frequencies()[0]);
        rows.push(vec![
            "sequence".into(),
            fmt_f(record.probability),
            freq.map_or(String::new(), fmt_f),
        ]);
        body.insert("sequence".into(), json!({ "record": record, "frequency": freq }));
    }
    Ok(Report {
        json: Value::Object(body),
        columns: vec!["quantity", "value", "frequency"],
        rows,
        check_failed: false,
    })
}

fn run_classify(p: &ClassifyParams) -> Result<Report, RunError> {
    let bundle = Bundle {
        joints: p.joints.clone(),
        transitions: p.transitions.clone(),
    };
    let tol = p.tol.unwrap_or(checker::DEFAULT_TOL);
    let report = checker::classify(&bundle, tol)?;
    let mut rows = Vec::new();
    for (i, v) in report.joints.iter().enumerate() {
        let (verdict, value) = match v {
            checker::KolmogorovVerdict::Satisfied => ("satisfied", String::new()),
            checker::KolmogorovVerdict::Violated { margin } => ("violated", fmt_f(*margin)),
        };
        rows.push(vec!["joint".into(), (i + 1).to_string(), verdict.into(), value]);
    }
    for (i, v) in report.transitions.iter().enumerate() {
        let (verdict, value) = match v {
            checker::QubitVerdict::Embeddable => ("embeddable", String::new()),
            checker::QubitVerdict::NotEmbeddable { deficit } => ("not_embeddable", fmt_f(*deficit)),
        };
        rows.push(vec!["transition".into(), (i + 1).to_string(), verdict.into(), value]);
    }
    Ok(Report {
        json: serde_json::to_value(&report).expect("report serializes"),
        columns: vec!["entry", "index", "verdict", "value"],
        rows,
        check_failed: false,
    })
}

fn run_oracle(p: &OracleParams, seed: u64) -> Result<Report, RunError> {
    use rayon::prelude::*;
    let states = p.states.unwrap_or(1000);
    let mut per_dim = Vec::new();
    let mut rows = Vec::new();
    let mut overall: f64 = 0.0;
    for (di, &n) in p.dims.iter().enumerate() {
        if !(2..=6).contains(&n) {
            return Err(schema(format!("oracle dimensions must lie in 2..=6, got {n}")));
        }
        let dim_seed = mc::derive_seed(seed, di as u64);
        let reports = (0..states)
            .into_par_iter()
            .map(|s| {
                let mut rng = mc::shard_rng(dim_seed, s);
                let singles = OutcomePartition::singletons(n)?;
                let obs = if p.random_basis {
                    HilbertObservable::random(singles, &mut rng)?
                } else {
                    HilbertObservable::diagonal(singles)?
                };
                let psi = HilbertState::random(n, &mut rng)?;
                let fault = if p.inject_fault && di == 0 && s == 0 { 1e-3 } else { 0.0 };
                hilbert::correspondence_with_offset(&psi, &obs, fault)
            })
            .collect::<Result<Vec<_>, TrmError>>()?;
        let prob = reports.iter().map(|r| r.max_probability_deviation).fold(0.0, f64::max);
        let coll = reports.iter().map(|r| r.max_collapse_deviation).fold(0.0, f64::max);
        let partitions = reports.first().map_or(0, |r| r.partitions);
        overall = overall.max(prob).max(coll);
        rows.push(vec![
            n.to_string(),
            states.to_string(),
            partitions.to_string(),
            fmt_f(prob),
            fmt_f(coll),
        ]);
        per_dim.push(json!({
            "dim": n,
            "states": states,
            "partitions": partitions,
            "max_probability_deviation": prob,
            "max_collapse_deviation": coll,
        }));
    }
    let failed = overall > p.threshold;
    Ok(Report {
        json: json!({
            "threshold": p.threshold,
            "random_basis": p.random_basis,
            "fault_injected": p.inject_fault,
            "dims": per_dim,
            "max_deviation": overall,
            "pass": !failed,
        }),
        columns: vec![
            "dim",
            "states",
            "partitions",
            "max_probability_deviation",
            "max_collapse_deviation",
        ],
        rows,
        check_failed: failed,
    })
}

fn render(report: &Report, meta: &[(&str, String)], meta_json: Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&json!({ "meta": meta_json, "result": report.json }))
                .expect("json renders");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            for (k, v) in meta {
                writeln!(s, "# {k}={v}").unwrap();
            }
            let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
            w.write_record(&report.columns).expect("csv header");
            for r in &report.rows {
                w.write_record(r).expect("csv row");
            }
            s.push_str(&String::from_utf8(w.into_inner().expect("csv flush")).expect("utf8"));
            s
        }
    }
}

/// Runs a parsed config from its raw text (the text feeds the config hash).
pub fn run_text(text: &str, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let config = ExperimentConfig::parse(text, opts.expect_kind)?;
    let kind = config.params.kind();
    if let Some(expected) = opts.expect_kind {
        if expected != kind {
            return Err(schema(format!(
                "this subcommand runs `{}` configs, got `{}`",
                expected.as_str(),
                kind.as_str()
            )));
        }
    }
    let seed = opts.seed_override.unwrap_or(config.seed);
    let default_format = if kind == Kind::Universal && opts.expect_kind == Some(Kind::Universal) {
        Format::Csv
    } else {
        Format::Json
    };
    let format = opts
        .format
        .or(config.output.as_ref().and_then(|o| o.format))
        .unwrap_or(default_format);

    let work = || -> Result<Report, RunError> {
        match &config.params {
            Params::Utr(p) => run_utr(p, seed),
            Params::Gtr(p) => run_gtr(p, seed),
            Params::Universal(p) => run_universal(p, seed),
            Params::Sphere(p) => run_sphere(p, seed),
            Params::Classify(p) => run_classify(p),
            Params::Oracle(p) => run_oracle(p, seed),
        }
    };
    let report = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| RunError::Domain(TrmError::Domain(format!("thread pool: {e}"))))?
            .install(work)?,
        None => work()?,
    };

    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let version = env!("CARGO_PKG_VERSION");
    let meta = vec![
        ("library", "trm-core".to_string()),
        ("version", version.to_string()),
        ("schema_version", SCHEMA_VERSION.to_string()),
        ("kind", kind.as_str().to_string()),
        ("config_sha256", hash.clone()),
        ("seed", seed.to_string()),
        ("seed_overridden", opts.seed_override.is_some().to_string()),
    ];
    let meta_json = json!({
        "library": "trm-core",
        "version": version,
        "schema_version": SCHEMA_VERSION,
        "kind": kind.as_str(),
        "config_sha256": hash,
        "seed": seed,
        "seed_overridden": opts.seed_override.is_some(),
    });
    let rendered = render(&report, &meta, meta_json, format);

    let target = opts
        .out
        .clone()
        .or_else(|| config.output.as_ref().and_then(|o| o.path.clone()));
    if let Some(path) = &target {
        std::fs::write(path, &rendered).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(RunOutcome {
        exit_code: if report.check_failed {
            EXIT_CHECK_FAILED
        } else {
            EXIT_OK
        },
        rendered,
        written_to: target,
    })
}

/// Reads and runs a config file.
pub fn run(config_path: &Path, opts: &RunOptions) -> Result<RunOutcome, RunError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| schema(format!("cannot read {}: {e}", config_path.display())))?;
    run_text(&text, opts)
}

/// Reads `TRM_SEED` if set.
pub fn seed_from_env() -> Result<Option<u64>, RunError> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| schema(format!("{SEED_ENV}={v} is not a 64-bit unsigned integer"))),
        Err(_) => Ok(None),
    }
}
