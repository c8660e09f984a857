//! Scenario files, result CSVs, and the experiment runner behind the CLI.
//!
//! A scenario is a JSON object with strict keys (unknown keys are errors, so
//! typos fail loudly instead of silently corrupting a sweep):
//!
//! ```json
//! {
//!   "K": 10, "N": 1000, "M": 100, "Z": [10, 10, ...], "F": 1.0,
//!   "popularity": {"zipf": 1.0},
//!   "scheme": "hybrid",
//!   "placement": {"hybrid": {"m1": 37, "n1": 352}},
//!   "sweep": {"axis": "alpha", "from": 0.5, "to": 1.6, "step": 0.1},
//!   "slots": 2000, "seed": 1, "out": "results.csv"
//! }
//! ```
//!
//! `popularity` is either `{"zipf": a}` or `{"matrix": [[...], ...]}` with `N`
//! rows of `K` per-SBS probabilities. Heterogeneous placements use 1-based
//! content and SBS indices:
//!
//! ```json
//! {"hetero": {"groups": [{"members": [1,2,3,4], "capacity": 1,
//!                         "contents": [1,2]}],
//!             "uncoded": [[3],[3],[4],[4]]}}
//! ```
//!
//! Every run writes one results CSV (a fixed header, one row per evaluated
//! configuration, fields echoing the full input so rows are self-describing)
//! plus `<out>.meta.json` with the non-deterministic run metadata (timing,
//! thread count, version). The CSV itself is byte-identical for identical
//! scenario + seed, serial or parallel.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::model::{
    validate, zipf_popularity, DemandMatrix, HeteroPlacement, HybridPlacement, ModelError,
    Placement, PopularityMatrix, SbsGroup, SystemConfig,
};
use crate::optimizer::{self, HeteroSearchOptions, OptimizeError, SearchResult};
use crate::oracle::{self, OracleError};
use crate::simulator::{self, SimulatorError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// CLI exit code: 2 parse, 3 validation, 4 instance-too-large, 1 io.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Parse(_) => 2,
            ScenarioError::Validation(_) => 3,
            ScenarioError::TooLarge(_) => 4,
            ScenarioError::Io(_) => 1,
        }
    }
}

impl From<ModelError> for ScenarioError {
    fn from(e: ModelError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

impl From<OptimizeError> for ScenarioError {
    fn from(e: OptimizeError) -> Self {
        match e {
            OptimizeError::InstanceTooLarge(m) => ScenarioError::TooLarge(m),
            other => ScenarioError::Validation(other.to_string()),
        }
    }
}

impl From<AnalysisError> for ScenarioError {
    fn from(e: AnalysisError) -> Self {
        ScenarioError::Validation(e.to_string())
    }
}

impl From<SimulatorError> for ScenarioError {
    fn from(e: SimulatorError) -> Self {
        match e {
            SimulatorError::InstanceTooLarge(m) => ScenarioError::TooLarge(m),
            other => ScenarioError::Validation(other.to_string()),
        }
    }
}

impl From<OracleError> for ScenarioError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::InstanceTooLarge(m) => ScenarioError::TooLarge(m),
            OracleError::Invalid(m) => ScenarioError::Validation(m),
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "Z")]
    pub z: Vec<usize>,
    #[serde(rename = "F", default = "default_f")]
    pub f: f64,
    pub popularity: PopularitySpec,
    #[serde(default)]
    pub scheme: SchemeSpec,
    #[serde(default)]
    pub placement: Option<PlacementSpec>,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
    #[serde(default)]
    pub slots: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub trace: bool,
    #[serde(default)]
    pub hetero_options: Option<HeteroOptionsSpec>,
}

fn default_f() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopularitySpec {
    #[serde(default)]
    pub zipf: Option<f64>,
    #[serde(default)]
    pub matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeSpec {
    #[default]
    Hybrid,
    PureCoded,
    PureUncoded,
    Hetero,
}

impl SchemeSpec {
    fn label(&self) -> &'static str {
        match self {
            SchemeSpec::Hybrid => "hybrid",
            SchemeSpec::PureCoded => "pure-coded",
            SchemeSpec::PureUncoded => "pure-uncoded",
            SchemeSpec::Hetero => "hetero",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementSpec {
    #[serde(default)]
    pub hybrid: Option<HybridSpec>,
    #[serde(default)]
    pub hetero: Option<HeteroSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HybridSpec {
    pub m1: usize,
    pub n1: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeteroSpec {
    pub groups: Vec<GroupSpec>,
    /// Per SBS, 1-based content indices cached uncoded.
    pub uncoded: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    /// 1-based SBS indices.
    pub members: Vec<usize>,
    pub capacity: usize,
    /// 1-based content indices.
    pub contents: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub axis: String,
    #[serde(default)]
    pub from: Option<f64>,
    #[serde(default)]
    pub to: Option<f64>,
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default)]
    pub vectors: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub schemes: Option<Vec<SchemeSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeteroOptionsSpec {
    #[serde(default)]
    pub max_groups: Option<usize>,
    #[serde(default)]
    pub single_group: bool,
    #[serde(default)]
    pub prune_group_contents: bool,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn config(&self) -> Result<SystemConfig, ScenarioError> {
        Ok(SystemConfig::new(self.k, self.n, self.m, self.z.clone(), self.f)?)
    }

    pub fn popularity_with_alpha(
        &self,
        alpha_override: Option<f64>,
    ) -> Result<(PopularityMatrix, Option<f64>), ScenarioError> {
        match (&self.popularity.zipf, &self.popularity.matrix) {
            (Some(alpha), None) => {
                let a = alpha_override.unwrap_or(*alpha);
                Ok((zipf_popularity(self.n, a, self.k)?, Some(a)))
            }
            (None, Some(rows)) => {
                if alpha_override.is_some() {
                    return Err(ScenarioError::Validation(
                        "an alpha sweep needs a zipf popularity, not an explicit matrix".into(),
                    ));
                }
                if rows.len() != self.n {
                    return Err(ScenarioError::Validation(format!(
                        "popularity matrix has {} rows, expected N = {}",
                        rows.len(),
                        self.n
                    )));
                }
                Ok((PopularityMatrix::from_rows(rows)?, None))
            }
            _ => Err(ScenarioError::Validation(
                "popularity must set exactly one of \"zipf\" or \"matrix\"".into(),
            )),
        }
    }

    pub fn placement_model(&self, config: &SystemConfig) -> Result<Placement, ScenarioError> {
        let spec = self.placement.as_ref().ok_or_else(|| {
            ScenarioError::Validation("this mode requires a \"placement\"".into())
        })?;
        match (&spec.hybrid, &spec.hetero) {
            (Some(h), None) => Ok(Placement::Hybrid(HybridPlacement::new(h.m1, h.n1))),
            (None, Some(h)) => Ok(Placement::Hetero(hetero_from_spec(h, config)?)),
            _ => Err(ScenarioError::Validation(
                "placement must set exactly one of \"hybrid\" or \"hetero\"".into(),
            )),
        }
    }

    fn hetero_search_options(&self) -> HeteroSearchOptions {
        match &self.hetero_options {
            None => HeteroSearchOptions::default(),
            Some(o) => HeteroSearchOptions {
                max_groups: o.max_groups,
                single_group: o.single_group,
                prune_group_contents: o.prune_group_contents,
                keep_log: false,
            },
        }
    }
}

fn one_based(v: usize, bound: usize, what: &str) -> Result<usize, ScenarioError> {
    if v < 1 || v > bound {
        return Err(ScenarioError::Validation(format!(
            "{what} index {v} out of range 1..={bound}"
        )));
    }
    Ok(v - 1)
}

fn hetero_from_spec(
    spec: &HeteroSpec,
    config: &SystemConfig,
) -> Result<HeteroPlacement, ScenarioError> {
    let mut groups = Vec::with_capacity(spec.groups.len());
    for g in &spec.groups {
        let mut members = g
            .members
            .iter()
            .map(|&c| one_based(c, config.sbs_count(), "SBS"))
            .collect::<Result<Vec<_>, _>>()?;
        members.sort_unstable();
        let mut contents = g
            .contents
            .iter()
            .map(|&x| one_based(x, config.library_size(), "content"))
            .collect::<Result<Vec<_>, _>>()?;
        contents.sort_unstable();
        groups.push(SbsGroup { members, coded_capacity: g.capacity, contents });
    }
    let mut uncoded = Vec::with_capacity(spec.uncoded.len());
    for list in &spec.uncoded {
        let mut l = list
            .iter()
            .map(|&x| one_based(x, config.library_size(), "content"))
            .collect::<Result<Vec<_>, _>>()?;
        l.sort_unstable();
        uncoded.push(l);
    }
    Ok(HeteroPlacement { groups, uncoded })
}

// ---------------------------------------------------------------------------
// Result rows
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "mode,scheme,K,N,M,Z,F,alpha,sweep_axis,sweep_value,m1,n1,placement,candidates,pruned,r1,r2,r,sim_r1,sim_se_r1,sim_r2,sim_se_r2,sim_r,sim_se_r,slots,seed,exact_r";

#[derive(Debug, Clone)]
struct Row {
    mode: &'static str,
    scheme: &'static str,
    k: usize,
    n: usize,
    m: usize,
    z: String,
    f: f64,
    alpha: Option<f64>,
    sweep_axis: String,
    sweep_value: String,
    m1: Option<usize>,
    n1: Option<usize>,
    placement: String,
    candidates: Option<u64>,
    pruned: Option<bool>,
    r1: Option<f64>,
    r2: Option<f64>,
    r: Option<f64>,
    sim: Option<SimColumns>,
    slots: Option<usize>,
    seed: Option<u64>,
    exact_r: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct SimColumns {
    r1: f64,
    se_r1: f64,
    r2: f64,
    se_r2: f64,
    r: f64,
    se_r: f64,
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

impl Row {
    fn csv_line(&self) -> String {
        let mut s = String::new();
        let sim = self.sim.as_ref();
        let _ = write!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.mode,
            self.scheme,
            self.k,
            self.n,
            self.m,
            self.z,
            self.f,
            opt(&self.alpha),
            self.sweep_axis,
            self.sweep_value,
            opt(&self.m1),
            opt(&self.n1),
            self.placement,
            opt(&self.candidates),
            opt(&self.pruned),
            opt(&self.r1),
            opt(&self.r2),
            opt(&self.r),
            opt(&sim.map(|x| x.r1)),
            opt(&sim.map(|x| x.se_r1)),
            opt(&sim.map(|x| x.r2)),
            opt(&sim.map(|x| x.se_r2)),
            opt(&sim.map(|x| x.r)),
            opt(&sim.map(|x| x.se_r)),
            opt(&self.slots),
            opt(&self.seed),
            opt(&self.exact_r),
        );
        s
    }
}

fn z_label(z: &[usize]) -> String {
    z.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("|")
}

/// Compact 1-based text encoding of a placement for the CSV `placement` cell.
pub fn placement_label(p: &Placement) -> String {
    match p {
        Placement::Hybrid(h) => format!("m1={};n1={}", h.m1, h.n1),
        Placement::Hetero(h) => {
            let mut parts: Vec<String> = h
                .groups
                .iter()
                .map(|g| {
                    format!(
                        "g(members={};mg={};contents={})",
                        join1(&g.members),
                        g.coded_capacity,
                        join1(&g.contents)
                    )
                })
                .collect();
            let y: Vec<String> = h.uncoded.iter().map(|l| join1(l)).collect();
            parts.push(format!("y={}", y.join("|")));
            parts.join(";")
        }
    }
}

fn join1(xs: &[usize]) -> String {
    xs.iter().map(|x| (x + 1).to_string()).collect::<Vec<_>>().join("+")
}

// ---------------------------------------------------------------------------
// Runner
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    Simulate,
    Optimize,
    Sweep,
}

impl Mode {
    fn label(&self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::Simulate => "simulate",
            Mode::Optimize => "optimize",
            Mode::Sweep => "sweep",
        }
    }
}

/// CLI-level overrides applied on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunOverrides {
    pub seed: Option<u64>,
    pub slots: Option<usize>,
    pub out: Option<PathBuf>,
    pub exact_oracle: bool,
}

#[derive(Debug)]
pub struct RunOutput {
    pub csv: String,
    pub rows: usize,
    pub out_path: PathBuf,
    /// Per-slot trace CSV, when the scenario asked for one.
    pub trace_csv: Option<String>,
}

fn effective_seed(scenario: &Scenario, ov: &RunOverrides) -> u64 {
    ov.seed.or(scenario.seed).unwrap_or(0)
}

fn effective_slots(scenario: &Scenario, ov: &RunOverrides) -> Option<usize> {
    ov.slots.or(scenario.slots)
}

/// Execute a scenario in the given mode and return the results CSV.
pub fn run_scenario(
    mode: Mode,
    scenario: &Scenario,
    ov: &RunOverrides,
) -> Result<RunOutput, ScenarioError> {
    let seed = effective_seed(scenario, ov);
    let out_path = ov
        .out
        .clone()
        .or_else(|| scenario.out.clone())
        .unwrap_or_else(|| PathBuf::from("results.csv"));

    let mut rows = Vec::new();
    let mut trace_csv = None;
    match mode {
        Mode::Analyze => {
            let config = scenario.config()?;
            let (pop, alpha) = scenario.popularity_with_alpha(None)?;
            let placement = scenario.placement_model(&config)?;
            rows.push(report_row(
                mode,
                scenario,
                &config,
                &pop,
                alpha,
                scenario.scheme,
                &placement,
                None,
                None,
                seed,
                None,
                ov.exact_oracle,
            )?);
        }
        Mode::Simulate => {
            let config = scenario.config()?;
            let (pop, alpha) = scenario.popularity_with_alpha(None)?;
            let placement = scenario.placement_model(&config)?;
            let slots = effective_slots(scenario, ov).unwrap_or(2000);
            if scenario.trace {
                let rep = simulator::simulate_traced(&config, &pop, &placement, slots, seed)?;
                let mut buf = Vec::new();
                rep.write_trace_csv(&mut buf)?;
                trace_csv = Some(String::from_utf8(buf).expect("trace csv is utf-8"));
            }
            rows.push(report_row(
                mode,
                scenario,
                &config,
                &pop,
                alpha,
                scenario.scheme,
                &placement,
                None,
                Some(slots),
                seed,
                None,
                ov.exact_oracle,
            )?);
        }
        Mode::Optimize => {
            let config = scenario.config()?;
            let (pop, alpha) = scenario.popularity_with_alpha(None)?;
            let result = run_optimizer(scenario, &config, &pop, scenario.scheme)?;
            rows.push(report_row(
                mode,
                scenario,
                &config,
                &pop,
                alpha,
                scenario.scheme,
                &result.placement,
                Some(&result),
                effective_slots(scenario, ov),
                seed,
                None,
                ov.exact_oracle,
            )?);
        }
        Mode::Sweep => {
            rows = run_sweep(scenario, ov, seed)?;
        }
    }

    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(&row.csv_line());
        csv.push('\n');
    }
    Ok(RunOutput { csv, rows: rows.len(), out_path, trace_csv })
}

/// Execute a scenario file and write `out`, `out.meta.json`, and (optionally)
/// `out.trace.csv`.
pub fn run_file(mode: Mode, path: &Path, ov: &RunOverrides) -> Result<RunOutput, ScenarioError> {
    let started = Instant::now();
    let scenario = Scenario::from_file(path)?;
    let output = run_scenario(mode, &scenario, ov)?;
    std::fs::write(&output.out_path, &output.csv)?;
    if let Some(trace) = &output.trace_csv {
        std::fs::write(trace_path(&output.out_path), trace)?;
    }
    let meta = serde_json::json!({
        "command": mode.label(),
        "scenario": path.display().to_string(),
        "seed": effective_seed(&scenario, ov),
        "slots": effective_slots(&scenario, ov),
        "threads": rayon::current_num_threads(),
        "version": env!("CARGO_PKG_VERSION"),
        "elapsed_ms": started.elapsed().as_millis() as u64,
        "rows": output.rows,
    });
    std::fs::write(
        meta_path(&output.out_path),
        serde_json::to_string_pretty(&meta).expect("metadata serializes"),
    )?;
    Ok(output)
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".meta.json");
    PathBuf::from(p)
}

pub fn trace_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".trace.csv");
    PathBuf::from(p)
}

fn run_optimizer(
    scenario: &Scenario,
    config: &SystemConfig,
    pop: &PopularityMatrix,
    scheme: SchemeSpec,
) -> Result<SearchResult, ScenarioError> {
    let result = match scheme {
        SchemeSpec::Hybrid => optimizer::optimize_hybrid(config, pop)?,
        SchemeSpec::PureCoded => {
            if pop.is_homogeneous() {
                optimizer::optimize_pure_coded(config, pop)?
            } else {
                optimizer::optimize_pure_coded_hetero(
                    config,
                    pop,
                    &scenario.hetero_search_options(),
                )?
            }
        }
        SchemeSpec::PureUncoded => optimizer::optimize_pure_uncoded(config, pop)?,
        SchemeSpec::Hetero => {
            optimizer::optimize_hetero_with(config, pop, &scenario.hetero_search_options())?
        }
    };
    Ok(result)
}

#[allow(clippy::too_many_arguments)]
fn report_row(
    mode: Mode,
    scenario: &Scenario,
    config: &SystemConfig,
    pop: &PopularityMatrix,
    alpha: Option<f64>,
    scheme: SchemeSpec,
    placement: &Placement,
    search: Option<&SearchResult>,
    slots: Option<usize>,
    seed: u64,
    sweep: Option<(&str, String)>,
    exact_oracle: bool,
) -> Result<Row, ScenarioError> {
    let violations = validate(config, pop, placement);
    if !violations.is_empty() {
        let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(ScenarioError::Validation(msgs.join("; ")));
    }
    let report = match search {
        Some(s) => s.report.clone(),
        None => analysis::total_load(config, pop, placement)?,
    };
    let sim = match slots {
        Some(slots) => {
            let rep = simulator::simulate(config, pop, placement, slots, seed)?;
            Some(SimColumns {
                r1: rep.mean_r1,
                se_r1: rep.se_r1,
                r2: rep.mean_r2,
                se_r2: rep.se_r2,
                r: rep.mean_r,
                se_r: rep.se_r,
            })
        }
        None => None,
    };
    let exact_r = if exact_oracle {
        Some(oracle::exact_expected_load(config, pop, placement)?)
    } else {
        None
    };
    let (m1, n1) = match placement {
        Placement::Hybrid(h) => (Some(h.m1), Some(h.n1)),
        Placement::Hetero(_) => (None, None),
    };
    let (sweep_axis, sweep_value) = match sweep {
        Some((axis, value)) => (axis.to_string(), value),
        None => (String::new(), String::new()),
    };
    Ok(Row {
        mode: mode.label(),
        scheme: scheme.label(),
        k: config.sbs_count(),
        n: config.library_size(),
        m: config.cache_capacity(),
        z: z_label(config.users()),
        f: scenario.f,
        alpha,
        sweep_axis,
        sweep_value,
        m1,
        n1,
        placement: placement_label(placement),
        candidates: search.map(|s| s.candidates),
        pruned: search.map(|s| s.pruned),
        r1: Some(report.r1),
        r2: Some(report.r2),
        r: Some(report.r),
        sim,
        slots: sim.map(|_| slots.unwrap_or(0)),
        seed: sim.map(|_| seed),
        exact_r,
    })
}

/// Sample standard deviation of a user-count vector, the sweep key used for
/// Z-vector sweeps.
pub fn z_sigma(z: &[usize]) -> f64 {
    if z.len() < 2 {
        return 0.0;
    }
    let mean = z.iter().sum::<usize>() as f64 / z.len() as f64;
    let ss: f64 = z.iter().map(|&v| (v as f64 - mean).powi(2)).sum();
    (ss / (z.len() - 1) as f64).sqrt()
}

enum SweepPoint {
    Alpha(f64),
    CacheSize(usize),
    Users(Vec<usize>),
}

fn sweep_points(scenario: &Scenario, spec: &SweepSpec) -> Result<Vec<SweepPoint>, ScenarioError> {
    match spec.axis.as_str() {
        "alpha" => {
            let (from, to, step) = range_params(spec)?;
            if step <= 0.0 {
                return Err(ScenarioError::Validation("alpha sweep step must be positive".into()));
            }
            let mut points = Vec::new();
            let mut i = 0u32;
            loop {
                let a = from + f64::from(i) * step;
                if a > to + 1e-9 {
                    break;
                }
                points.push(SweepPoint::Alpha(a));
                i += 1;
            }
            Ok(points)
        }
        "m" => {
            let (from, to, step) = range_params(spec)?;
            let step = step as usize;
            if step == 0 {
                return Err(ScenarioError::Validation("m sweep step must be positive".into()));
            }
            Ok((from as usize..=to as usize).step_by(step).map(SweepPoint::CacheSize).collect())
        }
        "z" => {
            let vectors = spec
                .vectors
                .as_ref()
                .ok_or_else(|| ScenarioError::Validation("z sweep requires \"vectors\"".into()))?;
            for v in vectors {
                if v.len() != scenario.k {
                    return Err(ScenarioError::Validation(format!(
                        "z sweep vector {v:?} has {} entries, expected K = {}",
                        v.len(),
                        scenario.k
                    )));
                }
            }
            Ok(vectors.iter().cloned().map(SweepPoint::Users).collect())
        }
        other => Err(ScenarioError::Validation(format!(
            "unknown sweep axis {other:?}; expected \"alpha\", \"m\", or \"z\""
        ))),
    }
}

fn range_params(spec: &SweepSpec) -> Result<(f64, f64, f64), ScenarioError> {
    match (spec.from, spec.to, spec.step) {
        (Some(f), Some(t), Some(s)) => Ok((f, t, s)),
        _ => Err(ScenarioError::Validation(format!(
            "{} sweep requires \"from\", \"to\", and \"step\"",
            spec.axis
        ))),
    }
}

fn run_sweep(scenario: &Scenario, ov: &RunOverrides, seed: u64) -> Result<Vec<Row>, ScenarioError> {
    let spec = scenario
        .sweep
        .as_ref()
        .ok_or_else(|| ScenarioError::Validation("sweep mode requires a \"sweep\" object".into()))?;
    let schemes = spec
        .schemes
        .clone()
        .unwrap_or_else(|| vec![SchemeSpec::Hybrid, SchemeSpec::PureCoded, SchemeSpec::PureUncoded]);
    let points = sweep_points(scenario, spec)?;
    let slots = effective_slots(scenario, ov);

    // Points evaluate in parallel; collection keeps point order, so the file
    // is the same regardless of thread count.
    let results: Vec<Result<Vec<Row>, ScenarioError>> = points
        .par_iter()
        .map(|point| {
            let mut config = scenario.config()?;
            let mut alpha_override = None;
            let (axis, value) = match point {
                SweepPoint::Alpha(a) => {
                    alpha_override = Some(*a);
                    ("alpha", format!("{a}"))
                }
                SweepPoint::CacheSize(m) => {
                    config = SystemConfig::new(
                        scenario.k,
                        scenario.n,
                        *m,
                        scenario.z.clone(),
                        scenario.f,
                    )?;
                    ("m", format!("{m}"))
                }
                SweepPoint::Users(z) => {
                    config = SystemConfig::new(
                        scenario.k,
                        scenario.n,
                        scenario.m,
                        z.clone(),
                        scenario.f,
                    )?;
                    ("z", format!("{}", z_sigma(z)))
                }
            };
            let (pop, alpha) = scenario.popularity_with_alpha(alpha_override)?;
            let mut rows = Vec::with_capacity(schemes.len());
            for &scheme in &schemes {
                let result = run_optimizer(scenario, &config, &pop, scheme)?;
                rows.push(report_row(
                    Mode::Sweep,
                    scenario,
                    &config,
                    &pop,
                    alpha,
                    scheme,
                    &result.placement,
                    Some(&result),
                    slots,
                    seed,
                    Some((axis, value.clone())),
                    ov.exact_oracle,
                )?);
            }
            Ok(rows)
        })
        .collect();

    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// Delivery walkthrough
// ---------------------------------------------------------------------------

/// The fixed walkthrough scenario: 3 SBSs with (8, 4, 6) users, a 26-content
/// library `A..Z` sorted by popularity, cache for 5 contents of which 3 are
/// fully replicated and `D..I` run the coded scheme (`T = 1`).
pub fn walkthrough_config() -> (SystemConfig, PopularityMatrix, Placement) {
    let config = SystemConfig::new(3, 26, 5, vec![8, 4, 6], 1.0).expect("static config");
    let pop = zipf_popularity(26, 1.0, 3).expect("static popularity");
    (config, pop, Placement::Hybrid(HybridPlacement::new(3, 9)))
}

fn walkthrough_demands() -> DemandMatrix {
    DemandMatrix {
        per_sbs: vec![
            letters_to_contents("ADEFJJBC").expect("static demands"),
            letters_to_contents("DGKA").expect("static demands"),
            letters_to_contents("ELMABB").expect("static demands"),
        ],
    }
}

/// Parse demand letters (`A` = the most popular content) into 0-based
/// content indices.
pub fn letters_to_contents(s: &str) -> Result<Vec<usize>, ScenarioError> {
    s.chars()
        .map(|ch| {
            let up = ch.to_ascii_uppercase();
            if up.is_ascii_uppercase() {
                Ok(up as usize - 'A' as usize)
            } else {
                Err(ScenarioError::Validation(format!("demand letters must be A..Z, got {ch:?}")))
            }
        })
        .collect()
}

fn content_letter(content: usize) -> char {
    (b'A' + content as u8) as char
}

/// Text walkthrough of one delivery slot on the fixed scenario: per-SBS
/// request classification, per-step queue occupancy, and the slot's loads.
/// The default demand matrix produces step occupancies 3, 2, 1.
pub fn emit_fig1_walkthrough(demands: Option<DemandMatrix>) -> Result<String, ScenarioError> {
    let (config, pop, placement) = walkthrough_config();
    let demands = demands.unwrap_or_else(walkthrough_demands);
    demands.check(&config)?;
    let plan = simulator::DeliveryPlan::new(&config, &pop, &placement)?;
    let outcome = simulator::run_slot(demands, &plan);

    let (m1, n1) = match &placement {
        Placement::Hybrid(h) => (h.m1, h.n1),
        Placement::Hetero(_) => unreachable!("walkthrough placement is hybrid"),
    };
    let mut s = String::new();
    let _ = writeln!(
        s,
        "delivery walkthrough: K=3 SBSs, N=26 contents (A..Z by popularity), M=5, Z=(8,4,6)"
    );
    let _ = writeln!(
        s,
        "placement: fully cached A..{} | coded {}..{} (T=1) | uncached {}..Z",
        content_letter(m1 - 1),
        content_letter(m1),
        content_letter(n1 - 1),
        content_letter(n1)
    );
    let _ = writeln!(s);
    for (c, dvec) in outcome.demands.per_sbs.iter().enumerate() {
        let mut local = Vec::new();
        let mut coded = Vec::new();
        let mut uncoded = Vec::new();
        for &d in dvec {
            let letter = content_letter(d);
            if d < m1 {
                local.push(letter);
            } else if d < n1 {
                if !coded.contains(&letter) {
                    coded.push(letter);
                }
            } else if !uncoded.contains(&letter) {
                uncoded.push(letter);
            }
        }
        let _ = writeln!(
            s,
            "SBS {}: demands {} | local hits: {} | coded queue: {} | uncoded: {}",
            c + 1,
            dvec.iter().map(|&d| content_letter(d)).collect::<String>(),
            fmt_letters(&local),
            fmt_letters(&coded),
            fmt_letters(&uncoded),
        );
    }
    let _ = writeln!(s);
    let lengths = &outcome.queue_lengths[0];
    let _ = writeln!(s, "coded delivery steps (non-empty queues per step):");
    if outcome.coded_steps == 0 {
        let _ = writeln!(s, "  none (no coded requests)");
    }
    for i in 1..=outcome.coded_steps {
        let occupied = lengths.iter().filter(|&&l| l >= i).count();
        let _ = writeln!(
            s,
            "  step {i}: {occupied} non-empty queue{}",
            if occupied == 1 { "" } else { "s" }
        );
    }
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "loads (units of F): coded r1 = {:.6}, uncoded broadcasts r2 = {}, total r = {:.6}; local hits {}",
        outcome.coded_load,
        outcome.uncoded_broadcasts,
        outcome.total_load(),
        outcome.local_hits
    );
    Ok(s)
}

fn fmt_letters(letters: &[char]) -> String {
    if letters.is_empty() {
        "-".to_string()
    } else {
        letters.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_scenario_json() -> String {
        r#"{
            "K": 3, "N": 20, "M": 4, "Z": [2, 3, 1],
            "popularity": {"zipf": 1.0},
            "placement": {"hybrid": {"m1": 1, "n1": 10}},
            "seed": 7
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_analyzes() {
        let scenario = Scenario::from_json(&base_scenario_json()).unwrap();
        let out = run_scenario(Mode::Analyze, &scenario, &RunOverrides::default()).unwrap();
        assert_eq!(out.rows, 1);
        let mut lines = out.csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("analyze,hybrid,3,20,4,2|3|1,1,1,"), "{row}");
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let json =
            r#"{"K": 2, "N": 4, "M": 1, "Z": [1, 1], "popularity": {"zipf": 1.0}, "typo": 3}"#;
        match Scenario::from_json(json) {
            Err(ScenarioError::Parse(_)) => {}
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn wrong_z_length_is_validation_error() {
        let json = r#"{"K": 3, "N": 4, "M": 1, "Z": [1, 1], "popularity": {"zipf": 1.0}}"#;
        let scenario = Scenario::from_json(json).unwrap();
        let err = run_scenario(Mode::Optimize, &scenario, &RunOverrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn hetero_too_large_maps_to_exit_4() {
        let json = r#"{
            "K": 3, "N": 20, "M": 4, "Z": [1, 1, 1],
            "popularity": {"zipf": 1.0}, "scheme": "hetero"
        }"#;
        let scenario = Scenario::from_json(json).unwrap();
        let err = run_scenario(Mode::Optimize, &scenario, &RunOverrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn analyze_requires_placement() {
        let json = r#"{"K": 2, "N": 4, "M": 1, "Z": [1, 1], "popularity": {"zipf": 1.0}}"#;
        let scenario = Scenario::from_json(json).unwrap();
        let err = run_scenario(Mode::Analyze, &scenario, &RunOverrides::default()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn alpha_sweep_produces_scheme_rows_in_order() {
        let json = r#"{
            "K": 3, "N": 30, "M": 6, "Z": [2, 2, 2],
            "popularity": {"zipf": 1.0},
            "sweep": {"axis": "alpha", "from": 0.5, "to": 0.7, "step": 0.1}
        }"#;
        let scenario = Scenario::from_json(json).unwrap();
        let out = run_scenario(Mode::Sweep, &scenario, &RunOverrides::default()).unwrap();
        // 3 alpha points x 3 schemes.
        assert_eq!(out.rows, 9);
        let body: Vec<&str> = out.csv.lines().skip(1).collect();
        assert!(body[0].contains(",alpha,0.5,"), "{}", body[0]);
        assert!(body[0].contains("hybrid"));
        assert!(body[1].contains("pure-coded"));
        assert!(body[2].contains("pure-uncoded"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let json = r#"{
            "K": 3, "N": 30, "M": 6, "Z": [1, 2, 3],
            "popularity": {"zipf": 1.0}, "slots": 50,
            "sweep": {"axis": "alpha", "from": 0.8, "to": 1.0, "step": 0.1}
        }"#;
        let scenario = Scenario::from_json(json).unwrap();
        let a = run_scenario(Mode::Sweep, &scenario, &RunOverrides::default()).unwrap();
        let b = run_scenario(Mode::Sweep, &scenario, &RunOverrides::default()).unwrap();
        assert_eq!(a.csv, b.csv);
    }

    #[test]
    #[allow(clippy::approx_constant)] // reference-table sigmas, not constants
    fn z_sigma_matches_reference_values() {
        assert_eq!(z_sigma(&[10; 10]), 0.0);
        let s = z_sigma(&[8, 9, 9, 9, 9, 10, 11, 11, 12, 12]);
        assert!((s - 1.4142).abs() < 1e-4);
        let s = z_sigma(&[1, 1, 1, 1, 1, 5, 15, 20, 25, 30]);
        assert!((s - 11.4504).abs() < 1e-4);
    }

    #[test]
    fn walkthrough_default_has_step_counts_3_2_1() {
        let text = emit_fig1_walkthrough(None).unwrap();
        assert!(text.contains("step 1: 3 non-empty queues"), "{text}");
        assert!(text.contains("step 2: 2 non-empty queues"), "{text}");
        assert!(text.contains("step 3: 1 non-empty queue"), "{text}");
        assert!(text.contains("uncoded broadcasts r2 = 4"), "{text}");
    }

    #[test]
    fn walkthrough_all_head_content_hits_locally() {
        let demands = DemandMatrix { per_sbs: vec![vec![0; 8], vec![0; 4], vec![0; 6]] };
        let text = emit_fig1_walkthrough(Some(demands)).unwrap();
        assert!(text.contains("none (no coded requests)"), "{text}");
        assert!(text.contains("total r = 0.000000"), "{text}");
    }

    #[test]
    fn walkthrough_tail_content_broadcasts_once() {
        let demands = DemandMatrix { per_sbs: vec![vec![25; 8], vec![25; 4], vec![25; 6]] };
        let text = emit_fig1_walkthrough(Some(demands)).unwrap();
        assert!(text.contains("uncoded broadcasts r2 = 1"), "{text}");
    }

    #[test]
    fn placement_labels_are_one_based() {
        let p = Placement::Hetero(HeteroPlacement {
            groups: vec![SbsGroup { members: vec![0, 1], coded_capacity: 1, contents: vec![0, 2] }],
            uncoded: vec![vec![3], vec![1]],
        });
        assert_eq!(placement_label(&p), "g(members=1+2;mg=1;contents=1+3);y=4|2");
    }
}
