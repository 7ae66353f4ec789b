//! Experiment orchestration: flat JSON configs with strict key validation,
//! deterministic execution over a degree list or index range, ONB cache
//! persistence, and CSV/JSON/SVG report emission.
//!
//! Determinism contract: for a fixed config and seed the emitted
//! `report.json` and `rows.csv` are byte-identical across reruns and across
//! thread counts. Consequently the execution-only knobs (`threads`, `out`)
//! are not echoed into the report, cache hits are logged to stderr rather
//! than recorded, and wall-clock time goes to a separate `timing.txt`
//! sidecar.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bergman::{
    build_onb, required_quadrature_degree, BergmanError, KernelEvaluator, OrthonormalBasis,
};
use crate::bundles::{
    diophantine_excess, AmplitudeLaw, DegreeLaw, MetricSequenceSpec, PerturbationProfile,
};
use crate::geometry::{build_quadrature, test_function, QuadratureRule, TestFunction};
use crate::linalg::CMatrix;
use crate::sampling::{build_statistic_matrix, sample_section};
use crate::stats::{
    clt_experiment, equidistribution_experiment, ks_statistic, moment_summary, normal_cdf,
    ts_conditions, variance_ratio, StatsError,
};

pub const CSV_HEADER: &str = "k,A_p,d_p,phi,estimate,target,abs_err,pass";
pub const CACHE_MAGIC: &str = "ONBCACHE v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid config: {}", self.errors.join("; "))
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Io { path: PathBuf, source: std::io::Error },
    Bergman(BergmanError),
    Stats(StatsError),
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Io { path, source } => {
                write!(f, "i/o failure at {}: {source}", path.display())
            }
            RunError::Bergman(e) => write!(f, "{e}"),
            RunError::Stats(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<BergmanError> for RunError {
    fn from(e: BergmanError) -> Self {
        RunError::Bergman(e)
    }
}

impl From<StatsError> for RunError {
    fn from(e: StatsError) -> Self {
        RunError::Stats(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Basis,
    KernelCheck,
    Variance,
    Clt,
    TsConditions,
    Equidistribution,
}

impl ExperimentKind {
    pub fn id(&self) -> &'static str {
        match self {
            ExperimentKind::Basis => "basis",
            ExperimentKind::KernelCheck => "kernel-check",
            ExperimentKind::Variance => "variance",
            ExperimentKind::Clt => "clt",
            ExperimentKind::TsConditions => "ts-conditions",
            ExperimentKind::Equidistribution => "equidistribution",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        match id {
            "basis" => Some(ExperimentKind::Basis),
            "kernel-check" => Some(ExperimentKind::KernelCheck),
            "variance" => Some(ExperimentKind::Variance),
            "clt" => Some(ExperimentKind::Clt),
            "ts-conditions" => Some(ExperimentKind::TsConditions),
            "equidistribution" => Some(ExperimentKind::Equidistribution),
            _ => None,
        }
    }

    pub fn all() -> [ExperimentKind; 6] {
        [
            ExperimentKind::Basis,
            ExperimentKind::KernelCheck,
            ExperimentKind::Variance,
            ExperimentKind::Clt,
            ExperimentKind::TsConditions,
            ExperimentKind::Equidistribution,
        ]
    }
}

/// A validated experiment configuration. Every field is echoed into the
/// report except the execution-only `threads` and `out`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    /// Strictly increasing degree list (unused by `equidistribution`).
    pub k: Vec<u32>,
    pub phi: String,
    pub samples: usize,
    pub seed: u64,
    /// "zero" or "power" (`eps_p = eps_c * A_p^{1-a}`).
    pub eps_law: String,
    pub eps_c: f64,
    pub a: f64,
    pub profile: String,
    /// Near/far split constant in `b log A / sqrt(A)`.
    pub b: f64,
    /// Mass deviation threshold for the almost-sure experiment.
    pub epsilon: f64,
    pub num_sequences: usize,
    pub p_min: u32,
    pub p_max: u32,
    pub kp_law: String,
    pub svg: bool,
    pub tol_gram: f64,
    pub tol_dim: f64,
    pub tol_near: f64,
    pub tol_var: f64,
    pub tol_ts2: f64,
    pub tol_ts1_rel: f64,
    pub dioph_const: f64,
    #[serde(skip_serializing, default = "default_threads")]
    pub threads: usize,
    #[serde(skip_serializing, default)]
    pub out: Option<String>,
}

fn default_threads() -> usize {
    1
}

impl RunConfig {
    /// Metric sequence described by the config.
    pub fn metric_spec(&self) -> MetricSequenceSpec {
        let law = match self.kp_law.as_str() {
            "2^p" => DegreeLaw::PowerOfTwo,
            "p" => DegreeLaw::Linear,
            _ => DegreeLaw::Square,
        };
        let amplitude = if self.eps_law == "power" {
            AmplitudeLaw::Power { c: self.eps_c }
        } else {
            AmplitudeLaw::Zero
        };
        MetricSequenceSpec {
            degree_law: law,
            amplitude,
            profile: PerturbationProfile::by_id(&self.profile).expect("validated"),
            rate: self.a,
        }
    }

    pub fn test_function(&self) -> TestFunction {
        test_function(&self.phi).expect("validated")
    }
}

/// Parses and validates the flat JSON object form of a config.
///
/// Unknown keys, missing required keys, malformed values, a non-increasing
/// degree list, and a divergent degree law for the almost-sure experiment
/// are all reported together, each naming the offending key.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError {
        errors: vec![format!("not valid JSON: {e}")],
    })?;
    let obj = value.as_object().ok_or_else(|| ConfigError {
        errors: vec!["config must be a JSON object".into()],
    })?;

    const KNOWN: &[&str] = &[
        "kind", "k", "phi", "samples", "seed", "eps_law", "eps_c", "a", "profile", "b",
        "epsilon", "num_sequences", "p_min", "p_max", "kp_law", "svg", "threads", "out",
        "tol_gram", "tol_dim", "tol_near", "tol_var", "tol_ts2", "tol_ts1_rel", "dioph_const",
    ];
    let mut errors = Vec::new();
    for key in obj.keys() {
        if !KNOWN.contains(&key.as_str()) {
            errors.push(format!("unknown key: {key}"));
        }
    }

    let get_f64 = |errors: &mut Vec<String>, key: &str, default: f64| -> f64 {
        match obj.get(key) {
            None => default,
            Some(v) => v.as_f64().unwrap_or_else(|| {
                errors.push(format!("key {key} must be a number"));
                default
            }),
        }
    };
    let get_u64 = |errors: &mut Vec<String>, key: &str, default: u64| -> u64 {
        match obj.get(key) {
            None => default,
            Some(v) => v.as_u64().unwrap_or_else(|| {
                errors.push(format!("key {key} must be a nonnegative integer"));
                default
            }),
        }
    };
    let get_str = |errors: &mut Vec<String>, key: &str, default: &str| -> String {
        match obj.get(key) {
            None => default.to_string(),
            Some(v) => v
                .as_str()
                .map(str::to_string)
                .unwrap_or_else(|| {
                    errors.push(format!("key {key} must be a string"));
                    default.to_string()
                }),
        }
    };

    let kind = match obj.get("kind") {
        None => {
            errors.push("missing required key: kind".into());
            None
        }
        Some(v) => match v.as_str().and_then(ExperimentKind::from_id) {
            Some(k) => Some(k),
            None => {
                errors.push(format!(
                    "key kind must be one of {}",
                    ExperimentKind::all().map(|k| k.id()).join(", ")
                ));
                None
            }
        },
    };

    let seed = match obj.get("seed") {
        None => {
            errors.push("missing required key: seed".into());
            0
        }
        Some(v) => v.as_u64().unwrap_or_else(|| {
            errors.push("key seed must be a nonnegative integer".into());
            0
        }),
    };

    let k: Vec<u32> = match obj.get("k") {
        None => {
            if kind.is_some_and(|x| x != ExperimentKind::Equidistribution) {
                errors.push("missing required key: k".into());
            }
            Vec::new()
        }
        Some(v) => match v.as_array() {
            None => {
                errors.push("key k must be an array of positive integers".into());
                Vec::new()
            }
            Some(arr) => {
                let mut out = Vec::with_capacity(arr.len());
                for item in arr {
                    match item.as_u64() {
                        Some(x) if x >= 1 => out.push(x as u32),
                        _ => errors.push("key k must contain positive integers".into()),
                    }
                }
                if out.windows(2).any(|w| w[0] >= w[1]) {
                    errors.push("key k must be strictly increasing".into());
                }
                out
            }
        },
    };

    let phi = get_str(&mut errors, "phi", "const1");
    if test_function(&phi).is_none() {
        errors.push(format!("key phi names no built-in test function: {phi}"));
    }
    let profile = get_str(&mut errors, "profile", "height");
    if PerturbationProfile::by_id(&profile).is_none() {
        errors.push(format!("key profile names no built-in profile: {profile}"));
    }
    let eps_law = get_str(&mut errors, "eps_law", "zero");
    if !["zero", "power"].contains(&eps_law.as_str()) {
        errors.push("key eps_law must be \"zero\" or \"power\"".into());
    }
    let kp_law = get_str(&mut errors, "kp_law", "p^2");
    if !["p", "p^2", "2^p"].contains(&kp_law.as_str()) {
        errors.push("key kp_law must be one of \"p\", \"p^2\", \"2^p\"".into());
    } else if kind == Some(ExperimentKind::Equidistribution) && kp_law == "p" {
        errors.push("key kp_law: law p has divergent reciprocal sum".into());
    }

    let p_min = get_u64(&mut errors, "p_min", 4) as u32;
    let p_max = get_u64(&mut errors, "p_max", 16) as u32;
    if p_min > p_max {
        errors.push("key p_min must not exceed p_max".into());
    }
    let a = get_f64(&mut errors, "a", 0.5);
    if a <= 0.0 {
        errors.push("key a must be positive".into());
    }

    let config = RunConfig {
        kind: kind.unwrap_or(ExperimentKind::Basis),
        k,
        phi,
        samples: get_u64(&mut errors, "samples", 2000) as usize,
        seed,
        eps_law,
        eps_c: get_f64(&mut errors, "eps_c", 0.1),
        a,
        profile,
        b: get_f64(&mut errors, "b", 3.0),
        epsilon: get_f64(&mut errors, "epsilon", 0.1),
        num_sequences: get_u64(&mut errors, "num_sequences", 1000) as usize,
        p_min,
        p_max,
        kp_law,
        svg: obj.get("svg").and_then(|v| v.as_bool()).unwrap_or(false),
        tol_gram: get_f64(&mut errors, "tol_gram", 1e-10),
        tol_dim: get_f64(&mut errors, "tol_dim", 1e-9),
        tol_near: get_f64(&mut errors, "tol_near", 0.02),
        tol_var: get_f64(&mut errors, "tol_var", 0.10),
        tol_ts2: get_f64(&mut errors, "tol_ts2", 1e-6),
        tol_ts1_rel: get_f64(&mut errors, "tol_ts1_rel", 0.15),
        dioph_const: get_f64(&mut errors, "dioph_const", 1.0),
        threads: get_u64(&mut errors, "threads", 1) as usize,
        out: obj.get("out").and_then(|v| v.as_str()).map(str::to_string),
    };
    if errors.is_empty() {
        Ok(config)
    } else {
        Err(ConfigError { errors })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub k: u32,
    pub a_p: f64,
    pub d_p: usize,
    pub phi: String,
    pub estimate: f64,
    pub target: f64,
    pub abs_err: f64,
    pub pass: bool,
}

impl ReportRow {
    fn new(k: u32, phi: impl Into<String>, estimate: f64, target: f64, pass: bool) -> Self {
        Self {
            k,
            a_p: k as f64,
            d_p: k as usize + 1,
            phi: phi.into(),
            estimate,
            target,
            abs_err: (estimate - target).abs(),
            pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
}

/// Persisted record of one experiment. Identical `(config, seed)` reruns
/// reproduce every field byte-for-byte; wall-clock lives in a sidecar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub spec_hash: String,
    pub config: RunConfig,
    pub rows: Vec<ReportRow>,
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
    pub all_pass: bool,
}

struct ExperimentOutput {
    rows: Vec<ReportRow>,
    checks: Vec<CheckResult>,
    notes: Vec<String>,
    svg_samples: Option<Vec<f64>>,
}

/// FNV-1a hash of the metric-spec-relevant config fields; identifies cached
/// bases across runs.
pub fn spec_hash(config: &RunConfig) -> String {
    let canon = format!(
        "eps_law={};eps_c={};a={};profile={};kp_law={}",
        config.eps_law, config.eps_c, config.a, config.profile, config.kp_law
    );
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for byte in canon.as_bytes() {
        h ^= *byte as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// Runs the configured experiment; when `config.out` is set, also writes
/// `report.json`, `rows.csv`, the optional histogram, the basis cache and
/// the timing sidecar beneath it.
pub fn run(config: &RunConfig) -> Result<ExperimentReport, RunError> {
    let started = std::time::Instant::now();
    let output = match config.kind {
        ExperimentKind::Basis => basis_experiment(config)?,
        ExperimentKind::KernelCheck => kernel_check_experiment(config)?,
        ExperimentKind::Variance => variance_experiment(config)?,
        ExperimentKind::Clt => clt_experiment_run(config)?,
        ExperimentKind::TsConditions => ts_experiment(config)?,
        ExperimentKind::Equidistribution => equidistribution_run(config)?,
    };
    let all_pass = output.rows.iter().all(|r| r.pass) && output.checks.iter().all(|c| c.pass);
    let report = ExperimentReport {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        spec_hash: spec_hash(config),
        config: config.clone(),
        rows: output.rows,
        checks: output.checks,
        notes: output.notes,
        all_pass,
    };
    if let Some(dir) = &config.out {
        let dir = PathBuf::from(dir);
        write_report(&report, &dir)?;
        if let Some(samples) = &output.svg_samples {
            write_histogram_svg(&dir.join("hist.svg"), samples)
                .map_err(|e| io_err(dir.join("hist.svg"), e))?;
        }
        let timing = format!("wall_clock_ms {}\n", started.elapsed().as_millis());
        fs::write(dir.join("timing.txt"), timing)
            .map_err(|e| io_err(dir.join("timing.txt"), e))?;
    }
    Ok(report)
}

/// Writes `report.json` and `rows.csv` into the directory (created if
/// needed). Returns the file list.
pub fn write_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir.to_path_buf(), e))?;
    let json_path = dir.join("report.json");
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    fs::write(&json_path, json + "\n").map_err(|e| io_err(json_path.clone(), e))?;

    let csv_path = dir.join("rows.csv");
    let mut csv = String::from(CSV_HEADER);
    csv.push('\n');
    for r in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.k, r.a_p, r.d_p, r.phi, r.estimate, r.target, r.abs_err, r.pass
        ));
    }
    fs::write(&csv_path, csv).map_err(|e| io_err(csv_path.clone(), e))?;
    Ok(vec![json_path, csv_path])
}

fn io_err(path: PathBuf, source: std::io::Error) -> RunError {
    RunError::Io { path, source }
}

// ---------------------------------------------------------------------------
// Basis cache.

/// Serializes a basis to the documented plain-text cache format.
pub fn write_onb_cache(path: &Path, basis: &OrthonormalBasis) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let d = basis.dimension();
    let mut out = String::with_capacity(32 + d * d * 56);
    out.push_str(&format!(
        "{CACHE_MAGIC} k={} eps={:.16e} residual={:.16e}\n",
        basis.k(),
        basis.eps(),
        basis.gram_residual()
    ));
    for i in 0..d {
        for j in 0..d {
            let c = basis.coefficient(i, j);
            out.push_str(&format!("{i} {j} {:.16e} {:.16e}\n", c.re, c.im));
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

/// Reads a cached basis; `None` on any mismatch or corruption (callers
/// rebuild, never fail, on a bad cache).
pub fn read_onb_cache(path: &Path) -> Option<OrthonormalBasis> {
    let text = fs::read_to_string(path).ok()?;
    let mut lines = text.lines();
    let header = lines.next()?;
    let rest = header.strip_prefix(CACHE_MAGIC)?.trim();
    let mut k = None;
    let mut eps = None;
    let mut residual = None;
    for part in rest.split_whitespace() {
        let (key, value) = part.split_once('=')?;
        match key {
            "k" => k = value.parse::<u32>().ok(),
            "eps" => eps = value.parse::<f64>().ok(),
            "residual" => residual = value.parse::<f64>().ok(),
            _ => return None,
        }
    }
    let (k, eps, residual) = (k?, eps?, residual?);
    let d = k as usize + 1;
    let mut coeff = CMatrix::zeros(d);
    let mut count = 0usize;
    for line in lines {
        let mut it = line.split_whitespace();
        let i = it.next()?.parse::<usize>().ok()?;
        let j = it.next()?.parse::<usize>().ok()?;
        let re = it.next()?.parse::<f64>().ok()?;
        let im = it.next()?.parse::<f64>().ok()?;
        if i >= d || j >= d || it.next().is_some() {
            return None;
        }
        coeff.set(i, j, Complex64::new(re, im));
        count += 1;
    }
    if count != d * d {
        return None;
    }
    Some(OrthonormalBasis::from_coefficients(k, eps, coeff, residual))
}

/// Obtains a basis, going through the cache when an output directory is
/// configured. Identity bases (the closed-form orthonormal family) are
/// never cached: there is no Gram build to skip.
fn obtain_basis(
    config: &RunConfig,
    field: &crate::bundles::WeightField,
    quad: &QuadratureRule,
) -> Result<OrthonormalBasis, RunError> {
    let cache_path = config.out.as_ref().map(|dir| {
        Path::new(dir)
            .join("cache")
            .join(format!("onb_k{}_{}.txt", field.k, spec_hash(config)))
    });
    if let Some(path) = &cache_path {
        if let Some(basis) = read_onb_cache(path) {
            if basis.k() == field.k && basis.eps() == field.eps {
                eprintln!("cache hit {}", path.display());
                return Ok(basis);
            }
            eprintln!("cache mismatch at {}, rebuilding", path.display());
        }
    }
    let basis = build_onb(field, quad)?;
    if let Some(path) = &cache_path {
        if !basis.is_identity() {
            write_onb_cache(path, &basis).map_err(|e| io_err(path.clone(), e))?;
            eprintln!("cache write {}", path.display());
        }
    }
    Ok(basis)
}

fn evaluator_for(config: &RunConfig, k: u32) -> Result<KernelEvaluator, RunError> {
    let spec = config.metric_spec();
    let field = spec.weight_field_for_degree(k);
    let quad = Arc::new(build_quadrature(required_quadrature_degree(&field)));
    let basis = obtain_basis(config, &field, &quad)?;
    Ok(KernelEvaluator::new(basis, field, quad)?)
}

// ---------------------------------------------------------------------------
// Experiments.

fn basis_experiment(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let spec = config.metric_spec();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for &k in &config.k {
        let eval = evaluator_for(config, k)?;
        let residual = eval.basis().gram_residual();
        rows.push(ReportRow::new(
            k,
            "-",
            residual,
            0.0,
            residual <= config.tol_gram,
        ));
        if eval.basis().is_identity() {
            checks.push(CheckResult {
                name: format!("k={k}: coefficients are the identity (closed-form basis)"),
                pass: true,
            });
        }
        if config.eps_law == "power" {
            let field = spec.weight_field_for_degree(k);
            let excess = field.eps * field.profile.curvature_sup_bound().unwrap_or(f64::NAN)
                / field.curvature_scale()
                * (k as f64).powf(config.a);
            if excess.is_finite() && excess > config.dioph_const {
                notes.push(format!(
                    "warning: k={k}: curvature excess {excess} exceeds configured constant {}",
                    config.dioph_const
                ));
            }
        }
    }
    // Scaled curvature deviation stays bounded along the sequence.
    if config.eps_law == "power" {
        let bounded = (1..=6).all(|p| diophantine_excess(&spec, p) <= config.dioph_const);
        checks.push(CheckResult {
            name: format!(
                "curvature deviation * A^a bounded by {} over p=1..6",
                config.dioph_const
            ),
            pass: bounded,
        });
    }
    Ok(ExperimentOutput {
        rows,
        checks,
        notes,
        svg_samples: None,
    })
}

fn kernel_check_experiment(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut prev_near = f64::INFINITY;
    for &k in &config.k {
        let eval = evaluator_for(config, k)?;
        let d = eval.dimension() as f64;

        // Kernel function constancy (closed form only for the round metric).
        if eval.field().eps == 0.0 {
            let max_dev = (0..100)
                .map(|i| {
                    let x = crate::bergman::random_point(config.seed, i, 0);
                    (eval.bergman_function(&x) - d).abs()
                })
                .fold(0.0f64, f64::max);
            rows.push(ReportRow::new(k, "B-const", max_dev, 0.0, max_dev <= 1e-9));
        }

        // Dimensional density.
        let integral = eval
            .quadrature()
            .integrate(|x| eval.bergman_function(x));
        rows.push(ReportRow::new(
            k,
            "B-dim",
            integral,
            d,
            (integral - d).abs() <= config.tol_dim,
        ));

        // Near-diagonal Gaussian profile over the polar grid |v| <= 1.5.
        let x = crate::bergman::random_point(config.seed, 1000, 0);
        let mut max_dev = 0.0f64;
        for ir in 1..=5 {
            for ia in 0..5 {
                let v = Complex64::from_polar(
                    0.3 * ir as f64,
                    2.0 * std::f64::consts::PI * ia as f64 / 5.0,
                );
                let sample = eval.near_diagonal_profile(&x, Complex64::new(0.0, 0.0), v);
                max_dev = max_dev.max(sample.deviation);
            }
        }
        rows.push(ReportRow::new(
            k,
            "near-diag",
            max_dev,
            0.0,
            max_dev <= config.tol_near,
        ));
        checks.push(CheckResult {
            name: format!("k={k}: near-diagonal deviation below previous degree"),
            pass: max_dev < prev_near,
        });
        prev_near = max_dev;

        // Off-diagonal decay envelope.
        let fit = eval.offdiagonal_decay_fit(config.samples.max(1000), config.b, config.seed);
        rows.push(ReportRow::new(
            k,
            "offdiag",
            fit.violation_fraction,
            0.0,
            fit.violation_fraction <= 0.01 && fit.c2 > 0.0,
        ));
        notes.push(format!(
            "k={k}: envelope C1={} C2={} cutoff={}{}",
            fit.c1,
            fit.c2,
            fit.cutoff,
            if fit.clamped { " (clamped to 0.75 diameter)" } else { "" }
        ));
    }
    Ok(ExperimentOutput {
        rows,
        checks,
        notes,
        svg_samples: None,
    })
}

fn variance_experiment(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let phi = config.test_function();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut deviations = Vec::new();
    for &k in &config.k {
        let eval = evaluator_for(config, k)?;
        let stat = build_statistic_matrix(&eval, &phi);
        let (_, var) = stat.mass_moments();
        let phi_sq = phi.square_integral_or_quadrature(eval.quadrature());
        let normalized = var * eval.scale() / phi_sq;
        deviations.push((normalized - 1.0).abs());
        rows.push(ReportRow::new(
            k,
            phi.id,
            normalized,
            1.0,
            (normalized - 1.0).abs() <= config.tol_var || k != *config.k.last().unwrap(),
        ));
    }
    checks.push(CheckResult {
        name: format!("|Var*A/integral(phi^2) - 1| strictly decreasing for {}", phi.id),
        pass: deviations.windows(2).all(|w| w[1] < w[0]),
    });
    checks.push(CheckResult {
        name: format!(
            "final |Var*A/integral(phi^2) - 1| <= {} for {}",
            config.tol_var, phi.id
        ),
        pass: deviations.last().is_some_and(|d| *d <= config.tol_var),
    });
    Ok(ExperimentOutput {
        rows,
        checks,
        notes: Vec::new(),
        svg_samples: None,
    })
}

fn clt_experiment_run(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let phi = config.test_function();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut svg_samples = None;
    for &k in &config.k {
        let eval = evaluator_for(config, k)?;
        let stat = build_statistic_matrix(&eval, &phi);
        let outcome = clt_experiment(&stat, config.samples, config.seed, config.threads)?;
        rows.push(ReportRow::new(
            k,
            phi.id,
            outcome.ks.statistic,
            0.0,
            outcome.ks.pass,
        ));
        notes.push(format!(
            "k={k} phi={}: KS={} threshold={} skewness={} excess_kurtosis={}",
            phi.id,
            outcome.ks.statistic,
            outcome.ks.threshold,
            outcome.moments.skewness.unwrap_or(f64::NAN),
            outcome.moments.excess_kurtosis.unwrap_or(f64::NAN),
        ));
        if phi.id == "const1" && eval.field().eps == 0.0 {
            // Chi-square family: exact skewness 2/sqrt(d).
            let exact = 2.0 / (eval.dimension() as f64).sqrt();
            let se = (6.0 / config.samples as f64).sqrt();
            let got = outcome.moments.skewness.unwrap_or(f64::NAN);
            checks.push(CheckResult {
                name: format!("k={k}: skewness within 3 SE of {exact}"),
                pass: (got - exact).abs() <= 3.0 * se,
            });
        }
        if k == *config.k.last().unwrap() {
            svg_samples = Some(outcome.normalized_samples);
        }
    }
    Ok(ExperimentOutput {
        rows,
        checks,
        notes,
        svg_samples: if config.svg { svg_samples } else { None },
    })
}

fn ts_experiment(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let phi = config.test_function();
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let mut prev_sup = f64::INFINITY;
    for &k in &config.k {
        let eval = evaluator_for(config, k)?;
        let stat = build_statistic_matrix(&eval, &phi);
        let report = ts_conditions(&eval, &stat, &phi, config.b, 32);
        let is_reference = eval.field().eps == 0.0;
        let (target2, pass2) = if is_reference {
            let t = 2.0 / (k as f64 + 2.0);
            (t, (report.sup_kernel_integral - t).abs() <= config.tol_ts2)
        } else {
            (0.0, report.sup_kernel_integral < prev_sup)
        };
        rows.push(ReportRow::new(k, "ts2", report.sup_kernel_integral, target2, pass2));
        checks.push(CheckResult {
            name: format!("k={k}: sup kernel integral decreasing"),
            pass: report.sup_kernel_integral < prev_sup,
        });
        prev_sup = report.sup_kernel_integral;
        if k == *config.k.last().unwrap() {
            let rel = (report.ratio / report.predicted_ratio - 1.0).abs();
            rows.push(ReportRow::new(
                k,
                "ts1",
                report.ratio,
                report.predicted_ratio,
                rel <= config.tol_ts1_rel,
            ));
        }
        if report.spacing_warning {
            notes.push(format!(
                "warning: k={k}: probe grid spacing exceeds kernel width 1/sqrt(A)"
            ));
        }
    }
    Ok(ExperimentOutput {
        rows,
        checks,
        notes,
        svg_samples: None,
    })
}

fn equidistribution_run(config: &RunConfig) -> Result<ExperimentOutput, RunError> {
    let spec = config.metric_spec();
    let phi = config.test_function();
    let report = equidistribution_experiment(
        &spec,
        &phi,
        config.epsilon,
        config.p_min..=config.p_max,
        config.num_sequences,
        config.seed,
        config.threads,
    )?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let nf = config.num_sequences as f64;
    for row in &report.rows {
        let se = (row.exceedance * (1.0 - row.exceedance) / nf)
            .sqrt()
            .max((0.25 / nf).sqrt());
        rows.push(ReportRow::new(
            row.k,
            phi.id,
            row.exceedance,
            row.chebyshev_bound,
            row.exceedance <= row.chebyshev_bound + 3.0 * se,
        ));
    }
    let decreasing = report
        .rows
        .windows(2)
        .all(|w| w[1].chebyshev_bound < w[0].chebyshev_bound);
    checks.push(CheckResult {
        name: "per-index Chebyshev bounds decrease along the range".into(),
        pass: decreasing,
    });
    let mean_bias_vanishes = report
        .rows
        .windows(2)
        .all(|w| w[1].mean_bias <= w[0].mean_bias);
    checks.push(CheckResult {
        name: "mean bias nonincreasing along the range".into(),
        pass: mean_bias_vanishes,
    });
    Ok(ExperimentOutput {
        rows,
        checks,
        notes: vec![format!(
            "tail bound mass at p_min: {}",
            report.rows.first().map(|r| r.bound_tail_sum).unwrap_or(0.0)
        )],
        svg_samples: None,
    })
}

// ---------------------------------------------------------------------------
// SVG histogram.

/// Histogram of normalized samples with the standard normal density overlay;
/// hand-rolled SVG, no plotting dependency.
pub fn write_histogram_svg(path: &Path, samples: &[f64]) -> std::io::Result<()> {
    let (w, h, margin) = (640.0, 400.0, 40.0);
    let bins = 40usize;
    let (lo, hi) = (-4.0f64, 4.0f64);
    let mut counts = vec![0usize; bins];
    for s in samples {
        if *s >= lo && *s < hi {
            let idx = ((s - lo) / (hi - lo) * bins as f64) as usize;
            counts[idx.min(bins - 1)] += 1;
        }
    }
    let bin_width = (hi - lo) / bins as f64;
    let densities: Vec<f64> = counts
        .iter()
        .map(|c| *c as f64 / (samples.len() as f64 * bin_width))
        .collect();
    let y_max = densities.iter().copied().fold(0.45, f64::max);
    let x_of = |v: f64| margin + (v - lo) / (hi - lo) * (w - 2.0 * margin);
    let y_of = |d: f64| h - margin - d / y_max * (h - 2.0 * margin);

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for (i, d) in densities.iter().enumerate() {
        let x0 = x_of(lo + i as f64 * bin_width);
        let x1 = x_of(lo + (i as f64 + 1.0) * bin_width);
        let y = y_of(*d);
        svg.push_str(&format!(
            "<rect x=\"{x0:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#7aa6c2\" stroke=\"#335\"/>\n",
            x1 - x0,
            h - margin - y
        ));
    }
    // Standard normal density curve.
    let mut d_attr = String::from("M");
    for i in 0..=256 {
        let t = lo + (hi - lo) * i as f64 / 256.0;
        let dens = (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        d_attr.push_str(&format!(" {:.2},{:.2}", x_of(t), y_of(dens)));
    }
    svg.push_str(&format!(
        "<path d=\"{d_attr}\" fill=\"none\" stroke=\"#b4232a\" stroke-width=\"2\"/>\n"
    ));
    // Axis line and tick labels.
    svg.push_str(&format!(
        "<line x1=\"{margin}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>\n",
        y0 = h - margin,
        x1 = w - margin
    ));
    for t in [-4.0f64, -2.0, 0.0, 2.0, 4.0] {
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"12\" text-anchor=\"middle\">{t}</text>\n",
            x_of(t),
            h - margin + 16.0
        ));
    }
    svg.push_str("</svg>\n");
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, svg)
}

// ---------------------------------------------------------------------------
// Built-in quick checks (`selftest` subcommand).

/// Fast closed-form battery across all modules; one result per check.
pub fn selftest(threads: usize) -> Vec<CheckResult> {
    use crate::geometry::{
        builtin_test_functions, geodesic_distance, ProjectivePoint,
    };
    let mut out = Vec::new();
    let mut push = |name: &str, pass: bool| {
        out.push(CheckResult {
            name: name.to_string(),
            pass,
        })
    };
    let near = |a: f64, b: f64, tol: f64| (a - b).abs() <= tol;

    let north = ProjectivePoint::from_affine(Complex64::new(0.0, 0.0));
    let z1 = ProjectivePoint::from_affine(Complex64::new(1.0, 0.0));
    let pi = std::f64::consts::PI;
    push(
        "distance: antipodal = sqrt(pi)/2",
        near(
            geodesic_distance(&north, &ProjectivePoint::infinity()),
            pi.sqrt() / 2.0,
            1e-14,
        ),
    );
    push(
        "distance: z=0 to z=1 = sqrt(pi)/4",
        near(geodesic_distance(&north, &z1), pi.sqrt() / 4.0, 1e-14),
    );

    let quad = build_quadrature(8);
    push(
        "quadrature: weights sum to 1",
        near(quad.weights().iter().sum::<f64>(), 1.0, 1e-13),
    );
    push(
        "quadrature: degree-2 middle norm = 1/6",
        near(
            quad.integrate(|x| {
                let s = x.s();
                (1.0 - s) * s
            }),
            1.0 / 6.0,
            1e-13,
        ),
    );
    push(
        "test functions: builtin list has const1/height/bump",
        ["const1", "height", "bump"]
            .iter()
            .all(|id| builtin_test_functions().iter().any(|f| f.id == *id)),
    );

    let field = crate::bundles::WeightField::fubini_study(3);
    let quad3 = Arc::new(build_quadrature(required_quadrature_degree(&field)));
    let eval3 = crate::bergman::build_evaluator(&field, quad3).unwrap();
    push(
        "kernel: B = k+1 for k=3",
        near(eval3.bergman_function(&z1), 4.0, 1e-11),
    );

    let field16 = crate::bundles::WeightField::fubini_study(16);
    let quad16 = Arc::new(build_quadrature(required_quadrature_degree(&field16)));
    let eval16 = crate::bergman::build_evaluator(&field16, quad16.clone()).unwrap();
    push(
        "kernel: integral B dV = dimension at k=16",
        near(
            quad16.integrate(|x| eval16.bergman_function(x)),
            17.0,
            1e-9,
        ),
    );

    let field2 = crate::bundles::WeightField::fubini_study(2);
    let quad2 = Arc::new(build_quadrature(required_quadrature_degree(&field2)));
    let eval2 = crate::bergman::build_evaluator(&field2, quad2).unwrap();
    push(
        "kernel: N(0, 1) = 1/2 at k=2",
        near(eval2.normalized_kernel(&north, &z1), 0.5, 1e-12),
    );

    let field256 = crate::bundles::WeightField::fubini_study(256);
    let quad256 = Arc::new(build_quadrature(required_quadrature_degree(&field256)));
    let eval256 = crate::bergman::build_evaluator(&field256, quad256).unwrap();
    let nd = eval256.near_diagonal_profile(
        &north,
        Complex64::new(0.0, 0.0),
        Complex64::new(1.0, 0.0),
    );
    push(
        "kernel: near-diagonal k=256 matches (1+pi/256)^{-128}",
        near(nd.measured, (1.0 + pi / 256.0).powi(-128), 1e-10),
    );
    push("kernel: near-diagonal target e^{-pi/2}", near(nd.target, (-pi / 2.0).exp(), 1e-15));

    let field4 = crate::bundles::WeightField::fubini_study(4);
    let quad4 = Arc::new(build_quadrature(required_quadrature_degree(&field4)));
    let eval4 = crate::bergman::build_evaluator(&field4, quad4).unwrap();
    let phi1 = test_function("const1").unwrap();
    let stat4 = build_statistic_matrix(&eval4, &phi1);
    let (mean4, var4) = stat4.mass_moments();
    push(
        "traces: mean 5/4 and variance 5/16 at k=4",
        near(mean4, 1.25, 1e-12) && near(var4, 5.0 / 16.0, 1e-12),
    );

    let field64 = crate::bundles::WeightField::fubini_study(64);
    let quad64 = Arc::new(build_quadrature(required_quadrature_degree(&field64)));
    let eval64 = crate::bergman::build_evaluator(&field64, quad64).unwrap();
    let stat64 = build_statistic_matrix(&eval64, &phi1);
    let (rf, rr) = variance_ratio(&stat64);
    push(
        "decomposition: Var F/Var M = (64/65)^2 and Var R/Var M = 1/65^2",
        near(rf, (64.0f64 / 65.0).powi(2), 1e-12) && near(rr, 1.0 / 4225.0, 1e-12),
    );

    let stat16 = build_statistic_matrix(&eval16, &phi1);
    let ts = ts_conditions(&eval16, &stat16, &phi1, 3.0, 16);
    push(
        "covariance integral: 2/(k+2) = 1/9 at k=16",
        near(ts.sup_kernel_integral, 1.0 / 9.0, 1e-9),
    );

    let normals: Vec<f64> = (0..2000)
        .map(|i| crate::sampling::standard_normal(5, i as u64))
        .collect();
    push(
        "normality test accepts true normals at the 1% level",
        ks_statistic(&normals).map(|r| r.pass).unwrap_or(false),
    );
    push(
        "moment summary: kurtosis near 0 for normals",
        moment_summary(&normals)
            .ok()
            .and_then(|m| m.excess_kurtosis)
            .map(|k| k.abs() < 0.3)
            .unwrap_or(false),
    );

    let pc = crate::sampling::pair_correlation_estimate(&eval2, &north, &z1, 10_000, 7);
    push(
        "pair correlation: 1 + N^2 = 1.25 at k=2 within 3 SE",
        (pc.estimate - 1.25).abs() <= 3.0 * pc.std_error,
    );

    let s1 = sample_section(8, 1, 2);
    let s2 = sample_section(8, 1, 2);
    push(
        "sampling: identical keys give identical coefficients",
        s1.coefficients == s2.coefficients,
    );

    let outcome = clt_experiment(&stat64, 1000, 11, threads).unwrap();
    push(
        "normalized statistic: KS pass at k=64 with 1000 samples",
        outcome.ks.pass,
    );
    push(
        "normal CDF: Phi(0) = 1/2",
        near(normal_cdf(0.0), 0.5, 1e-15),
    );
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_clt_json() -> &'static str {
        r#"{"kind":"clt","k":[64],"phi":"const1","samples":2000,"seed":7}"#
    }

    #[test]
    fn parse_minimal_config() {
        let cfg = parse_config(minimal_clt_json()).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Clt);
        assert_eq!(cfg.k, vec![64]);
        assert_eq!(cfg.phi, "const1");
        assert_eq!(cfg.samples, 2000);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.b, 3.0);
        assert_eq!(cfg.a, 0.5);
        assert_eq!(cfg.threads, 1);
    }

    #[test]
    fn parse_rejects_unknown_key() {
        let err =
            parse_config(r#"{"kind":"clt","k":[8],"seed":1,"banana":2}"#).unwrap_err();
        assert!(
            err.errors.iter().any(|e| e == "unknown key: banana"),
            "{err}"
        );
    }

    #[test]
    fn parse_rejects_missing_and_malformed() {
        let err = parse_config(r#"{"k":[8]}"#).unwrap_err();
        assert!(err.errors.iter().any(|e| e.contains("missing required key: kind")));
        assert!(err.errors.iter().any(|e| e.contains("missing required key: seed")));

        let err = parse_config(r#"{"kind":"clt","k":[8,8],"seed":1}"#).unwrap_err();
        assert!(err.errors.iter().any(|e| e.contains("strictly increasing")));

        let err = parse_config(r#"{"kind":"clt","k":[16,8],"seed":1}"#).unwrap_err();
        assert!(err.errors.iter().any(|e| e.contains("strictly increasing")));
    }

    #[test]
    fn parse_equidistribution_law_check() {
        let ok = parse_config(
            r#"{"kind":"equidistribution","kp_law":"p^2","seed":1,"p_min":4,"p_max":8}"#,
        )
        .unwrap();
        assert_eq!(ok.kp_law, "p^2");
        let err = parse_config(
            r#"{"kind":"equidistribution","kp_law":"p","seed":1,"p_min":4,"p_max":8}"#,
        )
        .unwrap_err();
        assert!(err.errors.iter().any(|e| e.contains("divergent")));
    }

    #[test]
    fn spec_hash_stable_and_sensitive() {
        let a = parse_config(minimal_clt_json()).unwrap();
        let mut b = a.clone();
        assert_eq!(spec_hash(&a), spec_hash(&b));
        b.eps_law = "power".into();
        assert_ne!(spec_hash(&a), spec_hash(&b));
    }

    #[test]
    fn cache_roundtrip_preserves_coefficients_exactly() {
        let field = crate::bundles::WeightField {
            k: 4,
            eps: 0.2,
            profile: PerturbationProfile::xcoord(),
            stencil: 1e-2,
        };
        let quad = build_quadrature(required_quadrature_degree(&field));
        let basis = build_onb(&field, &quad).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache/onb_k4_test.txt");
        write_onb_cache(&path, &basis).unwrap();
        let loaded = read_onb_cache(&path).unwrap();
        assert_eq!(loaded.k(), 4);
        assert_eq!(loaded.eps(), 0.2);
        // 17 significant digits round-trip doubles exactly.
        assert_eq!(loaded.gram_residual(), basis.gram_residual());
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(loaded.coefficient(i, j), basis.coefficient(i, j));
            }
        }
        // First line is the documented header.
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("ONBCACHE v1 k=4 eps="));
    }

    #[test]
    fn corrupt_cache_is_ignored() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.txt");
        std::fs::write(&path, "garbage\n1 2 3\n").unwrap();
        assert!(read_onb_cache(&path).is_none());
    }

    #[test]
    fn basis_run_reports_identity_and_residual() {
        let cfg = parse_config(r#"{"kind":"basis","k":[2],"seed":1}"#).unwrap();
        let report = run(&cfg).unwrap();
        assert!(report.all_pass);
        assert_eq!(report.rows.len(), 1);
        assert!(report.rows[0].estimate <= 1e-10);
        assert!(report
            .checks
            .iter()
            .any(|c| c.name.contains("identity") && c.pass));
    }

    #[test]
    fn reports_roundtrip_and_are_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run1");
        let mut cfg = parse_config(
            r#"{"kind":"variance","k":[8,16],"phi":"height","seed":3,"samples":100}"#,
        )
        .unwrap();
        cfg.out = Some(out.to_string_lossy().into_owned());
        let report1 = run(&cfg).unwrap();
        let json1 = std::fs::read_to_string(out.join("report.json")).unwrap();
        let csv1 = std::fs::read_to_string(out.join("rows.csv")).unwrap();
        assert!(csv1.starts_with(CSV_HEADER));

        // Round-trip through serde; the execution-only knobs are not echoed.
        let parsed: ExperimentReport = serde_json::from_str(&json1).unwrap();
        let mut expected = report1.clone();
        expected.config.out = None;
        expected.config.threads = 1;
        assert_eq!(parsed, expected);

        // Rerun into a second directory with a different thread count.
        let out2 = dir.path().join("run2");
        let mut cfg2 = cfg.clone();
        cfg2.out = Some(out2.to_string_lossy().into_owned());
        cfg2.threads = 4;
        run(&cfg2).unwrap();
        let json2 = std::fs::read_to_string(out2.join("report.json")).unwrap();
        let csv2 = std::fs::read_to_string(out2.join("rows.csv")).unwrap();
        assert_eq!(json1, json2);
        assert_eq!(csv1, csv2);
    }

    #[test]
    fn cache_hit_skips_rebuild_and_reproduces_residual() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("cached");
        let mut cfg = parse_config(
            r#"{"kind":"basis","k":[6],"seed":2,"eps_law":"power","eps_c":0.1,"profile":"xcoord"}"#,
        )
        .unwrap();
        cfg.out = Some(out.to_string_lossy().into_owned());
        let first = run(&cfg).unwrap();
        let cache_dir = out.join("cache");
        let entries: Vec<_> = std::fs::read_dir(&cache_dir).unwrap().collect();
        assert_eq!(entries.len(), 1);
        let second = run(&cfg).unwrap();
        assert_eq!(first.rows[0].estimate, second.rows[0].estimate);
        assert_eq!(first, second);
    }

    #[test]
    fn unwritable_directory_errors_with_path() {
        let mut cfg = parse_config(r#"{"kind":"basis","k":[2],"seed":1}"#).unwrap();
        cfg.out = Some("/proc/definitely-not-writable/x".into());
        match run(&cfg) {
            Err(RunError::Io { path, .. }) => {
                assert!(path.display().to_string().contains("definitely-not-writable"));
            }
            other => panic!("expected i/o error, got {other:?}"),
        }
    }

    #[test]
    fn histogram_svg_is_emitted_when_requested() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("svg");
        let mut cfg = parse_config(
            r#"{"kind":"clt","k":[16],"phi":"const1","samples":200,"seed":5,"svg":true}"#,
        )
        .unwrap();
        cfg.out = Some(out.to_string_lossy().into_owned());
        run(&cfg).unwrap();
        let svg = std::fs::read_to_string(out.join("hist.svg")).unwrap();
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn selftest_battery_is_green() {
        let results = selftest(1);
        assert!(results.len() >= 15);
        for r in &results {
            assert!(r.pass, "selftest failed: {}", r.name);
        }
    }
}
