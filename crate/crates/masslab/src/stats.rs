//! Distributional experiments on mass linear statistics: moment summaries, a
//! from-scratch normality test, exact variance ratios, the covariance
//! integral conditions behind the normality mechanism, and the almost-sure
//! equidistribution table.
//!
//! Normalizations always use the exact trace moments, never estimates, so
//! the tests measure distributional convergence and not estimator noise.

use std::fmt;
use std::ops::RangeInclusive;
use std::sync::Arc;

use num_complex::Complex64;

use crate::bergman::{build_evaluator, required_quadrature_degree, BergmanError, KernelEvaluator};
use crate::bundles::MetricSequenceSpec;
use crate::geometry::{
    build_quadrature, diameter, geodesic_distance, sphere_grid, NeumaierSum, TestFunction,
};
use crate::sampling::{build_statistic_matrix, derive_seed, sample_section, StatisticMatrix};

#[derive(Debug, Clone, PartialEq)]
pub enum StatsError {
    /// Too few samples for the requested summary or test.
    TooFewSamples { got: usize, need: usize },
    /// The statistic has zero variance (e.g. the zero test function).
    DegenerateStatistic,
    /// The degree law has divergent reciprocal sum; the almost-sure
    /// experiment's hypothesis fails.
    NonSummableDegreeLaw { law: &'static str },
    /// Basis construction failed while preparing an experiment.
    Bergman(String),
}

impl fmt::Display for StatsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatsError::TooFewSamples { got, need } => {
                write!(f, "need at least {need} samples, got {got}")
            }
            StatsError::DegenerateStatistic => write!(f, "statistic has zero variance"),
            StatsError::NonSummableDegreeLaw { law } => {
                write!(f, "degree law {law} has divergent reciprocal sum")
            }
            StatsError::Bergman(e) => write!(f, "basis construction failed: {e}"),
        }
    }
}

impl std::error::Error for StatsError {}

impl From<BergmanError> for StatsError {
    fn from(e: BergmanError) -> Self {
        StatsError::Bergman(e.to_string())
    }
}

/// Standard normal distribution function via the complementary error
/// function, accurate to a few ulps across both tails.
pub fn normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / 2.0f64.sqrt())
}

/// One-pass-free moment summary (two passes, compensated accumulation).
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct MomentSummary {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standardized third moment; `None` when the variance vanishes.
    pub skewness: Option<f64>,
    /// Excess kurtosis; `None` when the variance vanishes.
    pub excess_kurtosis: Option<f64>,
}

/// Computes count/mean/variance/skewness/kurtosis; needs two samples.
pub fn moment_summary(samples: &[f64]) -> Result<MomentSummary, StatsError> {
    let n = samples.len();
    if n < 2 {
        return Err(StatsError::TooFewSamples { got: n, need: 2 });
    }
    let nf = n as f64;
    let mut s = NeumaierSum::new();
    for x in samples {
        s.add(*x);
    }
    let mean = s.value() / nf;
    let mut m2 = NeumaierSum::new();
    let mut m3 = NeumaierSum::new();
    let mut m4 = NeumaierSum::new();
    for x in samples {
        let d = x - mean;
        m2.add(d * d);
        m3.add(d * d * d);
        m4.add(d * d * d * d);
    }
    let c2 = m2.value() / nf;
    let variance = m2.value() / (nf - 1.0);
    let (skewness, excess_kurtosis) = if c2 > 0.0 {
        (
            Some(m3.value() / nf / c2.powf(1.5)),
            Some(m4.value() / nf / (c2 * c2) - 3.0),
        )
    } else {
        (None, None)
    };
    Ok(MomentSummary {
        count: n,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

/// Kolmogorov-Smirnov distance to the standard normal with the asymptotic
/// 1% threshold `1.63 / sqrt(N)`.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct KSResult {
    pub statistic: f64,
    pub count: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Sup distance between the empirical distribution and the standard normal,
/// evaluated at the sorted sample points (both one-sided gaps).
pub fn ks_statistic(samples: &[f64]) -> Result<KSResult, StatsError> {
    let n = samples.len();
    if n < 50 {
        return Err(StatsError::TooFewSamples { got: n, need: 50 });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    let nf = n as f64;
    let mut d: f64 = 0.0;
    for (i, x) in sorted.iter().enumerate() {
        let cdf = normal_cdf(*x);
        d = d.max((i as f64 + 1.0) / nf - cdf).max(cdf - i as f64 / nf);
    }
    let threshold = 1.63 / nf.sqrt();
    Ok(KSResult {
        statistic: d,
        count: n,
        threshold,
        pass: d <= threshold,
    })
}

/// Two-sample Kolmogorov-Smirnov distance (used for the sandwich check
/// between the full and kernel-normalized statistics).
pub fn ks_two_sample(xs: &[f64], ys: &[f64]) -> f64 {
    let mut a = xs.to_vec();
    let mut b = ys.to_vec();
    a.sort_unstable_by(|p, q| p.partial_cmp(q).expect("no NaN"));
    b.sort_unstable_by(|p, q| p.partial_cmp(q).expect("no NaN"));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Outcome of one normality experiment on the trace-normalized statistic.
#[derive(Debug, Clone)]
pub struct CltOutcome {
    pub moments: MomentSummary,
    pub ks: KSResult,
    /// Exact mean and variance used for the normalization.
    pub mean: f64,
    pub variance: f64,
    pub normalized_samples: Vec<f64>,
}

/// Samples `(M - E)/sqrt(Var)` with `E, Var` from the exact traces and tests
/// it against the standard normal. Zero-variance statistics are rejected.
pub fn clt_experiment(
    stat: &StatisticMatrix,
    num_samples: usize,
    seed: u64,
    threads: usize,
) -> Result<CltOutcome, StatsError> {
    let (mean, variance) = stat.mass_moments();
    if variance <= 0.0 {
        return Err(StatsError::DegenerateStatistic);
    }
    let sd = variance.sqrt();
    let normalized_samples = parallel_map(num_samples, threads, |i| {
        let section = sample_section(stat.q().dim(), seed, i as u64);
        (crate::sampling::mass_statistic(&section, stat) - mean) / sd
    });
    let moments = moment_summary(&normalized_samples)?;
    let ks = ks_statistic(&normalized_samples)?;
    Ok(CltOutcome {
        moments,
        ks,
        mean,
        variance,
        normalized_samples,
    })
}

/// Exact variance ratios `(Var F / Var M, Var R / Var M)` via traces.
pub fn variance_ratio(stat: &StatisticMatrix) -> (f64, f64) {
    let (_, var_m) = stat.mass_moments();
    let (_, var_f) = stat.normalized_part_moments();
    let var_r = stat.remainder_variance();
    (var_f / var_m, var_r / var_m)
}

/// Report on the two covariance integral conditions at one degree.
#[derive(Debug, Clone, Copy)]
pub struct TSConditionReport {
    pub k: u32,
    /// Estimate of `sup_x integral N(x, y) dV(y)` over the probe grid.
    pub sup_kernel_integral: f64,
    /// Ratio of the squared-kernel pairing of `phi` to the sup integral,
    /// restricted to the near-diagonal region.
    pub ratio: f64,
    /// Predicted limit `(1/2) integral phi^2 dV`.
    pub predicted_ratio: f64,
    /// Near-diagonal radius `b log A / sqrt(A)`.
    pub cutoff: f64,
    /// Whether the cutoff actually restricts (it may exceed the diameter).
    pub restricted: bool,
    pub grid_size: usize,
    /// Probe grid spacing exceeds the kernel width `1/sqrt(A)`.
    pub spacing_warning: bool,
}

/// Estimates both conditions for the given statistic data.
///
/// The sup integral is a max over a deterministic probe grid. When the
/// near-diagonal ball covers the whole surface (always at moderate degrees),
/// the numerator of the ratio is the exact trace identity
/// `tr(Qt^2) = double integral of N^2 phi phi`; otherwise both sides are
/// restricted with the distance cutoff inside the node sweeps.
pub fn ts_conditions(
    eval: &KernelEvaluator,
    stat: &StatisticMatrix,
    phi: &TestFunction,
    b: f64,
    grid_size: usize,
) -> TSConditionReport {
    let a = eval.scale();
    let cutoff = b * a.ln() / a.sqrt();
    let restricted = cutoff < diameter();
    let grid = sphere_grid(grid_size);
    // Nearest-neighbor spacing estimate for the warning flag.
    let mut spacing = f64::INFINITY;
    for (i, x) in grid.iter().enumerate() {
        for y in grid.iter().skip(i + 1) {
            spacing = spacing.min(geodesic_distance(x, y));
        }
    }
    let spacing_warning = spacing > 1.0 / a.sqrt();

    let cut = if restricted { Some(cutoff) } else { None };
    let integrals = eval.kernel_integrals_from(&grid, cut);
    let sup = integrals.iter().fold(0.0f64, |m, v| m.max(*v));

    let numerator = if restricted {
        restricted_square_pairing(eval, phi, cutoff)
    } else {
        stat.q_tilde().frobenius_sq()
    };
    let predicted = 0.5
        * phi
            .square_integral
            .unwrap_or_else(|| eval.quadrature().integrate(|x| phi.eval(x) * phi.eval(x)));
    TSConditionReport {
        k: eval.field().k,
        sup_kernel_integral: sup,
        ratio: numerator / sup,
        predicted_ratio: predicted,
        cutoff,
        restricted,
        grid_size,
        spacing_warning,
    }
}

/// `double integral over d(x,y) <= cutoff of N^2 phi(x) phi(y)` by brute
/// node sweeps; only used when the cutoff genuinely restricts.
fn restricted_square_pairing(eval: &KernelEvaluator, phi: &TestFunction, cutoff: f64) -> f64 {
    let quad = eval.quadrature();
    let node_b = eval.node_bergman();
    let field = eval.field();
    let nodes = quad.nodes();
    let weights = quad.weights();
    let raw_b: Vec<f64> = node_b
        .iter()
        .zip(nodes)
        .map(|(b, x)| b / field.metric_factor(x))
        .collect();
    let values: Vec<Vec<Complex64>> = nodes.iter().map(|x| eval.section_values(x)).collect();
    let mut total = NeumaierSum::new();
    for i in 0..nodes.len() {
        let phi_i = phi.eval(&nodes[i]);
        if phi_i == 0.0 {
            continue;
        }
        let mut inner = NeumaierSum::new();
        for j in 0..nodes.len() {
            if geodesic_distance(&nodes[i], &nodes[j]) > cutoff {
                continue;
            }
            let mut s = Complex64::new(0.0, 0.0);
            for (p, q) in values[i].iter().zip(&values[j]) {
                s += p * q.conj();
            }
            let n2 = s.norm_sqr() / (raw_b[i] * raw_b[j]);
            inner.add(weights[j] * n2 * phi.eval(&nodes[j]));
        }
        total.add(weights[i] * phi_i * inner.value());
    }
    total.value()
}

/// One row of the almost-sure equidistribution table.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EquidistributionRow {
    pub p: u32,
    pub k: u32,
    /// Empirical `P(|M_p - integral phi| > 2 eps)` over the sequences.
    pub exceedance: f64,
    /// Empirical `P(sup_{q >= p} |M_q - integral phi| > 2 eps)`.
    pub tail_exceedance: f64,
    /// Exact Chebyshev bound `Var/eps^2` from the traces.
    pub chebyshev_bound: f64,
    /// Partial sum of the bounds from this index on (Borel-Cantelli mass).
    pub bound_tail_sum: f64,
    /// Exact mean bias `|E M_p - integral phi|`.
    pub mean_bias: f64,
}

#[derive(Debug, Clone)]
pub struct EquidistributionReport {
    pub rows: Vec<EquidistributionRow>,
    pub epsilon: f64,
    pub num_sequences: usize,
}

/// Runs the almost-sure equidistribution experiment for a summable degree
/// law: samples independent sections along `p`, tabulates exceedance
/// frequencies of the mass statistic against its limit, and compares with
/// the exact Chebyshev bounds.
pub fn equidistribution_experiment(
    spec: &MetricSequenceSpec,
    phi: &TestFunction,
    epsilon: f64,
    p_range: RangeInclusive<u32>,
    num_sequences: usize,
    seed: u64,
    threads: usize,
) -> Result<EquidistributionReport, StatsError> {
    if !spec.degree_law.reciprocal_sum_converges() {
        return Err(StatsError::NonSummableDegreeLaw {
            law: spec.degree_law.id(),
        });
    }
    let ps: Vec<u32> = p_range.clone().collect();
    if ps.is_empty() {
        return Err(StatsError::TooFewSamples { got: 0, need: 1 });
    }
    // Build the statistic matrix for each index once.
    let mut stats = Vec::with_capacity(ps.len());
    let mut targets = Vec::with_capacity(ps.len());
    for &p in &ps {
        let field = spec.weight_field(p);
        let quad = Arc::new(build_quadrature(required_quadrature_degree(&field)));
        let eval = build_evaluator(&field, quad)?;
        let target = phi.integral_or_quadrature(eval.quadrature());
        stats.push(build_statistic_matrix(&eval, phi));
        targets.push(target);
    }

    // Exceedance flags per sequence and index; independent streams per p.
    let flags: Vec<Vec<bool>> = parallel_map(num_sequences, threads, |seq| {
        ps.iter()
            .enumerate()
            .map(|(i, &p)| {
                let stream = derive_seed(seed, p as u64);
                let section = sample_section(stats[i].q().dim(), stream, seq as u64);
                let m = crate::sampling::mass_statistic(&section, &stats[i]);
                (m - targets[i]).abs() > 2.0 * epsilon
            })
            .collect()
    });

    let nf = num_sequences as f64;
    let bounds: Vec<f64> = stats
        .iter()
        .map(|s| {
            let (_, var) = s.mass_moments();
            var / (epsilon * epsilon)
        })
        .collect();
    let mut rows = Vec::with_capacity(ps.len());
    for (i, &p) in ps.iter().enumerate() {
        let exceed = flags.iter().filter(|f| f[i]).count() as f64 / nf;
        let tail = flags
            .iter()
            .filter(|f| f.iter().skip(i).any(|&e| e))
            .count() as f64
            / nf;
        let bound_tail: f64 = bounds[i..].iter().sum();
        let (mean, _) = stats[i].mass_moments();
        rows.push(EquidistributionRow {
            p,
            k: spec.degree(p),
            exceedance: exceed,
            tail_exceedance: tail,
            chebyshev_bound: bounds[i],
            bound_tail_sum: bound_tail,
            mean_bias: (mean - targets[i]).abs(),
        });
    }
    Ok(EquidistributionReport {
        rows,
        epsilon,
        num_sequences,
    })
}

/// Deterministic fan-out: the output is the in-order map of `f` over
/// `0..n` regardless of the worker count (disjoint contiguous chunks,
/// results placed by index, no shared accumulation).
pub fn parallel_map<T, F>(n: usize, threads: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    if threads <= 1 || n < 2 {
        return (0..n).map(f).collect();
    }
    let workers = threads.min(n);
    let chunk = n.div_ceil(workers);
    let mut out: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let slots: Vec<(usize, &mut [Option<T>])> = {
        let mut rest = out.as_mut_slice();
        let mut pieces = Vec::new();
        let mut start = 0;
        while !rest.is_empty() {
            let take = chunk.min(rest.len());
            let (head, tail) = rest.split_at_mut(take);
            pieces.push((start, head));
            start += take;
            rest = tail;
        }
        pieces
    };
    std::thread::scope(|scope| {
        for (start, slice) in slots {
            let f = &f;
            scope.spawn(move || {
                for (offset, slot) in slice.iter_mut().enumerate() {
                    *slot = Some(f(start + offset));
                }
            });
        }
    });
    out.into_iter().map(|v| v.expect("filled")).collect()
}
