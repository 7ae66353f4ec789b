//! Gaussian random sections and their mass statistics.
//!
//! Coefficients are standard complex Gaussians produced by a counter-based
//! stream keyed by `(seed, sample_index, j)`, so every draw is a pure
//! function of its key and results do not depend on worker scheduling.
//!
//! Linear statistics reduce exactly to coefficient quadratic forms: for
//! `M = a^* Q a / A` with standard complex Gaussian `a`, the mean is
//! `tr(Q)/A` and the variance `tr(Q^2)/A^2`, which the statistics module
//! uses as sampling-free oracles.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::bergman::KernelEvaluator;
use crate::geometry::{NeumaierSum, ProjectivePoint, TestFunction};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingError {
    /// The trace oracle requires a Hermitian matrix.
    NonHermitianMatrix { defect: f64 },
}

impl fmt::Display for SamplingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SamplingError::NonHermitianMatrix { defect } => {
                write!(f, "statistic matrix is not Hermitian (defect {defect:e})")
            }
        }
    }
}

impl std::error::Error for SamplingError {}

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    x
}

/// Standard complex Gaussian draw for key `(seed, sample_index, j)`:
/// real and imaginary parts are independent normals of variance 1/2.
///
/// Uses the polar form `sqrt(-ln u1) e^{2 pi i u2}` on two uniform words
/// derived from the mixed key; `u1` lies in `(0, 1]` so the log is finite.
pub fn gaussian_coefficient(seed: u64, sample_index: u64, j: u64) -> Complex64 {
    let h = mix64(seed.wrapping_add(GAMMA.wrapping_mul(sample_index.wrapping_add(1))));
    let h = mix64(h ^ GAMMA.wrapping_mul(j.wrapping_add(1)));
    let r1 = mix64(h ^ 0xD1B5_4A32_D192_ED03);
    let r2 = mix64(h ^ 0x8CB9_2BA7_2F3D_8DD7);
    let u1 = ((r1 >> 11) + 1) as f64 * (1.0 / 9_007_199_254_740_992.0);
    let u2 = (r2 >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0);
    Complex64::from_polar((-u1.ln()).sqrt(), 2.0 * PI * u2)
}

/// Standard real Gaussian from the same stream (slot-separated).
pub fn standard_normal(seed: u64, index: u64) -> f64 {
    2.0f64.sqrt() * gaussian_coefficient(seed, index, u64::MAX / 2).re
}

/// Derives an independent sub-stream seed (used to separate degrees).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ GAMMA.wrapping_mul(tag.wrapping_add(0x5851_F42D)))
}

/// A Gaussian random section: reproducible coefficients over the basis.
#[derive(Debug, Clone)]
pub struct RandomSection {
    pub coefficients: Vec<Complex64>,
    pub seed: u64,
    pub sample_index: u64,
}

/// Draws the section with the given key; deterministic in all arguments.
pub fn sample_section(dimension: usize, seed: u64, sample_index: u64) -> RandomSection {
    let coefficients = (0..dimension as u64)
        .map(|j| gaussian_coefficient(seed, sample_index, j))
        .collect();
    RandomSection {
        coefficients,
        seed,
        sample_index,
    }
}

/// The quadratic-form matrices of a linear statistic for one test function:
/// `Q_ij = integral phi <S_i, S_j> dV` and the kernel-normalized variant
/// `Qt_ij` with density `phi / B`.
#[derive(Debug, Clone)]
pub struct StatisticMatrix {
    pub phi_id: String,
    /// Curvature scale `A_p` of the underlying basis.
    pub scale: f64,
    pub(crate) q: CMatrix,
    pub(crate) q_tilde: CMatrix,
}

impl StatisticMatrix {
    pub fn q(&self) -> &CMatrix {
        &self.q
    }

    pub fn q_tilde(&self) -> &CMatrix {
        &self.q_tilde
    }

    /// Exact `(mean, variance)` of `M = a^* Q a / A`.
    pub fn mass_moments(&self) -> (f64, f64) {
        (
            self.q.trace().re / self.scale,
            self.q.frobenius_sq() / (self.scale * self.scale),
        )
    }

    /// Exact `(mean, variance)` of the normalized part `F = a^* Qt a`.
    pub fn normalized_part_moments(&self) -> (f64, f64) {
        (self.q_tilde.trace().re, self.q_tilde.frobenius_sq())
    }

    /// Exact variance of the remainder `R = M - F`.
    pub fn remainder_variance(&self) -> f64 {
        let d = self.q.dim();
        let mut diff = CMatrix::zeros(d);
        for i in 0..d {
            for j in 0..d {
                diff.set(i, j, self.q.get(i, j) / self.scale - self.q_tilde.get(i, j));
            }
        }
        diff.frobenius_sq()
    }
}

/// Assembles both statistic matrices on the evaluator's quadrature.
///
/// Entries couple through the angular mode `i - j` only, so each radial node
/// contributes through the discrete angular transform of the density; for a
/// radial test function over a radial metric only the diagonal survives,
/// exactly.
pub fn build_statistic_matrix(eval: &KernelEvaluator, phi: &TestFunction) -> StatisticMatrix {
    let field = eval.field();
    let node_b = eval.node_bergman();
    let q_ref = reference_weighted_matrix(eval, |x, _| phi.eval(x) * field.metric_factor(x));
    let qt_ref = reference_weighted_matrix(eval, |x, idx| {
        phi.eval(x) * field.metric_factor(x) / node_b[idx]
    });
    let (q, q_tilde) = match eval.basis().is_identity() {
        true => (q_ref, qt_ref),
        false => {
            let c = coefficient_matrix(eval);
            (q_ref.congruence(&c), qt_ref.congruence(&c))
        }
    };
    StatisticMatrix {
        phi_id: phi.id.to_string(),
        scale: eval.scale(),
        q,
        q_tilde,
    }
}

fn coefficient_matrix(eval: &KernelEvaluator) -> CMatrix {
    let d = eval.dimension();
    let mut c = CMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            c.set(i, j, eval.basis().coefficient(i, j));
        }
    }
    c
}

/// Weighted Gram-type matrix over the reference family; the weight callback
/// receives the node and its flat index (for cached per-node values).
fn reference_weighted_matrix<F: Fn(&ProjectivePoint, usize) -> f64>(
    eval: &KernelEvaluator,
    weight: F,
) -> CMatrix {
    let field = eval.field();
    let quad = eval.quadrature();
    let k = field.k as usize;
    let d = k + 1;
    let table = crate::bergman::half_log_norms(field.k);
    let m_ang = quad.angular_count();
    let mut out = CMatrix::zeros(d);

    // Radial density over a radial metric: only the diagonal survives the
    // angular integral, exactly.
    let radial_case = field.is_angular_symmetric();

    let mut modes = vec![Complex64::new(0.0, 0.0); k + 1];
    for (i_s, &s) in quad.s_nodes().iter().enumerate() {
        let w = quad.s_weights()[i_s];
        let r = crate::bergman::radial_reference_values(field.k, s, &table);
        let probe = quad.nodes()[i_s * m_ang];
        let radial_here = radial_case && is_radial_density(&weight, i_s, m_ang, quad.nodes());
        if radial_here {
            let f = weight(&probe, i_s * m_ang);
            for (j, rj) in r.iter().enumerate() {
                let cur = out.get(j, j);
                out.set(j, j, cur + Complex64::new(w * f * rj * rj, 0.0));
            }
            continue;
        }
        for (l, mode) in modes.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..m_ang {
                let idx = i_s * m_ang + j;
                let fv = weight(&quad.nodes()[idx], idx);
                acc += Complex64::from_polar(fv, l as f64 * quad.alpha(j));
            }
            *mode = acc / m_ang as f64;
        }
        for i in 0..d {
            for j in 0..d {
                let c = if i >= j { modes[i - j] } else { modes[j - i].conj() };
                let cur = out.get(i, j);
                out.set(i, j, cur + c * (w * r[i] * r[j]));
            }
        }
    }
    out
}

/// Cheap structural test: the density is angular-independent at this radius.
fn is_radial_density<F: Fn(&ProjectivePoint, usize) -> f64>(
    weight: &F,
    i_s: usize,
    m_ang: usize,
    nodes: &[ProjectivePoint],
) -> bool {
    let base = weight(&nodes[i_s * m_ang], i_s * m_ang);
    for probe in [m_ang / 4, m_ang / 2, 3 * m_ang / 4] {
        let idx = i_s * m_ang + probe;
        if weight(&nodes[idx], idx) != base {
            return false;
        }
    }
    true
}

/// The mass linear statistic `M = a^* Q a / A` through the quadratic form.
pub fn mass_statistic(section: &RandomSection, stat: &StatisticMatrix) -> f64 {
    stat.q.quadratic_form(&section.coefficients) / stat.scale
}

/// The same statistic by direct quadrature of `|s|^2 phi / A` (oracle path).
pub fn mass_statistic_direct(
    section: &RandomSection,
    eval: &KernelEvaluator,
    phi: &TestFunction,
) -> f64 {
    let quad = eval.quadrature();
    let mut sum = NeumaierSum::new();
    for (idx, node) in quad.nodes().iter().enumerate() {
        let w = quad.weights()[idx];
        sum.add(w * eval.section_norm_sq(&section.coefficients, node) * phi.eval(node));
    }
    sum.value() / eval.scale()
}

/// Splits the statistic as `M = F + R` with `F = a^* Qt a` the
/// kernel-normalized part; `R` is `M - F` identically.
pub fn decompose_statistic(section: &RandomSection, stat: &StatisticMatrix) -> (f64, f64) {
    let m = mass_statistic(section, stat);
    let f = stat.q_tilde.quadratic_form(&section.coefficients);
    (f, m - f)
}

/// Exact `(mean, variance)` of `a^* Q a / scale` for standard complex
/// Gaussian coefficients: `tr(Q)/scale` and `tr(Q^2)/scale^2`.
pub fn exact_moments_via_trace(q: &CMatrix, scale: f64) -> Result<(f64, f64), SamplingError> {
    let defect = q.hermitian_defect();
    if defect > 1e-12 {
        return Err(SamplingError::NonHermitianMatrix { defect });
    }
    Ok((
        q.trace().re / scale,
        q.frobenius_sq() / (scale * scale),
    ))
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy)]
pub struct PairCorrelation {
    pub estimate: f64,
    pub std_error: f64,
}

/// Monte Carlo mean of `(|s(x)|^2/B(x)) (|s(y)|^2/B(y))` over `num_samples`
/// sections; the exact value is `1 + N(x,y)^2`.
pub fn pair_correlation_estimate(
    eval: &KernelEvaluator,
    x: &ProjectivePoint,
    y: &ProjectivePoint,
    num_samples: usize,
    seed: u64,
) -> PairCorrelation {
    let vx = eval.section_values(x);
    let vy = eval.section_values(y);
    let bx: f64 = vx.iter().map(|z| z.norm_sqr()).sum();
    let by: f64 = vy.iter().map(|z| z.norm_sqr()).sum();
    let d = eval.dimension() as u64;
    let mut mean = NeumaierSum::new();
    let mut sq = NeumaierSum::new();
    for i in 0..num_samples as u64 {
        let mut sx = Complex64::new(0.0, 0.0);
        let mut sy = Complex64::new(0.0, 0.0);
        for j in 0..d {
            let a = gaussian_coefficient(seed, i, j);
            sx += a * vx[j as usize];
            sy += a * vy[j as usize];
        }
        let prod = (sx.norm_sqr() / bx) * (sy.norm_sqr() / by);
        mean.add(prod);
        sq.add(prod * prod);
    }
    let n = num_samples as f64;
    let m = mean.value() / n;
    let var = (sq.value() / n - m * m).max(0.0);
    PairCorrelation {
        estimate: m,
        std_error: (var / n).sqrt(),
    }
}
