//! Orthonormal bases of the degree-`k` section space, the reproducing kernel
//! of the orthogonal projection onto it, and direct checks of its diagonal,
//! near-diagonal and off-diagonal behavior.
//!
//! The reference family `sqrt((k+1) binom(k,j)) z^j e^k` is orthonormal for
//! the unperturbed metric; perturbed metrics are handled by assembling the
//! Gram matrix in this family and taking an unpivoted triangular
//! factorization (the Gram is a small perturbation of the identity, so no
//! pivoting is required and a non-positive pivot signals a broken metric or
//! an under-resolved quadrature).
//!
//! All pointwise section values are computed in homogeneous coordinates via a
//! recurrence started at the dominant binomial index, so no intermediate
//! quantity over- or underflows even at degree 1024.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::bundles::{taylor_decomposition_of, WeightField};
use crate::geometry::{
    diameter, geodesic_distance, normal_chart_at, NeumaierSum, ProjectivePoint, QuadratureRule,
};
use crate::linalg::{CMatrix, LinalgError};
use crate::sampling::gaussian_coefficient;

#[derive(Debug, Clone, PartialEq)]
pub enum BergmanError {
    /// The quadrature cannot integrate the Gram densities exactly.
    QuadratureUnderResolved { required: usize, available: usize },
    /// The Gram factorization failed (non-positive pivot or asymmetry).
    GramFactorization(LinalgError),
    /// Basis and weight data describe different degrees.
    DegreeMismatch { basis: u32, field: u32 },
}

impl fmt::Display for BergmanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BergmanError::QuadratureUnderResolved {
                required,
                available,
            } => write!(
                f,
                "quadrature exactness degree {available} is below the required {required}"
            ),
            BergmanError::GramFactorization(e) => write!(f, "Gram factorization failed: {e}"),
            BergmanError::DegreeMismatch { basis, field } => {
                write!(f, "basis degree {basis} does not match weight degree {field}")
            }
        }
    }
}

impl std::error::Error for BergmanError {}

impl From<LinalgError> for BergmanError {
    fn from(e: LinalgError) -> Self {
        BergmanError::GramFactorization(e)
    }
}

/// Exactness degree `build_onb` demands from its quadrature: `2k` for the
/// unperturbed metric (Gram densities are then exactly integrable), plus a
/// profile-dependent margin for the smooth metric factor otherwise.
pub fn required_quadrature_degree(field: &WeightField) -> usize {
    let base = 2 * field.k as usize;
    if field.eps == 0.0 {
        base
    } else {
        base + field.profile.quadrature_margin()
    }
}

/// An orthonormal basis of the degree-`k` section space, expressed by a
/// coefficient matrix over the closed-form reference family.
///
/// `coeff = None` encodes the identity (the reference family itself), which
/// is exact for the unperturbed metric.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    k: u32,
    eps: f64,
    coeff: Option<CMatrix>,
    gram_residual: f64,
}

impl OrthonormalBasis {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn dimension(&self) -> usize {
        self.k as usize + 1
    }

    /// Max deviation of the (verified) Gram from the identity.
    pub fn gram_residual(&self) -> f64 {
        self.gram_residual
    }

    /// Whether the basis is exactly the reference family.
    pub fn is_identity(&self) -> bool {
        self.coeff.is_none()
    }

    pub fn coefficient(&self, i: usize, j: usize) -> Complex64 {
        match &self.coeff {
            Some(c) => c.get(i, j),
            None => {
                if i == j {
                    Complex64::new(1.0, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }
        }
    }

    /// Rebuilds a basis from stored coefficients (cache load path). An exact
    /// identity matrix collapses back to the identity encoding.
    pub fn from_coefficients(k: u32, eps: f64, coeff: CMatrix, gram_residual: f64) -> Self {
        assert_eq!(coeff.dim(), k as usize + 1);
        let coeff = if coeff.is_identity(0.0) { None } else { Some(coeff) };
        Self {
            k,
            eps,
            coeff,
            gram_residual,
        }
    }
}

/// Builds the orthonormal basis for the metric described by `field`.
///
/// The Gram matrix of the reference family is assembled on the product rule
/// (collapsing the angular sum mode by mode), then factored `G = L L^*`; the
/// returned coefficients are `(L^*)^{-1}`, so `C^* G C = I`. For the
/// unperturbed metric the reference family is already orthonormal and `C = I`
/// exactly, with the verified Gram deviation recorded as the residual.
pub fn build_onb(
    field: &WeightField,
    quad: &QuadratureRule,
) -> Result<OrthonormalBasis, BergmanError> {
    let required = required_quadrature_degree(field);
    if quad.max_exact_degree() < required {
        return Err(BergmanError::QuadratureUnderResolved {
            required,
            available: quad.max_exact_degree(),
        });
    }
    let gram = gram_matrix(field, quad);
    if field.eps == 0.0 {
        let residual = gram.max_abs_diff(&CMatrix::identity(gram.dim()));
        return Ok(OrthonormalBasis {
            k: field.k,
            eps: 0.0,
            coeff: None,
            gram_residual: residual,
        });
    }
    let l = gram.cholesky()?;
    let c = l.conj_transpose().invert_upper_triangular();
    let residual = gram
        .congruence(&c)
        .max_abs_diff(&CMatrix::identity(gram.dim()));
    Ok(OrthonormalBasis {
        k: field.k,
        eps: field.eps,
        coeff: Some(c),
        gram_residual: residual,
    })
}

/// Gram matrix of the reference family under the metric of `field`.
///
/// Entries couple only through the angular mode `l = i - j`, so each radial
/// node contributes `w_s R_i(s) R_j(s) c_{i-j}(s)` with `c_l` the discrete
/// angular transform of the metric factor. Radial metrics keep only `l = 0`,
/// making the Gram exactly diagonal.
pub fn gram_matrix(field: &WeightField, quad: &QuadratureRule) -> CMatrix {
    let k = field.k as usize;
    let d = k + 1;
    let table = half_log_norms(field.k);
    let mut g = CMatrix::zeros(d);
    let s_nodes = quad.s_nodes();
    let s_weights = quad.s_weights();
    let m_ang = quad.angular_count();

    if field.is_angular_symmetric() {
        for (idx, &s) in s_nodes.iter().enumerate() {
            let w = s_weights[idx];
            let f = field.metric_factor(&ProjectivePoint::from_s_alpha(s, 0.0));
            let r = radial_reference_values(field.k, s, &table);
            for (j, rj) in r.iter().enumerate() {
                let cur = g.get(j, j);
                g.set(j, j, cur + Complex64::new(w * f * rj * rj, 0.0));
            }
        }
        return g;
    }

    // Angular transform of the metric factor per radial node, modes 0..=k.
    let mut modes = vec![Complex64::new(0.0, 0.0); k + 1];
    let mut samples = vec![0.0f64; m_ang];
    for (idx, &s) in s_nodes.iter().enumerate() {
        let w = s_weights[idx];
        for (j, sample) in samples.iter_mut().enumerate() {
            *sample = field.metric_factor(&ProjectivePoint::from_s_alpha(s, quad.alpha(j)));
        }
        for (l, mode) in modes.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &fv) in samples.iter().enumerate() {
                let ang = l as f64 * quad.alpha(j);
                acc += Complex64::from_polar(fv, ang);
            }
            *mode = acc / m_ang as f64;
        }
        let r = radial_reference_values(field.k, s, &table);
        for i in 0..d {
            for j in 0..d {
                let c = if i >= j { modes[i - j] } else { modes[j - i].conj() };
                let cur = g.get(i, j);
                g.set(i, j, cur + c * (w * r[i] * r[j]));
            }
        }
    }
    g
}

/// `0.5 (ln(k+1) + ln binom(k, j))` for `j = 0..=k`, via compensated
/// cumulative log-factorials.
pub(crate) fn half_log_norms(k: u32) -> Vec<f64> {
    let k = k as usize;
    let mut lnfact = vec![0.0f64; k + 2];
    let mut acc = NeumaierSum::new();
    for (i, slot) in lnfact.iter_mut().enumerate().skip(1) {
        acc.add((i as f64).ln());
        *slot = acc.value();
    }
    let lk1 = ((k + 1) as f64).ln();
    (0..=k)
        .map(|j| 0.5 * (lk1 + lnfact[k] - lnfact[j] - lnfact[k - j]))
        .collect()
}

/// Radial reference magnitudes `R_j(s) = sqrt((k+1) binom(k,j) (1-s)^j s^{k-j})`,
/// computed from the dominant index outward so nothing overflows.
pub(crate) fn radial_reference_values(k: u32, s: f64, table: &[f64]) -> Vec<f64> {
    let kd = k as usize;
    let d = kd + 1;
    let mut r = vec![0.0f64; d];
    if s <= 0.0 {
        r[kd] = ((kd + 1) as f64).sqrt();
        return r;
    }
    if s >= 1.0 {
        r[0] = ((kd + 1) as f64).sqrt();
        return r;
    }
    let peak = ((k as f64) * (1.0 - s)).round().clamp(0.0, k as f64) as usize;
    r[peak] = (table[peak] + 0.5 * (peak as f64 * (1.0 - s).ln() + (kd - peak) as f64 * s.ln()))
        .exp();
    let up = ((1.0 - s) / s).sqrt();
    for j in peak..kd {
        r[j + 1] = r[j] * ((kd - j) as f64 / (j + 1) as f64).sqrt() * up;
    }
    let down = (s / (1.0 - s)).sqrt();
    for j in (1..=peak).rev() {
        r[j - 1] = r[j] * (j as f64 / (kd - j + 1) as f64).sqrt() * down;
    }
    r
}

/// Reference section values at `x` in the unit round frame:
/// `g_j(x) = sqrt((k+1) binom(k,j)) z1^j z0^{k-j}` for the stored unit
/// representative. Moduli are representative-independent.
pub(crate) fn reference_section_values(k: u32, x: &ProjectivePoint, table: &[f64]) -> Vec<Complex64> {
    let kd = k as usize;
    let d = kd + 1;
    let mut v = vec![Complex64::new(0.0, 0.0); d];
    let (z0, z1) = (x.z0(), x.z1());
    let (r0, r1) = (z0.norm(), z1.norm());
    if r1 == 0.0 {
        v[0] = Complex64::from_polar(((kd + 1) as f64).sqrt(), kd as f64 * z0.arg());
        return v;
    }
    if r0 == 0.0 {
        v[kd] = Complex64::from_polar(((kd + 1) as f64).sqrt(), kd as f64 * z1.arg());
        return v;
    }
    let peak = ((k as f64) * r1 * r1).round().clamp(0.0, k as f64) as usize;
    let mag = (table[peak] + peak as f64 * r1.ln() + (kd - peak) as f64 * r0.ln()).exp();
    let phase = peak as f64 * z1.arg() + (kd - peak) as f64 * z0.arg();
    v[peak] = Complex64::from_polar(mag, phase);
    let up = z1 / z0;
    for j in peak..kd {
        v[j + 1] = v[j] * up * ((kd - j) as f64 / (j + 1) as f64).sqrt();
    }
    let down = z0 / z1;
    for j in (1..=peak).rev() {
        v[j - 1] = v[j] * down * (j as f64 / (kd - j + 1) as f64).sqrt();
    }
    v
}

/// A measured/predicted pair from the near-diagonal scaling law.
#[derive(Debug, Clone, Copy)]
pub struct NearDiagonalSample {
    pub measured: f64,
    pub target: f64,
    pub deviation: f64,
}

/// Result of fitting the off-diagonal decay envelope
/// `N^2 <= C1 exp(-C2 sqrt(A) d)` over random far pairs.
#[derive(Debug, Clone, Copy)]
pub struct OffDiagonalFit {
    pub c1: f64,
    pub c2: f64,
    /// Distance cutoff actually used for "far" pairs.
    pub cutoff: f64,
    /// True when `b log A / sqrt(A)` exceeded the surface diameter and the
    /// cutoff was clamped to 0.75 * diameter.
    pub clamped: bool,
    pub pairs_total: usize,
    /// Pairs entering the least-squares slope (kernel value representable).
    pub pairs_fitted: usize,
    /// Fraction of pairs exceeding the fitted envelope scaled by 1.05.
    pub violation_fraction: f64,
    pub max_violation: f64,
}

/// Evaluates sections, the kernel function `B`, and the normalized kernel
/// `N` for one basis; read-only and shareable after construction.
#[derive(Debug)]
pub struct KernelEvaluator {
    basis: OrthonormalBasis,
    field: WeightField,
    quad: Arc<QuadratureRule>,
    table: Vec<f64>,
    node_b: OnceLock<Vec<f64>>,
}

impl KernelEvaluator {
    pub fn new(
        basis: OrthonormalBasis,
        field: WeightField,
        quad: Arc<QuadratureRule>,
    ) -> Result<Self, BergmanError> {
        if basis.k() != field.k {
            return Err(BergmanError::DegreeMismatch {
                basis: basis.k(),
                field: field.k,
            });
        }
        let table = half_log_norms(field.k);
        Ok(Self {
            basis,
            field,
            quad,
            table,
            node_b: OnceLock::new(),
        })
    }

    pub fn basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    pub fn field(&self) -> &WeightField {
        &self.field
    }

    pub fn quadrature(&self) -> &Arc<QuadratureRule> {
        &self.quad
    }

    pub fn dimension(&self) -> usize {
        self.basis.dimension()
    }

    /// Curvature scale `A_p`.
    pub fn scale(&self) -> f64 {
        self.field.curvature_scale()
    }

    /// Values of all basis sections at `x` in the unit round frame; the
    /// pointwise norm of `sum a_j S_j` is `|sum a_j v_j| e^{-eps eta(x)}`.
    pub fn section_values(&self, x: &ProjectivePoint) -> Vec<Complex64> {
        let g = reference_section_values(self.field.k, x, &self.table);
        match &self.basis.coeff {
            None => g,
            Some(c) => c.apply_transpose(&g),
        }
    }

    /// `|s(x)|^2` in the metric, for a coefficient vector over the basis.
    pub fn section_norm_sq(&self, coeffs: &[Complex64], x: &ProjectivePoint) -> f64 {
        let v = self.section_values(x);
        let mut s = Complex64::new(0.0, 0.0);
        for (a, vi) in coeffs.iter().zip(&v) {
            s += a * vi;
        }
        s.norm_sqr() * self.field.metric_factor(x)
    }

    /// The kernel function `B(x)`: sum of squared section norms at `x`.
    pub fn bergman_function(&self, x: &ProjectivePoint) -> f64 {
        let v = self.section_values(x);
        let sum: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        sum * self.field.metric_factor(x)
    }

    /// Pointwise kernel norm `|K(x, y)|` in the metric.
    pub fn kernel_norm(&self, x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
        let vx = self.section_values(x);
        let vy = self.section_values(y);
        let mut s = Complex64::new(0.0, 0.0);
        for (a, b) in vx.iter().zip(&vy) {
            s += a * b.conj();
        }
        s.norm() * (self.field.metric_factor(x) * self.field.metric_factor(y)).sqrt()
    }

    /// Normalized kernel `N(x, y) = |K(x, y)| / sqrt(B(x) B(y))`, clamped to
    /// `[0, 1]` (Cauchy-Schwarz holds exactly; rounding may exceed by ulps).
    pub fn normalized_kernel(&self, x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
        let vx = self.section_values(x);
        let vy = self.section_values(y);
        let mut s = Complex64::new(0.0, 0.0);
        let mut bx = 0.0;
        let mut by = 0.0;
        for (a, b) in vx.iter().zip(&vy) {
            s += a * b.conj();
            bx += a.norm_sqr();
            by += b.norm_sqr();
        }
        (s.norm() / (bx * by).sqrt()).clamp(0.0, 1.0)
    }

    /// `B` at every quadrature node (computed once; values are sums of
    /// squares and strictly positive since the sections have no common zero).
    pub fn node_bergman(&self) -> &[f64] {
        self.node_b.get_or_init(|| {
            let quad = &self.quad;
            let m_ang = quad.angular_count();
            let mut out = vec![0.0f64; quad.len()];
            if self.field.is_angular_symmetric() {
                // Diagonal coefficients: radial metrics keep the Gram diagonal.
                let scale: Vec<f64> = (0..self.dimension())
                    .map(|j| self.basis.coefficient(j, j).norm_sqr())
                    .collect();
                for (i, &s) in quad.s_nodes().iter().enumerate() {
                    let r = radial_reference_values(self.field.k, s, &self.table);
                    let f = self
                        .field
                        .metric_factor(&ProjectivePoint::from_s_alpha(s, 0.0));
                    let b: f64 = r
                        .iter()
                        .zip(&scale)
                        .map(|(rj, sc)| sc * rj * rj)
                        .sum::<f64>()
                        * f;
                    for j in 0..m_ang {
                        out[i * m_ang + j] = b;
                    }
                }
            } else {
                for (i, node) in quad.nodes().iter().enumerate() {
                    out[i] = self.bergman_function(node);
                }
            }
            debug_assert!(out.iter().all(|b| *b > 0.0));
            out
        })
    }

    /// `integral N(x_g, y) dV(y)` for each probe point, restricted to
    /// `d(x_g, y) <= cutoff` when given; one sweep over the nodes.
    pub fn kernel_integrals_from(
        &self,
        probes: &[ProjectivePoint],
        cutoff: Option<f64>,
    ) -> Vec<f64> {
        let vps: Vec<Vec<Complex64>> = probes.iter().map(|x| self.section_values(x)).collect();
        let bps: Vec<f64> = vps
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).sum::<f64>())
            .collect();
        let node_b = self.node_bergman();
        let metric_free = |b_raw: f64, node: &ProjectivePoint| {
            // node_bergman already includes the metric factor; the frame
            // factors cancel inside N, so work with raw sums here.
            b_raw / self.field.metric_factor(node)
        };
        let mut sums: Vec<NeumaierSum> = vec![NeumaierSum::new(); probes.len()];
        for (idx, node) in self.quad.nodes().iter().enumerate() {
            let w = self.quad.weights()[idx];
            let vy = self.section_values(node);
            let by = metric_free(node_b[idx], node);
            for (pi, vx) in vps.iter().enumerate() {
                if let Some(r) = cutoff {
                    if geodesic_distance(&probes[pi], node) > r {
                        continue;
                    }
                }
                let mut s = Complex64::new(0.0, 0.0);
                for (a, b) in vx.iter().zip(&vy) {
                    s += a * b.conj();
                }
                let n = (s.norm() / (bps[pi] * by).sqrt()).clamp(0.0, 1.0);
                sums[pi].add(w * n);
            }
        }
        sums.iter().map(|s| s.value()).collect()
    }

    /// Max node deviation between a section and its kernel integral
    /// (quadrature form of the reproducing property).
    pub fn reproducing_residual(&self, coeffs: &[Complex64]) -> f64 {
        assert_eq!(coeffs.len(), self.dimension());
        let d = self.dimension();
        let mut projected = vec![Complex64::new(0.0, 0.0); d];
        for (idx, node) in self.quad.nodes().iter().enumerate() {
            let w = self.quad.weights()[idx];
            let v = self.section_values(node);
            let f = self.field.metric_factor(node);
            let mut s = Complex64::new(0.0, 0.0);
            for (a, vi) in coeffs.iter().zip(&v) {
                s += a * vi;
            }
            let c = s * (w * f);
            for (p, vi) in projected.iter_mut().zip(&v) {
                *p += c * vi.conj();
            }
        }
        let mut worst = 0.0f64;
        for node in self.quad.nodes() {
            let v = self.section_values(node);
            let mut diff = Complex64::new(0.0, 0.0);
            for ((a, c), vi) in coeffs.iter().zip(&projected).zip(&v) {
                diff += (a - c) * vi;
            }
            worst = worst.max(diff.norm() * self.field.metric_factor(node).sqrt());
        }
        worst
    }

    /// Gaussian decay rate `lambda / A` used as the near-diagonal target:
    /// `pi/2` exactly for the unperturbed metric, otherwise the extracted
    /// mixed second derivative at the center.
    pub fn near_diagonal_rate(&self, x: &ProjectivePoint) -> f64 {
        if self.field.eps == 0.0 {
            PI / 2.0
        } else {
            taylor_decomposition_of(&self.field, x).lambda / self.scale()
        }
    }

    /// Measured normalized kernel at `(x + u/sqrt(A), x + conj(v)/sqrt(A))`
    /// against the Gaussian target `exp(-(lambda/A) |u - conj(v)|^2)`.
    pub fn near_diagonal_profile(
        &self,
        x: &ProjectivePoint,
        u: Complex64,
        v: Complex64,
    ) -> NearDiagonalSample {
        let chart = normal_chart_at(x);
        let sqrt_a = self.scale().sqrt();
        let y1 = chart.map(u / sqrt_a);
        let y2 = chart.map(v.conj() / sqrt_a);
        let measured = self.normalized_kernel(&y1, &y2);
        let rate = self.near_diagonal_rate(x);
        let target = (-rate * (u - v.conj()).norm_sqr()).exp();
        NearDiagonalSample {
            measured,
            target,
            deviation: (measured - target).abs(),
        }
    }

    /// Fits the exponential off-diagonal envelope over random far pairs.
    ///
    /// The slope comes from least squares of `log N^2` against
    /// `-sqrt(A) d`; the constant is then lifted so the envelope covers every
    /// sampled pair, and violations are counted against 1.05 times that
    /// envelope. Pairs whose kernel value underflows satisfy any envelope and
    /// are excluded from the slope fit only.
    pub fn offdiagonal_decay_fit(&self, num_pairs: usize, b: f64, seed: u64) -> OffDiagonalFit {
        let a = self.scale();
        let raw_cutoff = b * a.ln() / a.sqrt();
        let max_cutoff = 0.75 * diameter();
        let (cutoff, clamped) = if raw_cutoff > max_cutoff {
            (max_cutoff, true)
        } else {
            (raw_cutoff, false)
        };

        let mut dists = Vec::with_capacity(num_pairs);
        let mut log_n2 = Vec::with_capacity(num_pairs);
        let mut deep = 0usize;
        let mut attempt = 0u64;
        while dists.len() + deep < num_pairs && attempt < 2000 * num_pairs as u64 {
            let x = random_point(seed, attempt, 0);
            let y = random_point(seed, attempt, 1);
            attempt += 1;
            let dist = geodesic_distance(&x, &y);
            if dist < cutoff {
                continue;
            }
            let n = self.normalized_kernel(&x, &y);
            let n2 = n * n;
            if n2 < 1e-290 {
                deep += 1;
                continue;
            }
            dists.push(dist);
            log_n2.push(n2.ln());
        }
        let total = dists.len() + deep;

        // Least squares of log N^2 = intercept - c2 * t, t = sqrt(A) d.
        let ts: Vec<f64> = dists.iter().map(|d| a.sqrt() * d).collect();
        let n = ts.len() as f64;
        let mean_t = ts.iter().sum::<f64>() / n;
        let mean_y = log_n2.iter().sum::<f64>() / n;
        let mut cov = 0.0;
        let mut var = 0.0;
        for (t, y) in ts.iter().zip(&log_n2) {
            cov += (t - mean_t) * (y - mean_y);
            var += (t - mean_t) * (t - mean_t);
        }
        let c2 = -cov / var;
        // Envelope constant: smallest C1 with slope c2 covering all pairs.
        let mut shift = f64::NEG_INFINITY;
        for (t, y) in ts.iter().zip(&log_n2) {
            shift = shift.max(y + c2 * t);
        }
        let c1 = shift.exp();

        let mut violations = 0usize;
        let mut max_violation = 0.0f64;
        for (t, y) in ts.iter().zip(&log_n2) {
            let envelope = (1.05f64).ln() + shift - c2 * t;
            if *y > envelope {
                violations += 1;
                max_violation = max_violation.max((y - envelope).exp() - 1.0);
            }
        }
        OffDiagonalFit {
            c1,
            c2,
            cutoff,
            clamped,
            pairs_total: total,
            pairs_fitted: ts.len(),
            violation_fraction: violations as f64 / total.max(1) as f64,
            max_violation,
        }
    }
}

/// Haar-uniform random point from the deterministic coefficient stream.
pub(crate) fn random_point(seed: u64, index: u64, slot: u64) -> ProjectivePoint {
    let a = gaussian_coefficient(seed, index, 2 * slot);
    let b = gaussian_coefficient(seed, index, 2 * slot + 1);
    ProjectivePoint::new(a, b).expect("Gaussian pair is nonzero")
}

/// Convenience: build the basis and wrap it in an evaluator.
pub fn build_evaluator(
    field: &WeightField,
    quad: Arc<QuadratureRule>,
) -> Result<KernelEvaluator, BergmanError> {
    let basis = build_onb(field, &quad)?;
    KernelEvaluator::new(basis, *field, quad)
}
