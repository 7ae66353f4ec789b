//! The metric sequence: degree-`k_p` powers of the hyperplane bundle with the
//! round reference metric times a controlled perturbation `e^{-2 eps_p eta}`.
//!
//! Local weights are `phi_p = (k_p/2) log(1+|z|^2) + eps_p eta` in an affine
//! chart, so the curvature is `k_p omega + eps_p dd^c eta`. The module checks
//! the curvature approximation rate `||c1/A_p - omega|| = O(A_p^{-a})`, the
//! third-derivative growth proxy used by the kernel asymptotics hypothesis,
//! and extracts second-order Taylor data of the weight in a normal chart.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use crate::geometry::{
    normal_chart_at, sphere_grid, AffineChart, ProjectivePoint, SphereFunction,
};

#[derive(Debug, Clone, PartialEq)]
pub enum BundleError {
    /// Finite-difference spacing too small: noise would dominate.
    StencilTooSmall { spacing: f64 },
}

impl fmt::Display for BundleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BundleError::StencilTooSmall { spacing } => {
                write!(f, "stencil spacing {spacing:e} is below the 1e-4 floor")
            }
        }
    }
}

impl std::error::Error for BundleError {}

/// Degree laws `p -> k_p` for the bundle sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeLaw {
    /// `k_p = p`. Reciprocals diverge; rejected by the almost-sure experiments.
    Linear,
    /// `k_p = p^2` (default for the equidistribution runs).
    Square,
    /// `k_p = 2^p`.
    PowerOfTwo,
}

impl DegreeLaw {
    pub fn degree(&self, p: u32) -> u32 {
        match self {
            DegreeLaw::Linear => p,
            DegreeLaw::Square => p * p,
            DegreeLaw::PowerOfTwo => 1u32 << p,
        }
    }

    /// Whether `sum_p 1/k_p` converges (needed for Borel-Cantelli runs).
    pub fn reciprocal_sum_converges(&self) -> bool {
        !matches!(self, DegreeLaw::Linear)
    }

    pub fn id(&self) -> &'static str {
        match self {
            DegreeLaw::Linear => "p",
            DegreeLaw::Square => "p^2",
            DegreeLaw::PowerOfTwo => "2^p",
        }
    }
}

/// Amplitude laws `p -> eps_p` for the metric perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AmplitudeLaw {
    Zero,
    /// `eps_p = c A_p^{1-a}`, with `a` the target approximation rate.
    Power { c: f64 },
}

impl AmplitudeLaw {
    pub fn id(&self) -> &'static str {
        match self {
            AmplitudeLaw::Zero => "zero",
            AmplitudeLaw::Power { .. } => "power",
        }
    }
}

/// The perturbation profile `eta`: a fixed smooth function with known
/// curvature data where a closed form exists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PerturbationProfile {
    pub id: &'static str,
    pub shape: SphereFunction,
}

impl PerturbationProfile {
    pub fn constant() -> Self {
        Self {
            id: "const1",
            shape: SphereFunction::One,
        }
    }

    pub fn height() -> Self {
        Self {
            id: "height",
            shape: SphereFunction::Height,
        }
    }

    pub fn xcoord() -> Self {
        Self {
            id: "xcoord",
            shape: SphereFunction::BlochX,
        }
    }

    pub fn bump() -> Self {
        Self {
            id: "bump",
            shape: SphereFunction::Bump,
        }
    }

    pub fn by_id(id: &str) -> Option<Self> {
        match id {
            "const1" => Some(Self::constant()),
            "height" => Some(Self::height()),
            "xcoord" => Some(Self::xcoord()),
            "bump" => Some(Self::bump()),
            _ => None,
        }
    }

    pub fn eval(&self, x: &ProjectivePoint) -> f64 {
        self.shape.eval(x)
    }

    pub fn is_radial(&self) -> bool {
        self.shape.is_radial()
    }

    /// Closed-form density `dd^c eta / omega` where known.
    ///
    /// The constant is flat; the two first spherical harmonics satisfy
    /// `dd^c eta = -4 eta omega` in this normalization. The bump has no
    /// closed form and is differentiated numerically.
    pub fn curvature_density(&self, x: &ProjectivePoint) -> Option<f64> {
        match self.shape {
            SphereFunction::One => Some(0.0),
            SphereFunction::Height | SphereFunction::BlochX => Some(-4.0 * self.eval(x)),
            SphereFunction::Bump => None,
        }
    }

    /// Closed-form bound for `sup |dd^c eta / omega|` where known.
    pub fn curvature_sup_bound(&self) -> Option<f64> {
        match self.shape {
            SphereFunction::One => Some(0.0),
            SphereFunction::Height | SphereFunction::BlochX => Some(4.0),
            SphereFunction::Bump => None,
        }
    }

    /// Extra quadrature exactness degree needed for Gram integrals against
    /// `e^{-2 eps eta}`. The harmonic profiles are entire in the radial
    /// variable and Gauss-Legendre converges past machine precision with a
    /// small margin; the bump is smooth but not analytic and needs
    /// substantially more radial resolution (measured: margin 384 reaches
    /// ~1e-11 across the degree range).
    pub fn quadrature_margin(&self) -> usize {
        match self.shape {
            SphereFunction::Bump => 384,
            _ => 8,
        }
    }
}

/// The sequence `(L_p, h_p)`: degree law, perturbation amplitude law and
/// profile, and the target curvature approximation rate `a`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSequenceSpec {
    pub degree_law: DegreeLaw,
    pub amplitude: AmplitudeLaw,
    pub profile: PerturbationProfile,
    /// Target rate `a > 0` in `c1/A_p = omega + O(A_p^{-a})`.
    pub rate: f64,
}

impl MetricSequenceSpec {
    /// The unperturbed reference sequence.
    pub fn fubini_study(law: DegreeLaw) -> Self {
        Self {
            degree_law: law,
            amplitude: AmplitudeLaw::Zero,
            profile: PerturbationProfile::height(),
            rate: 0.5,
        }
    }

    /// Perturbed sequence `eps_p = c A_p^{1-a}` with the given profile.
    pub fn perturbed(law: DegreeLaw, profile: PerturbationProfile, c: f64, rate: f64) -> Self {
        Self {
            degree_law: law,
            amplitude: AmplitudeLaw::Power { c },
            profile,
            rate,
        }
    }

    pub fn degree(&self, p: u32) -> u32 {
        self.degree_law.degree(p)
    }

    /// Perturbation amplitude as a function of the curvature scale `A_p = k_p`.
    pub fn amplitude_for_degree(&self, k: u32) -> f64 {
        match self.amplitude {
            AmplitudeLaw::Zero => 0.0,
            AmplitudeLaw::Power { c } => c * (k as f64).powf(1.0 - self.rate),
        }
    }

    pub fn weight_field(&self, p: u32) -> WeightField {
        self.weight_field_for_degree(self.degree(p))
    }

    pub fn weight_field_for_degree(&self, k: u32) -> WeightField {
        WeightField {
            k,
            eps: self.amplitude_for_degree(k),
            profile: self.profile,
            stencil: 1e-2,
        }
    }
}

/// The weight data of `h_p` at one index: degree, amplitude, profile, and the
/// finite-difference stencil spacing for derivative estimates.
#[derive(Debug, Clone, Copy)]
pub struct WeightField {
    pub k: u32,
    pub eps: f64,
    pub profile: PerturbationProfile,
    pub stencil: f64,
}

impl WeightField {
    pub fn fubini_study(k: u32) -> Self {
        Self {
            k,
            eps: 0.0,
            profile: PerturbationProfile::height(),
            stencil: 1e-2,
        }
    }

    pub fn dimension(&self) -> usize {
        self.k as usize + 1
    }

    /// `A_p`, the curvature scale, equals the degree here.
    pub fn curvature_scale(&self) -> f64 {
        self.k as f64
    }

    /// Whether the full metric factor has no angular dependence.
    pub fn is_angular_symmetric(&self) -> bool {
        self.eps == 0.0 || self.profile.is_radial()
    }

    /// The non-reference metric factor `e^{-2 eps eta(x)}` against the
    /// degree-`k` power of the round metric.
    pub fn metric_factor(&self, x: &ProjectivePoint) -> f64 {
        if self.eps == 0.0 {
            1.0
        } else {
            (-2.0 * self.eps * self.profile.eval(x)).exp()
        }
    }

    /// Weight in the requested affine chart; `None` at that chart's pole.
    pub fn weight_in_chart(&self, x: &ProjectivePoint, chart: AffineChart) -> Option<f64> {
        let z = x.affine_in(chart)?;
        Some(0.5 * self.k as f64 * z.norm_sqr().ln_1p() + self.eps * self.profile.eval(x))
    }

    /// Weight in the canonical chart of `x` (affine coordinate of modulus <= 1,
    /// so the value is always finite; chart transitions shift the weight by
    /// `k log |z|`, which cancels in every metric quantity).
    pub fn weight_at(&self, x: &ProjectivePoint) -> f64 {
        self.weight_in_chart(x, x.canonical_chart())
            .expect("canonical chart contains its point")
    }

    /// Pointwise curvature deviation density `|eps * dd^c eta / omega| / A_p`,
    /// from the closed form when available, otherwise central differences.
    pub fn curvature_deviation_at(&self, x: &ProjectivePoint) -> f64 {
        if self.eps == 0.0 {
            return 0.0;
        }
        let density = self
            .profile
            .curvature_density(x)
            .unwrap_or_else(|| numeric_curvature_density(&self.profile, x, 1e-3));
        (self.eps * density).abs() / self.curvature_scale()
    }
}

/// `dd^c eta / omega` by a five-point Laplacian in the canonical chart:
/// the density equals `(Delta eta / 2) (1+|z|^2)^2` in an affine chart.
fn numeric_curvature_density(profile: &PerturbationProfile, x: &ProjectivePoint, h: f64) -> f64 {
    let chart = x.canonical_chart();
    let z = x.affine_in(chart).expect("canonical chart");
    let f = |dz: Complex64| profile.eval(&chart_point(chart, z + dz));
    let lap = (f(Complex64::new(h, 0.0))
        + f(Complex64::new(-h, 0.0))
        + f(Complex64::new(0.0, h))
        + f(Complex64::new(0.0, -h))
        - 4.0 * f(Complex64::new(0.0, 0.0)))
        / (h * h);
    0.5 * lap * (1.0 + z.norm_sqr()).powi(2)
}

fn chart_point(chart: AffineChart, z: Complex64) -> ProjectivePoint {
    let one = Complex64::new(1.0, 0.0);
    match chart {
        AffineChart::Zero => ProjectivePoint::new(one, z).expect("finite"),
        AffineChart::One => ProjectivePoint::new(z, one).expect("finite"),
    }
}

/// Local weight of `h_p` (operation form: delegates to the weight field).
pub fn weight_at(spec: &MetricSequenceSpec, p: u32, x: &ProjectivePoint) -> f64 {
    spec.weight_field(p).weight_at(x)
}

/// Sup-norm estimate of `||c1(L_p, h_p)/A_p - omega||` over a fixed grid.
///
/// Exactly zero for the unperturbed metric. The scaled quantity
/// `deviation * A_p^a` should stay bounded along the sequence; the runner
/// warns (does not fail) when it exceeds the configured constant.
pub fn check_diophantine(spec: &MetricSequenceSpec, p: u32) -> f64 {
    let field = spec.weight_field(p);
    if field.eps == 0.0 {
        return 0.0;
    }
    if let Some(bound) = field.profile.curvature_sup_bound() {
        return field.eps * bound / field.curvature_scale();
    }
    sphere_grid(128)
        .iter()
        .map(|x| field.curvature_deviation_at(x))
        .fold(0.0, f64::max)
}

/// `check_diophantine` rescaled by `A_p^a`; bounded iff the rate holds.
pub fn diophantine_excess(spec: &MetricSequenceSpec, p: u32) -> f64 {
    check_diophantine(spec, p) * (spec.degree(p) as f64).powf(spec.rate)
}

/// Grid proxy for the third-order weight norm `||h_p||_3`.
///
/// Maximum of all chart-coordinate derivatives of `phi_p` up to order three
/// over a grid covering both charts, floored at 1. Used only for the decay
/// hypothesis `proxy^{1/3}/sqrt(A_p) -> 0`, never in kernel computations.
pub fn estimate_metric_norm3(spec: &MetricSequenceSpec, p: u32) -> Result<f64, BundleError> {
    let field = spec.weight_field(p);
    let by_order = max_derivative_by_order(&field, field.stencil)?;
    Ok(by_order.into_iter().fold(1.0, f64::max))
}

/// Sup over the grid of |D^alpha phi| for |alpha| = 0, 1, 2, 3 separately.
pub fn max_derivative_by_order(field: &WeightField, spacing: f64) -> Result<[f64; 4], BundleError> {
    if spacing < 1e-4 {
        return Err(BundleError::StencilTooSmall { spacing });
    }
    let h = spacing;
    let mut out = [0.0f64; 4];
    for chart in [AffineChart::Zero, AffineChart::One] {
        let f = |zx: f64, zy: f64| {
            field
                .weight_in_chart(&chart_point(chart, Complex64::new(zx, zy)), chart)
                .expect("finite in own chart")
        };
        // 9x9 grid on |z| <= 1.2 per chart (charts overlap near |z| = 1).
        let n = 9;
        for ix in 0..n {
            for iy in 0..n {
                let x = -1.2 + 2.4 * ix as f64 / (n - 1) as f64;
                let y = -1.2 + 2.4 * iy as f64 / (n - 1) as f64;
                let d = derivative_stencils(&f, x, y, h);
                for (order, v) in d.iter().enumerate() {
                    out[order] = out[order].max(*v);
                }
            }
        }
    }
    Ok(out)
}

/// Max absolute derivative per order at one point, central differences.
fn derivative_stencils<F: Fn(f64, f64) -> f64>(f: &F, x: f64, y: f64, h: f64) -> [f64; 4] {
    let fc = f(x, y);
    let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
    let fy = (f(x, y + h) - f(x, y - h)) / (2.0 * h);
    let fxx = (f(x + h, y) - 2.0 * fc + f(x - h, y)) / (h * h);
    let fyy = (f(x, y + h) - 2.0 * fc + f(x, y - h)) / (h * h);
    let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h) + f(x - h, y - h))
        / (4.0 * h * h);
    let h3 = h * h * h;
    let fxxx = (f(x + 2.0 * h, y) - 2.0 * f(x + h, y) + 2.0 * f(x - h, y) - f(x - 2.0 * h, y))
        / (2.0 * h3);
    let fyyy = (f(x, y + 2.0 * h) - 2.0 * f(x, y + h) + 2.0 * f(x, y - h) - f(x, y - 2.0 * h))
        / (2.0 * h3);
    let fxxy = (f(x + h, y + h) - 2.0 * f(x, y + h) + f(x - h, y + h) - f(x + h, y - h)
        + 2.0 * f(x, y - h)
        - f(x - h, y - h))
        / (2.0 * h3);
    let fxyy = (f(x + h, y + h) - 2.0 * f(x + h, y) + f(x + h, y - h) - f(x - h, y + h)
        + 2.0 * f(x - h, y)
        - f(x - h, y - h))
        / (2.0 * h3);
    [
        fc.abs(),
        fx.abs().max(fy.abs()),
        fxx.abs().max(fyy.abs()).max(fxy.abs()),
        fxxx.abs().max(fyyy.abs()).max(fxxy.abs()).max(fxyy.abs()),
    ]
}

/// Second-order Taylor data of the weight in the normal chart at a point:
/// `phi(w) = Re(psi(w)) + lambda |w|^2 + O(|w|^3)` with `psi` holomorphic of
/// degree at most two.
#[derive(Debug, Clone, Copy)]
pub struct TaylorDecomposition {
    /// Coefficient of `|w|^2`: the mixed second derivative at the center.
    pub lambda: f64,
    /// Holomorphic jet `psi(w) = psi[0] + psi[1] w + psi[2] w^2`.
    pub psi: [Complex64; 3],
    /// Fitted bound for `|phi - Re psi - lambda |w|^2| / |w|^3` on `|w| <= 0.1`.
    pub remainder_bound: f64,
}

impl TaylorDecomposition {
    /// `Re psi(w) + lambda |w|^2`.
    pub fn reconstruct(&self, w: Complex64) -> f64 {
        (self.psi[0] + self.psi[1] * w + self.psi[2] * w * w).re + self.lambda * w.norm_sqr()
    }
}

/// Extracts the Taylor data of `phi_p` in the normal chart at `x`.
///
/// `lambda` is the mixed derivative (quarter-Laplacian) at the origin from
/// fourth-order stencils; `psi` collects the value, gradient and pure second
/// derivative; the remainder bound is fitted on rings `|w| <= 0.1`.
pub fn taylor_decomposition(
    spec: &MetricSequenceSpec,
    p: u32,
    x: &ProjectivePoint,
) -> TaylorDecomposition {
    let field = spec.weight_field(p);
    taylor_decomposition_of(&field, x)
}

pub fn taylor_decomposition_of(field: &WeightField, x: &ProjectivePoint) -> TaylorDecomposition {
    let chart = normal_chart_at(x);
    let frame_chart = x.canonical_chart();
    let f = |w: Complex64| {
        field
            .weight_in_chart(&chart.map(w), frame_chart)
            .expect("stencil stays in the center chart")
    };
    let h = 1e-2;
    let d4 = |g: &dyn Fn(f64) -> f64| {
        // Fourth-order first and second derivative at 0.
        let d1 = (-g(2.0 * h) + 8.0 * g(h) - 8.0 * g(-h) + g(-2.0 * h)) / (12.0 * h);
        let d2 = (-g(2.0 * h) + 16.0 * g(h) - 30.0 * g(0.0) + 16.0 * g(-h) - g(-2.0 * h))
            / (12.0 * h * h);
        (d1, d2)
    };
    let (fa, faa) = d4(&|t| f(Complex64::new(t, 0.0)));
    let (fb, fbb) = d4(&|t| f(Complex64::new(0.0, t)));
    let fab = (f(Complex64::new(h, h)) - f(Complex64::new(h, -h)) - f(Complex64::new(-h, h))
        + f(Complex64::new(-h, -h)))
        / (4.0 * h * h);

    let lambda = 0.25 * (faa + fbb);
    let psi = [
        Complex64::new(f(Complex64::new(0.0, 0.0)), 0.0),
        Complex64::new(fa, -fb),
        Complex64::new(0.25 * (faa - fbb), -0.5 * fab),
    ];
    let mut decomp = TaylorDecomposition {
        lambda,
        psi,
        remainder_bound: 0.0,
    };
    let mut bound = 0.0f64;
    for ir in 1..=4 {
        let r = 0.025 * ir as f64;
        for ia in 0..16 {
            let w = Complex64::from_polar(r, 2.0 * PI * ia as f64 / 16.0);
            let err = (f(w) - decomp.reconstruct(w)).abs();
            bound = bound.max(err / (r * r * r));
        }
    }
    decomp.remainder_bound = bound;
    decomp
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn pt(re: f64, im: f64) -> ProjectivePoint {
        ProjectivePoint::from_affine(Complex64::new(re, im))
    }

    #[test]
    fn weight_values_match_closed_forms() {
        let fs = MetricSequenceSpec::fubini_study(DegreeLaw::Linear);
        // z = 0: log 1 = 0 for any degree.
        assert_abs_diff_eq!(weight_at(&fs, 7, &pt(0.0, 0.0)), 0.0, epsilon = 1e-15);
        // k = 2, |z| = 1: (2/2) log 2.
        assert_abs_diff_eq!(
            weight_at(&fs, 2, &pt(1.0, 0.0)),
            2.0f64.ln(),
            epsilon = 1e-14
        );
        // Constant profile adds eps everywhere.
        let field = WeightField {
            k: 2,
            eps: 0.1,
            profile: PerturbationProfile::constant(),
            stencil: 1e-2,
        };
        let base = WeightField::fubini_study(2);
        for x in [pt(0.0, 0.0), pt(0.7, -0.3), pt(1.0, 1.0)] {
            assert_abs_diff_eq!(
                field.weight_at(&x) - base.weight_at(&x),
                0.1,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn weights_agree_across_charts_up_to_transition() {
        // phi_0 - phi_1 = k log|z| on the overlap.
        let field = WeightField {
            k: 6,
            eps: 0.2,
            profile: PerturbationProfile::xcoord(),
            stencil: 1e-2,
        };
        for x in [pt(0.9, 0.1), pt(1.0, -0.4), pt(-1.2, 0.3)] {
            let phi0 = field.weight_in_chart(&x, AffineChart::Zero).unwrap();
            let phi1 = field.weight_in_chart(&x, AffineChart::One).unwrap();
            let z = x.affine_in(AffineChart::Zero).unwrap();
            assert_abs_diff_eq!(phi0 - phi1, 6.0 * z.norm().ln(), epsilon = 1e-12);
        }
    }

    #[test]
    fn diophantine_deviation_unperturbed_is_exactly_zero() {
        let fs = MetricSequenceSpec::fubini_study(DegreeLaw::Square);
        for p in 1..=6 {
            assert_eq!(check_diophantine(&fs, p), 0.0);
        }
    }

    #[test]
    fn diophantine_excess_is_constant_for_power_law() {
        // eps_p = c A_p^{1-a} gives deviation * A_p^a = c * sup|ddc eta/omega|.
        let spec =
            MetricSequenceSpec::perturbed(DegreeLaw::Square, PerturbationProfile::height(), 0.1, 0.5);
        for p in 2..=8 {
            assert_abs_diff_eq!(diophantine_excess(&spec, p), 0.4, epsilon = 1e-12);
        }
    }

    #[test]
    fn curvature_density_closed_form_matches_finite_differences() {
        // dd^c eta / omega = -4 eta for the first harmonics; FD oracle.
        for profile in [PerturbationProfile::height(), PerturbationProfile::xcoord()] {
            for x in [pt(0.0, 0.0), pt(0.5, 0.2), pt(-0.8, 0.6)] {
                let closed = profile.curvature_density(&x).unwrap();
                let fd = numeric_curvature_density(&profile, &x, 1e-3);
                assert_abs_diff_eq!(closed, fd, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn bump_profile_is_flat_outside_its_support() {
        // eta = 0 for |z| >= 1, so the local curvature deviation vanishes there.
        let spec =
            MetricSequenceSpec::perturbed(DegreeLaw::Square, PerturbationProfile::bump(), 0.1, 0.5);
        let field = spec.weight_field(3);
        for x in [pt(1.3, 0.0), pt(0.0, -1.8), pt(2.0, 2.0)] {
            assert_eq!(field.curvature_deviation_at(&x), 0.0);
        }
        // And is nonzero somewhere inside.
        assert!(field.curvature_deviation_at(&pt(0.4, 0.0)) > 0.0);
    }

    #[test]
    fn norm3_proxy_grows_with_degree_and_ratio_decays() {
        let fs = MetricSequenceSpec::fubini_study(DegreeLaw::PowerOfTwo);
        // k = 16 at p = 4, k = 32 at p = 5, k = 64 at p = 6.
        let n16 = estimate_metric_norm3(&fs, 4).unwrap();
        let n32 = estimate_metric_norm3(&fs, 5).unwrap();
        let n64 = estimate_metric_norm3(&fs, 6).unwrap();
        assert!(n32 > n16);
        assert!(n64 > n32);
        // Third derivatives of (k/2) log(1+|z|^2) are linear in k, so
        // proxy^{1/3} / sqrt(A_p) decreases like A_p^{-1/6}.
        let ratio = |n: f64, k: f64| n.powf(1.0 / 3.0) / k.sqrt();
        assert!(ratio(n32, 32.0) < ratio(n16, 16.0));
        assert!(ratio(n64, 64.0) < ratio(n32, 32.0));
    }

    #[test]
    fn norm3_finite_differences_match_symbolic_third_derivative() {
        // For f = (k/2) log D with D = 1+x^2+y^2: f_x = k x/D,
        // f_xx = k (D - 2x^2)/D^2, f_xxx = k (8x^3 - 6xD)/D^3; at (1,0) this
        // is k(8-12)/8 = -k/2.
        let k = 10.0;
        let d = |x: f64, y: f64| 1.0 + x * x + y * y;
        let fxxx = |x: f64, y: f64| k * (8.0 * x.powi(3) - 6.0 * x * d(x, y)) / d(x, y).powi(3);
        let f = |x: f64, y: f64| 0.5 * k * d(x, y).ln();
        let h = 1e-2;
        let x = 1.0;
        let y = 0.0;
        let fd = (f(x + 2.0 * h, y) - 2.0 * f(x + h, y) + 2.0 * f(x - h, y) - f(x - 2.0 * h, y))
            / (2.0 * h * h * h);
        assert_abs_diff_eq!(fd, fxxx(x, y), epsilon = 1e-3);
        assert_abs_diff_eq!(fxxx(1.0, 0.0), -k / 2.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_profile_only_shifts_order_zero() {
        let base = WeightField::fubini_study(8);
        let shifted = WeightField {
            k: 8,
            eps: 0.1,
            profile: PerturbationProfile::constant(),
            stencil: 1e-2,
        };
        let a = max_derivative_by_order(&base, 1e-2).unwrap();
        let b = max_derivative_by_order(&shifted, 1e-2).unwrap();
        for order in 1..4 {
            assert_abs_diff_eq!(a[order], b[order], epsilon = 1e-9);
        }
        assert!(b[0] > a[0]);
    }

    #[test]
    fn norm3_rejects_tiny_stencils() {
        let fs = WeightField::fubini_study(4);
        assert!(matches!(
            max_derivative_by_order(&fs, 5e-5),
            Err(BundleError::StencilTooSmall { .. })
        ));
    }

    #[test]
    fn taylor_lambda_is_half_pi_times_degree_for_reference_metric() {
        // phi(w) = (k/2) log(1 + pi |w|^2) in the normal chart, so the mixed
        // second derivative is pi k / 2 for every center, i.e.
        // lambda / (pi A_p) = 1/2 at every index.
        let fs = MetricSequenceSpec::fubini_study(DegreeLaw::PowerOfTwo);
        for (p, x) in [(2u32, pt(0.0, 0.0)), (5, pt(0.6, -0.2)), (10, pt(-1.5, 2.0))] {
            let k = fs.degree(p) as f64;
            let t = taylor_decomposition(&fs, p, &x);
            assert!(
                (t.lambda / (PI * k / 2.0) - 1.0).abs() < 1e-5,
                "k={k}, lambda={}",
                t.lambda
            );
            assert_abs_diff_eq!(t.lambda / (PI * k), 0.5, epsilon = 1e-5);
        }
    }

    #[test]
    fn taylor_jet_vanishes_at_aligned_center_for_radial_weight() {
        let fs = MetricSequenceSpec::fubini_study(DegreeLaw::Linear);
        let t = taylor_decomposition(&fs, 8, &pt(0.0, 0.0));
        assert_abs_diff_eq!(t.psi[0].norm(), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(t.psi[1].norm(), 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(t.psi[2].norm(), 0.0, epsilon = 1e-4);
    }

    #[test]
    fn taylor_lambda_shifts_by_perturbation_hessian() {
        // At the north pole, eta = height pulls back to 1 - 2 pi |w|^2 + O(|w|^4),
        // so lambda = pi k/2 - 2 pi eps.
        let spec =
            MetricSequenceSpec::perturbed(DegreeLaw::Linear, PerturbationProfile::height(), 0.05, 0.5);
        let p = 16;
        let eps = spec.amplitude_for_degree(16);
        let t = taylor_decomposition(&spec, p, &pt(0.0, 0.0));
        assert_abs_diff_eq!(
            t.lambda,
            PI * 16.0 / 2.0 - 2.0 * PI * eps,
            epsilon = 1e-4
        );
    }

    #[test]
    fn taylor_reconstruction_obeys_cubic_bound() {
        let spec =
            MetricSequenceSpec::perturbed(DegreeLaw::Linear, PerturbationProfile::xcoord(), 0.1, 0.5);
        for x in [pt(0.0, 0.0), pt(0.4, 0.8), pt(-2.0, 0.1)] {
            let field = spec.weight_field(12);
            let t = taylor_decomposition_of(&field, &x);
            let chart = normal_chart_at(&x);
            let frame_chart = x.canonical_chart();
            for ir in 1..=5 {
                let r = 0.02 * ir as f64;
                for ia in 0..12 {
                    let w = Complex64::from_polar(r, 2.0 * PI * ia as f64 / 12.0);
                    let phi = field.weight_in_chart(&chart.map(w), frame_chart).unwrap();
                    let err = (phi - t.reconstruct(w)).abs();
                    assert!(
                        err <= t.remainder_bound * r.powi(3) * (1.0 + 1e-9) + 1e-12,
                        "err={err:e} bound={:e} r={r}",
                        t.remainder_bound
                    );
                }
            }
        }
    }

    #[test]
    fn degree_laws_and_summability() {
        assert_eq!(DegreeLaw::Square.degree(7), 49);
        assert_eq!(DegreeLaw::PowerOfTwo.degree(5), 32);
        assert!(DegreeLaw::Square.reciprocal_sum_converges());
        assert!(DegreeLaw::PowerOfTwo.reciprocal_sum_converges());
        assert!(!DegreeLaw::Linear.reciprocal_sum_converges());
        // Degrees are nondecreasing and unbounded on any law.
        for law in [DegreeLaw::Linear, DegreeLaw::Square, DegreeLaw::PowerOfTwo] {
            for p in 1..12 {
                assert!(law.degree(p + 1) >= law.degree(p));
            }
        }
    }
}
