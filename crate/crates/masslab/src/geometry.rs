//! The model surface: the complex projective line CP^1 carrying the round
//! Kähler form normalized to unit total volume.
//!
//! Points live in homogeneous coordinates `[z0 : z1]` kept at unit Euclidean
//! norm. In the affine chart `z = z1/z0` the area form is
//! `(1/pi) dx dy / (1 + |z|^2)^2`, which integrates to 1, so the surface is
//! the round sphere of radius `1/(2 sqrt(pi))` and geodesic diameter
//! `sqrt(pi)/2`. The module provides distances, normal charts centered at a
//! point, an exact product quadrature in the variables
//! `s = 1/(1+|z|^2)`, `alpha = arg z`, and the built-in test functions used
//! by the statistics experiments.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

/// Errors from geometric constructions.
#[derive(Debug, Clone, PartialEq)]
pub enum GeometryError {
    /// Homogeneous coordinates were both (numerically) zero.
    ZeroVector,
}

impl fmt::Display for GeometryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryError::ZeroVector => {
                write!(f, "homogeneous coordinates must not both be zero")
            }
        }
    }
}

impl std::error::Error for GeometryError {}

/// Geodesic diameter of the surface: the distance between antipodal points.
pub fn diameter() -> f64 {
    PI.sqrt() / 2.0
}

/// The two standard affine charts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AffineChart {
    /// `z0 != 0`, affine coordinate `z = z1/z0`.
    Zero,
    /// `z1 != 0`, affine coordinate `z = z0/z1`.
    One,
}

/// A point of the projective line as a unit homogeneous coordinate pair.
#[derive(Debug, Clone, Copy)]
pub struct ProjectivePoint {
    z0: Complex64,
    z1: Complex64,
}

impl ProjectivePoint {
    /// Builds a point from homogeneous coordinates, normalizing to unit norm.
    pub fn new(z0: Complex64, z1: Complex64) -> Result<Self, GeometryError> {
        let norm = (z0.norm_sqr() + z1.norm_sqr()).sqrt();
        if norm < 1e-150 {
            return Err(GeometryError::ZeroVector);
        }
        Ok(Self {
            z0: z0 / norm,
            z1: z1 / norm,
        })
    }

    /// The point with affine coordinate `z` in the chart `z0 != 0`.
    pub fn from_affine(z: Complex64) -> Self {
        Self::new(Complex64::new(1.0, 0.0), z).expect("finite affine coordinate")
    }

    /// The point `[0 : 1]`, at infinity for the standard chart.
    pub fn infinity() -> Self {
        Self {
            z0: Complex64::new(0.0, 0.0),
            z1: Complex64::new(1.0, 0.0),
        }
    }

    /// Point from the quadrature variables `s = |z0|^2` and `alpha = arg z`.
    pub fn from_s_alpha(s: f64, alpha: f64) -> Self {
        let s = s.clamp(0.0, 1.0);
        Self {
            z0: Complex64::new(s.sqrt(), 0.0),
            z1: Complex64::from_polar((1.0 - s).sqrt(), alpha),
        }
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn z1(&self) -> Complex64 {
        self.z1
    }

    /// The Hermitian inner product of unit representatives, `z0 w0* + z1 w1*`.
    pub fn herm_inner(&self, other: &Self) -> Complex64 {
        self.z0 * other.z0.conj() + self.z1 * other.z1.conj()
    }

    /// `s = |z0|^2 = 1/(1+|z|^2)`, the radial quadrature variable.
    pub fn s(&self) -> f64 {
        self.z0.norm_sqr()
    }

    /// Affine coordinate in the requested chart, `None` at that chart's pole.
    pub fn affine_in(&self, chart: AffineChart) -> Option<Complex64> {
        let (num, den) = match chart {
            AffineChart::Zero => (self.z1, self.z0),
            AffineChart::One => (self.z0, self.z1),
        };
        if den.norm_sqr() < 1e-100 {
            None
        } else {
            Some(num / den)
        }
    }

    /// The chart in which this point has affine coordinate of modulus <= 1.
    pub fn canonical_chart(&self) -> AffineChart {
        if self.z0.norm_sqr() >= self.z1.norm_sqr() {
            AffineChart::Zero
        } else {
            AffineChart::One
        }
    }

    /// The antipodal point (Hermitian-orthogonal representative).
    pub fn antipode(&self) -> Self {
        Self {
            z0: -self.z1.conj(),
            z1: self.z0.conj(),
        }
    }

    /// Projective equality: representatives differ by a unit-modulus scalar.
    pub fn same_point_as(&self, other: &Self, tol: f64) -> bool {
        (self.herm_inner(other).norm() - 1.0).abs() <= tol
    }
}

/// Geodesic distance `(1/sqrt(pi)) * arccos |<Z_x, Z_y>|`.
///
/// Evaluated as `atan2(|det(Z_x, Z_y)|, |<Z_x, Z_y>|)`, which is the same
/// angle for unit representatives (`|inner|^2 + |det|^2 = 1`) but stays
/// fully conditioned at coincident and antipodal points, where the arccos
/// form amplifies rounding to `sqrt(ulp)`.
pub fn geodesic_distance(x: &ProjectivePoint, y: &ProjectivePoint) -> f64 {
    let inner = x.herm_inner(y).norm();
    let det = (x.z0 * y.z1 - x.z1 * y.z0).norm();
    det.atan2(inner) / PI.sqrt()
}

/// A geodesic normal chart centered at a point.
///
/// The chart coordinate `w` is related to the affine coordinate `z` of the
/// rotated point by `z = sqrt(pi) w`, so the pulled-back Kähler form equals
/// the Euclidean one at the origin: `omega = (i/2) dw ^ dw_bar + O(|w|^2)`.
/// In particular `geodesic_distance(map(w), center) = |w| (1 + O(|w|^2))`.
#[derive(Debug, Clone, Copy)]
pub struct NormalChart {
    center: ProjectivePoint,
    /// Unitary `U` with `U * center = [1 : 0]`, rows `(u00, u01; u10, u11)`.
    u00: Complex64,
    u01: Complex64,
    u10: Complex64,
    u11: Complex64,
    /// `dw/dz = 1/sqrt(pi)` for this normalization.
    pub scale: f64,
}

/// The normal chart centered at `x`.
pub fn normal_chart_at(x: &ProjectivePoint) -> NormalChart {
    NormalChart {
        center: *x,
        u00: x.z0.conj(),
        u01: x.z1.conj(),
        u10: -x.z1,
        u11: x.z0,
    scale: 1.0 / PI.sqrt(),
    }
}

impl NormalChart {
    pub fn center(&self) -> ProjectivePoint {
        self.center
    }

    /// The point at chart coordinate `w`.
    pub fn map(&self, w: Complex64) -> ProjectivePoint {
        // U^dagger applied to the rotated representative (1, sqrt(pi) w).
        let a = Complex64::new(1.0, 0.0);
        let b = w / self.scale;
        let h0 = self.u00.conj() * a + self.u10.conj() * b;
        let h1 = self.u01.conj() * a + self.u11.conj() * b;
        ProjectivePoint::new(h0, h1).expect("norm >= 1")
    }

    /// Rotation matrix entries, row-major.
    pub fn rotation(&self) -> [Complex64; 4] {
        [self.u00, self.u01, self.u10, self.u11]
    }

    /// Area density of the pulled-back volume form against `dA_w`, computed
    /// with a fourth-order central difference of the chart map (step `h`).
    ///
    /// Equals 1 at `w = 0` for every center.
    pub fn metric_density(&self, w: Complex64, h: f64) -> f64 {
        let chart = self.map(w).canonical_chart();
        let z = |t: f64| -> Complex64 {
            self.map(w + Complex64::new(t, 0.0))
                .affine_in(chart)
                .expect("stencil stays inside the chart")
        };
        // Holomorphic map: the derivative along the real direction is dz/dw.
        let dz = (-z(2.0 * h) + 8.0 * z(h) - 8.0 * z(-h) + z(-2.0 * h)) / (12.0 * h);
        let zc = z(0.0);
        (1.0 / PI) / (1.0 + zc.norm_sqr()).powi(2) * dz.norm_sqr()
    }
}

/// Product quadrature rule, exact on Fubini-Study monomial densities.
///
/// In the variables `s = 1/(1+|z|^2)` and `alpha = arg z` the volume form is
/// `(1/2pi) ds dalpha` and the densities `|z|^{2j} (1+|z|^2)^{-k}` become the
/// polynomials `(1-s)^j s^{k-j}`. Gauss-Legendre nodes in `s` and uniform
/// nodes in `alpha` therefore integrate them exactly up to `max_exact_degree`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    s_nodes: Vec<f64>,
    s_weights: Vec<f64>,
    angular_count: usize,
    nodes: Vec<ProjectivePoint>,
    weights: Vec<f64>,
    max_exact_degree: usize,
}

/// Builds the product rule for the requested exactness degree.
///
/// Radial node count is `max_degree/2 + 2` Gauss-Legendre points (one extra
/// beyond exactness), angular count `2*max_degree + 1`.
pub fn build_quadrature(max_degree: usize) -> QuadratureRule {
    let m = max_degree / 2 + 2;
    let angular = 2 * max_degree + 1;
    let (s_nodes, s_weights) = gauss_legendre_unit(m);
    let mut nodes = Vec::with_capacity(m * angular);
    let mut weights = Vec::with_capacity(m * angular);
    for (i, &s) in s_nodes.iter().enumerate() {
        let w = s_weights[i] / angular as f64;
        for j in 0..angular {
            let alpha = 2.0 * PI * j as f64 / angular as f64;
            nodes.push(ProjectivePoint::from_s_alpha(s, alpha));
            weights.push(w);
        }
    }
    QuadratureRule {
        s_nodes,
        s_weights,
        angular_count: angular,
        nodes,
        weights,
        max_exact_degree: max_degree,
    }
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[ProjectivePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_exact_degree(&self) -> usize {
        self.max_exact_degree
    }

    /// Radial Gauss-Legendre nodes in `s`, ascending.
    pub fn s_nodes(&self) -> &[f64] {
        &self.s_nodes
    }

    /// Radial weights, summing to 1.
    pub fn s_weights(&self) -> &[f64] {
        &self.s_weights
    }

    /// Number of uniform angular nodes per radial node.
    pub fn angular_count(&self) -> usize {
        self.angular_count
    }

    /// Angle of the `j`-th angular node.
    pub fn alpha(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.angular_count as f64
    }

    /// Node count of the full product rule.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates a pointwise density with compensated summation.
    pub fn integrate<F: Fn(&ProjectivePoint) -> f64>(&self, f: F) -> f64 {
        let mut sum = NeumaierSum::new();
        for (node, &w) in self.nodes.iter().zip(&self.weights) {
            sum.add(w * f(node));
        }
        sum.value()
    }
}

/// Neumaier-compensated accumulator; summation order is the caller's.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss-Legendre nodes and weights on `[0, 1]`; weights sum to 1.
pub fn gauss_legendre_unit(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 1);
    let mut nodes = vec![0.0; m];
    let mut weights = vec![0.0; m];
    for i in 0..m.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_m.
        let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(m, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                let (p2, d2) = legendre_with_derivative(m, x);
                dp = d2;
                x -= p2 / d2;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Map [-1, 1] -> [0, 1]; x descending in i, nodes ascending overall.
        nodes[i] = (1.0 - x) / 2.0;
        nodes[m - 1 - i] = (1.0 + x) / 2.0;
        weights[i] = w / 2.0;
        weights[m - 1 - i] = w / 2.0;
    }
    (nodes, weights)
}

/// Evaluates `(P_m(x), P_m'(x))` by the three-term recurrence.
fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if m == 0 {
        return (1.0, 0.0);
    }
    for k in 1..m {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = p_next;
    }
    let d = m as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// The built-in scalar functions on the surface.
///
/// `Height` and `BlochX` are the first spherical harmonics (the vertical and
/// horizontal coordinates of the unit Bloch vector); `Bump` is a smooth bump
/// supported in `|z| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SphereFunction {
    One,
    Height,
    BlochX,
    Bump,
}

impl SphereFunction {
    pub fn eval(&self, x: &ProjectivePoint) -> f64 {
        match self {
            SphereFunction::One => 1.0,
            // (1-|z|^2)/(1+|z|^2) = |z0|^2 - |z1|^2 for unit representatives.
            SphereFunction::Height => x.z0.norm_sqr() - x.z1.norm_sqr(),
            // 2 Re(z)/(1+|z|^2), invariant under common phase.
            SphereFunction::BlochX => 2.0 * (x.z0.conj() * x.z1).re,
            SphereFunction::Bump => {
                let s = x.s();
                if s <= 0.5 {
                    0.0
                } else {
                    // t = |z|^2 = (1-s)/s < 1 on the support.
                    let t = (1.0 - s) / s;
                    (-t / (1.0 - t)).exp()
                }
            }
        }
    }

    /// Whether the function depends only on `|z|` (kills angular modes).
    pub fn is_radial(&self) -> bool {
        !matches!(self, SphereFunction::BlochX)
    }
}

/// A test function for linear statistics, with closed-form integrals when
/// available (`None` marks values that must be obtained by quadrature).
#[derive(Debug, Clone)]
pub struct TestFunction {
    pub id: &'static str,
    pub shape: SphereFunction,
    /// Closed-form `integral phi dV` if known.
    pub integral: Option<f64>,
    /// Closed-form `integral phi^2 dV` if known.
    pub square_integral: Option<f64>,
}

impl TestFunction {
    pub fn eval(&self, x: &ProjectivePoint) -> f64 {
        self.shape.eval(x)
    }

    pub fn is_radial(&self) -> bool {
        self.shape.is_radial()
    }

    /// `integral phi dV`, falling back to the supplied rule when no closed form exists.
    pub fn integral_or_quadrature(&self, quad: &QuadratureRule) -> f64 {
        self.integral
            .unwrap_or_else(|| quad.integrate(|x| self.eval(x)))
    }

    /// `integral phi^2 dV`, falling back to the supplied rule.
    pub fn square_integral_or_quadrature(&self, quad: &QuadratureRule) -> f64 {
        self.square_integral
            .unwrap_or_else(|| quad.integrate(|x| self.eval(x) * self.eval(x)))
    }
}

/// The built-in test functions: the constant, the height function, a bump
/// supported in `|z| < 1`, and the horizontal Bloch coordinate.
pub fn builtin_test_functions() -> Vec<TestFunction> {
    vec![
        TestFunction {
            id: "const1",
            shape: SphereFunction::One,
            integral: Some(1.0),
            square_integral: Some(1.0),
        },
        TestFunction {
            id: "height",
            shape: SphereFunction::Height,
            integral: Some(0.0),
            square_integral: Some(1.0 / 3.0),
        },
        TestFunction {
            id: "bump",
            shape: SphereFunction::Bump,
            integral: None,
            square_integral: None,
        },
        TestFunction {
            id: "xcoord",
            shape: SphereFunction::BlochX,
            integral: Some(0.0),
            square_integral: Some(1.0 / 3.0),
        },
    ]
}

/// Looks up a built-in test function by identifier.
pub fn test_function(id: &str) -> Option<TestFunction> {
    builtin_test_functions().into_iter().find(|f| f.id == id)
}

/// Deterministic quasi-uniform grid of `n` points (Fibonacci lattice on the
/// sphere), used for sup-norm estimates.
pub fn sphere_grid(n: usize) -> Vec<ProjectivePoint> {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    (0..n)
        .map(|i| {
            let u = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64; // height in [-1, 1]
            let s = (1.0 + u) / 2.0;
            let alpha = 2.0 * PI * (i as f64 / golden).fract();
            ProjectivePoint::from_s_alpha(s, alpha)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{adaptive_simpson, random_points};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn distance_identity_and_antipodes() {
        let x = ProjectivePoint::from_affine(Complex64::new(0.3, -0.7));
        assert_abs_diff_eq!(geodesic_distance(&x, &x), 0.0, epsilon = 1e-12);

        // Antipodal distance is the diameter sqrt(pi)/2 ~ 0.886227: the round
        // sphere of area 1 has radius 1/(2 sqrt(pi)) and half-circumference
        // pi/(2 sqrt(pi)).
        let north = ProjectivePoint::from_affine(Complex64::new(0.0, 0.0));
        let south = ProjectivePoint::infinity();
        assert_abs_diff_eq!(
            geodesic_distance(&north, &south),
            PI.sqrt() / 2.0,
            epsilon = 1e-14
        );
        assert_abs_diff_eq!(geodesic_distance(&north, &south), 0.886227, epsilon = 1e-6);
        assert_abs_diff_eq!(
            geodesic_distance(&x, &x.antipode()),
            diameter(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn distance_z0_to_z1_matches_length_integral() {
        // |<Z,W>| = 1/sqrt(2), arccos = pi/4, distance sqrt(pi)/4.
        let a = ProjectivePoint::from_affine(Complex64::new(0.0, 0.0));
        let b = ProjectivePoint::from_affine(Complex64::new(1.0, 0.0));
        let d = geodesic_distance(&a, &b);
        assert_abs_diff_eq!(d, PI.sqrt() / 4.0, epsilon = 1e-14);
        assert_abs_diff_eq!(d, 0.443113, epsilon = 1e-6);

        // Oracle: arc length of the radial segment z = t, t in [0, 1], under
        // ds = (1/sqrt(pi)) |dz| / (1+|z|^2). Radial lines through z = 0 are
        // geodesics of the round metric.
        let len = adaptive_simpson(|t| (1.0 / PI.sqrt()) / (1.0 + t * t), 0.0, 1.0, 1e-12);
        assert_abs_diff_eq!(d, len, epsilon = 1e-10);
    }

    #[test]
    fn distance_triangle_inequality_on_random_triples() {
        let pts = random_points(11, 3000);
        for tri in pts.chunks_exact(3) {
            let (x, y, w) = (&tri[0], &tri[1], &tri[2]);
            let dxy = geodesic_distance(x, y);
            assert!(dxy <= geodesic_distance(x, w) + geodesic_distance(w, y) + 1e-12);
            assert!(dxy <= diameter() + 1e-12);
        }
    }

    proptest! {
        #[test]
        fn distance_symmetry(ax in -3.0..3.0f64, ay in -3.0..3.0f64,
                             bx in -3.0..3.0f64, by in -3.0..3.0f64) {
            let x = ProjectivePoint::from_affine(Complex64::new(ax, ay));
            let y = ProjectivePoint::from_affine(Complex64::new(bx, by));
            let d1 = geodesic_distance(&x, &y);
            let d2 = geodesic_distance(&y, &x);
            prop_assert!((d1 - d2).abs() <= 1e-14);
            prop_assert!((0.0..=diameter() + 1e-12).contains(&d1));
        }
    }

    #[test]
    fn point_normalization_and_equality() {
        let x = ProjectivePoint::new(Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0)).unwrap();
        assert_abs_diff_eq!(x.z0().norm_sqr() + x.z1().norm_sqr(), 1.0, epsilon = 1e-12);
        // Same point under a unit-modulus rescale of the representative.
        let y = ProjectivePoint::new(
            Complex64::from_polar(3.0, 1.2),
            Complex64::from_polar(4.0, 1.2 + PI / 2.0),
        )
        .unwrap();
        assert!(x.same_point_as(&y, 1e-12));
        assert!(!x.same_point_as(&x.antipode(), 1e-6));
        assert!(ProjectivePoint::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn chart_maps_origin_to_center_and_is_isometric_at_origin() {
        let pts = random_points(5, 100);
        for x in &pts {
            let chart = normal_chart_at(x);
            assert!(chart.map(Complex64::new(0.0, 0.0)).same_point_as(x, 1e-12));
            // Pulled-back area density is 1 at the origin (finite differences).
            let density = chart.metric_density(Complex64::new(0.0, 0.0), 1e-3);
            assert_abs_diff_eq!(density, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn chart_at_north_pole_scales_affine_coordinate() {
        // At [1:0] the chart is z = sqrt(pi) w.
        let chart = normal_chart_at(&ProjectivePoint::from_affine(Complex64::new(0.0, 0.0)));
        let w = Complex64::new(0.03, -0.01);
        let z = chart.map(w).affine_in(AffineChart::Zero).unwrap();
        assert_abs_diff_eq!((z - w * PI.sqrt()).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn chart_distance_matches_coordinate_radius() {
        // |d(map(w), x) - |w|| <= 0.02 |w| for |w| <= 0.05.
        let pts = random_points(17, 100);
        for (i, x) in pts.iter().enumerate() {
            let chart = normal_chart_at(x);
            let r = 0.05 * ((i % 10) as f64 + 1.0) / 10.0;
            let w = Complex64::from_polar(r, 0.37 * i as f64);
            let d = geodesic_distance(&chart.map(w), x);
            assert!((d - r).abs() <= 0.02 * r, "d={d}, |w|={r}");
        }
    }

    #[test]
    fn quadrature_weights_sum_to_volume() {
        let quad = build_quadrature(12);
        let total: f64 = {
            let mut s = NeumaierSum::new();
            for w in quad.weights() {
                s.add(*w);
            }
            s.value()
        };
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_is_exact_on_monomial_densities() {
        // integral |z|^{2j} (1+|z|^2)^{-k} dV = j! (k-j)! / (k+1)! (Beta law).
        let quad = build_quadrature(12);
        for k in 0..=12usize {
            for j in 0..=k {
                let val = quad.integrate(|x| {
                    let s = x.s();
                    (1.0 - s).powi(j as i32) * s.powi((k - j) as i32)
                });
                let exact = beta_norm(k, j);
                assert_abs_diff_eq!(val, exact, epsilon = 1e-13);
            }
        }
    }

    use crate::testutil::beta_norm;

    #[test]
    fn quadrature_monomial_oracle_k2_j1() {
        // Independent oracle: adaptive Simpson of (1-s) s in s.
        let quad = build_quadrature(4);
        let val = quad.integrate(|x| {
            let s = x.s();
            (1.0 - s) * s
        });
        let oracle = adaptive_simpson(|s| (1.0 - s) * s, 0.0, 1.0, 1e-13);
        assert_abs_diff_eq!(val, oracle, epsilon = 1e-13);
        assert_abs_diff_eq!(val, 1.0 / 6.0, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_kills_angular_modes() {
        let quad = build_quadrature(8);
        let mut re = NeumaierSum::new();
        let mut im = NeumaierSum::new();
        for (node, &w) in quad.nodes().iter().zip(quad.weights()) {
            // e^{i alpha} density: phase of z1 relative to z0.
            let z = node.affine_in(AffineChart::Zero).unwrap();
            let phase = z / z.norm();
            re.add(w * phase.re);
            im.add(w * phase.im);
        }
        assert_abs_diff_eq!(re.value(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(im.value(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn builtin_functions_match_contract() {
        let funcs = builtin_test_functions();
        let quad = build_quadrature(16);
        let north = ProjectivePoint::from_affine(Complex64::new(0.0, 0.0));
        let south = ProjectivePoint::infinity();

        let const1 = test_function("const1").unwrap();
        assert_eq!(const1.eval(&north), 1.0);
        assert_eq!(const1.eval(&south), 1.0);

        let height = test_function("height").unwrap();
        assert_abs_diff_eq!(height.eval(&north), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(height.eval(&south), -1.0, epsilon = 1e-14);
        // Odd under the antipodal map, so the integral vanishes (quadrature oracle).
        assert_abs_diff_eq!(quad.integrate(|x| height.eval(x)), 0.0, epsilon = 1e-14);
        // integral of (2s-1)^2 ds = 1/3.
        assert_abs_diff_eq!(
            quad.integrate(|x| height.eval(x).powi(2)),
            1.0 / 3.0,
            epsilon = 1e-14
        );

        let bump = test_function("bump").unwrap();
        assert_abs_diff_eq!(bump.eval(&north), 1.0, epsilon = 1e-14);
        assert_eq!(bump.eval(&south), 0.0);
        // Supported in |z| < 1.
        assert_eq!(bump.eval(&ProjectivePoint::from_affine(Complex64::new(1.2, 0.0))), 0.0);
        assert!(bump.eval(&ProjectivePoint::from_affine(Complex64::new(0.5, 0.0))) > 0.0);
        // Bounded on the whole surface.
        for f in &funcs {
            for x in random_points(3, 200) {
                assert!(f.eval(&x).abs() <= 1.0 + 1e-12);
            }
        }

        let xcoord = test_function("xcoord").unwrap();
        assert_abs_diff_eq!(quad.integrate(|x| xcoord.eval(x)), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            quad.integrate(|x| xcoord.eval(x).powi(2)),
            1.0 / 3.0,
            epsilon = 1e-13
        );
        assert!(!xcoord.is_radial());
        assert!(height.is_radial());
    }

    #[test]
    fn gauss_legendre_five_point_reference() {
        // Classical 5-point nodes/weights mapped to [0, 1].
        let (x, w) = gauss_legendre_unit(5);
        let xs = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683_1,
            0.0,
            0.538_469_310_105_683_1,
            0.906_179_845_938_664,
        ];
        let ws = [
            0.236_926_885_056_189_08,
            0.478_628_670_499_366_47,
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
        ];
        for i in 0..5 {
            assert_abs_diff_eq!(x[i], (1.0 + xs[i]) / 2.0, epsilon = 1e-15);
            assert_abs_diff_eq!(w[i], ws[i] / 2.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sphere_grid_is_spread_out() {
        let grid = sphere_grid(32);
        assert_eq!(grid.len(), 32);
        for (i, x) in grid.iter().enumerate() {
            for y in grid.iter().skip(i + 1) {
                assert!(geodesic_distance(x, y) > 0.01);
            }
        }
    }
}
