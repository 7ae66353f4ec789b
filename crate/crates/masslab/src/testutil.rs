//! Shared fixtures for the unit tests: deterministic point streams and
//! independent integration oracles. Compiled only for tests.

use crate::geometry::ProjectivePoint;

/// Deterministic Haar-uniform point stream (splitmix-based, no rand dep).
pub(crate) fn random_points(seed: u64, n: usize) -> Vec<ProjectivePoint> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let a = crate::sampling::gaussian_coefficient(seed, i as u64, 0);
        let b = crate::sampling::gaussian_coefficient(seed, i as u64, 1);
        out.push(ProjectivePoint::new(a, b).unwrap());
    }
    out
}

/// Adaptive Simpson on `[a, b]`; oracle for one-dimensional integrals.
pub(crate) fn adaptive_simpson<F: Fn(f64) -> f64 + Copy>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f((a + b) / 2.0) + f(b))
    }
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = (a + b) / 2.0;
        let left = simpson(f, a, m);
        let right = simpson(f, m, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            rec(f, a, m, left, tol / 2.0, depth - 1) + rec(f, m, b, right, tol / 2.0, depth - 1)
        }
    }
    let whole = simpson(&f, a, b);
    rec(&f, a, b, whole, tol, 40)
}

/// `j! (k-j)! / (k+1)!`, the closed-form reference norm.
pub(crate) fn beta_norm(k: usize, j: usize) -> f64 {
    let mut v = 1.0;
    for i in 1..=j {
        v *= i as f64;
    }
    for i in 1..=(k - j) {
        v *= i as f64;
    }
    for i in 1..=(k + 1) {
        v /= i as f64;
    }
    v
}
