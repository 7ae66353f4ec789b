//! Browser demo bindings: three parameter-explorable views into the core
//! crate, each returning plain numeric buffers that the static page renders
//! onto canvases.
//!
//! All functions are pure compute over the deterministic streams, so the
//! page needs no RNG, no time source and no DOM access from Rust.

use std::sync::Arc;

use wasm_bindgen::prelude::*;

use masslab::bergman::{build_evaluator, required_quadrature_degree, KernelEvaluator};
use masslab::bundles::WeightField;
use masslab::geometry::{build_quadrature, test_function, ProjectivePoint};
use masslab::sampling::{build_statistic_matrix, sample_section};
use masslab::stats::clt_experiment;
use num_complex::Complex64;

fn evaluator(k: u32) -> KernelEvaluator {
    let field = WeightField::fubini_study(k.clamp(2, 1024));
    let quad = Arc::new(build_quadrature(required_quadrature_degree(&field)));
    build_evaluator(&field, quad).expect("reference basis always builds")
}

/// Near-diagonal kernel profile: for `points` displacement radii `t` up to
/// `max_radius` (in the `1/sqrt(A)`-rescaled coordinate), returns the flat
/// triples `(t, measured N, Gaussian target exp(-pi t^2 / 2))`.
#[wasm_bindgen]
pub fn kernel_profile(k: u32, max_radius: f64, points: u32) -> Vec<f64> {
    let eval = evaluator(k);
    let x = ProjectivePoint::from_affine(Complex64::new(0.0, 0.0));
    let n = points.clamp(2, 4096) as usize;
    let r = if max_radius > 0.0 { max_radius } else { 3.0 };
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let t = r * i as f64 / (n - 1) as f64;
        let sample = eval.near_diagonal_profile(
            &x,
            Complex64::new(0.0, 0.0),
            Complex64::new(t, 0.0),
        );
        out.push(t);
        out.push(sample.measured);
        out.push(sample.target);
    }
    out
}

/// Mass density `|s(z)|^2 / A` of one Gaussian random section on the square
/// `|Re z|, |Im z| <= radius` of the affine chart; row-major `grid x grid`
/// values (row 0 at the top of the canvas).
#[wasm_bindgen]
pub fn mass_density_field(k: u32, seed: u32, grid: u32, radius: f64) -> Vec<f64> {
    let eval = evaluator(k);
    let section = sample_section(eval.dimension(), seed as u64, 0);
    let n = grid.clamp(8, 512) as usize;
    let r = if radius > 0.0 { radius } else { 2.0 };
    let mut out = Vec::with_capacity(n * n);
    for iy in 0..n {
        let y = r - 2.0 * r * iy as f64 / (n - 1) as f64;
        for ix in 0..n {
            let x = -r + 2.0 * r * ix as f64 / (n - 1) as f64;
            let p = ProjectivePoint::from_affine(Complex64::new(x, y));
            out.push(eval.section_norm_sq(&section.coefficients, &p) / eval.scale());
        }
    }
    out
}

/// Normalized mass statistic samples `(M - E)/sqrt(Var)` for the chosen test
/// function (one of `const1`, `height`, `bump`, `xcoord`); the page bins
/// them and overlays the standard normal density.
#[wasm_bindgen]
pub fn clt_samples(k: u32, phi: &str, samples: u32, seed: u32) -> Vec<f64> {
    let eval = evaluator(k);
    let phi = test_function(phi).unwrap_or_else(|| test_function("const1").unwrap());
    let stat = build_statistic_matrix(&eval, &phi);
    let n = samples.clamp(100, 20_000) as usize;
    clt_experiment(&stat, n, seed as u64, 1)
        .map(|o| o.normalized_samples)
        .unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_is_monotone_kernel_data() {
        let data = kernel_profile(64, 3.0, 50);
        assert_eq!(data.len(), 150);
        assert!((data[1] - 1.0).abs() < 1e-12, "N(x,x) = 1 at t = 0");
        for chunk in data.chunks_exact(3) {
            assert!(chunk[1] >= 0.0 && chunk[1] <= 1.0);
            assert!(chunk[2] > 0.0 && chunk[2] <= 1.0);
        }
    }

    #[test]
    fn density_field_is_finite_and_positive() {
        let field = mass_density_field(16, 5, 32, 2.0);
        assert_eq!(field.len(), 32 * 32);
        assert!(field.iter().all(|v| v.is_finite() && *v >= 0.0));
        assert!(field.iter().any(|v| *v > 0.0));
    }

    #[test]
    fn histogram_samples_are_normalized() {
        let samples = clt_samples(32, "height", 500, 9);
        assert_eq!(samples.len(), 500);
        let mean = samples.iter().sum::<f64>() / 500.0;
        assert!(mean.abs() < 0.2);
    }
}
