//! Dense complex matrices sized for section spaces (dimension ~ 10^3).
//!
//! Provides exactly what the kernel and statistics code needs: Hermitian
//! checks, an unpivoted Cholesky factorization that fails on non-positive
//! pivots, triangular inversion, congruence products, traces and quadratic
//! forms. All loops run in a fixed order so results are bit-reproducible.

use std::fmt;

use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub enum LinalgError {
    /// A Cholesky pivot was not strictly positive (matrix not positive
    /// definite, or the quadrature under-resolved the Gram integrals).
    NonPositivePivot { index: usize, value: f64 },
    /// An operation required a Hermitian matrix.
    NotHermitian { max_asymmetry: f64 },
}

impl fmt::Display for LinalgError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinalgError::NonPositivePivot { index, value } => {
                write!(f, "non-positive Cholesky pivot {value:e} at index {index}")
            }
            LinalgError::NotHermitian { max_asymmetry } => {
                write!(f, "matrix is not Hermitian (max asymmetry {max_asymmetry:e})")
            }
        }
    }
}

impl std::error::Error for LinalgError {}

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.max_abs_diff(&Self::identity(self.n)) <= tol
    }

    /// Largest entrywise deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        let mut t = Complex64::new(0.0, 0.0);
        for i in 0..self.n {
            t += self.get(i, i);
        }
        t
    }

    /// Squared Frobenius norm; equals `tr(Q^2)` for Hermitian `Q`.
    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn conj_transpose(&self) -> Self {
        let mut out = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for l in 0..n {
                let a = self.get(i, l);
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[l * n + j];
                }
            }
        }
        out
    }

    /// `C^* A C` for the congruence checks.
    pub fn congruence(&self, c: &Self) -> Self {
        c.conj_transpose().mul(&self.mul(c))
    }

    /// Real quadratic form `a^* Q a` for Hermitian `Q`.
    pub fn quadratic_form(&self, a: &[Complex64]) -> f64 {
        assert_eq!(a.len(), self.n);
        let mut acc = 0.0f64;
        for (i, ai) in a.iter().enumerate() {
            let mut row = Complex64::new(0.0, 0.0);
            for (rj, aj) in self.row(i).iter().zip(a) {
                row += rj * aj;
            }
            acc += (ai.conj() * row).re;
        }
        acc
    }

    /// Matrix-vector product transposed: `out_j = sum_i M_ij v_i`.
    ///
    /// This applies a basis-coefficient matrix to pointwise reference values.
    pub fn apply_transpose(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n);
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, vi) in v.iter().enumerate() {
            if vi.norm_sqr() == 0.0 {
                continue;
            }
            for (slot, rj) in out.iter_mut().zip(self.row(i)) {
                *slot += rj * vi;
            }
        }
        out
    }

    /// Unpivoted Cholesky `A = L L^*`; fails on a non-positive pivot.
    pub fn cholesky(&self) -> Result<CMatrix, LinalgError> {
        let defect = self.hermitian_defect();
        if defect > 1e-8 {
            return Err(LinalgError::NotHermitian {
                max_asymmetry: defect,
            });
        }
        let n = self.n;
        let mut l = CMatrix::zeros(n);
        for j in 0..n {
            let mut d = self.get(j, j).re;
            for k in 0..j {
                d -= l.get(j, k).norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(LinalgError::NonPositivePivot { index: j, value: d });
            }
            let ljj = d.sqrt();
            l.set(j, j, Complex64::new(ljj, 0.0));
            for i in (j + 1)..n {
                let mut v = self.get(i, j);
                for k in 0..j {
                    v -= l.get(i, k) * l.get(j, k).conj();
                }
                l.set(i, j, v / ljj);
            }
        }
        Ok(l)
    }

    /// Inverse of an upper-triangular matrix by back substitution.
    pub fn invert_upper_triangular(&self) -> CMatrix {
        let n = self.n;
        let mut inv = CMatrix::zeros(n);
        for j in (0..n).rev() {
            inv.set(j, j, Complex64::new(1.0, 0.0) / self.get(j, j));
            for i in (0..j).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (i + 1)..=j {
                    acc += self.get(i, k) * inv.get(k, j);
                }
                inv.set(i, j, -acc / self.get(i, i));
            }
        }
        inv
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn cholesky_reconstructs_and_orthonormalizes() {
        // A Hermitian positive definite 3x3 near the identity.
        let mut g = CMatrix::identity(3);
        g.set(0, 1, c(0.1, 0.05));
        g.set(1, 0, c(0.1, -0.05));
        g.set(1, 2, c(-0.02, 0.03));
        g.set(2, 1, c(-0.02, -0.03));
        let l = g.cholesky().unwrap();
        let reconstructed = l.mul(&l.conj_transpose());
        assert!(reconstructed.max_abs_diff(&g) < 1e-14);

        // C = (L^*)^{-1} gives C^* G C = I.
        let cmat = l.conj_transpose().invert_upper_triangular();
        assert!(g.congruence(&cmat).is_identity(1e-14));
    }

    #[test]
    fn cholesky_rejects_indefinite_and_non_hermitian() {
        let mut g = CMatrix::identity(2);
        g.set(1, 1, c(-1.0, 0.0));
        assert!(matches!(
            g.cholesky(),
            Err(LinalgError::NonPositivePivot { index: 1, .. })
        ));

        let mut h = CMatrix::identity(2);
        h.set(0, 1, c(0.5, 0.0));
        assert!(matches!(h.cholesky(), Err(LinalgError::NotHermitian { .. })));
    }

    #[test]
    fn quadratic_form_and_traces() {
        let mut q = CMatrix::identity(2);
        q.set(0, 1, c(0.0, 0.25));
        q.set(1, 0, c(0.0, -0.25));
        let a = [c(1.0, 1.0), c(2.0, -1.0)];
        // a^* Q a = |a0|^2 + |a1|^2 + 2 Re(conj(a0) i/4 a1).
        let cross = (a[0].conj() * c(0.0, 0.25) * a[1]).re;
        let expect = a[0].norm_sqr() + a[1].norm_sqr() + 2.0 * cross;
        assert_abs_diff_eq!(q.quadratic_form(&a), expect, epsilon = 1e-14);
        assert_abs_diff_eq!(q.trace().re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(q.frobenius_sq(), 2.0 + 2.0 * 0.0625, epsilon = 1e-15);
    }
}
