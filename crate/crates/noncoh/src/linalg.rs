//! Small dense complex linear algebra.
//!
//! The finite-history prediction oracle needs one Hermitian
//! positive-definite solve per call. Matrices are a few hundred rows at
//! most, so a plain Cholesky factorization is enough.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Row-major dense complex matrix.
#[derive(Debug, Clone)]
pub struct CMatrix {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }
}

/// Solve `A x = b` for Hermitian positive-definite `A` (lower triangle
/// of `a` is read; `a` is overwritten with the Cholesky factor).
///
/// On a non-positive or non-finite pivot the error carries a crude
/// condition estimate from the pivots seen so far.
pub fn solve_hpd_in_place(a: &mut CMatrix, b: &mut [Complex64]) -> Result<()> {
    let n = a.n;
    assert_eq!(b.len(), n);

    let mut max_piv = f64::MIN_POSITIVE;
    let mut min_piv = f64::MAX;
    for j in 0..n {
        let mut d = a.at(j, j).re;
        for k in 0..j {
            d -= a.at(j, k).norm_sqr();
        }
        if !(d.is_finite() && d > 0.0) {
            let cond = max_piv / min_piv.max(f64::MIN_POSITIVE);
            return Err(Error::numeric(format!(
                "cholesky pivot {d:.3e} at row {j} (condition estimate so far {cond:.3e})"
            )));
        }
        max_piv = max_piv.max(d);
        min_piv = min_piv.min(d);
        let d_sqrt = d.sqrt();
        a.set(j, j, Complex64::new(d_sqrt, 0.0));
        for i in (j + 1)..n {
            let mut s = a.at(i, j);
            for k in 0..j {
                s -= a.at(i, k) * a.at(j, k).conj();
            }
            a.set(i, j, s / d_sqrt);
        }
    }

    // forward: L y = b
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a.at(i, k) * b[k];
        }
        b[i] = s / a.at(i, i);
    }
    // backward: L^H x = y
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= a.at(k, i).conj() * b[k];
        }
        b[i] = s / a.at(i, i);
    }
    Ok(())
}
