//! Noisy prediction of the current fade from its past.
//!
//! Two spectral functionals drive everything downstream:
//!
//!   I(rho)     = (1/2pi) int log(1 + rho S(w)) dw,
//!   sigma2(rho) = mean square error of predicting H_0 from
//!                 (..., H_-2 + N_-2, H_-1 + N_-1),  N_k ~ CN(0, 1/rho),
//!
//! linked by I(rho) = log(1 + rho sigma2(rho)). sigma2 is computed as
//! (e^{I(rho)} - 1)/rho rather than through the classical
//! exp{int log(1/rho + S)} - 1/rho form: the two are algebraically
//! identical, but the latter cancels catastrophically as rho -> 0.
//! sigma2(0) is R(0) (no information from the past at zero SNR).
//!
//! `finite_history_error` is the matrix oracle for the conditional
//! error given M past inputs z: it builds the covariance of the noisy
//! observations directly and solves the normal equations densely, with
//! no series expansion, so it is valid at every SNR.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::channel::ScalarFadingSpec;
use crate::error::{Error, Result};
use crate::linalg::{solve_hpd_in_place, CMatrix};
use crate::quad;

/// sigma2 and I at one SNR.
#[derive(Debug, Clone, Copy)]
pub struct PredictionResult {
    pub rho: f64,
    pub sigma2: f64,
    pub i_rho: f64,
}

/// (1/2pi) int log(1 + rho S(w)) dw by adaptive quadrature; 0 at rho = 0.
pub fn i_of_rho(spec: &ScalarFadingSpec, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(0.0);
    }
    let bps = spec.psd_breakpoints();
    let v = quad::integrate_default(|w| (rho * spec.psd(w)).ln_1p(), -PI, PI, &bps);
    Ok(v / (2.0 * PI))
}

/// Noisy prediction error sigma2(rho) together with I(rho).
pub fn sigma2_of_rho(spec: &ScalarFadingSpec, rho: f64) -> Result<PredictionResult> {
    if !(rho.is_finite() && rho >= 0.0) {
        return Err(Error::Domain(format!("rho must be >= 0, got {rho}")));
    }
    if rho == 0.0 {
        return Ok(PredictionResult {
            rho,
            sigma2: spec.r0(),
            i_rho: 0.0,
        });
    }
    let i = i_of_rho(spec, rho)?;
    Ok(PredictionResult {
        rho,
        sigma2: i.exp_m1() / rho,
        i_rho: i,
    })
}

fn validate_history(rho: f64, z: &[Complex64]) -> Result<()> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
    }
    if z.is_empty() {
        return Err(Error::Domain("history must contain at least one symbol".into()));
    }
    for (m, v) in z.iter().enumerate() {
        if v.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!(
                "past input {m} violates the peak constraint: |z| = {}",
                v.norm()
            )));
        }
    }
    Ok(())
}

/// Conditional prediction error of H_0 given the M past inputs `z` and
/// the corresponding noisy outputs.
///
/// `z[i]` is the input at time -(i+1) (most recent first). With K the
/// M x M past covariance, D = diag(z) and v the covariance between H_0
/// and the past fades, the error is
///
///   R(0) - rho * (Dv)^H (I + rho D K D^H)^{-1} (Dv),
///
/// evaluated by a dense Hermitian positive-definite solve.
pub fn finite_history_error(spec: &ScalarFadingSpec, rho: f64, z: &[Complex64]) -> Result<f64> {
    validate_history(rho, z)?;
    let m = z.len();

    // K[i][j] = E[H_{-(i+1)} H_{-(j+1)}^*] = R(j - i)
    let mut a = CMatrix::zeros(m);
    for i in 0..m {
        for j in 0..m {
            let k = spec.autocorr(j as i64 - i as i64);
            let mut v = z[i] * k * z[j].conj() * rho;
            if i == j {
                v += Complex64::new(1.0, 0.0);
            }
            a.set(i, j, v);
        }
    }
    // u[i] = z_i * v_i with v_i = E[H_{-(i+1)} H_0^*] = R(-(i+1))
    let mut u: Vec<Complex64> = (0..m)
        .map(|i| z[i] * spec.autocorr(-(i as i64 + 1)))
        .collect();
    let rhs = u.clone();
    solve_hpd_in_place(&mut a, &mut u)?;
    let quad_form: f64 = rhs
        .iter()
        .zip(u.iter())
        .map(|(r, x)| (r.conj() * x).re)
        .sum();
    let err = spec.r0() - rho * quad_form;
    if !err.is_finite() {
        return Err(Error::numeric("finite-history solve produced a non-finite value"));
    }
    Ok(err)
}

/// Exact finite-history error and its small-rho linearization
/// R(0) - rho * sum |R(nu)|^2 |z_nu|^2 over the truncated history.
///
/// Requires an absolutely summable autocorrelation.
pub fn first_order_error_check(
    spec: &ScalarFadingSpec,
    rho: f64,
    z: &[Complex64],
) -> Result<(f64, f64)> {
    if !spec.absolutely_summable() {
        return Err(Error::Domain(
            "first-order check needs an absolutely summable autocorrelation \
             (parametric memoryless/gauss_markov or finite sequence)"
                .into(),
        ));
    }
    let exact = finite_history_error(spec, rho, z)?;
    let linear: f64 = z
        .iter()
        .enumerate()
        .map(|(i, zv)| spec.autocorr(i as i64 + 1).norm_sqr() * zv.norm_sqr())
        .sum();
    Ok((exact, spec.r0() - rho * linear))
}

/// Finite-history error with all-ones inputs, doubling the history until
/// |err_{2M} - err_M| < 1e-9; converges to sigma2(rho) from above.
pub fn finite_history_error_all_ones(spec: &ScalarFadingSpec, rho: f64) -> Result<f64> {
    let mut m = 32usize;
    let one = Complex64::new(1.0, 0.0);
    let mut prev = finite_history_error(spec, rho, &vec![one; m])?;
    loop {
        m *= 2;
        let cur = finite_history_error(spec, rho, &vec![one; m])?;
        if (cur - prev).abs() < 1e-9 || m >= 4096 {
            return Ok(cur);
        }
        prev = cur;
    }
}
