//! Closed-form low-SNR asymptotic capacities and rates.
//!
//! All quantities here are limits of capacity (or achievable rate)
//! divided by rho^2 as the peak SNR rho goes to zero, in nats per
//! channel use. For a unit-variance scalar law they depend on the
//! fading only through lambda = sum |R(nu)|^2:
//!
//!   c(beta)     = (1/2) max_{0<=a<=1/beta} (a lambda - a^2)
//!   c_iid(beta) = 1/(8(2-lambda))            if lambda < 2 - beta/2
//!                 1/(2 beta) + (lambda-2)/(2 beta^2)  otherwise
//!   c_psk       = (lambda - 1)/2             (beta = 1)
//!
//! MIMO variants maximize the analogous concave quadratics over the
//! sum-power simplex or the pattern polytope; the separable cases
//! collapse to scalar maximizations with closed-form optimizers.

use crate::channel::{validate_beta, DelaySpreadSpec, MimoFadingSpec, ScalarFadingSpec};
use crate::error::{Error, Result};
use crate::opt::{maximize_concave, project_capped_simplex, Maximum, PatternPolytope};
use crate::prediction::i_of_rho;
use crate::bounds::{pattern_starts, validate_noise_split, MAX_PATTERN_ANTENNAS};

/// Which branch of a two-branch asymptote applied: `EphemeralBranch`
/// when the maximizing allocation is interior, `NonephemeralBranch`
/// when it sits on the power cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    EphemeralBranch,
    NonephemeralBranch,
}

/// Maximizing allocation of the defining quadratic.
#[derive(Debug, Clone)]
pub enum Allocation {
    Scalar(f64),
    PerAntenna(Vec<f64>),
}

/// A rho^2 capacity (or rate) coefficient with its branch and argmax.
#[derive(Debug, Clone)]
pub struct AsymptoteResult {
    pub value: f64,
    pub regime: Regime,
    pub argmax: Allocation,
}

const UNIT_VARIANCE_TOL: f64 = 1e-12;

fn require_unit_variance(spec: &ScalarFadingSpec) -> Result<()> {
    if (spec.r0() - 1.0).abs() > UNIT_VARIANCE_TOL {
        return Err(Error::InvalidSpec(format!(
            "operation is stated for unit-variance fading (R(0) = {}); \
             rescale the law or use the separable formulas that carry R(0) explicitly",
            spec.r0()
        )));
    }
    Ok(())
}

fn validate_lambda(lambda: f64) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 1.0) {
        return Err(Error::Domain(format!(
            "lambda must be >= 1 for a unit-variance law, got {lambda}"
        )));
    }
    Ok(())
}

/// c(beta) as a function of lambda alone (unit variance).
pub fn c_siso_from_lambda(lambda: f64, beta: f64) -> Result<AsymptoteResult> {
    validate_lambda(lambda)?;
    validate_beta(beta)?;
    let argmax = (lambda / 2.0).min(1.0 / beta);
    if lambda < 2.0 / beta {
        Ok(AsymptoteResult {
            value: lambda * lambda / 8.0,
            regime: Regime::EphemeralBranch,
            argmax: Allocation::Scalar(argmax),
        })
    } else {
        Ok(AsymptoteResult {
            value: lambda / (2.0 * beta) - 1.0 / (2.0 * beta * beta),
            regime: Regime::NonephemeralBranch,
            argmax: Allocation::Scalar(argmax),
        })
    }
}

/// Asymptotic capacity of the scalar channel; requires unit variance.
pub fn c_siso(spec: &ScalarFadingSpec, beta: f64) -> Result<AsymptoteResult> {
    require_unit_variance(spec)?;
    c_siso_from_lambda(spec.lambda(), beta)
}

/// c_iid(beta) as a function of lambda alone (unit variance).
pub fn c_iid_from_lambda(lambda: f64, beta: f64) -> Result<AsymptoteResult> {
    validate_lambda(lambda)?;
    validate_beta(beta)?;
    if lambda < 2.0 - beta / 2.0 {
        let a = 1.0 / (2.0 * (2.0 - lambda));
        Ok(AsymptoteResult {
            value: 1.0 / (8.0 * (2.0 - lambda)),
            regime: Regime::EphemeralBranch,
            argmax: Allocation::Scalar(a.min(1.0 / beta)),
        })
    } else {
        Ok(AsymptoteResult {
            value: 1.0 / (2.0 * beta) + (lambda - 2.0) / (2.0 * beta * beta),
            regime: Regime::NonephemeralBranch,
            argmax: Allocation::Scalar(1.0 / beta),
        })
    }
}

/// Best rho^2 rate coefficient achievable with IID inputs; requires a
/// unit-variance, absolutely summable law.
pub fn c_iid(spec: &ScalarFadingSpec, beta: f64) -> Result<AsymptoteResult> {
    require_unit_variance(spec)?;
    if !spec.absolutely_summable() {
        return Err(Error::Domain(
            "IID-input asymptote needs an absolutely summable autocorrelation \
             (parametric memoryless/gauss_markov or finite sequence)"
                .into(),
        ));
    }
    c_iid_from_lambda(spec.lambda(), beta)
}

/// rho^2 rate coefficient of PSK signalling, (lambda - 1)/2 (beta = 1).
pub fn c_psk_from_lambda(lambda: f64) -> Result<f64> {
    validate_lambda(lambda)?;
    Ok((lambda - 1.0) / 2.0)
}

pub fn c_psk(spec: &ScalarFadingSpec) -> Result<f64> {
    require_unit_variance(spec)?;
    c_psk_from_lambda(spec.lambda())
}

/// Closed-form max of a*l - a^2*q over [0, cap] (q > 0).
fn scalar_quadratic_max(l: f64, q: f64, cap: f64) -> (f64, f64, Regime) {
    let interior = if q > 0.0 { l / (2.0 * q) } else { f64::INFINITY };
    if interior < cap {
        (interior * l - interior * interior * q, interior, Regime::EphemeralBranch)
    } else {
        (cap * l - cap * cap * q, cap, Regime::NonephemeralBranch)
    }
}

/// Asymptotic capacity under sum power constraints: maximize
/// (1/2) sum_r { sum_t a_t lambda_{r,t} - (sum_t a_t R_{r,t}(0))^2 }
/// over A(beta).
pub fn c_mimo_sum(spec: &MimoFadingSpec, beta: f64) -> Result<AsymptoteResult> {
    validate_beta(beta)?;
    let (nr, nt) = (spec.nr(), spec.nt());
    let cap = 1.0 / beta;

    let mut lambda = vec![vec![0.0; nt]; nr];
    let mut r0 = vec![vec![0.0; nt]; nr];
    for r in 0..nr {
        for t in 0..nt {
            lambda[r][t] = spec.entry(r, t).lambda();
            r0[r][t] = spec.entry(r, t).r0();
        }
    }

    let f = |a: &[f64]| -> f64 {
        let mut v = 0.0;
        for r in 0..nr {
            let lin: f64 = (0..nt).map(|t| a[t] * lambda[r][t]).sum();
            let mean: f64 = (0..nt).map(|t| a[t] * r0[r][t]).sum();
            v += lin - mean * mean;
        }
        v
    };
    let grad = |a: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; nt];
        for r in 0..nr {
            let mean: f64 = (0..nt).map(|t| a[t] * r0[r][t]).sum();
            for t in 0..nt {
                g[t] += lambda[r][t] - 2.0 * mean * r0[r][t];
            }
        }
        g
    };
    let project = |x: &mut [f64]| project_capped_simplex(x, cap);
    let mut starts = vec![vec![0.0; nt]];
    for t in 0..nt {
        let mut v = vec![0.0; nt];
        v[t] = cap;
        starts.push(v);
    }
    starts.push(vec![cap / nt as f64; nt]);

    let Maximum { value, arg } = maximize_concave(&f, &grad, &project, &starts, 1e-12, 200_000)?;
    let total: f64 = arg.iter().sum();
    let regime = if total >= cap - 1e-9 {
        Regime::NonephemeralBranch
    } else {
        Regime::EphemeralBranch
    };
    Ok(AsymptoteResult {
        value: value / 2.0,
        regime,
        argmax: Allocation::PerAntenna(arg),
    })
}

fn separable_row_sums(
    bases: &[ScalarFadingSpec],
) -> (f64, f64) {
    let sum_lambda: f64 = bases.iter().map(|b| b.lambda()).sum();
    let sum_r0sq: f64 = bases.iter().map(|b| b.r0() * b.r0()).sum();
    (sum_lambda, sum_r0sq)
}

/// Transmit-separable sum-constraint asymptote:
/// (alpha_max^2 / 2) max_a sum_r (a lambda_r - a^2 R_r(0)^2).
pub fn c_mimo_sum_separable(spec: &MimoFadingSpec, beta: f64) -> Result<AsymptoteResult> {
    validate_beta(beta)?;
    let sep = spec.separability().ok_or_else(|| {
        Error::InvalidSpec("spec carries no transmit-separable factorization".into())
    })?;
    let alpha_max = sep.alpha.iter().cloned().fold(0.0f64, f64::max);
    let (sl, sq) = separable_row_sums(&sep.bases);
    let (v, a, regime) = scalar_quadratic_max(sl, sq, 1.0 / beta);
    Ok(AsymptoteResult {
        value: alpha_max * alpha_max * v / 2.0,
        regime,
        argmax: Allocation::Scalar(a),
    })
}

/// Transmit-separable individual-constraint asymptote:
/// ((sum alpha_t)^2 / 2) max_a sum_r (a lambda_r - a^2 R_r(0)^2).
pub fn c_mimo_individual_separable(spec: &MimoFadingSpec, beta: f64) -> Result<AsymptoteResult> {
    validate_beta(beta)?;
    let sep = spec.separability().ok_or_else(|| {
        Error::InvalidSpec("spec carries no transmit-separable factorization".into())
    })?;
    let alpha_sum: f64 = sep.alpha.iter().sum();
    let (sl, sq) = separable_row_sums(&sep.bases);
    let (v, a, regime) = scalar_quadratic_max(sl, sq, 1.0 / beta);
    Ok(AsymptoteResult {
        value: alpha_sum * alpha_sum * v / 2.0,
        regime,
        argmax: Allocation::Scalar(a),
    })
}

/// Individual-constraint asymptote upper bound for a positive noise
/// split d: maximize over p in P(beta)
///
///   (1/2) sum_r { sum_b p_b [ sum_t b_t (lambda_{r,t} - R_{r,t}(0)^2)/d_t
///                             + s_{r,b}^2 ]  -  (sum_b p_b s_{r,b})^2 },
///
/// with s_{r,b} = sum_t b_t R_{r,t}(0).
pub fn c_mimo_individual_upper(
    spec: &MimoFadingSpec,
    d: &[f64],
    beta: f64,
) -> Result<f64> {
    validate_beta(beta)?;
    let (nr, nt) = (spec.nr(), spec.nt());
    if nt > MAX_PATTERN_ANTENNAS {
        return Err(Error::Capacity(format!(
            "pattern space 2^{nt} exceeds the 2^{MAX_PATTERN_ANTENNAS} evaluation limit"
        )));
    }
    validate_noise_split(d, nt)?;
    if d.iter().any(|v| *v == 0.0) {
        return Err(Error::Domain(
            "the asymptote upper bound needs d_t > 0 for every antenna".into(),
        ));
    }

    let dim = 1usize << nt;
    let mut q = vec![vec![0.0; dim]; nr];
    let mut s = vec![vec![0.0; dim]; nr];
    for r in 0..nr {
        for b in 0..dim {
            let mut lin = 0.0;
            let mut mean = 0.0;
            for t in 0..nt {
                if b >> t & 1 == 1 {
                    let e = spec.entry(r, t);
                    lin += (e.lambda() - e.r0() * e.r0()) / d[t];
                    mean += e.r0();
                }
            }
            s[r][b] = mean;
            q[r][b] = lin + mean * mean;
        }
    }

    let f = |p: &[f64]| -> f64 {
        let mut v = 0.0;
        for r in 0..nr {
            let e_q: f64 = (0..dim).map(|b| p[b] * q[r][b]).sum();
            let e_s: f64 = (0..dim).map(|b| p[b] * s[r][b]).sum();
            v += e_q - e_s * e_s;
        }
        v
    };
    let grad = |p: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; dim];
        for r in 0..nr {
            let e_s: f64 = (0..dim).map(|b| p[b] * s[r][b]).sum();
            for (b, gv) in g.iter_mut().enumerate() {
                *gv += q[r][b] - 2.0 * e_s * s[r][b];
            }
        }
        g
    };
    let poly = PatternPolytope {
        nt,
        cap: 1.0 / beta,
    };
    let project = |p: &mut [f64]| poly.project(p);
    let Maximum { value, .. } =
        maximize_concave(&f, &grad, &project, &pattern_starts(nt, dim), 1e-12, 200_000)?;
    Ok(value / 2.0)
}

/// Loose asymptote bounds for nonephemeral grids with beta = 1:
/// upper = nt sum_{r,t} (lambda_{r,t} - R_{r,t}(0)^2)/2 (uniform noise
/// split), lower = sum_r sum_{nu>=1} |sum_t R_{r,t}(nu)|^2 (always-on
/// common signalling).
pub fn c_mimo_individual_loose(spec: &MimoFadingSpec) -> Result<(f64, f64)> {
    let (nr, nt) = (spec.nr(), spec.nt());
    for r in 0..nr {
        for t in 0..nt {
            if spec.entry(r, t).is_ephemeral() {
                return Err(Error::Domain(format!(
                    "loose bounds need a nonephemeral grid; entry (r={r}, t={t}) is ephemeral"
                )));
            }
        }
    }
    let mut upper = 0.0;
    for r in 0..nr {
        for t in 0..nt {
            let e = spec.entry(r, t);
            upper += (e.lambda() - e.r0() * e.r0()) / 2.0;
        }
    }
    upper *= nt as f64;

    let mut lower = 0.0;
    for r in 0..nr {
        let mut acc = 0.0f64;
        let mut quiet = 0usize;
        let mut nu = 1i64;
        while nu <= 1_000_000 {
            let mut row = num_complex::Complex64::new(0.0, 0.0);
            for t in 0..nt {
                row += spec.entry(r, t).autocorr(nu);
            }
            let term = row.norm_sqr();
            acc += term;
            if term < 1e-16 * acc.max(1e-300) {
                quiet += 1;
                if quiet > 64 {
                    break;
                }
            } else {
                quiet = 0;
            }
            nu += 1;
        }
        lower += acc;
    }
    Ok((upper, lower))
}

/// Combined individual-constraint asymptote box per the operation
/// contract: the upper bound (loose with the uniform split when
/// `use_loose`, otherwise the d-dependent maximization) together with
/// the loose lower bound.
pub fn c_mimo_individual_box(
    spec: &MimoFadingSpec,
    d: &[f64],
    beta: f64,
    use_loose: bool,
) -> Result<(f64, f64)> {
    if use_loose {
        if beta != 1.0 {
            return Err(Error::Domain("loose bounds are stated for beta = 1".into()));
        }
        c_mimo_individual_loose(spec)
    } else {
        let upper = c_mimo_individual_upper(spec, d, beta)?;
        let (_, lower) = c_mimo_individual_loose(spec)?;
        Ok((upper, lower))
    }
}

/// Delay-separable asymptote:
/// ((sum alpha_t)^2 / 2) max_a (a lambda - a^2 R(0)^2).
pub fn c_delay_spread_separable(spec: &DelaySpreadSpec, beta: f64) -> Result<AsymptoteResult> {
    validate_beta(beta)?;
    let sep = spec.separability().ok_or_else(|| {
        Error::InvalidSpec("spec carries no delay-separable factorization".into())
    })?;
    let alpha_sum: f64 = sep.alpha.iter().sum();
    let l = sep.base.lambda();
    let r0 = sep.base.r0();
    let (v, a, regime) = scalar_quadratic_max(l, r0 * r0, 1.0 / beta);
    Ok(AsymptoteResult {
        value: alpha_sum * alpha_sum * v / 2.0,
        regime,
        argmax: Allocation::Scalar(a),
    })
}

/// Limit of (beta/rho) C(rho, beta) as beta grows: R(0) - I(rho)/rho.
pub fn large_beta_limit(spec: &ScalarFadingSpec, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(Error::Domain(format!("rho must be > 0, got {rho}")));
    }
    Ok(spec.r0() - i_of_rho(spec, rho)? / rho)
}
