//! Firm (all-SNR) capacity upper bounds.
//!
//! For the scalar channel the bound is
//!
//!   U(rho, beta) = log(1 + rho zeta) - zeta I(rho),
//!   zeta = min{ 1/beta, 1/I(rho) - 1/rho },
//!
//! the exact maximum of a |-> log(1 + rho a) - a I(rho) over
//! 0 <= a <= 1/beta for unit-variance fading (the general-variance form
//! replaces rho by rho R(0) inside the log and in the stationary
//! point). The MIMO bounds maximize the analogous concave objectives
//! over the sum-power simplex A(beta), or over distributions on on-off
//! antenna patterns with per-antenna marginal caps P(beta).
//!
//! The individual-constraint objective subtracts the expected
//! log(1 + rho sum_t b_t sigma2_{r,t}(rho/d_t)) penalty; d_t = 0 drops
//! antenna t's penalty entirely (its sigma2 argument is infinite noise
//! split, conventionally zero error).

use crate::channel::{MimoFadingSpec, PowerBudget, ScalarFadingSpec};
use crate::error::{Error, Result};
use crate::opt::{maximize_concave, project_capped_simplex, Maximum, PatternPolytope};
use crate::prediction::{i_of_rho, sigma2_of_rho};

pub const MAX_PATTERN_ANTENNAS: usize = 16;

/// A per-antenna second-moment allocation in A(beta).
#[derive(Debug, Clone)]
pub struct SimplexPoint {
    pub a: Vec<f64>,
}

/// A probability distribution over the 2^nt on-off antenna patterns,
/// indexed by bitmask (bit t set = antenna t on).
#[derive(Debug, Clone)]
pub struct PatternDistribution {
    pub p: Vec<f64>,
}

/// Scalar-channel firm upper bound in nats per channel use.
pub fn u_siso(spec: &ScalarFadingSpec, budget: &PowerBudget) -> Result<f64> {
    let r0 = spec.r0();
    if r0 == 0.0 {
        return Ok(0.0);
    }
    let rho = budget.rho;
    let i = i_of_rho(spec, rho)?;
    if i <= 0.0 {
        return Ok(0.0);
    }
    let zeta = (1.0 / i - 1.0 / (rho * r0)).clamp(0.0, 1.0 / budget.beta);
    Ok((rho * zeta * r0).ln_1p() - zeta * i)
}

/// The maximizing allocation of the scalar bound.
pub fn siso_zeta(spec: &ScalarFadingSpec, budget: &PowerBudget) -> Result<f64> {
    let r0 = spec.r0();
    if r0 == 0.0 {
        return Ok(0.0);
    }
    let i = i_of_rho(spec, budget.rho)?;
    Ok((1.0 / i - 1.0 / (budget.rho * r0)).clamp(0.0, 1.0 / budget.beta))
}

fn simplex_starts(nt: usize, cap: f64) -> Vec<Vec<f64>> {
    let mut starts = vec![vec![0.0; nt]];
    for t in 0..nt {
        let mut v = vec![0.0; nt];
        v[t] = cap;
        starts.push(v);
    }
    starts.push(vec![cap / nt as f64; nt]);
    starts
}

/// Firm upper bound under sum power constraints, with the maximizing
/// allocation over A(beta).
pub fn u_mimo_sum(spec: &MimoFadingSpec, budget: &PowerBudget) -> Result<(f64, SimplexPoint)> {
    let (nr, nt) = (spec.nr(), spec.nt());
    let rho = budget.rho;
    let cap = 1.0 / budget.beta;

    let mut r0 = vec![vec![0.0; nt]; nr];
    let mut kappa = vec![0.0; nt];
    for r in 0..nr {
        for t in 0..nt {
            r0[r][t] = spec.entry(r, t).r0();
            kappa[t] += i_of_rho(spec.entry(r, t), rho)?;
        }
    }

    let f = |a: &[f64]| -> f64 {
        let mut v = 0.0;
        for r in 0..nr {
            let mean: f64 = (0..nt).map(|t| a[t] * r0[r][t]).sum();
            v += (rho * mean).ln_1p();
        }
        v - (0..nt).map(|t| a[t] * kappa[t]).sum::<f64>()
    };
    let grad = |a: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; nt];
        for r in 0..nr {
            let mean: f64 = (0..nt).map(|t| a[t] * r0[r][t]).sum();
            let denom = 1.0 + rho * mean;
            for t in 0..nt {
                g[t] += rho * r0[r][t] / denom;
            }
        }
        for t in 0..nt {
            g[t] -= kappa[t];
        }
        g
    };
    let project = |x: &mut [f64]| project_capped_simplex(x, cap);

    let Maximum { value, arg } = maximize_concave(
        &f,
        &grad,
        &project,
        &simplex_starts(nt, cap),
        1e-10,
        100_000,
    )?;
    Ok((value, SimplexPoint { a: arg }))
}

/// Firm upper bound under individual power constraints for a given
/// noise split d (d_t >= 0, sum d_t <= 1), with the maximizing pattern
/// distribution over P(beta).
pub fn u_mimo_individual(
    spec: &MimoFadingSpec,
    budget: &PowerBudget,
    d: &[f64],
) -> Result<(f64, PatternDistribution)> {
    let (nr, nt) = (spec.nr(), spec.nt());
    if nt > MAX_PATTERN_ANTENNAS {
        return Err(Error::Capacity(format!(
            "pattern space 2^{nt} exceeds the 2^{MAX_PATTERN_ANTENNAS} evaluation limit"
        )));
    }
    validate_noise_split(d, nt)?;
    let rho = budget.rho;
    let cap = 1.0 / budget.beta;

    // sigma2_{r,t}(rho/d_t); exactly zero d_t contributes no penalty
    let mut sigma2 = vec![vec![0.0; nt]; nr];
    let mut r0 = vec![vec![0.0; nt]; nr];
    for r in 0..nr {
        for t in 0..nt {
            r0[r][t] = spec.entry(r, t).r0();
            sigma2[r][t] = if d[t] > 0.0 {
                sigma2_of_rho(spec.entry(r, t), rho / d[t])?.sigma2
            } else {
                0.0
            };
        }
    }

    let dim = 1usize << nt;
    let mut s = vec![vec![0.0; dim]; nr]; // s[r][b] = sum_t b_t R0
    let mut penalty = vec![0.0; dim];
    for b in 0..dim {
        for r in 0..nr {
            let mut mean = 0.0;
            let mut noisy = 0.0;
            for t in 0..nt {
                if b >> t & 1 == 1 {
                    mean += r0[r][t];
                    noisy += sigma2[r][t];
                }
            }
            s[r][b] = mean;
            penalty[b] += (rho * noisy).ln_1p();
        }
    }

    let f = |p: &[f64]| -> f64 {
        let mut v = 0.0;
        for r in 0..nr {
            let mean: f64 = (0..dim).map(|b| p[b] * s[r][b]).sum();
            v += (rho * mean).ln_1p();
        }
        v - (0..dim).map(|b| p[b] * penalty[b]).sum::<f64>()
    };
    let grad = |p: &[f64]| -> Vec<f64> {
        let mut g = vec![0.0; dim];
        for r in 0..nr {
            let mean: f64 = (0..dim).map(|b| p[b] * s[r][b]).sum();
            let denom = 1.0 + rho * mean;
            for (b, gv) in g.iter_mut().enumerate() {
                *gv += rho * s[r][b] / denom;
            }
        }
        for (b, gv) in g.iter_mut().enumerate() {
            *gv -= penalty[b];
        }
        g
    };

    let poly = PatternPolytope { nt, cap };
    let project = |p: &mut [f64]| poly.project(p);
    let starts = pattern_starts(nt, dim);

    let Maximum { value, arg } =
        maximize_concave(&f, &grad, &project, &starts, 1e-10, 100_000)?;
    Ok((value, PatternDistribution { p: arg }))
}

pub(crate) fn pattern_starts(nt: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut starts = Vec::new();
    starts.push(vec![1.0 / dim as f64; dim]); // centroid
    let mut all_off = vec![0.0; dim];
    all_off[0] = 1.0;
    starts.push(all_off);
    let mut all_on = vec![0.0; dim];
    all_on[dim - 1] = 1.0;
    starts.push(all_on);
    for t in 0..nt {
        let mut v = vec![0.0; dim];
        v[1 << t] = 1.0;
        starts.push(v);
    }
    starts
}

pub(crate) fn validate_noise_split(d: &[f64], nt: usize) -> Result<()> {
    if d.len() != nt {
        return Err(Error::Domain(format!(
            "noise split has {} entries for {nt} antennas",
            d.len()
        )));
    }
    if d.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Domain("noise split entries must be >= 0".into()));
    }
    let sum: f64 = d.iter().sum();
    if sum > 1.0 + 1e-12 {
        return Err(Error::Domain(format!(
            "noise split must sum to at most 1, got {sum}"
        )));
    }
    Ok(())
}
