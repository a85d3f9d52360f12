//! Concave maximization over simple polytopes.
//!
//! The bound maximizations are all concave (log-of-affine minus linear,
//! or quadratic with negative-semidefinite Hessian) over either the
//! capped simplex {a >= 0, sum a <= cap} or a probability simplex with
//! per-coordinate marginal caps. Projected gradient ascent with a
//! backtracking line search and a fixed multistart schedule finds the
//! global maximum; convergence is declared on the unit-step gradient
//! mapping. Projections onto the capped simplex are exact (sort and
//! threshold); the marginal-constrained simplex uses Dykstra's
//! alternating projections, which converge to the exact Euclidean
//! projection for intersections of convex sets.

use crate::error::{Error, Result};

/// Euclidean projection onto {x >= 0, sum x = s}.
fn project_simplex_eq(x: &mut [f64], s: f64) {
    let n = x.len();
    let mut sorted: Vec<f64> = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    let mut k = 0;
    for (i, &v) in sorted.iter().enumerate() {
        cumsum += v;
        let t = (cumsum - s) / (i as f64 + 1.0);
        if v - t > 0.0 {
            tau = t;
            k = i + 1;
        }
    }
    debug_assert!(k > 0);
    let _ = k;
    for v in x.iter_mut().take(n) {
        *v = (*v - tau).max(0.0);
    }
}

/// Euclidean projection onto the capped simplex {x >= 0, sum x <= cap}.
pub fn project_capped_simplex(x: &mut [f64], cap: f64) {
    let clipped_sum: f64 = x.iter().map(|v| v.max(0.0)).sum();
    if clipped_sum <= cap {
        for v in x.iter_mut() {
            *v = v.max(0.0);
        }
    } else {
        project_simplex_eq(x, cap);
    }
}

/// Probability distributions over 2^nt on-patterns with per-antenna
/// marginal caps: {p >= 0, sum p = 1, sum_b p_b b_t <= cap for all t}.
#[derive(Debug, Clone)]
pub struct PatternPolytope {
    pub nt: usize,
    pub cap: f64,
}

impl PatternPolytope {
    pub fn dim(&self) -> usize {
        1 << self.nt
    }

    fn marginal(&self, p: &[f64], t: usize) -> f64 {
        p.iter()
            .enumerate()
            .filter(|(b, _)| b >> t & 1 == 1)
            .map(|(_, v)| v)
            .sum()
    }

    pub fn is_feasible(&self, p: &[f64], tol: f64) -> bool {
        p.iter().all(|v| *v >= -tol)
            && (p.iter().sum::<f64>() - 1.0).abs() <= tol
            && (0..self.nt).all(|t| self.marginal(p, t) <= self.cap + tol)
    }

    /// Exact projection via Dykstra's corrected alternating projections
    /// between the probability simplex and each marginal halfspace.
    pub fn project(&self, p: &mut [f64]) {
        let dim = self.dim();
        debug_assert_eq!(p.len(), dim);
        if self.cap >= 1.0 {
            // marginals can never exceed 1 on the simplex
            project_simplex_eq(p, 1.0);
            return;
        }
        let sets = 1 + self.nt;
        let mut increments = vec![vec![0.0; dim]; sets];
        // each marginal halfspace has normal c with c_b = b_t
        let half_norm_sq = (dim / 2) as f64;
        for _cycle in 0..20_000 {
            let mut moved: f64 = 0.0;
            for set in 0..sets {
                let mut y: Vec<f64> = p
                    .iter()
                    .zip(increments[set].iter())
                    .map(|(v, inc)| v + inc)
                    .collect();
                if set == 0 {
                    project_simplex_eq(&mut y, 1.0);
                } else {
                    let t = set - 1;
                    let viol: f64 = y
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| b >> t & 1 == 1)
                        .map(|(_, v)| v)
                        .sum::<f64>()
                        - self.cap;
                    if viol > 0.0 {
                        let shift = viol / half_norm_sq;
                        for (b, v) in y.iter_mut().enumerate() {
                            if b >> t & 1 == 1 {
                                *v -= shift;
                            }
                        }
                    }
                }
                for i in 0..dim {
                    let before = p[i] + increments[set][i];
                    increments[set][i] = before - y[i];
                    moved = moved.max((p[i] - y[i]).abs());
                    p[i] = y[i];
                }
            }
            if moved < 1e-13 {
                break;
            }
        }
        // Dykstra leaves the iterate on the last halfspace; snap onto the
        // simplex so downstream sums are exact.
        project_simplex_eq(p, 1.0);
    }
}

/// Result of a concave maximization.
#[derive(Debug, Clone)]
pub struct Maximum {
    pub value: f64,
    pub arg: Vec<f64>,
}

/// Projected gradient ascent with backtracking from each start;
/// the best converged run wins (first one on ties, so the result is
/// deterministic for a fixed schedule).
pub fn maximize_concave(
    f: &dyn Fn(&[f64]) -> f64,
    grad: &dyn Fn(&[f64]) -> Vec<f64>,
    project: &dyn Fn(&mut [f64]),
    starts: &[Vec<f64>],
    grad_map_tol: f64,
    max_iter: usize,
) -> Result<Maximum> {
    assert!(!starts.is_empty());
    let mut best: Option<Maximum> = None;
    let mut any_converged = false;

    for start in starts {
        let mut x = start.clone();
        project(&mut x);
        let mut fx = f(&x);
        let mut step = 1.0f64;
        let mut converged = false;

        for _ in 0..max_iter {
            let g = grad(&x);
            // unit-step gradient mapping
            let mut probe = x.clone();
            for (p, gi) in probe.iter_mut().zip(g.iter()) {
                *p += gi;
            }
            project(&mut probe);
            let gm_norm: f64 = probe
                .iter()
                .zip(x.iter())
                .map(|(p, xi)| (p - xi) * (p - xi))
                .sum::<f64>()
                .sqrt();
            if gm_norm < grad_map_tol {
                converged = true;
                break;
            }

            step = (step * 4.0).min(1e6);
            let mut accepted = false;
            while step > 1e-18 {
                let mut cand = x.clone();
                for (c, gi) in cand.iter_mut().zip(g.iter()) {
                    *c += step * gi;
                }
                project(&mut cand);
                let fc = f(&cand);
                let dir: f64 = cand
                    .iter()
                    .zip(x.iter())
                    .zip(g.iter())
                    .map(|((c, xi), gi)| (c - xi) * gi)
                    .sum();
                // dir > 0 keeps zero-length candidates out of the
                // accept branch (they would loop to the iteration cap)
                if fc.is_finite() && dir > 0.0 && fc >= fx + 1e-4 * dir {
                    x = cand;
                    fx = fc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                // no representable ascent step remains along the
                // projected gradient: for a smooth concave objective the
                // iterate is optimal at floating precision (the value
                // gap is O(gm^2), below 1 ulp of f here)
                converged = true;
                break;
            }
        }

        any_converged |= converged;
        let candidate = Maximum {
            value: fx,
            arg: x,
        };
        best = match best {
            None => Some(candidate),
            Some(b) if candidate.value > b.value + 1e-15 => Some(candidate),
            Some(b) => Some(b),
        };
    }

    let best = best.unwrap();
    if !any_converged {
        return Err(Error::numeric_with_best(
            "projected gradient did not reach the gradient-mapping tolerance",
            best.value,
        ));
    }
    Ok(best)
}

/// Golden-section search for the maximum of a unimodal function on
/// [lo, hi]; returns (argmax, max).
pub fn golden_max(f: &mut dyn FnMut(f64) -> f64, lo: f64, hi: f64, tol_x: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol_x {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
