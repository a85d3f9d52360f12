//! Deterministic quadrature rules.
//!
//! Two rules cover every integral in the crate:
//!
//! * composite Gauss-Legendre on a finite interval, with the panel count
//!   doubling until two successive estimates agree to a relative
//!   tolerance (default 1e-10, capped at 2^20 abscissae). Known
//!   integrand kinks (band edges, table knots) are passed in as panel
//!   breakpoints so the composite rule never straddles them;
//! * Gauss-Hermite for averages against exp(-x^2), used by the discrete
//!   input mutual-information integrals. Node tables are built once per
//!   order by Newton iteration on the orthonormal recurrence and cached.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;

const GL_ORDER: usize = 16;
pub const MAX_POINTS: usize = 1 << 20;
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// Values an integrand may take (real or complex).
pub trait Integrand: Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
    fn scale(self, k: f64) -> Self;
    fn norm(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn scale(self, k: f64) -> Self {
        self * k
    }
    fn norm(self) -> f64 {
        num_complex::ComplexFloat::abs(self)
    }
}

/// Gauss-Legendre nodes/weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 2);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = (n + 1) / 2;
    for i in 0..m {
        // Tricomi initial guess for the i-th root.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = n as f64 * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(GL_ORDER))
}

fn panel_sum<T: Integrand>(f: &mut dyn FnMut(f64) -> T, a: f64, b: f64) -> T {
    let (nodes, weights) = gl16();
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut acc = T::zero();
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc = acc.add(f(c + h * x).scale(*w));
    }
    acc.scale(h)
}

/// Integrate `f` over `[a, b]` with composite Gauss-Legendre panels.
///
/// `breakpoints` inside (a, b) become panel edges of the initial
/// partition. The panel count doubles until two successive composite
/// estimates differ by less than `rel_tol` in relative terms, or the
/// total abscissa budget `MAX_POINTS` is exhausted (the last estimate is
/// returned in that case; every integrand here is smooth between
/// breakpoints, so the cap is a safety net, not an accuracy contract).
pub fn integrate<T: Integrand>(
    mut f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
) -> T {
    assert!(b > a);
    let mut edges: Vec<f64> = vec![a, b];
    for &x in breakpoints {
        if x > a && x < b {
            edges.push(x);
        }
    }
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    let eval = |edges: &[f64], f: &mut dyn FnMut(f64) -> T| {
        let mut acc = T::zero();
        for w in edges.windows(2) {
            acc = acc.add(panel_sum(f, w[0], w[1]));
        }
        acc
    };

    let mut prev = eval(&edges, &mut f);
    let mut points = (edges.len() - 1) * GL_ORDER;
    loop {
        // split every panel at its midpoint
        let mut next_edges = Vec::with_capacity(edges.len() * 2 - 1);
        for w in edges.windows(2) {
            next_edges.push(w[0]);
            next_edges.push(0.5 * (w[0] + w[1]));
        }
        next_edges.push(*edges.last().unwrap());
        edges = next_edges;

        let cur = eval(&edges, &mut f);
        points += (edges.len() - 1) * GL_ORDER;
        let diff = cur.add(prev.scale(-1.0)).norm();
        let scale = cur.norm().max(1e-300);
        if diff <= rel_tol * scale || points >= MAX_POINTS {
            return cur;
        }
        prev = cur;
    }
}

/// Convenience wrapper with the default tolerance.
pub fn integrate_default<T: Integrand>(
    f: impl FnMut(f64) -> T,
    a: f64,
    b: f64,
    breakpoints: &[f64],
) -> T {
    integrate(f, a, b, breakpoints, DEFAULT_REL_TOL)
}

/// Gauss-Hermite nodes/weights for the weight exp(-x^2) on R.
///
/// Newton iteration on the orthonormal Hermite recurrence; weights are
/// `2 / (h_n'(x_i))^2` in the conventional normalization, so that the
/// weights sum to sqrt(pi).
pub fn gauss_hermite(order: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    if let Some(rule) = guard.get(&order) {
        return *rule;
    }
    let rule: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new(build_hermite(order)));
    guard.insert(order, rule);
    rule
}

/// Golub-Welsch: nodes are the eigenvalues of the symmetric
/// tridiagonal Jacobi matrix (zero diagonal, off-diagonal sqrt(k/2)),
/// weights are sqrt(pi) times the squared first components of the
/// eigenvectors. The QL sweep below carries only that first row, so
/// the whole construction is O(n^2) and stable at high orders.
fn build_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut d = vec![0.0f64; n]; // diagonal -> eigenvalues
    let mut e = vec![0.0f64; n]; // e[i] couples i and i+1
    for (i, v) in e.iter_mut().enumerate().take(n - 1) {
        *v = ((i as f64 + 1.0) / 2.0).sqrt();
    }
    let mut first = vec![0.0f64; n]; // first row of the rotation product
    first[0] = 1.0;

    // implicit-shift QL on the tridiagonal (EISPACK tql2 layout)
    let eps = f64::EPSILON;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= eps * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter < 100, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let (mut s, mut c) = (1.0f64, 1.0f64);
            let mut p = 0.0f64;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rotate the tracked first row
                f = first[i + 1];
                first[i + 1] = s * first[i] + c * f;
                first[i] = c * first[i] - s * f;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap());
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let nodes: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let weights: Vec<f64> = order.iter().map(|&i| sqrt_pi * first[i] * first[i]).collect();
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for an 8-point rule
        let val: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_relative_eq!(val, 2.0 / 15.0, max_relative = 1e-13);
    }

    #[test]
    fn adaptive_handles_smooth_and_kinked_integrands() {
        let v = integrate_default(|x: f64| x.sin().powi(2), 0.0, PI, &[]);
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-12);

        // |x| over [-1, 1] with the kink declared
        let v = integrate_default(|x: f64| x.abs(), -1.0, 1.0, &[0.0]);
        assert_relative_eq!(v, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn complex_integrand_round_trip() {
        // (1/2pi) int e^{i n w} dw = [n == 0]
        let f = |w: f64| Complex64::new(0.0, 2.0 * w).exp();
        let v = integrate_default(f, -PI, PI, &[]).scale(1.0 / (2.0 * PI));
        assert!(v.norm() < 1e-12);
    }

    #[test]
    fn hermite_moments() {
        for order in [16usize, 32, 64] {
            let (x, w) = gauss_hermite(order);
            let total: f64 = w.iter().sum();
            assert_relative_eq!(total, PI.sqrt(), max_relative = 1e-12);
            let second: f64 = x.iter().zip(w).map(|(x, w)| w * x * x).sum();
            assert_relative_eq!(second, PI.sqrt() / 2.0, max_relative = 1e-12);
        }
    }
}
