//! The noisy prediction error sigma2(rho), the spectral functional
//! I(rho), the identity I = log(1 + rho sigma2), and the convergence of
//! the finite-history matrix oracle to the infinite-history error.
//!
//!     cargo run --example prediction_identities

use num_complex::Complex64;
use noncoh::channel::ScalarFadingSpec;
use noncoh::prediction::{finite_history_error, sigma2_of_rho};

fn main() {
    let spec = ScalarFadingSpec::gauss_markov(0.9).unwrap();
    println!("Gauss-Markov fading, coefficient 0.9 (lambda = {:.4})", spec.lambda());
    println!();
    println!("{:>8} {:>12} {:>12} {:>12}", "rho", "sigma2", "I(rho)", "identity gap");
    for rho in [0.01, 0.1, 1.0, 10.0] {
        let pr = sigma2_of_rho(&spec, rho).unwrap();
        let gap = ((rho * pr.sigma2).ln_1p() - pr.i_rho).abs();
        println!("{rho:>8} {:>12.8} {:>12.8} {gap:>12.2e}", pr.sigma2, pr.i_rho);
    }

    println!();
    println!("finite observed history, all-ones inputs, rho = 1:");
    let rho = 1.0;
    let target = sigma2_of_rho(&spec, rho).unwrap().sigma2;
    for m in [1usize, 4, 16, 64, 256] {
        let z = vec![Complex64::new(1.0, 0.0); m];
        let err = finite_history_error(&spec, rho, &z).unwrap();
        println!("  M = {m:>4}: {err:.10}  (gap {:.2e})", err - target);
    }
    println!("  infinite:  {target:.10}");
}
