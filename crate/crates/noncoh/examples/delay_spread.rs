//! Frequency-selective fading: the delay-separable asymptote, its
//! equality with the single-receiver individual-constraint value, and
//! the received-power interpretation.
//!
//!     cargo run --example delay_spread

use noncoh::asymptotics::{c_delay_spread_separable, c_mimo_individual_separable, c_siso};
use noncoh::channel::{DelaySpreadSpec, MimoFadingSpec, ScalarFadingSpec};

fn main() {
    let base = ScalarFadingSpec::gauss_markov(0.9).unwrap();
    println!("base tap law: Gauss-Markov 0.9 (lambda = {:.4})", base.lambda());
    println!();
    println!("{:>20} {:>12} {:>12}", "tap gains", "c_DS(1)", "(sum a)^2 c(1)");
    let flat = c_siso(&base, 1.0).unwrap().value;
    for alpha in [vec![1.0], vec![1.0, 1.0], vec![1.0, 0.5, 0.25]] {
        let ds = DelaySpreadSpec::separable(alpha.clone(), base.clone()).unwrap();
        let v = c_delay_spread_separable(&ds, 1.0).unwrap().value;
        let total: f64 = alpha.iter().sum();
        println!("{:>20} {v:>12.6} {:>12.6}", format!("{alpha:?}"), total * total * flat);
    }
    println!();
    println!("spreading power over taps costs nothing at low SNR: the");
    println!("asymptote only sees the total received power.");
    println!();

    // the delay-spread channel is bounded by the equivalent
    // multi-transmit single-receive channel; for separable laws the two
    // asymptotes coincide
    let alpha = vec![1.0, 0.5];
    let ds = DelaySpreadSpec::separable(alpha.clone(), base.clone()).unwrap();
    let miso = MimoFadingSpec::separable(alpha, vec![base]).unwrap();
    let a = c_delay_spread_separable(&ds, 1.5).unwrap().value;
    let b = c_mimo_individual_separable(&miso, 1.5).unwrap().value;
    println!("beta = 1.5: delay-spread {a:.10} vs single-receiver MIMO {b:.10}");
}
