//! The exact second-order mutual-information evaluator for block
//! on-off inputs: agreement with the quadratic in the finite-block
//! spectral energy, and extrapolation to the capacity asymptote.
//!
//!     cargo run --example block_oracle

use noncoh::asymptotics::{c_siso, Allocation};
use noncoh::channel::ScalarFadingSpec;
use noncoh::rate::{lambda_n, second_order_mi, InputLaw, LawKind, OracleChannel};

fn main() {
    let spec = ScalarFadingSpec::gauss_markov(0.5).unwrap();
    let asym = c_siso(&spec, 1.0).unwrap();
    let a_star = match asym.argmax {
        Allocation::Scalar(a) => a,
        _ => unreachable!(),
    };
    println!(
        "Gauss-Markov 0.5: lambda = {:.6}, c(1) = {:.6}, best on-probability {a_star:.4}",
        spec.lambda(),
        asym.value
    );
    println!();
    println!(
        "{:>4} {:>12} {:>12} {:>12}",
        "n", "trace coeff", "(a l_n-a^2)/2", "lambda_n"
    );
    let mut last_two = [0.0f64; 2];
    for n in [1usize, 2, 4, 8, 16, 32, 64] {
        let law = InputLaw::new(LawKind::OnOffFsk { m: n + 1 }, n, a_star).unwrap();
        let r = second_order_mi(OracleChannel::Siso(&spec), &law).unwrap();
        let ln = lambda_n(&spec, n);
        let closed = 0.5 * (a_star * ln - a_star * a_star);
        println!("{n:>4} {:>12.8} {closed:>12.8} {ln:>12.8}", r.coeff);
        last_two = [last_two[1], r.coeff];
    }
    // the finite-block defect is O(1/n); one Richardson step removes it
    let extrapolated = 2.0 * last_two[1] - last_two[0];
    println!();
    println!("Richardson over n = 32, 64: {extrapolated:.8} vs asymptote {:.8}", asym.value);

    // the phase family is immaterial: only second moments enter
    let n = 8;
    for (name, kind) in [
        ("frequency-shift", LawKind::OnOffFsk { m: n + 1 }),
        ("binary phase-shift", LawKind::OnOffPsk { m: 2 }),
        ("uniform phase", LawKind::OnOffUniformPhase),
    ] {
        let law = InputLaw::new(kind, n, 0.5).unwrap();
        let r = second_order_mi(OracleChannel::Siso(&spec), &law).unwrap();
        println!("n = {n}, a = 0.5, {name}: {:.12}", r.coeff);
    }
}
