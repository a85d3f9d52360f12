//! MIMO grids under sum versus individual power constraints: firm
//! bounds, asymptotes, and the antenna-count scaling laws.
//!
//!     cargo run --example mimo_bounds

use noncoh::asymptotics::{
    c_mimo_individual_separable, c_mimo_sum, c_mimo_sum_separable, c_siso,
};
use noncoh::bounds::{u_mimo_individual, u_mimo_sum};
use noncoh::channel::{MimoFadingSpec, PowerBudget, ScalarFadingSpec};

fn main() {
    let base = ScalarFadingSpec::gauss_markov(0.8).unwrap();
    let scalar = c_siso(&base, 1.0).unwrap().value;
    println!("base law: Gauss-Markov 0.8, c(1) = {scalar:.6}");
    println!();

    println!("identical-antenna scaling of the asymptotes (beta = 1):");
    println!("{:>6} {:>6} {:>12} {:>14}", "nr", "nt", "sum c_S", "indiv c_I");
    for (nr, nt) in [(1usize, 1usize), (2, 1), (1, 2), (2, 2), (3, 2)] {
        let spec = MimoFadingSpec::separable(vec![1.0; nt], vec![base.clone(); nr]).unwrap();
        let cs = c_mimo_sum_separable(&spec, 1.0).unwrap().value;
        let ci = c_mimo_individual_separable(&spec, 1.0).unwrap().value;
        println!("{nr:>6} {nt:>6} {cs:>12.6} {ci:>14.6}");
    }
    println!("c_S grows with nr only; c_I additionally picks up nt^2.");
    println!();

    // mixed grid: numeric maximization of the firm bounds
    let grid = vec![
        vec![
            ScalarFadingSpec::gauss_markov(0.7).unwrap(),
            ScalarFadingSpec::gauss_markov(0.9).unwrap(),
        ],
        vec![
            ScalarFadingSpec::gauss_markov(0.85).unwrap(),
            ScalarFadingSpec::gauss_markov(0.6).unwrap(),
        ],
    ];
    let spec = MimoFadingSpec::new(grid).unwrap();
    let b = PowerBudget::new(0.5, 2.0).unwrap();
    let (us, alloc) = u_mimo_sum(&spec, &b).unwrap();
    println!("mixed 2x2 grid at rho = 0.5, beta = 2:");
    println!("  sum-power bound U_S   = {us:.8}, allocation {:?}", alloc.a);
    let d = [0.5, 0.5];
    let (ui, dist) = u_mimo_individual(&spec, &b, &d).unwrap();
    println!("  indiv-power bound U_I = {ui:.8} (noise split {d:?})");
    println!("  pattern distribution: {:?}", dist.p);
    println!();
    let ca = c_mimo_sum(&spec, 2.0).unwrap();
    println!("  sum-power asymptote c_S = {:.8}", ca.value);
}
