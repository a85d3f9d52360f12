//! Closed-form low-SNR asymptotes as functions of the spectral energy
//! lambda: capacity, the best IID-input rate, and the PSK rate, with
//! their equality windows.
//!
//!     cargo run --example asymptote_table

use noncoh::asymptotics::{c_iid_from_lambda, c_psk_from_lambda, c_siso_from_lambda, Regime};

fn main() {
    let beta = 1.0;
    println!("beta = {beta}");
    println!("{:>7} {:>12} {:>12} {:>12}  branch", "lambda", "c", "c_iid", "c_psk");
    let mut l = 1.0;
    while l <= 3.0 + 1e-9 {
        let c = c_siso_from_lambda(l, beta).unwrap();
        let iid = c_iid_from_lambda(l, beta).unwrap();
        let psk = c_psk_from_lambda(l).unwrap();
        let branch = match c.regime {
            Regime::EphemeralBranch => "ephemeral",
            Regime::NonephemeralBranch => "nonephemeral",
        };
        println!(
            "{l:>7.2} {:>12.8} {:>12.8} {psk:>12.8}  {branch}",
            c.value, iid.value
        );
        l += 0.25;
    }
    println!();
    println!("PSK matches the IID optimum on 1.5 <= lambda < 2 and full");
    println!("capacity once lambda >= 2; at lambda = 2 all three meet at 1/2.");
}
