//! Loading channel laws from their JSON documents and inspecting the
//! quantities every bound is built from.
//!
//!     cargo run --example channel_files

use noncoh::channel::{channel_from_json_str, ChannelSpec};

fn main() {
    let docs = [
        r#"{"kind": "gauss_markov", "a": 0.99, "scale": 1.0}"#,
        r#"{"kind": "memoryless"}"#,
        r#"{"kind": "bandlimited_flat", "omega0": 1.5707963267948966}"#,
        r#"{"kind": "sequence", "r": [[1.0, 0.0], [0.5, 0.0]]}"#,
    ];
    for doc in docs {
        let spec = match channel_from_json_str(doc).unwrap() {
            ChannelSpec::Scalar(s) => s,
            _ => unreachable!(),
        };
        println!("{doc}");
        println!(
            "  R(0) = {}, lambda = {:.6}, ephemeral: {}",
            spec.r0(),
            spec.lambda(),
            spec.is_ephemeral()
        );
        println!(
            "  S(0) = {:.6}, S(pi/2) = {:.6}",
            spec.psd(0.0),
            spec.psd(std::f64::consts::FRAC_PI_2)
        );
    }

    // a transmit-separable grid: entries are alpha_t-scaled copies of
    // per-receiver base laws, declared by the alpha array
    let mimo = r#"{
        "entries": [[{"kind": "gauss_markov", "a": 0.9},
                     {"kind": "gauss_markov", "a": 0.9, "scale": 0.5}]],
        "alpha": [1.0, 0.5]
    }"#;
    match channel_from_json_str(mimo).unwrap() {
        ChannelSpec::Mimo(m) => {
            println!("{}x{} grid, separable: {}", m.nr(), m.nt(), m.separability().is_some());
        }
        _ => unreachable!(),
    }

    // delay-spread taps
    let delay = r#"{"taps": [{"kind": "gauss_markov", "a": 0.9},
                             {"kind": "gauss_markov", "a": 0.9, "scale": 0.25}],
                    "alpha": [1.0, 0.25]}"#;
    match channel_from_json_str(delay).unwrap() {
        ChannelSpec::Delay(d) => println!("{} taps, separable: {}", d.t(), d.separability().is_some()),
        _ => unreachable!(),
    }
}
