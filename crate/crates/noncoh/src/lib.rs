//! Capacity bounds for noncoherent stationary Rayleigh fading channels
//! at low SNR.
//!
//! Neither transmitter nor receiver sees the fading realization; inputs
//! carry a hard peak constraint and an average-power constraint a
//! factor beta below the peak. The crate computes, for scalar channels,
//! MIMO grids under sum or per-antenna power constraints, and
//! frequency-selective (delay-spread) channels:
//!
//! * firm upper bounds valid at every SNR ([`bounds`]);
//! * closed-form low-SNR asymptotic capacities and achievable-rate
//!   coefficients, all driven by the spectral energy
//!   lambda = sum |R(nu)|^2 ([`asymptotics`]);
//! * the noisy prediction error that links the two, with a dense
//!   finite-history oracle ([`prediction`]);
//! * achievability-side oracles: an exact second-order
//!   mutual-information evaluator for block on-off inputs and a QPSK
//!   conditional-MI lower bound ([`rate`]).
//!
//! Channel laws ([`channel`]) load from JSON and come in parametric,
//! truncated-autocorrelation and tabulated-spectrum forms. The `noncoh`
//! binary exposes evaluation, grid sweeps, CSV figure reproduction and
//! a cross-module self-consistency suite ([`cli`]).
//!
//! Everything is pure and deterministic: identical inputs produce
//! byte-identical outputs, including the CSV emitters.

pub mod asymptotics;
pub mod bounds;
pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod opt;
pub mod prediction;
pub mod quad;
pub mod rate;

pub use channel::{
    channel_from_json_file, channel_from_json_str, ChannelSpec, DelaySpreadSpec, MimoFadingSpec,
    ParametricFamily, PowerBudget, ScalarFadingSpec,
};
pub use error::{Error, Result};
