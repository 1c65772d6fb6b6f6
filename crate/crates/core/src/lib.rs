//! Joint resource allocation for wireless-powered mobile-edge-computing
//! networks with cooperative energy recycling.
//!
//! A power station wirelessly charges `K` single-antenna sensors; each sensor
//! splits its task between local computing and offloading to an MEC server
//! behind an `N`-antenna access point, recycling RF energy from peer
//! transmissions along the way. The library jointly optimizes per-sensor time
//! slots, transmit energies, and CPU frequencies under an alpha-fair
//! objective, with three closed-form regimes:
//!
//! - [`kkt::solve_zfba`] — zero fairness (throughput maximization),
//! - [`kkt::solve_cfba`] — common fairness (finite alpha > 0),
//! - [`kkt::solve_mfba`] — max-min fairness,
//!
//! plus an independent log-barrier solver ([`oracle`]) used to validate the
//! closed forms, restricted-strategy benchmarks ([`benchmarks`]), an analytic
//! model of the energy-recycling offloading gain ([`cer`]), and a Monte Carlo
//! sweep harness ([`experiments`]).

pub mod benchmarks;
pub mod cer;
pub mod error;
pub mod experiments;
pub mod fairness;
pub mod kkt;
pub mod kv;
pub mod oracle;
pub mod physics;
pub mod scenario;

pub use error::Error;
pub use fairness::FairnessParam;
pub use kkt::{SolverResult, SolveOptions};
pub use physics::Allocation;
pub use scenario::{ChannelRealization, Scenario};
