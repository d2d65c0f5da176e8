//! Heralded carving of two-atom Bell states by reflection off a single-sided
//! optical cavity.
//!
//! * [`quantum`]: two-atom states, global rotations, projections, fidelities.
//! * [`cavity`]: reflection amplitudes and loss budget from (g, κ, κ_out, γ).
//! * [`protocols`]: the carving channel, double/single carving, dephasing,
//!   and a trajectory sampler.
//! * [`analysis`]: parity scans, Husimi Q grids, lifetime fits, state detection.

pub mod analysis;
pub mod cavity;
pub mod protocols;
pub mod quantum;
