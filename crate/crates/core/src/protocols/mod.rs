//! Carving protocols as quantum channels, plus their trajectory simulation.

mod carve;
mod dephasing;
mod monte_carlo;
mod prepare;
mod scatter;
mod schemes;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{StateError, TwoAtomState};

pub use carve::{carve_branches, carve_step, CarveBranches};
pub use dephasing::{wait_evolution, NoiseModel};
pub use monte_carlo::{monte_carlo_run, Click, MonteCarloConfig, MonteCarloSummary, TrialRecord};
pub use prepare::{prepare, PrepKind, PreparationSpec};
pub use scatter::{scattering_channel, scattering_event};
pub use schemes::{
    double_carving, ideal_single_carving_efficiency, ideal_single_carving_fidelity, scattering_limited_fidelity,
    single_carving, ProtocolResult, ProtocolSetup, Scheme, SingleCarvingResult, Stage, StepSummary,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("never heralds: herald probability {0:.3e}")]
    NeverHeralds(f64),
    #[error("invalid pulse parameter {name} = {value}: {reason}")]
    InvalidPulse { name: &'static str, value: f64, reason: &'static str },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    State(#[from] StateError),
}

/// Weak coherent carving pulse and its detection chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseConfig {
    /// Mean incident photon number n̄.
    pub nbar: f64,
    /// Dark-count probability per pulse in the D detector.
    pub dark_prob: f64,
    /// Per-photon detection efficiency, shared by both detectors.
    pub det_eff: f64,
    /// Fraction of the incident light matched to the cavity mode.
    pub mode_match: f64,
}

impl Default for PulseConfig {
    fn default() -> Self {
        PulseConfig { nbar: 0.33, dark_prob: 0.011, det_eff: 1.0 / 3.0, mode_match: 0.9 }
    }
}

impl PulseConfig {
    pub fn new(nbar: f64, dark_prob: f64, det_eff: f64, mode_match: f64) -> Result<Self, ProtocolError> {
        let p = PulseConfig { nbar, dark_prob, det_eff, mode_match };
        p.validate()?;
        Ok(p)
    }

    /// Perfect detectors, perfect mode matching, no dark counts.
    pub fn ideal(nbar: f64) -> Self {
        PulseConfig { nbar, dark_prob: 0.0, det_eff: 1.0, mode_match: 1.0 }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |name, value, reason| Err(ProtocolError::InvalidPulse { name, value, reason });
        if !(self.nbar.is_finite() && self.nbar >= 0.0) {
            return bad("nbar", self.nbar, "must be finite and >= 0");
        }
        if !(0.0..1.0).contains(&self.dark_prob) {
            return bad("dark_prob", self.dark_prob, "must lie in [0, 1)");
        }
        if !(self.det_eff > 0.0 && self.det_eff <= 1.0) {
            return bad("det_eff", self.det_eff, "must lie in (0, 1]");
        }
        if !(self.mode_match > 0.0 && self.mode_match <= 1.0) {
            return bad("mode_match", self.mode_match, "must lie in (0, 1]");
        }
        Ok(())
    }

    /// Mean number of photons entering the cavity mode.
    pub fn matched_mean(&self) -> f64 {
        self.nbar * self.mode_match
    }

    /// Probability that unmatched light produces no A click.
    pub(crate) fn unmatched_silence(&self) -> f64 {
        (-self.nbar * (1.0 - self.mode_match) * self.det_eff).exp()
    }
}

/// Result of one heralded reflection step.
#[derive(Debug, Clone, PartialEq)]
pub struct HeraldOutcome {
    /// Normalized atomic state conditioned on a D click.
    pub state: TwoAtomState,
    /// Absolute probability of a D click (photon or dark count).
    pub herald_prob: f64,
    /// P(D click | any click).
    pub d_fraction: f64,
    /// Probability of any click on either detector.
    pub click_prob: f64,
    /// Contribution to `herald_prob` from k = 0, 1, 2, … matched photons.
    pub branch_log: Vec<f64>,
}
