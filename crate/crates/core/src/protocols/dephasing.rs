use serde::{Deserialize, Serialize};

use super::ProtocolError;
use crate::quantum::{Basis, TwoAtomState};

/// Quasi-static Gaussian qubit-frequency noise. Atom 1 is detuned by
/// δc + δd and atom 2 by δc − δd, with δc, δd independent zero-mean
/// Gaussians of the given standard deviations (2π·kHz).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_common: f64,
    pub sigma_diff: f64,
}

impl Default for NoiseModel {
    /// Roughly 90 µs for Φ± and 134 µs for Ψ±.
    fn default() -> Self {
        NoiseModel {
            sigma_common: NoiseModel::sigma_for_lifetime(90.0),
            sigma_diff: NoiseModel::sigma_for_lifetime(134.0),
        }
    }
}

/// 2π·kHz expressed in rad/µs.
const KHZ_TO_RAD_PER_US: f64 = 2.0 * std::f64::consts::PI * 1e-3;

impl NoiseModel {
    pub fn new(sigma_common: f64, sigma_diff: f64) -> Result<Self, ProtocolError> {
        for (name, value) in [("sigma_common", sigma_common), ("sigma_diff", sigma_diff)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(ProtocolError::InvalidParameter { name, value, reason: "must be finite and >= 0" });
            }
        }
        Ok(NoiseModel { sigma_common, sigma_diff })
    }

    /// σ (2π·kHz) whose coherence decay exp(−2σ²t²) reaches 1/e at `tau_us`.
    pub fn sigma_for_lifetime(tau_us: f64) -> f64 {
        1.0 / (tau_us * 2f64.sqrt() * KHZ_TO_RAD_PER_US)
    }

    /// 1/e time (µs) of a coherence with decay exp(−2σ²t²); ∞ for σ = 0.
    pub fn lifetime_for_sigma(sigma: f64) -> f64 {
        1.0 / (sigma * KHZ_TO_RAD_PER_US * 2f64.sqrt())
    }

    /// Averaged phase factor of ρ_{b b′} after `t_us`.
    pub fn coherence_factor(&self, b: Basis, c: Basis, t_us: f64) -> f64 {
        // Phase of |b⟩ is −½ Σⱼ sⱼ δⱼ t with sⱼ = +1 for ↑.
        let spin = |x: Basis, j: usize| -> f64 {
            if x.is_up(j) {
                1.0
            } else {
                -1.0
            }
        };
        let d1 = 0.5 * (spin(b, 0) - spin(c, 0));
        let d2 = 0.5 * (spin(b, 1) - spin(c, 1));
        let sc = self.sigma_common * KHZ_TO_RAD_PER_US;
        let sd = self.sigma_diff * KHZ_TO_RAD_PER_US;
        let var = (d1 + d2).powi(2) * sc * sc + (d1 - d2).powi(2) * sd * sd;
        (-0.5 * var * t_us * t_us).exp()
    }
}

/// Free evolution for `t_us` µs, averaged over the noise ensemble.
pub fn wait_evolution(state: &TwoAtomState, t_us: f64, noise: &NoiseModel) -> Result<TwoAtomState, ProtocolError> {
    if !(t_us.is_finite() && t_us >= 0.0) {
        return Err(ProtocolError::InvalidParameter { name: "t_us", value: t_us, reason: "must be finite and >= 0" });
    }
    let m = nalgebra::Matrix4::from_fn(|i, j| noise.coherence_factor(Basis::from_index(i), Basis::from_index(j), t_us));
    Ok(state.schur(&m))
}
