//! Resonant reflection of a single-sided cavity containing 0, 1 or 2 coupled atoms.
//!
//! All rates are field rates in units of 2π·MHz. Only the resonant, long-pulse
//! limit is modeled, so every amplitude is real.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{Basis, JointAtomPhotonState, Ket};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CavityError {
    #[error("invalid cavity parameter {name} = {value}: {reason}")]
    Invalid { name: &'static str, value: f64, reason: &'static str },
}

/// (g, κ, κ_out, γ) in 2π·MHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityParams {
    /// Atom-cavity coupling rate.
    pub g: f64,
    /// Total cavity field decay rate.
    pub kappa: f64,
    /// Field decay rate through the outcoupling mirror.
    pub kappa_out: f64,
    /// Atomic dipole decay rate.
    pub gamma: f64,
}

impl Default for CavityParams {
    /// The experimental parameters 2π·(7.8, 2.5, 2.3, 3.0) MHz.
    fn default() -> Self {
        CavityParams { g: 7.8, kappa: 2.5, kappa_out: 2.3, gamma: 3.0 }
    }
}

impl CavityParams {
    pub fn new(g: f64, kappa: f64, kappa_out: f64, gamma: f64) -> Result<Self, CavityError> {
        let p = CavityParams { g, kappa, kappa_out, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), CavityError> {
        let bad = |name, value, reason| Err(CavityError::Invalid { name, value, reason });
        if !(self.g.is_finite() && self.g >= 0.0) {
            return bad("g", self.g, "must be finite and >= 0");
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return bad("kappa", self.kappa, "must be finite and > 0");
        }
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return bad("gamma", self.gamma, "must be finite and > 0");
        }
        if !(self.kappa_out > 0.0 && self.kappa_out <= self.kappa) {
            return bad("kappa_out", self.kappa_out, "must satisfy 0 < kappa_out <= kappa");
        }
        Ok(())
    }

    /// C = N g² / (2κγ)
    pub fn cooperativity(&self, n_coupled: usize) -> f64 {
        n_coupled as f64 * self.g * self.g / (2.0 * self.kappa * self.gamma)
    }

    /// r(N) = 1 − 2κ_out γ / (N g² + κγ); the L component always sees r(0).
    pub fn reflection_amplitude(&self, n_coupled: usize) -> f64 {
        1.0 - 2.0 * self.kappa_out * self.gamma / self.denominator(n_coupled)
    }

    /// |⟨D|R̂|A⟩|² = |½r(0) − ½r(N)|²
    pub fn flip_probability(&self, n_coupled: usize) -> f64 {
        let diff = 0.5 * (self.reflection_amplitude(0) - self.reflection_amplitude(n_coupled));
        diff * diff
    }

    /// (κ_out/κ · C/(C + ½))², evaluated independently of the amplitudes.
    pub fn flip_probability_closed_form(&self, n_coupled: usize) -> f64 {
        let c = self.cooperativity(n_coupled);
        let x = self.kappa_out / self.kappa * c / (c + 0.5);
        x * x
    }

    /// Probability that an R-polarized photon is scattered by the atoms,
    /// s = 4κ_out γ N g² / (κγ + N g²)².
    pub fn scattering_fraction(&self, n_coupled: usize) -> f64 {
        let d = self.denominator(n_coupled);
        4.0 * self.kappa_out * self.gamma * n_coupled as f64 * self.g * self.g / (d * d)
    }

    /// P_f / s = (κ_out / 2κ) C
    pub fn figure_of_merit(&self, n_coupled: usize) -> f64 {
        self.kappa_out / (2.0 * self.kappa) * self.cooperativity(n_coupled)
    }

    /// Conditions for the coupled atoms to flip the sign of the R reflection.
    pub fn phase_conditions(&self, n_coupled: usize) -> PhaseConditions {
        let n = n_coupled as f64;
        PhaseConditions {
            high_cooperativity: n * self.g * self.g > self.gamma * (2.0 * self.kappa_out - self.kappa),
            asymmetric: self.kappa_out > self.kappa / 2.0,
        }
    }

    pub fn reflection_table(&self) -> ReflectionTable {
        let r = [0, 1, 2].map(|n| self.reflection_amplitude(n));
        let s = [0, 1, 2].map(|n| self.scattering_fraction(n));
        ReflectionTable::new(r, s)
    }

    fn denominator(&self, n_coupled: usize) -> f64 {
        n_coupled as f64 * self.g * self.g + self.kappa * self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseConditions {
    pub high_cooperativity: bool,
    pub asymmetric: bool,
}

impl PhaseConditions {
    pub fn pi_phase_regime(&self) -> bool {
        self.high_cooperativity && self.asymmetric
    }
}

/// Per-branch amplitudes for one A-polarized photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchAmplitudes {
    /// ⟨A|R̂|A⟩ = ½(r(0) + r(N))
    pub a_a: f64,
    /// ⟨D|R̂|A⟩ = ½(r(0) − r(N))
    pub a_d: f64,
    /// 1 − a_A² − a_D²
    pub loss: f64,
}

/// Amplitudes of every output mode a matched A photon can end up in, for a
/// fixed atomic basis state. Squares sum to one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhotonModes {
    pub a: f64,
    pub d: f64,
    /// Scattered into free space by atom 1 / atom 2.
    pub scatter: [f64; 2],
    /// Lost through the second mirror or absorbed, R component.
    pub passive_r: f64,
    /// Same for the uncoupled L component.
    pub passive_l: f64,
}

/// Resonant reflection data for N = 0, 1, 2 coupled atoms.
///
/// `r[N]` is the R-light reflection amplitude (L always sees `r[0]`) and
/// `scatter[N]` the probability that an R photon is scattered by the atoms.
/// Whatever R or L intensity is neither reflected nor scattered is passive loss.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionTable {
    pub r: [f64; 3],
    pub scatter: [f64; 3],
}

impl ReflectionTable {
    pub fn new(r: [f64; 3], scatter: [f64; 3]) -> Self {
        ReflectionTable { r, scatter }
    }

    /// Lossless π-phase limit: r(0) = −1, r(N>0) = +1, no scattering.
    pub fn ideal() -> Self {
        ReflectionTable { r: [-1.0, 1.0, 1.0], scatter: [0.0; 3] }
    }

    /// Same reflection amplitudes with atomic scattering switched off; the
    /// scattered intensity is booked as passive loss instead.
    pub fn without_scattering(&self) -> Self {
        ReflectionTable { r: self.r, scatter: [0.0; 3] }
    }

    pub fn branch(&self, b: Basis) -> BranchAmplitudes {
        let r0 = self.r[0];
        let rn = self.r[b.n_up()];
        let a_a = 0.5 * (r0 + rn);
        let a_d = 0.5 * (r0 - rn);
        BranchAmplitudes { a_a, a_d, loss: 1.0 - a_a * a_a - a_d * a_d }
    }

    /// Branch amplitudes for each atomic basis state, in basis order.
    pub fn reflect_photon(&self) -> [BranchAmplitudes; 4] {
        Basis::ALL.map(|b| self.branch(b))
    }

    pub fn modes(&self, b: Basis) -> PhotonModes {
        let n = b.n_up();
        let BranchAmplitudes { a_a, a_d, .. } = self.branch(b);
        let half = std::f64::consts::FRAC_1_SQRT_2;
        // the A photon carries half its intensity in R and half in L
        let per_atom = if n == 0 { 0.0 } else { (self.scatter[n] / n as f64).sqrt() };
        let scatter = [0, 1].map(|j| if b.is_up(j) { half * per_atom } else { 0.0 });
        let rn = self.r[n];
        let passive_r = half * (1.0 - rn * rn - self.scatter[n]).max(0.0).sqrt();
        let passive_l = half * (1.0 - self.r[0] * self.r[0]).max(0.0).sqrt();
        PhotonModes { a: a_a, d: a_d, scatter, passive_r, passive_l }
    }

    /// Joint atom⊗polarization state after one photon reflects off `atoms`.
    pub fn reflect_ket(&self, atoms: &Ket) -> JointAtomPhotonState {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 8];
        let mut loss_weight = 0.0;
        for b in Basis::ALL {
            let c = atoms.amplitude(b);
            let br = self.branch(b);
            amplitudes[2 * b.index()] = c * br.a_a;
            amplitudes[2 * b.index() + 1] = c * br.a_d;
            loss_weight += c.norm_sqr() * br.loss;
        }
        JointAtomPhotonState { amplitudes, loss_weight }
    }
}

impl From<&CavityParams> for ReflectionTable {
    fn from(p: &CavityParams) -> Self {
        p.reflection_table()
    }
}
