//! Double- and single-carving sequences evaluated as exact channels.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{carve_step, prepare, PreparationSpec, ProtocolError, PulseConfig};
use crate::cavity::ReflectionTable;
use crate::quantum::{Basis, BellKind, RotationSpec, TwoAtomState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Scheme {
    /// R_y^{π/2} → carve → R_y^π → carve
    Double,
    /// R_y^α → carve
    Single { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stage {
    Rotate(RotationSpec),
    Carve,
}

/// Everything needed to run a protocol, exactly or by sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolSetup {
    pub scheme: Scheme,
    pub prep: PreparationSpec,
    pub pulse: PulseConfig,
    pub table: ReflectionTable,
    pub final_rotation: Option<RotationSpec>,
}

impl ProtocolSetup {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        self.pulse.validate()?;
        if let Scheme::Single { alpha } = self.scheme {
            if !(0.0..=PI).contains(&alpha) {
                return Err(ProtocolError::InvalidParameter {
                    name: "alpha",
                    value: alpha,
                    reason: "must lie in [0, pi]",
                });
            }
        }
        let f = self.prep.fidelity;
        if !(0.0..=1.0).contains(&f) {
            return Err(ProtocolError::InvalidParameter {
                name: "prep_fidelity",
                value: f,
                reason: "must lie in [0, 1]",
            });
        }
        Ok(())
    }

    pub fn stages(&self) -> Vec<Stage> {
        let mut stages = match self.scheme {
            Scheme::Double => vec![
                Stage::Rotate(RotationSpec::y(PI / 2.0)),
                Stage::Carve,
                Stage::Rotate(RotationSpec::y(PI)),
                Stage::Carve,
            ],
            Scheme::Single { alpha } => vec![Stage::Rotate(RotationSpec::y(alpha)), Stage::Carve],
        };
        if let Some(r) = self.final_rotation {
            stages.push(Stage::Rotate(r));
        }
        stages
    }

    pub fn run_exact(&self) -> Result<ProtocolResult, ProtocolError> {
        self.validate()?;
        let mut state = prepare(&self.prep);
        let mut steps = Vec::new();
        for stage in self.stages() {
            match stage {
                Stage::Rotate(r) => state = state.global_rotation(&r),
                Stage::Carve => {
                    let out = carve_step(&state, &self.pulse, &self.table)?;
                    steps.push(StepSummary {
                        herald_prob: out.herald_prob,
                        d_fraction: out.d_fraction,
                        click_prob: out.click_prob,
                        branch_log: out.branch_log,
                    });
                    state = out.state;
                }
            }
        }
        let success_prob = steps.iter().map(|s| s.d_fraction).product();
        let efficiency = steps.iter().map(|s| s.herald_prob).product();
        Ok(ProtocolResult { state, steps, success_prob, efficiency })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepSummary {
    pub herald_prob: f64,
    pub d_fraction: f64,
    pub click_prob: f64,
    pub branch_log: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolResult {
    /// Final heralded state, after the optional final rotation.
    pub state: TwoAtomState,
    pub steps: Vec<StepSummary>,
    /// Product of the per-step D fractions: the share of detection events
    /// that carry the protocol forward.
    pub success_prob: f64,
    /// Product of the absolute per-pulse herald probabilities.
    pub efficiency: f64,
}

impl ProtocolResult {
    pub fn bell_fidelities(&self) -> Result<[(BellKind, f64); 4], ProtocolError> {
        let mut out = [(BellKind::PsiPlus, 0.0); 4];
        for (slot, kind) in out.iter_mut().zip(BellKind::ALL) {
            *slot = (kind, self.state.bell_fidelity(kind)?);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleCarvingResult {
    pub result: ProtocolResult,
    pub eta_ideal: f64,
    pub f_ideal: f64,
}

pub fn double_carving(
    prep: PreparationSpec,
    pulse: PulseConfig,
    table: &ReflectionTable,
    final_rotation: Option<RotationSpec>,
) -> Result<ProtocolResult, ProtocolError> {
    ProtocolSetup { scheme: Scheme::Double, prep, pulse, table: *table, final_rotation }.run_exact()
}

/// Single carving of a perfectly prepared |↓↓⟩.
pub fn single_carving(
    alpha: f64,
    pulse: PulseConfig,
    table: &ReflectionTable,
    final_rotation: Option<RotationSpec>,
) -> Result<SingleCarvingResult, ProtocolError> {
    let setup = ProtocolSetup {
        scheme: Scheme::Single { alpha },
        prep: PreparationSpec::perfect(Basis::DownDown),
        pulse,
        table: *table,
        final_rotation,
    };
    Ok(SingleCarvingResult {
        result: setup.run_exact()?,
        eta_ideal: ideal_single_carving_efficiency(alpha),
        f_ideal: ideal_single_carving_fidelity(alpha),
    })
}

/// η(α) = 1 − cos⁴(α/2)
pub fn ideal_single_carving_efficiency(alpha: f64) -> f64 {
    1.0 - (alpha / 2.0).cos().powi(4)
}

/// F(α) = 4cos²(α/2) / (3 + cos α)
pub fn ideal_single_carving_fidelity(alpha: f64) -> f64 {
    4.0 * (alpha / 2.0).cos().powi(2) / (3.0 + alpha.cos())
}

/// Double-carving fidelity when every incident photon of both pulses may
/// scatter with probability `s` and nothing else goes wrong:
/// F = ½ + ½·exp(−2n̄s). A coarse envelope; the full channel books only the
/// coupled half of each photon and adds dark counts and mode mismatch.
pub fn scattering_limited_fidelity(nbar: f64, s: f64) -> f64 {
    0.5 + 0.5 * (-2.0 * nbar * s).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::CavityParams;
    use approx::assert_abs_diff_eq;

    fn ideal() -> (PulseConfig, ReflectionTable) {
        (PulseConfig::ideal(0.33), ReflectionTable::ideal())
    }

    #[test]
    fn ideal_double_carving() {
        let (pulse, table) = ideal();
        let res = double_carving(PreparationSpec::perfect(Basis::DownDown), pulse, &table, None).unwrap();
        assert_abs_diff_eq!(res.steps[0].d_fraction, 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(res.steps[1].d_fraction, 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(res.success_prob, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(res.state.bell_fidelity(BellKind::PsiPlus).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn final_rotations_reach_phi_states() {
        let (pulse, table) = ideal();
        let prep = PreparationSpec::perfect(Basis::DownDown);
        for (rot, kind) in
            [(RotationSpec::y(PI / 2.0), BellKind::PhiMinus), (RotationSpec::x(PI / 2.0), BellKind::PhiPlus)]
        {
            let res = double_carving(prep, pulse, &table, Some(rot)).unwrap();
            assert_abs_diff_eq!(res.state.bell_fidelity(kind).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn antiparallel_input_gives_singlet() {
        let (pulse, table) = ideal();
        let prep = PreparationSpec { kind: super::super::PrepKind::AntiparallelMixture, fidelity: 1.0 };
        let res = double_carving(prep, pulse, &table, None).unwrap();
        assert_abs_diff_eq!(res.state.bell_fidelity(BellKind::PsiMinus).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_carving_ideal_matches_closed_forms() {
        let (pulse, table) = ideal();
        for alpha in [0.1, 0.5, PI / 2.0, 2.5, PI] {
            let out = single_carving(alpha, pulse, &table, None).unwrap();
            assert_abs_diff_eq!(out.result.success_prob, out.eta_ideal, epsilon = 1e-12);
            let f = out.result.state.bell_fidelity(BellKind::PsiPlus).unwrap();
            assert_abs_diff_eq!(f, out.f_ideal, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ideal_single_carving_efficiency(PI / 2.0), 0.75, epsilon = 1e-15);
        assert_abs_diff_eq!(ideal_single_carving_fidelity(PI / 2.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn single_carving_zero_angle_never_heralds() {
        let (pulse, table) = ideal();
        assert!(matches!(single_carving(0.0, pulse, &table, None), Err(ProtocolError::NeverHeralds(_))));
    }

    #[test]
    fn default_double_carving_is_noisy_but_entangled() {
        let table = CavityParams::default().reflection_table();
        let res = double_carving(PreparationSpec::down_down(), PulseConfig::default(), &table, None).unwrap();
        let f = res.state.bell_fidelity(BellKind::PsiPlus).unwrap();
        assert!((0.75..0.95).contains(&f), "fidelity {f}");
        assert!(res.success_prob > 0.25 && res.success_prob < 0.5);
        assert!(res.efficiency > 0.001 && res.efficiency < 0.01);
    }

    #[test]
    fn envelope_bounds_the_full_channel() {
        assert_abs_diff_eq!(scattering_limited_fidelity(0.0, 0.36), 1.0, epsilon = 1e-15);
        let table = CavityParams::default().reflection_table();
        for nbar in [0.5, 1.0, 2.0] {
            let pulse = PulseConfig { nbar, dark_prob: 0.0, ..PulseConfig::default() };
            let prep = PreparationSpec::perfect(Basis::DownDown);
            let f = double_carving(prep, pulse, &table, None).unwrap().state.bell_fidelity(BellKind::PsiPlus).unwrap();
            assert!(f > scattering_limited_fidelity(nbar, 0.36), "nbar {nbar}: {f}");
        }
    }

    #[test]
    fn rejects_bad_alpha() {
        let (pulse, table) = ideal();
        assert!(single_carving(-0.1, pulse, &table, None).is_err());
        assert!(single_carving(4.0, pulse, &table, None).is_err());
    }
}
