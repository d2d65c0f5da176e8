use std::f64::consts::FRAC_PI_2;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::AnalysisError;
use crate::quantum::{Basis, BellKind, Populations, RotationSpec, TwoAtomState};

/// Π(φ) measured operationally: a global π/2 analysis pulse, then
/// P↑↑ + P↓↓ − P↑↓ − P↓↑.
///
/// The pulse axis sits at azimuth π/2 − φ, which makes the signal read
/// 2Re ρ_{↑↓,↓↑} + 2Im ρ_{↑↑,↓↓} sin 2φ + 2Re ρ_{↑↑,↓↓} cos 2φ.
pub fn parity_of(state: &TwoAtomState, phi: f64) -> Result<f64, AnalysisError> {
    let p = state.global_rotation(&RotationSpec::azimuth(FRAC_PI_2 - phi, FRAC_PI_2)).populations()?;
    Ok(p.up_up + p.down_down - p.mixed)
}

pub fn parity_closed_form(state: &TwoAtomState, phi: f64) -> f64 {
    let flip = state.element(Basis::UpDown, Basis::DownUp);
    let ends = state.element(Basis::UpUp, Basis::DownDown);
    2.0 * flip.re + 2.0 * ends.im * (2.0 * phi).sin() + 2.0 * ends.re * (2.0 * phi).cos()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParityScan {
    pub phases: Vec<f64>,
    pub parities: Vec<f64>,
    pub std_errors: Option<Vec<f64>>,
}

impl ParityScan {
    pub fn new(phases: Vec<f64>, parities: Vec<f64>, std_errors: Option<Vec<f64>>) -> Result<Self, AnalysisError> {
        if phases.len() != parities.len() {
            return Err(AnalysisError::InvalidInput(format!(
                "{} phases but {} parity values",
                phases.len(),
                parities.len()
            )));
        }
        if let Some(e) = &std_errors {
            if e.len() != phases.len() || e.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(AnalysisError::InvalidInput("std errors must be positive, one per phase".into()));
            }
        }
        if phases.iter().chain(&parities).any(|x| !x.is_finite()) {
            return Err(AnalysisError::InvalidInput("non-finite sample".into()));
        }
        if phases.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalysisError::InvalidInput("phases must be strictly increasing".into()));
        }
        Ok(ParityScan { phases, parities, std_errors })
    }
}

/// Noiseless scan at `n_phases` equally spaced phases in [0, 2π).
pub fn parity_scan(state: &TwoAtomState, n_phases: usize) -> Result<ParityScan, AnalysisError> {
    let phases: Vec<f64> = (0..n_phases).map(|k| 2.0 * std::f64::consts::PI * k as f64 / n_phases as f64).collect();
    let parities = phases.iter().map(|&phi| parity_of(state, phi)).collect::<Result<Vec<_>, _>>()?;
    ParityScan::new(phases, parities, None)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceFit {
    pub re_updn_dnup: f64,
    pub im_upup_dndn: f64,
    pub re_upup_dndn: f64,
    /// Root-mean-square residual of the (weighted) fit.
    pub residual: f64,
}

impl CoherenceFit {
    /// Fitted oscillation offset 2Re ρ_{↑↓,↓↑}.
    pub fn offset(&self) -> f64 {
        2.0 * self.re_updn_dnup
    }

    /// Amplitude of the 2φ oscillation.
    pub fn amplitude(&self) -> f64 {
        2.0 * self.im_upup_dndn.hypot(self.re_upup_dndn)
    }

    pub fn predict(&self, phi: f64) -> f64 {
        2.0 * (self.re_updn_dnup + self.im_upup_dndn * (2.0 * phi).sin() + self.re_upup_dndn * (2.0 * phi).cos())
    }
}

/// Linear least squares on {1, sin 2φ, cos 2φ}, weighted by 1/σ² when the
/// scan carries standard errors.
pub fn fit_parity(scan: &ParityScan) -> Result<CoherenceFit, AnalysisError> {
    let n = scan.phases.len();
    let weight = |i: usize| scan.std_errors.as_ref().map_or(1.0, |e| 1.0 / e[i]);
    let design = DMatrix::from_fn(n, 3, |i, j| {
        let phi = scan.phases[i];
        weight(i)
            * match j {
                0 => 1.0,
                1 => (2.0 * phi).sin(),
                _ => (2.0 * phi).cos(),
            }
    });
    let rhs = DVector::from_fn(n, |i, _| weight(i) * scan.parities[i]);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let tol = 1e-10 * smax.max(1e-300);
    let rank = svd.rank(tol);
    if n < 3 || rank < 3 {
        return Err(AnalysisError::Underdetermined { samples: n, rank });
    }
    let coef = svd.solve(&rhs, tol).map_err(|e| AnalysisError::FitFailed(e.to_string()))?;
    let resid = &design * &coef - &rhs;
    Ok(CoherenceFit {
        re_updn_dnup: coef[0] / 2.0,
        im_upup_dndn: coef[1] / 2.0,
        re_upup_dndn: coef[2] / 2.0,
        residual: (resid.norm_squared() / n as f64).sqrt(),
    })
}

/// Bell fidelity from the measured population triple and fitted coherences.
pub fn bell_fidelity(pops: &Populations, fit: &CoherenceFit, target: BellKind) -> Result<f64, AnalysisError> {
    let sum = pops.up_up + pops.down_down + pops.mixed;
    if (sum - 1.0).abs() > 0.02 {
        return Err(AnalysisError::InvalidInput(format!("populations sum to {sum}")));
    }
    Ok(match target {
        BellKind::PsiPlus => 0.5 * pops.mixed + fit.re_updn_dnup,
        BellKind::PsiMinus => 0.5 * pops.mixed - fit.re_updn_dnup,
        BellKind::PhiPlus => 0.5 * (pops.up_up + pops.down_down) + fit.re_upup_dndn,
        BellKind::PhiMinus => 0.5 * (pops.up_up + pops.down_down) - fit.re_upup_dndn,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn psi_plus_flat() {
        let psi = TwoAtomState::bell(BellKind::PsiPlus);
        for phi in [0.0, 0.3, 1.9, 4.0] {
            assert_abs_diff_eq!(parity_of(&psi, phi).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn phi_minus_oscillates() {
        let phi_m = TwoAtomState::bell(BellKind::PhiMinus);
        assert_abs_diff_eq!(parity_of(&phi_m, 0.0).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parity_of(&phi_m, PI / 2.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn imaginary_coherence_sign() {
        // (↑↑ + i↓↓)/√2 has Im ρ_{↑↑,↓↓} = −½
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ket = crate::quantum::Ket::new([
            num_complex::Complex64::new(s, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            num_complex::Complex64::new(0.0, s),
        ]);
        let rho = TwoAtomState::pure(&ket);
        assert_abs_diff_eq!(parity_of(&rho, PI / 4.0).unwrap(), -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(parity_closed_form(&rho, PI / 4.0), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn mixed_is_zero() {
        let m = TwoAtomState::maximally_mixed();
        assert_abs_diff_eq!(parity_of(&m, 0.7).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn fit_recovers_psi_plus() {
        let scan = parity_scan(&TwoAtomState::bell(BellKind::PsiPlus), 8).unwrap();
        let fit = fit_parity(&scan).unwrap();
        assert_abs_diff_eq!(fit.re_updn_dnup, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.im_upup_dndn, 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(fit.re_upup_dndn, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn offset_maps_to_coherence() {
        let phases: Vec<f64> = (0..12).map(|k| k as f64 * PI / 6.0).collect();
        let parities = phases.iter().map(|p| 0.8 + 0.3 * (2.0 * p).cos()).collect();
        let fit = fit_parity(&ParityScan::new(phases, parities, None).unwrap()).unwrap();
        assert_abs_diff_eq!(fit.re_updn_dnup, 0.40, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.offset(), 0.80, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.amplitude(), 0.30, epsilon = 1e-12);
    }

    #[test]
    fn underdetermined() {
        let scan = ParityScan::new(vec![0.0, 1.0], vec![0.1, 0.2], None).unwrap();
        assert!(matches!(fit_parity(&scan), Err(AnalysisError::Underdetermined { .. })));
        // three samples, but only two distinct phases modulo π
        let scan = ParityScan::new(vec![0.0, 1.0, PI], vec![0.1, 0.2, 0.1], None).unwrap();
        assert!(matches!(fit_parity(&scan), Err(AnalysisError::Underdetermined { .. })));
    }

    #[test]
    fn scan_validation() {
        assert!(ParityScan::new(vec![0.0, 0.0, 1.0], vec![0.0; 3], None).is_err());
        assert!(ParityScan::new(vec![0.0, 1.0], vec![0.0], None).is_err());
        assert!(ParityScan::new(vec![0.0, 1.0], vec![0.0; 2], Some(vec![0.1, 0.0])).is_err());
    }

    #[test]
    fn reconstructed_fidelities() {
        let pops = Populations { up_up: 0.07, down_down: 0.10, mixed: 0.83 };
        let fit = CoherenceFit { re_updn_dnup: 0.40, im_upup_dndn: 0.0, re_upup_dndn: 0.0, residual: 0.0 };
        assert_abs_diff_eq!(bell_fidelity(&pops, &fit, BellKind::PsiPlus).unwrap(), 0.815, epsilon = 1e-12);
        let mixed = Populations { up_up: 0.25, down_down: 0.25, mixed: 0.5 };
        let zero = CoherenceFit { re_updn_dnup: 0.0, ..fit };
        assert_abs_diff_eq!(bell_fidelity(&mixed, &zero, BellKind::PsiPlus).unwrap(), 0.25, epsilon = 1e-15);
        let bad = Populations { up_up: 0.5, down_down: 0.5, mixed: 0.5 };
        assert!(bell_fidelity(&bad, &fit, BellKind::PsiPlus).is_err());
    }

    #[test]
    fn exact_state_reconstruction() {
        for kind in BellKind::ALL {
            let rho = TwoAtomState::bell(kind);
            let fit = fit_parity(&parity_scan(&rho, 16).unwrap()).unwrap();
            let f = bell_fidelity(&rho.populations().unwrap(), &fit, kind).unwrap();
            assert_abs_diff_eq!(f, 1.0, epsilon = 1e-10);
        }
    }
}
