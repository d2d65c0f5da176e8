use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use num_complex::Complex64;
use serde::Serialize;

use super::AnalysisError;
use crate::quantum::{BellKind, Ket, TwoAtomState};

const Q_NORM: f64 = 3.0 / (4.0 * PI);

/// Coherent spin state ⊗ⱼ (cos(θ/2)|↑⟩ − e^{iφ} sin(θ/2)|↓⟩).
pub fn coherent_state(theta: f64, phi: f64) -> Ket {
    let up = Complex64::new((theta / 2.0).cos(), 0.0);
    let down = -Complex64::from_polar((theta / 2.0).sin(), phi);
    Ket::new([up * up, up * down, down * up, down * down])
}

/// Q(ρ; θ, φ) = (3/4π) ⟨θ,φ|ρ|θ,φ⟩
pub fn husimi_q(state: &TwoAtomState, theta: f64, phi: f64) -> f64 {
    Q_NORM * state.overlap(&coherent_state(theta, phi))
}

/// tr(ρ P_sym): the weight outside the singlet, which is what Q integrates to.
pub fn symmetric_weight(state: &TwoAtomState) -> f64 {
    state.trace_weight() - state.overlap(&BellKind::PsiMinus.ket())
}

/// Mollweide coordinates on a unit sphere (x ∈ [−2√2, 2√2], y ∈ [−√2, √2]),
/// with latitude π/2 − θ and longitude φ − π.
pub fn mollweide(theta: f64, phi: f64) -> (f64, f64) {
    let lat = FRAC_PI_2 - theta;
    let lon = phi - PI;
    let t = if (lat.abs() - FRAC_PI_2).abs() < 1e-12 {
        lat
    } else {
        // solve 2t + sin 2t = π sin(lat)
        let rhs = PI * lat.sin();
        let mut t = lat;
        for _ in 0..100 {
            let step = (2.0 * t + (2.0 * t).sin() - rhs) / (2.0 + 2.0 * (2.0 * t).cos());
            t -= step;
            if step.abs() < 1e-10 {
                break;
            }
        }
        t
    };
    (2.0 * SQRT_2 / PI * lon * t.cos(), SQRT_2 * t.sin())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HusimiPoint {
    pub theta: f64,
    pub phi: f64,
    pub q: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HusimiGrid {
    pub n_theta: usize,
    pub n_phi: usize,
    /// θ-major order: all φ for θ₀, then θ₁, …
    pub points: Vec<HusimiPoint>,
    /// Quadrature of ∫ Q dΩ.
    pub integral: f64,
    pub max: HusimiPoint,
}

/// θ runs over `n_theta` nodes from pole to pole inclusive, φ over `n_phi`
/// nodes in [0, 2π). The integral uses the trapezoid rule in θ with the
/// sin θ Jacobian and the periodic rectangle rule in φ.
pub fn husimi_grid(state: &TwoAtomState, n_theta: usize, n_phi: usize) -> Result<HusimiGrid, AnalysisError> {
    if n_theta < 2 || n_phi < 2 {
        return Err(AnalysisError::InvalidInput(format!("grid resolution {n_theta}x{n_phi} is below 2x2")));
    }
    let d_theta = PI / (n_theta - 1) as f64;
    let d_phi = 2.0 * PI / n_phi as f64;
    let mut points = Vec::with_capacity(n_theta * n_phi);
    let mut integral = 0.0;
    for i in 0..n_theta {
        let theta = i as f64 * d_theta;
        let edge = if i == 0 || i == n_theta - 1 { 0.5 } else { 1.0 };
        for k in 0..n_phi {
            let phi = k as f64 * d_phi;
            let q = husimi_q(state, theta, phi);
            let (x, y) = mollweide(theta, phi);
            integral += edge * q * theta.sin() * d_theta * d_phi;
            points.push(HusimiPoint { theta, phi, q, x, y });
        }
    }
    let max = *points.iter().max_by(|a, b| a.q.total_cmp(&b.q)).expect("grid is nonempty");
    Ok(HusimiGrid { n_theta, n_phi, points, integral, max })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Basis;
    use approx::assert_abs_diff_eq;

    #[test]
    fn south_pole_is_down_down() {
        let q = husimi_q(&TwoAtomState::basis(Basis::DownDown), PI, 0.0);
        assert_abs_diff_eq!(q, 3.0 / (4.0 * PI), epsilon = 1e-12);
        let q = husimi_q(&TwoAtomState::basis(Basis::UpUp), 0.0, 1.0);
        assert_abs_diff_eq!(q, 3.0 / (4.0 * PI), epsilon = 1e-12);
    }

    #[test]
    fn singlet_vanishes() {
        let g = husimi_grid(&TwoAtomState::bell(BellKind::PsiMinus), 31, 40).unwrap();
        assert!(g.points.iter().all(|p| p.q.abs() < 1e-12));
    }

    #[test]
    fn integral_is_symmetric_weight() {
        for kind in [BellKind::PsiPlus, BellKind::PhiMinus] {
            let rho = TwoAtomState::bell(kind);
            let g = husimi_grid(&rho, 100, 200).unwrap();
            assert_abs_diff_eq!(g.integral, 1.0, epsilon = 1e-3);
            assert_abs_diff_eq!(symmetric_weight(&rho), 1.0, epsilon = 1e-15);
        }
        let m = TwoAtomState::maximally_mixed();
        assert_abs_diff_eq!(husimi_grid(&m, 100, 200).unwrap().integral, 0.75, epsilon = 1e-3);
    }

    #[test]
    fn phi_minus_poles_and_belt() {
        let rho = TwoAtomState::bell(BellKind::PhiMinus);
        assert_abs_diff_eq!(husimi_q(&rho, 0.0, 0.0), 3.0 / (8.0 * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(husimi_q(&rho, PI, 0.0), 3.0 / (8.0 * PI), epsilon = 1e-12);
        // the maximum runs along the φ = π/2, 3π/2 great circle through the
        // poles; the equator is dark at φ = 0, π
        let g = husimi_grid(&rho, 61, 80).unwrap();
        assert_abs_diff_eq!(g.max.q, 3.0 / (8.0 * PI), epsilon = 1e-12);
        assert_abs_diff_eq!(husimi_q(&rho, PI / 2.0, PI / 2.0), g.max.q, epsilon = 1e-12);
        assert_abs_diff_eq!(husimi_q(&rho, PI / 2.0, 0.0), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn mollweide_landmarks() {
        let (x, y) = mollweide(PI / 2.0, PI);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(y, 0.0, epsilon = 1e-15);
        let (x, y) = mollweide(0.0, 0.3);
        assert_abs_diff_eq!(y, SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(x, 0.0, epsilon = 1e-12);
        let (x, _) = mollweide(PI / 2.0, 0.0);
        assert_abs_diff_eq!(x, -2.0 * SQRT_2, epsilon = 1e-12);
        // auxiliary angle satisfies its defining equation
        let (_, y) = mollweide(1.0, 2.0);
        let t = (y / SQRT_2).asin();
        assert_abs_diff_eq!(2.0 * t + (2.0 * t).sin(), PI * (FRAC_PI_2 - 1.0).sin(), epsilon = 1e-10);
    }

    #[test]
    fn too_coarse() {
        assert!(husimi_grid(&TwoAtomState::maximally_mixed(), 1, 5).is_err());
    }
}
