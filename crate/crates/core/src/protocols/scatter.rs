//! Unheralded spontaneous scattering by the coupled (↑) atoms.
//!
//! A scattering event on branch b picks one of its N_b coupled atoms with
//! equal amplitude and leaves which-atom information in the environment.
//! With a Poisson number of events of mean λ per coupled branch, the pair
//! overlap is c(b, b′) = Σⱼ [bⱼ = ↑][b′ⱼ = ↑] / √(N_b N_b′), and the channel
//! multiplies ρ_{b b′} by exp(λ(c − (ι_b + ι_b′)/2)), where ι_b = [N_b ≥ 1].

use nalgebra::Matrix4;

use super::ProtocolError;
use crate::quantum::{Basis, StateError, TwoAtomState};

fn pair_overlap(b: Basis, c: Basis) -> f64 {
    let (nb, nc) = (b.n_up(), c.n_up());
    if nb == 0 || nc == 0 {
        return 0.0;
    }
    let shared = (0..2).filter(|&j| b.is_up(j) && c.is_up(j)).count();
    shared as f64 / ((nb * nc) as f64).sqrt()
}

pub(crate) fn scattering_multiplier(expected_scatter: f64) -> Matrix4<f64> {
    let coupled = |b: Basis| if b.n_up() > 0 { 1.0 } else { 0.0 };
    Matrix4::from_fn(|i, j| {
        let (b, c) = (Basis::from_index(i), Basis::from_index(j));
        let exponent = pair_overlap(b, c) - 0.5 * (coupled(b) + coupled(c));
        (expected_scatter * exponent).exp()
    })
}

/// Trace-preserving mixture over the (unobserved) number of scattering events.
pub fn scattering_channel(state: &TwoAtomState, expected_scatter: f64) -> Result<TwoAtomState, ProtocolError> {
    if !(expected_scatter.is_finite() && expected_scatter >= 0.0) {
        return Err(ProtocolError::InvalidParameter {
            name: "expected_scatter",
            value: expected_scatter,
            reason: "must be finite and >= 0",
        });
    }
    Ok(state.schur(&scattering_multiplier(expected_scatter)))
}

/// A single scattering event known to originate from `atom` (0 or 1):
/// |↑⟩⟨↑| on that atom, renormalized.
pub fn scattering_event(state: &TwoAtomState, atom: usize) -> Result<TwoAtomState, StateError> {
    let kept: Vec<Basis> = Basis::ALL.into_iter().filter(|b| b.is_up(atom)).collect();
    state.project(&kept)?.renormalize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{BellKind, Ket, RotationSpec};
    use approx::assert_abs_diff_eq;
    use nalgebra::Matrix4;
    use num_complex::Complex64;

    /// Brute-force oracle: split λ into n small slices, each with a Kraus
    /// set {no event, event on atom j with amplitude 1/√N_b}, and compose.
    fn sliced_oracle(state: &TwoAtomState, lambda: f64, slices: usize) -> TwoAtomState {
        let p = lambda / slices as f64;
        let mut rho: Matrix4<Complex64> = *state.rho();
        for _ in 0..slices {
            let mut next = Matrix4::<Complex64>::zeros();
            // no-event operator: diag √(1 − p ι_b)
            let k0 = Matrix4::from_fn(|i, j| {
                if i != j {
                    return Complex64::new(0.0, 0.0);
                }
                let b = Basis::from_index(i);
                Complex64::new((1.0 - if b.n_up() > 0 { p } else { 0.0 }).sqrt(), 0.0)
            });
            next += k0 * rho * k0.adjoint();
            for atom in 0..2 {
                let k = Matrix4::from_fn(|i, j| {
                    let b = Basis::from_index(i);
                    if i == j && b.is_up(atom) {
                        Complex64::new((p / b.n_up() as f64).sqrt(), 0.0)
                    } else {
                        Complex64::new(0.0, 0.0)
                    }
                });
                next += k * rho * k.adjoint();
            }
            rho = next;
        }
        TwoAtomState::from_density(rho).unwrap()
    }

    #[test]
    fn zero_scatter_is_identity() {
        let rho = TwoAtomState::basis(Basis::DownDown).global_rotation(&RotationSpec::y(1.1));
        let out = scattering_channel(&rho, 0.0).unwrap();
        assert!(out.distance(&rho) < 1e-15);
    }

    #[test]
    fn single_event_on_psi_plus() {
        let out = scattering_event(&TwoAtomState::bell(BellKind::PsiPlus), 0).unwrap();
        assert!(out.distance(&TwoAtomState::basis(Basis::UpDown)) < 1e-15);
        assert_abs_diff_eq!(out.bell_fidelity(BellKind::PsiPlus).unwrap(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn psi_plus_exponential_decay() {
        let psi = TwoAtomState::bell(BellKind::PsiPlus);
        for lambda in [0.0, 0.1, 0.5, 1.44] {
            let f = scattering_channel(&psi, lambda).unwrap().bell_fidelity(BellKind::PsiPlus).unwrap();
            assert_abs_diff_eq!(f, 0.5 + 0.5 * (-lambda).exp(), epsilon = 1e-14);
        }
    }

    #[test]
    fn matches_sliced_kraus_oracle() {
        let s = 0.5;
        let ket = Ket::from_real([s, -s, 0.6 * s, (1.0 - 2.0 * s * s - 0.36 * s * s).sqrt()]);
        let rho = TwoAtomState::pure(&ket.normalized().unwrap());
        let lambda = 0.8;
        let exact = scattering_channel(&rho, lambda).unwrap();
        let oracle = sliced_oracle(&rho, lambda, 20_000);
        assert!(exact.distance(&oracle) < 1e-4, "distance {}", exact.distance(&oracle));
    }

    #[test]
    fn trace_preserving_and_down_down_untouched() {
        let rho = TwoAtomState::basis(Basis::DownDown).global_rotation(&RotationSpec::y(0.9));
        let out = scattering_channel(&rho, 2.3).unwrap();
        assert_abs_diff_eq!(out.trace_weight(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(out.population(Basis::DownDown), rho.population(Basis::DownDown), epsilon = 1e-15);
        assert!(out.min_eigenvalue() > -1e-12);
    }

    #[test]
    fn negative_scatter_rejected() {
        assert!(scattering_channel(&TwoAtomState::maximally_mixed(), -0.1).is_err());
    }
}
