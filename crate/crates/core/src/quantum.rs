//! Exact state algebra for two qubits and for one photon reflected off them.
//!
//! Basis ordering is fixed throughout the crate: index 0 = ↑↑, 1 = ↑↓,
//! 2 = ↓↑, 3 = ↓↓. The first label is atom 1. Single-atom matrices use
//! index 0 = ↑, 1 = ↓, so the two-atom basis is the Kronecker product of
//! the single-atom ones.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Complex amplitude used for every state and operator entry.
pub type ComplexAmplitude = Complex64;

pub type DensityMatrix = Matrix4<Complex64>;

/// Hermiticity tolerance for stored density matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Eigenvalue floor accepted as positive semidefinite.
pub const PSD_FLOOR: f64 = -1e-10;
/// Trace tolerance for a normalized state.
pub const TRACE_TOL: f64 = 1e-12;
/// Below this trace weight a conditional branch cannot be renormalized.
pub const NULL_BRANCH_WEIGHT: f64 = 1e-15;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StateError {
    #[error("matrix contains a non-finite entry")]
    NonFinite,
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("trace {0} outside [0, 1]")]
    BadTrace(f64),
    #[error("state is not normalized (trace weight {0})")]
    Unnormalized(f64),
    #[error("null branch: trace weight {0:.3e} is too small to renormalize")]
    NullBranch(f64),
    #[error("empty projection subspace")]
    EmptySubspace,
    #[error("target state has zero norm")]
    ZeroTarget,
}

/// Computational basis state of the atom pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Basis {
    UpUp,
    UpDown,
    DownUp,
    DownDown,
}

impl Basis {
    pub const ALL: [Basis; 4] = [Basis::UpUp, Basis::UpDown, Basis::DownUp, Basis::DownDown];

    pub fn index(self) -> usize {
        match self {
            Basis::UpUp => 0,
            Basis::UpDown => 1,
            Basis::DownUp => 2,
            Basis::DownDown => 3,
        }
    }

    pub fn from_index(i: usize) -> Basis {
        Basis::ALL[i]
    }

    /// Whether atom `atom` (0 or 1) is in ↑.
    pub fn is_up(self, atom: usize) -> bool {
        let i = self.index();
        let bit = if atom == 0 { i >> 1 } else { i & 1 };
        bit == 0
    }

    /// Number of atoms in the cavity-coupled state ↑.
    pub fn n_up(self) -> usize {
        usize::from(self.is_up(0)) + usize::from(self.is_up(1))
    }

    pub fn label(self) -> &'static str {
        match self {
            Basis::UpUp => "uu",
            Basis::UpDown => "ud",
            Basis::DownUp => "du",
            Basis::DownDown => "dd",
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Basis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "uu" | "upup" => Ok(Basis::UpUp),
            "ud" | "updown" => Ok(Basis::UpDown),
            "du" | "downup" => Ok(Basis::DownUp),
            "dd" | "downdown" => Ok(Basis::DownDown),
            other => Err(format!("unknown basis label '{other}'")),
        }
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellKind {
    PsiPlus,
    PsiMinus,
    PhiPlus,
    PhiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [BellKind::PsiPlus, BellKind::PsiMinus, BellKind::PhiPlus, BellKind::PhiMinus];

    pub fn ket(self) -> Ket {
        let h = FRAC_1_SQRT_2;
        let amps = match self {
            BellKind::PsiPlus => [0.0, h, h, 0.0],
            BellKind::PsiMinus => [0.0, h, -h, 0.0],
            BellKind::PhiPlus => [h, 0.0, 0.0, h],
            BellKind::PhiMinus => [h, 0.0, 0.0, -h],
        };
        Ket::from_real(amps)
    }

    pub fn name(self) -> &'static str {
        match self {
            BellKind::PsiPlus => "psi_plus",
            BellKind::PsiMinus => "psi_minus",
            BellKind::PhiPlus => "phi_plus",
            BellKind::PhiMinus => "phi_minus",
        }
    }
}

impl fmt::Display for BellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BellKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "psi-plus" | "psiplus" | "psi+" => Ok(BellKind::PsiPlus),
            "psi-minus" | "psiminus" | "psi-" => Ok(BellKind::PsiMinus),
            "phi-plus" | "phiplus" | "phi+" => Ok(BellKind::PhiPlus),
            "phi-minus" | "phiminus" | "phi-" => Ok(BellKind::PhiMinus),
            other => Err(format!("unknown Bell state '{other}'")),
        }
    }
}

/// Pure two-atom state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ket(pub Vector4<Complex64>);

impl Ket {
    pub fn new(amps: [Complex64; 4]) -> Self {
        Ket(Vector4::from(amps))
    }

    pub fn from_real(amps: [f64; 4]) -> Self {
        Ket(Vector4::from(amps.map(|a| Complex64::new(a, 0.0))))
    }

    pub fn basis(b: Basis) -> Self {
        let mut v = Vector4::zeros();
        v[b.index()] = ONE;
        Ket(v)
    }

    pub fn amplitude(&self, b: Basis) -> Complex64 {
        self.0[b.index()]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalized(&self) -> Option<Self> {
        let n = self.norm_sqr().sqrt();
        (n > 0.0).then(|| Ket(self.0.unscale(n)))
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Ket) -> Complex64 {
        self.0.dotc(&other.0)
    }

    pub fn rotated(&self, spec: &RotationSpec) -> Ket {
        Ket(spec.two_atom_unitary() * self.0)
    }

    pub fn fidelity_with(&self, other: &Ket) -> f64 {
        self.inner(other).norm_sqr() / (self.norm_sqr() * other.norm_sqr())
    }
}

/// Rotation axis of a global Raman pulse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RotationAxis {
    X,
    Y,
    Z,
    /// Equatorial axis at azimuth φ: φ = 0 is x, φ = π/2 is y.
    Azimuth(f64),
}

/// A global single-qubit rotation R_axis^angle applied identically to both atoms.
///
/// With σ matrices in the (↑, ↓) basis the single-atom unitary is
/// exp(−i·angle·n·σ/2). For the y axis this sends ↓ → cos(α/2)↓ − sin(α/2)↑
/// and ↑ → cos(α/2)↑ + sin(α/2)↓.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotationSpec {
    pub axis: RotationAxis,
    pub angle: f64,
}

impl RotationSpec {
    pub fn x(angle: f64) -> Self {
        RotationSpec { axis: RotationAxis::X, angle }
    }

    pub fn y(angle: f64) -> Self {
        RotationSpec { axis: RotationAxis::Y, angle }
    }

    pub fn z(angle: f64) -> Self {
        RotationSpec { axis: RotationAxis::Z, angle }
    }

    pub fn azimuth(phi: f64, angle: f64) -> Self {
        RotationSpec { axis: RotationAxis::Azimuth(phi), angle }
    }

    pub fn inverse(&self) -> Self {
        RotationSpec { axis: self.axis, angle: -self.angle }
    }

    pub fn single_atom_unitary(&self) -> Matrix2<Complex64> {
        let c = Complex64::new((self.angle / 2.0).cos(), 0.0);
        let s = (self.angle / 2.0).sin();
        let minus_i_s = Complex64::new(0.0, -s);
        match self.axis {
            RotationAxis::Z => Matrix2::new(
                Complex64::from_polar(1.0, -self.angle / 2.0),
                ZERO,
                ZERO,
                Complex64::from_polar(1.0, self.angle / 2.0),
            ),
            axis => {
                let phi = match axis {
                    RotationAxis::X => 0.0,
                    RotationAxis::Y => std::f64::consts::FRAC_PI_2,
                    RotationAxis::Azimuth(phi) => phi,
                    RotationAxis::Z => unreachable!(),
                };
                // n·σ = [[0, e^{-iφ}], [e^{iφ}, 0]]
                let upper = minus_i_s * Complex64::from_polar(1.0, -phi);
                let lower = minus_i_s * Complex64::from_polar(1.0, phi);
                Matrix2::new(c, upper, lower, c)
            }
        }
    }

    pub fn two_atom_unitary(&self) -> Matrix4<Complex64> {
        let u = self.single_atom_unitary();
        u.kronecker(&u)
    }
}

/// (P↑↑, P↓↓, P↑↓ + P↓↑)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Populations {
    pub up_up: f64,
    pub down_down: f64,
    pub mixed: f64,
}

/// Two-atom density matrix, possibly an unnormalized conditional branch.
///
/// `trace_weight` is the trace of `rho`; normalized states carry 1.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoAtomState {
    rho: DensityMatrix,
    trace_weight: f64,
}

impl TwoAtomState {
    /// Validates finiteness, Hermiticity, positivity and trace ∈ [0, 1].
    pub fn from_density(rho: DensityMatrix) -> Result<Self, StateError> {
        if rho.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(StateError::NonFinite);
        }
        let dev = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(StateError::NotHermitian(dev));
        }
        let trace = rho.trace().re;
        if !(-TRACE_TOL..=1.0 + TRACE_TOL).contains(&trace) {
            return Err(StateError::BadTrace(trace));
        }
        let state = Self::from_density_unchecked(rho);
        let min_eig = state.min_eigenvalue();
        if min_eig < PSD_FLOOR {
            return Err(StateError::NotPositive(min_eig));
        }
        Ok(state)
    }

    /// Channel outputs are valid by construction; only symmetrize rounding.
    pub(crate) fn from_density_unchecked(rho: DensityMatrix) -> Self {
        let rho = (rho + rho.adjoint()).scale(0.5);
        let trace_weight = rho.trace().re;
        TwoAtomState { rho, trace_weight }
    }

    pub fn pure(ket: &Ket) -> Self {
        Self::from_density_unchecked(ket.0 * ket.0.adjoint())
    }

    pub fn basis(b: Basis) -> Self {
        Self::pure(&Ket::basis(b))
    }

    pub fn bell(kind: BellKind) -> Self {
        Self::pure(&kind.ket())
    }

    pub fn maximally_mixed() -> Self {
        Self::from_density_unchecked(DensityMatrix::identity().scale(0.25))
    }

    /// Incoherent mixture Σ pᵢ |bᵢ⟩⟨bᵢ|.
    pub fn diagonal(weights: [f64; 4]) -> Self {
        let mut rho = DensityMatrix::zeros();
        for (i, w) in weights.iter().enumerate() {
            rho[(i, i)] = Complex64::new(*w, 0.0);
        }
        Self::from_density_unchecked(rho)
    }

    pub fn rho(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn trace_weight(&self) -> f64 {
        self.trace_weight
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace_weight - 1.0).abs() <= TRACE_TOL
    }

    pub fn element(&self, row: Basis, col: Basis) -> Complex64 {
        self.rho[(row.index(), col.index())]
    }

    pub fn population(&self, b: Basis) -> f64 {
        self.element(b, b).re
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let eig = SymmetricEigen::new(self.rho);
        let mut ev = [0.0; 4];
        for (dst, src) in ev.iter_mut().zip(eig.eigenvalues.iter()) {
            *dst = *src;
        }
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// ρ → (U⊗U) ρ (U⊗U)†
    pub fn global_rotation(&self, spec: &RotationSpec) -> Self {
        self.conjugate_by(&spec.two_atom_unitary())
    }

    pub fn conjugate_by(&self, u: &Matrix4<Complex64>) -> Self {
        Self::from_density_unchecked(u * self.rho * u.adjoint())
    }

    pub fn populations(&self) -> Result<Populations, StateError> {
        self.require_normalized()?;
        Ok(Populations {
            up_up: self.population(Basis::UpUp),
            down_down: self.population(Basis::DownDown),
            mixed: self.population(Basis::UpDown) + self.population(Basis::DownUp),
        })
    }

    /// F = ⟨ψ|ρ|ψ⟩ for a normalized state and a target normalized here.
    pub fn fidelity(&self, target: &Ket) -> Result<f64, StateError> {
        self.require_normalized()?;
        let min_eig = self.min_eigenvalue();
        if min_eig < PSD_FLOOR {
            return Err(StateError::NotPositive(min_eig));
        }
        let psi = target.normalized().ok_or(StateError::ZeroTarget)?;
        Ok(self.overlap(&psi))
    }

    pub fn bell_fidelity(&self, kind: BellKind) -> Result<f64, StateError> {
        self.fidelity(&kind.ket())
    }

    /// ⟨ψ|ρ|ψ⟩ without normalization checks.
    pub fn overlap(&self, psi: &Ket) -> f64 {
        psi.0.dotc(&(self.rho * psi.0)).re
    }

    /// P ρ P onto span of `subspace`; the result is an unnormalized branch.
    pub fn project(&self, subspace: &[Basis]) -> Result<Self, StateError> {
        if subspace.is_empty() {
            return Err(StateError::EmptySubspace);
        }
        let mut keep = [false; 4];
        for b in subspace {
            keep[b.index()] = true;
        }
        let rho = DensityMatrix::from_fn(|i, j| if keep[i] && keep[j] { self.rho[(i, j)] } else { ZERO });
        Ok(Self::from_density_unchecked(rho))
    }

    pub fn renormalize(&self) -> Result<Self, StateError> {
        if self.trace_weight < NULL_BRANCH_WEIGHT {
            return Err(StateError::NullBranch(self.trace_weight));
        }
        Ok(Self::from_density_unchecked(self.rho.unscale(self.trace_weight)))
    }

    /// Elementwise (Schur) product with a real multiplier matrix. Every
    /// channel in this crate is diagonal in the computational basis and acts
    /// this way.
    pub(crate) fn schur(&self, m: &Matrix4<f64>) -> Self {
        let rho = DensityMatrix::from_fn(|i, j| self.rho[(i, j)] * m[(i, j)]);
        Self::from_density_unchecked(rho)
    }

    pub fn scaled(&self, w: f64) -> Self {
        Self::from_density_unchecked(self.rho.scale(w))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::from_density_unchecked(self.rho + other.rho)
    }

    /// Largest elementwise modulus of ρ − σ.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn require_normalized(&self) -> Result<(), StateError> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(StateError::Unnormalized(self.trace_weight))
        }
    }
}

/// Photon polarization after reflection: incident `A` or flipped `D`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    A,
    D,
}

/// Pure joint state of the atoms and one reflected photon in the (A, D)
/// polarization basis, plus the probability that the photon was lost.
///
/// Index layout: `2 * atom_index + polarization` with A = 0, D = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct JointAtomPhotonState {
    pub amplitudes: [Complex64; 8],
    pub loss_weight: f64,
}

impl JointAtomPhotonState {
    pub fn amplitude(&self, atoms: Basis, pol: Polarization) -> Complex64 {
        self.amplitudes[2 * atoms.index() + pol as usize]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.norm_sqr() + self.loss_weight
    }

    /// Atomic ket conditioned on finding the photon in `pol` (unnormalized).
    pub fn conditional_atoms(&self, pol: Polarization) -> Ket {
        Ket::new(Basis::ALL.map(|b| self.amplitude(b, pol)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ket_close_up_to_phase(a: &Ket, b: &Ket) -> bool {
        (a.fidelity_with(b) - 1.0).abs() < 1e-12
    }

    #[test]
    fn basis_bits() {
        assert_eq!(Basis::UpUp.n_up(), 2);
        assert_eq!(Basis::UpDown.n_up(), 1);
        assert!(Basis::UpDown.is_up(0) && !Basis::UpDown.is_up(1));
        assert!(!Basis::DownUp.is_up(0) && Basis::DownUp.is_up(1));
        assert_eq!(Basis::DownDown.n_up(), 0);
        assert_eq!("du".parse::<Basis>().unwrap(), Basis::DownUp);
    }

    #[test]
    fn bell_state_elements() {
        let psi = TwoAtomState::bell(BellKind::PsiPlus);
        for (r, c) in [(Basis::UpDown, Basis::UpDown), (Basis::DownUp, Basis::DownUp), (Basis::UpDown, Basis::DownUp)] {
            assert_abs_diff_eq!(psi.element(r, c).re, 0.5, epsilon = 1e-15);
        }
        let phi = TwoAtomState::bell(BellKind::PhiMinus);
        assert_abs_diff_eq!(phi.element(Basis::UpUp, Basis::DownDown).re, -0.5, epsilon = 1e-15);
        let f = psi.bell_fidelity(BellKind::PsiMinus).unwrap();
        assert_abs_diff_eq!(f, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn y_quarter_turn_on_down_down() {
        let out = Ket::basis(Basis::DownDown).rotated(&RotationSpec::y(PI / 2.0));
        let expect = Ket::from_real([0.5, -0.5, -0.5, 0.5]);
        assert!((out.0 - expect.0).norm() < 1e-15);
    }

    #[test]
    fn small_angle_rotation_amplitudes() {
        for alpha in [0.1, 0.23 * PI, 1.0, 2.5] {
            let out = Ket::basis(Basis::DownDown).rotated(&RotationSpec::y(alpha));
            let half = alpha / 2.0;
            let expect =
                Ket::from_real([half.sin().powi(2), -0.5 * alpha.sin(), -0.5 * alpha.sin(), half.cos().powi(2)]);
            assert!((out.0 - expect.0).norm() < 1e-15, "alpha = {alpha}");
        }
    }

    #[test]
    fn pi_pulse_maps_carved_state() {
        let s = 1.0 / 3f64.sqrt();
        let input = Ket::from_real([s, -s, -s, 0.0]);
        let out = input.rotated(&RotationSpec::y(PI));
        let expect = Ket::from_real([0.0, s, s, s]);
        assert!(ket_close_up_to_phase(&out, &expect));
        assert!((out.0 - expect.0).norm() < 1e-15);
    }

    #[test]
    fn populations_of_bell_states() {
        let p = TwoAtomState::bell(BellKind::PsiPlus).populations().unwrap();
        assert_abs_diff_eq!(p.mixed, 1.0, epsilon = 1e-15);
        let p = TwoAtomState::bell(BellKind::PhiMinus).populations().unwrap();
        assert_abs_diff_eq!(p.up_up, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.down_down, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(p.mixed, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn populations_reject_unnormalized() {
        let half = TwoAtomState::bell(BellKind::PsiPlus).scaled(0.5);
        assert!(matches!(half.populations(), Err(StateError::Unnormalized(_))));
    }

    #[test]
    fn fidelity_of_mixed_state() {
        let mixed = TwoAtomState::maximally_mixed();
        for kind in BellKind::ALL {
            assert_abs_diff_eq!(mixed.bell_fidelity(kind).unwrap(), 0.25, epsilon = 1e-15);
        }
    }

    #[test]
    fn from_density_rejects_bad_input() {
        let mut rho = DensityMatrix::zeros();
        rho[(0, 0)] = Complex64::new(1.5, 0.0);
        rho[(1, 1)] = Complex64::new(-0.5, 0.0);
        assert!(matches!(TwoAtomState::from_density(rho), Err(StateError::NotPositive(_))));
        let mut rho = DensityMatrix::identity().scale(0.25);
        rho[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(TwoAtomState::from_density(rho), Err(StateError::NotHermitian(_))));
        let mut rho = DensityMatrix::identity().scale(0.25);
        rho[(2, 2)] = Complex64::new(f64::NAN, 0.0);
        assert!(matches!(TwoAtomState::from_density(rho), Err(StateError::NonFinite)));
    }

    #[test]
    fn projection_of_rotated_state() {
        let start = TwoAtomState::basis(Basis::DownDown).global_rotation(&RotationSpec::y(PI / 2.0));
        let branch = start.project(&[Basis::UpUp, Basis::UpDown, Basis::DownUp]).unwrap();
        assert_abs_diff_eq!(branch.trace_weight(), 0.75, epsilon = 1e-15);
        let s = 1.0 / 3f64.sqrt();
        let f = branch.renormalize().unwrap().fidelity(&Ket::from_real([s, -s, -s, 0.0])).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn projection_edge_cases() {
        let dd = TwoAtomState::basis(Basis::DownDown);
        let branch = dd.project(&[Basis::UpUp, Basis::UpDown, Basis::DownUp]).unwrap();
        assert_eq!(branch.trace_weight(), 0.0);
        assert!(matches!(branch.renormalize(), Err(StateError::NullBranch(_))));
        assert!(matches!(dd.project(&[]), Err(StateError::EmptySubspace)));
        let rho = TwoAtomState::bell(BellKind::PhiPlus);
        assert_eq!(rho.project(&Basis::ALL).unwrap(), rho);
    }

    #[test]
    fn named_rotations_of_psi_plus() {
        let psi = BellKind::PsiPlus.ket();
        let phi_minus = psi.rotated(&RotationSpec::y(PI / 2.0));
        assert!(ket_close_up_to_phase(&phi_minus, &BellKind::PhiMinus.ket()));
        let phi_plus = psi.rotated(&RotationSpec::x(PI / 2.0));
        assert!(ket_close_up_to_phase(&phi_plus, &BellKind::PhiPlus.ket()));
    }

    #[test]
    fn azimuth_axis_matches_named_axes() {
        let a = RotationSpec::azimuth(0.0, 0.7).single_atom_unitary();
        let b = RotationSpec::x(0.7).single_atom_unitary();
        assert!((a - b).norm() < 1e-15);
        let a = RotationSpec::azimuth(PI / 2.0, 0.7).single_atom_unitary();
        let b = RotationSpec::y(0.7).single_atom_unitary();
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn joint_state_accessors() {
        let mut amplitudes = [ZERO; 8];
        amplitudes[2 * Basis::UpDown.index() + 1] = ONE;
        let joint = JointAtomPhotonState { amplitudes, loss_weight: 0.0 };
        assert_eq!(joint.amplitude(Basis::UpDown, Polarization::D), ONE);
        assert_eq!(joint.conditional_atoms(Polarization::D), Ket::basis(Basis::UpDown));
        assert_eq!(joint.total_probability(), 1.0);
    }
}
