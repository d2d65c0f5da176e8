use serde::{Deserialize, Serialize};

use crate::quantum::{Basis, TwoAtomState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PrepKind {
    /// |↓↓⟩ with a leak into the other three basis states.
    DownDown,
    /// ½|↑↓⟩⟨↑↓| + ½|↓↑⟩⟨↓↑| with a leak into {↑↑, ↓↓}.
    AntiparallelMixture,
    /// An exact basis state; `fidelity` is ignored.
    PerfectPure(Basis),
}

/// Initial-state factory. Imperfect preparation is the target mixture with
/// weight `fidelity` plus a uniform mixture over the complement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationSpec {
    pub kind: PrepKind,
    pub fidelity: f64,
}

impl PreparationSpec {
    pub fn down_down() -> Self {
        PreparationSpec { kind: PrepKind::DownDown, fidelity: 0.99 }
    }

    pub fn antiparallel() -> Self {
        PreparationSpec { kind: PrepKind::AntiparallelMixture, fidelity: 0.86 }
    }

    pub fn perfect(b: Basis) -> Self {
        PreparationSpec { kind: PrepKind::PerfectPure(b), fidelity: 1.0 }
    }

    /// Basis-state weights of the prepared (always diagonal) state.
    pub fn weights(&self) -> [f64; 4] {
        let (target, p): (&[Basis], f64) = match self.kind {
            PrepKind::DownDown => (&[Basis::DownDown], self.fidelity),
            PrepKind::AntiparallelMixture => (&[Basis::UpDown, Basis::DownUp], self.fidelity),
            PrepKind::PerfectPure(b) => return Basis::ALL.map(|x| if x == b { 1.0 } else { 0.0 }),
        };
        let leak = (1.0 - p) / (4 - target.len()) as f64;
        let share = p / target.len() as f64;
        Basis::ALL.map(|b| if target.contains(&b) { share } else { leak })
    }
}

pub fn prepare(spec: &PreparationSpec) -> TwoAtomState {
    TwoAtomState::diagonal(spec.weights())
}
