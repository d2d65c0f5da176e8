//! Diagnostics on two-atom states: parity scans, Husimi Q distributions,
//! Gaussian lifetime fits and the two-step state-detection classifier.

mod detection;
mod husimi;
mod lifetime;
mod parity;

use thiserror::Error;

use crate::quantum::StateError;

pub use detection::{
    classify, confusion_matrix, simulate_detection, ConfusionMatrix, DetectionClass, DetectionLabel, DetectionRates,
};
pub use husimi::{coherent_state, husimi_grid, husimi_q, mollweide, symmetric_weight, HusimiGrid, HusimiPoint};
pub use lifetime::{dephased_fidelity, gaussian_lifetime_fit, LifetimeFit};
pub use parity::{bell_fidelity, fit_parity, parity_closed_form, parity_of, parity_scan, CoherenceFit, ParityScan};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalysisError {
    #[error("underdetermined scan: {samples} samples give design rank {rank} < 3")]
    Underdetermined { samples: usize, rank: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("fit failed: {0}")]
    FitFailed(String),
    #[error(transparent)]
    State(#[from] StateError),
}
