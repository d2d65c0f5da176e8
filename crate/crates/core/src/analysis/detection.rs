//! Two-step state detection: a transmission window that lights up only for
//! ↓↓, then a π pulse and a fluorescence window that stays dark only for the
//! (originally) ↑↑ state.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionClass {
    DownDown,
    Antiparallel,
    UpUp,
}

impl DetectionClass {
    pub const ALL: [DetectionClass; 3] = [DetectionClass::DownDown, DetectionClass::Antiparallel, DetectionClass::UpUp];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            DetectionClass::DownDown => "down_down",
            DetectionClass::Antiparallel => "antiparallel",
            DetectionClass::UpUp => "up_up",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetectionLabel {
    Class(DetectionClass),
    /// Bright in transmission yet dark in fluorescence.
    Inconsistent,
}

impl DetectionLabel {
    /// Column in the confusion matrix: the three classes, then inconsistent.
    pub fn column(self) -> usize {
        match self {
            DetectionLabel::Class(c) => c.index(),
            DetectionLabel::Inconsistent => 3,
        }
    }
}

/// Mean photon counts per true class, indexed like [`DetectionClass::ALL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionRates {
    pub transmission: [f64; 3],
    pub fluorescence: [f64; 3],
    /// More than this many transmission counts means ↓↓.
    pub transmission_threshold: u32,
    /// At most this many fluorescence counts means ↑↑.
    pub fluorescence_threshold: u32,
}

impl Default for DetectionRates {
    fn default() -> Self {
        DetectionRates {
            transmission: [9.0, 0.5, 0.3],
            fluorescence: [8.0, 3.0, 0.03],
            transmission_threshold: 3,
            fluorescence_threshold: 0,
        }
    }
}

impl DetectionRates {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        for (window, means) in [("transmission", &self.transmission), ("fluorescence", &self.fluorescence)] {
            for (c, m) in DetectionClass::ALL.iter().zip(means) {
                if !(m.is_finite() && *m >= 0.0) {
                    return Err(AnalysisError::InvalidInput(format!(
                        "{window} mean for {} must be finite and >= 0, got {m}",
                        c.name()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn classify(t_count: u64, f_count: u64, rates: &DetectionRates) -> DetectionLabel {
    let bright = t_count > u64::from(rates.transmission_threshold);
    let dark = f_count <= u64::from(rates.fluorescence_threshold);
    match (bright, dark) {
        (true, true) => DetectionLabel::Inconsistent,
        (true, false) => DetectionLabel::Class(DetectionClass::DownDown),
        (false, true) => DetectionLabel::Class(DetectionClass::UpUp),
        (false, false) => DetectionLabel::Class(DetectionClass::Antiparallel),
    }
}

fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("validated mean").sample(rng) as u64
}

/// (transmission count, fluorescence count) for one run of true class `class`.
pub fn simulate_detection<R: Rng>(class: DetectionClass, rates: &DetectionRates, rng: &mut R) -> (u64, u64) {
    let i = class.index();
    let t = poisson(rates.transmission[i], rng);
    let f = poisson(rates.fluorescence[i], rng);
    (t, f)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub trials: u64,
    /// rows: true class; columns: down_down, antiparallel, up_up, inconsistent
    pub probabilities: [[f64; 4]; 3],
    pub std_errors: [[f64; 4]; 3],
}

impl ConfusionMatrix {
    pub fn diagonal(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.probabilities[i][i])
    }

    pub fn inconsistent(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.probabilities[i][3])
    }
}

/// Monte Carlo estimate with `trials` runs per true class. Run `i` of class
/// row `r` uses ChaCha stream `r·trials + i` of `seed`.
pub fn confusion_matrix(rates: &DetectionRates, trials: u64, seed: u64) -> Result<ConfusionMatrix, AnalysisError> {
    rates.validate()?;
    if trials == 0 {
        return Err(AnalysisError::InvalidInput("trials must be >= 1".into()));
    }
    let mut probabilities = [[0.0; 4]; 3];
    let mut std_errors = [[0.0; 4]; 3];
    for class in DetectionClass::ALL {
        let row = class.index();
        let counts = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(row as u64 * trials + i);
                let (t, f) = simulate_detection(class, rates, &mut rng);
                let mut c = [0u64; 4];
                c[classify(t, f, rates).column()] = 1;
                c
            })
            .reduce(|| [0; 4], |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]);
        for (col, n) in counts.iter().enumerate() {
            let p = *n as f64 / trials as f64;
            probabilities[row][col] = p;
            std_errors[row][col] = (p * (1.0 - p) / trials as f64).sqrt();
        }
    }
    Ok(ConfusionMatrix { trials, probabilities, std_errors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_tree() {
        let r = DetectionRates::default();
        assert_eq!(classify(5, 2, &r), DetectionLabel::Class(DetectionClass::DownDown));
        assert_eq!(classify(2, 0, &r), DetectionLabel::Class(DetectionClass::UpUp));
        assert_eq!(classify(2, 4, &r), DetectionLabel::Class(DetectionClass::Antiparallel));
        assert_eq!(classify(4, 0, &r), DetectionLabel::Inconsistent);
        assert_eq!(classify(3, 1, &r), DetectionLabel::Class(DetectionClass::Antiparallel));
    }

    #[test]
    fn rows_sum_to_one() {
        let m = confusion_matrix(&DetectionRates::default(), 5000, 3).unwrap();
        for row in m.probabilities {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_trial_rows_are_unit_vectors() {
        let m = confusion_matrix(&DetectionRates::default(), 1, 9).unwrap();
        for row in m.probabilities {
            assert_eq!(row.iter().filter(|p| **p == 1.0).count(), 1);
        }
    }

    #[test]
    fn dark_fluorescence_falls_to_up_up() {
        let r = DetectionRates { fluorescence: [0.0; 3], transmission: [0.0, 0.0, 0.0], ..DetectionRates::default() };
        let m = confusion_matrix(&r, 200, 1).unwrap();
        for row in m.probabilities {
            assert_eq!(row[DetectionClass::UpUp.index()], 1.0);
        }
    }

    #[test]
    fn negative_rate_rejected() {
        let r = DetectionRates { transmission: [-1.0, 0.0, 0.0], ..DetectionRates::default() };
        assert!(confusion_matrix(&r, 10, 1).is_err());
    }
}
