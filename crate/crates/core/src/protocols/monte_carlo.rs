//! Trajectory sampling of the carving protocols.
//!
//! Each trial is one attempt: a basis state drawn from the preparation, then
//! every reflected photon's fate sampled from the same per-photon Kraus
//! operators the exact channel uses. A trial stops at the first pulse without
//! a D click. Trial `i` draws from the ChaCha stream `(seed, i)` only, so the
//! records do not depend on how trials are scheduled across threads.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use super::{ProtocolError, ProtocolSetup, Stage};
use crate::quantum::{Basis, BellKind, Ket};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub trials: u64,
    pub seed: u64,
    /// Thread count; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// State against which successful trajectories are scored.
    pub target: BellKind,
}

/// Detector record of one pulse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Click {
    None,
    AOnly,
    D,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub initial: Basis,
    pub clicks: Vec<Click>,
    /// Matched photons sent in, summed over pulses.
    pub photons: u64,
    /// Fidelity with the target; present only for successful trials.
    pub fidelity: Option<f64>,
}

impl TrialRecord {
    pub fn success(&self) -> bool {
        self.fidelity.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloSummary {
    pub trials: u64,
    pub successes: u64,
    /// Pulses that produced any click, per carving step.
    pub step_clicks: Vec<u64>,
    /// Pulses that produced a D click, per carving step.
    pub step_heralds: Vec<u64>,
    /// Π_k heralds_k / clicks_k; estimates the exact `success_prob`.
    pub success_rate: Option<f64>,
    pub success_stderr: Option<f64>,
    /// successes / trials; estimates the exact `efficiency`.
    pub efficiency: f64,
    pub efficiency_stderr: f64,
    pub mean_fidelity: Option<f64>,
    /// Binomial bound √(F(1−F)/n) on the standard error of `mean_fidelity`.
    pub fidelity_stderr: Option<f64>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Per-photon Kraus amplitudes, one row per outcome, indexed by basis state.
/// Outcomes: detected A, detected D, then everything unobserved.
struct PhotonKraus {
    amps: [[f64; 4]; 8],
}

impl PhotonKraus {
    fn new(setup: &ProtocolSetup) -> Self {
        let eta = setup.pulse.det_eff;
        let (se, su) = (eta.sqrt(), (1.0 - eta).sqrt());
        let mut amps = [[0.0; 4]; 8];
        for b in Basis::ALL {
            let m = setup.table.modes(b);
            let col = [se * m.a, se * m.d, su * m.a, su * m.d, m.scatter[0], m.scatter[1], m.passive_r, m.passive_l];
            for (row, v) in amps.iter_mut().zip(col) {
                row[b.index()] = v;
            }
        }
        PhotonKraus { amps }
    }
}

enum CompiledStage {
    Rotate(Box<Matrix4<Complex64>>),
    Carve,
}

struct Sampler<'a> {
    setup: &'a ProtocolSetup,
    stages: Vec<CompiledStage>,
    kraus: PhotonKraus,
    prep_weights: [f64; 4],
    poisson: Option<Poisson<f64>>,
    silence: f64,
    target: Ket,
}

impl<'a> Sampler<'a> {
    fn new(setup: &'a ProtocolSetup, target: BellKind) -> Result<Self, ProtocolError> {
        setup.validate()?;
        let stages = setup
            .stages()
            .into_iter()
            .map(|s| match s {
                Stage::Rotate(r) => CompiledStage::Rotate(Box::new(r.two_atom_unitary())),
                Stage::Carve => CompiledStage::Carve,
            })
            .collect();
        let mu = setup.pulse.matched_mean();
        let poisson = if mu > 0.0 {
            Some(Poisson::new(mu).map_err(|_| ProtocolError::InvalidPulse {
                name: "nbar",
                value: setup.pulse.nbar,
                reason: "not a valid Poisson mean",
            })?)
        } else {
            None
        };
        Ok(Sampler {
            setup,
            stages,
            kraus: PhotonKraus::new(setup),
            prep_weights: setup.prep.weights(),
            poisson,
            silence: setup.pulse.unmatched_silence(),
            target: target.ket(),
        })
    }

    fn run(&self, seed: u64, trial: u64) -> TrialRecord {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        let initial = Basis::from_index(pick(&self.prep_weights, rng.random::<f64>()));
        let mut psi = Ket::basis(initial).0;
        let mut clicks = Vec::new();
        let mut photons = 0;
        for stage in &self.stages {
            match stage {
                CompiledStage::Rotate(u) => psi = **u * psi,
                CompiledStage::Carve => {
                    let (click, k) = self.pulse(&mut psi, &mut rng);
                    clicks.push(click);
                    photons += k;
                    if click != Click::D {
                        return TrialRecord { trial, initial, clicks, photons, fidelity: None };
                    }
                }
            }
        }
        let fidelity = self.target.0.dotc(&psi).norm_sqr();
        TrialRecord { trial, initial, clicks, photons, fidelity: Some(fidelity) }
    }

    fn pulse(&self, psi: &mut Vector4<Complex64>, rng: &mut ChaCha8Rng) -> (Click, u64) {
        let k = self.poisson.as_ref().map_or(0, |p| p.sample(rng) as u64);
        let (mut saw_a, mut saw_d) = (false, false);
        for _ in 0..k {
            let pops = [0, 1, 2, 3].map(|i| psi[i].norm_sqr());
            let probs = self.kraus.amps.map(|row| (0..4).map(|i| pops[i] * row[i] * row[i]).sum::<f64>());
            let o = pick(&probs, rng.random::<f64>());
            let row = &self.kraus.amps[o];
            for i in 0..4 {
                psi[i] *= row[i];
            }
            let norm = psi.norm();
            *psi /= Complex64::new(norm, 0.0);
            saw_a |= o == 0;
            saw_d |= o == 1;
        }
        saw_a |= !rng.random_bool(self.silence);
        saw_d |= rng.random_bool(self.setup.pulse.dark_prob);
        let click = if saw_d {
            Click::D
        } else if saw_a {
            Click::AOnly
        } else {
            Click::None
        };
        (click, k)
    }
}

/// Index drawn from unnormalized weights with a uniform variate `u` ∈ [0, 1).
fn pick(weights: &[f64], u: f64) -> usize {
    let total: f64 = weights.iter().sum();
    let mut acc = 0.0;
    let target = u * total;
    let mut last = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w <= 0.0 {
            continue;
        }
        acc += w;
        last = i;
        if target < acc {
            return i;
        }
    }
    last
}

pub fn monte_carlo_run(setup: &ProtocolSetup, cfg: &MonteCarloConfig) -> Result<MonteCarloSummary, ProtocolError> {
    if cfg.trials == 0 {
        return Err(ProtocolError::InvalidParameter { name: "trials", value: 0.0, reason: "must be >= 1" });
    }
    let sampler = Sampler::new(setup, cfg.target)?;
    let seed = cfg.seed;
    let sample = || -> Vec<TrialRecord> { (0..cfg.trials).into_par_iter().map(|t| sampler.run(seed, t)).collect() };
    let records = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| ProtocolError::ThreadPool(e.to_string()))?
            .install(sample),
        None => sample(),
    };
    Ok(summarize(records, sampler.stages.iter().filter(|s| matches!(s, CompiledStage::Carve)).count()))
}

fn summarize(records: Vec<TrialRecord>, carve_steps: usize) -> MonteCarloSummary {
    let trials = records.len() as u64;
    let mut step_clicks = vec![0u64; carve_steps];
    let mut step_heralds = vec![0u64; carve_steps];
    let mut fid_sum = 0.0;
    let mut successes = 0u64;
    for r in &records {
        for (k, c) in r.clicks.iter().enumerate() {
            if *c != Click::None {
                step_clicks[k] += 1;
            }
            if *c == Click::D {
                step_heralds[k] += 1;
            }
        }
        if let Some(f) = r.fidelity {
            successes += 1;
            fid_sum += f;
        }
    }

    let (mut rate, mut rel_var, mut defined) = (1.0, 0.0, true);
    for (&h, &c) in step_heralds.iter().zip(&step_clicks) {
        if c == 0 {
            defined = false;
            break;
        }
        let p = h as f64 / c as f64;
        rate *= p;
        if p > 0.0 {
            rel_var += (1.0 - p) / (p * c as f64);
        }
    }
    let efficiency = successes as f64 / trials as f64;
    let mean_fidelity = (successes > 0).then(|| fid_sum / successes as f64);
    MonteCarloSummary {
        trials,
        successes,
        step_clicks,
        step_heralds,
        success_rate: defined.then_some(rate),
        success_stderr: defined.then(|| rate * rel_var.sqrt()),
        efficiency,
        efficiency_stderr: (efficiency * (1.0 - efficiency) / trials as f64).sqrt(),
        mean_fidelity,
        fidelity_stderr: mean_fidelity.map(|f| (f * (1.0 - f)).max(0.0).sqrt() / (successes as f64).sqrt()),
        records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cavity::ReflectionTable;
    use crate::protocols::{PreparationSpec, PulseConfig, Scheme};

    fn ideal_double() -> ProtocolSetup {
        ProtocolSetup {
            scheme: Scheme::Double,
            prep: PreparationSpec::perfect(Basis::DownDown),
            pulse: PulseConfig::ideal(0.8),
            table: ReflectionTable::ideal(),
            final_rotation: None,
        }
    }

    fn cfg(trials: u64, workers: Option<usize>) -> MonteCarloConfig {
        MonteCarloConfig { trials, seed: 17, workers, target: BellKind::PsiPlus }
    }

    #[test]
    fn pick_respects_weights() {
        assert_eq!(pick(&[0.0, 1.0, 0.0], 0.0), 1);
        assert_eq!(pick(&[0.5, 0.5], 0.49), 0);
        assert_eq!(pick(&[0.5, 0.5], 0.51), 1);
        assert_eq!(pick(&[0.5, 0.5, 0.0], 0.999_999_999_999), 1);
    }

    #[test]
    fn same_seed_same_records_across_workers() {
        let setup = ideal_double();
        let a = monte_carlo_run(&setup, &cfg(2000, Some(1))).unwrap();
        let b = monte_carlo_run(&setup, &cfg(2000, Some(3))).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records, b.records);
    }

    #[test]
    fn ideal_successes_are_perfect() {
        let s = monte_carlo_run(&ideal_double(), &cfg(5000, None)).unwrap();
        assert!(s.successes > 0);
        for r in s.records.iter().filter(|r| r.success()) {
            assert!((r.fidelity.unwrap() - 1.0).abs() < 1e-12);
        }
        let rate = s.success_rate.unwrap();
        assert!((rate - 0.5).abs() < 4.0 * s.success_stderr.unwrap(), "rate {rate}");
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(monte_carlo_run(&ideal_double(), &cfg(0, None)).is_err());
    }
}
