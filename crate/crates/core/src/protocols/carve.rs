//! One reflection pulse followed by polarization-resolved detection.
//!
//! Every Kraus operator of a reflected photon is diagonal in the atomic basis,
//! so the pulse acts on ρ as a Schur multiplier. For a branch pair (b, b′) a
//! single matched photon contributes the overlap of its output-mode
//! amplitudes; with Poisson photon number of mean μ, a set of per-photon
//! weights W turns into exp(μ(W − 1)). Detection records are then split by
//! which weights are kept:
//!
//! * all outcomes:            exp(μ(W_A + W_D + W_u − 1))
//! * no detected D photon:    exp(μ(W_A + W_u − 1))
//! * no detected photon:      exp(μ(W_u − 1))
//!
//! where W_u collects undetected, scattered and passively lost photons.
//! Dark counts and unmatched light are independent of the atoms.

use nalgebra::Matrix4;

use super::{HeraldOutcome, ProtocolError, PulseConfig};
use crate::cavity::ReflectionTable;
use crate::quantum::{Basis, TwoAtomState};

/// Per-photon overlap weights, split by what the detectors see.
struct PhotonWeights {
    detected_a: Matrix4<f64>,
    detected_d: Matrix4<f64>,
    unobserved: Matrix4<f64>,
}

impl PhotonWeights {
    fn new(table: &ReflectionTable, det_eff: f64) -> Self {
        let modes = Basis::ALL.map(|b| table.modes(b));
        let mut w =
            PhotonWeights { detected_a: Matrix4::zeros(), detected_d: Matrix4::zeros(), unobserved: Matrix4::zeros() };
        for i in 0..4 {
            for j in 0..4 {
                let (m, n) = (&modes[i], &modes[j]);
                let aa = m.a * n.a;
                let dd = m.d * n.d;
                w.detected_a[(i, j)] = det_eff * aa;
                w.detected_d[(i, j)] = det_eff * dd;
                w.unobserved[(i, j)] = (1.0 - det_eff) * (aa + dd)
                    + m.scatter[0] * n.scatter[0]
                    + m.scatter[1] * n.scatter[1]
                    + m.passive_r * n.passive_r
                    + m.passive_l * n.passive_l;
            }
        }
        w
    }
}

fn poisson_multiplier(mu: f64, w: &Matrix4<f64>) -> Matrix4<f64> {
    w.map(|x| (mu * (x - 1.0)).exp())
}

/// Unnormalized atomic branches of one pulse, partitioned by detector record.
/// Their traces sum to the input trace.
#[derive(Debug, Clone, PartialEq)]
pub struct CarveBranches {
    /// At least one D click (photon or dark count).
    pub herald: TwoAtomState,
    /// A clicks only.
    pub a_only: TwoAtomState,
    /// No click at all.
    pub silent: TwoAtomState,
    /// Herald probability contributed by each matched photon number k.
    pub branch_log: Vec<f64>,
}

pub fn carve_branches(
    state: &TwoAtomState,
    pulse: &PulseConfig,
    table: &ReflectionTable,
) -> Result<CarveBranches, ProtocolError> {
    pulse.validate()?;
    let mu = pulse.matched_mean();
    let dark_free = 1.0 - pulse.dark_prob;
    let w = PhotonWeights::new(table, pulse.det_eff);

    let no_d = w.detected_a + w.unobserved;
    let all = no_d + w.detected_d;
    let m_all = poisson_multiplier(mu, &all);
    let m_no_d = poisson_multiplier(mu, &no_d);
    let m_none = poisson_multiplier(mu, &w.unobserved);
    let silence = pulse.unmatched_silence();

    let herald = m_all - m_no_d * dark_free;
    let a_only = (m_no_d - m_none * silence) * dark_free;
    let silent = m_none * (silence * dark_free);

    Ok(CarveBranches {
        herald: state.schur(&herald),
        a_only: state.schur(&a_only),
        silent: state.schur(&silent),
        branch_log: herald_by_photon_number(state, mu, pulse.dark_prob, &all, &no_d),
    })
}

/// Σ_k Pois(k; μ) tr[(W^k − (1−d)(W − W_D)^k) ∘ ρ], term by term.
fn herald_by_photon_number(
    state: &TwoAtomState,
    mu: f64,
    dark_prob: f64,
    all: &Matrix4<f64>,
    no_d: &Matrix4<f64>,
) -> Vec<f64> {
    let diag = |m: &Matrix4<f64>| -> [f64; 4] { [0, 1, 2, 3].map(|i| m[(i, i)]) };
    let (w_all, w_no_d) = (diag(all), diag(no_d));
    let pops = Basis::ALL.map(|b| state.population(b));
    let mut log = Vec::new();
    let mut pois = (-mu).exp();
    let mut mass = 0.0;
    for k in 0..=400u32 {
        let term: f64 =
            (0..4).map(|i| pops[i] * (w_all[i].powi(k as i32) - (1.0 - dark_prob) * w_no_d[i].powi(k as i32))).sum();
        log.push(pois * term);
        mass += pois;
        if 1.0 - mass < 1e-15 || mu == 0.0 {
            break;
        }
        pois *= mu / f64::from(k + 1);
    }
    log
}

/// One reflection pulse, postselected on a D click.
pub fn carve_step(
    state: &TwoAtomState,
    pulse: &PulseConfig,
    table: &ReflectionTable,
) -> Result<HeraldOutcome, ProtocolError> {
    if !state.is_normalized() {
        return Err(crate::quantum::StateError::Unnormalized(state.trace_weight()).into());
    }
    let branches = carve_branches(state, pulse, table)?;
    let herald_prob = branches.herald.trace_weight();
    if herald_prob < 1e-15 {
        return Err(ProtocolError::NeverHeralds(herald_prob));
    }
    let click_prob = 1.0 - branches.silent.trace_weight();
    Ok(HeraldOutcome {
        state: branches.herald.renormalize()?,
        herald_prob,
        d_fraction: herald_prob / click_prob,
        click_prob,
        branch_log: branches.branch_log,
    })
}
