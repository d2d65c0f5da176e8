use serde::Serialize;

use super::AnalysisError;
use crate::quantum::{Basis, Ket, TwoAtomState};

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LifetimeFit {
    /// 1/e time of the Gaussian (µs); `f64::INFINITY` when nothing decays.
    pub tau: f64,
    pub f0: f64,
    pub baseline: f64,
    /// Root-mean-square residual.
    pub residual: f64,
    pub iterations: usize,
}

/// Fidelity of `target` with ρ after every coherence has decayed:
/// Σ_b |⟨b|ψ⟩|² ρ_bb.
pub fn dephased_fidelity(state: &TwoAtomState, target: &Ket) -> f64 {
    let norm = target.norm_sqr();
    Basis::ALL.iter().map(|&b| target.amplitude(b).norm_sqr() / norm * state.population(b)).sum()
}

/// Least-squares fit of F(t) = F∞ + (F₀ − F∞) exp(−t²/τ²) with F∞ held at
/// `baseline`. Starts from a log-linear estimate and refines (F₀, 1/τ²) by
/// Levenberg–Marquardt.
pub fn gaussian_lifetime_fit(times: &[f64], fidelities: &[f64], baseline: f64) -> Result<LifetimeFit, AnalysisError> {
    if times.len() != fidelities.len() {
        return Err(AnalysisError::InvalidInput("times and fidelities differ in length".into()));
    }
    if times.len() < 2 {
        return Err(AnalysisError::InvalidInput(format!("need at least 2 points, got {}", times.len())));
    }
    if times.iter().chain(fidelities).chain([&baseline]).any(|x| !x.is_finite()) || times.iter().any(|&t| t < 0.0) {
        return Err(AnalysisError::InvalidInput("times must be finite and >= 0, fidelities finite".into()));
    }
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(AnalysisError::InvalidInput("times must be distinct".into()));
    }

    let t_max = sorted[sorted.len() - 1];
    // work in s = t / t_max so that u = t_max²/τ² is O(1)
    let s2: Vec<f64> = times.iter().map(|t| (t / t_max).powi(2)).collect();
    let y: Vec<f64> = fidelities.iter().map(|f| f - baseline).collect();
    let n = y.len() as f64;

    let spread = y.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - y.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = y.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    if spread <= 1e-12 * scale.max(1.0) {
        let f0 = baseline + y.iter().sum::<f64>() / n;
        return Ok(LifetimeFit { tau: f64::INFINITY, f0, baseline, residual: 0.0, iterations: 0 });
    }

    let (mut a, mut u) = initial_guess(&s2, &y);
    let cost = |a: f64, u: f64| -> f64 { s2.iter().zip(&y).map(|(s, v)| (a * (-u * s).exp() - v).powi(2)).sum() };
    let mut c = cost(a, u);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // normal equations JᵀJ δ = −Jᵀr for r = a e^{−us} − y
        let (mut jaa, mut jau, mut juu, mut ga, mut gu) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (s, v) in s2.iter().zip(&y) {
            let e = (-u * s).exp();
            let r = a * e - v;
            let da = e;
            let du = -a * s * e;
            jaa += da * da;
            jau += da * du;
            juu += du * du;
            ga += da * r;
            gu += du * r;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let m_aa = jaa * (1.0 + lambda);
            let m_uu = juu * (1.0 + lambda) + 1e-300;
            let det = m_aa * m_uu - jau * jau;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let da = -(m_uu * ga - jau * gu) / det;
            let du = -(m_aa * gu - jau * ga) / det;
            let (na, nu) = (a + da, (u + du).max(0.0));
            let nc = cost(na, nu);
            if nc <= c {
                let rel = (da.abs() / a.abs().max(1e-12)).max((nu - u).abs() / u.max(1e-12));
                let small_gain = c - nc <= 1e-15 * c.max(1e-300);
                a = na;
                u = nu;
                c = nc;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < 1e-12 || small_gain || c < 1e-30 {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step exists: stationary point
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(AnalysisError::FitFailed(format!("no convergence after {MAX_ITERATIONS} iterations")));
    }
    let tau = if u <= 0.0 { f64::INFINITY } else { t_max / u.sqrt() };
    Ok(LifetimeFit { tau, f0: baseline + a, baseline, residual: (c / n).sqrt(), iterations })
}

/// Straight-line fit of ln y against s² over the samples with y > 0.
fn initial_guess(s2: &[f64], y: &[f64]) -> (f64, f64) {
    let pts: Vec<(f64, f64)> = s2.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(s, v)| (*s, v.ln())).collect();
    let fallback = (y.iter().cloned().fold(f64::NEG_INFINITY, f64::max), 1.0);
    if pts.len() < 2 {
        return fallback;
    }
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let den = m * sxx - sx * sx;
    if den.abs() < 1e-300 {
        return fallback;
    }
    let slope = (m * sxy - sx * sy) / den;
    let icpt = (sy - slope * sx) / m;
    (icpt.exp(), (-slope).max(1e-6))
}
