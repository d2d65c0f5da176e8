//! Trajectory sampling against the exact channel.

use std::f64::consts::PI;

use carving_core::cavity::{CavityParams, ReflectionTable};
use carving_core::protocols::{monte_carlo_run, MonteCarloConfig, PreparationSpec, ProtocolSetup, PulseConfig, Scheme};
use carving_core::quantum::{Basis, BellKind, RotationSpec};

fn agree(exact: f64, estimate: f64, stderr: f64) -> bool {
    (exact - estimate).abs() <= 3.0 * stderr + 1e-9
}

fn check(setup: ProtocolSetup, target: BellKind, trials: u64) {
    let exact = setup.run_exact().unwrap();
    let cfg = MonteCarloConfig { trials, seed: 2024, workers: None, target };
    let mc = monte_carlo_run(&setup, &cfg).unwrap();
    let f_exact = exact.state.bell_fidelity(target).unwrap();
    let (rate, rate_se) = (mc.success_rate.unwrap(), mc.success_stderr.unwrap());
    let (f_mc, f_se) = (mc.mean_fidelity.unwrap(), mc.fidelity_stderr.unwrap());
    assert!(agree(exact.success_prob, rate, rate_se), "success {} vs {rate} ± {rate_se}", exact.success_prob);
    assert!(
        agree(exact.efficiency, mc.efficiency, mc.efficiency_stderr),
        "efficiency {} vs {}",
        exact.efficiency,
        mc.efficiency
    );
    assert!(agree(f_exact, f_mc, f_se), "fidelity {f_exact} vs {f_mc} ± {f_se}");
}

#[test]
fn noisy_double_carving() {
    let setup = ProtocolSetup {
        scheme: Scheme::Double,
        prep: PreparationSpec::down_down(),
        pulse: PulseConfig { nbar: 1.0, ..PulseConfig::default() },
        table: CavityParams::default().reflection_table(),
        final_rotation: None,
    };
    check(setup, BellKind::PsiPlus, 40_000);
}

#[test]
fn noisy_single_carving_to_phi_minus() {
    let setup = ProtocolSetup {
        scheme: Scheme::Single { alpha: 0.23 * PI },
        prep: PreparationSpec::perfect(Basis::DownDown),
        pulse: PulseConfig { nbar: 1.2, dark_prob: 0.01, ..PulseConfig::default() },
        table: CavityParams::default().reflection_table(),
        final_rotation: Some(RotationSpec::y(PI / 2.0)),
    };
    check(setup, BellKind::PhiMinus, 40_000);
}

#[test]
fn ideal_antiparallel_double_carving() {
    let setup = ProtocolSetup {
        scheme: Scheme::Double,
        prep: PreparationSpec { kind: carving_core::protocols::PrepKind::AntiparallelMixture, fidelity: 1.0 },
        pulse: PulseConfig::ideal(0.7),
        table: ReflectionTable::ideal(),
        final_rotation: None,
    };
    check(setup, BellKind::PsiMinus, 20_000);
}

#[test]
fn records_are_reproducible() {
    let setup = ProtocolSetup {
        scheme: Scheme::Double,
        prep: PreparationSpec::down_down(),
        pulse: PulseConfig::default(),
        table: CavityParams::default().reflection_table(),
        final_rotation: None,
    };
    let run = |workers| {
        monte_carlo_run(&setup, &MonteCarloConfig { trials: 3000, seed: 5, workers, target: BellKind::PsiPlus })
            .unwrap()
    };
    let a = run(Some(1));
    assert_eq!(a, run(Some(4)));
    assert_eq!(a.records, run(None).records);
    let other =
        monte_carlo_run(&setup, &MonteCarloConfig { trials: 3000, seed: 6, workers: None, target: BellKind::PsiPlus })
            .unwrap();
    assert_ne!(a.records, other.records);
}
