use std::f64::consts::PI;
use std::path::PathBuf;

use carving_core::analysis::{
    bell_fidelity, confusion_matrix, dephased_fidelity, fit_parity, gaussian_lifetime_fit, husimi_grid, parity_scan,
    symmetric_weight, AnalysisError, CoherenceFit, DetectionClass,
};
use carving_core::cavity::ReflectionTable;
use carving_core::protocols::{
    ideal_single_carving_efficiency, ideal_single_carving_fidelity, monte_carlo_run, wait_evolution, MonteCarloConfig,
    MonteCarloSummary, NoiseModel, PrepKind, ProtocolError, ProtocolSetup, Scheme, StepSummary,
};
use carving_core::quantum::{Basis, BellKind, Populations, RotationSpec, TwoAtomState};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{load_config, parse_config, parse_prep, ConfigError, RunConfig};
use crate::output::{to_json, write_csv, write_json, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        match e {
            ProtocolError::InvalidPulse { .. } | ProtocolError::InvalidParameter { .. } => {
                CliError::Config(e.to_string())
            }
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

/// Accepts radians (`0.72`), multiples of π (`0.23pi`), or `pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t = s.trim();
    let value = match t.strip_suffix("pi") {
        Some("") => PI,
        Some(factor) => factor.trim().parse::<f64>().map(|f| f * PI).map_err(|_| format!("bad angle `{s}`"))?,
        None => t.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("bad angle `{s}`"))
    }
}

fn parse_bell(s: &str) -> Result<BellKind, String> {
    s.parse::<BellKind>().map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "carve", version, about = "Cavity carving of two-atom Bell states")]
pub struct Cli {
    /// Flat `key = value` config file
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Ideal cavity, perfect detectors and mode matching, no dark counts, perfect preparation
    #[arg(long, global = true)]
    pub ideal: bool,
    /// Worker threads for sampling (results do not depend on this)
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Initial state: down_down | antiparallel | pure:<uu|ud|du|dd>
    #[arg(long, global = true)]
    pub prep: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeArg {
    Double,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FinalRotation {
    None,
    /// R_x^{π/2}
    X,
    /// R_y^{π/2}
    Y,
}

impl FinalRotation {
    fn spec(self) -> Option<RotationSpec> {
        match self {
            FinalRotation::None => None,
            FinalRotation::X => Some(RotationSpec::x(PI / 2.0)),
            FinalRotation::Y => Some(RotationSpec::y(PI / 2.0)),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ProtocolArgs {
    #[arg(long, value_enum, default_value = "double")]
    pub scheme: SchemeArg,
    /// Initial rotation angle of the single-carving scheme
    #[arg(long, value_parser = parse_angle, default_value = "0.23pi")]
    pub alpha: f64,
    /// Global π/2 pulse after the last carving step
    #[arg(long = "final", value_enum, default_value = "none")]
    pub final_rotation: FinalRotation,
    /// Bell state to score against; chosen from the circuit when omitted
    #[arg(long, value_parser = parse_bell)]
    pub target: Option<BellKind>,
    /// Override pulse.nbar
    #[arg(long)]
    pub nbar: Option<f64>,
    /// Override pulse.dark_prob
    #[arg(long)]
    pub dark: Option<f64>,
    /// Book atomic scattering as passive loss (no which-atom information)
    #[arg(long)]
    pub no_scattering: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    Nbar,
    Alpha,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one carving protocol: exact channel plus Monte Carlo cross-check
    Protocol(ProtocolArgs),
    /// Fidelity and success versus n̄ or α
    Sweep {
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(long, value_enum)]
        variable: SweepVariable,
        #[arg(long, value_parser = parse_angle)]
        from: f64,
        #[arg(long, value_parser = parse_angle)]
        to: f64,
        #[arg(long, default_value_t = 21)]
        steps: usize,
    },
    /// Parity scan over the analysis phase and its coherence fit
    Parity {
        #[command(flatten)]
        proto: ProtocolArgs,
        /// Named state instead of a protocol output (psi_plus, phi_minus, dd, ...)
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 32)]
        phases: usize,
    },
    /// Husimi Q grid with Mollweide coordinates
    Husimi {
        #[command(flatten)]
        proto: ProtocolArgs,
        #[arg(long)]
        state: Option<String>,
        #[arg(long, default_value_t = 100)]
        n_theta: usize,
        #[arg(long, default_value_t = 200)]
        n_phi: usize,
    },
    /// Bell-state fidelity during free evolution and its Gaussian lifetime
    Lifetime {
        #[arg(long, value_parser = parse_bell, default_value = "psi_minus")]
        target: BellKind,
        /// Last wait time (µs)
        #[arg(long, default_value_t = 400.0)]
        t_max: f64,
        #[arg(long, default_value_t = 41)]
        points: usize,
    },
    /// Confusion matrix of the two-step state detection
    Detect {
        /// Config-format file with detect.* keys
        #[arg(long)]
        rates: Option<PathBuf>,
    },
}

/// Fully resolved run: the config after every command-line override.
pub struct Context {
    pub cfg: RunConfig,
    pub table: ReflectionTable,
    pub ideal: bool,
    pub scattering: bool,
    pub workers: Option<usize>,
    pub hash: String,
}

impl Context {
    fn build(cli: &Cli, proto: Option<&ProtocolArgs>) -> Result<Self, CliError> {
        let mut cfg = match &cli.config {
            Some(p) => load_config(p)?,
            None => RunConfig::default(),
        };
        if let Some(s) = cli.seed {
            cfg.seed = s;
        }
        if let Some(t) = cli.trials {
            cfg.trials = t;
        }
        if let Some(o) = &cli.out {
            cfg.output = o.clone();
        }
        if let Some(p) = &cli.prep {
            cfg.prep = parse_prep(p).map_err(|m| CliError::Config(format!("--prep: {m}")))?;
        }
        let mut scattering = true;
        if let Some(p) = proto {
            if let Some(n) = p.nbar {
                cfg.pulse.nbar = n;
            }
            if let Some(d) = p.dark {
                cfg.pulse.dark_prob = d;
            }
            scattering = !p.no_scattering;
        }
        if cli.ideal {
            cfg = cfg.idealized();
        }
        if cli.workers == Some(0) {
            return Err(CliError::Config("--workers must be >= 1".into()));
        }
        cfg.validate()?;
        let mut table = if cli.ideal { ReflectionTable::ideal() } else { cfg.cavity.reflection_table() };
        if !scattering {
            table = table.without_scattering();
        }
        let canon = format!("{}ideal = {}\nscattering = {scattering}\n", cfg.canonical(), cli.ideal);
        let hash = format!("{:x}", Sha256::digest(canon.as_bytes()));
        Ok(Context { cfg, table, ideal: cli.ideal, scattering, workers: cli.workers, hash })
    }

    fn setup(&self, proto: &ProtocolArgs) -> ProtocolSetup {
        let scheme = match proto.scheme {
            SchemeArg::Double => Scheme::Double,
            SchemeArg::Single => Scheme::Single { alpha: proto.alpha },
        };
        ProtocolSetup {
            scheme,
            prep: self.cfg.prep,
            pulse: self.cfg.pulse,
            table: self.table,
            final_rotation: proto.final_rotation.spec(),
        }
    }

    fn mc(&self, setup: &ProtocolSetup, target: BellKind, seed: u64) -> Result<MonteCarloSummary, CliError> {
        let cfg = MonteCarloConfig { trials: self.cfg.trials, seed, workers: self.workers, target };
        Ok(monte_carlo_run(setup, &cfg)?)
    }
}

/// Bell state the circuit ideally produces.
fn auto_target(setup: &ProtocolSetup, proto: &ProtocolArgs) -> BellKind {
    if let Some(t) = proto.target {
        return t;
    }
    let singlet = matches!(setup.prep.kind, PrepKind::AntiparallelMixture)
        || matches!(setup.prep.kind, PrepKind::PerfectPure(Basis::UpDown | Basis::DownUp));
    if singlet && setup.scheme == Scheme::Double {
        return BellKind::PsiMinus;
    }
    match proto.final_rotation {
        FinalRotation::None => BellKind::PsiPlus,
        FinalRotation::X => BellKind::PhiPlus,
        FinalRotation::Y => BellKind::PhiMinus,
    }
}

fn named_state(name: &str) -> Result<TwoAtomState, CliError> {
    if let Ok(kind) = name.parse::<BellKind>() {
        return Ok(TwoAtomState::bell(kind));
    }
    if name == "mixed" || name == "maximally_mixed" {
        return Ok(TwoAtomState::maximally_mixed());
    }
    name.parse::<Basis>()
        .map(TwoAtomState::basis)
        .map_err(|_| CliError::Config(format!("unknown state `{name}` (Bell name, basis label or `mixed`)")))
}

#[derive(Serialize)]
struct BellFidelities {
    psi_plus: f64,
    psi_minus: f64,
    phi_plus: f64,
    phi_minus: f64,
}

impl BellFidelities {
    fn of(state: &TwoAtomState) -> Result<Self, CliError> {
        let f = |k| state.bell_fidelity(k).map_err(|e| CliError::Runtime(e.to_string()));
        Ok(BellFidelities {
            psi_plus: f(BellKind::PsiPlus)?,
            psi_minus: f(BellKind::PsiMinus)?,
            phi_plus: f(BellKind::PhiPlus)?,
            phi_minus: f(BellKind::PhiMinus)?,
        })
    }
}

#[derive(Serialize)]
struct ExactReport {
    fidelities: BellFidelities,
    populations: Populations,
    success_prob: f64,
    efficiency: f64,
    steps: Vec<StepSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eta_ideal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    f_ideal: Option<f64>,
}

#[derive(Serialize)]
struct MonteCarloReport {
    seed: u64,
    #[serde(flatten)]
    summary: MonteCarloSummary,
}

#[derive(Serialize)]
struct ProtocolReport {
    command: &'static str,
    config_hash: String,
    scheme: SchemeArg,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    final_rotation: FinalRotation,
    target: &'static str,
    ideal: bool,
    scattering: bool,
    target_fidelity: f64,
    exact: ExactReport,
    monte_carlo: MonteCarloReport,
}

fn cmd_protocol(ctx: &Context, proto: &ProtocolArgs) -> Result<String, CliError> {
    let setup = ctx.setup(proto);
    let target = auto_target(&setup, proto);
    let exact = setup.run_exact()?;
    let mc = ctx.mc(&setup, target, ctx.cfg.seed)?;

    let mut table = Table::new(vec!["step", "herald_prob", "d_fraction", "click_prob"]);
    for (i, s) in exact.steps.iter().enumerate() {
        table.push(vec![(i + 1) as f64, s.herald_prob, s.d_fraction, s.click_prob]);
    }
    write_csv(&ctx.cfg.output, "protocol.csv", &table, "protocol", &ctx.hash)?;

    let single = match setup.scheme {
        Scheme::Single { alpha } => Some(alpha),
        Scheme::Double => None,
    };
    let report = ProtocolReport {
        command: "protocol",
        config_hash: ctx.hash.clone(),
        scheme: proto.scheme,
        alpha: single,
        final_rotation: proto.final_rotation,
        target: target.name(),
        ideal: ctx.ideal,
        scattering: ctx.scattering,
        target_fidelity: exact.state.bell_fidelity(target).map_err(|e| CliError::Runtime(e.to_string()))?,
        exact: ExactReport {
            fidelities: BellFidelities::of(&exact.state)?,
            populations: exact.state.populations().map_err(|e| CliError::Runtime(e.to_string()))?,
            success_prob: exact.success_prob,
            efficiency: exact.efficiency,
            steps: exact.steps.clone(),
            eta_ideal: single.map(ideal_single_carving_efficiency),
            f_ideal: single.map(ideal_single_carving_fidelity),
        },
        monte_carlo: MonteCarloReport { seed: ctx.cfg.seed, summary: mc },
    };
    write_json(&ctx.cfg.output, "protocol.json", &report)?;
    Ok(to_json(&report))
}

#[derive(Serialize)]
struct SweepReport {
    command: &'static str,
    config_hash: String,
    variable: &'static str,
    target: &'static str,
    points: usize,
    never_heralds: Vec<f64>,
    best_x: Option<f64>,
    best_fidelity: Option<f64>,
}

fn cmd_sweep(
    ctx: &Context,
    proto: &ProtocolArgs,
    variable: SweepVariable,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<String, CliError> {
    if steps < 2 {
        return Err(CliError::Config("--steps must be >= 2".into()));
    }
    if !(from >= 0.0 && to > from) {
        return Err(CliError::Config(format!("sweep range [{from}, {to}] must satisfy 0 <= from < to")));
    }
    let mut proto = proto.clone();
    if variable == SweepVariable::Alpha {
        proto.scheme = SchemeArg::Single;
    }
    let base = ctx.setup(&proto);
    let target = auto_target(&base, &proto);
    let mut table = Table::new(vec!["x", "fidelity_exact", "fidelity_mc", "mc_stderr", "success_prob"]);
    let mut never = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..steps {
        let x = from + (to - from) * i as f64 / (steps - 1) as f64;
        let mut setup = base;
        match variable {
            SweepVariable::Nbar => setup.pulse.nbar = x,
            SweepVariable::Alpha => setup.scheme = Scheme::Single { alpha: x },
        }
        match setup.run_exact() {
            Ok(exact) => {
                let f = exact.state.bell_fidelity(target).map_err(|e| CliError::Runtime(e.to_string()))?;
                let mc = ctx.mc(&setup, target, ctx.cfg.seed.wrapping_add(i as u64))?;
                table.push(vec![
                    x,
                    f,
                    mc.mean_fidelity.unwrap_or(f64::NAN),
                    mc.fidelity_stderr.unwrap_or(f64::NAN),
                    exact.success_prob,
                ]);
                if best.is_none_or(|(_, bf)| f > bf) {
                    best = Some((x, f));
                }
            }
            Err(ProtocolError::NeverHeralds(_)) => {
                eprintln!("carve: no herald possible at x = {x}; row left as nan");
                never.push(x);
                table.push(vec![x, f64::NAN, f64::NAN, f64::NAN, 0.0]);
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_csv(&ctx.cfg.output, "sweep.csv", &table, "sweep", &ctx.hash)?;
    let report = SweepReport {
        command: "sweep",
        config_hash: ctx.hash.clone(),
        variable: match variable {
            SweepVariable::Nbar => "nbar",
            SweepVariable::Alpha => "alpha",
        },
        target: target.name(),
        points: steps,
        never_heralds: never,
        best_x: best.map(|b| b.0),
        best_fidelity: best.map(|b| b.1),
    };
    write_json(&ctx.cfg.output, "sweep.json", &report)?;
    Ok(to_json(&report))
}

/// The state to analyse: a named state, or the protocol's exact output.
fn source_state(
    ctx: &Context,
    proto: &ProtocolArgs,
    state: Option<&str>,
) -> Result<(String, TwoAtomState, BellKind), CliError> {
    match state {
        Some(name) => {
            let rho = named_state(name)?;
            let target = proto.target.or_else(|| name.parse::<BellKind>().ok()).unwrap_or(BellKind::PsiPlus);
            Ok((name.to_string(), rho, target))
        }
        None => {
            let setup = ctx.setup(proto);
            let target = auto_target(&setup, proto);
            let label = match setup.scheme {
                Scheme::Double => "protocol:double".to_string(),
                Scheme::Single { alpha } => format!("protocol:single(alpha={alpha})"),
            };
            Ok((label, setup.run_exact()?.state, target))
        }
    }
}

#[derive(Serialize)]
struct ParityReport {
    command: &'static str,
    config_hash: String,
    source: String,
    target: &'static str,
    phases: usize,
    fit: CoherenceFit,
    offset: f64,
    amplitude: f64,
    populations: Populations,
    fidelity_reconstructed: f64,
    fidelity_direct: f64,
}

fn cmd_parity(ctx: &Context, proto: &ProtocolArgs, state: Option<&str>, phases: usize) -> Result<String, CliError> {
    if phases < 3 {
        return Err(CliError::Config("--phases must be >= 3".into()));
    }
    let (source, rho, target) = source_state(ctx, proto, state)?;
    let scan = parity_scan(&rho, phases)?;
    let fit = fit_parity(&scan)?;
    let mut table = Table::new(vec!["phi", "parity"]);
    for (phi, p) in scan.phases.iter().zip(&scan.parities) {
        table.push(vec![*phi, *p]);
    }
    write_csv(&ctx.cfg.output, "parity.csv", &table, "parity", &ctx.hash)?;
    let pops = rho.populations().map_err(|e| CliError::Runtime(e.to_string()))?;
    let report = ParityReport {
        command: "parity",
        config_hash: ctx.hash.clone(),
        source,
        target: target.name(),
        phases,
        fit,
        offset: fit.offset(),
        amplitude: fit.amplitude(),
        populations: pops,
        fidelity_reconstructed: bell_fidelity(&pops, &fit, target)?,
        fidelity_direct: rho.bell_fidelity(target).map_err(|e| CliError::Runtime(e.to_string()))?,
    };
    write_json(&ctx.cfg.output, "parity.json", &report)?;
    Ok(to_json(&report))
}

#[derive(Serialize)]
struct HusimiPeak {
    theta: f64,
    phi: f64,
    q: f64,
}

#[derive(Serialize)]
struct HusimiReport {
    command: &'static str,
    config_hash: String,
    source: String,
    n_theta: usize,
    n_phi: usize,
    integral: f64,
    symmetric_weight: f64,
    max: HusimiPeak,
}

fn cmd_husimi(
    ctx: &Context,
    proto: &ProtocolArgs,
    state: Option<&str>,
    n_theta: usize,
    n_phi: usize,
) -> Result<String, CliError> {
    if n_theta < 2 || n_phi < 2 {
        return Err(CliError::Config("resolution must be at least 2x2".into()));
    }
    let (source, rho, _) = source_state(ctx, proto, state)?;
    let grid = husimi_grid(&rho, n_theta, n_phi)?;
    let mut table = Table::new(vec!["theta", "phi", "q", "x", "y"]);
    for p in &grid.points {
        table.push(vec![p.theta, p.phi, p.q, p.x, p.y]);
    }
    write_csv(&ctx.cfg.output, "husimi.csv", &table, "husimi", &ctx.hash)?;
    let report = HusimiReport {
        command: "husimi",
        config_hash: ctx.hash.clone(),
        source,
        n_theta,
        n_phi,
        integral: grid.integral,
        symmetric_weight: symmetric_weight(&rho),
        max: HusimiPeak { theta: grid.max.theta, phi: grid.max.phi, q: grid.max.q },
    };
    write_json(&ctx.cfg.output, "husimi.json", &report)?;
    Ok(to_json(&report))
}

fn lifetime_value(tau: f64) -> Value {
    if tau.is_finite() {
        Value::from(tau)
    } else {
        Value::from("inf")
    }
}

#[derive(Serialize)]
struct LifetimeReport {
    command: &'static str,
    config_hash: String,
    target: &'static str,
    sigma_common_2pi_khz: f64,
    sigma_diff_2pi_khz: f64,
    tau_us: Value,
    analytic_tau_us: Value,
    f0: f64,
    baseline: f64,
    residual: f64,
}

fn cmd_lifetime(ctx: &Context, target: BellKind, t_max: f64, points: usize) -> Result<String, CliError> {
    if points < 2 {
        return Err(CliError::Config("--points must be >= 2".into()));
    }
    if !(t_max.is_finite() && t_max > 0.0) {
        return Err(CliError::Config("--t-max must be > 0".into()));
    }
    let noise = ctx.cfg.noise;
    let rho = TwoAtomState::bell(target);
    let ket = target.ket();
    let times: Vec<f64> = (0..points).map(|i| t_max * i as f64 / (points - 1) as f64).collect();
    let mut fids = Vec::with_capacity(points);
    let mut table = Table::new(vec!["t_us", "fidelity"]);
    for &t in &times {
        let f = wait_evolution(&rho, t, &noise)?.overlap(&ket);
        fids.push(f);
        table.push(vec![t, f]);
    }
    write_csv(&ctx.cfg.output, "lifetime.csv", &table, "lifetime", &ctx.hash)?;
    let fit = gaussian_lifetime_fit(&times, &fids, dephased_fidelity(&rho, &ket))?;
    let sigma = match target {
        BellKind::PsiPlus | BellKind::PsiMinus => noise.sigma_diff,
        BellKind::PhiPlus | BellKind::PhiMinus => noise.sigma_common,
    };
    let analytic = if sigma > 0.0 { NoiseModel::lifetime_for_sigma(sigma) } else { f64::INFINITY };
    let report = LifetimeReport {
        command: "lifetime",
        config_hash: ctx.hash.clone(),
        target: target.name(),
        sigma_common_2pi_khz: noise.sigma_common,
        sigma_diff_2pi_khz: noise.sigma_diff,
        tau_us: lifetime_value(fit.tau),
        analytic_tau_us: lifetime_value(analytic),
        f0: fit.f0,
        baseline: fit.baseline,
        residual: fit.residual,
    };
    write_json(&ctx.cfg.output, "lifetime.json", &report)?;
    Ok(to_json(&report))
}

#[derive(Serialize)]
struct DetectReport {
    command: &'static str,
    config_hash: String,
    trials: u64,
    seed: u64,
    classes: [&'static str; 3],
    columns: [&'static str; 4],
    probabilities: [[f64; 4]; 3],
    std_errors: [[f64; 4]; 3],
    diagonal: [f64; 3],
    inconsistent: [f64; 3],
}

fn cmd_detect(ctx: &Context, rates: Option<&PathBuf>) -> Result<String, CliError> {
    let rates = match rates {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            parse_config(&text)?.detect
        }
        None => ctx.cfg.detect,
    };
    let m = confusion_matrix(&rates, ctx.cfg.trials, ctx.cfg.seed)?;
    let names = DetectionClass::ALL.map(|c| c.name());
    let report = DetectReport {
        command: "detect",
        config_hash: ctx.hash.clone(),
        trials: m.trials,
        seed: ctx.cfg.seed,
        classes: names,
        columns: [names[0], names[1], names[2], "inconsistent"],
        probabilities: m.probabilities,
        std_errors: m.std_errors,
        diagonal: m.diagonal(),
        inconsistent: m.inconsistent(),
    };
    write_json(&ctx.cfg.output, "detect.json", &report)?;
    Ok(to_json(&report))
}

/// Runs the parsed command and returns what goes to stdout.
pub fn run(cli: &Cli) -> Result<String, CliError> {
    let proto = match &cli.command {
        Command::Protocol(p) => Some(p),
        Command::Sweep { proto, .. } | Command::Parity { proto, .. } | Command::Husimi { proto, .. } => Some(proto),
        Command::Lifetime { .. } | Command::Detect { .. } => None,
    };
    let ctx = Context::build(cli, proto)?;
    match &cli.command {
        Command::Protocol(p) => cmd_protocol(&ctx, p),
        Command::Sweep { proto, variable, from, to, steps } => cmd_sweep(&ctx, proto, *variable, *from, *to, *steps),
        Command::Parity { proto, state, phases } => cmd_parity(&ctx, proto, state.as_deref(), *phases),
        Command::Husimi { proto, state, n_theta, n_phi } => cmd_husimi(&ctx, proto, state.as_deref(), *n_theta, *n_phi),
        Command::Lifetime { target, t_max, points } => cmd_lifetime(&ctx, *target, *t_max, *points),
        Command::Detect { rates } => cmd_detect(&ctx, rates.as_ref()),
    }
}
