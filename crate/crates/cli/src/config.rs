//! Flat `key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored; every other line must be a
//! known dotted key. Missing keys keep their defaults.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use carving_core::analysis::DetectionRates;
use carving_core::cavity::CavityParams;
use carving_core::protocols::{NoiseModel, PrepKind, PreparationSpec, PulseConfig};
use carving_core::quantum::Basis;
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_SEED: u64 = 0x5EED_CA57;
pub const DEFAULT_TRIALS: u64 = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for {key}: {message}")]
    Invalid { key: String, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub cavity: CavityParams,
    pub pulse: PulseConfig,
    pub prep: PreparationSpec,
    pub noise: NoiseModel,
    pub detect: DetectionRates,
    pub seed: u64,
    pub trials: u64,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            cavity: CavityParams::default(),
            pulse: PulseConfig::default(),
            prep: PreparationSpec::down_down(),
            noise: NoiseModel::default(),
            detect: DetectionRates::default(),
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            output: PathBuf::from("carve-out"),
        }
    }
}

const DETECT_CLASSES: [&str; 3] = ["down_down", "antiparallel", "up_up"];

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text =
        std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut prep_fidelity: Option<f64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |message: String| ConfigError::Parse { line: line_no, message };
        let (key, value) =
            line.split_once('=').ok_or_else(|| parse_err(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(parse_err(format!("missing value for `{key}`")));
        }
        let num = || value.parse::<f64>().map_err(|_| parse_err(format!("`{value}` is not a number")));
        let int = || value.parse::<u64>().map_err(|_| parse_err(format!("`{value}` is not a nonnegative integer")));
        match key {
            "cavity.g_2pi_mhz" => cfg.cavity.g = num()?,
            "cavity.kappa_2pi_mhz" => cfg.cavity.kappa = num()?,
            "cavity.kappa_out_2pi_mhz" => cfg.cavity.kappa_out = num()?,
            "cavity.gamma_2pi_mhz" => cfg.cavity.gamma = num()?,
            "pulse.nbar" => cfg.pulse.nbar = num()?,
            "pulse.dark_prob" => cfg.pulse.dark_prob = num()?,
            "pulse.det_eff" => cfg.pulse.det_eff = num()?,
            "pulse.mode_match" => cfg.pulse.mode_match = num()?,
            "prep.kind" => {
                cfg.prep = parse_prep(value).map_err(|m| ConfigError::Invalid { key: key.into(), message: m })?
            }
            "prep.fidelity" => prep_fidelity = Some(num()?),
            "noise.sigma_common_2pi_khz" => cfg.noise.sigma_common = num()?,
            "noise.sigma_diff_2pi_khz" => cfg.noise.sigma_diff = num()?,
            // Gaussian 1/e lifetimes of Φ± (common mode) and Ψ± (differential mode)
            "noise.lifetime_common_us" => cfg.noise.sigma_common = NoiseModel::sigma_for_lifetime(num()?),
            "noise.lifetime_diff_us" => cfg.noise.sigma_diff = NoiseModel::sigma_for_lifetime(num()?),
            "run.seed" => cfg.seed = int()?,
            "run.trials" => cfg.trials = int()?,
            "run.output" => cfg.output = PathBuf::from(value),
            "detect.transmission_threshold" => cfg.detect.transmission_threshold = small_int(int()?, key)?,
            "detect.fluorescence_threshold" => cfg.detect.fluorescence_threshold = small_int(int()?, key)?,
            other => {
                let slot = other
                    .strip_prefix("detect.transmission_")
                    .map(|c| (c, &mut cfg.detect.transmission))
                    .or_else(|| other.strip_prefix("detect.fluorescence_").map(|c| (c, &mut cfg.detect.fluorescence)));
                match slot.and_then(|(class, arr)| DETECT_CLASSES.iter().position(|c| *c == class).map(|i| (i, arr))) {
                    Some((i, arr)) => arr[i] = num()?,
                    None => return Err(parse_err(format!("unknown key `{other}`"))),
                }
            }
        }
    }
    if let Some(f) = prep_fidelity {
        cfg.prep.fidelity = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn small_int(v: u64, key: &str) -> Result<u32, ConfigError> {
    u32::try_from(v).map_err(|_| ConfigError::Invalid { key: key.into(), message: format!("{v} is too large") })
}

/// `down_down`, `antiparallel`, or `pure:<basis>` (e.g. `pure:ud`).
pub fn parse_prep(value: &str) -> Result<PreparationSpec, String> {
    match value {
        "down_down" => Ok(PreparationSpec::down_down()),
        "antiparallel" => Ok(PreparationSpec::antiparallel()),
        other => match other.strip_prefix("pure:") {
            Some(label) => Ok(PreparationSpec::perfect(label.parse::<Basis>()?)),
            None => Err(format!("unknown preparation `{other}` (down_down | antiparallel | pure:<uu|ud|du|dd>)")),
        },
    }
}

fn prep_name(p: &PreparationSpec) -> String {
    match p.kind {
        PrepKind::DownDown => "down_down".into(),
        PrepKind::AntiparallelMixture => "antiparallel".into(),
        PrepKind::PerfectPure(b) => format!("pure:{b}"),
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |key: &str, message: String| ConfigError::Invalid { key: key.into(), message };
        if let Err(carving_core::cavity::CavityError::Invalid { name, value, reason }) = self.cavity.validate() {
            let key = match name {
                "g" => "cavity.g_2pi_mhz",
                "kappa" => "cavity.kappa_2pi_mhz",
                "kappa_out" => "cavity.kappa_out_2pi_mhz",
                _ => "cavity.gamma_2pi_mhz",
            };
            return Err(invalid(key, format!("{value}: {reason}")));
        }
        if let Err(carving_core::protocols::ProtocolError::InvalidPulse { name, value, reason }) = self.pulse.validate()
        {
            return Err(invalid(&format!("pulse.{name}"), format!("{value}: {reason}")));
        }
        if !(0.0..=1.0).contains(&self.prep.fidelity) {
            return Err(invalid("prep.fidelity", format!("{} must lie in [0, 1]", self.prep.fidelity)));
        }
        for (key, v) in [
            ("noise.sigma_common_2pi_khz", self.noise.sigma_common),
            ("noise.sigma_diff_2pi_khz", self.noise.sigma_diff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(key, format!("{v} must be finite and >= 0")));
            }
        }
        for (window, means) in [("transmission", self.detect.transmission), ("fluorescence", self.detect.fluorescence)]
        {
            for (class, m) in DETECT_CLASSES.iter().zip(means) {
                if !(m.is_finite() && m >= 0.0) {
                    return Err(invalid(&format!("detect.{window}_{class}"), format!("{m} must be finite and >= 0")));
                }
            }
        }
        if self.trials == 0 {
            return Err(invalid("run.trials", "must be >= 1".into()));
        }
        Ok(())
    }

    /// Noiseless limits: perfect detectors and mode matching, no dark counts,
    /// perfect preparation. The cavity itself is replaced by the ideal
    /// reflection table where the commands build one.
    pub fn idealized(&self) -> RunConfig {
        let mut c = self.clone();
        c.pulse = PulseConfig::ideal(self.pulse.nbar);
        c.prep.fidelity = 1.0;
        c
    }

    /// Every key with its effective value, one per line, in a fixed order.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("cavity.g_2pi_mhz", self.cavity.g.to_string());
        put("cavity.kappa_2pi_mhz", self.cavity.kappa.to_string());
        put("cavity.kappa_out_2pi_mhz", self.cavity.kappa_out.to_string());
        put("cavity.gamma_2pi_mhz", self.cavity.gamma.to_string());
        put("pulse.nbar", self.pulse.nbar.to_string());
        put("pulse.dark_prob", self.pulse.dark_prob.to_string());
        put("pulse.det_eff", self.pulse.det_eff.to_string());
        put("pulse.mode_match", self.pulse.mode_match.to_string());
        put("prep.kind", prep_name(&self.prep));
        put("prep.fidelity", self.prep.fidelity.to_string());
        put("noise.sigma_common_2pi_khz", self.noise.sigma_common.to_string());
        put("noise.sigma_diff_2pi_khz", self.noise.sigma_diff.to_string());
        for (i, class) in DETECT_CLASSES.iter().enumerate() {
            put(&format!("detect.transmission_{class}"), self.detect.transmission[i].to_string());
        }
        for (i, class) in DETECT_CLASSES.iter().enumerate() {
            put(&format!("detect.fluorescence_{class}"), self.detect.fluorescence[i].to_string());
        }
        put("detect.transmission_threshold", self.detect.transmission_threshold.to_string());
        put("detect.fluorescence_threshold", self.detect.fluorescence_threshold.to_string());
        put("run.seed", self.seed.to_string());
        put("run.trials", self.trials.to_string());
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), hex encoded.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(parse_config("").unwrap(), RunConfig::default());
        assert_eq!(parse_config("# nothing\n\n   \n").unwrap(), RunConfig::default());
    }

    #[test]
    fn single_override() {
        let cfg = parse_config("pulse.nbar = 1.2\n").unwrap();
        assert_eq!(cfg.pulse.nbar, 1.2);
        let mut expect = RunConfig::default();
        expect.pulse.nbar = 1.2;
        assert_eq!(cfg, expect);
    }

    #[test]
    fn invariant_error_names_key() {
        let err = parse_config("cavity.kappa_out_2pi_mhz = 3.0").unwrap_err();
        match err {
            ConfigError::Invalid { key, .. } => assert_eq!(key, "cavity.kappa_out_2pi_mhz"),
            other => panic!("unexpected {other}"),
        }
        let err = parse_config("pulse.dark_prob = 1.5").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid { ref key, .. } if key == "pulse.dark_prob"));
    }

    #[test]
    fn parse_errors_carry_line() {
        let err = parse_config("pulse.nbar = 1\nbogus.key = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        let err = parse_config("\n\npulse.nbar 1\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 3, .. }));
        let err = parse_config("pulse.nbar = lots").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn prep_and_detect_keys() {
        let cfg = parse_config(
            "prep.kind = antiparallel\nprep.fidelity = 0.9\ndetect.fluorescence_up_up = 0.1\nrun.seed = 7 # trailing",
        )
        .unwrap();
        assert_eq!(cfg.prep.kind, PrepKind::AntiparallelMixture);
        assert_eq!(cfg.prep.fidelity, 0.9);
        assert_eq!(cfg.detect.fluorescence[2], 0.1);
        assert_eq!(cfg.seed, 7);
        let cfg = parse_config("prep.kind = pure:ud").unwrap();
        assert_eq!(cfg.prep.kind, PrepKind::PerfectPure(Basis::UpDown));
        assert!(parse_config("prep.kind = sideways").is_err());
    }

    #[test]
    fn hash_tracks_values() {
        let a = RunConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.pulse.nbar = 0.5;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
