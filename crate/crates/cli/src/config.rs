//! Flat `key = value` run configuration.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated. Unknown or repeated keys are rejected.

use std::fmt::Write as _;

use phonon_source::dynamics::SweepSpec;
use phonon_source::experiment::{DecayModel, PreparationPoint, PreparationSetup};
use phonon_source::model::{derive, Bath, DerivedParams, PhysicalParams};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub g13: f64,
    pub n_centers: u64,
    pub omega_d: f64,
    pub g24_tilde: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub gamma4: f64,
    pub omega_m: f64,
    pub q_factor: f64,
    /// Ω̃/g.
    pub drive_over_g: f64,
    pub n_th: f64,
    /// When set, the bath occupation follows from this temperature and
    /// `n_th` is ignored.
    pub temperature_k: Option<f64>,
    pub cutoff: usize,
    /// Window length in units of 1/(2π g).
    pub t_max: f64,
    pub samples: usize,
    /// Reserved; every run is deterministic.
    pub seed: u64,
    pub include_phonon_loss: bool,
    pub n_th_sweep: Vec<f64>,
    pub drive_sweep: Vec<f64>,
    /// Ramp rate v in units of g̃₁₃.
    pub sweep_rate_over_g13: f64,
    pub sweep_exponent: f64,
    pub sweep_samples: usize,
    pub phonon_damping: bool,
    /// Delay between the g² minimum and the start of the ramp.
    pub dwell_ms: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = PhysicalParams::default();
        Self {
            g13: p.g13,
            n_centers: p.n_centers,
            omega_d: p.omega_d,
            g24_tilde: p.g24_tilde,
            epsilon: p.epsilon,
            delta: p.delta,
            gamma4: p.gamma4,
            omega_m: p.omega_m,
            q_factor: p.q_factor,
            drive_over_g: 0.2,
            n_th: 0.1,
            temperature_k: None,
            cutoff: p.cutoff,
            t_max: 20.0,
            samples: 400,
            seed: 0,
            include_phonon_loss: false,
            n_th_sweep: vec![0.1, 0.3, 0.5],
            drive_sweep: vec![0.125, 0.2, 0.5],
            sweep_rate_over_g13: 0.2,
            sweep_exponent: 5.0,
            sweep_samples: 200,
            phonon_damping: false,
            dwell_ms: 0.0,
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: [&str; 24] = [
    "g13",
    "n_centers",
    "omega_d",
    "g24_tilde",
    "epsilon",
    "delta",
    "gamma4",
    "omega_m",
    "q_factor",
    "drive_over_g",
    "n_th",
    "temperature_k",
    "cutoff",
    "t_max",
    "samples",
    "seed",
    "include_phonon_loss",
    "n_th_sweep",
    "drive_sweep",
    "sweep_rate_over_g13",
    "sweep_exponent",
    "sweep_samples",
    "phonon_damping",
    "dwell_ms",
];

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => err(format!("{key}: expected a finite number, got {v:?}")),
    }
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, ConfigError> {
    v.parse()
        .or_else(|_| err(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => err(format!("{key}: expected true or false, got {v:?}")),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> = v
        .split(',')
        .map(|s| parse_f64(key, s.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return err(format!("{key}: empty list"));
    }
    Ok(items)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let v = value.trim();
        match key {
            "g13" => self.g13 = parse_f64(key, v)?,
            "n_centers" => self.n_centers = parse_int(key, v)?,
            "omega_d" => self.omega_d = parse_f64(key, v)?,
            "g24_tilde" => self.g24_tilde = parse_f64(key, v)?,
            "epsilon" => self.epsilon = parse_f64(key, v)?,
            "delta" => self.delta = parse_f64(key, v)?,
            "gamma4" => self.gamma4 = parse_f64(key, v)?,
            "omega_m" => self.omega_m = parse_f64(key, v)?,
            "q_factor" => self.q_factor = parse_f64(key, v)?,
            "drive_over_g" => self.drive_over_g = parse_f64(key, v)?,
            "n_th" => self.n_th = parse_f64(key, v)?,
            "temperature_k" => {
                self.temperature_k = match v {
                    "none" => None,
                    _ => Some(parse_f64(key, v)?),
                }
            }
            "cutoff" => self.cutoff = parse_int(key, v)?,
            "t_max" => self.t_max = parse_f64(key, v)?,
            "samples" => self.samples = parse_int(key, v)?,
            "seed" => self.seed = parse_int(key, v)?,
            "include_phonon_loss" => self.include_phonon_loss = parse_bool(key, v)?,
            "n_th_sweep" => self.n_th_sweep = parse_list(key, v)?,
            "drive_sweep" => self.drive_sweep = parse_list(key, v)?,
            "sweep_rate_over_g13" => self.sweep_rate_over_g13 = parse_f64(key, v)?,
            "sweep_exponent" => self.sweep_exponent = parse_f64(key, v)?,
            "sweep_samples" => self.sweep_samples = parse_int(key, v)?,
            "phonon_damping" => self.phonon_damping = parse_bool(key, v)?,
            "dwell_ms" => self.dwell_ms = parse_f64(key, v)?,
            _ => return err(format!("unknown key {key:?}")),
        }
        Ok(())
    }

    /// Parses a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("line {}: expected key = value, got {raw:?}", n + 1));
            };
            let k = k.trim();
            if !seen.insert(k.to_owned()) {
                return err(format!("line {}: key {k:?} given twice", n + 1));
            }
            cfg.set(k, v).map_err(|e| ConfigError(format!("line {}: {}", n + 1, e.0)))?;
        }
        Ok(cfg)
    }

    /// Applies a `KEY=VALUE` override.
    pub fn apply_override(&mut self, kv: &str) -> Result<(), ConfigError> {
        let Some((k, v)) = kv.split_once('=') else {
            return err(format!("--set expects KEY=VALUE, got {kv:?}"));
        };
        self.set(k.trim(), v)
    }

    fn value(&self, key: &str) -> String {
        match key {
            "g13" => self.g13.to_string(),
            "n_centers" => self.n_centers.to_string(),
            "omega_d" => self.omega_d.to_string(),
            "g24_tilde" => self.g24_tilde.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "delta" => self.delta.to_string(),
            "gamma4" => self.gamma4.to_string(),
            "omega_m" => self.omega_m.to_string(),
            "q_factor" => self.q_factor.to_string(),
            "drive_over_g" => self.drive_over_g.to_string(),
            "n_th" => self.n_th.to_string(),
            "temperature_k" => self.temperature_k.map_or_else(|| "none".into(), |t| t.to_string()),
            "cutoff" => self.cutoff.to_string(),
            "t_max" => self.t_max.to_string(),
            "samples" => self.samples.to_string(),
            "seed" => self.seed.to_string(),
            "include_phonon_loss" => self.include_phonon_loss.to_string(),
            "n_th_sweep" => join(&self.n_th_sweep),
            "drive_sweep" => join(&self.drive_sweep),
            "sweep_rate_over_g13" => self.sweep_rate_over_g13.to_string(),
            "sweep_exponent" => self.sweep_exponent.to_string(),
            "sweep_samples" => self.sweep_samples.to_string(),
            "phonon_damping" => self.phonon_damping.to_string(),
            "dwell_ms" => self.dwell_ms.to_string(),
            _ => unreachable!("not a config key: {key}"),
        }
    }

    /// Canonical text: every key once, in [`KEYS`] order.
    pub fn emit(&self) -> String {
        let mut out = String::new();
        for k in KEYS {
            let _ = writeln!(out, "{k} = {}", self.value(k));
        }
        out
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.emit().as_bytes()))
    }

    pub fn physical(&self) -> PhysicalParams {
        PhysicalParams {
            g13: self.g13,
            n_centers: self.n_centers,
            omega_d: self.omega_d,
            g24_tilde: self.g24_tilde,
            epsilon: self.epsilon,
            delta: self.delta,
            gamma4: self.gamma4,
            omega_m: self.omega_m,
            q_factor: self.q_factor,
            omega_drive: 0.0,
            bath: match self.temperature_k {
                Some(t) => Bath::Temperature(t),
                None => Bath::Occupation(self.n_th),
            },
            cutoff: self.cutoff,
        }
        .with_drive_over_g(self.drive_over_g)
    }

    pub fn derived(&self) -> DerivedParams {
        derive(&self.physical())
    }

    /// Checks everything that would otherwise fail deep inside a run.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.physical()
            .validate()
            .map_err(|e| ConfigError(e.to_string()))?;
        if !(self.t_max > 0.0) {
            return err(format!("t_max must be positive, got {}", self.t_max));
        }
        if self.samples < 2 {
            return err(format!("samples must be at least 2, got {}", self.samples));
        }
        if self.sweep_samples == 0 || !(self.sweep_rate_over_g13 > 0.0) || !(self.sweep_exponent > 0.0) {
            return err("sweep_samples, sweep_rate_over_g13 and sweep_exponent must be positive");
        }
        if self.n_th_sweep.iter().any(|&n| n < 0.0) || self.n_th < 0.0 {
            return err("bath occupations must be non-negative");
        }
        if self.drive_sweep.iter().any(|&r| !(r > 0.0)) {
            return err("drive_sweep entries must be positive");
        }
        if self.dwell_ms < 0.0 {
            return err(format!("dwell_ms must be non-negative, got {}", self.dwell_ms));
        }
        Ok(())
    }

    pub fn preparation(&self) -> PreparationSetup {
        PreparationSetup {
            params: self.physical(),
            decay: if self.include_phonon_loss {
                DecayModel::Total
            } else {
                DecayModel::Nonlinear
            },
            t_max_over_g: self.t_max,
            samples: self.samples,
            ..PreparationSetup::default()
        }
    }

    /// Bath occupation of the dark polariton, from `temperature_k` when set.
    pub fn bath_occupation(&self) -> Result<f64, ConfigError> {
        let p = self.physical();
        p.n_th(&derive(&p)).map_err(|e| ConfigError(e.to_string()))
    }

    /// The single point described by the scalar keys.
    pub fn point(&self) -> Result<PreparationPoint, ConfigError> {
        Ok(PreparationPoint {
            n_th: self.bath_occupation()?,
            drive_over_g: self.drive_over_g,
        })
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        let d = self.derived();
        SweepSpec {
            rate_per_ms: self.sweep_rate_over_g13 * d.g13_tilde,
            exponent: self.sweep_exponent,
            samples: self.sweep_samples,
            phonon_damping: self.phonon_damping,
        }
    }
}
