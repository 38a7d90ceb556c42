//! Flat `key = value` configuration files.
//!
//! Grammar, one entry per line:
//!
//! ```text
//! line    := blank | comment | entry
//! comment := '#' anything
//! entry   := key '=' value [comment]
//! ```
//!
//! Keys are the field names of [`Settings`]. Lists are comma-separated.
//! Unknown or repeated keys are errors. Defaults reproduce the baseline
//! operating point of the sweep. Run `covert-pilot --help` for the key list.

use std::path::Path;

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{alice_capacity, AttackParams, ChannelParams, Orthogonality, SystemConfig};
use crate::error::{Error, Result};
use crate::montecarlo::{McConfig, McTarget};
use crate::sweep::{Grid, SweepSpec};

/// Every configurable quantity. Powers and variances are linear, rates in
/// bits per channel use.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Settings {
    pub alpha_w_sq: f64,
    pub alpha_e_sq: f64,
    pub sigma_w_sq: f64,
    pub sigma_e_sq: f64,
    pub sigma_h_sq: f64,
    pub h_w_re: f64,
    pub h_w_im: f64,
    pub h_e_re: f64,
    pub h_e_im: f64,
    pub lambda_a: f64,
    /// Absolute R_A. Takes precedence over `r_a_fraction` when set.
    pub r_a: Option<f64>,
    /// R_A as a fraction of Alice's delay-limited capacity.
    pub r_a_fraction: f64,
    pub delta_1: f64,
    pub delta_2: f64,
    pub pilot_len: usize,
    pub block_len: usize,
    pub pilot_power: f64,
    pub epsilon: f64,
    pub lambda_t: f64,
    pub epsilon_min: f64,
    pub epsilon_max: f64,
    pub epsilon_steps: usize,
    pub lambda_t_min: f64,
    pub lambda_t_max: f64,
    pub lambda_t_steps: usize,
    pub trials: usize,
    pub two_phase: bool,
    pub enforce_orthogonality: bool,
    /// Λ_T = c/√n in the square-root-law target.
    pub c: f64,
    pub n_grid: Vec<usize>,
    pub l_grid: Vec<usize>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            alpha_w_sq: 0.1,
            alpha_e_sq: 0.1,
            sigma_w_sq: 0.1,
            sigma_e_sq: 0.1,
            sigma_h_sq: 1.0,
            h_w_re: 1.0,
            h_w_im: 0.0,
            h_e_re: 1.0,
            h_e_im: 0.0,
            lambda_a: 20.0,
            r_a: None,
            r_a_fraction: 0.8,
            delta_1: 1.0 / 10f64.sqrt(),
            delta_2: 0.1,
            pilot_len: 64,
            block_len: 10_000,
            pilot_power: crate::channel::DEFAULT_PILOT_POWER,
            epsilon: 0.1,
            lambda_t: 0.3,
            epsilon_min: 0.0,
            epsilon_max: 0.25,
            epsilon_steps: 100,
            lambda_t_min: 0.01,
            lambda_t_max: 1.0,
            lambda_t_steps: 100,
            trials: 1000,
            two_phase: false,
            enforce_orthogonality: true,
            c: 1.0,
            n_grid: vec![1_000, 10_000, 100_000],
            l_grid: (4..=12).map(|k| 1usize << k).collect(),
        }
    }
}

/// Key names with a one-line description, in file order.
pub const KEYS: &[(&str, &str)] = &[
    ("alpha_w_sq", "power loss to Willie"),
    ("alpha_e_sq", "power loss to Eve"),
    ("sigma_w_sq", "noise variance at Willie"),
    ("sigma_e_sq", "noise variance at Eve"),
    ("sigma_h_sq", "fading variance"),
    ("h_w_re", "Willie fading gain, real part"),
    ("h_w_im", "Willie fading gain, imaginary part"),
    ("h_e_re", "Eve fading gain, real part"),
    ("h_e_im", "Eve fading gain, imaginary part"),
    ("lambda_a", "Alice power"),
    ("r_a", "Alice rate [bpcu]; overrides r_a_fraction"),
    ("r_a_fraction", "Alice rate as a fraction of capacity"),
    ("delta_1", "estimation-phase covertness budget"),
    ("delta_2", "communication-phase covertness budget"),
    ("pilot_len", "pilot length L"),
    ("block_len", "block length n"),
    ("pilot_power", "per-symbol pilot power"),
    ("epsilon", "pilot scaling"),
    ("lambda_t", "Trojan power"),
    ("epsilon_min", "sweep"),
    ("epsilon_max", "sweep"),
    ("epsilon_steps", "sweep"),
    ("lambda_t_min", "sweep"),
    ("lambda_t_max", "sweep"),
    ("lambda_t_steps", "sweep"),
    ("trials", "Monte Carlo trials"),
    ("two_phase", "simulate the pilot phase in comm-detection (true/false)"),
    ("enforce_orthogonality", "make x_A, x_T orthogonal to the noise (true/false)"),
    ("c", "sqrt-law constant, Λ_T = c/√n"),
    ("n_grid", "block lengths, comma-separated"),
    ("l_grid", "pilot lengths, comma-separated"),
];

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse '{value}'")))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect()
}

impl Settings {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "alpha_w_sq" => self.alpha_w_sq = parse_num(key, v)?,
            "alpha_e_sq" => self.alpha_e_sq = parse_num(key, v)?,
            "sigma_w_sq" => self.sigma_w_sq = parse_num(key, v)?,
            "sigma_e_sq" => self.sigma_e_sq = parse_num(key, v)?,
            "sigma_h_sq" => self.sigma_h_sq = parse_num(key, v)?,
            "h_w_re" => self.h_w_re = parse_num(key, v)?,
            "h_w_im" => self.h_w_im = parse_num(key, v)?,
            "h_e_re" => self.h_e_re = parse_num(key, v)?,
            "h_e_im" => self.h_e_im = parse_num(key, v)?,
            "lambda_a" => self.lambda_a = parse_num(key, v)?,
            "r_a" => self.r_a = Some(parse_num(key, v)?),
            "r_a_fraction" => self.r_a_fraction = parse_num(key, v)?,
            "delta_1" => self.delta_1 = parse_num(key, v)?,
            "delta_2" => self.delta_2 = parse_num(key, v)?,
            "pilot_len" => self.pilot_len = parse_num(key, v)?,
            "block_len" => self.block_len = parse_num(key, v)?,
            "pilot_power" => self.pilot_power = parse_num(key, v)?,
            "epsilon" => self.epsilon = parse_num(key, v)?,
            "lambda_t" => self.lambda_t = parse_num(key, v)?,
            "epsilon_min" => self.epsilon_min = parse_num(key, v)?,
            "epsilon_max" => self.epsilon_max = parse_num(key, v)?,
            "epsilon_steps" => self.epsilon_steps = parse_num(key, v)?,
            "lambda_t_min" => self.lambda_t_min = parse_num(key, v)?,
            "lambda_t_max" => self.lambda_t_max = parse_num(key, v)?,
            "lambda_t_steps" => self.lambda_t_steps = parse_num(key, v)?,
            "trials" => self.trials = parse_num(key, v)?,
            "two_phase" => self.two_phase = parse_num(key, v)?,
            "enforce_orthogonality" => self.enforce_orthogonality = parse_num(key, v)?,
            "c" => self.c = parse_num(key, v)?,
            "n_grid" => self.n_grid = parse_list(key, v)?,
            "l_grid" => self.l_grid = parse_list(key, v)?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Applies `key=value` text on top of the current values.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", lineno + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!("line {}: `{key}` given twice", lineno + 1)));
            }
            self.set(key, value).map_err(|e| {
                let msg = match e {
                    Error::Config(m) => m,
                    other => other.to_string(),
                };
                Error::Config(format!("line {}: {msg}", lineno + 1))
            })?;
        }
        Ok(())
    }

    /// Reads a file on top of the defaults. A missing file is an I/O error.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut s = Self::default();
        s.apply_str(&text)?;
        Ok(s)
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override '{assignment}' is not key=value")))?;
        self.set(k.trim(), v)
    }

    pub fn channel(&self) -> Result<ChannelParams> {
        ChannelParams::new(
            self.alpha_w_sq,
            self.alpha_e_sq,
            self.sigma_w_sq,
            self.sigma_e_sq,
            self.sigma_h_sq,
            Complex64::new(self.h_w_re, self.h_w_im),
            Complex64::new(self.h_e_re, self.h_e_im),
        )
    }

    pub fn system(&self, channel: &ChannelParams) -> Result<SystemConfig> {
        let r_a = match self.r_a {
            Some(r) => r,
            None => {
                if !(self.r_a_fraction > 0.0 && self.r_a_fraction < 1.0) {
                    return Err(Error::Config(format!(
                        "r_a_fraction must lie in (0, 1), got {}",
                        self.r_a_fraction
                    )));
                }
                self.r_a_fraction * alice_capacity(channel, self.lambda_a)
            }
        };
        SystemConfig::new(
            channel,
            self.lambda_a,
            r_a,
            self.delta_1,
            self.delta_2,
            self.pilot_len,
            self.block_len,
        )?
        .with_pilot_power(self.pilot_power)
    }

    pub fn attack(&self) -> Result<AttackParams> {
        AttackParams::new(self.epsilon, self.lambda_t)
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let channel = self.channel()?;
        let config = self.system(&channel)?;
        let spec = SweepSpec {
            epsilon: Grid::new(self.epsilon_min, self.epsilon_max, self.epsilon_steps),
            lambda_t: Grid::new(self.lambda_t_min, self.lambda_t_max, self.lambda_t_steps),
            channel,
            config,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn mc_config(&self, target: McTarget, seed: u64) -> McConfig {
        let mut mc = McConfig::new(target, self.trials, seed)
            .with_n(self.block_len)
            .with_l(self.pilot_len);
        mc.two_phase = self.two_phase;
        mc.orthogonality = if self.enforce_orthogonality {
            Orthogonality::Enforced
        } else {
            Orthogonality::Independent
        };
        mc
    }
}
