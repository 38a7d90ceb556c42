//! Grid sweeps of the feasibility conditions over (ε, Λ_T).
//!
//! Cells are evaluated in parallel and emitted row-major: ε is the outer
//! index, Λ_T the inner one.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{AttackParams, ChannelParams, SystemConfig};
use crate::detection::classify_regime;
use crate::error::{Error, Result};
use crate::rates::{theorem1_feasibility, Condition};

/// Column order of the sweep CSV. Bracketed suffixes are units: `bpcu` is
/// bits per channel use, `lin` a linear power or power ratio, `1` a pure
/// number.
pub const CSV_HEADER: [&str; 10] = [
    "epsilon[1]",
    "lambda_t[lin]",
    "feasible",
    "failing_condition",
    "eve_ic",
    "r_t_tin[bpcu]",
    "r_t_ic[bpcu]",
    "gamma_w[lin]",
    "tau_eps[lin]",
    "delta_1_gap[1]",
];

/// Evenly spaced points from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(min: f64, max: f64, steps: usize) -> Self {
        Self { min, max, steps }
    }

    fn validate(&self, name: &'static str, allow_zero: bool) -> Result<()> {
        if self.steps < 2 {
            return Err(Error::param(name, format!("steps must be >= 2, got {}", self.steps)));
        }
        if !(self.min < self.max) || !self.max.is_finite() {
            return Err(Error::param(
                name,
                format!("need min < max, got [{}, {}]", self.min, self.max),
            ));
        }
        let floor_ok = if allow_zero { self.min >= 0.0 } else { self.min > 0.0 };
        if !floor_ok {
            return Err(Error::param(name, format!("min {} out of range", self.min)));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let span = self.max - self.min;
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.max
                } else {
                    self.min + span * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub epsilon: Grid,
    pub lambda_t: Grid,
    pub channel: ChannelParams,
    pub config: SystemConfig,
}

impl SweepSpec {
    /// 100×100 grid over ε ∈ [0, 0.25] and Λ_T ∈ [0.01, 1].
    pub fn baseline() -> Result<Self> {
        let channel = ChannelParams::baseline();
        let config = SystemConfig::baseline(&channel)?;
        Ok(Self {
            epsilon: Grid::new(0.0, 0.25, 100),
            lambda_t: Grid::new(0.01, 1.0, 100),
            channel,
            config,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.epsilon.validate("epsilon_grid", true)?;
        self.lambda_t.validate("lambda_t_grid", false)?;
        self.channel.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub epsilon: f64,
    pub lambda_t: f64,
    pub feasible: bool,
    pub failing_condition: Option<Condition>,
    pub eve_ic: bool,
    /// Zero for infeasible cells.
    pub r_t_tin: f64,
    /// Zero for infeasible cells.
    pub r_t_ic: f64,
    pub gamma_w: f64,
    pub tau_eps: f64,
    pub delta_1_gap: f64,
}

pub fn evaluate_cell(
    channel: &ChannelParams,
    config: &SystemConfig,
    epsilon: f64,
    lambda_t: f64,
) -> Result<SweepCell> {
    let attack = AttackParams::new(epsilon, lambda_t)?;
    let report = theorem1_feasibility(channel, &attack, config)?;
    let regime = classify_regime(channel, &attack, config)?;
    let (r_t_tin, r_t_ic) = if report.feasible {
        (report.r_t_tin, report.r_t_ic)
    } else {
        (0.0, 0.0)
    };
    Ok(SweepCell {
        epsilon,
        lambda_t,
        feasible: report.feasible,
        failing_condition: report.first_failing(),
        eve_ic: report.cond_eve_ic,
        r_t_tin,
        r_t_ic,
        gamma_w: report.gamma_w,
        tau_eps: report.tau_eps,
        delta_1_gap: regime.delta_1_gap,
    })
}

pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepCell>> {
    spec.validate()?;
    let eps = spec.epsilon.points();
    let lts = spec.lambda_t.points();
    let pairs: Vec<(f64, f64)> = eps
        .iter()
        .flat_map(|&e| lts.iter().map(move |&l| (e, l)))
        .collect();
    pairs
        .par_iter()
        .map(|&(e, l)| evaluate_cell(&spec.channel, &spec.config, e, l))
        .collect()
}

/// ε whose best Λ_T gives the largest interference-cancelling rate, with
/// that rate. None when no cell is feasible.
pub fn best_epsilon(cells: &[SweepCell]) -> Option<(f64, f64)> {
    cells
        .iter()
        .filter(|c| c.feasible)
        .fold(None, |best: Option<(f64, f64)>, c| match best {
            Some((_, r)) if r >= c.r_t_ic => best,
            _ => Some((c.epsilon, c.r_t_ic)),
        })
}

pub fn write_csv<W: Write>(cells: &[SweepCell], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for c in cells {
        w.write_record([
            c.epsilon.to_string(),
            c.lambda_t.to_string(),
            c.feasible.to_string(),
            c.failing_condition.map(|f| f.as_str()).unwrap_or("").to_string(),
            c.eve_ic.to_string(),
            c.r_t_tin.to_string(),
            c.r_t_ic.to_string(),
            c.gamma_w.to_string(),
            c.tau_eps.to_string(),
            c.delta_1_gap.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
