//! Analytic-versus-oracle verification suites behind `covert-pilot verify`.
//!
//! Each suite returns one [`Check`] per invariant with the measured values,
//! so a failure names what broke and by how much.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::channel::{make_pilot, AttackParams, ChannelParams, Hypothesis, PilotHypothesis, SignalBlock, Phase, SystemConfig};
use crate::config::Settings;
use crate::detection::{
    analytic_error_probs, classify_regime, sqrt_law_c_for_limit, tail_bound_sum, tau_dagger, tau_eps, Conditioning,
    Regime,
};
use crate::error::{Error, Result};
use crate::montecarlo::{log_log_slope, mc_comm_error_probs, mc_estimator_error, mc_pilot_kl, mc_sqrt_law, McTarget};
use crate::pilot::{kl_pilot_exact, kl_pilot_limit, mmse_estimate, PilotCovariances};
use crate::rates::theorem2_scaling;
use crate::rng::rng_from_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Kl,
    Mmse,
    Threshold,
    Regimes,
    Sqrtlaw,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Kl, Suite::Mmse, Suite::Threshold, Suite::Regimes, Suite::Sqrtlaw];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Kl => "kl",
            Suite::Mmse => "mmse",
            Suite::Threshold => "threshold",
            Suite::Regimes => "regimes",
            Suite::Sqrtlaw => "sqrtlaw",
            Suite::All => "all",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kl" => Ok(Suite::Kl),
            "mmse" => Ok(Suite::Mmse),
            "threshold" => Ok(Suite::Threshold),
            "regimes" => Ok(Suite::Regimes),
            "sqrtlaw" => Ok(Suite::Sqrtlaw),
            "all" => Ok(Suite::All),
            other => Err(Error::Config(format!("unknown suite '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}/{}: {}", self.suite.as_str(), self.name, self.detail)
    }
}

struct Checks {
    suite: Suite,
    out: Vec<Check>,
}

impl Checks {
    fn new(suite: Suite) -> Self {
        Self { suite, out: Vec::new() }
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.out.push(Check {
            suite: self.suite,
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Runs `suite` (or every suite for [`Suite::All`]) with the operating
/// point and trial count from `settings`.
pub fn run_suite(suite: Suite, settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    match suite {
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, settings, seed)?);
            }
            Ok(all)
        }
        Suite::Kl => kl_suite(settings, seed),
        Suite::Mmse => mmse_suite(settings, seed),
        Suite::Threshold => threshold_suite(settings, seed),
        Suite::Regimes => regimes_suite(settings, seed),
        Suite::Sqrtlaw => sqrtlaw_suite(settings, seed),
    }
}

fn kl_suite(settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    let mut c = Checks::new(Suite::Kl);
    let channel = settings.channel()?;

    let mut worst = f64::NEG_INFINITY;
    let mut equal_off_zero = false;
    for i in 0..1000 {
        let eps = 2.0 * i as f64 / 999.0;
        let limit = kl_pilot_limit(eps)?;
        let bound = 2.0 * eps * eps;
        worst = worst.max(limit - bound);
        if eps > 0.0 && limit >= bound {
            equal_off_zero = true;
        }
    }
    c.push(
        "limit_below_two_eps_sq",
        worst <= 0.0 && !equal_off_zero,
        format!("max(limit - 2ε²) over 1000 points in [0, 2] = {worst:e}"),
    );

    let mut worst_dense: f64 = 0.0;
    for l in [1, 2, 4, 8, 16, 32, 64] {
        for eps in [0.05, 0.1, 0.5, 1.0] {
            let attack = AttackParams::new(eps, 0.0)?;
            let pilot = make_pilot(l, 1.0)?;
            let dense = PilotCovariances::build(&channel, &attack, &pilot)?.divergence_01();
            worst_dense = worst_dense.max((dense - kl_pilot_exact(&channel, &attack, &pilot)?).abs());
        }
    }
    c.push(
        "finite_l_matches_dense",
        worst_dense <= 1e-9,
        format!("max |closed form - dense| for L <= 64 = {worst_dense:e}"),
    );

    let trials = settings.trials.max(100);
    let mut mc = settings.mc_config(McTarget::PilotKl, seed);
    mc.trials = trials;
    for (eps, l) in [(0.0, 32), (0.1, 32), (0.5, 64)] {
        let r = mc_pilot_kl(&channel, &AttackParams::new(eps, 0.0)?, l, &mc)?;
        let z = r.z_score().unwrap_or(f64::NAN);
        c.push(
            &format!("mc_eps{eps}_l{l}"),
            z <= 4.0,
            format!(
                "MC {:.6} ± {:.6}, exact {:.6}, z = {z:.2}",
                r.point_estimate,
                r.std_error,
                r.analytic_reference.unwrap_or(f64::NAN)
            ),
        );
    }
    Ok(c.out)
}

fn mmse_suite(settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    let mut c = Checks::new(Suite::Mmse);
    let channel = settings.channel()?;
    let attack = settings.attack()?;

    // noiseless observation: ĥ must equal bias_factor · h exactly
    let mut worst: f64 = 0.0;
    for l in [1, 4, 16, 64, 256, 4096] {
        let pilot = make_pilot(l, settings.pilot_power)?;
        for hyp in [PilotHypothesis::H0, PilotHypothesis::H1] {
            let scale = match hyp {
                PilotHypothesis::H0 => 1.0,
                PilotHypothesis::H1 => attack.scale(),
            };
            let gain = channel.alpha_w() * channel.h_w * scale;
            let received = SignalBlock {
                samples: pilot.samples.iter().map(|s| gain * s).collect(),
                phase: Phase::Estimation,
                hypothesis: Some(Hypothesis::Pilot(hyp)),
            };
            let est = mmse_estimate(&channel, &attack, &pilot, &received)?;
            let a = channel.alpha_w_sq * channel.sigma_h_sq / channel.sigma_w_sq;
            let s = pilot.norm_sq();
            let closed = scale * a * s / (1.0 + a * s);
            worst = worst
                .max((est.bias_factor - closed).abs())
                .max((est.h_hat - est.bias_factor * channel.h_w).norm() / channel.h_w.norm().max(1e-300));
        }
    }
    c.push(
        "noiseless_bias_closed_form",
        worst <= 1e-12,
        format!("max deviation = {worst:e}"),
    );

    let mc = settings.mc_config(McTarget::EstimatorError, seed);
    let table = mc_estimator_error(&channel, &attack, &settings.l_grid, &mc)?;
    for (name, slope) in [("slope_h0", table.slope_h0), ("slope_h1", table.slope_h1)] {
        c.push(
            name,
            (slope + 1.0).abs() <= 0.15,
            format!("log-log slope of MSE against L = {slope:.4} (target -1 ± 0.15)"),
        );
    }
    let worst_z = table
        .rows
        .iter()
        .flat_map(|r| [r.mse_h0.z_score(), r.mse_h1.z_score()])
        .map(|z| z.unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    c.push(
        "mse_matches_closed_form",
        worst_z <= 4.0,
        format!("largest |MC - closed form| over {} pilot lengths = {worst_z:.2} SE", table.rows.len()),
    );
    Ok(c.out)
}

/// One randomized threshold trial: the grid minimizer of the exact
/// P_F + P_M against τ†. Returns (grid argmin, τ†, grid step).
pub fn threshold_grid_trial(seed: u64, grid_points: usize) -> Result<(f64, f64, f64)> {
    let mut rng = rng_from_seed(seed);
    let log_uniform = |rng: &mut rand_chacha::ChaCha8Rng, lo: f64, hi: f64| -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
    };
    let alpha_sq = log_uniform(&mut rng, 0.01, 1.0);
    let sigma_sq = log_uniform(&mut rng, 0.01, 1.0);
    let phase = rng.gen::<f64>() * std::f64::consts::TAU;
    let h = Complex64::from_polar(log_uniform(&mut rng, 0.3, 3.0), phase);
    let channel = ChannelParams::new(alpha_sq, alpha_sq, sigma_sq, sigma_sq, 1.0, h, h)?;
    let n = log_uniform(&mut rng, 50.0, 1e5).round() as usize;
    // Tom's SNR at Willie on the C/√n scale, where the optimal error sum
    // runs from near 1 down to about e^{-50} instead of underflowing
    let snr = log_uniform(&mut rng, 0.05, 20.0) / (n as f64).sqrt();
    let lambda_t = snr * sigma_sq / channel.gain_w();
    let config = SystemConfig::new(&channel, 1.0, 1e-6, 0.0, 0.5, 1, n)?;
    let attack = AttackParams::new(0.0, lambda_t)?;
    let beta = channel.gain_w() * lambda_t;
    let tau_star = tau_dagger(&channel, channel.h_w, lambda_t, n)?;

    // τ† always lies in (β, β + σ²)
    let (lo, hi) = (beta, beta + sigma_sq);
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    for i in 0..grid_points {
        let tau = lo + step * i as f64;
        if tau <= 0.0 {
            continue;
        }
        let sum = analytic_error_probs(&channel, &attack, &config, tau, Conditioning::H0True)?.sum;
        if sum < best.0 {
            best = (sum, tau);
        }
    }
    Ok((best.1, tau_star, step))
}

fn threshold_suite(settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    let mut c = Checks::new(Suite::Threshold);
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let (argmin, tau_star, step) = threshold_grid_trial(crate::rng::derive_seed(seed, k), 10_000)?;
        worst = worst.max((argmin - tau_star).abs() / step);
    }
    c.push(
        "grid_optimality",
        worst <= 1.0,
        format!("50 random configurations, worst |grid argmin - τ†| = {worst:.3} grid steps"),
    );

    let channel = settings.channel()?;
    let attack = settings.attack()?;
    let limit = tau_eps(&channel, &attack)?;
    let h_hat = attack.scale() * channel.h_w;
    let taus: Vec<f64> = [10, 100, 1_000, 10_000, 100_000, 1_000_000]
        .iter()
        .map(|&n| tau_dagger(&channel, h_hat, attack.lambda_t, n))
        .collect::<Result<_>>()?;
    let increasing = taus.windows(2).all(|w| w[0] < w[1]) && taus.iter().all(|&t| t < limit);
    let gap = limit - taus[taus.len() - 1];
    c.push(
        "finite_n_threshold_converges",
        increasing && gap < 1e-5 * limit,
        format!("τ† rises through n = 10..10⁶ to {:.10}, τ(ε) = {limit:.10}", taus[taus.len() - 1]),
    );
    Ok(c.out)
}

fn regimes_suite(settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    let mut c = Checks::new(Suite::Regimes);
    let channel = settings.channel()?;
    let config = settings.system(&channel)?;
    let attack = settings.attack()?;

    let class = classify_regime(&channel, &attack, &config)?;
    c.push(
        "operating_point_blind",
        class.regime != Regime::Detectable,
        format!("{:?}, Δ₁ = {:.6}, Δ₂ = {:.6}", class.regime, class.delta_1_gap, class.delta_2_gap),
    );
    if class.regime != Regime::Detectable {
        let analytic = analytic_error_probs(&channel, &attack, &config, class.tau_eps, Conditioning::H1True)?;
        let bound = tail_bound_sum(&channel, &attack, &config)?;
        c.push(
            "tail_bound_holds",
            1.0 - analytic.sum <= bound,
            format!(
                "n = {}: 1 - (P_F + P_M) = {:.6} <= bound {bound:.6}",
                config.block_len(),
                1.0 - analytic.sum
            ),
        );
    }

    let clean = AttackParams::new(0.0, attack.lambda_t)?;
    let class0 = classify_regime(&channel, &clean, &config)?;
    let sum0 = analytic_error_probs(&channel, &clean, &config, class0.tau_eps, Conditioning::H1True)?.sum;
    c.push(
        "no_attack_detectable",
        class0.regime == Regime::Detectable && sum0 <= 0.01,
        format!("ε = 0: {:?}, P_F + P_M = {sum0:e}", class0.regime),
    );

    let mc = settings.mc_config(McTarget::CommDetection, seed);
    let r = mc_comm_error_probs(&channel, &attack, &config, &mc)?;
    let z = r.sum.z_score().unwrap_or(f64::NAN);
    c.push(
        "mc_matches_analytic",
        z <= 4.0,
        format!(
            "{} trials at n = {}: MC {:.4} ± {:.4}, analytic {:.4}, z = {z:.2}",
            mc.trials,
            mc.n,
            r.sum.point_estimate,
            r.sum.std_error,
            r.sum.analytic_reference.unwrap_or(f64::NAN)
        ),
    );
    Ok(c.out)
}

fn sqrtlaw_suite(settings: &Settings, seed: u64) -> Result<Vec<Check>> {
    let mut c = Checks::new(Suite::Sqrtlaw);
    let channel = settings.channel()?;
    let config = settings.system(&channel)?;
    let grid = [1_000, 10_000, 100_000, 1_000_000];

    let fast = theorem2_scaling(&channel, &config, 0.25, 1.0, &grid)?;
    let last = fast[fast.len() - 1].error_sum;
    c.push(
        "exponent_0.25_detected",
        fast.windows(2).all(|w| w[1].error_sum < w[0].error_sum) && last < 0.5,
        format!("Λ_T = n^(-1/4): P_F + P_M falls to {last:e} at n = 10⁶"),
    );

    let c_half = sqrt_law_c_for_limit(&channel, 0.1)?;
    let half = theorem2_scaling(&channel, &config, 0.5, c_half, &grid)?;
    let adv: Vec<f64> = half.iter().map(|r| 1.0 - r.error_sum).collect();
    let drift = (adv[adv.len() - 1] - adv[adv.len() - 2]).abs() / adv[adv.len() - 1];
    c.push(
        "exponent_0.5_stable",
        drift < 0.01,
        format!(
            "Λ_T = {c_half:.6}/√n: 1 - (P_F + P_M) = {:.6} → {:.6} over the top decade",
            adv[adv.len() - 2],
            adv[adv.len() - 1]
        ),
    );
    let xs: Vec<f64> = half.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = half.iter().map(|r| r.r_t.ln()).collect();
    let slope = log_log_slope(&xs, &ys);
    c.push(
        "rate_slope",
        (slope + 0.5).abs() <= 0.05,
        format!("log-log slope of R_T against n = {slope:.4} (target -0.5 ± 0.05)"),
    );

    let slow = theorem2_scaling(&channel, &config, 0.75, 1.0, &grid)?;
    let adv_slow: Vec<f64> = slow.iter().map(|r| 1.0 - r.error_sum).collect();
    let ys: Vec<f64> = adv_slow.iter().map(|a| a.ln()).collect();
    let slope_slow = log_log_slope(&xs, &ys);
    c.push(
        "exponent_0.75_covert",
        adv_slow.windows(2).all(|w| w[1] < w[0]) && (slope_slow + 0.25).abs() <= 0.05,
        format!(
            "Λ_T = n^(-3/4): 1 - (P_F + P_M) falls to {:e} at n = 10⁶, log-log slope {slope_slow:.4} (target -0.25)",
            adv_slow[adv_slow.len() - 1]
        ),
    );

    let c05 = sqrt_law_c_for_limit(&channel, 0.05)?;
    let mut mc = settings.mc_config(McTarget::SqrtLaw, seed);
    mc.trials = settings.trials;
    let rows = mc_sqrt_law(&channel, &config, c05, &[1_000, 10_000], &mc)?;
    let worst = rows
        .iter()
        .map(|r| r.advantage.point_estimate - 3.0 * r.advantage.std_error)
        .fold(f64::NEG_INFINITY, f64::max);
    c.push(
        "mc_below_bound",
        worst <= 0.05,
        format!(
            "limit bound 0.05: MC advantage {}",
            rows.iter()
                .map(|r| format!("n = {}: {:.4} ± {:.4}", r.n, r.advantage.point_estimate, r.advantage.std_error))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    Ok(c.out)
}
