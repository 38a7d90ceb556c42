//! Monte Carlo estimates of the detection, divergence and estimation
//! quantities, used as an independent check of the closed forms.
//!
//! Every trial draws from its own generator seeded with
//! `derive_seed(base_seed, trial)`; trials are evaluated on the rayon pool,
//! collected in trial order and summed serially. Results are therefore
//! bit-identical for any number of worker threads.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{
    make_pilot, synthesize_received_with, AttackParams, ChannelParams, CommHypothesis, Hypothesis,
    Orthogonality, PilotHypothesis, SystemConfig,
};
use crate::detection::{
    self, analytic_error_probs, radiometer_statistic, tau_dagger, tau_eps, Conditioning,
    ErrorProbabilities, ProbabilityKind,
};
use crate::error::{Error, Result};
use crate::pilot::{kl_pilot_exact, mmse_estimate, mmse_limit, PilotCovariances, DENSE_PILOT_LIMIT};
use crate::rng::{complex_gaussian, complex_gaussian_vec, derive_seed, rng_from_seed};

/// Fewer trials than this and no standard error is reported.
pub const MIN_TRIALS_FOR_ERROR: usize = 100;

// Sub-stream indices under a trial seed.
const STREAM_H0: u64 = 0;
const STREAM_H1: u64 = 1;
const STREAM_PILOT: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum McTarget {
    PilotKl,
    CommDetection,
    EstimatorError,
    SqrtLaw,
}

impl McTarget {
    pub fn as_str(&self) -> &'static str {
        match self {
            McTarget::PilotKl => "pilot-kl",
            McTarget::CommDetection => "comm-detection",
            McTarget::EstimatorError => "estimator-error",
            McTarget::SqrtLaw => "sqrt-law",
        }
    }
}

impl std::str::FromStr for McTarget {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pilot-kl" => Ok(McTarget::PilotKl),
            "comm-detection" => Ok(McTarget::CommDetection),
            "estimator-error" => Ok(McTarget::EstimatorError),
            "sqrt-law" => Ok(McTarget::SqrtLaw),
            other => Err(Error::Config(format!("unknown Monte Carlo target '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McConfig {
    pub trials: usize,
    pub base_seed: u64,
    /// Block length of the communication phase.
    pub n: usize,
    /// Pilot length.
    pub l: usize,
    pub target: McTarget,
    pub orthogonality: Orthogonality,
    /// Simulate the estimation phase at finite `l` in every trial instead of
    /// injecting the asymptotic estimate (1+ε)h_W.
    pub two_phase: bool,
    /// Replaces the radiometer threshold.
    pub tau_override: Option<f64>,
}

impl McConfig {
    pub fn new(target: McTarget, trials: usize, base_seed: u64) -> Self {
        Self {
            trials,
            base_seed,
            n: 10_000,
            l: 64,
            target,
            orthogonality: Orthogonality::Enforced,
            two_phase: false,
            tau_override: None,
        }
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials", "must be >= 1"));
        }
        if self.trials < MIN_TRIALS_FOR_ERROR {
            log::warn!(
                "{} trials is below {MIN_TRIALS_FOR_ERROR}; standard errors will be NaN",
                self.trials
            );
        }
        Ok(())
    }

    fn trial_seed(&self, trial: usize, stream: u64) -> u64 {
        derive_seed(derive_seed(self.base_seed, trial as u64), stream)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct McResult {
    pub point_estimate: f64,
    /// Sample standard deviation over √trials; NaN below 100 trials.
    pub std_error: f64,
    pub trials_used: usize,
    pub analytic_reference: Option<f64>,
}

impl McResult {
    fn from_samples(samples: &[f64], analytic_reference: Option<f64>) -> Self {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let std_error = if samples.len() < MIN_TRIALS_FOR_ERROR {
            f64::NAN
        } else {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        };
        Self {
            point_estimate: mean,
            std_error,
            trials_used: samples.len(),
            analytic_reference,
        }
    }

    /// |estimate - reference| in standard errors. An exact match counts as
    /// zero even when the standard error is zero.
    pub fn z_score(&self) -> Option<f64> {
        self.analytic_reference.map(|r| {
            let diff = (self.point_estimate - r).abs();
            if diff == 0.0 {
                0.0
            } else {
                diff / self.std_error
            }
        })
    }
}

/// Runs `trial` for every index on the rayon pool, keeping trial order.
fn run_trials<T, F>(trials: usize, trial: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..trials).into_par_iter().map(trial).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommMcReport {
    /// Empirical probabilities (kind `MonteCarlo`).
    pub probs: ErrorProbabilities,
    pub p_f: McResult,
    pub p_m: McResult,
    /// P_F + P_M; the two tallies come from independent blocks, so the
    /// errors add in quadrature.
    pub sum: McResult,
    /// Threshold used by the radiometer (τ(ε) unless overridden, or the
    /// per-trial τ† in two-phase mode, in which case this is NaN).
    pub tau: f64,
}

/// Empirical P_F and P_M of Willie's radiometer in the communication phase,
/// conditioned on the pilot attack having taken place (H₁ true).
///
/// Each trial synthesizes one block under H̃₀ and one independent block under
/// H̃₁. By default the estimate is the asymptotic ĥ_W = (1+ε)h_W and the
/// threshold τ(ε); with `two_phase` the pilot is simulated at length `l`,
/// ĥ_W is the MMSE estimate and the threshold is τ† built from it.
pub fn mc_comm_error_probs(
    channel: &ChannelParams,
    attack: &AttackParams,
    config: &SystemConfig,
    mc: &McConfig,
) -> Result<CommMcReport> {
    mc.validate()?;
    let config = config.with_block_len(mc.n)?;
    let asymptotic_h = attack.scale() * channel.h_w;
    let tau = match mc.tau_override {
        Some(t) => t,
        None => tau_eps(channel, attack)?,
    };
    let pilot_cfg = if mc.two_phase {
        Some(config.with_pilot_len(mc.l)?)
    } else {
        None
    };

    let tallies = run_trials(mc.trials, |trial| {
        let (h_hat, tau) = match &pilot_cfg {
            None => (asymptotic_h, tau),
            Some(pc) => {
                let est = synthesize_received_with(
                    pc,
                    channel,
                    attack,
                    Hypothesis::Pilot(PilotHypothesis::H1),
                    mc.trial_seed(trial, STREAM_PILOT),
                    mc.orthogonality,
                )?;
                let h_hat = mmse_estimate(channel, attack, &est.alice, &est.received)?.h_hat;
                let tau = match mc.tau_override {
                    Some(t) => t,
                    None => tau_dagger(channel, h_hat, attack.lambda_t, mc.n)?,
                };
                (h_hat, tau)
            }
        };
        let stat = |hyp: CommHypothesis, stream: u64| -> Result<f64> {
            let tx = synthesize_received_with(
                &config,
                channel,
                attack,
                Hypothesis::Comm(hyp),
                mc.trial_seed(trial, stream),
                mc.orthogonality,
            )?;
            radiometer_statistic(&tx.received, &tx.alice, h_hat, channel)
        };
        let false_alarm = stat(CommHypothesis::H0, STREAM_H0)? > tau;
        let missed = stat(CommHypothesis::H1, STREAM_H1)? <= tau;
        Ok((false_alarm, missed))
    })?;

    let analytic = if mc.two_phase {
        None
    } else {
        Some(analytic_error_probs(channel, attack, &config, tau, Conditioning::H1True)?)
    };
    let fa: Vec<f64> = tallies.iter().map(|t| t.0 as u8 as f64).collect();
    let md: Vec<f64> = tallies.iter().map(|t| t.1 as u8 as f64).collect();
    let p_f = McResult::from_samples(&fa, analytic.map(|a| a.p_f));
    let p_m = McResult::from_samples(&md, analytic.map(|a| a.p_m));
    let sum = McResult {
        point_estimate: p_f.point_estimate + p_m.point_estimate,
        std_error: p_f.std_error.hypot(p_m.std_error),
        trials_used: mc.trials,
        analytic_reference: analytic.map(|a| a.sum),
    };
    let probs = ErrorProbabilities::new(
        p_f.point_estimate,
        p_m.point_estimate,
        crate::channel::Phase::Communication,
        ProbabilityKind::MonteCarlo,
    );
    Ok(CommMcReport {
        probs,
        p_f,
        p_m,
        sum,
        tau: if mc.two_phase && mc.tau_override.is_none() {
            f64::NAN
        } else {
            tau
        },
    })
}

/// Estimates the pilot-phase divergence E_{P₀}[ln p₀(y)/p₁(y)] by sampling
/// pilot observations with a fresh fading draw h_W ~ CN(0, σ_H²) per trial
/// under H₀ and evaluating both Gaussian densities exactly.
///
/// The analytic reference is [`kl_pilot_exact`].
pub fn mc_pilot_kl(channel: &ChannelParams, attack: &AttackParams, l: usize, mc: &McConfig) -> Result<McResult> {
    mc.validate()?;
    if l == 0 || l > DENSE_PILOT_LIMIT {
        return Err(Error::param(
            "l",
            format!("pilot length must be in 1..={DENSE_PILOT_LIMIT}, got {l}"),
        ));
    }
    let pilot = make_pilot(l, crate::channel::DEFAULT_PILOT_POWER)?;
    let cov = PilotCovariances::build(channel, attack, &pilot)?;
    let reference = kl_pilot_exact(channel, attack, &pilot)?;
    let gain = channel.alpha_w();
    let samples = run_trials(mc.trials, |trial| {
        let mut rng = rng_from_seed(mc.trial_seed(trial, STREAM_PILOT));
        let h = complex_gaussian(&mut rng, channel.sigma_h_sq);
        let noise = complex_gaussian_vec(&mut rng, channel.sigma_w_sq, l);
        let y: Vec<Complex64> = pilot
            .samples
            .iter()
            .zip(&noise)
            .map(|(s, z)| gain * h * s + z)
            .collect();
        Ok(cov.log_likelihood_ratio_01(&y))
    })?;
    Ok(McResult::from_samples(&samples, Some(reference)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorErrorRow {
    pub l: usize,
    /// E|ĥ_W - h_W|² under H₀.
    pub mse_h0: McResult,
    /// E|ĥ_W - (1+ε)h_W|² under H₁.
    pub mse_h1: McResult,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimatorErrorTable {
    pub rows: Vec<EstimatorErrorRow>,
    /// Least-squares slope of ln MSE against ln L under H₀ and H₁.
    pub slope_h0: f64,
    pub slope_h1: f64,
}

/// Mean squared distance of the finite-L MMSE estimate from its
/// large-pilot limit, per pilot length. H₀ and H₁ share the noise draw of
/// each trial.
///
/// The analytic reference is `|h_lim|²/(1+aS)² + k²Sσ_W²` with
/// `k = α_W σ_H²/(σ_W² + α_W²σ_H²S)`, the squared bias plus the noise term.
pub fn mc_estimator_error(
    channel: &ChannelParams,
    attack: &AttackParams,
    l_grid: &[usize],
    mc: &McConfig,
) -> Result<EstimatorErrorTable> {
    mc.validate()?;
    if l_grid.is_empty() {
        return Err(Error::param("l_grid", "must be nonempty"));
    }
    // the link operating point does not enter the estimator
    let base = SystemConfig::new(channel, 1.0, 1e-6, 0.0, 0.5, 1, 2)?;
    let mut rows = Vec::with_capacity(l_grid.len());
    for &l in l_grid {
        let cfg = base.with_pilot_len(l)?;
        let pilot = make_pilot(l, cfg.pilot_power())?;
        let energy = pilot.norm_sq();
        let coef = channel.alpha_w() * channel.sigma_h_sq
            / (channel.sigma_w_sq + channel.alpha_w_sq * channel.sigma_h_sq * energy);
        let a_s = channel.alpha_w_sq * channel.sigma_h_sq / channel.sigma_w_sq * energy;
        let variance = coef * coef * energy * channel.sigma_w_sq;
        let reference = |scale: f64| {
            let limit = scale * channel.h_w.norm();
            (limit / (1.0 + a_s)).powi(2) + variance
        };
        let errs = run_trials(mc.trials, |trial| {
            let seed = derive_seed(mc.trial_seed(trial, STREAM_PILOT), l as u64);
            let mut out = [0.0; 2];
            for (slot, hyp) in [PilotHypothesis::H0, PilotHypothesis::H1].into_iter().enumerate() {
                let tx = synthesize_received_with(
                    &cfg,
                    channel,
                    attack,
                    Hypothesis::Pilot(hyp),
                    seed,
                    Orthogonality::Independent,
                )?;
                let est = mmse_estimate(channel, attack, &tx.alice, &tx.received)?;
                out[slot] = (est.h_hat - mmse_limit(channel, attack, hyp)).norm_sqr();
            }
            Ok(out)
        })?;
        let e0: Vec<f64> = errs.iter().map(|e| e[0]).collect();
        let e1: Vec<f64> = errs.iter().map(|e| e[1]).collect();
        rows.push(EstimatorErrorRow {
            l,
            mse_h0: McResult::from_samples(&e0, Some(reference(1.0))),
            mse_h1: McResult::from_samples(&e1, Some(reference(attack.scale()))),
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| (r.l as f64).ln()).collect();
    let slope = |ys: Vec<f64>| log_log_slope(&xs, &ys);
    let slope_h0 = slope(rows.iter().map(|r| r.mse_h0.point_estimate.ln()).collect());
    let slope_h1 = slope(rows.iter().map(|r| r.mse_h1.point_estimate.ln()).collect());
    Ok(EstimatorErrorTable {
        rows,
        slope_h0,
        slope_h1,
    })
}

/// Least-squares slope of `ys` on `xs`; NaN with fewer than two points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return f64::NAN;
    }
    let mx = xs[..n].iter().sum::<f64>() / n as f64;
    let my = ys[..n].iter().sum::<f64>() / n as f64;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for i in 0..n {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx).powi(2);
    }
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqrtLawRow {
    pub n: usize,
    pub lambda_t: f64,
    pub tau_dagger: f64,
    /// Empirical 1 - P_F† - P_M†, with the analytic value as reference.
    pub advantage: McResult,
    pub bound_finite_n: f64,
    pub bound_limit: f64,
}

/// Willie's empirical advantage 1 - P_F† - P_M† with no pilot attack
/// (ε = 0) and Λ_T(n) = c/√n, at the optimal finite-n threshold.
pub fn mc_sqrt_law(
    channel: &ChannelParams,
    config: &SystemConfig,
    c: f64,
    n_grid: &[usize],
    mc: &McConfig,
) -> Result<Vec<SqrtLawRow>> {
    mc.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("must be > 0, got {c}")));
    }
    let mut rows = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let cfg = config.with_block_len(n)?;
        let lambda_t = c / (n as f64).sqrt();
        let attack = AttackParams::new(0.0, lambda_t)?;
        let tau = match mc.tau_override {
            Some(t) => t,
            None => tau_dagger(channel, channel.h_w, lambda_t, n)?,
        };
        let analytic = analytic_error_probs(channel, &attack, &cfg, tau, Conditioning::H0True)?;
        let tallies = run_trials(mc.trials, |trial| {
            let seed = derive_seed(mc.trial_seed(trial, STREAM_H0), n as u64);
            let stat = |hyp: CommHypothesis, stream: u64| -> Result<f64> {
                let tx = synthesize_received_with(
                    &cfg,
                    channel,
                    &attack,
                    Hypothesis::Comm(hyp),
                    derive_seed(seed, stream),
                    mc.orthogonality,
                )?;
                radiometer_statistic(&tx.received, &tx.alice, channel.h_w, channel)
            };
            let correct_reject = stat(CommHypothesis::H0, STREAM_H0)? <= tau;
            let detected = stat(CommHypothesis::H1, STREAM_H1)? > tau;
            // 1 - P_F - P_M = (1 - P_F) + (1 - P_M) - 1
            Ok(correct_reject as u8 as f64 + detected as u8 as f64 - 1.0)
        })?;
        let bound = detection::sqrt_law_bound(channel, c, n)?;
        rows.push(SqrtLawRow {
            n,
            lambda_t,
            tau_dagger: tau,
            advantage: McResult::from_samples(&tallies, Some(1.0 - analytic.sum)),
            bound_finite_n: bound.finite_n,
            bound_limit: bound.limit,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> (ChannelParams, SystemConfig) {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap();
        (ch, cfg)
    }

    #[test]
    fn comm_detection_matches_analytic_small_n() {
        let (ch, cfg) = baseline();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        // short blocks keep both error probabilities away from 0 and 1
        let mc = McConfig::new(McTarget::CommDetection, 4000, 7).with_n(20);
        let r = mc_comm_error_probs(&ch, &attack, &cfg, &mc).unwrap();
        assert!(r.p_f.z_score().unwrap() < 4.0, "{:?}", r.p_f);
        assert!(r.p_m.z_score().unwrap() < 4.0, "{:?}", r.p_m);
    }

    #[test]
    fn infinite_threshold_never_alarms() {
        let (ch, cfg) = baseline();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let mut mc = McConfig::new(McTarget::CommDetection, 50, 1).with_n(200);
        mc.tau_override = Some(f64::INFINITY);
        let r = mc_comm_error_probs(&ch, &attack, &cfg, &mc).unwrap();
        assert_eq!(r.probs.p_f, 0.0);
        assert_eq!(r.probs.p_m, 1.0);
        assert!(r.p_f.std_error.is_nan());
    }

    #[test]
    fn two_phase_runs() {
        let (ch, cfg) = baseline();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let mut mc = McConfig::new(McTarget::CommDetection, 200, 3).with_n(500).with_l(256);
        mc.two_phase = true;
        let r = mc_comm_error_probs(&ch, &attack, &cfg, &mc).unwrap();
        assert!(r.sum.analytic_reference.is_none());
        assert!(r.probs.sum > 0.5);
    }

    #[test]
    fn pilot_kl_zero_epsilon() {
        let ch = ChannelParams::baseline();
        let attack = AttackParams::new(0.0, 0.3).unwrap();
        let r = mc_pilot_kl(&ch, &attack, 16, &McConfig::new(McTarget::PilotKl, 500, 5)).unwrap();
        assert_eq!(r.point_estimate, 0.0);
        assert_eq!(r.analytic_reference, Some(0.0));
    }

    #[test]
    fn pilot_kl_agrees() {
        let ch = ChannelParams::baseline();
        let attack = AttackParams::new(0.5, 0.3).unwrap();
        let r = mc_pilot_kl(&ch, &attack, 16, &McConfig::new(McTarget::PilotKl, 20_000, 5)).unwrap();
        assert!(r.z_score().unwrap() < 4.0, "{r:?}");
    }

    #[test]
    fn estimator_error_matches_closed_form() {
        let ch = ChannelParams::baseline();
        let attack = AttackParams::new(0.2, 0.3).unwrap();
        let mc = McConfig::new(McTarget::EstimatorError, 2000, 11);
        let t = mc_estimator_error(&ch, &attack, &[16, 64, 256], &mc).unwrap();
        for row in &t.rows {
            assert!(row.mse_h0.z_score().unwrap() < 4.0, "{row:?}");
            assert!(row.mse_h1.z_score().unwrap() < 4.0, "{row:?}");
        }
        assert!((t.slope_h0 + 1.0).abs() < 0.15, "{}", t.slope_h0);
    }

    #[test]
    fn estimator_error_equal_hypotheses_without_attack() {
        let ch = ChannelParams::baseline();
        let attack = AttackParams::new(0.0, 0.3).unwrap();
        let mc = McConfig::new(McTarget::EstimatorError, 100, 2);
        let t = mc_estimator_error(&ch, &attack, &[8, 32], &mc).unwrap();
        for row in &t.rows {
            assert_eq!(row.mse_h0, row.mse_h1);
        }
    }

    #[test]
    fn silent_trojan_gives_no_advantage() {
        let (ch, cfg) = baseline();
        let mc = McConfig::new(McTarget::SqrtLaw, 200, 9);
        let rows = mc_sqrt_law(&ch, &cfg, 1e-9, &[1000], &mc).unwrap();
        assert!(rows[0].advantage.point_estimate.abs() < 0.15);
        assert!(rows[0].advantage.analytic_reference.unwrap() < 1e-6);
    }

    #[test]
    fn results_do_not_depend_on_thread_count() {
        let (ch, cfg) = baseline();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let mc = McConfig::new(McTarget::CommDetection, 300, 42).with_n(300);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| mc_comm_error_probs(&ch, &attack, &cfg, &mc).unwrap())
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.p_f.point_estimate.to_bits(), b.p_f.point_estimate.to_bits());
        assert_eq!(a.p_m.std_error.to_bits(), b.p_m.std_error.to_bits());
    }
}
