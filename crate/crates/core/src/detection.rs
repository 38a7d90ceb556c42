//! Communication-phase detection: Willie's radiometer, its optimal
//! threshold, the exact error probabilities and the asymptotic regimes.
//!
//! With `Λ_Z = (1/n)‖z‖²`, the quantity `V = 2nΛ_Z/σ_W²` is χ²(2n), so every
//! probability below is a chi-squared tail evaluated at a shifted threshold.

use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{AttackParams, ChannelParams, Phase, SignalBlock, SystemConfig};
use crate::error::{Error, Result};
use crate::special::chi_squared;

/// Which estimation-phase hypothesis is true when the communication phase is scored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conditioning {
    /// No pilot attack: ĥ_W = h_W and no residual self-interference.
    H0True,
    /// Covert pilot attack: ĥ_W = (1+ε)h_W, leaving ε²α_W²|h_W|²Λ_A of
    /// Alice's signal in the residual.
    H1True,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityKind {
    Analytic,
    TailBound,
    MonteCarlo,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ErrorProbabilities {
    pub p_f: f64,
    pub p_m: f64,
    pub sum: f64,
    pub phase: Phase,
    pub kind: ProbabilityKind,
    /// Set when a chi-squared tail came from the normal approximation.
    pub approximate: bool,
}

impl ErrorProbabilities {
    pub fn new(p_f: f64, p_m: f64, phase: Phase, kind: ProbabilityKind) -> Self {
        debug_assert!((0.0..=1.0).contains(&p_f) && (0.0..=1.0).contains(&p_m));
        Self {
            p_f,
            p_m,
            sum: p_f + p_m,
            phase,
            kind,
            approximate: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    /// Finite-n optimal threshold τ†.
    pub tau_dagger: f64,
    /// Its n → ∞ limit τ(ε).
    pub tau_eps: f64,
    /// α_W²|ĥ_W|²Λ_T = (1+ε)²α_W²|h_W|²Λ_T.
    pub beta_t: f64,
}

impl Thresholds {
    /// Thresholds Willie computes after a covert pilot attack, i.e. from
    /// ĥ_W = (1+ε)h_W.
    pub fn under_attack(channel: &ChannelParams, attack: &AttackParams, n: usize) -> Result<Self> {
        let h_hat = attack.scale() * channel.h_w;
        Ok(Self {
            tau_dagger: tau_dagger(channel, h_hat, attack.lambda_t, n)?,
            tau_eps: tau_eps(channel, attack)?,
            beta_t: channel.alpha_w_sq * h_hat.norm_sqr() * attack.lambda_t,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// τ(ε) below the limit of the statistic under both hypotheses.
    BlindTestBelow,
    /// τ(ε) above the limit of the statistic under both hypotheses.
    BlindTestAbove,
    /// τ(ε) sandwiched between the two limits: Willie detects Tom.
    Detectable,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegimeClassification {
    pub regime: Regime,
    /// Δ₁ = (ε²α_W²|h_W|²Λ_A + σ_W² - τ(ε)) / σ_W²; positive iff BlindTestBelow.
    pub delta_1_gap: f64,
    /// Δ₂ = (τ(ε) - α_W²|h_W|²(ε²Λ_A + Λ_T) - σ_W²) / σ_W²; positive iff BlindTestAbove.
    pub delta_2_gap: f64,
    pub tau_eps: f64,
}

/// `T(y) = (1/n)‖y - α_W ĥ_W x_A‖²`.
pub fn radiometer_statistic(
    received: &SignalBlock,
    x_a: &SignalBlock,
    h_hat: Complex64,
    channel: &ChannelParams,
) -> Result<f64> {
    if received.is_empty() {
        return Err(Error::param("received", "must be nonempty"));
    }
    if received.len() != x_a.len() {
        return Err(Error::param(
            "x_a",
            format!("length {} does not match received length {}", x_a.len(), received.len()),
        ));
    }
    let gain = channel.alpha_w() * h_hat;
    let energy: f64 = received
        .samples
        .iter()
        .zip(&x_a.samples)
        .map(|(y, a)| (y - gain * a).norm_sqr())
        .sum();
    Ok(energy / received.len() as f64)
}

/// `β e^{kβ/σ²} / (e^{kβ/σ²} - 1)`, extended continuously to σ²/k at β = 0.
fn balanced_threshold(beta: f64, sigma_sq: f64, k: f64) -> f64 {
    if beta == 0.0 {
        return sigma_sq / k;
    }
    beta / -(-k * beta / sigma_sq).exp_m1()
}

/// Finite-n threshold minimizing P_F + P_M of the radiometer built on ĥ_W:
/// `β e^{x}/(e^{x} - 1)` with `β = α_W²|ĥ_W|²Λ_T` and `x = n/(n-1) · β/σ_W²`.
///
/// At Λ_T = 0 this returns the continuous extension σ_W²(n-1)/n.
pub fn tau_dagger(channel: &ChannelParams, h_hat: Complex64, lambda_t: f64, n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::param("n", "block length must be >= 2"));
    }
    if !(lambda_t >= 0.0 && lambda_t.is_finite()) {
        return Err(Error::param("lambda_t", format!("must be finite and >= 0, got {lambda_t}")));
    }
    let beta = channel.alpha_w_sq * h_hat.norm_sqr() * lambda_t;
    let k = n as f64 / (n as f64 - 1.0);
    Ok(balanced_threshold(beta, channel.sigma_w_sq, k))
}

/// Asymptotic threshold τ(ε) = lim τ† evaluated at ĥ_W = (1+ε)h_W.
pub fn tau_eps(channel: &ChannelParams, attack: &AttackParams) -> Result<f64> {
    channel.validate()?;
    attack.validate()?;
    let beta = attack.scale() * attack.scale() * channel.gain_w() * attack.lambda_t;
    Ok(balanced_threshold(beta, channel.sigma_w_sq, 1.0))
}

/// Residual self-interference left in the statistic by the mismatched estimate.
pub fn residual_power(channel: &ChannelParams, attack: &AttackParams, config: &SystemConfig) -> f64 {
    attack.epsilon * attack.epsilon * channel.gain_w() * config.lambda_a()
}

/// Exact P_F and P_M of the radiometer at threshold `tau` over a block of
/// `config.block_len()` symbols.
///
/// `P_F = Pr(Λ_Z > τ - r)` and `P_M = Pr(Λ_Z < τ - r - α_W²|h_W|²Λ_T)` where
/// `r` is zero under [`Conditioning::H0True`] and [`residual_power`] under
/// [`Conditioning::H1True`].
pub fn analytic_error_probs(
    channel: &ChannelParams,
    attack: &AttackParams,
    config: &SystemConfig,
    tau: f64,
    conditioning: Conditioning,
) -> Result<ErrorProbabilities> {
    channel.validate()?;
    attack.validate()?;
    if !(tau > 0.0) {
        return Err(Error::param("tau", format!("must be > 0, got {tau}")));
    }
    let n = config.block_len() as f64;
    let residual = match conditioning {
        Conditioning::H0True => 0.0,
        Conditioning::H1True => residual_power(channel, attack, config),
    };
    let beta = channel.gain_w() * attack.lambda_t;
    let dof = 2.0 * n;
    let to_chi = |level: f64| 2.0 * n * level / channel.sigma_w_sq;

    let false_alarm = chi_squared(to_chi(tau - residual), dof)?;
    let missed = chi_squared(to_chi(tau - residual - beta), dof)?;
    let mut probs = ErrorProbabilities::new(
        false_alarm.upper,
        missed.lower,
        Phase::Communication,
        ProbabilityKind::Analytic,
    );
    probs.approximate = false_alarm.is_approximate() || missed.is_approximate();
    Ok(probs)
}

/// P_F† + P_M† at the optimal finite-n threshold when no pilot attack took place.
pub fn optimal_error_sum_unattacked(
    channel: &ChannelParams,
    lambda_t: f64,
    config: &SystemConfig,
) -> Result<ErrorProbabilities> {
    let attack = AttackParams::new(0.0, lambda_t)?;
    let tau = tau_dagger(channel, channel.h_w, lambda_t, config.block_len())?;
    analytic_error_probs(channel, &attack, config, tau, Conditioning::H0True)
}

/// Places τ(ε) relative to the limits of the statistic,
/// `ε²α_W²|h_W|²Λ_A + σ_W²` (under H̃₀) and that plus `α_W²|h_W|²Λ_T` (under H̃₁).
///
/// A threshold exactly on either limit is reported as `Detectable` with a
/// zero gap.
pub fn classify_regime(
    channel: &ChannelParams,
    attack: &AttackParams,
    config: &SystemConfig,
) -> Result<RegimeClassification> {
    let tau = tau_eps(channel, attack)?;
    let lower = residual_power(channel, attack, config) + channel.sigma_w_sq;
    let upper = lower + channel.gain_w() * attack.lambda_t;
    let delta_1_gap = (lower - tau) / channel.sigma_w_sq;
    let delta_2_gap = (tau - upper) / channel.sigma_w_sq;
    let regime = if delta_1_gap > 0.0 {
        Regime::BlindTestBelow
    } else if delta_2_gap > 0.0 {
        Regime::BlindTestAbove
    } else {
        if delta_1_gap == 0.0 || delta_2_gap == 0.0 {
            log::warn!("τ(ε) = {tau} lies exactly on a regime boundary; reporting Detectable");
        }
        Regime::Detectable
    };
    Ok(RegimeClassification {
        regime,
        delta_1_gap,
        delta_2_gap,
        tau_eps: tau,
    })
}

/// Laurent-Massart upper bound on `1 - (P_F + P_M)` at τ(ε) for the active
/// blind-test regime: `exp(-nΔ₁²/2)` below, `exp(-n(1 + Δ₂ - √(1 + 2Δ₂)))` above.
pub fn tail_bound_sum(channel: &ChannelParams, attack: &AttackParams, config: &SystemConfig) -> Result<f64> {
    let class = classify_regime(channel, attack, config)?;
    let n = config.block_len() as f64;
    match class.regime {
        Regime::BlindTestBelow => Ok((-0.5 * n * class.delta_1_gap.powi(2)).exp()),
        Regime::BlindTestAbove => {
            let d = class.delta_2_gap;
            // x solving 2n + 2√(2n·x) + 2x = 2n(1 + Δ₂)
            let exponent = 1.0 + d - (1.0 + 2.0 * d).sqrt();
            Ok((-n * exponent).exp())
        }
        Regime::Detectable => Err(Error::Domain(
            "tail bound applies only to the blind-test regimes".into(),
        )),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SqrtLawBound {
    /// `√n β/(√(2π)σ²) · (1 + β/(2σ²))ⁿ · e^{-nβ/(2σ²)}` with β = α_W²|h_W|²C/√n.
    pub finite_n: f64,
    /// `α_W²|h_W|²C/(√(2π)σ²) · exp(-α_W⁴|h_W|⁴C²/(8σ⁴))`.
    pub limit: f64,
}

/// Stirling-form bound on `1 - P_F† - P_M†` when ε = 0 and Λ_T = C/√n.
pub fn sqrt_law_bound(channel: &ChannelParams, c: f64, n: usize) -> Result<SqrtLawBound> {
    channel.validate()?;
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("must be > 0, got {c}")));
    }
    if n < 1 {
        return Err(Error::param("n", "must be >= 1"));
    }
    let nf = n as f64;
    let sigma_sq = channel.sigma_w_sq;
    let beta = channel.gain_w() * c / nf.sqrt();
    let half = beta / (2.0 * sigma_sq);
    let ln_finite = 0.5 * nf.ln() + beta.ln()
        - 0.5 * (2.0 * std::f64::consts::PI).ln()
        - sigma_sq.ln()
        + nf * crate::special::log1p_minus(half);
    Ok(SqrtLawBound {
        finite_n: ln_finite.exp(),
        limit: sqrt_law_limit(channel, c),
    })
}

/// n → ∞ value of the square-root-law bound as a function of C.
pub fn sqrt_law_limit(channel: &ChannelParams, c: f64) -> f64 {
    let k = channel.gain_w() / channel.sigma_w_sq;
    k * c / (2.0 * std::f64::consts::PI).sqrt() * (-(k * c).powi(2) / 8.0).exp()
}

/// Smallest C with [`sqrt_law_limit`] equal to `target`.
///
/// The limit rises from 0 to its peak `2/√(2π) e^{-1/2}` at C = 2σ²/(α_W²|h_W|²)
/// and decays afterwards; targets above the peak have no solution.
pub fn sqrt_law_c_for_limit(channel: &ChannelParams, target: f64) -> Result<f64> {
    channel.validate()?;
    let k = channel.gain_w() / channel.sigma_w_sq;
    if !(k > 0.0) {
        return Err(Error::Domain("Willie link has zero gain".into()));
    }
    let c_peak = 2.0 / k;
    let peak = sqrt_law_limit(channel, c_peak);
    if !(target > 0.0 && target < peak) {
        return Err(Error::Domain(format!(
            "target {target} outside (0, {peak}) reachable by the limit bound"
        )));
    }
    let (mut lo, mut hi) = (0.0, c_peak);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sqrt_law_limit(channel, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
