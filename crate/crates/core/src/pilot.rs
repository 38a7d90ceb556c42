//! Estimation-phase analysis: covertness of the pilot scaling and Willie's
//! MMSE channel estimate.
//!
//! All divergences are in nats. Every closed form depends on the pilot only
//! through its energy ‖s_A‖², so nothing here is quadratic in L except
//! [`PilotCovariances`], which exists for the dense Monte Carlo path.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::channel::{AttackParams, ChannelParams, Hypothesis, PilotHypothesis, SignalBlock};
use crate::error::{Error, Result};
use crate::special::log1p_minus;

/// Largest pilot length for which dense L×L covariances are built.
pub const DENSE_PILOT_LIMIT: usize = 256;

/// α_W² σ_H² / σ_W²: per-unit-energy pilot SNR.
fn pilot_snr(channel: &ChannelParams) -> f64 {
    channel.alpha_w_sq * channel.sigma_h_sq / channel.sigma_w_sq
}

/// Eigenvalue offset shared by det(Σ₁⁻¹Σ₀) and tr(Σ₁⁻¹Σ₀):
/// both equal `1 - u` and `L - u` respectively.
fn rank_one_offset(snr: f64, energy: f64, epsilon: f64) -> f64 {
    let scale_sq = (1.0 + epsilon) * (1.0 + epsilon);
    snr * epsilon * (2.0 + epsilon) * energy / (1.0 + snr * scale_sq * energy)
}

/// Finite-L divergence between the received-pilot laws under the two
/// hypotheses, `-log|Σ₁⁻¹Σ₀| - L + tr(Σ₁⁻¹Σ₀)`.
///
/// Uses the rank-one structure of `s_A s_Aᴴ`: with
/// `u = a ε(2+ε)‖s‖² / (1 + a(1+ε)²‖s‖²)` the expression reduces to
/// `-ln(1-u) - u`. As an expectation this is `E_{P₀}[ln p₀/p₁]`; its limit
/// in ‖s‖² is [`kl_pilot_limit`].
pub fn kl_pilot_exact(channel: &ChannelParams, attack: &AttackParams, pilot: &SignalBlock) -> Result<f64> {
    channel.validate()?;
    attack.validate()?;
    if pilot.is_empty() {
        return Err(Error::param("pilot", "must be nonempty"));
    }
    let u = rank_one_offset(pilot_snr(channel), pilot.norm_sq(), attack.epsilon);
    Ok(-log1p_minus(-u))
}

/// `D(P₁‖P₀)` as defined above, i.e. `E_{P₁}[ln p₁/p₀]`, closed form.
///
/// Along the pilot direction the eigenvalue ratio is
/// `r = (1 + a(1+ε)²‖s‖²) / (1 + a‖s‖²)` and the divergence is `r - 1 - ln r`.
pub fn kl_pilot_exact_reverse(
    channel: &ChannelParams,
    attack: &AttackParams,
    pilot: &SignalBlock,
) -> Result<f64> {
    channel.validate()?;
    attack.validate()?;
    if pilot.is_empty() {
        return Err(Error::param("pilot", "must be nonempty"));
    }
    let a = pilot_snr(channel);
    let s = pilot.norm_sq();
    let eps = attack.epsilon;
    let t = a * eps * (2.0 + eps) * s / (1.0 + a * s); // r - 1
    Ok(-log1p_minus(t))
}

/// `lim_{‖s‖²→∞}` of [`kl_pilot_exact`]: `2 ln(1+ε) - 1 + (1+ε)⁻²`.
pub fn kl_pilot_limit(epsilon: f64) -> Result<f64> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::param("epsilon", format!("must be finite and >= 0, got {epsilon}")));
    }
    // same as -ln(1-u) - u with u = 1 - (1+ε)⁻², evaluated without cancellation
    let u = epsilon * (2.0 + epsilon) / ((1.0 + epsilon) * (1.0 + epsilon));
    Ok(-log1p_minus(-u))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovertnessMargin {
    /// ε ≤ δ₁/√2
    pub covert: bool,
    /// 2ε², an upper bound on the limiting divergence.
    pub kl_bound: f64,
    pub kl_limit: f64,
}

/// Checks the pilot-phase budget. With δ₁ = 0 only ε = 0 passes.
pub fn covertness_margin(epsilon: f64, delta_1: f64) -> Result<CovertnessMargin> {
    if !(0.0..1.0).contains(&delta_1) {
        return Err(Error::param("delta_1", format!("must lie in [0, 1), got {delta_1}")));
    }
    let kl_limit = kl_pilot_limit(epsilon)?;
    let kl_bound = 2.0 * epsilon * epsilon;
    assert!(
        kl_limit <= kl_bound,
        "limiting divergence {kl_limit} exceeds 2ε² = {kl_bound}"
    );
    let covert = if delta_1 == 0.0 {
        epsilon == 0.0
    } else {
        epsilon <= delta_1 / std::f64::consts::SQRT_2
    };
    Ok(CovertnessMargin {
        covert,
        kl_bound,
        kl_limit,
    })
}

/// Willie's estimate and its decomposition `ĥ = bias_factor · h_W + noise_term`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub h_hat: Complex64,
    /// Multiplier of h_W in the noiseless part:
    /// `a‖s‖²/(1 + a‖s‖²)` under H₀, times (1+ε) under H₁.
    pub bias_factor: f64,
    /// Filtered noise `α_W σ_H²/(σ_W² + α_W²σ_H²‖s‖²) · s_Aᴴ z`.
    pub noise_term: Complex64,
    pub hypothesis: PilotHypothesis,
}

/// Linear MMSE estimate of h_W computed under the H₀ model:
/// `ĥ = α_W σ_H² / (σ_W² + α_W² σ_H² ‖s‖²) · s_Aᴴ y`.
///
/// The report's bias/noise split uses the hypothesis the block was drawn
/// under (H₀ when untagged) and the realized `channel.h_w`.
pub fn mmse_estimate(
    channel: &ChannelParams,
    attack: &AttackParams,
    pilot: &SignalBlock,
    received: &SignalBlock,
) -> Result<EstimateReport> {
    channel.validate()?;
    if pilot.is_empty() {
        return Err(Error::param("pilot", "must be nonempty"));
    }
    if received.len() != pilot.len() {
        return Err(Error::param(
            "received",
            format!("length {} does not match pilot length {}", received.len(), pilot.len()),
        ));
    }
    let hypothesis = match received.hypothesis {
        Some(Hypothesis::Pilot(h)) => h,
        None => PilotHypothesis::H0,
        Some(Hypothesis::Comm(_)) => {
            return Err(Error::param("received", "communication-phase block given to the pilot estimator"))
        }
    };
    let energy = pilot.norm_sq();
    let coef = channel.alpha_w() * channel.sigma_h_sq
        / (channel.sigma_w_sq + channel.alpha_w_sq * channel.sigma_h_sq * energy);
    let corr: Complex64 = pilot
        .samples
        .iter()
        .zip(&received.samples)
        .map(|(s, y)| s.conj() * y)
        .sum();
    let h_hat = corr * coef;
    let a_s = pilot_snr(channel) * energy;
    let scale = match hypothesis {
        PilotHypothesis::H0 => 1.0,
        PilotHypothesis::H1 => attack.scale(),
    };
    let bias_factor = scale * a_s / (1.0 + a_s);
    Ok(EstimateReport {
        h_hat,
        bias_factor,
        noise_term: h_hat - bias_factor * channel.h_w,
        hypothesis,
    })
}

/// Limit of the estimate as ‖s‖² → ∞: h_W under H₀, (1+ε)h_W under H₁.
pub fn mmse_limit(channel: &ChannelParams, attack: &AttackParams, hypothesis: PilotHypothesis) -> Complex64 {
    match hypothesis {
        PilotHypothesis::H0 => channel.h_w,
        PilotHypothesis::H1 => attack.scale() * channel.h_w,
    }
}

/// Dense Σ₀ = α_W²σ_H² s sᴴ + σ_W² I and Σ₁ (with the (1+ε)² factor),
/// plus their Cholesky factors for density evaluation.
#[derive(Clone, Debug)]
pub struct PilotCovariances {
    pub sigma0: DMatrix<Complex64>,
    pub sigma1: DMatrix<Complex64>,
    chol0: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
    chol1: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
    logdet0: f64,
    logdet1: f64,
}

impl PilotCovariances {
    pub fn build(channel: &ChannelParams, attack: &AttackParams, pilot: &SignalBlock) -> Result<Self> {
        channel.validate()?;
        attack.validate()?;
        let l = pilot.len();
        if l == 0 || l > DENSE_PILOT_LIMIT {
            return Err(Error::param(
                "pilot",
                format!("dense covariances need 1 <= L <= {DENSE_PILOT_LIMIT}, got {l}"),
            ));
        }
        let s = nalgebra::DVector::from_column_slice(&pilot.samples);
        let outer = &s * s.adjoint();
        let eye = DMatrix::<Complex64>::identity(l, l) * Complex64::new(channel.sigma_w_sq, 0.0);
        let c0 = channel.alpha_w_sq * channel.sigma_h_sq;
        let c1 = c0 * attack.scale() * attack.scale();
        let sigma0 = &outer * Complex64::new(c0, 0.0) + &eye;
        let sigma1 = &outer * Complex64::new(c1, 0.0) + &eye;
        let chol0 = nalgebra::Cholesky::new(sigma0.clone())
            .ok_or_else(|| Error::Domain("Σ₀ is not positive definite".into()))?;
        let chol1 = nalgebra::Cholesky::new(sigma1.clone())
            .ok_or_else(|| Error::Domain("Σ₁ is not positive definite".into()))?;
        let logdet = |c: &nalgebra::Cholesky<Complex64, nalgebra::Dyn>| {
            2.0 * c.l_dirty().diagonal().iter().map(|d| d.re.ln()).sum::<f64>()
        };
        let logdet0 = logdet(&chol0);
        let logdet1 = logdet(&chol1);
        Ok(Self {
            sigma0,
            sigma1,
            chol0,
            chol1,
            logdet0,
            logdet1,
        })
    }

    pub fn len(&self) -> usize {
        self.sigma0.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `tr(Σ₁⁻¹Σ₀) - L + ln|Σ₁| - ln|Σ₀|` evaluated densely.
    pub fn divergence_01(&self) -> f64 {
        let ratio = self.chol1.solve(&self.sigma0);
        ratio.trace().re - self.len() as f64 + self.logdet1 - self.logdet0
    }

    /// `ln p₀(y) - ln p₁(y)` for zero-mean circular Gaussians with Σ₀, Σ₁.
    pub fn log_likelihood_ratio_01(&self, y: &[Complex64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(y);
        let quad = |c: &nalgebra::Cholesky<Complex64, nalgebra::Dyn>| {
            // yᴴ Σ⁻¹ y = ‖L⁻¹ y‖²
            let w = c.l().solve_lower_triangular(&v).expect("Cholesky factor is invertible");
            w.iter().map(|x| x.norm_sqr()).sum::<f64>()
        };
        let q0 = quad(&self.chol0);
        let q1 = quad(&self.chol1);
        (self.logdet1 - self.logdet0) - q0 + q1
    }
}
