//! Parameter containers and signal synthesis for both phases.
//!
//! Complex Gaussian convention: `CN(0, σ²)` has independent real and
//! imaginary parts, each `N(0, σ²/2)`, so `E|z|² = σ²`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{complex_gaussian, complex_gaussian_vec, rng_from_seed};

/// Propagation, noise and fading parameters of the Willie (W) and Eve (E) links.
///
/// Tom is co-located with Alice, so `h_w`/`alpha_w_sq` describe both the
/// Alice→Willie and Tom→Willie links (likewise for Eve).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChannelParams {
    /// Power propagation loss α_W².
    pub alpha_w_sq: f64,
    /// Power propagation loss α_E².
    pub alpha_e_sq: f64,
    /// Noise power at Willie, σ_W².
    pub sigma_w_sq: f64,
    /// Noise power at Eve, σ_E².
    pub sigma_e_sq: f64,
    /// Fading variance σ_H².
    pub sigma_h_sq: f64,
    /// Realized fading gain of the Willie link.
    pub h_w: Complex64,
    /// Realized fading gain of the Eve link.
    pub h_e: Complex64,
}

impl ChannelParams {
    pub fn new(
        alpha_w_sq: f64,
        alpha_e_sq: f64,
        sigma_w_sq: f64,
        sigma_e_sq: f64,
        sigma_h_sq: f64,
        h_w: Complex64,
        h_e: Complex64,
    ) -> Result<Self> {
        let params = Self {
            alpha_w_sq,
            alpha_e_sq,
            sigma_w_sq,
            sigma_e_sq,
            sigma_h_sq,
            h_w,
            h_e,
        };
        params.validate()?;
        Ok(params)
    }

    /// Symmetric baseline: α² = 0.1 and σ² = 0.1 on both links, unit
    /// fading variance and |h|² = 1.
    pub fn baseline() -> Self {
        Self {
            alpha_w_sq: 0.1,
            alpha_e_sq: 0.1,
            sigma_w_sq: 0.1,
            sigma_e_sq: 0.1,
            sigma_h_sq: 1.0,
            h_w: Complex64::new(1.0, 0.0),
            h_e: Complex64::new(1.0, 0.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha_w_sq", self.alpha_w_sq), ("alpha_e_sq", self.alpha_e_sq)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [
            ("sigma_w_sq", self.sigma_w_sq),
            ("sigma_e_sq", self.sigma_e_sq),
            ("sigma_h_sq", self.sigma_h_sq),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.h_w.re.is_finite() && self.h_w.im.is_finite()) {
            return Err(Error::param("h_w", "must be finite"));
        }
        if !(self.h_e.re.is_finite() && self.h_e.im.is_finite()) {
            return Err(Error::param("h_e", "must be finite"));
        }
        Ok(())
    }

    /// Replaces both realized gains with independent CN(0, σ_H²) draws.
    pub fn with_sampled_gains(mut self, seed: u64) -> Result<Self> {
        self.h_w = sample_fading(self.sigma_h_sq, crate::rng::derive_seed(seed, 0))?;
        self.h_e = sample_fading(self.sigma_h_sq, crate::rng::derive_seed(seed, 1))?;
        Ok(self)
    }

    /// Amplitude loss α_W.
    pub fn alpha_w(&self) -> f64 {
        self.alpha_w_sq.sqrt()
    }

    /// α_W² |h_W|².
    pub fn gain_w(&self) -> f64 {
        self.alpha_w_sq * self.h_w.norm_sqr()
    }

    /// α_E² |h_E|².
    pub fn gain_e(&self) -> f64 {
        self.alpha_e_sq * self.h_e.norm_sqr()
    }
}

/// Legitimate-link operating point and covertness budgets.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SystemConfig {
    lambda_a: f64,
    r_a: f64,
    delta_1: f64,
    delta_2: f64,
    pilot_len: usize,
    block_len: usize,
    pilot_power: f64,
}

/// Per-symbol pilot power used when none is configured.
pub const DEFAULT_PILOT_POWER: f64 = 1.0;

impl SystemConfig {
    /// Validates the budgets and Alice's link margin
    /// `r_a < log2(1 + α_W²|h_W|²Λ_A/σ_W²)` against `channel`.
    pub fn new(
        channel: &ChannelParams,
        lambda_a: f64,
        r_a: f64,
        delta_1: f64,
        delta_2: f64,
        pilot_len: usize,
        block_len: usize,
    ) -> Result<Self> {
        channel.validate()?;
        if !(lambda_a > 0.0 && lambda_a.is_finite()) {
            return Err(Error::param("lambda_a", format!("must be > 0, got {lambda_a}")));
        }
        if !(r_a > 0.0 && r_a.is_finite()) {
            return Err(Error::param("r_a", format!("must be > 0, got {r_a}")));
        }
        if !(0.0..1.0).contains(&delta_1) {
            return Err(Error::param("delta_1", format!("must lie in [0, 1), got {delta_1}")));
        }
        if !(delta_2 > 0.0 && delta_2 < 1.0) {
            return Err(Error::param("delta_2", format!("must lie in (0, 1), got {delta_2}")));
        }
        if pilot_len < 1 {
            return Err(Error::param("pilot_len", "must be >= 1"));
        }
        if block_len < 2 {
            return Err(Error::param("block_len", "must be >= 2"));
        }
        let capacity = alice_capacity(channel, lambda_a);
        if !(r_a < capacity) {
            return Err(Error::Config(format!(
                "link margin violated: r_a = {r_a} bpcu is not below the delay-limited capacity {capacity} bpcu"
            )));
        }
        if pilot_len >= block_len {
            log::warn!(
                "pilot_len ({pilot_len}) >= block_len ({block_len}); the analysis assumes L = o(n)"
            );
        }
        Ok(Self {
            lambda_a,
            r_a,
            delta_1,
            delta_2,
            pilot_len,
            block_len,
            pilot_power: DEFAULT_PILOT_POWER,
        })
    }

    /// Λ_A = 20 with R_A at 80% of the delay-limited capacity,
    /// δ₁ = 1/√10, δ₂ = 0.1, L = 64, n = 10⁴.
    pub fn baseline(channel: &ChannelParams) -> Result<Self> {
        let lambda_a = 20.0;
        let r_a = 0.8 * alice_capacity(channel, lambda_a);
        Self::new(channel, lambda_a, r_a, 1.0 / 10f64.sqrt(), 0.1, 64, 10_000)
    }

    pub fn with_pilot_power(mut self, pilot_power: f64) -> Result<Self> {
        if !(pilot_power > 0.0 && pilot_power.is_finite()) {
            return Err(Error::param("pilot_power", format!("must be > 0, got {pilot_power}")));
        }
        self.pilot_power = pilot_power;
        Ok(self)
    }

    pub fn with_block_len(mut self, block_len: usize) -> Result<Self> {
        if block_len < 2 {
            return Err(Error::param("block_len", "must be >= 2"));
        }
        self.block_len = block_len;
        Ok(self)
    }

    pub fn with_pilot_len(mut self, pilot_len: usize) -> Result<Self> {
        if pilot_len < 1 {
            return Err(Error::param("pilot_len", "must be >= 1"));
        }
        self.pilot_len = pilot_len;
        Ok(self)
    }

    pub fn lambda_a(&self) -> f64 {
        self.lambda_a
    }
    pub fn r_a(&self) -> f64 {
        self.r_a
    }
    pub fn delta_1(&self) -> f64 {
        self.delta_1
    }
    pub fn delta_2(&self) -> f64 {
        self.delta_2
    }
    pub fn pilot_len(&self) -> usize {
        self.pilot_len
    }
    pub fn block_len(&self) -> usize {
        self.block_len
    }
    pub fn pilot_power(&self) -> f64 {
        self.pilot_power
    }
}

/// Delay-limited capacity of the Alice→Willie link in bits per channel use.
pub fn alice_capacity(channel: &ChannelParams, lambda_a: f64) -> f64 {
    (channel.gain_w() * lambda_a / channel.sigma_w_sq).ln_1p() / std::f64::consts::LN_2
}

/// Tom's knobs: pilot scaling ε and transmit power Λ_T.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AttackParams {
    pub epsilon: f64,
    pub lambda_t: f64,
}

impl AttackParams {
    pub fn new(epsilon: f64, lambda_t: f64) -> Result<Self> {
        let attack = Self { epsilon, lambda_t };
        attack.validate()?;
        Ok(attack)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::param("epsilon", format!("must be finite and >= 0, got {}", self.epsilon)));
        }
        if !(self.lambda_t >= 0.0 && self.lambda_t.is_finite()) {
            return Err(Error::param("lambda_t", format!("must be finite and >= 0, got {}", self.lambda_t)));
        }
        Ok(())
    }

    /// (1 + ε)
    pub fn scale(&self) -> f64 {
        1.0 + self.epsilon
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Phase {
    Estimation,
    Communication,
}

/// H₀: pilot sent as is; H₁: pilot scaled by (1+ε).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum PilotHypothesis {
    H0,
    H1,
}

/// H̃₀: only Alice transmits; H̃₁: Tom transmits on top of Alice.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum CommHypothesis {
    H0,
    H1,
}

/// Which hypothesis a synthesized block was drawn under. The variant fixes the phase.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Hypothesis {
    Pilot(PilotHypothesis),
    Comm(CommHypothesis),
}

impl Hypothesis {
    pub fn phase(&self) -> Phase {
        match self {
            Hypothesis::Pilot(_) => Phase::Estimation,
            Hypothesis::Comm(_) => Phase::Communication,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SignalBlock {
    pub samples: Vec<Complex64>,
    pub phase: Phase,
    pub hypothesis: Option<Hypothesis>,
}

impl SignalBlock {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// ‖x‖²
    pub fn norm_sq(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }

    /// (1/len)‖x‖²
    pub fn power(&self) -> f64 {
        self.norm_sq() / self.len() as f64
    }
}

/// Draws one realized fading gain h ~ CN(0, σ_H²).
pub fn sample_fading(sigma_h_sq: f64, seed: u64) -> Result<Complex64> {
    if !(sigma_h_sq > 0.0 && sigma_h_sq.is_finite()) {
        return Err(Error::param("sigma_h_sq", format!("must be > 0, got {sigma_h_sq}")));
    }
    let mut rng = rng_from_seed(seed);
    Ok(complex_gaussian(&mut rng, sigma_h_sq))
}

/// Constant-amplitude real pilot `s_A,i = √pilot_power`, so ‖s_A‖² = L·pilot_power.
pub fn make_pilot(pilot_len: usize, pilot_power: f64) -> Result<SignalBlock> {
    if pilot_len < 1 {
        return Err(Error::param("pilot_len", "must be >= 1"));
    }
    if !(pilot_power > 0.0 && pilot_power.is_finite()) {
        return Err(Error::param("pilot_power", format!("must be > 0, got {pilot_power}")));
    }
    let amp = Complex64::new(pilot_power.sqrt(), 0.0);
    Ok(SignalBlock {
        samples: vec![amp; pilot_len],
        phase: Phase::Estimation,
        hypothesis: Some(Hypothesis::Pilot(PilotHypothesis::H0)),
    })
}

/// How the Gaussian channel inputs relate to the noise realization.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orthogonality {
    /// Plain independent draws; cross terms vanish only as n → ∞.
    #[default]
    Independent,
    /// x_A is projected orthogonal to z, and x_T orthogonal to both z and
    /// x_A, before power normalization. Noise statistics are untouched, so
    /// (1/n)‖z‖² is exactly σ_W²/(2n) · χ²(2n).
    Enforced,
}

/// A synthesized block together with the inputs that produced it.
#[derive(Clone, Debug)]
pub struct Transmission {
    pub received: SignalBlock,
    /// The pilot s_A (estimation phase) or Alice's codeword x_A (communication phase).
    pub alice: SignalBlock,
    /// Tom's codeword x_T under H̃₁.
    pub trojan: Option<SignalBlock>,
}

/// Synthesizes Willie's received block using independent input draws.
pub fn synthesize_received(
    config: &SystemConfig,
    channel: &ChannelParams,
    attack: &AttackParams,
    hypothesis: Hypothesis,
    seed: u64,
) -> Result<Transmission> {
    synthesize_received_with(config, channel, attack, hypothesis, seed, Orthogonality::Independent)
}

/// Synthesizes Willie's received block.
///
/// Estimation phase: `α_W h_W (1 + ε·1{H₁}) s_A + z`, length L.
/// Communication phase: `α_W h_W x_A (+ α_W h_W x_T under H̃₁) + z`, length n,
/// with x_A, x_T Gaussian and rescaled to block power exactly Λ_A, Λ_T.
///
/// Draw order is fixed (noise or x_A first, x_T last), so the same seed
/// yields the same x_A and z under H̃₀ and H̃₁, and the same z under H₀ and H₁.
pub fn synthesize_received_with(
    config: &SystemConfig,
    channel: &ChannelParams,
    attack: &AttackParams,
    hypothesis: Hypothesis,
    seed: u64,
    orthogonality: Orthogonality,
) -> Result<Transmission> {
    channel.validate()?;
    attack.validate()?;
    let gain = channel.alpha_w() * channel.h_w;
    let mut rng = rng_from_seed(seed);
    match hypothesis {
        Hypothesis::Pilot(h) => {
            let mut pilot = make_pilot(config.pilot_len(), config.pilot_power())?;
            let scale = match h {
                PilotHypothesis::H0 => 1.0,
                PilotHypothesis::H1 => attack.scale(),
            };
            let noise = complex_gaussian_vec(&mut rng, channel.sigma_w_sq, pilot.len());
            let samples = pilot
                .samples
                .iter()
                .zip(&noise)
                .map(|(s, z)| gain * scale * s + z)
                .collect();
            pilot.hypothesis = Some(hypothesis);
            Ok(Transmission {
                received: SignalBlock {
                    samples,
                    phase: Phase::Estimation,
                    hypothesis: Some(hypothesis),
                },
                alice: pilot,
                trojan: None,
            })
        }
        Hypothesis::Comm(h) => {
            let n = config.block_len();
            let raw_a = complex_gaussian_vec(&mut rng, 1.0, n);
            let noise = complex_gaussian_vec(&mut rng, channel.sigma_w_sq, n);
            let raw_t = match h {
                CommHypothesis::H0 => None,
                CommHypothesis::H1 => Some(complex_gaussian_vec(&mut rng, 1.0, n)),
            };
            let (x_a, x_t) = match orthogonality {
                Orthogonality::Independent => (
                    normalize_power(raw_a, config.lambda_a()),
                    raw_t.map(|t| normalize_power(t, attack.lambda_t)),
                ),
                Orthogonality::Enforced => {
                    let noise_dir = unit(&noise);
                    let a = normalize_power(project_out(raw_a, &[&noise_dir]), config.lambda_a());
                    let t = raw_t.map(|t| {
                        let a_dir = unit(&a);
                        normalize_power(project_out(t, &[&noise_dir, &a_dir]), attack.lambda_t)
                    });
                    (a, t)
                }
            };
            let mut samples: Vec<Complex64> =
                x_a.iter().zip(&noise).map(|(a, z)| gain * a + z).collect();
            if let Some(t) = &x_t {
                for (y, t) in samples.iter_mut().zip(t) {
                    *y += gain * t;
                }
            }
            let block = |samples| SignalBlock {
                samples,
                phase: Phase::Communication,
                hypothesis: Some(hypothesis),
            };
            Ok(Transmission {
                received: block(samples),
                alice: block(x_a),
                trojan: x_t.map(block),
            })
        }
    }
}

/// Rescales `v` so (1/len)‖v‖² equals `power` exactly. A zero vector or
/// zero power gives all zeros.
fn normalize_power(mut v: Vec<Complex64>, power: f64) -> Vec<Complex64> {
    let norm_sq: f64 = v.iter().map(|s| s.norm_sqr()).sum();
    if power == 0.0 || norm_sq == 0.0 {
        v.iter_mut().for_each(|s| *s = Complex64::new(0.0, 0.0));
        return v;
    }
    let k = (power * v.len() as f64 / norm_sq).sqrt();
    v.iter_mut().for_each(|s| *s *= k);
    v
}

fn unit(v: &[Complex64]) -> Vec<Complex64> {
    let norm = v.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return v.to_vec();
    }
    v.iter().map(|s| s / norm).collect()
}

/// Removes the components of `v` along each (orthonormal) direction.
fn project_out(mut v: Vec<Complex64>, directions: &[&[Complex64]]) -> Vec<Complex64> {
    for dir in directions {
        // <dir, v> = Σ conj(dir_i) v_i
        let coef: Complex64 = dir.iter().zip(&v).map(|(d, x)| d.conj() * x).sum();
        for (x, d) in v.iter_mut().zip(dir.iter()) {
            *x -= coef * d;
        }
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }

    #[test]
    fn fading_second_moment() {
        for &var in &[1.0, 0.25] {
            let draws = 1_000_000;
            let mut rng = rng_from_seed(5);
            let mean = (0..draws)
                .map(|_| complex_gaussian(&mut rng, var).norm_sqr())
                .sum::<f64>()
                / draws as f64;
            // |h|² is exponential with mean and std `var`
            let se = var / (draws as f64).sqrt();
            assert!((mean - var).abs() < 3.0 * se, "{mean} vs {var}");
        }
    }

    #[test]
    fn fading_is_reproducible_and_validated() {
        assert_eq!(sample_fading(1.0, 9).unwrap(), sample_fading(1.0, 9).unwrap());
        assert_ne!(sample_fading(1.0, 9).unwrap(), sample_fading(1.0, 10).unwrap());
        assert!(sample_fading(0.0, 1).is_err());
        assert!(sample_fading(-1.0, 1).is_err());
    }

    #[test]
    fn pilot_energy() {
        assert_eq!(make_pilot(4, 1.0).unwrap().norm_sq(), 4.0);
        assert!((make_pilot(100, 0.5).unwrap().norm_sq() - 50.0).abs() < 1e-12);
        let p = make_pilot(1, 2.0).unwrap();
        assert_eq!(p.samples, vec![Complex64::new(2f64.sqrt(), 0.0)]);
        assert!(make_pilot(0, 1.0).is_err());
        assert!(make_pilot(3, 0.0).is_err());
    }

    #[test]
    fn config_rejects_rate_above_capacity() {
        let ch = ChannelParams::baseline();
        let cap = alice_capacity(&ch, 20.0);
        assert!((cap - 21f64.log2()).abs() < 1e-12);
        assert!(SystemConfig::new(&ch, 20.0, cap, 0.1, 0.1, 8, 100).is_err());
        assert!(SystemConfig::new(&ch, 20.0, cap - 1e-9, 0.1, 0.1, 8, 100).is_ok());
        // lowering Λ_A below the configured rate's requirement
        assert!(matches!(
            SystemConfig::new(&ch, 5.0, 3.5, 0.1, 0.1, 8, 100),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn config_budget_domains() {
        let ch = ChannelParams::baseline();
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 1.0, 0.1, 8, 100).is_err());
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 0.0, 0.1, 8, 100).is_ok());
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 0.1, 0.0, 8, 100).is_err());
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 0.1, 0.1, 0, 100).is_err());
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 0.1, 0.1, 8, 1).is_err());
        // L >= n is allowed with a warning
        assert!(SystemConfig::new(&ch, 20.0, 1.0, 0.1, 0.1, 200, 100).is_ok());
    }

    #[test]
    fn zero_noise_pilot_is_scaled_pilot() {
        let mut ch = ChannelParams::baseline();
        ch.sigma_w_sq = 1e-300;
        ch.h_w = Complex64::new(0.3, -1.1);
        let cfg = SystemConfig::new(&ch, 20.0, 1.0, 0.1, 0.1, 16, 100).unwrap();
        let attack = AttackParams::new(0.2, 0.0).unwrap();
        for (hyp, scale) in [(PilotHypothesis::H0, 1.0), (PilotHypothesis::H1, 1.2)] {
            let tx = synthesize_received(&cfg, &ch, &attack, Hypothesis::Pilot(hyp), 3).unwrap();
            let expect = ch.alpha_w() * ch.h_w * scale;
            for y in &tx.received.samples {
                assert!((y - expect).norm() < 1e-140);
            }
        }
    }

    #[test]
    fn zero_scaling_makes_pilot_hypotheses_identical() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap();
        let attack = AttackParams::new(0.0, 0.3).unwrap();
        let h0 = synthesize_received(&cfg, &ch, &attack, Hypothesis::Pilot(PilotHypothesis::H0), 8).unwrap();
        let h1 = synthesize_received(&cfg, &ch, &attack, Hypothesis::Pilot(PilotHypothesis::H1), 8).unwrap();
        assert_eq!(h0.received.samples, h1.received.samples);
    }

    #[test]
    fn exact_block_powers() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap().with_block_len(5_000).unwrap();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        for orth in [Orthogonality::Independent, Orthogonality::Enforced] {
            let tx = synthesize_received_with(
                &cfg, &ch, &attack, Hypothesis::Comm(CommHypothesis::H1), 21, orth,
            )
            .unwrap();
            assert!((tx.alice.power() / 20.0 - 1.0).abs() < 1e-12);
            assert!((tx.trojan.as_ref().unwrap().power() / 0.3 - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn enforced_orthogonality_zeroes_cross_terms() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap().with_block_len(1_000).unwrap();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let tx = synthesize_received_with(
            &cfg, &ch, &attack, Hypothesis::Comm(CommHypothesis::H1), 4, Orthogonality::Enforced,
        )
        .unwrap();
        let x_a = &tx.alice.samples;
        let x_t = &tx.trojan.unwrap().samples;
        let gain = ch.alpha_w() * ch.h_w;
        let noise: Vec<Complex64> = tx
            .received
            .samples
            .iter()
            .zip(x_a.iter().zip(x_t))
            .map(|(y, (a, t))| y - gain * (a + t))
            .collect();
        let scale = 1e-12 * 1000.0 * 20.0;
        assert!(inner(x_a, &noise).norm() < scale);
        assert!(inner(x_t, &noise).norm() < scale);
        assert!(inner(x_a, x_t).norm() < scale);
    }

    #[test]
    fn same_seed_shares_alice_and_noise_across_comm_hypotheses() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap().with_block_len(64).unwrap();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let h0 = synthesize_received(&cfg, &ch, &attack, Hypothesis::Comm(CommHypothesis::H0), 2).unwrap();
        let h1 = synthesize_received(&cfg, &ch, &attack, Hypothesis::Comm(CommHypothesis::H1), 2).unwrap();
        assert_eq!(h0.alice.samples, h1.alice.samples);
        let gain = ch.alpha_w() * ch.h_w;
        let t = h1.trojan.unwrap();
        for i in 0..64 {
            let diff = h1.received.samples[i] - h0.received.samples[i] - gain * t.samples[i];
            assert!(diff.norm() < 1e-12);
        }
    }

    #[test]
    fn trojan_energy_shows_in_residual() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let tx = synthesize_received(&cfg, &ch, &attack, Hypothesis::Comm(CommHypothesis::H1), 13).unwrap();
        let gain = ch.alpha_w() * ch.h_w;
        let resid = tx
            .received
            .samples
            .iter()
            .zip(&tx.alice.samples)
            .map(|(y, a)| (y - gain * a).norm_sqr())
            .sum::<f64>()
            / cfg.block_len() as f64;
        let expect = ch.gain_w() * 0.3 + ch.sigma_w_sq;
        assert!((resid / expect - 1.0).abs() < 0.05, "{resid} vs {expect}");
    }

    #[test]
    fn empirical_noise_power() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap().with_block_len(100_000).unwrap();
        let silent = AttackParams::new(0.0, 0.0).unwrap();
        let tx = synthesize_received(&cfg, &ch, &silent, Hypothesis::Comm(CommHypothesis::H0), 77).unwrap();
        let gain = ch.alpha_w() * ch.h_w;
        let noise_power = tx
            .received
            .samples
            .iter()
            .zip(&tx.alice.samples)
            .map(|(y, a)| (y - gain * a).norm_sqr())
            .sum::<f64>()
            / 100_000.0;
        assert!((noise_power / ch.sigma_w_sq - 1.0).abs() < 0.01);
    }

    #[test]
    fn synthesis_is_deterministic() {
        let ch = ChannelParams::baseline();
        let cfg = SystemConfig::baseline(&ch).unwrap().with_block_len(256).unwrap();
        let attack = AttackParams::new(0.1, 0.3).unwrap();
        let hyp = Hypothesis::Comm(CommHypothesis::H1);
        let a = synthesize_received(&cfg, &ch, &attack, hyp, 99).unwrap();
        let b = synthesize_received(&cfg, &ch, &attack, hyp, 99).unwrap();
        assert_eq!(a.received, b.received);
    }
}
