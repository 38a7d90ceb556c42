use num_complex::Complex64;
use proptest::prelude::*;

use covert_pilot::channel::{
    make_pilot, synthesize_received, CommHypothesis, Hypothesis, Phase, PilotHypothesis, SignalBlock,
};
use covert_pilot::detection::{
    analytic_error_probs, classify_regime, optimal_error_sum_unattacked, tau_dagger, tau_eps, Conditioning,
    Regime,
};
use covert_pilot::montecarlo::{mc_comm_error_probs, McConfig, McTarget};
use covert_pilot::pilot::{kl_pilot_exact, kl_pilot_limit, mmse_estimate, mmse_limit};
use covert_pilot::rates::{theorem1_feasibility, willie_sinr};
use covert_pilot::rng::derive_seed;
use covert_pilot::special::regularized_gamma;
use covert_pilot::{AttackParams, ChannelParams, SystemConfig};

fn channel_strategy() -> impl Strategy<Value = ChannelParams> {
    (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0, 0.2f64..3.0, 0.0f64..6.28).prop_map(
        |(aw, ae, sw, se, mag, phase)| {
            let h = Complex64::from_polar(mag, phase);
            ChannelParams::new(aw, ae, sw, se, 1.0, h, h.conj()).unwrap()
        },
    )
}

fn baseline() -> (ChannelParams, SystemConfig) {
    let ch = ChannelParams::baseline();
    let cfg = SystemConfig::baseline(&ch).unwrap();
    (ch, cfg)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn kl_limit_below_quadratic_bound(eps in 0.0f64..2.0) {
        let limit = kl_pilot_limit(eps).unwrap();
        prop_assert!(limit >= 0.0);
        prop_assert!(limit <= 2.0 * eps * eps);
    }

    #[test]
    fn kl_limit_increasing(eps in 0.0f64..2.0, step in 1e-6f64..0.5) {
        prop_assert!(kl_pilot_limit(eps + step).unwrap() > kl_pilot_limit(eps).unwrap());
    }

    #[test]
    fn kl_exact_grows_with_pilot_length(ch in channel_strategy(), eps in 0.0f64..1.5, l in 1usize..2000) {
        let a = AttackParams::new(eps, 0.0).unwrap();
        let short = kl_pilot_exact(&ch, &a, &make_pilot(l, 1.0).unwrap()).unwrap();
        let long = kl_pilot_exact(&ch, &a, &make_pilot(l + 1, 1.0).unwrap()).unwrap();
        let limit = kl_pilot_limit(eps).unwrap();
        prop_assert!(short <= long);
        prop_assert!(long <= limit * (1.0 + 1e-12));
    }

    #[test]
    fn noiseless_estimate_error_halves_with_energy(ch in channel_strategy(), eps in 0.0f64..1.0, l in 200usize..2000) {
        let attack = AttackParams::new(eps, 0.0).unwrap();
        let error = |l: usize| {
            let pilot = make_pilot(l, 1.0).unwrap();
            let gain = ch.alpha_w() * attack.scale() * ch.h_w;
            let received = SignalBlock {
                samples: pilot.samples.iter().map(|s| gain * s).collect(),
                phase: Phase::Estimation,
                hypothesis: Some(Hypothesis::Pilot(PilotHypothesis::H1)),
            };
            let est = mmse_estimate(&ch, &attack, &pilot, &received).unwrap();
            (est.h_hat - mmse_limit(&ch, &attack, PilotHypothesis::H1)).norm()
        };
        let ratio = error(2 * l) / error(l);
        // |ĥ - ĥ∞| = |ĥ∞|/(1 + a‖s‖²), so the ratio is (1 + aS)/(1 + 2aS)
        prop_assert!(ratio > 0.5 && ratio < 1.0, "ratio {}", ratio);
        prop_assert!(error(4 * l) / error(2 * l) < ratio);
    }

    #[test]
    fn thresholds_are_ordered(ch in channel_strategy(), eps in 0.0f64..0.5, lt in 1e-4f64..3.0, n in 2usize..1_000_000) {
        let attack = AttackParams::new(eps, lt).unwrap();
        let h_hat = attack.scale() * ch.h_w;
        let beta = ch.alpha_w_sq * h_hat.norm_sqr() * lt;
        let finite = tau_dagger(&ch, h_hat, lt, n).unwrap();
        let limit = tau_eps(&ch, &attack).unwrap();
        let k = n as f64 / (n as f64 - 1.0);
        let tol = 1e-12 * finite;
        prop_assert!(finite >= beta - tol && finite <= beta + ch.sigma_w_sq / k + tol);
        prop_assert!(finite <= limit + tol);
        prop_assert!(tau_dagger(&ch, h_hat, lt, n + 1).unwrap() >= finite);
    }

    #[test]
    fn tau_eps_monotone(ch in channel_strategy(), eps in 0.0f64..0.5, lt in 1e-4f64..3.0, d in 1e-4f64..0.5) {
        let base = tau_eps(&ch, &AttackParams::new(eps, lt).unwrap()).unwrap();
        prop_assert!(tau_eps(&ch, &AttackParams::new(eps + d, lt).unwrap()).unwrap() > base);
        prop_assert!(tau_eps(&ch, &AttackParams::new(eps, lt + d).unwrap()).unwrap() > base);
    }

    #[test]
    fn error_probabilities_are_probabilities(eps in 0.0f64..0.3, lt in 0.0f64..2.0, tau in 0.01f64..3.0, n in 2usize..200_000) {
        let (ch, cfg) = baseline();
        let cfg = cfg.with_block_len(n).unwrap();
        let a = AttackParams::new(eps, lt).unwrap();
        for cond in [Conditioning::H0True, Conditioning::H1True] {
            let p = analytic_error_probs(&ch, &a, &cfg, tau, cond).unwrap();
            prop_assert!((0.0..=1.0).contains(&p.p_f) && (0.0..=1.0).contains(&p.p_m));
            prop_assert_eq!(p.sum, p.p_f + p.p_m);
        }
    }

    #[test]
    fn optimal_sum_falls_with_trojan_power(lt in 1e-3f64..1.0, d in 1e-3f64..1.0, exp in 2u32..5) {
        let (ch, cfg) = baseline();
        let cfg = cfg.with_block_len(10usize.pow(exp)).unwrap();
        let weak = optimal_error_sum_unattacked(&ch, lt, &cfg).unwrap().sum;
        let strong = optimal_error_sum_unattacked(&ch, lt + d, &cfg).unwrap().sum;
        prop_assert!(strong <= weak);
    }

    #[test]
    fn blind_regime_tail_bound(eps in 0.0f64..0.25, lt in 1e-3f64..1.0) {
        let (ch, cfg) = baseline();
        let cfg = cfg.with_block_len(100_000).unwrap();
        let a = AttackParams::new(eps, lt).unwrap();
        let class = classify_regime(&ch, &a, &cfg).unwrap();
        if class.regime == Regime::BlindTestBelow {
            let sum = analytic_error_probs(&ch, &a, &cfg, class.tau_eps, Conditioning::H1True).unwrap().sum;
            let bound = (-(cfg.block_len() as f64) * class.delta_1_gap.powi(2) / 2.0).exp();
            prop_assert!(sum >= 1.0 - bound - 1e-12, "sum {} bound {}", sum, bound);
        }
    }

    #[test]
    fn regime_matches_gaps(ch in channel_strategy(), eps in 0.0f64..0.5, lt in 0.0f64..2.0) {
        let cfg = SystemConfig::new(&ch, 5.0, 1e-3, 0.3, 0.1, 16, 1000).unwrap();
        let c = classify_regime(&ch, &AttackParams::new(eps, lt).unwrap(), &cfg).unwrap();
        match c.regime {
            Regime::BlindTestBelow => prop_assert!(c.delta_1_gap > 0.0),
            Regime::BlindTestAbove => prop_assert!(c.delta_2_gap > 0.0),
            Regime::Detectable => prop_assert!(c.delta_1_gap <= 0.0 && c.delta_2_gap <= 0.0),
        }
    }

    #[test]
    fn feasibility_report_consistent(eps in 0.0f64..0.3, lt in 0.0f64..1.2) {
        let (ch, cfg) = baseline();
        let r = theorem1_feasibility(&ch, &AttackParams::new(eps, lt).unwrap(), &cfg).unwrap();
        prop_assert_eq!(r.feasible, r.first_failing().is_none());
        prop_assert!(r.r_t_ic >= r.r_t_tin);
        if r.cond_eve_ic && lt > 0.0 {
            prop_assert!(r.r_t_ic > r.r_t_tin);
        }
        if r.feasible {
            prop_assert!(r.r_t_tin > 0.0);
            let capacity = (1.0 + ch.gain_w() * cfg.lambda_a() / ch.sigma_w_sq).log2();
            prop_assert!(cfg.r_a() < capacity);
        }
    }

    #[test]
    fn feasibility_survives_less_power(eps in 0.0f64..0.3, lt in 0.0f64..1.2, frac in 0.0f64..1.0) {
        let (ch, cfg) = baseline();
        let r = theorem1_feasibility(&ch, &AttackParams::new(eps, lt).unwrap(), &cfg).unwrap();
        if r.feasible {
            let lower = theorem1_feasibility(&ch, &AttackParams::new(eps, lt * frac).unwrap(), &cfg).unwrap();
            prop_assert!(lower.cond_blind_comm && lower.cond_no_disruption);
            prop_assert_eq!(lower.cond_pilot_covert, r.cond_pilot_covert);
        }
    }

    #[test]
    fn sinr_decreases_with_attack(eps in 0.0f64..0.5, lt in 0.0f64..2.0, d in 1e-3f64..0.5) {
        let (ch, cfg) = baseline();
        let g = willie_sinr(&ch, &AttackParams::new(eps, lt).unwrap(), &cfg);
        prop_assert!(willie_sinr(&ch, &AttackParams::new(eps + d, lt).unwrap(), &cfg) < g);
        prop_assert!(willie_sinr(&ch, &AttackParams::new(eps, lt + d).unwrap(), &cfg) < g);
    }

    #[test]
    fn incomplete_gamma_tails(a in 0.05f64..5e5, frac in 0.0f64..3.0, d in 1e-3f64..1.0) {
        let x = a * frac;
        let t = regularized_gamma(a, x).unwrap();
        prop_assert!((t.lower + t.upper - 1.0).abs() < 1e-14);
        prop_assert!(t.lower >= 0.0 && t.upper >= 0.0);
        let t2 = regularized_gamma(a, x + d * a.sqrt()).unwrap();
        prop_assert!(t2.lower >= t.lower - 1e-15);
    }

    #[test]
    fn synthesized_powers_exact(eps in 0.0f64..0.5, lt in 0.01f64..2.0, n in 2usize..3000, seed in any::<u64>()) {
        let (ch, cfg) = baseline();
        let cfg = cfg.with_block_len(n).unwrap();
        let a = AttackParams::new(eps, lt).unwrap();
        let tx = synthesize_received(&cfg, &ch, &a, Hypothesis::Comm(CommHypothesis::H1), seed).unwrap();
        prop_assert!((tx.alice.power() - cfg.lambda_a()).abs() <= 1e-12 * cfg.lambda_a());
        let t = tx.trojan.unwrap();
        prop_assert!((t.power() - lt).abs() <= 1e-12 * lt);
        let again = synthesize_received(&cfg, &ch, &a, Hypothesis::Comm(CommHypothesis::H1), seed).unwrap();
        prop_assert_eq!(tx.received.samples, again.received.samples);
    }

    #[test]
    fn derived_seeds_distinct(parent in any::<u64>(), i in 0u64..1_000_000) {
        prop_assert_ne!(derive_seed(parent, i), derive_seed(parent, i + 1));
        prop_assert_eq!(derive_seed(parent, i), derive_seed(parent, i));
    }
}

#[test]
fn monte_carlo_agrees_in_most_randomized_runs() {
    // 20 independent runs at a short block, where both error types are common
    let (ch, cfg) = baseline();
    let attack = AttackParams::new(0.1, 0.3).unwrap();
    let mut agree = 0;
    for run in 0..20 {
        let mc = McConfig::new(McTarget::CommDetection, 400, 900 + run).with_n(40);
        let r = mc_comm_error_probs(&ch, &attack, &cfg, &mc).unwrap();
        if r.sum.z_score().unwrap() <= 4.0 {
            agree += 1;
        }
    }
    assert!(agree >= 19, "{agree} of 20 runs within 4 SE");
}

#[test]
fn kl_exact_converges_to_limit() {
    let ch = ChannelParams::baseline();
    for eps in [0.05, 0.1, 0.5, 1.0] {
        let a = AttackParams::new(eps, 0.0).unwrap();
        let exact = kl_pilot_exact(&ch, &a, &make_pilot(100_000, 1.0).unwrap()).unwrap();
        assert!((exact - kl_pilot_limit(eps).unwrap()).abs() <= 1e-3);
    }
}
