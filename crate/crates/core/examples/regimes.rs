//! Where the mismatched threshold lands relative to the statistic, with the
//! tail bound on Willie's advantage in the blind regimes.

use covert_pilot::detection::{classify_regime, tail_bound_sum, Regime};
use covert_pilot::{AttackParams, ChannelParams, SystemConfig};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let config = SystemConfig::baseline(&channel)?;

    for (eps, lt) in [(0.0, 0.3), (0.05, 0.3), (0.1, 0.3), (0.1, 1.0), (0.2, 0.1)] {
        let attack = AttackParams::new(eps, lt)?;
        let c = classify_regime(&channel, &attack, &config)?;
        let bound = match c.regime {
            Regime::Detectable => "-".to_string(),
            _ => format!("{:.3e}", tail_bound_sum(&channel, &attack, &config)?),
        };
        println!(
            "eps {eps:<5} lambda_t {lt:<4} {:?}: gaps ({:+.5}, {:+.5}) bound {bound}",
            c.regime, c.delta_1_gap, c.delta_2_gap
        );
    }
    Ok(())
}
