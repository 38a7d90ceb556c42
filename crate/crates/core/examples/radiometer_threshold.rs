//! The radiometer's optimal threshold at finite block length, its limit,
//! and the exact error probabilities it achieves.

use covert_pilot::detection::{analytic_error_probs, tau_dagger, tau_eps, Conditioning};
use covert_pilot::{AttackParams, ChannelParams, SystemConfig};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let attack = AttackParams::new(0.0, 0.05)?;
    println!("limit tau = {:.7}", tau_eps(&channel, &attack)?);

    println!("{:>8} {:>11} {:>11} {:>11} {:>11}", "n", "tau", "P_F", "P_M", "sum");
    for n in [10, 100, 1_000, 10_000, 100_000] {
        let config = SystemConfig::baseline(&channel)?.with_block_len(n)?;
        let tau = tau_dagger(&channel, channel.h_w, attack.lambda_t, n)?;
        let p = analytic_error_probs(&channel, &attack, &config, tau, Conditioning::H0True)?;
        println!("{n:>8} {tau:>11.7} {:>11.4e} {:>11.4e} {:>11.4e}", p.p_f, p.p_m, p.sum);
    }
    Ok(())
}
