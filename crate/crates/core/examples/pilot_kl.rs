//! How much the pilot-scaling attack leaks: exact divergence against pilot
//! length, its limit, and a Monte Carlo estimate of the same quantity.

use covert_pilot::channel::make_pilot;
use covert_pilot::montecarlo::{mc_pilot_kl, McConfig, McTarget};
use covert_pilot::pilot::{covertness_margin, kl_pilot_exact, kl_pilot_limit};
use covert_pilot::{AttackParams, ChannelParams};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let delta_1 = 1.0 / 10f64.sqrt();

    println!("{:>6} {:>6} {:>12} {:>12}", "eps", "L", "exact", "limit");
    for eps in [0.05, 0.1, 0.2] {
        let attack = AttackParams::new(eps, 0.0)?;
        let limit = kl_pilot_limit(eps)?;
        for l in [8, 64, 512, 4096] {
            let exact = kl_pilot_exact(&channel, &attack, &make_pilot(l, 1.0)?)?;
            println!("{eps:>6} {l:>6} {exact:>12.6e} {limit:>12.6e}");
        }
        let margin = covertness_margin(eps, delta_1)?;
        println!("       covert under delta_1 = {delta_1:.4}: {}", margin.covert);
    }

    let attack = AttackParams::new(0.1, 0.0)?;
    let mc = McConfig::new(McTarget::PilotKl, 20_000, 7).with_l(32);
    let r = mc_pilot_kl(&channel, &attack, 32, &mc)?;
    println!(
        "\nMonte Carlo at L = 32: {:.5} ± {:.5} (exact {:.5})",
        r.point_estimate,
        r.std_error,
        r.analytic_reference.unwrap()
    );
    Ok(())
}
