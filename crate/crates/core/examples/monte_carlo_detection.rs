//! Simulated radiometer at the operating point ε = 0.1, Λ_T = 0.3, against
//! the exact error probabilities. Results do not depend on the thread count.

use covert_pilot::montecarlo::{mc_comm_error_probs, McConfig, McTarget};
use covert_pilot::{AttackParams, ChannelParams, SystemConfig};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let config = SystemConfig::baseline(&channel)?;
    let attack = AttackParams::new(0.1, 0.3)?;

    for n in [1_000, 10_000] {
        let mc = McConfig::new(McTarget::CommDetection, 2000, 5).with_n(n);
        let r = mc_comm_error_probs(&channel, &attack, &config, &mc)?;
        println!(
            "n {n:>6}: P_F {:.4} P_M {:.4} sum {:.4} ± {:.4} (exact {:.4})",
            r.p_f.point_estimate,
            r.p_m.point_estimate,
            r.sum.point_estimate,
            r.sum.std_error,
            r.sum.analytic_reference.unwrap()
        );
    }

    let mut mc = McConfig::new(McTarget::CommDetection, 2000, 5).with_n(1_000);
    mc.two_phase = true;
    let r = mc_comm_error_probs(&channel, &attack, &config, &mc)?;
    println!(
        "two-phase (estimated channel): sum {:.4} ± {:.4}",
        r.sum.point_estimate, r.sum.std_error
    );
    Ok(())
}
