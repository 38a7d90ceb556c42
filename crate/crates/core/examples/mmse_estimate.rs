//! Willie's channel estimate under an attacked pilot. The estimate converges
//! to (1+ε)h_W instead of h_W, and its error shrinks like 1/L.

use covert_pilot::channel::{make_pilot, PilotHypothesis};
use covert_pilot::montecarlo::{mc_estimator_error, McConfig, McTarget};
use covert_pilot::pilot::mmse_limit;
use covert_pilot::{AttackParams, ChannelParams};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let attack = AttackParams::new(0.1, 0.0)?;
    let pilot = make_pilot(64, 1.0)?;
    println!("pilot energy {:.1}", pilot.norm_sq());
    println!("limit under H0: {}", mmse_limit(&channel, &attack, PilotHypothesis::H0));
    println!("limit under H1: {}", mmse_limit(&channel, &attack, PilotHypothesis::H1));

    let mc = McConfig::new(McTarget::EstimatorError, 2000, 3);
    let table = mc_estimator_error(&channel, &attack, &[16, 64, 256, 1024, 4096], &mc)?;
    println!("\n{:>6} {:>12} {:>12} {:>12}", "L", "mse_h0", "mse_h1", "analytic");
    for row in &table.rows {
        println!(
            "{:>6} {:>12.4e} {:>12.4e} {:>12.4e}",
            row.l,
            row.mse_h0.point_estimate,
            row.mse_h1.point_estimate,
            row.mse_h1.analytic_reference.unwrap_or(f64::NAN)
        );
    }
    println!("log-log slopes: {:.3} (H0), {:.3} (H1)", table.slope_h0, table.slope_h1);
    Ok(())
}
