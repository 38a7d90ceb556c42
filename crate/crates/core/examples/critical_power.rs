//! Largest Trojan power that keeps Willie blind, per pilot-scaling factor,
//! and the rates available at a feasible point.

use covert_pilot::rates::{solve_lambda_star, theorem1_feasibility};
use covert_pilot::{AttackParams, ChannelParams, SystemConfig};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let config = SystemConfig::baseline(&channel)?;

    for eps in [0.02, 0.05, 0.1, 0.15, 0.2] {
        let cp = solve_lambda_star(&channel, &config, eps)?;
        println!("eps {eps:<5} lambda* = {:.6}", cp.lambda_star);
    }

    let report = theorem1_feasibility(&channel, &AttackParams::new(0.1, 0.3)?, &config)?;
    println!("\n{}", serde_json::to_string_pretty(&report)?);
    if let Some(c) = report.first_failing() {
        println!("fails at {}", c.as_str());
    }
    Ok(())
}
