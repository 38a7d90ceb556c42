//! Building every parameter set from a key = value configuration.

use covert_pilot::config::Settings;
use covert_pilot::rates::theorem1_feasibility;

const TEXT: &str = "
# weaker Willie link
alpha_w_sq = 0.05
lambda_a = 10
epsilon = 0.08
lambda_t = 0.05  # Trojan power
";

fn main() -> covert_pilot::Result<()> {
    let mut settings = Settings::default();
    settings.apply_str(TEXT)?;
    settings.apply_override("block_len=5000")?;

    let channel = settings.channel()?;
    let config = settings.system(&channel)?;
    let report = theorem1_feasibility(&channel, &settings.attack()?, &config)?;
    println!("R_A = {:.4} bits per channel use", config.r_a());
    match report.first_failing() {
        None => println!("feasible, TIN rate {:.5}", report.r_t_tin),
        Some(c) => println!("infeasible: {} fails", c.as_str()),
    }

    match Settings::default().apply_str("unknown_key = 1") {
        Err(e) => println!("rejected: {e}"),
        Ok(()) => unreachable!(),
    }
    Ok(())
}
