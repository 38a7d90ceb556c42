//! No pilot attack: Trojan power shrinking with block length. Faster than
//! 1/√n keeps Willie blind, slower lets him detect, and exactly 1/√n leaves
//! a constant advantage.

use covert_pilot::detection::sqrt_law_c_for_limit;
use covert_pilot::montecarlo::{mc_sqrt_law, McConfig, McTarget};
use covert_pilot::rates::theorem2_scaling;
use covert_pilot::{ChannelParams, SystemConfig};

fn main() -> covert_pilot::Result<()> {
    let channel = ChannelParams::baseline();
    let config = SystemConfig::baseline(&channel)?;
    let grid = [100, 1_000, 10_000, 100_000, 1_000_000];

    for exponent in [0.25, 0.5, 0.75] {
        println!("lambda_t = n^-{exponent}");
        for row in theorem2_scaling(&channel, &config, exponent, 1.0, &grid)? {
            println!(
                "  n {:>8} error sum {:.6} rate {:.3e}",
                row.n, row.error_sum, row.r_t
            );
        }
    }

    let c = sqrt_law_c_for_limit(&channel, 0.1)?;
    println!("\nC = {c:.6} bounds the limiting advantage by 0.1");
    let mc = McConfig::new(McTarget::SqrtLaw, 2000, 11);
    for row in mc_sqrt_law(&channel, &config, c, &[1_000, 10_000], &mc)? {
        println!(
            "  n {:>6} advantage {:.4} ± {:.4} (exact {:.4}, bound {:.4})",
            row.n,
            row.advantage.point_estimate,
            row.advantage.std_error,
            row.advantage.analytic_reference.unwrap(),
            row.bound_finite_n
        );
    }
    Ok(())
}
