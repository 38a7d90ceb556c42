//! Feasibility map over (ε, Λ_T) for the symmetric baseline channel.
//!
//! Writes the full grid as CSV to stdout and a summary to stderr:
//!
//! ```text
//! cargo run --release --example baseline_sweep > sweep.csv
//! ```

use covert_pilot::sweep::{best_epsilon, run_sweep, write_csv, SweepSpec};

fn main() -> covert_pilot::Result<()> {
    let spec = SweepSpec::baseline()?;
    let cells = run_sweep(&spec)?;
    write_csv(&cells, std::io::stdout().lock())?;

    let feasible = cells.iter().filter(|c| c.feasible).count();
    eprintln!("{feasible} of {} cells feasible", cells.len());
    if let Some((eps, rate)) = best_epsilon(&cells) {
        eprintln!("best epsilon {eps:.4} reaches {rate:.4} bits per channel use");
    }
    Ok(())
}
