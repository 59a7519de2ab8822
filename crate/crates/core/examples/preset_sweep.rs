//! Runs a bundled sweep recipe through the library and prints its CSV.
//!
//! `cargo run --release --example preset_sweep -- fig6 2000`

use edma::cli::commands::cmd_sweep;
use edma::cli::presets::{preset, preset_caption};

fn main() -> edma::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "fig5".into());
    let mut config = preset(&name)?;
    config.trials = args.next().and_then(|t| t.parse().ok()).unwrap_or(2_000);
    eprintln!("{}", preset_caption(&name)?);
    print!("{}", cmd_sweep(&config, Some(&name))?);
    Ok(())
}
