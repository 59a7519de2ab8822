//! Ergodic uplink sum rate as the user count grows on a fixed 40 m x 10 m
//! floor, with every interferer kept.

use edma::model::SystemParams;
use edma::montecarlo::{table1_sweep, McOptions};

fn main() -> edma::Result<()> {
    let p = SystemParams::default().with_adjacent_only(false);
    let rows = table1_sweep(&p, 40.0, 10.0, &[1, 3, 5, 7, 9, 11], &McOptions::default().with_trials(20_000))?;
    println!(" M   EDMA     P-TDMA   C-TDMA   (TDMA sums, then divided by M)");
    for r in rows {
        let m = r.users as f64;
        println!(
            "{:>2}   {:<8.3} {:<8.3} {:<8.3} {:<7.3} {:<7.3}",
            r.users,
            r.edma.mean,
            r.tdma_pinch.mean,
            r.tdma_conv.mean,
            r.tdma_pinch.mean / m,
            r.tdma_conv.mean / m
        );
    }
    Ok(())
}
