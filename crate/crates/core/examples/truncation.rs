//! Cost of ignoring interferers more than one segment away, for the middle
//! of five users.

use edma::model::{ServiceArea, SystemParams};
use edma::montecarlo::{ergodic_compare, AntennaRule, Case, McOptions, Metric};
use edma::rates::Scheme;

fn main() -> edma::Result<()> {
    let opts = McOptions::default().with_trials(20_000);
    let case = [Case::new(Scheme::EdmaUplink, AntennaRule::AtUser).with_metric(Metric::Middle)];
    println!("D_S    all interferers   adjacent only   relative");
    for segment in [2.0, 4.0, 6.0, 10.0, 15.0] {
        let area = ServiceArea::equal(5.0 * segment, 10.0, 5)?;
        let full = ergodic_compare(&case, &SystemParams::default().with_adjacent_only(false), &area, &opts)?[0];
        let adj = ergodic_compare(&case, &SystemParams::default(), &area, &opts)?[0];
        println!(
            "{segment:<6} {:<17.4} {:<15.4} {:+.3}%",
            full.mean,
            adj.mean,
            100.0 * (adj.mean - full.mean) / full.mean
        );
    }
    Ok(())
}
