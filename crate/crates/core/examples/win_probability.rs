//! How often two centerline users do better with EDMA than with pinching
//! TDMA, against the separation-tail bound.

use edma::analytics::{nu_threshold, win_probability_lb, Threshold};
use edma::model::{ServiceArea, SystemParams};
use edma::montecarlo::{win_probability, McOptions};
use edma::rates::RateModel;

fn main() -> edma::Result<()> {
    let d = 3.0;
    for phi in [0.02, 0.04, 0.1] {
        match nu_threshold(phi, d)? {
            Threshold::AlwaysWins => println!("phi = {phi}: EDMA wins at every separation"),
            Threshold::Separation(nu) => println!("phi = {phi}: EDMA wins once users are {nu:.3} m apart"),
        }
        for length in [10.0, 20.0, 40.0] {
            let p = SystemParams::default().with_phi(phi);
            let area = ServiceArea::equal(length, 0.0, 2)?;
            let opts = McOptions::default().with_trials(100_000);
            let avg = win_probability(&p, &area, &opts)?;
            let lb = win_probability(&p, &area, &opts.with_model(RateModel::LowerBound))?;
            println!(
                "  D_L = {length:>4}: bound {:.4}, blocked-interference model {:.4}, block-averaged {:.4} ± {:.4}",
                win_probability_lb(phi, d, length)?,
                lb.mean,
                avg.mean,
                avg.stderr
            );
        }
    }
    Ok(())
}
