//! Two users: closed-form gain bound against Monte Carlo, across blockage
//! strengths.

use edma::analytics::{centerline_asymptote, ergodic_gain_lb, ergodic_gain_lb_centerline};
use edma::model::{ServiceArea, SystemParams};
use edma::montecarlo::{ergodic_gain, AntennaRule, McOptions};
use edma::rates::{Link, RateModel};

fn main() -> edma::Result<()> {
    let (length, width) = (40.0, 10.0);
    let area = ServiceArea::equal(length, width, 2)?;
    let opts = McOptions::default().with_trials(50_000);
    println!("phi      closed   mc(lower bound)     mc(block avg)       centerline  large-area");
    for phi in [0.005, 0.01, 0.02, 0.04, 0.08] {
        let p = SystemParams::default().with_phi(phi);
        let closed = ergodic_gain_lb(&p, length, width)?.value;
        let lb = ergodic_gain(Link::Uplink, AntennaRule::AtUser, &p, &area, &opts.clone().with_model(RateModel::LowerBound))?;
        let avg = ergodic_gain(Link::Uplink, AntennaRule::AtUser, &p, &area, &opts)?;
        println!(
            "{phi:<8} {closed:<8.4} {:.4} ± {:.4}   {:.4} ± {:.4}   {:<11.4} {:.4}",
            lb.mean,
            lb.stderr,
            avg.mean,
            avg.stderr,
            ergodic_gain_lb_centerline(&p, length)?.value,
            centerline_asymptote(&p, length, true)?.value,
        );
    }
    Ok(())
}
