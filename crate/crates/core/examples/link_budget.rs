//! Per-user rates for one explicit layout under each rate model, next to the
//! two TDMA baselines.

use edma::model::{channel_gain, AntennaLayout, SystemParams, User, UserLayout};
use edma::rates::{edma_sum_rate, tdma_report, Link, RateModel, Scheme};

fn main() -> edma::Result<()> {
    let params = SystemParams::default();
    let users = UserLayout::new(vec![User::new(-12.0, 2.5), User::new(-3.0, -1.0), User::new(6.5, 4.0)]);
    let antennas = AntennaLayout::at_users(&users);

    println!("rho = {:.3e}, eta = {:.4e}", params.rho, params.eta);
    for (m, u) in users.users.iter().enumerate() {
        // feed at the left end of a 40 m waveguide
        let h = channel_gain(u, antennas.x_pin[m], -20.0, &params)?;
        println!("U{}: |h|^2 = {:.4e}, phase = {:+.3} rad", m + 1, h.norm_sqr(), h.arg());
    }

    for link in [Link::Uplink, Link::Downlink] {
        for model in [RateModel::BlockAveraged, RateModel::LowerBound] {
            let r = edma_sum_rate(link, &users, &antennas, &params, model, None)?;
            let per: Vec<String> = r.per_user.iter().map(|x| format!("{x:.3}")).collect();
            println!("{:<8} {:<15} [{}] sum {:.3}", r.scheme.name(), model.name(), per.join(", "), r.sum);
        }
    }
    for scheme in [Scheme::TdmaPinching, Scheme::TdmaConventional] {
        let r = tdma_report(scheme, &users, &params)?;
        println!("{:<24} sum {:.3}", scheme.name(), r.sum);
    }
    Ok(())
}
