//! Downlink max-min placement by successive convex approximation, with its
//! iterate trace and the grid for comparison.

use edma::downlink::{beta_star, sca_optimize, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use edma::model::{ServiceArea, SystemParams, User, UserLayout};
use edma::placement::{exhaustive_placement, fixed_placement};
use edma::rates::Link;

fn main() -> edma::Result<()> {
    let p = SystemParams::default().with_tx_dbm(30.0);
    let area = ServiceArea::equal(10.0, 10.0, 3)?;
    let users = UserLayout::new(vec![User::new(-2.0, 3.0), User::new(-1.4, -2.5), User::new(1.8, 0.5)]);
    println!("convex half-width of ln P(no LoS) at y = 0: {:.4} m", beta_star(0.0, &p)?);

    let out = sca_optimize(&users, &area, &p, DEFAULT_TOL, DEFAULT_MAX_ITERS)?;
    for s in &out.trace {
        let x: Vec<String> = s.iterate.x_pin.iter().map(|v| format!("{v:7.3}")).collect();
        println!("iter {:>2}: x [{}]  u = {:.5}", s.iteration, x.join(" "), s.u);
    }
    let fixed = fixed_placement(Link::Downlink, &users, &p);
    let grid = exhaustive_placement(&users, &area, &p, 2e-2, Link::Downlink)?;
    println!("min rate: sca {:.4}, grid {:.4}, at user {:.4}", out.result.objective, grid.objective, fixed.objective);
    Ok(())
}
