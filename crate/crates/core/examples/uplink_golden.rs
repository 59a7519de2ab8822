//! Uplink placement for three clustered users: golden-section search against
//! the grid, the neighbour midpoint and antennas above the users.

use edma::model::{ServiceArea, SystemParams, User, UserLayout};
use edma::placement::{exhaustive_placement, fixed_placement, PlacementResult};
use edma::rates::Link;
use edma::uplink::{golden_iterations, midpoint_heuristic, optimize_uplink_placements, unimodality_certificate, DEFAULT_EPSILON};

fn main() -> edma::Result<()> {
    // narrow outer strips next to a wide middle segment
    let l = 40.0;
    let area = ServiceArea::from_widths(l, 10.0, &[l / 12.0, l / 3.0, l / 12.0])?;
    let users = UserLayout::new(vec![User::new(-7.5, 1.0), User::new(1.5, -2.0), User::new(7.2, 3.0)]);
    let cert = unimodality_certificate(users.users[0].x, users.users[2].x, 0.02)?;
    println!("segments {:?}", area.segments);
    println!("middle segment: delta = {:.2} m, certificate {}", cert.delta, cert.satisfied);
    println!("golden iterations on the middle segment: {}", golden_iterations(l / 3.0, DEFAULT_EPSILON));

    for tx in [20.0, 40.0, 60.0] {
        let p = SystemParams::default().with_tx_dbm(tx);
        let show = |name: &str, r: &PlacementResult| {
            let x: Vec<String> = r.x_pin.x_pin.iter().map(|v| format!("{v:7.3}")).collect();
            println!("  {name:<10} x_pin [{}]  min {:.4}", x.join(" "), r.objective);
        };
        println!("tx = {tx} dBm");
        show("golden", &optimize_uplink_placements(&users, &area, &p, DEFAULT_EPSILON)?);
        show("grid", &exhaustive_placement(&users, &area, &p, 1e-3, Link::Uplink)?);
        let mid = midpoint_heuristic(&users, &area)?;
        show("midpoint", &PlacementResult::evaluate(Link::Uplink, &users, mid, &p, 0, true));
        show("at user", &fixed_placement(Link::Uplink, &users, &p));
    }
    Ok(())
}
