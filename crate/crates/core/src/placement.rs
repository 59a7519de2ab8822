//! Placement results and the grid-search oracle shared by both links.

use crate::error::{Error, Result};
use crate::model::{AntennaLayout, ServiceArea, SystemParams, UserLayout};
use crate::rates::{blockavg_rates, uplink_rate_blockavg, Link};
use rayon::prelude::*;

/// Largest grid the exhaustive search will visit.
pub const MAX_GRID_POINTS: f64 = 1e8;
/// Largest user count for the joint downlink grid.
pub const MAX_JOINT_USERS: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct PlacementResult {
    pub x_pin: AntennaLayout,
    pub per_user_rate: Vec<f64>,
    /// Smallest blockage-averaged per-user rate.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl PlacementResult {
    pub fn evaluate(
        link: Link,
        users: &UserLayout,
        x_pin: AntennaLayout,
        params: &SystemParams,
        iterations: usize,
        converged: bool,
    ) -> Self {
        let per_user_rate = blockavg_rates(link, users, &x_pin, params);
        let objective = per_user_rate.iter().copied().fold(f64::INFINITY, f64::min);
        PlacementResult {
            x_pin,
            per_user_rate,
            objective,
            iterations,
            converged,
        }
    }
}

/// Antennas directly above the users.
pub fn fixed_placement(link: Link, users: &UserLayout, params: &SystemParams) -> PlacementResult {
    PlacementResult::evaluate(link, users, AntennaLayout::at_users(users), params, 0, true)
}

/// Grid points `lo, lo + r, …` plus `hi` itself.
pub(crate) fn grid(lo: f64, hi: f64, resolution: f64) -> Vec<f64> {
    let n = ((hi - lo) / resolution).floor() as usize;
    let mut pts: Vec<f64> = (0..=n).map(|k| lo + k as f64 * resolution).collect();
    if hi - pts[n] > 1e-12 * resolution.max(hi.abs()) {
        pts.push(hi);
    }
    pts
}

fn grid_len(lo: f64, hi: f64, resolution: f64) -> f64 {
    ((hi - lo) / resolution).floor() + 2.0
}

/// Grid search over the segment box.
///
/// The uplink decouples, so each segment is searched on its own. The downlink
/// is searched jointly and is limited to three users.
pub fn exhaustive_placement(
    users: &UserLayout,
    area: &ServiceArea,
    params: &SystemParams,
    resolution: f64,
    link: Link,
) -> Result<PlacementResult> {
    if !(resolution > 0.0) {
        return Err(Error::Invalid(format!("resolution must be positive, got {resolution}")));
    }
    users.validate(area)?;
    let m = users.len();
    match link {
        Link::Uplink => {
            let points: f64 = area.segments.iter().map(|&(lo, hi)| grid_len(lo, hi, resolution)).sum();
            if points > MAX_GRID_POINTS {
                return Err(Error::GridTooLarge {
                    points,
                    limit: MAX_GRID_POINTS,
                });
            }
            let base = AntennaLayout::at_users(users);
            let x_pin: Vec<f64> = (0..m)
                .into_par_iter()
                .map(|k| {
                    let (lo, hi) = area.segments[k];
                    let mut ants = base.clone();
                    let mut best = (f64::NEG_INFINITY, lo);
                    for x in grid(lo, hi, resolution) {
                        ants.x_pin[k] = x;
                        let r = uplink_rate_blockavg(k, users, &ants, params);
                        if r > best.0 {
                            best = (r, x);
                        }
                    }
                    best.1
                })
                .collect();
            Ok(PlacementResult::evaluate(link, users, AntennaLayout::new(x_pin), params, 1, true))
        }
        Link::Downlink => {
            if m > MAX_JOINT_USERS {
                return Err(Error::TooManyUsers {
                    max: MAX_JOINT_USERS,
                    got: m,
                });
            }
            let axes: Vec<Vec<f64>> = area.segments.iter().map(|&(lo, hi)| grid(lo, hi, resolution)).collect();
            let points: f64 = axes.iter().map(|a| a.len() as f64).product();
            if points > MAX_GRID_POINTS {
                return Err(Error::GridTooLarge {
                    points,
                    limit: MAX_GRID_POINTS,
                });
            }
            // Parallel over the first axis, sequential odometer over the rest.
            let best = axes[0]
                .par_iter()
                .map(|&x0| {
                    let mut ants = AntennaLayout::new(vec![x0; m]);
                    let mut idx = vec![0usize; m];
                    let mut best = (f64::NEG_INFINITY, ants.x_pin.clone());
                    loop {
                        for k in 1..m {
                            ants.x_pin[k] = axes[k][idx[k]];
                        }
                        let v = crate::rates::min_blockavg_rate(Link::Downlink, users, &ants, params);
                        if v > best.0 {
                            best = (v, ants.x_pin.clone());
                        }
                        let mut k = 1;
                        while k < m {
                            idx[k] += 1;
                            if idx[k] < axes[k].len() {
                                break;
                            }
                            idx[k] = 0;
                            k += 1;
                        }
                        if k >= m {
                            break;
                        }
                    }
                    best
                })
                .reduce_with(|a, b| if b.0 > a.0 { b } else { a })
                .expect("non-empty grid");
            Ok(PlacementResult::evaluate(link, users, AntennaLayout::new(best.1), params, 1, true))
        }
    }
}
