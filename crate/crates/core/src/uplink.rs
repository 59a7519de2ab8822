//! Uplink placement. Each user's rate depends only on its own antenna, so the
//! segments are optimized independently.

use crate::error::{Error, Result};
use crate::model::{AntennaLayout, ServiceArea, SystemParams, UserLayout};
use crate::placement::PlacementResult;
use crate::rates::{uplink_rate_blockavg, Link};
use rayon::prelude::*;

/// Golden ratio conjugate `(√5 − 1)/2`.
pub const GOLDEN_CONJUGATE: f64 = 0.618_033_988_749_894_9;
pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub iterations: usize,
}

/// Maximizes `objective` on `[lower, upper]` and returns the midpoint of the
/// final bracket, whose width is at most `epsilon`.
///
/// Both probes are re-evaluated every iteration. On an exact tie the bracket
/// shrinks from the upper side.
pub fn golden_section_search<F: FnMut(f64) -> f64>(
    mut objective: F,
    lower: f64,
    upper: f64,
    epsilon: f64,
) -> Result<GoldenResult> {
    if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
        return Err(Error::Search(format!("bad bracket [{lower}, {upper}]")));
    }
    if !(epsilon > 0.0) {
        return Err(Error::Search(format!("epsilon must be positive, got {epsilon}")));
    }
    let (mut lb, mut ub) = (lower, upper);
    let mut iterations = 0;
    while ub - lb > epsilon {
        let w = ub - lb;
        let lo_probe = ub - GOLDEN_CONJUGATE * w;
        let hi_probe = lb + GOLDEN_CONJUGATE * w;
        let f_lo = objective(lo_probe);
        let f_hi = objective(hi_probe);
        if !f_lo.is_finite() || !f_hi.is_finite() {
            return Err(Error::Search(format!(
                "objective not finite near [{lo_probe}, {hi_probe}]"
            )));
        }
        if f_hi > f_lo {
            lb = lo_probe;
        } else {
            ub = hi_probe;
        }
        iterations += 1;
    }
    Ok(GoldenResult {
        x: 0.5 * (lb + ub),
        iterations,
    })
}

/// Iteration count for a bracket of `width` to reach `epsilon`.
pub fn golden_iterations(width: f64, epsilon: f64) -> usize {
    if width <= epsilon {
        0
    } else {
        ((epsilon / width).ln() / GOLDEN_CONJUGATE.ln()).ceil() as usize
    }
}

/// Golden-section search per segment on the blockage-averaged uplink rate,
/// followed by a comparison with the two segment endpoints.
pub fn optimize_uplink_placements(
    users: &UserLayout,
    area: &ServiceArea,
    params: &SystemParams,
    epsilon: f64,
) -> Result<PlacementResult> {
    users.validate(area)?;
    let base = AntennaLayout::at_users(users);
    let found = (0..users.len())
        .into_par_iter()
        .map(|m| {
            let (lo, hi) = area.segments[m];
            if hi - lo <= epsilon {
                return Ok(GoldenResult {
                    x: 0.5 * (lo + hi),
                    iterations: 0,
                });
            }
            let mut ants = base.clone();
            let mut rate = |x: f64| {
                ants.x_pin[m] = x;
                uplink_rate_blockavg(m, users, &ants, params)
            };
            let found = golden_section_search(&mut rate, lo, hi, epsilon)?;
            // The bracket midpoint stays up to ε/2 inside the segment, so an
            // optimum on the boundary is checked directly.
            let mut best = (rate(found.x), found.x);
            for edge in [lo, hi] {
                let r = rate(edge);
                if r > best.0 {
                    best = (r, edge);
                }
            }
            Ok(GoldenResult { x: best.1, ..found })
        })
        .collect::<Result<Vec<_>>>()?;
    let iterations = found.iter().map(|g| g.iterations).max().unwrap_or(0);
    let x_pin = AntennaLayout::new(found.iter().map(|g| g.x).collect());
    Ok(PlacementResult::evaluate(Link::Uplink, users, x_pin, params, iterations, true))
}

/// Each antenna halfway between its neighbouring users, clamped to its
/// segment. Edge users keep their antenna above themselves.
pub fn midpoint_heuristic(users: &UserLayout, area: &ServiceArea) -> Result<AntennaLayout> {
    users.validate(area)?;
    let us = &users.users;
    let m = us.len();
    Ok(AntennaLayout::new(
        (0..m)
            .map(|k| {
                if k == 0 || k + 1 == m {
                    us[k].x
                } else {
                    let (lo, hi) = area.segments[k];
                    (0.5 * (us[k - 1].x + us[k + 1].x)).clamp(lo, hi)
                }
            })
            .collect(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnimodalityCertificate {
    /// Half the distance between the two neighbouring users.
    pub delta: f64,
    /// `δ²φ/2 ≥ 1`.
    pub satisfied: bool,
}

/// Sufficient condition for a single interior maximum of the high-SNR
/// placement objective between the neighbours at `x_prev` and `x_next`.
pub fn unimodality_certificate(x_prev: f64, x_next: f64, phi: f64) -> Result<UnimodalityCertificate> {
    if !(x_prev <= x_next) {
        return Err(Error::Invalid(format!("neighbours out of order: {x_prev} > {x_next}")));
    }
    let delta = 0.5 * (x_next - x_prev);
    Ok(UnimodalityCertificate {
        delta,
        satisfied: delta * delta * phi / 2.0 >= 1.0,
    })
}

/// Product of the two neighbour non-LoS probabilities at offset `w` from
/// their midpoint, for users on the centerline.
pub fn neighbour_blockage_product(w: f64, delta: f64, phi: f64, height: f64) -> f64 {
    let g = |y: f64| -(-phi * (y * y + height * height)).exp_m1();
    g(delta - w) * g(delta + w)
}
