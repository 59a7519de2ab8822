//! Joint downlink placement by successive convex approximation.
//!
//! Every antenna affects its neighbours' rates, so the max-min problem is
//! solved jointly. The lower-bound rate of user `m` is written in log form
//!
//! ```text
//! g_m(x) = Σ_{i ∈ N(m)} f_m1(x_i − x_m) + f_m2(x_m)  [− φ q_m(x_m) if the serving link may be blocked]
//! ```
//!
//! with `f_m1(z) = ln(1 − e^{−φ(z² + y_m² + d²)})` and
//! `f_m2(z) = ln ln(1 + ρη/((z − x_m)² + y_m² + d²))`. The lower-bound rate in
//! bits is `e^{g_m}/ln 2`. Each round replaces the `f_m1` terms by their
//! tangents at the previous iterate and solves the resulting max-min program
//! with a log-barrier Newton method. All internals use natural logs.

use crate::error::{Error, Result};
use crate::model::{AntennaLayout, ServiceArea, SystemParams, UserLayout};
use crate::numerics::lambert_w0;
use crate::placement::PlacementResult;
use crate::rates::{min_blockavg_rate, Link};

pub const DEFAULT_TOL: f64 = 1e-5;
pub const DEFAULT_MAX_ITERS: usize = 100;

fn offset_sq(y: f64, params: &SystemParams) -> f64 {
    y * y + params.height * params.height
}

/// `ln P(no LoS)` for a link at horizontal offset `z` from user `m`.
/// Equals `−∞` when `φ = 0`.
pub fn f_m1(z: f64, y_m: f64, params: &SystemParams) -> f64 {
    let s = z * z + offset_sq(y_m, params);
    (-(-params.blockage_phi * s).exp_m1()).ln()
}

pub fn f_m1_derivative(z: f64, y_m: f64, params: &SystemParams) -> f64 {
    let phi = params.blockage_phi;
    let s = z * z + offset_sq(y_m, params);
    2.0 * phi * z / (phi * s).exp_m1()
}

pub fn f_m1_second_derivative(z: f64, y_m: f64, params: &SystemParams) -> f64 {
    let phi = params.blockage_phi;
    let s = z * z + offset_sq(y_m, params);
    let r = 1.0 / (phi * s).exp_m1();
    2.0 * phi * r * (1.0 - 2.0 * phi * z * z * (1.0 + r))
}

/// Half-width of the convex region of `f_m1` around zero offset.
pub fn beta_star(y_m: f64, params: &SystemParams) -> Result<f64> {
    let phi = params.blockage_phi;
    if !(phi > 0.0) {
        return Err(Error::domain("beta_star", format!("phi must be positive, got {phi}")));
    }
    let arg = -0.5 * (-0.5 - phi * offset_sq(y_m, params)).exp();
    let w = lambert_w0(arg)?;
    Ok(((1.0 + 2.0 * w) / (2.0 * phi)).max(0.0).sqrt())
}

/// `ln ln(1 + ρη/q)` with `q = (z − x_m)² + y_m² + d²`.
pub fn f_m2(z: f64, x_m: f64, y_m: f64, params: &SystemParams) -> Result<f64> {
    let q = (z - x_m).powi(2) + offset_sq(y_m, params);
    let l = (params.rho_eta() / q).ln_1p();
    if !(l > 0.0) {
        return Err(Error::domain("f_m2", format!("rate term {l} is not positive at z = {z}")));
    }
    Ok(l.ln())
}

// L = ln(1 + K/q), L' and L'' with respect to q.
fn rate_terms(z: f64, x_m: f64, y_m: f64, params: &SystemParams) -> (f64, f64, f64, f64) {
    let k = params.rho_eta();
    let q = (z - x_m).powi(2) + offset_sq(y_m, params);
    let l = (k / q).ln_1p();
    let qq = q * (q + k);
    (l, -k / qq, k * (2.0 * q + k) / (qq * qq), z - x_m)
}

pub fn f_m2_derivative(z: f64, x_m: f64, y_m: f64, params: &SystemParams) -> f64 {
    let (l, l1, _, w) = rate_terms(z, x_m, y_m, params);
    2.0 * w * l1 / l
}

pub fn f_m2_second_derivative(z: f64, x_m: f64, y_m: f64, params: &SystemParams) -> f64 {
    let (l, l1, l2, w) = rate_terms(z, x_m, y_m, params);
    let a = l1 / l;
    let da = (l2 * l - l1 * l1) / (l * l);
    2.0 * a + 4.0 * w * w * da
}

/// Neighbours whose antennas interfere with user `m`.
fn neighbours(m: usize, count: usize, params: &SystemParams) -> impl Iterator<Item = usize> + '_ {
    (0..count).filter(move |&i| params.interferes(i, m))
}

// Exact concave part of g_m as a function of the user's own antenna.
fn serving_value(m: usize, z: f64, users: &UserLayout, params: &SystemParams) -> Result<f64> {
    let u = users.users[m];
    let mut v = f_m2(z, u.x, u.y, params)?;
    if !params.assume_serving_los {
        v -= params.blockage_phi * ((z - u.x).powi(2) + offset_sq(u.y, params));
    }
    Ok(v)
}

fn serving_derivatives(m: usize, z: f64, users: &UserLayout, params: &SystemParams) -> (f64, f64) {
    let u = users.users[m];
    let mut d1 = f_m2_derivative(z, u.x, u.y, params);
    let mut d2 = f_m2_second_derivative(z, u.x, u.y, params);
    if !params.assume_serving_los {
        d1 -= 2.0 * params.blockage_phi * (z - u.x);
        d2 -= 2.0 * params.blockage_phi;
    }
    (d1, d2)
}

/// Log lower-bound rate `g_m` of user `m` at the given antenna layout.
pub fn lb_log_rate(m: usize, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> Result<f64> {
    let u = users.users[m];
    let blocked: f64 = neighbours(m, users.len(), params)
        .map(|i| f_m1(antennas.x_pin[i] - u.x, u.y, params))
        .sum();
    Ok(blocked + serving_value(m, antennas.x_pin[m], users, params)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateConstraint {
    pub user: usize,
    /// Constant part of the linearized `f_m1` terms.
    pub constant: f64,
    /// `(antenna, slope)` of the linearized `f_m1` terms.
    pub slopes: Vec<(usize, f64)>,
}

/// Concave minorants of the `g_m` built at a linearization point.
#[derive(Debug, Clone)]
pub struct SurrogateModel {
    pub point: AntennaLayout,
    pub constraints: Vec<SurrogateConstraint>,
    users: UserLayout,
    params: SystemParams,
}

impl SurrogateModel {
    pub fn value(&self, m: usize, x: &[f64]) -> Result<f64> {
        let c = &self.constraints[m];
        let lin: f64 = c.slopes.iter().map(|&(i, s)| s * x[i]).sum();
        Ok(c.constant + lin + serving_value(m, x[m], &self.users, &self.params)?)
    }

    pub fn min_value(&self, x: &[f64]) -> Result<f64> {
        let mut v = f64::INFINITY;
        for m in 0..self.constraints.len() {
            v = v.min(self.value(m, x)?);
        }
        Ok(v)
    }

    pub fn gradient(&self, m: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; x.len()];
        for &(i, s) in &self.constraints[m].slopes {
            g[i] += s;
        }
        g[m] += serving_derivatives(m, x[m], &self.users, &self.params).0;
        g
    }
}

/// Linearizes every `f_m1` term about `point`.
pub fn build_surrogate(users: &UserLayout, point: &AntennaLayout, params: &SystemParams) -> Result<SurrogateModel> {
    if !(params.blockage_phi > 0.0) {
        return Err(Error::Invalid("successive approximation needs phi > 0".into()));
    }
    if users.len() != point.len() {
        return Err(Error::Invalid("layout sizes differ".into()));
    }
    let constraints = (0..users.len())
        .map(|m| {
            let u = users.users[m];
            let mut constant = 0.0;
            let slopes = neighbours(m, users.len(), params)
                .map(|i| {
                    let z0 = point.x_pin[i] - u.x;
                    let s = f_m1_derivative(z0, u.y, params);
                    constant += f_m1(z0, u.y, params) - s * point.x_pin[i];
                    (i, s)
                })
                .collect();
            SurrogateConstraint {
                user: m,
                constant,
                slopes,
            }
        })
        .collect();
    Ok(SurrogateModel {
        point: point.clone(),
        constraints,
        users: users.clone(),
        params: params.clone(),
    })
}

// Solves A x = b for symmetric positive definite A, shifting the diagonal if
// the factorization breaks down.
fn solve_spd(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let scale = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max).max(1e-300);
    let mut shift = 0.0;
    loop {
        let mut l = vec![vec![0.0; n]; n];
        let mut ok = true;
        'fact: for i in 0..n {
            for j in 0..=i {
                let mut s = a[i][j] + if i == j { shift } else { 0.0 };
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        ok = false;
                        break 'fact;
                    }
                    l[i][i] = s.sqrt();
                } else {
                    l[i][j] = s / l[j][j];
                }
            }
        }
        if ok {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
                y[i] = (b[i] - s) / l[i][i];
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
                x[i] = (y[i] - s) / l[i][i];
            }
            return x;
        }
        shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
    }
}

struct Barrier<'a> {
    model: &'a SurrogateModel,
    boxes: &'a [(f64, f64)],
    t: f64,
}

impl Barrier<'_> {
    // v = (x, u); −∞ outside the strict interior.
    fn value(&self, v: &[f64]) -> f64 {
        let m = self.boxes.len();
        let (x, u) = (&v[..m], v[m]);
        let mut acc = self.t * u;
        for (k, &(lo, hi)) in self.boxes.iter().enumerate() {
            if !(x[k] > lo && x[k] < hi) {
                return f64::NEG_INFINITY;
            }
            acc += (x[k] - lo).ln() + (hi - x[k]).ln();
        }
        for c in 0..m {
            let s = match self.model.value(c, x) {
                Ok(g) => g - u,
                Err(_) => return f64::NEG_INFINITY,
            };
            if !(s > 0.0) {
                return f64::NEG_INFINITY;
            }
            acc += s.ln();
        }
        acc
    }

    // Gradient and the negated, concavified Hessian.
    fn newton_system(&self, v: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let m = self.boxes.len();
        let n = m + 1;
        let (x, u) = (&v[..m], v[m]);
        let mut grad = vec![0.0; n];
        let mut neg_h = vec![vec![0.0; n]; n];
        grad[m] = self.t;
        for c in 0..m {
            let s = self.model.value(c, x).expect("interior point") - u;
            let mut a = self.model.gradient(c, x);
            a.push(-1.0);
            for i in 0..n {
                grad[i] += a[i] / s;
                for j in 0..n {
                    neg_h[i][j] += a[i] * a[j] / (s * s);
                }
            }
            let (_, d2) = serving_derivatives(c, x[c], &self.model.users, &self.model.params);
            neg_h[c][c] += (-d2).max(0.0) / s;
        }
        for (k, &(lo, hi)) in self.boxes.iter().enumerate() {
            let (a, b) = (x[k] - lo, hi - x[k]);
            grad[k] += 1.0 / a - 1.0 / b;
            neg_h[k][k] += 1.0 / (a * a) + 1.0 / (b * b);
        }
        (grad, neg_h)
    }
}

const BARRIER_GAP: f64 = 1e-10;
const NEWTON_MAX: usize = 200;

/// Maximizes `min_m g̃_m(x)` over the segment box.
pub fn solve_surrogate(model: &SurrogateModel, area: &ServiceArea) -> Result<(AntennaLayout, f64)> {
    let m = model.constraints.len();
    if area.len() != m {
        return Err(Error::Invalid("area and surrogate sizes differ".into()));
    }
    let boxes = &area.segments;
    if boxes.iter().any(|&(lo, hi)| !(hi > lo)) {
        return Err(Error::Invalid("segment box is empty".into()));
    }
    let mut v: Vec<f64> = model
        .point
        .x_pin
        .iter()
        .zip(boxes)
        .map(|(&x, &(lo, hi))| {
            let pad = 1e-3 * (hi - lo);
            x.clamp(lo + pad, hi - pad)
        })
        .collect();
    let u0 = model.min_value(&v)? - 1.0;
    v.push(u0);

    let barrier_terms = (3 * m) as f64;
    let mut t = 1.0;
    loop {
        let b = Barrier { model, boxes, t };
        let mut fv = b.value(&v);
        for _ in 0..NEWTON_MAX {
            let (grad, neg_h) = b.newton_system(&v);
            let step = solve_spd(&neg_h, &grad);
            let decrement: f64 = grad.iter().zip(&step).map(|(g, s)| g * s).sum();
            if !(decrement > 1e-14) {
                break;
            }
            let mut alpha = 1.0;
            let mut moved = false;
            for _ in 0..60 {
                let trial: Vec<f64> = v.iter().zip(&step).map(|(a, s)| a + alpha * s).collect();
                let ft = b.value(&trial);
                if ft >= fv + 0.25 * alpha * decrement {
                    v = trial;
                    fv = ft;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !moved {
                break;
            }
        }
        if !fv.is_finite() {
            return Err(Error::Search("barrier iterate left the feasible region".into()));
        }
        if barrier_terms / t < BARRIER_GAP {
            break;
        }
        t *= 10.0;
    }
    let x = v[..m].to_vec();
    let u = model.min_value(&x)?;
    Ok((AntennaLayout::new(x), u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScaState {
    pub iterate: AntennaLayout,
    /// `min_m g_m` at the iterate (log of the lower-bound rate in nats).
    pub u: f64,
    pub iteration: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct ScaOutcome {
    pub result: PlacementResult,
    pub trace: Vec<ScaState>,
}

fn lb_min(users: &UserLayout, x: &AntennaLayout, params: &SystemParams) -> Result<f64> {
    let mut v = f64::INFINITY;
    for m in 0..users.len() {
        v = v.min(lb_log_rate(m, users, x, params)?);
    }
    Ok(v)
}

const POLISH_START: f64 = 0.5;

// Changes below this relative size are treated as rounding noise.
fn improves(candidate: f64, base: f64) -> bool {
    candidate > base + 1e-12 * base.abs()
}
const POLISH_END: f64 = 1e-5;

// Compass search on the true min-rate inside the box.
fn polish(users: &UserLayout, area: &ServiceArea, params: &SystemParams, start: AntennaLayout) -> AntennaLayout {
    let m = users.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..m {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; m];
            d[i] = s;
            dirs.push(d);
        }
    }
    if m <= 3 {
        for i in 0..m {
            for j in i + 1..m {
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut d = vec![0.0; m];
                    d[i] = a;
                    d[j] = b;
                    dirs.push(d);
                }
            }
        }
    } else {
        dirs.push(vec![1.0; m]);
        dirs.push(vec![-1.0; m]);
    }
    let objective = |x: &AntennaLayout| min_blockavg_rate(Link::Downlink, users, x, params);
    let mut best = start;
    let mut best_val = objective(&best);
    let mut step = POLISH_START;
    while step >= POLISH_END {
        let mut improved = false;
        for d in &dirs {
            let trial = AntennaLayout::new(
                (0..m)
                    .map(|k| {
                        let (lo, hi) = area.segments[k];
                        (best.x_pin[k] + step * d[k]).clamp(lo, hi)
                    })
                    .collect(),
            );
            let v = objective(&trial);
            if improves(v, best_val) {
                best = trial;
                best_val = v;
                improved = true;
                break;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Successive convex approximation for the downlink max-min placement,
/// started from antennas above the users.
///
/// A step that lowers the true min-rate is halved toward the previous
/// iterate. The best iterate is finally refined by a compass search on the
/// true objective. The reported objective is the true blockage-averaged
/// min-rate.
pub fn sca_optimize(
    users: &UserLayout,
    area: &ServiceArea,
    params: &SystemParams,
    tol: f64,
    max_iters: usize,
) -> Result<ScaOutcome> {
    users.validate(area)?;
    let objective = |x: &AntennaLayout| min_blockavg_rate(Link::Downlink, users, x, params);
    let mut x = AntennaLayout::at_users(users);
    let mut obj = objective(&x);
    let mut u = lb_min(users, &x, params)?;
    let mut trace = vec![ScaState {
        iterate: x.clone(),
        u,
        iteration: 0,
        converged: false,
    }];
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=max_iters {
        iterations = k;
        let step = build_surrogate(users, &x, params).and_then(|s| solve_surrogate(&s, area));
        let Ok((candidate, _)) = step else {
            break;
        };
        let mut next = candidate;
        let mut next_obj = objective(&next);
        let mut halvings = 0;
        while next_obj < obj && halvings < 30 {
            next = AntennaLayout::new(x.x_pin.iter().zip(&next.x_pin).map(|(a, b)| 0.5 * (a + b)).collect());
            next_obj = objective(&next);
            halvings += 1;
        }
        if !improves(next_obj, obj) {
            next = x.clone();
            next_obj = obj;
        }
        let next_u = lb_min(users, &next, params)?;
        let done = (next_u - u).abs() < tol;
        x = next;
        obj = next_obj;
        u = next_u;
        trace.push(ScaState {
            iterate: x.clone(),
            u,
            iteration: k,
            converged: done,
        });
        if done {
            converged = true;
            break;
        }
    }
    let polished = polish(users, area, params, x);
    let result = PlacementResult::evaluate(Link::Downlink, users, polished, params, iterations, converged);
    Ok(ScaOutcome { result, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::User;
    use crate::placement::{exhaustive_placement, fixed_placement, grid};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    fn central(f: impl Fn(f64) -> f64, z: f64) -> f64 {
        let h = 1e-5 * z.abs().max(1.0);
        (f(z + h) - f(z - h)) / (2.0 * h)
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-10
    }

    #[test]
    fn f_m1_examples() {
        let p = SystemParams::default();
        assert!(f_m1(1e3, 0.0, &p).abs() < 1e-15);
        let q = p.clone().with_phi(LN_2 / 9.0);
        assert!((f_m1(0.0, 0.0, &q) - 0.5f64.ln()).abs() < 1e-14);
        assert_eq!(f_m1_derivative(0.0, 1.0, &p), 0.0);
        assert!(f_m1_derivative(2.0, 1.0, &p) > 0.0);
        assert!(f_m1_derivative(-2.0, 1.0, &p) < 0.0);
        assert!(f_m1(2.0, 0.0, &p) < f_m1(3.0, 0.0, &p));
        assert!(f_m1(0.0, 0.0, &p.clone().with_phi(0.0)).is_infinite());
    }

    #[test]
    fn beta_star_value_and_convexity_sign() {
        let p = SystemParams::default();
        let b = beta_star(0.0, &p).unwrap();
        assert!((b - 2.603).abs() < 5e-3, "{b}");
        let f3 = |z: f64| 1.0 - (-0.02 * (z * z + 9.0)).exp() - 2.0 * 0.02 * z * z;
        assert!(f3(2.603).abs() < 1e-3);
        // Newton on f_m3 as an independent root
        let mut z: f64 = 1.0;
        for _ in 0..100 {
            let d = 0.04 * z * (-0.02 * (z * z + 9.0)).exp() - 0.08 * z;
            z -= f3(z) / d;
        }
        assert!((z - b).abs() < 1e-9);
        let h = 1e-4;
        for k in 1..60 {
            let z = k as f64 * 0.1;
            if (z - b).abs() < 0.05 {
                continue;
            }
            let fd = (f_m1(z + h, 0.0, &p) - 2.0 * f_m1(z, 0.0, &p) + f_m1(z - h, 0.0, &p)) / (h * h);
            let analytic = f_m1_second_derivative(z, 0.0, &p);
            assert_eq!(fd > 0.0, z < b, "z={z} fd={fd}");
            assert_eq!(analytic > 0.0, z < b);
        }
        assert!(beta_star(0.0, &p.clone().with_phi(0.0)).is_err());
        // large φ(y² + d²) keeps the Lambert argument in range
        assert!(beta_star(50.0, &p.clone().with_phi(5.0)).is_ok());
    }

    #[test]
    fn f_m2_shape() {
        let p = SystemParams::default();
        let v = f_m2(1.5, 1.5, 2.0, &p).unwrap();
        assert!((v - (p.rho_eta() / 13.0).ln_1p().ln()).abs() < 1e-14);
        for &w in &[0.3, 1.0, 4.0] {
            assert_eq!(f_m2(1.5 + w, 1.5, 2.0, &p).unwrap(), f_m2(1.5 - w, 1.5, 2.0, &p).unwrap());
            assert!(f_m2(1.5 + w, 1.5, 2.0, &p).unwrap() < v);
        }
        // concave where 2(z − x_m)² ≤ y² + d²
        let h = 1e-4;
        for &y in &[0.0, 2.0, 5.0] {
            let c = y * y + 9.0;
            let lim = (c / 2.0f64).sqrt();
            for k in 0..=50 {
                let z = lim * k as f64 / 50.0;
                let f = |t: f64| f_m2(t, 0.0, y, &p).unwrap();
                let fd = (f(z + h) - 2.0 * f(z) + f(z - h)) / (h * h);
                assert!(fd <= 1e-6, "y={y} z={z} fd={fd}");
                assert!(f_m2_second_derivative(z, 0.0, y, &p) < 0.0);
            }
        }
        let weak = p.clone().with_tx_dbm(-200.0);
        assert!(f_m2(1e200, 0.0, 0.0, &weak).is_err());
    }

    #[test]
    fn f_m2_second_derivative_matches_difference() {
        let p = SystemParams::default();
        for &(z, y) in &[(0.0, 0.0), (1.0, 2.0), (-3.0, 4.0), (8.0, 1.0)] {
            let fd = central(|t| f_m2_derivative(t, 0.0, y, &p), z);
            assert!(close(fd, f_m2_second_derivative(z, 0.0, y, &p), 1e-6));
            let fd = central(|t| f_m1_derivative(t, y, &p), z);
            assert!(close(fd, f_m1_second_derivative(z, y, &p), 1e-6));
        }
    }

    fn layout2(a: (f64, f64), b: (f64, f64)) -> UserLayout {
        UserLayout::new(vec![User::new(a.0, a.1), User::new(b.0, b.1)])
    }

    #[test]
    fn surrogate_is_tangent_at_the_point() {
        let p = SystemParams::default().with_adjacent_only(false);
        let users = UserLayout::new(vec![User::new(-3.0, 1.0), User::new(0.5, -2.0), User::new(3.5, 0.0)]);
        let point = AntennaLayout::new(vec![-2.0, 0.0, 4.0]);
        let s = build_surrogate(&users, &point, &p).unwrap();
        for m in 0..3 {
            let exact = lb_log_rate(m, &users, &point, &p).unwrap();
            assert!((s.value(m, &point.x_pin).unwrap() - exact).abs() < 1e-8);
            let g = s.gradient(m, &point.x_pin);
            for k in 0..3 {
                let fd = central(
                    |t| {
                        let mut x = point.clone();
                        x.x_pin[k] = t;
                        lb_log_rate(m, &users, &x, &p).unwrap()
                    },
                    point.x_pin[k],
                );
                assert!((fd - g[k]).abs() <= 1e-6 * g[k].abs().max(1.0), "m={m} k={k}");
            }
        }
    }

    #[test]
    fn surrogate_minorizes_inside_convex_region() {
        let p = SystemParams::default();
        let area = ServiceArea::equal(10.0, 10.0, 2).unwrap();
        let users = layout2((-1.0, 0.0), (1.0, 0.0));
        let point = AntennaLayout::new(vec![-0.5, 0.8]);
        let beta = beta_star(0.0, &p).unwrap();
        let s = build_surrogate(&users, &point, &p).unwrap();
        let mut checked = 0;
        for x0 in grid(area.segments[0].0, area.segments[0].1, 0.05) {
            for x1 in grid(area.segments[1].0, area.segments[1].1, 0.05) {
                if (x1 - users.users[0].x).abs() > beta || (x0 - users.users[1].x).abs() > beta {
                    continue;
                }
                let x = AntennaLayout::new(vec![x0, x1]);
                for m in 0..2 {
                    let exact = lb_log_rate(m, &users, &x, &p).unwrap();
                    assert!(s.value(m, &x.x_pin).unwrap() <= exact + 1e-12);
                }
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn surrogate_single_user() {
        let p = SystemParams::default();
        let area = ServiceArea::equal(10.0, 10.0, 1).unwrap();
        let users = UserLayout::new(vec![User::new(2.2, 1.0)]);
        let s = build_surrogate(&users, &AntennaLayout::new(vec![-4.0]), &p).unwrap();
        let (x, u) = solve_surrogate(&s, &area).unwrap();
        assert!((x.x_pin[0] - 2.2).abs() < 1e-6);
        assert!((u - f_m2(2.2, 2.2, 1.0, &p).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn surrogate_symmetric_pair() {
        let p = SystemParams::default();
        let area = ServiceArea::equal(10.0, 10.0, 2).unwrap();
        let users = layout2((-1.0, 2.0), (1.0, 2.0));
        let s = build_surrogate(&users, &AntennaLayout::at_users(&users), &p).unwrap();
        let (x, _) = solve_surrogate(&s, &area).unwrap();
        assert!((x.x_pin[0] + x.x_pin[1]).abs() < 1e-6, "{:?}", x.x_pin);
    }

    fn surrogate_grid(s: &SurrogateModel, area: &ServiceArea, res: f64) -> f64 {
        let mut best = f64::NEG_INFINITY;
        for x0 in grid(area.segments[0].0, area.segments[0].1, res) {
            for x1 in grid(area.segments[1].0, area.segments[1].1, res) {
                best = best.max(s.min_value(&[x0, x1]).unwrap());
            }
        }
        best
    }

    #[test]
    fn surrogate_solver_matches_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let area = ServiceArea::equal(10.0, 10.0, 2).unwrap();
        for _ in 0..5 {
            let p = SystemParams::default().with_tx_dbm(rng.random_range(20.0..40.0));
            let users = layout2((rng.random_range(-5.0..0.0), rng.random_range(-5.0..5.0)), (rng.random_range(0.0..5.0), rng.random_range(-5.0..5.0)));
            let s = build_surrogate(&users, &AntennaLayout::at_users(&users), &p).unwrap();
            let (x, u) = solve_surrogate(&s, &area).unwrap();
            let g = surrogate_grid(&s, &area, 1e-2);
            assert!(u >= g - 1e-9, "{u} < {g}");
            assert!(u - g <= 1e-3);
            assert!(x.within(&area));
        }
    }

    #[test]
    fn well_separated_users_keep_antennas_overhead() {
        let p = SystemParams::default();
        let area = ServiceArea::equal(120.0, 10.0, 3).unwrap();
        let users = UserLayout::new(vec![User::new(-40.0, 1.0), User::new(0.0, -2.0), User::new(40.0, 3.0)]);
        let out = sca_optimize(&users, &area, &p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        for (a, u) in out.result.x_pin.x_pin.iter().zip(&users.users) {
            assert!((a - u.x).abs() < 1e-2, "{a} vs {}", u.x);
        }
        let fixed = fixed_placement(Link::Downlink, &users, &p);
        assert!((out.result.objective - fixed.objective).abs() < 1e-6);
    }

    #[test]
    fn sca_matches_grid_for_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let area = ServiceArea::equal(10.0, 10.0, 2).unwrap();
        for _ in 0..4 {
            let p = SystemParams::default().with_tx_dbm(rng.random_range(20.0..40.0));
            let users = layout2((rng.random_range(-5.0..0.0), rng.random_range(-5.0..5.0)), (rng.random_range(0.0..5.0), rng.random_range(-5.0..5.0)));
            let out = sca_optimize(&users, &area, &p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
            let ex = exhaustive_placement(&users, &area, &p, 2e-2, Link::Downlink).unwrap();
            let fixed = fixed_placement(Link::Downlink, &users, &p);
            assert!(out.result.objective >= fixed.objective - 1e-12);
            assert!(out.result.objective >= ex.objective - 1e-2, "{} vs {}", out.result.objective, ex.objective);
            assert!(out.result.x_pin.within(&area));
            assert_eq!(out.trace[0].iterate, AntennaLayout::at_users(&users));
        }
    }

    #[test]
    fn sca_beats_fixed_for_clustered_triple() {
        let p = SystemParams::default();
        let area = ServiceArea::from_widths(40.0, 10.0, &[40.0 / 12.0, 40.0 / 3.0, 40.0 / 12.0]).unwrap();
        let users = UserLayout::new(vec![User::new(-7.0, 1.0), User::new(-3.0, -2.0), User::new(7.5, 0.5)]);
        let out = sca_optimize(&users, &area, &p, DEFAULT_TOL, DEFAULT_MAX_ITERS).unwrap();
        let fixed = fixed_placement(Link::Downlink, &users, &p);
        assert!(out.result.objective > fixed.objective);
    }

    #[test]
    fn lb_rates_sit_below_blockavg() {
        let p = SystemParams::default();
        let users = UserLayout::new(vec![User::new(-7.0, 1.0), User::new(-3.0, -2.0), User::new(7.5, 0.5)]);
        let x = AntennaLayout::new(vec![-6.0, -1.0, 7.0]);
        let exact = crate::rates::blockavg_rates(Link::Downlink, &users, &x, &p);
        for m in 0..3 {
            let lb = lb_log_rate(m, &users, &x, &p).unwrap().exp() / LN_2;
            let direct = crate::rates::edma_rate_lower_bound(Link::Downlink, m, &users, &x, &p);
            assert!((lb - direct).abs() < 1e-10 * direct);
            assert!(lb <= exact[m]);
        }
    }

    #[test]
    fn spd_solver() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let x = solve_spd(&a, &[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-12);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn f_m1_derivative_matches_difference(z in -20.0f64..20.0, y in -5.0f64..5.0, phi in 0.005f64..0.2, d in 1.0f64..6.0) {
            let p = SystemParams::default().with_phi(phi).with_height(d);
            let fd = central(|t| f_m1(t, y, &p), z);
            let an = f_m1_derivative(z, y, &p);
            prop_assert!(close(fd, an, 1e-6), "{} vs {}", fd, an);
            prop_assert_eq!(f_m1_derivative(-z, y, &p), -an);
        }

        #[test]
        fn f_m2_derivative_matches_difference(z in -20.0f64..20.0, xm in -5.0f64..5.0, y in -5.0f64..5.0, tx in 0.0f64..50.0) {
            let p = SystemParams::default().with_tx_dbm(tx);
            let fd = central(|t| f_m2(t, xm, y, &p).unwrap(), z);
            let an = f_m2_derivative(z, xm, y, &p);
            prop_assert!(close(fd, an, 1e-6), "{} vs {}", fd, an);
        }

        #[test]
        fn beta_star_residual(y in -10.0f64..10.0, phi in 0.001f64..1.0, d in 0.5f64..10.0) {
            let p = SystemParams::default().with_phi(phi).with_height(d);
            let b = beta_star(y, &p).unwrap();
            let r = 1.0 - (-phi * (b * b + y * y + d * d)).exp() - 2.0 * phi * b * b;
            prop_assert!(r.abs() <= 1e-9, "{}", r);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn lower_bound_rises_in_the_valid_regime(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = SystemParams::default();
            let area = ServiceArea::equal(12.0, 10.0, 3).unwrap();
            let users = UserLayout::new((0..3).map(|k| {
                let (lo, hi) = area.segments[k];
                User::new(rng.random_range(lo..hi), rng.random_range(-5.0..5.0))
            }).collect());
            let out = sca_optimize(&users, &area, &p, DEFAULT_TOL, 30).unwrap();
            let valid = |x: &AntennaLayout| (0..3).all(|m| {
                let u = users.users[m];
                let beta = beta_star(u.y, &p).unwrap();
                let near = ((u.y * u.y + 9.0) / 2.0).sqrt();
                (x.x_pin[m] - u.x).abs() <= near
                    && (0..3).filter(|&i| p.interferes(i, m)).all(|i| (x.x_pin[i] - u.x).abs() <= beta)
            });
            for w in out.trace.windows(2) {
                prop_assert!(w[1].iterate.within(&area));
                if valid(&w[0].iterate) && valid(&w[1].iterate) {
                    prop_assert!(w[1].u >= w[0].u - 1e-9, "{} -> {}", w[0].u, w[1].u);
                }
            }
        }
    }
}
