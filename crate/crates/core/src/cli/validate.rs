//! Self-checks of the closed forms against independent numerical oracles.
//!
//! The closed forms are passed in as function pointers so a deliberately
//! broken one can be substituted to confirm the suite catches it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

use crate::analytics::{g1, separation_pdf, t1, t2};
use crate::cli::output::{fmt_sig, Csv};
use crate::downlink::{beta_star, f_m1, f_m1_derivative, f_m2, f_m2_derivative};
use crate::error::Result;
use crate::model::{blockage_probability, sample_blockage, AntennaLayout, BlockageRealization, SystemParams, User, UserLayout};
use crate::quadrature::{integrate, integrate_piecewise};
use crate::rates::{edma_rate, Link, RateModel};

/// The closed forms under test.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub t1: fn(f64, f64) -> f64,
    pub t2: fn(f64, f64) -> f64,
    pub g1: fn(f64, f64) -> Result<f64>,
    /// `(params, length, width) -> bound`
    pub gain_lb: fn(&SystemParams, f64, f64) -> Result<f64>,
    pub block_averaged: fn(Link, usize, &UserLayout, &AntennaLayout, &SystemParams) -> f64,
    pub f_m1_derivative: fn(f64, f64, &SystemParams) -> f64,
    pub f_m2_derivative: fn(f64, f64, f64, &SystemParams) -> f64,
    pub beta_star: fn(f64, &SystemParams) -> Result<f64>,
}

impl Default for ClosedForms {
    fn default() -> Self {
        ClosedForms {
            t1,
            t2,
            g1,
            gain_lb: |p, l, w| Ok(crate::analytics::ergodic_gain_lb(p, l, w)?.value),
            block_averaged: |link, m, u, a, p| edma_rate(link, RateModel::BlockAveraged, m, u, a, p, None).unwrap_or(f64::NAN),
            f_m1_derivative,
            f_m2_derivative,
            beta_star,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        // NaN fails
        self.max_error <= self.tolerance
    }
}

fn suite(name: &'static str, tolerance: f64, errors: impl IntoIterator<Item = f64>) -> SuiteResult {
    let mut cases = 0;
    let mut max_error = 0.0f64;
    for e in errors {
        cases += 1;
        if e.is_nan() || e > max_error {
            max_error = e;
        }
        if max_error.is_nan() {
            break;
        }
    }
    SuiteResult {
        name,
        cases,
        max_error,
        tolerance,
    }
}

fn rel(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / (b.abs() + floor)
}

fn t1_oracle(phi: f64, l: f64) -> f64 {
    integrate_piecewise(|z| separation_pdf(z, l) * (-phi * z * z).exp(), &[0.0, 0.5 * l, l], 1e-14)
}

fn t2_oracle(phi: f64, w: f64) -> f64 {
    integrate(|y| (-phi * y * y).exp(), -0.5 * w, 0.5 * w, 1e-14) / w
}

fn g1_oracle(a: f64, w: f64) -> f64 {
    integrate(|y| (y * y + a).log2(), 0.0, 0.5 * w, 1e-14)
}

/// Expected lower-bound gain by nested quadrature over both users.
fn gain_oracle(p: &SystemParams, l: f64, w: f64) -> f64 {
    let phi = p.blockage_phi;
    let d2 = p.height * p.height;
    let rate = |y: f64| (p.rho_eta() / (y * y + d2)).ln_1p() / LN_2;
    let h = 0.5 * w;
    let inner = |y1: f64, y2: f64| {
        integrate_piecewise(
            |z| {
                separation_pdf(z, l)
                    * ((0.5 - (-phi * (z * z + y2 * y2 + d2)).exp()) * rate(y1)
                        + (0.5 - (-phi * (z * z + y1 * y1 + d2)).exp()) * rate(y2))
            },
            &[0.0, 0.5 * l, l],
            1e-11,
        )
    };
    integrate(|y1| integrate(|y2| inner(y1, y2), -h, h, 1e-10) / w, -h, h, 1e-9) / w
}

/// Probability-weighted sum over every blockage state of the interfering
/// links, using the instantaneous rate.
fn enumeration_oracle(link: Link, m: usize, users: &UserLayout, ants: &AntennaLayout, p: &SystemParams) -> f64 {
    let n = users.len();
    let others: Vec<usize> = (0..n).filter(|&i| p.interferes(i, m)).collect();
    let pair = |i: usize| match link {
        Link::Uplink => (i, m),
        Link::Downlink => (m, i),
    };
    let mut total = 0.0;
    for mask in 0u32..(1 << others.len()) {
        let mut b = BlockageRealization::all_los(n);
        let mut prob = 1.0;
        for (k, &i) in others.iter().enumerate() {
            let (u, a) = pair(i);
            let q = blockage_probability(&users.users[u], ants.x_pin[a], p);
            let los = mask & (1 << k) != 0;
            b.set(u, a, los);
            prob *= if los { q } else { 1.0 - q };
        }
        total += prob * edma_rate(link, RateModel::Sampled, m, users, ants, p, Some(&b)).unwrap_or(f64::NAN);
    }
    total
}

fn random_layout(rng: &mut ChaCha8Rng, n: usize) -> (UserLayout, AntennaLayout) {
    let mut xs: Vec<f64> = (0..n).map(|_| rng.random_range(-15.0..15.0)).collect();
    xs.sort_by(f64::total_cmp);
    let users = UserLayout::new(xs.iter().map(|&x| User::new(x, rng.random_range(-5.0..5.0))).collect());
    let ants = AntennaLayout::new(xs.iter().map(|&x| x + rng.random_range(-2.0..2.0)).collect());
    (users, ants)
}

pub fn run_suites(f: &ClosedForms) -> Vec<SuiteResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut out = Vec::new();

    let inputs: Vec<(f64, f64)> = (0..100)
        .map(|_| (rng.random_range(0.005..0.1), rng.random_range(5.0..80.0)))
        .collect();
    out.push(suite("t1 closed form vs quadrature", 1e-9, inputs.iter().map(|&(phi, l)| ((f.t1)(phi, l) - t1_oracle(phi, l)).abs())));
    out.push(suite("t2 closed form vs quadrature", 1e-9, inputs.iter().map(|&(phi, w)| ((f.t2)(phi, w) - t2_oracle(phi, w)).abs())));
    out.push(suite(
        "g1 closed form vs quadrature",
        1e-9,
        (0..100).map(|_| {
            let a = rng.random_range(1.0..1e4);
            let w = rng.random_range(1.0..30.0);
            (f.g1)(a, w).map_or(f64::NAN, |g| rel(g, g1_oracle(a, w), 1.0))
        }),
    ));
    out.push(suite(
        "ergodic gain bound vs nested quadrature",
        1e-6,
        (0..3).map(|_| {
            let p = SystemParams::default()
                .with_phi(rng.random_range(0.005..0.1))
                .with_height(rng.random_range(2.0..5.0));
            let l = rng.random_range(10.0..80.0);
            let w = rng.random_range(5.0..20.0);
            (f.gain_lb)(&p, l, w).map_or(f64::NAN, |g| rel(g, gain_oracle(&p, l, w), 1e-3))
        }),
    ));

    let layouts: Vec<_> = (0..20).map(|_| random_layout(&mut rng, 3)).collect();
    let p = &SystemParams::default().with_adjacent_only(false).with_phi(0.01);
    out.push(suite(
        "block average vs state enumeration",
        1e-12,
        layouts.iter().flat_map(|(u, a)| {
            [Link::Uplink, Link::Downlink].into_iter().flat_map(move |link| {
                (0..3).map(move |m| rel((f.block_averaged)(link, m, u, a, p), enumeration_oracle(link, m, u, a, p), 1.0))
            })
        }),
    ));
    let draws = 20_000;
    out.push(suite(
        "block average vs sampling (|z|)",
        5.0,
        layouts.iter().take(5).enumerate().map(|(k, (u, a))| {
            let mut r = ChaCha8Rng::seed_from_u64(k as u64);
            let xs: Vec<f64> = (0..draws)
                .map(|_| {
                    let b = sample_blockage(u, a, p, &mut r);
                    (0..3).map(|m| edma_rate(Link::Uplink, RateModel::Sampled, m, u, a, p, Some(&b)).unwrap_or(f64::NAN)).sum::<f64>()
                })
                .collect();
            let mean = xs.iter().sum::<f64>() / draws as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (draws - 1) as f64;
            let target: f64 = (0..3).map(|m| (f.block_averaged)(Link::Uplink, m, u, a, p)).sum();
            (mean - target).abs() / (var / draws as f64).sqrt().max(1e-300)
        }),
    ));

    let fd = |g: &dyn Fn(f64) -> f64, z: f64| {
        let h = 1e-5 * (1.0 + z.abs());
        (g(z + h) - g(z - h)) / (2.0 * h)
    };
    out.push(suite(
        "f_m1 derivative vs central difference",
        1e-6,
        (0..1000).map(|_| {
            let p = SystemParams::default().with_phi(rng.random_range(0.005..0.1));
            let y = rng.random_range(-5.0..5.0);
            let z = rng.random_range(-20.0..20.0);
            rel((f.f_m1_derivative)(z, y, &p), fd(&|t| f_m1(t, y, &p), z), 1e-4)
        }),
    ));
    out.push(suite(
        "f_m2 derivative vs central difference",
        1e-6,
        (0..1000).map(|_| {
            let p = SystemParams::default().with_tx_dbm(rng.random_range(0.0..40.0));
            let y = rng.random_range(-5.0..5.0);
            let xm = rng.random_range(-20.0..20.0);
            let z = rng.random_range(-20.0..20.0);
            rel((f.f_m2_derivative)(z, xm, y, &p), fd(&|t| f_m2(t, xm, y, &p).unwrap_or(f64::NAN), z), 1e-4)
        }),
    ));
    out.push(suite(
        "convexity half-width root residual",
        1e-9,
        (0..100).map(|_| {
            let p = SystemParams::default()
                .with_phi(rng.random_range(0.005..0.1))
                .with_height(rng.random_range(2.0..5.0));
            let y = rng.random_range(-5.0..5.0);
            (f.beta_star)(y, &p).map_or(f64::NAN, |b| {
                let s = b * b + y * y + p.height * p.height;
                (-(-p.blockage_phi * s).exp_m1() - 2.0 * p.blockage_phi * b * b).abs()
            })
        }),
    ));
    out
}

/// Table of suite results and whether all passed.
pub fn cmd_validate(f: &ClosedForms) -> (String, bool) {
    let results = run_suites(f);
    let mut csv = Csv::new(&["suite", "cases", "max_error", "tolerance", "status"]);
    for r in &results {
        csv.row(&[
            r.name.into(),
            r.cases.to_string(),
            fmt_sig(r.max_error),
            fmt_sig(r.tolerance),
            if r.passed() { "PASS" } else { "FAIL" }.into(),
        ]);
    }
    (csv.into_string(), results.iter().all(SuiteResult::passed))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_build_passes() {
        let (table, ok) = cmd_validate(&ClosedForms::default());
        assert!(ok, "{table}");
        assert_eq!(table.lines().count(), 10);
    }

    #[test]
    fn injected_errors_are_caught() {
        let mut broken = ClosedForms::default();
        broken.t1 = |phi, l| 1.01 * t1(phi, l);
        let results = run_suites(&broken);
        assert!(!results[0].passed());
        assert!(results[1..].iter().all(SuiteResult::passed));

        let mut broken = ClosedForms::default();
        broken.f_m2_derivative = |z, x, y, p| f_m2_derivative(z, x, y, p) * (1.0 + 1e-5);
        assert!(!cmd_validate(&broken).1);

        let mut broken = ClosedForms::default();
        broken.block_averaged = |link, m, u, a, p| edma_rate(link, RateModel::LowerBound, m, u, a, p, None).unwrap();
        let results = run_suites(&broken);
        assert!(!results[4].passed() && !results[5].passed());
    }
}
