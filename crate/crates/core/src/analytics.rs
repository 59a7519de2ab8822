//! Closed-form results for two users placed in equal halves of the area.
//!
//! The users sit at `x₁ ∈ [−D_L/2, 0]` and `x₂ ∈ [0, D_L/2]`, each antenna
//! directly above its user. The gain of EDMA over pinching TDMA is measured
//! through the lower bound that keeps only fully blocked interference.

use crate::error::{Error, Result};
use crate::model::SystemParams;
use crate::numerics::erf;
use std::f64::consts::{LN_2, LOG2_E, PI};

/// Density of the separation `x₂ − x₁`: triangular on `[0, D_L]`.
pub fn separation_pdf(z: f64, length: f64) -> f64 {
    let l2 = length * length;
    if !(0.0..=length).contains(&z) {
        0.0
    } else if z <= 0.5 * length {
        4.0 * z / l2
    } else {
        4.0 * (length - z) / l2
    }
}

/// Distribution function of the separation.
pub fn separation_cdf(z: f64, length: f64) -> f64 {
    if z <= 0.0 {
        0.0
    } else if z >= length {
        1.0
    } else if z <= 0.5 * length {
        2.0 * z * z / (length * length)
    } else {
        let r = length - z;
        1.0 - 2.0 * r * r / (length * length)
    }
}

/// `E[exp(−φ z²)]` over the separation distribution.
pub fn t1(phi: f64, length: f64) -> f64 {
    if phi == 0.0 {
        return 1.0;
    }
    let s = phi.sqrt() * length;
    let s2 = s * s;
    let erf_part = 2.0 * PI.sqrt() / s * (erf(s) - erf(0.5 * s));
    // 1 − 2e^{−s²/4} + e^{−s²} without cancellation
    let exp_part = 2.0 / s2 * ((-s2).exp_m1() - 2.0 * (-0.25 * s2).exp_m1());
    erf_part + exp_part
}

/// `E[exp(−φ y²)]` for `y` uniform on `[−D_W/2, D_W/2]`.
pub fn t2(phi: f64, width: f64) -> f64 {
    if phi == 0.0 || width == 0.0 {
        return 1.0;
    }
    let s = phi.sqrt() * width;
    PI.sqrt() / s * erf(0.5 * s)
}

/// `∫₀^{D_W/2} log₂(y² + a) dy` in closed form.
pub fn g1(a: f64, width: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::domain("g1", format!("needs a > 0, got {a}")));
    }
    let ra = a.sqrt();
    Ok(0.5 * width * (0.25 * width * width + a).log2() - LOG2_E * width
        + 2.0 * LOG2_E * ra * (width / (2.0 * ra)).atan())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    General,
    Centerline,
    AsymptoticLarge,
    AsymptoticSmall,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainBound {
    pub value: f64,
    pub regime: Regime,
}

fn check_positive(function: &'static str, name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(function, format!("{name} must be positive, got {v}")))
    }
}

/// Lower bound on the ergodic uplink sum-rate gain over pinching TDMA with
/// users uniform across a `D_L × D_W` area.
pub fn ergodic_gain_lb(params: &SystemParams, length: f64, width: f64) -> Result<GainBound> {
    check_positive("ergodic_gain_lb", "length", length)?;
    check_positive("ergodic_gain_lb", "width", width)?;
    let d2 = params.height * params.height;
    let blocked = 1.0 - 2.0 * (-params.blockage_phi * d2).exp() * t1(params.blockage_phi, length) * t2(params.blockage_phi, width);
    let rate = 2.0 / width * (g1(d2 + params.rho_eta(), width)? - g1(d2, width)?);
    Ok(GainBound {
        value: blocked * rate,
        regime: Regime::General,
    })
}

/// The same bound with both users on the waveguide centerline.
pub fn ergodic_gain_lb_centerline(params: &SystemParams, length: f64) -> Result<GainBound> {
    check_positive("ergodic_gain_lb_centerline", "length", length)?;
    let d2 = params.height * params.height;
    let e = (-params.blockage_phi * d2).exp();
    Ok(GainBound {
        value: (1.0 - 2.0 * e * t1(params.blockage_phi, length)) * centerline_rate(params),
        regime: Regime::Centerline,
    })
}

/// Leading-order forms of the centerline bound for `φD_L² → ∞`
/// (`large = true`) and `φD_L² → 0`.
pub fn centerline_asymptote(params: &SystemParams, length: f64, large: bool) -> Result<GainBound> {
    check_positive("centerline_asymptote", "length", length)?;
    let phi = params.blockage_phi;
    let e = (-phi * params.height * params.height).exp();
    let rate = centerline_rate(params);
    Ok(if large {
        if phi == 0.0 {
            return Err(Error::domain("centerline_asymptote", "large-area form needs phi > 0"));
        }
        GainBound {
            value: (1.0 - 4.0 * e / (phi * length * length)) * rate,
            regime: Regime::AsymptoticLarge,
        }
    } else {
        GainBound {
            value: (1.0 - 2.0 * e) * rate,
            regime: Regime::AsymptoticSmall,
        }
    })
}

fn centerline_rate(params: &SystemParams) -> f64 {
    (params.rho_eta() / (params.height * params.height)).ln_1p() / LN_2
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Every separation gives EDMA the larger instantaneous sum rate.
    AlwaysWins,
    /// EDMA wins once the separation reaches this many meters.
    Separation(f64),
}

/// Separation at which `1 − 2exp(−φ(z² + d²))` changes sign.
pub fn nu_threshold(phi: f64, height: f64) -> Result<Threshold> {
    check_positive("nu_threshold", "phi", phi)?;
    let r = LN_2 / phi - height * height;
    Ok(if r < 0.0 {
        Threshold::AlwaysWins
    } else {
        Threshold::Separation(r.sqrt())
    })
}

/// Lower bound on the probability that EDMA beats TDMA for two users on
/// the centerline.
pub fn win_probability_lb(phi: f64, height: f64, length: f64) -> Result<f64> {
    check_positive("win_probability_lb", "length", length)?;
    let nu = match nu_threshold(phi, height)? {
        Threshold::AlwaysWins => return Ok(1.0),
        Threshold::Separation(nu) => nu,
    };
    if nu > length {
        return Err(Error::OutOfRegime { nu, length });
    }
    let r = nu / length;
    Ok(if nu <= 0.5 * length {
        1.0 - 2.0 * r * r
    } else {
        2.0 * (1.0 - r) * (1.0 - r)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_piecewise};
    use proptest::prelude::*;

    fn params(phi: f64) -> SystemParams {
        SystemParams::default().with_phi(phi)
    }

    #[test]
    fn pdf_shape_and_mass() {
        let l = 20.0;
        assert!((separation_pdf(10.0, l) - 0.1).abs() < 1e-15);
        assert_eq!(separation_pdf(0.0, l), 0.0);
        assert_eq!(separation_pdf(l, l), 0.0);
        assert_eq!(separation_pdf(-1.0, l), 0.0);
        let mass = integrate_piecewise(|z| separation_pdf(z, l), &[0.0, 10.0, 20.0], 1e-14);
        assert!((mass - 1.0).abs() < 1e-12);
        for &z in &[0.0f64, 3.0, 10.0, 14.0, 20.0] {
            let q = integrate_piecewise(|t| separation_pdf(t, l), &[0.0, z.min(10.0), z], 1e-14);
            assert!((separation_cdf(z, l) - q).abs() < 1e-12);
        }
    }

    // Separation of independent uniforms on adjacent halves, by quadrature
    // of the convolution integral.
    #[test]
    fn pdf_matches_convolution() {
        let l = 12.0;
        for &z in &[1.0, 4.0, 6.0, 9.5] {
            // x₁ ~ U[−l/2, 0], x₂ = x₁ + z must land in [0, l/2]
            let inside = integrate(
                |x1| if (0.0..=0.5 * l).contains(&(x1 + z)) { 1.0 } else { 0.0 },
                -0.5 * l,
                0.0,
                1e-10,
            );
            let density = inside / (0.5 * l) / (0.5 * l);
            assert!((density - separation_pdf(z, l)).abs() < 1e-6, "z={z}");
        }
    }

    fn t1_quadrature(phi: f64, l: f64) -> f64 {
        integrate_piecewise(|z| (-phi * z * z).exp() * separation_pdf(z, l), &[0.0, 0.5 * l, l], 1e-14)
    }

    #[test]
    fn t1_against_quadrature() {
        assert!((t1(0.02, 20.0) - t1_quadrature(0.02, 20.0)).abs() < 1e-9);
        for &(phi, l) in &[(1e-6, 3.0), (0.001, 10.0), (0.04, 40.0), (1.0, 100.0), (0.3, 0.5)] {
            assert!((t1(phi, l) - t1_quadrature(phi, l)).abs() < 1e-9, "phi={phi} l={l}");
        }
    }

    #[test]
    fn t1_limits() {
        assert_eq!(t1(0.0, 10.0), 1.0);
        assert!((t1(1e-14, 10.0) - 1.0).abs() < 1e-9);
        let (phi, l) = (2.0, 100.0);
        let asym = 2.0 / (phi * l * l);
        assert!((t1(phi, l) / asym - 1.0).abs() < 1e-9);
    }

    #[test]
    fn t2_against_quadrature() {
        for &(phi, w) in &[(0.02, 10.0), (0.5, 3.0), (1e-5, 8.0)] {
            let q = integrate(|y| (-phi * y * y).exp() / w, -0.5 * w, 0.5 * w, 1e-14);
            assert!((t2(phi, w) - q).abs() < 1e-12);
        }
    }

    #[test]
    fn g1_values() {
        assert!((g1(1.0, 2.0).unwrap() - 0.3808).abs() < 1e-4);
        for &(a, w) in &[(1.0, 2.0), (9.0, 10.0), (1e6, 4.0), (0.01, 20.0)] {
            let q = integrate(|y| (y * y + a).log2(), 0.0, 0.5 * w, 1e-14);
            assert!((g1(a, w).unwrap() - q).abs() < 1e-9);
        }
        assert!(g1(0.0, 1.0).is_err());
        assert!(g1(-1.0, 1.0).is_err());
    }

    // Expectation of the two-user lower-bound gain over y₁, y₂ and the
    // separation, by nested adaptive quadrature.
    fn gain_nested(p: &SystemParams, l: f64, w: f64) -> f64 {
        let phi = p.blockage_phi;
        let d2 = p.height * p.height;
        let rate = |y: f64| (p.rho_eta() / (y * y + d2)).ln_1p() / LN_2;
        let h = 0.5 * w;
        let inner = |y1: f64, y2: f64| {
            integrate_piecewise(
                |z| {
                    let f = separation_pdf(z, l);
                    f * ((0.5 - (-phi * (z * z + y2 * y2 + d2)).exp()) * rate(y1)
                        + (0.5 - (-phi * (z * z + y1 * y1 + d2)).exp()) * rate(y2))
                },
                &[0.0, 0.5 * l, l],
                1e-11,
            )
        };
        integrate(|y1| integrate(|y2| inner(y1, y2), -h, h, 1e-10) / w, -h, h, 1e-9) / w
    }

    #[test]
    fn ergodic_gain_against_nested_quadrature() {
        let p = params(0.04);
        let closed = ergodic_gain_lb(&p, 40.0, 10.0).unwrap();
        assert_eq!(closed.regime, Regime::General);
        let q = gain_nested(&p, 40.0, 10.0);
        assert!((closed.value - q).abs() <= 1e-6 * q.abs(), "{} vs {q}", closed.value);
    }

    #[test]
    fn ergodic_gain_sign_limits() {
        // φD² ≥ 50 on both axes
        let p = params(2.0);
        assert!(ergodic_gain_lb(&p, 40.0, 10.0).unwrap().value > 0.0);
        // φD² ≤ 1e−3 on both axes
        let p = params(1e-5);
        assert!(ergodic_gain_lb(&p, 10.0, 10.0).unwrap().value < 0.0);
    }

    fn centerline_quadrature(p: &SystemParams, l: f64) -> f64 {
        let d2 = p.height * p.height;
        let rate = (p.rho_eta() / d2).ln_1p() / LN_2;
        integrate_piecewise(
            |z| separation_pdf(z, l) * 2.0 * (0.5 - (-p.blockage_phi * (z * z + d2)).exp()) * rate,
            &[0.0, 0.5 * l, l],
            1e-13,
        )
    }

    #[test]
    fn centerline_against_quadrature() {
        for &(phi, l) in &[(0.02, 20.0), (0.005, 8.0), (0.1, 60.0), (0.5, 2.0)] {
            let p = params(phi);
            let c = ergodic_gain_lb_centerline(&p, l).unwrap();
            assert_eq!(c.regime, Regime::Centerline);
            let q = centerline_quadrature(&p, l);
            assert!((c.value - q).abs() < 1e-9, "phi={phi} l={l}: {} vs {q}", c.value);
        }
    }

    #[test]
    fn centerline_asymptotes() {
        let p = params(1.0);
        let l = 200.0;
        let exact = ergodic_gain_lb_centerline(&p, l).unwrap().value;
        let large = centerline_asymptote(&p, l, true).unwrap();
        assert_eq!(large.regime, Regime::AsymptoticLarge);
        assert!(exact > 0.0 && large.value > 0.0);
        assert!((exact - large.value).abs() < 1e-6 * exact);

        let p = params(1e-6);
        let l = 1.0;
        let exact = ergodic_gain_lb_centerline(&p, l).unwrap().value;
        let small = centerline_asymptote(&p, l, false).unwrap();
        assert_eq!(small.regime, Regime::AsymptoticSmall);
        assert!(exact < 0.0 && small.value < 0.0);
        assert!((exact - small.value).abs() < 1e-5 * exact.abs());
    }

    #[test]
    fn nu_examples() {
        let d = 3.0;
        match nu_threshold(LN_2 / (d * d), d).unwrap() {
            Threshold::Separation(v) => assert!(v.abs() < 1e-7),
            t => panic!("{t:?}"),
        }
        assert_eq!(nu_threshold(0.1, d).unwrap(), Threshold::AlwaysWins);
        let Threshold::Separation(nu) = nu_threshold(0.02, d).unwrap() else {
            panic!()
        };
        assert!((nu - 5.0654).abs() < 1e-4);
        // 2exp(−φ(ν² + d²)) = 1
        assert!((2.0 * (-0.02 * (nu * nu + 9.0)).exp() - 1.0).abs() < 1e-12);
        assert!(nu_threshold(0.0, d).is_err());
    }

    #[test]
    fn win_probability_examples() {
        let p = win_probability_lb(0.02, 3.0, 20.0).unwrap();
        assert!((p - 0.8717).abs() < 1e-4);
        let tail = integrate_piecewise(|z| separation_pdf(z, 20.0), &[5.0654, 10.0, 20.0], 1e-14);
        assert!((p - tail).abs() < 1e-4);
        assert_eq!(win_probability_lb(0.5, 3.0, 20.0).unwrap(), 1.0);
        let Threshold::Separation(nu) = nu_threshold(0.02, 3.0).unwrap() else {
            panic!()
        };
        assert!(win_probability_lb(0.02, 3.0, nu).unwrap().abs() < 1e-15);
        assert!(matches!(win_probability_lb(0.02, 3.0, 4.0), Err(Error::OutOfRegime { .. })));
        // ν = 0 at the boundary φ = ln2/d²
        assert!((win_probability_lb(LN_2 / 9.0, 3.0, 10.0).unwrap() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn win_probability_is_the_separation_tail(phi in 0.005f64..0.07, d in 0.5f64..3.5, extra in 0.0f64..60.0) {
            if let Threshold::Separation(nu) = nu_threshold(phi, d).unwrap() {
                let l = nu + extra + 1e-9;
                let lb = win_probability_lb(phi, d, l).unwrap();
                let tail = 1.0 - separation_cdf(nu, l);
                prop_assert!((lb - tail).abs() < 1e-12);
                let q = integrate_piecewise(|z| separation_pdf(z, l), &[nu, (0.5 * l).max(nu), l], 1e-13);
                prop_assert!((lb - q).abs() < 1e-9);
            }
        }

        #[test]
        fn win_probability_monotone_in_length(phi in 0.005f64..0.07, d in 0.5f64..3.5) {
            if let Threshold::Separation(nu) = nu_threshold(phi, d).unwrap() {
                let mut prev = 0.0;
                for k in 0..200 {
                    let l = nu * (1.0 + k as f64 * 0.05);
                    let v = win_probability_lb(phi, d, l).unwrap();
                    prop_assert!(v >= prev - 1e-15);
                    prev = v;
                }
            }
        }

        #[test]
        fn g1_increasing(a in 0.01f64..1e4, da in 1e-3f64..100.0, w in 0.1f64..50.0) {
            prop_assert!(g1(a + da, w).unwrap() > g1(a, w).unwrap());
        }

        #[test]
        fn t1_in_unit_interval(phi in 0.0f64..5.0, l in 0.01f64..500.0) {
            let v = t1(phi, l);
            prop_assert!(v > 0.0 && v <= 1.0 + 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn ergodic_gain_matches_nested_quadrature(phi in 0.005f64..0.1, l in 5.0f64..60.0, w in 2.0f64..20.0, h in 1.0f64..5.0) {
            let p = SystemParams::default().with_phi(phi).with_height(h);
            let closed = ergodic_gain_lb(&p, l, w).unwrap().value;
            let q = gain_nested(&p, l, w);
            prop_assert!((closed - q).abs() <= 1e-6 * q.abs().max(1e-3), "{} vs {}", closed, q);
        }
    }
}
