//! Geometry, channel gains and stochastic line-of-sight blockage for a
//! segmented waveguide carrying one pinching antenna per segment.
//!
//! Coordinates: the service area is centred at the origin, users sit on the
//! floor (`z = 0`) and every antenna sits on the waveguide at `(x, 0, d)`.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Effective refractive index used for the default guided wavelength.
pub const DEFAULT_REFRACTIVE_INDEX: f64 = 1.4;

/// Converts a power in dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Physical constants and link budget.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub carrier_frequency: f64,
    pub wavelength: f64,
    pub waveguide_wavelength: f64,
    /// `c² / (16π² f_c²)`
    pub eta: f64,
    /// Waveguide height `d`.
    pub height: f64,
    /// Blockage rate `φ` in `P(LoS) = exp(−φ·dist²)`.
    pub blockage_phi: f64,
    pub tx_power: f64,
    pub noise_power: f64,
    /// Transmit SNR, `tx_power / noise_power`.
    pub rho: f64,
    /// Serving links are always line of sight.
    pub assume_serving_los: bool,
    /// Only the two neighbouring segments interfere.
    pub adjacent_only: bool,
}

impl Default for SystemParams {
    /// 28 GHz, 3 m waveguide, φ = 0.02, 30 dBm transmit, −90 dBm noise.
    fn default() -> Self {
        SystemParams::new(28e9, 3.0, 0.02, 30.0, -90.0).expect("valid defaults")
    }
}

impl SystemParams {
    pub fn new(
        carrier_frequency: f64,
        height: f64,
        blockage_phi: f64,
        tx_dbm: f64,
        noise_dbm: f64,
    ) -> Result<Self> {
        if !(carrier_frequency > 0.0 && carrier_frequency.is_finite()) {
            return Err(Error::Invalid(format!("carrier frequency {carrier_frequency} must be positive")));
        }
        if !(height > 0.0 && height.is_finite()) {
            return Err(Error::Invalid(format!("waveguide height {height} must be positive")));
        }
        if !(blockage_phi >= 0.0) {
            return Err(Error::Invalid(format!("blockage parameter {blockage_phi} must be non-negative")));
        }
        if !tx_dbm.is_finite() || !noise_dbm.is_finite() {
            return Err(Error::Invalid("powers must be finite".into()));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_frequency;
        let tx_power = dbm_to_watts(tx_dbm);
        let noise_power = dbm_to_watts(noise_dbm);
        Ok(SystemParams {
            carrier_frequency,
            wavelength,
            waveguide_wavelength: wavelength / DEFAULT_REFRACTIVE_INDEX,
            eta: wavelength * wavelength / (16.0 * std::f64::consts::PI.powi(2)),
            height,
            blockage_phi,
            tx_power,
            noise_power,
            rho: tx_power / noise_power,
            assume_serving_los: true,
            adjacent_only: true,
        })
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.blockage_phi = phi;
        self
    }

    pub fn with_tx_dbm(mut self, tx_dbm: f64) -> Self {
        self.tx_power = dbm_to_watts(tx_dbm);
        self.rho = self.tx_power / self.noise_power;
        self
    }

    pub fn with_height(mut self, height: f64) -> Self {
        self.height = height;
        self
    }

    pub fn with_adjacent_only(mut self, on: bool) -> Self {
        self.adjacent_only = on;
        self
    }

    pub fn with_serving_los(mut self, on: bool) -> Self {
        self.assume_serving_los = on;
        self
    }

    pub fn with_waveguide_wavelength(mut self, lambda_g: f64) -> Self {
        self.waveguide_wavelength = lambda_g;
        self
    }

    /// `ρη`, the received SNR at unit distance.
    pub fn rho_eta(&self) -> f64 {
        self.rho * self.eta
    }

    /// Whether user/antenna pair `(i, m)` can carry interference at all.
    pub fn interferes(&self, i: usize, m: usize) -> bool {
        i != m && (!self.adjacent_only || i.abs_diff(m) == 1)
    }
}

/// A user on the floor at `(x, y, 0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub x: f64,
    pub y: f64,
}

impl User {
    pub fn new(x: f64, y: f64) -> Self {
        User { x, y }
    }
}

/// Rectangular service area split into consecutive segments along x.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceArea {
    pub length: f64,
    pub width: f64,
    pub segments: Vec<(f64, f64)>,
}

impl ServiceArea {
    /// `count` equal segments tiling `[−length/2, length/2]`.
    pub fn equal(length: f64, width: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::Invalid("at least one segment is required".into()));
        }
        let step = length / count as f64;
        let segments = (0..count)
            .map(|m| {
                let s = -length / 2.0 + step * m as f64;
                let e = if m + 1 == count { length / 2.0 } else { s + step };
                (s, e)
            })
            .collect();
        ServiceArea::new(length, width, segments)
    }

    /// Contiguous segments of the given widths, centred on the origin.
    pub fn from_widths(length: f64, width: f64, widths: &[f64]) -> Result<Self> {
        let total: f64 = widths.iter().sum();
        if total > length * (1.0 + 1e-12) {
            return Err(Error::Invalid(format!(
                "segment widths sum to {total} m, more than the area length {length} m"
            )));
        }
        let mut s = -total / 2.0;
        let segments = widths
            .iter()
            .map(|w| {
                let seg = (s, s + w);
                s += w;
                seg
            })
            .collect();
        ServiceArea::new(length, width, segments)
    }

    pub fn new(length: f64, width: f64, segments: Vec<(f64, f64)>) -> Result<Self> {
        if !(length > 0.0) || !(width >= 0.0) {
            return Err(Error::Invalid(format!("bad area dimensions {length} x {width}")));
        }
        let half = length / 2.0 * (1.0 + 1e-12);
        let mut prev_end = f64::NEG_INFINITY;
        for (k, &(s, e)) in segments.iter().enumerate() {
            if !(e > s) {
                return Err(Error::Invalid(format!("segment {k} is empty: [{s}, {e}]")));
            }
            if s < -half || e > half {
                return Err(Error::Invalid(format!("segment {k} leaves the service area")));
            }
            if s < prev_end - 1e-12 {
                return Err(Error::Invalid(format!("segment {k} overlaps its predecessor")));
            }
            prev_end = e;
        }
        if segments.is_empty() {
            return Err(Error::Invalid("at least one segment is required".into()));
        }
        Ok(ServiceArea { length, width, segments })
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

/// One user per segment, sorted by x.
#[derive(Debug, Clone, PartialEq)]
pub struct UserLayout {
    pub users: Vec<User>,
}

impl UserLayout {
    pub fn new(users: Vec<User>) -> Self {
        UserLayout { users }
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    /// Checks segment membership, the width bound and x ordering.
    pub fn validate(&self, area: &ServiceArea) -> Result<()> {
        if self.users.len() != area.segments.len() {
            return Err(Error::Invalid(format!(
                "{} users for {} segments",
                self.users.len(),
                area.segments.len()
            )));
        }
        let tol = 1e-9;
        for (m, (u, &(s, e))) in self.users.iter().zip(&area.segments).enumerate() {
            if u.x < s - tol || u.x > e + tol {
                return Err(Error::Invalid(format!("user {m} at x={} is outside [{s}, {e}]", u.x)));
            }
            if u.y.abs() > area.width / 2.0 + tol {
                return Err(Error::Invalid(format!("user {m} at y={} is outside the area", u.y)));
            }
        }
        if self.users.windows(2).any(|w| w[0].x > w[1].x) {
            return Err(Error::Invalid("users must be sorted by x".into()));
        }
        Ok(())
    }
}

/// Antenna x-coordinates, one per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaLayout {
    pub x_pin: Vec<f64>,
}

impl AntennaLayout {
    pub fn new(x_pin: Vec<f64>) -> Self {
        AntennaLayout { x_pin }
    }

    /// Every antenna directly above its user.
    pub fn at_users(users: &UserLayout) -> Self {
        AntennaLayout {
            x_pin: users.users.iter().map(|u| u.x).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.x_pin.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_pin.is_empty()
    }

    pub fn within(&self, area: &ServiceArea) -> bool {
        self.x_pin.len() == area.segments.len()
            && self
                .x_pin
                .iter()
                .zip(&area.segments)
                .all(|(&x, &(s, e))| x >= s - 1e-12 && x <= e + 1e-12)
    }
}

/// LoS indicators; entry `(i, m)` is the link between user `i` and antenna `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockageRealization {
    size: usize,
    alpha: Vec<bool>,
}

impl BlockageRealization {
    pub fn all_los(size: usize) -> Self {
        BlockageRealization {
            size,
            alpha: vec![true; size * size],
        }
    }

    pub fn from_fn(size: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut alpha = Vec::with_capacity(size * size);
        for i in 0..size {
            for m in 0..size {
                alpha.push(f(i, m));
            }
        }
        BlockageRealization { size, alpha }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn los(&self, user: usize, antenna: usize) -> bool {
        self.alpha[user * self.size + antenna]
    }

    pub fn set(&mut self, user: usize, antenna: usize, los: bool) {
        self.alpha[user * self.size + antenna] = los;
    }
}

/// Squared distance between a floor user and an antenna at `(x_pin, 0, d)`.
pub fn squared_distance(user: &User, x_pin: f64, height: f64) -> f64 {
    let dx = user.x - x_pin;
    dx * dx + user.y * user.y + height * height
}

pub fn link_distance(user: &User, x_pin: f64, height: f64) -> f64 {
    squared_distance(user, x_pin, height).sqrt()
}

/// Complex channel between a user and an antenna fed from `feed_x` on the
/// same segment. Magnitude `√η / dist`; phase accumulates over the free-space
/// path and the in-waveguide run from the feed.
pub fn channel_gain(user: &User, x_pin: f64, feed_x: f64, params: &SystemParams) -> Result<Complex64> {
    let dist = link_distance(user, x_pin, params.height);
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::domain("channel_gain", format!("link distance {dist}")));
    }
    let in_guide = (x_pin - feed_x).abs();
    let phase = -2.0 * std::f64::consts::PI * (dist / params.wavelength + in_guide / params.waveguide_wavelength);
    Ok(Complex64::from_polar(params.eta.sqrt() / dist, phase.rem_euclid(2.0 * std::f64::consts::PI)))
}

/// `|h|² = η / dist²`, the only channel quantity the rate formulas use.
pub fn power_gain(user: &User, x_pin: f64, params: &SystemParams) -> f64 {
    params.eta / squared_distance(user, x_pin, params.height)
}

/// `P(LoS) = exp(−φ·dist²)`.
pub fn blockage_probability(user: &User, x_pin: f64, params: &SystemParams) -> f64 {
    (-params.blockage_phi * squared_distance(user, x_pin, params.height)).exp()
}

/// Draws every indicator independently, then applies the serving-link and
/// adjacency flags.
pub fn sample_blockage<R: Rng + ?Sized>(
    users: &UserLayout,
    antennas: &AntennaLayout,
    params: &SystemParams,
    rng: &mut R,
) -> BlockageRealization {
    let n = users.len();
    assert_eq!(n, antennas.len(), "one antenna per user");
    BlockageRealization::from_fn(n, |i, m| {
        let p = blockage_probability(&users.users[i], antennas.x_pin[m], params);
        let drawn = rng.random::<f64>() < p;
        if i == m && params.assume_serving_los {
            true
        } else if i != m && params.adjacent_only && i.abs_diff(m) >= 2 {
            false
        } else {
            drawn
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn distances() {
        let d = 3.0;
        assert_eq!(link_distance(&User::new(0.0, 0.0), 0.0, d), 3.0);
        assert_eq!(link_distance(&User::new(4.0, 0.0), 0.0, d), 5.0);
        assert!((link_distance(&User::new(1.0, 2.0), -1.0, d) - 17f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn eta_at_28_ghz() {
        let p = SystemParams::default();
        let direct = SPEED_OF_LIGHT.powi(2) / (16.0 * std::f64::consts::PI.powi(2) * 28e9f64.powi(2));
        assert!((p.eta - direct).abs() / direct < 1e-12);
        assert!((p.eta - 7.2596e-7).abs() < 1e-10);
        assert!((p.rho - 1e12).abs() / 1e12 < 1e-12);
    }

    #[test]
    fn channel_magnitude_follows_inverse_distance() {
        let p = SystemParams::default();
        let u = User::new(0.0, 0.0);
        let h3 = channel_gain(&u, 0.0, -5.0, &p).unwrap();
        assert!((h3.norm() - 2.840e-4).abs() < 1e-6);
        assert!((h3.norm_sqr() - p.eta / 9.0).abs() < 1e-18);
        let p6 = p.clone().with_height(6.0);
        let h6 = channel_gain(&u, 0.0, -5.0, &p6).unwrap();
        assert!((h3.norm() / h6.norm() - 2.0).abs() < 1e-12);
        // magnitude does not depend on where the feed is
        let h_other = channel_gain(&u, 0.0, -1.234, &p).unwrap();
        assert!((h3.norm() - h_other.norm()).abs() < 1e-18);
        assert!(h3.arg() != h_other.arg());
    }

    #[test]
    fn blockage_probability_values() {
        let p = SystemParams::default().with_phi(0.0);
        assert_eq!(blockage_probability(&User::new(30.0, 4.0), 0.0, &p), 1.0);
        let p = SystemParams::default();
        // dist² = 4² + 0 + 3² = 25
        let v = blockage_probability(&User::new(4.0, 0.0), 0.0, &p);
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        assert!((v - 0.6065).abs() < 1e-4);
        assert!(blockage_probability(&User::new(1e4, 0.0), 0.0, &p) < 1e-300);
    }

    #[test]
    fn sampling_flags() {
        let users = UserLayout::new((0..5).map(|m| User::new(m as f64 * 2.0, 0.0)).collect());
        let ants = AntennaLayout::at_users(&users);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = SystemParams::default().with_phi(0.0).with_adjacent_only(false);
        let b = sample_blockage(&users, &ants, &p, &mut rng);
        assert_eq!(b, BlockageRealization::all_los(5));
        let p = SystemParams::default().with_phi(0.0);
        for _ in 0..50 {
            let b = sample_blockage(&users, &ants, &p, &mut rng);
            assert!(!b.los(0, 3) && !b.los(1, 4) && !b.los(3, 0));
            assert!((0..5).all(|m| b.los(m, m)));
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let users = UserLayout::new(vec![User::new(-3.0, 1.0), User::new(0.5, -2.0), User::new(4.0, 0.0)]);
        let ants = AntennaLayout::at_users(&users);
        let p = SystemParams::default();
        let a = sample_blockage(&users, &ants, &p, &mut ChaCha8Rng::seed_from_u64(9));
        let b = sample_blockage(&users, &ants, &p, &mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn empirical_los_frequency() {
        let users = UserLayout::new(vec![User::new(-2.0, 1.5), User::new(2.0, -1.0)]);
        let ants = AntennaLayout::at_users(&users);
        let p = SystemParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 1_000_000;
        let mut hits = 0u32;
        for _ in 0..draws {
            if sample_blockage(&users, &ants, &p, &mut rng).los(0, 1) {
                hits += 1;
            }
        }
        let q = blockage_probability(&users.users[0], ants.x_pin[1], &p);
        let freq = hits as f64 / draws as f64;
        let se = (q * (1.0 - q) / draws as f64).sqrt();
        assert!((freq - q).abs() < 3.0 * se, "freq {freq} vs {q}");
    }

    #[test]
    fn area_validation() {
        let a = ServiceArea::equal(40.0, 10.0, 5).unwrap();
        assert_eq!(a.segments[0], (-20.0, -12.0));
        assert_eq!(a.segments[4].1, 20.0);
        assert!(ServiceArea::new(10.0, 5.0, vec![(-5.0, 1.0), (0.0, 5.0)]).is_err());
        assert!(ServiceArea::new(10.0, 5.0, vec![(-6.0, 1.0)]).is_err());
        assert!(ServiceArea::from_widths(10.0, 5.0, &[6.0, 6.0]).is_err());
        let c = ServiceArea::from_widths(40.0, 10.0, &[40.0 / 12.0, 40.0 / 3.0, 40.0 / 12.0]).unwrap();
        assert!((c.segments[0].0 + 10.0).abs() < 1e-12 && (c.segments[2].1 - 10.0).abs() < 1e-12);
        let users = UserLayout::new(vec![User::new(-15.0, 0.0)]);
        assert!(users.validate(&ServiceArea::equal(40.0, 10.0, 1).unwrap()).is_ok());
        let bad = UserLayout::new(vec![User::new(0.0, 6.0)]);
        assert!(bad.validate(&ServiceArea::equal(40.0, 10.0, 1).unwrap()).is_err());
    }
}
