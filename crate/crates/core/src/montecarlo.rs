//! Seeded Monte Carlo over user layouts and blockage.
//!
//! Trial `i` draws from its own ChaCha8 stream `(seed, i)`, so results do not
//! depend on thread count or scheduling. Within a trial the layout is drawn
//! first, which gives every scheme evaluated on that trial the same users.
//! Per-trial values are collected in trial order and reduced by pairwise
//! summation.

use crate::downlink::sca_optimize;
use crate::error::{Error, Result};
use crate::model::{sample_blockage, AntennaLayout, ServiceArea, SystemParams, User, UserLayout};
use crate::placement::exhaustive_placement;
use crate::rates::{
    edma_sum_rate, tdma_conv_rates, tdma_pinch_rates, Link, RateModel, Scheme,
};
use crate::uplink::{midpoint_heuristic, optimize_uplink_placements};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√trials`; NaN for a single trial.
    pub stderr: f64,
    pub trials: usize,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_samples(values: &[f64], seed: u64) -> Self {
        let n = values.len();
        let mean = pairwise_sum(values) / n as f64;
        let stderr = if n > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            f64::NAN
        };
        McEstimate {
            mean,
            stderr,
            trials: n,
            seed,
        }
    }

    /// Scales mean and standard error together.
    pub fn scaled(self, factor: f64) -> Self {
        McEstimate {
            mean: self.mean * factor,
            stderr: self.stderr * factor.abs(),
            ..self
        }
    }
}

/// Independent random stream for one trial.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Pairwise summation; the result depends only on the order of `values`.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 16 {
        values.iter().sum()
    } else {
        let (a, b) = values.split_at(values.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// One user uniform in each segment, `y` uniform across the width.
pub fn sample_user_layout<R: Rng + ?Sized>(area: &ServiceArea, rng: &mut R) -> UserLayout {
    let half = 0.5 * area.width;
    UserLayout::new(
        area.segments
            .iter()
            .map(|&(lo, hi)| {
                let x = lo + (hi - lo) * rng.random::<f64>();
                let y = if half > 0.0 { -half + area.width * rng.random::<f64>() } else { 0.0 };
                User::new(x, y)
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AntennaRule {
    /// Above each user.
    AtUser,
    /// Between the neighbouring users.
    Midpoint,
    /// Per-segment golden-section search (uplink).
    Golden,
    /// Successive convex approximation (downlink).
    Sca,
    /// Centre of each segment, independent of the users.
    FixedCenter,
    /// Grid search.
    Exhaustive,
}

impl AntennaRule {
    pub const ALL: [AntennaRule; 6] = [
        AntennaRule::AtUser,
        AntennaRule::Midpoint,
        AntennaRule::Golden,
        AntennaRule::Sca,
        AntennaRule::FixedCenter,
        AntennaRule::Exhaustive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AntennaRule::AtUser => "at_user",
            AntennaRule::Midpoint => "midpoint",
            AntennaRule::Golden => "golden",
            AntennaRule::Sca => "sca",
            AntennaRule::FixedCenter => "fixed_center",
            AntennaRule::Exhaustive => "exhaustive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

/// Knobs shared by every estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct McOptions {
    pub trials: usize,
    pub seed: u64,
    pub model: RateModel,
    pub golden_epsilon: f64,
    pub sca_tol: f64,
    pub sca_max_iters: usize,
    pub exhaustive_resolution: f64,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            trials: 100_000,
            seed: 0,
            model: RateModel::BlockAveraged,
            golden_epsilon: crate::uplink::DEFAULT_EPSILON,
            sca_tol: crate::downlink::DEFAULT_TOL,
            sca_max_iters: crate::downlink::DEFAULT_MAX_ITERS,
            exhaustive_resolution: 1e-2,
        }
    }
}

impl McOptions {
    pub fn with_trials(mut self, trials: usize) -> Self {
        self.trials = trials;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_model(mut self, model: RateModel) -> Self {
        self.model = model;
        self
    }
}

/// Antenna layout chosen by `rule` for the given users.
pub fn place_antennas(
    rule: AntennaRule,
    link: Link,
    users: &UserLayout,
    area: &ServiceArea,
    params: &SystemParams,
    opts: &McOptions,
) -> Result<AntennaLayout> {
    Ok(match rule {
        AntennaRule::AtUser => AntennaLayout::at_users(users),
        AntennaRule::Midpoint => midpoint_heuristic(users, area)?,
        AntennaRule::FixedCenter => AntennaLayout::new(area.segments.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect()),
        AntennaRule::Golden => match link {
            Link::Uplink => optimize_uplink_placements(users, area, params, opts.golden_epsilon)?.x_pin,
            Link::Downlink => return Err(Error::Invalid("golden-section placement applies to the uplink".into())),
        },
        AntennaRule::Sca => match link {
            Link::Downlink => sca_optimize(users, area, params, opts.sca_tol, opts.sca_max_iters)?.result.x_pin,
            Link::Uplink => return Err(Error::Invalid("successive approximation placement applies to the downlink".into())),
        },
        AntennaRule::Exhaustive => exhaustive_placement(users, area, params, opts.exhaustive_resolution, link)?.x_pin,
    })
}

/// Per-trial statistic of the per-user rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Sum,
    Min,
    /// Rate of user `⌊M/2⌋` (0-based), the one with neighbours on both sides.
    Middle,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Sum => "sum",
            Metric::Min => "min",
            Metric::Middle => "middle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Metric::Sum, Metric::Min, Metric::Middle].into_iter().find(|m| m.name() == s)
    }

    fn apply(self, rates: &[f64]) -> f64 {
        match self {
            Metric::Sum => rates.iter().sum(),
            Metric::Min => rates.iter().copied().fold(f64::INFINITY, f64::min),
            Metric::Middle => rates[rates.len() / 2],
        }
    }
}

/// One column of a matched comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Case {
    pub scheme: Scheme,
    /// Ignored by the TDMA schemes.
    pub rule: AntennaRule,
    pub metric: Metric,
}

impl Case {
    pub fn new(scheme: Scheme, rule: AntennaRule) -> Self {
        Case {
            scheme,
            rule,
            metric: Metric::Sum,
        }
    }

    pub fn with_metric(mut self, metric: Metric) -> Self {
        self.metric = metric;
        self
    }
}

fn link_of(scheme: Scheme) -> Option<Link> {
    match scheme {
        Scheme::EdmaUplink => Some(Link::Uplink),
        Scheme::EdmaDownlink => Some(Link::Downlink),
        _ => None,
    }
}

/// Value of every case on one sampled layout.
pub fn trial_values(
    cases: &[Case],
    params: &SystemParams,
    area: &ServiceArea,
    opts: &McOptions,
    trial: u64,
) -> Result<Vec<f64>> {
    let mut rng = trial_rng(opts.seed, trial);
    let users = sample_user_layout(area, &mut rng);
    cases
        .iter()
        .map(|case| match link_of(case.scheme) {
            None => Ok(case.metric.apply(&match case.scheme {
                Scheme::TdmaPinching => tdma_pinch_rates(&users, params),
                _ => tdma_conv_rates(&users, params),
            })),
            Some(link) => {
                let ants = place_antennas(case.rule, link, &users, area, params, opts)?;
                let blockage = match opts.model {
                    RateModel::Sampled => Some(sample_blockage(&users, &ants, params, &mut rng)),
                    _ => None,
                };
                Ok(case.metric.apply(&edma_sum_rate(link, &users, &ants, params, opts.model, blockage.as_ref())?.per_user))
            }
        })
        .collect()
}

fn per_trial<T: Send, F>(trials: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if trials == 0 {
        return Err(Error::Invalid("at least one trial is required".into()));
    }
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Ergodic value of several cases on common layouts.
pub fn ergodic_compare(cases: &[Case], params: &SystemParams, area: &ServiceArea, opts: &McOptions) -> Result<Vec<McEstimate>> {
    let rows = per_trial(opts.trials, |t| trial_values(cases, params, area, opts, t))?;
    Ok((0..cases.len())
        .map(|c| {
            let col: Vec<f64> = rows.iter().map(|r| r[c]).collect();
            McEstimate::from_samples(&col, opts.seed)
        })
        .collect())
}

pub fn ergodic_sum_rate(
    scheme: Scheme,
    rule: AntennaRule,
    params: &SystemParams,
    area: &ServiceArea,
    opts: &McOptions,
) -> Result<McEstimate> {
    Ok(ergodic_compare(&[Case::new(scheme, rule)], params, area, opts)?[0])
}

/// `E[EDMA − pinching TDMA]` with both evaluated on the same layouts.
pub fn ergodic_gain(link: Link, rule: AntennaRule, params: &SystemParams, area: &ServiceArea, opts: &McOptions) -> Result<McEstimate> {
    let cases = [Case::new(Scheme::edma(link), rule), Case::new(Scheme::TdmaPinching, rule)];
    let diffs = per_trial(opts.trials, |t| {
        let r = trial_values(&cases, params, area, opts, t)?;
        Ok(r[0] - r[1])
    })?;
    Ok(McEstimate::from_samples(&diffs, opts.seed))
}

/// Fraction of layouts on which the uplink EDMA sum rate with antennas above
/// the users reaches the pinching TDMA sum rate. `opts.model` picks the EDMA
/// rate model.
pub fn win_probability(params: &SystemParams, area: &ServiceArea, opts: &McOptions) -> Result<McEstimate> {
    let cases = [Case::new(Scheme::EdmaUplink, AntennaRule::AtUser), Case::new(Scheme::TdmaPinching, AntennaRule::AtUser)];
    let wins = per_trial(opts.trials, |t| {
        let r = trial_values(&cases, params, area, opts, t)?;
        Ok(if r[0] - r[1] >= 0.0 { 1.0 } else { 0.0 })
    })?;
    Ok(McEstimate::from_samples(&wins, opts.seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub users: usize,
    pub edma: McEstimate,
    pub tdma_pinch: McEstimate,
    pub tdma_conv: McEstimate,
}

/// Uplink EDMA with antennas above the users against both TDMA baselines,
/// for each user count on an equally split `length × width` area.
pub fn table1_sweep(params: &SystemParams, length: f64, width: f64, user_counts: &[usize], opts: &McOptions) -> Result<Vec<Table1Row>> {
    if user_counts.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Invalid("user counts must be sorted".into()));
    }
    let cases = [
        Case::new(Scheme::EdmaUplink, AntennaRule::AtUser),
        Case::new(Scheme::TdmaPinching, AntennaRule::AtUser),
        Case::new(Scheme::TdmaConventional, AntennaRule::AtUser),
    ];
    user_counts
        .iter()
        .map(|&m| {
            let area = ServiceArea::equal(length, width, m)?;
            let est = ergodic_compare(&cases, params, &area, opts)?;
            Ok(Table1Row {
                users: m,
                edma: est[0],
                tdma_pinch: est[1],
                tdma_conv: est[2],
            })
        })
        .collect()
}
