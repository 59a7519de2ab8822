//! Per-user and sum rates for EDMA and the two TDMA baselines.
//!
//! All rates are in bits/s/Hz. The uplink interference into antenna `m` comes
//! from users `i ≠ m` over links `(U_i, PA_m)`; the downlink interference at
//! user `m` comes from antennas `i ≠ m` over links `(U_m, PA_i)`. With
//! `adjacent_only` set, only `|i − m| = 1` contributes.
//!
//! The blockage-averaged rate enumerates every LoS state of the interfering
//! links and weights the conditional rate by its probability.

use crate::error::{Error, Result};
use crate::model::{
    blockage_probability, squared_distance, AntennaLayout, BlockageRealization, SystemParams, User,
    UserLayout,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    Uplink,
    Downlink,
}

impl Link {
    pub fn name(self) -> &'static str {
        match self {
            Link::Uplink => "ul",
            Link::Downlink => "dl",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    EdmaUplink,
    EdmaDownlink,
    TdmaPinching,
    TdmaConventional,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::EdmaUplink => "edma_ul",
            Scheme::EdmaDownlink => "edma_dl",
            Scheme::TdmaPinching => "tdma_pinch",
            Scheme::TdmaConventional => "tdma_conv",
        }
    }

    pub fn edma(link: Link) -> Self {
        match link {
            Link::Uplink => Scheme::EdmaUplink,
            Link::Downlink => Scheme::EdmaDownlink,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RateModel {
    /// One blockage realization.
    Sampled,
    /// Expectation over the blockage of the interfering links.
    BlockAveraged,
    /// Only the all-interference-blocked term.
    LowerBound,
}

impl RateModel {
    pub fn name(self) -> &'static str {
        match self {
            RateModel::Sampled => "sampled",
            RateModel::BlockAveraged => "block_averaged",
            RateModel::LowerBound => "lower_bound",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    pub scheme: Scheme,
    pub model: RateModel,
    pub per_user: Vec<f64>,
    pub sum: f64,
}

impl RateReport {
    fn new(scheme: Scheme, model: RateModel, per_user: Vec<f64>) -> Self {
        let sum = per_user.iter().sum();
        RateReport {
            scheme,
            model,
            per_user,
            sum,
        }
    }

    pub fn min(&self) -> f64 {
        self.per_user.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Received SNR and LoS probability of one link.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinkBudget {
    pub snr: f64,
    pub los: f64,
}

fn budget(user: &User, x_pin: f64, params: &SystemParams) -> LinkBudget {
    let sq = squared_distance(user, x_pin, params.height);
    LinkBudget {
        snr: params.rho_eta() / sq,
        los: blockage_probability(user, x_pin, params),
    }
}

/// Serving link plus the interfering links seen by user `m`'s rate.
pub(crate) struct UserLinks {
    pub serving: LinkBudget,
    pub interferers: Vec<(usize, LinkBudget)>,
}

pub(crate) fn user_links(
    link: Link,
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    params: &SystemParams,
) -> UserLinks {
    let us = &users.users;
    let serving = budget(&us[m], antennas.x_pin[m], params);
    let interferers = (0..us.len())
        .filter(|&i| params.interferes(i, m))
        .map(|i| {
            let b = match link {
                Link::Uplink => budget(&us[i], antennas.x_pin[m], params),
                Link::Downlink => budget(&us[m], antennas.x_pin[i], params),
            };
            (i, b)
        })
        .collect();
    UserLinks { serving, interferers }
}

fn conditional_rate(signal: f64, interference: f64) -> f64 {
    (signal / (interference + 1.0)).ln_1p() / std::f64::consts::LN_2
}

fn enumerate_states(links: &[(usize, LinkBudget)], signal: f64, prob: f64, interference: f64) -> f64 {
    match links.split_first() {
        None => prob * conditional_rate(signal, interference),
        Some(((_, b), rest)) => {
            let mut acc = 0.0;
            let p_los = prob * b.los;
            if p_los > 0.0 {
                acc += enumerate_states(rest, signal, p_los, interference + b.snr);
            }
            let p_blocked = prob * (1.0 - b.los);
            if p_blocked > 0.0 {
                acc += enumerate_states(rest, signal, p_blocked, interference);
            }
            acc
        }
    }
}

fn serving_weight(links: &UserLinks, params: &SystemParams) -> f64 {
    if params.assume_serving_los {
        1.0
    } else {
        links.serving.los
    }
}

fn blockavg(link: Link, m: usize, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    let links = user_links(link, m, users, antennas, params);
    let w = serving_weight(&links, params);
    if w == 0.0 {
        return 0.0;
    }
    w * enumerate_states(&links.interferers, links.serving.snr, 1.0, 0.0)
}

fn sampled(
    link: Link,
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    blockage: &BlockageRealization,
    params: &SystemParams,
) -> f64 {
    if !blockage.los(m, m) {
        return 0.0;
    }
    let links = user_links(link, m, users, antennas, params);
    let interference: f64 = links
        .interferers
        .iter()
        .filter(|(i, _)| match link {
            Link::Uplink => blockage.los(*i, m),
            Link::Downlink => blockage.los(m, *i),
        })
        .map(|(_, b)| b.snr)
        .sum();
    conditional_rate(links.serving.snr, interference)
}

fn lower_bound(link: Link, m: usize, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    let links = user_links(link, m, users, antennas, params);
    let blocked: f64 = links.interferers.iter().map(|(_, b)| 1.0 - b.los).product();
    serving_weight(&links, params) * blocked * conditional_rate(links.serving.snr, 0.0)
}

pub fn uplink_rate_sampled(
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    blockage: &BlockageRealization,
    params: &SystemParams,
) -> f64 {
    sampled(Link::Uplink, m, users, antennas, blockage, params)
}

pub fn downlink_rate_sampled(
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    blockage: &BlockageRealization,
    params: &SystemParams,
) -> f64 {
    sampled(Link::Downlink, m, users, antennas, blockage, params)
}

/// Uplink rate of user `m` averaged over the blockage of its interferers.
/// Only antenna `m` enters, so the rate is independent of every other
/// antenna position.
pub fn uplink_rate_blockavg(m: usize, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    blockavg(Link::Uplink, m, users, antennas, params)
}

pub fn downlink_rate_blockavg(m: usize, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    blockavg(Link::Downlink, m, users, antennas, params)
}

/// Per-user lower bound keeping only the fully blocked interference state.
pub fn edma_rate_lower_bound(
    link: Link,
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    params: &SystemParams,
) -> f64 {
    lower_bound(link, m, users, antennas, params)
}

/// Rate of user `m` under the selected model. `Sampled` needs a blockage
/// realization.
pub fn edma_rate(
    link: Link,
    model: RateModel,
    m: usize,
    users: &UserLayout,
    antennas: &AntennaLayout,
    params: &SystemParams,
    blockage: Option<&BlockageRealization>,
) -> Result<f64> {
    Ok(match model {
        RateModel::Sampled => {
            let b = blockage.ok_or_else(|| Error::Invalid("sampled rates need a blockage realization".into()))?;
            if b.size() != users.len() {
                return Err(Error::Invalid("blockage matrix size does not match the layout".into()));
            }
            sampled(link, m, users, antennas, b, params)
        }
        RateModel::BlockAveraged => blockavg(link, m, users, antennas, params),
        RateModel::LowerBound => lower_bound(link, m, users, antennas, params),
    })
}

pub fn edma_sum_rate(
    link: Link,
    users: &UserLayout,
    antennas: &AntennaLayout,
    params: &SystemParams,
    model: RateModel,
    blockage: Option<&BlockageRealization>,
) -> Result<RateReport> {
    if users.len() != antennas.len() {
        return Err(Error::Invalid(format!(
            "{} users but {} antennas",
            users.len(),
            antennas.len()
        )));
    }
    let per_user = (0..users.len())
        .map(|m| edma_rate(link, model, m, users, antennas, params, blockage))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::new(Scheme::edma(link), model, per_user))
}

pub fn edma_sum_rate_lower_bound(link: Link, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    (0..users.len())
        .map(|m| lower_bound(link, m, users, antennas, params))
        .sum()
}

/// Blockage-averaged per-user rates, the objective of the placement problems.
pub fn blockavg_rates(link: Link, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> Vec<f64> {
    (0..users.len())
        .map(|m| blockavg(link, m, users, antennas, params))
        .collect()
}

pub fn min_blockavg_rate(link: Link, users: &UserLayout, antennas: &AntennaLayout, params: &SystemParams) -> f64 {
    (0..users.len())
        .map(|m| blockavg(link, m, users, antennas, params))
        .fold(f64::INFINITY, f64::min)
}

/// TDMA with a pinching antenna moved above each scheduled user; every user
/// gets a `1/M` share of time.
pub fn tdma_pinch_rates(users: &UserLayout, params: &SystemParams) -> Vec<f64> {
    let share = 1.0 / users.len() as f64;
    users
        .users
        .iter()
        .map(|u| share * conditional_rate(params.rho_eta() / (u.y * u.y + params.height * params.height), 0.0))
        .collect()
}

/// TDMA through one fixed antenna above the centre of the area.
pub fn tdma_conv_rates(users: &UserLayout, params: &SystemParams) -> Vec<f64> {
    let share = 1.0 / users.len() as f64;
    users
        .users
        .iter()
        .map(|u| share * conditional_rate(params.rho_eta() / squared_distance(u, 0.0, params.height), 0.0))
        .collect()
}

pub fn tdma_pinch_sum_rate(users: &UserLayout, params: &SystemParams) -> f64 {
    tdma_pinch_rates(users, params).iter().sum()
}

pub fn tdma_conv_sum_rate(users: &UserLayout, params: &SystemParams) -> f64 {
    tdma_conv_rates(users, params).iter().sum()
}

pub fn tdma_report(scheme: Scheme, users: &UserLayout, params: &SystemParams) -> Result<RateReport> {
    let per_user = match scheme {
        Scheme::TdmaPinching => tdma_pinch_rates(users, params),
        Scheme::TdmaConventional => tdma_conv_rates(users, params),
        _ => return Err(Error::Invalid(format!("{} is not a TDMA scheme", scheme.name()))),
    };
    Ok(RateReport::new(scheme, RateModel::BlockAveraged, per_user))
}
