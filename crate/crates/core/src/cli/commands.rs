//! The `rates`, `optimize` and `sweep` commands. Each returns the CSV text.

use crate::analytics::{centerline_asymptote, ergodic_gain_lb, ergodic_gain_lb_centerline, win_probability_lb};
use crate::cli::config::{parse_link, ScenarioConfig, Series};
use crate::cli::layout::LayoutFile;
use crate::cli::output::{fmt_sig, Csv};
use crate::downlink::sca_optimize;
use crate::error::{Error, Result};
use crate::model::{sample_blockage, AntennaLayout, SystemParams};
use crate::montecarlo::{ergodic_compare, ergodic_gain, place_antennas, trial_rng, win_probability, AntennaRule, Case, McEstimate, Metric};
use crate::placement::{exhaustive_placement, fixed_placement, PlacementResult};
use crate::rates::{edma_rate, tdma_conv_rates, tdma_pinch_rates, Link, RateModel, Scheme};
use crate::uplink::{midpoint_heuristic, optimize_uplink_placements};

fn param_comments(params: &SystemParams) -> Vec<String> {
    vec![
        format!("rho = {} (tx / noise, linear)", fmt_sig(params.rho)),
        format!("eta = {}", fmt_sig(params.eta)),
        format!(
            "phi = {}, d_m = {}, adjacent_only = {}, assume_serving_los = {}",
            fmt_sig(params.blockage_phi),
            fmt_sig(params.height),
            params.adjacent_only,
            params.assume_serving_los
        ),
    ]
}

fn antennas_for(config: &ScenarioConfig, layout: &LayoutFile, link: Link, params: &SystemParams) -> Result<AntennaLayout> {
    if let Some(a) = &layout.antennas {
        return Ok(a.clone());
    }
    let rule = config.rule()?;
    if rule == AntennaRule::AtUser {
        return Ok(AntennaLayout::at_users(&layout.users));
    }
    let area = config.area_for(layout.users.len())?;
    layout.users.validate(&area)?;
    place_antennas(rule, link, &layout.users, &area, params, &config.mc_options()?)
}

/// Per-user rates of one layout: EDMA under every rate model, then both
/// TDMA baselines. Rows are user-major with 1-based user indices.
pub fn cmd_rates(config: &ScenarioConfig, layout: &LayoutFile) -> Result<String> {
    config.validate()?;
    let params = config.params()?;
    let link = config.link()?;
    let users = &layout.users;
    let ants = antennas_for(config, layout, link, &params)?;
    if ants.len() != users.len() {
        return Err(Error::Invalid(format!("{} users but {} antennas", users.len(), ants.len())));
    }
    let blockage = sample_blockage(users, &ants, &params, &mut trial_rng(config.seed, 0));
    let mut comments = param_comments(&params);
    comments.push(format!("link = {}, seed = {}", link.name(), config.seed));
    comments.push(format!(
        "x_pin = {}",
        ants.x_pin.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(" ")
    ));
    let mut csv = Csv::with_comments(&comments, &["user", "scheme", "model", "rate_bps_hz"]);
    let pinch = tdma_pinch_rates(users, &params);
    let conv = tdma_conv_rates(users, &params);
    let edma = Scheme::edma(link).name();
    for m in 0..users.len() {
        let user = (m + 1).to_string();
        for model in [RateModel::BlockAveraged, RateModel::LowerBound, RateModel::Sampled] {
            let r = edma_rate(link, model, m, users, &ants, &params, Some(&blockage))?;
            csv.row(&[user.clone(), edma.into(), model.name().into(), fmt_sig(r)]);
        }
        csv.row(&[user.clone(), Scheme::TdmaPinching.name().into(), "none".into(), fmt_sig(pinch[m])]);
        csv.row(&[user, Scheme::TdmaConventional.name().into(), "none".into(), fmt_sig(conv[m])]);
    }
    Ok(csv.into_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Golden,
    Sca,
    Midpoint,
    Fixed,
    Exhaustive,
}

impl Method {
    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "golden" => Method::Golden,
            "sca" => Method::Sca,
            "midpoint" => Method::Midpoint,
            "fixed" => Method::Fixed,
            "exhaustive" => Method::Exhaustive,
            other => {
                return Err(Error::Invalid(format!(
                    "unknown method `{other}`; expected golden, sca, midpoint, fixed or exhaustive"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::Golden => "golden",
            Method::Sca => "sca",
            Method::Midpoint => "midpoint",
            Method::Fixed => "fixed",
            Method::Exhaustive => "exhaustive",
        }
    }

    fn default_for(link: Link) -> Self {
        match link {
            Link::Uplink => Method::Golden,
            Link::Downlink => Method::Sca,
        }
    }
}

/// Runs one placement method and evaluates the blockage-averaged rates.
pub fn optimize_placement(config: &ScenarioConfig, layout: &LayoutFile, method: Option<Method>) -> Result<(Method, PlacementResult)> {
    config.validate()?;
    let params = config.params()?;
    let link = config.link()?;
    let method = match (method, &config.method) {
        (Some(m), _) => m,
        (None, Some(s)) => Method::parse(s)?,
        (None, None) => Method::default_for(link),
    };
    let users = &layout.users;
    let area = config.area_for(users.len())?;
    users.validate(&area)?;
    let result = match (method, link) {
        (Method::Golden, Link::Uplink) => optimize_uplink_placements(users, &area, &params, config.golden_epsilon_m)?,
        (Method::Sca, Link::Downlink) => sca_optimize(users, &area, &params, config.sca_tol, config.sca_max_iters)?.result,
        (Method::Golden, Link::Downlink) | (Method::Sca, Link::Uplink) => {
            return Err(Error::Invalid(format!(
                "method {} does not apply to the {} link",
                method.name(),
                link.name()
            )))
        }
        (Method::Midpoint, _) => PlacementResult::evaluate(link, users, midpoint_heuristic(users, &area)?, &params, 0, true),
        (Method::Fixed, _) => fixed_placement(link, users, &params),
        (Method::Exhaustive, _) => exhaustive_placement(users, &area, &params, config.resolution_m, link)?,
    };
    Ok((method, result))
}

/// Placement per segment with the summary in the header comments.
pub fn cmd_optimize(config: &ScenarioConfig, layout: &LayoutFile, method: Option<Method>) -> Result<String> {
    let (method, r) = optimize_placement(config, layout, method)?;
    let params = config.params()?;
    let area = config.area_for(layout.users.len())?;
    let mut comments = param_comments(&params);
    comments.push(format!("link = {}, method = {}", config.link()?.name(), method.name()));
    comments.push(format!("min_rate_bps_hz = {}", fmt_sig(r.objective)));
    comments.push(format!("sum_rate_bps_hz = {}", fmt_sig(r.per_user_rate.iter().sum())));
    comments.push(format!("iterations = {}, converged = {}", r.iterations, r.converged));
    let mut csv = Csv::with_comments(
        &comments,
        &["segment", "x_start_m", "x_end_m", "user_x_m", "user_y_m", "x_pin_m", "rate_bps_hz"],
    );
    for (m, u) in layout.users.users.iter().enumerate() {
        let (lo, hi) = area.segments[m];
        csv.row(&[
            (m + 1).to_string(),
            fmt_sig(lo),
            fmt_sig(hi),
            fmt_sig(u.x),
            fmt_sig(u.y),
            fmt_sig(r.x_pin.x_pin[m]),
            fmt_sig(r.per_user_rate[m]),
        ]);
    }
    Ok(csv.into_string())
}

/// One evaluated point of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub swept_value: f64,
    pub scheme: String,
    pub antenna_rule: String,
    pub mean: f64,
    pub stderr: f64,
    /// Zero for closed-form rows.
    pub trials: usize,
    pub seed: u64,
}

fn series_label(s: &Series, link: Link, metric: Metric) -> String {
    if let Some(l) = &s.label {
        return l.clone();
    }
    let mut base = match s.kind.as_str() {
        "edma" => Scheme::edma(link).name().to_string(),
        "gain" => format!("gain_{}", if link == Link::Uplink { "ul" } else { "dl" }),
        other => other.to_string(),
    };
    if metric != Metric::Sum {
        base = format!("{base}_{}", metric.name());
    }
    if s.per_user {
        base.push_str("_per_user");
    }
    base
}

fn closed(value: f64) -> McEstimate {
    McEstimate {
        mean: value,
        stderr: 0.0,
        trials: 0,
        seed: 0,
    }
}

fn evaluate_series(s: &Series, cfg: &ScenarioConfig) -> Result<(String, String, McEstimate)> {
    cfg.validate()?;
    let params = cfg.params()?;
    let link = s.link.as_deref().map(parse_link).transpose()?.unwrap_or(cfg.link()?);
    let rule = cfg.rule()?;
    let metric = s.metric()?;
    let opts = cfg.mc_options()?;
    let label = series_label(s, link, metric);
    let mc = |case: Case| -> Result<McEstimate> {
        let area = cfg.area()?;
        Ok(ergodic_compare(&[case.with_metric(metric)], &params, &area, &opts)?[0])
    };
    let (rule_name, est) = match s.kind.as_str() {
        "edma" => (rule.name(), mc(Case::new(Scheme::edma(link), rule))?),
        "tdma_pinch" => ("at_user", mc(Case::new(Scheme::TdmaPinching, AntennaRule::AtUser))?),
        "tdma_conv" => ("area_center", mc(Case::new(Scheme::TdmaConventional, AntennaRule::AtUser))?),
        "gain" => (rule.name(), ergodic_gain(link, rule, &params, &cfg.area()?, &opts)?),
        "win" => ("at_user", win_probability(&params, &cfg.area()?, &opts)?),
        "gain_lb" => ("-", closed(ergodic_gain_lb(&params, cfg.dl_m, cfg.dw_m)?.value)),
        "gain_lb_centerline" => ("-", closed(ergodic_gain_lb_centerline(&params, cfg.dl_m)?.value)),
        "gain_asymptote_large" => ("-", closed(centerline_asymptote(&params, cfg.dl_m, true)?.value)),
        "gain_asymptote_small" => ("-", closed(centerline_asymptote(&params, cfg.dl_m, false)?.value)),
        "win_lb" => ("-", closed(win_probability_lb(cfg.phi, cfg.d_m, cfg.dl_m)?)),
        other => {
            return Err(Error::Invalid(format!(
                "unknown series kind `{other}`; expected edma, tdma_pinch, tdma_conv, gain, win, gain_lb, \
                 gain_lb_centerline, gain_asymptote_large, gain_asymptote_small or win_lb"
            )))
        }
    };
    let est = if s.per_user { est.scaled(1.0 / cfg.m_users as f64) } else { est };
    Ok((label, rule_name.to_string(), est))
}

/// Evaluates every series at every sweep value, in sweep order.
pub fn run_sweep(config: &ScenarioConfig) -> Result<Vec<SweepRow>> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::Invalid("config has no [sweep] table".into()))?;
    let series = if config.series.is_empty() {
        vec![Series::kind("edma")]
    } else {
        config.series.clone()
    };
    let mut rows = Vec::new();
    for v in spec.values()? {
        for s in &series {
            let cfg = spec.apply(&s.scenario(config)?, v)?;
            let (scheme, antenna_rule, est) = evaluate_series(s, &cfg)?;
            rows.push(SweepRow {
                swept_value: v,
                scheme,
                antenna_rule,
                mean: est.mean,
                stderr: est.stderr,
                trials: est.trials,
                seed: est.seed,
            });
        }
    }
    Ok(rows)
}

pub fn cmd_sweep(config: &ScenarioConfig, title: Option<&str>) -> Result<String> {
    config.validate()?;
    let rows = run_sweep(config)?;
    let spec = config.sweep.as_ref().expect("checked by run_sweep");
    let mut comments = Vec::new();
    if let Some(t) = title {
        comments.push(t.to_string());
    }
    comments.extend(param_comments(&config.params()?));
    comments.push(format!(
        "swept = {}, trials = {}, seed = {}, model = {}; series overrides apply before the swept value",
        spec.param, config.trials, config.seed, config.model
    ));
    let mut csv = Csv::with_comments(
        &comments,
        &["swept_value", "scheme", "antenna_rule", "mean", "stderr", "trials", "seed"],
    );
    for r in rows {
        csv.row(&[
            fmt_sig(r.swept_value),
            r.scheme,
            r.antenna_rule,
            fmt_sig(r.mean),
            fmt_sig(r.stderr),
            r.trials.to_string(),
            r.seed.to_string(),
        ]);
    }
    Ok(csv.into_string())
}
