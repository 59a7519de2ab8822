//! Scenario files: flat TOML with units in the key names.
//!
//! ```toml
//! fc_ghz = 28.0
//! d_m = 3.0
//! dw_m = 10.0
//! dl_m = 40.0
//! m_users = 5
//! phi = 0.02
//! tx_dbm = 30.0
//! link = "ul"
//!
//! [sweep]
//! param = "tx_dbm"
//! from = 0.0
//! to = 40.0
//! steps = 5
//!
//! [[series]]
//! kind = "edma"
//! rule = "golden"
//! ```
//!
//! Unknown keys are rejected. Every key has a default.

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{ServiceArea, SystemParams};
use crate::montecarlo::{AntennaRule, McOptions, Metric};
use crate::rates::{Link, RateModel};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub fc_ghz: f64,
    pub d_m: f64,
    /// Zero puts every user on the waveguide centerline.
    pub dw_m: f64,
    pub dl_m: f64,
    pub m_users: usize,
    /// Explicit segment widths, packed around the centre.
    pub segment_widths: Option<Vec<f64>>,
    pub phi: f64,
    pub tx_dbm: f64,
    pub noise_dbm: f64,
    pub adjacent_only: bool,
    pub assume_serving_los: bool,
    pub antenna_rule: String,
    pub link: String,
    pub model: String,
    /// Placement method for `optimize`; defaults to golden on the uplink and
    /// sca on the downlink.
    pub method: Option<String>,
    pub golden_epsilon_m: f64,
    pub resolution_m: f64,
    pub sca_tol: f64,
    pub sca_max_iters: usize,
    pub trials: usize,
    pub seed: u64,
    pub sweep: Option<SweepSpec>,
    pub series: Vec<Series>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            fc_ghz: 28.0,
            d_m: 3.0,
            dw_m: 10.0,
            dl_m: 40.0,
            m_users: 2,
            segment_widths: None,
            phi: 0.02,
            tx_dbm: 30.0,
            noise_dbm: -90.0,
            adjacent_only: true,
            assume_serving_los: true,
            antenna_rule: "at_user".into(),
            link: "ul".into(),
            model: "block_averaged".into(),
            method: None,
            golden_epsilon_m: crate::uplink::DEFAULT_EPSILON,
            resolution_m: 1e-2,
            sca_tol: crate::downlink::DEFAULT_TOL,
            sca_max_iters: crate::downlink::DEFAULT_MAX_ITERS,
            trials: 100_000,
            seed: 0,
            sweep: None,
            series: Vec::new(),
        }
    }
}

/// One swept parameter on an evenly spaced grid, endpoints included.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// tx_dbm | phi | dl_m | dw_m | m_users | segment_width_m
    pub param: String,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.steps == 0 {
            return Err(Error::Invalid("sweep needs at least one step".into()));
        }
        if self.steps == 1 {
            return Ok(vec![self.from]);
        }
        let h = (self.to - self.from) / (self.steps - 1) as f64;
        Ok((0..self.steps).map(|k| self.from + k as f64 * h).collect())
    }

    /// Copy of `base` with the swept parameter set to `v`.
    pub fn apply(&self, base: &ScenarioConfig, v: f64) -> Result<ScenarioConfig> {
        let mut c = base.clone();
        match self.param.as_str() {
            "tx_dbm" => c.tx_dbm = v,
            "phi" => c.phi = v,
            "dl_m" => c.dl_m = v,
            "dw_m" => c.dw_m = v,
            "m_users" => c.m_users = as_count(v)?,
            // equal segments of width v
            "segment_width_m" => {
                c.segment_widths = None;
                c.dl_m = v * c.m_users as f64;
            }
            other => {
                return Err(Error::Invalid(format!(
                    "unknown sweep parameter `{other}`; expected tx_dbm, phi, dl_m, dw_m, m_users or segment_width_m"
                )))
            }
        }
        Ok(c)
    }
}

fn as_count(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 && v < 1e6 {
        Ok(v as usize)
    } else {
        Err(Error::Invalid(format!("user count must be a positive integer, got {v}")))
    }
}

/// One output curve of a sweep.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Series {
    /// edma | tdma_pinch | tdma_conv | gain | win | gain_lb |
    /// gain_lb_centerline | gain_asymptote_large | gain_asymptote_small | win_lb
    pub kind: String,
    /// Overrides the scheme column.
    pub label: Option<String>,
    pub rule: Option<String>,
    pub link: Option<String>,
    /// sum | min | middle
    pub metric: Option<String>,
    pub model: Option<String>,
    /// Divide by the user count.
    #[serde(default)]
    pub per_user: bool,
    pub tx_dbm: Option<f64>,
    pub phi: Option<f64>,
    pub dl_m: Option<f64>,
    pub dw_m: Option<f64>,
    pub m_users: Option<usize>,
    pub adjacent_only: Option<bool>,
}

impl Series {
    pub fn kind(kind: &str) -> Self {
        Series {
            kind: kind.into(),
            label: None,
            rule: None,
            link: None,
            metric: None,
            model: None,
            per_user: false,
            tx_dbm: None,
            phi: None,
            dl_m: None,
            dw_m: None,
            m_users: None,
            adjacent_only: None,
        }
    }

    /// Scenario with this series' overrides applied.
    pub fn scenario(&self, base: &ScenarioConfig) -> Result<ScenarioConfig> {
        let mut c = base.clone();
        if let Some(v) = self.tx_dbm {
            c.tx_dbm = v;
        }
        if let Some(v) = self.phi {
            c.phi = v;
        }
        if let Some(v) = self.dl_m {
            c.dl_m = v;
        }
        if let Some(v) = self.dw_m {
            c.dw_m = v;
        }
        if let Some(v) = self.m_users {
            c.m_users = v;
        }
        if let Some(v) = self.adjacent_only {
            c.adjacent_only = v;
        }
        if let Some(v) = &self.rule {
            c.antenna_rule = v.clone();
        }
        if let Some(v) = &self.link {
            c.link = v.clone();
        }
        if let Some(v) = &self.model {
            c.model = v.clone();
        }
        Ok(c)
    }

    pub fn metric(&self) -> Result<Metric> {
        match &self.metric {
            None => Ok(Metric::Sum),
            Some(s) => Metric::parse(s).ok_or_else(|| Error::Invalid(format!("unknown metric `{s}`; expected sum, min or middle"))),
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(inner) => Error::Parse {
                path: path.display().to_string(),
                line: inner.span().map(|s| line_of(&text, s.start)).unwrap_or(0),
                message: inner.message().to_string(),
            },
            other => other,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("fc_ghz", self.fc_ghz), ("d_m", self.d_m), ("dl_m", self.dl_m)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.dw_m >= 0.0 && self.dw_m.is_finite()) {
            return Err(Error::Invalid(format!("dw_m must be non-negative, got {}", self.dw_m)));
        }
        if !(self.phi >= 0.0 && self.phi.is_finite()) {
            return Err(Error::Invalid(format!("phi must be non-negative, got {}", self.phi)));
        }
        if self.m_users == 0 {
            return Err(Error::Invalid("m_users must be at least 1".into()));
        }
        if let Some(w) = &self.segment_widths {
            let total: f64 = w.iter().sum();
            if total > self.dl_m * (1.0 + 1e-12) {
                return Err(Error::Invalid(format!("segment_widths sum to {total} m, more than dl_m = {} m", self.dl_m)));
            }
            if w.len() != self.m_users {
                return Err(Error::Invalid(format!("{} segment_widths for {} users", w.len(), self.m_users)));
            }
        }
        if self.trials == 0 {
            return Err(Error::Invalid("trials must be at least 1".into()));
        }
        self.link()?;
        self.rule()?;
        self.rate_model()?;
        Ok(())
    }

    pub fn params(&self) -> Result<SystemParams> {
        Ok(SystemParams::new(self.fc_ghz * 1e9, self.d_m, self.phi, self.tx_dbm, self.noise_dbm)?
            .with_adjacent_only(self.adjacent_only)
            .with_serving_los(self.assume_serving_los))
    }

    pub fn area(&self) -> Result<ServiceArea> {
        self.area_for(self.m_users)
    }

    /// Area split for `users` segments; explicit widths must match.
    pub fn area_for(&self, users: usize) -> Result<ServiceArea> {
        match &self.segment_widths {
            Some(w) if w.len() == users => ServiceArea::from_widths(self.dl_m, self.dw_m, w),
            Some(w) => Err(Error::Invalid(format!("{} segment_widths for {users} users", w.len()))),
            None => ServiceArea::equal(self.dl_m, self.dw_m, users),
        }
    }

    pub fn link(&self) -> Result<Link> {
        parse_link(&self.link)
    }

    pub fn rule(&self) -> Result<AntennaRule> {
        AntennaRule::parse(&self.antenna_rule).ok_or_else(|| {
            let names: Vec<_> = AntennaRule::ALL.iter().map(|r| r.name()).collect();
            Error::Invalid(format!("unknown antenna_rule `{}`; expected one of {}", self.antenna_rule, names.join(", ")))
        })
    }

    pub fn rate_model(&self) -> Result<RateModel> {
        match self.model.as_str() {
            "block_averaged" => Ok(RateModel::BlockAveraged),
            "sampled" => Ok(RateModel::Sampled),
            "lower_bound" => Ok(RateModel::LowerBound),
            other => Err(Error::Invalid(format!(
                "unknown model `{other}`; expected block_averaged, sampled or lower_bound"
            ))),
        }
    }

    pub fn mc_options(&self) -> Result<McOptions> {
        Ok(McOptions {
            trials: self.trials,
            seed: self.seed,
            model: self.rate_model()?,
            golden_epsilon: self.golden_epsilon_m,
            sca_tol: self.sca_tol,
            sca_max_iters: self.sca_max_iters,
            exhaustive_resolution: self.resolution_m,
        })
    }
}

pub fn parse_link(s: &str) -> Result<Link> {
    match s {
        "ul" | "uplink" => Ok(Link::Uplink),
        "dl" | "downlink" => Ok(Link::Downlink),
        other => Err(Error::Invalid(format!("unknown link `{other}`; expected ul or dl"))),
    }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}
