use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::features::ShawWeights;
use crate::SearchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Mahalanobis related removal, insertion difficulty order.
    Rlns,
    /// Shaw related removal, insertion ease order.
    Ls,
    /// Adaptive choice among random, worst and related removal and between
    /// random and difficulty order.
    Multiop,
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rlns" => Ok(Method::Rlns),
            "ls" => Ok(Method::Ls),
            "multiop" | "multi-op" => Ok(Method::Multiop),
            other => Err(format!("unknown method {other:?} (expected rlns, ls or multiop)")),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Rlns => "rlns",
            Method::Ls => "ls",
            Method::Multiop => "multiop",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub method: Method,
    /// Late-acceptance history length.
    pub lahc_len: usize,
    /// Requests removed per iteration, drawn uniformly from this range and
    /// capped at the number of served requests.
    pub destroy_min: usize,
    pub destroy_max: usize,
    /// Probability of skipping each feasible insertion.
    pub blink: f64,
    /// Shaw weights for demand, travel time and window opening.
    pub shaw: [f64; 3],
    /// Worst removal multiplies gains by a uniform factor from `[1 - worst_noise, 1]`.
    pub worst_noise: f64,
    pub learning_rate: f64,
    pub reward_best: f64,
    pub reward_accept: f64,
    /// Successive iterations without a new best before a restart stops.
    pub patience: usize,
    pub restarts: usize,
    pub seed: u64,
    /// Seconds per restart.
    pub time_limit: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            method: Method::Rlns,
            lahc_len: 20,
            destroy_min: 5,
            destroy_max: 15,
            blink: 0.05,
            shaw: [0.33, 0.99, 0.66],
            worst_noise: 0.25,
            learning_rate: 0.3,
            reward_best: 3.0,
            reward_accept: 1.0,
            patience: 50,
            restarts: 10,
            seed: 0,
            time_limit: None,
            max_iterations: None,
        }
    }
}

impl SearchConfig {
    pub fn for_method(method: Method) -> SearchConfig {
        SearchConfig { method, ..SearchConfig::default() }
    }

    pub fn shaw_weights(&self) -> ShawWeights {
        ShawWeights { demand: self.shaw[0], travel: self.shaw[1], time: self.shaw[2] }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |msg: &str| Err(SearchError::InvalidConfig(msg.to_string()));
        if !(0.0..1.0).contains(&self.blink) {
            return bad("blink must be in [0, 1)");
        }
        if self.destroy_min < 1 || self.destroy_min > self.destroy_max {
            return bad("destroy range must satisfy 1 <= destroy_min <= destroy_max");
        }
        if self.lahc_len < 1 {
            return bad("lahc_len must be at least 1");
        }
        if self.restarts < 1 {
            return bad("restarts must be at least 1");
        }
        if !(0.0..1.0).contains(&self.worst_noise) {
            return bad("worst_noise must be in [0, 1)");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return bad("learning_rate must be in (0, 1]");
        }
        if self.time_limit.is_some_and(|t| !(t >= 0.0)) {
            return bad("time_limit must be non-negative");
        }
        Ok(())
    }

    /// Reads a `.toml` or `.json` file; missing fields take their defaults.
    pub fn load(path: &Path) -> Result<SearchConfig, SearchError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: SearchConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| SearchError::Parse(e.to_string()))?,
            _ => toml::from_str(&text).map_err(|e| SearchError::Parse(e.to_string()))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
