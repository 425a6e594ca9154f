use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Time-window width class of generated demand locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TwClass {
    S,
    M,
    L,
}

impl TwClass {
    pub const ALL: [TwClass; 3] = [TwClass::S, TwClass::M, TwClass::L];

    /// The two widths, in minutes, drawn uniformly for each location.
    pub fn widths(self) -> [f64; 2] {
        match self {
            TwClass::S => [60.0, 90.0],
            TwClass::M => [90.0, 120.0],
            TwClass::L => [120.0, 150.0],
        }
    }
}

impl FromStr for TwClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "S" | "s" => Ok(TwClass::S),
            "M" | "m" => Ok(TwClass::M),
            "L" | "l" => Ok(TwClass::L),
            other => Err(format!("unknown time-window class {other:?} (expected S, M or L)")),
        }
    }
}

impl fmt::Display for TwClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwClass::S => "S",
            TwClass::M => "M",
            TwClass::L => "L",
        })
    }
}

/// Transfer points by instance scale: 3 up to 25 requests, then one more
/// per 25 requests, capped at 6.
pub fn default_transfer_count(requests: usize) -> usize {
    match requests {
        0..=25 => 3,
        26..=50 => 4,
        51..=75 => 5,
        _ => 6,
    }
}

/// Central Athens, the default disc center.
pub const ATHENS: (f64, f64) = (37.9838, 23.7275);

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub requests: usize,
    pub tw: TwClass,
    /// Inclusive integer demand range.
    pub demand: (u32, u32),
    pub capacity: u32,
    /// Workday length in minutes.
    pub horizon: f64,
    pub speed_kmh: f64,
    /// Inclusive integer service-time range in minutes.
    pub service: (u32, u32),
    /// Window openings are drawn from `0, step, 2 step, ..., last_start`.
    pub tw_step: f64,
    pub tw_last_start: f64,
    /// Defaults to [`default_transfer_count`].
    pub transfers: Option<usize>,
    /// Fixed fleet instead of the binary search.
    pub fleet: Option<usize>,
    /// (lat, lon) of the disc center.
    pub center: (f64, f64),
    pub radius_km: f64,
    /// Candidate coordinates from a node file; a synthetic disc otherwise.
    pub nodes: Option<Vec<(f64, f64)>>,
}

impl GeneratorParams {
    pub fn new(requests: usize, tw: TwClass) -> GeneratorParams {
        GeneratorParams {
            requests,
            tw,
            demand: (5, 25),
            capacity: 75,
            horizon: 480.0,
            speed_kmh: 20.0,
            service: (3, 10),
            tw_step: 30.0,
            tw_last_start: 450.0,
            transfers: None,
            fleet: None,
            center: ATHENS,
            radius_km: 5.0,
            nodes: None,
        }
    }

    /// The acceptance-suite shape: two vehicles, one transfer point.
    pub fn tiny(requests: usize, tw: TwClass) -> GeneratorParams {
        GeneratorParams { fleet: Some(2), transfers: Some(1), ..GeneratorParams::new(requests, tw) }
    }

    pub fn transfer_count(&self) -> usize {
        self.transfers.unwrap_or_else(|| default_transfer_count(self.requests))
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.requests == 0 {
            return Err("at least one request is required".into());
        }
        if self.demand.0 == 0 || self.demand.0 > self.demand.1 {
            return Err("demand range must satisfy 1 <= min <= max".into());
        }
        if self.capacity < self.demand.1 {
            return Err("capacity must hold the largest demand".into());
        }
        if self.service.0 > self.service.1 {
            return Err("service range is empty".into());
        }
        if !(self.horizon > 0.0 && self.speed_kmh > 0.0 && self.radius_km > 0.0 && self.tw_step > 0.0) {
            return Err("horizon, speed, radius and window step must be positive".into());
        }
        if !(0.0..=self.horizon).contains(&self.tw_last_start) {
            return Err("last window start must lie within the horizon".into());
        }
        if self.fleet == Some(0) {
            return Err("a fixed fleet needs at least one vehicle".into());
        }
        Ok(())
    }
}
