use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::model::{Instance, LocId, ReqId, VehId};

use super::solution::{Action, Journey, Leg, Route, Solution, Stop};

#[derive(Debug, thiserror::Error)]
pub enum SolutionFileError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("solution schema error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("solution does not fit the instance: {0}")]
    Mismatch(String),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionFile {
    objective: f64,
    routes: Vec<RouteFile>,
    journeys: Vec<JourneyFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RouteFile {
    vehicle: VehId,
    stops: Vec<StopFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StopFile {
    loc: LocId,
    action: ActionName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    request: Option<ReqId>,
    #[serde(default)]
    time: Option<f64>,
}

#[derive(Serialize, Deserialize, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum ActionName {
    Start,
    End,
    Pickup,
    Deliver,
    TransferDrop,
    TransferPick,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JourneyFile {
    request: ReqId,
    mode: String,
    legs: Vec<LegFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LegFile {
    vehicle: VehId,
    from: LocId,
    to: LocId,
}

pub fn solution_to_json(sol: &Solution) -> String {
    let routes = sol
        .routes()
        .iter()
        .map(|r| RouteFile {
            vehicle: r.vehicle,
            stops: r
                .stops
                .iter()
                .map(|s| {
                    let (action, request) = match s.action {
                        Action::Start => (ActionName::Start, None),
                        Action::End => (ActionName::End, None),
                        Action::Pickup(q) => (ActionName::Pickup, Some(q)),
                        Action::Deliver(q) => (ActionName::Deliver, Some(q)),
                        Action::TransferDrop(q) => (ActionName::TransferDrop, Some(q)),
                        Action::TransferPick(q) => (ActionName::TransferPick, Some(q)),
                    };
                    StopFile { loc: s.loc, action, request, time: s.time.is_finite().then_some(s.time) }
                })
                .collect(),
        })
        .collect();
    let journeys = sol
        .journeys()
        .iter()
        .enumerate()
        .map(|(r, j)| JourneyFile {
            request: r,
            mode: j.mode().to_string(),
            legs: j.legs.iter().map(|l| LegFile { vehicle: l.vehicle, from: l.from, to: l.to }).collect(),
        })
        .collect();
    let file = SolutionFile { objective: sol.objective(), routes, journeys };
    let mut text = serde_json::to_string_pretty(&file).expect("solution serializes");
    text.push('\n');
    text
}

/// Parses a solution. Times and objective in the file are informational;
/// they are recomputed from the routes.
pub fn solution_from_json(inst: &Instance, text: &str) -> Result<Solution, SolutionFileError> {
    let file: SolutionFile = serde_json::from_str(text)?;
    let n_veh = inst.vehicles.len();
    let n_req = inst.requests.len();
    let mut routes: Vec<Option<Route>> = vec![None; n_veh];
    for rf in file.routes {
        if rf.vehicle >= n_veh || routes[rf.vehicle].is_some() {
            return Err(SolutionFileError::Mismatch(format!("bad or repeated vehicle {}", rf.vehicle)));
        }
        let mut stops = Vec::with_capacity(rf.stops.len());
        for sf in rf.stops {
            if sf.loc >= inst.n_locations() {
                return Err(SolutionFileError::Mismatch(format!("unknown location {}", sf.loc)));
            }
            let need = |r: Option<ReqId>| match r {
                Some(r) if r < n_req => Ok(r),
                _ => Err(SolutionFileError::Mismatch(format!("stop at {} needs a valid request", sf.loc))),
            };
            let action = match sf.action {
                ActionName::Start => Action::Start,
                ActionName::End => Action::End,
                ActionName::Pickup => Action::Pickup(need(sf.request)?),
                ActionName::Deliver => Action::Deliver(need(sf.request)?),
                ActionName::TransferDrop => Action::TransferDrop(need(sf.request)?),
                ActionName::TransferPick => Action::TransferPick(need(sf.request)?),
            };
            stops.push(Stop::new(sf.loc, action));
        }
        routes[rf.vehicle] = Some(Route { vehicle: rf.vehicle, stops });
    }
    let routes: Vec<Route> = routes
        .into_iter()
        .enumerate()
        .map(|(k, r)| r.ok_or_else(|| SolutionFileError::Mismatch(format!("missing route of vehicle {k}"))))
        .collect::<Result<_, _>>()?;
    let mut journeys = vec![Journey::default(); n_req];
    for jf in file.journeys {
        if jf.request >= n_req {
            return Err(SolutionFileError::Mismatch(format!("unknown request {}", jf.request)));
        }
        journeys[jf.request] =
            Journey { legs: jf.legs.iter().map(|l| Leg { vehicle: l.vehicle, from: l.from, to: l.to }).collect() };
    }
    Ok(Solution::from_parts(inst, routes, journeys))
}

pub fn load_solution(inst: &Instance, path: impl AsRef<Path>) -> Result<Solution, SolutionFileError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| SolutionFileError::Io { path: path.to_path_buf(), source })?;
    solution_from_json(inst, &text)
}

pub fn save_solution(sol: &Solution, path: impl AsRef<Path>) -> Result<(), SolutionFileError> {
    let path = path.as_ref();
    std::fs::write(path, solution_to_json(sol))
        .map_err(|source| SolutionFileError::Io { path: path.to_path_buf(), source })
}
