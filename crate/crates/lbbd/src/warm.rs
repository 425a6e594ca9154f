use pdpt_core::{compute_schedule, validate_solution, Action, Instance, Solution};

use crate::master::MasterModel;
use crate::LbbdError;

/// Master values reproducing a feasible solution: trips between
/// consecutive distinct route locations, loaded trips along every journey
/// leg, arrival times from the synchronized schedule and `z` equal to the
/// solution cost. The result is checked against every master row.
pub fn warm_start_from(inst: &Instance, master: &MasterModel, sol: &Solution) -> Result<Vec<f64>, LbbdError> {
    if let Some(v) = validate_solution(inst, sol).first() {
        return Err(LbbdError::InvalidWarmStart(v.to_string()));
    }
    if !sol.is_complete() {
        return Err(LbbdError::InvalidWarmStart(format!("requests {:?} are not served", sol.unserved())));
    }
    let schedule = compute_schedule(inst, sol).map_err(|e| LbbdError::InvalidWarmStart(e.to_string()))?;
    let mut values: Vec<f64> = master.model.vars().iter().map(|v| v.lower.max(0.0)).collect();
    for route in sol.routes() {
        for w in route.stops.windows(2) {
            if w[0].loc != w[1].loc {
                values[master.trip[w[0].loc][w[1].loc].0] = 1.0;
            }
        }
    }
    for (r, journey) in sol.journeys().iter().enumerate() {
        for leg in &journey.legs {
            let stops = &sol.route(leg.vehicle).stops;
            let start = stops
                .iter()
                .position(|s| s.loc == leg.from && matches!(s.action, Action::Pickup(q) | Action::TransferPick(q) if q == r))
                .ok_or_else(|| LbbdError::InvalidWarmStart(format!("leg of request {r} has no boarding stop")))?;
            let end = (start..stops.len())
                .find(|&m| stops[m].loc == leg.to && matches!(stops[m].action, Action::Deliver(q) | Action::TransferDrop(q) if q == r))
                .ok_or_else(|| LbbdError::InvalidWarmStart(format!("leg of request {r} has no alighting stop")))?;
            for m in start..end {
                let (i, j) = (stops[m].loc, stops[m + 1].loc);
                if i != j {
                    let v = master.load[r][i][j].expect("distinct locations");
                    values[v.0] = 1.0;
                    // passing a transfer point on board counts as reaching it
                    if let Some(b) = master.transfer_arrival[r][j] {
                        values[b.0] = schedule.earliest[leg.vehicle][m + 1];
                    }
                }
            }
        }
    }
    for (k, route) in sol.routes().iter().enumerate() {
        for (m, s) in route.stops.iter().enumerate() {
            if let Some(a) = master.arrival[s.loc] {
                values[a.0] = schedule.earliest[k][m];
            }
        }
    }
    values[master.z.0] = sol.objective();
    let broken = master.model.violations(&values, 1e-6);
    match broken.first() {
        Some(first) => Err(LbbdError::InvalidWarmStart(format!("master row violated: {first}"))),
        None => Ok(values),
    }
}
