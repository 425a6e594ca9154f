use std::collections::HashMap;
use std::fmt;

use crate::model::{Instance, Role};

use super::schedule::{schedule_routes, Infeasibility};
use super::solution::{Action, Solution};

/// The problem property a violation breaks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Property {
    /// Routes start at the origin, end at the destination, and visit each
    /// non-depot location at most once.
    RouteStructure,
    /// Every request is picked up and delivered exactly once.
    Coverage,
    /// Along each journey, loading happens before unloading.
    Precedence,
    /// Transfer drops and picks match and admit an ordering.
    Synchronization,
    /// Loads stay within capacity.
    Capacity,
    /// Service starts fit the time windows.
    TimeWindows,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionViolation {
    pub property: Property,
    pub message: String,
}

impl fmt::Display for SolutionViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}: {}", self.property, self.message)
    }
}

/// Checks every property; the report is empty iff the solution is feasible.
pub fn validate_solution(inst: &Instance, sol: &Solution) -> Vec<SolutionViolation> {
    let mut out = Vec::new();
    let mut push = |property: Property, message: String| out.push(SolutionViolation { property, message });
    let routes = sol.routes();
    let n_req = inst.requests.len();

    if routes.len() != inst.vehicles.len() {
        push(
            Property::RouteStructure,
            format!("{} routes for {} vehicles", routes.len(), inst.vehicles.len()),
        );
        return out;
    }
    if sol.journeys().len() != n_req {
        push(Property::Coverage, format!("{} journeys for {} requests", sol.journeys().len(), n_req));
        return out;
    }

    let mut structural_ok = true;
    for (k, route) in routes.iter().enumerate() {
        let v = &inst.vehicles[k];
        if route.vehicle != k {
            push(Property::RouteStructure, format!("route {k} is labelled vehicle {}", route.vehicle));
            structural_ok = false;
        }
        let stops = &route.stops;
        if stops.len() < 2
            || stops[0].action != Action::Start
            || stops[0].loc != v.origin
            || stops[stops.len() - 1].action != Action::End
            || stops[stops.len() - 1].loc != v.destination
        {
            push(Property::RouteStructure, format!("vehicle {k}: route must run from its origin to its destination"));
            structural_ok = false;
            continue;
        }
        let mut visited: HashMap<usize, usize> = HashMap::new();
        for (m, s) in stops.iter().enumerate() {
            if m > 0 && m + 1 < stops.len() {
                if matches!(s.action, Action::Start | Action::End) {
                    push(Property::RouteStructure, format!("vehicle {k} stop {m}: depot action inside the route"));
                    structural_ok = false;
                }
                if let Some(r) = s.action.request() {
                    if r >= n_req {
                        push(Property::RouteStructure, format!("vehicle {k} stop {m}: unknown request {r}"));
                        structural_ok = false;
                        continue;
                    }
                }
                let req = s.action.request().map(|r| &inst.requests[r]);
                let fits = match (s.action, req) {
                    (Action::Pickup(_), Some(q)) => s.loc == q.pickup,
                    (Action::Deliver(_), Some(q)) => s.loc == q.delivery,
                    (Action::TransferDrop(_) | Action::TransferPick(_), _) => {
                        s.loc < inst.n_locations() && inst.role(s.loc) == Role::Transfer
                    }
                    _ => true,
                };
                if !fits {
                    push(
                        Property::RouteStructure,
                        format!("vehicle {k} stop {m}: action {:?} does not match location {}", s.action, s.loc),
                    );
                    structural_ok = false;
                }
            }
            let new_visit = m == 0 || stops[m - 1].loc != s.loc;
            if new_visit {
                let count = visited.entry(s.loc).or_insert(0);
                *count += 1;
                if *count == 2 {
                    push(Property::RouteStructure, format!("vehicle {k} visits location {} more than once", s.loc));
                    structural_ok = false;
                }
            }
        }
    }
    if !structural_ok {
        return out;
    }

    // Where each request's stops are: (vehicle, stop index, action).
    let mut stops_of: Vec<Vec<(usize, usize, Action)>> = vec![Vec::new(); n_req];
    for (k, route) in routes.iter().enumerate() {
        for (m, s) in route.stops.iter().enumerate() {
            if let Some(r) = s.action.request() {
                stops_of[r].push((k, m, s.action));
            }
        }
    }
    for (r, req) in inst.requests.iter().enumerate() {
        let pickups = stops_of[r].iter().filter(|x| matches!(x.2, Action::Pickup(_))).count();
        let deliveries = stops_of[r].iter().filter(|x| matches!(x.2, Action::Deliver(_))).count();
        let journey = sol.journey(r);
        if pickups != 1 || deliveries != 1 || !journey.is_served() {
            push(
                Property::Coverage,
                format!("request {r}: {pickups} pickups, {deliveries} deliveries, {} journey legs", journey.legs.len()),
            );
            continue;
        }
        let legs = &journey.legs;
        let chained = legs[0].from == req.pickup
            && legs[legs.len() - 1].to == req.delivery
            && legs.windows(2).all(|w| w[0].to == w[1].from && w[0].vehicle != w[1].vehicle)
            && legs[..legs.len() - 1]
                .iter()
                .all(|l| l.to < inst.n_locations() && inst.role(l.to) == Role::Transfer)
            && legs.iter().all(|l| l.vehicle < routes.len());
        if !chained || stops_of[r].len() != 2 * legs.len() {
            push(Property::Precedence, format!("request {r}: journey legs do not chain pickup to delivery"));
            continue;
        }
        for (n, leg) in legs.iter().enumerate() {
            let load_action = if n == 0 { Action::Pickup(r) } else { Action::TransferPick(r) };
            let unload_action = if n + 1 == legs.len() { Action::Deliver(r) } else { Action::TransferDrop(r) };
            let find = |action: Action, loc: usize| {
                routes[leg.vehicle].stops.iter().position(|s| s.action == action && s.loc == loc)
            };
            match (find(load_action, leg.from), find(unload_action, leg.to)) {
                (Some(a), Some(b)) if a < b => {}
                (Some(_), Some(_)) => push(
                    Property::Precedence,
                    format!("request {r}: vehicle {} unloads before it loads", leg.vehicle),
                ),
                _ => push(
                    Property::Precedence,
                    format!("request {r}: vehicle {} lacks the stops of its leg", leg.vehicle),
                ),
            }
        }
    }

    let cap = inst.capacity() as i64;
    for (k, route) in routes.iter().enumerate() {
        let mut load = 0i64;
        for (m, s) in route.stops.iter().enumerate() {
            load += s.action.load_sign() * s.action.request().map_or(0, |r| inst.requests[r].qty as i64);
            if load > cap || load < 0 {
                push(Property::Capacity, format!("vehicle {k} stop {m}: load {load} outside [0, {cap}]"));
                break;
            }
        }
    }

    match schedule_routes(inst, routes) {
        Ok(_) => {}
        Err(e @ Infeasibility::TimeWindow { .. }) => push(Property::TimeWindows, e.to_string()),
        Err(e) => push(Property::Synchronization, e.to_string()),
    }
    out
}
