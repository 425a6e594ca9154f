use crate::model::{Instance, LocId, ReqId, VehId};

use super::cache::FeasibilityCache;
use super::schedule::{schedule_routes, Infeasibility};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Start,
    End,
    Pickup(ReqId),
    Deliver(ReqId),
    TransferDrop(ReqId),
    TransferPick(ReqId),
}

impl Action {
    pub fn request(&self) -> Option<ReqId> {
        match *self {
            Action::Start | Action::End => None,
            Action::Pickup(r)
            | Action::Deliver(r)
            | Action::TransferDrop(r)
            | Action::TransferPick(r) => Some(r),
        }
    }

    /// +1 when the request is loaded at this stop, -1 when unloaded.
    pub fn load_sign(&self) -> i64 {
        match self {
            Action::Pickup(_) | Action::TransferPick(_) => 1,
            Action::Deliver(_) | Action::TransferDrop(_) => -1,
            Action::Start | Action::End => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stop {
    pub loc: LocId,
    pub action: Action,
    /// Earliest service start; NaN while the schedule is infeasible.
    pub time: f64,
    pub load_after: u32,
}

impl Stop {
    pub fn new(loc: LocId, action: Action) -> Stop {
        Stop { loc, action, time: f64::NAN, load_after: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub vehicle: VehId,
    pub stops: Vec<Stop>,
}

impl Route {
    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.len() <= 2
    }

    /// Index range `[first, last]` of the consecutive stops at `loc`, if any.
    pub fn visit_of(&self, loc: LocId) -> Option<(usize, usize)> {
        let first = self.stops.iter().position(|s| s.loc == loc)?;
        let mut last = first;
        while last + 1 < self.stops.len() && self.stops[last + 1].loc == loc {
            last += 1;
        }
        Some((first, last))
    }
}

/// One vehicle carrying the request from `from` to `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leg {
    pub vehicle: VehId,
    pub from: LocId,
    pub to: LocId,
}

/// How a request travels. No legs means unserved; one leg is a direct
/// journey; two legs change vehicle at a transfer point. Longer chains can
/// appear in exact-method output and are accepted by the validator.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Journey {
    pub legs: Vec<Leg>,
}

impl Journey {
    pub fn direct(vehicle: VehId, pickup: LocId, delivery: LocId) -> Journey {
        Journey { legs: vec![Leg { vehicle, from: pickup, to: delivery }] }
    }

    pub fn transferred(
        first: VehId,
        pickup: LocId,
        transfer: LocId,
        second: VehId,
        delivery: LocId,
    ) -> Journey {
        Journey {
            legs: vec![
                Leg { vehicle: first, from: pickup, to: transfer },
                Leg { vehicle: second, from: transfer, to: delivery },
            ],
        }
    }

    pub fn is_served(&self) -> bool {
        !self.legs.is_empty()
    }

    pub fn is_direct(&self) -> bool {
        self.legs.len() == 1
    }

    pub fn mode(&self) -> &'static str {
        match self.legs.len() {
            0 => "unserved",
            1 => "direct",
            2 => "transfer",
            _ => "chain",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RoutingError {
    #[error("unknown request {0}")]
    UnknownRequest(ReqId),
    #[error("request {0} is not served")]
    NotServed(ReqId),
    #[error("request {0} is already served")]
    AlreadyServed(ReqId),
    #[error("candidate for request {0} is not feasible")]
    InfeasibleCandidate(ReqId),
    #[error("candidate for request {0} does not fit the current routes")]
    MalformedCandidate(ReqId),
    #[error("schedule became infeasible: {0}")]
    Schedule(Infeasibility),
}

/// A routing plan: one route per vehicle (indexed by vehicle id) and one
/// journey per request, with the derived schedule, loads, objective and
/// insertion cache kept in sync by every mutating operation.
#[derive(Debug, Clone)]
pub struct Solution {
    routes: Vec<Route>,
    journeys: Vec<Journey>,
    objective: f64,
    schedule_valid: bool,
    cache: FeasibilityCache,
}

impl Solution {
    /// Every vehicle goes straight from origin to destination; nothing served.
    pub fn empty(inst: &Instance) -> Solution {
        let routes = inst
            .vehicles
            .iter()
            .map(|v| Route {
                vehicle: v.id,
                stops: vec![Stop::new(v.origin, Action::Start), Stop::new(v.destination, Action::End)],
            })
            .collect();
        Solution::from_parts(inst, routes, vec![Journey::default(); inst.requests.len()])
    }

    /// Builds a solution from explicit routes and journeys. Times, loads,
    /// the objective and the cache are derived; nothing is validated.
    /// Routes must be indexed by vehicle id.
    pub fn from_parts(inst: &Instance, routes: Vec<Route>, journeys: Vec<Journey>) -> Solution {
        let mut sol = Solution {
            routes,
            journeys,
            objective: 0.0,
            schedule_valid: false,
            cache: FeasibilityCache::default(),
        };
        sol.refresh(inst);
        sol
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn route(&self, vehicle: VehId) -> &Route {
        &self.routes[vehicle]
    }

    pub fn journeys(&self) -> &[Journey] {
        &self.journeys
    }

    pub fn journey(&self, r: ReqId) -> &Journey {
        &self.journeys[r]
    }

    /// Total distance, kept equal to [`evaluate`].
    pub fn objective(&self) -> f64 {
        self.objective
    }

    /// True when the synchronized schedule exists and respects every window.
    pub fn is_schedule_valid(&self) -> bool {
        self.schedule_valid
    }

    pub fn cache(&self) -> &FeasibilityCache {
        &self.cache
    }

    /// First and last stop index of the vehicle's visit to `loc`.
    pub fn transfer_visit(&self, vehicle: VehId, loc: LocId) -> Option<(usize, usize)> {
        if self.cache.is_valid() {
            self.cache.transfer_visit(vehicle, loc)
        } else {
            self.routes[vehicle].visit_of(loc)
        }
    }

    pub fn is_served(&self, r: ReqId) -> bool {
        self.journeys.get(r).is_some_and(|j| j.is_served())
    }

    pub fn served(&self) -> Vec<ReqId> {
        (0..self.journeys.len()).filter(|&r| self.is_served(r)).collect()
    }

    pub fn unserved(&self) -> Vec<ReqId> {
        (0..self.journeys.len()).filter(|&r| !self.is_served(r)).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.journeys.iter().all(|j| j.is_served())
    }

    /// True when no route carries more than the fleet capacity.
    pub fn within_capacity(&self, inst: &Instance) -> bool {
        let cap = inst.capacity() as i64;
        self.routes.iter().all(|route| {
            let mut load = 0i64;
            route.stops.iter().all(|s| {
                load += s.action.load_sign() * s.action.request().map_or(0, |r| inst.requests[r].qty as i64);
                (0..=cap).contains(&load)
            })
        })
    }

    /// Removes every stop of the given requests and marks them unserved.
    pub fn remove_requests(&mut self, inst: &Instance, requests: &[ReqId]) -> Result<(), RoutingError> {
        for &r in requests {
            if r >= self.journeys.len() {
                return Err(RoutingError::UnknownRequest(r));
            }
            if !self.journeys[r].is_served() {
                return Err(RoutingError::NotServed(r));
            }
        }
        let mut gone = vec![false; self.journeys.len()];
        for &r in requests {
            gone[r] = true;
            self.journeys[r] = Journey::default();
        }
        for route in &mut self.routes {
            route.stops.retain(|s| !s.action.request().is_some_and(|r| gone[r]));
        }
        let was_valid = self.schedule_valid;
        self.refresh(inst);
        if was_valid && !self.schedule_valid {
            let err = schedule_routes(inst, &self.routes).err().expect("schedule was just found infeasible");
            return Err(RoutingError::Schedule(err));
        }
        Ok(())
    }

    pub(crate) fn routes_mut(&mut self) -> &mut Vec<Route> {
        &mut self.routes
    }

    pub(crate) fn journeys_mut(&mut self) -> &mut Vec<Journey> {
        &mut self.journeys
    }

    /// Recomputes loads, schedule, objective and cache from the stop lists.
    pub(crate) fn refresh(&mut self, inst: &Instance) {
        for route in &mut self.routes {
            let mut load = 0i64;
            for s in &mut route.stops {
                load += s.action.load_sign() * s.action.request().map_or(0, |r| inst.requests[r].qty as i64);
                s.load_after = load.clamp(0, u32::MAX as i64) as u32;
            }
        }
        self.objective = evaluate(inst, self);
        match schedule_routes(inst, &self.routes) {
            Ok(schedule) => {
                for (route, times) in self.routes.iter_mut().zip(&schedule.earliest) {
                    for (s, &t) in route.stops.iter_mut().zip(times) {
                        s.time = t;
                    }
                }
                self.schedule_valid = true;
                self.cache = FeasibilityCache::build(inst, &self.routes, &schedule);
            }
            Err(_) => {
                for s in self.routes.iter_mut().flat_map(|r| r.stops.iter_mut()) {
                    s.time = f64::NAN;
                }
                self.schedule_valid = false;
                self.cache = FeasibilityCache::default();
            }
        }
    }
}

/// Total distance over consecutive stops of every route. Stops at the same
/// location cost nothing; an unused vehicle pays its origin-destination leg.
pub fn evaluate(inst: &Instance, sol: &Solution) -> f64 {
    sol.routes
        .iter()
        .map(|r| r.stops.windows(2).map(|w| inst.c(w[0].loc, w[1].loc)).sum::<f64>())
        .sum()
}
