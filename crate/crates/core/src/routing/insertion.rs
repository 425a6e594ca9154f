use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::model::{Instance, LocId, ReqId, VehId};

use super::cache::Walk;
use super::schedule::schedule_routes;
use super::solution::{Action, Journey, Route, RoutingError, Solution, Stop};

/// Where the stops of one request go. Positions are stop indices of the
/// current route: a new stop "after `i`" lands between stops `i` and `i + 1`.
/// When both positions of a route are equal the two new stops are adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Placement {
    Direct {
        vehicle: VehId,
        pickup_after: usize,
        delivery_after: usize,
    },
    Transfer {
        transfer: LocId,
        first: VehId,
        pickup_after: usize,
        drop_after: usize,
        second: VehId,
        pick_after: usize,
        delivery_after: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub request: ReqId,
    pub placement: Placement,
    /// Exact change of the objective.
    pub delta: f64,
}

/// A new stop may go between `i` and `i + 1` unless both are one visit.
fn open_gap(route: &Route, i: usize) -> bool {
    i + 1 < route.stops.len() && route.stops[i].loc != route.stops[i + 1].loc
}

fn direct_positions(route: &Route) -> Vec<(usize, usize)> {
    let n = route.stops.len();
    let mut out = Vec::new();
    for i in 0..n.saturating_sub(1) {
        if !open_gap(route, i) {
            continue;
        }
        for j in i..n - 1 {
            if open_gap(route, j) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Positions for the pickup and the drop on the vehicle handing over. An
/// existing visit to the transfer point receives the drop as its first stop.
fn drop_positions(route: &Route, transfer: LocId) -> Vec<(usize, usize)> {
    match route.visit_of(transfer) {
        Some((first, _)) => {
            let j = first - 1;
            (0..=j).filter(|&i| open_gap(route, i)).map(|i| (i, j)).collect()
        }
        None => direct_positions(route),
    }
}

/// Positions for the pick and the delivery on the vehicle taking over. An
/// existing visit to the transfer point receives the pick as its last stop.
fn pick_positions(route: &Route, transfer: LocId) -> Vec<(usize, usize)> {
    match route.visit_of(transfer) {
        Some((_, last)) => (last..route.stops.len() - 1)
            .filter(|&j| open_gap(route, j))
            .map(|j| (last, j))
            .collect(),
        None => direct_positions(route),
    }
}

fn pair_delta(inst: &Instance, route: &Route, i: usize, a: LocId, j: usize, b: LocId) -> f64 {
    let s = &route.stops;
    let (li, ni) = (s[i].loc, s[i + 1].loc);
    if i == j {
        inst.c(li, a) + inst.c(a, b) + inst.c(b, ni) - inst.c(li, ni)
    } else {
        let (lj, nj) = (s[j].loc, s[j + 1].loc);
        inst.c(li, a) + inst.c(a, ni) - inst.c(li, ni) + inst.c(lj, b) + inst.c(b, nj) - inst.c(lj, nj)
    }
}

/// Every structurally valid placement of an unserved request, direct and
/// through every transfer point with two distinct vehicles, with exact cost
/// deltas. Feasibility is not checked.
pub fn enumerate_insertions(inst: &Instance, sol: &Solution, r: ReqId) -> Vec<Candidate> {
    let req = &inst.requests[r];
    let (p, d) = (req.pickup, req.delivery);
    let mut out = Vec::new();
    for route in sol.routes() {
        for (i, j) in direct_positions(route) {
            out.push(Candidate {
                request: r,
                placement: Placement::Direct { vehicle: route.vehicle, pickup_after: i, delivery_after: j },
                delta: pair_delta(inst, route, i, p, j, d),
            });
        }
    }
    for &t in &inst.transfers {
        for r1 in sol.routes() {
            let firsts = drop_positions(r1, t);
            for r2 in sol.routes() {
                if r1.vehicle == r2.vehicle {
                    continue;
                }
                let seconds = pick_positions(r2, t);
                for &(i1, j1) in &firsts {
                    let d1 = pair_delta(inst, r1, i1, p, j1, t);
                    for &(i2, j2) in &seconds {
                        out.push(Candidate {
                            request: r,
                            placement: Placement::Transfer {
                                transfer: t,
                                first: r1.vehicle,
                                pickup_after: i1,
                                drop_after: j1,
                                second: r2.vehicle,
                                pick_after: i2,
                                delivery_after: j2,
                            },
                            delta: d1 + pair_delta(inst, r2, i2, t, j2, d),
                        });
                    }
                }
            }
        }
    }
    out
}

fn well_formed(inst: &Instance, sol: &Solution, cand: &Candidate) -> bool {
    let r = cand.request;
    if r >= inst.requests.len() || sol.is_served(r) {
        return false;
    }
    let routes = sol.routes();
    match cand.placement {
        Placement::Direct { vehicle, pickup_after: i, delivery_after: j } => {
            vehicle < routes.len() && i <= j && open_gap(&routes[vehicle], i) && open_gap(&routes[vehicle], j)
        }
        Placement::Transfer { transfer, first, pickup_after, drop_after, second, pick_after, delivery_after } => {
            if first >= routes.len() || second >= routes.len() || first == second || !inst.is_transfer(transfer) {
                return false;
            }
            let (r1, r2) = (&routes[first], &routes[second]);
            let drop_ok = match sol.transfer_visit(first, transfer) {
                Some((start, _)) => drop_after + 1 == start,
                None => open_gap(r1, drop_after),
            };
            let pick_ok = match sol.transfer_visit(second, transfer) {
                Some((_, end)) => pick_after == end,
                None => open_gap(r2, pick_after),
            };
            drop_ok
                && pick_ok
                && pickup_after <= drop_after
                && open_gap(r1, pickup_after)
                && pick_after <= delivery_after
                && open_gap(r2, delivery_after)
        }
    }
}

/// Route list after the insertion; only structural work, nothing checked.
fn inserted_routes(inst: &Instance, sol: &Solution, cand: &Candidate) -> Vec<Route> {
    let mut routes = sol.routes().to_vec();
    insert_stops(inst, &mut routes, cand);
    routes
}

fn insert_stops(inst: &Instance, routes: &mut [Route], cand: &Candidate) {
    let r = cand.request;
    let req = &inst.requests[r];
    match cand.placement {
        Placement::Direct { vehicle, pickup_after, delivery_after } => {
            let stops = &mut routes[vehicle].stops;
            stops.insert(delivery_after + 1, Stop::new(req.delivery, Action::Deliver(r)));
            stops.insert(pickup_after + 1, Stop::new(req.pickup, Action::Pickup(r)));
        }
        Placement::Transfer { transfer, first, pickup_after, drop_after, second, pick_after, delivery_after } => {
            let stops = &mut routes[first].stops;
            stops.insert(drop_after + 1, Stop::new(transfer, Action::TransferDrop(r)));
            stops.insert(pickup_after + 1, Stop::new(req.pickup, Action::Pickup(r)));
            let stops = &mut routes[second].stops;
            stops.insert(delivery_after + 1, Stop::new(req.delivery, Action::Deliver(r)));
            stops.insert(pick_after + 1, Stop::new(transfer, Action::TransferPick(r)));
        }
    }
}

fn capacity_ok(inst: &Instance, route: &Route) -> bool {
    let cap = inst.capacity() as i64;
    let mut load = 0i64;
    route.stops.iter().all(|s| {
        load += s.action.load_sign() * s.action.request().map_or(0, |r| inst.requests[r].qty as i64);
        (0..=cap).contains(&load)
    })
}

/// Reference check by full recomputation of the synchronized schedule.
pub fn check_insertion_exact(inst: &Instance, sol: &Solution, cand: &Candidate) -> bool {
    if !well_formed(inst, sol, cand) {
        return false;
    }
    let routes = inserted_routes(inst, sol, cand);
    let touched: &[VehId] = match &cand.placement {
        Placement::Direct { vehicle, .. } => &[*vehicle],
        Placement::Transfer { first, second, .. } => &[*first, *second],
    };
    touched.iter().all(|&k| capacity_ok(inst, &routes[k])) && schedule_routes(inst, &routes).is_ok()
}

/// True iff applying the candidate yields a schedule- and capacity-feasible
/// solution. Constant time from the solution's cache when the affected
/// routes are independent; falls back to [`check_insertion_exact`] otherwise.
pub fn check_insertion_feasible(inst: &Instance, sol: &Solution, cand: &Candidate) -> bool {
    if !well_formed(inst, sol, cand) {
        return false;
    }
    let cache = sol.cache();
    let req = &inst.requests[cand.request];
    let routes = sol.routes();
    let verdict = match cand.placement {
        Placement::Direct { vehicle, pickup_after, delivery_after } => {
            if !cache.direct_eligible(vehicle) {
                Walk::Unknown
            } else {
                cache.walk(
                    inst,
                    &routes[vehicle],
                    vehicle,
                    req.pickup,
                    f64::NEG_INFINITY,
                    pickup_after,
                    req.delivery,
                    delivery_after,
                    req.qty,
                )
            }
        }
        Placement::Transfer { transfer, first, pickup_after, drop_after, second, pick_after, delivery_after } => {
            if !cache.pair_eligible(first, second) {
                Walk::Unknown
            } else {
                match cache.walk(
                    inst,
                    &routes[first],
                    first,
                    req.pickup,
                    f64::NEG_INFINITY,
                    pickup_after,
                    transfer,
                    drop_after,
                    req.qty,
                ) {
                    Walk::Feasible(at_drop) => cache.walk(
                        inst,
                        &routes[second],
                        second,
                        transfer,
                        at_drop,
                        pick_after,
                        req.delivery,
                        delivery_after,
                        req.qty,
                    ),
                    other => other,
                }
            }
        }
    };
    match verdict {
        Walk::Feasible(_) => true,
        Walk::Infeasible => false,
        Walk::Unknown => check_insertion_exact(inst, sol, cand),
    }
}

/// Applies a feasible candidate and refreshes the derived state.
pub fn apply_insertion(inst: &Instance, sol: &mut Solution, cand: &Candidate) -> Result<(), RoutingError> {
    let r = cand.request;
    if r >= inst.requests.len() {
        return Err(RoutingError::UnknownRequest(r));
    }
    if sol.is_served(r) {
        return Err(RoutingError::AlreadyServed(r));
    }
    if !well_formed(inst, sol, cand) {
        return Err(RoutingError::MalformedCandidate(r));
    }
    if !check_insertion_feasible(inst, sol, cand) {
        return Err(RoutingError::InfeasibleCandidate(r));
    }
    apply_structural(inst, sol, cand);
    debug_assert!(sol.is_schedule_valid());
    Ok(())
}

/// Applies a well-formed candidate without checking feasibility. The result
/// may have an infeasible schedule; see [`Solution::is_schedule_valid`].
pub fn apply_unchecked(inst: &Instance, sol: &Solution, cand: &Candidate) -> Result<Solution, RoutingError> {
    if !well_formed(inst, sol, cand) {
        return Err(RoutingError::MalformedCandidate(cand.request));
    }
    let mut out = sol.clone();
    apply_structural(inst, &mut out, cand);
    Ok(out)
}

fn apply_structural(inst: &Instance, sol: &mut Solution, cand: &Candidate) {
    let r = cand.request;
    let req = &inst.requests[r];
    insert_stops(inst, sol.routes_mut(), cand);
    sol.journeys_mut()[r] = match cand.placement {
        Placement::Direct { vehicle, .. } => Journey::direct(vehicle, req.pickup, req.delivery),
        Placement::Transfer { transfer, first, second, .. } => {
            Journey::transferred(first, req.pickup, transfer, second, req.delivery)
        }
    };
    sol.refresh(inst);
}

/// Feasible candidates in non-decreasing cost order, produced lazily.
///
/// Direct placements are all checked up front. Transfer placements are
/// combined from per-vehicle halves sorted by cost and explored best-first,
/// so only the cheap end of the (large) transfer product is ever checked.
pub fn ranked_insertions<'a>(
    inst: &'a Instance,
    sol: &'a Solution,
    r: ReqId,
    transfers: bool,
) -> RankedInsertions<'a> {
    let req = &inst.requests[r];
    let (p, d) = (req.pickup, req.delivery);
    let cache = sol.cache();
    let mut direct = Vec::new();
    for route in sol.routes() {
        for (i, j) in direct_positions(route) {
            let cand = Candidate {
                request: r,
                placement: Placement::Direct { vehicle: route.vehicle, pickup_after: i, delivery_after: j },
                delta: pair_delta(inst, route, i, p, j, d),
            };
            if check_insertion_feasible(inst, sol, &cand) {
                direct.push(cand);
            }
        }
    }
    direct.sort_by(|a, b| a.delta.total_cmp(&b.delta));

    let mut groups = Vec::new();
    let mut heap = BinaryHeap::new();
    if transfers && inst.vehicles.len() > 1 && sol.is_schedule_valid() {
        for &t in &inst.transfers {
            let mut firsts = Vec::new();
            let mut seconds = Vec::new();
            for route in sol.routes() {
                let k = route.vehicle;
                let eligible = cache.direct_eligible(k);
                for (i, j) in drop_positions(route, t) {
                    if eligible
                        && cache.walk(inst, route, k, p, f64::NEG_INFINITY, i, t, j, req.qty) == Walk::Infeasible
                    {
                        continue;
                    }
                    firsts.push(Half { vehicle: k, a: i, b: j, delta: pair_delta(inst, route, i, p, j, t) });
                }
                for (i, j) in pick_positions(route, t) {
                    if eligible
                        && cache.walk(inst, route, k, t, f64::NEG_INFINITY, i, d, j, req.qty) == Walk::Infeasible
                    {
                        continue;
                    }
                    seconds.push(Half { vehicle: k, a: i, b: j, delta: pair_delta(inst, route, i, t, j, d) });
                }
            }
            firsts.sort_by(|x, y| x.delta.total_cmp(&y.delta));
            seconds.sort_by(|x, y| x.delta.total_cmp(&y.delta));
            if !firsts.is_empty() && !seconds.is_empty() {
                let g = groups.len();
                heap.push(Reverse(Frontier { cost: firsts[0].delta + seconds[0].delta, group: g, a: 0, b: 0 }));
                groups.push(Group { transfer: t, firsts, seconds });
            }
        }
    }
    RankedInsertions { inst, sol, request: r, direct, next_direct: 0, groups, heap, budget: TRANSFER_POP_BUDGET }
}

/// Upper bound on transfer combinations examined per request.
const TRANSFER_POP_BUDGET: usize = 200_000;

struct Half {
    vehicle: VehId,
    a: usize,
    b: usize,
    delta: f64,
}

struct Group {
    transfer: LocId,
    firsts: Vec<Half>,
    seconds: Vec<Half>,
}

#[derive(PartialEq)]
struct Frontier {
    cost: f64,
    group: usize,
    a: usize,
    b: usize,
}

impl Eq for Frontier {}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.group.cmp(&other.group))
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

pub struct RankedInsertions<'a> {
    inst: &'a Instance,
    sol: &'a Solution,
    request: ReqId,
    direct: Vec<Candidate>,
    next_direct: usize,
    groups: Vec<Group>,
    heap: BinaryHeap<Reverse<Frontier>>,
    budget: usize,
}

impl Iterator for RankedInsertions<'_> {
    type Item = Candidate;

    fn next(&mut self) -> Option<Candidate> {
        loop {
            let direct = self.direct.get(self.next_direct);
            let take_direct = match (direct, self.heap.peek()) {
                (None, None) => return None,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(c), Some(Reverse(f))) => c.delta <= f.cost,
            };
            if take_direct {
                self.next_direct += 1;
                return direct.copied();
            }
            if self.budget == 0 {
                self.heap.clear();
                continue;
            }
            self.budget -= 1;
            let Reverse(f) = self.heap.pop().expect("peeked");
            let g = &self.groups[f.group];
            if f.b + 1 < g.seconds.len() {
                let cost = g.firsts[f.a].delta + g.seconds[f.b + 1].delta;
                self.heap.push(Reverse(Frontier { cost, group: f.group, a: f.a, b: f.b + 1 }));
            }
            if f.b == 0 && f.a + 1 < g.firsts.len() {
                let cost = g.firsts[f.a + 1].delta + g.seconds[0].delta;
                self.heap.push(Reverse(Frontier { cost, group: f.group, a: f.a + 1, b: 0 }));
            }
            let (h1, h2) = (&g.firsts[f.a], &g.seconds[f.b]);
            if h1.vehicle == h2.vehicle {
                continue;
            }
            let cand = Candidate {
                request: self.request,
                placement: Placement::Transfer {
                    transfer: g.transfer,
                    first: h1.vehicle,
                    pickup_after: h1.a,
                    drop_after: h1.b,
                    second: h2.vehicle,
                    pick_after: h2.a,
                    delivery_after: h2.b,
                },
                delta: f.cost,
            };
            if check_insertion_feasible(self.inst, self.sol, &cand) {
                return Some(cand);
            }
        }
    }
}
