//! Subproblem: assign the master's loaded trips to vehicles, complete the
//! routes and synchronize transfers. Two solvers share the same semantics:
//! the MILP handed to a backend, and an exhaustive search over route
//! segments used with the built-in backend.

use std::collections::HashMap;

use pdpt_core::{Action, Instance, Journey, Leg, LocId, Role, Route, Solution, Stop, TIME_EPS};
use pdpt_milp::{Backend, Limits, MilpModel, Row, Sense, SolveStatus, VarId};

use crate::paths::{MasterAssignment, TransferTriple};
use crate::LbbdError;

#[derive(Debug, Clone)]
pub struct SubproblemModel {
    pub model: MilpModel,
    /// `route[k][i][j]`: vehicle k drives trip (i, j). Absent for trips
    /// touching another vehicle's depots.
    pub route: Vec<Vec<Vec<Option<VarId>>>>,
    /// `arrival[k][j]`, absent where `route` rules the location out.
    pub arrival: Vec<Vec<Option<VarId>>>,
}

#[derive(Debug, Clone)]
pub struct SubproblemSolution {
    /// Objective of the subproblem: total distance of `routes`.
    pub value: f64,
    /// Location sequence per vehicle, depots included.
    pub routes: Vec<Vec<LocId>>,
    /// The same plan as a solution; transfer visits without a drop or a
    /// pick are left out, so its cost can be below `value`.
    pub plan: Solution,
}

fn allowed(inst: &Instance, k: usize, j: LocId) -> bool {
    match inst.role(j) {
        Role::Origin(v) | Role::Destination(v) => v == k,
        _ => true,
    }
}

pub fn build_subproblem(inst: &Instance, edges: &[(LocId, LocId)], transfers: &[Vec<TransferTriple>]) -> SubproblemModel {
    let n = inst.n_locations();
    let nk = inst.vehicles.len();
    let mut m = MilpModel::new(format!("sub_{}", inst.meta.name.replace(|c: char| !c.is_ascii_alphanumeric(), "_")));
    let route: Vec<Vec<Vec<Option<VarId>>>> = (0..nk)
        .map(|k| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            (i != j && allowed(inst, k, i) && allowed(inst, k, j))
                                .then(|| m.add_binary(format!("x_{i}_{j}_{k}")))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let arrival: Vec<Vec<Option<VarId>>> = (0..nk)
        .map(|k| {
            (0..n)
                .map(|j| {
                    let tw = inst.tw(j);
                    allowed(inst, k, j).then(|| m.add_continuous(format!("a_{j}_{k}"), tw.open, tw.close))
                })
                .collect()
        })
        .collect();
    let mut objective = Vec::new();
    for by_tail in &route {
        for (i, row) in by_tail.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    objective.push((*v, inst.c(i, j)));
                }
            }
        }
    }
    m.set_objective(objective);

    let x = |k: usize, i: usize, j: usize| route[k][i][j];
    let into = |k: usize, j: usize| -> Vec<(VarId, f64)> { (0..n).filter_map(|i| x(k, i, j)).map(|v| (v, 1.0)).collect() };
    let out_of = |k: usize, i: usize| -> Vec<(VarId, f64)> { (0..n).filter_map(|j| x(k, i, j)).map(|v| (v, 1.0)).collect() };
    let depot = |j: LocId| matches!(inst.role(j), Role::Origin(_) | Role::Destination(_));

    for (k, veh) in inst.vehicles.iter().enumerate() {
        m.add_row(Row::new(format!("start_{k}"), out_of(k, veh.origin), Sense::Eq, 1.0));
        m.add_row(Row::new(format!("finish_{k}"), into(k, veh.destination), Sense::Eq, 1.0));
        m.add_row(Row::new(format!("noreturn_{k}"), into(k, veh.origin), Sense::Eq, 0.0));
        m.add_row(Row::new(format!("noleave_{k}"), out_of(k, veh.destination), Sense::Eq, 0.0));
        for j in (0..n).filter(|&j| allowed(inst, k, j)) {
            m.add_row(Row::new(format!("once_{j}_{k}"), into(k, j), Sense::Le, 1.0));
            if !depot(j) {
                let mut terms = into(k, j);
                terms.extend(out_of(k, j).into_iter().map(|(v, _)| (v, -1.0)));
                m.add_row(Row::new(format!("flow_{j}_{k}"), terms, Sense::Eq, 0.0));
            }
        }
    }
    // coverage summed over the fleet
    for (r, req) in inst.requests.iter().enumerate() {
        let leave: Vec<(VarId, f64)> = (0..nk).flat_map(|k| out_of(k, req.pickup)).collect();
        m.add_row(Row::new(format!("pickup_{r}"), leave, Sense::Eq, 1.0));
        let reach: Vec<(VarId, f64)> = (0..nk).flat_map(|k| into(k, req.delivery)).collect();
        m.add_row(Row::new(format!("delivery_{r}"), reach, Sense::Eq, 1.0));
    }
    for &(i, j) in edges {
        let terms: Vec<(VarId, f64)> = (0..nk).filter_map(|k| x(k, i, j)).map(|v| (v, 1.0)).collect();
        m.add_row(Row::new(format!("keep_{i}_{j}"), terms, Sense::Eq, 1.0));
    }
    for k in 0..nk {
        for i in 0..n {
            for j in 0..n {
                let Some(v) = x(k, i, j) else { continue };
                let gap = inst.gap(i, j);
                let big = gap + inst.tw(i).close;
                m.add_row(Row::new(
                    format!("time_{i}_{j}_{k}"),
                    vec![(arrival[k][i].unwrap(), 1.0), (arrival[k][j].unwrap(), -1.0), (v, big)],
                    Sense::Le,
                    big - gap,
                ));
            }
        }
        for (r, req) in inst.requests.iter().enumerate() {
            m.add_row(Row::new(
                format!("order_{r}_{k}"),
                vec![(arrival[k][req.pickup].unwrap(), 1.0), (arrival[k][req.delivery].unwrap(), -1.0)],
                Sense::Le,
                0.0,
            ));
        }
    }
    for (r, triples) in transfers.iter().enumerate() {
        for &(i, t, j) in triples {
            let u = inst.tw(t).close;
            for k in 0..nk {
                for l in (0..nk).filter(|&l| l != k) {
                    let (Some(drop), Some(pick)) = (x(k, i, t), x(l, t, j)) else { continue };
                    m.add_row(Row::new(
                        format!("sync_{r}_{i}_{t}_{j}_{k}_{l}"),
                        vec![(arrival[k][t].unwrap(), 1.0), (arrival[l][t].unwrap(), -1.0), (drop, u), (pick, u)],
                        Sense::Le,
                        2.0 * u,
                    ));
                }
            }
        }
    }
    SubproblemModel { model: m, route, arrival }
}

/// Solves the subproblem MILP with `backend` and reads the routes back.
pub fn solve_subproblem_milp(
    inst: &Instance,
    asg: &MasterAssignment,
    backend: &dyn Backend,
    limits: &Limits,
) -> Result<Option<SubproblemSolution>, LbbdError> {
    let sub = build_subproblem(inst, &asg.edges, &asg.transfers);
    let result = backend.solve(&sub.model, limits, None, None)?;
    let values = match (result.status, result.values) {
        (SolveStatus::Infeasible, _) => return Ok(None),
        (SolveStatus::Optimal, Some(v)) => v,
        (status, _) => return Err(LbbdError::Subproblem(format!("subproblem solve ended with {status:?}"))),
    };
    let n = inst.n_locations();
    let mut routes = Vec::new();
    for (k, veh) in inst.vehicles.iter().enumerate() {
        let mut nodes = vec![veh.origin];
        let mut at = veh.origin;
        while at != veh.destination {
            let next = (0..n)
                .find(|&j| sub.route[k][at][j].is_some_and(|v| values[v.0] > 0.5))
                .ok_or_else(|| LbbdError::Subproblem(format!("route of vehicle {k} stops at {at}")))?;
            nodes.push(next);
            at = next;
            if nodes.len() > n + 1 {
                return Err(LbbdError::Subproblem(format!("route of vehicle {k} loops")));
            }
        }
        routes.push(nodes);
    }
    let value = result.objective.unwrap_or(f64::INFINITY);
    let plan = plan_from_routes(inst, asg, &routes)?;
    Ok(Some(SubproblemSolution { value, routes, plan }))
}

/// Maximal chains of loaded trips whose inner locations are not transfer
/// points. None when the trips cannot be split that way (a location other
/// than a transfer entered or left twice, or a closed loop).
fn segments(inst: &Instance, edges: &[(LocId, LocId)]) -> Option<Vec<Vec<LocId>>> {
    let n = inst.n_locations();
    let mut succ: Vec<Option<LocId>> = vec![None; n];
    let mut has_pred = vec![false; n];
    for &(i, j) in edges {
        if !inst.is_transfer(i) {
            if succ[i].is_some() {
                return None;
            }
            succ[i] = Some(j);
        }
        if !inst.is_transfer(j) {
            if has_pred[j] {
                return None;
            }
            has_pred[j] = true;
        }
    }
    let mut used = 0usize;
    let mut out = Vec::new();
    for &(i, j) in edges {
        if !inst.is_transfer(i) && has_pred[i] {
            continue;
        }
        let mut seg = vec![i, j];
        used += 1;
        let mut at = j;
        while !inst.is_transfer(at) {
            let Some(next) = succ[at] else { break };
            seg.push(next);
            used += 1;
            at = next;
            if seg.len() > n + 1 {
                return None;
            }
        }
        out.push(seg);
    }
    (used == edges.len()).then_some(out)
}

struct Search<'a> {
    inst: &'a Instance,
    segs: Vec<Vec<LocId>>,
    seg_cost: Vec<f64>,
    triples: Vec<(LocId, LocId, LocId)>,
    best: Option<(f64, Vec<Vec<usize>>)>,
    n: usize,
}

/// Exact subproblem by enumeration: every split of the segments among the
/// vehicles and every order within a vehicle, with the same schedule rules
/// as the MILP (one arrival per vehicle and location, travel gaps, windows,
/// pickup not after delivery on a shared vehicle, and a picking vehicle not
/// arriving at a transfer before the dropping one).
pub fn solve_subproblem_enumeration(inst: &Instance, asg: &MasterAssignment) -> Result<Option<SubproblemSolution>, LbbdError> {
    let Some(segs) = segments(inst, &asg.edges) else { return Ok(None) };
    let seg_cost = segs.iter().map(|s| s.windows(2).map(|w| inst.c(w[0], w[1])).sum()).collect();
    let triples = asg.transfers.iter().flatten().copied().collect();
    let mut search = Search { inst, segs, seg_cost, triples, best: None, n: inst.n_locations() };
    let nk = inst.vehicles.len();
    let mut assigned: Vec<Vec<usize>> = vec![Vec::new(); nk];
    let mut on_route = vec![false; search.n];
    let origin = inst.vehicles[0].origin;
    on_route[origin] = true;
    let mut used = vec![false; search.segs.len()];
    let start_time = inst.tw(origin).open;
    search.extend(0, origin, start_time, 0.0, &mut assigned, &mut used, &mut on_route);
    let Some((_, order)) = search.best.take() else { return Ok(None) };
    let routes = search.routes_of(&order);
    let value = routes.iter().map(|r| r.windows(2).map(|w| inst.c(w[0], w[1])).sum::<f64>()).sum();
    let plan = plan_from_routes(inst, asg, &routes)?;
    Ok(Some(SubproblemSolution { value, routes, plan }))
}

impl Search<'_> {
    fn routes_of(&self, order: &[Vec<usize>]) -> Vec<Vec<LocId>> {
        self.inst
            .vehicles
            .iter()
            .zip(order)
            .map(|(veh, segs)| {
                let mut nodes = vec![veh.origin];
                for &s in segs {
                    let seg = &self.segs[s];
                    let skip = usize::from(*nodes.last().unwrap() == seg[0]);
                    nodes.extend(&seg[skip..]);
                }
                nodes.push(veh.destination);
                nodes
            })
            .collect()
    }

    /// Depth first: extend vehicle `k`'s route (currently ending at `last`
    /// with earliest time `time`) by an unused segment, or close it.
    #[allow(clippy::too_many_arguments)]
    fn extend(
        &mut self,
        k: usize,
        last: LocId,
        time: f64,
        cost: f64,
        assigned: &mut Vec<Vec<usize>>,
        used: &mut Vec<bool>,
        on_route: &mut Vec<bool>,
    ) {
        let rest: f64 = (0..self.segs.len()).filter(|&s| !used[s]).map(|s| self.seg_cost[s]).sum();
        if self.best.as_ref().is_some_and(|b| cost + rest >= b.0 - 1e-9) {
            return;
        }
        let inst = self.inst;
        let nk = inst.vehicles.len();
        // close the route
        let dest = inst.vehicles[k].destination;
        let arrive = (time + inst.gap(last, dest)).max(inst.tw(dest).open);
        if arrive <= inst.tw(dest).close + TIME_EPS {
            let closed = cost + inst.c(last, dest);
            if k + 1 == nk {
                if used.iter().all(|&u| u) && self.best.as_ref().is_none_or(|b| closed < b.0 - 1e-9) && self.schedule_ok(assigned) {
                    self.best = Some((closed, assigned.clone()));
                }
            } else {
                let next = inst.vehicles[k + 1].origin;
                on_route.iter_mut().for_each(|v| *v = false);
                on_route[next] = true;
                self.extend(k + 1, next, inst.tw(next).open, closed, assigned, used, on_route);
                // restore the visited set of vehicle k
                self.mark_route(k, assigned, on_route);
            }
        }
        // cheapest continuation first
        let mut options: Vec<(f64, usize)> = (0..self.segs.len())
            .filter(|&s| !used[s])
            .map(|s| (inst.c(last, self.segs[s][0]) * f64::from(u8::from(last != self.segs[s][0])), s))
            .collect();
        options.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (link, s) in options {
            let seg = self.segs[s].clone();
            let joins = seg[0] == last;
            let fresh = &seg[usize::from(joins)..];
            if fresh.iter().any(|&j| on_route[j]) {
                continue;
            }
            let mut t = time;
            let mut prev = last;
            let mut ok = true;
            for &j in fresh {
                t = (t + inst.gap(prev, j)).max(inst.tw(j).open);
                if t > inst.tw(j).close + TIME_EPS {
                    ok = false;
                    break;
                }
                prev = j;
            }
            if !ok {
                continue;
            }
            used[s] = true;
            assigned[k].push(s);
            for &j in fresh {
                on_route[j] = true;
            }
            self.extend(k, prev, t, cost + link + self.seg_cost[s], assigned, used, on_route);
            for &j in fresh {
                on_route[j] = false;
            }
            assigned[k].pop();
            used[s] = false;
        }
    }

    fn mark_route(&self, k: usize, assigned: &[Vec<usize>], on_route: &mut [bool]) {
        on_route.iter_mut().for_each(|v| *v = false);
        on_route[self.inst.vehicles[k].origin] = true;
        for &s in &assigned[k] {
            for &j in &self.segs[s] {
                on_route[j] = true;
            }
        }
    }

    /// Least arrival times under travel gaps, windows and transfer
    /// synchronization; false when they cannot all hold.
    fn schedule_ok(&self, order: &[Vec<usize>]) -> bool {
        let inst = self.inst;
        let routes = self.routes_of(order);
        let mut vehicle_of: HashMap<(LocId, LocId), usize> = HashMap::new();
        for (k, segs) in order.iter().enumerate() {
            for &s in segs {
                for w in self.segs[s].windows(2) {
                    vehicle_of.insert((w[0], w[1]), k);
                }
            }
        }
        let pos: Vec<HashMap<LocId, usize>> =
            routes.iter().map(|r| r.iter().enumerate().map(|(m, &j)| (j, m)).collect()).collect();
        let mut sync: Vec<((usize, usize), (usize, usize))> = Vec::new();
        for &(i, t, j) in &self.triples {
            let (k, l) = (vehicle_of[&(i, t)], vehicle_of[&(t, j)]);
            if k != l {
                sync.push(((k, pos[k][&t]), (l, pos[l][&t])));
            }
        }
        let mut time: Vec<Vec<f64>> = routes.iter().map(|r| r.iter().map(|&j| inst.tw(j).open).collect()).collect();
        let total: usize = routes.iter().map(|r| r.len()).sum();
        for _ in 0..=total {
            let mut changed = false;
            for (k, r) in routes.iter().enumerate() {
                for m in 1..r.len() {
                    let t = time[k][m - 1] + inst.gap(r[m - 1], r[m]);
                    if t > time[k][m] + 1e-12 {
                        time[k][m] = t;
                        changed = true;
                    }
                }
            }
            for &((k, a), (l, b)) in &sync {
                if time[k][a] > time[l][b] + 1e-12 {
                    time[l][b] = time[k][a];
                    changed = true;
                }
            }
            if !changed {
                let windows = routes
                    .iter()
                    .enumerate()
                    .all(|(k, r)| r.iter().enumerate().all(|(m, &j)| time[k][m] <= inst.tw(j).close + TIME_EPS));
                let precedence = inst.requests.iter().all(|req| {
                    (0..routes.len()).all(|k| match (pos[k].get(&req.pickup), pos[k].get(&req.delivery)) {
                        (Some(&a), Some(&b)) => time[k][a] <= time[k][b] + TIME_EPS,
                        _ => true,
                    })
                });
                return windows && precedence;
            }
        }
        false
    }
}

/// Turns vehicle routes covering the loaded trips into a solution: stops
/// at pickups and deliveries, drops and picks where a request changes
/// vehicle, journeys split at those changes.
pub fn plan_from_routes(inst: &Instance, asg: &MasterAssignment, routes: &[Vec<LocId>]) -> Result<Solution, LbbdError> {
    let mut vehicle_of: HashMap<(LocId, LocId), usize> = HashMap::new();
    for (k, r) in routes.iter().enumerate() {
        for w in r.windows(2) {
            vehicle_of.insert((w[0], w[1]), k);
        }
    }
    let mut journeys = Vec::with_capacity(asg.paths.len());
    // (vehicle, transfer) -> requests dropped / picked there
    let mut drops: HashMap<(usize, LocId), Vec<usize>> = HashMap::new();
    let mut picks: HashMap<(usize, LocId), Vec<usize>> = HashMap::new();
    for (r, path) in asg.paths.iter().enumerate() {
        let mut legs = Vec::new();
        let vehicle = |i: LocId, j: LocId| {
            vehicle_of
                .get(&(i, j))
                .copied()
                .ok_or_else(|| LbbdError::Subproblem(format!("trip ({i}, {j}) of request {r} is on no route")))
        };
        let mut from = path[0];
        let mut current = vehicle(path[0], path[1])?;
        for m in 1..path.len() - 1 {
            let next = vehicle(path[m], path[m + 1])?;
            if next != current {
                legs.push(Leg { vehicle: current, from, to: path[m] });
                drops.entry((current, path[m])).or_default().push(r);
                picks.entry((next, path[m])).or_default().push(r);
                from = path[m];
                current = next;
            }
        }
        legs.push(Leg { vehicle: current, from, to: *path.last().unwrap() });
        journeys.push(Journey { legs });
    }
    let stops_routes: Vec<Route> = routes
        .iter()
        .enumerate()
        .map(|(k, nodes)| {
            let mut stops = Vec::new();
            for &j in nodes {
                match inst.role(j) {
                    Role::Origin(_) => stops.push(Stop::new(j, Action::Start)),
                    Role::Destination(_) => stops.push(Stop::new(j, Action::End)),
                    Role::Pickup(r) => stops.push(Stop::new(j, Action::Pickup(r))),
                    Role::Delivery(r) => stops.push(Stop::new(j, Action::Deliver(r))),
                    Role::Transfer | Role::Unused => {
                        let mut d = drops.get(&(k, j)).cloned().unwrap_or_default();
                        let mut p = picks.get(&(k, j)).cloned().unwrap_or_default();
                        d.sort_unstable();
                        p.sort_unstable();
                        stops.extend(d.into_iter().map(|r| Stop::new(j, Action::TransferDrop(r))));
                        stops.extend(p.into_iter().map(|r| Stop::new(j, Action::TransferPick(r))));
                    }
                }
            }
            Route { vehicle: k, stops }
        })
        .collect();
    Ok(Solution::from_parts(inst, stops_routes, journeys))
}
