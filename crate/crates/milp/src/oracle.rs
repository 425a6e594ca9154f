//! Exhaustive optimum for tiny instances: every journey mode per request
//! (direct on any vehicle, or one transfer between two distinct vehicles),
//! every stop order per vehicle, schedules checked by the routing engine.

use std::collections::HashMap;

use pdpt_core::{Action, Instance, Journey, LocId, Route, Solution, Stop, VehId};

pub const MAX_REQUESTS: usize = 5;
pub const MAX_VEHICLES: usize = 3;
pub const MAX_TRANSFERS: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OracleError {
    #[error(
        "instance too large for the exhaustive oracle ({requests} requests, {vehicles} vehicles, \
         {transfers} transfers; limits {MAX_REQUESTS}, {MAX_VEHICLES}, {MAX_TRANSFERS})"
    )]
    TooLarge { requests: usize, vehicles: usize, transfers: usize },
    #[error("no feasible solution serves every request")]
    Infeasible,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Mode {
    Direct(VehId),
    Transfer { transfer: LocId, first: VehId, second: VehId },
}

/// What one vehicle does for one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Task {
    Carry(usize),
    /// Pick up and drop at the transfer.
    Feed(usize, LocId),
    /// Take at the transfer and deliver.
    Finish(usize, LocId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Unit {
    Stop(Action, LocId),
    /// All transfer work of the vehicle at one location, as one visit.
    Visit(LocId),
}

struct Sequence {
    stops: Vec<Stop>,
    cost: f64,
}

pub fn exact_oracle_solve(inst: &Instance) -> Result<Solution, OracleError> {
    let (n_req, n_veh, n_tr) = (inst.requests.len(), inst.vehicles.len(), inst.transfers.len());
    if n_req > MAX_REQUESTS || n_veh > MAX_VEHICLES || n_tr > MAX_TRANSFERS {
        return Err(OracleError::TooLarge { requests: n_req, vehicles: n_veh, transfers: n_tr });
    }
    let mut modes = Vec::new();
    for k in 0..n_veh {
        modes.push(Mode::Direct(k));
    }
    for &t in &inst.transfers {
        for first in 0..n_veh {
            for second in 0..n_veh {
                if first != second {
                    modes.push(Mode::Transfer { transfer: t, first, second });
                }
            }
        }
    }

    let mut memo: HashMap<(VehId, Vec<Task>), Vec<Sequence>> = HashMap::new();
    let mut plans: Vec<(f64, Vec<Mode>, Vec<Vec<Task>>)> = Vec::new();
    let mut choice = vec![0usize; n_req];
    'assignments: loop {
        let assigned: Vec<Mode> = choice.iter().map(|&c| modes[c]).collect();
        let mut tasks: Vec<Vec<Task>> = vec![Vec::new(); n_veh];
        for (r, m) in assigned.iter().enumerate() {
            match *m {
                Mode::Direct(k) => tasks[k].push(Task::Carry(r)),
                Mode::Transfer { transfer, first, second } => {
                    tasks[first].push(Task::Feed(r, transfer));
                    tasks[second].push(Task::Finish(r, transfer));
                }
            }
        }
        let mut lower = 0.0;
        let mut viable = true;
        for (k, ts) in tasks.iter_mut().enumerate() {
            ts.sort_unstable();
            let seqs = memo.entry((k, ts.clone())).or_insert_with(|| vehicle_sequences(inst, k, ts));
            match seqs.first() {
                Some(s) => lower += s.cost,
                None => viable = false,
            }
        }
        if viable {
            plans.push((lower, assigned, tasks));
        }
        // next assignment, odometer style
        for c in choice.iter_mut() {
            *c += 1;
            if *c < modes.len() {
                continue 'assignments;
            }
            *c = 0;
        }
        break;
    }
    plans.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut best: Option<(f64, Solution)> = None;
    for (lower, assigned, tasks) in &plans {
        if best.as_ref().is_some_and(|b| *lower >= b.0) {
            break;
        }
        let lists: Vec<&Vec<Sequence>> =
            tasks.iter().enumerate().map(|(k, ts)| &memo[&(k, ts.clone())]).collect();
        let journeys: Vec<Journey> = assigned
            .iter()
            .enumerate()
            .map(|(r, m)| {
                let req = &inst.requests[r];
                match *m {
                    Mode::Direct(k) => Journey::direct(k, req.pickup, req.delivery),
                    Mode::Transfer { transfer, first, second } => {
                        Journey::transferred(first, req.pickup, transfer, second, req.delivery)
                    }
                }
            })
            .collect();
        let mut pick = vec![0usize; n_veh];
        combine(inst, &lists, &journeys, 0, 0.0, &mut pick, &mut best);
    }
    best.map(|(_, s)| s).ok_or(OracleError::Infeasible)
}

/// Depth-first over per-vehicle sequences (each list sorted by cost),
/// pruning on the cheapest completion.
fn combine(
    inst: &Instance,
    lists: &[&Vec<Sequence>],
    journeys: &[Journey],
    k: usize,
    cost: f64,
    pick: &mut Vec<usize>,
    best: &mut Option<(f64, Solution)>,
) {
    let rest: f64 = lists[k..].iter().map(|l| l[0].cost).sum();
    if best.as_ref().is_some_and(|b| cost + rest >= b.0) {
        return;
    }
    if k == lists.len() {
        let routes: Vec<Route> = pick
            .iter()
            .enumerate()
            .map(|(v, &i)| Route { vehicle: v, stops: lists[v][i].stops.clone() })
            .collect();
        let sol = Solution::from_parts(inst, routes, journeys.to_vec());
        if sol.is_schedule_valid() && sol.within_capacity(inst) {
            *best = Some((sol.objective(), sol));
        }
        return;
    }
    for i in 0..lists[k].len() {
        pick[k] = i;
        combine(inst, lists, journeys, k + 1, cost + lists[k][i].cost, pick, best);
    }
}

/// All stop orders for one vehicle that respect precedence, capacity and
/// the windows (transfer picks assumed unconstrained by their partner),
/// sorted by cost.
fn vehicle_sequences(inst: &Instance, k: VehId, tasks: &[Task]) -> Vec<Sequence> {
    let veh = &inst.vehicles[k];
    let mut units: Vec<Unit> = Vec::new();
    // (unit index that must come first, unit index that must come later)
    let mut before: Vec<(usize, usize)> = Vec::new();
    let mut visit_of: HashMap<LocId, usize> = HashMap::new();
    let mut visit_work: HashMap<LocId, (Vec<usize>, Vec<usize>)> = HashMap::new();
    for &task in tasks {
        match task {
            Task::Carry(r) => {
                let req = &inst.requests[r];
                units.push(Unit::Stop(Action::Pickup(r), req.pickup));
                units.push(Unit::Stop(Action::Deliver(r), req.delivery));
                before.push((units.len() - 2, units.len() - 1));
            }
            Task::Feed(r, t) => {
                let v = *visit_of.entry(t).or_insert_with(|| {
                    units.push(Unit::Visit(t));
                    units.len() - 1
                });
                visit_work.entry(t).or_default().0.push(r);
                units.push(Unit::Stop(Action::Pickup(r), inst.requests[r].pickup));
                before.push((units.len() - 1, v));
            }
            Task::Finish(r, t) => {
                let v = *visit_of.entry(t).or_insert_with(|| {
                    units.push(Unit::Visit(t));
                    units.len() - 1
                });
                visit_work.entry(t).or_default().1.push(r);
                units.push(Unit::Stop(Action::Deliver(r), inst.requests[r].delivery));
                before.push((v, units.len() - 1));
            }
        }
    }
    let expand = |u: Unit| -> Vec<Stop> {
        match u {
            Unit::Stop(a, loc) => vec![Stop::new(loc, a)],
            Unit::Visit(t) => {
                let (drops, picks) = &visit_work[&t];
                let mut drops = drops.clone();
                let mut picks = picks.clone();
                drops.sort_unstable();
                picks.sort_unstable();
                drops
                    .into_iter()
                    .map(|r| Stop::new(t, Action::TransferDrop(r)))
                    .chain(picks.into_iter().map(|r| Stop::new(t, Action::TransferPick(r))))
                    .collect()
            }
        }
    };
    let mut preds = vec![0u64; units.len()];
    for &(a, b) in &before {
        preds[b] |= 1 << a;
    }
    let unit_stops: Vec<Vec<Stop>> = units.iter().map(|&u| expand(u)).collect();
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(units.len());
    extend(inst, veh.capacity as i64, &unit_stops, &preds, 0, &mut path, (veh.origin, 0.0, 0, 0.0), &mut out, k);
    out.sort_by(|a, b| a.cost.total_cmp(&b.cost));
    out
}

/// `state` is (last location, its service start, load, distance so far).
#[allow(clippy::too_many_arguments)]
fn extend(
    inst: &Instance,
    cap: i64,
    units: &[Vec<Stop>],
    preds: &[u64],
    done: u64,
    path: &mut Vec<usize>,
    state: (LocId, f64, i64, f64),
    out: &mut Vec<Sequence>,
    k: VehId,
) {
    let (last, time, load, dist) = state;
    if path.len() == units.len() {
        let veh = &inst.vehicles[k];
        let arrive = time + inst.gap(last, veh.destination);
        if arrive > inst.tw(veh.destination).close + pdpt_core::TIME_EPS {
            return;
        }
        let mut stops = vec![Stop::new(veh.origin, Action::Start)];
        for &u in path.iter() {
            stops.extend(units[u].iter().cloned());
        }
        stops.push(Stop::new(veh.destination, Action::End));
        out.push(Sequence { stops, cost: dist + inst.c(last, veh.destination) });
        return;
    }
    for u in 0..units.len() {
        if done & (1 << u) != 0 || preds[u] & !done != 0 {
            continue;
        }
        let loc = units[u][0].loc;
        let t = (time + inst.gap(last, loc)).max(inst.tw(loc).open);
        if t > inst.tw(loc).close + pdpt_core::TIME_EPS {
            continue;
        }
        let mut l = load;
        let mut ok = true;
        for s in &units[u] {
            let q = s.action.request().map_or(0, |r| inst.requests[r].qty as i64);
            l += s.action.load_sign() * q;
            ok &= l <= cap;
        }
        if !ok {
            continue;
        }
        path.push(u);
        extend(inst, cap, units, preds, done | (1 << u), path, (loc, t, l, dist + inst.c(last, loc)), out, k);
        path.pop();
    }
}
