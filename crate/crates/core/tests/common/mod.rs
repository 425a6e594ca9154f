#![allow(dead_code)]

use pdpt_core::routing::{apply_insertion, apply_unchecked, check_insertion_exact, enumerate_insertions};
use pdpt_core::{
    Action, Instance, Location, LocationKind, Meta, Metric, Request, Route, Solution, TimeWindow,
    Vehicle,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn meta(name: &str) -> Meta {
    Meta { name: name.into(), metric: Metric::Euclidean, speed_kmh: 20.0, horizon: 480.0, seed: None }
}

pub fn loc(id: usize, kind: LocationKind, x: f64, y: f64, open: f64, close: f64, service: f64) -> Location {
    Location { id, kind, x, y, tw: TimeWindow::new(open, close), service }
}

/// Random planar instance in a 100 x 100 hectometer square. Locations are
/// ordered origins, destinations, pickup/delivery pairs, transfers.
pub fn random_instance(seed: u64, n_req: usize, n_veh: usize, n_tr: usize, tight: bool) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut locations = Vec::new();
    let pt = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
    for k in 0..n_veh {
        let (x, y) = pt(&mut rng);
        locations.push(loc(k, LocationKind::DepotOrigin, x, y, 0.0, 480.0, 0.0));
    }
    for k in 0..n_veh {
        let (x, y) = pt(&mut rng);
        locations.push(loc(n_veh + k, LocationKind::DepotDestination, x, y, 0.0, 480.0, 0.0));
    }
    let mut requests = Vec::new();
    for r in 0..n_req {
        let (px, py) = pt(&mut rng);
        let (dx, dy) = pt(&mut rng);
        let width = if tight { rng.gen_range(20.0..60.0) } else { rng.gen_range(60.0..200.0) };
        let po = rng.gen_range(0.0..200.0);
        let dopen = po + rng.gen_range(0.0..80.0);
        let sp = rng.gen_range(0..4) as f64;
        let sd = rng.gen_range(0..4) as f64;
        let id = locations.len();
        locations.push(loc(id, LocationKind::Pickup, px, py, po, po + width, sp));
        locations.push(loc(id + 1, LocationKind::Delivery, dx, dy, dopen, dopen + width, sd));
        requests.push(Request { id: r, pickup: id, delivery: id + 1, qty: rng.gen_range(5..=25) });
    }
    let mut transfers = Vec::new();
    for _ in 0..n_tr {
        let (x, y) = pt(&mut rng);
        let id = locations.len();
        locations.push(loc(id, LocationKind::Transfer, x, y, 0.0, 480.0, 0.0));
        transfers.push(id);
    }
    let vehicles = (0..n_veh)
        .map(|k| Vehicle { id: k, origin: k, destination: n_veh + k, capacity: 40 })
        .collect();
    Instance::new(meta(&format!("random-{seed}")), locations, requests, vehicles, transfers).unwrap()
}

/// Inserts requests in random order, each at a uniformly chosen feasible
/// placement (transfers included). Requests without one stay unserved.
pub fn random_solution(inst: &Instance, rng: &mut ChaCha8Rng) -> Solution {
    let mut sol = Solution::empty(inst);
    let mut order: Vec<usize> = (0..inst.requests.len()).collect();
    order.shuffle(rng);
    for r in order {
        let feasible: Vec<_> = enumerate_insertions(inst, &sol, r)
            .into_iter()
            .filter(|c| check_insertion_exact(inst, &sol, c))
            .collect();
        if let Some(c) = feasible.choose(rng) {
            apply_insertion(inst, &mut sol, c).unwrap();
        }
    }
    sol
}

/// Independent feasibility check: label-correcting fixed point over route
/// order and transfer coupling, then windows and capacity. Returns the
/// earliest start per stop or `None` if infeasible (including cycles).
pub fn fixed_point_schedule(inst: &Instance, routes: &[Route]) -> Option<Vec<Vec<f64>>> {
    let mut time: Vec<Vec<f64>> =
        routes.iter().map(|r| r.stops.iter().map(|s| inst.tw(s.loc).open).collect()).collect();
    let mut drop_at = std::collections::HashMap::new();
    for (k, r) in routes.iter().enumerate() {
        for (m, s) in r.stops.iter().enumerate() {
            if let Action::TransferDrop(q) = s.action {
                drop_at.insert((q, s.loc), (k, m));
            }
        }
    }
    let total: usize = routes.iter().map(|r| r.stops.len()).sum();
    for _round in 0..=total + 1 {
        let mut changed = false;
        for (k, r) in routes.iter().enumerate() {
            for m in 0..r.stops.len() {
                let s = &r.stops[m];
                let mut t = time[k][m];
                if m > 0 {
                    let prev = &r.stops[m - 1];
                    let g = if prev.loc == s.loc { 0.0 } else { inst.locations[prev.loc].service + inst.t(prev.loc, s.loc) };
                    t = t.max(time[k][m - 1] + g);
                }
                if let Action::TransferPick(q) = s.action {
                    let &(dk, dm) = drop_at.get(&(q, s.loc))?;
                    t = t.max(time[dk][dm]);
                }
                if t > time[k][m] {
                    time[k][m] = t;
                    changed = true;
                }
                if time[k][m] > inst.tw(s.loc).close + 1e-9 {
                    return None;
                }
            }
        }
        if !changed {
            let cap = inst.capacity() as i64;
            for r in routes {
                let mut load = 0i64;
                for s in &r.stops {
                    let q = s.action.request().map_or(0, |q| inst.requests[q].qty as i64);
                    load += match s.action {
                        Action::Pickup(_) | Action::TransferPick(_) => q,
                        Action::Deliver(_) | Action::TransferDrop(_) => -q,
                        _ => 0,
                    };
                    if load > cap {
                        return None;
                    }
                }
            }
            return Some(time);
        }
    }
    None
}

/// Oracle verdict for a candidate: apply structurally, then the fixed point.
pub fn oracle_feasible(inst: &Instance, sol: &Solution, cand: &pdpt_core::Candidate) -> bool {
    let after = apply_unchecked(inst, sol, cand).unwrap();
    fixed_point_schedule(inst, after.routes()).is_some()
}

/// Straight re-summation of arc distances.
pub fn resum(inst: &Instance, sol: &Solution) -> f64 {
    let mut total = 0.0;
    for r in sol.routes() {
        for m in 1..r.stops.len() {
            let (a, b) = (&inst.locations[r.stops[m - 1].loc], &inst.locations[r.stops[m].loc]);
            total += ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
        }
    }
    total
}
