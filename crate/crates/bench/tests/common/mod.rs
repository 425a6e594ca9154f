#![allow(dead_code)]

use std::collections::HashMap;

use pdpt_core::model::EARTH_RADIUS_KM;
use pdpt_core::routing::apply_unchecked;
use pdpt_core::{Action, Candidate, Instance, Route, Solution};

/// Great-circle kilometers through the atan2 form.
pub fn great_circle_km(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (p1, p2) = (a.0.to_radians(), b.0.to_radians());
    let h = ((p2 - p1) / 2.0).sin().powi(2) + p1.cos() * p2.cos() * ((b.1 - a.1).to_radians() / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().atan2((1.0 - h).sqrt())
}

/// Simulates origin, pickup, delivery, destination for each vehicle from the
/// raw coordinates; true when one of them fits every window.
pub fn direct_route_oracle(inst: &Instance, r: usize) -> bool {
    let loc = |j: usize| &inst.locations[j];
    let minutes = |i: usize, j: usize| great_circle_km((loc(i).x, loc(i).y), (loc(j).x, loc(j).y)) * 60.0 / inst.meta.speed_kmh;
    let req = &inst.requests[r];
    inst.vehicles.iter().any(|v| {
        let mut t = loc(v.origin).tw.open;
        for (from, to) in [(v.origin, req.pickup), (req.pickup, req.delivery), (req.delivery, v.destination)] {
            t = (t + loc(from).service + minutes(from, to)).max(loc(to).tw.open);
            if t > loc(to).tw.close + 1e-9 {
                return false;
            }
        }
        true
    })
}

/// The instance without its last vehicle and that vehicle's depots.
pub fn without_last_vehicle(inst: &Instance) -> Instance {
    let gone = inst.vehicles.last().unwrap();
    let dropped = [gone.origin, gone.destination];
    let mut remap = HashMap::new();
    let mut locations = Vec::new();
    for loc in &inst.locations {
        if !dropped.contains(&loc.id) {
            remap.insert(loc.id, locations.len());
            locations.push(pdpt_core::Location { id: locations.len(), ..loc.clone() });
        }
    }
    let requests = inst
        .requests
        .iter()
        .map(|q| pdpt_core::Request { pickup: remap[&q.pickup], delivery: remap[&q.delivery], ..q.clone() })
        .collect();
    let vehicles = inst.vehicles[..inst.vehicles.len() - 1]
        .iter()
        .map(|v| pdpt_core::Vehicle { origin: remap[&v.origin], destination: remap[&v.destination], ..v.clone() })
        .collect();
    let transfers = inst.transfers.iter().map(|t| remap[t]).collect();
    Instance::new(inst.meta.clone(), locations, requests, vehicles, transfers).unwrap()
}

/// Label-correcting fixed point over route order and transfer coupling,
/// then windows and capacity. Earliest start per stop, or `None` when
/// infeasible (cycles included).
pub fn fixed_point_schedule(inst: &Instance, routes: &[Route]) -> Option<Vec<Vec<f64>>> {
    let mut time: Vec<Vec<f64>> = routes.iter().map(|r| r.stops.iter().map(|s| inst.tw(s.loc).open).collect()).collect();
    let mut drop_at = HashMap::new();
    for (k, r) in routes.iter().enumerate() {
        for (m, s) in r.stops.iter().enumerate() {
            if let Action::TransferDrop(q) = s.action {
                drop_at.insert((q, s.loc), (k, m));
            }
        }
    }
    let total: usize = routes.iter().map(|r| r.stops.len()).sum();
    for _ in 0..=total + 1 {
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
                    load += s.action.load_sign() * q;
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

pub fn oracle_feasible(inst: &Instance, sol: &Solution, cand: &Candidate) -> bool {
    let after = apply_unchecked(inst, sol, cand).unwrap();
    fixed_point_schedule(inst, after.routes()).is_some()
}
