//! Master problem: one parallel path per request from its pickup to its
//! delivery, with trip variables shared across requests. Vehicles and
//! transfer synchronization are left to the subproblem.

use pdpt_core::{Instance, LocId, Role};
use pdpt_milp::{MilpModel, Row, Sense, VarId};

/// The master MILP with handles on its variables.
#[derive(Debug, Clone)]
pub struct MasterModel {
    pub model: MilpModel,
    /// Objective lower bound variable.
    pub z: VarId,
    /// Trip selection, `trip[i][j]`.
    pub trip: Vec<Vec<VarId>>,
    /// Request `r` loaded on trip (i, j), `load[r][i][j]`; none on the diagonal.
    pub load: Vec<Vec<Vec<Option<VarId>>>>,
    /// Arrival at every location that is not a transfer point.
    pub arrival: Vec<Option<VarId>>,
    /// Arrival of request `r` at transfer point `j`, `transfer_arrival[r][j]`.
    pub transfer_arrival: Vec<Vec<Option<VarId>>>,
}

impl MasterModel {
    pub fn n_locations(&self) -> usize {
        self.trip.len()
    }
}

fn is_depot(role: Role) -> bool {
    matches!(role, Role::Origin(_) | Role::Destination(_))
}

fn is_demand(role: Role) -> bool {
    matches!(role, Role::Pickup(_) | Role::Delivery(_))
}

pub fn build_master(inst: &Instance) -> MasterModel {
    let n = inst.n_locations();
    let n_req = inst.requests.len();
    let fleet = inst.vehicles.len() as f64;
    let cap = inst.capacity() as f64;
    let role: Vec<Role> = (0..n).map(|j| inst.role(j)).collect();
    let transfer: Vec<bool> = (0..n).map(|j| inst.is_transfer(j)).collect();
    let mut m = MilpModel::new(format!("master_{}", inst.meta.name.replace(|c: char| !c.is_ascii_alphanumeric(), "_")));

    let z = m.add_continuous("z", 0.0, f64::INFINITY);
    let trip: Vec<Vec<VarId>> =
        (0..n).map(|i| (0..n).map(|j| m.add_binary(format!("x_{i}_{j}"))).collect()).collect();
    let load: Vec<Vec<Vec<Option<VarId>>>> = (0..n_req)
        .map(|r| {
            (0..n)
                .map(|i| (0..n).map(|j| (i != j).then(|| m.add_binary(format!("y_{r}_{i}_{j}")))).collect())
                .collect()
        })
        .collect();
    let arrival: Vec<Option<VarId>> = (0..n)
        .map(|j| {
            let tw = inst.tw(j);
            (!transfer[j]).then(|| m.add_continuous(format!("a_{j}"), tw.open, tw.close))
        })
        .collect();
    let transfer_arrival: Vec<Vec<Option<VarId>>> = (0..n_req)
        .map(|r| {
            (0..n)
                .map(|j| {
                    let tw = inst.tw(j);
                    transfer[j].then(|| m.add_continuous(format!("b_{r}_{j}"), tw.open, tw.close))
                })
                .collect()
        })
        .collect();
    m.set_objective(vec![(z, 1.0)]);

    let y = |r: usize, i: usize, j: usize| load[r][i][j];
    let into = |r: usize, j: usize| -> Vec<(VarId, f64)> { (0..n).filter_map(|i| y(r, i, j)).map(|v| (v, 1.0)).collect() };
    let out_of = |r: usize, i: usize| -> Vec<(VarId, f64)> { (0..n).filter_map(|j| y(r, i, j)).map(|v| (v, 1.0)).collect() };

    // total distance
    let mut cost = vec![(z, 1.0)];
    for i in 0..n {
        for j in 0..n {
            cost.push((trip[i][j], -inst.c(i, j)));
        }
    }
    m.add_row(Row::new("cost", cost, Sense::Ge, 0.0));

    // request paths
    for (r, req) in inst.requests.iter().enumerate() {
        m.add_row(Row::new(format!("leave_{r}"), out_of(r, req.pickup), Sense::Eq, 1.0));
        m.add_row(Row::new(format!("reach_{r}"), into(r, req.delivery), Sense::Eq, 1.0));
        for j in (0..n).filter(|&j| j != req.pickup && j != req.delivery) {
            m.add_row(Row::new(format!("once_{r}_{j}"), into(r, j), Sense::Le, 1.0));
            let mut terms = into(r, j);
            terms.extend(out_of(r, j).into_iter().map(|(v, _)| (v, -1.0)));
            m.add_row(Row::new(format!("pass_{r}_{j}"), terms, Sense::Eq, 0.0));
        }
    }

    // trips
    for j in 0..n {
        if is_demand(role[j]) {
            m.add_row(Row::new(format!("visit_{j}"), (0..n).map(|i| (trip[i][j], 1.0)).collect(), Sense::Eq, 1.0));
        }
    }
    for j in (0..n).filter(|&j| !is_depot(role[j])) {
        let mut terms: Vec<(VarId, f64)> = (0..n).map(|i| (trip[i][j], 1.0)).collect();
        terms.extend((0..n).map(|i| (trip[j][i], -1.0)));
        m.add_row(Row::new(format!("flow_{j}"), terms, Sense::Eq, 0.0));
    }
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            let mut terms: Vec<(VarId, f64)> =
                inst.requests.iter().enumerate().filter_map(|(r, q)| y(r, i, j).map(|v| (v, q.qty as f64))).collect();
            terms.push((trip[i][j], -cap));
            m.add_row(Row::new(format!("cap_{i}_{j}"), terms, Sense::Le, 0.0));
        }
    }

    // variable eliminations
    let fix = |m: &mut MilpModel, name: String, v: VarId| m.add_row(Row::new(name, vec![(v, 1.0)], Sense::Eq, 0.0));
    for j in 0..n {
        fix(&mut m, format!("noloop_{j}"), trip[j][j]);
    }
    for (r, req) in inst.requests.iter().enumerate() {
        fix(&mut m, format!("noback_{r}"), trip[req.delivery][req.pickup]);
    }
    for (k, veh) in inst.vehicles.iter().enumerate() {
        for (r, req) in inst.requests.iter().enumerate() {
            fix(&mut m, format!("firstdrop_{k}_{r}"), trip[veh.origin][req.delivery]);
            fix(&mut m, format!("lastpick_{k}_{r}"), trip[req.pickup][veh.destination]);
        }
        for (l, other) in inst.vehicles.iter().enumerate() {
            if l != k {
                fix(&mut m, format!("foreign_{k}_{l}"), trip[veh.origin][other.destination]);
            }
        }
        for j in 0..n {
            fix(&mut m, format!("intoorig_{j}_{k}"), trip[j][veh.origin]);
            fix(&mut m, format!("outofdest_{k}_{j}"), trip[veh.destination][j]);
        }
    }
    for r in 0..n_req {
        for j in (0..n).filter(|&j| is_depot(role[j])) {
            m.add_row(Row::new(format!("nodepot_{r}_{j}"), into(r, j), Sense::Eq, 0.0));
        }
        let req = &inst.requests[r];
        m.add_row(Row::new(format!("afterdrop_{r}"), out_of(r, req.delivery), Sense::Eq, 0.0));
        m.add_row(Row::new(format!("beforepick_{r}"), into(r, req.pickup), Sense::Eq, 0.0));
    }
    for (k, veh) in inst.vehicles.iter().enumerate() {
        m.add_row(Row::new(format!("depart_{k}"), (0..n).map(|j| (trip[veh.origin][j], 1.0)).collect(), Sense::Eq, 1.0));
        m.add_row(Row::new(format!("return_{k}"), (0..n).map(|j| (trip[j][veh.destination], 1.0)).collect(), Sense::Eq, 1.0));
    }
    for &t in &inst.transfers {
        m.add_row(Row::new(format!("tvisits_{t}"), (0..n).map(|i| (trip[i][t], 1.0)).collect(), Sense::Le, fleet));
    }

    // time windows; big-M is the travel gap plus the window close of the tail
    let big = |i: LocId, j: LocId| inst.gap(i, j) + inst.tw(i).close;
    for i in (0..n).filter(|&i| !transfer[i]) {
        for j in (0..n).filter(|&j| j != i && !transfer[j]) {
            let (ai, aj) = (arrival[i].unwrap(), arrival[j].unwrap());
            m.add_row(Row::new(
                format!("time_{i}_{j}"),
                vec![(ai, 1.0), (aj, -1.0), (trip[i][j], big(i, j))],
                Sense::Le,
                big(i, j) - inst.gap(i, j),
            ));
        }
    }
    for r in 0..n_req {
        for i in 0..n {
            for j in (0..n).filter(|&j| j != i && (transfer[i] || transfer[j])) {
                let from = if transfer[i] { transfer_arrival[r][i] } else { arrival[i] }.unwrap();
                let to = if transfer[j] { transfer_arrival[r][j] } else { arrival[j] }.unwrap();
                m.add_row(Row::new(
                    format!("rtime_{r}_{i}_{j}"),
                    vec![(from, 1.0), (to, -1.0), (y(r, i, j).unwrap(), big(i, j))],
                    Sense::Le,
                    big(i, j) - inst.gap(i, j),
                ));
            }
        }
    }

    MasterModel { model: m, z, trip, load, arrival, transfer_arrival }
}
