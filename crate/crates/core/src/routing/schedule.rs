use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};
use std::fmt;

use crate::model::{Instance, LocId, ReqId, VehId};

use super::solution::{Action, Route, Solution};

/// Tolerance used for every time-window comparison.
pub const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StopRef {
    pub vehicle: VehId,
    pub index: usize,
}

impl fmt::Display for StopRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vehicle {} stop {}", self.vehicle, self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    /// Earliest possible service start at `stop` exceeds the window close.
    TimeWindow { stop: StopRef, loc: LocId, time: f64, close: f64 },
    /// Synchronization and route order form a cycle; listed in order.
    Cycle { stops: Vec<StopRef> },
    /// A transfer drop or pick has no partner stop.
    UnmatchedTransfer { stop: StopRef, request: ReqId },
}

impl fmt::Display for Infeasibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Infeasibility::TimeWindow { stop, loc, time, close } => {
                write!(f, "{stop} at location {loc} starts at {time:.3} after window close {close:.3}")
            }
            Infeasibility::Cycle { stops } => {
                let parts: Vec<String> = stops.iter().map(|s| s.to_string()).collect();
                write!(f, "transfer dependency cycle: {}", parts.join(" -> "))
            }
            Infeasibility::UnmatchedTransfer { stop, request } => {
                write!(f, "{stop}: transfer of request {request} has no partner stop")
            }
        }
    }
}

/// Earliest and latest service start of every stop, indexed `[vehicle][stop]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub earliest: Vec<Vec<f64>>,
    /// Latest start that keeps every downstream stop (own route and
    /// synchronized partners) within its window.
    pub latest: Vec<Vec<f64>>,
}

pub fn compute_schedule(inst: &Instance, sol: &Solution) -> Result<Schedule, Infeasibility> {
    schedule_routes(inst, sol.routes())
}

/// Stop graph: route order edges weighted by [`Instance::gap`] and a
/// zero-weight edge from each transfer drop to the matching pick.
pub(crate) struct StopGraph {
    pub offset: Vec<usize>,
    pub nodes: Vec<StopRef>,
    /// For each node, its synchronization successor (drop -> pick).
    pub sync_succ: Vec<Option<usize>>,
    /// For each node, its synchronization predecessor (pick <- drop).
    pub sync_pred: Vec<Option<usize>>,
}

impl StopGraph {
    pub fn build(routes: &[Route]) -> Result<StopGraph, Infeasibility> {
        let mut offset = Vec::with_capacity(routes.len() + 1);
        let mut nodes = Vec::new();
        for (k, r) in routes.iter().enumerate() {
            offset.push(nodes.len());
            nodes.extend((0..r.stops.len()).map(|m| StopRef { vehicle: k, index: m }));
        }
        offset.push(nodes.len());
        let n = nodes.len();
        let mut sync_succ = vec![None; n];
        let mut sync_pred = vec![None; n];
        let mut drops: HashMap<(ReqId, LocId), Vec<usize>> = HashMap::new();
        for (k, r) in routes.iter().enumerate() {
            for (m, s) in r.stops.iter().enumerate() {
                if let Action::TransferDrop(req) = s.action {
                    drops.entry((req, s.loc)).or_default().push(offset[k] + m);
                }
            }
        }
        for list in drops.values_mut() {
            list.reverse();
        }
        for (k, r) in routes.iter().enumerate() {
            for (m, s) in r.stops.iter().enumerate() {
                if let Action::TransferPick(req) = s.action {
                    let node = offset[k] + m;
                    match drops.get_mut(&(req, s.loc)).and_then(|l| l.pop()) {
                        Some(d) => {
                            sync_succ[d] = Some(node);
                            sync_pred[node] = Some(d);
                        }
                        None => {
                            return Err(Infeasibility::UnmatchedTransfer {
                                stop: StopRef { vehicle: k, index: m },
                                request: req,
                            })
                        }
                    }
                }
            }
        }
        let mut leftovers: Vec<(usize, ReqId)> = drops
            .iter()
            .flat_map(|(&(req, _), l)| l.iter().map(move |&d| (d, req)))
            .collect();
        leftovers.sort_unstable();
        if let Some(&(d, req)) = leftovers.first() {
            return Err(Infeasibility::UnmatchedTransfer { stop: nodes[d], request: req });
        }
        Ok(StopGraph { offset, nodes, sync_succ, sync_pred })
    }

    fn route_len(&self, k: usize) -> usize {
        self.offset[k + 1] - self.offset[k]
    }

    /// Deterministic topological order (smallest (vehicle, index) first among
    /// ready nodes), or the nodes left on a cycle.
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let n = self.nodes.len();
        let mut indeg = vec![0u32; n];
        for v in 0..n {
            if self.nodes[v].index > 0 {
                indeg[v] += 1;
            }
            if self.sync_pred[v].is_some() {
                indeg[v] += 1;
            }
        }
        let mut heap: BinaryHeap<Reverse<usize>> =
            (0..n).filter(|&v| indeg[v] == 0).map(Reverse).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = heap.pop() {
            order.push(v);
            let s = self.nodes[v];
            if s.index + 1 < self.route_len(s.vehicle) {
                let w = v + 1;
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    heap.push(Reverse(w));
                }
            }
            if let Some(w) = self.sync_succ[v] {
                indeg[w] -= 1;
                if indeg[w] == 0 {
                    heap.push(Reverse(w));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err((0..n).filter(|&v| indeg[v] > 0).collect())
        }
    }

    /// Extracts one cycle among the unprocessed nodes, in forward order.
    fn find_cycle(&self, remaining: &[usize]) -> Vec<StopRef> {
        let n = self.nodes.len();
        let mut alive = vec![false; n];
        for &v in remaining {
            alive[v] = true;
        }
        let pred_alive = |v: usize| -> usize {
            let s = self.nodes[v];
            if s.index > 0 && alive[v - 1] {
                v - 1
            } else {
                self.sync_pred[v].filter(|&p| alive[p]).expect("unprocessed node has an unprocessed predecessor")
            }
        };
        let mut seen = vec![usize::MAX; n];
        let mut walk = Vec::new();
        let mut v = remaining[0];
        while seen[v] == usize::MAX {
            seen[v] = walk.len();
            walk.push(v);
            v = pred_alive(v);
        }
        let mut cycle: Vec<usize> = walk[seen[v]..].to_vec();
        cycle.reverse();
        let start = cycle.iter().enumerate().min_by_key(|&(_, &v)| v).map_or(0, |(i, _)| i);
        cycle.rotate_left(start);
        cycle.into_iter().map(|v| self.nodes[v]).collect()
    }
}

pub(crate) fn schedule_routes(inst: &Instance, routes: &[Route]) -> Result<Schedule, Infeasibility> {
    let graph = StopGraph::build(routes)?;
    let order = match graph.topological_order() {
        Ok(o) => o,
        Err(remaining) => return Err(Infeasibility::Cycle { stops: graph.find_cycle(&remaining) }),
    };
    let loc_of = |v: usize| {
        let s = graph.nodes[v];
        routes[s.vehicle].stops[s.index].loc
    };
    let n = graph.nodes.len();
    let mut earliest = vec![0.0f64; n];
    for &v in &order {
        let s = graph.nodes[v];
        let loc = loc_of(v);
        let tw = inst.tw(loc);
        let mut e = tw.open;
        if s.index > 0 {
            e = e.max(earliest[v - 1] + inst.gap(loc_of(v - 1), loc));
        }
        if let Some(p) = graph.sync_pred[v] {
            e = e.max(earliest[p]);
        }
        if e > tw.close + TIME_EPS {
            return Err(Infeasibility::TimeWindow { stop: s, loc, time: e, close: tw.close });
        }
        earliest[v] = e;
    }
    let mut latest = vec![0.0f64; n];
    for &v in order.iter().rev() {
        let s = graph.nodes[v];
        let loc = loc_of(v);
        let mut l = inst.tw(loc).close;
        if s.index + 1 < graph.route_len(s.vehicle) {
            l = l.min(latest[v + 1] - inst.gap(loc, loc_of(v + 1)));
        }
        if let Some(w) = graph.sync_succ[v] {
            l = l.min(latest[w]);
        }
        latest[v] = l;
    }
    let split = |flat: Vec<f64>| -> Vec<Vec<f64>> {
        (0..routes.len()).map(|k| flat[graph.offset[k]..graph.offset[k + 1]].to_vec()).collect()
    };
    Ok(Schedule { earliest: split(earliest), latest: split(latest) })
}
