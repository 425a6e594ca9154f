//! Per-stop data that makes a two-stop insertion check constant time.
//!
//! For every stop the cache keeps the earliest start `E`, the latest start
//! `L` (which already accounts for synchronized partners downstream), the
//! load after the stop, and the waiting time accumulated along the route.
//! Pushing a stop later by `d` pushes the next stop later by
//! `max(0, d - wait)`, so the delay left at stop `m` after an insertion in
//! front of `s` is `max(0, d - (W[m] - W[s]))` where `W` is the waiting
//! prefix. The delay is acceptable at `m` iff it does not exceed
//! `slack(m) = min(close(m), L(partner pick)) - E(m)`, which turns the check
//! over a whole segment into one range-minimum query of `slack + W`.
//!
//! This reasoning holds when no synchronization path leaves a route and comes
//! back into it. Routes where that happens, and transfer insertions between
//! two routes that already depend on each other, are reported as not
//! eligible and checked by full recomputation instead.

use crate::model::{Instance, LocId};

use super::schedule::{Schedule, StopGraph, TIME_EPS};
use super::solution::Route;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeasibilityCache {
    valid: bool,
    routes: Vec<RouteCache>,
    /// `reach[a][b]`: a stop of route `a` reaches a stop of route `b`
    /// through at least one synchronization edge.
    reach: Vec<Vec<bool>>,
    reentrant: Vec<bool>,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct RouteCache {
    earliest: Vec<f64>,
    latest: Vec<f64>,
    load: Vec<u32>,
    /// Earliest start of the partner drop for transfer picks, else -inf.
    sync_lb: Vec<f64>,
    wait_prefix: Vec<f64>,
    slack_wait: SparseTable<f64>,
    load_max: SparseTable<u32>,
    /// `(location, first stop, last stop)` of each transfer visit.
    visits: Vec<(LocId, usize, usize)>,
}

/// Outcome of a constant-time walk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Walk {
    /// Feasible; carries the service start of the second inserted stop.
    Feasible(f64),
    Infeasible,
    /// The shortcut does not apply (an insertion that makes a later stop
    /// earlier, possible only without the triangle inequality).
    Unknown,
}

impl FeasibilityCache {
    pub(crate) fn build(inst: &Instance, routes: &[Route], schedule: &Schedule) -> FeasibilityCache {
        let graph = StopGraph::build(routes).expect("schedule exists, so transfers are matched");
        let n_routes = routes.len();
        let at = |v: usize| {
            let s = graph.nodes[v];
            (s.vehicle, s.index)
        };
        let mut caches = Vec::with_capacity(n_routes);
        for (k, route) in routes.iter().enumerate() {
            let e = &schedule.earliest[k];
            let l = &schedule.latest[k];
            let n = route.stops.len();
            let mut sync_lb = vec![f64::NEG_INFINITY; n];
            let mut slack = vec![0.0; n];
            let mut wait_prefix = vec![0.0; n];
            for m in 0..n {
                let v = graph.offset[k] + m;
                if let Some(p) = graph.sync_pred[v] {
                    let (pk, pm) = at(p);
                    sync_lb[m] = schedule.earliest[pk][pm];
                }
                let mut bound = inst.tw(route.stops[m].loc).close;
                if let Some(w) = graph.sync_succ[v] {
                    let (wk, wm) = at(w);
                    bound = bound.min(schedule.latest[wk][wm]);
                }
                slack[m] = bound - e[m];
                if m > 0 {
                    let arrive = e[m - 1] + inst.gap(route.stops[m - 1].loc, route.stops[m].loc);
                    wait_prefix[m] = wait_prefix[m - 1] + (e[m] - arrive).max(0.0);
                }
            }
            let slack_wait: Vec<f64> = slack.iter().zip(&wait_prefix).map(|(s, w)| s + w).collect();
            let load: Vec<u32> = route.stops.iter().map(|s| s.load_after).collect();
            let mut visits: Vec<(LocId, usize, usize)> = Vec::new();
            for (m, s) in route.stops.iter().enumerate() {
                if !inst.is_transfer(s.loc) {
                    continue;
                }
                match visits.last_mut() {
                    Some(v) if v.0 == s.loc && v.2 + 1 == m => v.2 = m,
                    _ => visits.push((s.loc, m, m)),
                }
            }
            caches.push(RouteCache {
                earliest: e.clone(),
                latest: l.clone(),
                slack_wait: SparseTable::new(&slack_wait, f64::min),
                load_max: SparseTable::new(&load, std::cmp::max),
                load,
                sync_lb,
                wait_prefix,
                visits,
            });
        }

        let mut reach = vec![vec![false; n_routes]; n_routes];
        let mut reentrant = vec![false; n_routes];
        let total = graph.nodes.len();
        let mut mark = vec![usize::MAX; total];
        for a in 0..n_routes {
            let mut stack: Vec<usize> = (graph.offset[a]..graph.offset[a + 1])
                .filter_map(|v| graph.sync_succ[v])
                .collect();
            for &v in &stack {
                mark[v] = a;
            }
            while let Some(v) = stack.pop() {
                let (k, m) = at(v);
                reach[a][k] = true;
                if k == a {
                    reentrant[a] = true;
                }
                let mut push = |w: usize| {
                    if mark[w] != a {
                        mark[w] = a;
                        stack.push(w);
                    }
                };
                if m + 1 < routes[k].stops.len() {
                    push(v + 1);
                }
                if let Some(w) = graph.sync_succ[v] {
                    push(w);
                }
            }
        }
        FeasibilityCache { valid: true, routes: caches, reach, reentrant }
    }

    pub fn is_valid(&self) -> bool {
        self.valid
    }

    pub fn earliest(&self, vehicle: usize, stop: usize) -> f64 {
        self.routes[vehicle].earliest[stop]
    }

    pub fn latest(&self, vehicle: usize, stop: usize) -> f64 {
        self.routes[vehicle].latest[stop]
    }

    pub fn load_after(&self, vehicle: usize, stop: usize) -> u32 {
        self.routes[vehicle].load[stop]
    }

    pub fn route_len(&self, vehicle: usize) -> usize {
        self.routes[vehicle].earliest.len()
    }

    /// True when a synchronization path leaves the route and returns to it.
    pub fn is_reentrant(&self, vehicle: usize) -> bool {
        self.reentrant[vehicle]
    }

    /// True when some stop of route `a` can delay some stop of route `b`
    /// through synchronization.
    pub fn reaches(&self, a: usize, b: usize) -> bool {
        self.reach[a][b]
    }

    /// First and last stop of the route's visit to a transfer location.
    pub(crate) fn transfer_visit(&self, k: usize, loc: LocId) -> Option<(usize, usize)> {
        self.routes[k].visits.iter().find(|v| v.0 == loc).map(|v| (v.1, v.2))
    }

    pub(crate) fn direct_eligible(&self, k: usize) -> bool {
        self.valid && !self.reentrant[k]
    }

    pub(crate) fn pair_eligible(&self, k1: usize, k2: usize) -> bool {
        self.valid
            && k1 != k2
            && !self.reentrant[k1]
            && !self.reentrant[k2]
            && !self.reach[k1][k2]
            && !self.reach[k2][k1]
    }

    /// Checks inserting `first` right after stop `i` and `second` right
    /// after stop `j` (`j >= i`; when equal, `second` directly follows
    /// `first`) of route `k`, with `qty` on board in between. `first_lb` is
    /// an extra lower bound on the service start of `first`.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn walk(
        &self,
        inst: &Instance,
        route: &Route,
        k: usize,
        first: LocId,
        first_lb: f64,
        i: usize,
        second: LocId,
        j: usize,
        qty: u32,
    ) -> Walk {
        let rc = &self.routes[k];
        debug_assert_eq!(rc.earliest.len(), route.stops.len(), "stale feasibility cache");
        let stops = &route.stops;
        if rc.load_max.query(i, j) as u64 + qty as u64 > inst.capacity() as u64 {
            return Walk::Infeasible;
        }
        let tw1 = inst.tw(first);
        let a1 = tw1.open.max(rc.earliest[i] + inst.gap(stops[i].loc, first)).max(first_lb);
        if a1 > tw1.close + TIME_EPS {
            return Walk::Infeasible;
        }
        let tw2 = inst.tw(second);
        let before_second = if j == i {
            a1 + inst.gap(first, second)
        } else {
            let s = i + 1;
            let e = inst
                .tw(stops[s].loc)
                .open
                .max(rc.sync_lb[s])
                .max(a1 + inst.gap(first, stops[s].loc));
            let delay = e - rc.earliest[s];
            if delay < -TIME_EPS {
                return Walk::Unknown;
            }
            let delay = delay.max(0.0);
            let budget = rc.slack_wait.query(s, j) - rc.wait_prefix[s];
            if delay > budget + TIME_EPS {
                return Walk::Infeasible;
            }
            let left = (delay - (rc.wait_prefix[j] - rc.wait_prefix[s])).max(0.0);
            rc.earliest[j] + left + inst.gap(stops[j].loc, second)
        };
        let a2 = tw2.open.max(before_second);
        if a2 > tw2.close + TIME_EPS {
            return Walk::Infeasible;
        }
        let nx = j + 1;
        let e = inst
            .tw(stops[nx].loc)
            .open
            .max(rc.sync_lb[nx])
            .max(a2 + inst.gap(second, stops[nx].loc));
        if e > rc.latest[nx] + TIME_EPS {
            return Walk::Infeasible;
        }
        Walk::Feasible(a2)
    }
}

/// Idempotent range query table (min or max) with O(1) lookups.
#[derive(Debug, Clone)]
struct SparseTable<T> {
    levels: Vec<Vec<T>>,
    pick: fn(T, T) -> T,
}

impl<T: PartialEq> PartialEq for SparseTable<T> {
    fn eq(&self, other: &Self) -> bool {
        self.levels == other.levels
    }
}

impl<T: Copy> SparseTable<T> {
    fn new(values: &[T], pick: fn(T, T) -> T) -> Self {
        let mut levels = vec![values.to_vec()];
        let mut width = 1;
        while width * 2 <= values.len() {
            let prev = levels.last().expect("at least one level");
            let next: Vec<T> = (0..=values.len() - width * 2)
                .map(|i| pick(prev[i], prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        SparseTable { levels, pick }
    }

    /// Inclusive range `[lo, hi]`.
    fn query(&self, lo: usize, hi: usize) -> T {
        let len = hi - lo + 1;
        let level = (usize::BITS - 1 - len.leading_zeros()) as usize;
        let row = &self.levels[level];
        (self.pick)(row[lo], row[hi + 1 - (1 << level)])
    }
}

impl<T> Default for SparseTable<T> {
    fn default() -> Self {
        fn first<T>(a: T, _: T) -> T {
            a
        }
        SparseTable { levels: Vec::new(), pick: first::<T> }
    }
}
