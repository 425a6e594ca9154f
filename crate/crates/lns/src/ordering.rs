//! Repair orderings: hardest requests first.

use std::cmp::Ordering;

use pdpt_core::{Instance, ReqId};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::features::ShawWeights;

fn min_max_scale(values: &[f64]) -> Vec<f64> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    values
        .iter()
        .map(|&v| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
        .collect()
}

/// Scaled demand, direct travel time and service times, minus scaled
/// window widths, each scaled over the instance's requests. Ranges from
/// -2 to 4.
pub fn insertion_difficulty(inst: &Instance) -> Vec<f64> {
    let reqs = &inst.requests;
    let column = |f: &dyn Fn(usize) -> f64| min_max_scale(&(0..reqs.len()).map(f).collect::<Vec<_>>());
    let width = |j| inst.tw(j).close - inst.tw(j).open;
    let qty = column(&|r| reqs[r].qty as f64);
    let travel = column(&|r| inst.t(reqs[r].pickup, reqs[r].delivery));
    let sp = column(&|r| inst.locations[reqs[r].pickup].service);
    let sd = column(&|r| inst.locations[reqs[r].delivery].service);
    let wp = column(&|r| width(reqs[r].pickup));
    let wd = column(&|r| width(reqs[r].delivery));
    (0..reqs.len()).map(|r| qty[r] + travel[r] + sp[r] + sd[r] - wp[r] - wd[r]).collect()
}

/// Weighted demand plus direct travel time, minus window widths.
pub fn insertion_ease(inst: &Instance, r: ReqId, w: ShawWeights) -> f64 {
    let req = &inst.requests[r];
    let width = |j| inst.tw(j).close - inst.tw(j).open;
    w.demand * req.qty as f64 + w.travel * inst.t(req.pickup, req.delivery)
        - w.time * (width(req.pickup) + width(req.delivery))
}

/// How the repair step orders the requests it reinserts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InsertionOrder {
    Difficulty,
    Ease,
    Random,
}

/// Sorts by decreasing score; ties keep request order.
pub fn by_decreasing(requests: &mut [ReqId], score: &[f64]) {
    requests.sort_by(|&a, &b| score[b].partial_cmp(&score[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
}

/// Precomputed scores for each ordering.
#[derive(Debug, Clone)]
pub struct Orderings {
    pub difficulty: Vec<f64>,
    pub ease: Vec<f64>,
}

impl Orderings {
    pub fn new(inst: &Instance, w: ShawWeights) -> Orderings {
        Orderings {
            difficulty: insertion_difficulty(inst),
            ease: (0..inst.requests.len()).map(|r| insertion_ease(inst, r, w)).collect(),
        }
    }

    pub fn order(&self, kind: InsertionOrder, requests: &mut [ReqId], rng: &mut impl Rng) {
        match kind {
            InsertionOrder::Difficulty => by_decreasing(requests, &self.difficulty),
            InsertionOrder::Ease => by_decreasing(requests, &self.ease),
            InsertionOrder::Random => requests.shuffle(rng),
        }
    }
}
