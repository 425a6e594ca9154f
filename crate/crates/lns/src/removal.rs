//! Destroy operators. Each returns the removed requests; the caller takes
//! them out of the solution.

use pdpt_core::{Instance, ReqId, Solution};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::features::Dissimilarity;

/// Seeded at a uniformly drawn served request; each further pick is the
/// served request least dissimilar to a uniformly drawn member of the
/// removed set.
pub fn related_removal(sol: &Solution, n: usize, diss: &Dissimilarity, rng: &mut impl Rng) -> Vec<ReqId> {
    let mut pool = sol.served();
    let n = n.min(pool.len());
    let mut removed = Vec::with_capacity(n);
    if n == 0 {
        return removed;
    }
    let first = rng.gen_range(0..pool.len());
    removed.push(pool.swap_remove(first));
    while removed.len() < n {
        let anchor = removed[rng.gen_range(0..removed.len())];
        let (at, _) = pool
            .iter()
            .enumerate()
            .min_by(|a, b| diss.get(anchor, *a.1).total_cmp(&diss.get(anchor, *b.1)).then(a.1.cmp(b.1)))
            .expect("pool holds at least one request");
        removed.push(pool.swap_remove(at));
    }
    removed
}

pub fn random_removal(sol: &Solution, n: usize, rng: &mut impl Rng) -> Vec<ReqId> {
    let pool = sol.served();
    pool.choose_multiple(rng, n.min(pool.len())).copied().collect()
}

/// Cost saved by taking `r` out of `sol`.
pub fn removal_gain(inst: &Instance, sol: &Solution, r: ReqId) -> f64 {
    let mut without = sol.clone();
    without.remove_requests(inst, &[r]).expect("served request");
    sol.objective() - without.objective()
}

/// Repeatedly removes the request with the largest gain times a uniform
/// factor from `[1 - noise, 1]`, recomputing gains after each removal.
pub fn worst_removal(inst: &Instance, sol: &Solution, n: usize, noise: f64, rng: &mut impl Rng) -> Vec<ReqId> {
    let mut current = sol.clone();
    let mut removed = Vec::new();
    while removed.len() < n {
        let served = current.served();
        if served.is_empty() {
            break;
        }
        let mut best: Option<(ReqId, f64)> = None;
        for r in served {
            let factor = if noise > 0.0 { rng.gen_range(1.0 - noise..=1.0) } else { 1.0 };
            let score = removal_gain(inst, &current, r) * factor;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((r, score));
            }
        }
        let (r, _) = best.expect("some request is served");
        current.remove_requests(inst, &[r]).expect("served request");
        removed.push(r);
    }
    removed
}
