use pdpt_core::model::haversine_km;
use pdpt_core::{
    ranked_insertions, apply_insertion, validate_instance, Instance, Location, LocationKind, Meta, Metric, Request,
    Solution, TimeWindow, Vehicle,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coords::CoordinatePool;
use crate::kmeans::{kmeans_transfers, TooFewPoints};
use crate::params::{GeneratorParams, TwClass};

/// Whole-instance attempts before giving up on a seed.
pub const MAX_ATTEMPTS: usize = 50;
/// Rejected proposals allowed per accepted request.
pub const MAX_REJECTIONS: usize = 10_000;

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator parameters: {0}")]
    Params(String),
    #[error("coordinate pool is empty")]
    EmptyPool,
    #[error("no acceptable request after {0} proposals")]
    Rejections(usize),
    #[error("no feasible fleet after {0} attempts")]
    Fleet(usize),
    #[error(transparent)]
    Kmeans(#[from] TooFewPoints),
    #[error("generated instance is invalid: {0}")]
    Invalid(String),
}

/// A drawn location before ids are assigned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Site {
    pub lat: f64,
    pub lon: f64,
    pub tw: TimeWindow,
    pub service: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DraftRequest {
    pub pickup: Site,
    pub delivery: Site,
    pub qty: u32,
}

/// Depot pairs drafted up front and the accepted requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Draft {
    /// (origin, destination) coordinates.
    pub depots: Vec<((f64, f64), (f64, f64))>,
    pub requests: Vec<DraftRequest>,
}

fn minutes(params: &GeneratorParams, a: (f64, f64), b: (f64, f64)) -> f64 {
    haversine_km(a.0, a.1, b.0, b.1) * 60.0 / params.speed_kmh
}

/// Origin, pickup, delivery, destination with waiting allowed: true when
/// every window holds and the vehicle is back by the end of the day.
pub fn direct_route_feasible(
    params: &GeneratorParams,
    depot: ((f64, f64), (f64, f64)),
    pickup: &Site,
    delivery: &Site,
) -> bool {
    let (p, d) = ((pickup.lat, pickup.lon), (delivery.lat, delivery.lon));
    let at_pickup = minutes(params, depot.0, p).max(pickup.tw.open);
    if at_pickup > pickup.tw.close {
        return false;
    }
    let at_delivery = (at_pickup + pickup.service + minutes(params, p, d)).max(delivery.tw.open);
    if at_delivery > delivery.tw.close {
        return false;
    }
    at_delivery + delivery.service + minutes(params, d, depot.1) <= params.horizon
}

fn draw_site(params: &GeneratorParams, pool: &CoordinatePool, rng: &mut impl Rng) -> Site {
    let (lat, lon) = pool.draw(rng);
    let slots = (params.tw_last_start / params.tw_step).floor() as u32;
    let open = rng.gen_range(0..=slots) as f64 * params.tw_step;
    let width = params.tw.widths()[rng.gen_range(0..2)];
    let service = rng.gen_range(params.service.0..=params.service.1) as f64;
    Site { lat, lon, tw: TimeWindow::new(open, (open + width).min(params.horizon)), service }
}

/// One proposal: pickup and delivery sites, accepted when some drafted
/// depot pair can serve it directly. The demand is drawn only on acceptance.
pub fn sample_request(
    params: &GeneratorParams,
    pool: &CoordinatePool,
    depots: &[((f64, f64), (f64, f64))],
    rng: &mut impl Rng,
) -> Option<DraftRequest> {
    let pickup = draw_site(params, pool, rng);
    let delivery = draw_site(params, pool, rng);
    if !depots.iter().any(|&dp| direct_route_feasible(params, dp, &pickup, &delivery)) {
        return None;
    }
    let qty = rng.gen_range(params.demand.0..=params.demand.1);
    Some(DraftRequest { pickup, delivery, qty })
}

/// Origins, destinations, then pickup and delivery per request, then
/// transfer points. Depots and transfer points are open all day with no
/// service time.
pub fn assemble(
    params: &GeneratorParams,
    draft: &Draft,
    fleet: usize,
    transfers: &[(f64, f64)],
    name: String,
    seed: Option<u64>,
) -> Instance {
    let all_day = TimeWindow::new(0.0, params.horizon);
    let mut locations = Vec::new();
    let mut push = |kind, (lat, lon): (f64, f64), tw, service| {
        let id = locations.len();
        locations.push(Location { id, kind, x: lat, y: lon, tw, service });
        id
    };
    let origins: Vec<usize> =
        draft.depots[..fleet].iter().map(|d| push(LocationKind::DepotOrigin, d.0, all_day, 0.0)).collect();
    let destinations: Vec<usize> =
        draft.depots[..fleet].iter().map(|d| push(LocationKind::DepotDestination, d.1, all_day, 0.0)).collect();
    let mut requests = Vec::new();
    for (r, q) in draft.requests.iter().enumerate() {
        let p = push(LocationKind::Pickup, (q.pickup.lat, q.pickup.lon), q.pickup.tw, q.pickup.service);
        let d = push(LocationKind::Delivery, (q.delivery.lat, q.delivery.lon), q.delivery.tw, q.delivery.service);
        requests.push(Request { id: r, pickup: p, delivery: d, qty: q.qty });
    }
    let transfer_ids: Vec<usize> = transfers.iter().map(|&t| push(LocationKind::Transfer, t, all_day, 0.0)).collect();
    let vehicles = (0..fleet)
        .map(|k| Vehicle { id: k, origin: origins[k], destination: destinations[k], capacity: params.capacity })
        .collect();
    let meta = Meta {
        name,
        metric: Metric::Haversine,
        speed_kmh: params.speed_kmh,
        horizon: params.horizon,
        seed,
    };
    Instance::assemble(meta, locations, requests, vehicles, transfer_ids, None).expect("coordinates are in range")
}

/// Global cheapest insertion without transfers: repeatedly inserts the
/// unserved request whose best position is cheapest (ties to the lower id).
/// `None` when some request cannot be placed.
pub fn cheapest_insertion(inst: &Instance) -> Option<Solution> {
    let mut sol = Solution::empty(inst);
    let mut unserved: Vec<usize> = (0..inst.requests.len()).collect();
    while !unserved.is_empty() {
        let mut best = None;
        for (at, &r) in unserved.iter().enumerate() {
            let cand = ranked_insertions(inst, &sol, r, false).next()?;
            if best.as_ref().is_none_or(|(_, b): &(usize, pdpt_core::Candidate)| cand.delta < b.delta) {
                best = Some((at, cand));
            }
        }
        let (at, cand) = best.expect("unserved is non-empty");
        apply_insertion(inst, &mut sol, &cand).expect("ranked candidates are feasible");
        unserved.remove(at);
    }
    Some(sol)
}

fn fleet_feasible(params: &GeneratorParams, draft: &Draft, k: usize) -> bool {
    cheapest_insertion(&assemble(params, draft, k, &[], String::new(), None)).is_some()
}

/// Smallest number of drafted vehicles for which [`cheapest_insertion`]
/// serves every request; `None` when even all drafted vehicles fail. The
/// result is checked against `k - 1`; if that is feasible too, feasibility
/// was not monotone and a linear scan from 1 decides.
pub fn fleet_size_binary_search(params: &GeneratorParams, draft: &Draft) -> Option<usize> {
    let max = draft.depots.len();
    if max == 0 || !fleet_feasible(params, draft, max) {
        return None;
    }
    let (mut lo, mut hi) = (1, max);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if fleet_feasible(params, draft, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    if lo > 1 && fleet_feasible(params, draft, lo - 1) {
        return (1..lo).find(|&k| fleet_feasible(params, draft, k));
    }
    Some(lo)
}

/// The generated instance name, `pdpt_r{requests}_{tw}_s{seed}`.
pub fn instance_name(params: &GeneratorParams, seed: u64) -> String {
    format!("pdpt_r{}_{}_s{seed}", params.requests, params.tw)
}

/// Draws a whole instance from `seed`: depots, requests by rejection,
/// fleet (fixed or by binary search), transfer points by k-means over the
/// request coordinates. Failed attempts continue on the same generator, so
/// the result depends on the seed alone.
pub fn generate_instance(params: &GeneratorParams, seed: u64) -> Result<Instance, GenError> {
    params.validate().map_err(GenError::Params)?;
    let pool = match &params.nodes {
        Some(nodes) => CoordinatePool::from_nodes(nodes, params.center, params.radius_km),
        None => CoordinatePool::Disc { center: params.center, radius_km: params.radius_km },
    };
    if pool.is_empty() {
        return Err(GenError::EmptyPool);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_ATTEMPTS {
        let drafted = params.fleet.unwrap_or(params.requests);
        let depots: Vec<_> = (0..drafted).map(|_| (pool.draw(&mut rng), pool.draw(&mut rng))).collect();
        let mut requests = Vec::with_capacity(params.requests);
        while requests.len() < params.requests {
            let accepted = (0..MAX_REJECTIONS).find_map(|_| sample_request(params, &pool, &depots, &mut rng));
            requests.push(accepted.ok_or(GenError::Rejections(MAX_REJECTIONS))?);
        }
        let draft = Draft { depots, requests };
        let fleet = match params.fleet {
            Some(k) => fleet_feasible(params, &draft, k).then_some(k),
            None => fleet_size_binary_search(params, &draft),
        };
        let Some(fleet) = fleet else { continue };
        let coords: Vec<(f64, f64)> =
            draft.requests.iter().flat_map(|q| [(q.pickup.lat, q.pickup.lon), (q.delivery.lat, q.delivery.lon)]).collect();
        // the default count assumes enough distinct locations; an explicit
        // count is taken literally
        let k = match params.transfers {
            Some(k) => k,
            None => params.transfer_count().min(distinct_count(&coords)),
        };
        let transfers = kmeans_transfers(&coords, k, &mut rng)?;
        let inst = assemble(params, &draft, fleet, &transfers, instance_name(params, seed), Some(seed));
        if let Some(v) = validate_instance(&inst).first() {
            return Err(GenError::Invalid(v.to_string()));
        }
        return Ok(inst);
    }
    Err(GenError::Fleet(MAX_ATTEMPTS))
}

fn distinct_count(points: &[(f64, f64)]) -> usize {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    v.dedup();
    v.len()
}

/// `n` small instances with request counts cycling through 2, 3, 4 and
/// width classes through S, M, L; instance `i` uses seed `master_seed + i`.
pub fn tiny_suite(n: usize, master_seed: u64) -> Result<Vec<Instance>, GenError> {
    (0..n)
        .map(|i| {
            let params = GeneratorParams::tiny(2 + i % 3, TwClass::ALL[(i / 3) % 3]);
            generate_instance(&params, master_seed.wrapping_add(i as u64))
        })
        .collect()
}
