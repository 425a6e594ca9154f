#![allow(dead_code)]

use pdpt_core::{Instance, Location, LocationKind, Meta, Metric, Request, TimeWindow, Vehicle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn meta() -> Meta {
    Meta { name: "t".into(), metric: Metric::Euclidean, speed_kmh: 20.0, horizon: 480.0, seed: None }
}

fn loc(id: usize, kind: LocationKind, (x, y): (f64, f64), (open, close): (f64, f64), service: f64) -> Location {
    Location { id, kind, x, y, tw: TimeWindow::new(open, close), service }
}

#[derive(Debug, Clone)]
pub struct RawRequest {
    pub pickup: (f64, f64),
    pub pw: (f64, f64),
    pub delivery: (f64, f64),
    pub dw: (f64, f64),
    pub service: f64,
    pub qty: u32,
}

pub fn build(depots: &[((f64, f64), (f64, f64))], reqs: &[RawRequest], transfers: &[(f64, f64)], capacity: u32) -> Instance {
    let nv = depots.len();
    let mut locations = Vec::new();
    for (k, d) in depots.iter().enumerate() {
        locations.push(loc(k, LocationKind::DepotOrigin, d.0, (0.0, 480.0), 0.0));
    }
    for (k, d) in depots.iter().enumerate() {
        locations.push(loc(nv + k, LocationKind::DepotDestination, d.1, (0.0, 480.0), 0.0));
    }
    let mut requests = Vec::new();
    for (r, q) in reqs.iter().enumerate() {
        let id = locations.len();
        locations.push(loc(id, LocationKind::Pickup, q.pickup, q.pw, q.service));
        locations.push(loc(id + 1, LocationKind::Delivery, q.delivery, q.dw, q.service));
        requests.push(Request { id: r, pickup: id, delivery: id + 1, qty: q.qty });
    }
    let mut tr = Vec::new();
    for &p in transfers {
        let id = locations.len();
        locations.push(loc(id, LocationKind::Transfer, p, (0.0, 480.0), 0.0));
        tr.push(id);
    }
    let vehicles = (0..nv).map(|k| Vehicle { id: k, origin: k, destination: nv + k, capacity }).collect();
    Instance::new(meta(), locations, requests, vehicles, tr).unwrap()
}

pub fn direct(pickup: (f64, f64), delivery: (f64, f64)) -> RawRequest {
    RawRequest { pickup, pw: (0.0, 480.0), delivery, dw: (0.0, 480.0), service: 0.0, qty: 10 }
}

/// Random tiny instance: two vehicles, one transfer point in the middle.
pub fn random_instance(seed: u64, n_req: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| (rng.gen_range(0.0..80.0), rng.gen_range(0.0..80.0));
    let depots = vec![(pt(&mut rng), pt(&mut rng)), (pt(&mut rng), pt(&mut rng))];
    let reqs: Vec<RawRequest> = (0..n_req)
        .map(|_| {
            let open = rng.gen_range(0.0..60.0);
            let width = rng.gen_range(15.0..90.0);
            let dopen = open + rng.gen_range(0.0..30.0);
            RawRequest {
                pickup: pt(&mut rng),
                pw: (open, open + width),
                delivery: pt(&mut rng),
                dw: (dopen, dopen + width),
                service: rng.gen_range(0..4) as f64,
                qty: rng.gen_range(5..=20),
            }
        })
        .collect();
    build(&depots, &reqs, &[(40.0, 40.0)], 30)
}

/// The built-in solver with callbacks switched off, to drive the
/// iterative loop.
pub struct Iterative(pub pdpt_milp::BuiltinBackend);

impl pdpt_milp::Backend for Iterative {
    fn name(&self) -> &str {
        "builtin"
    }

    fn capabilities(&self) -> pdpt_milp::Capabilities {
        pdpt_milp::Capabilities { supports_callbacks: false, supports_warm_start: false }
    }

    fn solve(
        &self,
        model: &pdpt_milp::MilpModel,
        limits: &pdpt_milp::Limits,
        warm_start: Option<&[f64]>,
        hook: Option<&mut dyn pdpt_milp::IntegerHook>,
    ) -> Result<pdpt_milp::SolveResult, pdpt_milp::BackendError> {
        assert!(hook.is_none() && warm_start.is_none());
        self.0.solve(model, limits, None, None)
    }
}
