use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use pdpt_core::{Instance, LocId};

use crate::master::MasterModel;
use crate::LbbdError;

/// Values at or above this read as 1.
pub const INTEGRALITY_TOL: f64 = 1e-6;

/// Consecutive path locations `(before, transfer, after)`.
pub type TransferTriple = (LocId, LocId, LocId);

/// An integer master point read back as paths.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterAssignment {
    /// Selected trips.
    pub trips: Vec<(LocId, LocId)>,
    /// Loaded trips per request.
    pub loads: Vec<Vec<(LocId, LocId)>>,
    /// Objective lower bound of the point.
    pub z: f64,
    pub paths: Vec<Vec<LocId>>,
    pub transfers: Vec<Vec<TransferTriple>>,
    /// Trips carrying at least one request, sorted.
    pub edges: Vec<(LocId, LocId)>,
}

impl MasterAssignment {
    /// Hash of the edge set together with the transfer triples, used to
    /// spot repeated subproblems.
    pub fn key(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.edges.hash(&mut h);
        self.transfers.hash(&mut h);
        h.finish()
    }
}

pub fn edge_set_hash(edges: &[(LocId, LocId)]) -> u64 {
    let mut h = DefaultHasher::new();
    edges.hash(&mut h);
    h.finish()
}

fn one(v: f64) -> bool {
    v >= 1.0 - INTEGRALITY_TOL
}

/// Reads trips and loads from a master point and builds the paths.
pub fn extract_paths(inst: &Instance, master: &MasterModel, values: &[f64]) -> Result<MasterAssignment, LbbdError> {
    let n = master.n_locations();
    let mut trips = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if one(values[master.trip[i][j].0]) {
                trips.push((i, j));
            }
        }
    }
    let loads: Vec<Vec<(LocId, LocId)>> = master
        .load
        .iter()
        .map(|by_tail| {
            let mut out = Vec::new();
            for (i, row) in by_tail.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if v.is_some_and(|v| one(values[v.0])) {
                        out.push((i, j));
                    }
                }
            }
            out
        })
        .collect();
    let (paths, transfers, edges) = paths_from_loads(inst, &loads)?;
    Ok(MasterAssignment { trips, loads, z: values[master.z.0], paths, transfers, edges })
}

/// Path construction from the loaded trips of each request: start at the
/// pickup and repeatedly follow the first loaded trip out of the last
/// location (in location order) until the delivery. Also returns the
/// transfer triples and the loaded edge set.
#[allow(clippy::type_complexity)]
pub fn paths_from_loads(
    inst: &Instance,
    loads: &[Vec<(LocId, LocId)>],
) -> Result<(Vec<Vec<LocId>>, Vec<Vec<TransferTriple>>, Vec<(LocId, LocId)>), LbbdError> {
    let n = inst.n_locations();
    let mut paths = Vec::with_capacity(loads.len());
    let mut triples = Vec::with_capacity(loads.len());
    for (r, req) in inst.requests.iter().enumerate() {
        let mut loaded = vec![false; n * n];
        for &(i, j) in &loads[r] {
            loaded[i * n + j] = true;
        }
        let mut path = vec![req.pickup];
        let mut last = req.pickup;
        while last != req.delivery {
            let next = (0..n).find(|&j| loaded[last * n + j]).ok_or(LbbdError::BrokenPath { request: r, at: last })?;
            path.push(next);
            last = next;
            if path.len() > n {
                return Err(LbbdError::BrokenPath { request: r, at: last });
            }
        }
        let tau: Vec<TransferTriple> =
            path.windows(3).filter(|w| inst.is_transfer(w[1])).map(|w| (w[0], w[1], w[2])).collect();
        paths.push(path);
        triples.push(tau);
    }
    let mut edges: Vec<(LocId, LocId)> = loads.iter().flatten().copied().collect();
    edges.sort_unstable();
    edges.dedup();
    Ok((paths, triples, edges))
}
