//! Problem data: locations, requests, vehicles, transfer points and the
//! dense travel-time / distance matrices.
//!
//! Distances are hectometers and times are minutes. Service time is folded
//! into the time needed between two different consecutive stops, see
//! [`Instance::gap`].

mod io;
mod matrix;
mod validate;

use serde::{Deserialize, Serialize};

pub use io::{instance_from_json, instance_to_json, load_instance, save_instance, InstanceError};
pub use matrix::{build_travel_matrix, haversine_km, Matrix, MatrixError, EARTH_RADIUS_KM};
pub use validate::{validate_instance, Subject, Violation};

pub type LocId = usize;
pub type ReqId = usize;
pub type VehId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LocationKind {
    DepotOrigin,
    DepotDestination,
    Pickup,
    Delivery,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Coordinates are latitude (`x`) and longitude (`y`) in degrees.
    Haversine,
    /// Planar coordinates in hectometers.
    Euclidean,
}

/// Closed time window `[open, close]` in minutes, written as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct TimeWindow {
    pub open: f64,
    pub close: f64,
}

impl TimeWindow {
    pub fn new(open: f64, close: f64) -> Self {
        TimeWindow { open, close }
    }

    pub fn width(&self) -> f64 {
        self.close - self.open
    }
}

impl From<[f64; 2]> for TimeWindow {
    fn from(v: [f64; 2]) -> Self {
        TimeWindow { open: v[0], close: v[1] }
    }
}

impl From<TimeWindow> for [f64; 2] {
    fn from(tw: TimeWindow) -> Self {
        [tw.open, tw.close]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Location {
    pub id: LocId,
    pub kind: LocationKind,
    pub x: f64,
    pub y: f64,
    pub tw: TimeWindow,
    pub service: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub id: ReqId,
    pub pickup: LocId,
    pub delivery: LocId,
    pub qty: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vehicle {
    pub id: VehId,
    pub origin: LocId,
    pub destination: LocId,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub name: String,
    pub metric: Metric,
    pub speed_kmh: f64,
    pub horizon: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// What a location is used for, resolved once from the request and vehicle lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Origin(VehId),
    Destination(VehId),
    Pickup(ReqId),
    Delivery(ReqId),
    Transfer,
    Unused,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub meta: Meta,
    pub locations: Vec<Location>,
    pub requests: Vec<Request>,
    pub vehicles: Vec<Vehicle>,
    /// Transfer location ids in file order. Duplicate copies of a physical
    /// transfer point are separate locations sharing coordinates.
    pub transfers: Vec<LocId>,
    travel: Matrix,
    distance: Matrix,
    explicit_matrices: bool,
    roles: Vec<Role>,
}

impl Instance {
    /// Builds and validates an instance, computing the matrices from coordinates.
    pub fn new(
        meta: Meta,
        locations: Vec<Location>,
        requests: Vec<Request>,
        vehicles: Vec<Vehicle>,
        transfers: Vec<LocId>,
    ) -> Result<Instance, InstanceError> {
        let inst = Instance::assemble(meta, locations, requests, vehicles, transfers, None)?;
        inst.checked()
    }

    /// Builds and validates an instance with caller-supplied matrices.
    pub fn with_matrices(
        meta: Meta,
        locations: Vec<Location>,
        requests: Vec<Request>,
        vehicles: Vec<Vehicle>,
        transfers: Vec<LocId>,
        travel: Matrix,
        distance: Matrix,
    ) -> Result<Instance, InstanceError> {
        let inst = Instance::assemble(
            meta,
            locations,
            requests,
            vehicles,
            transfers,
            Some((travel, distance)),
        )?;
        inst.checked()
    }

    /// Builds an instance without validating it. Matrices are computed from
    /// coordinates when not given. Use [`validate_instance`] to inspect it.
    pub fn assemble(
        meta: Meta,
        locations: Vec<Location>,
        requests: Vec<Request>,
        vehicles: Vec<Vehicle>,
        transfers: Vec<LocId>,
        matrices: Option<(Matrix, Matrix)>,
    ) -> Result<Instance, MatrixError> {
        let explicit_matrices = matrices.is_some();
        let (travel, distance) = match matrices {
            Some(m) => m,
            None => build_travel_matrix(&locations, meta.metric, meta.speed_kmh)?,
        };
        let mut roles = vec![Role::Unused; locations.len()];
        let mut set = |id: LocId, role: Role| {
            if let Some(slot) = roles.get_mut(id) {
                if *slot == Role::Unused {
                    *slot = role;
                }
            }
        };
        for v in &vehicles {
            set(v.origin, Role::Origin(v.id));
            set(v.destination, Role::Destination(v.id));
        }
        for r in &requests {
            set(r.pickup, Role::Pickup(r.id));
            set(r.delivery, Role::Delivery(r.id));
        }
        for &t in &transfers {
            set(t, Role::Transfer);
        }
        Ok(Instance {
            meta,
            locations,
            requests,
            vehicles,
            transfers,
            travel,
            distance,
            explicit_matrices,
            roles,
        })
    }

    fn checked(self) -> Result<Instance, InstanceError> {
        let report = validate_instance(&self);
        if report.is_empty() {
            Ok(self)
        } else {
            Err(InstanceError::Invalid(report))
        }
    }

    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    /// Travel time in minutes.
    #[inline]
    pub fn t(&self, i: LocId, j: LocId) -> f64 {
        self.travel.get(i, j)
    }

    /// Distance in hectometers.
    #[inline]
    pub fn c(&self, i: LocId, j: LocId) -> f64 {
        self.distance.get(i, j)
    }

    /// Minimum time between the service starts of two consecutive stops:
    /// zero when both stops are at the same location (one visit), otherwise
    /// the service time at `i` plus the travel time.
    #[inline]
    pub fn gap(&self, i: LocId, j: LocId) -> f64 {
        if i == j {
            0.0
        } else {
            self.locations[i].service + self.travel.get(i, j)
        }
    }

    #[inline]
    pub fn tw(&self, j: LocId) -> TimeWindow {
        self.locations[j].tw
    }

    #[inline]
    pub fn role(&self, j: LocId) -> Role {
        self.roles[j]
    }

    pub fn is_transfer(&self, j: LocId) -> bool {
        self.roles[j] == Role::Transfer
    }

    /// Fleet capacity (the fleet is homogeneous).
    pub fn capacity(&self) -> u32 {
        self.vehicles.first().map_or(0, |v| v.capacity)
    }

    pub fn travel(&self) -> &Matrix {
        &self.travel
    }

    pub fn distance(&self) -> &Matrix {
        &self.distance
    }

    /// True when the matrices came from the file rather than coordinates.
    pub fn has_explicit_matrices(&self) -> bool {
        self.explicit_matrices
    }
}
