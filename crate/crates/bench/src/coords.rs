use std::path::Path;

use pdpt_core::model::haversine_km;
use rand::Rng;

/// Kilometers per degree of latitude.
const KM_PER_DEG: f64 = 111.32;

/// Where generated locations are drawn from.
#[derive(Debug, Clone, PartialEq)]
pub enum CoordinatePool {
    /// Uniform over a disc of `radius_km` around `center`.
    Disc { center: (f64, f64), radius_km: f64 },
    /// Uniform over a fixed set of (lat, lon) points.
    Points(Vec<(f64, f64)>),
}

impl CoordinatePool {
    /// The node-file points within `radius_km` of `center`.
    pub fn from_nodes(nodes: &[(f64, f64)], center: (f64, f64), radius_km: f64) -> CoordinatePool {
        CoordinatePool::Points(
            nodes.iter().copied().filter(|&(lat, lon)| haversine_km(center.0, center.1, lat, lon) <= radius_km).collect(),
        )
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, CoordinatePool::Points(p) if p.is_empty())
    }

    pub fn draw(&self, rng: &mut impl Rng) -> (f64, f64) {
        match self {
            CoordinatePool::Disc { center, radius_km } => {
                let r = radius_km * rng.gen::<f64>().sqrt();
                let angle = rng.gen_range(0.0..std::f64::consts::TAU);
                let lat = center.0 + r * angle.sin() / KM_PER_DEG;
                let lon = center.1 + r * angle.cos() / (KM_PER_DEG * center.0.to_radians().cos());
                (lat, lon)
            }
            CoordinatePool::Points(points) => points[rng.gen_range(0..points.len())],
        }
    }
}

/// Reads a node file: CSV with header `id,lat,lon`.
pub fn read_node_file(path: &Path) -> Result<Vec<(f64, f64)>, csv::Error> {
    #[derive(serde::Deserialize)]
    struct Node {
        #[allow(dead_code)]
        id: String,
        lat: f64,
        lon: f64,
    }
    let mut reader = csv::Reader::from_path(path)?;
    reader.deserialize::<Node>().map(|n| n.map(|n| (n.lat, n.lon))).collect()
}
