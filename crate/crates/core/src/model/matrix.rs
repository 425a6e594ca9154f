use super::{Location, Metric};

pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MatrixError {
    #[error("matrix rows have different lengths")]
    Ragged,
    #[error("speed must be positive, got {0}")]
    BadSpeed(f64),
    #[error("location {id}: coordinates ({lat}, {lon}) out of range for haversine")]
    OutOfRange { id: usize, lat: f64, lon: f64 },
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Matrix {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Matrix, MatrixError> {
        let n = rows.len();
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(MatrixError::Ragged);
        }
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        if self.cols == 0 {
            return vec![Vec::new(); self.rows];
        }
        self.data.chunks(self.cols).map(|c| c.to_vec()).collect()
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// Great-circle distance in kilometers between two (lat, lon) points in degrees.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Builds the (travel time, distance) pair.
///
/// Distances are hectometers: great-circle kilometers times 10 for
/// haversine, plain coordinate distance for euclidean. Travel time in minutes
/// is `distance * 6 / speed_kmh`, so 20 km/h covers one kilometer in 3 minutes.
pub fn build_travel_matrix(
    locations: &[Location],
    metric: Metric,
    speed_kmh: f64,
) -> Result<(Matrix, Matrix), MatrixError> {
    if !(speed_kmh > 0.0) || !speed_kmh.is_finite() {
        return Err(MatrixError::BadSpeed(speed_kmh));
    }
    if metric == Metric::Haversine {
        for loc in locations {
            if !(loc.x.abs() <= 90.0) || !(loc.y.abs() <= 180.0) {
                return Err(MatrixError::OutOfRange { id: loc.id, lat: loc.x, lon: loc.y });
            }
        }
    }
    let n = locations.len();
    let mut dist = Matrix::zeros(n, n);
    let mut time = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (&locations[i], &locations[j]);
            let hm = match metric {
                Metric::Euclidean => (a.x - b.x).hypot(a.y - b.y),
                Metric::Haversine => 10.0 * haversine_km(a.x, a.y, b.x, b.y),
            };
            let minutes = hm * 6.0 / speed_kmh;
            dist.set(i, j, hm);
            dist.set(j, i, hm);
            time.set(i, j, minutes);
            time.set(j, i, minutes);
        }
    }
    Ok((time, dist))
}
