//! Request feature vectors and the two request dissimilarities: the
//! weighted Shaw measure and the Mahalanobis distance between features.

use nalgebra::{Cholesky, SMatrix, SVector, SymmetricEigen};
use pdpt_core::{Instance, ReqId};

pub const N_FEATURES: usize = 9;

pub type FeatureVec = SVector<f64, N_FEATURES>;
pub type Covariance = SMatrix<f64, N_FEATURES, N_FEATURES>;

/// `[q, x(p), y(p), x(d), y(d), open(p), open(d), service(p), service(d)]`.
pub fn request_features(inst: &Instance, r: ReqId) -> FeatureVec {
    let req = &inst.requests[r];
    let (p, d) = (&inst.locations[req.pickup], &inst.locations[req.delivery]);
    FeatureVec::from([req.qty as f64, p.x, p.y, d.x, d.y, p.tw.open, d.tw.open, p.service, d.service])
}

pub fn feature_rows(inst: &Instance) -> Vec<FeatureVec> {
    (0..inst.requests.len()).map(|r| request_features(inst, r)).collect()
}

/// Sample covariance (divisor `n - 1`); zero for fewer than two rows.
pub fn covariance(rows: &[FeatureVec]) -> Covariance {
    let n = rows.len();
    if n < 2 {
        return Covariance::zeros();
    }
    let mean = rows.iter().fold(FeatureVec::zeros(), |acc, v| acc + v) / n as f64;
    let mut cov = Covariance::zeros();
    for v in rows {
        let c = v - mean;
        cov += c * c.transpose();
    }
    cov / (n - 1) as f64
}

/// Diagonal shift applied to a singular covariance.
pub fn ridge(cov: &Covariance) -> f64 {
    1e-6 * cov.trace() / N_FEATURES as f64 + 1e-12
}

/// Factorized inverse covariance for repeated distance evaluations.
#[derive(Debug, Clone)]
pub struct Mahalanobis {
    chol: Cholesky<f64, nalgebra::Const<N_FEATURES>>,
    /// Diagonal shift that was needed, zero for a well-conditioned matrix.
    pub ridge: f64,
}

impl Mahalanobis {
    /// Singular or near-singular matrices (smallest eigenvalue below
    /// `1e-10` of the largest) get the ridge.
    pub fn new(cov: &Covariance) -> Mahalanobis {
        let eig = SymmetricEigen::new(*cov);
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        let mut shift = 0.0;
        if !(max > 0.0) || min <= 1e-10 * max {
            shift = ridge(cov);
        }
        loop {
            let shifted = cov + Covariance::identity() * shift;
            if let Some(chol) = Cholesky::new(shifted) {
                return Mahalanobis { chol, ridge: shift };
            }
            // rounding left the shifted matrix indefinite
            shift = if shift == 0.0 { ridge(cov) } else { shift * 10.0 };
        }
    }

    pub fn from_instance(inst: &Instance) -> Mahalanobis {
        Mahalanobis::new(&covariance(&feature_rows(inst)))
    }

    pub fn distance(&self, a: &FeatureVec, b: &FeatureVec) -> f64 {
        let diff = a - b;
        let solved = self.chol.solve(&diff);
        diff.dot(&solved).max(0.0).sqrt()
    }
}

/// Weights of the Shaw measure: demand, travel time, window opening.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShawWeights {
    pub demand: f64,
    pub travel: f64,
    pub time: f64,
}

impl Default for ShawWeights {
    fn default() -> Self {
        ShawWeights { demand: 0.33, travel: 0.99, time: 0.66 }
    }
}

pub fn shaw_dissimilarity(inst: &Instance, r: ReqId, other: ReqId, w: ShawWeights) -> f64 {
    let (a, b) = (&inst.requests[r], &inst.requests[other]);
    let open = |j| inst.tw(j).open;
    w.demand * (a.qty as f64 - b.qty as f64).abs()
        + w.travel * (inst.t(a.pickup, b.pickup) + inst.t(a.delivery, b.delivery))
        + w.time * ((open(a.pickup) - open(b.pickup)).abs() + (open(a.delivery) - open(b.delivery)).abs())
}

/// Symmetric table of pairwise dissimilarities between requests.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissimilarity {
    n: usize,
    values: Vec<f64>,
}

impl Dissimilarity {
    pub fn from_fn(n: usize, f: impl Fn(ReqId, ReqId) -> f64) -> Dissimilarity {
        let mut values = vec![0.0; n * n];
        for r in 0..n {
            for s in r + 1..n {
                let v = f(r, s);
                values[r * n + s] = v;
                values[s * n + r] = v;
            }
        }
        Dissimilarity { n, values }
    }

    pub fn mahalanobis(inst: &Instance) -> Dissimilarity {
        let rows = feature_rows(inst);
        let m = Mahalanobis::new(&covariance(&rows));
        Dissimilarity::from_fn(rows.len(), |r, s| m.distance(&rows[r], &rows[s]))
    }

    pub fn shaw(inst: &Instance, w: ShawWeights) -> Dissimilarity {
        Dissimilarity::from_fn(inst.requests.len(), |r, s| shaw_dissimilarity(inst, r, s, w))
    }

    pub fn get(&self, r: ReqId, s: ReqId) -> f64 {
        self.values[r * self.n + s]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}
