//! Lloyd's algorithm with k-means++ seeding under the haversine metric.

use pdpt_core::model::haversine_km;
use rand::Rng;

pub const MAX_ITERATIONS: usize = 100;
pub const SHIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("k-means needs {k} distinct points, got {distinct}")]
pub struct TooFewPoints {
    pub k: usize,
    pub distinct: usize,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    haversine_km(a.0, a.1, b.0, b.1)
}

fn nearest(p: (f64, f64), centers: &[(f64, f64)]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (c, &center) in centers.iter().enumerate() {
        let d = dist(p, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best.0
}

/// `k` centroids of `points`, sorted by latitude then longitude. The first
/// seed is uniform, each further seed is drawn proportionally to the
/// squared distance to the nearest seed so far. Empty clusters keep their
/// centroid.
pub fn kmeans_transfers(points: &[(f64, f64)], k: usize, rng: &mut impl Rng) -> Result<Vec<(f64, f64)>, TooFewPoints> {
    let mut distinct = points.to_vec();
    distinct.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    distinct.dedup();
    if distinct.len() < k {
        return Err(TooFewPoints { k, distinct: distinct.len() });
    }
    if k == 0 {
        return Ok(Vec::new());
    }

    let mut centers = vec![points[rng.gen_range(0..points.len())]];
    while centers.len() < k {
        let weights: Vec<f64> = points.iter().map(|&p| dist(p, centers[nearest(p, &centers)]).powi(2)).collect();
        let total: f64 = weights.iter().sum();
        let mut x = rng.gen_range(0.0..total);
        let mut pick = weights.iter().rposition(|&w| w > 0.0).expect("a point away from every seed");
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 && x < w {
                pick = i;
                break;
            }
            x -= w;
        }
        centers.push(points[pick]);
    }

    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![(0.0, 0.0, 0usize); k];
        for &p in points {
            let s = &mut sums[nearest(p, &centers)];
            s.0 += p.0;
            s.1 += p.1;
            s.2 += 1;
        }
        let mut shift: f64 = 0.0;
        for (c, s) in centers.iter_mut().zip(&sums) {
            if s.2 > 0 {
                let next = (s.0 / s.2 as f64, s.1 / s.2 as f64);
                shift = shift.max(dist(*c, next));
                *c = next;
            }
        }
        if shift < SHIFT_TOL {
            break;
        }
    }
    centers.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    Ok(centers)
}
