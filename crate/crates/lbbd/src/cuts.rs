use pdpt_core::LocId;
use pdpt_milp::{Row, Sense, VarId};

use crate::master::MasterModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CutKind {
    Optimality,
    Feasibility,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BendersCut {
    pub kind: CutKind,
    pub edges: Vec<(LocId, LocId)>,
    /// Subproblem value, for optimality cuts.
    pub bound: Option<f64>,
}

/// `z >= bound - bound * (|E| - sum of x over E)`: binding only while
/// every edge of `edges` stays selected.
pub fn make_optimality_cut(edges: &[(LocId, LocId)], bound: f64) -> BendersCut {
    BendersCut { kind: CutKind::Optimality, edges: edges.to_vec(), bound: Some(bound) }
}

/// `sum of x over E <= |E| - 1`.
pub fn make_feasibility_cut(edges: &[(LocId, LocId)]) -> BendersCut {
    BendersCut { kind: CutKind::Feasibility, edges: edges.to_vec(), bound: None }
}

impl BendersCut {
    pub fn to_row(&self, master: &MasterModel, name: impl Into<String>) -> Row {
        let n_edges = self.edges.len() as f64;
        let trips = self.edges.iter().map(|&(i, j)| master.trip[i][j]);
        match self.kind {
            CutKind::Optimality => {
                let bound = self.bound.expect("optimality cut carries a bound");
                let mut terms: Vec<(VarId, f64)> = vec![(master.z, 1.0)];
                terms.extend(trips.map(|v| (v, -bound)));
                Row::new(name, terms, Sense::Ge, bound - bound * n_edges)
            }
            CutKind::Feasibility => Row::new(name, trips.map(|v| (v, 1.0)).collect(), Sense::Le, n_edges - 1.0),
        }
    }

    /// Smallest `z` the cut allows at a point selecting `selected` of its edges.
    pub fn implied_bound(&self, selected: usize) -> f64 {
        match (self.kind, self.bound) {
            (CutKind::Optimality, Some(b)) => b - b * (self.edges.len() - selected) as f64,
            _ => f64::NEG_INFINITY,
        }
    }
}
