//! Logic-based Benders decomposition for pickup and delivery with
//! transfers. The master chooses vehicle trips and request paths; the
//! subproblem assigns trips to vehicles and checks the schedule, feeding
//! optimality and feasibility cuts back as lazy rows.

mod bnc;
mod cuts;
mod master;
mod metrics;
mod paths;
mod subproblem;
mod warm;

use pdpt_core::{LocId, ReqId};
use pdpt_milp::BackendError;

pub use bnc::{branch_and_check, branch_and_check_with, BnCResult, IterationRecord, SubproblemMethod};
pub use cuts::{make_feasibility_cut, make_optimality_cut, BendersCut, CutKind};
pub use master::{build_master, MasterModel};
pub use metrics::{gap_metrics, gap_percent, warm_start_effect, GapMetrics, WarmStartEffect};
pub use paths::{edge_set_hash, extract_paths, paths_from_loads, MasterAssignment, TransferTriple, INTEGRALITY_TOL};
pub use subproblem::{
    build_subproblem, plan_from_routes, solve_subproblem_enumeration, solve_subproblem_milp, SubproblemModel,
    SubproblemSolution,
};
pub use warm::warm_start_from;

#[derive(Debug, thiserror::Error)]
pub enum LbbdError {
    #[error("no feasible PDPT solution")]
    NoFeasibleSolution,
    #[error("loaded trips of request {request} break off at location {at}")]
    BrokenPath { request: ReqId, at: LocId },
    #[error("subproblem: {0}")]
    Subproblem(String),
    #[error("invalid warm start: {0}")]
    InvalidWarmStart(String),
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error(transparent)]
    Backend(#[from] BackendError),
}
