//! MILP models, LP/MPS export, solver backends and an exhaustive routing
//! oracle for small instances.

mod backend;
mod bnb;
mod export;
mod external;
mod model;
pub mod oracle;

pub use backend::{
    Backend, BackendError, BackendKind, Capabilities, HookResponse, IntegerHook, Limits, SolveResult,
    SolveStatus,
};
pub use bnb::{BranchRule, BuiltinBackend};
pub use export::{export_model, model_to_lp, model_to_mps, ExportError, ModelFormat};
pub use external::{parse_assignment, ExternalFileBackend};
pub use model::{MilpModel, ModelError, Row, Sense, Var, VarId, VarKind};
pub use oracle::{exact_oracle_solve, OracleError};
