use std::str::FromStr;
use std::time::Duration;

use crate::model::{MilpModel, ModelError, Row};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capabilities {
    pub supports_callbacks: bool,
    pub supports_warm_start: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    /// Relative gap `(ub - lb) / ub` at which the search may stop.
    pub gap: f64,
}

impl Default for Limits {
    fn default() -> Self {
        Limits { time: None, gap: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    /// A limit stopped the search with an incumbent in hand.
    Feasible,
    Infeasible,
    /// A limit stopped the search before any incumbent.
    Limit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Best known objective; may come from a hook's upper bound alone.
    pub objective: Option<f64>,
    /// Proven lower bound.
    pub bound: f64,
    /// Best point satisfying every row, when one was recorded.
    pub values: Option<Vec<f64>>,
    pub nodes: u64,
}

/// Reply of an integer-solution hook.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HookResponse {
    /// Rows added to the model for the rest of the search.
    pub lazy_rows: Vec<Row>,
    /// An objective value known to be attainable; tightens the cutoff.
    pub upper_bound: Option<f64>,
}

/// Called at every point where all binaries are integral and every row
/// holds. Returning no rows and no bound accepts the point as incumbent.
pub trait IntegerHook {
    fn on_integer(&mut self, values: &[f64], objective: f64) -> HookResponse;
}

impl<F: FnMut(&[f64], f64) -> HookResponse> IntegerHook for F {
    fn on_integer(&mut self, values: &[f64], objective: f64) -> HookResponse {
        self(values, objective)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("backend {backend} does not support {feature}")]
    Capability { backend: String, feature: &'static str },
    #[error("malformed model: {0}")]
    Model(#[from] ModelError),
    #[error("{0}")]
    Unsupported(String),
    #[error("external solver: {0}")]
    External(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub trait Backend {
    fn name(&self) -> &str;

    fn capabilities(&self) -> Capabilities;

    /// Minimizes `model`. `warm_start` holds a value per variable; a hook is
    /// only accepted by backends that support callbacks.
    fn solve(
        &self,
        model: &MilpModel,
        limits: &Limits,
        warm_start: Option<&[f64]>,
        hook: Option<&mut dyn IntegerHook>,
    ) -> Result<SolveResult, BackendError>;
}

/// Refuses requests the backend cannot honor.
pub(crate) fn require(
    backend: &dyn Backend,
    warm_start: bool,
    hook: bool,
) -> Result<(), BackendError> {
    let caps = backend.capabilities();
    if hook && !caps.supports_callbacks {
        return Err(BackendError::Capability { backend: backend.name().into(), feature: "callbacks" });
    }
    if warm_start && !caps.supports_warm_start {
        return Err(BackendError::Capability { backend: backend.name().into(), feature: "warm start" });
    }
    Ok(())
}

/// Value of the `backend` configuration key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendKind {
    Builtin,
    ExternalFile,
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "builtin" => Ok(BackendKind::Builtin),
            "external-file" => Ok(BackendKind::ExternalFile),
            other => Err(format!("unknown backend {other:?} (expected builtin or external-file)")),
        }
    }
}
