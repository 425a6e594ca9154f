use crate::LbbdError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapMetrics {
    /// `(UB - LB) / UB` in percent, with the exact method's upper bound.
    pub gap: f64,
    /// Same with the heuristic's upper bound.
    pub heuristic_gap: f64,
    /// `(UB_heuristic - UB_exact) / UB_heuristic` in percent.
    pub err: f64,
}

/// Relative optimality gap in percent.
pub fn gap_percent(lb: f64, ub: f64) -> Result<f64, LbbdError> {
    if !(ub > 0.0) || !ub.is_finite() {
        return Err(LbbdError::UndefinedMetric("upper bound must be positive and finite"));
    }
    Ok((ub - lb) / ub * 100.0)
}

pub fn gap_metrics(lb: f64, ub_heuristic: f64, ub_exact: f64) -> Result<GapMetrics, LbbdError> {
    if !(lb >= 0.0) {
        return Err(LbbdError::UndefinedMetric("lower bound must be non-negative"));
    }
    Ok(GapMetrics {
        gap: gap_percent(lb, ub_exact)?,
        heuristic_gap: gap_percent(lb, ub_heuristic)?,
        err: gap_percent(ub_exact, ub_heuristic)?,
    })
}

/// Effect of a warm start on one instance: gap reduction (percentage
/// points) and time saved (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarmStartEffect {
    pub imp: f64,
    pub acc: f64,
}

pub fn warm_start_effect(gap_plain: f64, gap_warm: f64, time_plain: f64, time_warm: f64) -> WarmStartEffect {
    WarmStartEffect { imp: gap_plain - gap_warm, acc: time_plain - time_warm }
}
