//! Solutions, synchronized schedules, validation and insertion moves.

mod cache;
mod insertion;
mod io;
mod schedule;
mod solution;
mod validate;

pub use cache::FeasibilityCache;
pub use insertion::{
    apply_insertion, apply_unchecked, check_insertion_exact, check_insertion_feasible,
    enumerate_insertions, ranked_insertions, Candidate, Placement, RankedInsertions,
};
pub use io::{load_solution, save_solution, solution_from_json, solution_to_json, SolutionFileError};
pub use schedule::{compute_schedule, Infeasibility, Schedule, StopRef, TIME_EPS};
pub use solution::{evaluate, Action, Journey, Leg, Route, RoutingError, Solution, Stop};
pub use validate::{validate_solution, Property, SolutionViolation};
