//! Instances, solutions and schedule feasibility for the pickup-and-delivery
//! problem with time windows and transfers.
//!
//! The [`model`] module holds the immutable problem data. The [`routing`]
//! module holds solutions, the synchronized schedule, validation and the
//! insertion machinery shared by the heuristics and the exact methods.

pub mod model;
pub mod routing;

pub use model::{
    build_travel_matrix, load_instance, save_instance, validate_instance, Instance, InstanceError,
    LocId, Location, LocationKind, Matrix, MatrixError, Meta, Metric, ReqId, Request, Role,
    Subject, TimeWindow, VehId, Vehicle, Violation,
};
pub use routing::{
    apply_insertion, check_insertion_feasible, compute_schedule, enumerate_insertions, evaluate,
    load_solution, ranked_insertions, save_solution, validate_solution, Action, Candidate,
    FeasibilityCache, Infeasibility, Journey, Leg, Placement, Property, Route, RoutingError,
    Schedule, Solution, SolutionViolation, Stop, StopRef, TIME_EPS,
};
