//! Benchmark instance generator, the multi-restart benchmark harness and
//! the `pdpt` command line.

pub mod bench;
pub mod cli;
pub mod coords;
pub mod generator;
pub mod kmeans;
pub mod params;

pub use bench::{run_benchmark, BenchmarkReport, BenchmarkRow, BenchmarkSuite, SuiteInstance};
pub use coords::{read_node_file, CoordinatePool};
pub use generator::{
    cheapest_insertion, direct_route_feasible, fleet_size_binary_search, generate_instance, sample_request,
    tiny_suite, Draft, DraftRequest, GenError, Site,
};
pub use kmeans::kmeans_transfers;
pub use params::{default_transfer_count, GeneratorParams, TwClass};
