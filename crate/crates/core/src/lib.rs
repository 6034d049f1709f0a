//! Electric two-echelon vehicle routing.
//!
//! Trucks carry goods from a depot to satellites; battery-limited vehicles
//! serve customers from the satellites and may recharge at stations or at
//! any satellite on the way.

pub mod charging;
pub mod error;
pub mod experiments;
pub mod lns;
pub mod localsearch;
pub mod model;
pub mod multigraph;
pub mod ngpricing;

pub use charging::{insert_stations, optimal_insertion, penalized_insertion, InsertionResult};
pub use error::{ModelError, SolveError};
pub use lns::{lns_run, lns_run_with, LnsParams, LnsResult, RunStats};
pub use localsearch::{local_search, NeighborLists};
pub use model::{
    check_feasibility, parse_instance, parse_solution, write_instance, write_solution, Instance, InstanceData,
    Solution, Verdict, Vertex,
};
pub use multigraph::{MultiArc, Multigraph};
pub use ngpricing::{ng_lower_bound, price_ng_routes, BoundReport, NgLimits, NgSets};
