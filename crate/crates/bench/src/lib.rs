//! Shared fixtures for the solver benchmarks.

use e2evrp_core::experiments::{generate_metro_instance, MetroGenConfig};
use e2evrp_core::{Instance, Vertex};

/// Metropolitan-style instance with `stations` stations and battery `battery`.
pub fn metro(seed: u64, stations: usize, battery: u32) -> Instance {
    let cfg = MetroGenConfig { seed, stations, battery: Some(battery), ..MetroGenConfig::default() };
    generate_metro_instance(&cfg).expect("generator defaults are valid")
}

/// Customers split into consecutive chunks of `len`, in index order.
pub fn routes(inst: &Instance, len: usize) -> Vec<Vec<Vertex>> {
    let cs: Vec<Vertex> = inst.customer_vertices().collect();
    cs.chunks(len).map(<[Vertex]>::to_vec).collect()
}
