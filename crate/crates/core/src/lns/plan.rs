use crate::charging::{insert_stations, InsertionResult};
use crate::error::ModelError;
use crate::model::{FirstLevelRoute, Instance, SecondLevelRoute, Solution, Vertex};
use crate::multigraph::Multigraph;

use super::first_level::build_first_level;

/// Second-level route as a customer sequence plus its charging plan.
#[derive(Debug, Clone)]
pub struct PlanRoute {
    pub satellite: Vertex,
    pub customers: Vec<Vertex>,
    pub load: u32,
    /// Stale while `dirty`.
    pub charge: InsertionResult,
    pub(crate) dirty: bool,
}

impl PlanRoute {
    pub fn new(satellite: Vertex) -> Self {
        PlanRoute {
            satellite,
            customers: Vec::new(),
            load: 0,
            charge: InsertionResult {
                feasible: true,
                cost: 0,
                stations: Vec::new(),
                excess: 0,
                penalty: 0,
            },
            dirty: true,
        }
    }

    pub fn with_customers(inst: &Instance, graph: &Multigraph, satellite: Vertex, customers: Vec<Vertex>) -> Self {
        let load = customers.iter().map(|&c| inst.demand(c)).sum();
        let charge = insert_stations(inst, graph, satellite, &customers);
        PlanRoute { satellite, customers, load, charge, dirty: false }
    }

    pub fn recharge(&mut self, inst: &Instance, graph: &Multigraph) {
        if self.dirty {
            self.charge = insert_stations(inst, graph, self.satellite, &self.customers);
            self.dirty = false;
        }
    }

    /// Station placed right after the satellite, if any.
    pub fn start_station(&self) -> Option<Vertex> {
        self.charge.stations.first().filter(|s| s.0 == 0).map(|s| s.1)
    }

    pub fn to_route(&self) -> SecondLevelRoute {
        SecondLevelRoute {
            satellite: self.satellite,
            visits: self.charge.visits(&self.customers),
            load: self.load,
        }
    }
}

/// Solution under construction or search: second-level customer sequences
/// with their charging plans, the first level, and the set of satellites
/// currently closed to new routes.
#[derive(Debug, Clone)]
pub struct Plan {
    pub routes: Vec<PlanRoute>,
    pub first_level: Vec<FirstLevelRoute>,
    pub first_level_distance: i64,
    /// Indexed by vertex.
    pub closed: Vec<bool>,
}

impl Plan {
    pub fn empty(inst: &Instance) -> Self {
        Plan {
            routes: Vec::new(),
            first_level: Vec::new(),
            first_level_distance: 0,
            closed: vec![false; inst.num_vertices()],
        }
    }

    /// Takes over the customer sequences and first level of `sol`; stations
    /// are re-optimised.
    pub fn from_solution(inst: &Instance, graph: &Multigraph, sol: &Solution) -> Self {
        let routes = sol
            .second_level
            .iter()
            .map(|r| PlanRoute::with_customers(inst, graph, r.satellite, r.customers(inst).collect()))
            .collect();
        Plan {
            routes,
            first_level: sol.first_level.clone(),
            first_level_distance: sol.first_level.iter().map(|r| r.distance(inst)).sum(),
            closed: vec![false; inst.num_vertices()],
        }
    }

    /// Total cost with battery penalties; charges must be up to date.
    pub fn objective(&self, inst: &Instance) -> i64 {
        self.first_level_distance
            + inst.fixed_cost_l1 * self.first_level.len() as i64
            + self
                .routes
                .iter()
                .map(|r| r.charge.objective() + inst.fixed_cost_l2)
                .sum::<i64>()
    }

    pub fn battery_feasible(&self) -> bool {
        self.routes.iter().all(|r| r.charge.feasible)
    }

    /// Demand served from each satellite, indexed by vertex.
    pub fn satellite_loads(&self, inst: &Instance) -> Vec<u64> {
        let mut loads = vec![0u64; inst.num_vertices()];
        for r in &self.routes {
            loads[r.satellite] += u64::from(r.load);
        }
        loads
    }

    pub fn routes_at(&self, inst: &Instance) -> Vec<u32> {
        let mut n = vec![0u32; inst.num_vertices()];
        for r in &self.routes {
            n[r.satellite] += 1;
        }
        n
    }

    /// Rebuilds the first level from the current satellite loads.
    pub fn rebuild_first_level(&mut self, inst: &Instance) -> bool {
        match build_first_level(inst, &self.satellite_loads(inst)) {
            Some(routes) => {
                self.first_level_distance = routes.iter().map(|r| r.distance(inst)).sum();
                self.first_level = routes;
                true
            }
            None => false,
        }
    }

    pub fn recharge(&mut self, inst: &Instance, graph: &Multigraph) {
        for r in &mut self.routes {
            r.recharge(inst, graph);
        }
    }

    pub fn num_customers(&self) -> usize {
        self.routes.iter().map(|r| r.customers.len()).sum()
    }

    pub fn to_solution(&self, inst: &Instance) -> Result<Solution, ModelError> {
        Solution::new(
            inst,
            self.first_level.clone(),
            self.routes.iter().map(PlanRoute::to_route).collect(),
        )
    }
}
