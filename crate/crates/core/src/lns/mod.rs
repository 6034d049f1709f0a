//! Large neighbourhood search with restarts.
//!
//! Each iteration applies one of three destroy operators chosen uniformly
//! (related removal, route removal, satellite closing), then possibly reopens
//! every satellite and dissolves singleton routes, repairs, and runs the
//! local search. A strictly better result becomes the current solution,
//! otherwise the iteration is undone. After `i_max` iterations without
//! improvement the search restarts from a fresh construction.
//!
//! The closed-satellite set lives in the solution state, so a rejected
//! iteration also reverts a closing, and a restart starts with all
//! satellites open. Battery-penalised solutions may be current but never
//! become the best solution.

pub mod first_level;
mod ops;
mod plan;

use std::time::{Duration, Instant};

use log::{debug, info};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::localsearch::{local_search, NeighborLists};
use crate::model::{Instance, Solution};
use crate::multigraph::Multigraph;

pub use first_level::build_first_level;
pub use ops::{related_cap, route_cap, SearchState};
pub use plan::{Plan, PlanRoute};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LnsParams {
    /// Related removal cap, percent of customers.
    pub p1: u32,
    /// Route removal cap, percent of the minimum route count.
    pub p2: u32,
    /// Probability (percent) of reopening all satellites.
    pub p3_hat: u32,
    /// Probability (percent) of dissolving singleton routes.
    pub p4_hat: u32,
    /// Neighbour list length of the local search.
    pub granularity: usize,
    /// Iterations without improvement before a restart.
    pub i_max: u64,
    /// Wall-clock budget in seconds.
    pub t_max: f64,
    /// Iteration budget; makes a run independent of machine speed.
    pub max_iterations: Option<u64>,
    pub seed: u64,
}

impl Default for LnsParams {
    fn default() -> Self {
        LnsParams {
            p1: 11,
            p2: 37,
            p3_hat: 12,
            p4_hat: 18,
            granularity: 25,
            i_max: 385,
            t_max: 150.0,
            max_iterations: None,
            seed: 0,
        }
    }
}

impl LnsParams {
    pub fn validate(&self) -> Result<(), String> {
        for (name, p) in [("p1", self.p1), ("p2", self.p2), ("p3_hat", self.p3_hat), ("p4_hat", self.p4_hat)] {
            if p > 100 {
                return Err(format!("{name} = {p} is not a percentage"));
            }
        }
        if self.granularity == 0 {
            return Err("granularity must be at least 1".into());
        }
        if self.i_max == 0 {
            return Err("i_max must be at least 1".into());
        }
        if self.t_max.is_nan() || self.t_max < 0.0 {
            return Err("t_max must be non-negative".into());
        }
        Ok(())
    }
}

/// Per-run figures. Times vary between executions; everything else is
/// reproducible from the seed when the iteration budget binds.
#[derive(Debug, Clone, Default, Serialize)]
pub struct RunStats {
    pub seed: u64,
    pub best_cost: Option<i64>,
    /// Seconds until the best solution was found.
    pub time_to_best: f64,
    pub iteration_of_best: u64,
    pub iterations: u64,
    pub restarts: u64,
    pub construction_failures: u64,
    pub elapsed: f64,
}

#[derive(Debug, Clone)]
pub struct LnsResult {
    /// Best battery-feasible solution, if any was found.
    pub solution: Option<Solution>,
    pub stats: RunStats,
}

/// Runs the search on `inst` with a freshly built multigraph.
pub fn lns_run(inst: &Instance, params: &LnsParams) -> LnsResult {
    let graph = Multigraph::new(inst);
    lns_run_with(inst, &graph, params)
}

/// Runs the search on a prebuilt (reduced) multigraph.
pub fn lns_run_with(inst: &Instance, graph: &Multigraph, params: &LnsParams) -> LnsResult {
    let start = Instant::now();
    let budget = Duration::try_from_secs_f64(params.t_max).unwrap_or(Duration::MAX);
    let mut stats = RunStats {
        seed: params.seed,
        ..RunStats::default()
    };
    if inst.num_customers() == 0 {
        let sol = Solution::new(inst, Vec::new(), Vec::new()).expect("empty solution is valid");
        stats.best_cost = Some(0);
        return LnsResult { solution: Some(sol), stats };
    }
    let closest = NeighborLists::new(inst, inst.num_customers());
    let neighbors = NeighborLists::new(inst, params.granularity);
    let mut state = SearchState::new(inst, graph, ChaCha8Rng::seed_from_u64(params.seed));
    let mut best: Option<(i64, Solution)> = None;

    let out_of_budget = |iterations: u64| {
        params.max_iterations.is_some_and(|m| iterations >= m) || start.elapsed() >= budget
    };
    let mut offer = |plan: &Plan, cost: i64, stats: &mut RunStats| {
        if plan.battery_feasible() && best.as_ref().is_none_or(|b| cost < b.0) {
            let sol = plan.to_solution(inst).expect("search keeps vertices valid");
            debug_assert_eq!(sol.total_cost(), cost);
            stats.best_cost = Some(cost);
            stats.time_to_best = start.elapsed().as_secs_f64();
            stats.iteration_of_best = stats.iterations;
            debug!("seed {}: new best {} at iteration {}", params.seed, cost, stats.iterations);
            best = Some((cost, sol));
        }
    };

    while !out_of_budget(stats.iterations) {
        state.plan = Plan::empty(inst);
        state.pending = inst.customer_vertices().collect();
        stats.iterations += 1;
        if let Err(e) = state.repair() {
            debug!("seed {}: construction failed: {e}", params.seed);
            stats.construction_failures += 1;
            stats.restarts += 1;
            continue;
        }
        local_search(inst, graph, &neighbors, &mut state.plan, &mut state.rng);
        let mut current = state.plan.objective(inst);
        offer(&state.plan, current, &mut stats);

        let mut idle = 0;
        while idle < params.i_max && !out_of_budget(stats.iterations) {
            stats.iterations += 1;
            let saved = state.plan.clone();
            match state.rng.random_range(0..3) {
                0 => {
                    state.destroy_related(params.p1, &closest);
                }
                1 => {
                    state.destroy_routes(params.p2);
                }
                _ => {
                    state.close_satellite();
                }
            }
            state.open_all_satellites(params.p3_hat);
            state.remove_singleton_routes(params.p4_hat);
            if state.repair().is_err() {
                stats.construction_failures += 1;
                state.plan = saved;
                state.pending.clear();
                idle += 1;
                continue;
            }
            local_search(inst, graph, &neighbors, &mut state.plan, &mut state.rng);
            let cost = state.plan.objective(inst);
            if cost < current {
                current = cost;
                idle = 0;
                offer(&state.plan, cost, &mut stats);
            } else {
                state.plan = saved;
                idle += 1;
            }
        }
        stats.restarts += 1;
    }
    stats.elapsed = start.elapsed().as_secs_f64();
    info!(
        "seed {}: best {:?} after {} iterations, {} restarts",
        params.seed, stats.best_cost, stats.iterations, stats.restarts
    );
    LnsResult {
        solution: best.map(|b| b.1),
        stats,
    }
}

/// Builds one solution: construction, first level, stops and local search.
pub fn construct(inst: &Instance, graph: &Multigraph, granularity: usize, seed: u64) -> Result<Plan, SolveError> {
    let mut state = SearchState::new(inst, graph, ChaCha8Rng::seed_from_u64(seed));
    state.repair()?;
    let neighbors = NeighborLists::new(inst, granularity);
    local_search(inst, graph, &neighbors, &mut state.plan, &mut state.rng);
    Ok(state.plan)
}
