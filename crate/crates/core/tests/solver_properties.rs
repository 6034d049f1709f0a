mod common;

use common::{brute_force_charging, random_instance, RandomSpec};
use e2evrp_core::{
    check_feasibility, insert_stations, lns_run_with, ng_lower_bound, parse_instance, parse_solution,
    price_ng_routes, write_instance, write_solution, LnsParams, Multigraph, NgLimits, NgSets,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_spec() -> RandomSpec {
    RandomSpec {
        satellites: 1..=3,
        customers: 3..=9,
        stations: 1..=4,
        battery: 1500..=3000,
        q2: 30,
        fixed: (40, 25),
        ..RandomSpec::default()
    }
}

#[test]
fn lower_bound_never_exceeds_search_cost() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..100 {
        let inst = random_instance(&mut rng, &small_spec());
        let graph = Multigraph::new(&inst);
        let ng = NgSets::nearest(&inst, 4.min(inst.num_customers())).unwrap();
        let report = ng_lower_bound(&inst, &graph, &ng, NgLimits::default()).unwrap();
        let params = LnsParams { max_iterations: Some(150), t_max: 1e9, seed: i, ..LnsParams::default() };
        if let Some(sol) = lns_run_with(&inst, &graph, &params).solution {
            assert!(report.bound <= sol.total_cost(), "instance {i}: {} > {}", report.bound, sol.total_cost());
        }
    }
}

#[test]
fn larger_memory_tightens_pricing() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..40 {
        let inst = random_instance(&mut rng, &small_spec());
        let graph = Multigraph::new(&inst);
        let sat = inst.satellite_vertex(0);
        let tables: Vec<_> = (1..=inst.num_customers())
            .map(|d| price_ng_routes(&inst, &graph, sat, &NgSets::nearest(&inst, d).unwrap(), NgLimits::default()).unwrap())
            .collect();
        for pair in tables.windows(2) {
            for q in 0..=inst.q2_capacity {
                for c in inst.customer_vertices() {
                    match (pair[0].value(q, c), pair[1].value(q, c)) {
                        (Some(a), Some(b)) => assert!(a <= b),
                        (None, Some(_)) => panic!("smaller memory lost a route"),
                        _ => {}
                    }
                }
            }
        }
    }
}

#[test]
fn insertion_feasibility_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let spec = RandomSpec { battery: 200..=1200, ..RandomSpec::default() };
    for _ in 0..300 {
        let inst = random_instance(&mut rng, &spec);
        let graph = Multigraph::new(&inst);
        let mut cs: Vec<_> = inst.customer_vertices().collect();
        cs.shuffle(&mut rng);
        let sat = rng.random_range(inst.satellite_vertices());
        let got = insert_stations(&inst, &graph, sat, &cs);
        match brute_force_charging(&inst, sat, &cs) {
            Some(cost) => assert!(got.feasible && got.cost == cost),
            None => assert!(!got.feasible && got.penalty > 0),
        }
    }
}

#[test]
fn files_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for i in 0..20 {
        let inst = random_instance(&mut rng, &small_spec());
        let text = write_instance(&inst);
        let back = parse_instance(&text).unwrap();
        assert_eq!(write_instance(&back), text);
        let graph = Multigraph::new(&back);
        let params = LnsParams { max_iterations: Some(50), t_max: 1e9, seed: i, ..LnsParams::default() };
        if let Some(sol) = lns_run_with(&back, &graph, &params).solution {
            let parsed = parse_solution(&back, &write_solution(&back, &sol)).unwrap();
            assert_eq!(parsed, sol);
            assert!(check_feasibility(&back, &parsed).is_ok());
        }
    }
}
