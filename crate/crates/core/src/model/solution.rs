use serde::{Deserialize, Serialize};

use super::{Instance, Vertex};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delivery {
    pub satellite: Vertex,
    pub quantity: u32,
}

/// Depot -> satellites -> depot cycle; split deliveries are allowed, so a
/// satellite may appear in several first-level routes.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FirstLevelRoute {
    pub deliveries: Vec<Delivery>,
}

impl FirstLevelRoute {
    pub fn load(&self) -> u64 {
        self.deliveries.iter().map(|d| d.quantity as u64).sum()
    }

    pub fn distance(&self, inst: &Instance) -> i64 {
        let mut prev = inst.depot();
        let mut total = 0;
        for d in &self.deliveries {
            total += inst.dist(prev, d.satellite);
            prev = d.satellite;
        }
        total + inst.dist(prev, inst.depot())
    }
}

/// Satellite -> customers / charging stops -> same satellite circuit.
///
/// `visits` excludes the satellite at both ends. A charging-point vertex in
/// `visits` (explicit station or satellite) is a recharge stop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SecondLevelRoute {
    pub satellite: Vertex,
    pub visits: Vec<Vertex>,
    pub load: u32,
}

impl SecondLevelRoute {
    pub fn customers<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = Vertex> + 'a {
        self.visits.iter().copied().filter(|&v| inst.is_customer(v))
    }

    pub fn station_visits(&self, inst: &Instance) -> usize {
        self.visits.iter().filter(|&&v| !inst.is_customer(v)).count()
    }

    pub fn distance(&self, inst: &Instance) -> i64 {
        let mut prev = self.satellite;
        let mut total = 0;
        for &v in &self.visits {
            total += inst.dist(prev, v);
            prev = v;
        }
        total + inst.dist(prev, self.satellite)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub first_level_distance: i64,
    pub second_level_distance: i64,
    pub fixed_cost: i64,
    pub total: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Solution {
    pub first_level: Vec<FirstLevelRoute>,
    pub second_level: Vec<SecondLevelRoute>,
    pub cost: CostBreakdown,
}

impl Solution {
    /// Builds a solution and fills in its cost breakdown.
    pub fn new(
        inst: &Instance,
        first_level: Vec<FirstLevelRoute>,
        second_level: Vec<SecondLevelRoute>,
    ) -> Result<Self, ModelError> {
        let mut sol = Solution {
            first_level,
            second_level,
            cost: CostBreakdown::default(),
        };
        sol.cost = evaluate_cost(inst, &sol)?;
        Ok(sol)
    }

    pub fn total_cost(&self) -> i64 {
        self.cost.total
    }

    pub fn station_visits(&self, inst: &Instance) -> usize {
        self.second_level.iter().map(|r| r.station_visits(inst)).sum()
    }
}

/// Recomputes the cost decomposition: traversed distances on both levels
/// plus `F1` per first-level route and `F2` per second-level route.
pub fn evaluate_cost(inst: &Instance, sol: &Solution) -> Result<CostBreakdown, ModelError> {
    let check = |v: Vertex| {
        if v < inst.num_vertices() {
            Ok(())
        } else {
            Err(ModelError::UnknownVertex(v))
        }
    };
    let mut first = 0;
    for r in &sol.first_level {
        for d in &r.deliveries {
            check(d.satellite)?;
            if !inst.is_satellite(d.satellite) {
                return Err(ModelError::WrongKind {
                    vertex: d.satellite,
                    expected: "satellite",
                });
            }
        }
        first += r.distance(inst);
    }
    let mut second = 0;
    for r in &sol.second_level {
        check(r.satellite)?;
        if !inst.is_satellite(r.satellite) {
            return Err(ModelError::WrongKind {
                vertex: r.satellite,
                expected: "satellite",
            });
        }
        for &v in &r.visits {
            check(v)?;
            if v == inst.depot() {
                return Err(ModelError::WrongKind {
                    vertex: v,
                    expected: "customer or charging station",
                });
            }
        }
        second += r.distance(inst);
    }
    let fixed = inst.fixed_cost_l1 * sol.first_level.len() as i64
        + inst.fixed_cost_l2 * sol.second_level.len() as i64;
    Ok(CostBreakdown {
        first_level_distance: first,
        second_level_distance: second,
        fixed_cost: fixed,
        total: first + second + fixed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Customer, InstanceData, Point, Satellite};
    use crate::model::ConsumptionFactor;

    fn line_instance(f2: i64) -> Instance {
        Instance::new(InstanceData {
            name: "line".into(),
            depot: Point::new(0, 0),
            satellites: vec![Satellite { id: 1, location: Point::new(0, 0), capacity: None, vehicles: 1 }],
            customers: vec![Customer { id: 2, location: Point::new(30, 40), demand: 1 }],
            stations: vec![],
            q1_capacity: 10,
            m1_fleet: 1,
            q2_capacity: 5,
            m2_global: 1,
            battery_capacity: Some(1000),
            fixed_cost_l1: 0,
            fixed_cost_l2: f2,
            consumption_factor: ConsumptionFactor::ONE,
        })
        .unwrap()
    }

    #[test]
    fn second_level_additivity() {
        for (f2, total) in [(0, 100), (7, 107)] {
            let inst = line_instance(f2);
            let route = SecondLevelRoute { satellite: 1, visits: vec![2], load: 1 };
            let sol = Solution::new(&inst, vec![], vec![route]).unwrap();
            assert_eq!(sol.cost.second_level_distance, 100);
            assert_eq!(sol.cost.total, total);
        }
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let inst = line_instance(0);
        let route = SecondLevelRoute { satellite: 1, visits: vec![99], load: 1 };
        assert!(Solution::new(&inst, vec![], vec![route]).is_err());
        let route = SecondLevelRoute { satellite: 2, visits: vec![], load: 0 };
        assert!(Solution::new(&inst, vec![], vec![route]).is_err());
    }
}
