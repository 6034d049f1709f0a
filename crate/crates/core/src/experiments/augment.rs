use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{rounded_distance, ConsumptionFactor, InstanceData, Instance, Point, Station};

/// Grid side of the candidate station locations.
pub const GRID: usize = 100;
const SCALE: i64 = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Average second-level route length of a reference solution, in the
    /// units of the base instance (before scaling).
    pub gamma1: f64,
    /// Stations per customer; the count is clamped to `[n_c/10, n_c/5]`.
    pub station_ratio: f64,
    pub seed: u64,
}

/// Number of explicit stations (the depot one included).
pub fn station_count(n_customers: usize, ratio: f64) -> usize {
    let lo = n_customers.div_ceil(10);
    let hi = (n_customers / 5).max(lo);
    ((ratio * n_customers as f64).round() as usize).clamp(lo, hi)
}

/// Turns a classical two-echelon instance into an electric one.
///
/// Coordinates are multiplied by ten. A station is put at the depot
/// (satellites recharge by definition) and the others are drawn without
/// replacement from a 100x100 grid spanning the coordinates, by roulette
/// wheel with weight equal to the number of customers within `5 * gamma1`
/// (half the scaled reference route length). The battery is
/// `L = max(ceil(6 * gamma1), 2 * gamma2)`, `gamma2` being the largest
/// distance from a customer to its nearest charging point.
pub fn augment_2evrp_instance(base: &InstanceData, cfg: &AugmentConfig) -> Result<Instance, ModelError> {
    if !(cfg.gamma1 > 0.0 && cfg.gamma1.is_finite()) {
        return Err(ModelError::Invalid("gamma1 must be positive".into()));
    }
    if !(cfg.station_ratio > 0.0 && cfg.station_ratio <= 1.0) {
        return Err(ModelError::Invalid("station ratio must lie in (0, 1]".into()));
    }
    let scale = |p: Point| Point::new(p.x * SCALE, p.y * SCALE);
    let mut data = base.clone();
    data.depot = scale(data.depot);
    for s in &mut data.satellites {
        s.location = scale(s.location);
    }
    for c in &mut data.customers {
        c.location = scale(c.location);
    }
    data.stations.clear();
    data.consumption_factor = ConsumptionFactor::ONE;

    let all: Vec<Point> = std::iter::once(data.depot)
        .chain(data.satellites.iter().map(|s| s.location))
        .chain(data.customers.iter().map(|c| c.location))
        .collect();
    let (min_x, max_x) = (all.iter().map(|p| p.x).min().unwrap(), all.iter().map(|p| p.x).max().unwrap());
    let (min_y, max_y) = (all.iter().map(|p| p.y).min().unwrap(), all.iter().map(|p| p.y).max().unwrap());
    let axis = |lo: i64, hi: i64, i: usize| lo + ((hi - lo) as i128 * i as i128 / (GRID as i128 - 1)) as i64;
    let radius = (cfg.gamma1 * SCALE as f64 / 2.0).round() as i64;
    let mut candidates = Vec::with_capacity(GRID * GRID);
    for i in 0..GRID {
        for j in 0..GRID {
            let p = Point::new(axis(min_x, max_x, i), axis(min_y, max_y, j));
            let w = data
                .customers
                .iter()
                .filter(|c| rounded_distance(p, c.location) <= radius)
                .count() as u64;
            candidates.push((p, w));
        }
    }

    let mut next_id = all_ids(&data).max().unwrap_or(0) + 1;
    let mut station = |location| {
        next_id += 1;
        Station { id: next_id - 1, location }
    };
    data.stations.push(station(data.depot));
    let wanted = station_count(data.customers.len(), cfg.station_ratio);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    while data.stations.len() < wanted && !candidates.is_empty() {
        let total: u64 = candidates.iter().map(|c| c.1).sum();
        let pick = if total == 0 {
            rng.random_range(0..candidates.len())
        } else {
            let mut ticket = rng.random_range(0..total);
            candidates
                .iter()
                .position(|c| {
                    if ticket < c.1 {
                        true
                    } else {
                        ticket -= c.1;
                        false
                    }
                })
                .expect("ticket below total weight")
        };
        let (p, _) = candidates.swap_remove(pick);
        if data.stations.iter().any(|s| s.location == p) {
            continue;
        }
        data.stations.push(station(p));
    }

    let chargers: Vec<Point> = data
        .satellites
        .iter()
        .map(|s| s.location)
        .chain(data.stations.iter().map(|s| s.location))
        .collect();
    let gamma2 = data
        .customers
        .iter()
        .map(|c| chargers.iter().map(|&k| rounded_distance(c.location, k)).min().unwrap_or(0))
        .max()
        .unwrap_or(0);
    let from_routes = (0.6 * cfg.gamma1 * SCALE as f64).ceil() as i64;
    let battery = from_routes.max(2 * gamma2).max(1);
    data.battery_capacity = Some(u32::try_from(battery).map_err(|_| ModelError::Invalid("battery too large".into()))?);
    data.name = format!("{}-e", base.name);
    Instance::new(data)
}

fn all_ids(d: &InstanceData) -> impl Iterator<Item = u32> + '_ {
    d.satellites
        .iter()
        .map(|s| s.id)
        .chain(d.customers.iter().map(|c| c.id))
        .chain(d.stations.iter().map(|s| s.id))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Customer, Satellite};

    fn base(n_c: usize) -> InstanceData {
        InstanceData {
            name: "base".into(),
            depot: Point::new(0, 0),
            satellites: vec![Satellite { id: 1, location: Point::new(50, 50), capacity: None, vehicles: 5 }],
            customers: (0..n_c)
                .map(|c| Customer {
                    id: 2 + c as u32,
                    location: Point::new((c as i64 * 37) % 100, (c as i64 * 53) % 100),
                    demand: 5,
                })
                .collect(),
            stations: Vec::new(),
            q1_capacity: 200,
            m1_fleet: 3,
            q2_capacity: 50,
            m2_global: 5,
            battery_capacity: None,
            fixed_cost_l1: 0,
            fixed_cost_l2: 0,
            consumption_factor: ConsumptionFactor::ONE,
        }
    }

    #[test]
    fn counts_are_clamped() {
        assert_eq!(station_count(100, 0.01), 10);
        assert_eq!(station_count(100, 0.15), 15);
        assert_eq!(station_count(100, 0.9), 20);
        assert_eq!(station_count(21, 0.15), 3);
    }

    #[test]
    fn augmented_instance_rules() {
        let b = base(100);
        let cfg = AugmentConfig { gamma1: 120.0, station_ratio: 0.15, seed: 4 };
        let inst = augment_2evrp_instance(&b, &cfg).unwrap();
        assert_eq!(inst.num_stations(), 15);
        assert_eq!(inst.stations[0].location, inst.depot);
        assert_eq!(inst.customers[1].location, Point::new(370, 530));
        let l = i64::from(inst.battery_capacity.unwrap());
        assert!(l >= 720);
        let gamma2 = inst
            .customer_vertices()
            .map(|c| inst.charging_points().map(|k| inst.dist(c, k)).min().unwrap())
            .max()
            .unwrap();
        assert!(l >= 2 * gamma2);
        let again = augment_2evrp_instance(&b, &cfg).unwrap();
        assert_eq!(inst, again);
    }

    #[test]
    fn rejects_bad_parameters() {
        let b = base(10);
        assert!(augment_2evrp_instance(&b, &AugmentConfig { gamma1: 0.0, station_ratio: 0.1, seed: 1 }).is_err());
        assert!(augment_2evrp_instance(&b, &AugmentConfig { gamma1: 5.0, station_ratio: 1.5, seed: 1 }).is_err());
    }
}
