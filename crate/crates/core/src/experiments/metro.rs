use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{ConsumptionFactor, Customer, Instance, InstanceData, Point, Satellite, Station};

/// How the ellipse extents are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisConvention {
    /// Extents are full axis lengths (semi-axes are half of them).
    #[default]
    FullLength,
    /// Extents are semi-axes.
    SemiAxis,
}

/// Parameters of the metropolitan-style generator. Customers, demands and
/// satellites depend on `seed` only; stations form a seed-determined list of
/// which the first `stations` entries are used, so levels of a sweep differ
/// only in the varied feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MetroGenConfig {
    pub seed: u64,
    pub stations: usize,
    /// `None` for an unlimited battery.
    pub battery: Option<u32>,
    pub center: (i64, i64),
    pub inner_extent: (i64, i64),
    pub outer_extent: (i64, i64),
    pub axes: AxisConvention,
    pub depot: (i64, i64),
    pub inner_customers: usize,
    pub outer_customers: usize,
    pub satellites: usize,
    pub demand_range: (u32, u32),
    pub q1: u32,
    pub m1: u32,
    pub q2: u32,
    pub vehicles_per_satellite: u32,
    /// Every `outer_station_every`-th station is drawn in the outer ellipse,
    /// the others in the inner one.
    pub outer_station_every: usize,
}

impl Default for MetroGenConfig {
    fn default() -> Self {
        MetroGenConfig {
            seed: 1,
            stations: 20,
            battery: Some(1000),
            center: (1000, 500),
            inner_extent: (800, 400),
            outer_extent: (1000, 500),
            axes: AxisConvention::FullLength,
            depot: (300, 0),
            inner_customers: 40,
            outer_customers: 10,
            satellites: 4,
            demand_range: (1, 25),
            q1: 250,
            m1: 6,
            q2: 125,
            vehicles_per_satellite: 10,
            outer_station_every: 5,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Ellipse {
    cx: i64,
    cy: i64,
    a: i64,
    b: i64,
}

impl Ellipse {
    fn new(center: (i64, i64), extent: (i64, i64), axes: AxisConvention) -> Self {
        let (a, b) = match axes {
            AxisConvention::FullLength => (extent.0 / 2, extent.1 / 2),
            AxisConvention::SemiAxis => extent,
        };
        Ellipse { cx: center.0, cy: center.1, a: a.max(1), b: b.max(1) }
    }

    fn contains(&self, p: Point) -> bool {
        let (dx, dy) = ((p.x - self.cx) as i128, (p.y - self.cy) as i128);
        let (a2, b2) = ((self.a * self.a) as i128, (self.b * self.b) as i128);
        dx * dx * b2 + dy * dy * a2 <= a2 * b2
    }

    /// Uniform lattice point inside, by rejection from the bounding box.
    fn sample<R: Rng>(&self, rng: &mut R, outside: Option<&Ellipse>) -> Point {
        loop {
            let p = Point::new(
                rng.random_range(self.cx - self.a..=self.cx + self.a),
                rng.random_range(self.cy - self.b..=self.cy + self.b),
            );
            if self.contains(p) && !outside.is_some_and(|e| e.contains(p)) {
                return p;
            }
        }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates one instance. Identical configurations give identical instances.
pub fn generate_metro_instance(cfg: &MetroGenConfig) -> Result<Instance, ModelError> {
    let inner = Ellipse::new(cfg.center, cfg.inner_extent, cfg.axes);
    let outer = Ellipse::new(cfg.center, cfg.outer_extent, cfg.axes);
    if inner.a > outer.a || inner.b > outer.b {
        return Err(ModelError::Invalid("inner ellipse must lie inside the outer one".into()));
    }
    if cfg.demand_range.0 == 0 || cfg.demand_range.0 > cfg.demand_range.1 {
        return Err(ModelError::Invalid("demand range must be a non-empty range of positive values".into()));
    }
    let mut customers_rng = stream(cfg.seed, 0);
    let mut demand_rng = stream(cfg.seed, 1);
    let mut satellite_rng = stream(cfg.seed, 2);
    let mut station_rng = stream(cfg.seed, 3);

    let satellites: Vec<Satellite> = (0..cfg.satellites)
        .map(|k| Satellite {
            id: 1 + k as u32,
            location: outer.sample(&mut satellite_rng, Some(&inner)),
            capacity: None,
            vehicles: cfg.vehicles_per_satellite,
        })
        .collect();
    let first_customer = 1 + cfg.satellites as u32;
    let n_c = cfg.inner_customers + cfg.outer_customers;
    let customers: Vec<Customer> = (0..n_c)
        .map(|c| {
            let region = if c < cfg.inner_customers { &inner } else { &outer };
            Customer {
                id: first_customer + c as u32,
                location: region.sample(&mut customers_rng, None),
                demand: demand_rng.random_range(cfg.demand_range.0..=cfg.demand_range.1),
            }
        })
        .collect();
    let first_station = first_customer + n_c as u32;
    let every = cfg.outer_station_every.max(1);
    let stations: Vec<Station> = (0..cfg.stations)
        .map(|r| {
            let region = if r % every == every - 1 { &outer } else { &inner };
            Station {
                id: first_station + r as u32,
                location: region.sample(&mut station_rng, None),
            }
        })
        .collect();
    let battery = cfg.battery.map_or("inf".to_string(), |l| l.to_string());
    Instance::new(InstanceData {
        name: format!("metro-s{}-r{}-L{}", cfg.seed, cfg.stations, battery),
        depot: Point::new(cfg.depot.0, cfg.depot.1),
        satellites,
        customers,
        stations,
        q1_capacity: cfg.q1,
        m1_fleet: cfg.m1,
        q2_capacity: cfg.q2,
        m2_global: cfg.vehicles_per_satellite * cfg.satellites as u32,
        battery_capacity: cfg.battery,
        fixed_cost_l1: 0,
        fixed_cost_l2: 0,
        consumption_factor: ConsumptionFactor::ONE,
    })
}
