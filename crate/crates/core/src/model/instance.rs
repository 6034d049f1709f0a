use std::collections::HashMap;
use std::fmt;
use std::ops::{Deref, Range};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{rounded_distance, Point, Vertex};
use crate::error::ModelError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Satellite {
    pub id: u32,
    pub location: Point,
    /// Maximum demand deliverable through this satellite; `None` is unbounded.
    pub capacity: Option<u32>,
    /// Second-level vehicles stationed here.
    pub vehicles: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Customer {
    pub id: u32,
    pub location: Point,
    pub demand: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Station {
    pub id: u32,
    pub location: Point,
}

/// Rational multiplier mapping distance to battery consumption.
///
/// Consumption is tracked in integer energy units of `1/den`: an arc of
/// distance `d` consumes `d * num` units and the battery holds `L * den`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ConsumptionFactor {
    num: u32,
    den: u32,
}

impl ConsumptionFactor {
    pub const ONE: ConsumptionFactor = ConsumptionFactor { num: 1, den: 1 };

    pub fn new(num: u32, den: u32) -> Result<Self, ModelError> {
        if num == 0 || den == 0 {
            return Err(ModelError::Invalid(format!(
                "consumption factor {num}/{den} must be positive"
            )));
        }
        let g = gcd(num, den);
        Ok(ConsumptionFactor {
            num: num / g,
            den: den / g,
        })
    }

    pub fn numerator(&self) -> u32 {
        self.num
    }

    pub fn denominator(&self) -> u32 {
        self.den
    }

    pub fn as_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

impl Default for ConsumptionFactor {
    fn default() -> Self {
        ConsumptionFactor::ONE
    }
}

impl fmt::Display for ConsumptionFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for ConsumptionFactor {
    type Err = ModelError;

    /// Accepts `3`, `3/2` or a short decimal such as `1.25`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Invalid(format!("malformed consumption factor `{s}`"));
        if let Some((n, d)) = s.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return ConsumptionFactor::new(n, d);
        }
        if let Some((int, frac)) = s.split_once('.') {
            if frac.len() > 6 || !frac.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let den = 10u32.pow(frac.len() as u32);
            let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
            let frac: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
            let num = int.checked_mul(den).and_then(|v| v.checked_add(frac)).ok_or_else(bad)?;
            return ConsumptionFactor::new(num, den);
        }
        ConsumptionFactor::new(s.parse().map_err(|_| bad())?, 1)
    }
}

fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Raw problem data as read from an instance file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceData {
    pub name: String,
    pub depot: Point,
    pub satellites: Vec<Satellite>,
    pub customers: Vec<Customer>,
    pub stations: Vec<Station>,
    pub q1_capacity: u32,
    pub m1_fleet: u32,
    pub q2_capacity: u32,
    pub m2_global: u32,
    /// Battery capacity `L`; `None` removes the battery constraint entirely.
    pub battery_capacity: Option<u32>,
    pub fixed_cost_l1: i64,
    pub fixed_cost_l2: i64,
    pub consumption_factor: ConsumptionFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Depot,
    Satellite(usize),
    Customer(usize),
    Station(usize),
}

/// Validated, immutable problem instance with a cached distance matrix.
#[derive(Debug, Clone)]
pub struct Instance {
    data: InstanceData,
    n: usize,
    dist: Vec<i64>,
    total_demand: u64,
    big_m: i64,
    by_id: HashMap<u32, Vertex>,
}

impl Deref for Instance {
    type Target = InstanceData;

    fn deref(&self) -> &InstanceData {
        &self.data
    }
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.data == other.data
    }
}

/// Energy value used for the battery limit when the battery is unconstrained.
pub const UNLIMITED_ENERGY: i64 = i64::MAX / 4;

impl Instance {
    pub fn new(data: InstanceData) -> Result<Self, ModelError> {
        validate(&data)?;
        let points: Vec<Point> = std::iter::once(data.depot)
            .chain(data.satellites.iter().map(|s| s.location))
            .chain(data.customers.iter().map(|c| c.location))
            .chain(data.stations.iter().map(|s| s.location))
            .collect();
        let n = points.len();
        let mut dist = vec![0i64; n * n];
        let mut sum = 0i64;
        for i in 0..n {
            for j in 0..n {
                let d = rounded_distance(points[i], points[j]);
                dist[i * n + j] = d;
                sum += d;
            }
        }
        let total_demand = data.customers.iter().map(|c| c.demand as u64).sum();
        let mut by_id = HashMap::with_capacity(n);
        by_id.insert(0, 0);
        let ids = data
            .satellites
            .iter()
            .map(|s| s.id)
            .chain(data.customers.iter().map(|c| c.id))
            .chain(data.stations.iter().map(|s| s.id));
        for (v, id) in ids.enumerate() {
            if by_id.insert(id, v + 1).is_some() {
                return Err(ModelError::Invalid(format!("duplicate id {id}")));
            }
        }
        Ok(Instance {
            data,
            n,
            dist,
            total_demand,
            big_m: sum + 1,
            by_id,
        })
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    /// Copy of this instance with a different battery capacity.
    pub fn with_battery(&self, battery: Option<u32>) -> Result<Instance, ModelError> {
        let mut data = self.data.clone();
        data.battery_capacity = battery;
        Instance::new(data)
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_satellites(&self) -> usize {
        self.data.satellites.len()
    }

    pub fn num_customers(&self) -> usize {
        self.data.customers.len()
    }

    pub fn num_stations(&self) -> usize {
        self.data.stations.len()
    }

    pub const fn depot(&self) -> Vertex {
        0
    }

    pub fn satellite_vertices(&self) -> Range<Vertex> {
        1..1 + self.num_satellites()
    }

    pub fn customer_vertices(&self) -> Range<Vertex> {
        let s = 1 + self.num_satellites();
        s..s + self.num_customers()
    }

    pub fn station_vertices(&self) -> Range<Vertex> {
        let s = 1 + self.num_satellites() + self.num_customers();
        s..self.n
    }

    pub fn satellite_vertex(&self, k: usize) -> Vertex {
        1 + k
    }

    pub fn customer_vertex(&self, c: usize) -> Vertex {
        1 + self.num_satellites() + c
    }

    pub fn kind(&self, v: Vertex) -> VertexKind {
        let ns = self.num_satellites();
        let nc = self.num_customers();
        if v == 0 {
            VertexKind::Depot
        } else if v <= ns {
            VertexKind::Satellite(v - 1)
        } else if v <= ns + nc {
            VertexKind::Customer(v - 1 - ns)
        } else {
            VertexKind::Station(v - 1 - ns - nc)
        }
    }

    pub fn is_satellite(&self, v: Vertex) -> bool {
        (1..=self.num_satellites()).contains(&v)
    }

    pub fn is_customer(&self, v: Vertex) -> bool {
        self.customer_vertices().contains(&v)
    }

    /// True for vertices where a second-level vehicle can recharge: explicit
    /// stations and every satellite.
    pub fn is_charging_point(&self, v: Vertex) -> bool {
        self.is_satellite(v) || self.station_vertices().contains(&v)
    }

    pub fn charging_points(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.satellite_vertices().chain(self.station_vertices())
    }

    pub fn location(&self, v: Vertex) -> Point {
        match self.kind(v) {
            VertexKind::Depot => self.data.depot,
            VertexKind::Satellite(k) => self.data.satellites[k].location,
            VertexKind::Customer(c) => self.data.customers[c].location,
            VertexKind::Station(r) => self.data.stations[r].location,
        }
    }

    pub fn external_id(&self, v: Vertex) -> u32 {
        match self.kind(v) {
            VertexKind::Depot => 0,
            VertexKind::Satellite(k) => self.data.satellites[k].id,
            VertexKind::Customer(c) => self.data.customers[c].id,
            VertexKind::Station(r) => self.data.stations[r].id,
        }
    }

    pub fn vertex_of_id(&self, id: u32) -> Option<Vertex> {
        self.by_id.get(&id).copied()
    }

    /// Demand of a customer vertex, zero for every other vertex.
    pub fn demand(&self, v: Vertex) -> u32 {
        match self.kind(v) {
            VertexKind::Customer(c) => self.data.customers[c].demand,
            _ => 0,
        }
    }

    pub fn satellite(&self, v: Vertex) -> &Satellite {
        &self.data.satellites[v - 1]
    }

    #[inline]
    pub fn dist(&self, a: Vertex, b: Vertex) -> i64 {
        self.dist[a * self.n + b]
    }

    /// Battery consumption of the direct leg `a -> b`, in energy units.
    #[inline]
    pub fn energy(&self, a: Vertex, b: Vertex) -> i64 {
        self.dist(a, b) * self.data.consumption_factor.numerator() as i64
    }

    /// Battery capacity in energy units.
    pub fn battery_limit(&self) -> i64 {
        match self.data.battery_capacity {
            Some(l) => l as i64 * self.data.consumption_factor.denominator() as i64,
            None => UNLIMITED_ENERGY,
        }
    }

    pub fn battery_unlimited(&self) -> bool {
        self.data.battery_capacity.is_none()
    }

    pub fn total_demand(&self) -> u64 {
        self.total_demand
    }

    /// Penalty weight per unit of battery excess: one more than the sum of
    /// all ordered-pair distances, so it exceeds any route length.
    pub fn big_m(&self) -> i64 {
        self.big_m
    }

    /// Lower bound on the number of second-level routes, `ceil(q_tot / Q2)`.
    pub fn min_routes(&self) -> u64 {
        self.total_demand.div_ceil(self.data.q2_capacity as u64)
    }
}

fn validate(d: &InstanceData) -> Result<(), ModelError> {
    let invalid = |m: String| Err(ModelError::Invalid(m));
    if d.q2_capacity == 0 || d.q2_capacity >= d.q1_capacity {
        return invalid(format!(
            "second-level capacity {} must be positive and below first-level capacity {}",
            d.q2_capacity, d.q1_capacity
        ));
    }
    if d.m1_fleet == 0 {
        return invalid("first-level fleet must be at least 1".into());
    }
    if d.m2_global == 0 {
        return invalid("second-level fleet must be at least 1".into());
    }
    if d.battery_capacity == Some(0) {
        return invalid("battery capacity must be positive".into());
    }
    if d.fixed_cost_l1 < 0 || d.fixed_cost_l2 < 0 {
        return invalid("fixed costs must be non-negative".into());
    }
    if d.satellites.is_empty() && !d.customers.is_empty() {
        return invalid("customers without any satellite".into());
    }
    for c in &d.customers {
        if c.demand == 0 {
            return invalid(format!("customer {} has zero demand", c.id));
        }
        if c.demand > d.q2_capacity {
            return invalid(format!(
                "customer {} demand {} exceeds Q2 {}",
                c.id, c.demand, d.q2_capacity
            ));
        }
    }
    let ids = d
        .satellites
        .iter()
        .map(|s| s.id)
        .chain(d.customers.iter().map(|c| c.id))
        .chain(d.stations.iter().map(|s| s.id));
    for id in ids {
        if id == 0 {
            return invalid("id 0 is reserved for the depot".into());
        }
    }
    Ok(())
}
