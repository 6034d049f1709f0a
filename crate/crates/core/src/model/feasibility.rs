use std::fmt;

use serde::Serialize;

use super::{evaluate_cost, Instance, Solution, Vertex};

/// A single constraint violation found by [`check_feasibility`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    CustomerMissing { customer: u32 },
    CustomerRepeated { customer: u32, times: usize },
    InvalidVertex { route: usize, vertex: Vertex },
    EmptyRoute { route: usize },
    LoadMismatch { route: usize, declared: u32, actual: u32 },
    SecondLevelOverload { route: usize, load: u32 },
    FirstLevelOverload { route: usize, load: u64 },
    RepeatedSatellite { route: usize, satellite: u32 },
    ZeroDelivery { route: usize, satellite: u32 },
    FlowImbalance { satellite: u32, received: u64, dispatched: u64 },
    SatelliteCapacity { satellite: u32, load: u64, capacity: u32 },
    FirstLevelFleet { used: usize, available: u32 },
    SecondLevelFleet { used: usize, available: u32 },
    SatelliteFleet { satellite: u32, used: usize, available: u32 },
    BatteryExceeded { route: usize, position: usize, consumption: i64 },
    ConsecutiveStations { route: usize, position: usize },
    CostMismatch { field: &'static str, declared: i64, actual: i64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            CustomerMissing { customer } => write!(f, "customer {customer} not visited"),
            CustomerRepeated { customer, times } => {
                write!(f, "customer {customer} visited {times} times")
            }
            InvalidVertex { route, vertex } => {
                write!(f, "second-level route {route}: vertex {vertex} cannot be visited")
            }
            EmptyRoute { route } => write!(f, "second-level route {route} serves no customer"),
            LoadMismatch { route, declared, actual } => write!(
                f,
                "second-level route {route}: declared load {declared}, actual {actual}"
            ),
            SecondLevelOverload { route, load } => {
                write!(f, "second-level route {route}: load {load} exceeds Q2")
            }
            FirstLevelOverload { route, load } => {
                write!(f, "first-level route {route}: load {load} exceeds Q1")
            }
            RepeatedSatellite { route, satellite } => {
                write!(f, "first-level route {route} visits satellite {satellite} twice")
            }
            ZeroDelivery { route, satellite } => write!(
                f,
                "first-level route {route} delivers nothing to satellite {satellite}"
            ),
            FlowImbalance { satellite, received, dispatched } => write!(
                f,
                "satellite {satellite}: received {received} but dispatched {dispatched}"
            ),
            SatelliteCapacity { satellite, load, capacity } => write!(
                f,
                "satellite {satellite}: load {load} exceeds capacity {capacity}"
            ),
            FirstLevelFleet { used, available } => {
                write!(f, "{used} first-level routes but only {available} vehicles")
            }
            SecondLevelFleet { used, available } => {
                write!(f, "{used} second-level routes but only {available} vehicles")
            }
            SatelliteFleet { satellite, used, available } => write!(
                f,
                "satellite {satellite}: {used} routes but only {available} vehicles"
            ),
            BatteryExceeded { route, position, consumption } => write!(
                f,
                "battery exceeded on second-level route {route} at position {position} (consumption {consumption})"
            ),
            ConsecutiveStations { route, position } => write!(
                f,
                "consecutive stations on second-level route {route} at position {position}"
            ),
            CostMismatch { field, declared, actual } => {
                write!(f, "cost field {field}: declared {declared}, recomputed {actual}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Verifies every constraint of the problem on `sol`: coverage, capacities,
/// flow balance, fleet limits, battery traces and the declared costs.
pub fn check_feasibility(inst: &Instance, sol: &Solution) -> Verdict {
    let mut out = Vec::new();
    let nv = inst.num_vertices();
    let mut visits = vec![0usize; nv];
    let mut dispatched = vec![0u64; nv];
    let mut routes_at = vec![0usize; nv];
    let limit = inst.battery_limit();

    for (ri, r) in sol.second_level.iter().enumerate() {
        if r.satellite >= nv || !inst.is_satellite(r.satellite) {
            out.push(Violation::InvalidVertex { route: ri, vertex: r.satellite });
            continue;
        }
        routes_at[r.satellite] += 1;
        let mut load = 0u32;
        let mut served = 0usize;
        let mut usable = true;
        for &v in &r.visits {
            if v >= nv || v == inst.depot() {
                out.push(Violation::InvalidVertex { route: ri, vertex: v });
                usable = false;
            } else if inst.is_customer(v) {
                visits[v] += 1;
                load += inst.demand(v);
                served += 1;
            }
        }
        if served == 0 {
            out.push(Violation::EmptyRoute { route: ri });
        }
        if load != r.load {
            out.push(Violation::LoadMismatch { route: ri, declared: r.load, actual: load });
        }
        if load > inst.q2_capacity {
            out.push(Violation::SecondLevelOverload { route: ri, load });
        }
        dispatched[r.satellite] += load as u64;
        if !usable {
            continue;
        }

        // Battery trace: start full at the satellite, recharge at each stop.
        let mut w = 0i64;
        let mut prev = r.satellite;
        let mut prev_station = false;
        for (pos, &v) in r.visits.iter().chain(std::iter::once(&r.satellite)).enumerate() {
            w += inst.energy(prev, v);
            if w > limit {
                out.push(Violation::BatteryExceeded { route: ri, position: pos, consumption: w });
            }
            let at_end = pos == r.visits.len();
            let station = !at_end && inst.is_charging_point(v);
            if station {
                if prev_station {
                    out.push(Violation::ConsecutiveStations { route: ri, position: pos });
                }
                w = 0;
            }
            prev_station = station;
            prev = v;
        }
    }

    for v in inst.customer_vertices() {
        let id = inst.external_id(v);
        match visits[v] {
            0 => out.push(Violation::CustomerMissing { customer: id }),
            1 => {}
            n => out.push(Violation::CustomerRepeated { customer: id, times: n }),
        }
    }

    let mut received = vec![0u64; nv];
    for (ri, r) in sol.first_level.iter().enumerate() {
        let mut seen = Vec::with_capacity(r.deliveries.len());
        let mut load = 0u64;
        for d in &r.deliveries {
            if d.satellite >= nv || !inst.is_satellite(d.satellite) {
                out.push(Violation::InvalidVertex { route: ri, vertex: d.satellite });
                continue;
            }
            let sid = inst.external_id(d.satellite);
            if seen.contains(&d.satellite) {
                out.push(Violation::RepeatedSatellite { route: ri, satellite: sid });
            }
            seen.push(d.satellite);
            if d.quantity == 0 {
                out.push(Violation::ZeroDelivery { route: ri, satellite: sid });
            }
            load += d.quantity as u64;
            received[d.satellite] += d.quantity as u64;
        }
        if load > inst.q1_capacity as u64 {
            out.push(Violation::FirstLevelOverload { route: ri, load });
        }
    }

    for k in inst.satellite_vertices() {
        let sat = inst.satellite(k);
        if received[k] != dispatched[k] {
            out.push(Violation::FlowImbalance {
                satellite: sat.id,
                received: received[k],
                dispatched: dispatched[k],
            });
        }
        if let Some(cap) = sat.capacity {
            if dispatched[k] > cap as u64 {
                out.push(Violation::SatelliteCapacity { satellite: sat.id, load: dispatched[k], capacity: cap });
            }
        }
        if routes_at[k] > sat.vehicles as usize {
            out.push(Violation::SatelliteFleet {
                satellite: sat.id,
                used: routes_at[k],
                available: sat.vehicles,
            });
        }
    }
    if sol.first_level.len() > inst.m1_fleet as usize {
        out.push(Violation::FirstLevelFleet { used: sol.first_level.len(), available: inst.m1_fleet });
    }
    if sol.second_level.len() > inst.m2_global as usize {
        out.push(Violation::SecondLevelFleet { used: sol.second_level.len(), available: inst.m2_global });
    }

    if let Ok(actual) = evaluate_cost(inst, sol) {
        let fields = [
            ("first_level_distance", sol.cost.first_level_distance, actual.first_level_distance),
            ("second_level_distance", sol.cost.second_level_distance, actual.second_level_distance),
            ("fixed_cost", sol.cost.fixed_cost, actual.fixed_cost),
            ("total", sol.cost.total, actual.total),
        ];
        for (field, declared, actual) in fields {
            if declared != actual {
                out.push(Violation::CostMismatch { field, declared, actual });
            }
        }
    }

    Verdict { violations: out }
}
