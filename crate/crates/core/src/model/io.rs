//! Line-oriented text formats for instances and solutions.
//!
//! Instance file (`#` starts a comment, blank lines are ignored):
//!
//! ```text
//! NAME <string>
//! LEVEL1 <m1> <Q1> [<F1>]
//! LEVEL2 <m2_global> <Q2> <F2> <L|inf> [<consumption_factor>]
//! DEPOT <x> <y>
//! SATELLITES <n_s>
//! <id> <x> <y> <capacity|-> <m2_local>
//! CUSTOMERS <n_c>
//! <id> <x> <y> <demand>
//! STATIONS <n_r>
//! <id> <x> <y>
//! ```
//!
//! Solution file:
//!
//! ```text
//! INSTANCE <name>
//! L1: 0 <sat_id>:<qty> ... 0
//! L2: <sat_id> <vertex_id> ... <sat_id>
//! COST <first_level_distance> <second_level_distance> <fixed_cost> <total>
//! ```
//!
//! Station ids (and satellite ids used as charging stops) appear inline in
//! `L2` lines.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{
    ConsumptionFactor, CostBreakdown, Customer, Delivery, FirstLevelRoute, Instance, InstanceData,
    Point, Satellite, SecondLevelRoute, Solution, Station,
};
use crate::error::ModelError;

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines {
            inner: text.lines().enumerate(),
        }
    }

    /// Next non-empty line with comments stripped, as (1-based number, tokens).
    fn next_tokens(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, raw) in self.inner.by_ref() {
            let content = raw.split('#').next().unwrap_or("");
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if !tokens.is_empty() {
                return Some((i + 1, tokens));
            }
        }
        None
    }
}

fn num<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ModelError> {
    tok.parse()
        .map_err(|_| ModelError::parse(line, format!("malformed {what} `{tok}`")))
}

fn arity(line: usize, tokens: &[&str], allowed: &[usize]) -> Result<(), ModelError> {
    if allowed.contains(&tokens.len()) {
        Ok(())
    } else {
        Err(ModelError::parse(
            line,
            format!("`{}` expects {:?} fields, found {}", tokens[0], allowed.iter().map(|a| a - 1).collect::<Vec<_>>(), tokens.len() - 1),
        ))
    }
}

/// Parses and validates an instance file.
pub fn parse_instance(text: &str) -> Result<Instance, ModelError> {
    let mut lines = Lines::new(text);
    let mut name = None;
    let mut level1 = None;
    let mut level2 = None;
    let mut depot = None;
    let mut satellites = None;
    let mut customers = None;
    let mut stations: Option<Vec<Station>> = None;
    let mut ids = HashSet::new();
    let mut claim = |line: usize, id: u32| {
        if id == 0 {
            Err(ModelError::parse(line, "id 0 is reserved for the depot"))
        } else if !ids.insert(id) {
            Err(ModelError::parse(line, format!("duplicate id {id}")))
        } else {
            Ok(())
        }
    };

    while let Some((ln, t)) = lines.next_tokens() {
        let once = |seen: bool| {
            if seen {
                Err(ModelError::parse(ln, format!("duplicate section `{}`", t[0])))
            } else {
                Ok(())
            }
        };
        match t[0] {
            "NAME" => {
                once(name.is_some())?;
                if t.len() < 2 {
                    return Err(ModelError::parse(ln, "NAME expects a value"));
                }
                name = Some(t[1..].join(" "));
            }
            "LEVEL1" => {
                once(level1.is_some())?;
                arity(ln, &t, &[3, 4])?;
                let m1: u32 = num(ln, t[1], "first-level fleet")?;
                let q1: u32 = num(ln, t[2], "Q1")?;
                let f1: i64 = t.get(3).map(|s| num(ln, s, "F1")).transpose()?.unwrap_or(0);
                if f1 < 0 {
                    return Err(ModelError::parse(ln, "negative F1"));
                }
                level1 = Some((m1, q1, f1));
            }
            "LEVEL2" => {
                once(level2.is_some())?;
                arity(ln, &t, &[5, 6])?;
                let m2: u32 = num(ln, t[1], "second-level fleet")?;
                let q2: u32 = num(ln, t[2], "Q2")?;
                let f2: i64 = num(ln, t[3], "F2")?;
                if f2 < 0 {
                    return Err(ModelError::parse(ln, "negative F2"));
                }
                let battery = match t[4] {
                    "inf" | "-" => None,
                    s => Some(num::<u32>(ln, s, "battery capacity")?),
                };
                let factor = match t.get(5) {
                    Some(s) => s
                        .parse::<ConsumptionFactor>()
                        .map_err(|e| ModelError::parse(ln, e.to_string()))?,
                    None => ConsumptionFactor::ONE,
                };
                level2 = Some((m2, q2, f2, battery, factor));
            }
            "DEPOT" => {
                once(depot.is_some())?;
                arity(ln, &t, &[3])?;
                depot = Some(Point::new(num(ln, t[1], "x")?, num(ln, t[2], "y")?));
            }
            "SATELLITES" => {
                once(satellites.is_some())?;
                arity(ln, &t, &[2])?;
                let n: usize = num(ln, t[1], "satellite count")?;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let (ln, t) = lines
                        .next_tokens()
                        .ok_or_else(|| ModelError::parse(ln, "truncated SATELLITES section"))?;
                    if t.len() != 5 {
                        return Err(ModelError::parse(ln, "satellite line expects `id x y capacity|- vehicles`"));
                    }
                    let id = num(ln, t[0], "id")?;
                    claim(ln, id)?;
                    let capacity = match t[3] {
                        "-" => None,
                        s => Some(num(ln, s, "capacity")?),
                    };
                    v.push(Satellite {
                        id,
                        location: Point::new(num(ln, t[1], "x")?, num(ln, t[2], "y")?),
                        capacity,
                        vehicles: num(ln, t[4], "vehicle count")?,
                    });
                }
                satellites = Some(v);
            }
            "CUSTOMERS" => {
                once(customers.is_some())?;
                arity(ln, &t, &[2])?;
                let n: usize = num(ln, t[1], "customer count")?;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let (ln, t) = lines
                        .next_tokens()
                        .ok_or_else(|| ModelError::parse(ln, "truncated CUSTOMERS section"))?;
                    if t.len() != 4 {
                        return Err(ModelError::parse(ln, "customer line expects `id x y demand`"));
                    }
                    let id = num(ln, t[0], "id")?;
                    claim(ln, id)?;
                    let demand: u32 = num(ln, t[3], "demand")?;
                    if demand == 0 {
                        return Err(ModelError::parse(ln, "customer demand must be at least 1"));
                    }
                    if let Some((_, q2, ..)) = level2 {
                        if demand > q2 {
                            return Err(ModelError::parse(ln, "customer demand exceeds Q2"));
                        }
                    }
                    v.push(Customer {
                        id,
                        location: Point::new(num(ln, t[1], "x")?, num(ln, t[2], "y")?),
                        demand,
                    });
                }
                customers = Some(v);
            }
            "STATIONS" => {
                once(stations.is_some())?;
                arity(ln, &t, &[2])?;
                let n: usize = num(ln, t[1], "station count")?;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let (ln, t) = lines
                        .next_tokens()
                        .ok_or_else(|| ModelError::parse(ln, "truncated STATIONS section"))?;
                    if t.len() != 3 {
                        return Err(ModelError::parse(ln, "station line expects `id x y`"));
                    }
                    let id = num(ln, t[0], "id")?;
                    claim(ln, id)?;
                    v.push(Station {
                        id,
                        location: Point::new(num(ln, t[1], "x")?, num(ln, t[2], "y")?),
                    });
                }
                stations = Some(v);
            }
            other => return Err(ModelError::parse(ln, format!("unknown section `{other}`"))),
        }
    }

    let missing = |what: &str| ModelError::parse(0, format!("missing {what} section"));
    let (m1_fleet, q1_capacity, fixed_cost_l1) = level1.ok_or_else(|| missing("LEVEL1"))?;
    let (m2_global, q2_capacity, fixed_cost_l2, battery_capacity, consumption_factor) =
        level2.ok_or_else(|| missing("LEVEL2"))?;
    let customers = customers.ok_or_else(|| missing("CUSTOMERS"))?;
    if let Some(c) = customers.iter().find(|c| c.demand > q2_capacity) {
        return Err(ModelError::Invalid(format!(
            "customer {} demand exceeds Q2",
            c.id
        )));
    }
    Instance::new(InstanceData {
        name: name.unwrap_or_default(),
        depot: depot.ok_or_else(|| missing("DEPOT"))?,
        satellites: satellites.ok_or_else(|| missing("SATELLITES"))?,
        customers,
        stations: stations.unwrap_or_default(),
        q1_capacity,
        m1_fleet,
        q2_capacity,
        m2_global,
        battery_capacity,
        fixed_cost_l1,
        fixed_cost_l2,
        consumption_factor,
    })
}

/// Serializes an instance; `parse_instance(&write_instance(x))` reproduces `x`.
pub fn write_instance(inst: &Instance) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "NAME {}", inst.name);
    let _ = writeln!(s, "LEVEL1 {} {} {}", inst.m1_fleet, inst.q1_capacity, inst.fixed_cost_l1);
    let battery = inst
        .battery_capacity
        .map_or_else(|| "inf".to_string(), |l| l.to_string());
    let _ = writeln!(
        s,
        "LEVEL2 {} {} {} {} {}",
        inst.m2_global, inst.q2_capacity, inst.fixed_cost_l2, battery, inst.consumption_factor
    );
    let _ = writeln!(s, "DEPOT {} {}", inst.depot.x, inst.depot.y);
    let _ = writeln!(s, "SATELLITES {}", inst.satellites.len());
    for k in &inst.satellites {
        let cap = k.capacity.map_or_else(|| "-".to_string(), |c| c.to_string());
        let _ = writeln!(s, "{} {} {} {} {}", k.id, k.location.x, k.location.y, cap, k.vehicles);
    }
    let _ = writeln!(s, "CUSTOMERS {}", inst.customers.len());
    for c in &inst.customers {
        let _ = writeln!(s, "{} {} {} {}", c.id, c.location.x, c.location.y, c.demand);
    }
    let _ = writeln!(s, "STATIONS {}", inst.stations.len());
    for r in &inst.stations {
        let _ = writeln!(s, "{} {} {}", r.id, r.location.x, r.location.y);
    }
    s
}

pub fn write_solution(inst: &Instance, sol: &Solution) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "INSTANCE {}", inst.name);
    for r in &sol.first_level {
        s.push_str("L1: 0");
        for d in &r.deliveries {
            let _ = write!(s, " {}:{}", inst.external_id(d.satellite), d.quantity);
        }
        s.push_str(" 0\n");
    }
    for r in &sol.second_level {
        let sat = inst.external_id(r.satellite);
        let _ = write!(s, "L2: {sat}");
        for &v in &r.visits {
            let _ = write!(s, " {}", inst.external_id(v));
        }
        let _ = writeln!(s, " {sat}");
    }
    let c = &sol.cost;
    let _ = writeln!(
        s,
        "COST {} {} {} {}",
        c.first_level_distance, c.second_level_distance, c.fixed_cost, c.total
    );
    s
}

/// Parses a solution file against `inst`. The declared costs are kept as
/// written so that [`check_feasibility`](super::check_feasibility) can
/// compare them; if the file has no `COST` line they are recomputed.
pub fn parse_solution(inst: &Instance, text: &str) -> Result<Solution, ModelError> {
    let mut lines = Lines::new(text);
    let mut first_level = Vec::new();
    let mut second_level = Vec::new();
    let mut cost = None;
    let vertex = |ln: usize, tok: &str| -> Result<usize, ModelError> {
        let id: u32 = num(ln, tok, "vertex id")?;
        inst.vertex_of_id(id)
            .ok_or_else(|| ModelError::parse(ln, format!("unknown vertex id {id}")))
    };
    while let Some((ln, t)) = lines.next_tokens() {
        match t[0] {
            "INSTANCE" => {}
            "L1:" => {
                if t.len() < 3 || t[1] != "0" || t[t.len() - 1] != "0" {
                    return Err(ModelError::parse(ln, "first-level route must start and end at depot 0"));
                }
                let mut deliveries = Vec::new();
                for tok in &t[2..t.len() - 1] {
                    let (id, qty) = tok
                        .split_once(':')
                        .ok_or_else(|| ModelError::parse(ln, format!("expected `sat:qty`, found `{tok}`")))?;
                    let satellite = vertex(ln, id)?;
                    if !inst.is_satellite(satellite) {
                        return Err(ModelError::parse(ln, format!("vertex {id} is not a satellite")));
                    }
                    deliveries.push(Delivery {
                        satellite,
                        quantity: num(ln, qty, "quantity")?,
                    });
                }
                first_level.push(FirstLevelRoute { deliveries });
            }
            "L2:" => {
                if t.len() < 3 || t[1] != t[t.len() - 1] {
                    return Err(ModelError::parse(ln, "second-level route must start and end at its satellite"));
                }
                let satellite = vertex(ln, t[1])?;
                if !inst.is_satellite(satellite) {
                    return Err(ModelError::parse(ln, format!("vertex {} is not a satellite", t[1])));
                }
                let visits = t[2..t.len() - 1]
                    .iter()
                    .map(|tok| vertex(ln, tok))
                    .collect::<Result<Vec<_>, _>>()?;
                let load = visits.iter().map(|&v| inst.demand(v)).sum();
                second_level.push(SecondLevelRoute { satellite, visits, load });
            }
            "COST" => {
                arity(ln, &t, &[5])?;
                cost = Some(CostBreakdown {
                    first_level_distance: num(ln, t[1], "cost")?,
                    second_level_distance: num(ln, t[2], "cost")?,
                    fixed_cost: num(ln, t[3], "cost")?,
                    total: num(ln, t[4], "cost")?,
                });
            }
            other => return Err(ModelError::parse(ln, format!("unknown record `{other}`"))),
        }
    }
    match cost {
        Some(cost) => Ok(Solution { first_level, second_level, cost }),
        None => Solution::new(inst, first_level, second_level),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::check_feasibility;

    const SAMPLE: &str = "\
# two satellites, four customers
NAME sample
LEVEL1 2 200 10
LEVEL2 4 125 5 500 1
DEPOT 0 0
SATELLITES 2
1 100 0 - 2
2 -100 0 150 2
CUSTOMERS 4
3 150 30 10   # near satellite 1
4 160 -20 20
5 -140 40 30
6 -150 -30 40
STATIONS 1
7 0 50
";

    #[test]
    fn parses_sample() {
        let inst = parse_instance(SAMPLE).unwrap();
        assert_eq!(inst.num_customers(), 4);
        assert_eq!(inst.num_satellites(), 2);
        assert_eq!(inst.num_stations(), 1);
        assert_eq!(inst.satellites[0].capacity, None);
        assert_eq!(inst.satellites[1].capacity, Some(150));
        assert_eq!(inst.fixed_cost_l1, 10);
        assert_eq!(inst.battery_capacity, Some(500));
        assert_eq!(inst.total_demand(), 100);
    }

    #[test]
    fn round_trip_is_byte_stable() {
        let inst = parse_instance(SAMPLE).unwrap();
        let text = write_instance(&inst);
        let again = parse_instance(&text).unwrap();
        assert_eq!(inst, again);
        assert_eq!(text, write_instance(&again));
        assert!(text.contains("\n1 100 0 - 2\n"));
    }

    #[test]
    fn zero_fixed_costs_are_explicit() {
        let text = SAMPLE.replace("LEVEL1 2 200 10", "LEVEL1 2 200").replace("125 5 500", "125 0 500");
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.fixed_cost_l1, 0);
        let out = write_instance(&inst);
        assert!(out.contains("LEVEL1 2 200 0\n"));
        assert!(out.contains("LEVEL2 4 125 0 500 1\n"));
    }

    #[test]
    fn demand_above_q2_rejected_with_line() {
        let text = SAMPLE.replace("6 -150 -30 40", "6 -150 -30 200");
        match parse_instance(&text) {
            Err(ModelError::Parse { line, message }) => {
                assert_eq!(line, 13);
                assert!(message.contains("customer demand exceeds Q2"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_inputs() {
        let dup = SAMPLE.replace("7 0 50", "3 0 50");
        assert!(matches!(parse_instance(&dup), Err(ModelError::Parse { line: 15, .. })));
        let neg = SAMPLE.replace("LEVEL1 2 200 10", "LEVEL1 2 -200 10");
        assert!(matches!(parse_instance(&neg), Err(ModelError::Parse { line: 3, .. })));
        let trunc = SAMPLE.replace("STATIONS 1", "STATIONS 3");
        assert!(parse_instance(&trunc).is_err());
        let junk = format!("{SAMPLE}FOO 1\n");
        assert!(parse_instance(&junk).is_err());
    }

    #[test]
    fn empty_stations_section() {
        let text = SAMPLE.replace("STATIONS 1\n7 0 50\n", "STATIONS 0\n");
        let inst = parse_instance(&text).unwrap();
        assert_eq!(inst.num_stations(), 0);
        assert_eq!(inst.charging_points().count(), 2);
    }

    #[test]
    fn unlimited_battery_round_trip() {
        let text = SAMPLE.replace("125 5 500 1", "125 5 inf 3/2");
        let inst = parse_instance(&text).unwrap();
        assert!(inst.battery_unlimited());
        assert!(write_instance(&inst).contains("LEVEL2 4 125 5 inf 3/2\n"));
    }

    #[test]
    fn solution_round_trip() {
        let inst = parse_instance(SAMPLE).unwrap();
        let text = "\
INSTANCE sample
L1: 0 1:30 2:70 0
L2: 1 3 4 1
L2: 2 5 7 2
L2: 2 6 2
";
        let sol = parse_solution(&inst, text).unwrap();
        assert_eq!(sol.second_level[1].visits, vec![5, 7]);
        assert_eq!(sol.second_level[1].load, 30);
        let written = write_solution(&inst, &sol);
        let again = parse_solution(&inst, &written).unwrap();
        assert_eq!(sol, again);
        assert!(check_feasibility(&inst, &again).is_ok(), "{:?}", check_feasibility(&inst, &again));
        assert!(parse_solution(&inst, "L2: 1 99 1\n").is_err());
        assert!(parse_solution(&inst, "L1: 0 3:5 0\n").is_err());
    }
}
