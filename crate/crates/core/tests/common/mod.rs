//! Random instances and brute-force reference implementations shared by the
//! integration tests. The references work from raw distances and energies
//! only and share no code with the library's algorithms.

#![allow(dead_code)]

use std::ops::RangeInclusive;

use e2evrp_core::model::{ConsumptionFactor, Customer, Instance, InstanceData, Point, Satellite, Station, Vertex};
use rand::Rng;

#[derive(Clone)]
pub struct RandomSpec {
    pub satellites: RangeInclusive<usize>,
    pub customers: RangeInclusive<usize>,
    pub stations: RangeInclusive<usize>,
    pub side: i64,
    pub battery: RangeInclusive<u32>,
    pub demand: RangeInclusive<u32>,
    pub q2: u32,
    pub vehicles: u32,
    pub fixed: (i64, i64),
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            satellites: 1..=2,
            customers: 1..=8,
            stations: 0..=5,
            side: 1000,
            battery: 50..=2000,
            demand: 1..=10,
            q2: 100,
            vehicles: 8,
            fixed: (0, 0),
        }
    }
}

pub fn random_instance<R: Rng>(rng: &mut R, spec: &RandomSpec) -> Instance {
    let pt = |rng: &mut R| Point::new(rng.random_range(0..=spec.side), rng.random_range(0..=spec.side));
    let ns = rng.random_range(spec.satellites.clone());
    let nc = rng.random_range(spec.customers.clone());
    let nr = rng.random_range(spec.stations.clone());
    let mut id = 0;
    let mut next = || {
        id += 1;
        id
    };
    let satellites = (0..ns)
        .map(|_| Satellite { id: next(), location: pt(rng), capacity: None, vehicles: spec.vehicles })
        .collect();
    let customers = (0..nc)
        .map(|_| Customer { id: next(), location: pt(rng), demand: rng.random_range(spec.demand.clone()) })
        .collect();
    let stations = (0..nr).map(|_| Station { id: next(), location: pt(rng) }).collect();
    let q2 = spec.q2;
    Instance::new(InstanceData {
        name: "random".into(),
        depot: pt(rng),
        satellites,
        customers,
        stations,
        q1_capacity: q2 * 4,
        m1_fleet: 50,
        q2_capacity: q2,
        m2_global: spec.vehicles * ns as u32,
        battery_capacity: Some(rng.random_range(spec.battery.clone())),
        fixed_cost_l1: spec.fixed.0,
        fixed_cost_l2: spec.fixed.1,
        consumption_factor: ConsumptionFactor::ONE,
    })
    .expect("random instance is valid")
}

/// All ways to drive from `i` to `j` with at most one charging stop:
/// `(cost, energy before the stop or of the whole leg, energy after the stop)`.
/// The stop may be any charging point, endpoints included.
fn leg_options(inst: &Instance, i: Vertex, j: Vertex) -> Vec<(i64, i64, Option<i64>)> {
    let mut out = vec![(inst.dist(i, j), inst.energy(i, j), None)];
    for k in inst.charging_points() {
        out.push((inst.dist(i, k) + inst.dist(k, j), inst.energy(i, k), Some(inst.energy(k, j))));
    }
    out
}

/// Cheapest battery-feasible stop assignment for `sat, customers.., sat`,
/// by exhaustive depth-first enumeration with a sound cost bound.
pub fn brute_force_charging(inst: &Instance, sat: Vertex, customers: &[Vertex]) -> Option<i64> {
    let limit = inst.battery_limit();
    let mut seq = vec![sat];
    seq.extend_from_slice(customers);
    seq.push(sat);
    let legs: Vec<Vec<(i64, i64, Option<i64>)>> = seq
        .windows(2)
        .map(|w| {
            let mut o = leg_options(inst, w[0], w[1]);
            o.sort_by_key(|x| x.0);
            o
        })
        .collect();
    // cheapest option of every remaining leg, battery ignored
    let mut rest = vec![0i64; legs.len() + 1];
    for l in (0..legs.len()).rev() {
        rest[l] = rest[l + 1] + legs[l][0].0;
    }
    let mut best: Option<i64> = None;
    fn dfs(
        legs: &[Vec<(i64, i64, Option<i64>)>],
        rest: &[i64],
        limit: i64,
        l: usize,
        w: i64,
        cost: i64,
        best: &mut Option<i64>,
    ) {
        if l == legs.len() {
            if best.is_none_or(|b| cost < b) {
                *best = Some(cost);
            }
            return;
        }
        if best.is_some_and(|b| cost + rest[l] >= b) {
            return;
        }
        for &(c, e1, e2) in &legs[l] {
            match e2 {
                None if w + e1 <= limit => dfs(legs, rest, limit, l + 1, w + e1, cost + c, best),
                Some(e2) if w + e1 <= limit && e2 <= limit => dfs(legs, rest, limit, l + 1, e2, cost + c, best),
                _ => {}
            }
        }
    }
    dfs(&legs, &rest, limit, 0, 0, 0, &mut best);
    best
}

/// Dense backward-looking recursion over every consumption level:
/// `f[p][w]` = cheapest way to reach position `p` having used exactly `w`.
pub fn dense_charging(inst: &Instance, sat: Vertex, customers: &[Vertex]) -> Option<i64> {
    let limit = inst.battery_limit();
    assert!(limit <= 100_000, "dense oracle needs a small battery");
    let l = limit as usize;
    let mut seq = vec![sat];
    seq.extend_from_slice(customers);
    seq.push(sat);
    const INF: i64 = i64::MAX / 4;
    let mut f = vec![INF; l + 1];
    f[0] = 0;
    for win in seq.windows(2) {
        // prefix minima: best value over all w' <= x
        let mut pre = f.clone();
        for x in 1..=l {
            pre[x] = pre[x].min(pre[x - 1]);
        }
        let mut g = vec![INF; l + 1];
        for (c, e1, e2) in leg_options(inst, win[0], win[1]) {
            match e2 {
                None => {
                    for w in (e1.max(0) as usize)..=l {
                        let from = f[w - e1 as usize];
                        if from < INF {
                            g[w] = g[w].min(from + c);
                        }
                    }
                }
                Some(e2) => {
                    if e1 <= limit && e2 <= limit {
                        let from = pre[(limit - e1) as usize];
                        if from < INF {
                            g[e2 as usize] = g[e2 as usize].min(from + c);
                        }
                    }
                }
            }
        }
        f = g;
    }
    f.into_iter().filter(|&v| v < INF).min()
}

/// Cheapest elementary closed route from `sat` for every (load, last
/// customer), charging stops chosen optimally; `table[q][c]` indexes
/// customers by position.
pub fn elementary_table(inst: &Instance, sat: Vertex) -> Vec<Vec<Option<i64>>> {
    let customers: Vec<Vertex> = inst.customer_vertices().collect();
    let q2 = inst.q2_capacity as usize;
    let limit = inst.battery_limit();
    let mut table = vec![vec![None; customers.len()]; q2 + 1];

    fn extend(inst: &Instance, labels: &[(i64, i64)], i: Vertex, j: Vertex, limit: i64) -> Vec<(i64, i64)> {
        let mut out: Vec<(i64, i64)> = Vec::new();
        for &(w, cost) in labels {
            for (c, e1, e2) in leg_options(inst, i, j) {
                let nw = match e2 {
                    None if w + e1 <= limit => w + e1,
                    Some(e2) if w + e1 <= limit && e2 <= limit => e2,
                    _ => continue,
                };
                let nc = cost + c;
                if out.iter().any(|&(ow, oc)| ow <= nw && oc <= nc) {
                    continue;
                }
                out.retain(|&(ow, oc)| !(nw <= ow && nc <= oc));
                out.push((nw, nc));
            }
        }
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        inst: &Instance,
        sat: Vertex,
        customers: &[Vertex],
        used: &mut Vec<bool>,
        last: Vertex,
        load: usize,
        labels: Vec<(i64, i64)>,
        limit: i64,
        table: &mut Vec<Vec<Option<i64>>>,
    ) {
        for (a, &j) in customers.iter().enumerate() {
            let q = load + inst.demand(j) as usize;
            if used[a] || q >= table.len() {
                continue;
            }
            let next = extend(inst, &labels, last, j, limit);
            if next.is_empty() {
                continue;
            }
            let close = extend(inst, &next, j, sat, limit).iter().map(|l| l.1).min();
            if let Some(c) = close {
                let slot = &mut table[q][a];
                if slot.is_none_or(|v| c < v) {
                    *slot = Some(c);
                }
            }
            used[a] = true;
            rec(inst, sat, customers, used, j, q, next, limit, table);
            used[a] = false;
        }
    }

    let mut used = vec![false; customers.len()];
    rec(inst, sat, &customers, &mut used, sat, 0, vec![(0, 0)], limit, &mut table);
    table
}
