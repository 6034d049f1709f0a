//! ng-route relaxation on the multigraph.
//!
//! For one satellite, computes the least cost of closed (possibly
//! non-elementary) routes by load and last customer. A path may revisit a
//! customer unless it is still remembered in the path's ng-memory: the last
//! customer plus every earlier customer lying in the neighbour sets of all
//! customers visited after it. With full memory the routes are elementary.
//!
//! The battery dimension is handled with (cost, consumption) labels per
//! (customer, memory, load) state, which gives the same values as the dense
//! recursion over every consumption level.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::SolveError;
use crate::model::{Instance, Vertex};
use crate::multigraph::{MultiArc, Multigraph};

/// Predecessor consumptions admissible for an arc, see [`omega`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Omega {
    Empty,
    Single(i64),
    /// Inclusive range.
    Range(i64, i64),
}

impl Omega {
    pub fn contains(&self, w: i64) -> bool {
        match *self {
            Omega::Empty => false,
            Omega::Single(v) => v == w,
            Omega::Range(lo, hi) => lo <= w && w <= hi,
        }
    }
}

/// Consumption values at the tail from which `arc` arrives at its head with
/// consumption exactly `w`.
///
/// Direct arc: `{w - c}` when `c <= w`. Via station `k`: every `w'` with
/// `0 <= w' + c(tail, k) <= L`, provided `c(k, head) == w`. Otherwise empty.
pub fn omega(w: i64, arc: &MultiArc, limit: i64) -> Omega {
    match arc.station {
        None if arc.consumption <= w => Omega::Single(w - arc.consumption),
        Some(_) if arc.consumption == w && arc.approach <= limit => {
            Omega::Range(0, limit - arc.approach)
        }
        _ => Omega::Empty,
    }
}

/// Neighbour sets `N_i`: each customer and its nearest fellow customers.
#[derive(Debug, Clone)]
pub struct NgSets {
    first_customer: Vertex,
    /// Members of `N_i`, the customer itself first.
    members: Vec<Vec<Vertex>>,
    /// `slot[i][j]`: bit of customer `j` within `N_i`, or `NONE`.
    slot: Vec<Vec<u8>>,
}

const NONE: u8 = u8::MAX;

impl NgSets {
    /// `N_i` = `i` plus its `size - 1` nearest customers (ties by index).
    pub fn nearest(inst: &Instance, size: usize) -> Result<Self, SolveError> {
        let customers: Vec<Vertex> = inst.customer_vertices().collect();
        let sets = customers
            .iter()
            .map(|&i| {
                let mut others: Vec<Vertex> = customers.iter().copied().filter(|&j| j != i).collect();
                others.sort_by_key(|&j| (inst.dist(i, j), j));
                others.truncate(size.saturating_sub(1));
                others
            })
            .collect();
        Self::from_sets(inst, sets)
    }

    /// Builds from explicit neighbour lists (one per customer, in customer
    /// order); each customer is added to its own set.
    pub fn from_sets(inst: &Instance, sets: Vec<Vec<Vertex>>) -> Result<Self, SolveError> {
        let first = inst.customer_vertices().start;
        let n = inst.num_customers();
        let mut members = Vec::with_capacity(n);
        for (a, others) in sets.into_iter().enumerate() {
            let i = first + a;
            let mut m = vec![i];
            m.extend(others.into_iter().filter(|&j| j != i));
            m.dedup();
            if m.len() > 64 {
                return Err(SolveError::NgTooLarge(m.len()));
            }
            members.push(m);
        }
        let slot = members
            .iter()
            .map(|m| {
                let mut s = vec![NONE; n];
                for (b, &j) in m.iter().enumerate() {
                    s[j - first] = b as u8;
                }
                s
            })
            .collect();
        Ok(NgSets {
            first_customer: first,
            members,
            slot,
        })
    }

    pub fn set(&self, i: Vertex) -> &[Vertex] {
        &self.members[i - self.first_customer]
    }

    pub fn contains(&self, i: Vertex, j: Vertex) -> bool {
        self.slot[i - self.first_customer][j - self.first_customer] != NONE
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Memory of `mask` (relative to `N_from`) remembered after moving to
    /// `to`: `(NG ∩ N_to) ∪ {to}`, relative to `N_to`.
    fn advance(&self, from: Vertex, mask: u64, to: Vertex) -> u64 {
        let from_members = &self.members[from - self.first_customer];
        let to_slot = &self.slot[to - self.first_customer];
        let mut out = 1u64;
        let mut m = mask;
        while m != 0 {
            let b = m.trailing_zeros() as usize;
            m &= m - 1;
            let s = to_slot[from_members[b] - self.first_customer];
            if s != NONE {
                out |= 1 << s;
            }
        }
        out
    }

    fn remembers(&self, at: Vertex, mask: u64, j: Vertex) -> bool {
        let s = self.slot[at - self.first_customer][j - self.first_customer];
        s != NONE && mask & (1 << s) != 0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NgLimits {
    /// Maximum number of labels alive at once before pricing refuses.
    pub max_labels: usize,
}

impl Default for NgLimits {
    fn default() -> Self {
        NgLimits { max_labels: 4_000_000 }
    }
}

/// Least ng-route costs for one satellite.
#[derive(Debug, Clone, Serialize)]
pub struct NgTable {
    pub satellite: Vertex,
    first_customer: Vertex,
    /// `values[q][c]`: cheapest closed ng-route of load `q` whose last
    /// customer is the `c`-th customer.
    values: Vec<Vec<Option<i64>>>,
    pub labels_created: usize,
}

impl NgTable {
    pub fn value(&self, load: u32, last: Vertex) -> Option<i64> {
        self.values
            .get(load as usize)
            .and_then(|row| row.get(last - self.first_customer).copied().flatten())
    }

    /// Cheapest closed route for every load level `0..=Q2`.
    pub fn best_by_load(&self) -> Vec<Option<i64>> {
        self.values
            .iter()
            .map(|row| row.iter().flatten().copied().min())
            .collect()
    }

    pub fn min_route_cost(&self) -> Option<i64> {
        self.best_by_load().into_iter().flatten().min()
    }
}

type Bucket = HashMap<(Vertex, u64), Vec<(i64, i64)>>;

/// Inserts `(w, cost)` unless dominated; drops labels it dominates.
fn push_label(labels: &mut Vec<(i64, i64)>, w: i64, cost: i64) -> isize {
    if labels.iter().any(|&(lw, lc)| lw <= w && lc <= cost) {
        return 0;
    }
    let before = labels.len();
    labels.retain(|&(lw, lc)| !(w <= lw && cost <= lc));
    let removed = before - labels.len();
    labels.push((w, cost));
    1 - removed as isize
}

/// Runs the ng-route labelling from `satellite`.
pub fn price_ng_routes(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    ng: &NgSets,
    limits: NgLimits,
) -> Result<NgTable, SolveError> {
    let q2 = inst.q2_capacity as usize;
    let limit = inst.battery_limit();
    let customers: Vec<Vertex> = inst.customer_vertices().collect();
    let first = inst.customer_vertices().start;
    let mut values = vec![vec![None; customers.len()]; q2 + 1];
    let mut buckets: Vec<Bucket> = (0..=q2).map(|_| HashMap::new()).collect();
    let mut alive: isize = 0;
    let mut created = 0usize;

    for &i in &customers {
        let q = inst.demand(i) as usize;
        for a in graph.bundle(satellite, i) {
            if let Some(w) = a.extend(0, limit) {
                alive += push_label(buckets[q].entry((i, 1)).or_default(), w, a.cost);
                created += 1;
            }
        }
    }

    for q in 1..=q2 {
        let bucket = std::mem::take(&mut buckets[q]);
        let mut states: Vec<_> = bucket.into_iter().collect();
        states.sort_unstable_by_key(|(k, _)| *k);
        for ((i, mask), labels) in states {
            alive -= labels.len() as isize;
            let slot = &mut values[q][i - first];
            for a in graph.bundle(i, satellite) {
                for &(w, cost) in &labels {
                    if a.extend(w, limit).is_some() {
                        let c = cost + a.cost;
                        if slot.is_none_or(|v| c < v) {
                            *slot = Some(c);
                        }
                    }
                }
            }
            for &j in &customers {
                let nq = q + inst.demand(j) as usize;
                if nq > q2 || j == i || ng.remembers(i, mask, j) {
                    continue;
                }
                let arcs = graph.bundle(i, j);
                if arcs.is_empty() {
                    continue;
                }
                let nmask = ng.advance(i, mask, j);
                let target = buckets[nq].entry((j, nmask)).or_default();
                for a in arcs {
                    for &(w, cost) in &labels {
                        if let Some(nw) = a.extend(w, limit) {
                            alive += push_label(target, nw, cost + a.cost);
                            created += 1;
                        }
                    }
                }
            }
            if alive as usize > limits.max_labels {
                return Err(SolveError::StateSpaceExceeded { cap: limits.max_labels });
            }
        }
    }

    Ok(NgTable {
        satellite,
        first_customer: first,
        values,
        labels_created: created,
    })
}

/// Per-satellite summary inside a [`BoundReport`].
#[derive(Debug, Clone, Serialize)]
pub struct SatelliteBound {
    pub satellite: u32,
    pub min_route_cost: Option<i64>,
    pub reachable_loads: usize,
    pub labels_created: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub satellites: Vec<SatelliteBound>,
    pub second_level: i64,
    pub first_level: i64,
    pub bound: i64,
    pub satellite_subsets: usize,
}

/// Combinatorial lower bound from ng-route tables.
///
/// For a set `S` of satellites assumed to be used, second-level costs are
/// bounded by the cheapest multiset of ng-routes from `S` whose loads add up
/// to the total demand (unbounded knapsack, `F2` per route), and first-level
/// costs by `ceil(q_tot / Q1)` routes each leaving and re-entering the depot
/// through a satellite of `S` (`F1` per route), or by one round trip to the
/// farthest satellite of `S`. The bound is the minimum over all `S` (only the
/// full set beyond 10 satellites, with the farthest-satellite term dropped).
/// It is valid but weaker than bounds derived from set-partitioning.
pub fn ng_lower_bound(
    inst: &Instance,
    graph: &Multigraph,
    ng: &NgSets,
    limits: NgLimits,
) -> Result<BoundReport, SolveError> {
    let qtot = inst.total_demand() as usize;
    if qtot == 0 {
        return Ok(BoundReport {
            satellites: Vec::new(),
            second_level: 0,
            first_level: 0,
            bound: 0,
            satellite_subsets: 0,
        });
    }
    let q2 = inst.q2_capacity as usize;
    let sats: Vec<Vertex> = inst.satellite_vertices().collect();
    let mut per_sat = Vec::with_capacity(sats.len());
    let mut summaries = Vec::with_capacity(sats.len());
    for &k in &sats {
        let t = price_ng_routes(inst, graph, k, ng, limits)?;
        let best = t.best_by_load();
        summaries.push(SatelliteBound {
            satellite: inst.external_id(k),
            min_route_cost: t.min_route_cost(),
            reachable_loads: best.iter().skip(1).filter(|v| v.is_some()).count(),
            labels_created: t.labels_created,
        });
        per_sat.push(best);
    }

    let trucks = qtot.div_ceil(inst.q1_capacity as usize) as i64;
    let enumerate = sats.len() <= 10;
    let subsets: Vec<u32> = if enumerate {
        (1..(1u32 << sats.len())).collect()
    } else {
        vec![u32::MAX]
    };
    let mut best: Option<(i64, i64)> = None;
    for &s in &subsets {
        let members: Vec<usize> = (0..sats.len()).filter(|&a| s & (1 << a) != 0).collect();
        let route_cost: Vec<Option<i64>> = (0..=q2)
            .map(|q| {
                members
                    .iter()
                    .filter_map(|&a| per_sat[a][q])
                    .min()
                    .map(|c| c + inst.fixed_cost_l2)
            })
            .collect();
        let mut knap = vec![None::<i64>; qtot + 1];
        knap[0] = Some(0);
        for t in 1..=qtot {
            let mut v: Option<i64> = None;
            for q in 1..=q2.min(t) {
                if let (Some(prev), Some(rc)) = (knap[t - q], route_cost[q]) {
                    let c = prev + rc;
                    if v.is_none_or(|x| c < x) {
                        v = Some(c);
                    }
                }
            }
            knap[t] = v;
        }
        let Some(second) = knap[qtot] else { continue };
        let nearest = members.iter().map(|&a| inst.dist(0, sats[a])).min().unwrap_or(0);
        let mut first = trucks * 2 * nearest;
        if enumerate {
            // rounding may break the triangle inequality by one unit per hop
            let farthest = members.iter().map(|&a| inst.dist(0, sats[a])).max().unwrap_or(0);
            first = first.max(2 * farthest - (members.len() as i64 - 1));
        }
        first += trucks * inst.fixed_cost_l1;
        if best.is_none_or(|(f, s2)| first + second < f + s2) {
            best = Some((first, second));
        }
    }
    let (first, second) = best.unwrap_or((0, 0));
    Ok(BoundReport {
        satellites: summaries,
        second_level: second,
        first_level: first,
        bound: first + second,
        satellite_subsets: subsets.len(),
    })
}
