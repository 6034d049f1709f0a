use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::SolveError;
use crate::localsearch::NeighborLists;
use crate::model::{Instance, Vertex};
use crate::multigraph::Multigraph;

use super::plan::{Plan, PlanRoute};

/// Mutable state of one search: the working plan, the customers waiting for
/// reinsertion, and the random stream driving every choice.
pub struct SearchState<'a> {
    pub inst: &'a Instance,
    pub graph: &'a Multigraph,
    pub plan: Plan,
    pub pending: Vec<Vertex>,
    pub rng: ChaCha8Rng,
}

impl<'a> SearchState<'a> {
    /// Empty plan with every customer pending.
    pub fn new(inst: &'a Instance, graph: &'a Multigraph, rng: ChaCha8Rng) -> Self {
        SearchState {
            inst,
            graph,
            plan: Plan::empty(inst),
            pending: inst.customer_vertices().collect(),
            rng,
        }
    }

    fn remove_customer(&mut self, c: Vertex) -> bool {
        let demand = self.inst.demand(c);
        for ri in 0..self.plan.routes.len() {
            let r = &mut self.plan.routes[ri];
            if let Some(pos) = r.customers.iter().position(|&x| x == c) {
                r.customers.remove(pos);
                r.load -= demand;
                r.dirty = true;
                if r.customers.is_empty() {
                    self.plan.routes.remove(ri);
                }
                self.pending.push(c);
                return true;
            }
        }
        false
    }

    fn remove_route(&mut self, ri: usize) {
        let r = self.plan.routes.remove(ri);
        self.pending.extend(r.customers);
    }

    /// Removes a random seed customer and some of its nearest customers,
    /// `ceil(p1 * n_c / 100)` at most; the count is uniform from 1 to that cap.
    pub fn destroy_related(&mut self, p1: u32, closest: &NeighborLists) -> usize {
        let n = self.plan.num_customers();
        if n == 0 {
            return 0;
        }
        let cap = related_cap(p1, self.inst.num_customers()).max(1);
        let count = self.rng.random_range(1..=cap);
        let routed: Vec<Vertex> = self.plan.routes.iter().flat_map(|r| r.customers.iter().copied()).collect();
        let seed = routed[self.rng.random_range(0..routed.len())];
        let mut removed = usize::from(self.remove_customer(seed));
        for &c in closest.of(seed) {
            if removed >= count {
                break;
            }
            if self.remove_customer(c) {
                removed += 1;
            }
        }
        removed
    }

    /// Removes `r` random routes, `r` uniform in `[0, ceil(p2/100 * q_tot/Q2)]`.
    pub fn destroy_routes(&mut self, p2: u32) -> usize {
        let cap = route_cap(p2, self.inst.total_demand(), self.inst.q2_capacity);
        let r = self.rng.random_range(0..=cap).min(self.plan.routes.len());
        for _ in 0..r {
            let ri = self.rng.random_range(0..self.plan.routes.len());
            self.remove_route(ri);
        }
        r
    }

    /// Closes a random satellite and dissolves its routes, provided the
    /// other open satellites keep enough capacity and vehicles for the total
    /// demand. Drawing an already closed satellite does nothing.
    pub fn close_satellite(&mut self) -> Option<Vertex> {
        let inst = self.inst;
        let sats = inst.satellite_vertices();
        if sats.is_empty() {
            return None;
        }
        let k = self.rng.random_range(sats.clone());
        if self.plan.closed[k] {
            return None;
        }
        let qtot = inst.total_demand();
        let mut capacity = 0u64;
        let mut vehicles = 0u64;
        for s in sats.filter(|&s| s != k && !self.plan.closed[s]) {
            let sat = inst.satellite(s);
            capacity = capacity.saturating_add(sat.capacity.map_or(u64::MAX, u64::from));
            vehicles += u64::from(sat.vehicles);
        }
        let fleet = vehicles.min(u64::from(inst.m2_global)) * u64::from(inst.q2_capacity);
        if capacity < qtot || fleet < qtot {
            return None;
        }
        self.plan.closed[k] = true;
        let mut ri = 0;
        while ri < self.plan.routes.len() {
            if self.plan.routes[ri].satellite == k {
                self.remove_route(ri);
            } else {
                ri += 1;
            }
        }
        Some(k)
    }

    /// With probability `p3` percent, reopens every closed satellite.
    pub fn open_all_satellites(&mut self, p3: u32) -> bool {
        if !self.rng.random_bool(f64::from(p3.min(100)) / 100.0) {
            return false;
        }
        self.plan.closed.iter_mut().for_each(|c| *c = false);
        true
    }

    /// With probability `p4` percent, dissolves every one-customer route.
    pub fn remove_singleton_routes(&mut self, p4: u32) -> usize {
        if !self.rng.random_bool(f64::from(p4.min(100)) / 100.0) {
            return 0;
        }
        let mut n = 0;
        let mut ri = 0;
        while ri < self.plan.routes.len() {
            if self.plan.routes[ri].customers.len() == 1 {
                self.remove_route(ri);
                n += 1;
            } else {
                ri += 1;
            }
        }
        n
    }

    /// Reinserts every pending customer, rebuilds the first level and places
    /// charging stops on every modified route.
    ///
    /// Customers go to their cheapest position by distance, ignoring the
    /// battery, first in random order and, if that gets stuck, once more by
    /// decreasing demand. On failure the plan is left as before the call.
    pub fn repair(&mut self) -> Result<(), SolveError> {
        let snapshot = self.plan.routes.clone();
        let mut order = std::mem::take(&mut self.pending);
        order.shuffle(&mut self.rng);
        if let Err(first) = self.insert_all(&order) {
            self.plan.routes = snapshot.clone();
            order.sort_by(|&a, &b| self.inst.demand(b).cmp(&self.inst.demand(a)).then(a.cmp(&b)));
            if self.insert_all(&order).is_err() {
                self.plan.routes = snapshot;
                self.pending = order;
                return Err(SolveError::Construction {
                    customer: self.inst.external_id(first),
                });
            }
        }
        if !self.plan.rebuild_first_level(self.inst) {
            self.plan.routes = snapshot;
            self.pending = order;
            return Err(SolveError::FirstLevelCapacity);
        }
        self.plan.recharge(self.inst, self.graph);
        Ok(())
    }

    fn insert_all(&mut self, order: &[Vertex]) -> Result<(), Vertex> {
        let inst = self.inst;
        let mut sat_load = self.plan.satellite_loads(inst);
        let mut sat_routes = self.plan.routes_at(inst);
        for &c in order {
            let q = inst.demand(c);
            let room = |k: Vertex, load: &[u64]| {
                inst.satellite(k).capacity.is_none_or(|cap| load[k] + u64::from(q) <= u64::from(cap))
            };
            // (delta, route, position); route usize::MAX opens a route at satellite `position`
            let mut best: Option<(i64, usize, usize)> = None;
            for (ri, r) in self.plan.routes.iter().enumerate() {
                if r.load + q > inst.q2_capacity || !room(r.satellite, &sat_load) {
                    continue;
                }
                let mut prev = r.satellite;
                for pos in 0..=r.customers.len() {
                    let next = r.customers.get(pos).copied().unwrap_or(r.satellite);
                    let delta = inst.dist(prev, c) + inst.dist(c, next) - inst.dist(prev, next);
                    if best.is_none_or(|b| delta < b.0) {
                        best = Some((delta, ri, pos));
                    }
                    prev = next;
                }
            }
            if self.plan.routes.len() < inst.m2_global as usize {
                for k in inst.satellite_vertices() {
                    if self.plan.closed[k] || sat_routes[k] >= inst.satellite(k).vehicles || !room(k, &sat_load) {
                        continue;
                    }
                    let delta = 2 * inst.dist(k, c) + inst.fixed_cost_l2;
                    if best.is_none_or(|b| delta < b.0) {
                        best = Some((delta, usize::MAX, k));
                    }
                }
            }
            let (_, ri, pos) = best.ok_or(c)?;
            let ri = if ri == usize::MAX {
                self.plan.routes.push(PlanRoute::new(pos));
                sat_routes[pos] += 1;
                self.plan.routes.len() - 1
            } else {
                ri
            };
            let r = &mut self.plan.routes[ri];
            let pos = pos.min(r.customers.len());
            r.customers.insert(pos, c);
            r.load += q;
            r.dirty = true;
            sat_load[r.satellite] += u64::from(q);
        }
        Ok(())
    }
}

/// Upper limit on related removals.
pub fn related_cap(p1: u32, n_customers: usize) -> usize {
    (u64::from(p1) * n_customers as u64).div_ceil(100) as usize
}

/// Upper limit on removed routes.
pub fn route_cap(p2: u32, total_demand: u64, q2: u32) -> usize {
    (u64::from(p2) * total_demand).div_ceil(100 * u64::from(q2)) as usize
}
