//! Granular first-improvement local search over second-level routes.
//!
//! Neighbourhoods: relocate, swap, 2-opt, 2-opt* (routes of the same
//! satellite) and swap2-1 (a pair of consecutive customers against one
//! customer). Only pairs `(u, v)` with `v` among the `Γ` customers nearest
//! to `u` are tried.
//!
//! A candidate is first costed with the current charging stops frozen: each
//! stop stays attached to the customer it follows. Candidates that raise the
//! distance of the touched routes by more than 3% are dropped; the others are
//! re-costed exactly by the charging DP, with the first level rebuilt when
//! load moves between satellites, and applied only if the total cost drops.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::charging::{insert_stations, InsertionResult};
use crate::lns::first_level::build_first_level;
use crate::lns::Plan;
use crate::model::{FirstLevelRoute, Instance, Solution, Vertex};
use crate::multigraph::Multigraph;

/// Filter threshold: approximate distance may reach `FILTER_PERCENT` % of
/// the current distance of the routes involved.
pub const FILTER_PERCENT: i64 = 103;

/// The `Γ` nearest customers of every customer.
#[derive(Debug, Clone)]
pub struct NeighborLists {
    first: Vertex,
    lists: Vec<Vec<Vertex>>,
}

impl NeighborLists {
    /// Lists of length `min(gamma, n_c - 1)`, by distance then external id.
    pub fn new(inst: &Instance, gamma: usize) -> Self {
        let customers: Vec<Vertex> = inst.customer_vertices().collect();
        let lists = customers
            .iter()
            .map(|&u| {
                let mut l: Vec<Vertex> = customers.iter().copied().filter(|&v| v != u).collect();
                l.sort_by_key(|&v| (inst.dist(u, v), inst.external_id(v)));
                l.truncate(gamma);
                l
            })
            .collect();
        NeighborLists {
            first: inst.customer_vertices().start,
            lists,
        }
    }

    pub fn of(&self, u: Vertex) -> &[Vertex] {
        &self.lists[u - self.first]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Neighborhood {
    Relocate,
    Swap,
    TwoOpt,
    TwoOptStar,
    Swap21,
}

impl Neighborhood {
    pub const ALL: [Neighborhood; 5] = [
        Neighborhood::Relocate,
        Neighborhood::Swap,
        Neighborhood::TwoOpt,
        Neighborhood::TwoOptStar,
        Neighborhood::Swap21,
    ];
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LocalSearchStats {
    pub applied: u64,
    pub exact_evaluations: u64,
    pub filtered: u64,
}

type Change = (usize, Vec<Vertex>);

struct Accepted {
    changes: Vec<(usize, Vec<Vertex>, u32, InsertionResult)>,
    first_level: Option<(Vec<FirstLevelRoute>, i64)>,
}

struct Search<'a> {
    inst: &'a Instance,
    graph: &'a Multigraph,
    plan: &'a mut Plan,
    route_of: Vec<usize>,
    pos_of: Vec<usize>,
    /// Stop currently following each customer.
    after: Vec<Option<Vertex>>,
    stats: LocalSearchStats,
}

impl Search<'_> {
    fn index(&mut self) {
        for (ri, r) in self.plan.routes.iter().enumerate() {
            for (p, &c) in r.customers.iter().enumerate() {
                self.route_of[c] = ri;
                self.pos_of[c] = p;
                self.after[c] = None;
            }
            for &(leg, k) in &r.charge.stations {
                if leg > 0 {
                    self.after[r.customers[leg - 1]] = Some(k);
                }
            }
        }
    }

    fn approx_distance(&self, ri: usize, seq: &[Vertex]) -> i64 {
        let inst = self.inst;
        let r = &self.plan.routes[ri];
        let mut prev = r.satellite;
        let mut total = 0;
        if let Some(k) = r.start_station() {
            total += inst.dist(prev, k);
            prev = k;
        }
        for &c in seq {
            total += inst.dist(prev, c);
            prev = c;
            if let Some(k) = self.after[c] {
                total += inst.dist(c, k);
                prev = k;
            }
        }
        total + inst.dist(prev, r.satellite)
    }

    fn candidate(&self, n: Neighborhood, u: Vertex, v: Vertex, variant: bool) -> Option<Vec<Change>> {
        let (ru, iu) = (self.route_of[u], self.pos_of[u]);
        let (rv, iv) = (self.route_of[v], self.pos_of[v]);
        let a = &self.plan.routes[ru].customers;
        let b = &self.plan.routes[rv].customers;
        match n {
            Neighborhood::Relocate => {
                // variant: u goes before v instead of after it
                if ru == rv {
                    let mut s = a.clone();
                    s.remove(iu);
                    let at = s.iter().position(|&x| x == v)? + usize::from(!variant);
                    s.insert(at, u);
                    (s != *a).then(|| vec![(ru, s)])
                } else {
                    let mut sa = a.clone();
                    sa.remove(iu);
                    let mut sb = b.clone();
                    sb.insert(iv + usize::from(!variant), u);
                    Some(vec![(ru, sa), (rv, sb)])
                }
            }
            Neighborhood::Swap => {
                if ru == rv {
                    let mut s = a.clone();
                    s.swap(iu, iv);
                    Some(vec![(ru, s)])
                } else {
                    let mut sa = a.clone();
                    let mut sb = b.clone();
                    sa[iu] = v;
                    sb[iv] = u;
                    Some(vec![(ru, sa), (rv, sb)])
                }
            }
            Neighborhood::TwoOpt => {
                let (i, j) = (iu.min(iv), iu.max(iv));
                if ru != rv || j < i + 2 {
                    return None;
                }
                let mut s = a.clone();
                s[i + 1..=j].reverse();
                Some(vec![(ru, s)])
            }
            Neighborhood::TwoOptStar => {
                if ru == rv || self.plan.routes[ru].satellite != self.plan.routes[rv].satellite {
                    return None;
                }
                let (sa, sb) = if variant {
                    // u -> v -> (reversed head of b) ; (reversed tail of a) -> rest of b
                    let mut sa = a[..=iu].to_vec();
                    sa.extend(b[..=iv].iter().rev());
                    let mut sb: Vec<Vertex> = a[iu + 1..].iter().rev().copied().collect();
                    sb.extend_from_slice(&b[iv + 1..]);
                    (sa, sb)
                } else {
                    let mut sa = a[..=iu].to_vec();
                    sa.extend_from_slice(&b[iv..]);
                    let mut sb = b[..iv].to_vec();
                    sb.extend_from_slice(&a[iu + 1..]);
                    (sa, sb)
                };
                Some(vec![(ru, sa), (rv, sb)])
            }
            Neighborhood::Swap21 => {
                let s = *a.get(iu + 1)?;
                if v == s {
                    return None;
                }
                if ru == rv {
                    let mut out = Vec::with_capacity(a.len());
                    for (p, &x) in a.iter().enumerate() {
                        if p == iu {
                            out.push(v);
                        } else if p == iu + 1 {
                        } else if p == iv {
                            out.push(u);
                            out.push(s);
                        } else {
                            out.push(x);
                        }
                    }
                    Some(vec![(ru, out)])
                } else {
                    let mut sa = a.clone();
                    sa.splice(iu..=iu + 1, [v]);
                    let mut sb = b.clone();
                    sb.splice(iv..=iv, [u, s]);
                    Some(vec![(ru, sa), (rv, sb)])
                }
            }
        }
    }

    fn evaluate(&mut self, changes: Vec<Change>) -> Option<Accepted> {
        let inst = self.inst;
        let mut loads = Vec::with_capacity(changes.len());
        for (_, s) in &changes {
            let load: u32 = s.iter().map(|&c| inst.demand(c)).sum();
            if load > inst.q2_capacity {
                return None;
            }
            loads.push(load);
        }
        let sats: Vec<Vertex> = changes.iter().map(|(ri, _)| self.plan.routes[*ri].satellite).collect();
        let cross = sats.iter().any(|&k| k != sats[0])
            && changes
                .iter()
                .zip(&loads)
                .any(|((ri, _), &l)| l != self.plan.routes[*ri].load);
        let mut sat_loads = None;
        if cross {
            let mut sl = self.plan.satellite_loads(inst);
            for ((ri, _), &l) in changes.iter().zip(&loads) {
                let k = self.plan.routes[*ri].satellite;
                sl[k] = sl[k] + u64::from(l) - u64::from(self.plan.routes[*ri].load);
            }
            for &k in &sats {
                if inst.satellite(k).capacity.is_some_and(|cap| sl[k] > u64::from(cap)) {
                    return None;
                }
            }
            sat_loads = Some(sl);
        }

        let old_dist: i64 = changes.iter().map(|(ri, _)| self.plan.routes[*ri].charge.cost).sum();
        let approx: i64 = changes.iter().map(|(ri, s)| self.approx_distance(*ri, s)).sum();
        if 100 * approx > FILTER_PERCENT * old_dist {
            self.stats.filtered += 1;
            return None;
        }
        self.stats.exact_evaluations += 1;

        let mut delta = 0i64;
        let mut out = Vec::with_capacity(changes.len());
        for ((ri, s), l) in changes.into_iter().zip(loads) {
            let old = &self.plan.routes[ri].charge;
            delta -= old.objective() + inst.fixed_cost_l2;
            let charge = insert_stations(inst, self.graph, self.plan.routes[ri].satellite, &s);
            if !s.is_empty() {
                delta += charge.objective() + inst.fixed_cost_l2;
            }
            out.push((ri, s, l, charge));
        }
        let mut first_level = None;
        if let Some(sl) = sat_loads {
            let routes = build_first_level(inst, &sl)?;
            let dist: i64 = routes.iter().map(|r| r.distance(inst)).sum();
            delta += dist + inst.fixed_cost_l1 * routes.len() as i64
                - self.plan.first_level_distance
                - inst.fixed_cost_l1 * self.plan.first_level.len() as i64;
            first_level = Some((routes, dist));
        }
        (delta < 0).then_some(Accepted { changes: out, first_level })
    }

    fn apply(&mut self, acc: Accepted) {
        let mut emptied = Vec::new();
        for (ri, s, l, charge) in acc.changes {
            let r = &mut self.plan.routes[ri];
            if s.is_empty() {
                emptied.push(ri);
            }
            r.customers = s;
            r.load = l;
            r.charge = charge;
            r.dirty = false;
        }
        emptied.sort_unstable_by(|a, b| b.cmp(a));
        for ri in emptied {
            self.plan.routes.remove(ri);
        }
        if let Some((routes, dist)) = acc.first_level {
            self.plan.first_level = routes;
            self.plan.first_level_distance = dist;
        }
        self.stats.applied += 1;
        self.index();
    }
}

/// Improves `plan` in place until no filtered move lowers its cost.
///
/// Charges must be up to date on entry. Never increases the cost.
pub fn local_search<R: Rng>(
    inst: &Instance,
    graph: &Multigraph,
    neighbors: &NeighborLists,
    plan: &mut Plan,
    rng: &mut R,
) -> LocalSearchStats {
    let n = inst.num_vertices();
    let mut search = Search {
        inst,
        graph,
        plan,
        route_of: vec![usize::MAX; n],
        pos_of: vec![0; n],
        after: vec![None; n],
        stats: LocalSearchStats::default(),
    };
    search.index();
    let mut order: Vec<Vertex> = inst.customer_vertices().collect();
    let mut hoods = Neighborhood::ALL;
    loop {
        let before = search.stats.applied;
        order.shuffle(rng);
        for &u in &order {
            hoods.shuffle(rng);
            for &h in &hoods {
                for &v in neighbors.of(u) {
                    for variant in [false, true] {
                        if variant && !matches!(h, Neighborhood::Relocate | Neighborhood::TwoOptStar) {
                            continue;
                        }
                        let Some(changes) = search.candidate(h, u, v, variant) else { continue };
                        if let Some(acc) = search.evaluate(changes) {
                            search.apply(acc);
                        }
                    }
                }
            }
        }
        if search.stats.applied == before {
            break;
        }
    }
    search.stats
}

/// [`local_search`] on a complete solution; stations are re-optimised first.
pub fn improve_solution<R: Rng>(
    inst: &Instance,
    graph: &Multigraph,
    neighbors: &NeighborLists,
    sol: &Solution,
    rng: &mut R,
) -> Solution {
    let mut plan = Plan::from_solution(inst, graph, sol);
    local_search(inst, graph, neighbors, &mut plan, rng);
    plan.to_solution(inst).expect("local search keeps vertices valid")
}
