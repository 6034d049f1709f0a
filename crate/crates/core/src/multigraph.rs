//! Second-level multigraph: parallel arcs between satellites and customers,
//! each standing for a direct leg or a leg through exactly one charging point.

use std::cmp::Ordering;
use std::io::{self, Write};

use crate::error::ModelError;
use crate::model::{Instance, SecondLevelRoute, Vertex};

/// One parallel arc `(tail, head, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultiArc {
    pub tail: Vertex,
    pub head: Vertex,
    /// Travel cost: `d(tail, head)` or `d(tail, k) + d(k, head)`.
    pub cost: i64,
    /// Consumption charged against the battery on arrival at `head`: the
    /// whole leg for a direct arc, only the `k -> head` part otherwise.
    pub consumption: i64,
    /// Intermediate charging point, `None` for the direct arc.
    pub station: Option<Vertex>,
    /// Energy spent before the next recharge opportunity: `c(tail, k)` for a
    /// via-station arc, the full consumption for a direct arc. An arc can be
    /// taken from battery state `w` iff `w + approach <= L`.
    pub approach: i64,
}

impl MultiArc {
    pub fn is_direct(&self) -> bool {
        self.station.is_none()
    }

    /// Consumption on arrival at `head` when leaving `tail` with `w`, or
    /// `None` if the battery would run out.
    #[inline]
    pub fn extend(&self, w: i64, limit: i64) -> Option<i64> {
        if w + self.approach > limit {
            None
        } else if self.station.is_some() {
            Some(self.consumption)
        } else {
            Some(w + self.consumption)
        }
    }

    fn sort_key(&self) -> (i64, i64, i64, usize) {
        (
            self.cost,
            self.consumption,
            self.approach,
            self.station.map_or(0, |k| k + 1),
        )
    }
}

/// Parallel-arc bundles for every admissible ordered pair of satellites and
/// customers. Satellite-to-satellite pairs and self-loops have no bundle.
#[derive(Debug, Clone)]
pub struct Multigraph {
    nodes: usize,
    bundles: Vec<Vec<MultiArc>>,
    reduced: bool,
}

impl Multigraph {
    /// Builds and reduces the multigraph of `inst`.
    pub fn new(inst: &Instance) -> Self {
        Self::build(inst).reduce_by_dominance(inst)
    }

    /// Builds every arc that survives the battery filter, without dominance
    /// reduction. Every satellite counts as a charging point.
    pub fn build(inst: &Instance) -> Self {
        let ns = inst.num_satellites();
        let nodes = 1 + ns + inst.num_customers();
        let limit = inst.battery_limit();
        let chargers: Vec<Vertex> = inst.charging_points().collect();
        let mut bundles = vec![Vec::new(); nodes * nodes];
        for i in 1..nodes {
            for j in 1..nodes {
                if i == j || (i <= ns && j <= ns) {
                    continue;
                }
                let bundle = &mut bundles[i * nodes + j];
                let c = inst.energy(i, j);
                if c <= limit {
                    bundle.push(MultiArc {
                        tail: i,
                        head: j,
                        cost: inst.dist(i, j),
                        consumption: c,
                        station: None,
                        approach: c,
                    });
                }
                if inst.battery_unlimited() {
                    continue;
                }
                for &k in &chargers {
                    if k == i || k == j {
                        continue;
                    }
                    let (cik, ckj) = (inst.energy(i, k), inst.energy(k, j));
                    if cik <= limit && ckj <= limit {
                        bundle.push(MultiArc {
                            tail: i,
                            head: j,
                            cost: inst.dist(i, k) + inst.dist(k, j),
                            consumption: ckj,
                            station: Some(k),
                            approach: cik,
                        });
                    }
                }
                bundle.sort_by_key(MultiArc::sort_key);
            }
        }
        Multigraph {
            nodes,
            bundles,
            reduced: false,
        }
    }

    /// Removes dominated parallel arcs.
    ///
    /// From a satellite the vehicle always leaves fully charged, so an arc is
    /// dropped when another one is no worse in both cost and consumption.
    /// From a customer, a via-station arc is dropped only when another
    /// via-station arc is also no worse in the energy needed to reach its
    /// station. Fully equal arcs keep the first in (cost, consumption,
    /// station) order.
    pub fn reduce_by_dominance(mut self, inst: &Instance) -> Self {
        let ns = inst.num_satellites();
        for (slot, bundle) in self.bundles.iter_mut().enumerate() {
            if bundle.len() < 2 {
                continue;
            }
            let tail = slot / self.nodes;
            let mut kept: Vec<MultiArc> = Vec::with_capacity(bundle.len());
            if tail <= ns {
                let mut arcs = std::mem::take(bundle);
                arcs.sort_by(|a, b| {
                    (a.cost, a.consumption, a.station.map_or(0, |k| k + 1))
                        .cmp(&(b.cost, b.consumption, b.station.map_or(0, |k| k + 1)))
                });
                let mut best_consumption = i64::MAX;
                for a in arcs {
                    if a.consumption < best_consumption {
                        best_consumption = a.consumption;
                        kept.push(a);
                    }
                }
            } else {
                bundle.sort_by_key(MultiArc::sort_key);
                for a in bundle.iter() {
                    let dominated = a.station.is_some()
                        && kept.iter().any(|b| {
                            b.station.is_some()
                                && b.cost <= a.cost
                                && b.consumption <= a.consumption
                                && b.approach <= a.approach
                        });
                    if !dominated {
                        kept.push(*a);
                    }
                }
            }
            kept.sort_by_key(MultiArc::sort_key);
            *bundle = kept;
        }
        self.reduced = true;
        self
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    #[inline]
    pub fn bundle(&self, tail: Vertex, head: Vertex) -> &[MultiArc] {
        if tail >= self.nodes || head >= self.nodes {
            return &[];
        }
        &self.bundles[tail * self.nodes + head]
    }

    pub fn arc_count(&self) -> usize {
        self.bundles.iter().map(Vec::len).sum()
    }

    pub fn max_parallel_arcs(&self) -> usize {
        self.bundles.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Debug dump: `tail,head,p,cost,consumption,station` with external ids;
    /// station 0 marks a direct arc.
    pub fn write_csv<W: Write>(&self, inst: &Instance, mut out: W) -> io::Result<()> {
        writeln!(out, "tail,head,p,cost,consumption,station")?;
        for bundle in &self.bundles {
            for (p, a) in bundle.iter().enumerate() {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    inst.external_id(a.tail),
                    inst.external_id(a.head),
                    p + 1,
                    a.cost,
                    a.consumption,
                    a.station.map_or(0, |k| inst.external_id(k))
                )?;
            }
        }
        Ok(())
    }
}

/// Expands a route given as a chain of multigraph arcs into the original
/// graph, inserting each arc's charging point between its endpoints.
pub fn expand_route(inst: &Instance, arcs: &[MultiArc]) -> Result<SecondLevelRoute, ModelError> {
    let Some(first) = arcs.first() else {
        return Err(ModelError::Invalid("empty arc chain".into()));
    };
    let satellite = first.tail;
    if !inst.is_satellite(satellite) {
        return Err(ModelError::WrongKind {
            vertex: satellite,
            expected: "satellite",
        });
    }
    let mut visits = Vec::with_capacity(arcs.len() * 2);
    for (n, pair) in arcs.windows(2).enumerate() {
        if pair[0].head != pair[1].tail {
            return Err(ModelError::Invalid(format!(
                "arc {} ends at {} but arc {} starts at {}",
                n,
                pair[0].head,
                n + 1,
                pair[1].tail
            )));
        }
    }
    if arcs[arcs.len() - 1].head != satellite {
        return Err(ModelError::Invalid("arc chain does not return to its satellite".into()));
    }
    for (n, a) in arcs.iter().enumerate() {
        if let Some(k) = a.station {
            visits.push(k);
        }
        if n + 1 < arcs.len() {
            visits.push(a.head);
        }
    }
    let load = visits.iter().map(|&v| inst.demand(v)).sum();
    Ok(SecondLevelRoute {
        satellite,
        visits,
        load,
    })
}

impl PartialOrd for MultiArc {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MultiArc {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.tail, self.head, self.sort_key()).cmp(&(other.tail, other.head, other.sort_key()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        check_feasibility, ConsumptionFactor, Customer, Delivery, FirstLevelRoute, InstanceData,
        Point, Satellite, Solution, Station,
    };

    fn instance(battery: u32) -> Instance {
        Instance::new(InstanceData {
            name: "mg".into(),
            depot: Point::new(0, -500),
            satellites: vec![Satellite { id: 1, location: Point::new(0, 0), capacity: None, vehicles: 1 }],
            customers: vec![Customer { id: 2, location: Point::new(100, 0), demand: 1 }],
            stations: vec![Station { id: 3, location: Point::new(50, 50) }],
            q1_capacity: 10,
            m1_fleet: 1,
            q2_capacity: 5,
            m2_global: 1,
            battery_capacity: Some(battery),
            fixed_cost_l1: 0,
            fixed_cost_l2: 0,
            consumption_factor: ConsumptionFactor::ONE,
        })
        .unwrap()
    }

    #[test]
    fn direct_and_via_station_arcs() {
        let inst = instance(200);
        let g = Multigraph::build(&inst);
        let b = g.bundle(1, 2);
        assert_eq!(b.len(), 2);
        assert_eq!((b[0].cost, b[0].consumption, b[0].station), (100, 100, None));
        // d((0,0),(50,50)) = d((50,50),(100,0)) = round(70.71) = 71
        assert_eq!((b[1].cost, b[1].consumption, b[1].station, b[1].approach), (142, 71, Some(3), 71));
        // neither dominates: the direct arc is cheaper, the via arc consumes less
        assert_eq!(g.clone().reduce_by_dominance(&inst).bundle(1, 2).len(), 2);
    }

    #[test]
    fn battery_filter_can_empty_a_bundle() {
        let inst = instance(60);
        let g = Multigraph::build(&inst);
        assert!(g.bundle(1, 2).is_empty());
        assert!(g.bundle(2, 1).is_empty());
    }

    #[test]
    fn no_self_loops_or_satellite_pairs() {
        let inst = instance(200);
        let g = Multigraph::build(&inst);
        assert!(g.bundle(1, 1).is_empty());
        assert!(g.bundle(2, 2).is_empty());
        assert!(g.bundle(0, 1).is_empty());
    }

    fn arc(tail: Vertex, cost: i64, consumption: i64, station: Option<Vertex>, approach: i64) -> MultiArc {
        MultiArc { tail, head: 9, cost, consumption, station, approach }
    }

    fn reduce_one(inst: &Instance, arcs: Vec<MultiArc>) -> Vec<MultiArc> {
        let nodes = 10;
        let mut bundles = vec![Vec::new(); nodes * nodes];
        bundles[arcs[0].tail * nodes + 9] = arcs.clone();
        let g = Multigraph { nodes, bundles, reduced: false }.reduce_by_dominance(inst);
        g.bundle(arcs[0].tail, 9).to_vec()
    }

    #[test]
    fn satellite_tail_dominance() {
        let inst = instance(200);
        let kept = reduce_one(&inst, vec![arc(1, 142, 71, Some(3), 71), arc(1, 150, 80, Some(4), 60)]);
        assert_eq!(kept, vec![arc(1, 142, 71, Some(3), 71)]);
        let kept = reduce_one(&inst, vec![arc(1, 150, 80, Some(5), 10), arc(1, 150, 80, Some(4), 60)]);
        assert_eq!(kept, vec![arc(1, 150, 80, Some(4), 60)]);
        let single = vec![arc(1, 150, 80, Some(5), 10)];
        assert_eq!(reduce_one(&inst, single.clone()), single);
    }

    #[test]
    fn customer_tail_dominance_needs_all_three() {
        let inst = instance(200);
        // equal (d, c) but the first reaches its station more cheaply: the
        // second is dominated, the first is not.
        let a = arc(2, 150, 80, Some(5), 30);
        let b = arc(2, 150, 80, Some(6), 40);
        assert_eq!(reduce_one(&inst, vec![a, b]), vec![a]);
        // cheaper cost but worse approach: both survive
        let a = arc(2, 140, 80, Some(5), 50);
        let b = arc(2, 150, 80, Some(6), 40);
        assert_eq!(reduce_one(&inst, vec![a, b]).len(), 2);
        // direct arcs are never removed at a customer tail
        let d = arc(2, 200, 200, None, 200);
        let v = arc(2, 100, 10, Some(5), 10);
        assert_eq!(reduce_one(&inst, vec![d, v]).len(), 2);
    }

    #[test]
    fn expansion_preserves_cost() {
        let inst = instance(200);
        let g = Multigraph::build(&inst);
        let out = g.bundle(1, 2)[1];
        let back = g.bundle(2, 1)[0];
        let route = expand_route(&inst, &[out, back]).unwrap();
        assert_eq!(route.visits, vec![3, 2]);
        assert_eq!(route.distance(&inst), out.cost + back.cost);
        let direct = expand_route(&inst, &[g.bundle(1, 2)[0], back]).unwrap();
        assert_eq!(direct.visits, vec![2]);
        let l1 = vec![FirstLevelRoute { deliveries: vec![Delivery { satellite: 1, quantity: 1 }] }];
        let sol = Solution::new(&inst, l1, vec![route]).unwrap();
        assert!(check_feasibility(&inst, &sol).is_ok());
        assert!(expand_route(&inst, &[out, out]).is_err());
        assert!(expand_route(&inst, &[out]).is_err());
    }

    #[test]
    fn csv_dump() {
        let inst = instance(200);
        let g = Multigraph::new(&inst);
        let mut buf = Vec::new();
        g.write_csv(&inst, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("tail,head,p,cost,consumption,station\n"));
        assert!(text.contains("1,2,1,100,100,0\n"));
        assert!(text.contains("1,2,2,142,71,3\n"));
    }
}
