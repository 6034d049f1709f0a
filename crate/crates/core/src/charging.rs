//! Optimal placement of charging stops along a fixed customer sequence.
//!
//! The sequence `satellite, c1, .., cK-1, satellite` defines an acyclic
//! multigraph whose parallel arcs between consecutive positions are the
//! multigraph bundles. A label-setting pass in position order with
//! (cost, consumption) dominance yields the cheapest battery-feasible choice
//! of at most one charging stop per leg.

use serde::Serialize;

use crate::model::{Instance, Vertex};
use crate::multigraph::{MultiArc, Multigraph};

/// Outcome of a charging-stop insertion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InsertionResult {
    pub feasible: bool,
    /// Route distance, stops included. `i64::MAX` when infeasible and no
    /// route was produced.
    pub cost: i64,
    /// `(leg, station)`: stop placed on leg `leg`, i.e. between sequence
    /// positions `leg` and `leg + 1` (position 0 is the satellite).
    pub stations: Vec<(usize, Vertex)>,
    /// Energy units by which the battery was overdrawn.
    pub excess: i64,
    /// `excess * M`.
    pub penalty: i64,
}

impl InsertionResult {
    fn infeasible() -> Self {
        InsertionResult {
            feasible: false,
            cost: i64::MAX,
            stations: Vec::new(),
            excess: 0,
            penalty: 0,
        }
    }

    fn empty() -> Self {
        InsertionResult {
            feasible: true,
            cost: 0,
            stations: Vec::new(),
            excess: 0,
            penalty: 0,
        }
    }

    /// Distance plus battery penalty.
    pub fn objective(&self) -> i64 {
        self.cost.saturating_add(self.penalty)
    }

    /// Interleaves the charging stops with `customers` to give the visit
    /// sequence of the route (satellite excluded at both ends).
    pub fn visits(&self, customers: &[Vertex]) -> Vec<Vertex> {
        let mut out = Vec::with_capacity(customers.len() + self.stations.len());
        let mut stops = self.stations.iter().peekable();
        for leg in 0..=customers.len() {
            if let Some(&&(l, k)) = stops.peek() {
                if l == leg {
                    out.push(k);
                    stops.next();
                }
            }
            if leg < customers.len() {
                out.push(customers[leg]);
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy)]
pub struct LabelingOptions {
    /// Prune labels dominated in (excess, cost, consumption). Disabling it
    /// keeps every label and is only practical on short sequences.
    pub dominance: bool,
}

impl Default for LabelingOptions {
    fn default() -> Self {
        LabelingOptions { dominance: true }
    }
}

#[derive(Debug, Clone, Copy)]
struct Label {
    w: i64,
    cost: i64,
    excess: i64,
    parent: u32,
    station: Option<Vertex>,
}

const ROOT: u32 = u32::MAX;

/// Cheapest battery-feasible insertion of charging stops, or an infeasible
/// result if none exists.
pub fn optimal_insertion(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    customers: &[Vertex],
) -> InsertionResult {
    label(inst, graph, satellite, customers, false, LabelingOptions::default())
}

/// Like [`optimal_insertion`] but lets the battery be overdrawn; every unit
/// of excess costs `M`, so the least-excess route wins and distance breaks
/// ties. Always produces a route.
pub fn penalized_insertion(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    customers: &[Vertex],
) -> InsertionResult {
    label(inst, graph, satellite, customers, true, LabelingOptions::default())
}

/// Optimal insertion, falling back to the penalized variant when the
/// sequence admits no battery-feasible stop placement.
pub fn insert_stations(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    customers: &[Vertex],
) -> InsertionResult {
    let r = optimal_insertion(inst, graph, satellite, customers);
    if r.feasible {
        r
    } else {
        penalized_insertion(inst, graph, satellite, customers)
    }
}

pub fn optimal_insertion_with(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    customers: &[Vertex],
    opts: LabelingOptions,
) -> InsertionResult {
    label(inst, graph, satellite, customers, false, opts)
}

fn label(
    inst: &Instance,
    graph: &Multigraph,
    satellite: Vertex,
    customers: &[Vertex],
    penalized: bool,
    opts: LabelingOptions,
) -> InsertionResult {
    if customers.is_empty() {
        return InsertionResult::empty();
    }
    let limit = inst.battery_limit();
    let legs = customers.len() + 1;
    let at = |pos: usize| if pos == 0 || pos == legs { satellite } else { customers[pos - 1] };

    let mut arena: Vec<Label> = Vec::with_capacity(legs * 4);
    let mut current: Vec<u32> = Vec::new();
    let mut next: Vec<Label> = Vec::new();
    let root = Label { w: 0, cost: 0, excess: 0, parent: ROOT, station: None };

    for leg in 0..legs {
        let (from, to) = (at(leg), at(leg + 1));
        let arcs = graph.bundle(from, to);
        next.clear();
        let parents: Vec<(u32, Label)> = if leg == 0 {
            vec![(ROOT, root)]
        } else {
            current.iter().map(|&i| (i, arena[i as usize])).collect()
        };
        for (pid, p) in parents {
            if penalized {
                if arcs.is_empty() {
                    // no admissible arc at all: take the raw leg and pay for it
                    let mut w = p.w + inst.energy(from, to);
                    let mut excess = p.excess;
                    if w > limit {
                        excess += w - limit;
                        w = limit;
                    }
                    next.push(Label { w, cost: p.cost + inst.dist(from, to), excess, parent: pid, station: None });
                }
                for a in arcs {
                    next.push(extend_penalized(&p, pid, a, limit));
                }
            } else {
                for a in arcs {
                    if let Some(w) = a.extend(p.w, limit) {
                        next.push(Label { w, cost: p.cost + a.cost, excess: 0, parent: pid, station: a.station });
                    }
                }
            }
        }
        if next.is_empty() {
            return InsertionResult::infeasible();
        }
        if opts.dominance {
            prune(&mut next);
        }
        current.clear();
        for l in next.drain(..) {
            current.push(arena.len() as u32);
            arena.push(l);
        }
    }

    let best = current
        .iter()
        .copied()
        .min_by_key(|&i| {
            let l = &arena[i as usize];
            (l.excess, l.cost, l.w)
        })
        .expect("at least one terminal label");
    let end = arena[best as usize];
    let mut stations = Vec::new();
    let mut cursor = best;
    let mut leg = legs;
    while cursor != ROOT {
        leg -= 1;
        let l = arena[cursor as usize];
        if let Some(k) = l.station {
            stations.push((leg, k));
        }
        cursor = l.parent;
    }
    stations.reverse();
    InsertionResult {
        feasible: end.excess == 0,
        cost: end.cost,
        stations,
        excess: end.excess,
        penalty: end.excess * inst.big_m(),
    }
}

fn extend_penalized(p: &Label, pid: u32, a: &MultiArc, limit: i64) -> Label {
    let mut excess = p.excess;
    let w = if a.station.is_some() {
        let reach = p.w + a.approach;
        if reach > limit {
            excess += reach - limit;
        }
        a.consumption
    } else {
        let w = p.w + a.consumption;
        if w > limit {
            excess += w - limit;
            limit
        } else {
            w
        }
    };
    Label { w, cost: p.cost + a.cost, excess, parent: pid, station: a.station }
}

/// Keeps the labels not dominated in (excess, cost, w); among identical
/// triples the first one generated survives.
fn prune(labels: &mut Vec<Label>) {
    labels.sort_by_key(|l| (l.excess, l.cost, l.w));
    if labels.iter().all(|l| l.excess == 0) {
        let mut best_w = i64::MAX;
        labels.retain(|l| {
            if l.w < best_w {
                best_w = l.w;
                true
            } else {
                false
            }
        });
        return;
    }
    let mut kept: Vec<Label> = Vec::with_capacity(labels.len());
    for l in labels.drain(..) {
        let dominated = kept
            .iter()
            .any(|k| k.excess <= l.excess && k.cost <= l.cost && k.w <= l.w);
        if !dominated {
            kept.push(l);
        }
    }
    *labels = kept;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConsumptionFactor, Customer, InstanceData, Point, Satellite, Station};

    fn line(battery: u32, with_station: bool) -> Instance {
        Instance::new(InstanceData {
            name: "line".into(),
            depot: Point::new(0, -1000),
            satellites: vec![Satellite { id: 1, location: Point::new(0, 0), capacity: None, vehicles: 2 }],
            customers: vec![
                Customer { id: 2, location: Point::new(90, 0), demand: 1 },
                Customer { id: 3, location: Point::new(180, 0), demand: 1 },
            ],
            stations: if with_station { vec![Station { id: 4, location: Point::new(90, 10) }] } else { vec![] },
            q1_capacity: 10,
            m1_fleet: 1,
            q2_capacity: 5,
            m2_global: 2,
            battery_capacity: Some(battery),
            fixed_cost_l1: 0,
            fixed_cost_l2: 0,
            consumption_factor: ConsumptionFactor::ONE,
        })
        .unwrap()
    }

    #[test]
    fn no_detour_when_battery_suffices() {
        let inst = line(400, true);
        let g = Multigraph::new(&inst);
        let r = optimal_insertion(&inst, &g, 1, &[2, 3]);
        assert!(r.feasible);
        assert_eq!(r.cost, 360);
        assert!(r.stations.is_empty());
    }

    #[test]
    fn empty_sequence() {
        let inst = line(400, true);
        let g = Multigraph::new(&inst);
        let r = optimal_insertion(&inst, &g, 1, &[]);
        assert!(r.feasible);
        assert_eq!((r.cost, r.stations.len()), (0, 0));
    }

    #[test]
    fn cheapest_leg_gets_the_stop() {
        // legs 90, 90, 180 (total 360); station (90,10) is 91 from the
        // satellite and from c3, 10 from c2. With L = 300 the cheapest
        // feasible plan recharges on the way back: 90 + 90 + 91 + 91 = 362.
        let inst = line(300, true);
        let g = Multigraph::new(&inst);
        let r = optimal_insertion(&inst, &g, 1, &[2, 3]);
        assert!(r.feasible);
        assert_eq!(r.cost, 362);
        assert_eq!(r.stations, vec![(2, 4)]);
        assert_eq!(r.visits(&[2, 3]), vec![2, 3, 4]);
    }

    #[test]
    fn short_battery_is_infeasible() {
        // with L = 100 the return leg (180, or 91 + 91 after reaching c3
        // with at least 91 consumed) cannot be covered
        let inst = line(100, true);
        let g = Multigraph::new(&inst);
        assert!(!optimal_insertion(&inst, &g, 1, &[2, 3]).feasible);
    }

    #[test]
    fn penalized_matches_optimal_when_feasible() {
        let inst = line(300, true);
        let g = Multigraph::new(&inst);
        assert_eq!(optimal_insertion(&inst, &g, 1, &[2, 3]), penalized_insertion(&inst, &g, 1, &[2, 3]));
        assert_eq!(insert_stations(&inst, &g, 1, &[3, 2]), optimal_insertion(&inst, &g, 1, &[3, 2]));
    }

    #[test]
    fn penalized_direct_route_without_stations() {
        // satellite is the only charger and is excluded as a stop on its own
        // legs; legs 90, 90, 180 all fit L = 200 individually.
        let inst = line(200, false);
        let g = Multigraph::new(&inst);
        assert!(!optimal_insertion(&inst, &g, 1, &[2, 3]).feasible);
        let r = penalized_insertion(&inst, &g, 1, &[2, 3]);
        assert!(!r.feasible);
        assert_eq!(r.cost, 360);
        assert_eq!(r.excess, 360 - 200);
        assert_eq!(r.penalty, 160 * inst.big_m());
        assert!(r.stations.is_empty());
    }

    #[test]
    fn penalized_uses_raw_leg_when_bundle_is_empty() {
        // L = 150 removes the direct 180 leg from the multigraph entirely
        let inst = line(150, false);
        let g = Multigraph::new(&inst);
        assert!(g.bundle(3, 1).is_empty());
        let r = penalized_insertion(&inst, &g, 1, &[2, 3]);
        assert_eq!(r.cost, 360);
        assert_eq!(r.excess, 360 - 150);
    }

    #[test]
    fn big_m_exceeds_route_length() {
        let inst = line(300, true);
        let g = Multigraph::new(&inst);
        let feasible = optimal_insertion(&inst, &g, 1, &[2, 3]);
        assert!(feasible.objective() < inst.big_m());
    }

    #[test]
    fn visits_interleave_stops() {
        let r = InsertionResult {
            feasible: true,
            cost: 0,
            stations: vec![(0, 10), (2, 11), (3, 12)],
            excess: 0,
            penalty: 0,
        };
        assert_eq!(r.visits(&[1, 2, 3]), vec![10, 1, 2, 11, 3, 12]);
    }
}
