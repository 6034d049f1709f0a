use crate::model::{Delivery, FirstLevelRoute, Instance, Vertex};

/// Builds first-level routes delivering `loads[k]` to every satellite `k`.
///
/// Each satellite first gets full-truckload round trips until its residual
/// is below `Q1`. Residuals are then placed in decreasing order, each at its
/// cheapest position in a route with enough spare capacity or in a new route.
/// When the fleet is exhausted a residual is split over the spare capacity of
/// existing routes. Returns `None` if `m1` trucks cannot carry the demand.
pub fn build_first_level(inst: &Instance, loads: &[u64]) -> Option<Vec<FirstLevelRoute>> {
    let q1 = u64::from(inst.q1_capacity);
    let m1 = inst.m1_fleet as usize;
    let depot = inst.depot();
    let mut routes: Vec<FirstLevelRoute> = Vec::new();
    let mut residuals: Vec<(u64, Vertex)> = Vec::new();
    for k in inst.satellite_vertices() {
        let mut r = loads[k];
        while r >= q1 {
            routes.push(FirstLevelRoute {
                deliveries: vec![Delivery { satellite: k, quantity: q1 as u32 }],
            });
            r -= q1;
        }
        if r > 0 {
            residuals.push((r, k));
        }
    }
    if routes.len() > m1 {
        return None;
    }
    residuals.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    // (delta, route, position) of the cheapest insertion of k into routes
    // with at least `need` spare units; position is ignored if k is present
    let cheapest = |routes: &[FirstLevelRoute], k: Vertex, need: u64| {
        let mut best: Option<(i64, usize, usize)> = None;
        for (ri, r) in routes.iter().enumerate() {
            if q1 - r.load() < need {
                continue;
            }
            if r.deliveries.iter().any(|d| d.satellite == k) {
                if best.is_none_or(|b| 0 < b.0) {
                    best = Some((0, ri, usize::MAX));
                }
                continue;
            }
            let mut prev = depot;
            for pos in 0..=r.deliveries.len() {
                let next = r.deliveries.get(pos).map_or(depot, |d| d.satellite);
                let delta = inst.dist(prev, k) + inst.dist(k, next) - inst.dist(prev, next);
                if best.is_none_or(|b| delta < b.0) {
                    best = Some((delta, ri, pos));
                }
                prev = next;
            }
        }
        best
    };
    let place = |routes: &mut Vec<FirstLevelRoute>, ri: usize, pos: usize, k: Vertex, qty: u64| {
        let r = &mut routes[ri];
        if let Some(d) = r.deliveries.iter_mut().find(|d| d.satellite == k) {
            d.quantity += qty as u32;
        } else {
            r.deliveries.insert(pos, Delivery { satellite: k, quantity: qty as u32 });
        }
    };

    for (mut r, k) in residuals {
        let fresh = 2 * inst.dist(depot, k) + inst.fixed_cost_l1;
        match cheapest(&routes, k, r) {
            Some((delta, ri, pos)) if routes.len() >= m1 || delta <= fresh => {
                place(&mut routes, ri, pos, k, r);
            }
            _ if routes.len() < m1 => routes.push(FirstLevelRoute {
                deliveries: vec![Delivery { satellite: k, quantity: r as u32 }],
            }),
            _ => {
                while r > 0 {
                    let (_, ri, pos) = cheapest(&routes, k, 1)?;
                    let qty = r.min(q1 - routes[ri].load());
                    place(&mut routes, ri, pos, k, qty);
                    r -= qty;
                }
            }
        }
    }
    Some(routes)
}
