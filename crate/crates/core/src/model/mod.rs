//! Problem and solution data model.
//!
//! Vertices of an [`Instance`] are addressed by a dense [`Vertex`] index laid
//! out as `depot, satellites.., customers.., stations..`. File formats use the
//! external ids carried by each record; the mapping lives in the instance.

mod feasibility;
pub(crate) mod instance;
mod io;
mod solution;

pub use feasibility::{check_feasibility, Verdict, Violation};
pub use instance::{
    ConsumptionFactor, Customer, Instance, InstanceData, Satellite, Station, VertexKind,
};
pub use io::{parse_instance, parse_solution, write_instance, write_solution};
pub use solution::{evaluate_cost, CostBreakdown, Delivery, FirstLevelRoute, SecondLevelRoute, Solution};

use serde::{Deserialize, Serialize};

/// Dense vertex index into an [`Instance`].
pub type Vertex = usize;

/// Planar point with integer coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: i64,
    pub y: i64,
}

impl Point {
    pub const fn new(x: i64, y: i64) -> Self {
        Point { x, y }
    }

    pub fn euclidean(&self, other: &Point) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        dx.hypot(dy)
    }
}

/// Euclidean distance rounded to the nearest integer, halves rounded up.
///
/// Computed in integer arithmetic: with `s = dx² + dy²` and `r = isqrt(s)`,
/// the result is `r + 1` exactly when `s > r² + r`. A squared distance is an
/// integer, so `sqrt(s)` is never exactly `k + 0.5` and the tie rule only
/// matters for documentation.
pub fn rounded_distance(a: Point, b: Point) -> i64 {
    let dx = a.x.abs_diff(b.x);
    let dy = a.y.abs_diff(b.y);
    let s = dx * dx + dy * dy;
    let r = s.isqrt();
    if s > r * r + r {
        (r + 1) as i64
    } else {
        r as i64
    }
}
