//! Machine-checkable reports for the identities, inequalities, scans and
//! numeric claims around the closed form.

pub mod checks;
pub mod identity;
pub mod monotone;
pub mod poly;

use serde::Serialize;
use serde_json::{Map, Value};

pub use checks::{
    bounds_check, euler_relation_check, nonconcavity_example, nonobtuse_hessian_check, sample_nonobtuse,
    NONCONCAVITY_DIFFERENCE,
};
pub use identity::{euler_row, literal_row12, polynomial_identity};
pub use monotone::{
    h_monotonicity_scan, j_direct, j_from_k, k_func, p_func, p_func_literal, p_inequality_lhs, p_inequality_scan,
    p_limit, p_ordering_scan, u_interval, u_interval_scan, HScanGrid, PScanGrid,
};
pub use poly::IntPolynomial6;

/// Outcome of one check over a grid or a fixed set of cases.
///
/// `pass` is `worst_margin > threshold`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub name: String,
    pub grid: String,
    pub points: u64,
    pub worst_margin: f64,
    pub worst_at: Vec<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub details: Map<String, Value>,
}

impl ScanReport {
    pub fn new(name: &str, grid: impl Into<String>, points: u64, worst_margin: f64, worst_at: Vec<f64>, threshold: f64) -> Self {
        Self {
            name: name.into(),
            grid: grid.into(),
            points,
            worst_margin,
            worst_at,
            threshold,
            pass: worst_margin > threshold,
            details: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.details.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }
}

/// Smallest margin and where it occurred; NaN margins count as failures.
pub(crate) fn worst<I: IntoIterator<Item = (f64, Vec<f64>)>>(it: I) -> (f64, Vec<f64>, u64) {
    let mut best = (f64::INFINITY, Vec::new());
    let mut n = 0;
    for (m, at) in it {
        n += 1;
        let m = if m.is_nan() { f64::NEG_INFINITY } else { m };
        if m < best.0 {
            best = (m, at);
        }
    }
    (best.0, best.1, n)
}
