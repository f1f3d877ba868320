use serde::{Deserialize, Serialize};

use super::formulas::BoundInputs;
use crate::numeric::extended_f64;

/// Slack allowed when comparing an exact empirical value against a bound.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// One bound compared against its exactly computed counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub inputs: BoundInputs,
    #[serde(with = "extended_f64")]
    pub bound: f64,
    #[serde(with = "extended_f64")]
    pub empirical: f64,
    /// `empirical ≤ bound + 1e-9`.
    pub satisfied: bool,
    /// `bound − empirical`.
    #[serde(with = "extended_f64")]
    pub slack: f64,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, inputs: BoundInputs, bound: f64, empirical: f64) -> Self {
        Self {
            name: name.into(),
            inputs,
            bound,
            empirical,
            satisfied: empirical <= bound + BOUND_TOLERANCE,
            slack: bound - empirical,
        }
    }
}
