//! Closed-form bounds, thresholds and their combinatorial helpers.

pub mod formulas;
pub mod gamma;
pub mod report;
pub mod stirling;
pub mod thresholds;

pub use formulas::{
    bound_alpha_above_k, bound_infty, bound_integer_alpha, bound_real_alpha, bound_real_alpha_simplified, bucket_bound,
    dk_bound_sharp, dk_bound_simple, infty_from_dk, BoundInputs,
};
pub use gamma::{forward as gamma_forward, gamma_fn};
pub use report::{BoundReport, BOUND_TOLERANCE};
pub use stirling::{bell, ln_stirling2, stirling2, stirling_row, MAX_STIRLING_K};
pub use thresholds::{m_threshold, Regime};
