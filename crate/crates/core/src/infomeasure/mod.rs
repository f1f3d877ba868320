//! Finite distributions and their Rényi functionals.

pub mod measures;
pub mod pmf;

pub use measures::{
    conditional_divergence, conditional_renyi_entropy, joint_divergence_from_uniform, renyi_divergence, renyi_entropy,
    tilde_conditional_entropy, tv_distance, tv_to_uniform_product,
};
pub use pmf::{Alpha, JointPmf, Pmf, MIN_ALPHA_GAP, NORMALIZATION_TOLERANCE};
