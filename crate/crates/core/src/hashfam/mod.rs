//! Finite fields, k*-universal hash families and exhaustive universality
//! certification.

pub mod family;
pub mod field;
pub mod universality;

pub use family::{FamilyKind, HashFamily, SeedEvaluator};
pub use field::{find_irreducible, gf_add, gf_inv, gf_mul, gf_neg, gf_pow, is_prime, Field, FieldElement, FieldParams};
pub use universality::{certify_k_star, verify_universality, Certification, CollisionReport, Ratio};
