//! k*-universal hash families over finite fields, exact output distributions
//! of leftover hashing, Rényi entropies and divergences, and the closed-form
//! bounds relating them.

pub mod bounds;
pub mod error;
pub mod extractor;
pub mod hashfam;
pub mod infomeasure;
pub mod numeric;

pub use bounds::{BoundInputs, BoundReport, Regime};
pub use error::{Error, Result};
pub use extractor::{BucketEstimate, BucketMode, DivergenceRow, ExtractOptions, ExtractionResult, Source, SourcePreset};
pub use hashfam::{Certification, FamilyKind, Field, FieldElement, FieldParams, HashFamily};
pub use infomeasure::{Alpha, JointPmf, Pmf};
