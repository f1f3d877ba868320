//! Exact output distributions of leftover hashing by exhaustive enumeration.

pub mod bucket;
pub mod joint;
pub mod source;

pub use bucket::{expected_max_bucket, BucketEstimate, BucketMode};
pub use joint::{extract_joint, DivergenceRow, ExtractOptions, ExtractionResult, FamilyDescriptor, DEFAULT_BUDGET};
pub use source::{Source, SourcePreset};
