//! Benchmark fixtures shared by the criterion targets.

use renyi_extract::{Field, HashFamily, Pmf, Source};

/// Polynomial family over GF(q^n) with a geometric source on the whole field.
pub fn fixture(q: u32, n: u32, k: u32, m: u32) -> (HashFamily, Source) {
    let field = Field::standard(q, n).expect("valid field");
    let family = HashFamily::polynomial(field.clone(), k, m).expect("valid family");
    let size = field.order() as usize;
    let weights: Vec<f64> = (0..size).map(|i| 0.9f64.powi(i as i32)).collect();
    let total: f64 = weights.iter().sum();
    let pmf = Pmf::new(weights.into_iter().map(|w| w / total).collect(), q).expect("normalized");
    let indices: Vec<u32> = (0..size as u32).collect();
    let source = Source::from_indices(&field, &indices, pmf, None).expect("valid source");
    (family, source)
}
