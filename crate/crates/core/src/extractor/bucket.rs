use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashfam::{FieldElement, HashFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BucketMode {
    /// Average over every seed.
    Exact {},
    /// Average over `seeds` seeds drawn uniformly with a ChaCha8 generator.
    Sampled { seeds: u64, rng_seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BucketEstimate {
    pub mode: BucketMode,
    /// Mean of the largest bucket size over the seeds used.
    pub mean: f64,
    /// Standard error of the mean; `None` in exact mode.
    pub std_error: Option<f64>,
    pub seeds_used: u64,
}

/// `E_S[max_u |{x ∈ A : h(S, x) = u}|]`.
pub fn expected_max_bucket(family: &HashFamily, subset: &[FieldElement], mode: BucketMode, budget: u64) -> Result<BucketEstimate> {
    if subset.is_empty() {
        return Err(Error::OutOfRange("subset must be non-empty".into()));
    }
    let xs: Vec<u32> = subset.iter().map(|e| family.field().index_of(e)).collect::<Result<_>>()?;
    let seeds_used = match mode {
        BucketMode::Exact {} => family.seed_space_size(),
        BucketMode::Sampled { seeds, .. } => {
            if seeds < 2 {
                return Err(Error::OutOfRange("sampled mode needs at least two seeds".into()));
            }
            seeds
        }
    };
    let needed = seeds_used as u128 * xs.len() as u128;
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }

    let mut counts = vec![0u32; family.output_size() as usize];
    let mut eval = family.seed_evaluator();
    let mut max_bucket = |seed: u64| -> Result<u64> {
        eval.load(seed)?;
        counts.iter_mut().for_each(|c| *c = 0);
        let mut best = 0;
        for &x in &xs {
            let c = &mut counts[eval.hash(x) as usize];
            *c += 1;
            best = best.max(*c);
        }
        Ok(best as u64)
    };

    match mode {
        BucketMode::Exact {} => {
            let mut total: u128 = 0;
            for seed in 0..seeds_used {
                total += max_bucket(seed)? as u128;
            }
            Ok(BucketEstimate { mode, mean: total as f64 / seeds_used as f64, std_error: None, seeds_used })
        }
        BucketMode::Sampled { seeds, rng_seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            let space = family.seed_space_size();
            let mut values = Vec::with_capacity(seeds as usize);
            for _ in 0..seeds {
                values.push(max_bucket(rng.gen_range(0..space))? as f64);
            }
            let n = values.len() as f64;
            let mean = values.iter().sum::<f64>() / n;
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
            Ok(BucketEstimate { mode, mean, std_error: Some((var / n).sqrt()), seeds_used })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::bucket_bound;
    use crate::hashfam::Field;

    const BUDGET: u64 = 10_000_000;

    fn all(field: &Field) -> Vec<FieldElement> {
        (0..field.order()).map(|i| field.element(i).unwrap()).collect()
    }

    #[test]
    fn singleton_subset() {
        let fam = HashFamily::polynomial(Field::standard(2, 3).unwrap(), 2, 2).unwrap();
        let a = vec![fam.field().element(3).unwrap()];
        assert_eq!(expected_max_bucket(&fam, &a, BucketMode::Exact {}, BUDGET).unwrap().mean, 1.0);
    }

    #[test]
    fn polynomial_within_bound() {
        let fam = HashFamily::polynomial(Field::standard(2, 3).unwrap(), 2, 2).unwrap();
        let est = expected_max_bucket(&fam, &all(fam.field()), BucketMode::Exact {}, BUDGET).unwrap();
        assert_eq!(est.seeds_used, 64);
        assert!(est.mean <= bucket_bound(2, 2, 2, 8).unwrap());
        assert!(est.mean >= 2.0);
    }

    // Expected max load of n balls in b bins, by enumerating all b^n assignments.
    fn balls_into_bins(n: u32, b: u32) -> f64 {
        let total = (b as u64).pow(n);
        let mut sum = 0u64;
        for code in 0..total {
            let mut counts = vec![0u64; b as usize];
            let mut c = code;
            for _ in 0..n {
                counts[(c % b as u64) as usize] += 1;
                c /= b as u64;
            }
            sum += counts.into_iter().max().unwrap();
        }
        sum as f64 / total as f64
    }

    #[test]
    fn full_table_matches_balls_into_bins() {
        for (n, m) in [(2, 2), (3, 1), (2, 1)] {
            let field = Field::standard(2, n).unwrap();
            let fam = HashFamily::full_table(field.clone(), 2, m).unwrap();
            let est = expected_max_bucket(&fam, &all(&field), BucketMode::Exact {}, BUDGET).unwrap();
            assert_eq!(est.mean, balls_into_bins(field.order(), 1 << m));
        }
        // 4 balls into 4 bins: 24 loads of 1, 180 of 2, 48 of 3, 4 of 4.
        assert_eq!(balls_into_bins(4, 4), 544.0 / 256.0);
    }

    #[test]
    fn permutation_invariant() {
        let fam = HashFamily::polynomial(Field::standard(2, 3).unwrap(), 3, 2).unwrap();
        let mut a = all(fam.field());
        let x = expected_max_bucket(&fam, &a, BucketMode::Exact {}, BUDGET).unwrap();
        a.reverse();
        a.swap(1, 5);
        assert_eq!(expected_max_bucket(&fam, &a, BucketMode::Exact {}, BUDGET).unwrap(), x);
    }

    #[test]
    fn sampled_is_reproducible() {
        let fam = HashFamily::polynomial(Field::standard(2, 4).unwrap(), 3, 2).unwrap();
        let a = all(fam.field());
        let mode = BucketMode::Sampled { seeds: 500, rng_seed: 7 };
        let x = expected_max_bucket(&fam, &a, mode, BUDGET).unwrap();
        let y = expected_max_bucket(&fam, &a, mode, BUDGET).unwrap();
        assert_eq!(x, y);
        assert!(x.std_error.unwrap() > 0.0);
        let exact = expected_max_bucket(&fam, &a, BucketMode::Exact {}, BUDGET).unwrap();
        assert!((x.mean - exact.mean).abs() < 5.0 * x.std_error.unwrap());
    }

    #[test]
    fn errors() {
        let fam = HashFamily::polynomial(Field::standard(2, 3).unwrap(), 3, 2).unwrap();
        assert!(expected_max_bucket(&fam, &[], BucketMode::Exact {}, BUDGET).is_err());
        let a = all(fam.field());
        assert!(matches!(expected_max_bucket(&fam, &a, BucketMode::Exact {}, 10), Err(Error::BudgetExceeded { .. })));
    }
}
