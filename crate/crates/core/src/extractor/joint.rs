use std::ops::Range;
use std::thread;

use serde::Serialize;

use super::source::Source;
use crate::error::{Error, Result};
use crate::hashfam::{FamilyKind, HashFamily};
use crate::infomeasure::{
    conditional_divergence, joint_divergence_from_uniform, tv_to_uniform_product, Alpha, JointPmf,
};
use crate::numeric::extended_f64;

/// Default cap on hash evaluations per extraction.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExtractOptions {
    /// Maximum `|S| · |support|` hash evaluations.
    pub budget: u64,
    /// Worker threads over disjoint seed ranges.
    pub workers: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        Self { budget: DEFAULT_BUDGET, workers: 1 }
    }
}

/// Family parameters recorded alongside an extraction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FamilyDescriptor {
    pub kind: FamilyKind,
    pub q: u32,
    pub n: u32,
    pub k: u32,
    pub m: u32,
    pub seeds: u64,
}

impl From<&HashFamily> for FamilyDescriptor {
    fn from(f: &HashFamily) -> Self {
        Self { kind: f.kind(), q: f.q(), n: f.field().n(), k: f.k(), m: f.m(), seeds: f.seed_space_size() }
    }
}

/// Exact distribution of `(h(S, X), S)` or `(h(S, X), S, Z)`.
#[derive(Debug, Clone)]
pub struct ExtractionResult {
    pub joint: JointPmf,
    pub family: FamilyDescriptor,
    pub source: Source,
}

/// Divergences of one extraction at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub alpha: Alpha,
    /// `D_α(P_{U,S[,Z]} ‖ uniform × P_{S[,Z]})`.
    #[serde(with = "extended_f64")]
    pub joint: f64,
    /// `Σ P(s[,z]) D_α(P_{U|s[,z]} ‖ uniform)`.
    #[serde(with = "extended_f64")]
    pub conditional: f64,
    #[serde(with = "extended_f64")]
    pub tv: f64,
    /// Joint KL divergence.
    #[serde(with = "extended_f64")]
    pub kl: f64,
}

impl ExtractionResult {
    pub fn m(&self) -> u32 {
        self.family.m
    }

    pub fn has_side_info(&self) -> bool {
        self.joint.axes().len() == 3
    }

    /// The `(u, s)` joint with any side information summed out.
    pub fn seed_joint(&self) -> JointPmf {
        if self.has_side_info() {
            self.joint.marginalize_last().expect("three-axis joint")
        } else {
            self.joint.clone()
        }
    }

    /// `H_α(X|Z)` when a side channel is present, else `H_α(X)`. Finite `α`
    /// only in the conditional case.
    pub fn effective_entropy(&self, a: Alpha) -> Result<f64> {
        match self.source.conditional_entropy(a) {
            Some(h) => h,
            None => Ok(self.source.entropy(a)),
        }
    }

    pub fn empirical_divergences(&self, alphas: &[Alpha]) -> Vec<DivergenceRow> {
        let tv = tv_to_uniform_product(&self.joint);
        let kl = joint_divergence_from_uniform(&self.joint, Alpha::One);
        alphas
            .iter()
            .map(|&a| DivergenceRow {
                alpha: a,
                joint: joint_divergence_from_uniform(&self.joint, a),
                conditional: conditional_divergence(&self.joint, a),
                tv,
                kl,
            })
            .collect()
    }
}

/// Enumerates every seed and support element:
/// `P(u, s[, z]) = (1/|S|) Σ_x 1{h(s,x) = u} P_X(x) [P(z|x)]`.
///
/// Seeds are split into contiguous ranges, one per worker; every cell is
/// summed over the support in the same order regardless of the split, so the
/// result does not depend on the worker count.
pub fn extract_joint(family: &HashFamily, source: &Source, opts: ExtractOptions) -> Result<ExtractionResult> {
    let support: Vec<u32> = source.support().iter().map(|e| family.field().index_of(e)).collect::<Result<_>>()?;
    let seeds = family.seed_space_size();
    let needed = seeds as u128 * support.len() as u128;
    if needed > opts.budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget: opts.budget });
    }
    let n_out = family.output_size() as usize;
    let z = source.side_size();
    let cell = n_out * z;
    if (seeds as u128) * (cell as u128) > isize::MAX as u128 / 8 {
        return Err(Error::BudgetExceeded { needed: seeds as u128 * cell as u128, budget: opts.budget });
    }
    // Per-support-element weights over z.
    let px = source.probs().probs();
    let weights: Vec<Vec<f64>> = match source.side_channel() {
        Some(rows) => px.iter().zip(rows).map(|(&p, r)| r.iter().map(|&w| p * w).collect()).collect(),
        None => px.iter().map(|&p| vec![p]).collect(),
    };
    let p_s = 1.0 / seeds as f64;

    let fill = |range: Range<u64>| -> Result<Vec<f64>> {
        let mut local = vec![0.0f64; (range.end - range.start) as usize * cell];
        let mut eval = family.seed_evaluator();
        for (i, seed) in range.enumerate() {
            eval.load(seed)?;
            let block = &mut local[i * cell..(i + 1) * cell];
            for (&x, w) in support.iter().zip(&weights) {
                let u = eval.hash(x) as usize;
                for (zi, &wz) in w.iter().enumerate() {
                    block[u * z + zi] += wz;
                }
            }
            for v in block.iter_mut() {
                *v *= p_s;
            }
        }
        Ok(local)
    };

    let workers = opts.workers.max(1).min(seeds as usize);
    let chunk = seeds.div_ceil(workers as u64);
    let ranges: Vec<Range<u64>> = (0..workers as u64).map(|w| (w * chunk).min(seeds)..((w + 1) * chunk).min(seeds)).collect();
    let parts: Vec<Result<Vec<f64>>> = if workers == 1 {
        vec![fill(0..seeds)]
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = ranges.iter().cloned().map(|r| scope.spawn(move || fill(r))).collect();
            handles.into_iter().map(|h| h.join().expect("extraction worker panicked")).collect()
        })
    };

    // Scatter [s][u][z] blocks into the [u][s][z] layout.
    let s_total = seeds as usize;
    let mut probs = vec![0.0f64; n_out * s_total * z];
    let mut s0 = 0usize;
    for part in parts {
        let part = part?;
        for (i, block) in part.chunks(cell).enumerate() {
            let s = s0 + i;
            for u in 0..n_out {
                let dst = (u * s_total + s) * z;
                probs[dst..dst + z].copy_from_slice(&block[u * z..(u + 1) * z]);
            }
        }
        s0 += part.len() / cell;
    }

    let axes = if source.side_channel().is_some() { vec![n_out, s_total, z] } else { vec![n_out, s_total] };
    let joint = JointPmf::new(axes, probs, family.q())?;
    Ok(ExtractionResult { joint, family: family.into(), source: source.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::source::SourcePreset;
    use crate::hashfam::Field;
    use crate::infomeasure::Pmf;

    fn poly(n: u32, k: u32, m: u32) -> HashFamily {
        HashFamily::polynomial(Field::standard(2, n).unwrap(), k, m).unwrap()
    }

    // Independent double loop over (s, x).
    fn oracle(family: &HashFamily, support: &[u32], px: &[f64]) -> Vec<f64> {
        let seeds = family.seed_space_size() as usize;
        let n = family.output_size() as usize;
        let mut out = vec![0.0; n * seeds];
        for s in 0..seeds {
            for (&x, &p) in support.iter().zip(px) {
                let u = family.hash_index(s as u64, x).unwrap() as usize;
                out[u * seeds + s] += p / seeds as f64;
            }
        }
        out
    }

    #[test]
    fn matches_oracle() {
        let fam = poly(2, 2, 1);
        let src = Source::preset(fam.field(), SourcePreset::Uniform {}, 4, None).unwrap();
        let res = extract_joint(&fam, &src, ExtractOptions::default()).unwrap();
        let expect = oracle(&fam, &[0, 1, 2, 3], &[0.25; 4]);
        for (a, b) in res.joint.probs().iter().zip(&expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(res.joint.axes(), &[2, 16]);
    }

    #[test]
    fn point_mass_conditionals() {
        let fam = poly(3, 3, 2);
        let src = Source::from_indices(fam.field(), &[5], Pmf::new(vec![1.0], 2).unwrap(), None).unwrap();
        let res = extract_joint(&fam, &src, ExtractOptions::default()).unwrap();
        let seeds = fam.seed_space_size() as usize;
        for s in 0..seeds {
            let u = fam.hash_index(s as u64, 5).unwrap() as usize;
            for v in 0..4 {
                let expect = if v == u { 1.0 / seeds as f64 } else { 0.0 };
                assert_eq!(res.joint.get(v, s), expect);
            }
        }
    }

    #[test]
    fn full_table_output_marginal_is_uniform() {
        let fam = HashFamily::full_table(Field::standard(2, 2).unwrap(), 2, 1).unwrap();
        let src = Source::preset(fam.field(), SourcePreset::TwoSpike { p: 0.9 }, 4, None).unwrap();
        let res = extract_joint(&fam, &src, ExtractOptions::default()).unwrap();
        let u = res.joint.marginal(0).unwrap();
        assert_eq!(u.probs(), &[0.5, 0.5]);
        // Each seed is one fixed function, so the output still depends on the
        // seed. Over all functions the collision probability is
        // Σp² + (1 − Σp²)/q^m, giving q^{D_2} = q^m Σp² + 1 − Σp².
        let c = 0.9f64 * 0.9 + 0.1 * 0.1;
        let rows = res.empirical_divergences(&[Alpha::Finite(2.0)]);
        assert!((rows[0].joint - (2.0 * c + 1.0 - c).log2()).abs() < 1e-12);
        assert!(rows[0].joint > 0.0);
    }

    #[test]
    fn seed_marginal_is_uniform_and_mass_is_one() {
        let fam = poly(3, 3, 2);
        let src = Source::preset(fam.field(), SourcePreset::Geometric { r: 0.6 }, 8, None).unwrap();
        let res = extract_joint(&fam, &src, ExtractOptions::default()).unwrap();
        let s = res.joint.marginal(1).unwrap();
        let seeds = fam.seed_space_size() as f64;
        for &p in s.probs() {
            assert!((p - 1.0 / seeds).abs() < 1e-15);
        }
        let total: f64 = res.joint.probs().iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let fam = poly(3, 3, 2);
        let rows: Vec<Vec<f64>> = (0..8).map(|x| if x % 2 == 0 { vec![0.8, 0.2] } else { vec![0.3, 0.7] }).collect();
        let src = Source::preset(fam.field(), SourcePreset::Geometric { r: 0.8 }, 8, Some(rows)).unwrap();
        let one = extract_joint(&fam, &src, ExtractOptions { workers: 1, ..Default::default() }).unwrap();
        for w in [2, 3, 7, 1000] {
            let many = extract_joint(&fam, &src, ExtractOptions { workers: w, ..Default::default() }).unwrap();
            assert_eq!(one.joint, many.joint);
        }
    }

    #[test]
    fn side_channel_marginalizes_back() {
        let fam = poly(3, 2, 1);
        let rows: Vec<Vec<f64>> = (0..8).map(|x| if x % 2 == 0 { vec![0.8, 0.2] } else { vec![0.3, 0.7] }).collect();
        let with = Source::preset(fam.field(), SourcePreset::Uniform {}, 8, Some(rows)).unwrap();
        let without = Source::preset(fam.field(), SourcePreset::Uniform {}, 8, None).unwrap();
        let a = extract_joint(&fam, &with, ExtractOptions::default()).unwrap();
        let b = extract_joint(&fam, &without, ExtractOptions::default()).unwrap();
        assert_eq!(a.joint.axes(), &[2, 64, 2]);
        for (x, y) in a.seed_joint().probs().iter().zip(b.joint.probs()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn divergences_nondecreasing_and_match_oracle() {
        let fam = poly(3, 2, 2);
        let px = [0.3, 0.2, 0.15, 0.1, 0.1, 0.08, 0.05, 0.02];
        let src = Source::from_indices(fam.field(), &[0, 1, 2, 3, 4, 5, 6, 7], Pmf::new(px.to_vec(), 2).unwrap(), None).unwrap();
        let res = extract_joint(&fam, &src, ExtractOptions::default()).unwrap();
        let alphas = [Alpha::One, Alpha::Finite(1.5), Alpha::Finite(2.0), Alpha::Finite(3.0), Alpha::Infinity];
        let rows = res.empirical_divergences(&alphas);
        for w in rows.windows(2) {
            assert!(w[0].joint <= w[1].joint + 1e-12);
            assert!(w[0].conditional <= w[1].conditional + 1e-12);
        }
        // Flattened direct summation at α = 2.
        let flat = oracle(&fam, &[0, 1, 2, 3, 4, 5, 6, 7], &px);
        let seeds = fam.seed_space_size() as f64;
        let reference = 1.0 / (4.0 * seeds);
        let s: f64 = flat.iter().filter(|&&p| p > 0.0).map(|p| p * p / reference).sum();
        assert!((rows[2].joint - s.log2()).abs() < 1e-12);
    }

    #[test]
    fn budget_and_field_errors() {
        let fam = poly(3, 3, 1);
        let src = Source::preset(fam.field(), SourcePreset::Uniform {}, 8, None).unwrap();
        let err = extract_joint(&fam, &src, ExtractOptions { budget: 100, workers: 1 }).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { needed: 4096, .. }));
        let other = Source::preset(&Field::standard(2, 2).unwrap(), SourcePreset::Uniform {}, 4, None).unwrap();
        assert_eq!(extract_joint(&fam, &other, ExtractOptions::default()).unwrap_err(), Error::FieldMismatch);
    }
}
