//! Rényi entropies and divergences in base-q logarithms.

use super::pmf::{Alpha, JointPmf, Pmf};
use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, CompensatedSum};

fn finite_order(a: Alpha) -> Result<f64> {
    match a {
        Alpha::Finite(v) => Ok(v),
        other => Err(Error::InvalidAlpha(format!("order {other} is not in (1, ∞)"))),
    }
}

/// `ln Σ p_x^α` over the positive atoms.
fn ln_power_sum(probs: impl Iterator<Item = f64>, alpha: f64) -> f64 {
    let terms: Vec<f64> = probs.filter(|&p| p > 0.0).map(|p| alpha * p.ln()).collect();
    log_sum_exp(&terms)
}

/// Natural-log entropy of a (possibly unnormalized) conditional row `p / total`.
fn ln_entropy_of(probs: &[f64], a: Alpha) -> f64 {
    match a {
        Alpha::One => {
            let mut acc = CompensatedSum::new();
            for &p in probs.iter().filter(|&&p| p > 0.0) {
                acc.add(-p * p.ln());
            }
            acc.value()
        }
        Alpha::Finite(alpha) => ln_power_sum(probs.iter().copied(), alpha) / (1.0 - alpha),
        Alpha::Infinity => -probs.iter().copied().fold(0.0, f64::max).ln(),
    }
}

/// `H_α(p)` in base `q`. Zero atoms are ignored; `α = 1` is Shannon entropy and
/// `α = ∞` min-entropy.
pub fn renyi_entropy(p: &Pmf, a: Alpha) -> f64 {
    ln_entropy_of(p.probs(), a) / p.ln_base()
}

/// Natural-log `D_α` over paired masses. `+∞` when some `p > 0` meets `r = 0`.
fn ln_divergence_pairs(pairs: impl Iterator<Item = (f64, f64)>, a: Alpha) -> f64 {
    let mut terms = Vec::new();
    let mut kl = CompensatedSum::new();
    let mut max_ratio = f64::NEG_INFINITY;
    for (p, r) in pairs {
        if p <= 0.0 {
            continue;
        }
        if r <= 0.0 {
            return f64::INFINITY;
        }
        let (lp, lr) = (p.ln(), r.ln());
        match a {
            Alpha::One => kl.add(p * (lp - lr)),
            Alpha::Finite(alpha) => terms.push(alpha * lp + (1.0 - alpha) * lr),
            Alpha::Infinity => max_ratio = max_ratio.max(lp - lr),
        }
    }
    match a {
        Alpha::One => kl.value(),
        Alpha::Finite(alpha) => log_sum_exp(&terms) / (alpha - 1.0),
        Alpha::Infinity => max_ratio,
    }
}

/// `D_α(p ‖ r)` in base `q`, `+∞` when `p` is not absolutely continuous
/// with respect to `r`.
pub fn renyi_divergence(p: &Pmf, r: &Pmf, a: Alpha) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::SizeMismatch(p.len(), r.len()));
    }
    let pairs = p.probs().iter().copied().zip(r.probs().iter().copied());
    Ok(ln_divergence_pairs(pairs, a) / p.ln_base())
}

pub fn tv_distance(p: &Pmf, r: &Pmf) -> Result<f64> {
    if p.len() != r.len() {
        return Err(Error::SizeMismatch(p.len(), r.len()));
    }
    let mut acc = CompensatedSum::new();
    for (a, b) in p.probs().iter().zip(r.probs()) {
        acc.add((a - b).abs());
    }
    Ok((acc.value() / 2.0).min(1.0))
}

/// Normalized columns `P(· | r)` of a joint together with their mass `P(r)`.
fn columns(joint: &JointPmf) -> Vec<(f64, Vec<f64>)> {
    let n = joint.output_size();
    let marg = joint.rest_marginal();
    marg.iter()
        .enumerate()
        .filter(|(_, &pr)| pr > 0.0)
        .map(|(r, &pr)| (pr, (0..n).map(|u| joint.get(u, r) / pr).collect()))
        .collect()
}

/// `H_α(X|Z) = (1/(1−α)) log_q Σ_z P_Z(z) Σ_x P(x|z)^α` for finite `α > 1`.
///
/// Axis 0 is `X`; the remaining axes together play the role of `Z`.
pub fn conditional_renyi_entropy(joint: &JointPmf, a: Alpha) -> Result<f64> {
    let alpha = finite_order(a)?;
    let terms: Vec<f64> = columns(joint).into_iter().map(|(pz, col)| pz.ln() + ln_power_sum(col.into_iter(), alpha)).collect();
    Ok(log_sum_exp(&terms) / (1.0 - alpha) / joint.ln_base())
}

/// `H̃_α(X|Z) = (1/(1−α)) Σ_z P_Z(z) log_q Σ_x P(x|z)^α` for finite `α > 1`.
pub fn tilde_conditional_entropy(joint: &JointPmf, a: Alpha) -> Result<f64> {
    let alpha = finite_order(a)?;
    let mut acc = CompensatedSum::new();
    for (pz, col) in columns(joint) {
        acc.add(pz * ln_power_sum(col.into_iter(), alpha));
    }
    Ok(acc.value() / (1.0 - alpha) / joint.ln_base())
}

/// `Σ_s P_S(s) D_α(P_{U|S=s} ‖ uniform)`. With three axes the average runs
/// over `(s, z)` pairs.
pub fn conditional_divergence(joint: &JointPmf, a: Alpha) -> f64 {
    let n = joint.output_size();
    let uniform = 1.0 / n as f64;
    let mut acc = CompensatedSum::new();
    for (ps, col) in columns(joint) {
        let d = ln_divergence_pairs(col.into_iter().map(|p| (p, uniform)), a);
        acc.add(ps * d);
    }
    acc.value() / joint.ln_base()
}

/// `D_α(P_{U,R} ‖ uniform(U) × P_R)` with `R` the joint's own non-output
/// marginal.
pub fn joint_divergence_from_uniform(joint: &JointPmf, a: Alpha) -> f64 {
    let reference = uniform_product(joint);
    let pairs = joint.probs().iter().copied().zip(reference);
    ln_divergence_pairs(pairs, a) / joint.ln_base()
}

/// TV distance between the joint and `uniform(U) × P_R`.
pub fn tv_to_uniform_product(joint: &JointPmf) -> f64 {
    let mut acc = CompensatedSum::new();
    for (p, r) in joint.probs().iter().zip(uniform_product(joint)) {
        acc.add((p - r).abs());
    }
    (acc.value() / 2.0).min(1.0)
}

fn uniform_product(joint: &JointPmf) -> impl Iterator<Item = f64> {
    let n = joint.output_size();
    let marg = joint.rest_marginal();
    (0..n).flat_map(move |_| marg.clone().into_iter().map(move |r| r / n as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn pmf(v: &[f64]) -> Pmf {
        Pmf::new(v.to_vec(), 2).unwrap()
    }

    const GRID: [Alpha; 5] = [Alpha::One, Alpha::Finite(1.5), Alpha::Finite(2.0), Alpha::Finite(3.0), Alpha::Infinity];

    #[test]
    fn entropy_examples() {
        let p = pmf(&[0.75, 0.25]);
        assert_abs_diff_eq!(renyi_entropy(&p, Alpha::Finite(2.0)), -(10.0f64 / 16.0).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(renyi_entropy(&p, Alpha::Finite(2.0)), 0.67807, epsilon = 1e-5);
        let u = Pmf::uniform(8, 2).unwrap();
        for a in GRID {
            assert_abs_diff_eq!(renyi_entropy(&u, a), 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(renyi_entropy(&Pmf::point_mass(8, 3, 2).unwrap(), a), 0.0, epsilon = 1e-12);
        }
        let q3 = Pmf::uniform(9, 3).unwrap();
        assert_abs_diff_eq!(renyi_entropy(&q3, Alpha::Finite(2.5)), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn divergence_examples() {
        let p = pmf(&[1.0, 0.0]);
        let u = pmf(&[0.5, 0.5]);
        assert_abs_diff_eq!(renyi_divergence(&p, &u, Alpha::Infinity).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(renyi_divergence(&u, &p, Alpha::Finite(2.0)).unwrap(), f64::INFINITY);
        assert_eq!(renyi_divergence(&u, &p, Alpha::One).unwrap(), f64::INFINITY);
        let r = pmf(&[0.75, 0.25]);
        for a in GRID {
            assert_abs_diff_eq!(renyi_divergence(&r, &r, a).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert!(renyi_divergence(&r, &Pmf::uniform(3, 2).unwrap(), Alpha::One).is_err());
    }

    #[test]
    fn tv_examples() {
        assert_abs_diff_eq!(tv_distance(&pmf(&[0.75, 0.25]), &pmf(&[0.5, 0.5])).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(tv_distance(&pmf(&[1.0, 0.0]), &pmf(&[0.0, 1.0])).unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn conditional_entropy_example() {
        let j = JointPmf::from_rows(&[vec![0.4, 0.1], vec![0.1, 0.4]], 2).unwrap();
        let h = conditional_renyi_entropy(&j, Alpha::Finite(2.0)).unwrap();
        assert_abs_diff_eq!(h, -(0.5f64 * (0.64 + 0.04) + 0.5 * (0.04 + 0.64)).log2(), epsilon = 1e-12);
        assert_abs_diff_eq!(h, 0.5564, epsilon = 1e-4);
        assert!(conditional_renyi_entropy(&j, Alpha::Infinity).is_err());
        assert!(tilde_conditional_entropy(&j, Alpha::One).is_err());
    }

    #[test]
    fn conditional_entropy_trivial_cases() {
        let x = pmf(&[0.5, 0.3, 0.2]);
        let z = pmf(&[0.6, 0.4]);
        let indep = JointPmf::product(&x, &z).unwrap();
        let diag = JointPmf::from_rows(&[vec![0.3, 0.0], vec![0.0, 0.7]], 2).unwrap();
        for alpha in [1.5, 2.0, 4.0] {
            let a = Alpha::Finite(alpha);
            assert_abs_diff_eq!(conditional_renyi_entropy(&indep, a).unwrap(), renyi_entropy(&x, a), epsilon = 1e-12);
            assert_abs_diff_eq!(tilde_conditional_entropy(&indep, a).unwrap(), renyi_entropy(&x, a), epsilon = 1e-12);
            assert_abs_diff_eq!(conditional_renyi_entropy(&diag, a).unwrap(), 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(tilde_conditional_entropy(&diag, a).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn conditional_divergence_trivial_cases() {
        let s = pmf(&[0.25, 0.75]);
        let uni = JointPmf::product(&Pmf::uniform(4, 2).unwrap(), &s).unwrap();
        let u = pmf(&[0.5, 0.25, 0.125, 0.125]);
        let seedless = JointPmf::product(&u, &s).unwrap();
        for a in GRID {
            assert_abs_diff_eq!(conditional_divergence(&uni, a), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(joint_divergence_from_uniform(&uni, a), 0.0, epsilon = 1e-14);
            let direct = renyi_divergence(&u, &Pmf::uniform(4, 2).unwrap(), a).unwrap();
            assert_abs_diff_eq!(conditional_divergence(&seedless, a), direct, epsilon = 1e-12);
        }
    }

    // Direct summation of the divergence formula on the flattened joint.
    fn oracle_joint_divergence(rows: &[Vec<f64>], alpha: f64) -> f64 {
        let n = rows.len() as f64;
        let cols = rows[0].len();
        let ps: Vec<f64> = (0..cols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
        let mut s = 0.0;
        for row in rows {
            for (c, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    s += p.powf(alpha) * (ps[c] / n).powf(1.0 - alpha);
                }
            }
        }
        s.log2() / (alpha - 1.0)
    }

    #[test]
    fn joint_divergence_against_oracle() {
        let rows = vec![vec![0.4, 0.1], vec![0.1, 0.4]];
        let j = JointPmf::from_rows(&rows, 2).unwrap();
        for alpha in [1.5, 2.0, 3.0, 7.0] {
            let got = joint_divergence_from_uniform(&j, Alpha::Finite(alpha));
            assert_abs_diff_eq!(got, oracle_joint_divergence(&rows, alpha), epsilon = 1e-12);
            assert!(conditional_divergence(&j, Alpha::Finite(alpha)) <= got + 1e-12);
        }
    }

    #[test]
    fn three_axis_averages_over_pairs() {
        // Output axis size 2, seed 2, side info 2.
        let probs = vec![0.1, 0.15, 0.05, 0.2, 0.15, 0.1, 0.2, 0.05];
        let j = JointPmf::new(vec![2, 2, 2], probs.clone(), 2).unwrap();
        let mut expect = 0.0;
        for r in 0..4 {
            let (a, b) = (probs[r], probs[4 + r]);
            let t = a + b;
            let col = pmf(&[a / t, b / t]);
            expect += t * renyi_divergence(&col, &pmf(&[0.5, 0.5]), Alpha::Finite(2.0)).unwrap();
        }
        assert_abs_diff_eq!(conditional_divergence(&j, Alpha::Finite(2.0)), expect, epsilon = 1e-12);
    }

    fn arb_pmf(len: std::ops::Range<usize>) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..1.0, len).prop_filter_map("non-zero mass", |v| {
            let s: f64 = v.iter().sum();
            (s > 1e-3).then(|| v.iter().map(|x| x / s).collect())
        })
    }

    fn arb_joint() -> impl Strategy<Value = JointPmf> {
        (1u32..4, 1usize..5).prop_flat_map(|(m, cols)| {
            let n = 1usize << m;
            arb_pmf(n * cols..n * cols + 1).prop_map(move |v| JointPmf::new(vec![n, cols], v, 2).unwrap())
        })
    }

    proptest! {
        #[test]
        fn divergence_nondecreasing_in_alpha(p in arb_pmf(4..5), r in arb_pmf(4..5)) {
            let (p, r) = (pmf(&p), pmf(&r));
            let ds: Vec<f64> = GRID.iter().map(|&a| renyi_divergence(&p, &r, a).unwrap()).collect();
            for w in ds.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-9 * w[1].abs().max(1.0), "{ds:?}");
            }
        }

        #[test]
        fn entropy_monotone_and_scaled_monotone(p in arb_pmf(2..9)) {
            let p = pmf(&p);
            let hs: Vec<f64> = GRID.iter().map(|&a| renyi_entropy(&p, a)).collect();
            for w in hs.windows(2) {
                prop_assert!(w[1] <= w[0] + 1e-12);
            }
            let scaled: Vec<f64> = GRID[1..]
                .iter()
                .map(|&a| {
                    let v = a.value();
                    let f = if v.is_infinite() { 1.0 } else { (v - 1.0) / v };
                    f * renyi_entropy(&p, a)
                })
                .collect();
            for w in scaled.windows(2) {
                prop_assert!(w[0] <= w[1] + 1e-12);
            }
        }

        #[test]
        fn divergence_from_uniform_identity((m, v) in (1u32..4).prop_flat_map(|m| (Just(m), arb_pmf(1 << m..(1 << m) + 1)))) {
            let p = pmf(&v);
            let u = Pmf::uniform(1 << m, 2).unwrap();
            for a in GRID {
                let d = renyi_divergence(&p, &u, a).unwrap();
                prop_assert!((d - (m as f64 - renyi_entropy(&p, a))).abs() <= 1e-12);
            }
        }

        #[test]
        fn jensen_and_tilde_identity(j in arb_joint()) {
            let m = (j.output_size() as f64).log2();
            for a in GRID {
                let c = conditional_divergence(&j, a);
                prop_assert!(c <= joint_divergence_from_uniform(&j, a) + 1e-12);
                if let Alpha::Finite(_) = a {
                    prop_assert!((c - (m - tilde_conditional_entropy(&j, a).unwrap())).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn permutation_invariance(j in arb_joint(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..j.output_size()).collect();
            let mut rest: Vec<usize> = (0..j.rest_size()).collect();
            perm.shuffle(&mut rng);
            rest.shuffle(&mut rng);
            let k = j.permuted(&perm, &rest).unwrap();
            for a in GRID {
                prop_assert!((conditional_divergence(&j, a) - conditional_divergence(&k, a)).abs() <= 1e-12);
                prop_assert!((joint_divergence_from_uniform(&j, a) - joint_divergence_from_uniform(&k, a)).abs() <= 1e-12);
                if let Alpha::Finite(_) = a {
                    let (x, y) = (conditional_renyi_entropy(&j, a).unwrap(), conditional_renyi_entropy(&k, a).unwrap());
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }
            prop_assert!((tv_to_uniform_product(&j) - tv_to_uniform_product(&k)).abs() <= 1e-12);
        }
    }
}
