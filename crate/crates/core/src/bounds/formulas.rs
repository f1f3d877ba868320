//! Closed-form divergence bounds for k*-universal hashing, evaluated in the
//! log domain. Every bound takes the source entropy as an input, so the same
//! calculators serve `H_α(X)` and `H_α(X|Z)`.

use serde::{Deserialize, Serialize};

use super::stirling::{ln_big, stirling_row};
use crate::error::{Error, Result};
use crate::infomeasure::Alpha;
use crate::numeric::{ln_ratio_over_ln1p, log_sum_exp};

/// Parameters shared by the bound calculators. All entropies and `m` are in
/// q-ary units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub q: u32,
    /// Output length. Real so that thresholds can be plugged back in.
    pub m: f64,
    pub k: u32,
    pub alpha: Alpha,
    /// `H_α(X)` or `H_α(X|Z)` at the order the bound calls for.
    pub entropy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

impl BoundInputs {
    pub fn new(q: u32, m: f64, k: u32, alpha: Alpha, entropy: f64) -> Result<Self> {
        let inputs = Self { q, m, k, alpha, entropy, epsilon: None };
        inputs.validate()?;
        Ok(inputs)
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::OutOfRange(format!("ε = {epsilon} must be positive and finite")));
        }
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 2 {
            return Err(Error::OutOfRange(format!("q = {} must be at least 2", self.q)));
        }
        if !(self.m.is_finite() && self.m >= 1.0) {
            return Err(Error::OutOfRange(format!("m = {} must be at least 1", self.m)));
        }
        if self.k < 2 {
            return Err(Error::OutOfRange(format!("k = {} must be at least 2", self.k)));
        }
        if !(self.entropy.is_finite() && self.entropy >= 0.0) {
            return Err(Error::OutOfRange(format!("entropy {} must be finite and non-negative", self.entropy)));
        }
        Ok(())
    }

    fn ln_q(&self) -> f64 {
        (self.q as f64).ln()
    }

    /// `(m − H)·ln q`, the natural log of `q^{m−H}`.
    fn ln_excess(&self) -> f64 {
        (self.m - self.entropy) * self.ln_q()
    }

    /// `log_q(x / ln(x + 1))` at `x = k·q^{m−H}`.
    fn log_q_sharp_term(&self, order: u32) -> f64 {
        ln_ratio_over_ln1p((order as f64).ln() + self.ln_excess()) / self.ln_q()
    }

    fn finite_alpha(&self) -> Result<f64> {
        match self.alpha {
            Alpha::Finite(a) => Ok(a),
            other => Err(Error::InvalidAlpha(format!("{other}: a finite order above 1 is required"))),
        }
    }
}

/// `(1/(α−1)) log_q Σ_{l=1}^{α} S(α,l) q^{(α−l)(m−H)}` for integer `α ∈ [2, k]`.
pub fn bound_integer_alpha(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let a = inputs.finite_alpha()?;
    if a.fract() != 0.0 || a < 2.0 || a > inputs.k as f64 {
        return Err(Error::InvalidAlpha(format!("{a} is not an integer in [2, {}]", inputs.k)));
    }
    let j = a as u32;
    let row = stirling_row(j)?;
    let d = inputs.ln_excess();
    let terms: Vec<f64> = (1..=j).map(|l| ln_big(&row[l as usize]) + (j - l) as f64 * d).collect();
    Ok(log_sum_exp(&terms) / (a - 1.0) / inputs.ln_q())
}

fn checked_real_alpha(inputs: &BoundInputs) -> Result<(f64, u32)> {
    inputs.validate()?;
    let a = inputs.finite_alpha()?;
    if a > inputs.k as f64 {
        return Err(Error::InvalidAlpha(format!("{a} exceeds k = {}", inputs.k)));
    }
    Ok((a, a.ceil() as u32))
}

/// Bound on the joint `D_α` for real `α ∈ (1, k]`:
///
/// `(1/(α−1)) log_q [Σ_{l=1}^{c−1} l·S(c−1,l) q^{(α−l)(m−H)} + Σ_{l=1}^{c} S(c−1,l−1) q^{(c−l)(m−H)}]`
/// with `c = ⌈α⌉`.
pub fn bound_real_alpha(inputs: &BoundInputs) -> Result<f64> {
    let (a, c) = checked_real_alpha(inputs)?;
    let row = stirling_row(c - 1)?;
    let d = inputs.ln_excess();
    let mut terms = Vec::with_capacity(2 * c as usize);
    for l in 1..c {
        terms.push((l as f64).ln() + ln_big(&row[l as usize]) + (a - l as f64) * d);
    }
    for l in 1..=c {
        terms.push(ln_big(&row[(l - 1) as usize]) + (c - l) as f64 * d);
    }
    Ok(log_sum_exp(&terms) / (a - 1.0) / inputs.ln_q())
}

/// Looser single-sum form `Σ_{l=1}^{c} S(c,l) q^{e_l (m−H)}`, with `e_l = α − l`
/// when `m ≤ H` and `e_l = c − l` otherwise.
pub fn bound_real_alpha_simplified(inputs: &BoundInputs) -> Result<f64> {
    let (a, c) = checked_real_alpha(inputs)?;
    let row = stirling_row(c)?;
    let d = inputs.ln_excess();
    let top = if inputs.m <= inputs.entropy { a } else { c as f64 };
    let terms: Vec<f64> = (1..=c).map(|l| ln_big(&row[l as usize]) + (top - l as f64) * d).collect();
    Ok(log_sum_exp(&terms) / (a - 1.0) / inputs.ln_q())
}

fn check_order(order: u32) -> Result<()> {
    if order < 2 {
        return Err(Error::OutOfRange(format!("order {order} must be at least 2")));
    }
    Ok(())
}

/// Exponential Poisson-moment majorant `k² / (2 q^{H−m} (k−1) ln q)` on `D_k`.
pub fn dk_bound_simple(inputs: &BoundInputs, order: u32) -> Result<f64> {
    inputs.validate()?;
    check_order(order)?;
    let k = order as f64;
    Ok(k * k * inputs.ln_excess().exp() / (2.0 * (k - 1.0) * inputs.ln_q()))
}

/// Sharp Poisson-moment bound `(k/(k−1)) log_q(x / ln(x+1))`, `x = k q^{m−H}`.
pub fn dk_bound_sharp(inputs: &BoundInputs, order: u32) -> Result<f64> {
    inputs.validate()?;
    check_order(order)?;
    let k = order as f64;
    Ok(k / (k - 1.0) * inputs.log_q_sharp_term(order))
}

/// Conditional-divergence bound for `α > k`:
/// `(α−k)m/(k(α−1)) + (α/(α−1)) log_q(x / ln(x+1))`, `x = k q^{m−H_k}`.
pub fn bound_alpha_above_k(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let a = inputs.finite_alpha()?;
    let k = inputs.k as f64;
    if a <= k {
        return Err(Error::InvalidAlpha(format!("{a} must exceed k = {}", inputs.k)));
    }
    Ok((a - k) * inputs.m / (k * (a - 1.0)) + a / (a - 1.0) * inputs.log_q_sharp_term(inputs.k))
}

/// Conditional `D_∞` bound `m/k + log_q(x / ln(x+1))`, `x = k q^{m−H_k}`.
pub fn bound_infty(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    Ok(inputs.m / inputs.k as f64 + inputs.log_q_sharp_term(inputs.k))
}

/// `((k−1)/k)·D_k + m/k`, the conditional `D_∞` implied by a conditional `D_k`.
pub fn infty_from_dk(dk: f64, k: u32, m: f64) -> f64 {
    let k = k as f64;
    (k - 1.0) / k * dk + m / k
}

/// Expected largest-bucket bound `k q^{m/k} / ln(k q^m / |A| + 1)`.
pub fn bucket_bound(k: u32, m: u32, q: u32, subset_size: u64) -> Result<f64> {
    check_order(k)?;
    if q < 2 || m == 0 {
        return Err(Error::OutOfRange(format!("need q ≥ 2 and m ≥ 1, got q = {q}, m = {m}")));
    }
    if subset_size == 0 {
        return Err(Error::OutOfRange("subset must be non-empty".into()));
    }
    let (kf, ln_q) = (k as f64, (q as f64).ln());
    let ln_x = kf.ln() + m as f64 * ln_q - (subset_size as f64).ln();
    let ln_den = if ln_x > 0.0 { ln_x + (-ln_x).exp().ln_1p() } else { ln_x.exp().ln_1p() };
    Ok(kf * (m as f64 * ln_q / kf).exp() / ln_den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn inputs(q: u32, m: f64, k: u32, alpha: f64, h: f64) -> BoundInputs {
        BoundInputs::new(q, m, k, Alpha::new(alpha).unwrap(), h).unwrap()
    }

    // Direct transcription with plain floats, used where values stay small.
    fn real_alpha_oracle(q: f64, d: f64, a: f64) -> f64 {
        let c = a.ceil() as usize;
        // S(c-1, ·) by the textbook table, recomputed here.
        let mut s = vec![vec![0.0f64; c + 1]; c + 1];
        s[0][0] = 1.0;
        for n in 1..=c {
            for l in 1..=n {
                s[n][l] = l as f64 * s[n - 1][l] + s[n - 1][l - 1];
            }
        }
        let mut total = 0.0;
        for l in 1..c {
            total += l as f64 * s[c - 1][l] * q.powf((a - l as f64) * d);
        }
        for l in 1..=c {
            total += s[c - 1][l - 1] * q.powf((c - l) as f64 * d);
        }
        total.log(q) / (a - 1.0)
    }

    #[test]
    fn integer_alpha_examples() {
        // α = k = 2: log_q(q^{m−H} + 1)
        for (m, h) in [(1.0, 3.0), (2.0, 2.0), (3.0, 1.5)] {
            let b = bound_integer_alpha(&inputs(2, m, 2, 2.0, h)).unwrap();
            assert_abs_diff_eq!(b, (2f64.powf(m - h) + 1.0).log2(), epsilon = 1e-12);
        }
        // m = H, k = 3: log_q(Bell(3)) / 2
        let b = bound_integer_alpha(&inputs(3, 2.0, 3, 3.0, 2.0)).unwrap();
        assert_abs_diff_eq!(b, 5f64.ln() / 3f64.ln() / 2.0, epsilon = 1e-12);
        assert!(bound_integer_alpha(&inputs(2, 2.0, 3, 2.5, 2.0)).is_err());
        assert!(bound_integer_alpha(&inputs(2, 2.0, 3, 4.0, 2.0)).is_err());
    }

    #[test]
    fn real_alpha_matches_integer_at_integers() {
        for k in 2..=8u32 {
            for j in 2..=k {
                for (m, h) in [(1.0, 5.0), (3.0, 3.0), (6.0, 2.25)] {
                    let inp = inputs(2, m, k, j as f64, h);
                    let a = bound_real_alpha(&inp).unwrap();
                    let b = bound_integer_alpha(&inp).unwrap();
                    assert!((a - b).abs() <= 1e-12, "k={k} j={j}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn real_alpha_low_orders_and_oracle() {
        for a in [1.1, 1.5, 2.0] {
            for (m, h) in [(1.0, 4.0), (4.0, 1.0)] {
                let b = bound_real_alpha(&inputs(2, m, 2, a, h)).unwrap();
                let expect = (2f64.powf((a - 1.0) * (m - h)) + 1.0).log2() / (a - 1.0);
                assert_abs_diff_eq!(b, expect, epsilon = 1e-12);
            }
        }
        for a in [1.25, 2.5, 3.7, 4.0, 5.5] {
            for d in [-2.0, 0.0, 1.5] {
                let b = bound_real_alpha(&inputs(3, 4.0, 6, a, 4.0 - d)).unwrap();
                assert_abs_diff_eq!(b, real_alpha_oracle(3.0, d, a), epsilon = 1e-12);
            }
        }
        assert!(bound_real_alpha(&inputs(2, 2.0, 3, 3.5, 2.0)).is_err());
        assert!(bound_real_alpha(&inputs(2, 2.0, 3, f64::INFINITY, 2.0)).is_err());
    }

    #[test]
    fn simplified_form() {
        for a in [1.25, 1.5, 2.0, 2.5, 3.0] {
            for (m, h) in [(1.0, 3.0), (2.0, 2.0), (3.0, 1.0), (2.0, 0.5)] {
                let inp = inputs(2, m, 3, a, h);
                assert!(bound_real_alpha_simplified(&inp).unwrap() >= bound_real_alpha(&inp).unwrap() - 1e-12);
            }
            let bell: f64 = [1.0, 1.0, 2.0, 5.0][a.ceil() as usize];
            let b = bound_real_alpha_simplified(&inputs(2, 2.0, 3, a, 2.0)).unwrap();
            assert_abs_diff_eq!(b, bell.log2() / (a - 1.0), epsilon = 1e-12);
        }
        let inp = inputs(2, 1.0, 3, 3.0, 2.5);
        assert_abs_diff_eq!(bound_real_alpha_simplified(&inp).unwrap(), bound_integer_alpha(&inp).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn dk_bounds() {
        let inp = inputs(2, 3.0, 2, 2.0, 3.0);
        assert_abs_diff_eq!(dk_bound_simple(&inp, 2).unwrap(), 2.0 / 2f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(dk_bound_sharp(&inp, 2).unwrap(), 2.0 * (2.0 / 3f64.ln()).log2(), epsilon = 1e-12);
        let doubled = inputs(2, 4.0, 2, 2.0, 3.0);
        assert_abs_diff_eq!(dk_bound_simple(&doubled, 2).unwrap(), 2.0 * dk_bound_simple(&inp, 2).unwrap(), epsilon = 1e-12);
        for k in 2..=8u32 {
            for gap in [-6.0, -2.0, -0.5, 0.0, 0.5, 2.0] {
                let inp = inputs(2, 8.0, k, k as f64, 8.0 - gap);
                let exact = bound_integer_alpha(&inp).unwrap();
                let sharp = dk_bound_sharp(&inp, k).unwrap();
                let simple = dk_bound_simple(&inp, k).unwrap();
                assert!(exact <= simple + 1e-12, "k={k} gap={gap}");
                assert!(sharp <= simple + 1e-12, "k={k} gap={gap}: {sharp} > {simple}");
            }
        }
    }

    #[test]
    fn above_k_and_infinity() {
        let inp = inputs(2, 4.0, 2, 3.0, 4.0);
        let x: f64 = 2.0;
        let log_term = (x / (x + 1.0).ln()).log2();
        assert_abs_diff_eq!(bound_alpha_above_k(&inp).unwrap(), 4.0 / 4.0 + 1.5 * log_term, epsilon = 1e-12);
        assert_abs_diff_eq!(bound_infty(&inp).unwrap(), 2.0 + log_term, epsilon = 1e-12);
        let far = BoundInputs { alpha: Alpha::Finite(1e9), ..inp };
        assert_abs_diff_eq!(bound_alpha_above_k(&far).unwrap(), bound_infty(&inp).unwrap(), epsilon = 1e-6);
        assert!(bound_alpha_above_k(&BoundInputs { alpha: Alpha::Finite(2.0), ..inp }).is_err());
        // Passing through the sharp D_k bound reproduces the closed form.
        let dk = dk_bound_sharp(&inp, 2).unwrap();
        assert_abs_diff_eq!(infty_from_dk(dk, 2, 4.0), bound_infty(&inp).unwrap(), epsilon = 1e-12);
    }

    #[test]
    fn stays_finite_far_from_entropy() {
        for gap in [-300.0, 300.0] {
            let inp = inputs(2, 400.0, 5, 3.5, 400.0 - gap);
            for v in [
                bound_real_alpha(&inp).unwrap(),
                bound_real_alpha_simplified(&inp).unwrap(),
                dk_bound_sharp(&inp, 5).unwrap(),
                dk_bound_simple(&inp, 5).unwrap(),
                bound_infty(&inp).unwrap(),
            ] {
                assert!(v.is_finite(), "gap={gap}");
            }
        }
        let big = inputs(2, 400.0, 3, 3.0, 100.0);
        assert_abs_diff_eq!(bound_integer_alpha(&big).unwrap(), 300.0, epsilon = 1e-9);
    }

    #[test]
    fn bucket_examples() {
        assert_abs_diff_eq!(bucket_bound(2, 4, 2, 16).unwrap(), 8.0 / 3f64.ln(), epsilon = 1e-12);
        assert_abs_diff_eq!(bucket_bound(2, 2, 2, 8).unwrap(), 4.0 / 2f64.ln(), epsilon = 1e-12);
        // N = q^m = |A| and k = m: q·log_q N / ln(log_q N + 1)
        let b = bucket_bound(6, 6, 2, 64).unwrap();
        assert_abs_diff_eq!(b, 2.0 * 6.0 / 7f64.ln(), epsilon = 1e-12);
        let values: Vec<f64> = (2..=10).map(|k| bucket_bound(k, 10, 2, 1024).unwrap()).collect();
        for w in values.windows(2) {
            assert!(w[1] <= w[0] + 1e-12);
        }
        assert!(bucket_bound(2, 4, 2, 1).unwrap() > 1.0);
        assert!(bucket_bound(2, 4, 2, 0).is_err());
    }

    #[test]
    fn input_validation() {
        assert!(BoundInputs::new(1, 2.0, 2, Alpha::Finite(2.0), 1.0).is_err());
        assert!(BoundInputs::new(2, 0.5, 2, Alpha::Finite(2.0), 1.0).is_err());
        assert!(BoundInputs::new(2, 2.0, 1, Alpha::Finite(2.0), 1.0).is_err());
        assert!(BoundInputs::new(2, 2.0, 2, Alpha::Finite(2.0), -1.0).is_err());
        let ok = BoundInputs::new(2, 2.0, 2, Alpha::Finite(2.0), 1.0).unwrap();
        assert!(ok.with_epsilon(0.0).is_err());
        assert_eq!(ok.with_epsilon(0.1).unwrap().epsilon, Some(0.1));
    }
}
