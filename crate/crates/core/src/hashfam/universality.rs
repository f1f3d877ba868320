//! Exact l-universality checks by enumerating seeds and distinct input tuples.

use serde::Serialize;

use super::family::HashFamily;
use crate::error::{Error, Result};

/// `favorable / total` seeds, kept as integers so the universality inequality
/// is decided exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Ratio {
    pub favorable: u64,
    pub total: u64,
}

impl Ratio {
    pub fn to_f64(self) -> f64 {
        self.favorable as f64 / self.total as f64
    }
}

/// Worst collision probability over all distinct `l`-tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CollisionReport {
    pub l: u32,
    pub max_collision: Ratio,
    /// A tuple (field indices) attaining the maximum; empty when `l > |X|`.
    pub worst_tuple: Vec<u32>,
    /// Whether `max_collision ≤ q^{-m(l-1)}`.
    pub universal: bool,
}

/// `favorable · q^{m(l-1)} ≤ total`, in exact arithmetic.
fn within_universal_limit(r: Ratio, q: u32, m: u32, l: u32) -> bool {
    let exp = m as u64 * (l as u64 - 1);
    let mut lhs = r.favorable as u128;
    for _ in 0..exp {
        lhs = lhs.saturating_mul(q as u128);
        if lhs > r.total as u128 {
            return false;
        }
    }
    lhs <= r.total as u128
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Max over distinct `x_1, …, x_l` of `Pr_S[h(S,x_1) = … = h(S,x_l)]`.
///
/// The event is symmetric in the tuple, so only increasing tuples are
/// enumerated. Cost is `|S| · C(|X|, l)` tuple checks, which must fit in
/// `budget`.
pub fn verify_universality(family: &HashFamily, l: u32, budget: u64) -> Result<CollisionReport> {
    if l < 2 {
        return Err(Error::OutOfRange(format!("universality order l = {l} must be at least 2")));
    }
    let domain = family.domain_size();
    let total = family.seed_space_size();
    let tuples = binomial(domain as u64, l as u64);
    if tuples == 0 {
        let r = Ratio { favorable: 0, total };
        return Ok(CollisionReport { l, max_collision: r, worst_tuple: Vec::new(), universal: true });
    }
    let needed = tuples.saturating_mul(total as u128);
    if needed > budget as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    let combos = combinations(domain, l as usize);
    let mut counts = vec![0u64; combos.len()];
    let mut hashes = vec![0u32; domain as usize];
    let mut eval = family.seed_evaluator();
    for seed in 0..total {
        eval.load(seed)?;
        for (x, h) in hashes.iter_mut().enumerate() {
            *h = eval.hash(x as u32);
        }
        for (combo, count) in combos.iter().zip(counts.iter_mut()) {
            let first = hashes[combo[0] as usize];
            if combo[1..].iter().all(|&x| hashes[x as usize] == first) {
                *count += 1;
            }
        }
    }
    let (best, &favorable) = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .expect("at least one tuple");
    let max_collision = Ratio { favorable, total };
    Ok(CollisionReport {
        l,
        max_collision,
        worst_tuple: combos[best].clone(),
        universal: within_universal_limit(max_collision, family.q(), family.m(), l),
    })
}

/// All increasing `len`-tuples from `0..n`, lexicographic.
fn combinations(n: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur: Vec<u32> = (0..len as u32).collect();
    loop {
        out.push(cur.clone());
        let mut i = len;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n - (len - i) as u32 {
                cur[i] += 1;
                for j in i + 1..len {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Per-order verdicts for `l = 2..=k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Certification {
    pub k: u32,
    pub orders: Vec<CollisionReport>,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.orders.iter().all(|o| o.universal)
    }

    /// Smallest order that failed, if any.
    pub fn first_failure(&self) -> Option<u32> {
        self.orders.iter().find(|o| !o.universal).map(|o| o.l)
    }
}

/// Checks l-universality for every `l ∈ {2, …, k}`. The family is
/// k*-universal iff every order passes.
pub fn certify_k_star(family: &HashFamily, budget: u64) -> Result<Certification> {
    let orders = (2..=family.k()).map(|l| verify_universality(family, l, budget)).collect::<Result<Vec<_>>>()?;
    Ok(Certification { k: family.k(), orders })
}
