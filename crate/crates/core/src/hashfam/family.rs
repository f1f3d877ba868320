//! Seeded hash families `S × GF(q^n) → Z_q^m` with enumerable seed spaces.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::field::{Field, FieldElement};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Degree `< k` polynomials over GF(q^n), truncated to the first `m`
    /// coefficients. k-wise independent, hence k*-universal.
    Polynomial,
    /// Every function `GF(q^n) → Z_q^m`, one seed per truth table.
    FullTable,
    /// A single seed mapping everything to `0^m`. Fails 2-universality.
    Constant,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Polynomial => "polynomial",
            FamilyKind::FullTable => "full-table",
            FamilyKind::Constant => "constant",
        })
    }
}

/// A hash function `h: S × X → Z_q^m` with `X = GF(q^n)` and seeds
/// `0..seed_space_size`.
///
/// Outputs are reported either as q-ary digit vectors ([`HashFamily::evaluate`])
/// or packed into an index `u = Σ u_i q^i` in `0..q^m`.
#[derive(Debug, Clone)]
pub struct HashFamily {
    kind: FamilyKind,
    field: Field,
    k: u32,
    m: u32,
    seed_space_size: u64,
    output_size: u32,
}

impl HashFamily {
    /// Polynomial family of independence order `k`: seed `(s_0, …, s_{k-1})`
    /// maps `x` to the first `m` coefficients of `Σ s_i x^i`.
    pub fn polynomial(field: Field, k: u32, m: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidFamily(format!("independence order k = {k} must be at least 2")));
        }
        if m == 0 || m > field.n() {
            return Err(Error::InvalidFamily(format!("output length m = {m} must lie in 1..={}", field.n())));
        }
        let seed_space_size = (field.order() as u64)
            .checked_pow(k)
            .ok_or_else(|| Error::InvalidFamily(format!("seed space {}^{k} overflows", field.order())))?;
        let output_size = field.q().pow(m);
        Ok(Self { kind: FamilyKind::Polynomial, field, k, m, seed_space_size, output_size })
    }

    /// The family of all functions `X → Z_q^m`. `k` is the order the family is
    /// advertised at; it is l-universal for every `l ≤ |X|`.
    pub fn full_table(field: Field, k: u32, m: u32) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidFamily(format!("order k = {k} must be at least 2")));
        }
        if m == 0 {
            return Err(Error::InvalidFamily("output length m must be at least 1".into()));
        }
        let output_size = (field.q() as u64)
            .checked_pow(m)
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidFamily(format!("output alphabet {}^{m} too large", field.q())))?;
        let seed_space_size = output_size
            .checked_pow(field.order())
            .ok_or_else(|| Error::InvalidFamily(format!("seed space {output_size}^{} overflows", field.order())))?;
        Ok(Self { kind: FamilyKind::FullTable, field, k, m, seed_space_size, output_size: output_size as u32 })
    }

    pub fn constant(field: Field, k: u32, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidFamily("output length m must be at least 1".into()));
        }
        let output_size = (field.q() as u64)
            .checked_pow(m)
            .filter(|&v| v <= u32::MAX as u64)
            .ok_or_else(|| Error::InvalidFamily(format!("output alphabet {}^{m} too large", field.q())))?;
        Ok(Self { kind: FamilyKind::Constant, field, k, m, seed_space_size: 1, output_size: output_size as u32 })
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn q(&self) -> u32 {
        self.field.q()
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn seed_space_size(&self) -> u64 {
        self.seed_space_size
    }

    /// `q^m`, the number of possible outputs.
    pub fn output_size(&self) -> u32 {
        self.output_size
    }

    /// Size of the domain `X = GF(q^n)`.
    pub fn domain_size(&self) -> u32 {
        self.field.order()
    }

    /// `h(seed, x)` as `m` q-ary digits, least significant (coefficient of
    /// `x^0`) first.
    pub fn evaluate(&self, seed: u64, x: &FieldElement) -> Result<Vec<u32>> {
        let xi = self.field.index_of(x)?;
        let u = self.hash_index(seed, xi)?;
        let q = self.q();
        let mut digits = Vec::with_capacity(self.m as usize);
        let mut rest = u;
        for _ in 0..self.m {
            digits.push(rest % q);
            rest /= q;
        }
        Ok(digits)
    }

    /// `h(seed, x)` as a packed output index, `x` given by its field index.
    pub fn hash_index(&self, seed: u64, x: u32) -> Result<u32> {
        if x >= self.domain_size() {
            return Err(Error::InvalidElement(format!("index {x} outside field of order {}", self.domain_size())));
        }
        let mut eval = self.seed_evaluator();
        eval.load(seed)?;
        Ok(eval.hash(x))
    }

    /// Reusable evaluator that decodes a seed once and hashes many inputs.
    pub fn seed_evaluator(&self) -> SeedEvaluator<'_> {
        SeedEvaluator { family: self, coeffs: Vec::new() }
    }

    pub fn describe(&self) -> String {
        format!(
            "{} family over GF({}^{}), k = {}, m = {}, {} seeds",
            self.kind,
            self.q(),
            self.field.n(),
            self.k,
            self.m,
            self.seed_space_size
        )
    }
}

/// Hashes inputs under one decoded seed. See [`HashFamily::seed_evaluator`].
pub struct SeedEvaluator<'a> {
    family: &'a HashFamily,
    coeffs: Vec<u32>,
}

impl SeedEvaluator<'_> {
    /// Decodes `seed` in base `|X|` (polynomial, `s_0` least significant) or
    /// base `q^m` (full table, the digit at position `x` is `h(x)`).
    pub fn load(&mut self, seed: u64) -> Result<()> {
        let fam = self.family;
        if seed >= fam.seed_space_size {
            return Err(Error::SeedOutOfRange { seed, size: fam.seed_space_size });
        }
        self.coeffs.clear();
        let (radix, len) = match fam.kind {
            FamilyKind::Polynomial => (fam.field.order() as u64, fam.k as usize),
            FamilyKind::FullTable => (fam.output_size as u64, fam.field.order() as usize),
            FamilyKind::Constant => return Ok(()),
        };
        let mut rest = seed;
        for _ in 0..len {
            self.coeffs.push((rest % radix) as u32);
            rest /= radix;
        }
        Ok(())
    }

    /// Hash of the field element with index `x` under the loaded seed.
    #[inline]
    pub fn hash(&self, x: u32) -> u32 {
        let fam = self.family;
        match fam.kind {
            FamilyKind::Polynomial => {
                let field = &fam.field;
                let mut acc = 0u32;
                for &c in self.coeffs.iter().rev() {
                    acc = field.add(field.mul(acc, x), c);
                }
                acc % fam.output_size
            }
            FamilyKind::FullTable => self.coeffs[x as usize],
            FamilyKind::Constant => 0,
        }
    }
}
