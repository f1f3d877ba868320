//! Arithmetic in GF(q^n) for prime q, elements as coefficient vectors over Z_q.
//!
//! Two routes are provided. [`FieldElement`] together with [`gf_add`],
//! [`gf_mul`] and [`gf_pow`] is the reference: schoolbook polynomial products
//! reduced modulo the field's irreducible. [`Field`] works on packed element
//! indices (coefficient `i` is base-`q` digit `i`) and uses log/antilog tables
//! for small fields; it is what the hash families run on.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Largest degree accepted by [`find_irreducible`] and [`FieldParams::new`].
pub const MAX_DEGREE: u32 = 16;

/// Fields up to this order get log/antilog multiplication tables.
const TABLE_LIMIT: u64 = 1 << 16;

pub fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let q = q as u64;
    let mut d = 2u64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn checked_order(q: u32, n: u32) -> Result<u64> {
    let order = (q as u64)
        .checked_pow(n)
        .filter(|&o| o <= u32::MAX as u64)
        .ok_or(Error::FieldTooLarge { q, n })?;
    Ok(order)
}

/// Parameters of GF(q^n): prime `q`, degree `n`, and the low `n` coefficients
/// of the monic irreducible modulus (the `x^n` coefficient is an implicit 1).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldParams {
    q: u32,
    n: u32,
    modulus: Vec<u32>,
}

impl FieldParams {
    /// Validates primality of `q`, the degree range, and irreducibility of the
    /// modulus.
    pub fn new(q: u32, n: u32, modulus: Vec<u32>) -> Result<Self> {
        if !is_prime(q) {
            return Err(Error::NotPrime(q));
        }
        if n == 0 || n > MAX_DEGREE {
            return Err(Error::DegreeOutOfRange(n));
        }
        checked_order(q, n)?;
        if modulus.len() != n as usize || modulus.iter().any(|&c| c >= q) {
            return Err(Error::ReducibleModulus(n));
        }
        let mut full = modulus.clone();
        full.push(1);
        if !poly_is_irreducible(&full, q) {
            return Err(Error::ReducibleModulus(n));
        }
        Ok(Self { q, n, modulus })
    }

    /// GF(q^n) with the lexicographically smallest irreducible modulus.
    pub fn standard(q: u32, n: u32) -> Result<Self> {
        let modulus = find_irreducible(q, n)?;
        Ok(Self { q, n, modulus })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Low-order coefficients of the monic modulus, constant term first.
    pub fn modulus(&self) -> &[u32] {
        &self.modulus
    }

    /// Number of field elements, `q^n`.
    pub fn order(&self) -> u64 {
        (self.q as u64).pow(self.n)
    }
}

impl fmt::Display for FieldParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GF({}^{}) mod x^{}", self.q, self.n, self.n)?;
        for (i, &c) in self.modulus.iter().enumerate().rev() {
            if c != 0 {
                let coef = if c == 1 && i > 0 { String::new() } else { c.to_string() };
                match i {
                    0 => write!(f, " + {coef}")?,
                    1 => write!(f, " + {coef}x")?,
                    _ => write!(f, " + {coef}x^{i}")?,
                }
            }
        }
        Ok(())
    }
}

/// Remainder of `num` modulo the monic `den` over Z_q, both constant-first.
fn poly_rem(num: &[u32], den: &[u32], q: u32) -> Vec<u32> {
    let q64 = q as u64;
    let d = den.len() - 1;
    let mut r: Vec<u64> = num.iter().map(|&c| c as u64).collect();
    if r.len() <= d {
        return num.to_vec();
    }
    for i in (d..r.len()).rev() {
        let c = r[i] % q64;
        if c == 0 {
            continue;
        }
        for j in 0..=d {
            let idx = i - d + j;
            r[idx] = (r[idx] + (q64 - c) * den[j] as u64) % q64;
        }
    }
    r.truncate(d);
    r.into_iter().map(|c| (c % q64) as u32).collect()
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn poly_is_irreducible(full: &[u32], q: u32) -> bool {
    let deg = full.len() - 1;
    if full[deg] != 1 {
        return false;
    }
    if deg == 1 {
        return true;
    }
    for d in 1..=deg / 2 {
        let count = (q as u64).pow(d as u32);
        for code in 0..count {
            let mut divisor = digits(code, q, d);
            divisor.push(1);
            if poly_rem(full, &divisor, q).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

fn digits(mut value: u64, q: u32, len: usize) -> Vec<u32> {
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        out.push((value % q as u64) as u32);
        value /= q as u64;
    }
    out
}

/// Lexicographically smallest monic irreducible of degree `n` over Z_q,
/// comparing the coefficient vector with the constant term first. Returns the
/// `n` low-order coefficients.
pub fn find_irreducible(q: u32, n: u32) -> Result<Vec<u32>> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if n == 0 || n > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange(n));
    }
    checked_order(q, n)?;
    let n = n as usize;
    let mut coeffs = vec![0u32; n];
    loop {
        let mut full = coeffs.clone();
        full.push(1);
        if poly_is_irreducible(&full, q) {
            return Ok(coeffs);
        }
        // Odometer with the constant term as the most significant digit.
        let mut i = n;
        loop {
            if i == 0 {
                unreachable!("an irreducible of every degree exists");
            }
            i -= 1;
            coeffs[i] += 1;
            if coeffs[i] < q {
                break;
            }
            coeffs[i] = 0;
        }
    }
}

/// An element of GF(q^n): `coeffs[i]` is the coefficient of `x^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FieldElement {
    params: Arc<FieldParams>,
    coeffs: Vec<u32>,
}

impl FieldElement {
    pub fn new(params: Arc<FieldParams>, coeffs: Vec<u32>) -> Result<Self> {
        if coeffs.len() != params.n as usize {
            return Err(Error::InvalidElement(format!(
                "expected {} coefficients, got {}",
                params.n,
                coeffs.len()
            )));
        }
        if let Some(&c) = coeffs.iter().find(|&&c| c >= params.q) {
            return Err(Error::InvalidElement(format!("coefficient {c} not below q = {}", params.q)));
        }
        Ok(Self { params, coeffs })
    }

    pub fn zero(params: Arc<FieldParams>) -> Self {
        let n = params.n as usize;
        Self { params, coeffs: vec![0; n] }
    }

    pub fn one(params: Arc<FieldParams>) -> Self {
        let mut e = Self::zero(params);
        e.coeffs[0] = 1;
        e
    }

    /// Element whose coefficients are the base-`q` digits of `index`.
    pub fn from_index(params: Arc<FieldParams>, index: u32) -> Result<Self> {
        if index as u64 >= params.order() {
            return Err(Error::InvalidElement(format!("index {index} outside field of order {}", params.order())));
        }
        let coeffs = digits(index as u64, params.q, params.n as usize);
        Ok(Self { params, coeffs })
    }

    pub fn index(&self) -> u32 {
        self.coeffs.iter().rev().fold(0u64, |acc, &c| acc * self.params.q as u64 + c as u64) as u32
    }

    pub fn coeffs(&self) -> &[u32] {
        &self.coeffs
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    fn same_field(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.params, &other.params) || self.params == other.params {
            Ok(())
        } else {
            Err(Error::FieldMismatch)
        }
    }
}

pub fn gf_add(a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
    a.same_field(b)?;
    let q = a.params.q;
    let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| (x + y) % q).collect();
    Ok(FieldElement { params: a.params.clone(), coeffs })
}

pub fn gf_neg(a: &FieldElement) -> FieldElement {
    let q = a.params.q;
    let coeffs = a.coeffs.iter().map(|&x| (q - x) % q).collect();
    FieldElement { params: a.params.clone(), coeffs }
}

pub fn gf_mul(a: &FieldElement, b: &FieldElement) -> Result<FieldElement> {
    a.same_field(b)?;
    let p = &a.params;
    let coeffs = mul_coeffs(&a.coeffs, &b.coeffs, p);
    Ok(FieldElement { params: p.clone(), coeffs })
}

fn mul_coeffs(a: &[u32], b: &[u32], p: &FieldParams) -> Vec<u32> {
    let q = p.q as u64;
    let n = p.n as usize;
    let mut prod = vec![0u64; 2 * n - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x as u64 * y as u64) % q;
        }
    }
    let prod: Vec<u32> = prod.into_iter().map(|c| c as u32).collect();
    let mut modulus = p.modulus.clone();
    modulus.push(1);
    let mut r = poly_rem(&prod, &modulus, p.q);
    r.resize(n, 0);
    r
}

/// `a^e` by square-and-multiply.
pub fn gf_pow(a: &FieldElement, mut e: u64) -> FieldElement {
    let mut base = a.clone();
    let mut acc = FieldElement::one(a.params.clone());
    while e > 0 {
        if e & 1 == 1 {
            acc.coeffs = mul_coeffs(&acc.coeffs, &base.coeffs, &a.params);
        }
        base.coeffs = mul_coeffs(&base.coeffs, &base.coeffs, &a.params);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse, `a^(q^n - 2)`. `None` for zero.
pub fn gf_inv(a: &FieldElement) -> Option<FieldElement> {
    if a.is_zero() {
        None
    } else {
        Some(gf_pow(a, a.params.order() - 2))
    }
}

/// GF(q^n) operating on packed element indices.
#[derive(Debug, Clone)]
pub struct Field {
    params: Arc<FieldParams>,
    order: u32,
    /// `exp[i] = g^i` for `i < order - 1`, doubled to skip a modulo.
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl Field {
    pub fn new(params: FieldParams) -> Self {
        let params = Arc::new(params);
        let order = params.order() as u32;
        let (exp, log) = if (order as u64) <= TABLE_LIMIT {
            build_tables(&params)
        } else {
            (Vec::new(), Vec::new())
        };
        Self { params, order, exp, log }
    }

    /// GF(q^n) with the standard modulus from [`find_irreducible`].
    pub fn standard(q: u32, n: u32) -> Result<Self> {
        Ok(Self::new(FieldParams::standard(q, n)?))
    }

    pub fn params(&self) -> &Arc<FieldParams> {
        &self.params
    }

    pub fn q(&self) -> u32 {
        self.params.q
    }

    pub fn n(&self) -> u32 {
        self.params.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn element(&self, index: u32) -> Result<FieldElement> {
        FieldElement::from_index(self.params.clone(), index)
    }

    /// Packed index of `e`, checking that it belongs to this field.
    pub fn index_of(&self, e: &FieldElement) -> Result<u32> {
        if Arc::ptr_eq(&self.params, &e.params) || *self.params == *e.params {
            Ok(e.index())
        } else {
            Err(Error::FieldMismatch)
        }
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        let q = self.params.q;
        if q == 2 {
            return a ^ b;
        }
        let (mut a, mut b) = (a, b);
        let mut out = 0u32;
        let mut place = 1u32;
        for _ in 0..self.params.n {
            let d = (a % q + b % q) % q;
            out += d * place;
            a /= q;
            b /= q;
            place = place.wrapping_mul(q);
        }
        out
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        if self.exp.is_empty() {
            let p = &self.params;
            let da = digits(a as u64, p.q, p.n as usize);
            let db = digits(b as u64, p.q, p.n as usize);
            let c = mul_coeffs(&da, &db, p);
            return c.iter().rev().fold(0u64, |acc, &x| acc * p.q as u64 + x as u64) as u32;
        }
        self.exp[(self.log[a as usize] + self.log[b as usize]) as usize]
    }
}

/// Log/antilog tables from the first primitive element found by search.
fn build_tables(p: &FieldParams) -> (Vec<u32>, Vec<u32>) {
    let order = p.order() as u32;
    let group = order - 1;
    if group == 1 {
        // GF(2): the only nonzero element is 1.
        return (vec![1, 1], vec![0, 0]);
    }
    let n = p.n as usize;
    let to_index = |c: &[u32]| c.iter().rev().fold(0u64, |acc, &x| acc * p.q as u64 + x as u64) as u32;
    for g in 2..order {
        let gc = digits(g as u64, p.q, n);
        let mut exp = Vec::with_capacity(2 * group as usize);
        let mut cur = digits(1, p.q, n);
        let mut primitive = true;
        for i in 0..group {
            let idx = to_index(&cur);
            if i > 0 && idx == 1 {
                primitive = false;
                break;
            }
            exp.push(idx);
            cur = mul_coeffs(&cur, &gc, p);
        }
        if !primitive {
            continue;
        }
        let mut log = vec![0u32; order as usize];
        for (i, &e) in exp.iter().enumerate() {
            log[e as usize] = i as u32;
        }
        exp.extend_from_within(..);
        return (exp, log);
    }
    unreachable!("the multiplicative group of a finite field is cyclic")
}
