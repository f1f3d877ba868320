use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numeric;

/// Tolerance on `|Σ p − 1|` at construction.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Finite orders in `(1, 1 + MIN_ALPHA_GAP)` are rejected; use [`Alpha::One`].
pub const MIN_ALPHA_GAP: f64 = 1e-6;

/// Order of a Rényi entropy or divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Alpha {
    /// Shannon entropy / KL divergence.
    One,
    /// A finite order `> 1`.
    Finite(f64),
    /// Min-entropy / max-divergence.
    Infinity,
}

impl Alpha {
    /// `1` maps to [`Alpha::One`] and `+∞` to [`Alpha::Infinity`]. Orders below
    /// one, NaN, and finite orders within `1e-6` above one are rejected.
    pub fn new(value: f64) -> Result<Self> {
        if value == 1.0 {
            Ok(Alpha::One)
        } else if value == f64::INFINITY {
            Ok(Alpha::Infinity)
        } else if value.is_nan() || value < 1.0 {
            Err(Error::InvalidAlpha(format!("{value} (orders must be at least 1)")))
        } else if value < 1.0 + MIN_ALPHA_GAP {
            Err(Error::InvalidAlpha(format!("{value} is too close to 1; use 1 for the Shannon limit")))
        } else {
            Ok(Alpha::Finite(value))
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Alpha::One => 1.0,
            Alpha::Finite(a) => a,
            Alpha::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite_above_one(self) -> bool {
        matches!(self, Alpha::Finite(_))
    }
}

impl fmt::Display for Alpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alpha::One => f.write_str("1"),
            Alpha::Finite(a) => write!(f, "{a}"),
            Alpha::Infinity => f.write_str("inf"),
        }
    }
}

impl FromStr for Alpha {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Alpha::Infinity),
            other => other.parse::<f64>().map_err(|_| Error::InvalidAlpha(s.to_string())).and_then(Alpha::new),
        }
    }
}

impl Serialize for Alpha {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Alpha::Infinity => s.serialize_str("inf"),
            other => s.serialize_f64(other.value()),
        }
    }
}

impl<'de> Deserialize<'de> for Alpha {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        let parsed = match Raw::deserialize(d)? {
            Raw::Num(v) => Alpha::new(v),
            Raw::Str(s) => s.parse(),
        };
        parsed.map_err(serde::de::Error::custom)
    }
}

fn validate_probs(probs: &[f64]) -> Result<()> {
    if let Some(&p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(Error::InvalidProbability(p));
    }
    let total = numeric::sum(probs.iter().copied());
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::NotNormalized(total));
    }
    Ok(())
}

fn validate_base(base_q: u32) -> Result<()> {
    if base_q < 2 {
        return Err(Error::OutOfRange(format!("logarithm base {base_q} must be at least 2")));
    }
    Ok(())
}

/// Probability mass function on `0..len`, reported in base-`q` logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
    base_q: u32,
}

impl Pmf {
    /// Rejects empty vectors, negative or non-finite entries, and totals more
    /// than `1e-9` away from one. No renormalization is applied.
    pub fn new(probs: Vec<f64>, base_q: u32) -> Result<Self> {
        validate_base(base_q)?;
        if probs.is_empty() {
            return Err(Error::InvalidJoint("empty probability vector".into()));
        }
        validate_probs(&probs)?;
        Ok(Self { probs, base_q })
    }

    pub fn uniform(size: usize, base_q: u32) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidJoint("empty support".into()));
        }
        Self::new(vec![1.0 / size as f64; size], base_q)
    }

    pub fn point_mass(size: usize, at: usize, base_q: u32) -> Result<Self> {
        if at >= size {
            return Err(Error::OutOfRange(format!("atom {at} outside support of size {size}")));
        }
        let mut probs = vec![0.0; size];
        probs[at] = 1.0;
        Self::new(probs, base_q)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn base_q(&self) -> u32 {
        self.base_q
    }

    pub fn ln_base(&self) -> f64 {
        (self.base_q as f64).ln()
    }
}

/// Dense pmf over a product of two or three finite axes, row-major.
///
/// Axis 0 is the "output" axis (a hash output `u`, or `x` for source/side
/// information joints). The remaining axes (seed, side information) are
/// flattened into a single "rest" index `r = s·|Z| + z`, so entry `(u, r)`
/// lives at `u · rest_size + r`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPmf {
    axes: Vec<usize>,
    probs: Vec<f64>,
    base_q: u32,
}

impl JointPmf {
    pub fn new(axes: Vec<usize>, probs: Vec<f64>, base_q: u32) -> Result<Self> {
        validate_base(base_q)?;
        if !(2..=3).contains(&axes.len()) {
            return Err(Error::InvalidJoint(format!("expected 2 or 3 axes, got {}", axes.len())));
        }
        if axes.contains(&0) {
            return Err(Error::InvalidJoint("axes must be non-empty".into()));
        }
        let cells: usize = axes.iter().product();
        if cells != probs.len() {
            return Err(Error::InvalidJoint(format!("{} axes cells but {} probabilities", cells, probs.len())));
        }
        validate_probs(&probs)?;
        Ok(Self { axes, probs, base_q })
    }

    /// Two-axis joint from rows indexed by the first axis.
    pub fn from_rows(rows: &[Vec<f64>], base_q: u32) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidJoint("ragged rows".into()));
        }
        Self::new(vec![rows.len(), cols], rows.concat(), base_q)
    }

    /// Product `p ⊗ r` as a two-axis joint.
    pub fn product(p: &Pmf, r: &Pmf) -> Result<Self> {
        let probs = p.probs().iter().flat_map(|&a| r.probs().iter().map(move |&b| a * b)).collect();
        Self::new(vec![p.len(), r.len()], probs, p.base_q)
    }

    pub fn axes(&self) -> &[usize] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn base_q(&self) -> u32 {
        self.base_q
    }

    pub fn ln_base(&self) -> f64 {
        (self.base_q as f64).ln()
    }

    pub fn output_size(&self) -> usize {
        self.axes[0]
    }

    /// Product of the non-output axes.
    pub fn rest_size(&self) -> usize {
        self.axes[1..].iter().product()
    }

    #[inline]
    pub fn get(&self, u: usize, rest: usize) -> f64 {
        self.probs[u * self.rest_size() + rest]
    }

    /// Marginal of one axis.
    pub fn marginal(&self, axis: usize) -> Result<Pmf> {
        if axis >= self.axes.len() {
            return Err(Error::OutOfRange(format!("axis {axis} of a {}-axis joint", self.axes.len())));
        }
        let size = self.axes[axis];
        let inner: usize = self.axes[axis + 1..].iter().product();
        let mut acc = vec![numeric::CompensatedSum::new(); size];
        for (idx, &p) in self.probs.iter().enumerate() {
            acc[(idx / inner) % size].add(p);
        }
        Pmf::new(acc.iter().map(|a| a.value()).collect(), self.base_q)
    }

    /// Marginal over all non-output axes together, indexed by the flattened
    /// rest index.
    pub fn rest_marginal(&self) -> Vec<f64> {
        let rest = self.rest_size();
        let mut acc = vec![numeric::CompensatedSum::new(); rest];
        for (idx, &p) in self.probs.iter().enumerate() {
            acc[idx % rest].add(p);
        }
        acc.iter().map(|a| a.value()).collect()
    }

    /// Sums out the last axis of a three-axis joint.
    pub fn marginalize_last(&self) -> Result<Self> {
        if self.axes.len() != 3 {
            return Err(Error::InvalidJoint("only three-axis joints have a removable last axis".into()));
        }
        let last = self.axes[2];
        let probs = self.probs.chunks(last).map(|c| numeric::sum(c.iter().copied())).collect();
        Self::new(self.axes[..2].to_vec(), probs, self.base_q)
    }

    /// The same joint with the output axis relabelled by `perm` (`u ↦ perm[u]`)
    /// and the rest axis by `rest_perm`.
    pub fn permuted(&self, perm: &[usize], rest_perm: &[usize]) -> Result<Self> {
        let (n, r) = (self.output_size(), self.rest_size());
        if perm.len() != n || rest_perm.len() != r {
            return Err(Error::InvalidJoint("permutation sizes do not match the joint".into()));
        }
        let mut probs = vec![0.0; self.probs.len()];
        for u in 0..n {
            for s in 0..r {
                probs[perm[u] * r + rest_perm[s]] = self.get(u, s);
            }
        }
        Self::new(self.axes.clone(), probs, self.base_q)
    }
}
