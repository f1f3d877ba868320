use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashfam::{Field, FieldElement};
use crate::infomeasure::{conditional_renyi_entropy, renyi_entropy, Alpha, JointPmf, Pmf, NORMALIZATION_TOLERANCE};

/// Named source distributions over the first `support_size` field elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SourcePreset {
    Uniform {},
    /// All mass on the first element.
    PointMass {},
    /// Mass `p` on the first element and `1 − p` on the second.
    TwoSpike {
        p: f64,
    },
    /// Mass proportional to `r^i` on element `i`.
    Geometric {
        r: f64,
    },
}

impl SourcePreset {
    pub fn probs(&self, support_size: usize) -> Result<Vec<f64>> {
        if support_size == 0 {
            return Err(Error::InvalidSource("support must be non-empty".into()));
        }
        match *self {
            SourcePreset::Uniform {} => Ok(vec![1.0 / support_size as f64; support_size]),
            SourcePreset::PointMass {} => {
                let mut v = vec![0.0; support_size];
                v[0] = 1.0;
                Ok(v)
            }
            SourcePreset::TwoSpike { p } => {
                if support_size < 2 {
                    return Err(Error::InvalidSource("two-spike needs at least two support elements".into()));
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidProbability(p));
                }
                let mut v = vec![0.0; support_size];
                v[0] = p;
                v[1] = 1.0 - p;
                Ok(v)
            }
            SourcePreset::Geometric { r } => {
                if !(r > 0.0 && r <= 1.0) {
                    return Err(Error::InvalidSource(format!("geometric ratio {r} must lie in (0, 1]")));
                }
                let weights: Vec<f64> = (0..support_size).map(|i| r.powi(i as i32)).collect();
                let total: f64 = weights.iter().sum();
                Ok(weights.into_iter().map(|w| w / total).collect())
            }
        }
    }
}

/// A distribution on distinct field elements, optionally with a side channel
/// `P_{Z|X}` given as one row per support element.
#[derive(Debug, Clone, PartialEq)]
pub struct Source {
    support: Vec<FieldElement>,
    probs: Pmf,
    side_channel: Option<Vec<Vec<f64>>>,
}

impl Source {
    pub fn new(support: Vec<FieldElement>, probs: Pmf, side_channel: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if support.len() != probs.len() {
            return Err(Error::SizeMismatch(support.len(), probs.len()));
        }
        let mut seen: Vec<&FieldElement> = Vec::with_capacity(support.len());
        for e in &support {
            if e.params() != support[0].params() {
                return Err(Error::FieldMismatch);
            }
            if seen.contains(&e) {
                return Err(Error::InvalidSource(format!("support element {} repeated", e.index())));
            }
            seen.push(e);
        }
        if let Some(rows) = &side_channel {
            validate_channel(rows, support.len())?;
        }
        Ok(Self { support, probs, side_channel })
    }

    /// Source on the field elements with the given indices.
    pub fn from_indices(field: &Field, indices: &[u32], probs: Pmf, side_channel: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let support = indices.iter().map(|&i| field.element(i)).collect::<Result<Vec<_>>>()?;
        Self::new(support, probs, side_channel)
    }

    /// Preset distribution on elements `0..support_size`.
    pub fn preset(field: &Field, preset: SourcePreset, support_size: usize, side_channel: Option<Vec<Vec<f64>>>) -> Result<Self> {
        if support_size as u64 > field.order() as u64 {
            return Err(Error::InvalidSource(format!("support size {support_size} exceeds the field order {}", field.order())));
        }
        let probs = Pmf::new(preset.probs(support_size)?, field.q())?;
        let indices: Vec<u32> = (0..support_size as u32).collect();
        Self::from_indices(field, &indices, probs, side_channel)
    }

    pub fn support(&self) -> &[FieldElement] {
        &self.support
    }

    pub fn probs(&self) -> &Pmf {
        &self.probs
    }

    pub fn side_channel(&self) -> Option<&[Vec<f64>]> {
        self.side_channel.as_deref()
    }

    /// `|𝒵|`, or 1 without a side channel.
    pub fn side_size(&self) -> usize {
        self.side_channel.as_ref().map_or(1, |rows| rows[0].len())
    }

    /// `H_α(X)`.
    pub fn entropy(&self, a: Alpha) -> f64 {
        renyi_entropy(&self.probs, a)
    }

    /// Joint of `(X, Z)` with `X` as the first axis. `None` without a side
    /// channel.
    pub fn xz_joint(&self) -> Option<JointPmf> {
        let rows = self.side_channel.as_ref()?;
        let z = rows[0].len();
        let probs = self.probs.probs().iter().zip(rows).flat_map(|(&p, row)| row.iter().map(move |&w| p * w)).collect();
        Some(JointPmf::new(vec![self.probs.len(), z], probs, self.probs.base_q()).expect("product of validated pmfs"))
    }

    /// `H_α(X|Z)` for finite `α > 1`; `None` without a side channel.
    pub fn conditional_entropy(&self, a: Alpha) -> Option<Result<f64>> {
        self.xz_joint().map(|j| conditional_renyi_entropy(&j, a))
    }
}

fn validate_channel(rows: &[Vec<f64>], support: usize) -> Result<()> {
    if rows.len() != support {
        return Err(Error::InvalidSource(format!("side channel has {} rows for {support} support elements", rows.len())));
    }
    let width = rows[0].len();
    if width == 0 {
        return Err(Error::InvalidSource("side channel needs at least one column".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::InvalidSource(format!("side channel row {i} has {} columns, expected {width}", row.len())));
        }
        if let Some(&p) = row.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidProbability(p));
        }
        let total: f64 = crate::numeric::sum(row.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::InvalidSource(format!("side channel row {i} sums to {total}")));
        }
    }
    Ok(())
}
