//! Experiment configuration files.

use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use renyi_extract::{Alpha, FamilyKind, Field, HashFamily, Pmf, Source, SourcePreset};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilySpec,
    pub source: SourceSpec,
    #[serde(default)]
    pub alphas: Vec<Alpha>,
    #[serde(default)]
    pub epsilons: Vec<f64>,
    /// Bound families to evaluate; all of them when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<Vec<BoundKind>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng_seed: Option<u64>,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bucket: Option<BucketSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub kind: FamilyKind,
    pub q: u32,
    pub n: u32,
    pub k: u32,
    pub m: u32,
}

impl FamilySpec {
    pub fn build(&self) -> Result<HashFamily> {
        self.build_with_m(self.m)
    }

    pub fn build_with_m(&self, m: u32) -> Result<HashFamily> {
        let field = Field::standard(self.q, self.n)?;
        let family = match self.kind {
            FamilyKind::Polynomial => HashFamily::polynomial(field, self.k, m)?,
            FamilyKind::FullTable => HashFamily::full_table(field, self.k, m)?,
            FamilyKind::Constant => HashFamily::constant(field, self.k, m)?,
        };
        Ok(family)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Uniform,
    PointMass,
    TwoSpike,
    Geometric,
}

/// Either a named preset on the first `support_size` field elements or an
/// explicit probability list on `support` (default `0..len`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<PresetName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<Vec<u32>>,
    /// `P(z|x)`, one row per support element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side_channel: Option<Vec<Vec<f64>>>,
}

impl SourceSpec {
    pub fn build(&self, field: &Field) -> Result<Source> {
        let side = self.side_channel.clone();
        match (self.preset, &self.probs) {
            (Some(_), Some(_)) => bail!("source: give either `preset` or `probs`, not both"),
            (None, None) => bail!("source: one of `preset` or `probs` is required"),
            (Some(name), None) => {
                ensure!(self.support.is_none(), "source: `support` only applies to explicit `probs`");
                let preset = match name {
                    PresetName::Uniform => SourcePreset::Uniform {},
                    PresetName::PointMass => SourcePreset::PointMass {},
                    PresetName::TwoSpike => SourcePreset::TwoSpike { p: self.p.context("source: two-spike needs `p`")? },
                    PresetName::Geometric => SourcePreset::Geometric { r: self.r.context("source: geometric needs `r`")? },
                };
                ensure!(self.p.is_none() || name == PresetName::TwoSpike, "source: `p` only applies to two-spike");
                ensure!(self.r.is_none() || name == PresetName::Geometric, "source: `r` only applies to geometric");
                let size = self.support_size.unwrap_or(field.order() as usize);
                Ok(Source::preset(field, preset, size, side)?)
            }
            (None, Some(probs)) => {
                ensure!(
                    self.p.is_none() && self.r.is_none() && self.support_size.is_none(),
                    "source: `p`, `r` and `support_size` only apply to presets"
                );
                let support: Vec<u32> = match &self.support {
                    Some(s) => s.clone(),
                    None => (0..probs.len() as u32).collect(),
                };
                let pmf = Pmf::new(probs.clone(), field.q())?;
                Ok(Source::from_indices(field, &support, pmf, side)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Joint `D_α` for real `α ∈ (1, k]`.
    RealAlpha,
    /// Joint `D_α` for integer `α ∈ [2, k]`.
    IntegerAlpha,
    Simplified,
    /// Joint `D_k`, exponential form.
    DkSimple,
    /// Joint `D_k`, sharp form.
    DkSharp,
    /// Conditional `D_α` for finite `α > k`.
    AboveK,
    /// Conditional `D_∞`.
    Infinity,
    /// Threshold-implies-bound checks, one per configured `ε`.
    Thresholds,
    /// Classical leftover-hash TV and KL checks.
    Baselines,
}

impl BoundKind {
    pub const ALL: [BoundKind; 9] = [
        BoundKind::RealAlpha,
        BoundKind::IntegerAlpha,
        BoundKind::Simplified,
        BoundKind::DkSimple,
        BoundKind::DkSharp,
        BoundKind::AboveK,
        BoundKind::Infinity,
        BoundKind::Thresholds,
        BoundKind::Baselines,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Report JSON path for `verify`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<String>,
    /// CSV path for `bucket` and `sweep`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

/// Subsets for the largest-bucket experiment. Each entry of `subset_sizes`
/// means the first that many field elements.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BucketSpec {
    #[serde(default)]
    pub subset_sizes: Vec<u32>,
    #[serde(default)]
    pub subsets: Vec<Vec<u32>>,
    /// Seeds drawn when exact enumeration exceeds the budget.
    #[serde(default = "default_sampled_seeds")]
    pub sampled_seeds: u64,
    /// Sample even when exact enumeration fits.
    #[serde(default)]
    pub force_sampled: bool,
}

fn default_sampled_seeds() -> u64 {
    10_000
}

/// Grid of `(α, m)` points; the family's `m` is replaced by each entry of `ms`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub alphas: Vec<Alpha>,
    #[serde(default)]
    pub ms: Vec<u32>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn selected(&self, kind: BoundKind) -> bool {
        self.bounds.as_ref().map_or(true, |b| b.contains(&kind))
    }

    fn validate(&self) -> Result<()> {
        for &eps in &self.epsilons {
            ensure!(eps > 0.0 && eps.is_finite(), "epsilon {eps} must be positive and finite");
        }
        if let Some(sweep) = &self.sweep {
            for a in &sweep.alphas {
                ensure!(!matches!(a, Alpha::One), "sweep orders must exceed 1");
            }
            ensure!(sweep.ms.iter().all(|&m| m >= 1), "sweep output lengths must be at least 1");
        }
        if let Some(b) = &self.bucket {
            ensure!(b.sampled_seeds >= 2, "bucket.sampled_seeds must be at least 2");
        }
        ensure!(self.budget != Some(0), "budget must be positive");
        Ok(())
    }
}
