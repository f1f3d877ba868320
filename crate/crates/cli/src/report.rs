//! Report types and text formatting.

use std::io::Write;

use anyhow::Result;
use clap::ValueEnum;
use renyi_extract::bounds::BoundReport;
use renyi_extract::hashfam::Certification;
use renyi_extract::numeric::extended_f64;
use renyi_extract::{Alpha, BucketMode, DivergenceRow, Regime};
use serde::Serialize;

use crate::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// Resolved run settings, echoed next to the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RunSettings {
    pub budget: u64,
    pub workers: usize,
    pub rng_seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyRow {
    pub alpha: Alpha,
    #[serde(with = "extended_f64")]
    pub entropy: f64,
    /// `H_α(X|Z)`, present with a side channel and finite `α > 1`.
    pub conditional: Option<f64>,
}

/// A threshold on `m` and whether the configured `m` lies under it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdRecord {
    pub regime: Regime,
    /// Order of the entropy the threshold is computed from.
    pub order: Alpha,
    pub epsilon: f64,
    pub entropy: f64,
    pub threshold: f64,
    pub floor: f64,
    pub applies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketRow {
    pub k: u32,
    pub m: u32,
    pub subset_size: usize,
    pub mode: BucketMode,
    pub seeds_used: u64,
    pub empirical: f64,
    pub std_error: Option<f64>,
    pub bound: f64,
    pub satisfied: bool,
}

impl BucketRow {
    /// Only exactly enumerated rows count toward a run's verdict.
    pub fn counts_as_failure(&self) -> bool {
        matches!(self.mode, BucketMode::Exact {}) && !self.satisfied
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: ExperimentConfig,
    pub settings: RunSettings,
    pub certification: Certification,
    /// Why the run stopped before extraction, if it did.
    pub aborted: Option<String>,
    pub entropy: Vec<EntropyRow>,
    pub divergences: Vec<DivergenceRow>,
    pub bounds: Vec<BoundReport>,
    pub thresholds: Vec<ThresholdRecord>,
    pub bucket: Vec<BucketRow>,
    pub passed: bool,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Units {
    /// Base-q logarithms.
    #[default]
    Qary,
    Bits,
}

impl Units {
    /// Converts a q-ary log quantity for display.
    pub fn convert(self, value: f64, q: u32) -> f64 {
        match self {
            Units::Qary => value,
            Units::Bits => value * (q as f64).log2(),
        }
    }
}

/// `%.12g`-style rendering: 12 significant digits, trailing zeros trimmed.
pub fn sig12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let fixed = format!("{:.*}", (11 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{}{:02}", trim_zeros(mantissa), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Human-readable summary of a verify run.
pub fn summarize(report: &RunReport, units: Units) -> String {
    let q = report.config.family.q;
    let u = |v: f64| sig12(units.convert(v, q));
    let mut out = String::new();
    let cert = &report.certification;
    match cert.first_failure() {
        None => out.push_str(&format!("certification: passed for l = 2..={}\n", cert.k)),
        Some(l) => out.push_str(&format!("certification: FAILED at l = {l}\n")),
    }
    if let Some(reason) = &report.aborted {
        out.push_str(&format!("aborted: {reason}\n"));
    }
    for e in &report.entropy {
        out.push_str(&format!("H_{} = {}", e.alpha, u(e.entropy)));
        if let Some(c) = e.conditional {
            out.push_str(&format!("  H_{}(X|Z) = {}", e.alpha, u(c)));
        }
        out.push('\n');
    }
    for d in &report.divergences {
        out.push_str(&format!("D_{}: joint = {}  conditional = {}\n", d.alpha, u(d.joint), u(d.conditional)));
    }
    for b in &report.bounds {
        let mut label = format!("{} alpha={}", b.name, b.inputs.alpha);
        if let Some(eps) = b.inputs.epsilon {
            label.push_str(&format!(" eps={}", sig12(eps)));
        }
        out.push_str(&format!(
            "{} {label}: empirical = {}  bound = {}\n",
            if b.satisfied { "PASS" } else { "FAIL" },
            u(b.empirical),
            u(b.bound)
        ));
    }
    for t in &report.thresholds {
        out.push_str(&format!(
            "threshold {} order={} eps={}: m <= {} (floor {}){}\n",
            t.regime,
            t.order,
            sig12(t.epsilon),
            u(t.threshold),
            sig12(t.floor),
            if t.applies { "" } else { ", not applicable" }
        ));
    }
    for r in &report.bucket {
        out.push_str(&format!(
            "{} bucket |A|={}: empirical = {}  bound = {}\n",
            if r.satisfied { "PASS" } else { "FAIL" },
            r.subset_size,
            sig12(r.empirical),
            sig12(r.bound)
        ));
    }
    out.push_str(if report.passed { "result: PASS\n" } else { "result: FAIL\n" });
    out
}
