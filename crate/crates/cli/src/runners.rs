//! The work behind each subcommand, independent of argument parsing.

use std::fmt;
use std::io::Write;

use anyhow::{Context, Result};
use clap::ValueEnum;
use renyi_extract::bounds::{
    bound_alpha_above_k, bound_infty, bound_integer_alpha, bound_real_alpha, bound_real_alpha_simplified, bucket_bound,
    dk_bound_sharp, dk_bound_simple, infty_from_dk, m_threshold, BoundInputs, BoundReport, Regime, BOUND_TOLERANCE,
};
use renyi_extract::extractor::{expected_max_bucket, extract_joint, ExtractOptions, ExtractionResult, DEFAULT_BUDGET};
use renyi_extract::hashfam::{certify_k_star, HashFamily};
use renyi_extract::infomeasure::{
    conditional_divergence, joint_divergence_from_uniform, renyi_entropy, tv_to_uniform_product, Alpha, Pmf,
};
use renyi_extract::{BucketMode, FieldElement, Source};
use serde::Serialize;

use crate::config::{BoundKind, ExperimentConfig};
use crate::report::{csv_writer, sig12, BucketRow, EntropyRow, RunReport, RunSettings, ThresholdRecord, SCHEMA_VERSION};

pub const BUDGET_ENV: &str = "RENYI_EXTRACT_BUDGET";

/// A flag combination the command cannot act on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// Budget precedence: flag, then config, then the environment, then the default.
pub fn resolve_budget(flag: Option<u64>, config: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(b) = flag.or(config) {
        return Ok(b);
    }
    match env {
        Some(v) => v.trim().parse().with_context(|| format!("{BUDGET_ENV}={v:?} is not a non-negative integer")),
        None => Ok(DEFAULT_BUDGET),
    }
}

pub fn verify(cfg: &ExperimentConfig, settings: RunSettings) -> Result<RunReport> {
    let family = cfg.family.build()?;
    let certification = certify_k_star(&family, settings.budget).context("certifying the family")?;
    let mut report = RunReport {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        settings,
        certification,
        aborted: None,
        entropy: Vec::new(),
        divergences: Vec::new(),
        bounds: Vec::new(),
        thresholds: Vec::new(),
        bucket: Vec::new(),
        passed: false,
    };
    if let Some(l) = report.certification.first_failure() {
        report.aborted = Some(format!("family is not {l}-universal"));
        return Ok(report);
    }

    let source = cfg.source.build(family.field())?;
    let opts = ExtractOptions { budget: settings.budget, workers: settings.workers };
    let result = extract_joint(&family, &source, opts)?;

    for &a in &cfg.alphas {
        let conditional = if a.is_finite_above_one() { source.conditional_entropy(a).transpose()? } else { None };
        report.entropy.push(EntropyRow { alpha: a, entropy: source.entropy(a), conditional });
    }
    report.divergences = result.empirical_divergences(&cfg.alphas);
    let (bounds, thresholds) = certify_bounds(cfg, &family, &result)?;
    report.bounds = bounds;
    report.thresholds = thresholds;
    if cfg.bucket.is_some() {
        report.bucket = bucket_rows(cfg, settings)?;
    }
    report.passed = report.bounds.iter().all(|b| b.satisfied) && !report.bucket.iter().any(BucketRow::counts_as_failure);
    Ok(report)
}

/// Every selected bound at the configured orders, plus the threshold records.
fn certify_bounds(
    cfg: &ExperimentConfig,
    family: &HashFamily,
    result: &ExtractionResult,
) -> Result<(Vec<BoundReport>, Vec<ThresholdRecord>)> {
    let (q, k, m) = (family.q(), family.k(), family.m() as f64);
    let joint = |a| joint_divergence_from_uniform(&result.joint, a);
    let cond = |a| conditional_divergence(&result.joint, a);
    let inputs = |a, h| BoundInputs::new(q, m, k, a, h);
    let order_k = Alpha::Finite(k as f64);
    let h_k = result.effective_entropy(order_k)?;
    let mut out = Vec::new();

    for &a in &cfg.alphas {
        let Alpha::Finite(v) = a else { continue };
        if v <= k as f64 {
            let inp = inputs(a, result.effective_entropy(a)?)?;
            let d = joint(a);
            if cfg.selected(BoundKind::RealAlpha) {
                out.push(BoundReport::new("real-alpha", inp, bound_real_alpha(&inp)?, d));
            }
            if cfg.selected(BoundKind::IntegerAlpha) && v.fract() == 0.0 {
                out.push(BoundReport::new("integer-alpha", inp, bound_integer_alpha(&inp)?, d));
            }
            if cfg.selected(BoundKind::Simplified) {
                out.push(BoundReport::new("simplified", inp, bound_real_alpha_simplified(&inp)?, d));
            }
        } else if cfg.selected(BoundKind::AboveK) {
            let inp = inputs(a, h_k)?;
            out.push(BoundReport::new("above-k", inp, bound_alpha_above_k(&inp)?, cond(a)));
        }
    }

    let inp_k = inputs(order_k, h_k)?;
    if cfg.selected(BoundKind::DkSimple) {
        out.push(BoundReport::new("dk-simple", inp_k, dk_bound_simple(&inp_k, k)?, joint(order_k)));
    }
    if cfg.selected(BoundKind::DkSharp) {
        out.push(BoundReport::new("dk-sharp", inp_k, dk_bound_sharp(&inp_k, k)?, joint(order_k)));
    }
    if cfg.selected(BoundKind::Infinity) {
        let inp = inputs(Alpha::Infinity, h_k)?;
        let d_inf = cond(Alpha::Infinity);
        out.push(BoundReport::new("infinity", inp, bound_infty(&inp)?, d_inf));
        out.push(BoundReport::new("infinity-from-dk", inp_k, infty_from_dk(cond(order_k), k, m), d_inf));
    }

    let mut records = Vec::new();
    // `order` picks the entropy and threshold; `reported` is the order of the
    // guaranteed quantity.
    let mut check = |regime: Regime, order: Alpha, reported: Alpha, h: f64, eps: f64, empirical: f64| -> Result<()> {
        let order_arg = if order.is_finite_above_one() { order.value() } else { 2.0 };
        let threshold = m_threshold(regime, order_arg, h, eps, q)?;
        let applies = m <= threshold;
        records.push(ThresholdRecord {
            regime,
            order,
            epsilon: eps,
            entropy: h,
            threshold,
            floor: threshold.floor(),
            applies,
        });
        if applies {
            let inp = inputs(reported, h)?.with_epsilon(eps)?;
            out.push(BoundReport::new(format!("threshold/{regime}"), inp, regime.target(eps, q, m, k), empirical));
        }
        Ok(())
    };
    for &eps in &cfg.epsilons {
        if cfg.selected(BoundKind::Thresholds) {
            for j in 2..=k {
                let a = Alpha::Finite(j as f64);
                check(Regime::IntegerAlpha, a, a, result.effective_entropy(a)?, eps, joint(a))?;
            }
            for &a in &cfg.alphas {
                if matches!(a, Alpha::Finite(v) if v <= 2.0) {
                    check(Regime::LowAlpha, a, a, result.effective_entropy(a)?, eps, joint(a))?;
                }
            }
            check(Regime::MinDivergence, order_k, Alpha::Infinity, h_k, eps, cond(Alpha::Infinity))?;
            check(Regime::SharpGamma, order_k, order_k, h_k, eps, joint(order_k))?;
        }
        if cfg.selected(BoundKind::Baselines) {
            let seed_joint = result.seed_joint();
            let source = &result.source;
            let tv = tv_to_uniform_product(&seed_joint);
            let kl = joint_divergence_from_uniform(&seed_joint, Alpha::One);
            let two = Alpha::Finite(2.0);
            check(Regime::LhlTv, Alpha::Infinity, Alpha::Infinity, source.entropy(Alpha::Infinity), eps, tv)?;
            check(Regime::LhlKl, two, two, source.entropy(two), eps, kl)?;
        }
    }
    Ok((out, records))
}

fn subset(family: &HashFamily, indices: &[u32]) -> Result<Vec<FieldElement>> {
    Ok(indices.iter().map(|&i| family.field().element(i)).collect::<renyi_extract::Result<_>>()?)
}

/// One row per configured subset; exact when `|S|·|A|` fits the budget.
pub fn bucket_rows(cfg: &ExperimentConfig, settings: RunSettings) -> Result<Vec<BucketRow>> {
    let Some(spec) = &cfg.bucket else { return Ok(Vec::new()) };
    let family = cfg.family.build()?;
    let subsets = spec.subset_sizes.iter().map(|&n| (0..n).collect::<Vec<u32>>()).chain(spec.subsets.iter().cloned());
    let mut rows = Vec::new();
    for indices in subsets {
        let a = subset(&family, &indices)?;
        let exact_cost = family.seed_space_size() as u128 * a.len() as u128;
        let mode = if spec.force_sampled || exact_cost > settings.budget as u128 {
            BucketMode::Sampled { seeds: spec.sampled_seeds, rng_seed: settings.rng_seed }
        } else {
            BucketMode::Exact {}
        };
        let est = expected_max_bucket(&family, &a, mode, settings.budget)?;
        let bound = bucket_bound(family.k(), family.m(), family.q(), a.len() as u64)?;
        rows.push(BucketRow {
            k: family.k(),
            m: family.m(),
            subset_size: a.len(),
            mode,
            seeds_used: est.seeds_used,
            empirical: est.mean,
            std_error: est.std_error,
            bound,
            satisfied: est.mean <= bound + BOUND_TOLERANCE,
        });
    }
    Ok(rows)
}

pub fn write_bucket_csv<W: Write>(rows: &[BucketRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["k", "m", "subset_size", "mode", "seeds_used", "empirical", "std_error", "bound", "satisfied"])?;
    for r in rows {
        let mode = match r.mode {
            BucketMode::Exact {} => "exact",
            BucketMode::Sampled { .. } => "sampled",
        };
        out.write_record([
            r.k.to_string(),
            r.m.to_string(),
            r.subset_size.to_string(),
            mode.to_string(),
            r.seeds_used.to_string(),
            sig12(r.empirical),
            r.std_error.map(sig12).unwrap_or_default(),
            sig12(r.bound),
            r.satisfied.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: Alpha,
    pub m: u32,
    /// `joint` for `α ≤ k`, `conditional` above.
    pub quantity: &'static str,
    pub entropy: f64,
    pub empirical: f64,
    pub bound: f64,
    pub satisfied: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Output lengths whose family failed certification.
    pub failed_certification: Vec<(u32, u32)>,
}

impl SweepOutcome {
    pub fn passed(&self) -> bool {
        self.failed_certification.is_empty() && self.rows.iter().all(|r| r.satisfied)
    }
}

/// For each `m`, certifies and extracts once, then evaluates every `α`: the
/// real-order joint bound up to `k` and the conditional bounds above it.
pub fn sweep(cfg: &ExperimentConfig, settings: RunSettings) -> Result<SweepOutcome> {
    let mut outcome = SweepOutcome::default();
    let Some(spec) = &cfg.sweep else { return Ok(outcome) };
    if spec.alphas.is_empty() {
        return Ok(outcome);
    }
    for &m in &spec.ms {
        let family = cfg.family.build_with_m(m)?;
        let cert = certify_k_star(&family, settings.budget)?;
        if let Some(l) = cert.first_failure() {
            outcome.failed_certification.push((m, l));
            continue;
        }
        let source = cfg.source.build(family.field())?;
        let result = extract_joint(&family, &source, ExtractOptions { budget: settings.budget, workers: settings.workers })?;
        let (q, k) = (family.q(), family.k());
        let h_k = result.effective_entropy(Alpha::Finite(k as f64))?;
        for &a in &spec.alphas {
            let row = match a {
                Alpha::Finite(v) if v <= k as f64 => {
                    let h = result.effective_entropy(a)?;
                    let inp = BoundInputs::new(q, m as f64, k, a, h)?;
                    let d = joint_divergence_from_uniform(&result.joint, a);
                    (inp, "joint", bound_real_alpha(&inp)?, d)
                }
                Alpha::Finite(_) => {
                    let inp = BoundInputs::new(q, m as f64, k, a, h_k)?;
                    (inp, "conditional", bound_alpha_above_k(&inp)?, conditional_divergence(&result.joint, a))
                }
                Alpha::Infinity => {
                    let inp = BoundInputs::new(q, m as f64, k, a, h_k)?;
                    (inp, "conditional", bound_infty(&inp)?, conditional_divergence(&result.joint, a))
                }
                Alpha::One => unreachable!("rejected when the config is loaded"),
            };
            let (inp, quantity, bound, empirical) = row;
            outcome.rows.push(SweepRow {
                alpha: a,
                m,
                quantity,
                entropy: inp.entropy,
                empirical,
                bound,
                satisfied: empirical <= bound + BOUND_TOLERANCE,
            });
        }
    }
    Ok(outcome)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["alpha", "m", "quantity", "entropy", "empirical", "bound", "bound_minus_empirical", "satisfied"])?;
    for r in rows {
        out.write_record([
            r.alpha.to_string(),
            r.m.to_string(),
            r.quantity.to_string(),
            sig12(r.entropy),
            sig12(r.empirical),
            sig12(r.bound),
            sig12(r.bound - r.empirical),
            r.satisfied.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundName {
    RealAlpha,
    IntegerAlpha,
    Simplified,
    DkSimple,
    DkSharp,
    AboveK,
    Infinity,
    Bucket,
}

/// Flags of the `bound` subcommand; exactly one of `regime` and `name`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundQuery {
    pub regime: Option<Regime>,
    pub name: Option<BoundName>,
    pub q: u32,
    pub m: Option<f64>,
    pub k: Option<u32>,
    pub alpha: Option<Alpha>,
    pub entropy: Option<f64>,
    pub epsilon: Option<f64>,
    pub subset_size: Option<u64>,
}

/// A labelled value; `log_scale` marks q-ary log quantities that `--units` converts.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub label: String,
    pub value: f64,
    pub log_scale: bool,
}

fn need<T>(v: Option<T>, flag: &str, what: &str) -> std::result::Result<T, UsageError> {
    v.ok_or_else(|| UsageError(format!("{what} requires --{flag}")))
}

pub fn bound_query(query: &BoundQuery) -> Result<Vec<Evaluated>> {
    let q = query.q;
    let log = |label: &str, value: f64| Evaluated { label: label.to_string(), value, log_scale: true };
    match (query.regime, query.name) {
        (Some(regime), None) => {
            let what = format!("--regime {regime}");
            let h = need(query.entropy, "H", &what)?;
            let eps = need(query.epsilon, "eps", &what)?;
            let order = match regime {
                Regime::IntegerAlpha | Regime::LowAlpha => need(query.alpha, "alpha", &what)?.value(),
                Regime::MinDivergence | Regime::SharpGamma => need(query.k, "k", &what)? as f64,
                Regime::LhlTv | Regime::LhlKl => 2.0,
            };
            let t = m_threshold(regime, order, h, eps, q)?;
            Ok(vec![log("threshold", t), Evaluated { label: "floor".into(), value: t.floor(), log_scale: false }])
        }
        (None, Some(BoundName::Bucket)) => {
            let what = "--name bucket";
            let m = need(query.m, "m", what)?;
            if m.fract() != 0.0 || m < 1.0 {
                return Err(UsageError(format!("--name bucket needs a positive integer --m, got {m}")).into());
            }
            let k = need(query.k, "k", what)?;
            let a = need(query.subset_size, "A", what)?;
            let b = bucket_bound(k, m as u32, q, a)?;
            Ok(vec![Evaluated { label: "bucket".into(), value: b, log_scale: false }])
        }
        (None, Some(name)) => {
            let label = name.to_possible_value().expect("named variant").get_name().to_string();
            let what = format!("--name {label}");
            let m = need(query.m, "m", &what)?;
            let k = need(query.k, "k", &what)?;
            let h = need(query.entropy, "H", &what)?;
            let alpha = match name {
                BoundName::DkSimple | BoundName::DkSharp => Alpha::Finite(k as f64),
                BoundName::Infinity => Alpha::Infinity,
                _ => need(query.alpha, "alpha", &what)?,
            };
            let inp = BoundInputs::new(q, m, k, alpha, h)?;
            let value = match name {
                BoundName::RealAlpha => bound_real_alpha(&inp)?,
                BoundName::IntegerAlpha => bound_integer_alpha(&inp)?,
                BoundName::Simplified => bound_real_alpha_simplified(&inp)?,
                BoundName::DkSimple => dk_bound_simple(&inp, k)?,
                BoundName::DkSharp => dk_bound_sharp(&inp, k)?,
                BoundName::AboveK => bound_alpha_above_k(&inp)?,
                BoundName::Infinity => bound_infty(&inp)?,
                BoundName::Bucket => unreachable!(),
            };
            Ok(vec![log(&label, value)])
        }
        _ => Err(UsageError("give exactly one of --regime and --name".into()).into()),
    }
}

/// `H_α` of an explicit pmf for each order.
pub fn entropy_query(probs: &[f64], q: u32, alphas: &[Alpha]) -> Result<Vec<Evaluated>> {
    let pmf = Pmf::new(probs.to_vec(), q)?;
    Ok(alphas.iter().map(|&a| Evaluated { label: format!("H_{a}"), value: renyi_entropy(&pmf, a), log_scale: true }).collect())
}

/// `H_α(X)` and, with a side channel, `H_α(X|Z)` of a configured source.
pub fn source_entropy(source: &Source, alphas: &[Alpha]) -> Result<Vec<Evaluated>> {
    let mut out = Vec::new();
    for &a in alphas {
        out.push(Evaluated { label: format!("H_{a}"), value: source.entropy(a), log_scale: true });
        if a.is_finite_above_one() {
            if let Some(h) = source.conditional_entropy(a) {
                out.push(Evaluated { label: format!("H_{a}(X|Z)"), value: h?, log_scale: true });
            }
        }
    }
    Ok(out)
}
