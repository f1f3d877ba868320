//! Largest output lengths `m` for which each leftover-hash guarantee applies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::gamma::gamma_fn;
use crate::error::{Error, Result};

/// Which guarantee a threshold belongs to. The order argument of
/// [`m_threshold`] is `α` for the first two and `k` for the next two; the
/// baselines ignore it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// Integer `α ∈ [2, k]`: `m ≤ H_α − log_q(α²/(2ε(α−1) ln q))` gives joint `D_α ≤ ε`.
    #[serde(alias = "thm3.1")]
    IntegerAlpha,
    /// `α ∈ (1, 2]`: `m ≤ H_α − (1/(α−1)) log_q(1/(ε(α−1) ln q))` gives joint `D_α ≤ ε`.
    #[serde(alias = "corollary")]
    LowAlpha,
    /// `m ≤ H_k − log_q(k/(2ε ln q))` gives conditional `D_∞ ≤ m/k + ε`.
    #[serde(alias = "thm4.2")]
    MinDivergence,
    /// `m ≤ H_k + log_q(γ(q^{ε(k−1)/k})/k)` gives the sharp `D_k` bound `≤ ε`.
    SharpGamma,
    /// `m ≤ H_∞ − log_q(1/ε)` gives joint TV `≤ √ε/2`.
    LhlTv,
    /// `m ≤ H_2 − log_q(1/ε)` gives joint KL `≤ ε/ln q`.
    LhlKl,
}

impl Regime {
    pub const ALL: [Regime; 6] =
        [Regime::IntegerAlpha, Regime::LowAlpha, Regime::MinDivergence, Regime::SharpGamma, Regime::LhlTv, Regime::LhlKl];

    pub fn name(self) -> &'static str {
        match self {
            Regime::IntegerAlpha => "integer-alpha",
            Regime::LowAlpha => "low-alpha",
            Regime::MinDivergence => "min-divergence",
            Regime::SharpGamma => "sharp-gamma",
            Regime::LhlTv => "lhl-tv",
            Regime::LhlKl => "lhl-kl",
        }
    }

    /// Value the guaranteed quantity is bounded by once the threshold holds.
    pub fn target(self, epsilon: f64, q: u32, m: f64, k: u32) -> f64 {
        match self {
            Regime::IntegerAlpha | Regime::LowAlpha | Regime::SharpGamma => epsilon,
            Regime::MinDivergence => m / k as f64 + epsilon,
            Regime::LhlTv => epsilon.sqrt() / 2.0,
            Regime::LhlKl => epsilon / (q as f64).ln(),
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let found = match s {
            "thm3.1" => Some(Regime::IntegerAlpha),
            "corollary" => Some(Regime::LowAlpha),
            "thm4.2" => Some(Regime::MinDivergence),
            other => Regime::ALL.into_iter().find(|r| r.name() == other),
        };
        found.ok_or_else(|| Error::OutOfRange(format!("unknown regime {s:?}")))
    }
}

/// Real-valued threshold on `m`. `order` is `α` or `k` as the regime requires;
/// `entropy` is the matching `H_α`, `H_k`, `H_∞` or `H_2`, possibly conditional.
pub fn m_threshold(regime: Regime, order: f64, entropy: f64, epsilon: f64, q: u32) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange(format!("ε = {epsilon} must be positive and finite")));
    }
    if q < 2 {
        return Err(Error::OutOfRange(format!("q = {q} must be at least 2")));
    }
    let ln_q = (q as f64).ln();
    let log_q = |x: f64| x.ln() / ln_q;
    let needs_order = |lo_open: f64, hi: f64| {
        if order > lo_open && order <= hi {
            Ok(())
        } else {
            Err(Error::InvalidAlpha(format!("order {order} outside ({lo_open}, {hi}] for regime {regime}")))
        }
    };
    match regime {
        Regime::IntegerAlpha => {
            needs_order(1.0, f64::INFINITY)?;
            if order.fract() != 0.0 {
                return Err(Error::InvalidAlpha(format!("regime {regime} needs an integer order, got {order}")));
            }
            Ok(entropy - log_q(order * order / (2.0 * epsilon * (order - 1.0) * ln_q)))
        }
        Regime::LowAlpha => {
            needs_order(1.0, 2.0)?;
            Ok(entropy - log_q(1.0 / (epsilon * (order - 1.0) * ln_q)) / (order - 1.0))
        }
        Regime::MinDivergence => {
            needs_order(1.0, f64::INFINITY)?;
            Ok(entropy - log_q(order / (2.0 * epsilon * ln_q)))
        }
        Regime::SharpGamma => {
            needs_order(1.0, f64::INFINITY)?;
            let y = (epsilon * (order - 1.0) / order * ln_q).exp();
            Ok(entropy + log_q(gamma_fn(y)? / order))
        }
        Regime::LhlTv | Regime::LhlKl => Ok(entropy - log_q(1.0 / epsilon)),
    }
}
