//! Concave penalty families used to approximate the count of violated sets.
//!
//! The solver replaces the discontinuous count `|d²|₀` of positive squared
//! distances by smooth concave surrogates `ψ: ℝ₊ → ℝ₊` with `ψ(0) = 0`,
//! positive nonincreasing derivative and Lipschitz `ψ′`. Three families are
//! provided:
//!
//! | family                           | `ψ(s)`                | `ψ′(s)`           | Lipschitz bound |
//! |----------------------------------|-----------------------|-------------------|-----------------|
//! | [`PenaltyFamily::LogEps`],  ε∈(0,1) | `ln(s+ε) − ln ε`      | `1/(s+ε)`          | `1/ε²`          |
//! | [`PenaltyFamily::FracEps`], ε>0     | `s/(s+ε) + εs`        | `ε/(s+ε)² + ε`     | `2/ε²`          |
//! | [`PenaltyFamily::Linear`],  m≥1     | `s/m`                 | `1/m`              | `0`             |
//!
//! The first two sharpen towards the exact count as `ε ↓ 0`; shrinking ε is
//! what the continuation driver in [`crate::eas`] automates. The linear family
//! has no sharpening parameter — minimizing it averages squared distances, the
//! classical averaged-projection objective.
//!
//! [`PenaltyFamily::phi`] exposes the normalized surrogate `φ_ε` with
//! `φ_ε(0) = 0` and `φ_ε(s) → 1` for `s > 0` as `ε ↓ 0`. For the log family
//! `φ_ε = (−1/ln ε)·ψ` exactly, so minimizing the `ψ`-sum and the `φ`-sum is
//! the same problem up to a positive factor.

use thiserror::Error;

/// Invalid penalty-family parameters.
#[derive(Debug, Error)]
pub enum PenaltyError {
    /// The log family needs `ε ∈ (0, 1)`.
    #[error("log family needs eps in (0, 1), got {0}")]
    LogEpsOutOfRange(f64),
    /// The fractional family needs `ε > 0`.
    #[error("fractional family needs eps > 0, got {0}")]
    FracEpsOutOfRange(f64),
    /// The linear family needs at least one term.
    #[error("linear family needs m >= 1")]
    ZeroTerms,
}

/// Family selector without the sharpening parameter; used by configuration
/// surfaces (continuation driver, CLI) that pick ε per stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PenaltyKind {
    /// Logarithmic family.
    Log,
    /// Fractional family.
    Frac,
    /// Linear family (no sharpening parameter).
    Linear,
}

impl std::str::FromStr for PenaltyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log" => Ok(PenaltyKind::Log),
            "frac" => Ok(PenaltyKind::Frac),
            "linear" => Ok(PenaltyKind::Linear),
            other => Err(format!(
                "unknown penalty kind {other:?} (expected log, frac or linear)"
            )),
        }
    }
}

impl std::fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PenaltyKind::Log => "log",
            PenaltyKind::Frac => "frac",
            PenaltyKind::Linear => "linear",
        })
    }
}

/// A concrete penalty: a family together with its parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum PenaltyFamily {
    /// `ψ(s) = ln(s+ε) − ln ε` with `ε ∈ (0, 1)`.
    LogEps {
        /// Sharpening parameter.
        eps: f64,
    },
    /// `ψ(s) = s/(s+ε) + εs` with `ε > 0`.
    FracEps {
        /// Sharpening parameter.
        eps: f64,
    },
    /// `ψ(s) = s/m` with `m ≥ 1` terms.
    Linear {
        /// Number of summed terms the penalty is normalized by.
        m: usize,
    },
}

impl PenaltyFamily {
    /// Logarithmic penalty; requires `ε ∈ (0, 1)`.
    pub fn log_eps(eps: f64) -> Result<Self, PenaltyError> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(PenaltyError::LogEpsOutOfRange(eps));
        }
        Ok(PenaltyFamily::LogEps { eps })
    }

    /// Fractional penalty; requires `ε > 0` finite.
    pub fn frac_eps(eps: f64) -> Result<Self, PenaltyError> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(PenaltyError::FracEpsOutOfRange(eps));
        }
        Ok(PenaltyFamily::FracEps { eps })
    }

    /// Linear penalty normalized by `m ≥ 1`.
    pub fn linear(m: usize) -> Result<Self, PenaltyError> {
        if m == 0 {
            return Err(PenaltyError::ZeroTerms);
        }
        Ok(PenaltyFamily::Linear { m })
    }

    /// Penalty value `ψ(s)`; `ψ(0) = 0` exactly for every family.
    ///
    /// # Panics
    /// If `s < 0` (arguments are squared distances, never negative).
    pub fn psi(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "psi: negative argument {s}");
        match *self {
            PenaltyFamily::LogEps { eps } => (s + eps).ln() - eps.ln(),
            PenaltyFamily::FracEps { eps } => s / (s + eps) + eps * s,
            PenaltyFamily::Linear { m } => s / m as f64,
        }
    }

    /// Right derivative `ψ′₊(s)`, evaluated in closed form (finite and positive
    /// at `s = 0`).
    ///
    /// # Panics
    /// If `s < 0`.
    pub fn psi_prime(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "psi_prime: negative argument {s}");
        match *self {
            PenaltyFamily::LogEps { eps } => 1.0 / (s + eps),
            PenaltyFamily::FracEps { eps } => {
                let t = s + eps;
                eps / (t * t) + eps
            }
            PenaltyFamily::Linear { m } => 1.0 / m as f64,
        }
    }

    /// A Lipschitz constant of `ψ′₊` on `ℝ₊` (`sup |ψ″|`): `1/ε²`, `2/ε²` and
    /// `0` for the log, fractional and linear families respectively.
    pub fn psi_prime_lipschitz(&self) -> f64 {
        match *self {
            PenaltyFamily::LogEps { eps } => 1.0 / (eps * eps),
            PenaltyFamily::FracEps { eps } => 2.0 / (eps * eps),
            PenaltyFamily::Linear { .. } => 0.0,
        }
    }

    /// Normalized surrogate `φ_ε(s)` of the violation indicator:
    /// `1 − ln(s+ε)/ln ε` for the log family, `s/(s+ε) + εs` for the
    /// fractional family. `φ_ε(0) = 0` exactly and `φ_ε(s) → 1` pointwise for
    /// `s > 0` as `ε ↓ 0`.
    ///
    /// # Panics
    /// If the family is [`PenaltyFamily::Linear`] (it has no normalized
    /// surrogate) or if `s < 0`.
    pub fn phi(&self, s: f64) -> f64 {
        assert!(s >= 0.0, "phi: negative argument {s}");
        match *self {
            PenaltyFamily::LogEps { eps } => 1.0 - (s + eps).ln() / eps.ln(),
            PenaltyFamily::FracEps { eps } => s / (s + eps) + eps * s,
            PenaltyFamily::Linear { .. } => {
                panic!("phi: the linear family has no normalized surrogate")
            }
        }
    }

    /// The sharpening parameter, if the family has one.
    pub fn eps(&self) -> Option<f64> {
        match *self {
            PenaltyFamily::LogEps { eps } | PenaltyFamily::FracEps { eps } => Some(eps),
            PenaltyFamily::Linear { .. } => None,
        }
    }
}
