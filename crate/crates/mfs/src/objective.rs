//! The penalized objective: weighted sums of penalized squared distances.
//!
//! A [`Problem`] is a base set `C` (the hard constraint the iterates always
//! satisfy) plus an ordered collection of system sets `D₁, …, D_m`. The goal
//! of the whole crate is to find a point of `C` that lies in as many `Dᵢ` as
//! possible; the solvers do that by driving the smooth objective
//!
//! ```text
//! Ψ(x) = Σᵢ ψ(d²(x, Dᵢ))
//! ```
//!
//! downhill over `C`, where `ψ` is one of the [`crate::penalty`] families and
//! `d²(·, Dᵢ)` is the squared Euclidean distance reported by the set oracles.
//!
//! A subgradient of `Ψ` at `x` is assembled from one deterministic projection
//! per set:
//!
//! ```text
//! g(x) = 2 Σᵢ ψ′₊(d²(x, Dᵢ)) · (x − ξᵢ),    ξᵢ = projection of x onto Dᵢ.
//! ```
//!
//! For convex `Dᵢ` this is the exact gradient; for nonconvex `Dᵢ` it is the
//! member of the Clarke subdifferential selected by the oracle tie-breaks,
//! which is all the solver needs. One [`Evaluation`] carries the value, the
//! squared distances and the projections of a single pass, so the objective
//! value and the subgradient at the same point always share one set of
//! projections; evaluating at a new point starts a fresh pass.

use serde::Serialize;
use thiserror::Error;

use crate::penalty::PenaltyFamily;
use crate::sets::SetOracle;
use crate::vecops::sq_dist;

/// Problem construction errors.
#[derive(Debug, Error)]
pub enum ProblemError {
    /// The system must contain at least one set.
    #[error("a problem needs at least one system set")]
    EmptySystem,
    /// A system set's dimension differs from the base set's.
    #[error("system set {index} has dimension {got}, base set has dimension {expected}")]
    DimensionMismatch {
        index: usize,
        expected: usize,
        got: usize,
    },
}

/// A base set plus an ordered collection of system sets of equal dimension.
#[derive(Debug, Clone)]
pub struct Problem {
    base: SetOracle,
    system: Vec<SetOracle>,
    n: usize,
}

impl Problem {
    /// Builds a problem; every system set must match the base set's dimension
    /// and the system must be nonempty.
    pub fn new(base: SetOracle, system: Vec<SetOracle>) -> Result<Self, ProblemError> {
        if system.is_empty() {
            return Err(ProblemError::EmptySystem);
        }
        let n = base.dim();
        for (index, set) in system.iter().enumerate() {
            if set.dim() != n {
                return Err(ProblemError::DimensionMismatch {
                    index,
                    expected: n,
                    got: set.dim(),
                });
            }
        }
        Ok(Self { base, system, n })
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of system sets.
    pub fn m(&self) -> usize {
        self.system.len()
    }

    /// The base set `C`.
    pub fn base_set(&self) -> &SetOracle {
        &self.base
    }

    /// The system sets `D₁, …, D_m` in index order.
    pub fn system_sets(&self) -> &[SetOracle] {
        &self.system
    }

    /// Default tolerance below which a distance counts as zero when reading
    /// off the satisfied subsystem: `1e-8 · √n`, which scales with the norm
    /// noise floor of `n`-dimensional arithmetic.
    pub fn default_tau(&self) -> f64 {
        1e-8 * (self.n as f64).sqrt()
    }

    /// One full evaluation pass of `Ψ` at `x`: projects `x` onto every system
    /// set, records squared distances and returns `Σᵢ ψ(d²ᵢ)`.
    ///
    /// # Panics
    /// If `x.len() ≠ n`.
    pub fn evaluate(&self, family: &PenaltyFamily, x: &[f64]) -> Evaluation {
        assert_eq!(x.len(), self.n, "evaluate: dimension mismatch");
        let mut projections = Vec::with_capacity(self.system.len());
        let mut sq_dists = Vec::with_capacity(self.system.len());
        let mut value = 0.0;
        for set in &self.system {
            let p = set.project(x);
            let d2 = sq_dist(x, &p);
            value += family.psi(d2);
            projections.push(p);
            sq_dists.push(d2);
        }
        Evaluation {
            value,
            sq_dists,
            projections,
        }
    }

    /// Subgradient of `Ψ` at `x` together with the evaluation pass that
    /// produced it (both use the same projections).
    ///
    /// # Panics
    /// If `x.len() ≠ n`.
    pub fn subgradient(&self, family: &PenaltyFamily, x: &[f64]) -> (Vec<f64>, Evaluation) {
        let eval = self.evaluate(family, x);
        let g = subgradient_from_evaluation(family, x, &eval);
        (g, eval)
    }

    /// Number of system sets farther than `tau` from `x` (distance, not
    /// squared distance) — the exact count the penalties approximate.
    ///
    /// # Panics
    /// If `x.len() ≠ n` or `tau < 0`.
    pub fn count_violations(&self, x: &[f64], tau: f64) -> usize {
        assert!(tau >= 0.0, "count_violations: negative tolerance");
        assert_eq!(x.len(), self.n, "count_violations: dimension mismatch");
        let tau_sq = tau * tau;
        self.system
            .iter()
            .filter(|set| set.sq_dist(x) > tau_sq)
            .count()
    }

    /// Indices (0-based, ascending) of the system sets within distance `tau`
    /// of `x`: the satisfied subsystem certified by `x`. Complementary to
    /// [`Problem::count_violations`] by construction.
    ///
    /// # Panics
    /// If `x.len() ≠ n` or `tau < 0`.
    pub fn feasible_subsystem(&self, x: &[f64], tau: f64) -> Vec<usize> {
        assert!(tau >= 0.0, "feasible_subsystem: negative tolerance");
        assert_eq!(x.len(), self.n, "feasible_subsystem: dimension mismatch");
        let tau_sq = tau * tau;
        self.system
            .iter()
            .enumerate()
            .filter(|(_, set)| set.sq_dist(x) <= tau_sq)
            .map(|(i, _)| i)
            .collect()
    }
}

/// One evaluation pass of the penalized objective at a fixed point.
#[derive(Debug, Clone, Serialize)]
pub struct Evaluation {
    /// Objective value `Σᵢ ψ(d²ᵢ)`.
    pub value: f64,
    /// Squared distance to each system set, in index order.
    pub sq_dists: Vec<f64>,
    /// The projection onto each system set used for the distances.
    pub projections: Vec<Vec<f64>>,
}

impl Evaluation {
    /// `Σᵢ ψ′₊(d²ᵢ)` for the pass, the constant appearing in descent bounds.
    pub fn psi_prime_sum(&self, family: &PenaltyFamily) -> f64 {
        self.sq_dists.iter().map(|&d2| family.psi_prime(d2)).sum()
    }

    /// `maxᵢ ψ′₊(d²ᵢ)` for the pass, the constant appearing in stepsize bounds.
    pub fn psi_prime_max(&self, family: &PenaltyFamily) -> f64 {
        self.sq_dists
            .iter()
            .map(|&d2| family.psi_prime(d2))
            .fold(0.0, f64::max)
    }
}

/// Assembles the subgradient `2 Σᵢ ψ′₊(d²ᵢ)(x − ξᵢ)` from a recorded
/// evaluation pass at the same `x`.
pub fn subgradient_from_evaluation(
    family: &PenaltyFamily,
    x: &[f64],
    eval: &Evaluation,
) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    for (p, &d2) in eval.projections.iter().zip(&eval.sq_dists) {
        let weight = 2.0 * family.psi_prime(d2);
        for (gj, (xj, pj)) in g.iter_mut().zip(x.iter().zip(p)) {
            *gj += weight * (xj - pj);
        }
    }
    g
}

/// Fraction of system sets containing `x` exactly (boundary counts as inside).
pub fn membership_fraction(problem: &Problem, x: &[f64]) -> f64 {
    let inside = problem
        .system_sets()
        .iter()
        .filter(|set| set.contains(x))
        .count();
    inside as f64 / problem.m() as f64
}

/// Fraction of system sets whose signed slack at `x` is strictly below
/// `delta`; `None` when some set has no slack (see [`SetOracle::slack`]).
///
/// With a small positive `delta` this is the near-membership fraction used to
/// score solutions: it forgives roundoff-size boundary violations that exact
/// membership would reject.
pub fn slack_feasible_fraction(problem: &Problem, x: &[f64], delta: f64) -> Option<f64> {
    let mut inside = 0usize;
    for set in problem.system_sets() {
        if set.slack(x)? < delta {
            inside += 1;
        }
    }
    Some(inside as f64 / problem.m() as f64)
}
