//! Subgradient projection solver with nonmonotone linesearch.
//!
//! [`spg_solve`] minimizes the penalized objective `Ψ` of a [`Problem`] over
//! its base set `C`. Each iteration:
//!
//! 1. picks an initial stepsize `α⁰` — `1` at the first iteration, then a
//!    Barzilai-Borwein quotient safeguarded by a curvature threshold and a
//!    clamp (see [`bb_initial_stepsize`]), or a fixed value when BB is off;
//! 2. forms the trial point `ũ = project(C, x − α·g)` with `g` the objective
//!    subgradient, which solves the proximal model
//!    `min_u ⟨g, u − x⟩ + ‖u − x‖²/(2α)` over `C`;
//! 3. accepts `ũ` iff `Ψ(ũ) ≤ max recent Ψ − (σ/2)‖ũ − x‖²`, where the
//!    reference is the maximum over the last `M+1` iterate values
//!    (nonmonotone watchdog; `M = 0` gives monotone descent), otherwise
//!    shrinks `α ← η·α` and retries.
//!
//! The concavity of the penalties guarantees the linesearch terminates: a
//! trial point always satisfies the sufficient-descent certificate
//! `Ψ(ũ) − Ψ(x) ≤ (−1/β + Σᵢ ψ′₊(d²ᵢ(x))) ‖ũ − x‖²` with `β = α` for convex
//! `C` and `β = 2α` in general, so small enough `α` always passes. The same
//! argument yields a run-wide stepsize floor, `α_t ≥ min{α_min,
//! η/(2m·M₂ + σ)}` with `M₂` the largest penalty derivative seen; the
//! acceptance tests replay both certificates from the recorded traces.
//!
//! The run stops when an accepted step satisfies
//! `‖x⁺ − x‖ ≤ stop_tol · max{1, ‖x⁺‖}`, when `max_iter` steps are accepted
//! ([`SolveStatus::MaxIter`]), or when the linesearch underflows
//! ([`SolveStatus::LinesearchUnderflow`] — numerically impossible for valid
//! penalties, so it signals a modelling bug rather than a bad instance).
//!
//! [`averaged_projection_run`] is the classical mean-of-projections iteration.
//! It coincides — step for step — with `spg_solve` on the same system when the
//! base set is all of ℝⁿ, the penalty is `Linear{m}`, BB is disabled with
//! fixed `α⁰ = 1/2` and `σ ∈ (0, 2]`: the acceptance test then always passes
//! at the first trial and the trial point is exactly the projection mean. The
//! two routes are kept as independent code paths precisely so they can be
//! cross-checked against each other.

use std::collections::VecDeque;

use serde::Serialize;
use thiserror::Error;

use crate::objective::{subgradient_from_evaluation, Evaluation, Problem, ProblemError};
use crate::penalty::PenaltyFamily;
use crate::sets::SetOracle;
use crate::vecops::{dist, norm, sq_dist};

/// Stepsize below which the linesearch reports numerical breakdown.
pub const LINESEARCH_ALPHA_FLOOR: f64 = 1e-16;

/// Solver configuration.
#[derive(Debug, Clone)]
pub struct SpgConfig {
    /// Smallest admissible initial stepsize.
    pub alpha_min: f64,
    /// Largest admissible initial stepsize.
    pub alpha_max: f64,
    /// Backtracking factor in `(0, 1)`.
    pub eta: f64,
    /// Sufficient-decrease coefficient in the acceptance test.
    pub sigma: f64,
    /// Nonmonotone window `M`: acceptance compares against the maximum of the
    /// last `M + 1` objective values. `0` enforces monotone descent.
    pub window: usize,
    /// Maximum number of accepted steps.
    pub max_iter: usize,
    /// Relative step tolerance of the stopping rule.
    pub stop_tol: f64,
    /// Use Barzilai-Borwein initial stepsizes (otherwise `fixed_alpha0`).
    pub bb_enabled: bool,
    /// Initial stepsize used at every iteration when BB is disabled.
    pub fixed_alpha0: f64,
    /// Lower clamp of the BB quotient.
    pub bb_floor: f64,
    /// Upper clamp of the BB quotient.
    pub bb_cap: f64,
    /// Curvature `⟨Δx, Δg⟩` at or below this threshold falls back to doubling
    /// the previous initial stepsize.
    pub bb_curvature_threshold: f64,
    /// Record every iterate in [`SolveReport::x_trace`] (memory-heavy; meant
    /// for diagnostics and tests).
    pub record_iterates: bool,
}

impl Default for SpgConfig {
    fn default() -> Self {
        Self {
            alpha_min: 1e-10,
            alpha_max: 1e10,
            eta: 0.5,
            sigma: 1e-4,
            window: 9,
            max_iter: 50_000,
            stop_tol: 1e-5,
            bb_enabled: true,
            fixed_alpha0: 1.0,
            bb_floor: 1e-10,
            bb_cap: 1e10,
            bb_curvature_threshold: 1e-12,
            record_iterates: false,
        }
    }
}

impl SpgConfig {
    /// Checks parameter ranges.
    pub fn validate(&self) -> Result<(), SpgError> {
        fn bad(msg: impl Into<String>) -> Result<(), SpgError> {
            Err(SpgError::InvalidConfig(msg.into()))
        }
        if !(self.alpha_min > 0.0) || !(self.alpha_max >= self.alpha_min) {
            return bad(format!(
                "stepsize range [{}, {}] must satisfy 0 < alpha_min <= alpha_max",
                self.alpha_min, self.alpha_max
            ));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return bad(format!("eta must lie in (0, 1), got {}", self.eta));
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.stop_tol > 0.0) {
            return bad(format!("stop_tol must be positive, got {}", self.stop_tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        if self.bb_enabled {
            if !(self.bb_floor > 0.0) || !(self.bb_cap >= self.bb_floor) {
                return bad("BB clamp must satisfy 0 < bb_floor <= bb_cap");
            }
            if !(self.bb_curvature_threshold > 0.0) {
                return bad("BB curvature threshold must be positive");
            }
        } else if !(self.fixed_alpha0 > 0.0) {
            return bad(format!(
                "fixed_alpha0 must be positive, got {}",
                self.fixed_alpha0
            ));
        }
        Ok(())
    }
}

/// Solver errors.
#[derive(Debug, Error)]
pub enum SpgError {
    /// A configuration parameter is out of range.
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    /// The start point is not a member of the base set.
    #[error("start point lies outside the base set (squared distance {sq_dist:e}); project it first")]
    StartOutsideBaseSet {
        /// Squared distance from the start point to the base set.
        sq_dist: f64,
    },
    /// The backtracking stepsize fell below [`LINESEARCH_ALPHA_FLOOR`].
    #[error("linesearch underflow: alpha = {alpha:e} after {backtracks} backtracks")]
    LinesearchUnderflow {
        /// Stepsize at which the search gave up.
        alpha: f64,
        /// Number of backtracks performed.
        backtracks: usize,
    },
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    /// The relative step tolerance was met.
    Converged,
    /// `max_iter` steps were accepted without meeting the tolerance.
    MaxIter,
    /// The linesearch underflowed; the report holds the last accepted iterate.
    LinesearchUnderflow,
}

/// Full record of one solver run.
///
/// Traces indexed by iterate (`psi_trace`, `psi_prime_sum_trace`,
/// `psi_prime_max_trace`) have `iterations + 1` entries covering
/// `x⁰, …, x^iterations`; traces indexed by accepted step (`step_norms`,
/// `alpha_trace`, `backtrack_counts`) have `iterations` entries.
#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    /// Last accepted iterate.
    pub x_final: Vec<f64>,
    /// Number of accepted steps.
    pub iterations: usize,
    /// Why the run ended.
    pub status: SolveStatus,
    /// Objective value at every iterate.
    pub psi_trace: Vec<f64>,
    /// `‖x^{t+1} − x^t‖` for every accepted step.
    pub step_norms: Vec<f64>,
    /// Accepted stepsize of every step.
    pub alpha_trace: Vec<f64>,
    /// Backtracks needed by every step.
    pub backtrack_counts: Vec<usize>,
    /// `Σᵢ ψ′₊(d²ᵢ)` at every iterate.
    pub psi_prime_sum_trace: Vec<f64>,
    /// `maxᵢ ψ′₊(d²ᵢ)` at every iterate.
    pub psi_prime_max_trace: Vec<f64>,
    /// `‖x − project(C, x − g(x))‖` at the final iterate (unit probe step).
    pub stationarity_residual: f64,
    /// Every iterate, populated only when [`SpgConfig::record_iterates`] is set.
    #[serde(skip)]
    pub x_trace: Vec<Vec<f64>>,
}

/// Accepted outcome of one linesearch.
#[derive(Debug, Clone)]
pub struct LinesearchOutcome {
    /// Accepted trial point.
    pub point: Vec<f64>,
    /// Accepted stepsize.
    pub alpha: f64,
    /// Number of rejected trials before acceptance.
    pub backtracks: usize,
    /// Objective pass at the accepted point (reusable for the next subgradient).
    pub evaluation: Evaluation,
    /// `‖point − x‖`, as used inside the acceptance test.
    pub step_norm: f64,
}

/// The projected-subgradient trial point `project(C, x − α·g)` — the solution
/// of the proximal model `min_{u ∈ C} ⟨g, u − x⟩ + ‖u − x‖²/(2α)`.
pub fn trial_point(problem: &Problem, x: &[f64], g: &[f64], alpha: f64) -> Vec<f64> {
    debug_assert_eq!(x.len(), g.len());
    let shifted: Vec<f64> = x.iter().zip(g).map(|(xj, gj)| xj - alpha * gj).collect();
    problem.base_set().project(&shifted)
}

/// Reference value of the nonmonotone acceptance test: the maximum of the
/// recorded recent objective values.
///
/// # Panics
/// If `history` is empty.
pub fn nonmonotone_reference(history: &[f64]) -> f64 {
    assert!(!history.is_empty(), "nonmonotone_reference: empty history");
    history.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Backtracking linesearch: starting from `alpha0`, shrink by `eta` until the
/// trial point satisfies `Ψ(ũ) − psi_ref ≤ −(σ/2)‖ũ − x‖²`.
///
/// `psi_ref` must be the nonmonotone reference at `x` (at least `Ψ(x)`).
/// Returns [`SpgError::LinesearchUnderflow`] if `alpha` falls below
/// [`LINESEARCH_ALPHA_FLOOR`], which cannot happen for valid penalty families
/// and signals an inconsistent objective.
pub fn linesearch(
    problem: &Problem,
    family: &PenaltyFamily,
    x: &[f64],
    g: &[f64],
    psi_ref: f64,
    alpha0: f64,
    config: &SpgConfig,
) -> Result<LinesearchOutcome, SpgError> {
    let mut alpha = alpha0;
    let mut backtracks = 0usize;
    loop {
        let point = trial_point(problem, x, g, alpha);
        let evaluation = problem.evaluate(family, &point);
        let step_norm = dist(&point, x);
        if evaluation.value - psi_ref <= -0.5 * config.sigma * (step_norm * step_norm) {
            return Ok(LinesearchOutcome {
                point,
                alpha,
                backtracks,
                evaluation,
                step_norm,
            });
        }
        alpha *= config.eta;
        backtracks += 1;
        if alpha < LINESEARCH_ALPHA_FLOOR {
            return Err(SpgError::LinesearchUnderflow { alpha, backtracks });
        }
    }
}

/// Initial stepsize of iteration `t`.
///
/// Returns `1` at `t = 0`. For `t ≥ 1` it is the Barzilai-Borwein quotient
/// `‖Δx‖² / ⟨Δx, Δg⟩` when the curvature `⟨Δx, Δg⟩` exceeds the configured
/// threshold, and twice the previous initial stepsize otherwise; either value
/// is clamped to `[bb_floor, bb_cap]`.
pub fn bb_initial_stepsize(
    x_t: &[f64],
    x_prev: &[f64],
    g_t: &[f64],
    g_prev: &[f64],
    t: usize,
    alpha0_prev: f64,
    config: &SpgConfig,
) -> f64 {
    if t == 0 {
        return 1.0;
    }
    let mut curvature = 0.0;
    let mut step_sq = 0.0;
    for ((xt, xp), (gt, gp)) in x_t.iter().zip(x_prev).zip(g_t.iter().zip(g_prev)) {
        let dx = xt - xp;
        curvature += dx * (gt - gp);
        step_sq += dx * dx;
    }
    let raw = if curvature > config.bb_curvature_threshold {
        step_sq / curvature
    } else {
        2.0 * alpha0_prev
    };
    raw.clamp(config.bb_floor, config.bb_cap)
}

/// `‖x − project(C, x − g(x))‖`: the natural-map residual at unit probe
/// stepsize. Zero exactly at points satisfying the projected-stationarity
/// condition.
pub fn stationarity_residual(problem: &Problem, family: &PenaltyFamily, x: &[f64]) -> f64 {
    let (g, _) = problem.subgradient(family, x);
    let probe = trial_point(problem, x, &g, 1.0);
    dist(x, &probe)
}

/// Runs the solver from `x0`, which must already be a member of the base set
/// (project it first if needed; the solver refuses to move the start itself so
/// warm starts stay bitwise intact).
pub fn spg_solve(
    problem: &Problem,
    family: &PenaltyFamily,
    x0: &[f64],
    config: &SpgConfig,
) -> Result<SolveReport, SpgError> {
    config.validate()?;
    assert_eq!(x0.len(), problem.n(), "spg_solve: dimension mismatch");

    let base_projection = problem.base_set().project(x0);
    let start_gap = sq_dist(x0, &base_projection);
    let start_tol = 1e-12 * (1.0 + norm(x0));
    if start_gap > start_tol * start_tol {
        return Err(SpgError::StartOutsideBaseSet { sq_dist: start_gap });
    }

    let mut x = x0.to_vec();
    let mut eval = problem.evaluate(family, &x);
    let mut g = subgradient_from_evaluation(family, &x, &eval);

    let mut history: VecDeque<f64> = VecDeque::with_capacity(config.window + 1);
    history.push_back(eval.value);

    let mut psi_trace = vec![eval.value];
    let mut psi_prime_sum_trace = vec![eval.psi_prime_sum(family)];
    let mut psi_prime_max_trace = vec![eval.psi_prime_max(family)];
    let mut step_norms = Vec::new();
    let mut alpha_trace = Vec::new();
    let mut backtrack_counts = Vec::new();
    let mut x_trace = Vec::new();
    if config.record_iterates {
        x_trace.push(x.clone());
    }

    let mut x_prev: Vec<f64> = Vec::new();
    let mut g_prev: Vec<f64> = Vec::new();
    let mut alpha0_prev = 0.0;
    let mut iterations = 0usize;
    let mut status = SolveStatus::MaxIter;

    for t in 0..config.max_iter {
        let alpha0 = if config.bb_enabled {
            bb_initial_stepsize(&x, &x_prev, &g, &g_prev, t, alpha0_prev, config)
                .clamp(config.alpha_min, config.alpha_max)
        } else {
            config.fixed_alpha0.clamp(config.alpha_min, config.alpha_max)
        };
        let psi_ref = nonmonotone_reference(history.make_contiguous());

        let outcome = match linesearch(problem, family, &x, &g, psi_ref, alpha0, config) {
            Ok(outcome) => outcome,
            Err(SpgError::LinesearchUnderflow { .. }) => {
                status = SolveStatus::LinesearchUnderflow;
                break;
            }
            Err(other) => return Err(other),
        };

        alpha_trace.push(outcome.alpha);
        step_norms.push(outcome.step_norm);
        backtrack_counts.push(outcome.backtracks);
        psi_trace.push(outcome.evaluation.value);
        psi_prime_sum_trace.push(outcome.evaluation.psi_prime_sum(family));
        psi_prime_max_trace.push(outcome.evaluation.psi_prime_max(family));

        history.push_back(outcome.evaluation.value);
        while history.len() > config.window + 1 {
            history.pop_front();
        }

        x_prev = std::mem::replace(&mut x, outcome.point);
        g_prev = std::mem::replace(
            &mut g,
            subgradient_from_evaluation(family, &x, &outcome.evaluation),
        );
        eval = outcome.evaluation;
        alpha0_prev = alpha0;
        iterations = t + 1;
        if config.record_iterates {
            x_trace.push(x.clone());
        }

        if outcome.step_norm <= config.stop_tol * f64::max(1.0, norm(&x)) {
            status = SolveStatus::Converged;
            break;
        }
    }
    let _ = eval;

    let stationarity = stationarity_residual(problem, family, &x);
    Ok(SolveReport {
        x_final: x,
        iterations,
        status,
        psi_trace,
        step_norms,
        alpha_trace,
        backtrack_counts,
        psi_prime_sum_trace,
        psi_prime_max_trace,
        stationarity_residual: stationarity,
        x_trace,
    })
}

/// The averaged-projection iteration `x⁺ = (1/m) Σᵢ project(Dᵢ, x)`, run until
/// the relative step tolerance or `max_iter`.
///
/// Reports through the same [`SolveReport`] shape as [`spg_solve`], evaluating
/// the linear penalty `Ψ(x) = (1/m) Σᵢ d²ᵢ(x)`; `alpha_trace` holds the
/// equivalent fixed stepsize `1/2` and iterates are always recorded. Step for
/// step this reproduces `spg_solve` with base set ℝⁿ, the linear penalty,
/// fixed `α⁰ = 1/2` and any `σ ∈ (0, 2]` — the pair of routes is the
/// cross-check used by the equivalence tests.
pub fn averaged_projection_run(
    sets: &[SetOracle],
    x0: &[f64],
    max_iter: usize,
    stop_tol: f64,
) -> Result<SolveReport, ProblemError> {
    let n = x0.len();
    let m = sets.len();
    let problem = Problem::new(
        crate::sets::FullSpace::new(n)
            .expect("x0 must be nonempty")
            .into(),
        sets.to_vec(),
    )?;
    let family = PenaltyFamily::linear(m).expect("system is nonempty");

    let mut x = x0.to_vec();
    let mut eval = problem.evaluate(&family, &x);
    let mut psi_trace = vec![eval.value];
    let mut psi_prime_sum_trace = vec![eval.psi_prime_sum(&family)];
    let mut psi_prime_max_trace = vec![eval.psi_prime_max(&family)];
    let mut step_norms = Vec::new();
    let mut alpha_trace = Vec::new();
    let mut backtrack_counts = Vec::new();
    let mut x_trace = vec![x.clone()];
    let mut iterations = 0usize;
    let mut status = SolveStatus::MaxIter;

    for t in 0..max_iter {
        let mut next = vec![0.0; n];
        for p in &eval.projections {
            for (nj, pj) in next.iter_mut().zip(p) {
                *nj += pj;
            }
        }
        for nj in &mut next {
            *nj /= m as f64;
        }
        let step_norm = dist(&next, &x);

        x = next;
        eval = problem.evaluate(&family, &x);
        psi_trace.push(eval.value);
        psi_prime_sum_trace.push(eval.psi_prime_sum(&family));
        psi_prime_max_trace.push(eval.psi_prime_max(&family));
        step_norms.push(step_norm);
        alpha_trace.push(0.5);
        backtrack_counts.push(0);
        x_trace.push(x.clone());
        iterations = t + 1;

        if step_norm <= stop_tol * f64::max(1.0, norm(&x)) {
            status = SolveStatus::Converged;
            break;
        }
    }

    let stationarity = stationarity_residual(&problem, &family, &x);
    Ok(SolveReport {
        x_final: x,
        iterations,
        status,
        psi_trace,
        step_norms,
        alpha_trace,
        backtrack_counts,
        psi_prime_sum_trace,
        psi_prime_max_trace,
        stationarity_residual: stationarity,
        x_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;
    use crate::sets::{FinitePointSet, FullSpace, Halfspace, SparseBox, UnionSet};

    fn halfspace(a: &[f64], b: f64) -> SetOracle {
        Halfspace::new(a.to_vec(), b).unwrap().into()
    }

    fn full_space_problem(system: Vec<SetOracle>) -> Problem {
        let n = system[0].dim();
        Problem::new(FullSpace::new(n).unwrap().into(), system).unwrap()
    }

    fn random_halfspaces(rng: &mut SplitMix64, m: usize, n: usize) -> Vec<SetOracle> {
        (0..m)
            .map(|_| {
                let a: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
                halfspace(&a, rng.next_gaussian())
            })
            .collect()
    }

    #[test]
    fn trial_point_projects_the_gradient_step() {
        // Base set keeps one coordinate of largest magnitude within [−1, 1].
        let problem = Problem::new(
            SparseBox::new(2, 1.0, 1).unwrap().into(),
            vec![halfspace(&[1.0, 0.0], 0.0)],
        )
        .unwrap();
        let u = trial_point(&problem, &[1.0, 0.0], &[0.5, -2.0], 1.0);
        // x − αg = (0.5, 2); keep coordinate 1, clamp to 1.
        assert_eq!(u, vec![0.0, 1.0]);
    }

    #[test]
    fn nonmonotone_reference_is_the_window_maximum() {
        assert_eq!(nonmonotone_reference(&[1.0, 3.0, 2.0]), 3.0);
        assert_eq!(nonmonotone_reference(&[5.0]), 5.0);
    }

    #[test]
    #[should_panic(expected = "empty history")]
    fn nonmonotone_reference_rejects_empty_history() {
        nonmonotone_reference(&[]);
    }

    #[test]
    fn linesearch_accepts_a_clear_descent_step() {
        let problem = full_space_problem(vec![halfspace(&[1.0, 0.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        let config = SpgConfig::default();
        let x = [1.0, 0.0];
        let (g, eval) = problem.subgradient(&family, &x);
        assert_eq!(g, vec![2.0, 0.0]);
        let out = linesearch(&problem, &family, &x, &g, eval.value, 0.25, &config).unwrap();
        // ũ = (0.5, 0): Ψ drops 1 → 0.25, far below the required σ/2·0.25.
        assert_eq!(out.point, vec![0.5, 0.0]);
        assert_eq!(out.alpha, 0.25);
        assert_eq!(out.backtracks, 0);
        assert_eq!(out.evaluation.value, 0.25);
    }

    #[test]
    fn linesearch_backtracks_exactly_once_when_first_trial_fails() {
        // Same instance; with α₀ = 100 the trial lands at (−199, 0) where
        // Ψ = 0 but (σ/2)‖ũ−x‖² = 5e−5·200² = 2 > 1, so the first trial fails
        // and α = 50 (step 100, required 0.5) passes.
        let problem = full_space_problem(vec![halfspace(&[1.0, 0.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        let config = SpgConfig::default();
        let x = [1.0, 0.0];
        let (g, eval) = problem.subgradient(&family, &x);
        let out = linesearch(&problem, &family, &x, &g, eval.value, 100.0, &config).unwrap();
        assert_eq!(out.backtracks, 1);
        assert_eq!(out.alpha, 50.0);
        assert_eq!(out.point, vec![-99.0, 0.0]);
    }

    #[test]
    fn linesearch_underflow_is_reported() {
        // A fake reference far below every reachable value forces rejection
        // until the stepsize floor trips.
        let problem = full_space_problem(vec![halfspace(&[1.0, 0.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        let config = SpgConfig::default();
        let x = [1.0, 0.0];
        let (g, _) = problem.subgradient(&family, &x);
        let err = linesearch(&problem, &family, &x, &g, -10.0, 1.0, &config).unwrap_err();
        assert!(matches!(err, SpgError::LinesearchUnderflow { .. }));
    }

    #[test]
    fn bb_stepsize_matches_frozen_values() {
        let config = SpgConfig::default();
        assert_eq!(
            bb_initial_stepsize(&[0.0], &[], &[0.0], &[], 0, 0.0, &config),
            1.0
        );
        // Δx = (1, 0), Δg = (2, 0): ‖Δx‖²/⟨Δx, Δg⟩ = 1/2.
        assert_eq!(
            bb_initial_stepsize(&[1.0, 0.0], &[0.0, 0.0], &[2.0, 0.0], &[0.0, 0.0], 1, 1.0, &config),
            0.5
        );
        // Zero curvature falls back to doubling the previous initial stepsize.
        assert_eq!(
            bb_initial_stepsize(&[1.0, 0.0], &[0.0, 0.0], &[1.0, 1.0], &[1.0, 1.0], 2, 3.0, &config),
            6.0
        );
        // Quotient 1e12 is clamped to the cap.
        assert_eq!(
            bb_initial_stepsize(
                &[1e6, 0.0],
                &[0.0, 0.0],
                &[1e-6, 0.0],
                &[0.0, 0.0],
                1,
                1.0,
                &config
            ),
            1e10
        );
    }

    #[test]
    fn solver_converges_on_a_single_halfspace() {
        let problem = full_space_problem(vec![halfspace(&[1.0, 0.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        let config = SpgConfig {
            stop_tol: 1e-9,
            ..SpgConfig::default()
        };
        let report = spg_solve(&problem, &family, &[1.0, 0.0], &config).unwrap();
        assert_eq!(report.status, SolveStatus::Converged);
        assert!(report.x_final[0] <= 1e-9, "x1 = {}", report.x_final[0]);
        assert!(report.psi_trace.last().unwrap() <= &1e-15);
        assert!(report.psi_trace[0] >= *report.psi_trace.last().unwrap());
    }

    #[test]
    fn solver_rejects_start_outside_base_set() {
        let problem = Problem::new(
            SparseBox::new(3, 1.0, 1).unwrap().into(),
            vec![halfspace(&[1.0, 0.0, 0.0], 0.0)],
        )
        .unwrap();
        let family = PenaltyFamily::linear(1).unwrap();
        let err = spg_solve(&problem, &family, &[1.0, 1.0, 0.0], &SpgConfig::default());
        assert!(matches!(err, Err(SpgError::StartOutsideBaseSet { .. })));
    }

    #[test]
    fn solver_rejects_invalid_config() {
        let problem = full_space_problem(vec![halfspace(&[1.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        let config = SpgConfig {
            eta: 1.5,
            ..SpgConfig::default()
        };
        assert!(matches!(
            spg_solve(&problem, &family, &[0.0], &config),
            Err(SpgError::InvalidConfig(_))
        ));
    }

    #[test]
    fn stationarity_residual_matches_frozen_value() {
        let problem = full_space_problem(vec![halfspace(&[1.0, 0.0], 0.0)]);
        let family = PenaltyFamily::linear(1).unwrap();
        // g(1,0) = (2,0); probe x − g = (−1,0); residual ‖(1,0)−(−1,0)‖ = 2.
        assert_eq!(stationarity_residual(&problem, &family, &[1.0, 0.0]), 2.0);
    }

    #[test]
    fn stationarity_residual_is_small_after_convergence_on_feasible_instances() {
        let mut rng = SplitMix64::new(2718);
        for _ in 0..10 {
            let n = 6;
            // Halfspaces all containing the origin with slack: feasible system.
            let system: Vec<SetOracle> = (0..15)
                .map(|_| {
                    let a: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
                    let b = 0.1 + rng.next_uniform();
                    halfspace(&a, b)
                })
                .collect();
            let problem = full_space_problem(system);
            let family = PenaltyFamily::log_eps(0.5).unwrap();
            let config = SpgConfig {
                stop_tol: 1e-8,
                ..SpgConfig::default()
            };
            let x0: Vec<f64> = (0..n).map(|_| 3.0 * rng.next_gaussian()).collect();
            let report = spg_solve(&problem, &family, &x0, &config).unwrap();
            assert_eq!(report.status, SolveStatus::Converged);
            assert!(
                report.stationarity_residual <= 10.0 * config.stop_tol,
                "residual {} too large",
                report.stationarity_residual
            );
        }
    }

    #[test]
    fn monotone_runs_decrease_psi_every_step() {
        let mut rng = SplitMix64::new(41);
        let problem = full_space_problem(random_halfspaces(&mut rng, 12, 5));
        let family = PenaltyFamily::log_eps(0.3).unwrap();
        let config = SpgConfig {
            window: 0,
            max_iter: 300,
            stop_tol: 1e-9,
            ..SpgConfig::default()
        };
        let x0: Vec<f64> = (0..5).map(|_| rng.next_gaussian()).collect();
        let report = spg_solve(&problem, &family, &x0, &config).unwrap();
        for t in 0..report.iterations {
            let drop = report.psi_trace[t] - report.psi_trace[t + 1];
            let required = 0.5 * config.sigma * report.step_norms[t] * report.step_norms[t];
            assert!(
                drop + 1e-12 * (1.0 + report.psi_trace[t]) >= required,
                "step {t}: drop {drop} below required {required}"
            );
        }
    }

    #[test]
    fn nonmonotone_runs_respect_the_window_reference() {
        let mut rng = SplitMix64::new(43);
        let problem = full_space_problem(random_halfspaces(&mut rng, 15, 6));
        let family = PenaltyFamily::frac_eps(0.2).unwrap();
        let config = SpgConfig {
            window: 9,
            max_iter: 300,
            stop_tol: 1e-9,
            ..SpgConfig::default()
        };
        let x0: Vec<f64> = (0..6).map(|_| rng.next_gaussian()).collect();
        let report = spg_solve(&problem, &family, &x0, &config).unwrap();
        for t in 0..report.iterations {
            let window_start = t.saturating_sub(config.window);
            let reference = nonmonotone_reference(&report.psi_trace[window_start..=t]);
            let required = 0.5 * config.sigma * report.step_norms[t] * report.step_norms[t];
            assert!(
                report.psi_trace[t + 1] - reference
                    <= -required + 1e-12 * (1.0 + reference.abs()),
                "step {t} violates the nonmonotone acceptance bound"
            );
        }
    }

    #[test]
    fn iterates_stay_bounded_and_finite_with_a_bounded_system_set() {
        let mut rng = SplitMix64::new(97);
        for _ in 0..5 {
            let n = 4;
            let mut system = random_halfspaces(&mut rng, 6, n);
            let points: Vec<Vec<f64>> = (0..3)
                .map(|_| (0..n).map(|_| rng.next_gaussian()).collect())
                .collect();
            system.push(FinitePointSet::new(points).unwrap().into());
            let problem = full_space_problem(system);
            let family = PenaltyFamily::log_eps(0.5).unwrap();
            let config = SpgConfig {
                max_iter: 200,
                record_iterates: true,
                ..SpgConfig::default()
            };
            let x0: Vec<f64> = (0..n).map(|_| 2.0 * rng.next_gaussian()).collect();
            let report = spg_solve(&problem, &family, &x0, &config).unwrap();
            let max_norm = report.x_trace.iter().map(|x| norm(x)).fold(0.0, f64::max);
            assert!(max_norm.is_finite());
            assert!(
                report.x_trace.iter().flatten().all(|v| v.is_finite()),
                "non-finite iterate produced"
            );
        }
    }

    #[test]
    fn averaged_projection_matches_frozen_examples() {
        let sets = vec![halfspace(&[1.0, 0.0], 0.0), halfspace(&[0.0, 1.0], 0.0)];
        let report = averaged_projection_run(&sets, &[2.0, 2.0], 1, 1e-12).unwrap();
        assert_eq!(report.x_final, vec![1.0, 1.0]);

        let sets: Vec<SetOracle> = vec![
            FinitePointSet::new(vec![vec![0.0, 0.0]]).unwrap().into(),
            FinitePointSet::new(vec![vec![2.0, 0.0]]).unwrap().into(),
        ];
        let report = averaged_projection_run(&sets, &[5.0, 5.0], 1, 1e-12).unwrap();
        assert_eq!(report.x_final, vec![1.0, 0.0]);
    }

    #[test]
    fn averaged_projection_equals_spg_route_on_nonconvex_sets() {
        let mut rng = SplitMix64::new(1234);
        for _ in 0..10 {
            let n = 4;
            let m = 5;
            let sets: Vec<SetOracle> = (0..m)
                .map(|i| -> SetOracle {
                    if i % 2 == 0 {
                        let points: Vec<Vec<f64>> = (0..3)
                            .map(|_| (0..n).map(|_| rng.next_gaussian()).collect())
                            .collect();
                        FinitePointSet::new(points).unwrap().into()
                    } else {
                        let a: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
                        let p: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
                        UnionSet::new(vec![
                            halfspace(&a, rng.next_gaussian()),
                            halfspace(&p, rng.next_gaussian()),
                        ])
                        .unwrap()
                        .into()
                    }
                })
                .collect();
            let x0: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();

            let direct = averaged_projection_run(&sets, &x0, 50, 1e-300).unwrap();

            let problem = full_space_problem(sets.clone());
            let family = PenaltyFamily::linear(m).unwrap();
            let config = SpgConfig {
                bb_enabled: false,
                fixed_alpha0: 0.5,
                sigma: 1.0,
                max_iter: 50,
                stop_tol: 1e-300,
                record_iterates: true,
                ..SpgConfig::default()
            };
            let spg = spg_solve(&problem, &family, &x0, &config).unwrap();

            assert!(spg.alpha_trace.iter().all(|&a| a == 0.5));
            assert!(spg.backtrack_counts.iter().all(|&b| b == 0));
            let compared = direct.x_trace.len().min(spg.x_trace.len());
            assert!(compared >= 2);
            for t in 0..compared {
                for j in 0..n {
                    assert!(
                        (direct.x_trace[t][j] - spg.x_trace[t][j]).abs() <= 1e-12,
                        "iterate {t}, coordinate {j} differs"
                    );
                }
            }
        }
    }

    #[test]
    fn stepsizes_respect_the_theoretical_floor() {
        let mut rng = SplitMix64::new(314);
        for _ in 0..10 {
            let n = 5;
            let m = 12;
            let problem = full_space_problem(random_halfspaces(&mut rng, m, n));
            let family = PenaltyFamily::log_eps(0.09).unwrap();
            let config = SpgConfig {
                max_iter: 200,
                stop_tol: 1e-10,
                ..SpgConfig::default()
            };
            let x0: Vec<f64> = (0..n).map(|_| rng.next_gaussian()).collect();
            let report = spg_solve(&problem, &family, &x0, &config).unwrap();
            let m2 = report
                .psi_prime_max_trace
                .iter()
                .copied()
                .fold(0.0, f64::max);
            let floor = f64::min(
                config.alpha_min,
                config.eta / (2.0 * m as f64 * m2 + config.sigma),
            );
            for (t, &alpha) in report.alpha_trace.iter().enumerate() {
                assert!(alpha >= floor, "step {t}: alpha {alpha} below floor {floor}");
            }
        }
    }
}
