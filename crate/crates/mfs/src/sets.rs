//! Closed-set oracles: deterministic Euclidean projections and squared distances.
//!
//! Every set kind used by the solver implements the same three queries through
//! the [`SetOracle`] enum:
//!
//! - [`SetOracle::project`] returns *one* nearest point, with all ties broken
//!   deterministically (documented per kind below), so repeated evaluation at
//!   the same input is bitwise reproducible;
//! - [`SetOracle::sq_dist`] is literally `‖x − project(x)‖²`, so the two
//!   queries can never disagree;
//! - [`SetOracle::brute_force_project`] recomputes the projection by exhaustive
//!   enumeration where that is possible, as an independent cross-check for the
//!   closed-form rules.
//!
//! Supported kinds:
//! - [`Halfspace`] `{x : ⟨a, x⟩ ≤ b}` — closed convex; projection along `a`.
//! - [`SparseBox`] `{x ∈ [−r, r]ⁿ : ‖x‖₀ ≤ s}` — nonconvex; projection keeps
//!   the `s` coordinates of largest magnitude (ties to the lowest index),
//!   zeroes the rest and clamps the kept entries to `[−r, r]`. Clamping cost
//!   is monotone in `|xᵢ|`, so this greedy rule is an exact projection.
//! - [`UnionSet`] — finite union of member sets; projection picks the member
//!   of smallest squared distance, ties to the lowest member index.
//! - [`FullSpace`] — the whole of ℝⁿ (identity projection).
//! - [`FinitePointSet`] — nearest listed point, ties to the lowest index.

use thiserror::Error;

use crate::vecops::{dot, sq_dist};

/// Construction and brute-force errors for set oracles.
#[derive(Debug, Error)]
pub enum SetError {
    /// Halfspace normal with zero (or non-finite) Euclidean norm.
    #[error("halfspace normal must have positive finite norm")]
    ZeroNormal,
    /// Non-positive or non-finite box radius.
    #[error("box radius must be positive and finite, got {0}")]
    BadRadius(f64),
    /// Sparsity level outside `1..=n`.
    #[error("sparsity level {s} must satisfy 1 <= s <= n = {n}")]
    BadSparsity { s: usize, n: usize },
    /// Ambient dimension must be at least one.
    #[error("ambient dimension must be at least 1")]
    ZeroDimension,
    /// A union must have at least one member.
    #[error("union must have at least one member")]
    EmptyUnion,
    /// A finite point set must contain at least one point.
    #[error("point set must contain at least one point")]
    EmptyPointSet,
    /// Members / points with inconsistent dimensions.
    #[error("inconsistent dimensions: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// Brute-force enumeration is not defined for this kind.
    #[error("brute-force projection is not supported for {0}")]
    BruteForceUnsupported(&'static str),
    /// Support enumeration would be too large.
    #[error("brute-force support enumeration needs n <= {max}, got n = {n}")]
    BruteForceTooLarge { n: usize, max: usize },
}

/// Largest ambient dimension for which sparse-support enumeration is allowed.
pub const BRUTE_FORCE_MAX_DIM: usize = 12;

/// Closed halfspace `{x : ⟨a, x⟩ ≤ b}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    a: Vec<f64>,
    b: f64,
    sq_norm_a: f64,
}

impl Halfspace {
    /// Builds the halfspace; the normal must have positive finite norm.
    pub fn new(a: Vec<f64>, b: f64) -> Result<Self, SetError> {
        if a.is_empty() {
            return Err(SetError::ZeroDimension);
        }
        let sq_norm_a = crate::vecops::sq_norm(&a);
        if !(sq_norm_a > 0.0) || !sq_norm_a.is_finite() || !b.is_finite() {
            return Err(SetError::ZeroNormal);
        }
        Ok(Self { a, b, sq_norm_a })
    }

    /// Outward normal `a`.
    pub fn normal(&self) -> &[f64] {
        &self.a
    }

    /// Offset `b`.
    pub fn offset(&self) -> f64 {
        self.b
    }

    /// Signed residual `⟨a, x⟩ − b` (non-positive inside).
    pub fn slack(&self, x: &[f64]) -> f64 {
        dot(&self.a, x) - self.b
    }

    /// Projection; guaranteed to satisfy `⟨a, p⟩ ≤ b` exactly, so projecting
    /// twice returns the same point bitwise.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let violation = dot(&self.a, x) - self.b;
        if violation <= 0.0 {
            return x.to_vec();
        }
        let mut t = violation / self.sq_norm_a;
        // Rounding can leave the computed point an ulp outside; nudge the step
        // until the result is a member, which makes membership and idempotence
        // exact. One or two nudges suffice in practice; the counter only caps
        // a theoretical infinite loop.
        for _ in 0..256 {
            let p: Vec<f64> = x.iter().zip(&self.a).map(|(xi, ai)| xi - t * ai).collect();
            if dot(&self.a, &p) <= self.b {
                return p;
            }
            t = t.next_up();
        }
        x.iter().zip(&self.a).map(|(xi, ai)| xi - t * ai).collect()
    }
}

/// Sparse box `{x ∈ [−r, r]ⁿ : ‖x‖₀ ≤ s}`: at most `s` nonzero coordinates,
/// each bounded by `r` in magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBox {
    n: usize,
    r: f64,
    s: usize,
}

impl SparseBox {
    /// Builds the set; requires `n ≥ 1`, `r > 0` finite and `1 ≤ s ≤ n`.
    pub fn new(n: usize, r: f64, s: usize) -> Result<Self, SetError> {
        if n == 0 {
            return Err(SetError::ZeroDimension);
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(SetError::BadRadius(r));
        }
        if s == 0 || s > n {
            return Err(SetError::BadSparsity { s, n });
        }
        Ok(Self { n, r, s })
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Box radius.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Maximum number of nonzero coordinates.
    pub fn s(&self) -> usize {
        self.s
    }

    /// Indices ordered by decreasing `|xᵢ|`, ties to the lowest index.
    fn magnitude_order(&self, x: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.n).collect();
        idx.sort_unstable_by(|&i, &j| x[j].abs().total_cmp(&x[i].abs()).then(i.cmp(&j)));
        idx
    }

    fn project(&self, x: &[f64]) -> Vec<f64> {
        let order = self.magnitude_order(x);
        let mut p = vec![0.0; self.n];
        for &i in order.iter().take(self.s) {
            p[i] = x[i].clamp(-self.r, self.r);
        }
        p
    }
}

/// Finite union of member sets (members may be of any kind, including nested
/// unions).
#[derive(Debug, Clone, PartialEq)]
pub struct UnionSet {
    members: Vec<SetOracle>,
}

impl UnionSet {
    /// Builds the union; members must be nonempty and share one dimension.
    pub fn new(members: Vec<SetOracle>) -> Result<Self, SetError> {
        let first = members.first().ok_or(SetError::EmptyUnion)?;
        let n = first.dim();
        for m in &members {
            if m.dim() != n {
                return Err(SetError::DimensionMismatch {
                    expected: n,
                    got: m.dim(),
                });
            }
        }
        Ok(Self { members })
    }

    /// Member sets in tie-break order.
    pub fn members(&self) -> &[SetOracle] {
        &self.members
    }

    /// Projection onto the nearest member; ties go to the lowest member index
    /// (strict improvement keeps the first minimizer encountered).
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut best: Option<(f64, Vec<f64>)> = None;
        for member in &self.members {
            let p = member.project(x);
            let d = sq_dist(x, &p);
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, p));
            }
        }
        best.expect("union has at least one member").1
    }
}

/// All of ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct FullSpace {
    n: usize,
}

impl FullSpace {
    /// Builds the trivial constraint set of dimension `n ≥ 1`.
    pub fn new(n: usize) -> Result<Self, SetError> {
        if n == 0 {
            return Err(SetError::ZeroDimension);
        }
        Ok(Self { n })
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.n
    }
}

/// Finite list of points; projection returns the nearest one.
#[derive(Debug, Clone, PartialEq)]
pub struct FinitePointSet {
    points: Vec<Vec<f64>>,
}

impl FinitePointSet {
    /// Builds the set; points must be nonempty and share one dimension.
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self, SetError> {
        let first = points.first().ok_or(SetError::EmptyPointSet)?;
        let n = first.len();
        if n == 0 {
            return Err(SetError::ZeroDimension);
        }
        for p in &points {
            if p.len() != n {
                return Err(SetError::DimensionMismatch {
                    expected: n,
                    got: p.len(),
                });
            }
        }
        Ok(Self { points })
    }

    /// The stored points in tie-break order.
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    /// Nearest stored point, ties to the lowest index.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut best = 0usize;
        let mut best_d = sq_dist(x, &self.points[0]);
        for (i, p) in self.points.iter().enumerate().skip(1) {
            let d = sq_dist(x, p);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        self.points[best].clone()
    }
}

/// A closed set with deterministic projection and squared-distance queries.
#[derive(Debug, Clone, PartialEq)]
pub enum SetOracle {
    /// `{x : ⟨a, x⟩ ≤ b}`.
    Halfspace(Halfspace),
    /// `{x ∈ [−r, r]ⁿ : ‖x‖₀ ≤ s}`.
    SparseBox(SparseBox),
    /// Finite union of members.
    Union(UnionSet),
    /// All of ℝⁿ.
    FullSpace(FullSpace),
    /// Finite list of points.
    Points(FinitePointSet),
}

impl From<Halfspace> for SetOracle {
    fn from(h: Halfspace) -> Self {
        SetOracle::Halfspace(h)
    }
}
impl From<SparseBox> for SetOracle {
    fn from(s: SparseBox) -> Self {
        SetOracle::SparseBox(s)
    }
}
impl From<UnionSet> for SetOracle {
    fn from(u: UnionSet) -> Self {
        SetOracle::Union(u)
    }
}
impl From<FullSpace> for SetOracle {
    fn from(f: FullSpace) -> Self {
        SetOracle::FullSpace(f)
    }
}
impl From<FinitePointSet> for SetOracle {
    fn from(p: FinitePointSet) -> Self {
        SetOracle::Points(p)
    }
}

impl SetOracle {
    /// Ambient dimension of the set.
    pub fn dim(&self) -> usize {
        match self {
            SetOracle::Halfspace(h) => h.a.len(),
            SetOracle::SparseBox(s) => s.n,
            SetOracle::Union(u) => u.members[0].dim(),
            SetOracle::FullSpace(f) => f.n,
            SetOracle::Points(p) => p.points[0].len(),
        }
    }

    /// Short kind name, used in diagnostics.
    pub fn kind_name(&self) -> &'static str {
        match self {
            SetOracle::Halfspace(_) => "halfspace",
            SetOracle::SparseBox(_) => "sparse box",
            SetOracle::Union(_) => "union",
            SetOracle::FullSpace(_) => "full space",
            SetOracle::Points(_) => "point set",
        }
    }

    /// One nearest point of the set, ties broken deterministically.
    ///
    /// # Panics
    /// If `x.len()` differs from [`SetOracle::dim`].
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(
            x.len(),
            self.dim(),
            "project: point has dimension {}, set ({}) has dimension {}",
            x.len(),
            self.kind_name(),
            self.dim()
        );
        match self {
            SetOracle::Halfspace(h) => h.project(x),
            SetOracle::SparseBox(s) => s.project(x),
            SetOracle::Union(u) => u.project(x),
            SetOracle::FullSpace(_) => x.to_vec(),
            SetOracle::Points(p) => p.project(x),
        }
    }

    /// Squared Euclidean distance to the set, computed as
    /// `‖x − project(x)‖²` so it can never disagree with [`SetOracle::project`].
    ///
    /// # Panics
    /// If `x.len()` differs from [`SetOracle::dim`].
    pub fn sq_dist(&self, x: &[f64]) -> f64 {
        let p = self.project(x);
        sq_dist(x, &p)
    }

    /// Exact closed-set membership (boundary points count as inside).
    ///
    /// # Panics
    /// If `x.len()` differs from [`SetOracle::dim`].
    pub fn contains(&self, x: &[f64]) -> bool {
        self.contains_within(x, 0.0)
    }

    /// Membership with a relative tolerance on metric constraints: a halfspace
    /// accepts `⟨a, x⟩ ≤ b + tol·(1 + |b|)`, a point set accepts points within
    /// distance `tol·(1 + ‖p‖)` of a member. Combinatorial constraints (the
    /// sparsity count) stay exact.
    pub fn contains_within(&self, x: &[f64], tol: f64) -> bool {
        assert_eq!(x.len(), self.dim(), "contains: dimension mismatch");
        match self {
            SetOracle::Halfspace(h) => dot(&h.a, x) <= h.b + tol * (1.0 + h.b.abs()),
            SetOracle::SparseBox(s) => {
                let nonzeros = x.iter().filter(|v| **v != 0.0).count();
                nonzeros <= s.s && x.iter().all(|v| v.abs() <= s.r + tol * (1.0 + s.r))
            }
            SetOracle::Union(u) => u.members.iter().any(|m| m.contains_within(x, tol)),
            SetOracle::FullSpace(_) => true,
            SetOracle::Points(p) => p.points.iter().any(|q| {
                let bound = tol * (1.0 + crate::vecops::norm(q));
                sq_dist(x, q) <= bound * bound
            }),
        }
    }

    /// Signed slack when the set has one: `⟨a, x⟩ − b` for a halfspace, the
    /// minimum of member slacks for a union whose members all have slacks.
    /// `None` for kinds without a natural residual.
    pub fn slack(&self, x: &[f64]) -> Option<f64> {
        match self {
            SetOracle::Halfspace(h) => Some(h.slack(x)),
            SetOracle::Union(u) => {
                let mut best: Option<f64> = None;
                for m in &u.members {
                    let s = m.slack(x)?;
                    best = Some(best.map_or(s, |b: f64| b.min(s)));
                }
                best
            }
            _ => None,
        }
    }

    /// Projection recomputed by exhaustive enumeration, as an independent
    /// cross-check of the closed-form rules. Tie-breaking matches
    /// [`SetOracle::project`].
    ///
    /// Supported: [`SparseBox`] with `n ≤ 12` (enumerates every support of
    /// size at most `s`), [`UnionSet`] and [`FinitePointSet`] of any size.
    pub fn brute_force_project(&self, x: &[f64]) -> Result<Vec<f64>, SetError> {
        assert_eq!(x.len(), self.dim(), "brute_force_project: dimension mismatch");
        match self {
            SetOracle::SparseBox(sb) => {
                if sb.n > BRUTE_FORCE_MAX_DIM {
                    return Err(SetError::BruteForceTooLarge {
                        n: sb.n,
                        max: BRUTE_FORCE_MAX_DIM,
                    });
                }
                // Ascending mask order visits lexicographically smaller index
                // sets first, which reproduces the lowest-index tie-break.
                let mut best: Option<(f64, Vec<f64>)> = None;
                for mask in 0u32..(1u32 << sb.n) {
                    if mask.count_ones() as usize > sb.s {
                        continue;
                    }
                    let mut cand = vec![0.0; sb.n];
                    for i in 0..sb.n {
                        if mask & (1 << i) != 0 {
                            cand[i] = x[i].clamp(-sb.r, sb.r);
                        }
                    }
                    let d = sq_dist(x, &cand);
                    if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                        best = Some((d, cand));
                    }
                }
                Ok(best.expect("mask 0 always considered").1)
            }
            SetOracle::Union(u) => {
                let mut best: Option<(f64, Vec<f64>)> = None;
                for member in &u.members {
                    // Use each member's own brute-force route when it has one,
                    // so the check stays independent of the closed-form path.
                    let p = match member.brute_force_project(x) {
                        Ok(p) => p,
                        Err(SetError::BruteForceUnsupported(_)) => member.project(x),
                        Err(e) => return Err(e),
                    };
                    let d = sq_dist(x, &p);
                    if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                        best = Some((d, p));
                    }
                }
                Ok(best.expect("union has at least one member").1)
            }
            SetOracle::Points(p) => Ok(p.project(x)),
            other => Err(SetError::BruteForceUnsupported(other.kind_name())),
        }
    }
}
