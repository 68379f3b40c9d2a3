//! Minimax mean-square estimation on finite probability spaces.
//!
//! This crate answers a robust-statistics question: given a random variable
//! `xi` on a finite sample space and an observer who only sees which block of
//! a partition `C` occurred, what is the best mean-square estimate of `xi`
//! when the probability law itself is ambiguous?
//!
//! Ambiguity is modelled as a finitely generated convex set of probability
//! measures, all equivalent to a reference measure `P0`: the *ambiguity set*.
//! The associated upper expectation `rho(xi) = max_P E_P[xi]` is sublinear
//! (monotone, constant-preserving, sub-additive, positively homogeneous), and
//! the estimation target is the `C`-measurable `eta` minimizing the
//! worst-case residual `rho((xi - eta)^2)`.
//!
//! The key structural fact makes this tractable: the inner minimum
//! `G(P) = E_P[(xi - E_P[xi|C])^2]` (the conditional variance of `xi` under
//! `P`) is concave in `P`, so the minimax problem is a concave maximization
//! over the compact simplex of mixture weights, and the optimizer `(eta_hat,
//! P_hat)` is a saddle point: `eta_hat` is the conditional expectation of
//! `xi` under the worst-case measure `P_hat`. [`solver::solve_mmse`] runs a
//! Frank-Wolfe ascent with a duality-gap certificate; [`oracle`] re-derives
//! the same answers by brute force for cross-checking.
//!
//! # Quick example
//!
//! Two atoms, two candidate measures, an observer who sees nothing (trivial
//! partition). The worst-case measure is the fifty-fifty mixture and the best
//! constant estimate is 4:
//!
//! ```
//! use mmse::space::{Partition, RandomVariable, SampleSpace, Measure};
//! use mmse::ambiguity::AmbiguitySet;
//! use mmse::solver::solve_mmse;
//!
//! let space = SampleSpace::new(
//!     vec!["lo".into(), "hi".into()],
//!     vec![0.5, 0.5],
//! )?;
//! let p1 = Measure::new(&space, vec![1.0 / 3.0, 2.0 / 3.0])?;
//! let p2 = Measure::new(&space, vec![2.0 / 3.0, 1.0 / 3.0])?;
//! let set = AmbiguitySet::new(space, vec![p1, p2])?;
//! let xi = RandomVariable::new(vec![2.0, 6.0])?;
//! let c = Partition::trivial(2);
//!
//! let sol = solve_mmse(&xi, &set, &c, 1e-9, 1000)?;
//! assert!((sol.eta_hat.values()[0] - 4.0).abs() < 1e-9);
//! assert!((sol.alpha - 4.0).abs() < 1e-9);
//! # Ok::<(), mmse::Error>(())
//! ```
//!
//! # Module map
//!
//! - [`space`]: sample spaces, random variables, partitions, measures, and
//!   (conditional) expectations.
//! - [`ambiguity`]: ambiguity sets, mixtures, the sublinear expectation
//!   `rho`, conditional-reference transforms, and stability checks for
//!   dynamically consistent (pasted) sets.
//! - [`solver`]: the Frank-Wolfe minimax solver with saddle-point
//!   verification and a multi-start uniqueness probe.
//! - [`oracle`]: slow, independent re-computations (simplex grid search,
//!   brute-force estimator search, a mixture variance identity) used to
//!   validate the solver.
//! - [`scenarios`]: built-in reference scenarios, random scenario
//!   generators, a conditional sublinear expectation for filtrations, and
//!   JSON input/output.

#![forbid(unsafe_code)]

pub mod ambiguity;
mod linalg;
mod lowdisc;
pub mod oracle;
pub mod scenarios;
pub mod solver;
pub mod space;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Everything that can go wrong when constructing or operating on the types
/// in this crate. Variants carry enough context to point at the offending
/// input; file-loading errors additionally carry the JSON field path.
#[derive(Debug, Error)]
pub enum Error {
    #[error("sample space must contain at least one atom")]
    EmptySpace,

    #[error("{what}: expected length {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{what}: values must be finite")]
    NonFinite { what: String },

    #[error("{what}[{index}]: weight {value} is negative")]
    NegativeWeight {
        what: String,
        index: usize,
        value: f64,
    },

    #[error(
        "base_weights[{index}]: weight {value} is below the minimum {min:e}; \
         atoms this light make density ratios meaningless"
    )]
    BaseWeightTooSmall { index: usize, value: f64, min: f64 },

    #[error("{what}: weights sum to {sum} which differs from 1 by more than {tolerance:e}")]
    WeightSum {
        what: String,
        sum: f64,
        tolerance: f64,
    },

    #[error("partition: {reason}")]
    BadPartition { reason: String },

    #[error("block {block} has zero mass under the given measure; conditioning on it is undefined")]
    ZeroBlockMass { block: usize },

    #[error("vertex {index} is not equivalent to the reference measure (some atom has zero weight)")]
    NotEquivalent { index: usize },

    #[error("ambiguity set needs at least one vertex")]
    NoVertices,

    #[error("mixture weights: {reason}")]
    BadMixture { reason: String },

    #[error("tree depth {depth} outside the supported range 1..=12")]
    DepthOutOfRange { depth: usize },

    #[error("tilt {tilt} outside the open interval (0, 1)")]
    TiltOutOfRange { tilt: f64 },

    #[error("partition list is not a filtration: level {level} does not refine level {prev}")]
    NotAFiltration { level: usize, prev: usize },

    #[error("{what}: {got} exceeds the supported limit {limit}")]
    SizeLimit {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("truncation length {n} outside the supported range {lo}..={hi}")]
    TruncationOutOfRange { n: usize, lo: usize, hi: usize },

    #[error("sample budget {got} is below the vertex count {vertices}; every vertex must be checked")]
    SampleBudgetTooSmall { got: usize, vertices: usize },

    #[error("solver tolerance {tol} must be a finite positive number")]
    InvalidTolerance { tol: f64 },

    #[error("{what}: {value} outside the supported range [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("restart budget {got} is below the minimum 2; comparing answers needs at least two starts")]
    RestartBudgetTooSmall { got: usize },

    #[error("{path}: {message}")]
    Schema { path: String, message: String },

    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },
}

/// Absolute tolerances used across the crate.
///
/// Every comparison in this crate uses an explicit absolute tolerance; these
/// are the shared defaults. Constructors are strict (1e-12) because inputs
/// built in code should be clean; the file loader is looser (1e-9) because
/// serialized decimals lose a few digits, and it renormalizes exactly after
/// accepting.
pub mod tol {
    /// Constructor-level tolerance for |sum of weights - 1|.
    pub const WEIGHT_SUM: f64 = 1e-12;

    /// Loader-level tolerance for |sum of weights - 1| in scenario files.
    /// Weights within this tolerance are renormalized to sum exactly to 1;
    /// anything beyond is rejected.
    pub const LOADER_WEIGHT_SUM: f64 = 1e-9;

    /// Smallest admissible reference-measure weight. Below this, density
    /// ratios against the reference measure lose all precision.
    pub const MIN_BASE_WEIGHT: f64 = 1e-12;

    /// Equivalence checks flag (but do not reject) strictly positive weights
    /// below this threshold: densities remain well defined, yet conditional
    /// quantities computed through such atoms are numerically fragile.
    pub const EQUIVALENCE_WARN: f64 = 1e-12;

    /// Default duality-gap tolerance for the minimax solver.
    pub const DEFAULT_SOLVER_TOL: f64 = 1e-9;

    /// Default iteration cap for the minimax solver.
    pub const DEFAULT_MAX_ITER: usize = 100_000;

    /// Residual threshold for convex-hull membership in stability checks.
    pub const MEMBERSHIP_RESIDUAL: f64 = 1e-9;

    /// Blockwise agreement threshold for estimators found from different
    /// starting points; the estimator is unique, so spreads beyond this
    /// indicate a solver failure rather than genuine multiplicity.
    pub const ETA_UNIQUENESS: f64 = 1e-7;
}

#[cfg(doctest)]
mod book {
    //! Every Rust snippet in the user guide compiles and runs as a doc-test,
    //! so the book cannot drift from the library. Chapters live in
    //! `book/src/`; each item below pulls one chapter in verbatim.

    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            pub struct $name;
        };
    }

    chapter!(Introduction, "../../../book/src/introduction.md");
    chapter!(Spaces, "../../../book/src/spaces.md");
    chapter!(Ambiguity, "../../../book/src/ambiguity.md");
    chapter!(Estimation, "../../../book/src/estimation.md");
    chapter!(Scenarios, "../../../book/src/scenarios.md");
    chapter!(Verification, "../../../book/src/verification.md");
    chapter!(FilesAndCli, "../../../book/src/files-and-cli.md");
}
