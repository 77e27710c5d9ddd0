//! Simulation and exact-evaluation laboratory for branching random walks with
//! regularly varying displacements.
//!
//! The crate is organized around the life cycle of a desk-scale experiment:
//!
//! * [`offspring`] — parametric offspring laws with exact probability generating
//!   function machinery, extinction/survival probabilities, the cluster-size law
//!   and the Laplace transform of the Galton-Watson martingale limit `W`.
//! * [`steps`] — two-sided regularly varying step distributions, their exact
//!   samplers, the scaling constants `b_n` and the power-law limit measure.
//! * [`point`] — finite point samples on the punctured real line, intervals and
//!   piecewise-constant test functions; the common currency of all samplers.
//! * [`sim`] — streaming frontier simulation of the branching random walk up to
//!   generation `n`, conditioned on survival, with optional tracking of the
//!   one-large-jump edge process.
//! * [`limit`] — direct samplers for the limiting Cox cluster process in both of
//!   its representations, plus closed-form Laplace functionals.
//! * [`formulas`] — closed-form limit laws for maxima, minima, order statistics,
//!   joint order statistics and gaps, including integer partition enumeration.
//! * [`stats`] — empirical CDF / Kolmogorov-Smirnov comparisons, chi-square
//!   count-distribution tests, Laplace functional estimation, superposability
//!   tests and one-large-jump diagnostics.

// Validation deliberately uses negated comparisons like `!(x > 0.0)` so
// that NaN arguments are rejected alongside out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod formulas;
pub mod limit;
pub mod offspring;
pub mod point;
pub mod sim;
pub mod stats;
pub mod steps;

pub use error::{Error, Result};
pub use offspring::{LimitModel, LimitModelOptions, OffspringDistribution, OffspringKind};
pub use point::{Interval, PiecewiseConstant, PointSample};
pub use sim::{SimCaps, SimReplicate};
pub use steps::{NuAlpha, StepDistribution};
