//! Regularization path records.

use serde::Serialize;

use crate::float::Float;

/// One knot of a regularization path: the solution at a single `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PathKnot<F> {
    /// Regularization parameter at which `w` solves the problem.
    pub alpha: F,
    /// Parameter vector.
    pub w: Vec<F>,
    /// Indices of the nonzero parameters, in the order they entered.
    pub active: Vec<usize>,
    /// Model-data mismatch `f(w)` recomputed at this knot.
    pub mismatch: F,
    /// True when this knot removed an index via the LARS-LASSO sign rule.
    pub is_drop_step: bool,
}

/// Sequence of knots with strictly decreasing `alpha`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Path<F> {
    pub knots: Vec<PathKnot<F>>,
    /// Set when the path stopped early because `alpha` fell below the
    /// configured floor before reaching the unregularized solution.
    pub early_stopped: bool,
}

impl<F: Float> Path<F> {
    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    /// Largest `alpha` on the path (the first knot's).
    pub fn alpha_max(&self) -> F {
        self.knots.first().map_or(F::zero(), |k| k.alpha)
    }

    /// Smallest `alpha` on the path (the last knot's).
    pub fn alpha_min(&self) -> F {
        self.knots.last().map_or(F::zero(), |k| k.alpha)
    }
}
