//! Quadratic-mismatch L1 solvers.
//!
//! Everything in this module works on the problem
//! `min_w 1/(2n) ||y - X w||_2^2 + alpha ||w||_1` where the columns of `X`
//! are unit-norm. The regularization path of this problem is piecewise
//! linear; [`lars_lasso_path`] computes its knots exactly, while
//! [`cd_solve`] solves the problem at a single `alpha`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::{to_f64_vec, Float};
use crate::linalg::{columns_independent, dot, norm_inf, spd_solve, Matrix};
use crate::path::{Path, PathKnot};

/// Tolerances and step limits shared by the quadratic solvers.
#[derive(Clone, Debug)]
pub struct SolverConfig<F> {
    /// Maximum number of sweeps (CD) or path steps (LARS).
    pub max_steps: usize,
    /// Convergence tolerance on the iterate and objective change.
    pub tol: F,
    /// Tolerance for equality of reals: active-set membership, support
    /// counting, and tie detection.
    pub equality_tol: F,
    /// Early-stopping floor for the path algorithms; once
    /// `alpha = cmax / n` falls below this, iteration stops.
    pub alpha_floor: F,
}

impl<F: Float> Default for SolverConfig<F> {
    fn default() -> Self {
        SolverConfig {
            max_steps: 100_000,
            tol: F::cast(1e-10),
            equality_tol: F::cast(1e-12),
            // float32 machine epsilon; below this the Gram solves turn
            // unreliable and the remaining knots carry no information.
            alpha_floor: F::cast(f32::EPSILON),
        }
    }
}

/// Soft-thresholding: `sign(x) * max(|x| - theta, 0)`.
///
/// Odd in `x`, zero exactly when `|x| <= theta`.
pub fn soft_threshold<F: Float>(x: F, theta: F) -> F {
    let shrunk = x.abs() - theta;
    if shrunk <= F::zero() {
        F::zero()
    } else {
        shrunk * x.signum()
    }
}

/// Normalizes the columns of a feature matrix to unit Euclidean norm.
///
/// Returns the normalized matrix and the original column norms, so that
/// `X * diag(scales)` reproduces the input. A column with norm below `1e-14`
/// is a degenerate feature and yields [`Error::ZeroColumn`].
pub fn normalize_columns<F: Float>(x: &Matrix<F>) -> Result<(Matrix<F>, Vec<F>)> {
    let zero_tol = F::cast(1e-14);
    let mut normalized = x.clone();
    let mut scales = Vec::with_capacity(x.ncols());
    for j in 0..x.ncols() {
        let norm = dot(x.col(j), x.col(j)).sqrt();
        if norm < zero_tol {
            return Err(Error::ZeroColumn(j));
        }
        for v in normalized.col_mut(j) {
            *v /= norm;
        }
        scales.push(norm);
    }
    Ok((normalized, scales))
}

/// Maps a solution in normalized-feature space back to the original
/// parameters: `w_i / scales[i]`. Zero entries stay exactly zero.
pub fn rescale_solution<F: Float>(w: &[F], scales: &[F]) -> Result<Vec<F>> {
    if w.len() != scales.len() {
        return Err(Error::LengthMismatch {
            expected: scales.len(),
            got: w.len(),
        });
    }
    Ok(w.iter()
        .zip(scales)
        .map(|(&wi, &si)| if wi == F::zero() { F::zero() } else { wi / si })
        .collect())
}

/// Quadratic L1 regression problem with unit-norm feature columns.
///
/// Construction normalizes the columns, records the scales needed to map
/// solutions back to the original parameterization, and rejects
/// underdetermined or rank-deficient feature matrices.
#[derive(Clone, Debug)]
pub struct QuadraticProblem<F> {
    x: Matrix<F>,
    y: Vec<F>,
    column_scales: Vec<F>,
}

impl<F: Float> QuadraticProblem<F> {
    /// Builds a problem from a raw (not yet normalized) feature matrix.
    pub fn new(x_raw: Matrix<F>, y: Vec<F>) -> Result<Self> {
        if y.len() != x_raw.nrows() {
            return Err(Error::LengthMismatch {
                expected: x_raw.nrows(),
                got: y.len(),
            });
        }
        if x_raw.nrows() < x_raw.ncols() {
            return Err(Error::RankDeficient {
                rows: x_raw.nrows(),
                cols: x_raw.ncols(),
            });
        }
        let (x, column_scales) = normalize_columns(&x_raw)?;
        if !columns_independent(&x, F::cast(1e-10)) {
            return Err(Error::RankDeficient {
                rows: x.nrows(),
                cols: x.ncols(),
            });
        }
        Ok(QuadraticProblem {
            x,
            y,
            column_scales,
        })
    }

    /// Normalized feature matrix.
    pub fn x(&self) -> &Matrix<F> {
        &self.x
    }

    /// Measurement vector.
    pub fn y(&self) -> &[F] {
        &self.y
    }

    /// Norms of the original feature columns.
    pub fn column_scales(&self) -> &[F] {
        &self.column_scales
    }

    pub fn n_samples(&self) -> usize {
        self.x.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.x.ncols()
    }

    /// Mismatch `f(w) = 1/(2n) ||y - X w||_2^2`.
    pub fn mismatch(&self, w: &[F]) -> F {
        let r = self.residual(w);
        dot(&r, &r) / (F::cast(2) * F::cast(self.n_samples()))
    }

    /// Residual `y - X w`.
    pub fn residual(&self, w: &[F]) -> Vec<F> {
        let xw = self.x.matvec(w);
        self.y.iter().zip(xw).map(|(&yi, pi)| yi - pi).collect()
    }

    /// Gradient-scale correlations `(1/n) X^T (y - X w)`, the quantities the
    /// subgradient optimality conditions are written in.
    pub fn correlations(&self, w: &[F]) -> Vec<F> {
        let nf = F::cast(self.n_samples());
        self.x
            .tr_matvec(&self.residual(w))
            .into_iter()
            .map(|c| c / nf)
            .collect()
    }

    /// Largest violation of the subgradient optimality conditions at `w` for
    /// the given `alpha`: zero (up to tolerance) certifies a solution.
    pub fn kkt_violation(&self, w: &[F], alpha: F, equality_tol: F) -> F {
        let c = self.correlations(w);
        let mut worst = F::zero();
        for (i, &ci) in c.iter().enumerate() {
            let v = if w[i].abs() > equality_tol {
                (ci - alpha * w[i].signum()).abs()
            } else {
                (ci.abs() - alpha).max(F::zero())
            };
            worst = worst.max(v);
        }
        worst
    }
}

/// Least squares solution restricted to `support` (full support when `None`).
///
/// Entries off the support are exactly zero. The Gram solve retries once
/// with a diagonal jitter before failing with [`Error::SingularGram`].
pub fn ols_solve<F: Float>(
    problem: &QuadraticProblem<F>,
    support: Option<&[usize]>,
) -> Result<Vec<F>> {
    let m = problem.n_features();
    let full: Vec<usize>;
    let idx: &[usize] = match support {
        Some(s) => s,
        None => {
            full = (0..m).collect();
            &full
        }
    };
    let mut w = vec![F::zero(); m];
    if idx.is_empty() {
        return Ok(w);
    }
    let gram = problem.x.gram_of(idx);
    let rhs: Vec<F> = idx.iter().map(|&j| dot(problem.x.col(j), &problem.y)).collect();
    let sol = spd_solve(&gram, idx.len(), &rhs)?;
    for (&j, v) in idx.iter().zip(sol) {
        w[j] = v;
    }
    Ok(w)
}

/// Smallest `alpha` for which the zero vector solves the problem:
/// `(1/n) max_i |X_i^T y|`.
pub fn alpha_max_quadratic<F: Float>(problem: &QuadraticProblem<F>) -> F {
    norm_inf(&problem.x.tr_matvec(&problem.y)) / F::cast(problem.n_samples())
}

/// Coordinate descent for the quadratic L1 problem at a fixed `alpha`.
///
/// Starts from the ordinary least squares solution unless `w0` is given
/// (pass zeros for the bottom-up variant). Each sweep minimizes the
/// objective coordinate-wise through the closed-form soft-thresholding
/// update; iteration stops when either the iterate change or the objective
/// change drops below `config.tol` and the subgradient optimality residual
/// confirms the returned iterate within `10 * tol` (the objective-change
/// criterion alone can fire while the iterate is still far out).
pub fn cd_solve<F: Float>(
    problem: &QuadraticProblem<F>,
    alpha: F,
    w0: Option<&[F]>,
    config: &SolverConfig<F>,
) -> Result<Vec<F>> {
    let n = problem.n_samples();
    let m = problem.n_features();
    let nf = F::cast(n);
    let mut w = match w0 {
        Some(v) => {
            if v.len() != m {
                return Err(Error::LengthMismatch {
                    expected: m,
                    got: v.len(),
                });
            }
            v.to_vec()
        }
        None => ols_solve(problem, None)?,
    };
    let mut r = problem.residual(&w);
    let l1 = |w: &[F]| w.iter().map(|x| x.abs()).sum::<F>();
    let obj = |r: &[F], w: &[F]| dot(r, r) / (F::cast(2) * nf) + alpha * l1(w);
    let mut prev_obj = obj(&r, &w);

    for sweep in 1..=config.max_steps {
        let mut change_sq = F::zero();
        #[allow(clippy::needless_range_loop)] // l indexes w, r, and a column
        for l in 0..m {
            // S_l = (1/n) X_l^T (X w - y) with the l-th coordinate removed;
            // the column is unit-norm so the update is -n * soft(S_l).
            let s_l = -(dot(problem.x.col(l), &r) + w[l]) / nf;
            let w_new = -nf * soft_threshold(s_l, alpha);
            let delta = w_new - w[l];
            if delta != F::zero() {
                for (ri, &xi) in r.iter_mut().zip(problem.x.col(l)) {
                    *ri -= xi * delta;
                }
                w[l] = w_new;
                change_sq += delta * delta;
            }
        }
        if sweep % 128 == 0 {
            r = problem.residual(&w);
        }
        let cur_obj = obj(&r, &w);
        if (change_sq.sqrt() < config.tol || (cur_obj - prev_obj).abs() < config.tol)
            && problem.kkt_violation(&w, alpha, config.equality_tol) <= F::cast(10) * config.tol
        {
            return Ok(w);
        }
        prev_obj = cur_obj;
    }
    Err(Error::NotConverged {
        steps: config.max_steps,
        last: to_f64_vec(&w),
    })
}

/// Diagnostics for one step of a LARS-family path computation.
#[derive(Clone, Debug, Serialize)]
pub struct LarsStep<F> {
    /// Step size along the equiangular direction.
    pub gamma: F,
    /// Normalization `A` of the equiangular vector.
    pub equiangular_scale: F,
    /// Feature that reached the maximal correlation at the end of the step.
    pub entered: Option<usize>,
    /// Feature removed by the LASSO sign rule, if the step was truncated.
    pub dropped: Option<usize>,
}

/// Least angle regression path (no sign-drop rule).
///
/// Starts from the zero vector, adds one feature per step, and finishes at
/// the full least squares solution. Knots carry `alpha = cmax / n`. Stops
/// early (flagged on the returned [`Path`]) once `alpha` falls below
/// `config.alpha_floor`.
pub fn lars_path<F: Float>(
    problem: &QuadraticProblem<F>,
    config: &SolverConfig<F>,
) -> Result<Path<F>> {
    lars_engine(problem, false, config).map(|(path, _)| path)
}

/// [`lars_path`] plus per-step diagnostics.
pub fn lars_path_traced<F: Float>(
    problem: &QuadraticProblem<F>,
    config: &SolverConfig<F>,
) -> Result<(Path<F>, Vec<LarsStep<F>>)> {
    lars_engine(problem, false, config)
}

/// LASSO-modified least angle regression.
///
/// Computes the knots of the exact regularization path: every knot
/// `(alpha, w)` solves the quadratic L1 problem at its `alpha`. When a
/// parameter would cross zero the step is truncated, the parameter is
/// snapped to exactly zero, and its index leaves the active set.
pub fn lars_lasso_path<F: Float>(
    problem: &QuadraticProblem<F>,
    config: &SolverConfig<F>,
) -> Result<Path<F>> {
    lars_engine(problem, true, config).map(|(path, _)| path)
}

/// [`lars_lasso_path`] plus per-step diagnostics.
pub fn lars_lasso_path_traced<F: Float>(
    problem: &QuadraticProblem<F>,
    config: &SolverConfig<F>,
) -> Result<(Path<F>, Vec<LarsStep<F>>)> {
    lars_engine(problem, true, config)
}

fn lars_engine<F: Float>(
    problem: &QuadraticProblem<F>,
    drop_rule: bool,
    config: &SolverConfig<F>,
) -> Result<(Path<F>, Vec<LarsStep<F>>)> {
    let n = problem.n_samples();
    let m = problem.n_features();
    let nf = F::cast(n);
    let x = problem.x();

    let mut w = vec![F::zero(); m];
    let mut knots: Vec<PathKnot<F>> = Vec::new();
    let mut steps: Vec<LarsStep<F>> = Vec::new();

    // X^T y_perp = 0, so correlations against the raw residual equal those
    // against the parallel residual; no projection is needed here.
    let mut c = x.tr_matvec(problem.y());
    let mut cmax = norm_inf(&c);
    let mut alpha = cmax / nf;

    knots.push(PathKnot {
        alpha,
        w: w.clone(),
        active: Vec::new(),
        mismatch: problem.mismatch(&w),
        is_drop_step: false,
    });

    if alpha < config.alpha_floor {
        return Ok((
            Path {
                knots,
                early_stopped: true,
            },
            steps,
        ));
    }

    // First active feature: the unique argmax of |c|.
    let first = (0..m).max_by(|&a, &b| c[a].abs().partial_cmp(&c[b].abs()).unwrap()).unwrap();
    let ties: Vec<usize> = (0..m)
        .filter(|&i| i != first && (c[i].abs() - cmax).abs() <= config.equality_tol)
        .collect();
    if !ties.is_empty() {
        let mut all = vec![first];
        all.extend(ties);
        all.sort_unstable();
        return Err(Error::CorrelationTie(all));
    }
    let mut active: Vec<usize> = vec![first];
    let mut is_active = vec![false; m];
    is_active[first] = true;

    loop {
        let support = w.iter().filter(|v| v.abs() > config.equality_tol).count();
        if m == 0 || support >= m - 1 {
            break;
        }
        if steps.len() >= config.max_steps {
            return Err(Error::NotConverged {
                steps: config.max_steps,
                last: to_f64_vec(&w),
            });
        }

        let k = active.len();
        let signs: Vec<F> = active.iter().map(|&i| sign_of(c[i])).collect();

        // Equiangular direction: u = A * Xbar_A q with q = (Xbar^T Xbar)^{-1} 1.
        let mut gram = x.gram_of(&active);
        for a in 0..k {
            for b in 0..k {
                gram[b * k + a] = gram[b * k + a] * signs[a] * signs[b];
            }
        }
        let q = spd_solve(&gram, k, &vec![F::one(); k])?;
        let one_t_q: F = q.iter().copied().sum();
        if one_t_q <= F::zero() || !one_t_q.is_finite() {
            return Err(Error::SingularGram);
        }
        let a_norm = F::one() / one_t_q.sqrt();
        let mut u = vec![F::zero(); n];
        for (a, &i) in active.iter().enumerate() {
            let coeff = a_norm * signs[a] * q[a];
            for (ui, &xi) in u.iter_mut().zip(x.col(i)) {
                *ui += coeff * xi;
            }
        }

        // Smallest positive step at which an inactive feature reaches the
        // maximal correlation. Candidates at or below the equality tolerance
        // would re-select a feature that is already at equality.
        let mut entry: Option<(F, usize)> = None;
        let mut entry_ties: Vec<usize> = Vec::new();
        for j in 0..m {
            if is_active[j] {
                continue;
            }
            let a_j = dot(x.col(j), &u);
            let mut best: Option<F> = None;
            for cand in [(cmax - c[j]) / (a_norm - a_j), (cmax + c[j]) / (a_norm + a_j)] {
                if cand.is_finite() && cand > config.equality_tol {
                    best = Some(best.map_or(cand, |b: F| b.min(cand)));
                }
            }
            if let Some(cand) = best {
                match entry {
                    None => entry = Some((cand, j)),
                    Some((g, jstar)) => {
                        if cand < g - config.equality_tol {
                            entry = Some((cand, j));
                            entry_ties.clear();
                        } else if (cand - g).abs() <= config.equality_tol {
                            entry_ties.push(if cand < g { jstar } else { j });
                            if cand < g {
                                entry = Some((cand, j));
                            }
                        }
                    }
                }
            }
        }

        // An empty candidate set can only arise from rounding; fall back to
        // the step that zeroes the active correlations (the terminal move).
        let (mut gamma, mut entering) = match entry {
            Some((g, j)) => (g, Some(j)),
            None => (cmax / a_norm, None),
        };

        // LASSO sign rule: truncate at the first parameter crossing zero.
        let mut dropped: Option<usize> = None;
        if drop_rule {
            let mut drop: Option<(F, usize)> = None;
            let mut drop_ties: Vec<usize> = Vec::new();
            for (a, &i) in active.iter().enumerate() {
                let d = a_norm * signs[a] * q[a];
                if d == F::zero() {
                    continue;
                }
                let cand = -w[i] / d;
                if cand > F::zero() {
                    match drop {
                        None => drop = Some((cand, i)),
                        Some((g, istar)) => {
                            if cand < g - config.equality_tol {
                                drop = Some((cand, i));
                                drop_ties.clear();
                            } else if (cand - g).abs() <= config.equality_tol {
                                drop_ties.push(if cand < g { istar } else { i });
                                if cand < g {
                                    drop = Some((cand, i));
                                }
                            }
                        }
                    }
                }
            }
            if let Some((gt, it)) = drop {
                if gt < gamma {
                    if !drop_ties.is_empty()
                        && (cmax - gt * a_norm) / nf >= config.alpha_floor
                    {
                        let mut all = vec![it];
                        all.extend(drop_ties);
                        all.sort_unstable();
                        return Err(Error::CorrelationTie(all));
                    }
                    gamma = gt;
                    entering = None;
                    dropped = Some(it);
                }
            }
        }

        // Simultaneous entries are only meaningful above the early-stopping
        // floor; at the degenerate end of the path every remaining feature
        // reaches the (vanishing) maximal correlation at once.
        if dropped.is_none()
            && !entry_ties.is_empty()
            && (cmax - gamma * a_norm) / nf >= config.alpha_floor
        {
            let mut all = entry_ties;
            if let Some(j) = entering {
                all.push(j);
            }
            all.sort_unstable();
            all.dedup();
            return Err(Error::CorrelationTie(all));
        }

        for (a, &i) in active.iter().enumerate() {
            w[i] += gamma * a_norm * signs[a] * q[a];
        }
        if let Some(it) = dropped {
            // Snap the crossing coordinate to exactly zero so the active-set
            // bookkeeping cannot drift.
            w[it] = F::zero();
        }

        c = x.tr_matvec(&problem.residual(&w));
        cmax = norm_inf(&c);
        alpha = cmax / nf;

        if let Some(it) = dropped {
            active.retain(|&i| i != it);
            is_active[it] = false;
        }
        steps.push(LarsStep {
            gamma,
            equiangular_scale: a_norm,
            entered: entering,
            dropped,
        });
        knots.push(PathKnot {
            alpha,
            w: w.clone(),
            active: active.clone(),
            mismatch: problem.mismatch(&w),
            is_drop_step: dropped.is_some(),
        });
        if let Some(j) = entering {
            active.push(j);
            is_active[j] = true;
        }

        if alpha < config.alpha_floor {
            return Ok((
                Path {
                    knots,
                    early_stopped: true,
                },
                steps,
            ));
        }
    }

    // Terminal knot: the unregularized least squares solution at alpha = 0.
    let w_ols = ols_solve(problem, None)?;
    let active: Vec<usize> = (0..m)
        .filter(|&i| w_ols[i].abs() > config.equality_tol)
        .collect();
    knots.push(PathKnot {
        alpha: F::zero(),
        mismatch: problem.mismatch(&w_ols),
        w: w_ols,
        active,
        is_drop_step: false,
    });
    Ok((
        Path {
            knots,
            early_stopped: false,
        },
        steps,
    ))
}

fn sign_of<F: Float>(v: F) -> F {
    if v < F::zero() {
        -F::one()
    } else {
        F::one()
    }
}

/// Solution at any `alpha` inside the path range by linear interpolation
/// between the bracketing knots.
///
/// At a knot's `alpha` the knot's `w` is returned exactly. Queries outside
/// `[alpha_min, alpha_max]` fail with [`Error::OutOfRange`] (for a complete
/// path `alpha_min` is zero).
pub fn interpolate_path<F: Float>(path: &Path<F>, alpha: F) -> Result<Vec<F>> {
    let out_of_range = || Error::OutOfRange {
        alpha: alpha.to_f64().unwrap_or(f64::NAN),
        max: path.alpha_max().to_f64().unwrap_or(f64::NAN),
    };
    if path.is_empty() || alpha < path.alpha_min() || alpha > path.alpha_max() {
        return Err(out_of_range());
    }
    if path.len() == 1 {
        return Ok(path.knots[0].w.clone());
    }
    for pair in path.knots.windows(2) {
        let (hi, lo) = (&pair[0], &pair[1]);
        if alpha <= hi.alpha && alpha >= lo.alpha {
            let t = (hi.alpha - alpha) / (hi.alpha - lo.alpha);
            return Ok(hi
                .w
                .iter()
                .zip(&lo.w)
                .map(|(&a, &b)| (F::one() - t) * a + t * b)
                .collect());
        }
    }
    Err(out_of_range())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn identity_problem() -> QuadraticProblem<f64> {
        QuadraticProblem::new(Matrix::identity(2), vec![3.0, 1.0]).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-0.3, 0.5), 0.0);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    proptest! {
        #[test]
        fn soft_threshold_is_odd_and_dead_zoned(x in -10.0f64..10.0, theta in 0.0f64..5.0) {
            let s = soft_threshold(x, theta);
            prop_assert_eq!(s, -soft_threshold(-x, theta));
            prop_assert_eq!(s == 0.0, x.abs() <= theta);
            prop_assert!(s.abs() <= x.abs());
        }
    }

    #[test]
    fn normalize_three_four_five() {
        let x = Matrix::from_columns(vec![vec![3.0, 4.0]]);
        let (xn, scales) = normalize_columns(&x).unwrap();
        assert_eq!(xn.col(0), &[0.6, 0.8]);
        assert_eq!(scales, vec![5.0]);
    }

    #[test]
    fn normalize_identity_is_noop() {
        let x = Matrix::<f64>::identity(3);
        let (xn, scales) = normalize_columns(&x).unwrap();
        assert_eq!(xn, x);
        assert_eq!(scales, vec![1.0; 3]);
    }

    #[test]
    fn normalize_rejects_zero_column() {
        let x = Matrix::from_columns(vec![vec![1.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(normalize_columns(&x), Err(Error::ZeroColumn(1))));
    }

    proptest! {
        #[test]
        fn normalize_roundtrip(col in proptest::collection::vec(-100.0f64..100.0, 4)) {
            prop_assume!(col.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-6);
            let x = Matrix::from_columns(vec![col.clone()]);
            let (xn, scales) = normalize_columns(&x).unwrap();
            for (orig, normed) in col.iter().zip(xn.col(0)) {
                prop_assert!((normed * scales[0] - orig).abs() <= 1e-14 * orig.abs().max(1.0));
            }
        }
    }

    #[test]
    fn rescale_examples() {
        assert_eq!(
            rescale_solution(&[2.0, 0.0], &[4.0, 5.0]).unwrap(),
            vec![0.5, 0.0]
        );
        assert_eq!(rescale_solution(&[0.0, 0.0], &[4.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(rescale_solution(&[1.0, 1.0], &[1.0, 1.0]).unwrap(), vec![1.0, 1.0]);
        assert!(matches!(
            rescale_solution(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn problem_rejects_underdetermined_and_dependent() {
        let wide = Matrix::from_rows(vec![vec![1.0, 0.0, 1.0]]);
        assert!(matches!(
            QuadraticProblem::new(wide, vec![1.0]),
            Err(Error::RankDeficient { .. })
        ));
        let dependent = Matrix::from_columns(vec![vec![1.0, 2.0, 0.0], vec![2.0, 4.0, 0.0]]);
        assert!(matches!(
            QuadraticProblem::new(dependent, vec![1.0, 0.0, 0.0]),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn ols_identity() {
        let p = identity_problem();
        let w = ols_solve(&p, None).unwrap();
        assert_eq!(w, vec![3.0, 1.0]);
    }

    /// Gaussian elimination with partial pivoting, independent of the
    /// Cholesky route used by `ols_solve`.
    #[allow(clippy::needless_range_loop)]
    fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs())).unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for row in (0..n).rev() {
            let mut s = b[row];
            for k in row + 1..n {
                s -= a[row][k] * x[k];
            }
            x[row] = s / a[row][row];
        }
        x
    }

    #[test]
    #[allow(clippy::needless_range_loop)]
    fn ols_matches_normal_equations_oracle() {
        // Fixed well-conditioned 10x3 instance.
        let cols = vec![
            vec![1.0, 2.0, -1.0, 0.5, 3.0, -2.0, 1.5, 0.0, 2.5, -0.5],
            vec![0.5, -1.0, 2.0, 1.0, 0.0, 1.5, -0.5, 2.0, 1.0, 0.5],
            vec![2.0, 0.0, 1.0, -1.5, 1.0, 0.5, 2.0, -1.0, 0.0, 1.5],
        ];
        let y = vec![1.0, -2.0, 0.5, 3.0, -1.0, 2.0, 0.0, 1.5, -0.5, 2.5];
        let p = QuadraticProblem::new(Matrix::from_columns(cols), y.clone()).unwrap();
        let w = ols_solve(&p, None).unwrap();

        let mut gram = vec![vec![0.0; 3]; 3];
        let mut rhs = vec![0.0; 3];
        for i in 0..3 {
            for j in 0..3 {
                gram[i][j] = dot(p.x().col(i), p.x().col(j));
            }
            rhs[i] = dot(p.x().col(i), &y);
        }
        let oracle = gauss_solve(gram, rhs);
        for (a, b) in w.iter().zip(&oracle) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
        // Residual orthogonal to every column.
        let r = p.residual(&w);
        for j in 0..3 {
            assert!(dot(p.x().col(j), &r).abs() < 1e-10);
        }
    }

    #[test]
    fn ols_restricted_support() {
        let p = identity_problem();
        let w = ols_solve(&p, Some(&[1])).unwrap();
        assert_eq!(w, vec![0.0, 1.0]);
        assert_eq!(ols_solve(&p, Some(&[])).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn alpha_max_examples() {
        let p = identity_problem();
        assert_eq!(alpha_max_quadratic(&p), 1.5);
        let zero = QuadraticProblem::new(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(alpha_max_quadratic(&zero), 0.0);
    }

    #[test]
    fn alpha_max_certifies_zero_solution() {
        let p = identity_problem();
        let a0 = alpha_max_quadratic(&p);
        // At alpha = a0 the zero vector satisfies the subgradient condition.
        assert_eq!(p.kkt_violation(&[0.0, 0.0], a0, 1e-12), 0.0);
        let w = cd_solve(&p, a0, None, &SolverConfig::default()).unwrap();
        assert!(norm_inf(&w) < 1e-8);
    }

    #[test]
    fn cd_orthonormal_design_oracle() {
        // For identity columns the objective separates per coordinate and
        // the minimizer is soft_{n*alpha}(y_i).
        let p = identity_problem();
        let alpha = 0.5;
        let w = cd_solve(&p, alpha, None, &SolverConfig::default()).unwrap();
        let n_alpha = 2.0 * alpha;
        assert_relative_eq!(w[0], soft_threshold(3.0, n_alpha), epsilon = 1e-10);
        assert_relative_eq!(w[1], soft_threshold(1.0, n_alpha), epsilon = 1e-10);
        assert_eq!(w, vec![2.0, 0.0]);
    }

    #[test]
    fn cd_zero_alpha_matches_ols() {
        let cols = vec![
            vec![1.0, 2.0, -1.0, 0.5],
            vec![0.5, -1.0, 2.0, 1.0],
        ];
        let p = QuadraticProblem::new(Matrix::from_columns(cols), vec![1.0, -2.0, 0.5, 3.0]).unwrap();
        let w_ols = ols_solve(&p, None).unwrap();
        let w_cd_bottom_up =
            cd_solve(&p, 0.0, Some(&[0.0, 0.0]), &SolverConfig::default()).unwrap();
        for (a, b) in w_cd_bottom_up.iter().zip(&w_ols) {
            assert_relative_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn cd_large_alpha_gives_zero() {
        let p = identity_problem();
        let a0 = alpha_max_quadratic(&p);
        for factor in [1.0, 1.5, 10.0] {
            let w = cd_solve(&p, a0 * factor, None, &SolverConfig::default()).unwrap();
            assert!(norm_inf(&w) < 1e-10);
        }
    }

    /// Dense grid search plus coordinate-wise ternary polish; independent of
    /// the closed-form CD update.
    fn brute_force_objective(p: &QuadraticProblem<f64>, alpha: f64, range: f64) -> f64 {
        let m = p.n_features();
        let obj = |w: &[f64]| p.mismatch(w) + alpha * w.iter().map(|v| v.abs()).sum::<f64>();
        let steps = 11;
        let mut best = vec![0.0; m];
        let mut best_val = obj(&best);
        let mut idx = vec![0usize; m];
        loop {
            let w: Vec<f64> = idx
                .iter()
                .map(|&i| -range + 2.0 * range * i as f64 / (steps - 1) as f64)
                .collect();
            let v = obj(&w);
            if v < best_val {
                best_val = v;
                best = w;
            }
            let mut carry = 0;
            loop {
                idx[carry] += 1;
                if idx[carry] < steps {
                    break;
                }
                idx[carry] = 0;
                carry += 1;
                if carry == m {
                    break;
                }
            }
            if carry == m {
                break;
            }
        }
        // Ternary-search polish, one coordinate at a time.
        for _ in 0..200 {
            for l in 0..m {
                let mut lo = best[l] - range;
                let mut hi = best[l] + range;
                for _ in 0..100 {
                    let m1 = lo + (hi - lo) / 3.0;
                    let m2 = hi - (hi - lo) / 3.0;
                    let mut w1 = best.clone();
                    w1[l] = m1;
                    let mut w2 = best.clone();
                    w2[l] = m2;
                    if obj(&w1) < obj(&w2) {
                        hi = m2;
                    } else {
                        lo = m1;
                    }
                }
                best[l] = (lo + hi) / 2.0;
            }
        }
        obj(&best).min(best_val)
    }

    #[test]
    fn cd_matches_brute_force_oracle() {
        let cols: Vec<Vec<f64>> = vec![
            vec![1.0, 0.3, -0.5, 0.2],
            vec![0.2, 1.0, 0.4, -0.3],
            vec![-0.4, 0.1, 1.0, 0.5],
        ];
        let p = QuadraticProblem::new(Matrix::from_columns(cols), vec![2.0, -1.0, 0.5, 1.0]).unwrap();
        for alpha in [0.01, 0.1, 0.3] {
            let w = cd_solve(&p, alpha, None, &SolverConfig::default()).unwrap();
            let cd_obj = p.mismatch(&w) + alpha * w.iter().map(|v| v.abs()).sum::<f64>();
            let oracle_obj = brute_force_objective(&p, alpha, 4.0);
            assert!(
                (cd_obj - oracle_obj).abs() < 1e-4,
                "alpha={alpha}: cd {cd_obj} vs oracle {oracle_obj}"
            );
            assert!(cd_obj <= oracle_obj + 1e-10);
        }
    }

    #[test]
    fn lars_identity_hand_example() {
        // Hand execution: gamma0 = min+{(3-1)/1, (3+1)/1} = 2.
        let p = identity_problem();
        let path = lars_path(&p, &SolverConfig::default()).unwrap();
        assert!(!path.early_stopped);
        assert_eq!(path.len(), 3);
        assert_eq!(path.knots[0].w, vec![0.0, 0.0]);
        assert_eq!(path.knots[1].w, vec![2.0, 0.0]);
        assert_eq!(path.knots[2].w, vec![3.0, 1.0]);
        assert_relative_eq!(path.knots[0].alpha, 1.5);
        assert_relative_eq!(path.knots[1].alpha, 0.5);
        assert_eq!(path.knots[2].alpha, 0.0);
    }

    #[test]
    fn lars_lasso_identity_hand_example() {
        let p = identity_problem();
        let path = lars_lasso_path(&p, &SolverConfig::default()).unwrap();
        assert_eq!(path.len(), 3);
        assert_relative_eq!(path.knots[0].alpha, 1.5);
        assert_relative_eq!(path.knots[1].alpha, 0.5);
        assert_eq!(path.knots[1].w, vec![2.0, 0.0]);
        assert_eq!(path.knots[2].w, vec![3.0, 1.0]);
        assert!(path.knots.iter().all(|k| !k.is_drop_step));
    }

    #[test]
    fn lars_single_dominant_feature_reaches_ols_in_one_move() {
        // y lies exactly in the span of the first column.
        let x = Matrix::from_columns(vec![vec![0.6, 0.8], vec![1.0, 0.0]]);
        let y = vec![1.8, 2.4];
        let p = QuadraticProblem::new(x, y).unwrap();
        let path = lars_path(&p, &SolverConfig::default()).unwrap();
        // The move lands on the least squares solution; the residual is then
        // orthogonal to every feature and the path stops early.
        let last = path.knots.last().unwrap();
        assert_relative_eq!(last.w[0], 3.0, epsilon = 1e-10);
        assert_relative_eq!(last.w[1], 0.0, epsilon = 1e-10);
        assert!(path.early_stopped);
        assert!(last.mismatch < 1e-20);
    }

    fn random_problem(seed: u64, n: usize, m: usize) -> QuadraticProblem<f64> {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut normal = move || {
            let u1 = ((rng.next_u64() >> 11) + 1) as f64 * (2f64).powi(-53);
            let u2 = (rng.next_u64() >> 11) as f64 * (2f64).powi(-53);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };
        let cols: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| normal()).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| normal()).collect();
        QuadraticProblem::new(Matrix::from_columns(cols), y).unwrap()
    }

    #[test]
    fn lars_equal_correlation_invariant_on_random_instance() {
        let p = random_problem(11, 20, 5);
        let path = lars_path(&p, &SolverConfig::default()).unwrap();
        assert!(!path.early_stopped);
        let mut prev_cmax = f64::INFINITY;
        for knot in &path.knots {
            // Recompute correlations from scratch at each knot.
            let c = p.x().tr_matvec(&p.residual(&knot.w));
            let cmax = norm_inf(&c);
            for &i in &knot.active {
                assert!(
                    (c[i].abs() - cmax).abs() < 1e-8,
                    "active feature {i} not at maximal correlation"
                );
            }
            assert!(cmax < prev_cmax);
            prev_cmax = cmax;
        }
        // Final knot is the full least squares solution.
        let w_ols = ols_solve(&p, None).unwrap();
        for (a, b) in path.knots.last().unwrap().w.iter().zip(&w_ols) {
            assert_relative_eq!(a, b, epsilon = 1e-9);
        }
    }

    #[test]
    fn lars_lasso_knots_satisfy_kkt_on_random_instances() {
        for seed in 0..20 {
            let p = random_problem(100 + seed, 30, 6);
            let path = lars_lasso_path(&p, &SolverConfig::default()).unwrap();
            for knot in &path.knots {
                let viol = p.kkt_violation(&knot.w, knot.alpha, 1e-12);
                assert!(
                    viol < 1e-8,
                    "seed {seed}: KKT violation {viol:.3e} at alpha {}",
                    knot.alpha
                );
            }
        }
    }

    #[test]
    fn lars_rejects_exact_correlation_tie() {
        // Two identical-correlation features built by mirroring a column.
        let c1 = vec![0.6, 0.8, 0.0];
        let c2 = vec![0.6, 0.0, 0.8];
        let y = vec![1.0, 0.5, 0.5];
        let p = QuadraticProblem::new(Matrix::from_columns(vec![c1, c2]), y).unwrap();
        let err = lars_path(&p, &SolverConfig::default()).unwrap_err();
        assert!(matches!(err, Error::CorrelationTie(_)));
    }

    #[test]
    fn interpolate_identity_example() {
        let p = identity_problem();
        let path = lars_lasso_path(&p, &SolverConfig::default()).unwrap();
        let w = interpolate_path(&path, 1.0).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
        // KKT holds at the interpolated point.
        assert!(p.kkt_violation(&w, 1.0, 1e-12) < 1e-12);
        // Knot alphas return the knot vectors exactly.
        for knot in &path.knots {
            assert_eq!(interpolate_path(&path, knot.alpha).unwrap(), knot.w);
        }
        // alpha = 0 is the terminal least squares knot.
        assert_eq!(interpolate_path(&path, 0.0).unwrap(), vec![3.0, 1.0]);
        assert!(matches!(
            interpolate_path(&path, 2.0),
            Err(Error::OutOfRange { .. })
        ));
    }

    #[test]
    fn f32_instantiation_smoke() {
        let x = Matrix::<f32>::identity(2);
        let p = QuadraticProblem::new(x, vec![3.0f32, 1.0]).unwrap();
        let w = cd_solve(&p, 0.5, None, &SolverConfig::default()).unwrap();
        assert!((w[0] - 2.0).abs() < 1e-5);
        assert!(w[1].abs() < 1e-5);
    }
}
