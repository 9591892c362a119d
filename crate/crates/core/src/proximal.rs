//! Proximal gradient solvers for a general differentiable mismatch.
//!
//! [`ista_solve`] minimizes `f(w) + alpha ||w||_1` for any differentiable
//! `f` by iterating `w <- prox(w - gamma grad f(w), gamma alpha)`, where the
//! L1 proximal operator is componentwise soft-thresholding. The step size is
//! the sensitive knob; an optional backtracking line search (on by default)
//! halves it whenever the composite objective would increase.
//!
//! [`pathwise_ista`] sweeps a linearly decreasing `alpha` schedule from the
//! zero-solution bound down, warm-starting each solve from the previous one.

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::float::{to_f64_vec, Float};
use crate::linalg::{norm2, norm_inf};
use crate::path::{Path, PathKnot};
use crate::sparse::{soft_threshold, QuadraticProblem};

/// Differentiable mismatch `f(w)` with an analytic gradient.
pub trait SmoothObjective<F: Float> {
    /// Number of parameters.
    fn dim(&self) -> usize;

    /// Mismatch value; may return a non-finite number outside the model's
    /// admissible domain, which the solvers detect.
    fn value(&self, w: &[F]) -> F;

    /// Analytic gradient, validated against [`finite_diff_gradient`] by
    /// [`check_gradient`].
    fn gradient(&self, w: &[F]) -> Vec<F>;

    /// Sampling interval per coordinate for the randomized gradient check.
    /// Coordinates with a restricted domain (e.g. an exponent that must stay
    /// away from zero) override this.
    fn probe_interval(&self, _coord: usize) -> (f64, f64) {
        (-2.0, 2.0)
    }
}

/// Step-size and termination settings for ISTA.
#[derive(Clone, Debug)]
pub struct IstaConfig<F> {
    /// Initial gradient step `gamma`.
    pub step: F,
    pub max_steps: usize,
    /// Tolerance on the iterate change and composite-objective change.
    pub tol: F,
    /// Halve the step whenever the composite objective increases.
    pub backtracking: bool,
    pub backtrack_factor: F,
    /// Objective / iterate-norm bound beyond which a fixed-step run is
    /// declared divergent.
    pub divergence_cap: F,
}

impl<F: Float> Default for IstaConfig<F> {
    fn default() -> Self {
        IstaConfig {
            step: F::cast(1e-3),
            max_steps: 200_000,
            tol: F::cast(1e-10),
            backtracking: true,
            backtrack_factor: F::cast(0.5),
            divergence_cap: F::cast(1e12),
        }
    }
}

/// L1 proximal operator: componentwise soft-thresholding.
///
/// Minimizes `theta ||u||_1 + 1/2 ||u - v||_2^2` over `u`.
pub fn prox_l1<F: Float>(v: &[F], theta: F) -> Vec<F> {
    v.iter().map(|&vi| soft_threshold(vi, theta)).collect()
}

/// Smallest `alpha` for which the zero vector is a stationary point:
/// `max_i |df/dw_i(0)|`.
pub fn alpha_max_general<F: Float, O: SmoothObjective<F> + ?Sized>(objective: &O) -> F {
    norm_inf(&objective.gradient(&vec![F::zero(); objective.dim()]))
}

fn l1_norm<F: Float>(w: &[F]) -> F {
    w.iter().map(|x| x.abs()).sum()
}

/// One proximal step from `w` with backtracking; returns the accepted
/// iterate, its mismatch, its composite objective, and the (possibly
/// reduced) step size.
#[allow(clippy::too_many_arguments)]
fn prox_step<F: Float, O: SmoothObjective<F> + ?Sized>(
    objective: &O,
    w: &[F],
    grad: &[F],
    comp: F,
    alpha: F,
    mut gamma: F,
    config: &IstaConfig<F>,
    step: usize,
) -> Result<(Vec<F>, F, F, F)> {
    loop {
        let target: Vec<F> = w.iter().zip(grad).map(|(&wi, &gi)| wi - gamma * gi).collect();
        let trial = prox_l1(&target, gamma * alpha);
        let f_trial = objective.value(&trial);
        if f_trial.is_finite() {
            let comp_trial = f_trial + alpha * l1_norm(&trial);
            if !config.backtracking || comp_trial <= comp {
                return Ok((trial, f_trial, comp_trial, gamma));
            }
            // Descent can stall by rounding once the iterate change is below
            // tolerance; accept instead of shrinking gamma to zero.
            let stalled = trial
                .iter()
                .zip(w)
                .all(|(&a, &b)| (a - b).abs() <= config.tol);
            if stalled {
                return Ok((trial, f_trial, comp_trial, gamma));
            }
        } else if !config.backtracking {
            return Err(Error::NonFiniteObjective {
                at: to_f64_vec(&trial),
            });
        }
        gamma *= config.backtrack_factor;
        if gamma < F::min_positive_value() * F::cast(1e6) {
            return Err(Error::NotConverged {
                steps: step,
                last: to_f64_vec(w),
            });
        }
    }
}

/// Proximal gradient iteration for `min_w f(w) + alpha ||w||_1`.
///
/// Stops once either the iterate change or the composite-objective change
/// falls below `config.tol`; the returned iterate is additionally certified
/// to be a proximal fixed point,
/// `||w - prox(w - gamma grad f(w), gamma alpha)||_inf <= 10 * tol`,
/// which the objective-change criterion alone does not guarantee.
pub fn ista_solve<F: Float, O: SmoothObjective<F> + ?Sized>(
    objective: &O,
    alpha: F,
    w0: &[F],
    config: &IstaConfig<F>,
) -> Result<Vec<F>> {
    if w0.len() != objective.dim() {
        return Err(Error::LengthMismatch {
            expected: objective.dim(),
            got: w0.len(),
        });
    }
    let residual_tol = F::cast(10) * config.tol;
    let mut gamma = config.step;
    let mut w = w0.to_vec();
    let f_w = objective.value(&w);
    if !f_w.is_finite() {
        return Err(Error::NonFiniteObjective { at: to_f64_vec(&w) });
    }
    let mut comp = f_w + alpha * l1_norm(&w);

    let mut step = 0;
    while step < config.max_steps {
        step += 1;
        let grad = objective.gradient(&w);
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::NonFiniteObjective { at: to_f64_vec(&w) });
        }
        let (w_next, _f_next, comp_next, gamma_next) =
            prox_step(objective, &w, &grad, comp, alpha, gamma, config, step)?;
        gamma = gamma_next;

        let delta = norm2(
            &w_next
                .iter()
                .zip(&w)
                .map(|(&a, &b)| a - b)
                .collect::<Vec<F>>(),
        );
        let converged = delta < config.tol || (comp_next - comp).abs() < config.tol;
        w = w_next;
        comp = comp_next;

        if converged {
            // Certify the fixed-point residual with one more step; if it is
            // still large the criterion fired prematurely and the probe
            // simply becomes the next iterate.
            step += 1;
            let grad = objective.gradient(&w);
            if grad.iter().any(|g| !g.is_finite()) {
                return Err(Error::NonFiniteObjective { at: to_f64_vec(&w) });
            }
            let (w_probe, _f, comp_probe, gamma_probe) =
                prox_step(objective, &w, &grad, comp, alpha, gamma, config, step)?;
            gamma = gamma_probe;
            let residual = w_probe
                .iter()
                .zip(&w)
                .fold(F::zero(), |m, (&a, &b)| m.max((a - b).abs()));
            if residual <= residual_tol {
                return Ok(w);
            }
            w = w_probe;
            comp = comp_probe;
        }

        if comp > config.divergence_cap || norm2(&w) > config.divergence_cap {
            return Err(Error::Diverged { step });
        }
    }
    Err(Error::NotConverged {
        steps: config.max_steps,
        last: to_f64_vec(&w),
    })
}

/// Warm-started ISTA over the schedule `alpha_l = (1 - l/n_alpha) alpha_0`
/// with `alpha_0 = max_i |df/dw_i(0)|`.
///
/// Knot `l = 0` is the zero solution at `alpha_0`; each subsequent solve
/// starts from the previous solution. Errors are annotated with the failing
/// schedule index.
pub fn pathwise_ista<F: Float, O: SmoothObjective<F> + ?Sized>(
    objective: &O,
    n_alpha: usize,
    config: &IstaConfig<F>,
) -> Result<Path<F>> {
    assert!(n_alpha >= 2, "pathwise ISTA needs at least two alpha values");
    let alpha0 = alpha_max_general(objective);
    let dim = objective.dim();
    let mut w = vec![F::zero(); dim];
    let mut knots = vec![PathKnot {
        alpha: alpha0,
        w: w.clone(),
        active: Vec::new(),
        mismatch: objective.value(&w),
        is_drop_step: false,
    }];
    for l in 1..n_alpha {
        let alpha = (F::one() - F::cast(l) / F::cast(n_alpha)) * alpha0;
        w = ista_solve(objective, alpha, &w, config)
            .map_err(|e| e.at_stage(format!("pathwise ista at schedule index {l}")))?;
        let active: Vec<usize> = (0..dim).filter(|&i| w[i] != F::zero()).collect();
        knots.push(PathKnot {
            alpha,
            w: w.clone(),
            active,
            mismatch: objective.value(&w),
            is_drop_step: false,
        });
    }
    Ok(Path {
        knots,
        early_stopped: false,
    })
}

/// Central finite differences `(f(w + h e_i) - f(w - h e_i)) / 2h`.
pub fn finite_diff_gradient<F: Float, O: SmoothObjective<F> + ?Sized>(
    objective: &O,
    w: &[F],
    h: F,
) -> Result<Vec<F>> {
    let mut grad = Vec::with_capacity(w.len());
    let mut probe = w.to_vec();
    for i in 0..w.len() {
        probe[i] = w[i] + h;
        let fp = objective.value(&probe);
        probe[i] = w[i] - h;
        let fm = objective.value(&probe);
        probe[i] = w[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::NonFiniteObjective { at: to_f64_vec(w) });
        }
        grad.push((fp - fm) / (F::cast(2) * h));
    }
    Ok(grad)
}

/// Outcome of a randomized analytic-vs-finite-difference gradient check.
#[derive(Clone, Debug)]
pub struct GradientCheck<F> {
    pub trials: usize,
    /// Worst relative discrepancy over all trials and coordinates.
    pub max_rel_err: F,
    pub worst_trial: usize,
    pub worst_coord: usize,
    pub pass: bool,
}

/// Pass threshold for [`check_gradient`].
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;

/// Compares the analytic gradient against central finite differences at
/// `trials` random points and reports the worst relative discrepancy.
///
/// Coordinates are sampled uniformly from the objective's probe intervals;
/// the per-coordinate difference step is `1e-6 * max(1, |w_i|)`. Failures
/// are reported, not raised.
pub fn check_gradient<F: Float, O: SmoothObjective<F> + ?Sized>(
    objective: &O,
    trials: usize,
    seed: u64,
) -> GradientCheck<F> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut uniform = move || (rng.next_u64() >> 11) as f64 * 2f64.powi(-53);
    let dim = objective.dim();
    let mut report = GradientCheck {
        trials,
        max_rel_err: F::zero(),
        worst_trial: 0,
        worst_coord: 0,
        pass: true,
    };
    for trial in 0..trials {
        let w: Vec<F> = (0..dim)
            .map(|i| {
                let (lo, hi) = objective.probe_interval(i);
                F::cast(lo + uniform() * (hi - lo))
            })
            .collect();
        let analytic = objective.gradient(&w);
        let mut probe = w.clone();
        for i in 0..dim {
            let h = F::cast(1e-6) * w[i].abs().max(F::one());
            probe[i] = w[i] + h;
            let fp = objective.value(&probe);
            probe[i] = w[i] - h;
            let fm = objective.value(&probe);
            probe[i] = w[i];
            let fd = (fp - fm) / (F::cast(2) * h);
            let denom = analytic[i].abs().max(fd.abs()).max(F::one());
            let rel = (analytic[i] - fd).abs() / denom;
            if !rel.is_finite() || rel > report.max_rel_err {
                report.max_rel_err = rel;
                report.worst_trial = trial;
                report.worst_coord = i;
            }
        }
    }
    report.pass = report.max_rel_err < F::cast(GRADIENT_CHECK_TOL);
    report
}

/// The quadratic mismatch `1/(2n) ||y - X w||_2^2` viewed as a
/// [`SmoothObjective`], for cross-checking the quadratic and general
/// solvers against each other.
#[derive(Clone, Debug)]
pub struct QuadraticObjective<F> {
    problem: QuadraticProblem<F>,
}

impl<F: Float> QuadraticObjective<F> {
    pub fn new(problem: QuadraticProblem<F>) -> Self {
        QuadraticObjective { problem }
    }

    pub fn problem(&self) -> &QuadraticProblem<F> {
        &self.problem
    }
}

impl<F: Float> SmoothObjective<F> for QuadraticObjective<F> {
    fn dim(&self) -> usize {
        self.problem.n_features()
    }

    fn value(&self, w: &[F]) -> F {
        self.problem.mismatch(w)
    }

    fn gradient(&self, w: &[F]) -> Vec<F> {
        self.problem
            .correlations(w)
            .into_iter()
            .map(|c| -c)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Matrix;
    use crate::sparse::{alpha_max_quadratic, cd_solve, SolverConfig};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    struct Paraboloid;

    impl SmoothObjective<f64> for Paraboloid {
        fn dim(&self) -> usize {
            2
        }
        fn value(&self, w: &[f64]) -> f64 {
            // minimum at (2, -1), gradient (-4, 2) at the origin
            (w[0] - 2.0).powi(2) + (w[1] + 1.0).powi(2)
        }
        fn gradient(&self, w: &[f64]) -> Vec<f64> {
            vec![2.0 * (w[0] - 2.0), 2.0 * (w[1] + 1.0)]
        }
    }

    fn identity_objective() -> QuadraticObjective<f64> {
        let p = QuadraticProblem::new(Matrix::identity(2), vec![3.0, 1.0]).unwrap();
        QuadraticObjective::new(p)
    }

    #[test]
    fn prox_examples() {
        assert_eq!(prox_l1(&[3.0, -0.5, -2.0], 1.0), vec![2.0, 0.0, -1.0]);
        let v = vec![0.3, -1.7, 4.2];
        assert_eq!(prox_l1(&v, 0.0), v);
    }

    proptest! {
        #[test]
        fn prox_matches_grid_scan_oracle(
            v in proptest::collection::vec(-3.0f64..3.0, 3),
            theta in 0.0f64..2.0,
        ) {
            let p = prox_l1(&v, theta);
            for i in 0..v.len() {
                // 1-D grid minimization of theta|u| + 1/2 (u - v_i)^2.
                let obj = |u: f64| theta * u.abs() + 0.5 * (u - v[i]).powi(2);
                let mut best = 0.0;
                let mut best_val = obj(0.0);
                let mut u = -4.0;
                while u <= 4.0 {
                    if obj(u) < best_val {
                        best_val = obj(u);
                        best = u;
                    }
                    u += 1e-4;
                }
                prop_assert!((p[i] - best).abs() < 1e-4);
            }
        }
    }

    #[test]
    fn alpha_max_general_examples() {
        assert_eq!(alpha_max_general(&Paraboloid), 4.0);

        let quad = identity_objective();
        assert!((alpha_max_general(&quad) - alpha_max_quadratic(quad.problem())).abs() < 1e-12);

        // At the bound, zero is a fixed point of the update for any step.
        let a0 = alpha_max_general(&quad);
        for gamma in [0.1, 0.5, 1.0] {
            let g = quad.gradient(&[0.0, 0.0]);
            let stepped = prox_l1(&[-gamma * g[0], -gamma * g[1]], gamma * a0);
            assert_eq!(stepped, vec![0.0, 0.0]);
        }

        struct Flat;
        impl SmoothObjective<f64> for Flat {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, w: &[f64]) -> f64 {
                w[0].powi(4)
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                vec![4.0 * w[0].powi(3)]
            }
        }
        assert_eq!(alpha_max_general(&Flat), 0.0);
    }

    #[test]
    fn ista_matches_cd_on_identity_problem() {
        let quad = identity_objective();
        let cfg = IstaConfig {
            step: 1.0,
            ..IstaConfig::default()
        };
        let w = ista_solve(&quad, 0.5, &[0.0, 0.0], &cfg).unwrap();
        let w_cd = cd_solve(quad.problem(), 0.5, None, &SolverConfig::default()).unwrap();
        for (a, b) in w.iter().zip(&w_cd) {
            assert!((a - b).abs() < 1e-6);
        }
        assert_relative_eq!(w[0], 2.0, epsilon = 1e-6);
        assert!(w[1].abs() < 1e-6);
    }

    #[test]
    fn ista_zero_fixed_point_above_alpha_max() {
        let quad = identity_objective();
        let a0 = alpha_max_general(&quad);
        let w = ista_solve(&quad, a0 * 1.01, &[0.0, 0.0], &IstaConfig::default()).unwrap();
        assert_eq!(w, vec![0.0, 0.0]);
    }

    #[test]
    fn ista_fixed_point_residual_certified() {
        let quad = identity_objective();
        let cfg = IstaConfig {
            step: 0.7,
            ..IstaConfig::default()
        };
        let alpha = 0.3;
        let w = ista_solve(&quad, alpha, &[0.0, 0.0], &cfg).unwrap();
        // Residual at any step size not larger than the initial one.
        for gamma in [0.7, 0.35] {
            let g = quad.gradient(&w);
            let target: Vec<f64> = w.iter().zip(&g).map(|(&wi, &gi)| wi - gamma * gi).collect();
            let next = prox_l1(&target, gamma * alpha);
            let residual = w
                .iter()
                .zip(&next)
                .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
            assert!(residual <= 10.0 * cfg.tol, "residual {residual:.3e}");
        }
    }

    #[test]
    fn ista_backtracking_rescues_oversized_step() {
        let quad = identity_objective();
        let cfg = IstaConfig {
            step: 1e6,
            ..IstaConfig::default()
        };
        let w = ista_solve(&quad, 0.5, &[0.0, 0.0], &cfg).unwrap();
        assert_relative_eq!(w[0], 2.0, epsilon = 1e-6);
        // Composite objective never ends above its start value.
        let comp_end = quad.value(&w) + 0.5 * (w[0].abs() + w[1].abs());
        let comp_start = quad.value(&[0.0, 0.0]);
        assert!(comp_end <= comp_start);
    }

    #[test]
    fn ista_composite_descent_is_monotone_per_step() {
        // Observe the iterate sequence through truncated runs; with
        // backtracking every accepted step must not increase f + alpha*l1.
        let quad = identity_objective();
        let alpha = 0.3;
        let composite = |w: &[f64]| quad.value(w) + alpha * (w[0].abs() + w[1].abs());
        let mut prev = composite(&[0.0, 0.0]);
        for k in 1..40 {
            let cfg = IstaConfig {
                step: 100.0,
                max_steps: k,
                ..IstaConfig::default()
            };
            let cur = match ista_solve(&quad, alpha, &[0.0, 0.0], &cfg) {
                Ok(w) => composite(&w),
                Err(Error::NotConverged { last, .. }) => composite(&last),
                Err(e) => panic!("{e}"),
            };
            assert!(
                cur <= prev + 1e-14 * prev.abs().max(1.0),
                "composite rose from {prev} to {cur} at step {k}"
            );
            prev = cur;
        }
    }

    #[test]
    fn ista_fixed_step_diverges_on_oversized_step() {
        let quad = identity_objective();
        let cfg = IstaConfig {
            step: 1e6,
            backtracking: false,
            ..IstaConfig::default()
        };
        let err = ista_solve(&quad, 0.5, &[0.0, 0.0], &cfg).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }), "{err}");
    }

    #[test]
    fn ista_reports_non_finite_objective() {
        struct Hole;
        impl SmoothObjective<f64> for Hole {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, w: &[f64]) -> f64 {
                if w[0] > 1.0 {
                    f64::NAN
                } else {
                    (w[0] - 0.5).powi(2)
                }
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                vec![2.0 * (w[0] - 0.5)]
            }
        }
        let err = ista_solve(&Hole, 0.0, &[2.0], &IstaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NonFiniteObjective { .. }));
    }

    #[test]
    fn pathwise_schedule_and_warm_start() {
        // alpha_max = 1 for this instance.
        let p = QuadraticProblem::new(Matrix::identity(2), vec![2.0, 1.0]).unwrap();
        let quad = QuadraticObjective::new(p);
        assert_eq!(alpha_max_general(&quad), 1.0);
        let cfg = IstaConfig {
            step: 1.0,
            ..IstaConfig::default()
        };
        let path = pathwise_ista(&quad, 4, &cfg).unwrap();
        let alphas: Vec<f64> = path.knots.iter().map(|k| k.alpha).collect();
        assert_eq!(alphas, vec![1.0, 0.75, 0.5, 0.25]);
        for knot in &path.knots {
            // Each knot agrees with coordinate descent at the same alpha.
            let w_cd = cd_solve(quad.problem(), knot.alpha, None, &SolverConfig::default()).unwrap();
            for (a, b) in knot.w.iter().zip(&w_cd) {
                assert!((a - b).abs() < 1e-5);
            }
            // And satisfies the fixed-point residual bound.
            let g = quad.gradient(&knot.w);
            let target: Vec<f64> = knot
                .w
                .iter()
                .zip(&g)
                .map(|(&wi, &gi)| wi - cfg.step * gi)
                .collect();
            let next = prox_l1(&target, cfg.step * knot.alpha);
            let residual = knot
                .w
                .iter()
                .zip(&next)
                .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
            assert!(residual <= 10.0 * cfg.tol);
        }
    }

    #[test]
    fn finite_diff_on_scalar_square() {
        struct Square;
        impl SmoothObjective<f64> for Square {
            fn dim(&self) -> usize {
                1
            }
            fn value(&self, w: &[f64]) -> f64 {
                w[0] * w[0]
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                vec![2.0 * w[0]]
            }
        }
        let g = finite_diff_gradient(&Square, &[3.0], 1e-5).unwrap();
        assert_relative_eq!(g[0], 6.0, epsilon = 1e-8);
    }

    #[test]
    fn finite_diff_exact_on_linear() {
        struct Linear;
        impl SmoothObjective<f64> for Linear {
            fn dim(&self) -> usize {
                2
            }
            fn value(&self, w: &[f64]) -> f64 {
                3.0 * w[0] - 0.5 * w[1]
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                let _ = w;
                vec![3.0, -0.5]
            }
        }
        let g = finite_diff_gradient(&Linear, &[0.3, -1.2], 1e-4).unwrap();
        assert_relative_eq!(g[0], 3.0, epsilon = 1e-11);
        assert_relative_eq!(g[1], -0.5, epsilon = 1e-11);
    }

    #[test]
    fn check_gradient_passes_quadratic_and_catches_fault() {
        let quad = identity_objective();
        let report = check_gradient(&quad, 10, 3);
        assert!(report.pass, "max rel err {:.3e}", report.max_rel_err);
        assert!(report.max_rel_err < 1e-9);

        struct WrongGradient(QuadraticObjective<f64>);
        impl SmoothObjective<f64> for WrongGradient {
            fn dim(&self) -> usize {
                self.0.dim()
            }
            fn value(&self, w: &[f64]) -> f64 {
                self.0.value(w)
            }
            fn gradient(&self, w: &[f64]) -> Vec<f64> {
                self.0.gradient(w).into_iter().map(|g| 2.0 * g).collect()
            }
        }
        let report = check_gradient(&WrongGradient(identity_objective()), 10, 3);
        assert!(!report.pass);
    }
}
