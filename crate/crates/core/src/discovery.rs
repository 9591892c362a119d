//! End-to-end discovery pipelines.
//!
//! A pipeline assembles the regression problem for a dataset, runs a solver
//! or path algorithm, selects one knot, re-estimates the selected support
//! without regularization (the debias refit, which undoes L1 shrinkage
//! without changing the model structure), and renders the discovered strain
//! energy as a canonical string.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::hyperelastic::{
    assemble_linear_problem, nonlinear_objective, Dataset, Feature, HyperelasticLibrary,
    MaterialParams, MismatchObjective,
};
use crate::path::{Path, PathKnot};
use crate::proximal::{ista_solve, pathwise_ista, IstaConfig, SmoothObjective};
use crate::sparse::{cd_solve, ols_solve, rescale_solution, LarsStep, SolverConfig};

/// How to pick one knot from a path.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectionCriterion<F> {
    /// Last knot whose support has at most this many parameters.
    SparsityTarget(usize),
    /// First knot whose successor improves the mismatch by a relative
    /// factor below this threshold (0.05 mirrors "barely decreasing").
    MismatchPlateau(F),
}

/// Applies a selection criterion to a path; ties break to the smallest
/// index.
pub fn select_knot<F: Float>(path: &Path<F>, criterion: &SelectionCriterion<F>) -> Result<usize> {
    if path.is_empty() {
        return Err(Error::NoQualifyingKnot);
    }
    match *criterion {
        SelectionCriterion::SparsityTarget(k) => path
            .knots
            .iter()
            .rposition(|knot| knot.active.len() <= k)
            .ok_or(Error::NoQualifyingKnot),
        SelectionCriterion::MismatchPlateau(r) => {
            for (i, pair) in path.knots.windows(2).enumerate() {
                let (cur, next) = (pair[0].mismatch, pair[1].mismatch);
                let rel_drop = if cur > F::zero() {
                    (cur - next) / cur
                } else {
                    F::zero()
                };
                if rel_drop < r {
                    return Ok(i);
                }
            }
            Err(Error::NoQualifyingKnot)
        }
    }
}

/// Renders the nonzero terms of a parameter set as a canonical energy
/// expression, e.g. `40.00*(I1-3) + 10.00*(I1-3)^2`.
///
/// Coefficients print with two decimals; unit exponents are elided; inert
/// terms (zero coefficient, or an Ogden pair with `D = 0` or `delta = 0`)
/// are omitted. An all-zero parameter set renders as `0.00`.
pub fn format_energy<F: Float>(params: &MaterialParams<F>, library: &HyperelasticLibrary) -> String {
    let tol = F::cast(1e-12);
    let mut rendered: Vec<(bool, String)> = Vec::new();
    let fmt_coeff = |c: F| format!("{:.2}", c.to_f64().unwrap_or(f64::NAN).abs());
    for (feature, &c) in library.features().iter().zip(&params.mooney) {
        if c.abs() <= tol {
            continue;
        }
        if let Feature::Mooney { i1_exp, i2_exp } = feature {
            let mut term = fmt_coeff(c);
            for (base, e) in [("(I1-3)", i1_exp), ("(I2-3)", i2_exp)] {
                match e {
                    0 => {}
                    1 => term.push_str(&format!("*{base}")),
                    _ => term.push_str(&format!("*{base}^{e}")),
                }
            }
            rendered.push((c < F::zero(), term));
        }
    }
    if let Some((d, delta)) = params.ogden {
        if d.abs() > tol && delta.abs() > tol {
            let e = format!("{:.2}", delta.to_f64().unwrap_or(f64::NAN));
            rendered.push((
                d < F::zero(),
                format!("{}*(l1^{e} + l2^{e} + l3^{e} - 3)", fmt_coeff(d)),
            ));
        }
    }
    if rendered.is_empty() {
        return "0.00".to_string();
    }
    let mut out = String::new();
    for (i, (negative, term)) in rendered.iter().enumerate() {
        if i == 0 {
            if *negative {
                out.push('-');
            }
        } else {
            out.push_str(if *negative { " - " } else { " + " });
        }
        out.push_str(term);
    }
    out
}

/// Objective wrapper that freezes off-support coordinates by zeroing their
/// gradient entries; with a zero start they never move.
struct FrozenObjective<'a, F> {
    inner: &'a MismatchObjective<F>,
    free: Vec<bool>,
}

impl<F: Float> SmoothObjective<F> for FrozenObjective<'_, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, w: &[F]) -> F {
        self.inner.value(w)
    }

    fn gradient(&self, w: &[F]) -> Vec<F> {
        let mut g = self.inner.gradient(w);
        for (gi, &f) in g.iter_mut().zip(&self.free) {
            if !f {
                *gi = F::zero();
            }
        }
        g
    }

    fn probe_interval(&self, coord: usize) -> (f64, f64) {
        self.inner.probe_interval(coord)
    }
}

/// Unregularized re-estimation on a fixed support.
///
/// A Mooney-only library refits by restricted least squares (rescaled back
/// to physical parameters); a library with the Ogden pair refits by running
/// the proximal iteration at `alpha = 0` with the off-support coordinates
/// frozen at zero, warm-started from `warm` (the selected knot) when given.
/// The Ogden coefficient and exponent must appear in the support together.
pub fn debias_refit<F: Float>(
    dataset: &Dataset<F>,
    library: &HyperelasticLibrary,
    support: &[usize],
    warm: Option<&[F]>,
) -> Result<(MaterialParams<F>, F)> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    if let (Some(di), Some(ei)) = (
        library.ogden_coefficient_index(),
        library.ogden_exponent_index(),
    ) {
        if support.contains(&di) != support.contains(&ei) {
            return Err(Error::SplitOgdenPair);
        }
    }

    if !library.include_ogden() {
        let problem = assemble_linear_problem(dataset, library.mooney_order())?;
        let w = ols_solve(&problem, Some(support))?;
        let mismatch = problem.mismatch(&w);
        let params = MaterialParams::from_flat(library, &rescale_solution(&w, problem.column_scales())?)?;
        return Ok((params, mismatch));
    }

    let objective = nonlinear_objective(dataset, *library)?;
    let mut free = vec![false; library.n_params()];
    for &i in support {
        free[i] = true;
    }
    let mut w0 = vec![F::zero(); library.n_params()];
    for &i in support {
        w0[i] = warm.map_or(F::one(), |w| w[i]);
    }
    let frozen = FrozenObjective {
        inner: &objective,
        free,
    };
    // Generous initial step; the backtracking line search calibrates it
    // once and keeps it (the normalized mismatch is flat in stress units).
    let config = IstaConfig {
        step: F::cast(1e6),
        max_steps: 2_000_000,
        ..IstaConfig::default()
    };
    let w = ista_solve(&frozen, F::zero(), &w0, &config)?;
    let mismatch = objective.value(&w);
    Ok((MaterialParams::from_flat(library, &w)?, mismatch))
}

/// Result of the debias refit.
#[derive(Clone, Debug, Serialize)]
pub struct RefitResult<F> {
    pub params: MaterialParams<F>,
    pub mismatch: F,
}

/// Full record of one discovery run.
#[derive(Clone, Debug, Serialize)]
pub struct DiscoveryReport<F> {
    pub library: HyperelasticLibrary,
    pub method: String,
    /// Knots in physical-parameter space.
    pub path: Vec<PathKnot<F>>,
    pub selected: usize,
    pub refit: RefitResult<F>,
    pub energy: String,
}

impl<F: Float + Serialize> DiscoveryReport<F> {
    /// Deterministic JSON serialization.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Path as CSV for plotting: `alpha,<param names...>,mismatch`.
    pub fn path_csv(&self) -> String {
        path_to_csv(&self.library, &self.path)
    }
}

/// CSV rendering of path knots with the library's parameter names.
pub fn path_to_csv<F: Float>(library: &HyperelasticLibrary, knots: &[PathKnot<F>]) -> String {
    let mut out = String::from("alpha");
    for name in library.param_names() {
        out.push(',');
        out.push_str(&name);
    }
    out.push_str(",mismatch\n");
    for knot in knots {
        out.push_str(&format!("{:e}", knot.alpha));
        for v in &knot.w {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{:e}\n", knot.mismatch));
    }
    out
}

/// Solver choice for the Mooney (linear) library.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LinearMethod<F> {
    /// Coordinate descent at a fixed `alpha`; yields a one-knot path.
    Cd { alpha: F },
    /// Full LARS-LASSO regularization path.
    LarsLasso,
}

/// Initial guess for the nonlinear solvers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartPoint {
    Zeros,
    Ones,
    /// Mooney coefficients from the restricted linear least squares fit,
    /// Ogden pair at zero.
    Ols,
}

/// Solver choice for the nonlinear library.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NonlinearMethod<F> {
    Ista { alpha: F, start: StartPoint },
    Pathwise { n_alpha: usize },
}

/// LARS-LASSO path for a dataset, rescaled to physical parameters.
pub fn linear_lasso_path<F: Float>(
    dataset: &Dataset<F>,
    order: usize,
) -> Result<(HyperelasticLibrary, Path<F>, Vec<LarsStep<F>>)> {
    let library = HyperelasticLibrary::new(order, false);
    let problem = assemble_linear_problem(dataset, order).map_err(|e| e.at_stage("assemble"))?;
    let config = SolverConfig::default();
    let (path, steps) = crate::sparse::lars_lasso_path_traced(&problem, &config)
        .map_err(|e| e.at_stage("lars-lasso path"))?;
    let scales = problem.column_scales();
    let knots = path
        .knots
        .into_iter()
        .map(|k| {
            Ok(PathKnot {
                w: rescale_solution(&k.w, scales)?,
                ..k
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        library,
        Path {
            knots,
            early_stopped: path.early_stopped,
        },
        steps,
    ))
}

/// Pathwise ISTA knots for a dataset and library (already in physical
/// parameters).
pub fn nonlinear_pathwise<F: Float>(
    dataset: &Dataset<F>,
    library: HyperelasticLibrary,
    n_alpha: usize,
    config: &IstaConfig<F>,
) -> Result<Path<F>> {
    let objective = nonlinear_objective(dataset, library).map_err(|e| e.at_stage("objective"))?;
    pathwise_ista(&objective, n_alpha, config)
}

fn zero_model_report<F: Float>(
    library: HyperelasticLibrary,
    method: String,
    path: Path<F>,
    selected: usize,
) -> DiscoveryReport<F> {
    let params = MaterialParams::zeros(&library);
    let mismatch = path.knots[selected].mismatch;
    let energy = format_energy(&params, &library);
    DiscoveryReport {
        library,
        method,
        path: path.knots,
        selected,
        refit: RefitResult { params, mismatch },
        energy,
    }
}

/// Linear-library discovery: assemble, solve (CD or LARS-LASSO), rescale,
/// select, refit, format.
pub fn run_linear_discovery<F: Float>(
    dataset: &Dataset<F>,
    order: usize,
    method: &LinearMethod<F>,
    selection: &SelectionCriterion<F>,
) -> Result<DiscoveryReport<F>> {
    let library = HyperelasticLibrary::new(order, false);
    let config = SolverConfig::default();
    let (method_name, path) = match *method {
        LinearMethod::Cd { alpha } => {
            let problem =
                assemble_linear_problem(dataset, order).map_err(|e| e.at_stage("assemble"))?;
            let w = cd_solve(&problem, alpha, None, &config).map_err(|e| e.at_stage("cd solve"))?;
            let active: Vec<usize> = (0..w.len())
                .filter(|&i| w[i].abs() > config.equality_tol)
                .collect();
            let knot = PathKnot {
                alpha,
                mismatch: problem.mismatch(&w),
                w: rescale_solution(&w, problem.column_scales())?,
                active,
                is_drop_step: false,
            };
            (
                format!("cd(alpha={alpha})"),
                Path {
                    knots: vec![knot],
                    early_stopped: false,
                },
            )
        }
        LinearMethod::LarsLasso => {
            let (_, path, _) = linear_lasso_path(dataset, order)?;
            ("lars-lasso".to_string(), path)
        }
    };
    let selected = select_knot(&path, selection).map_err(|e| e.at_stage("knot selection"))?;
    let support = path.knots[selected].active.clone();
    if support.is_empty() {
        return Ok(zero_model_report(library, method_name, path, selected));
    }
    let (params, mismatch) =
        debias_refit(dataset, &library, &support, None).map_err(|e| e.at_stage("debias refit"))?;
    let energy = format_energy(&params, &library);
    Ok(DiscoveryReport {
        library,
        method: method_name,
        path: path.knots,
        selected,
        refit: RefitResult { params, mismatch },
        energy,
    })
}

/// Nonlinear-library discovery via ISTA or pathwise ISTA.
///
/// The selected knot's support is normalized before the refit: the Ogden
/// pair participates only when both `D` and `delta` are nonzero there
/// (otherwise the term is inert and reported as dropped).
pub fn run_nonlinear_discovery<F: Float>(
    dataset: &Dataset<F>,
    library: HyperelasticLibrary,
    method: &NonlinearMethod<F>,
    selection: &SelectionCriterion<F>,
    config: &IstaConfig<F>,
) -> Result<DiscoveryReport<F>> {
    let objective = nonlinear_objective(dataset, library).map_err(|e| e.at_stage("objective"))?;
    let (method_name, path) = match *method {
        NonlinearMethod::Ista { alpha, start } => {
            let w0 = match start {
                StartPoint::Zeros => vec![F::zero(); library.n_params()],
                StartPoint::Ones => vec![F::one(); library.n_params()],
                StartPoint::Ols => {
                    let problem = assemble_linear_problem(dataset, library.mooney_order())
                        .map_err(|e| e.at_stage("ols start"))?;
                    let w = ols_solve(&problem, None).map_err(|e| e.at_stage("ols start"))?;
                    let mut w0 = rescale_solution(&w, problem.column_scales())?;
                    w0.resize(library.n_params(), F::zero());
                    w0
                }
            };
            let w = ista_solve(&objective, alpha, &w0, config)
                .map_err(|e| e.at_stage("ista solve"))?;
            let active: Vec<usize> = (0..w.len()).filter(|&i| w[i] != F::zero()).collect();
            let knot = PathKnot {
                alpha,
                mismatch: objective.value(&w),
                w,
                active,
                is_drop_step: false,
            };
            let start_name = match start {
                StartPoint::Zeros => "zeros",
                StartPoint::Ones => "ones",
                StartPoint::Ols => "ols",
            };
            (
                format!("ista(alpha={alpha}, w0={start_name})"),
                Path {
                    knots: vec![knot],
                    early_stopped: false,
                },
            )
        }
        NonlinearMethod::Pathwise { n_alpha } => {
            let path = pathwise_ista(&objective, n_alpha, config)?;
            (format!("pathwise(n_alpha={n_alpha})"), path)
        }
    };
    let selected = select_knot(&path, selection).map_err(|e| e.at_stage("knot selection"))?;
    let knot = &path.knots[selected];
    let tol = F::cast(1e-12);
    let mut support: Vec<usize> = Vec::new();
    let ogden_idx = library.ogden_coefficient_index();
    for &i in &knot.active {
        if let Some(di) = ogden_idx {
            if i >= di {
                continue; // handled as a pair below
            }
        }
        if knot.w[i].abs() > tol {
            support.push(i);
        }
    }
    if let (Some(di), Some(ei)) = (ogden_idx, library.ogden_exponent_index()) {
        if knot.w[di].abs() > tol && knot.w[ei].abs() > tol {
            support.push(di);
            support.push(ei);
        }
    }
    if support.is_empty() {
        return Ok(zero_model_report(library, method_name, path, selected));
    }
    let (params, mismatch) = debias_refit(dataset, &library, &support, Some(&knot.w))
        .map_err(|e| e.at_stage("debias refit"))?;
    let energy = format_energy(&params, &library);
    Ok(DiscoveryReport {
        library,
        method: method_name,
        path: path.knots,
        selected,
        refit: RefitResult { params, mismatch },
        energy,
    })
}
