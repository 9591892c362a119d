//! Incompressible hyperelasticity: kinematics, strain-energy libraries,
//! closed-form stress maps, and the model-data mismatch.
//!
//! The strain energy ansatz is a generalized Mooney-Rivlin polynomial in the
//! invariants `I1`, `I2`, optionally extended by one Ogden-type power term
//! `D (l1^d + l2^d + l3^d - 3)` in the principal stretches. Two homogeneous
//! load cases are supported, uniaxial tension/compression (UTC, measured
//! `P11` over `F11`) and simple shear (SS, measured `P12` over `F12 = g`).
//! Stresses come from per-load-case closed forms with the pressure already
//! eliminated; the repeated-eigenvalue degeneracy of the general stretch
//! derivative never arises.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::float::Float;
use crate::linalg::Matrix;
use crate::proximal::SmoothObjective;
use crate::sparse::QuadraticProblem;

/// Homogeneous experiment type.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum LoadCase {
    /// Uniaxial tension/compression; control is the stretch `F11 > 0`.
    Utc,
    /// Simple shear; control is the shear `F12 = g`.
    Ss,
}

/// Deformation state of one sample: invariants and principal stretches for
/// the closed-form deformation gradient of the load case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KinematicState<F> {
    pub load_case: LoadCase,
    pub control: F,
    pub i1: F,
    pub i2: F,
    pub stretches: [F; 3],
}

/// Builds the kinematic state for a load case.
///
/// UTC: `F = diag(l, 1/sqrt(l), 1/sqrt(l))` so `I1 = l^2 + 2/l`,
/// `I2 = 2l + l^-2`. SS: `l1 = (g + sqrt(g^2 + 4)) / 2`, `l2 = 1/l1`,
/// `l3 = 1`, `I1 = I2 = 3 + g^2`. Both satisfy `l1 l2 l3 = 1` by
/// construction.
pub fn kinematics<F: Float>(load_case: LoadCase, control: F) -> Result<KinematicState<F>> {
    match load_case {
        LoadCase::Utc => {
            if control <= F::zero() {
                return Err(Error::NonPositiveStretch(
                    control.to_f64().unwrap_or(f64::NAN),
                ));
            }
            let l = control;
            let lat = F::one() / l.sqrt();
            Ok(KinematicState {
                load_case,
                control,
                i1: l * l + F::cast(2) / l,
                i2: F::cast(2) * l + F::one() / (l * l),
                stretches: [l, lat, lat],
            })
        }
        LoadCase::Ss => {
            let g = control;
            let root = (g * g + F::cast(4)).sqrt();
            let l1 = (g + root) / F::cast(2);
            Ok(KinematicState {
                load_case,
                control,
                i1: F::cast(3) + g * g,
                i2: F::cast(3) + g * g,
                stretches: [l1, F::one() / l1, F::one()],
            })
        }
    }
}

/// One entry of the flat parameter vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Feature {
    /// `(I1 - 3)^i1_exp (I2 - 3)^i2_exp`.
    Mooney { i1_exp: u32, i2_exp: u32 },
    /// Ogden coefficient `D`.
    OgdenCoefficient,
    /// Ogden exponent `delta`.
    OgdenExponent,
}

/// Canonical Mooney exponent sequence: total degree ascending, `I2`
/// exponent ascending within a degree.
fn mooney_exponents(order: usize) -> impl Iterator<Item = (u32, u32)> {
    (1..=order as u32).flat_map(|total| (0..=total).map(move |b| (total - b, b)))
}

/// Strain-energy library: generalized Mooney-Rivlin polynomial up to
/// `mooney_order`, optionally with the Ogden pair `(D, delta)` appended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct HyperelasticLibrary {
    mooney_order: usize,
    include_ogden: bool,
}

impl HyperelasticLibrary {
    pub fn new(mooney_order: usize, include_ogden: bool) -> Self {
        assert!(mooney_order >= 1, "library needs at least order 1");
        HyperelasticLibrary {
            mooney_order,
            include_ogden,
        }
    }

    pub fn mooney_order(&self) -> usize {
        self.mooney_order
    }

    pub fn include_ogden(&self) -> bool {
        self.include_ogden
    }

    /// Number of Mooney features: `sum_{i=1..order} (i + 1)`.
    pub fn mooney_count(&self) -> usize {
        self.mooney_order * (self.mooney_order + 3) / 2
    }

    /// Total parameter count; the Ogden pair occupies the last two slots.
    pub fn n_params(&self) -> usize {
        self.mooney_count() + if self.include_ogden { 2 } else { 0 }
    }

    /// Flat index of `D`, when the library includes the Ogden term.
    pub fn ogden_coefficient_index(&self) -> Option<usize> {
        self.include_ogden.then(|| self.mooney_count())
    }

    /// Flat index of `delta`, when the library includes the Ogden term.
    pub fn ogden_exponent_index(&self) -> Option<usize> {
        self.include_ogden.then(|| self.mooney_count() + 1)
    }

    /// Features in flat parameter order.
    pub fn features(&self) -> Vec<Feature> {
        let mut out: Vec<Feature> = mooney_exponents(self.mooney_order)
            .map(|(a, b)| Feature::Mooney {
                i1_exp: a,
                i2_exp: b,
            })
            .collect();
        if self.include_ogden {
            out.push(Feature::OgdenCoefficient);
            out.push(Feature::OgdenExponent);
        }
        out
    }

    /// Conventional parameter names: `C{i1_exp}{i2_exp}`, then `D`, `delta`.
    pub fn param_names(&self) -> Vec<String> {
        self.features()
            .iter()
            .map(|f| match f {
                Feature::Mooney { i1_exp, i2_exp } => format!("C{i1_exp}{i2_exp}"),
                Feature::OgdenCoefficient => "D".to_string(),
                Feature::OgdenExponent => "delta".to_string(),
            })
            .collect()
    }
}

/// Material parameters in physical (stress) units.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaterialParams<F> {
    /// Mooney coefficients in canonical library order.
    pub mooney: Vec<F>,
    /// Ogden `(D, delta)` when the library includes the term.
    pub ogden: Option<(F, F)>,
}

impl<F: Float> MaterialParams<F> {
    pub fn zeros(library: &HyperelasticLibrary) -> Self {
        MaterialParams {
            mooney: vec![F::zero(); library.mooney_count()],
            ogden: library.include_ogden().then(|| (F::zero(), F::zero())),
        }
    }

    /// Splits a flat solver vector into named parameters.
    pub fn from_flat(library: &HyperelasticLibrary, w: &[F]) -> Result<Self> {
        if w.len() != library.n_params() {
            return Err(Error::LengthMismatch {
                expected: library.n_params(),
                got: w.len(),
            });
        }
        let mc = library.mooney_count();
        Ok(MaterialParams {
            mooney: w[..mc].to_vec(),
            ogden: library.include_ogden().then(|| (w[mc], w[mc + 1])),
        })
    }

    /// Flat vector in library order.
    pub fn to_flat(&self) -> Vec<F> {
        let mut w = self.mooney.clone();
        if let Some((d, delta)) = self.ogden {
            w.push(d);
            w.push(delta);
        }
        w
    }

    /// Number of energy terms: nonzero Mooney coefficients plus one for an
    /// active (non-inert) Ogden pair.
    pub fn n_terms(&self, tol: F) -> usize {
        let mut n = self.mooney.iter().filter(|c| c.abs() > tol).count();
        if let Some((d, delta)) = self.ogden {
            if d.abs() > tol && delta.abs() > tol {
                n += 1;
            }
        }
        n
    }
}

/// Integer power with the convention `x^0 = 1`.
fn ipow<F: Float>(x: F, e: u32) -> F {
    x.powi(e as i32)
}

/// Derivative factor `e * x^(e-1)`, zero when `e = 0`.
fn dpow<F: Float>(x: F, e: u32) -> F {
    if e == 0 {
        F::zero()
    } else {
        F::cast(e) * x.powi(e as i32 - 1)
    }
}

/// Per-unit-coefficient stress contribution of every Mooney feature at the
/// given state, in canonical order.
///
/// The measured component is `P11` for UTC and `P12` for SS. With
/// `W1 = dQ/dI1`, `W2 = dQ/dI2` the pressure-eliminated closed forms are
/// `P11 = 2 (l - l^-2) W1 + 2 (1 - l^-3) W2` and `P12 = 2 g (W1 + W2)`.
pub fn mooney_stress_features<F: Float>(state: &KinematicState<F>, order: usize) -> Vec<F> {
    let q1 = state.i1 - F::cast(3);
    let q2 = state.i2 - F::cast(3);
    let two = F::cast(2);
    let (c1, c2) = match state.load_case {
        LoadCase::Utc => {
            let l = state.control;
            (
                two * (l - F::one() / (l * l)),
                two * (F::one() - F::one() / (l * l * l)),
            )
        }
        LoadCase::Ss => {
            let g = state.control;
            (two * g, two * g)
        }
    };
    mooney_exponents(order)
        .map(|(a, b)| {
            let w1 = dpow(q1, a) * ipow(q2, b);
            let w2 = ipow(q1, a) * dpow(q2, b);
            c1 * w1 + c2 * w2
        })
        .collect()
}

/// Measured stress of the Ogden term `D (l1^d + l2^d + l3^d - 3)`.
///
/// UTC: `P11 = D d (l^(d-1) - l^(-d/2-1))`. SS:
/// `P12 = D d (l1^(d-1) - l1^(-d-1)) dl1/dg`. Exactly zero at the
/// undeformed state and whenever `D = 0` or `d = 0`.
pub fn ogden_stress<F: Float>(state: &KinematicState<F>, d: F, delta: F) -> Result<F> {
    let (p, _, _) = ogden_stress_terms(state, d, delta)?;
    Ok(p)
}

/// Exact partial derivatives of [`ogden_stress`] with respect to `D` and
/// `delta`.
pub fn ogden_stress_partials<F: Float>(
    state: &KinematicState<F>,
    d: F,
    delta: F,
) -> Result<(F, F)> {
    let (_, dp_dd, dp_ddelta) = ogden_stress_terms(state, d, delta)?;
    Ok((dp_dd, dp_ddelta))
}

fn ogden_stress_terms<F: Float>(state: &KinematicState<F>, d: F, delta: F) -> Result<(F, F, F)> {
    let one = F::one();
    match state.load_case {
        LoadCase::Utc => {
            let l = state.control;
            if l <= F::zero() {
                return Err(Error::NonPositiveStretch(l.to_f64().unwrap_or(f64::NAN)));
            }
            let a = l.powf(delta - one);
            let b = l.powf(-delta / F::cast(2) - one);
            let ln_l = l.ln();
            let per_d = delta * (a - b);
            let dp_ddelta = d * ((a - b) + delta * ln_l * (a + b / F::cast(2)));
            Ok((d * per_d, per_d, dp_ddelta))
        }
        LoadCase::Ss => {
            let g = state.control;
            let root = (g * g + F::cast(4)).sqrt();
            let dl1_dg = (one + g / root) / F::cast(2);
            let l1 = state.stretches[0];
            let a = l1.powf(delta - one);
            let b = l1.powf(-delta - one);
            let ln_l1 = l1.ln();
            let per_d = delta * (a - b) * dl1_dg;
            let dp_ddelta = d * dl1_dg * ((a - b) + delta * ln_l1 * (a + b));
            Ok((d * per_d, per_d, dp_ddelta))
        }
    }
}

/// Strain energy density of the full parameter set at a state.
pub fn energy_value<F: Float>(params: &MaterialParams<F>, state: &KinematicState<F>) -> F {
    let q1 = state.i1 - F::cast(3);
    let q2 = state.i2 - F::cast(3);
    let mut w = F::zero();
    for ((a, b), &c) in mooney_exponents(usize::MAX)
        .take(params.mooney.len())
        .zip(&params.mooney)
    {
        if c != F::zero() {
            w += c * ipow(q1, a) * ipow(q2, b);
        }
    }
    if let Some((d, delta)) = params.ogden {
        if d != F::zero() && delta != F::zero() {
            let [l1, l2, l3] = state.stretches;
            w += d * (l1.powf(delta) + l2.powf(delta) + l3.powf(delta) - F::cast(3));
        }
    }
    w
}

/// Measured stress component predicted by the full parameter set.
pub fn model_stress<F: Float>(params: &MaterialParams<F>, state: &KinematicState<F>) -> Result<F> {
    let order = order_for_count(params.mooney.len());
    let feats = mooney_stress_features(state, order);
    let mut p = F::zero();
    for (&c, &f) in params.mooney.iter().zip(&feats) {
        if c != F::zero() {
            p += c * f;
        }
    }
    if let Some((d, delta)) = params.ogden {
        p += ogden_stress(state, d, delta)?;
    }
    Ok(p)
}

fn order_for_count(count: usize) -> usize {
    let mut order = 0;
    while order * (order + 3) / 2 < count {
        order += 1;
    }
    assert_eq!(
        order * (order + 3) / 2,
        count,
        "mooney coefficient count {count} does not match any polynomial order"
    );
    order
}

/// Paired stress-strain measurements for the two load cases, with the
/// normalizers `P11_max`, `P12_max` recomputed from the stored samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<F> {
    utc: Vec<(F, F)>,
    ss: Vec<(F, F)>,
    p11_max: F,
    p12_max: F,
}

impl<F: Float> Dataset<F> {
    /// Validates samples (positive stretches, at least one sample overall)
    /// and computes the stress normalizers.
    pub fn new(utc: Vec<(F, F)>, ss: Vec<(F, F)>) -> Result<Self> {
        if utc.is_empty() && ss.is_empty() {
            return Err(Error::EmptyDataset);
        }
        for &(f11, _) in &utc {
            if f11 <= F::zero() {
                return Err(Error::NonPositiveStretch(f11.to_f64().unwrap_or(f64::NAN)));
            }
        }
        let max_abs = |v: &[(F, F)]| {
            v.iter()
                .fold(F::zero(), |m, &(_, p)| m.max(p.abs()))
        };
        let p11_max = max_abs(&utc);
        let p12_max = max_abs(&ss);
        Ok(Dataset {
            utc,
            ss,
            p11_max,
            p12_max,
        })
    }

    pub fn utc(&self) -> &[(F, F)] {
        &self.utc
    }

    pub fn ss(&self) -> &[(F, F)] {
        &self.ss
    }

    pub fn p11_max(&self) -> F {
        self.p11_max
    }

    pub fn p12_max(&self) -> F {
        self.p12_max
    }

    pub fn n_samples(&self) -> usize {
        self.utc.len() + self.ss.len()
    }

    /// Normalizer actually used in divisions; degenerate all-zero stresses
    /// fall back to one so zero rows stay zero instead of NaN.
    fn scale(max: F) -> F {
        if max > F::zero() {
            max
        } else {
            F::one()
        }
    }

    fn utc_scale(&self) -> F {
        Self::scale(self.p11_max)
    }

    fn ss_scale(&self) -> F {
        Self::scale(self.p12_max)
    }
}

/// Assembles the normalized linear regression problem for a Mooney library
/// of the given order.
///
/// Row `(i, k)` is the stress contribution of feature `k` at sample `i`,
/// divided by the load case's maximum stress; the measured stresses are
/// normalized the same way. Columns are then unit-normalized with the
/// scales recorded on the returned problem.
pub fn assemble_linear_problem<F: Float>(
    dataset: &Dataset<F>,
    order: usize,
) -> Result<QuadraticProblem<F>> {
    let mut rows = Vec::with_capacity(dataset.n_samples());
    let mut y = Vec::with_capacity(dataset.n_samples());
    let utc_scale = dataset.utc_scale();
    for &(f11, p11) in dataset.utc() {
        let state = kinematics(LoadCase::Utc, f11)?;
        let mut row = mooney_stress_features(&state, order);
        for v in &mut row {
            *v /= utc_scale;
        }
        rows.push(row);
        y.push(p11 / utc_scale);
    }
    let ss_scale = dataset.ss_scale();
    for &(f12, p12) in dataset.ss() {
        let state = kinematics(LoadCase::Ss, f12)?;
        let mut row = mooney_stress_features(&state, order);
        for v in &mut row {
            *v /= ss_scale;
        }
        rows.push(row);
        y.push(p12 / ss_scale);
    }
    QuadraticProblem::new(Matrix::from_rows(rows), y)
}

/// Normalized model-data mismatch over both load cases as a
/// [`SmoothObjective`] with an analytic gradient:
/// `f(w) = 1/(2N) sum [(P_model - P_data) / P_max]^2`.
#[derive(Clone, Debug)]
pub struct MismatchObjective<F> {
    library: HyperelasticLibrary,
    samples: Vec<Sample<F>>,
    inv_n: F,
}

#[derive(Clone, Debug)]
struct Sample<F> {
    state: KinematicState<F>,
    mooney: Vec<F>,
    stress: F,
    scale: F,
}

/// Builds the nonlinear mismatch objective for a dataset and library.
pub fn nonlinear_objective<F: Float>(
    dataset: &Dataset<F>,
    library: HyperelasticLibrary,
) -> Result<MismatchObjective<F>> {
    let mut samples = Vec::with_capacity(dataset.n_samples());
    for &(f11, p11) in dataset.utc() {
        let state = kinematics(LoadCase::Utc, f11)?;
        samples.push(Sample {
            mooney: mooney_stress_features(&state, library.mooney_order()),
            state,
            stress: p11,
            scale: dataset.utc_scale(),
        });
    }
    for &(f12, p12) in dataset.ss() {
        let state = kinematics(LoadCase::Ss, f12)?;
        samples.push(Sample {
            mooney: mooney_stress_features(&state, library.mooney_order()),
            state,
            stress: p12,
            scale: dataset.ss_scale(),
        });
    }
    Ok(MismatchObjective {
        library,
        inv_n: F::one() / F::cast(samples.len()),
        samples,
    })
}

impl<F: Float> MismatchObjective<F> {
    pub fn library(&self) -> &HyperelasticLibrary {
        &self.library
    }

    fn ogden_coords(&self, w: &[F]) -> Option<(F, F)> {
        self.library
            .ogden_coefficient_index()
            .map(|i| (w[i], w[i + 1]))
    }
}

impl<F: Float> SmoothObjective<F> for MismatchObjective<F> {
    fn dim(&self) -> usize {
        self.library.n_params()
    }

    fn value(&self, w: &[F]) -> F {
        let ogden = self.ogden_coords(w);
        let mut acc = F::zero();
        for sample in &self.samples {
            let mut p = F::zero();
            for (&wk, &fk) in w.iter().zip(&sample.mooney) {
                p += wk * fk;
            }
            if let Some((d, delta)) = ogden {
                match ogden_stress_terms(&sample.state, d, delta) {
                    Ok((po, _, _)) => p += po,
                    Err(_) => return F::nan(),
                }
            }
            let r = (p - sample.stress) / sample.scale;
            acc += r * r;
        }
        acc * self.inv_n / F::cast(2)
    }

    fn gradient(&self, w: &[F]) -> Vec<F> {
        let ogden = self.ogden_coords(w);
        let mut grad = vec![F::zero(); self.dim()];
        for sample in &self.samples {
            let mut p = F::zero();
            for (&wk, &fk) in w.iter().zip(&sample.mooney) {
                p += wk * fk;
            }
            let ogden_terms = ogden.map(|(d, delta)| ogden_stress_terms(&sample.state, d, delta));
            if let Some(Ok((po, _, _))) = ogden_terms {
                p += po;
            } else if ogden_terms.is_some() {
                return vec![F::nan(); self.dim()];
            }
            let r = (p - sample.stress) / (sample.scale * sample.scale) * self.inv_n;
            for (gk, &fk) in grad.iter_mut().zip(&sample.mooney) {
                *gk += r * fk;
            }
            if let Some(Ok((_, dp_dd, dp_ddelta))) = ogden_terms {
                let mc = self.library.mooney_count();
                grad[mc] += r * dp_dd;
                grad[mc + 1] += r * dp_ddelta;
            }
        }
        grad
    }

    fn probe_interval(&self, coord: usize) -> (f64, f64) {
        // The Ogden exponent stays in a positive band away from the inert
        // delta = 0 configuration.
        if Some(coord) == self.library.ogden_exponent_index() {
            (0.5, 9.0)
        } else {
            (-2.0, 2.0)
        }
    }
}
