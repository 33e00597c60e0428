//! Loops on `T³`, the normalized dual flow of a closed non-degenerate
//! 1-form, and the flow homotopy that makes a loop transverse to (or
//! contained in) the foliation `ker α`.

mod curve;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{certify_positive, FieldEvaluator, Form, JointEvaluator, Point, ScalarField};

pub use curve::{torus_distance, ParamCurve};

/// Default fixed RK4 step.
pub const DEFAULT_STEP: f64 = 1.0 / 4096.0;
/// `α` counts as closed when `dα` has no coefficient above this.
pub const CLOSED_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("expected a 1-form, found degree {0}")]
    NotOneForm(usize),
    #[error("α is not closed (residual {0:e})")]
    NotClosed(f64),
    #[error("α may vanish: certified lower bound of |α|² is {0:e}")]
    Degenerate(f64),
    #[error("step collapse at {point:?}, flow time {time}: |α|² = {norm_sq:e}")]
    StepCollapse { point: Point, time: f64, norm_sq: f64 },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// `α = c + df` with `f` periodic, so `P ↦ c·P + f(P)` is a primitive of
/// `α` on the universal cover.
#[derive(Clone, Debug)]
pub struct AlphaPotential {
    constant: [f64; 3],
    periodic: FieldEvaluator,
}

impl AlphaPotential {
    /// Reads off `f̂_k = â_j(k)/(2πi·k_j)` using the largest `|k_j|`.
    pub fn new(alpha: &Form) -> Result<Self, FlowError> {
        if alpha.degree() != 1 {
            return Err(FlowError::NotOneForm(alpha.degree()));
        }
        let comps = alpha.components();
        let constant = [comps[0].mean(), comps[1].mean(), comps[2].mean()];
        let mut modes = Vec::new();
        for freq in alpha_frequencies(alpha) {
            let j = (0..3).max_by_key(|&j| freq[j].abs()).unwrap();
            let c = comps[j].coeff(freq) / Complex64::new(0.0, TAU * freq[j] as f64);
            modes.push((freq, c));
        }
        let f = ScalarField::from_coefficients(alpha.truncation(), modes).expect("Hermitian by construction");
        Ok(Self { constant, periodic: f.evaluator() })
    }

    /// Value at a lifted point.
    pub fn value(&self, p: Point) -> f64 {
        self.constant[0] * p[0] + self.constant[1] * p[1] + self.constant[2] * p[2] + self.periodic.value(p)
    }

    pub fn constant_part(&self) -> [f64; 3] {
        self.constant
    }
}

fn alpha_frequencies(alpha: &Form) -> Vec<[i64; 3]> {
    let mut freqs: Vec<[i64; 3]> =
        alpha.components().iter().flat_map(|c| c.nonzero().map(|(f, _)| f)).filter(|f| *f != [0, 0, 0]).collect();
    freqs.sort_unstable();
    freqs.dedup();
    freqs
}

/// The flat-metric dual `v = α♯/|α|²` of a closed non-degenerate 1-form,
/// normalized so `α(v) = 1`.
#[derive(Clone, Debug)]
pub struct FlowField {
    alpha: Form,
    comps: JointEvaluator,
    constant: Option<[f64; 3]>,
    potential: AlphaPotential,
    norm_floor: f64,
    step: f64,
}

impl FlowField {
    /// Validates closedness and certifies `|α|² > 0`.
    pub fn new(alpha: &Form) -> Result<Self, FlowError> {
        if alpha.degree() != 1 {
            return Err(FlowError::NotOneForm(alpha.degree()));
        }
        let residual = alpha.exterior_derivative().max_abs_coeff();
        if residual > CLOSED_TOL * alpha.max_abs_coeff().max(1.0) {
            return Err(FlowError::NotClosed(residual));
        }
        let comps = alpha.components();
        let (constant, norm_floor) = if alpha.is_constant() {
            let c = [comps[0].mean(), comps[1].mean(), comps[2].mean()];
            let n2 = c[0] * c[0] + c[1] * c[1] + c[2] * c[2];
            if n2 <= 0.0 {
                return Err(FlowError::Degenerate(n2));
            }
            (Some(c), n2)
        } else {
            let norm_sq = comps.iter().fold(ScalarField::zero(2 * alpha.truncation()), |acc, c| &acc + &c.mul_exact(c));
            let bound = certify_positive(&norm_sq, 64, 0.0);
            if bound.certified_lower <= 0.0 {
                return Err(FlowError::Degenerate(bound.certified_lower));
            }
            (None, bound.certified_lower)
        };
        Ok(Self {
            alpha: alpha.clone(),
            comps: one_form_evaluator(alpha),
            constant,
            potential: AlphaPotential::new(alpha)?,
            norm_floor,
            step: DEFAULT_STEP,
        })
    }

    pub fn with_step(mut self, step: f64) -> Result<Self, FlowError> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(FlowError::InvalidStep(step));
        }
        self.step = step;
        Ok(self)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn alpha(&self) -> &Form {
        &self.alpha
    }

    pub fn potential(&self) -> &AlphaPotential {
        &self.potential
    }

    /// `α` at `p` as a covector.
    pub fn alpha_at(&self, p: Point) -> [f64; 3] {
        match self.constant {
            Some(c) => c,
            None => {
                let mut a = [0.0; 3];
                self.comps.values_into(p, &mut a);
                a
            }
        }
    }

    /// `(v(p), |α(p)|²)`.
    fn vector_and_norm(&self, p: Point) -> ([f64; 3], f64) {
        let a = self.alpha_at(p);
        let n2 = a[0] * a[0] + a[1] * a[1] + a[2] * a[2];
        ([a[0] / n2, a[1] / n2, a[2] / n2], n2)
    }

    pub fn vector(&self, p: Point) -> [f64; 3] {
        self.vector_and_norm(p).0
    }
}

fn one_form_evaluator(alpha: &Form) -> JointEvaluator {
    let c = alpha.components();
    JointEvaluator::new(&[&c[0], &c[1], &c[2]])
}

/// `α_p(t)`.
fn pair(comps: &JointEvaluator, p: Point, t: &[f64; 3]) -> f64 {
    let mut a = [0.0; 3];
    comps.values_into(p, &mut a);
    a[0] * t[0] + a[1] * t[1] + a[2] * t[2]
}

/// `F(p, s)` with `∂_s F = −v(F)`, `F(p,0) = p`, on the universal cover.
/// Exact for constant `α`; fixed-step RK4 otherwise.
pub fn flow_map(p: Point, s: f64, field: &FlowField) -> Result<Point, FlowError> {
    flow_with_step(p, s, field, field.step)
}

fn flow_with_step(p: Point, s: f64, field: &FlowField, step: f64) -> Result<Point, FlowError> {
    if let Some(c) = field.constant {
        let n2 = field.norm_floor;
        return Ok([p[0] - s * c[0] / n2, p[1] - s * c[1] / n2, p[2] - s * c[2] / n2]);
    }
    if s == 0.0 {
        return Ok(p);
    }
    let steps = (s.abs() / step).ceil().max(1.0) as usize;
    let h = s / steps as f64;
    let floor = 1e-6 * field.norm_floor;
    let rhs = |x: Point, t: f64| -> Result<[f64; 3], FlowError> {
        let (v, n2) = field.vector_and_norm(x);
        if !(n2 > floor) {
            return Err(FlowError::StepCollapse { point: x, time: t, norm_sq: n2 });
        }
        Ok([-v[0], -v[1], -v[2]])
    };
    let axpy = |x: Point, a: f64, k: [f64; 3]| [x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]];
    let mut x = p;
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = rhs(x, t)?;
        let k2 = rhs(axpy(x, 0.5 * h, k1), t)?;
        let k3 = rhs(axpy(x, 0.5 * h, k2), t)?;
        let k4 = rhs(axpy(x, h, k3), t)?;
        for d in 0..3 {
            x[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
        }
    }
    Ok(x)
}

/// Step-halving error estimate for `F(p, s)`.
pub fn flow_error_estimate(p: Point, s: f64, field: &FlowField) -> Result<f64, FlowError> {
    if field.constant.is_some() {
        return Ok(0.0);
    }
    let coarse = flow_with_step(p, s, field, field.step)?;
    let fine = flow_with_step(p, s, field, 0.5 * field.step)?;
    Ok(torus_distance(coarse, fine) * 16.0 / 15.0)
}

/// `∫_γ α`. Exactly `α·z` for constant `α`; otherwise the periodic
/// trapezoid rule with spectrally differentiated tangents.
pub fn alpha_period(curve: &ParamCurve, alpha: &Form) -> f64 {
    let z = curve.homology().map(|v| v as f64);
    if alpha.is_constant() {
        let c = alpha.components();
        return c[0].mean() * z[0] + c[1].mean() * z[1] + c[2].mean() * z[2];
    }
    let comps = one_form_evaluator(alpha);
    let tangents = curve.tangents();
    let total: f64 = curve
        .points()
        .par_iter()
        .zip(tangents.par_iter())
        .map(|(p, t)| pair(&comps, *p, t))
        .collect::<Vec<_>>()
        .iter()
        .sum();
    total / curve.len() as f64
}

/// Output of [`transversalize`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Transversalized {
    pub curve: ParamCurve,
    /// `m = ∫_γ α`.
    pub m: f64,
    /// `Φ(tᵢ) = ∫_{η|[0,tᵢ]} α` with `η(t) = F(γ(t), mt)`.
    pub phi: Vec<f64>,
    /// `Φ(1)`, zero in exact arithmetic.
    pub phi_end: f64,
    /// `max |Φ(t) − (∫_{γ|[0,t]} α − mt)|`.
    pub identity_residual: f64,
    /// Step-halving estimate of the ODE error on a subset of samples.
    pub ode_error_estimate: f64,
    /// Samples where the output tangent has speed below `ZERO_SPEED`.
    pub zero_speed: Vec<usize>,
    /// Pairs `(i, j, distance)` of samples closer than the requested
    /// distance but far apart along the curve.
    pub near_self_intersections: Vec<(usize, usize, f64)>,
}

/// Speed below which a sample of a transversalized loop is reported.
pub const ZERO_SPEED: f64 = 1e-8;
const MAX_REPORTED_PAIRS: usize = 64;
const RICHARDSON_SAMPLES: usize = 16;

/// `γ̃(t) = F(γ(t), Φ(t))`: transverse with `α(γ̃′) = m` when `m ≠ 0`,
/// and inside one leaf when `m = 0`. `min_separation` controls the
/// near-self-intersection report.
pub fn transversalize(
    curve: &ParamCurve,
    field: &FlowField,
    min_separation: f64,
) -> Result<Transversalized, FlowError> {
    let m = alpha_period(curve, field.alpha());
    let n = curve.len();
    let lifted = curve.lifted();
    let pot = field.potential();
    let base = pot.value(lifted[0]);

    let phi: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / n as f64;
            flow_map(lifted[i], m * t, field).map(|q| pot.value(q) - base)
        })
        .collect::<Result<_, _>>()?;
    let z = curve.homology().map(|v| v as f64);
    let closing = [lifted[0][0] + z[0], lifted[0][1] + z[1], lifted[0][2] + z[2]];
    let phi_end = pot.value(flow_map(closing, m, field)?) - base;

    let identity_residual = (0..n)
        .map(|i| {
            let direct = pot.value(lifted[i]) - base - m * i as f64 / n as f64;
            (phi[i] - direct).abs()
        })
        .fold(0.0, f64::max);

    let out: Vec<Point> =
        (0..n).into_par_iter().map(|i| flow_map(lifted[i], phi[i], field)).collect::<Result<_, _>>()?;
    let out = ParamCurve::from_lifted(out, curve.homology()).map_err(FlowError::InvalidCurve)?;

    let stride = (n / RICHARDSON_SAMPLES).max(1);
    let ode_error_estimate = (0..n)
        .step_by(stride)
        .map(|i| {
            let t = i as f64 / n as f64;
            Ok(flow_error_estimate(lifted[i], m * t, field)?.max(flow_error_estimate(lifted[i], phi[i], field)?))
        })
        .collect::<Result<Vec<f64>, FlowError>>()?
        .into_iter()
        .fold(0.0, f64::max);

    let tangents = out.tangents();
    let zero_speed = tangents
        .iter()
        .enumerate()
        .filter(|(_, t)| (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt() < ZERO_SPEED)
        .map(|(i, _)| i)
        .collect();
    let near_self_intersections = out.near_self_intersections(min_separation, MAX_REPORTED_PAIRS);

    Ok(Transversalized {
        curve: out,
        m,
        phi,
        phi_end,
        identity_residual,
        ode_error_estimate,
        zero_speed,
        near_self_intersections,
    })
}

/// `H(·, s) = F(γ(·), s·Φ(·))`; `H(·,0) = γ` and `H(·,1) = γ̃`.
pub fn homotopy(curve: &ParamCurve, phi: &[f64], field: &FlowField, s: f64) -> Result<ParamCurve, FlowError> {
    if phi.len() != curve.len() {
        return Err(FlowError::InvalidCurve(format!("{} Φ values for {} samples", phi.len(), curve.len())));
    }
    if s == 0.0 {
        return Ok(curve.clone());
    }
    let lifted = curve.lifted();
    let pts: Vec<Point> =
        lifted.par_iter().zip(phi.par_iter()).map(|(p, f)| flow_map(*p, s * f, field)).collect::<Result<_, _>>()?;
    ParamCurve::from_lifted(pts, curve.homology()).map_err(FlowError::InvalidCurve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransverseMode {
    /// `α(γ′) = m` pointwise.
    Transverse,
    /// `γ` lies in one leaf of `ker α`.
    Leaf,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransverseReport {
    pub mode: TransverseMode,
    pub m: f64,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: usize,
}

/// For `m ≠ 0`, the largest `|α(γ′(tᵢ)) − m|`; for `m = 0`, the largest
/// variation of the `α`-potential along the lifted loop.
pub fn check_transverse(curve: &ParamCurve, alpha: &Form, m: f64, tol: f64) -> Result<TransverseReport, FlowError> {
    let (mode, max_deviation) = if m != 0.0 {
        if alpha.degree() != 1 {
            return Err(FlowError::NotOneForm(alpha.degree()));
        }
        let comps = one_form_evaluator(alpha);
        let tangents = curve.tangents();
        let dev = curve
            .points()
            .par_iter()
            .zip(tangents.par_iter())
            .map(|(p, t)| (pair(&comps, *p, t) - m).abs())
            .reduce(|| 0.0, f64::max);
        (TransverseMode::Transverse, dev)
    } else {
        let pot = AlphaPotential::new(alpha)?;
        let lifted = curve.lifted();
        let base = pot.value(lifted[0]);
        let dev = lifted.iter().map(|p| (pot.value(*p) - base).abs()).fold(0.0, f64::max);
        (TransverseMode::Leaf, dev)
    };
    Ok(TransverseReport { mode, m, max_deviation, tolerance: tol, passed: max_deviation <= tol, samples: curve.len() })
}
