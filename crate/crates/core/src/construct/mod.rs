//! The construction of an invariant symplectic form `ω = p*Ω + p*α∧η`
//! representing a class `ψ`: a non-degenerate closed 1-form `α`, a tube
//! 1-form `β` around a leaf curve dual to `e`, the curvature `γ = β∧α`, and a
//! 2-form `Ω` with `Ω∧α > 0` in the class `h` solving `p*h = ψ − [p*α∧η]`.

mod profile;
mod tube;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{certify, Certificate, CertifyError, Parameters, Tolerances};
use crate::forms::{certify_positive, CertifiedBound, Form, FormError, InvariantForm, Point, ScalarField};
use crate::topology::{
    rational_decompose, solve_h, symplectic_cone_membership, ConeFailure, EulerClass, GysinClass, H1Class, H2Class,
    IntegralH2Class, TopologyError, WeightedClass,
};

pub use profile::{BumpProfile, DEFAULT_PLATEAU, DEFAULT_SUPPORT};
pub use tube::{TransverseLattice, TubeEmbedding, MAX_AXIS_NORM};

use tube::{cross, dot, normalize, tube_family_field};

pub const DEFAULT_TUBE_RADIUS: f64 = 0.125;
pub const DEFAULT_K: usize = 16;
pub const DEFAULT_GRID: usize = 64;
/// Grid on which the half-radius cover is verified.
pub const COVERAGE_GRID: usize = 64;
/// Closedness and period tolerance for the sub-builders.
pub const BUILD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error("p_*(ψ) = 0 not fibered")]
    NotFibered,
    #[error("e∪[α] = {0:e} must vanish")]
    EulerPairing(f64),
    #[error("α must have constant coefficients here")]
    NonConstantAlpha,
    #[error("tubes overlap (separation {separation:.4} ≤ {required:.4} in tube units); increase K or shrink ε")]
    TubeOverlap { separation: f64, required: f64 },
    #[error("invalid tube: {0}")]
    InvalidTube(String),
    #[error("half-radius tubes miss the sample {point:?}")]
    CoverageGap { point: Point },
    #[error("h∪[α] = {0} must be positive")]
    NonPositivePairing(f64),
    #[error("α may vanish: certified lower bound of |α|² is {0}")]
    DegenerateAlpha(f64),
    #[error("{what} is not closed (residual {residual:e})")]
    NotClosed { what: &'static str, residual: f64 },
    #[error("{what} has periods {found:?}, expected {expected:?}")]
    PeriodMismatch { what: &'static str, expected: [f64; 3], found: [f64; 3] },
    #[error("no strategy gives Ω∧α > 0; best certified lower bound {}", .best.certified_lower)]
    OmegaFailed { best: CertifiedBound },
    #[error("ψ is not in the symplectic cone: {}", join_reasons(.0))]
    Refused(Vec<ConeFailure>),
    #[error("certificate failed: {:?}", .0.certificate.verdict)]
    Uncertified(Box<Construction>),
    #[error("invalid option: {0}")]
    InvalidOption(String),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}

fn join_reasons(reasons: &[ConeFailure]) -> String {
    reasons.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// `α ← α + d(f)` with `f = amplitude·exp(1 − 1/(1 − r²))`, `r` the torus
/// distance to `center` divided by `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlphaPerturbation {
    pub center: Point,
    pub radius: f64,
    pub amplitude: f64,
}

impl AlphaPerturbation {
    pub fn bump(&self, p: Point) -> f64 {
        let d2: f64 = (0..3)
            .map(|i| {
                let d = p[i] - self.center[i];
                let d = d - d.round();
                d * d
            })
            .sum();
        let r2 = d2 / (self.radius * self.radius);
        if r2 >= 1.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / (1.0 - r2)).exp()
        }
    }
}

/// Constant-coefficient representative of `φ`, optionally perturbed by an
/// exact form; in that case `|α|² > 0` is certified starting from a `grid³`
/// lattice, refined as needed.
pub fn build_alpha(
    phi: &H1Class,
    k: usize,
    perturbation: Option<&AlphaPerturbation>,
    grid: usize,
) -> Result<Form, ConstructError> {
    if phi.is_zero() || phi.0.iter().any(|v| !v.is_finite()) {
        return Err(ConstructError::NotFibered);
    }
    let alpha = Form::constant_one_form(k, phi.0);
    let Some(pert) = perturbation else {
        return Ok(alpha);
    };
    if !(pert.radius > 0.0 && pert.radius <= 0.5) {
        return Err(ConstructError::InvalidOption(format!("perturbation radius {} must lie in (0, 1/2]", pert.radius)));
    }
    let f = ScalarField::project_fn(k, 4 * k + 4, |p| pert.bump(p));
    let alpha = alpha.add(&Form::function(f).exterior_derivative())?;
    let norm_sq = alpha.components().iter().fold(ScalarField::zero(2 * k), |acc, c| &acc + &c.mul_exact(c));
    let bound = certify_positive(&norm_sq, grid, 0.0);
    if bound.certified_lower <= 0.0 {
        return Err(ConstructError::DegenerateAlpha(bound.certified_lower));
    }
    Ok(alpha)
}

fn constant_part(alpha: &Form) -> [f64; 3] {
    let c = alpha.components();
    [c[0].mean(), c[1].mean(), c[2].mean()]
}

/// Axis and frame of the lattice geodesic dual to `e`, lying in a leaf of a
/// constant `α`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafDual {
    /// Primitive direction `z` with `e = multiplicity·z`.
    pub axis: [i64; 3],
    pub multiplicity: u64,
    pub e_u: [f64; 3],
    pub e_w: [f64; 3],
    /// `α(f_*∂w) = ε|α|`.
    pub r: f64,
}

/// `None` for `e = 0`. Otherwise `z = e/d`, `e_w = α♯/|α|` and
/// `e_u = α♯×z/|α♯×z|`, so that `α(z) = α(e_u) = 0` and `(e_u, e_w, z)`
/// is positively oriented.
pub fn leaf_dual_curve(euler: EulerClass, alpha: &Form, radius: f64) -> Result<Option<LeafDual>, ConstructError> {
    if !alpha.is_constant() {
        return Err(ConstructError::NonConstantAlpha);
    }
    let Some((multiplicity, axis)) = euler.primitive() else {
        return Ok(None);
    };
    let a = constant_part(alpha);
    let e = euler.as_real();
    let pairing = dot(e, a);
    if pairing.abs() > 1e-12 * dot(e, e).sqrt() * dot(a, a).sqrt().max(1.0) {
        return Err(ConstructError::EulerPairing(pairing));
    }
    let norm = dot(a, a).sqrt();
    if norm == 0.0 {
        return Err(ConstructError::NotFibered);
    }
    let z = axis.map(|v| v as f64);
    let e_u = normalize(cross(a, z));
    let e_w = a.map(|v| v / norm);
    Ok(Some(LeafDual { axis, multiplicity, e_u, e_w, r: radius * norm }))
}

#[derive(Clone, Debug, PartialEq)]
pub struct BetaForm {
    pub form: Form,
    pub tubes: Vec<TubeEmbedding>,
    /// One tube carrying the whole multiplicity of `e`.
    pub scaled_normalization: bool,
}

/// `β = Σ ρ_i(u, w)·du` over tubes around the leaf dual of `e`, with
/// `∫ρ_i = 1/r`, so that `[β∧α] = e`.
pub fn build_beta(
    euler: EulerClass,
    alpha: &Form,
    k: usize,
    radius: f64,
    profile: &BumpProfile,
) -> Result<BetaForm, ConstructError> {
    let Some(dual) = leaf_dual_curve(euler, alpha, radius)? else {
        return Ok(BetaForm { form: Form::zero(1, k), tubes: Vec::new(), scaled_normalization: false });
    };
    let base = TubeEmbedding::new([0.5; 3], dual.axis, dual.e_u, dual.e_w, radius)?;
    let lattice = base.transverse_lattice();
    let required = 2.0 * profile.support();
    if lattice.minimum() <= required {
        return Err(ConstructError::TubeOverlap { separation: lattice.minimum(), required });
    }
    let g = dual.multiplicity as usize;
    let (tubes, per_tube) = if g == 1 {
        (vec![base], 1.0)
    } else {
        let shift = lattice.generators[0].map(|v| v as f64 / g as f64);
        let tubes: Vec<TubeEmbedding> = (0..g).map(|j| base.translated(shift.map(|s| j as f64 * s))).collect();
        if family_separation(&lattice, g) > required {
            (tubes, 1.0)
        } else {
            (vec![base], g as f64)
        }
    };
    let scaled_normalization = per_tube != 1.0;
    let rho = profile.normalized(per_tube / dual.r);
    let field = tube_family_field(k, &tubes, &rho);
    let du = base.coframe()[1];
    let form = Form::from_components(1, du.iter().map(|c| field.scale(*c)).collect())?;
    Ok(BetaForm { form, tubes, scaled_normalization })
}

/// Smallest distance between distinct centers of `g` tubes spaced by
/// `ℓ₁/g`, modulo the transverse lattice.
fn family_separation(lattice: &TransverseLattice, g: usize) -> f64 {
    let [b1, b2] = lattice.projections;
    let mut best = f64::INFINITY;
    for j in 0..g as i64 {
        for a in -3..=3i64 {
            for b in -3..=3i64 {
                if j == 0 && a == 0 && b == 0 {
                    continue;
                }
                let s = j as f64 / g as f64 + a as f64;
                let x = s * b1[0] + b as f64 * b2[0];
                let y = s * b1[1] + b as f64 * b2[1];
                best = best.min((x * x + y * y).sqrt());
            }
        }
    }
    best
}

/// `γ = β∧α`, checked closed with periods `e`.
pub fn build_gamma(beta: &Form, alpha: &Form, euler: EulerClass) -> Result<Form, ConstructError> {
    let gamma = beta.wedge(alpha)?;
    let residual = gamma.exterior_derivative().max_abs_coeff();
    if residual > BUILD_TOL {
        return Err(ConstructError::NotClosed { what: "γ", residual });
    }
    let periods = gamma.periods_b2()?;
    let expected = euler.as_real();
    if (0..3).any(|i| (periods[i] - expected[i]).abs() > BUILD_TOL) {
        return Err(ConstructError::PeriodMismatch { what: "γ", expected, found: periods });
    }
    Ok(gamma)
}

/// Translates of one tube whose half-radius cores cover `T³`.
#[derive(Clone, Debug, PartialEq)]
pub struct TubeCover {
    pub tubes: Vec<TubeEmbedding>,
    /// `h_int = multiplicity·z`.
    pub multiplicity: u64,
    /// Translates form `Λ/refinement` in the transverse plane.
    pub refinement: usize,
    pub lattice: TransverseLattice,
}

/// Tubes with axis `z` dual to `h_int` (so `α(z) > 0`) and transverse
/// frame spanning `ker α`, translated over `Λ/M` with `M` the least integer
/// for which half-radius disks cover. The frame comes from the constant part
/// of `α`. Coverage is verified on a `COVERAGE_GRID³` lattice.
pub fn transverse_cover(
    h_int: &IntegralH2Class,
    alpha: &Form,
    radius: f64,
    profile: &BumpProfile,
) -> Result<TubeCover, ConstructError> {
    let c = constant_part(alpha);
    let Some((multiplicity, axis)) = EulerClass(h_int.0).primitive() else {
        return Err(ConstructError::NonPositivePairing(0.0));
    };
    let z = axis.map(|v| v as f64);
    let pairing = dot(c, z);
    if !(pairing > 0.0) {
        return Err(ConstructError::NonPositivePairing(pairing * multiplicity as f64));
    }
    let n = normalize(c);
    let least = (0..3).min_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs())).expect("three axes");
    let mut helper = [0.0; 3];
    helper[least] = 1.0;
    let e_u = normalize(cross(n, helper));
    let e_w = cross(n, e_u);
    let base = TubeEmbedding::new([0.0; 3], axis, e_u, e_w, radius)?;
    let lattice = base.transverse_lattice();
    let required = 2.0 * profile.support();
    if lattice.minimum() <= required {
        return Err(ConstructError::TubeOverlap { separation: lattice.minimum(), required });
    }
    let refinement = (2.0 * lattice.covering_radius() * (1.0 + 1e-9)).ceil().max(1.0) as usize;
    let [l1, l2] = lattice.generators.map(|l| l.map(|v| v as f64 / refinement as f64));
    let mut tubes = Vec::with_capacity(refinement * refinement);
    for a in 0..refinement {
        for b in 0..refinement {
            tubes.push(base.translated([0, 1, 2].map(|i| a as f64 * l1[i] + b as f64 * l2[i])));
        }
    }

    let m = COVERAGE_GRID;
    let h = 1.0 / m as f64;
    let gap = (0..m * m * m).into_par_iter().find_first(|&idx| {
        let p = [(idx / (m * m)) as f64 * h, ((idx / m) % m) as f64 * h, (idx % m) as f64 * h];
        let local = base.local_coords(p);
        lattice.distance_to_refinement([local[1], local[2]], refinement) > 0.5
    });
    if let Some(idx) = gap {
        let point = [(idx / (m * m)) as f64 * h, ((idx / m) % m) as f64 * h, (idx % m) as f64 * h];
        return Err(ConstructError::CoverageGap { point });
    }
    Ok(TubeCover { tubes, multiplicity, refinement, lattice })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaStrategy {
    /// Harmonic for constant `α`, constructive otherwise, falling back to the
    /// other when positivity cannot be certified.
    #[default]
    Auto,
    Harmonic,
    Constructive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaPath {
    Harmonic,
    Constructive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OmegaOptions {
    pub k: usize,
    pub grid: usize,
    pub radius: f64,
    pub profile: BumpProfile,
    pub strategy: OmegaStrategy,
}

impl Default for OmegaOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            grid: DEFAULT_GRID,
            radius: DEFAULT_TUBE_RADIUS,
            profile: BumpProfile::default(),
            strategy: OmegaStrategy::Auto,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaBuild {
    pub form: Form,
    pub path: OmegaPath,
    /// `(aᵢ, hᵢ)` on the constructive path.
    pub decomposition: Vec<WeightedClass>,
    pub tube_count: usize,
    /// Certified lower bound of the `Ω∧α` density.
    pub density: CertifiedBound,
    pub closedness_residual: f64,
    pub period_error: f64,
}

/// A closed 2-form in the class `h` with `Ω∧α > 0`, certified.
pub fn build_omega2(h: &H2Class, alpha: &Form, options: &OmegaOptions) -> Result<OmegaBuild, ConstructError> {
    let c = constant_part(alpha);
    let pairing = dot(h.0, c);
    if !(pairing > 0.0) {
        return Err(ConstructError::NonPositivePairing(pairing));
    }
    let order = match options.strategy {
        OmegaStrategy::Harmonic => vec![OmegaPath::Harmonic],
        OmegaStrategy::Constructive => vec![OmegaPath::Constructive],
        OmegaStrategy::Auto if alpha.is_constant() => vec![OmegaPath::Harmonic, OmegaPath::Constructive],
        OmegaStrategy::Auto => vec![OmegaPath::Constructive, OmegaPath::Harmonic],
    };
    let mut best: Option<CertifiedBound> = None;
    for path in order {
        let (form, decomposition, tube_count) = match path {
            OmegaPath::Harmonic => (Form::constant_two_form(options.k, h.0), Vec::new(), 0),
            OmegaPath::Constructive => constructive_omega(h, alpha, options)?,
        };
        let closedness_residual = form.exterior_derivative().max_abs_coeff();
        if closedness_residual > BUILD_TOL {
            return Err(ConstructError::NotClosed { what: "Ω", residual: closedness_residual });
        }
        let periods = form.periods_b2()?;
        let period_error = (0..3).map(|i| (periods[i] - h.0[i]).abs()).fold(0.0, f64::max);
        if period_error > BUILD_TOL {
            return Err(ConstructError::PeriodMismatch { what: "Ω", expected: h.0, found: periods });
        }
        let top = form.wedge_exact(alpha)?;
        let density = certify_positive(&top.components()[0], options.grid, 0.0);
        if density.certified_lower > 0.0 {
            return Ok(OmegaBuild {
                form,
                path,
                decomposition,
                tube_count,
                density,
                closedness_residual,
                period_error,
            });
        }
        if best.as_ref().map_or(true, |b| density.certified_lower > b.certified_lower) {
            best = Some(density);
        }
    }
    Err(ConstructError::OmegaFailed { best: best.expect("at least one strategy ran") })
}

/// `Σ aᵢ Ω(hᵢ)`, each `Ω(hᵢ)` a sum of bump 2-forms `ρ du∧dw` over a
/// transverse cover with `∫ρ = dᵢ/#tubes`.
fn constructive_omega(
    h: &H2Class,
    alpha: &Form,
    options: &OmegaOptions,
) -> Result<(Form, Vec<WeightedClass>, usize), ConstructError> {
    let c = constant_part(alpha);
    let decomposition = rational_decompose(h, &H1Class(c))?;
    let mut omega = Form::zero(2, options.k);
    let mut tube_count = 0;
    for term in &decomposition {
        let cover = transverse_cover(&term.class, alpha, options.radius, &options.profile)?;
        let per_tube = cover.multiplicity as f64 / cover.tubes.len() as f64;
        let field = tube_family_field(options.k, &cover.tubes, &options.profile.normalized(per_tube));
        let [_, du, dw] = cover.tubes[0].coframe();
        // (du∧dw) in the basis dx∧dy, dx∧dθ, dy∧dθ
        let pair = [(0, 1), (0, 2), (1, 2)].map(|(i, j)| du[i] * dw[j] - du[j] * dw[i]);
        let piece = Form::from_components(2, pair.iter().map(|p| field.scale(term.weight * p)).collect())?;
        omega = omega.add(&piece)?;
        tube_count += cover.tubes.len();
    }
    Ok((omega, decomposition, tube_count))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AssembleOptions {
    pub k: usize,
    pub grid: usize,
    pub radius: f64,
    pub profile: BumpProfile,
    pub strategy: OmegaStrategy,
    pub perturbation: Option<AlphaPerturbation>,
    pub tolerances: Tolerances,
}

impl Default for AssembleOptions {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            grid: DEFAULT_GRID,
            radius: DEFAULT_TUBE_RADIUS,
            profile: BumpProfile::default(),
            strategy: OmegaStrategy::Auto,
            perturbation: None,
            tolerances: Tolerances::default(),
        }
    }
}

/// Every intermediate object of a run, with its certificate.
#[derive(Clone, Debug)]
pub struct Construction {
    pub omega: InvariantForm,
    pub certificate: Certificate,
    pub alpha: Form,
    pub beta: BetaForm,
    pub h: H2Class,
    pub omega_build: OmegaBuild,
}

/// Builds `ω = (Ω, α)` over `γ = β∧α` and certifies it. A failing
/// certificate is returned as [`ConstructError::Uncertified`].
pub fn assemble_symplectic(
    psi: &GysinClass,
    euler: EulerClass,
    options: &AssembleOptions,
) -> Result<Construction, ConstructError> {
    let verdict = symplectic_cone_membership(psi, euler);
    if !verdict.member {
        return Err(ConstructError::Refused(verdict.reasons));
    }
    if !(options.radius > 0.0 && options.radius < 0.5) {
        return Err(ConstructError::InvalidOption(format!("tube radius {} must lie in (0, 1/2)", options.radius)));
    }
    let k = options.k;
    let tau = psi.tau_part();
    let alpha = build_alpha(&tau, k, options.perturbation.as_ref(), options.grid)?;
    let frame_alpha = Form::constant_one_form(k, tau.0);
    let beta = build_beta(euler, &frame_alpha, k, options.radius, &options.profile)?;
    let gamma = Arc::new(build_gamma(&beta.form, &alpha, euler)?);
    let h = solve_h(psi, &tau, euler)?;
    let omega_options = OmegaOptions {
        k,
        grid: options.grid,
        radius: options.radius,
        profile: options.profile,
        strategy: options.strategy,
    };
    let omega_build = build_omega2(&h, &alpha, &omega_options)?;
    let omega = InvariantForm::new(omega_build.form.clone(), Some(alpha.clone()), gamma)?;
    let parameters = Parameters { k, grid: options.grid, tolerances: options.tolerances };
    let certificate = certify(&omega, psi, euler, parameters)?;
    let construction = Construction { omega, certificate, alpha, beta, h, omega_build };
    if construction.certificate.verdict.passed() {
        Ok(construction)
    } else {
        Err(ConstructError::Uncertified(Box::new(construction)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dx(k: usize) -> Form {
        Form::constant_one_form(k, [1.0, 0.0, 0.0])
    }

    #[test]
    fn alpha_fixtures() {
        let a = build_alpha(&H1Class([2f64.sqrt(), 1.0, 0.0]), 2, None, 16).unwrap();
        assert_eq!(a, Form::constant_one_form(2, [2f64.sqrt(), 1.0, 0.0]));
        assert!(matches!(build_alpha(&H1Class([0.0; 3]), 2, None, 16), Err(ConstructError::NotFibered)));
    }

    #[test]
    fn perturbed_alpha_is_closed_with_the_same_class() {
        let pert = AlphaPerturbation { center: [0.5; 3], radius: 0.3, amplitude: 0.05 };
        let a = build_alpha(&H1Class([1.0, 0.0, 0.0]), 6, Some(&pert), 32).unwrap();
        assert!(!a.is_constant());
        assert!(a.exterior_derivative().max_abs_coeff() < 1e-15);
        assert_eq!(constant_part(&a), [1.0, 0.0, 0.0]);
    }

    #[test]
    fn kodaira_thurston_dual_curve() {
        let d = leaf_dual_curve(EulerClass([0, 0, 1]), &dx(1), 0.125).unwrap().unwrap();
        assert_eq!(d.axis, [0, 0, 1]);
        assert_eq!(d.e_u, [0.0, -1.0, 0.0]);
        assert_eq!(d.e_w, [1.0, 0.0, 0.0]);
        assert_eq!(d.r, 0.125);
        assert!(leaf_dual_curve(EulerClass::default(), &dx(1), 0.125).unwrap().is_none());
        assert!(matches!(leaf_dual_curve(EulerClass([1, 0, 0]), &dx(1), 0.125), Err(ConstructError::EulerPairing(_))));
    }

    #[test]
    fn beta_and_gamma_for_kodaira_thurston() {
        let e = EulerClass([0, 0, 1]);
        let beta = build_beta(e, &dx(8), 8, 0.125, &BumpProfile::default()).unwrap();
        assert_eq!(beta.tubes.len(), 1);
        let gamma = build_gamma(&beta.form, &dx(8), e).unwrap();
        let p = gamma.periods_b2().unwrap();
        assert!((p[2] - 1.0).abs() < 1e-13 && p[0].abs() < 1e-15 && p[1].abs() < 1e-15);
        assert_eq!(dx(8).wedge(&gamma).unwrap().max_abs_coeff(), 0.0);
    }

    #[test]
    fn doubled_euler_class_uses_two_tubes() {
        let e = EulerClass([0, 0, 2]);
        let beta = build_beta(e, &dx(6), 6, 0.125, &BumpProfile::default()).unwrap();
        assert_eq!(beta.tubes.len(), 2);
        assert!(!beta.scaled_normalization);
        let gamma = build_gamma(&beta.form, &dx(6), e).unwrap();
        assert!((gamma.periods_b2().unwrap()[2] - 2.0).abs() < 1e-13);

        let wide = build_beta(EulerClass([0, 0, 3]), &dx(6), 6, 0.2, &BumpProfile::default()).unwrap();
        assert!(wide.scaled_normalization);
        assert_eq!(wide.tubes.len(), 1);
    }

    #[test]
    fn fat_tubes_are_refused() {
        let err = build_beta(EulerClass([0, 0, 1]), &dx(4), 4, 0.6, &BumpProfile::default());
        assert!(matches!(err, Err(ConstructError::TubeOverlap { .. })));
    }

    #[test]
    fn cover_of_the_x_direction() {
        let cover = transverse_cover(&IntegralH2Class([1, 0, 0]), &dx(1), 0.125, &BumpProfile::default()).unwrap();
        assert_eq!(cover.refinement, 12);
        assert_eq!(cover.tubes.len(), 144);
        for t in &cover.tubes {
            let (e_u, e_w) = t.frame();
            assert_eq!(e_u[0], 0.0);
            assert_eq!(e_w[0], 0.0);
        }
        let err = transverse_cover(&IntegralH2Class([0, 1, 0]), &dx(1), 0.125, &BumpProfile::default());
        assert!(matches!(err, Err(ConstructError::NonPositivePairing(_))));
    }

    #[test]
    fn omega_paths() {
        let opts = OmegaOptions { k: 6, grid: 32, ..OmegaOptions::default() };
        let h = H2Class([1.0, 0.0, 0.0]);
        let harmonic = build_omega2(&h, &dx(6), &opts).unwrap();
        assert_eq!(harmonic.path, OmegaPath::Harmonic);
        assert_eq!(harmonic.form, Form::constant_two_form(6, [1.0, 0.0, 0.0]));
        assert_eq!(harmonic.density.certified_lower, 1.0);

        let forced = OmegaOptions { strategy: OmegaStrategy::Constructive, ..opts };
        let built = build_omega2(&h, &dx(6), &forced).unwrap();
        assert_eq!(built.path, OmegaPath::Constructive);
        assert_eq!(built.tube_count, 144);
        assert!(built.period_error < 1e-12);
        assert!(built.density.certified_lower > 0.0);

        assert!(matches!(
            build_omega2(&H2Class([0.0, 1.0, 0.0]), &dx(6), &opts),
            Err(ConstructError::NonPositivePairing(_))
        ));
    }

    #[test]
    fn refusal_names_the_condition() {
        let e = EulerClass::default();
        let psi = GysinClass::new([1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], e).unwrap();
        let err = assemble_symplectic(&psi, e, &AssembleOptions::default()).unwrap_err();
        assert!(err.to_string().contains("ψ² ≤ 0"), "{err}");
    }
}
