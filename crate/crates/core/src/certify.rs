//! Independent verification of a candidate invariant 2-form: closedness,
//! positivity of `ω∧ω`, the cohomology class, and the volume `∫_M ω∧ω`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forms::{certify_positive, CertifiedBound, Cycle, FormError, InvariantForm, ScalarField};
use crate::topology::{reduce_mod_euler, square, EulerClass, GysinClass};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("expected an invariant 2-form, found degree {0}")]
    WrongDegree(usize),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error("writing report: {0}")]
    Io(#[from] io::Error),
    #[error("writing csv: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Largest coefficient of `dω`.
    pub closedness: f64,
    /// Largest period error over the six coordinate cycles.
    pub periods: f64,
    /// `|∫_M ω∧ω − ψ²|`.
    pub square: f64,
    /// The certified lower bound of the `ω∧ω` density must exceed this.
    pub positivity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { closedness: 1e-9, periods: 1e-9, square: 1e-8, positivity: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    #[serde(rename = "K")]
    pub k: usize,
    /// Grid resolution per axis used for certified bounds.
    pub grid: usize,
    pub tolerances: Tolerances,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Check {
    Closedness,
    Positivity,
    Class,
    Square,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail { check: Check, detail: String },
}

impl Verdict {
    pub fn passed(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Circle invariance holds by construction of the representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Invariance {
    Structural,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Certificate {
    pub schema_version: u32,
    pub closedness_residual: f64,
    /// Lower bound on the `dx∧dy∧dθ` density of `p_*(ω∧ω)`.
    pub positivity: CertifiedBound,
    /// `ℓ¹` mass dropped when truncating the products in `ω∧ω`.
    pub truncation_residual: f64,
    pub period_errors: BTreeMap<String, f64>,
    pub class_match: bool,
    pub square_value: f64,
    pub square_expected: f64,
    pub invariance: Invariance,
    pub parameters: Parameters,
    pub verdict: Verdict,
}

fn require_two_form(omega: &InvariantForm) -> Result<(), CertifyError> {
    if omega.degree() != 2 {
        return Err(CertifyError::WrongDegree(omega.degree()));
    }
    Ok(())
}

/// Largest coefficient of the twisted differential of `ω`.
pub fn check_closed(omega: &InvariantForm) -> Result<f64, CertifyError> {
    Ok(omega.invariant_d()?.max_abs_coeff())
}

/// Density of `p_*(ω∧ω)` against `dx∧dy∧dθ`. The product is taken at
/// twice the truncation radius, so it is exact; the returned residual is
/// whatever the transform still reports as dropped.
pub fn density(omega: &InvariantForm) -> Result<(ScalarField, f64), CertifyError> {
    require_two_form(omega)?;
    let wide = omega.resized(2 * omega.sigma().truncation());
    let (sq, residual) = wide.invariant_wedge_tracked(&wide)?;
    let field = sq.fiber_integrate().components()[0].clone();
    Ok((field, residual))
}

/// Certified lower bound of the `ω∧ω` density, starting from a `grid³`
/// lattice and refining while inconclusive.
pub fn check_nondegenerate(omega: &InvariantForm, grid: usize) -> Result<CertifiedBound, CertifyError> {
    let (field, residual) = density(omega)?;
    Ok(certify_positive(&field, grid, residual))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodReport {
    pub errors: BTreeMap<String, f64>,
    pub max_error: f64,
}

/// Compares the periods of `Ω` over the coordinate 2-tori (modulo `e`) with
/// the `σ`-part of `ψ`, and those of the fiber part over the coordinate
/// circles with the `τ`-part.
pub fn check_class(omega: &InvariantForm, psi: &GysinClass, euler: EulerClass) -> Result<PeriodReport, CertifyError> {
    require_two_form(omega)?;
    let sigma = reduce_mod_euler(omega.sigma().periods_b2()?, &euler);
    let expected_sigma = reduce_mod_euler(psi.sigma_part().0, &euler);
    let tau = omega.fiber_integrate().periods_b1()?;
    let expected_tau = psi.tau_part().0;
    let mut errors = BTreeMap::new();
    for (i, c) in Cycle::TORI.iter().enumerate() {
        errors.insert(c.name().to_string(), (sigma[i] - expected_sigma[i]).abs());
    }
    for (i, c) in Cycle::CIRCLES.iter().enumerate() {
        errors.insert(c.name().to_string(), (tau[i] - expected_tau[i]).abs());
    }
    let max_error = errors.values().copied().fold(0.0, f64::max);
    Ok(PeriodReport { errors, max_error })
}

/// Runs every check and records the first failure in the fixed order
/// closedness, positivity, class, square.
pub fn certify(
    omega: &InvariantForm,
    psi: &GysinClass,
    euler: EulerClass,
    parameters: Parameters,
) -> Result<Certificate, CertifyError> {
    let tol = parameters.tolerances;
    let closedness_residual = check_closed(omega)?;
    require_two_form(omega)?;
    let (sq, truncation_residual) = omega.invariant_wedge_tracked(omega)?;
    let (field, residual) = density(omega)?;
    let positivity = certify_positive(&field, parameters.grid, residual);
    let periods = check_class(omega, psi, euler)?;
    let square_value = sq.integrate_m()?;
    let square_expected = square(psi);
    let class_match = periods.max_error <= tol.periods;

    let verdict = if !(closedness_residual <= tol.closedness) {
        Verdict::Fail {
            check: Check::Closedness,
            detail: format!("dω residual {closedness_residual:e} exceeds {:e}", tol.closedness),
        }
    } else if !(positivity.certified_lower > tol.positivity) {
        Verdict::Fail {
            check: Check::Positivity,
            detail: format!("certified lower bound {} of the ω∧ω density is not positive", positivity.certified_lower),
        }
    } else if !class_match {
        let (cycle, err) = periods.errors.iter().max_by(|a, b| a.1.total_cmp(b.1)).expect("six cycles");
        Verdict::Fail { check: Check::Class, detail: format!("period error {err:e} on the {cycle}") }
    } else if !((square_value - square_expected).abs() <= tol.square) {
        Verdict::Fail {
            check: Check::Square, detail: format!("∫ω∧ω = {square_value} but ψ² = {square_expected}")
        }
    } else {
        Verdict::Pass
    };

    Ok(Certificate {
        schema_version: SCHEMA_VERSION,
        closedness_residual,
        positivity,
        truncation_residual,
        period_errors: periods.errors,
        class_match,
        square_value,
        square_expected,
        invariance: Invariance::Structural,
        parameters,
        verdict,
    })
}

/// Writes the certificate as pretty-printed JSON.
pub fn emit_report(cert: &Certificate, path: &Path) -> Result<(), CertifyError> {
    let mut text = serde_json::to_string_pretty(cert).expect("certificate serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `x,y,theta,density` rows on an `n³` grid.
pub fn write_density_csv<W: io::Write>(density: &ScalarField, n: usize, writer: W) -> Result<(), CertifyError> {
    let values = density.sample_grid(n);
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["x", "y", "theta", "density"])?;
    let h = 1.0 / n as f64;
    for (idx, v) in values.iter().enumerate() {
        let (i, j, l) = (idx / (n * n), (idx / n) % n, idx % n);
        w.serialize((i as f64 * h, j as f64 * h, l as f64 * h, v))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::forms::{Form, ScalarField};

    fn params() -> Parameters {
        Parameters { k: 2, grid: 16, tolerances: Tolerances::default() }
    }

    fn four_torus(sigma: Form) -> InvariantForm {
        InvariantForm::new(sigma, Some(Form::constant_one_form(2, [1.0, 0.0, 0.0])), Arc::new(Form::zero(2, 2)))
            .unwrap()
    }

    fn psi() -> GysinClass {
        GysinClass::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], EulerClass::default()).unwrap()
    }

    #[test]
    fn product_form_passes() {
        let w = four_torus(Form::constant_two_form(2, [1.0, 0.0, 0.0]));
        let cert = certify(&w, &psi(), EulerClass::default(), params()).unwrap();
        assert_eq!(cert.verdict, Verdict::Pass);
        assert_eq!(cert.closedness_residual, 0.0);
        assert_eq!(cert.positivity.certified_lower, 2.0);
        assert_eq!(cert.square_value, 2.0);
    }

    #[test]
    fn non_closed_sigma_reports_spectral_derivative() {
        let c = 0.01;
        let yth = &ScalarField::constant(2, 1.0) + &ScalarField::sin(2, [1, 0, 0], c);
        let sigma = Form::from_components(2, vec![ScalarField::zero(2), ScalarField::zero(2), yth]).unwrap();
        let w = four_torus(sigma);
        let residual = check_closed(&w).unwrap();
        // sin(2πx)/2i has coefficients ∓i/2; the derivative multiplies by 2π
        assert!((residual - std::f64::consts::PI * c).abs() < 1e-15);
        let cert = certify(&w, &psi(), EulerClass::default(), params()).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fail { check: Check::Closedness, .. }));
    }

    #[test]
    fn degenerate_and_scaled_forms_fail() {
        let w = four_torus(Form::zero(2, 2));
        assert_eq!(check_nondegenerate(&w, 16).unwrap().certified_lower, 0.0);
        let cert = certify(&w, &psi(), EulerClass::default(), params()).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fail { check: Check::Positivity, .. }));

        let scaled = four_torus(Form::constant_two_form(2, [2.0, 0.0, 0.0]));
        let cert = certify(&scaled, &psi(), EulerClass::default(), params()).unwrap();
        assert!(matches!(cert.verdict, Verdict::Fail { check: Check::Class, .. }));
        assert!(!cert.class_match);
    }

    #[test]
    fn euler_shift_is_ignored() {
        let e = EulerClass([0, 0, 1]);
        let psi = GysinClass::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], e).unwrap();
        let w = four_torus(Form::constant_two_form(2, [1.0, 0.0, 3.0]));
        let report = check_class(&w, &psi, e).unwrap();
        assert_eq!(report.max_error, 0.0);
    }

    #[test]
    fn report_round_trip() {
        let w = four_torus(Form::constant_two_form(2, [1.0, 0.0, 0.0]));
        let cert = certify(&w, &psi(), EulerClass::default(), params()).unwrap();
        let text = serde_json::to_string(&cert).unwrap();
        assert!(text.contains(r#""verdict":{"status":"pass"}"#));
        assert_eq!(serde_json::from_str::<Certificate>(&text).unwrap(), cert);
    }
}
