use std::sync::Arc;

use circlesym::certify::{
    certify, check_class, check_closed, density, emit_report, write_density_csv, Certificate, Check, Parameters,
    Tolerances, Verdict, SCHEMA_VERSION,
};
use circlesym::forms::{Form, InvariantForm, ScalarField};
use circlesym::topology::{EulerClass, GysinClass};

const K: usize = 4;

fn params() -> Parameters {
    Parameters { k: K, grid: 16, tolerances: Tolerances::default() }
}

/// `p*σ + p*τ∧η` with constant coefficients on the trivial bundle.
fn harmonic(sigma: [f64; 3], tau: [f64; 3]) -> InvariantForm {
    InvariantForm::new(
        Form::constant_two_form(K, sigma),
        Some(Form::constant_one_form(K, tau)),
        Arc::new(Form::zero(2, K)),
    )
    .unwrap()
}

fn psi(sigma: [f64; 3], tau: [f64; 3]) -> GysinClass {
    GysinClass::new(sigma, tau, EulerClass::default()).unwrap()
}

fn failed_check(cert: &Certificate) -> Option<Check> {
    match &cert.verdict {
        Verdict::Pass => None,
        Verdict::Fail { check, .. } => Some(*check),
    }
}

#[test]
fn harmonic_form_passes_with_exact_numbers() {
    let omega = harmonic([1.0, 2.0, 0.0], [1.0, 0.5, 0.0]);
    let cert = certify(&omega, &psi([1.0, 2.0, 0.0], [1.0, 0.5, 0.0]), EulerClass::default(), params()).unwrap();
    assert_eq!(cert.verdict, Verdict::Pass);
    assert_eq!(cert.schema_version, SCHEMA_VERSION);
    assert_eq!(cert.closedness_residual, 0.0);
    // ω∧ω = 2σ·τ dx∧dy∧dθ∧dφ
    assert_eq!(cert.positivity.certified_lower, 4.0);
    assert_eq!(cert.square_value, 4.0);
    assert_eq!(cert.square_expected, 4.0);
    assert_eq!(cert.period_errors.len(), 6);
    assert!(cert.period_errors.values().all(|e| *e == 0.0));
}

#[test]
fn each_failure_is_named() {
    let e = EulerClass::default();
    let good = psi([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);

    // a non-closed σ-part
    let bent = InvariantForm::new(
        Form::constant_two_form(K, [1.0, 0.0, 0.0])
            .add(
                &Form::from_components(
                    2,
                    vec![ScalarField::cos(K, [0, 0, 1], 0.1), ScalarField::zero(K), ScalarField::zero(K)],
                )
                .unwrap(),
            )
            .unwrap(),
        Some(Form::constant_one_form(K, [1.0, 0.0, 0.0])),
        Arc::new(Form::zero(2, K)),
    )
    .unwrap();
    assert!(check_closed(&bent).unwrap() > 0.0);
    assert_eq!(failed_check(&certify(&bent, &good, e, params()).unwrap()), Some(Check::Closedness));

    let negative = harmonic([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let cert = certify(&negative, &psi([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), e, params()).unwrap();
    assert_eq!(failed_check(&cert), Some(Check::Positivity));
    assert_eq!(cert.positivity.certified_lower, -2.0);

    let omega = harmonic([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let cert = certify(&omega, &psi([1.0, 0.5, 0.0], [1.0, 0.0, 0.0]), e, params()).unwrap();
    assert_eq!(failed_check(&cert), Some(Check::Class));
    if let Verdict::Fail { detail, .. } = &cert.verdict {
        assert!(detail.contains("theta-x-torus"), "{detail}");
    }

    let strict = Parameters { tolerances: Tolerances { square: -1.0, ..Tolerances::default() }, ..params() };
    assert_eq!(failed_check(&certify(&omega, &good, e, strict).unwrap()), Some(Check::Square));
}

#[test]
fn fiber_periods_are_compared_with_tau() {
    let omega = harmonic([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let report = check_class(&omega, &psi([1.0, 0.0, 0.0], [1.0, 0.0, 0.25]), EulerClass::default()).unwrap();
    assert_eq!(report.max_error, 0.25);
    let (cycle, _) = report.errors.iter().find(|(_, v)| **v == 0.25).unwrap();
    assert_eq!(cycle, "theta-circle");
}

#[test]
fn certificate_json_round_trip() {
    let omega = harmonic([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let cert = certify(&omega, &psi([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]), EulerClass::default(), params()).unwrap();
    let dir = std::env::temp_dir().join(format!("certificate-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("certificate.json");
    emit_report(&cert, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.ends_with('\n'));
    let back: Certificate = serde_json::from_str(&text).unwrap();
    assert_eq!(back, cert);
    let value: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(value["verdict"]["status"], "pass");
    assert_eq!(value["parameters"]["K"], K);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn density_csv_has_one_row_per_grid_point() {
    let omega = harmonic([1.0, 0.0, 0.0], [1.0, 0.0, 0.0]);
    let (field, residual) = density(&omega).unwrap();
    assert_eq!(residual, 0.0);
    let mut buf = Vec::new();
    write_density_csv(&field, 17, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,theta,density");
    assert_eq!(lines.len(), 17 * 17 * 17 + 1);
    assert!(lines[1..].iter().all(|l| l.ends_with(",2.0")));
}
