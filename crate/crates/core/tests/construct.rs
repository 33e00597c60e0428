mod common;

use circlesym::construct::{
    assemble_symplectic, build_beta, build_gamma, build_omega2, transverse_cover, AssembleOptions, BumpProfile,
    ConstructError, OmegaOptions, OmegaPath, OmegaStrategy,
};
use std::f64::consts::TAU;

use circlesym::forms::{Form, ScalarField};
use circlesym::topology::{EulerClass, GysinClass, H2Class, IntegralH2Class};
use common::{direct_value, random_point};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dx(k: usize) -> Form {
    Form::constant_one_form(k, [1.0, 0.0, 0.0])
}

/// Periods over the coordinate 2-tori `(yθ, θx, xy)` read off as component
/// means.
fn mean_periods(form: &Form) -> [f64; 3] {
    let m = |idx: u8| form.component(idx).unwrap().mean();
    [m(0b110), -m(0b101), m(0b011)]
}

/// The scalar profile of `β = ρ·du`, recovered from its components.
fn beta_profile(beta: &Form, du: [f64; 3]) -> ScalarField {
    let n2: f64 = du.iter().map(|v| v * v).sum();
    let c = beta.components();
    let mut out = ScalarField::zero(c[0].truncation());
    for j in 0..3 {
        out = &out + &c[j].scale(du[j] / n2);
    }
    out
}

#[test]
fn tube_field_matches_direct_sampling() {
    // for an axis z with z₃ = 1 the field is invariant along z, so its
    // coefficient at k = (a, b, −a·z₁ − b·z₂) is the 2D Fourier integral of
    // the slice θ = 0; that slice is sampled by summing the bump over every
    // preimage in physical space
    let k = 12;
    let ki = k as i64;
    let radius = 0.125;
    let n = 512;
    for euler in [[0, 0, 1], [0, 1, 1], [0, -2, 1]] {
        let beta = build_beta(EulerClass(euler), &dx(k), k, radius, &BumpProfile::default()).unwrap();
        assert_eq!(beta.tubes.len(), 1);
        let tube = beta.tubes[0];
        let field = beta_profile(&beta.form, tube.coframe()[1]);
        // ∫ρ = 1/r with r = ε·|α|
        let rho = BumpProfile::default().normalized(1.0 / radius);
        let slice: Vec<f64> = (0..n * n)
            .map(|i| tube.sample(&rho, [(i / n) as f64 / n as f64, (i % n) as f64 / n as f64, 0.0]))
            .collect();
        let scale = field.max_abs_coeff();
        let twiddle =
            |f: i64, j: usize| Complex64::from_polar(1.0, -TAU * (f * j as i64).rem_euclid(n as i64) as f64 / n as f64);
        for a in -ki..=ki {
            let rows: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| slice[i * n + j] * twiddle(a, i)).sum()).collect();
            for b in -ki..=ki {
                let c = -(a * euler[0] + b * euler[1]);
                let direct: Complex64 = rows.iter().enumerate().map(|(j, r)| r * twiddle(b, j)).sum();
                let direct = direct / (n * n) as f64;
                let spectral = if c.abs() <= ki { field.coeff([a, b, c]) } else { direct };
                assert!(
                    (spectral - direct).norm() <= 1e-9 * scale,
                    "e = {euler:?}, k = {:?}: {spectral} vs {direct}",
                    [a, b, c]
                );
            }
        }
        // nothing off the plane k·z = 0
        for (freq, v) in field.nonzero() {
            let kz: i64 = (0..3).map(|i| freq[i] * euler[i]).sum();
            assert!(kz == 0 || v.norm() <= 1e-15, "e = {euler:?}: {freq:?}");
        }
    }
}

#[test]
fn curvature_forms_have_the_euler_periods() {
    let k = 16;
    for euler in [[0, 0, 1], [0, 0, 2], [0, 1, 1], [0, 2, -1], [0, 0, 3]] {
        let e = EulerClass(euler);
        let beta = build_beta(e, &dx(k), k, 0.125, &BumpProfile::default()).unwrap();
        let gamma = build_gamma(&beta.form, &dx(k), e).unwrap();
        let periods = gamma.periods_b2().unwrap();
        let means = mean_periods(&gamma);
        for i in 0..3 {
            assert!((periods[i] - euler[i] as f64).abs() <= 1e-9, "e = {euler:?}: {periods:?}");
            assert!((means[i] - euler[i] as f64).abs() <= 1e-9, "e = {euler:?}: {means:?}");
        }
        assert!(gamma.exterior_derivative().max_abs_coeff() <= 1e-12);
        assert!(dx(k).wedge(&gamma).unwrap().max_abs_coeff() <= 1e-12, "e = {euler:?}");
    }
}

#[test]
fn euler_class_must_annihilate_alpha() {
    let r = build_beta(EulerClass([1, 0, 0]), &dx(4), 4, 0.125, &BumpProfile::default());
    assert!(matches!(r, Err(ConstructError::EulerPairing(_))));
}

#[test]
fn tube_cover_reaches_every_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    // 1 on the half-radius disk, 0 beyond 0.51
    let half = BumpProfile::new(0.5, 0.51).unwrap();
    for (class, alpha) in [([1, 0, 0], [1.0, 0.0, 0.0]), ([2, 1, 0], [1.0, 0.3, 0.0]), ([1, 1, 1], [0.5, 0.7, 1.0])] {
        let alpha = Form::constant_one_form(4, alpha);
        let cover = transverse_cover(&IntegralH2Class(class), &alpha, 0.125, &BumpProfile::default()).unwrap();
        assert_eq!(cover.tubes.len(), cover.refinement * cover.refinement);
        for _ in 0..500 {
            let p = random_point(&mut rng);
            let hits: f64 = cover.tubes.iter().map(|t| t.sample(&half, p)).sum();
            assert!(hits >= 1.0, "class {class:?}: {p:?} is outside every half-radius tube");
        }
    }
}

#[test]
fn constructive_omega_for_irrational_classes() {
    let k = 16;
    let options = OmegaOptions { k, strategy: OmegaStrategy::Constructive, ..OmegaOptions::default() };
    let s2 = std::f64::consts::SQRT_2;
    for (h, a) in
        [([s2, 1.0, 0.5], [1.0, 0.0, 0.0]), ([0.25, 0.0, 0.0], [1.0, 0.0, 0.0]), ([1.0, 1.0, 0.0], [1.0, 1.0, 0.0])]
    {
        let alpha = Form::constant_one_form(k, a);
        let built = build_omega2(&H2Class(h), &alpha, &options).unwrap();
        assert_eq!(built.path, OmegaPath::Constructive);
        assert!(!built.decomposition.is_empty());
        assert!(built.closedness_residual <= 1e-12);
        let means = mean_periods(&built.form);
        for i in 0..3 {
            assert!((means[i] - h[i]).abs() <= 1e-9, "h = {h:?}: {means:?}");
        }
        assert!(built.density.certified_lower > 0.0, "h = {h:?}: {:?}", built.density);
        // spot-check the density directly
        let top = built.form.wedge_exact(&alpha).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let v = direct_value(&top.components()[0], random_point(&mut rng));
            assert!(v >= built.density.certified_lower - 1e-12);
        }
    }
}

#[test]
fn non_positive_pairing_is_refused_before_building() {
    let r = build_omega2(&H2Class([-1.0, 0.0, 0.0]), &dx(4), &OmegaOptions::default());
    assert!(matches!(r, Err(ConstructError::NonPositivePairing(_))));
}

#[test]
fn kodaira_thurston_end_to_end() {
    let e = EulerClass([0, 0, 1]);
    let psi = GysinClass::new([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], e).unwrap();
    let c = assemble_symplectic(&psi, e, &AssembleOptions::default()).unwrap();
    assert!(c.certificate.verdict.passed());
    assert_eq!(c.beta.tubes.len(), 1);
    assert_eq!(c.omega_build.path, OmegaPath::Harmonic);
    assert!(c.certificate.closedness_residual <= 1e-9);
    assert!(c.certificate.positivity.certified_lower > 0.0);
    assert!((c.certificate.square_value - 2.0).abs() <= 1e-8);
}

#[test]
fn cone_failures_are_refused() {
    let e = EulerClass::default();
    for (sigma, tau, needle) in
        [([-1.0, 0.0, 0.0], [1.0, 0.0, 0.0], "ψ² ≤ 0"), ([1.0, 0.0, 0.0], [0.0; 3], "p_*(ψ) = 0")]
    {
        let psi = GysinClass::new(sigma, tau, e).unwrap();
        match assemble_symplectic(&psi, e, &AssembleOptions { k: 4, ..AssembleOptions::default() }) {
            Err(ConstructError::Refused(reasons)) => {
                let text: Vec<String> = reasons.iter().map(ToString::to_string).collect();
                assert!(text.iter().any(|t| t.contains(needle)), "{text:?}");
            }
            other => panic!("expected a refusal, got {:?}", other.map(|_| ())),
        }
    }
}
