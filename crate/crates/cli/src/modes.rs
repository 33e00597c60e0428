use std::fs;
use std::path::{Path, PathBuf};

use circlesym::certify::{certify, density, emit_report, write_density_csv, Certificate, Parameters};
use circlesym::construct::{
    assemble_symplectic, build_alpha, AssembleOptions, BumpProfile, ConstructError, Construction, OmegaPath,
};
use circlesym::flow::{check_transverse, transversalize, FlowField, ParamCurve, TransverseReport};
use circlesym::forms::{CertifiedBound, InvariantForm};
use circlesym::topology::{
    cohomology_basis, gysin_pushforward, is_fibered_class, rational_decompose, solve_h, symplectic_cone_membership,
    ConeFailure, EulerClass, GysinClass, H1Class, H2Class, ManifoldDescriptor, WeightedClass,
};
use serde::Serialize;

use crate::config::{CurveSpec, Mode, Scenario, ScenarioConfig};
use crate::curves::wiggly_loop;
use crate::{CliError, Report, Status};

/// Lattice used for the optional density CSV.
const CSV_GRID: usize = 32;
/// Bound on `|Φ(1)|` for a flow demo to pass.
const PHI_END_TOL: f64 = 1e-8;

/// Runs one scenario, writing its artifacts under `io.output_dir`.
pub fn run(scenario: &Scenario) -> Result<Report, CliError> {
    let out = scenario.config.io.output_dir.clone();
    fs::create_dir_all(&out).map_err(|source| CliError::Io { path: out.clone(), source })?;
    let mut w = Writer { dir: out, written: Vec::new() };
    let (status, summary) = match scenario.config.mode {
        Mode::Construct => construct(scenario, &mut w)?,
        Mode::Certify => certify_mode(scenario, &mut w)?,
        Mode::ConeQuery => cone_query(scenario, &mut w)?,
        Mode::FlowDemo => flow_demo(scenario, &mut w)?,
        Mode::Decompose => decompose(scenario, &mut w)?,
    };
    Ok(Report { status, summary, artifacts: w.written })
}

struct Writer {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Writer {
    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("artifact serializes");
        text.push('\n');
        let path = self.path(name);
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })
    }

    fn certificate(&mut self, cert: &Certificate) -> Result<(), CliError> {
        let path = self.path("certificate.json");
        emit_report(cert, &path).map_err(|e| io_error(&path, e))
    }

    fn density_csv(&mut self, omega: &InvariantForm) -> Result<(), CliError> {
        let (field, _) = density(omega).map_err(|e| data_error("omega", e))?;
        let path = self.path("density.csv");
        let file = fs::File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        write_density_csv(&field, CSV_GRID, file).map_err(|e| io_error(&path, e))
    }

    fn curve_csv(&mut self, name: &str, curve: &ParamCurve) -> Result<(), CliError> {
        let path = self.path(name);
        let file = fs::File::create(&path).map_err(|source| CliError::Io { path: path.clone(), source })?;
        curve.write_csv(file).map_err(|e| io_error(&path, e))
    }
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.to_path_buf(), source: std::io::Error::other(e.to_string()) }
}

fn data_error(source: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Config { origin: source.to_string(), message: e.to_string() }
}

fn psi_of(s: &Scenario) -> Result<GysinClass, CliError> {
    let psi = s.config.psi.as_ref().expect("validated: psi present");
    GysinClass::new(psi.sigma, psi.tau, EulerClass(s.config.manifold.euler))
        .map_err(|e| data_error(&s.source_name(), format!("psi: {e}")))
}

fn descriptor(config: &ScenarioConfig) -> ManifoldDescriptor {
    ManifoldDescriptor::new(config.manifold.monodromy).expect("validated: unimodular")
}

#[derive(Serialize)]
struct Refusal {
    status: &'static str,
    message: String,
    reasons: Vec<ConeFailure>,
}

/// The pipeline is implemented over the 3-torus only.
fn unsupported(s: &Scenario, w: &mut Writer) -> Result<Option<(Status, String)>, CliError> {
    let desc = descriptor(&s.config);
    if desc.is_torus() {
        return Ok(None);
    }
    let basis = cohomology_basis(&desc);
    let message = format!(
        "monodromy {:?} is not the identity; only Betti numbers are available (b1 = {}, b2 = {})",
        desc.monodromy(),
        basis.b1,
        basis.b2
    );
    w.json("refusal.json", &Refusal { status: "refused", message: message.clone(), reasons: Vec::new() })?;
    Ok(Some((Status::Refused, message)))
}

#[derive(Serialize)]
struct ConstructionSummary {
    path: OmegaPath,
    tube_count: usize,
    decomposition: Vec<WeightedClass>,
    beta_tubes: usize,
    beta_scaled_normalization: bool,
    gamma_periods: [f64; 3],
    alpha_wedge_gamma: f64,
    omega_density: CertifiedBound,
    verdict_passed: bool,
}

fn summarize(c: &Construction) -> Result<ConstructionSummary, CliError> {
    let gamma = c.omega.gamma();
    let gamma_periods = gamma.periods_b2().map_err(|e| data_error("gamma", e))?;
    let alpha_wedge_gamma = c.alpha.wedge(gamma).map_err(|e| data_error("gamma", e))?.max_abs_coeff();
    Ok(ConstructionSummary {
        path: c.omega_build.path,
        tube_count: c.omega_build.tube_count,
        decomposition: c.omega_build.decomposition.clone(),
        beta_tubes: c.beta.tubes.len(),
        beta_scaled_normalization: c.beta.scaled_normalization,
        gamma_periods,
        alpha_wedge_gamma,
        omega_density: c.omega_build.density.clone(),
        verdict_passed: c.certificate.verdict.passed(),
    })
}

fn write_construction(c: &Construction, csv: bool, w: &mut Writer) -> Result<(), CliError> {
    w.json("omega.json", &c.omega)?;
    w.certificate(&c.certificate)?;
    w.json("construction.json", &summarize(c)?)?;
    if csv {
        w.density_csv(&c.omega)?;
    }
    Ok(())
}

fn construct(s: &Scenario, w: &mut Writer) -> Result<(Status, String), CliError> {
    if let Some(r) = unsupported(s, w)? {
        return Ok(r);
    }
    let c = &s.config;
    let psi = psi_of(s)?;
    let n = &c.numerics;
    let options = AssembleOptions {
        k: n.k,
        grid: n.grid,
        radius: n.tube_radius,
        profile: BumpProfile::default(),
        strategy: n.strategy,
        perturbation: c.alpha_perturbation,
        tolerances: n.tolerances,
    };
    match assemble_symplectic(&psi, EulerClass(c.manifold.euler), &options) {
        Ok(built) => {
            write_construction(&built, c.io.csv, w)?;
            let summary = format!(
                "construct: pass ({} path, {} tubes, certified density ≥ {})",
                path_name(built.omega_build.path),
                built.omega_build.tube_count,
                built.certificate.positivity.certified_lower
            );
            Ok((Status::Pass, summary))
        }
        Err(ConstructError::Uncertified(built)) => {
            write_construction(&built, c.io.csv, w)?;
            Ok((Status::Failed, format!("construct: certificate failed: {:?}", built.certificate.verdict)))
        }
        Err(ConstructError::Refused(reasons)) => {
            let message = ConstructError::Refused(reasons.clone()).to_string();
            w.json("refusal.json", &Refusal { status: "refused", message: message.clone(), reasons })?;
            Ok((Status::Refused, format!("construct: refused: {message}")))
        }
        Err(ConstructError::InvalidOption(m)) => Err(data_error(&s.source_name(), m)),
        Err(e) => {
            let message = e.to_string();
            w.json("failure.json", &serde_json::json!({ "status": "failed", "message": message }))?;
            Ok((Status::Failed, format!("construct: failed: {message}")))
        }
    }
}

fn path_name(p: OmegaPath) -> &'static str {
    match p {
        OmegaPath::Harmonic => "harmonic",
        OmegaPath::Constructive => "constructive",
    }
}

fn certify_mode(s: &Scenario, w: &mut Writer) -> Result<(Status, String), CliError> {
    if let Some(r) = unsupported(s, w)? {
        return Ok(r);
    }
    let c = &s.config;
    let psi = psi_of(s)?;
    let input = c.io.omega.as_ref().expect("validated: omega path present");
    let text = s.read_relative(input)?;
    let omega: InvariantForm = serde_json::from_str(&text).map_err(|e| data_error(&input.display().to_string(), e))?;
    let parameters =
        Parameters { k: omega.sigma().truncation(), grid: c.numerics.grid, tolerances: c.numerics.tolerances };
    let cert = certify(&omega, &psi, EulerClass(c.manifold.euler), parameters)
        .map_err(|e| data_error(&input.display().to_string(), e))?;
    w.certificate(&cert)?;
    if c.io.csv {
        w.density_csv(&omega)?;
    }
    if cert.verdict.passed() {
        Ok((Status::Pass, format!("certify: pass (certified density ≥ {})", cert.positivity.certified_lower)))
    } else {
        Ok((Status::Failed, format!("certify: fail: {:?}", cert.verdict)))
    }
}

#[derive(Serialize)]
struct ConeReport {
    member: bool,
    square: f64,
    reasons: Vec<ConeFailure>,
    pushforward: [f64; 3],
    fibered: bool,
    b1: usize,
    b2: usize,
}

fn cone_query(s: &Scenario, w: &mut Writer) -> Result<(Status, String), CliError> {
    if let Some(r) = unsupported(s, w)? {
        return Ok(r);
    }
    let psi = psi_of(s)?;
    let desc = descriptor(&s.config);
    let basis = cohomology_basis(&desc);
    let verdict = symplectic_cone_membership(&psi, EulerClass(s.config.manifold.euler));
    let phi = gysin_pushforward(&psi);
    let report = ConeReport {
        member: verdict.member,
        square: verdict.square,
        reasons: verdict.reasons.clone(),
        pushforward: phi.0,
        fibered: is_fibered_class(&phi, &desc),
        b1: basis.b1,
        b2: basis.b2,
    };
    w.json("cone.json", &report)?;
    if verdict.member {
        Ok((Status::Pass, format!("cone-query: member (ψ² = {})", verdict.square)))
    } else {
        let reasons: Vec<String> = verdict.reasons.iter().map(ToString::to_string).collect();
        Ok((Status::Refused, format!("cone-query: not a member: {}", reasons.join("; "))))
    }
}

#[derive(Serialize)]
struct FlowReport {
    passed: bool,
    m: f64,
    phi_end: f64,
    identity_residual: f64,
    ode_error_estimate: f64,
    input_homology: [i64; 3],
    output_homology: [i64; 3],
    zero_speed: Vec<usize>,
    near_self_intersections: Vec<(usize, usize, f64)>,
    check: TransverseReport,
}

fn flow_demo(s: &Scenario, w: &mut Writer) -> Result<(Status, String), CliError> {
    let c = &s.config;
    let flow = c.flow.as_ref().expect("validated: flow present");
    let coeffs = flow.alpha.unwrap_or_else(|| c.psi.as_ref().expect("validated").tau);
    let alpha = build_alpha(&H1Class(coeffs), c.numerics.k, c.alpha_perturbation.as_ref(), c.numerics.grid);
    let alpha = match alpha {
        Ok(a) => a,
        Err(ConstructError::NotFibered) => return Err(data_error(&s.source_name(), "flow.alpha: must be non-zero")),
        Err(e) => return Ok((Status::Failed, format!("flow-demo: {e}"))),
    };
    let curve = match &flow.curve {
        CurveSpec::Geodesic { base, homology } => Ok(ParamCurve::geodesic(*base, *homology, flow.samples)),
        CurveSpec::Wiggly { base, homology, amplitude, harmonics, seed } => {
            wiggly_loop(*base, *homology, *amplitude, *harmonics, *seed, flow.samples)
        }
        CurveSpec::File { path } => {
            let text = s.read_relative(path)?;
            serde_json::from_str::<ParamCurve>(&text).map_err(|e| e.to_string())
        }
    }
    .map_err(|e| data_error(&s.source_name(), format!("flow.curve: {e}")))?;

    let field = FlowField::new(&alpha)
        .and_then(|f| f.with_step(c.numerics.rk4_step))
        .map_err(|e| data_error(&s.source_name(), e));
    let field = match field {
        Ok(f) => f,
        Err(e) => return Ok((Status::Failed, format!("flow-demo: {e}"))),
    };
    let out = match transversalize(&curve, &field, flow.min_separation) {
        Ok(out) => out,
        Err(e) => {
            w.json("failure.json", &serde_json::json!({ "status": "failed", "message": e.to_string() }))?;
            return Ok((Status::Failed, format!("flow-demo: {e}")));
        }
    };
    let check =
        check_transverse(&out.curve, &alpha, out.m, flow.tolerance).map_err(|e| data_error(&s.source_name(), e))?;
    let passed = check.passed && out.phi_end.abs() <= PHI_END_TOL;
    let report = FlowReport {
        passed,
        m: out.m,
        phi_end: out.phi_end,
        identity_residual: out.identity_residual,
        ode_error_estimate: out.ode_error_estimate,
        input_homology: curve.homology(),
        output_homology: out.curve.homology(),
        zero_speed: out.zero_speed.clone(),
        near_self_intersections: out.near_self_intersections.clone(),
        check,
    };
    w.json("transverse.json", &report)?;
    w.json("curve.json", &out.curve)?;
    if c.io.csv {
        w.curve_csv("input_curve.csv", &curve)?;
        w.curve_csv("curve.csv", &out.curve)?;
    }
    let summary = format!(
        "flow-demo: {} (m = {}, max deviation {:e}, Φ(1) = {:e})",
        if passed { "pass" } else { "fail" },
        out.m,
        report.check.max_deviation,
        out.phi_end
    );
    Ok((if passed { Status::Pass } else { Status::Failed }, summary))
}

#[derive(Serialize)]
struct Decomposition {
    h: [f64; 3],
    alpha: [f64; 3],
    terms: Vec<WeightedClass>,
    reconstruction_error: f64,
}

fn decompose(s: &Scenario, w: &mut Writer) -> Result<(Status, String), CliError> {
    if let Some(r) = unsupported(s, w)? {
        return Ok(r);
    }
    let psi = psi_of(s)?;
    let alpha = psi.tau_part();
    let refuse = |w: &mut Writer, message: String| -> Result<(Status, String), CliError> {
        w.json("refusal.json", &Refusal { status: "refused", message: message.clone(), reasons: Vec::new() })?;
        Ok((Status::Refused, format!("decompose: refused: {message}")))
    };
    let h = match solve_h(&psi, &alpha, EulerClass(s.config.manifold.euler)) {
        Ok(h) => h,
        Err(e) => return refuse(w, e.to_string()),
    };
    let terms = match rational_decompose(&h, &alpha) {
        Ok(t) => t,
        Err(e) => return refuse(w, e.to_string()),
    };
    let reconstruction_error = reconstruction_error(&h, &terms);
    w.json(
        "decomposition.json",
        &Decomposition { h: h.0, alpha: alpha.0, terms: terms.clone(), reconstruction_error },
    )?;
    Ok((Status::Pass, format!("decompose: {} terms, reconstruction error {:e}", terms.len(), reconstruction_error)))
}

/// `max |Σ aᵢhᵢ − h|`.
pub(crate) fn reconstruction_error(h: &H2Class, terms: &[WeightedClass]) -> f64 {
    (0..3)
        .map(|i| {
            let sum: f64 = terms.iter().map(|t| t.weight * t.class.0[i] as f64).sum();
            (sum - h.0[i]).abs()
        })
        .fold(0.0, f64::max)
}
