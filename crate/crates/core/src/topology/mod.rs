//! Real cohomology of flat 3-torus mapping tori `N_A` and of circle bundles
//! `M → N`: Gysin maps, cup products, the fibered-class oracle and the
//! symplectic-cone criterion.
//!
//! Coordinates: `H¹` in the basis `B1 = ([dx], [dy], [dθ])`, `H²` in
//! `B2 = ([dy∧dθ], [dθ∧dx], [dx∧dy])`. With `∫ dx∧dy∧dθ = 1` the pairing
//! `H² × H¹ → ℝ` is the dot product of coordinate vectors.

mod rational;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use rational::{rational_decompose, simplest_rational_in, WeightedClass};

/// Relative tolerance for identities that are exact in real arithmetic
/// (`τ∪e = 0`, `p_*(ψ) = [α]`).
pub const EXACT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("monodromy {0:?} does not have determinant 1")]
    NotUnimodular([[i64; 2]; 2]),
    #[error("fiber part τ = {tau:?} does not satisfy τ∪e = 0 (value {value:e})")]
    TauNotInKernel { tau: [f64; 3], value: f64 },
    #[error("class coordinates must be finite")]
    NonFinite,
    #[error("p_*(ψ) = {pushforward:?} differs from [α] = {alpha:?}")]
    PushforwardMismatch { pushforward: [f64; 3], alpha: [f64; 3] },
    #[error("e∪[α] = {0:e} must vanish")]
    EulerPairing(f64),
    #[error("h∪[α] = {0:e} must be positive")]
    NonPositivePairing(f64),
    #[error("rational approximation overflowed 64-bit integers")]
    DenominatorOverflow,
    #[error("monodromy A ≠ I is only supported for Betti numbers")]
    UnsupportedMonodromy,
}

/// The 3-manifold `N_A = T² × [0,1] / (v,1) ~ (Av,0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifoldDescriptor {
    monodromy: [[i64; 2]; 2],
}

impl ManifoldDescriptor {
    pub fn new(monodromy: [[i64; 2]; 2]) -> Result<Self, TopologyError> {
        let [[a, b], [c, d]] = monodromy;
        if a * d - b * c != 1 {
            return Err(TopologyError::NotUnimodular(monodromy));
        }
        Ok(Self { monodromy })
    }

    /// The 3-torus.
    pub fn torus() -> Self {
        Self { monodromy: [[1, 0], [0, 1]] }
    }

    pub fn monodromy(&self) -> [[i64; 2]; 2] {
        self.monodromy
    }

    pub fn is_torus(&self) -> bool {
        self.monodromy == [[1, 0], [0, 1]]
    }

    /// `Aᵀ − I`: its kernel is the monodromy-invariant part of `H¹(T²)`.
    fn fixed_covector_matrix(&self) -> [[i64; 2]; 2] {
        let [[a, b], [c, d]] = self.monodromy;
        [[a - 1, c], [b, d - 1]]
    }
}

/// Bases and Betti numbers of `H¹(N_A)` and `H²(N_A)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CohomologyBasis {
    pub b1: usize,
    pub b2: usize,
    /// Integral closed 1-forms in `(dx, dy, dθ)` coordinates.
    pub h1: Vec<[i64; 3]>,
    /// `B2` when `A = I`; no preferred basis otherwise.
    pub h2: Option<Vec<[i64; 3]>>,
}

/// `H¹(N_A;ℝ) = ℝ·[dθ] ⊕ Fix(Aᵀ)`, and `b₂ = b₁` by Poincaré duality.
pub fn cohomology_basis(desc: &ManifoldDescriptor) -> CohomologyBasis {
    let m = desc.fixed_covector_matrix();
    let mut h1: Vec<[i64; 3]> = Vec::new();
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    if m == [[0, 0], [0, 0]] {
        h1.push([1, 0, 0]);
        h1.push([0, 1, 0]);
    } else if det == 0 {
        // rank one: the kernel is orthogonal to any non-zero row
        let row = if m[0] != [0, 0] { m[0] } else { m[1] };
        let g = gcd(row[0], row[1]);
        h1.push([-row[1] / g, row[0] / g, 0]);
    }
    h1.push([0, 0, 1]);
    let b1 = h1.len();
    let h2 = desc.is_torus().then(|| vec![[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
    CohomologyBasis { b1, b2: b1, h1, h2 }
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Euler class of the circle bundle, in `B2` coordinates of `H²(N;ℤ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EulerClass(pub [i64; 3]);

impl EulerClass {
    pub fn is_zero(&self) -> bool {
        self.0 == [0, 0, 0]
    }

    pub fn as_real(&self) -> [f64; 3] {
        self.0.map(|v| v as f64)
    }

    /// `(d, e/d)` with `d` the divisibility of `e`; `None` for `e = 0`.
    pub fn primitive(&self) -> Option<(u64, [i64; 3])> {
        let g = gcd(gcd(self.0[0], self.0[1]), self.0[2]);
        (g != 0).then(|| (g as u64, self.0.map(|v| v / g)))
    }
}

/// Real class in `H¹(N;ℝ)`, `B1` coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct H1Class(pub [f64; 3]);

/// Real class in `H²(N;ℝ)`, `B2` coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct H2Class(pub [f64; 3]);

/// Integral class in `H²(N;ℤ)`, `B2` coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IntegralH2Class(pub [i64; 3]);

impl H1Class {
    pub fn is_zero(&self) -> bool {
        self.0 == [0.0; 3]
    }
}

impl IntegralH2Class {
    pub fn as_real(&self) -> H2Class {
        H2Class(self.0.map(|v| v as f64))
    }
}

/// Cup product `H² × H¹ → H³ ≅ ℝ`.
pub fn cup_12(h: &H2Class, phi: &H1Class) -> f64 {
    dot(h.0, phi.0)
}

/// A class `ψ ∈ H²(M;ℝ)` in split Gysin coordinates relative to a fixed
/// connection: `ψ = p*(σ) + [p*(τ)∧η]`, with `σ` taken in the orthogonal
/// complement of `ℝ·e` and `τ ∈ ker(∪e)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GysinClass {
    sigma: [f64; 3],
    tau: [f64; 3],
    euler: EulerClass,
}

impl GysinClass {
    /// Reduces `sigma` modulo `e` and checks `τ∪e = 0`.
    pub fn new(sigma: [f64; 3], tau: [f64; 3], euler: EulerClass) -> Result<Self, TopologyError> {
        if sigma.iter().chain(&tau).any(|v| !v.is_finite()) {
            return Err(TopologyError::NonFinite);
        }
        let e = euler.as_real();
        let value = dot(tau, e);
        if value.abs() > EXACT_TOL * (norm(tau) * norm(e)).max(1.0) {
            return Err(TopologyError::TauNotInKernel { tau, value });
        }
        Ok(Self { sigma: reduce_mod_euler(sigma, &euler), tau, euler })
    }

    pub fn sigma_part(&self) -> H2Class {
        H2Class(self.sigma)
    }

    pub fn tau_part(&self) -> H1Class {
        H1Class(self.tau)
    }

    pub fn euler(&self) -> EulerClass {
        self.euler
    }
}

/// Orthogonal projection onto the complement of `ℝ·e` in `B2` coordinates.
pub fn reduce_mod_euler(h: [f64; 3], euler: &EulerClass) -> [f64; 3] {
    if euler.is_zero() {
        return h;
    }
    let e = euler.as_real();
    let t = dot(h, e) / dot(e, e);
    [h[0] - t * e[0], h[1] - t * e[1], h[2] - t * e[2]]
}

/// `ψ² = 2·(σ ∪ τ)`; independent of the `σ`-lift because `τ∪e = 0`.
pub fn square(psi: &GysinClass) -> f64 {
    2.0 * cup_12(&psi.sigma_part(), &psi.tau_part())
}

/// Integration along the fiber `p_* : H²(M) → H¹(N)`.
pub fn gysin_pushforward(psi: &GysinClass) -> H1Class {
    psi.tau_part()
}

/// Pullback `p* : H²(N) → H²(M)`; kills `ℝ·e`.
pub fn gysin_pullback(h: &H2Class, euler: EulerClass) -> GysinClass {
    GysinClass { sigma: reduce_mod_euler(h.0, &euler), tau: [0.0; 3], euler }
}

/// Whether `φ` is represented by a nowhere-vanishing closed 1-form.
///
/// On a flat torus mapping torus every non-zero class has a
/// constant-coefficient representative, so the fibered cone is `H¹ ∖ {0}`.
/// Classes outside `H¹(N_A)` (not monodromy-invariant) are rejected.
pub fn is_fibered_class(phi: &H1Class, desc: &ManifoldDescriptor) -> bool {
    if phi.0.iter().any(|v| !v.is_finite()) || phi.is_zero() {
        return false;
    }
    let m = desc.fixed_covector_matrix();
    let (x, y) = (phi.0[0], phi.0[1]);
    let scale = x.abs().max(y.abs()).max(1.0);
    let r0 = m[0][0] as f64 * x + m[0][1] as f64 * y;
    let r1 = m[1][0] as f64 * x + m[1][1] as f64 * y;
    r0.abs().max(r1.abs()) <= EXACT_TOL * scale
}

/// Reason a class fails the symplectic-cone criterion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum ConeFailure {
    NonPositiveSquare { value: f64 },
    NotFibered { pushforward: [f64; 3] },
    EulerMismatch { class: [i64; 3], bundle: [i64; 3] },
}

impl fmt::Display for ConeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConeFailure::NonPositiveSquare { value } => write!(f, "ψ² ≤ 0 (ψ² = {value})"),
            ConeFailure::NotFibered { pushforward } if *pushforward == [0.0; 3] => {
                write!(f, "p_*(ψ) = 0 not fibered")
            }
            ConeFailure::NotFibered { pushforward } => write!(f, "p_*(ψ) = {pushforward:?} not fibered"),
            ConeFailure::EulerMismatch { class, bundle } => {
                write!(f, "class is split against e = {class:?} but the bundle has e = {bundle:?}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeVerdict {
    pub member: bool,
    pub square: f64,
    pub reasons: Vec<ConeFailure>,
}

/// `ψ` is represented by an invariant symplectic form iff `ψ² > 0` and
/// `p_*(ψ)` lies in the fibered cone. Restricted to the 3-torus base.
pub fn symplectic_cone_membership(psi: &GysinClass, euler: EulerClass) -> ConeVerdict {
    let mut reasons = Vec::new();
    if psi.euler() != euler {
        reasons.push(ConeFailure::EulerMismatch { class: psi.euler().0, bundle: euler.0 });
    }
    let sq = square(psi);
    if sq <= 0.0 {
        reasons.push(ConeFailure::NonPositiveSquare { value: sq });
    }
    let phi = gysin_pushforward(psi);
    if !is_fibered_class(&phi, &ManifoldDescriptor::torus()) {
        reasons.push(ConeFailure::NotFibered { pushforward: phi.0 });
    }
    ConeVerdict { member: reasons.is_empty(), square: sq, reasons }
}

/// The class `h ∈ H²(N;ℝ)` with `p*(h) = ψ − [p*(α)∧η]`, taken as the
/// canonical lift (no component along `e`). Then `h∪[α] = ½ψ²`.
pub fn solve_h(psi: &GysinClass, alpha: &H1Class, euler: EulerClass) -> Result<H2Class, TopologyError> {
    let tau = psi.tau_part().0;
    let scale = norm(tau).max(norm(alpha.0)).max(1.0);
    if (0..3).any(|i| (tau[i] - alpha.0[i]).abs() > EXACT_TOL * scale) {
        return Err(TopologyError::PushforwardMismatch { pushforward: tau, alpha: alpha.0 });
    }
    let pairing = dot(euler.as_real(), alpha.0);
    if pairing.abs() > EXACT_TOL * scale * norm(euler.as_real()).max(1.0) {
        return Err(TopologyError::EulerPairing(pairing));
    }
    Ok(H2Class(reduce_mod_euler(psi.sigma_part().0, &euler)))
}
