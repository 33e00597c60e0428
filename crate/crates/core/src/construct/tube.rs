use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::profile::BumpProfile;
use super::ConstructError;
use crate::forms::{Point, ScalarField};
use crate::topology::gcd;

/// Axes longer than this are refused: lattice searches scale with `|z|³`.
pub const MAX_AXIS_NORM: f64 = 32.0;

pub(crate) fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = dot(a, a).sqrt();
    a.map(|v| v / n)
}

fn det(c0: [f64; 3], c1: [f64; 3], c2: [f64; 3]) -> f64 {
    dot(c0, cross(c1, c2))
}

fn as_real(z: [i64; 3]) -> [f64; 3] {
    z.map(|v| v as f64)
}

/// `f(t,u,w) = q + t·z + ε(u·e_u + w·e_w) mod ℤ³` on `S¹ × D²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeEmbedding {
    basepoint: Point,
    axis: [i64; 3],
    e_u: [f64; 3],
    e_w: [f64; 3],
    radius: f64,
}

impl TubeEmbedding {
    /// Requires a primitive axis, `ε > 0` and a positively oriented frame
    /// `det[z, e_u, e_w] > 0`.
    pub fn new(
        basepoint: Point,
        axis: [i64; 3],
        e_u: [f64; 3],
        e_w: [f64; 3],
        radius: f64,
    ) -> Result<Self, ConstructError> {
        if gcd(gcd(axis[0], axis[1]), axis[2]) != 1 {
            return Err(ConstructError::InvalidTube(format!("axis {axis:?} is not primitive")));
        }
        if dot(as_real(axis), as_real(axis)).sqrt() > MAX_AXIS_NORM {
            return Err(ConstructError::InvalidTube(format!("axis {axis:?} is longer than {MAX_AXIS_NORM}")));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(ConstructError::InvalidTube(format!("radius {radius} must be positive")));
        }
        if !(det(as_real(axis), e_u, e_w) > 0.0) {
            return Err(ConstructError::InvalidTube("frame (z, e_u, e_w) is not positively oriented".into()));
        }
        Ok(Self { basepoint: basepoint.map(|x| x.rem_euclid(1.0)), axis, e_u, e_w, radius })
    }

    pub fn basepoint(&self) -> Point {
        self.basepoint
    }

    pub fn axis(&self) -> [i64; 3] {
        self.axis
    }

    pub fn frame(&self) -> ([f64; 3], [f64; 3]) {
        (self.e_u, self.e_w)
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// The same tube translated by `shift`.
    pub fn translated(&self, shift: [f64; 3]) -> Self {
        let b = self.basepoint;
        Self { basepoint: [0, 1, 2].map(|i| (b[i] + shift[i]).rem_euclid(1.0)), ..*self }
    }

    pub fn map(&self, t: f64, u: f64, w: f64) -> Point {
        let z = as_real(self.axis);
        let e = self.radius;
        [0, 1, 2].map(|i| (self.basepoint[i] + t * z[i] + e * (u * self.e_u[i] + w * self.e_w[i])).rem_euclid(1.0))
    }

    /// Columns `f_*∂t, f_*∂u, f_*∂w`.
    pub fn jacobian_columns(&self) -> [[f64; 3]; 3] {
        let e = self.radius;
        [as_real(self.axis), self.e_u.map(|v| e * v), self.e_w.map(|v| e * v)]
    }

    pub fn jacobian_det(&self) -> f64 {
        let [a, b, c] = self.jacobian_columns();
        det(a, b, c)
    }

    /// Rows `dt, du, dw` of the inverse Jacobian, as covectors on `T³`.
    pub fn coframe(&self) -> [[f64; 3]; 3] {
        let [a, b, c] = self.jacobian_columns();
        let d = det(a, b, c);
        [cross(b, c).map(|v| v / d), cross(c, a).map(|v| v / d), cross(a, b).map(|v| v / d)]
    }

    /// `(t, u, w)` with `f(t, u, w) = basepoint + v` for a vector `v`.
    pub fn local_coords(&self, v: [f64; 3]) -> [f64; 3] {
        self.coframe().map(|row| dot(row, v))
    }

    /// Reduced basis of the projection of `ℤ³` along the axis, in
    /// normalized `(u, w)` units.
    pub fn transverse_lattice(&self) -> TransverseLattice {
        let z = self.axis;
        let r = dot(as_real(z), as_real(z)).sqrt().ceil() as i64 + 2;
        let mut candidates: Vec<(f64, [i64; 3])> = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                for c in -r..=r {
                    let l = [a, b, c];
                    if l == [0, 0, 0] || is_parallel(l, z) {
                        continue;
                    }
                    let p = self.project(l);
                    candidates.push((p[0] * p[0] + p[1] * p[1], l));
                }
            }
        }
        candidates.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        let l1 = candidates[0].1;
        let l2 = candidates
            .iter()
            .map(|c| c.1)
            .find(|l| int_det(z, l1, *l).abs() == 1)
            .expect("a completing vector within the search box");
        TransverseLattice { generators: [l1, l2], projections: [self.project(l1), self.project(l2)] }
    }

    fn project(&self, l: [i64; 3]) -> [f64; 2] {
        let c = self.local_coords(as_real(l));
        [c[1], c[2]]
    }

    /// Whether `f` is injective on the support of `profile`.
    pub fn is_embedded(&self, profile: &BumpProfile) -> bool {
        self.transverse_lattice().minimum() > 2.0 * profile.support()
    }

    /// `ρ(u, w)` at `p`, summed over every preimage of `p`: a direct
    /// geometric evaluation of the tube field.
    pub fn sample(&self, profile: &BumpProfile, p: Point) -> f64 {
        let lattice = self.transverse_lattice();
        let [b1, b2] = lattice.projections;
        let local = self.local_coords([0, 1, 2].map(|i| p[i] - self.basepoint[i]));
        let d = b1[0] * b2[1] - b1[1] * b2[0];
        let c1 = ((local[1] * b2[1] - local[2] * b2[0]) / d).round();
        let c2 = ((b1[0] * local[2] - b1[1] * local[1]) / d).round();
        let base = [local[1] - c1 * b1[0] - c2 * b2[0], local[2] - c1 * b1[1] - c2 * b2[1]];
        let len = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
        let reach = (1.2 * (profile.support() + len(b1) + len(b2)) / lattice.minimum()).ceil() as i64;
        let mut total = 0.0;
        for i in -reach..=reach {
            for j in -reach..=reach {
                let u = base[0] + i as f64 * b1[0] + j as f64 * b2[0];
                let w = base[1] + i as f64 * b1[1] + j as f64 * b2[1];
                total += profile.value((u * u + w * w).sqrt());
            }
        }
        total
    }
}

fn is_parallel(a: [i64; 3], b: [i64; 3]) -> bool {
    a[0] * b[1] == a[1] * b[0] && a[0] * b[2] == a[2] * b[0] && a[1] * b[2] == a[2] * b[1]
}

fn int_det(a: [i64; 3], b: [i64; 3], c: [i64; 3]) -> i64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// A 2D lattice `Λ = π(ℤ³)` given by integer lifts and their projections.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseLattice {
    pub generators: [[i64; 3]; 2],
    pub projections: [[f64; 2]; 2],
}

impl TransverseLattice {
    /// Length of the shortest non-zero vector (the first generator).
    pub fn minimum(&self) -> f64 {
        let p = self.projections[0];
        (p[0] * p[0] + p[1] * p[1]).sqrt()
    }

    /// Covering radius: circumradius of the acute triangle spanned by the
    /// reduced basis.
    pub fn covering_radius(&self) -> f64 {
        let [a, mut b] = self.projections;
        if a[0] * b[0] + a[1] * b[1] < 0.0 {
            b = [-b[0], -b[1]];
        }
        let len = |v: [f64; 2]| (v[0] * v[0] + v[1] * v[1]).sqrt();
        let area = 0.5 * (a[0] * b[1] - a[1] * b[0]).abs();
        len(a) * len(b) * len([a[0] - b[0], a[1] - b[1]]) / (4.0 * area)
    }

    /// Distance from `x` to the nearest point of `Λ/m`.
    pub fn distance_to_refinement(&self, x: [f64; 2], m: usize) -> f64 {
        let s = m as f64;
        let [a, b] = self.projections.map(|v| [v[0] / s, v[1] / s]);
        let d = a[0] * b[1] - a[1] * b[0];
        let c1 = (x[0] * b[1] - x[1] * b[0]) / d;
        let c2 = (a[0] * x[1] - a[1] * x[0]) / d;
        let (f1, f2) = (c1.floor(), c2.floor());
        let mut best = f64::INFINITY;
        for i in -1..=2 {
            for j in -1..=2 {
                let (n1, n2) = (f1 + i as f64, f2 + j as f64);
                let dx = x[0] - n1 * a[0] - n2 * b[0];
                let dy = x[1] - n1 * a[1] - n2 * b[1];
                best = best.min((dx * dx + dy * dy).sqrt());
            }
        }
        best
    }
}

/// Fourier coefficients of `Σ_tubes ρ∘f⁻¹` for tubes sharing one axis,
/// frame and radius:
/// `ĉ_k = |det J|·ρ̂(ε k·e_u, ε k·e_w)·Σ_q e^{−2πik·q}` when `k·z = 0`, and
/// zero otherwise.
pub(crate) fn tube_family_field(k: usize, tubes: &[TubeEmbedding], profile: &BumpProfile) -> ScalarField {
    let Some(first) = tubes.first() else {
        return ScalarField::zero(k);
    };
    debug_assert!(tubes.iter().all(|t| t.axis == first.axis && t.e_u == first.e_u && t.e_w == first.e_w));
    let [_, uc, wc] = first.jacobian_columns();
    let z = first.axis;
    let jac = first.jacobian_det().abs();
    let ki = k as i64;
    let mut entries = Vec::new();
    for a in -ki..=ki {
        for b in -ki..=ki {
            for c in -ki..=ki {
                if a * z[0] + b * z[1] + c * z[2] != 0 {
                    continue;
                }
                let f = [a as f64, b as f64, c as f64];
                let (ku, kw) = (dot(f, uc), dot(f, wc));
                let hat = profile.hat((ku * ku + kw * kw).sqrt());
                let phase: Complex64 =
                    tubes.iter().map(|t| Complex64::from_polar(1.0, -TAU * dot(f, t.basepoint))).sum();
                entries.push(([a, b, c], phase * (jac * hat)));
            }
        }
    }
    ScalarField::from_coefficients(k, entries).expect("tube coefficients are Hermitian")
}
