//! Shared generators and direct-summation oracles for the integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use std::sync::Arc;

use circlesym::flow::ParamCurve;
use circlesym::forms::{basis, Form, InvariantForm, Point, ScalarField};
use circlesym::topology::{rational_decompose, H1Class, H2Class};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Random real trigonometric polynomial with `terms` modes of sup-norm
/// frequency at most `band`, stored at truncation `k ≥ band`.
pub fn random_field(rng: &mut ChaCha8Rng, k: usize, band: i64, terms: usize) -> ScalarField {
    let mut f = ScalarField::constant(k, rng.gen_range(-1.0..1.0));
    for _ in 0..terms {
        let freq = [rng.gen_range(-band..=band), rng.gen_range(-band..=band), rng.gen_range(-band..=band)];
        let a = rng.gen_range(-1.0..1.0);
        let b = rng.gen_range(-1.0..1.0);
        f = &f + &ScalarField::cos(k, freq, a);
        f = &f + &ScalarField::sin(k, freq, b);
    }
    f
}

pub fn random_form(rng: &mut ChaCha8Rng, degree: usize, k: usize, band: i64, terms: usize) -> Form {
    let comps = basis(degree).iter().map(|_| random_field(rng, k, band, terms)).collect();
    Form::from_components(degree, comps).unwrap()
}

/// `Σ c_k e^{2πik·p}` summed directly over the stored coefficients.
pub fn direct_value(f: &ScalarField, p: Point) -> f64 {
    f.nonzero()
        .map(|(k, c)| {
            let phase = TAU * (k[0] as f64 * p[0] + k[1] as f64 * p[1] + k[2] as f64 * p[2]);
            c.re * phase.cos() - c.im * phase.sin()
        })
        .sum()
}

/// `∂_axis f(p)` summed directly.
pub fn direct_partial(f: &ScalarField, axis: usize, p: Point) -> f64 {
    f.nonzero()
        .map(|(k, c)| {
            let phase = TAU * (k[0] as f64 * p[0] + k[1] as f64 * p[1] + k[2] as f64 * p[2]);
            let w = TAU * k[axis] as f64;
            -w * (c.re * phase.sin() + c.im * phase.cos())
        })
        .sum()
}

/// Pointwise exterior algebra on `ℝⁿ`, `n ≤ 4`: coefficients indexed by
/// the bitmask of the basis covectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Alt {
    pub coeffs: [f64; 16],
}

impl Alt {
    pub fn zero() -> Self {
        Self { coeffs: [0.0; 16] }
    }

    /// Sign of `dx_I ∧ dx_J` reordered to increasing order, by counting
    /// inversions directly.
    pub fn sign(i: u8, j: u8) -> f64 {
        if i & j != 0 {
            return 0.0;
        }
        let mut inversions = 0;
        for a in 0..4 {
            if i & (1 << a) == 0 {
                continue;
            }
            for b in 0..a {
                if j & (1 << b) != 0 {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    pub fn wedge(&self, other: &Alt) -> Alt {
        let mut out = Alt::zero();
        for i in 0..16u8 {
            for j in 0..16u8 {
                let s = Self::sign(i, j);
                if s != 0.0 {
                    out.coeffs[(i | j) as usize] += s * self.coeffs[i as usize] * other.coeffs[j as usize];
                }
            }
        }
        out
    }

    pub fn max_diff(&self, other: &Alt) -> f64 {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Values of a form's components at `p`, placed at their bitmasks.
pub fn form_at(form: &Form, p: Point) -> Alt {
    let mut out = Alt::zero();
    for (idx, f) in basis(form.degree()).iter().zip(form.components()) {
        out.coeffs[*idx as usize] = direct_value(f, p);
    }
    out
}

/// `d` at `p` from directly summed partial derivatives:
/// `(dω)_{I∪i} = Σ sign(i, I)·∂_i ω_I`.
pub fn d_at(form: &Form, p: Point) -> Alt {
    let comps: Vec<(u8, &ScalarField)> = basis(form.degree()).iter().copied().zip(form.components()).collect();
    d_components_at(&comps, p)
}

/// As [`d_at`] for components on `ℝ⁴` (bit 3 a fourth coordinate nothing
/// depends on).
pub fn d_components_at(comps: &[(u8, &ScalarField)], p: Point) -> Alt {
    let mut out = Alt::zero();
    for (idx, f) in comps {
        for axis in 0..3 {
            let bit = 1u8 << axis;
            let s = Alt::sign(bit, *idx);
            if s != 0.0 {
                out.coeffs[(bit | idx) as usize] += s * direct_partial(f, axis, p);
            }
        }
    }
    out
}

pub fn random_point(rng: &mut ChaCha8Rng) -> Point {
    [rng.gen(), rng.gen(), rng.gen()]
}

/// `t ↦ base + t·z + Σⱼ amplitude·(aⱼ sin 2πjt + bⱼ(cos 2πjt − 1))/j`
/// with random `aⱼ, bⱼ ∈ [−1, 1]³`.
pub fn random_loop(rng: &mut ChaCha8Rng, homology: [i64; 3], amplitude: f64, harmonics: usize, n: usize) -> ParamCurve {
    let base = random_point(rng);
    let terms: Vec<([f64; 3], [f64; 3])> = (0..harmonics)
        .map(|_| (std::array::from_fn(|_| rng.gen_range(-1.0..1.0)), std::array::from_fn(|_| rng.gen_range(-1.0..1.0))))
        .collect();
    ParamCurve::from_lifted_fn(n, |t| {
        let mut p: Point = std::array::from_fn(|i| base[i] + t * homology[i] as f64);
        for (j, (a, b)) in terms.iter().enumerate() {
            let f = (j + 1) as f64;
            let (s, c) = (TAU * f * t).sin_cos();
            for i in 0..3 {
                p[i] += amplitude * (a[i] * s + b[i] * (c - 1.0)) / f;
            }
        }
        p
    })
    .expect("smooth loop")
}

/// Components of `p*σ + p*τ∧dφ` on the 4-torus with trivial bundle, `φ` the
/// fiber coordinate (bit 3).
pub fn t4_components(w: &InvariantForm) -> Vec<(u8, &ScalarField)> {
    let mut out: Vec<(u8, &ScalarField)> = basis(w.degree()).iter().copied().zip(w.sigma().components()).collect();
    if let Some(t) = w.tau() {
        out.extend(basis(t.degree()).iter().map(|i| i | 8).zip(t.components()));
    }
    out
}

pub fn t4_at(w: &InvariantForm, p: Point) -> Alt {
    let mut out = Alt::zero();
    for (idx, f) in t4_components(w) {
        out.coeffs[idx as usize] = direct_value(f, p);
    }
    out
}

/// Random invariant form on the trivial bundle (`γ = 0`).
pub fn random_invariant(rng: &mut ChaCha8Rng, degree: usize, k: usize, band: i64) -> InvariantForm {
    let gamma = Arc::new(Form::zero(2, k));
    let sigma = random_form(rng, degree, k, band, 3);
    let tau = (degree > 0).then(|| random_form(rng, degree - 1, k, band, 3));
    InvariantForm::new(sigma, tau, gamma).unwrap()
}

/// `∫_{[0,a]×T²} dβ − (∫_{{a}×T²} β − ∫_{{0}×T²} β)` for a 2-form `β`, with
/// `{x}×T²` oriented by `dy∧dθ`; both sides summed directly from the series.
pub fn slab_stokes_defect(beta: &Form, a: f64) -> f64 {
    let db = beta.exterior_derivative();
    let volume: f64 = db.components()[0]
        .nonzero()
        .filter(|(k, _)| k[1] == 0 && k[2] == 0)
        .map(|(k, c)| {
            if k[0] == 0 {
                c.re * a
            } else {
                // ∫₀ᵃ Re(c e^{2πikx}) dx
                let w = TAU * k[0] as f64;
                (c.re * (w * a).sin() + c.im * ((w * a).cos() - 1.0)) / w
            }
        })
        .sum();
    let yt = beta.component(0b110).unwrap();
    let slice = |x: f64| -> f64 {
        yt.nonzero()
            .filter(|(k, _)| k[1] == 0 && k[2] == 0)
            .map(|(k, c)| {
                let ph = TAU * k[0] as f64 * x;
                c.re * ph.cos() - c.im * ph.sin()
            })
            .sum()
    };
    volume - (slice(a) - slice(0.0))
}

const IRRATIONALS: [f64; 5] =
    [std::f64::consts::SQRT_2, std::f64::consts::PI, std::f64::consts::E, 0.5772156649015329, 1.618033988749895];

/// A coordinate that is either a uniform real, a small rational, or a
/// signed irrational constant.
pub fn class_coordinate(rng: &mut ChaCha8Rng) -> f64 {
    match rng.gen_range(0..3) {
        0 => rng.gen_range(-3.0..3.0),
        1 => rng.gen_range(-12i64..=12) as f64 / rng.gen_range(1i64..=7) as f64,
        _ => IRRATIONALS[rng.gen_range(0..IRRATIONALS.len())] * if rng.gen() { 1.0 } else { -1.0 },
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Random `(h, α)` with `h∪α > 10⁻³`.
pub fn random_positive_pair(rng: &mut ChaCha8Rng) -> (H2Class, H1Class) {
    loop {
        let h = [class_coordinate(rng), class_coordinate(rng), class_coordinate(rng)];
        let a = [class_coordinate(rng), class_coordinate(rng), class_coordinate(rng)];
        if dot(h, a) > 1e-3 {
            return (H2Class(h), H1Class(a));
        }
    }
}

/// Runs the decomposition and checks weights, pairings and reconstruction.
pub fn check_decomposition(h: &H2Class, alpha: &H1Class) -> Result<(), String> {
    let terms = rational_decompose(h, alpha).map_err(|e| e.to_string())?;
    if terms.is_empty() {
        return Err("no terms".into());
    }
    let mut sum = [0.0; 3];
    for t in &terms {
        if !(t.weight >= 0.0) {
            return Err(format!("negative weight {}", t.weight));
        }
        let class = t.class.0.map(|v| v as f64);
        if !(dot(class, alpha.0) > 0.0) {
            return Err(format!("class {:?} pairs non-positively with α", t.class.0));
        }
        for i in 0..3 {
            sum[i] += t.weight * class[i];
        }
    }
    let err = (0..3).map(|i| (sum[i] - h.0[i]).abs()).fold(0.0, f64::max);
    if err > 1e-12 {
        return Err(format!("reconstruction error {err:e}"));
    }
    Ok(())
}

/// Minimum over the `n³` grid by direct summation of the series, with the
/// exponentials factored into per-axis tables.
pub fn dense_min(f: &ScalarField, n: usize) -> f64 {
    let modes: Vec<(f64, f64)> = f.nonzero().map(|(_, c)| (c.re, c.im)).collect();
    let table = |a: i64| -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| (TAU * (a * i as i64).rem_euclid(n as i64) as f64 / n as f64).sin_cos())
            .map(|(s, c)| (c, s))
            .collect()
    };
    let tables: Vec<[Vec<(f64, f64)>; 3]> = f.nonzero().map(|(k, _)| [table(k[0]), table(k[1]), table(k[2])]).collect();
    (0..n * n * n)
        .into_par_iter()
        .map(|i| {
            let (a, b, c) = (i / (n * n), (i / n) % n, i % n);
            let mut total = 0.0;
            for ((re, im), t) in modes.iter().zip(&tables) {
                let (x, y, z) = (t[0][a], t[1][b], t[2][c]);
                let xy = (x.0 * y.0 - x.1 * y.1, x.0 * y.1 + x.1 * y.0);
                let e = (xy.0 * z.0 - xy.1 * z.1, xy.0 * z.1 + xy.1 * z.0);
                total += re * e.0 - im * e.1;
            }
            total
        })
        .reduce(|| f64::INFINITY, f64::min)
}

/// For constant `α = c` the flow is a translation along `c/|c|²`, so the
/// transversalized loop is `γ(t) − (c·(γ(t) − γ(0)) − mt)·c/|c|²`.
pub fn translated_loop(curve: &ParamCurve, c: [f64; 3]) -> Vec<Point> {
    let m = dot(c, curve.homology().map(|v| v as f64));
    let n2 = dot(c, c);
    let lifted = curve.lifted();
    let p0 = lifted[0];
    lifted
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let t = i as f64 / lifted.len() as f64;
            let shift = dot(c, [p[0] - p0[0], p[1] - p0[1], p[2] - p0[2]]) - m * t;
            [p[0] - shift * c[0] / n2, p[1] - shift * c[1] / n2, p[2] - shift * c[2] / n2]
        })
        .collect()
}
