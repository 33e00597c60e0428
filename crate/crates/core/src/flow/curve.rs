use std::f64::consts::TAU;
use std::io;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::forms::Point;

/// Euclidean distance in `ℝ³/ℤ³`.
pub fn torus_distance(a: Point, b: Point) -> f64 {
    (0..3)
        .map(|i| {
            let d = a[i] - b[i];
            let d = d - d.round();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

fn wrap_unit(x: f64) -> f64 {
    let r = x.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A closed loop sampled at `tᵢ = i/n` with points in `[0,1)³`. The loop
/// closes up to the lattice translation `homology`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveRepr")]
pub struct ParamCurve {
    points: Vec<Point>,
    homology: [i64; 3],
}

/// `{"homology": [a,b,c], "samples": [[t,x,y,θ], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRepr {
    homology: [i64; 3],
    samples: Vec<[f64; 4]>,
}

impl From<ParamCurve> for CurveRepr {
    fn from(c: ParamCurve) -> Self {
        let n = c.points.len() as f64;
        let samples = c.points.iter().enumerate().map(|(i, p)| [i as f64 / n, p[0], p[1], p[2]]).collect();
        Self { homology: c.homology, samples }
    }
}

impl TryFrom<CurveRepr> for ParamCurve {
    type Error = String;

    fn try_from(r: CurveRepr) -> Result<Self, String> {
        let n = r.samples.len() as f64;
        for (i, s) in r.samples.iter().enumerate() {
            if (s[0] - i as f64 / n).abs() > 1e-12 {
                return Err(format!("sample {i} has parameter {} but the grid is uniform", s[0]));
            }
        }
        ParamCurve::new(r.samples.iter().map(|s| [s[1], s[2], s[3]]).collect(), r.homology)
    }
}

impl ParamCurve {
    /// Checks the points lie in `[0,1)³` and that unwrapping by minimum
    /// image reproduces `homology`.
    pub fn new(points: Vec<Point>, homology: [i64; 3]) -> Result<Self, String> {
        if points.len() < 4 {
            return Err(format!("need at least 4 samples, got {}", points.len()));
        }
        if let Some(p) = points.iter().find(|p| p.iter().any(|x| !(0.0..1.0).contains(x))) {
            return Err(format!("point {p:?} outside [0,1)^3"));
        }
        let curve = Self { points, homology };
        let lifted = curve.lifted();
        let last = lifted[lifted.len() - 1];
        let first = curve.points[0];
        for i in 0..3 {
            let step = first[i] + homology[i] as f64 - last[i];
            if step.abs() >= 0.5 {
                return Err(format!(
                    "closing step {step} along axis {i} is too long for homology {homology:?}; sample more densely"
                ));
            }
        }
        Ok(curve)
    }

    /// From points on the universal cover with `lifted[n] = lifted[0] + homology`.
    pub fn from_lifted(lifted: Vec<Point>, homology: [i64; 3]) -> Result<Self, String> {
        Self::new(lifted.into_iter().map(|p| p.map(wrap_unit)).collect(), homology)
    }

    /// Samples `f` at `i/n`; the homology is `f(1) − f(0)`, which must be
    /// integral.
    pub fn from_lifted_fn(n: usize, f: impl Fn(f64) -> Point) -> Result<Self, String> {
        let (a, b) = (f(0.0), f(1.0));
        let mut homology = [0i64; 3];
        for i in 0..3 {
            let d = b[i] - a[i];
            if (d - d.round()).abs() > 1e-9 {
                return Err(format!("f(1) − f(0) = {d} along axis {i} is not an integer"));
            }
            homology[i] = d.round() as i64;
        }
        Self::from_lifted((0..n).map(|i| f(i as f64 / n as f64)).collect(), homology)
    }

    /// The closed geodesic `t ↦ base + t·z`.
    pub fn geodesic(base: Point, z: [i64; 3], n: usize) -> Self {
        Self::from_lifted_fn(n, |t| [base[0] + t * z[0] as f64, base[1] + t * z[1] as f64, base[2] + t * z[2] as f64])
            .expect("geodesic with enough samples")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn homology(&self) -> [i64; 3] {
        self.homology
    }

    /// Unwraps consecutive samples by minimum image, starting at the first.
    pub fn lifted(&self) -> Vec<Point> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut prev = self.points[0];
        out.push(prev);
        for p in &self.points[1..] {
            let next: Point = std::array::from_fn(|i| {
                let d = p[i] - prev[i];
                prev[i] + d - d.round()
            });
            out.push(next);
            prev = next;
        }
        out
    }

    /// `γ′(tᵢ)` by spectral differentiation of the periodic part
    /// `γ(t) − t·homology`.
    pub fn tangents(&self) -> Vec<[f64; 3]> {
        let n = self.points.len();
        let lifted = self.lifted();
        let mut planner = FftPlanner::<f64>::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut out = vec![[0.0; 3]; n];
        for axis in 0..3 {
            let z = self.homology[axis] as f64;
            let mut buf: Vec<Complex64> =
                (0..n).map(|i| Complex64::new(lifted[i][axis] - z * i as f64 / n as f64, 0.0)).collect();
            fwd.process(&mut buf);
            for (j, c) in buf.iter_mut().enumerate() {
                let k = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
                *c = if 2 * j == n { Complex64::default() } else { *c * Complex64::new(0.0, TAU * k as f64) };
            }
            inv.process(&mut buf);
            for i in 0..n {
                out[i][axis] = z + buf[i].re / n as f64;
            }
        }
        out
    }

    /// Pairs of samples within `distance` of each other on the torus whose
    /// separation along the curve exceeds `2·distance`.
    pub fn near_self_intersections(&self, distance: f64, limit: usize) -> Vec<(usize, usize, f64)> {
        let n = self.points.len();
        let lifted = self.lifted();
        let mut arc = vec![0.0; n + 1];
        for i in 0..n {
            let next =
                if i + 1 < n { lifted[i + 1] } else { std::array::from_fn(|a| lifted[0][a] + self.homology[a] as f64) };
            let step = (0..3).map(|a| (next[a] - lifted[i][a]).powi(2)).sum::<f64>().sqrt();
            arc[i + 1] = arc[i] + step;
        }
        let total = arc[n];
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let along = arc[j] - arc[i];
                if along.min(total - along) <= 2.0 * distance {
                    continue;
                }
                let d = torus_distance(self.points[i], self.points[j]);
                if d < distance {
                    out.push((i, j, d));
                    if out.len() >= limit {
                        return out;
                    }
                }
            }
        }
        out
    }

    /// `t,x,y,theta` rows.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "x", "y", "theta"])?;
        let n = self.points.len() as f64;
        for (i, p) in self.points.iter().enumerate() {
            w.serialize((i as f64 / n, p[0], p[1], p[2]))?;
        }
        w.flush()?;
        Ok(())
    }
}
