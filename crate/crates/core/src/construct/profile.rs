use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

/// Radial plateau bump on the unit disk: `scale` on `s ≤ plateau`, a
/// degree-9 (C⁴) polynomial ramp down to zero at `s = support`, zero beyond.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    plateau: f64,
    support: f64,
    scale: f64,
}

/// Default plateau radius; strictly above ½ so the bump is positive on the
/// closed half disk.
pub const DEFAULT_PLATEAU: f64 = 0.55;
pub const DEFAULT_SUPPORT: f64 = 0.95;

const GL_NODES: usize = 24;

impl Default for BumpProfile {
    fn default() -> Self {
        Self::new(DEFAULT_PLATEAU, DEFAULT_SUPPORT).expect("default radii")
    }
}

impl BumpProfile {
    /// Unit-height profile; `0 < plateau < support < 1`.
    pub fn new(plateau: f64, support: f64) -> Option<Self> {
        (0.0 < plateau && plateau < support && support < 1.0).then_some(Self { plateau, support, scale: 1.0 })
    }

    /// Rescaled so that `∫_{ℝ²} ρ = target`, using the same quadrature as
    /// [`BumpProfile::hat`] so `hat(0)` reproduces `target`.
    pub fn normalized(self, target: f64) -> Self {
        let unit = Self { scale: 1.0, ..self };
        Self { scale: target / unit.hat(0.0), ..self }
    }

    pub fn plateau(&self) -> f64 {
        self.plateau
    }

    pub fn support(&self) -> f64 {
        self.support
    }

    pub fn value(&self, s: f64) -> f64 {
        if s <= self.plateau {
            self.scale
        } else if s >= self.support {
            0.0
        } else {
            self.scale * smoothstep((self.support - s) / (self.support - self.plateau))
        }
    }

    /// 2D Fourier transform `∫ρ(|x|)e^{−2πiξ·x}dx = 2π∫₀¹ ρ(s)J₀(2π|ξ|s)s ds`
    /// at `|ξ| = kappa`, by Gauss–Legendre on the two polynomial pieces.
    pub fn hat(&self, kappa: f64) -> f64 {
        let w = TAU * kappa;
        let piece = |a: f64, b: f64| -> f64 {
            let subdivisions = 1 + (kappa * (b - a) * 2.0).ceil() as usize;
            let h = (b - a) / subdivisions as f64;
            let (nodes, weights) = gauss_legendre();
            let mut total = 0.0;
            for j in 0..subdivisions {
                let lo = a + j as f64 * h;
                for (x, wt) in nodes.iter().zip(weights) {
                    let s = lo + 0.5 * h * (x + 1.0);
                    total += 0.5 * h * wt * self.value(s) * libm::j0(w * s) * s;
                }
            }
            total
        };
        TAU * (piece(0.0, self.plateau) + piece(self.plateau, self.support))
    }
}

/// `x⁵(126 − 420x + 540x² − 315x³ + 70x⁴)`, clamped to `[0, 1]`.
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x.powi(5) * (126.0 + x * (-420.0 + x * (540.0 + x * (-315.0 + x * 70.0))))
}

/// Nodes and weights on `[−1, 1]`.
fn gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let n = GL_NODES;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    (p0, p1) = (p1, p2);
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        (nodes, weights)
    })
}
