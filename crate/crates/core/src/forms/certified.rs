use serde::{Deserialize, Serialize};

use super::field::ScalarField;
use super::spectral;

/// Rigorous lower bound on the minimum of a trigonometric polynomial over the
/// whole torus, from samples on a uniform grid.
///
/// Every point lies within sup-norm distance `h/2` of a grid node, and
/// `lipschitz_bound` is a Lipschitz constant in that norm, so
/// `certified_lower = grid_min − lipschitz_bound·h/2 − tail_bound` is sound.
/// `tail_bound` covers floating-point error of the grid evaluation plus any
/// caller-supplied bound on coefficients that were truncated away.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifiedBound {
    pub grid_min: f64,
    pub tail_bound: f64,
    pub lipschitz_bound: f64,
    pub certified_lower: f64,
    pub resolution: usize,
}

/// See [`certified_min_with_tail`].
pub fn certified_min(f: &ScalarField, resolution: usize) -> CertifiedBound {
    certified_min_with_tail(f, resolution, 0.0)
}

/// Certified lower bound of `f + g` for an unknown `g` with `sup|g| ≤ extra_tail`.
///
/// Panics if `resolution < 2K+1`.
pub fn certified_min_with_tail(f: &ScalarField, resolution: usize, extra_tail: f64) -> CertifiedBound {
    let k = f.truncation();
    assert!(resolution > 2 * k, "resolution {resolution} below 2K+1 = {}", 2 * k + 1);
    let slab_mins = spectral::synthesize_map(f.dense(), k, resolution, |_, slab| {
        slab.iter().copied().fold(f64::INFINITY, f64::min)
    });
    let grid_min = slab_mins.into_iter().fold(f64::INFINITY, f64::min);
    let lipschitz_bound = f.lipschitz_bound();
    let tail_bound = roundoff_bound(f, resolution) + extra_tail.max(0.0);
    let h = 1.0 / resolution as f64;
    CertifiedBound {
        grid_min,
        tail_bound,
        lipschitz_bound,
        certified_lower: grid_min - lipschitz_bound * h / 2.0 - tail_bound,
        resolution,
    }
}

/// Largest lattice [`certify_positive`] refines to.
pub const MAX_REFINED_GRID: usize = 512;

/// [`certified_min_with_tail`] starting at `resolution` (raised to `2K+1` if
/// needed) and doubling up to [`MAX_REFINED_GRID`] until the bound is
/// positive. Returns the last bound computed.
pub fn certify_positive(f: &ScalarField, resolution: usize, extra_tail: f64) -> CertifiedBound {
    let mut n = resolution.max(2 * f.truncation() + 1);
    loop {
        let b = certified_min_with_tail(f, n, extra_tail);
        if b.certified_lower > 0.0 || b.grid_min <= extra_tail || 2 * n > MAX_REFINED_GRID.max(n) {
            return b;
        }
        n *= 2;
    }
}

/// Conservative bound on the floating-point error of the staged grid
/// transform: a few ulps per butterfly level, scaled by `Σ|c_k|`.
fn roundoff_bound(f: &ScalarField, resolution: usize) -> f64 {
    if f.is_constant() {
        return 0.0;
    }
    let levels = 3.0 * (resolution as f64).log2().ceil() + 3.0;
    8.0 * f64::EPSILON * levels * f.l1_norm()
}
