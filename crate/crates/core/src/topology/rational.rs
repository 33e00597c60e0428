//! Writing a real class `h` with `h∪α > 0` as a positive combination of
//! integral classes that each pair positively with `α`.

use serde::{Deserialize, Serialize};

use super::{gcd, H1Class, H2Class, IntegralH2Class, TopologyError};

/// `weight · class`, with `weight > 0` and `class ∪ α > 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedClass {
    pub weight: f64,
    pub class: IntegralH2Class,
}

/// Largest denominator for which a coordinate is read as an exact rational.
const MAX_RECOGNIZED_DENOMINATOR: i64 = 1 << 20;
/// Tolerance, in units of `ε·max(1,|x|)`, for rational recognition.
const RECOGNITION_ULPS: f64 = 4.0;

/// `Σ aᵢ hᵢ = h` with `aᵢ > 0`, `hᵢ` integral and `hᵢ∪α > 0`.
///
/// Works in a unimodular basis whose elements all pair positively with `α`.
/// Coordinates recognized as small-denominator rationals are kept exact; any
/// other coordinate is split as `rational + r` with `r ≥ 0` small enough that
/// the rational part keeps a positive pairing. The rational parts are
/// combined into a single integral class over their common denominator.
pub fn rational_decompose(h: &H2Class, alpha: &H1Class) -> Result<Vec<WeightedClass>, TopologyError> {
    if h.0.iter().chain(&alpha.0).any(|v| !v.is_finite()) {
        return Err(TopologyError::NonFinite);
    }
    let pairing: f64 = (0..3).map(|i| h.0[i] * alpha.0[i]).sum();
    if pairing <= 0.0 {
        return Err(TopologyError::NonPositivePairing(pairing));
    }
    let basis = positive_basis(&alpha.0);
    let weights: Vec<f64> = basis.iter().map(|b| (0..3).map(|i| b[i] as f64 * alpha.0[i]).sum()).collect();
    let g = solve_unimodular(&basis, h.0);

    let mut remaining: f64 = (0..3).map(|j| g[j] * weights[j]).sum();
    let mut rationals = [(0i64, 1i64); 3];
    let mut terms = Vec::new();
    for j in 0..3 {
        if let Some(pq) = recognize_rational(g[j]) {
            rationals[j] = pq;
            continue;
        }
        let rmax = remaining / (2.0 * weights[j]);
        let (p, q) = simplest_rational_in(g[j] - rmax, g[j]).ok_or(TopologyError::DenominatorOverflow)?;
        let r = (g[j] - p as f64 / q as f64).max(0.0);
        rationals[j] = (p, q);
        if r > 0.0 {
            remaining -= r * weights[j];
            terms.push(WeightedClass { weight: r, class: IntegralH2Class(basis[j]) });
        }
    }

    let denom = rationals.iter().try_fold(1i128, |acc, &(_, q)| lcm(acc, q as i128))?;
    let mut coords = [0i128; 3];
    for j in 0..3 {
        let (p, q) = rationals[j];
        coords[j] = p as i128 * (denom / q as i128);
    }
    if coords != [0; 3] {
        let mut class = [0i64; 3];
        for (i, c) in class.iter_mut().enumerate() {
            let v: i128 = (0..3).map(|j| basis[j][i] as i128 * coords[j]).sum();
            *c = i64::try_from(v).map_err(|_| TopologyError::DenominatorOverflow)?;
        }
        let div = gcd(gcd(class[0], class[1]), class[2]);
        let class = class.map(|c| c / div);
        terms.insert(0, WeightedClass { weight: div as f64 / denom as f64, class: IntegralH2Class(class) });
    }
    Ok(terms)
}

fn lcm(a: i128, b: i128) -> Result<i128, TopologyError> {
    let (mut x, mut y) = (a, b);
    while y != 0 {
        (x, y) = (y, x % y);
    }
    (a / x).checked_mul(b).ok_or(TopologyError::DenominatorOverflow)
}

/// Starting from `B2`, flips signs so each pairing is non-negative, then
/// shears zero-pairing elements by a positively pairing one.
fn positive_basis(alpha: &[f64; 3]) -> [[i64; 3]; 3] {
    let mut basis = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    for (i, b) in basis.iter_mut().enumerate() {
        if alpha[i] < 0.0 {
            b[i] = -1;
        }
    }
    let Some(pos) = (0..3).find(|&i| alpha[i] != 0.0) else {
        return basis;
    };
    let anchor = basis[pos];
    for i in 0..3 {
        if alpha[i] == 0.0 {
            for c in 0..3 {
                basis[i][c] += anchor[c];
            }
        }
    }
    basis
}

/// Coordinates of `h` in the (columns of the) unimodular `basis`.
fn solve_unimodular(basis: &[[i64; 3]; 3], h: [f64; 3]) -> [f64; 3] {
    // m has basis vectors as columns; Cramer's rule with det = ±1
    let m = |r: usize, c: usize| basis[c][r] as f64;
    let det3 = |cols: [[f64; 3]; 3]| {
        cols[0][0] * (cols[1][1] * cols[2][2] - cols[2][1] * cols[1][2])
            - cols[1][0] * (cols[0][1] * cols[2][2] - cols[2][1] * cols[0][2])
            + cols[2][0] * (cols[0][1] * cols[1][2] - cols[1][1] * cols[0][2])
    };
    let cols: [[f64; 3]; 3] = std::array::from_fn(|c| std::array::from_fn(|r| m(r, c)));
    let det = det3(cols);
    std::array::from_fn(|j| {
        let mut replaced = cols;
        replaced[j] = h;
        det3(replaced) / det
    })
}

/// Recognizes `x` as `p/q` with `q ≤ 2^20` to within a few ulps.
fn recognize_rational(x: f64) -> Option<(i64, i64)> {
    let tol = RECOGNITION_ULPS * f64::EPSILON * x.abs().max(1.0);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a.abs() > 1e15 {
            return None;
        }
        let a = a as i64;
        let h2 = a.checked_mul(h1)?.checked_add(h0)?;
        let k2 = a.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_RECOGNIZED_DENOMINATOR {
            return None;
        }
        if (x - h2 as f64 / k2 as f64).abs() <= tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = y - a as f64;
        if frac == 0.0 {
            return None;
        }
        y = 1.0 / frac;
    }
    None
}

/// The rational with smallest denominator in `[lo, hi]` (`lo ≤ hi`); among
/// integers, the one closest to `hi`.
pub fn simplest_rational_in(lo: f64, hi: f64) -> Option<(i64, i64)> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return None;
    }
    let top = hi.floor();
    if top >= lo {
        return (top.abs() < 9e15).then_some((top as i64, 1));
    }
    simplest_rec(lo, hi, 0)
}

/// Stern–Brocot descent; the interval contains no integer at depth 0.
fn simplest_rec(lo: f64, hi: f64, depth: usize) -> Option<(i64, i64)> {
    if depth > 60 || hi.abs() > 9e15 {
        return None;
    }
    let first = lo.ceil();
    if depth > 0 && first <= hi {
        return Some((first as i64, 1));
    }
    // lo and hi share the integer part n; recurse on the reciprocal interval
    let n = lo.floor();
    let (p, q) = simplest_rec(1.0 / (hi - n), 1.0 / (lo - n), depth + 1)?;
    let num = (n as i64).checked_mul(p)?.checked_add(q)?;
    Some((num, p))
}
