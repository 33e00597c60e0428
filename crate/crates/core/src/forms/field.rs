use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use super::{spectral, FormError};

/// Integer frequency vector `k ∈ ℤ³`.
pub type Frequency = [i64; 3];

/// A point of the unit 3-torus in coordinates `(x, y, θ)`.
pub type Point = [f64; 3];

/// Real-valued trigonometric polynomial on the 3-torus, truncated to
/// `‖k‖∞ ≤ K`:
///
/// `f(p) = Σ c_k · exp(2πi k·p)`, with `c_{-k} = conj(c_k)`.
///
/// The full Hermitian coefficient set is stored densely.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    k: usize,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn zero(k: usize) -> Self {
        let m = 2 * k + 1;
        Self { k, coeffs: vec![Complex64::default(); m * m * m] }
    }

    pub fn constant(k: usize, value: f64) -> Self {
        let mut f = Self::zero(k);
        let i = f.index([0, 0, 0]);
        f.coeffs[i] = Complex64::new(value, 0.0);
        f
    }

    /// Sum of real modes `v·e^{2πik·p} + conj(v)·e^{-2πik·p}` (only `Re v` for
    /// `k = 0`). Frequencies outside the truncation are dropped.
    pub fn from_modes(k: usize, modes: &[(Frequency, Complex64)]) -> Self {
        let mut f = Self::zero(k);
        for &(freq, v) in modes {
            if !f.contains(freq) {
                continue;
            }
            if freq == [0, 0, 0] {
                let i = f.index(freq);
                f.coeffs[i] += Complex64::new(v.re, 0.0);
            } else {
                let i = f.index(freq);
                let j = f.index(neg(freq));
                f.coeffs[i] += v;
                f.coeffs[j] += v.conj();
            }
        }
        f
    }

    /// `amplitude · cos(2π k·p)`.
    pub fn cos(k: usize, freq: Frequency, amplitude: f64) -> Self {
        if freq == [0, 0, 0] {
            return Self::constant(k, amplitude);
        }
        Self::from_modes(k, &[(freq, Complex64::new(amplitude / 2.0, 0.0))])
    }

    /// `amplitude · sin(2π k·p)`.
    pub fn sin(k: usize, freq: Frequency, amplitude: f64) -> Self {
        Self::from_modes(k, &[(freq, Complex64::new(0.0, -amplitude / 2.0))])
    }

    /// Builds a field from a dense coefficient array, enforcing exact
    /// Hermitian symmetry by averaging each `±k` pair.
    pub(crate) fn from_dense(k: usize, coeffs: Vec<Complex64>) -> Self {
        let mut f = Self { k, coeffs };
        f.hermitize();
        f
    }

    fn hermitize(&mut self) {
        let m = 2 * self.k + 1;
        let total = m * m * m;
        // index(-k) = total - 1 - index(k)
        for i in 0..total / 2 {
            let j = total - 1 - i;
            let avg = (self.coeffs[i] + self.coeffs[j].conj()) * 0.5;
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        let c = total / 2;
        self.coeffs[c].im = 0.0;
    }

    /// Builds a field from explicit coefficients without modifying them.
    /// Frequencies must lie inside the truncation and the data must be
    /// Hermitian to within `1e-12` relative to `Σ|c|`.
    pub fn from_coefficients(
        k: usize,
        entries: impl IntoIterator<Item = (Frequency, Complex64)>,
    ) -> Result<Self, FormError> {
        let mut f = Self::zero(k);
        for (freq, c) in entries {
            if !f.contains(freq) {
                return Err(FormError::FrequencyOutOfRange { freq, k });
            }
            let i = f.index(freq);
            f.coeffs[i] = c;
        }
        let defect = f.hermitian_defect();
        if defect > 1e-12 * f.l1_norm().max(1.0) {
            return Err(FormError::NotHermitian { defect });
        }
        Ok(f)
    }

    /// Projects a periodic function onto the truncated basis by trapezoidal
    /// quadrature on an `n³` grid.
    pub fn project_fn<F>(k: usize, n: usize, f: F) -> Self
    where
        F: Fn(Point) -> f64 + Sync,
    {
        let h = 1.0 / n as f64;
        let mut values = vec![0.0; n * n * n];
        for (idx, v) in values.iter_mut().enumerate() {
            let (i1, i2, i3) = (idx / (n * n), (idx / n) % n, idx % n);
            *v = f([i1 as f64 * h, i2 as f64 * h, i3 as f64 * h]);
        }
        Self::from_grid(&values, n, k)
    }

    /// Coefficients `‖k‖∞ ≤ K` of grid samples at `(i1, i2, i3)/n`.
    pub fn from_grid(values: &[f64], n: usize, k: usize) -> Self {
        Self::from_dense(k, spectral::analyze(values, n, k))
    }

    pub fn truncation(&self) -> usize {
        self.k
    }

    fn side(&self) -> usize {
        2 * self.k + 1
    }

    pub fn contains(&self, freq: Frequency) -> bool {
        let k = self.k as i64;
        freq.iter().all(|c| c.abs() <= k)
    }

    #[inline]
    fn index(&self, freq: Frequency) -> usize {
        let m = self.side();
        let k = self.k as i64;
        ((((freq[0] + k) as usize) * m + (freq[1] + k) as usize) * m) + (freq[2] + k) as usize
    }

    #[inline]
    fn frequency(&self, idx: usize) -> Frequency {
        let m = self.side();
        let k = self.k as i64;
        [(idx / (m * m)) as i64 - k, ((idx / m) % m) as i64 - k, (idx % m) as i64 - k]
    }

    pub fn coeff(&self, freq: Frequency) -> Complex64 {
        if self.contains(freq) {
            self.coeffs[self.index(freq)]
        } else {
            Complex64::default()
        }
    }

    pub(crate) fn dense(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Iterates over all stored coefficients that are not exactly zero.
    pub fn nonzero(&self) -> impl Iterator<Item = (Frequency, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.re != 0.0 || c.im != 0.0)
            .map(move |(i, c)| (self.frequency(i), *c))
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[self.index([0, 0, 0])].re
    }

    /// True when every non-zero frequency coefficient is exactly zero.
    pub fn is_constant(&self) -> bool {
        let c = self.index([0, 0, 0]);
        self.coeffs.iter().enumerate().all(|(i, z)| i == c || (z.re == 0.0 && z.im == 0.0))
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `Σ |c_k|`, an upper bound on `sup |f|`.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    /// `Σ 2π‖k‖₁·|c_k|`: Lipschitz constant of `f` with respect to the
    /// sup-norm distance on the torus.
    pub fn lipschitz_bound(&self) -> f64 {
        self.nonzero().map(|(freq, c)| TAU * (freq[0].abs() + freq[1].abs() + freq[2].abs()) as f64 * c.norm()).sum()
    }

    /// Largest violation of `c_{-k} = conj(c_k)`.
    pub fn hermitian_defect(&self) -> f64 {
        let total = self.coeffs.len();
        (0..total).map(|i| (self.coeffs[i] - self.coeffs[total - 1 - i].conj()).norm()).fold(0.0, f64::max)
    }

    /// Zero-pads or truncates to a new radius.
    pub fn resized(&self, k: usize) -> Self {
        if k == self.k {
            return self.clone();
        }
        let mut out = Self::zero(k);
        let kk = k.min(self.k) as i64;
        for a in -kk..=kk {
            for b in -kk..=kk {
                for c in -kk..=kk {
                    let i = out.index([a, b, c]);
                    out.coeffs[i] = self.coeff([a, b, c]);
                }
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { k: self.k, coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        if self.k == other.k {
            return Self {
                k: self.k,
                coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| op(*a, *b)).collect(),
            };
        }
        let k = self.k.max(other.k);
        self.resized(k).zip_with(&other.resized(k), op)
    }

    /// Spectral partial derivative along `axis` (0 = x, 1 = y, 2 = θ).
    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = self.clone();
        for (i, c) in out.coeffs.iter_mut().enumerate() {
            let kf = self.frequency(i)[axis];
            *c *= Complex64::new(0.0, TAU * kf as f64);
        }
        out
    }

    /// Product truncated back to `max(K₁, K₂)`; see [`ScalarField::mul_tracked`].
    pub fn mul(&self, other: &Self) -> Self {
        self.mul_tracked(other).0
    }

    /// Exact pointwise product followed by truncation to `max(K₁, K₂)`.
    /// Returns the product and the `ℓ¹` norm of the dropped coefficients,
    /// which bounds the sup-norm truncation error.
    pub fn mul_tracked(&self, other: &Self) -> (Self, f64) {
        let k = self.k.max(other.k);
        if self.is_constant() {
            return (other.resized(k).scale(self.mean()), 0.0);
        }
        if other.is_constant() {
            return (self.resized(k).scale(other.mean()), 0.0);
        }
        let band = 2 * k;
        let n = spectral::fft_size(2 * band + 1);
        let a = spectral::synthesize(&self.coeffs, self.k, n);
        let b = spectral::synthesize(&other.coeffs, other.k, n);
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        let full = Self::from_grid(&prod, n, band);
        let kept = full.resized(k);
        let dropped = full.l1_norm() - kept.l1_norm();
        (kept, dropped.max(0.0))
    }

    /// Untruncated product, of radius `K₁ + K₂`.
    pub fn mul_exact(&self, other: &Self) -> Self {
        let k = self.k + other.k;
        self.resized(k).mul(&other.resized(k))
    }

    /// Pointwise value by direct summation of the series.
    pub fn evaluate(&self, p: Point) -> f64 {
        let m = self.side();
        let k = self.k as i64;
        let tw = |x: f64| -> Vec<Complex64> {
            (0..m).map(|a| Complex64::from_polar(1.0, TAU * (a as i64 - k) as f64 * x)).collect()
        };
        let (ex, ey, ez) = (tw(p[0]), tw(p[1]), tw(p[2]));
        let mut total = Complex64::default();
        for a in 0..m {
            let mut sa = Complex64::default();
            for b in 0..m {
                let row = &self.coeffs[(a * m + b) * m..(a * m + b + 1) * m];
                let sb: Complex64 = row.iter().zip(&ez).map(|(c, e)| c * e).sum();
                sa += sb * ey[b];
            }
            total += sa * ex[a];
        }
        total.re
    }

    /// Values on the uniform grid `(i1, i2, i3)/n`, index `(i1·n + i2)·n + i3`.
    /// Grids coarser than `2K+1` are read off a finer multiple.
    pub fn sample_grid(&self, n: usize) -> Vec<f64> {
        let m = 2 * self.k + 1;
        if n >= m {
            return spectral::synthesize(&self.coeffs, self.k, n);
        }
        let r = m.div_ceil(n);
        let fine = spectral::synthesize(&self.coeffs, self.k, n * r);
        let nf = n * r;
        (0..n * n * n).map(|i| fine[((i / (n * n)) * r * nf + ((i / n) % n) * r) * nf + (i % n) * r]).collect()
    }

    /// Precomputes a sparse evaluator for repeated pointwise evaluation.
    pub fn evaluator(&self) -> FieldEvaluator {
        let mut terms = Vec::new();
        for (freq, c) in self.nonzero() {
            if freq == [0, 0, 0] {
                continue;
            }
            // keep one representative of each ±k pair
            let first = freq.iter().copied().find(|x| *x != 0).unwrap_or(0);
            if first > 0 {
                terms.push((freq.map(|x| TAU * x as f64), 2.0 * c));
            }
        }
        FieldEvaluator { mean: self.mean(), terms }
    }
}

fn neg(f: Frequency) -> Frequency {
    [-f[0], -f[1], -f[2]]
}

/// Sparse real evaluator: `f(p) = c₀ + Σ Re(2c_k·e^{2πik·p})` over a half space.
#[derive(Clone, Debug)]
pub struct FieldEvaluator {
    mean: f64,
    terms: Vec<([f64; 3], Complex64)>,
}

impl FieldEvaluator {
    #[inline]
    pub fn value(&self, p: Point) -> f64 {
        let mut v = self.mean;
        for (w, c) in &self.terms {
            let (s, co) = (w[0] * p[0] + w[1] * p[1] + w[2] * p[2]).sin_cos();
            v += c.re * co - c.im * s;
        }
        v
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }
}

/// Evaluates several fields at once. The exponentials `e^{2πi k_j p_j}` are
/// built per axis by recurrence, so a point costs three `sin_cos` calls plus
/// a few multiplications per stored mode.
#[derive(Clone, Debug)]
pub struct JointEvaluator {
    k: usize,
    means: Vec<f64>,
    /// `(ix, iy, first entry, end)` for each `(k_x, k_y)` column.
    columns: Vec<(usize, usize, usize, usize)>,
    rows: Vec<usize>,
    /// `2c_k` for each field, entry-major.
    coeffs: Vec<Complex64>,
}

impl JointEvaluator {
    pub fn new(fields: &[&ScalarField]) -> Self {
        let k = fields.iter().map(|f| f.truncation()).max().unwrap_or(0);
        let ki = k as i64;
        let m = fields.len();
        let mut columns = Vec::new();
        let mut rows = Vec::new();
        let mut coeffs = Vec::new();
        for a in 0..=ki {
            for b in -ki..=ki {
                let start = rows.len();
                for c in -ki..=ki {
                    let freq = [a, b, c];
                    let upper = a > 0 || (a == 0 && (b > 0 || (b == 0 && c > 0)));
                    if !upper {
                        continue;
                    }
                    let entry: Vec<Complex64> = fields
                        .iter()
                        .map(|f| if f.contains(freq) { 2.0 * f.coeff(freq) } else { Complex64::default() })
                        .collect();
                    if entry.iter().all(|z| *z == Complex64::default()) {
                        continue;
                    }
                    rows.push((c + ki) as usize);
                    coeffs.extend(entry);
                }
                if rows.len() > start {
                    columns.push(((a + ki) as usize, (b + ki) as usize, start, rows.len()));
                }
            }
        }
        debug_assert_eq!(coeffs.len(), rows.len() * m);
        Self { k, means: fields.iter().map(|f| f.mean()).collect(), columns, rows, coeffs }
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    fn table(&self, x: f64) -> Vec<Complex64> {
        let k = self.k;
        let (s, c) = (TAU * x).sin_cos();
        let step = Complex64::new(c, s);
        let mut out = vec![Complex64::new(1.0, 0.0); 2 * k + 1];
        for j in 1..=k {
            out[k + j] = out[k + j - 1] * step;
            out[k - j] = out[k + j].conj();
        }
        out
    }

    /// Writes the value of every field at `p` into `out`.
    pub fn values_into(&self, p: Point, out: &mut [f64]) {
        let m = self.means.len();
        out[..m].copy_from_slice(&self.means);
        if self.rows.is_empty() {
            return;
        }
        let (ex, ey, ez) = (self.table(p[0]), self.table(p[1]), self.table(p[2]));
        for &(ix, iy, start, end) in &self.columns {
            let exy = ex[ix] * ey[iy];
            for e in start..end {
                let z = exy * ez[self.rows[e]];
                let cs = &self.coeffs[e * m..(e + 1) * m];
                for (o, c) in out.iter_mut().zip(cs) {
                    *o += c.re * z.re - c.im * z.im;
                }
            }
        }
    }

    pub fn values(&self, p: Point) -> Vec<f64> {
        let mut out = vec![0.0; self.means.len()];
        self.values_into(p, &mut out);
        out
    }
}

impl Add for &ScalarField {
    type Output = ScalarField;
    fn add(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ScalarField {
    type Output = ScalarField;
    fn sub(self, rhs: Self) -> ScalarField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}
