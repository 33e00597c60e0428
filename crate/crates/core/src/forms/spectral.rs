//! Staged grid transforms between truncated Fourier coefficients and samples
//! on a uniform `n³` grid of the unit 3-torus.
//!
//! Coefficients are stored densely over `‖k‖∞ ≤ K` with index
//! `((k1+K)·m + (k2+K))·m + (k3+K)`, `m = 2K+1`. Grid values use index
//! `(i1·n + i2)·n + i3` for the point `(i1, i2, i3)/n`.
//!
//! Every stage parallelizes over independent lines or slabs and writes to
//! disjoint outputs, so results do not depend on the worker count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Smallest 5-smooth integer `≥ min`.
pub(crate) fn fft_size(min: usize) -> usize {
    let mut n = min.max(1);
    loop {
        let mut r = n;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return n;
        }
        n += 1;
    }
}

#[inline]
fn wrap(k: i64, n: usize) -> usize {
    k.rem_euclid(n as i64) as usize
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    }
}

struct LineFft {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl LineFft {
    fn new(fft: &Arc<dyn Fft<f64>>, n: usize) -> Self {
        let scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        Self { fft: Arc::clone(fft), buf: vec![Complex64::default(); n], scratch }
    }

    fn clear(&mut self) {
        self.buf.iter_mut().for_each(|c| *c = Complex64::default());
    }

    fn run(&mut self) {
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
    }
}

/// Evaluates the series on the `n³` grid slab by slab (fixed `i1`) and maps
/// each slab through `f`. Slabs are returned in `i1` order.
pub(crate) fn synthesize_map<T, F>(coeffs: &[Complex64], k: usize, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, &[f64]) -> T + Sync,
{
    let m = 2 * k + 1;
    debug_assert_eq!(coeffs.len(), m * m * m);
    assert!(n >= m, "grid resolution {n} cannot resolve truncation K = {k}");
    let ifft = plan(n, true);
    let ki = k as i64;

    // x-stage: for each (b, c3) a line over k1 -> i1.
    let mut sx = vec![Complex64::default(); m * m * n];
    sx.par_chunks_mut(n).enumerate().for_each(|(line, out)| {
        let (b, c3) = (line / m, line % m);
        let mut lf = LineFft::new(&ifft, n);
        for a in 0..m {
            lf.buf[wrap(a as i64 - ki, n)] = coeffs[(a * m + b) * m + c3];
        }
        lf.run();
        out.copy_from_slice(&lf.buf);
    });

    // y-stage: for each (i1, c3) a line over k2 -> i2.
    let mut sy = vec![Complex64::default(); n * n * m];
    sy.par_chunks_mut(n * m).enumerate().for_each(|(i1, out)| {
        let mut lf = LineFft::new(&ifft, n);
        for c3 in 0..m {
            lf.clear();
            for b in 0..m {
                lf.buf[wrap(b as i64 - ki, n)] = sx[(b * m + c3) * n + i1];
            }
            lf.run();
            for i2 in 0..n {
                out[i2 * m + c3] = lf.buf[i2];
            }
        }
    });
    drop(sx);

    // θ-stage, one slab at a time.
    (0..n)
        .into_par_iter()
        .map(|i1| {
            let mut lf = LineFft::new(&ifft, n);
            let mut slab = vec![0.0; n * n];
            for i2 in 0..n {
                lf.clear();
                let row = &sy[(i1 * n + i2) * m..(i1 * n + i2 + 1) * m];
                for (c3, v) in row.iter().enumerate() {
                    lf.buf[wrap(c3 as i64 - ki, n)] = *v;
                }
                lf.run();
                for (i3, v) in lf.buf.iter().enumerate() {
                    slab[i2 * n + i3] = v.re;
                }
            }
            f(i1, &slab)
        })
        .collect()
}

/// Full grid of samples, index `(i1·n + i2)·n + i3`.
pub(crate) fn synthesize(coeffs: &[Complex64], k: usize, n: usize) -> Vec<f64> {
    synthesize_map(coeffs, k, n, |_, slab| slab.to_vec()).concat()
}

/// Fourier coefficients `‖k‖∞ ≤ kout` of real grid samples (trapezoidal
/// quadrature, exact for band-limited data with `n ≥ 2·band+1`).
pub(crate) fn analyze(values: &[f64], n: usize, kout: usize) -> Vec<Complex64> {
    let mo = 2 * kout + 1;
    assert_eq!(values.len(), n * n * n);
    assert!(n >= mo, "grid resolution {n} cannot resolve output truncation {kout}");
    let fft = plan(n, false);
    let ko = kout as i64;
    let scale = 1.0 / (n * n * n) as f64;

    // θ-stage: line over i3 for each (i1, i2).
    let mut ft = vec![Complex64::default(); n * n * mo];
    ft.par_chunks_mut(mo).enumerate().for_each(|(line, out)| {
        let mut lf = LineFft::new(&fft, n);
        for (i3, slot) in lf.buf.iter_mut().enumerate() {
            *slot = Complex64::new(values[line * n + i3], 0.0);
        }
        lf.run();
        for (c3, o) in out.iter_mut().enumerate() {
            *o = lf.buf[wrap(c3 as i64 - ko, n)];
        }
    });

    // y-stage: line over i2 for each (i1, c3).
    let mut fy = vec![Complex64::default(); n * mo * mo];
    fy.par_chunks_mut(mo * mo).enumerate().for_each(|(i1, out)| {
        let mut lf = LineFft::new(&fft, n);
        for c3 in 0..mo {
            for i2 in 0..n {
                lf.buf[i2] = ft[(i1 * n + i2) * mo + c3];
            }
            lf.run();
            for b in 0..mo {
                out[b * mo + c3] = lf.buf[wrap(b as i64 - ko, n)];
            }
        }
    });
    drop(ft);

    // x-stage: line over i1 for each (b, c3).
    let lines: Vec<Vec<Complex64>> = (0..mo * mo)
        .into_par_iter()
        .map(|line| {
            let mut lf = LineFft::new(&fft, n);
            for i1 in 0..n {
                lf.buf[i1] = fy[i1 * mo * mo + line];
            }
            lf.run();
            (0..mo).map(|a| lf.buf[wrap(a as i64 - ko, n)] * scale).collect()
        })
        .collect();
    let mut out = vec![Complex64::default(); mo * mo * mo];
    for (line, vals) in lines.iter().enumerate() {
        for (a, v) in vals.iter().enumerate() {
            out[a * mo * mo + line] = *v;
        }
    }
    out
}
