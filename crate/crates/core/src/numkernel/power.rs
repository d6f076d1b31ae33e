use num_complex::Complex64;

use super::{sample_complex_gaussian, ComplexMatrix, RngStream};

/// Power-method iterations used by the capacity estimator.
pub const DEFAULT_POWER_ITERS: usize = 15;

/// Largest eigenvalue of `A = B B*` by power iteration, never forming `A`.
///
/// The iteration runs on `B* B`, which has the same nonzero spectrum: starting
/// from `v = B* x` for a random `x`, each step applies `v <- B* (B v)` in one
/// streaming pass over the rows of `B`, so every row is loaded once per step.
/// The returned value is the Rayleigh quotient `|B v|^2` at the final unit
/// iterate, which never exceeds `lambda_max(A)` and is at least as sharp as
/// `iters` steps of `x <- B (B* x)`. Cost is `O(iters * rows * cols)`.
pub fn power_method_max_eig(b: &ComplexMatrix, iters: usize, rng: &mut RngStream) -> f64 {
    let (rows, cols) = b.shape();
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    let mut x = sample_complex_gaussian(rng, rows, 1).as_slice().to_vec();
    if normalize(&mut x) == 0.0 {
        x[0] = Complex64::new(1.0, 0.0);
    }
    let mut v = vec![Complex64::new(0.0, 0.0); cols];
    b.adjoint_mul_vec_into(&x, &mut v);
    if normalize(&mut v) == 0.0 {
        return 0.0;
    }
    let mut w = vec![Complex64::new(0.0, 0.0); cols];
    let mut rayleigh = 0.0;
    for _ in 0..=iters.max(1) {
        rayleigh = gram_step(b, &v, &mut w);
        std::mem::swap(&mut v, &mut w);
        if normalize(&mut v) == 0.0 {
            return 0.0;
        }
    }
    rayleigh
}

/// `w = B* B v` in a single pass over `B`; returns `|B v|^2`.
fn gram_step(b: &ComplexMatrix, v: &[Complex64], w: &mut [Complex64]) -> f64 {
    w.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
    let mut norm = 0.0;
    for i in 0..b.rows() {
        let row = b.row(i);
        let (mut re, mut im) = (0.0, 0.0);
        for (a, x) in row.iter().zip(v) {
            re += a.re * x.re - a.im * x.im;
            im += a.re * x.im + a.im * x.re;
        }
        norm += re * re + im * im;
        for (wk, a) in w.iter_mut().zip(row) {
            // conj(a) * y_i
            wk.re += a.re * re + a.im * im;
            wk.im += a.re * im - a.im * re;
        }
    }
    norm
}

fn normalize(x: &mut [Complex64]) -> f64 {
    let norm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 && norm.is_finite() {
        let inv = 1.0 / norm;
        x.iter_mut().for_each(|z| *z *= inv);
        norm
    } else {
        0.0
    }
}
