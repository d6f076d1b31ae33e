use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

/// `S = I + B B*` for a `p x n` matrix `B`.
///
/// Only the lower triangle is accumulated; the upper half is filled by
/// conjugate symmetry, so the result is exactly Hermitian.
pub fn gram_plus_identity(b: &ComplexMatrix) -> ComplexMatrix {
    let (p, n) = b.shape();
    let re: Vec<f64> = b.as_slice().iter().map(|z| z.re).collect();
    let im: Vec<f64> = b.as_slice().iter().map(|z| z.im).collect();
    let mut s = ComplexMatrix::zeros(p, p);
    for i in 0..p {
        let (ri, ii) = (&re[i * n..(i + 1) * n], &im[i * n..(i + 1) * n]);
        for j in 0..=i {
            let (rj, ij) = (&re[j * n..(j + 1) * n], &im[j * n..(j + 1) * n]);
            let (sr, si) = dot_conj(ri, ii, rj, ij);
            let v = Complex64::new(
                sr + if i == j { 1.0 } else { 0.0 },
                if i == j { 0.0 } else { si },
            );
            s.set(i, j, v);
            s.set(j, i, v.conj());
        }
    }
    s
}

/// `sum_k a_k * conj(b_k)` over split real/imaginary slices.
#[inline]
fn dot_conj(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    const LANES: usize = 4;
    let n = ar.len();
    let mut re = [0.0f64; LANES];
    let mut im = [0.0f64; LANES];
    let chunks = n / LANES;
    for c in 0..chunks {
        let o = c * LANES;
        for l in 0..LANES {
            let (xr, xi, yr, yi) = (ar[o + l], ai[o + l], br[o + l], bi[o + l]);
            re[l] += xr * yr + xi * yi;
            im[l] += xi * yr - xr * yi;
        }
    }
    let mut sr = (re[0] + re[1]) + (re[2] + re[3]);
    let mut si = (im[0] + im[1]) + (im[2] + im[3]);
    for k in chunks * LANES..n {
        sr += ar[k] * br[k] + ai[k] * bi[k];
        si += ai[k] * br[k] - ar[k] * bi[k];
    }
    (sr, si)
}

/// Lower-triangular `L` with `L L* = m` and real positive diagonal.
///
/// Reads only the lower triangle of `m`.
pub fn hermitian_cholesky(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !m.is_square() {
        return Err(Error::param(format!(
            "cholesky needs a square matrix, got {:?}",
            m.shape()
        )));
    }
    let mut l = m.clone();
    factor_in_place(&mut l)?;
    Ok(l)
}

fn factor_in_place(l: &mut ComplexMatrix) -> Result<()> {
    let n = l.rows();
    for j in 0..n {
        let mut d = l.get(j, j).re;
        for k in 0..j {
            d -= l.get(j, k).norm_sqr();
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l.set(j, j, Complex64::new(ljj, 0.0));
        let inv = 1.0 / ljj;
        let row_j: Vec<Complex64> = l.row(j)[..j].to_vec();
        for i in j + 1..n {
            let row_i = l.row(i);
            let mut sr = 0.0;
            let mut si = 0.0;
            for (a, b) in row_i[..j].iter().zip(&row_j) {
                // a * conj(b)
                sr += a.re * b.re + a.im * b.im;
                si += a.im * b.re - a.re * b.im;
            }
            let v = (l.get(i, j) - Complex64::new(sr, si)) * inv;
            l.set(i, j, v);
        }
        for k in j + 1..n {
            l.set(j, k, Complex64::new(0.0, 0.0));
        }
    }
    Ok(())
}

/// Natural-log `log det(I + B B*)` via Cholesky: `2 * sum_j log L_jj`.
pub fn logdet_i_plus_gram(b: &ComplexMatrix) -> Result<f64> {
    if !b.is_finite() {
        return Err(Error::Invariant("non-finite entries in gain matrix".into()));
    }
    let mut s = gram_plus_identity(b);
    factor_in_place(&mut s)?;
    Ok(2.0 * (0..s.rows()).map(|j| s.get(j, j).re.ln()).sum::<f64>())
}
