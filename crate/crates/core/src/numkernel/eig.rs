use super::{ComplexMatrix, RealMatrix};
use crate::{Error, Result};

const MAX_ORACLE_DIM: usize = 64;
const MAX_SWEEPS: usize = 100;

/// All eigenvalues of a small Hermitian matrix, ascending.
///
/// `H = X + iY` is embedded as the real symmetric `[[X, -Y], [Y, X]]`, whose
/// spectrum is that of `H` with every eigenvalue doubled, and diagonalized by
/// cyclic Jacobi rotations. Intended as a test oracle.
pub fn eig_hermitian_small(m: &ComplexMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::param("eigen oracle needs a square matrix"));
    }
    let n = m.rows();
    if n > MAX_ORACLE_DIM {
        return Err(Error::param(format!(
            "eigen oracle limited to dimension {MAX_ORACLE_DIM}, got {n}"
        )));
    }
    let scale = m.as_slice().iter().fold(1.0f64, |s, z| s.max(z.norm()));
    for i in 0..n {
        for j in 0..=i {
            if (m.get(i, j) - m.get(j, i).conj()).norm() > 1e-12 * scale {
                return Err(Error::param(format!(
                    "matrix is not Hermitian at ({i}, {j})"
                )));
            }
        }
    }
    let emb = RealMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = m.get(i % n, j % n);
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let doubled = eig_symmetric(&emb)?;
    Ok(doubled.into_iter().step_by(2).collect())
}

/// All eigenvalues of a real symmetric matrix, ascending (cyclic Jacobi).
pub fn eig_symmetric(m: &RealMatrix) -> Result<Vec<f64>> {
    if !m.is_square() {
        return Err(Error::param("eigen oracle needs a square matrix"));
    }
    let n = m.rows();
    let mut a = m.clone();
    let total = a.as_slice().iter().map(|v| v * v).sum::<f64>().sqrt();
    let target = 1e-12 * total;
    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= target {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

fn off_diagonal_norm(a: &RealMatrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).powi(2);
            }
        }
    }
    s.sqrt()
}

// Zeroes a[p][q] with a two-sided Givens rotation.
fn rotate(a: &mut RealMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    if apq == 0.0 {
        return;
    }
    let theta = (a.get(q, q) - a.get(p, p)) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, c * akp - s * akq);
        a.set(k, q, s * akp + c * akq);
    }
    for k in 0..n {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, c * apk - s * aqk);
        a.set(q, k, s * apk + c * aqk);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkernel::{sample_complex_gaussian, RngStream};
    use num_complex::Complex64;

    #[test]
    fn diagonal_and_swap() {
        let d = ComplexMatrix::from_real_diag(&[3.0, 1.0, 2.0]);
        assert_eq!(eig_hermitian_small(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let swap = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).to_complex();
        let ev = eig_hermitian_small(&swap).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3
        let m = ComplexMatrix::from_rows(&[
            vec![Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0)],
            vec![Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)],
        ]);
        let ev = eig_hermitian_small(&m).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn trace_and_frobenius_identities() {
        let g = sample_complex_gaussian(&mut RngStream::new(5, 5), 5, 5);
        let h = ComplexMatrix::from_fn(5, 5, |i, j| (g.get(i, j) + g.get(j, i).conj()) * 0.5);
        let ev = eig_hermitian_small(&h).unwrap();
        let tr = h.trace().re;
        assert!((ev.iter().sum::<f64>() - tr).abs() < 1e-10);
        let f2 = h.frobenius_norm_sqr();
        let s2: f64 = ev.iter().map(|l| l * l).sum();
        assert!((s2 - f2).abs() < 1e-9 * f2);
    }

    #[test]
    fn rejects_non_hermitian_and_large() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]).to_complex();
        assert!(matches!(eig_hermitian_small(&m), Err(Error::Parameter(_))));
        assert!(eig_hermitian_small(&ComplexMatrix::identity(65)).is_err());
    }
}
