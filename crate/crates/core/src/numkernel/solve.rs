use super::RealMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolution {
    pub x: Vec<f64>,
    /// `max_i |(A x - rhs)_i|`.
    pub residual: f64,
}

/// Gaussian elimination with partial pivoting for small dense systems.
pub fn solve_dense(a: &RealMatrix, rhs: &[f64]) -> Result<DenseSolution> {
    let n = a.rows();
    if !a.is_square() || rhs.len() != n {
        return Err(Error::param(format!(
            "solve_dense: matrix {:?} with rhs of length {}",
            a.shape(),
            rhs.len()
        )));
    }
    let threshold = 1e-14 * a.norm_inf();
    let mut m = a.clone();
    let mut y = rhs.to_vec();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m.get(i, col).abs().total_cmp(&m.get(j, col).abs()))
            .unwrap();
        let pv = m.get(piv, col);
        if !(pv.abs() > threshold) {
            return Err(Error::Singular {
                pivot: pv.abs(),
                threshold,
            });
        }
        if piv != col {
            for k in 0..n {
                let t = m.get(col, k);
                m.set(col, k, m.get(piv, k));
                m.set(piv, k, t);
            }
            y.swap(col, piv);
        }
        for r in col + 1..n {
            let f = m.get(r, col) / pv;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m.set(r, k, m.get(r, k) - f * m.get(col, k));
            }
            y[r] -= f * y[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m.get(r, k) * x[k]).sum();
        x[r] = (y[r] - s) / m.get(r, r);
    }
    let residual = a
        .mul_vec(&x)
        .iter()
        .zip(rhs)
        .map(|(l, r)| (l - r).abs())
        .fold(0.0, f64::max);
    Ok(DenseSolution { x, residual })
}

/// `|A|_inf * |A^-1|_inf`, with the inverse built column by column.
pub fn condition_inf(a: &RealMatrix) -> Result<f64> {
    let n = a.rows();
    let mut inv = RealMatrix::zeros(n, n);
    for c in 0..n {
        let mut e = vec![0.0; n];
        e[c] = 1.0;
        let sol = solve_dense(a, &e)?;
        for r in 0..n {
            inv.set(r, c, sol.x[r]);
        }
    }
    Ok(a.norm_inf() * inv.norm_inf())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn identity_and_diagonal() {
        let sol = solve_dense(&RealMatrix::identity(3), &[1.0, -2.0, 3.5]).unwrap();
        assert_eq!(sol.x, vec![1.0, -2.0, 3.5]);
        let a = RealMatrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 3.0]]);
        let sol = solve_dense(&a, &[4.0, 9.0]).unwrap();
        assert_eq!(sol.x, vec![2.0, 3.0]);
        assert_eq!(sol.residual, 0.0);
    }

    #[test]
    fn random_well_conditioned_residual() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = RealMatrix::from_fn(4, 4, |i, j| {
                rng.random_range(-1.0..1.0) + if i == j { 4.0 } else { 0.0 }
            });
            let rhs: Vec<f64> = (0..4).map(|_| rng.random_range(-5.0..5.0)).collect();
            let sol = solve_dense(&a, &rhs).unwrap();
            assert!(sol.residual < 1e-10);
        }
    }

    #[test]
    fn needs_pivoting() {
        let a = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let sol = solve_dense(&a, &[2.0, 3.0]).unwrap();
        assert_eq!(sol.x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_is_reported() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(
            solve_dense(&a, &[1.0, 1.0]),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn condition_of_diagonal() {
        let a = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1e-3]]);
        assert!((condition_inf(&a).unwrap() - 1e3).abs() < 1e-9);
    }
}
