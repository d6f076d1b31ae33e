use crate::numkernel::{gram_plus_identity, sample_complex_gaussian, RealMatrix, RngStream};
use crate::{Error, Result};

/// Highest moment order with a closed form.
pub const MAX_ORDER: usize = 3;

/// Spectral moments `phi_0..phi_N` of the SINR matrix `A = B B*`, normalized
/// per row of `B` (so `phi_j` approximates `E tr(A^j) / p`).
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
}

impl MomentVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> f64 {
        self.values[j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// First `order + 1` moments.
    pub fn truncate(&self, order: usize) -> Self {
        Self::new(self.values[..=order.min(self.order())].to_vec())
    }
}

/// `theta_ij = n * q_ij^2`.
pub fn theta_matrix(q: &RealMatrix, n: usize) -> RealMatrix {
    let n = n as f64;
    q.map(|v| n * v * v)
}

/// Closed-form moments of the limiting spectral distribution of
/// `(Q ∘ G)(Q ∘ G)*` from the variance profile `theta` (`p x n`).
///
/// With row sums `r_i = sum_k theta_ik`, column sums `s_k = sum_j theta_jk`,
/// `t_i = sum_k theta_ik s_k` and `u_k = sum_j theta_jk r_j`:
///
/// ```text
/// phi_1 = sum_i r_i / (p n)
/// phi_2 = sum_i (r_i^2 + t_i) / (p n^2)
/// phi_3 = sum_i (r_i^3 + 2 r_i t_i + sum_k theta_ik (s_k^2 + u_k)) / (p n^3)
/// ```
///
/// The `s_k^2 + u_k` term comes from the fourth Laurent coefficient of the
/// coupled Stieltjes fixed point; with a constant profile it reduces to the
/// Marčenko–Pastur third moment `n^3 + 3 p n^2 + p^2 n`.
pub fn moments(theta: &RealMatrix, p: usize, n: usize, order: usize) -> Result<MomentVector> {
    if order > MAX_ORDER {
        return Err(Error::UnsupportedOrder(order));
    }
    if theta.shape() != (p, n) {
        return Err(Error::param(format!(
            "theta has shape {:?}, expected ({p}, {n})",
            theta.shape()
        )));
    }
    let mut values = vec![1.0];
    if order == 0 {
        return Ok(MomentVector::new(values));
    }
    if p == 0 || n == 0 {
        values.resize(order + 1, 0.0);
        return Ok(MomentVector::new(values));
    }
    let r: Vec<f64> = (0..p).map(|i| theta.row(i).iter().sum()).collect();
    let mut s = vec![0.0; n];
    let mut u = vec![0.0; n];
    for i in 0..p {
        for (k, &v) in theta.row(i).iter().enumerate() {
            s[k] += v;
            u[k] += v * r[i];
        }
    }
    let t: Vec<f64> = (0..p)
        .map(|i| theta.row(i).iter().zip(&s).map(|(a, b)| a * b).sum())
        .collect();
    let (pf, nf) = (p as f64, n as f64);

    values.push(r.iter().sum::<f64>() / (pf * nf));
    if order >= 2 {
        let sum: f64 = (0..p).map(|i| r[i] * r[i] + t[i]).sum();
        values.push(sum / (pf * nf * nf));
    }
    if order >= 3 {
        let sum: f64 = (0..p)
            .map(|i| {
                let tail: f64 = theta
                    .row(i)
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| v * (s[k] * s[k] + u[k]))
                    .sum();
                r[i].powi(3) + 2.0 * r[i] * t[i] + tail
            })
            .sum();
        values.push(sum / (pf * nf * nf * nf));
    }
    Ok(MomentVector::new(values))
}

/// Moments straight from a profile matrix `Q` (`p x n`).
pub fn profile_moments(q: &RealMatrix, order: usize) -> Result<MomentVector> {
    let (p, n) = q.shape();
    moments(&theta_matrix(q, n), p, n, order)
}

/// Monte-Carlo estimate of `E tr(A^j) / p`, `j = 0..=3`, for
/// `A = (Q ∘ G)(Q ∘ G)*` over `draws` fading realizations.
///
/// Independent of the closed form; used to validate it.
pub fn monte_carlo_moments(q: &RealMatrix, draws: usize, seed: u64) -> Result<MomentVector> {
    if draws == 0 {
        return Err(Error::param("need at least one draw"));
    }
    let (p, n) = q.shape();
    if p == 0 {
        return Err(Error::param("profile has no rows"));
    }
    let base = RngStream::new(seed, super::ORACLE_STREAM);
    let mut acc = [0.0f64; 3];
    for d in 0..draws {
        let mut rng = base.derive(0, d as u64);
        let g = sample_complex_gaussian(&mut rng, p, n);
        let b = g.hadamard_real(q).expect("shapes agree");
        let mut a = gram_plus_identity(&b);
        for i in 0..p {
            let v = a.get(i, i);
            a.set(i, i, v - 1.0);
        }
        let a2 = a.matmul(&a);
        let tr1 = a.trace().re;
        let tr2 = a2.trace().re;
        let mut tr3 = 0.0;
        for i in 0..p {
            for j in 0..p {
                tr3 += (a2.get(i, j) * a.get(j, i)).re;
            }
        }
        acc[0] += tr1;
        acc[1] += tr2;
        acc[2] += tr3;
    }
    let scale = 1.0 / (draws as f64 * p as f64);
    Ok(MomentVector::new(vec![
        1.0,
        acc[0] * scale,
        acc[1] * scale,
        acc[2] * scale,
    ]))
}
