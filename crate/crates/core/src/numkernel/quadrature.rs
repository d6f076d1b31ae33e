use std::f64::consts::PI;

use crate::{Error, Result};

/// Node count used for the capacity integral and the coefficient table.
pub const DEFAULT_QUAD_NODES: usize = 256;

/// Gauss–Chebyshev rule of the second kind on `[-1, 1]`.
///
/// Integrates `sqrt(1 - t^2) g(t)` exactly for polynomial `g` of degree up to
/// `2 * nodes - 1`.
#[derive(Debug, Clone)]
pub struct ChebyshevRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl ChebyshevRule {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("quadrature needs at least one node"));
        }
        let h = PI / (n as f64 + 1.0);
        let (nodes, weights) = (1..=n)
            .map(|i| {
                let th = i as f64 * h;
                (th.cos(), h * th.sin().powi(2))
            })
            .unzip();
        Ok(Self { nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Physical nodes on `[a, b]` and weights that include the Jacobian, so
    /// `sum w_i g(x_i)` approximates `int_a^b sqrt((b-x)(x-a)) g(x) dx`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let jac = half * half;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(t, w)| (mid + half * t, w * jac))
    }

    pub fn integrate(&self, a: f64, b: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
        if !(a < b) {
            return Err(Error::param(format!(
                "quadrature interval [{a}, {b}] is empty"
            )));
        }
        Ok(self.mapped(a, b).map(|(x, w)| w * g(x)).sum())
    }
}

/// `int_a^b sqrt((b - x)(x - a)) g(x) dx` by `nodes`-point Gauss–Chebyshev
/// quadrature of the second kind.
pub fn chebyshev_weighted_integral(
    g: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    nodes: usize,
) -> Result<f64> {
    ChebyshevRule::new(nodes)?.integrate(a, b, g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn semicircle_area() {
        for &(a, b) in &[(0.0, 1.0), (0.3, 7.5), (-2.0, 2.0)] {
            let v = chebyshev_weighted_integral(|_| 1.0, a, b, 8).unwrap();
            let exact = PI * (b - a) * (b - a) / 8.0;
            assert!((v - exact).abs() < 1e-12 * exact);
        }
    }

    #[test]
    fn first_moment_on_unit_interval() {
        let v = chebyshev_weighted_integral(|x| x, 0.0, 1.0, 4).unwrap();
        assert!((v - PI / 16.0).abs() < 1e-14);
    }

    #[test]
    fn reciprocal_closed_form() {
        // int sqrt((b-x)(x-a))/x dx = pi((a+b)/2 - sqrt(ab)) for 0 < a < b
        let (a, b) = (0.5, 4.0);
        let v = chebyshev_weighted_integral(|x| 1.0 / x, a, b, 256).unwrap();
        let exact = PI * ((a + b) / 2.0 - (a * b).sqrt());
        assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
    }

    #[test]
    fn exact_up_to_degree_2n_minus_1() {
        // int_{-1}^{1} sqrt(1-t^2) t^(2m) dt = pi * (2m)! / (2^(2m) m! (m+1)!)
        let n = 5;
        for m in 0..n {
            let deg = 2 * m as i32;
            let v = chebyshev_weighted_integral(|t| t.powi(deg), -1.0, 1.0, n).unwrap();
            let mut exact = PI / 2.0;
            for k in 1..=m {
                exact *= (2 * k - 1) as f64 / (2 * k + 2) as f64;
            }
            assert!((v - exact).abs() < 1e-10 * exact, "m={m}: {v} vs {exact}");
        }
    }

    #[test]
    fn empty_interval_is_an_error() {
        assert!(chebyshev_weighted_integral(|_| 1.0, 1.0, 1.0, 4).is_err());
        assert!(chebyshev_weighted_integral(|_| 1.0, 0.0, 1.0, 0).is_err());
    }
}
