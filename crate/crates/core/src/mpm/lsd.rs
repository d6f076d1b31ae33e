use std::f64::consts::PI;

use super::MomentVector;
use crate::numkernel::{condition_inf, solve_dense, ChebyshevRule, RealMatrix, DEFAULT_QUAD_NODES};
use crate::{Error, Result};

/// Condition estimate above which a moment fit is rejected.
pub const MAX_FIT_CONDITION: f64 = 1e12;

/// `c_0..c_max_index` with
/// `c_i = int_a^b x^i * beta * sqrt((b - x)(x - a)) / (2 pi K_m x) dx`.
///
/// `c_0` uses the closed form `beta ((a + b)/2 - sqrt(ab)) / (2 K_m)`, which
/// stays exact at `a = 0` where the `1/x` factor defeats polynomial
/// quadrature. Higher entries have polynomial integrands and go through the
/// Chebyshev rule.
pub fn mp_coefficient_table(
    a: f64,
    b: f64,
    beta: f64,
    k_m: usize,
    max_index: usize,
) -> Result<Vec<f64>> {
    coefficient_table_with(
        &ChebyshevRule::new(DEFAULT_QUAD_NODES)?,
        a,
        b,
        beta,
        k_m,
        max_index,
    )
}

pub(crate) fn coefficient_table_with(
    rule: &ChebyshevRule,
    a: f64,
    b: f64,
    beta: f64,
    k_m: usize,
    max_index: usize,
) -> Result<Vec<f64>> {
    if !(0.0 <= a && a < b) {
        return Err(Error::param(format!(
            "support edges need 0 <= a < b, got [{a}, {b}]"
        )));
    }
    if k_m == 0 {
        return Err(Error::param("coefficient table needs K_m >= 1"));
    }
    let pref = beta / (2.0 * PI * k_m as f64);
    let mut table = Vec::with_capacity(max_index + 1);
    table.push(beta * (0.5 * (a + b) - (a * b).sqrt()) / (2.0 * k_m as f64));
    if max_index >= 1 {
        // accumulate all powers in one pass over the nodes
        let mut sums = vec![0.0; max_index];
        for (x, w) in rule.mapped(a, b) {
            let mut pw = 1.0;
            for s in sums.iter_mut() {
                *s += w * pw;
                pw *= x;
            }
        }
        table.extend(sums.into_iter().map(|s| pref * s));
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFit {
    pub alpha: Vec<f64>,
    /// `max_j |sum_k c_{j+k} alpha_k - rhs_j|`.
    pub residual: f64,
    pub condition: f64,
}

/// Solves `sum_k c_{j+k} alpha_k = phi_j`, `j = 0..=order`.
///
/// For `beta < 1` a point mass `1 - beta` sits at zero, so the `j = 0`
/// equation only has to carry the continuous mass `beta`.
pub fn fit_alpha(c: &[f64], phi: &MomentVector, beta: f64, order: usize) -> Result<AlphaFit> {
    if c.len() < 2 * order + 1 {
        return Err(Error::param(format!(
            "order {order} needs c_0..c_{}, got {} entries",
            2 * order,
            c.len()
        )));
    }
    if phi.order() < order {
        return Err(Error::param(format!(
            "order {order} needs {} moments, got {}",
            order + 1,
            phi.order() + 1
        )));
    }
    let hankel = RealMatrix::from_fn(order + 1, order + 1, |j, k| c[j + k]);
    let mut rhs: Vec<f64> = phi.as_slice()[..=order].to_vec();
    if beta < 1.0 {
        rhs[0] = phi.get(0) - (1.0 - beta);
    }
    let fit_error = |_| Error::Fit {
        condition: f64::INFINITY,
        residual: f64::NAN,
    };
    let condition = condition_inf(&hankel).map_err(fit_error)?;
    let sol = solve_dense(&hankel, &rhs).map_err(fit_error)?;
    if !(condition <= MAX_FIT_CONDITION) {
        return Err(Error::Fit {
            condition,
            residual: sol.residual,
        });
    }
    Ok(AlphaFit {
        alpha: sol.x,
        residual: sol.residual,
        condition,
    })
}

/// Polynomially corrected Marčenko–Pastur density
/// `f(x) = delta_mass * delta(x) + beta sqrt((b-x)(x-a)) / (2 pi K_m x) * sum_k alpha_k x^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LsdModel {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
    pub k_m: usize,
    pub alpha: Vec<f64>,
    pub delta_mass: f64,
}

/// Fitted model plus fit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedLsd {
    pub model: LsdModel,
    /// Residual of the moment system in units scaled by the upper edge.
    pub residual: f64,
    pub condition: f64,
}

impl LsdModel {
    pub fn order(&self) -> usize {
        self.alpha.len().saturating_sub(1)
    }

    /// Fits `alpha` on `[eta * b, b]` to the moments `phi`.
    ///
    /// The system is solved in the variable `s = x / b`, where its entries are
    /// O(1) regardless of the eigenvalue scale; the coefficients are mapped back
    /// afterwards.
    pub fn fit(
        phi: &MomentVector,
        eta: f64,
        b: f64,
        beta: f64,
        k_m: usize,
        order: usize,
        rule: &ChebyshevRule,
    ) -> Result<FittedLsd> {
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::param(format!(
                "upper edge must be positive, got {b}"
            )));
        }
        if !(0.0..1.0).contains(&eta) {
            return Err(Error::param(format!("eta must lie in [0, 1), got {eta}")));
        }
        let unit = coefficient_table_with(rule, eta, 1.0, beta, k_m, 2 * order)?;
        let scaled: Vec<f64> = phi.as_slice()[..=order.min(phi.order())]
            .iter()
            .enumerate()
            .map(|(j, v)| v / b.powi(j as i32))
            .collect();
        let fit = fit_alpha(&unit, &MomentVector::new(scaled), beta, order)?;
        let alpha = fit
            .alpha
            .iter()
            .enumerate()
            .map(|(k, v)| v / b.powi(k as i32 + 1))
            .collect();
        Ok(FittedLsd {
            model: LsdModel {
                a: eta * b,
                b,
                beta,
                k_m,
                alpha,
                delta_mass: if beta < 1.0 { 1.0 - beta } else { 0.0 },
            },
            residual: fit.residual,
            condition: fit.condition,
        })
    }

    fn prefactor(&self) -> f64 {
        self.beta / (2.0 * PI * self.k_m as f64)
    }

    // sum_k alpha_k x^k, evaluated as sum_k (alpha_k b^k) (x/b)^k
    fn poly(&self, x: f64) -> f64 {
        let s = x / self.b;
        let mut acc = 0.0;
        for (k, a) in self.alpha.iter().enumerate().rev() {
            acc = acc * s + a * self.b.powi(k as i32);
        }
        acc
    }

    /// Continuous part of the density; zero outside `[a, b]`.
    pub fn density(&self, x: f64) -> f64 {
        if !(x >= self.a && x <= self.b) || x <= 0.0 {
            return 0.0;
        }
        let w = ((self.b - x) * (x - self.a)).max(0.0).sqrt();
        self.prefactor() * w / x * self.poly(x)
    }

    /// `int log(1 + x) f(x) dx`; the point mass contributes `log 1 = 0`.
    pub fn capacity(&self, rule: &ChebyshevRule) -> f64 {
        if !(self.a < self.b) {
            return 0.0;
        }
        let pref = self.prefactor();
        rule.mapped(self.a, self.b)
            .map(|(x, w)| w * pref * ln_1p_over_x(x) * self.poly(x))
            .sum()
    }

    /// Mass of the continuous part, `sum_k alpha_k c_k`. Going through the
    /// coefficient table keeps the `1/x` term exact when `a = 0`.
    pub fn continuous_mass(&self, rule: &ChebyshevRule) -> f64 {
        if !(self.a < self.b) || self.k_m == 0 {
            return 0.0;
        }
        match coefficient_table_with(rule, self.a, self.b, self.beta, self.k_m, self.order()) {
            Ok(c) => c.iter().zip(&self.alpha).map(|(c, a)| c * a).sum(),
            Err(_) => f64::NAN,
        }
    }

    /// Fraction of quadrature nodes where the fitted density is negative.
    pub fn negative_density_fraction(&self, rule: &ChebyshevRule) -> f64 {
        let neg = rule
            .mapped(self.a, self.b)
            .filter(|&(x, _)| self.poly(x) < 0.0)
            .count();
        neg as f64 / rule.len() as f64
    }
}

/// `log(1 + x) / x`, smooth through `x = 0`.
fn ln_1p_over_x(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        x.ln_1p() / x
    }
}

/// Continuous density value of `model` at `x`.
pub fn lsd_density(model: &LsdModel, x: f64) -> f64 {
    model.density(x)
}

/// Capacity integral of `model` with the default node count.
pub fn capacity_integral(model: &LsdModel) -> f64 {
    let rule = ChebyshevRule::new(DEFAULT_QUAD_NODES).expect("nonzero node count");
    model.capacity(&rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    // composite midpoint rule after x = a + (b - a) sin^2(t), which removes
    // the square-root endpoint behaviour and never evaluates the endpoints;
    // an independent reference integrator
    fn reference(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let n = 400_000;
        let h = (PI / 2.0) / n as f64;
        (0..n)
            .map(|i| {
                let (s, c) = ((i as f64 + 0.5) * h).sin_cos();
                let x = a + (b - a) * s * s;
                let w = ((b - x) * (x - a)).max(0.0).sqrt();
                f(x) * w * 2.0 * (b - a) * s * c
            })
            .sum::<f64>()
            * h
    }

    #[test]
    fn table_closed_forms() {
        let (a, b, beta, k) = (0.4, 9.0, 2.0, 50);
        let c = mp_coefficient_table(a, b, beta, k, 6).unwrap();
        assert!(rel(c[1], beta * (b - a).powi(2) / (16.0 * k as f64)) < 1e-12);
        assert!(
            rel(
                c[0],
                beta * ((a + b) / 2.0 - (a * b).sqrt()) / (2.0 * k as f64)
            ) < 1e-14
        );
        // quadrature of the 1/x integrand agrees with the closed form when a > 0
        let rule = ChebyshevRule::new(256).unwrap();
        let quad = beta / (2.0 * PI * k as f64) * rule.integrate(a, b, |x| 1.0 / x).unwrap();
        assert!(rel(c[0], quad) < 1e-10);
        for i in 2..=6 {
            let r = beta / (2.0 * PI * k as f64) * reference(a, b, |x| x.powi(i as i32 - 1));
            assert!(rel(c[i], r) < 1e-8, "c_{i}");
        }
    }

    #[test]
    fn table_at_zero_lower_edge() {
        let (b, beta, k) = (3.0, 0.5, 10);
        let c = mp_coefficient_table(0.0, b, beta, k, 2).unwrap();
        let r = beta / (2.0 * PI * k as f64) * reference(0.0, b, |x| 1.0 / x);
        assert!(c[0].is_finite());
        assert!(rel(c[0], r) < 1e-6, "{} vs {r}", c[0]);
        assert!(rel(c[0], beta * b / (4.0 * k as f64)) < 1e-15);
    }

    #[test]
    fn table_rejects_bad_edges() {
        assert!(mp_coefficient_table(2.0, 1.0, 1.0, 1, 2).is_err());
        assert!(mp_coefficient_table(-1.0, 1.0, 1.0, 1, 2).is_err());
    }

    #[test]
    fn synthetic_round_trip() {
        let c = mp_coefficient_table(0.1, 2.0, 1.5, 3, 6).unwrap();
        let truth = [1.0, 0.2, -0.05, 0.01];
        let phi: Vec<f64> = (0..4)
            .map(|j| (0..4).map(|k| c[j + k] * truth[k]).sum())
            .collect();
        let fit = fit_alpha(&c, &MomentVector::new(phi), 1.5, 3).unwrap();
        for (a, t) in fit.alpha.iter().zip(&truth) {
            assert!((a - t).abs() < 1e-8, "{a} vs {t}");
        }
    }

    #[test]
    fn zeroth_order_fits() {
        let c = mp_coefficient_table(0.1, 2.0, 3.0, 5, 0).unwrap();
        let phi = MomentVector::new(vec![1.0]);
        let fit = fit_alpha(&c, &phi, 3.0, 0).unwrap();
        assert!(rel(fit.alpha[0], 1.0 / c[0]) < 1e-15);
        let fit = fit_alpha(&c, &phi, 0.25, 0).unwrap();
        assert!(rel(fit.alpha[0], 0.25 / c[0]) < 1e-15);
    }

    #[test]
    fn ill_posed_fit_is_rejected() {
        let c = vec![1.0, 1.0, 1.0];
        let phi = MomentVector::new(vec![1.0, 2.0]);
        assert!(matches!(
            fit_alpha(&c, &phi, 1.0, 1),
            Err(Error::Fit { .. })
        ));
        assert!(fit_alpha(&c, &MomentVector::new(vec![1.0]), 1.0, 1).is_err());
    }

    fn plain(a: f64, b: f64, beta: f64, k: usize) -> LsdModel {
        LsdModel {
            a,
            b,
            beta,
            k_m: k,
            alpha: vec![1.0, 0.0, 0.0, 0.0],
            delta_mass: if beta < 1.0 { 1.0 - beta } else { 0.0 },
        }
    }

    #[test]
    fn density_edges_and_midpoint() {
        let m = plain(1.0, 5.0, 2.0, 10);
        assert_eq!(m.density(1.0), 0.0);
        assert_eq!(m.density(5.0), 0.0);
        assert_eq!(m.density(0.5), 0.0);
        assert_eq!(m.density(7.0), 0.0);
        let mid = 3.0;
        let expect = 2.0 * ((5.0f64 - mid) * (mid - 1.0)).sqrt() / (2.0 * PI * 10.0 * mid);
        assert!(rel(m.density(mid), expect) < 1e-14);
    }

    #[test]
    fn fitted_mass_is_conserved() {
        let rule = ChebyshevRule::new(256).unwrap();
        for &(beta, k) in &[(0.5, 50usize), (2.0, 400), (8.0, 1600)] {
            let b = 40.0;
            let phi = MomentVector::new(vec![1.0, 8.0, 90.0, 1200.0]);
            let fit = LsdModel::fit(&phi, 4e-3, b, beta, k, 3, &rule).unwrap();
            let mass = fit.model.continuous_mass(&rule);
            let target = beta.min(1.0);
            assert!((mass - target).abs() < 1e-6, "beta {beta}: {mass}");
            assert!((fit.model.delta_mass + mass - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn capacity_special_cases() {
        let rule = ChebyshevRule::new(256).unwrap();
        let mut m = plain(0.5, 4.0, 2.0, 8);
        m.alpha = vec![0.0; 4];
        assert_eq!(m.capacity(&rule), 0.0);
        let small = plain(0.0, 1e-12, 2.0, 8);
        assert!(small.capacity(&rule).abs() < 1e-20);
    }

    #[test]
    fn capacity_matches_dense_reference() {
        let m = plain(0.3, 12.0, 2.0, 4);
        let fast = capacity_integral(&m);
        let slow = reference(0.3, 12.0, |x| (1.0 + x).ln() * m.prefactor() / x);
        assert!(rel(fast, slow) < 1e-6, "{fast} vs {slow}");
    }

    #[test]
    fn fit_reproduces_plain_mp_law() {
        // moments of the Marčenko–Pastur law of G G* (p x n): edges n(1 ± sqrt(p/n))^2
        let rule = ChebyshevRule::new(256).unwrap();
        let (p, n) = (200.0f64, 400.0f64);
        let b = n * (1.0 + (p / n).sqrt()).powi(2);
        let a = n * (1.0 - (p / n).sqrt()).powi(2);
        let phi = MomentVector::new(vec![
            1.0,
            n,
            n * n + p * n,
            n.powi(3) + 3.0 * p * n * n + p * p * n,
        ]);
        let fit = LsdModel::fit(&phi, a / b, b, n / p, n as usize, 3, &rule).unwrap();
        let alpha = &fit.model.alpha;
        assert!((alpha[0] - 1.0).abs() < 1e-6, "{alpha:?}");
        for (k, v) in alpha.iter().enumerate().skip(1) {
            assert!((v * b.powi(k as i32)).abs() < 1e-6, "{alpha:?}");
        }
    }
}
