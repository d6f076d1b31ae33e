//! Deterministic channel structure of a cluster.
//!
//! For the BSs and users of one cluster this builds the large-scale fading
//! matrix `L`, the diagonal interference-plus-noise levels `xi` contributed by
//! every out-of-cluster user, and the whitened profile `Q = sqrt(P) xi^{-1/2} L`.
//! The small-scale fading enters later as a Hadamard factor.

use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::numkernel::{ComplexMatrix, RealMatrix};
use crate::scenario::{distance_matrix, NodeSet};
use crate::{Error, Result};

/// Piecewise path-loss and power parameters.
///
/// The gain is `d^-far_exp` beyond `d1`, `d1^-knee_exp * d^-mid_exp` between
/// `d0` and `d1`, and flat at `d1^-knee_exp * d0^-mid_exp` inside `d0`. It is
/// continuous at `d1` when `far_exp = knee_exp + mid_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FadingParams {
    pub d0: f64,
    pub d1: f64,
    /// Per-user transmit power, watts.
    pub power: f64,
    /// Noise power, watts.
    pub noise: f64,
    pub far_exp: f64,
    pub knee_exp: f64,
    pub mid_exp: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        Self {
            d0: 10.0,
            d1: 50.0,
            power: 1.0,
            noise: 1e-12,
            far_exp: 1.75,
            knee_exp: 0.75,
            mid_exp: 1.0,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0 && self.d0 < self.d1) {
            return Err(Error::param(format!(
                "need 0 < d0 < d1, got d0={} d1={}",
                self.d0, self.d1
            )));
        }
        if !(self.power > 0.0 && self.noise > 0.0) {
            return Err(Error::param("power and noise must be positive"));
        }
        Ok(())
    }

    /// Gain at or inside the near-field threshold; the largest possible value.
    pub fn plateau(&self) -> f64 {
        self.d1.powf(-self.knee_exp) * self.d0.powf(-self.mid_exp)
    }
}

pub fn large_scale_fading(d: f64, p: &FadingParams) -> f64 {
    if d > p.d1 {
        d.powf(-p.far_exp)
    } else if d > p.d0 {
        p.d1.powf(-p.knee_exp) * d.powf(-p.mid_exp)
    } else {
        p.plateau()
    }
}

/// Entrywise path gains for a `J_m x K_m` in-cluster distance block.
pub fn fading_matrix(distances: &RealMatrix, p: &FadingParams) -> RealMatrix {
    distances.map(|d| large_scale_fading(d, p))
}

/// `xi_j = N0 + P * sum_{k not in cluster} l_jk^2`.
///
/// `distances` holds every user (columns) against the cluster's BSs (rows);
/// `in_cluster[k]` marks the cluster's own users, which are skipped. Sums are
/// compensated so the result does not depend on user order beyond rounding.
pub fn interference_diagonal(
    distances: &RealMatrix,
    in_cluster: &[bool],
    p: &FadingParams,
) -> Result<Vec<f64>> {
    if in_cluster.len() != distances.cols() {
        return Err(Error::param("membership mask does not match user count"));
    }
    Ok((0..distances.rows())
        .map(|j| {
            let mut acc = Neumaier::default();
            for (&d, &inside) in distances.row(j).iter().zip(in_cluster) {
                if !inside {
                    acc.add(large_scale_fading(d, p).powi(2));
                }
            }
            p.noise + p.power * acc.sum()
        })
        .collect())
}

#[derive(Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// `Q_jk = sqrt(P / xi_j) * L_jk`.
pub fn profile_matrix(l: &RealMatrix, xi: &[f64], p: &FadingParams) -> Result<RealMatrix> {
    if xi.len() != l.rows() {
        return Err(Error::param("interference vector does not match BS count"));
    }
    if let Some(bad) = xi.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Invariant(format!(
            "interference level must be positive, got {bad}"
        )));
    }
    let scale: Vec<f64> = xi.iter().map(|x| (p.power / x).sqrt()).collect();
    Ok(RealMatrix::from_fn(l.rows(), l.cols(), |j, k| {
        scale[j] * l.get(j, k)
    }))
}

/// `B = Q ∘ G`.
pub fn gain_realization(q: &RealMatrix, g: &ComplexMatrix) -> Result<ComplexMatrix> {
    g.hadamard_real(q).ok_or_else(|| {
        Error::param(format!(
            "profile shape {:?} does not match fading shape {:?}",
            q.shape(),
            g.shape()
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelProfile {
    pub l: RealMatrixData,
    pub xi: Vec<f64>,
    pub q: RealMatrixData,
    pub j_m: usize,
    pub k_m: usize,
    pub beta: f64,
}

/// Serializable shadow of a [`RealMatrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealMatrixData {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl From<&RealMatrix> for RealMatrixData {
    fn from(m: &RealMatrix) -> Self {
        Self {
            rows: m.rows(),
            cols: m.cols(),
            data: m.as_slice().to_vec(),
        }
    }
}

impl From<&RealMatrixData> for RealMatrix {
    fn from(m: &RealMatrixData) -> Self {
        RealMatrix::from_vec(m.rows, m.cols, m.data.clone())
    }
}

impl ChannelProfile {
    pub fn from_parts(l: &RealMatrix, xi: Vec<f64>, p: &FadingParams) -> Result<Self> {
        let q = profile_matrix(l, &xi, p)?;
        let (j_m, k_m) = l.shape();
        Ok(Self {
            l: l.into(),
            xi,
            q: (&q).into(),
            j_m,
            k_m,
            beta: if j_m == 0 {
                0.0
            } else {
                k_m as f64 / j_m as f64
            },
        })
    }

    /// Profile whose whitened gains are exactly `q` (unit power, unit
    /// interference). Handy for synthetic inputs.
    pub fn from_profile_matrix(q: &RealMatrix) -> Self {
        let p = FadingParams {
            power: 1.0,
            ..FadingParams::default()
        };
        Self::from_parts(q, vec![1.0; q.rows()], &p).expect("unit interference is positive")
    }

    pub fn q_matrix(&self) -> RealMatrix {
        (&self.q).into()
    }

    pub fn l_matrix(&self) -> RealMatrix {
        (&self.l).into()
    }
}

/// Profile of `cluster` within a clustered network.
pub fn build_profile(
    nodes: &NodeSet,
    assignment: &ClusterAssignment,
    cluster: usize,
    p: &FadingParams,
) -> Result<ChannelProfile> {
    p.validate()?;
    if cluster >= assignment.m {
        return Err(Error::param(format!("cluster {cluster} out of range")));
    }
    let bs_idx = assignment.bs_in(cluster);
    let user_idx = assignment.users_in(cluster);
    let bs: Vec<_> = bs_idx.iter().map(|&i| nodes.bs_positions[i]).collect();
    let all_d = distance_matrix(&bs, &nodes.user_positions);
    let in_cluster: Vec<bool> = assignment
        .labels_user
        .iter()
        .map(|&l| l == cluster)
        .collect();
    let xi = interference_diagonal(&all_d, &in_cluster, p)?;
    let own = all_d.select(&(0..bs.len()).collect::<Vec<_>>(), &user_idx);
    let l = fading_matrix(&own, p);
    ChannelProfile::from_parts(&l, xi, p)
}
