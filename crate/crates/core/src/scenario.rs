//! Planar network layouts: regions, node sampling and distance geometry.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::numkernel::{RealMatrix, RngStream};
use crate::{Error, Result};

/// Stream id reserved for node placement.
pub const NODE_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    Square,
    Circle,
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "square" => Ok(Shape::Square),
            "circle" => Ok(Shape::Circle),
            other => Err(Error::param(format!("unknown shape '{other}'"))),
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Square => "square",
            Shape::Circle => "circle",
        })
    }
}

/// Closed planar region. `scale` is the side length of a square or the
/// diameter of a circle, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub shape: Shape,
    pub scale: f64,
    pub center: Point,
}

impl Region {
    pub fn new(shape: Shape, scale: f64) -> Result<Self> {
        Self::centered(shape, scale, Point::default())
    }

    pub fn centered(shape: Shape, scale: f64, center: Point) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::param(format!(
                "region scale must be positive, got {scale}"
            )));
        }
        Ok(Self {
            shape,
            scale,
            center,
        })
    }

    pub fn half_extent(&self) -> f64 {
        0.5 * self.scale
    }

    pub fn contains(&self, p: &Point) -> bool {
        in_region(p, self)
    }
}

/// Boundary points count as inside.
pub fn in_region(p: &Point, region: &Region) -> bool {
    let (dx, dy) = (p.x - region.center.x, p.y - region.center.y);
    let r = region.half_extent();
    match region.shape {
        Shape::Square => dx.abs().max(dy.abs()) <= r,
        Shape::Circle => dx * dx + dy * dy <= r * r,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeDistribution {
    Uniform,
    /// Isotropic normal around the region center, per-axis standard deviation
    /// `sigma_frac * D`, truncated to the region by rejection.
    TruncatedNormal {
        sigma_frac: f64,
    },
}

impl NodeDistribution {
    pub const DEFAULT_SIGMA_FRAC: f64 = 0.25;

    pub fn truncated_normal() -> Self {
        NodeDistribution::TruncatedNormal {
            sigma_frac: Self::DEFAULT_SIGMA_FRAC,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            NodeDistribution::Uniform => "uniform",
            NodeDistribution::TruncatedNormal { .. } => "normal",
        }
    }
}

impl FromStr for NodeDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(NodeDistribution::Uniform),
            "normal" | "truncated_normal" | "truncated-normal" => Ok(Self::truncated_normal()),
            other => Err(Error::param(format!("unknown node distribution '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub bs_positions: Vec<Point>,
    pub user_positions: Vec<Point>,
    pub region: Region,
    pub distribution: NodeDistribution,
    pub seed: u64,
}

impl NodeSet {
    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_users(&self) -> usize {
        self.user_positions.len()
    }

    /// BS positions followed by user positions.
    pub fn pooled(&self) -> Vec<Point> {
        self.bs_positions
            .iter()
            .chain(&self.user_positions)
            .copied()
            .collect()
    }
}

/// Draws `j` BSs then `k` users from `distribution`, restricted to `region`.
pub fn sample_nodes(
    region: &Region,
    j: usize,
    k: usize,
    distribution: NodeDistribution,
    seed: u64,
) -> Result<NodeSet> {
    if j == 0 {
        return Err(Error::param("a network needs at least one BS"));
    }
    if !(region.scale > 0.0) {
        return Err(Error::param("region scale must be positive"));
    }
    if let NodeDistribution::TruncatedNormal { sigma_frac } = distribution {
        if !(sigma_frac > 0.0 && sigma_frac.is_finite()) {
            return Err(Error::param("truncated normal needs a positive sigma"));
        }
    }
    let mut rng = RngStream::new(seed, NODE_STREAM);
    let bs_positions = (0..j)
        .map(|_| draw(region, distribution, &mut rng))
        .collect();
    let user_positions = (0..k)
        .map(|_| draw(region, distribution, &mut rng))
        .collect();
    Ok(NodeSet {
        bs_positions,
        user_positions,
        region: *region,
        distribution,
        seed,
    })
}

fn draw(region: &Region, distribution: NodeDistribution, rng: &mut RngStream) -> Point {
    let r = region.half_extent();
    let c = region.center;
    loop {
        let p = match distribution {
            NodeDistribution::Uniform => Point::new(
                c.x + rng.random_range(-r..=r),
                c.y + rng.random_range(-r..=r),
            ),
            NodeDistribution::TruncatedNormal { sigma_frac } => {
                let s = sigma_frac * region.scale;
                let dx: f64 = StandardNormal.sample(rng);
                let dy: f64 = StandardNormal.sample(rng);
                Point::new(c.x + s * dx, c.y + s * dy)
            }
        };
        if in_region(&p, region) {
            return p;
        }
    }
}

/// `d[j][k] = |bs_j - users_k|`.
pub fn distance_matrix(bs: &[Point], users: &[Point]) -> RealMatrix {
    RealMatrix::from_fn(bs.len(), users.len(), |j, k| bs[j].distance(&users[k]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn membership_edges() {
        let circle = Region::new(Shape::Circle, 2000.0).unwrap();
        let square = Region::new(Shape::Square, 2000.0).unwrap();
        assert!(in_region(&Point::default(), &circle));
        assert!(in_region(&Point::default(), &square));
        assert!(!in_region(&Point::new(1001.0, 0.0), &circle));
        assert!(in_region(&Point::new(1000.0, 0.0), &circle));
        assert!(in_region(&Point::new(1000.0, 1000.0), &square));
        assert!(!in_region(&Point::new(1000.0, 1000.0), &circle));
        assert!(!in_region(&Point::new(1000.0, 1000.5), &square));
    }

    #[test]
    fn single_bs_in_disk() {
        let circle = Region::new(Shape::Circle, 2000.0).unwrap();
        let nodes = sample_nodes(&circle, 1, 0, NodeDistribution::Uniform, 7).unwrap();
        assert_eq!(nodes.num_bs(), 1);
        assert_eq!(nodes.num_users(), 0);
        assert!(nodes.bs_positions[0].distance(&Point::default()) <= 1000.0);
    }

    #[test]
    fn sampling_is_deterministic() {
        let sq = Region::new(Shape::Square, 2000.0).unwrap();
        let a = sample_nodes(&sq, 100, 200, NodeDistribution::Uniform, 1).unwrap();
        let b = sample_nodes(&sq, 100, 200, NodeDistribution::Uniform, 1).unwrap();
        assert_eq!(a, b);
        let c = sample_nodes(&sq, 100, 200, NodeDistribution::Uniform, 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_parameters() {
        assert!(Region::new(Shape::Circle, 0.0).is_err());
        assert!(Region::new(Shape::Circle, -5.0).is_err());
        let sq = Region::new(Shape::Square, 10.0).unwrap();
        assert!(sample_nodes(&sq, 0, 3, NodeDistribution::Uniform, 0).is_err());
        let bad = NodeDistribution::TruncatedNormal { sigma_frac: 0.0 };
        assert!(sample_nodes(&sq, 1, 0, bad, 0).is_err());
    }

    #[test]
    fn uniform_disk_mean_radius() {
        // E|r| for a uniform disk of radius R is 2R/3
        let circle = Region::new(Shape::Circle, 2000.0).unwrap();
        let nodes = sample_nodes(&circle, 10_000, 0, NodeDistribution::Uniform, 99).unwrap();
        let mean = nodes
            .bs_positions
            .iter()
            .map(|p| p.distance(&circle.center))
            .sum::<f64>()
            / 10_000.0;
        let expect = 2.0 / 3.0 * 1000.0;
        assert!((mean - expect).abs() / expect < 0.02, "{mean}");
    }

    #[test]
    fn uniform_square_coordinate_means() {
        let sq = Region::centered(Shape::Square, 2000.0, Point::new(50.0, -20.0)).unwrap();
        let n = 20_000;
        let nodes = sample_nodes(&sq, n, 0, NodeDistribution::Uniform, 3).unwrap();
        // per-coordinate sd of U(-1000, 1000) is 2000/sqrt(12)
        let bound = 3.0 * 2000.0 / 12f64.sqrt() / (n as f64).sqrt();
        let mx = nodes.bs_positions.iter().map(|p| p.x).sum::<f64>() / n as f64;
        let my = nodes.bs_positions.iter().map(|p| p.y).sum::<f64>() / n as f64;
        assert!((mx - 50.0).abs() < bound && (my + 20.0).abs() < bound);
    }

    #[test]
    fn truncated_normal_stays_inside_and_concentrates() {
        let circle = Region::new(Shape::Circle, 2000.0).unwrap();
        let nodes =
            sample_nodes(&circle, 5000, 5000, NodeDistribution::truncated_normal(), 4).unwrap();
        assert!(nodes.pooled().iter().all(|p| circle.contains(p)));
        let near = nodes
            .pooled()
            .iter()
            .filter(|p| p.distance(&circle.center) < 500.0)
            .count();
        // a uniform disk would put 25% of nodes within half the radius
        assert!(near as f64 / 10_000.0 > 0.4);
    }

    #[test]
    fn distance_examples() {
        let d = distance_matrix(&[Point::new(0.0, 0.0)], &[Point::new(3.0, 4.0)]);
        assert_eq!(d.as_slice(), &[5.0]);
        let d = distance_matrix(&[Point::new(0.0, 0.0)], &[Point::new(0.0, 0.0)]);
        assert_eq!(d.as_slice(), &[0.0]);
    }

    #[test]
    fn distance_matrix_matches_pairwise_and_transpose() {
        let sq = Region::new(Shape::Square, 100.0).unwrap();
        let nodes = sample_nodes(&sq, 3, 4, NodeDistribution::Uniform, 12).unwrap();
        let d = distance_matrix(&nodes.bs_positions, &nodes.user_positions);
        let dt = distance_matrix(&nodes.user_positions, &nodes.bs_positions);
        for j in 0..3 {
            for k in 0..4 {
                let (b, u) = (nodes.bs_positions[j], nodes.user_positions[k]);
                let brute = ((b.x - u.x).powi(2) + (b.y - u.y).powi(2)).sqrt();
                assert!((d.get(j, k) - brute).abs() < 1e-12);
                assert_eq!(d.get(j, k), dt.get(k, j));
                assert!(d.get(j, k) >= 0.0);
            }
        }
    }
}
