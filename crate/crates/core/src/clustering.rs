//! Lloyd's K-means over planar points and the cluster partition of a network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::numkernel::RngStream;
use crate::par::{self, Execution};
use crate::scenario::{NodeSet, Point, Region};
use crate::{Error, Result};

/// Stream id reserved for centroid seeding.
pub const CLUSTER_STREAM: u64 = 2;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Centroid-movement tolerance as a fraction of the region scale.
pub const DEFAULT_TOL_FRAC: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub centroids: Vec<Point>,
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// False when `max_iter` was reached before centroids settled.
    pub converged: bool,
    /// Within-cluster sum of squares after every assignment step.
    pub wcss_history: Vec<f64>,
}

impl KMeans {
    pub fn wcss(&self) -> f64 {
        *self.wcss_history.last().unwrap_or(&0.0)
    }
}

/// Lloyd iterations from k-means++ seeding.
///
/// Equal weights for every point. A cluster left empty after an update is
/// re-seeded at the point farthest from its assigned centroid.
pub fn kmeans(
    points: &[Point],
    m: usize,
    rng: &mut RngStream,
    max_iter: usize,
    tol: f64,
) -> Result<KMeans> {
    if m == 0 {
        return Err(Error::param("k-means needs at least one cluster"));
    }
    if m > points.len() {
        return Err(Error::param(format!(
            "k-means: {m} clusters requested for {} points",
            points.len()
        )));
    }
    let mut centroids = seed_plus_plus(points, m, rng);
    let mut history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    let (mut labels, mut dist2) = assign(points, &centroids);

    history.push(dist2.iter().sum::<f64>());
    while iterations < max_iter {
        iterations += 1;
        let updated = update(points, &labels, &dist2, m);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| a.distance(b))
            .fold(0.0, f64::max);
        centroids = updated;
        (labels, dist2) = assign(points, &centroids);
        let wcss: f64 = dist2.iter().sum();
        let prev = *history.last().unwrap();
        if wcss > prev * (1.0 + 1e-12) + 1e-9 {
            return Err(Error::Invariant(format!(
                "k-means objective increased from {prev} to {wcss}"
            )));
        }
        history.push(wcss);
        if shift < tol {
            converged = true;
            break;
        }
    }
    Ok(KMeans {
        centroids,
        labels,
        iterations,
        converged,
        wcss_history: history,
    })
}

fn seed_plus_plus(points: &[Point], m: usize, rng: &mut RngStream) -> Vec<Point> {
    let n = points.len();
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centroids = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &points[first])).collect();
    while centroids.len() < m {
        let total: f64 = d2.iter().sum();
        let idx = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.unwrap()
        } else {
            // every remaining point coincides with a centroid
            (0..n).find(|&i| !chosen[i]).unwrap()
        };
        chosen[idx] = true;
        let c = points[idx];
        centroids.push(c);
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, &c));
        }
    }
    centroids
}

fn assign(points: &[Point], centroids: &[Point]) -> (Vec<usize>, Vec<f64>) {
    par::map_slice(points, Execution::Parallel, |p| {
        let mut best = (0, f64::INFINITY);
        for (c, q) in centroids.iter().enumerate() {
            let d = sq_dist(p, q);
            if d < best.1 {
                best = (c, d);
            }
        }
        best
    })
    .into_iter()
    .unzip()
}

fn update(points: &[Point], labels: &[usize], dist2: &[f64], m: usize) -> Vec<Point> {
    let mut sum = vec![(0.0, 0.0, 0usize); m];
    for (p, &l) in points.iter().zip(labels) {
        sum[l].0 += p.x;
        sum[l].1 += p.y;
        sum[l].2 += 1;
    }
    let mut taken = vec![false; points.len()];
    sum.iter()
        .map(|&(sx, sy, cnt)| {
            if cnt > 0 {
                Point::new(sx / cnt as f64, sy / cnt as f64)
            } else {
                let far = (0..points.len())
                    .filter(|&i| !taken[i])
                    .max_by(|&a, &b| dist2[a].total_cmp(&dist2[b]).then(b.cmp(&a)))
                    .unwrap();
                taken[far] = true;
                points[far]
            }
        })
        .collect()
}

#[inline]
fn sq_dist(a: &Point, b: &Point) -> f64 {
    (a.x - b.x).powi(2) + (a.y - b.y).powi(2)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels_bs: Vec<usize>,
    pub labels_user: Vec<usize>,
    pub centroids: Vec<Point>,
    pub m: usize,
    /// `J_m` per cluster.
    pub bs_counts: Vec<usize>,
    /// `K_m` per cluster.
    pub user_counts: Vec<usize>,
    pub converged: bool,
    pub iterations: usize,
}

impl ClusterAssignment {
    /// Clusters without any BS. Their capacity is undefined.
    pub fn empty_bs_clusters(&self) -> Vec<usize> {
        (0..self.m).filter(|&c| self.bs_counts[c] == 0).collect()
    }

    pub fn bs_in(&self, cluster: usize) -> Vec<usize> {
        indices_with(&self.labels_bs, cluster)
    }

    pub fn users_in(&self, cluster: usize) -> Vec<usize> {
        indices_with(&self.labels_user, cluster)
    }
}

fn indices_with(labels: &[usize], cluster: usize) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| (l == cluster).then_some(i))
        .collect()
}

/// K-means on the pooled BS and user positions, split back per node kind.
pub fn cluster_network(nodes: &NodeSet, m: usize, seed: u64) -> Result<ClusterAssignment> {
    let pooled = nodes.pooled();
    if pooled.len() < m {
        return Err(Error::param(format!(
            "{m} clusters requested for {} nodes",
            pooled.len()
        )));
    }
    let mut rng = RngStream::new(seed, CLUSTER_STREAM);
    let tol = DEFAULT_TOL_FRAC * nodes.region.scale;
    let km = kmeans(&pooled, m, &mut rng, DEFAULT_MAX_ITER, tol)?;
    let j = nodes.num_bs();
    let labels_bs = km.labels[..j].to_vec();
    let labels_user = km.labels[j..].to_vec();
    let mut bs_counts = vec![0; m];
    let mut user_counts = vec![0; m];
    labels_bs.iter().for_each(|&l| bs_counts[l] += 1);
    labels_user.iter().for_each(|&l| user_counts[l] += 1);
    Ok(ClusterAssignment {
        labels_bs,
        labels_user,
        centroids: km.centroids,
        m,
        bs_counts,
        user_counts,
        converged: km.converged,
        iterations: km.iterations,
    })
}

/// Cluster whose centroid is nearest the region center; lowest index on ties.
pub fn central_cluster(assignment: &ClusterAssignment, region: &Region) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, c) in assignment.centroids.iter().enumerate() {
        let d = c.distance(&region.center);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{sample_nodes, NodeDistribution, Shape};

    fn pts(v: &[(f64, f64)]) -> Vec<Point> {
        v.iter().map(|&(x, y)| Point::new(x, y)).collect()
    }

    fn same_partition(a: &[usize], b: &[usize]) -> bool {
        (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
    }

    #[test]
    fn two_pairs() {
        let p = pts(&[(0.0, 0.0), (0.0, 1.0), (10.0, 0.0), (10.0, 1.0)]);
        for seed in 0..20 {
            let km = kmeans(&p, 2, &mut RngStream::new(seed, 0), 100, 1e-9).unwrap();
            assert!(same_partition(&km.labels, &[0, 0, 1, 1]), "seed {seed}");
            assert!(km.converged);
            assert!((km.wcss() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn single_cluster_is_mean() {
        let p = pts(&[(1.0, 2.0), (3.0, -2.0), (5.0, 6.0)]);
        let km = kmeans(&p, 1, &mut RngStream::new(1, 0), 100, 1e-12).unwrap();
        assert_eq!(km.labels, vec![0, 0, 0]);
        assert!((km.centroids[0].x - 3.0).abs() < 1e-12);
        assert!((km.centroids[0].y - 2.0).abs() < 1e-12);
    }

    #[test]
    fn one_cluster_per_point() {
        let p = pts(&[(0.0, 0.0), (1.0, 5.0), (-3.0, 2.0), (7.0, 7.0), (2.0, -1.0)]);
        let km = kmeans(&p, 5, &mut RngStream::new(3, 0), 100, 1e-12).unwrap();
        assert_eq!(km.wcss(), 0.0);
        let mut l = km.labels.clone();
        l.sort();
        l.dedup();
        assert_eq!(l.len(), 5);
    }

    #[test]
    fn too_many_clusters() {
        let p = pts(&[(0.0, 0.0)]);
        assert!(kmeans(&p, 2, &mut RngStream::new(0, 0), 10, 0.0).is_err());
        assert!(kmeans(&p, 0, &mut RngStream::new(0, 0), 10, 0.0).is_err());
    }

    #[test]
    fn duplicate_points_seed_without_panicking() {
        let p = pts(&[(1.0, 1.0); 6]);
        let km = kmeans(&p, 3, &mut RngStream::new(0, 0), 10, 0.0).unwrap();
        assert_eq!(km.labels.len(), 6);
        assert_eq!(km.wcss(), 0.0);
    }

    #[test]
    fn objective_nonincreasing_and_labels_nearest() {
        let sq = Region::new(Shape::Square, 2000.0).unwrap();
        let nodes = sample_nodes(&sq, 300, 600, NodeDistribution::Uniform, 8).unwrap();
        let p = nodes.pooled();
        let km = kmeans(&p, 25, &mut RngStream::new(8, 2), 100, 1e-3).unwrap();
        for w in km.wcss_history.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        for (pt, &l) in p.iter().zip(&km.labels) {
            let dl = pt.distance(&km.centroids[l]);
            assert!(km.centroids.iter().all(|c| dl <= pt.distance(c) + 1e-9));
        }
    }

    #[test]
    fn separated_blobs_are_order_invariant() {
        let mut p = Vec::new();
        for i in 0..20 {
            let t = i as f64 * 0.3;
            p.push(Point::new(t.cos(), t.sin()));
            p.push(Point::new(100.0 + t.sin(), 50.0 + t.cos()));
        }
        let km = kmeans(&p, 2, &mut RngStream::new(5, 0), 100, 1e-9).unwrap();
        for (i, &l) in km.labels.iter().enumerate() {
            assert_eq!(l, km.labels[i % 2]);
        }
        let mut perm: Vec<usize> = (0..p.len()).collect();
        perm.reverse();
        let q: Vec<Point> = perm.iter().map(|&i| p[i]).collect();
        let km2 = kmeans(&q, 2, &mut RngStream::new(5, 0), 100, 1e-9).unwrap();
        let back: Vec<usize> = {
            let mut v = vec![0; p.len()];
            for (pos, &i) in perm.iter().enumerate() {
                v[i] = km2.labels[pos];
            }
            v
        };
        assert!(same_partition(&km.labels, &back));
    }

    #[test]
    fn network_single_cluster() {
        let circle = Region::new(Shape::Circle, 2000.0).unwrap();
        let nodes = sample_nodes(&circle, 10, 20, NodeDistribution::Uniform, 1).unwrap();
        let a = cluster_network(&nodes, 1, 1).unwrap();
        assert!(a.labels_bs.iter().chain(&a.labels_user).all(|&l| l == 0));
        assert_eq!(a.bs_counts, vec![10]);
        assert_eq!(a.user_counts, vec![20]);
        assert_eq!(central_cluster(&a, &circle), 0);
    }

    #[test]
    fn table_one_layout_has_nonempty_clusters() {
        let sq = Region::new(Shape::Square, 2000.0).unwrap();
        let nodes = sample_nodes(&sq, 375, 750, NodeDistribution::Uniform, 2).unwrap();
        let a = cluster_network(&nodes, 25, 2).unwrap();
        assert_eq!(a.labels_bs.len(), 375);
        assert_eq!(a.labels_user.len(), 750);
        for c in 0..25 {
            assert!(a.bs_counts[c] + a.user_counts[c] > 0);
        }
        assert_eq!(a.bs_counts.iter().sum::<usize>(), 375);
        assert!(a.empty_bs_clusters().is_empty());
    }

    fn with_centroids(c: &[(f64, f64)]) -> ClusterAssignment {
        ClusterAssignment {
            labels_bs: vec![],
            labels_user: vec![],
            centroids: pts(c),
            m: c.len(),
            bs_counts: vec![0; c.len()],
            user_counts: vec![0; c.len()],
            converged: true,
            iterations: 0,
        }
    }

    #[test]
    fn central_cluster_argmin_and_ties() {
        let region = Region::new(Shape::Square, 100.0).unwrap();
        let a = with_centroids(&[(5.0, 0.0), (0.0, 3.0), (-9.0, 0.0)]);
        assert_eq!(central_cluster(&a, &region), 1);
        let a = with_centroids(&[(4.0, 0.0), (-4.0, 0.0), (0.0, 4.0)]);
        assert_eq!(central_cluster(&a, &region), 0);
    }
}
