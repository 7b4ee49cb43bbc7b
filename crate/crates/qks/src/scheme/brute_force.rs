//! Exact optimum by exhaustive partition search, for desk-scale
//! verification only.
//!
//! Enumerates set partitions of the points into at most k nonempty
//! blocks in canonical (restricted-growth) order, pruning on the running
//! cost. An optimal solution always assigns each block its centroid, so
//! this search is exact for the k-means objective.

use crate::error::{Error, Result};
use crate::geometry::{centroid, compensated_sum, squared_distance, CenterSet, Dataset, Point};

/// Instance-size cap. The search space is the Stirling number S(n, k);
/// the defaults keep it around a few tens of millions.
#[derive(Debug, Clone, Copy)]
pub struct BruteForceLimits {
    pub max_n: usize,
    pub max_k: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        Self { max_n: 14, max_k: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct BruteForceResult {
    pub cost: f64,
    pub centers: CenterSet,
    pub assignment: Vec<usize>,
}

/// Exact optimum under the default instance cap.
pub fn brute_force_opt(dataset: &Dataset, k: usize) -> Result<BruteForceResult> {
    brute_force_opt_with_limits(dataset, k, BruteForceLimits::default())
}

/// Exact optimum; errors when the instance exceeds `limits`.
pub fn brute_force_opt_with_limits(
    dataset: &Dataset,
    k: usize,
    limits: BruteForceLimits,
) -> Result<BruteForceResult> {
    assert!(k >= 1, "k must be at least 1");
    let n = dataset.len();

    if k >= n {
        // Every point its own center.
        let centers = CenterSet::new(dataset.points().to_vec());
        return Ok(BruteForceResult {
            cost: 0.0,
            centers,
            assignment: (0..n).collect(),
        });
    }

    if n > limits.max_n || k > limits.max_k {
        return Err(Error::BruteForceInfeasible {
            n,
            k,
            max_n: limits.max_n,
            max_k: limits.max_k,
        });
    }

    let dim = dataset.dim();
    let mut search = Search {
        dataset,
        k,
        counts: vec![0usize; k],
        sums: vec![0.0f64; k * dim],
        labels: vec![0usize; n],
        cost: 0.0,
        best_cost: f64::INFINITY,
        best_labels: vec![0usize; n],
        dim,
    };
    search.recurse(0, 0);

    let labels = search.best_labels;
    let blocks = labels.iter().copied().max().unwrap_or(0) + 1;
    let mut members: Vec<Vec<Point>> = vec![Vec::new(); blocks];
    for (i, &b) in labels.iter().enumerate() {
        members[b].push(dataset.point(i).clone());
    }
    let centers: Vec<Point> = members
        .iter()
        .map(|pts| centroid(pts).expect("blocks are nonempty"))
        .collect();

    // Recompute the final cost exactly from the centroids rather than
    // trusting the incremental accumulation.
    let cost = compensated_sum(
        labels
            .iter()
            .enumerate()
            .map(|(i, &b)| squared_distance(dataset.point(i), &centers[b])),
    );

    Ok(BruteForceResult {
        cost,
        centers: CenterSet::new(centers),
        assignment: labels,
    })
}

struct Search<'a> {
    dataset: &'a Dataset,
    k: usize,
    counts: Vec<usize>,
    sums: Vec<f64>,
    labels: Vec<usize>,
    cost: f64,
    best_cost: f64,
    best_labels: Vec<usize>,
    dim: usize,
}

impl Search<'_> {
    /// Adding a point to a block costs `n/(n+1) * ||x - mu||^2`.
    fn add_cost(&self, block: usize, p: &Point) -> f64 {
        let count = self.counts[block];
        if count == 0 {
            return 0.0;
        }
        let inv = 1.0 / count as f64;
        let mut d2 = 0.0;
        for (j, &c) in p.coords().iter().enumerate() {
            let mu = self.sums[block * self.dim + j] * inv;
            let d = c - mu;
            d2 += d * d;
        }
        d2 * count as f64 / (count as f64 + 1.0)
    }

    fn recurse(&mut self, i: usize, used: usize) {
        if self.cost >= self.best_cost {
            return;
        }
        let n = self.dataset.len();
        if i == n {
            self.best_cost = self.cost;
            self.best_labels.copy_from_slice(&self.labels);
            return;
        }
        // Canonical form: point i may join an existing block or open the
        // next one; block b is only reachable after blocks 0..b.
        let reach = (used + 1).min(self.k);
        for block in 0..reach {
            let p = self.dataset.point(i).clone();
            let delta = self.add_cost(block, &p);
            // Prune: remaining points can only add cost.
            if self.cost + delta >= self.best_cost {
                continue;
            }
            self.counts[block] += 1;
            for (j, &c) in p.coords().iter().enumerate() {
                self.sums[block * self.dim + j] += c;
            }
            self.cost += delta;
            self.labels[i] = block;

            self.recurse(i + 1, used.max(block + 1));

            self.cost -= delta;
            for (j, &c) in p.coords().iter().enumerate() {
                self.sums[block * self.dim + j] -= c;
            }
            self.counts[block] -= 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::normalize_dataset;

    fn dataset(points: &[Vec<f64>]) -> Dataset {
        normalize_dataset(points.iter().cloned().map(Point::new).collect()).unwrap()
    }

    #[test]
    fn unit_square_two_clusters() {
        let v = dataset(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![1.0, 1.0],
        ]);
        let r = brute_force_opt(&v, 2).unwrap();
        // Two side-pairs, each contributing 2 * 0.5^2.
        assert!((r.cost - 1.0).abs() < 1e-12, "cost = {}", r.cost);
    }

    #[test]
    fn line_three_points() {
        let v = dataset(&[vec![0.0], vec![1.0], vec![5.0]]);
        let r = brute_force_opt(&v, 2).unwrap();
        assert!((r.cost - 0.5).abs() < 1e-12, "cost = {}", r.cost);
        assert_eq!(r.assignment[0], r.assignment[1]);
        assert_ne!(r.assignment[0], r.assignment[2]);
    }

    #[test]
    fn k_equals_n_is_free() {
        let v = dataset(&[vec![0.0], vec![1.0], vec![3.0]]);
        let r = brute_force_opt(&v, 3).unwrap();
        assert_eq!(r.cost, 0.0);
    }

    #[test]
    fn cap_is_enforced() {
        let pts: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64]).collect();
        let v = dataset(&pts);
        assert!(matches!(
            brute_force_opt(&v, 3),
            Err(Error::BruteForceInfeasible { .. })
        ));
        // Raised limits admit the same instance.
        assert!(brute_force_opt_with_limits(
            &v,
            2,
            BruteForceLimits {
                max_n: 30,
                max_k: 2
            }
        )
        .is_ok());
    }
}
