//! Binary sum tree for weighted sampling with logarithmic updates.
//!
//! This is the classical analog of the QRAM access pattern: build in
//! O(N), then sample or update a leaf in O(log N). Parent sums are
//! recomputed from both children on every update rather than patched by
//! deltas, which keeps the root consistent with the leaves to within
//! rounding over any update sequence.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct WeightTree {
    len: usize,
    capacity: usize,
    // 1-indexed heap layout; nodes[1] is the root, leaves start at
    // nodes[capacity].
    nodes: Vec<f64>,
}

impl WeightTree {
    /// Builds a tree over `weights`. All weights must be finite and
    /// nonnegative.
    pub fn build(weights: &[f64]) -> Result<Self> {
        assert!(!weights.is_empty(), "weight tree needs at least one leaf");
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFiniteWeight { index });
            }
            if w < 0.0 {
                return Err(Error::NegativeWeight { index, weight: w });
            }
        }
        let capacity = weights.len().next_power_of_two();
        let mut nodes = vec![0.0; 2 * capacity];
        nodes[capacity..capacity + weights.len()].copy_from_slice(weights);
        for i in (1..capacity).rev() {
            nodes[i] = nodes[2 * i] + nodes[2 * i + 1];
        }
        Ok(Self {
            len: weights.len(),
            capacity,
            nodes,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Sum of all leaf weights as stored at the root.
    pub fn total(&self) -> f64 {
        self.nodes[1]
    }

    pub fn leaf_weight(&self, i: usize) -> f64 {
        assert!(i < self.len, "leaf index out of range");
        self.nodes[self.capacity + i]
    }

    /// Sets leaf `i` to `w` and recomputes every ancestor sum.
    pub fn update(&mut self, i: usize, w: f64) -> Result<()> {
        if i >= self.len {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.len,
            });
        }
        if !w.is_finite() {
            return Err(Error::NonFiniteWeight { index: i });
        }
        if w < 0.0 {
            return Err(Error::NegativeWeight {
                index: i,
                weight: w,
            });
        }
        let mut node = self.capacity + i;
        self.nodes[node] = w;
        while node > 1 {
            node /= 2;
            self.nodes[node] = self.nodes[2 * node] + self.nodes[2 * node + 1];
        }
        Ok(())
    }

    /// Draws a leaf index with probability `weight / total` by descending
    /// the tree on a single uniform draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let total = self.total();
        if !(total > 0.0) {
            return Err(Error::EmptyDistribution);
        }
        let mut u = rng.gen::<f64>() * total;
        let mut node = 1usize;
        while node < self.capacity {
            let left = self.nodes[2 * node];
            let right = self.nodes[2 * node + 1];
            // Zero-weight subtrees are never entered, so padding leaves
            // and explicit zero weights cannot be drawn.
            if u < left || right <= 0.0 {
                node = 2 * node;
            } else {
                u -= left;
                node = 2 * node + 1;
            }
        }
        let leaf = node - self.capacity;
        debug_assert!(leaf < self.len && self.nodes[node] > 0.0);
        Ok(leaf.min(self.len - 1))
    }

    /// `(child sum, parent sum)` pairs along the root-to-leaf path.
    /// The product of the ratios telescopes to `leaf / root` exactly in
    /// exact arithmetic, which is what the structural sampling tests
    /// verify.
    pub fn descent_ratios(&self, i: usize) -> Vec<(f64, f64)> {
        assert!(i < self.len, "leaf index out of range");
        let mut path = Vec::new();
        let mut node = self.capacity + i;
        while node > 1 {
            path.push((self.nodes[node], self.nodes[node / 2]));
            node /= 2;
        }
        path.reverse();
        path
    }

    /// Probability of drawing leaf `i`, computed as the path product of
    /// child/parent sums.
    pub fn leaf_probability(&self, i: usize) -> f64 {
        self.descent_ratios(i)
            .into_iter()
            .map(|(child, parent)| if parent > 0.0 { child / parent } else { 0.0 })
            .product()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn build_totals_and_probabilities() {
        let tree = WeightTree::build(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(tree.total(), 10.0);
        for (i, expected) in [0.1, 0.2, 0.3, 0.4].into_iter().enumerate() {
            let p = tree.leaf_probability(i);
            assert!((p - expected).abs() < 1e-15, "leaf {i}: {p}");
        }
    }

    #[test]
    fn zero_weights_never_sampled() {
        let tree = WeightTree::build(&[0.0, 0.0, 5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10_000 {
            assert_eq!(tree.sample(&mut rng).unwrap(), 2);
        }
    }

    #[test]
    fn single_leaf_always_drawn() {
        let tree = WeightTree::build(&[1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(tree.sample(&mut rng).unwrap(), 0);
        }
    }

    #[test]
    fn update_moves_mass() {
        let mut tree = WeightTree::build(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        tree.update(0, 5.0).unwrap();
        assert_eq!(tree.total(), 14.0);
        assert_eq!(tree.leaf_weight(0), 5.0);
        assert_eq!(tree.leaf_probability(1), 2.0 / 14.0);

        // Updating to the current weight changes nothing.
        let before = tree.nodes.clone();
        tree.update(2, 3.0).unwrap();
        assert_eq!(tree.nodes, before);
    }

    #[test]
    fn updated_zero_weight_never_drawn() {
        let mut tree = WeightTree::build(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        tree.update(3, 0.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            assert_ne!(tree.sample(&mut rng).unwrap(), 3);
        }
    }

    #[test]
    fn negative_weight_rejected() {
        assert!(matches!(
            WeightTree::build(&[1.0, -0.5]),
            Err(Error::NegativeWeight { index: 1, .. })
        ));
        let mut tree = WeightTree::build(&[1.0, 1.0]).unwrap();
        assert!(tree.update(0, -1.0).is_err());
        assert!(tree.update(5, 1.0).is_err());
    }

    #[test]
    fn empty_distribution_errors() {
        let tree = WeightTree::build(&[0.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        assert!(matches!(
            tree.sample(&mut rng),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn symmetric_pair_frequencies() {
        let tree = WeightTree::build(&[1.0, 1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let zeros = (0..n)
            .filter(|_| tree.sample(&mut rng).unwrap() == 0)
            .count();
        // 3 sigma for Binomial(1e5, 0.5).
        let sigma = (0.25 * n as f64).sqrt();
        assert!((zeros as f64 - n as f64 * 0.5).abs() < 3.0 * sigma);
    }

    #[test]
    fn weighted_pair_frequencies() {
        let tree = WeightTree::build(&[1.0, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let n = 100_000;
        let ones = (0..n)
            .filter(|_| tree.sample(&mut rng).unwrap() == 1)
            .count();
        let sigma = (0.75 * 0.25 * n as f64).sqrt();
        assert!((ones as f64 - n as f64 * 0.75).abs() < 3.0 * sigma);
    }

    #[test]
    fn sparse_weights_keep_exact_ratio_support() {
        let tree = WeightTree::build(&[2.0, 0.0, 0.0, 6.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut counts = [0usize; 4];
        let n = 100_000;
        for _ in 0..n {
            counts[tree.sample(&mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[1], 0);
        assert_eq!(counts[2], 0);
        let frac = counts[3] as f64 / n as f64;
        let sigma = (0.75 * 0.25 * n as f64).sqrt() / n as f64;
        assert!((frac - 0.75).abs() < 3.0 * sigma);
    }
}
