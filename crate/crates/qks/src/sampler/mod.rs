//! D²-sampling through the distance channel.
//!
//! A point is drawn with probability proportional to its squared
//! estimated distance to the nearest current center (uniformly when the
//! center set is empty). Two access paths exist:
//!
//! - [`d2_distribution`] materializes the full distribution, which is
//!   what the rejection sampler realizes conditioned on acceptance. Under
//!   the deterministic channels this is exactly computable.
//! - [`d2_sample_rejection`] mirrors the amplitude-encoding access
//!   pattern: propose a uniform index, accept with probability
//!   `estimate^2 / (2 * cost_estimate)`. Acceptance probabilities above 1
//!   would correspond to an invalid amplitude and are an error.
//!
//! [`pseudo_approx_seed`] runs the 2k-round adaptive seeding on top of
//! the rejection sampler and returns the chosen data points as a
//! constant-factor (pseudo-approximate) center set.

mod tree;

pub use tree::WeightTree;

use rand::Rng;

use crate::error::{Error, Result};
use crate::estimator;
use crate::geometry::{compensated_sum, exact_cost, CenterSet, Dataset};
use crate::oracle::{DistanceOracle, OracleMode};

/// Proposals before the rejection sampler gives up.
pub const STARVATION_LIMIT: u64 = 10_000_000;

/// A normalized D² distribution over dataset indices.
#[derive(Debug, Clone)]
pub struct D2Distribution {
    probs: Vec<f64>,
    source: OracleMode,
}

impl D2Distribution {
    /// Normalizes squared min-distance estimates into a distribution.
    pub fn from_squared_estimates(sq: Vec<f64>, source: OracleMode) -> Result<Self> {
        let total = compensated_sum(sq.iter().copied());
        if !(total > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        Ok(Self {
            probs: sq.into_iter().map(|s| s / total).collect(),
            source,
        })
    }

    pub fn uniform(n: usize, source: OracleMode) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
            source,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn source(&self) -> OracleMode {
        self.source
    }

    /// Ground-truth sampler over this distribution.
    pub fn to_weight_tree(&self) -> WeightTree {
        WeightTree::build(&self.probs).expect("probabilities are valid weights")
    }
}

/// The D² distribution w.r.t. `centers`, uniform when `centers` is
/// `None`. Errors when every point coincides with a center.
pub fn d2_distribution<R: Rng + ?Sized>(
    dataset: &Dataset,
    centers: Option<&CenterSet>,
    oracle: &DistanceOracle,
    rng: &mut R,
) -> Result<D2Distribution> {
    match centers {
        None => Ok(D2Distribution::uniform(
            dataset.len(),
            oracle.config().mode,
        )),
        Some(c) => {
            let (sq, _all_ok) = oracle.min_sq_profile(dataset, c, rng);
            D2Distribution::from_squared_estimates(sq, oracle.config().mode)
        }
    }
}

/// One accepted index from the rejection sampler, plus the number of
/// proposals it took.
///
/// `cost_estimate` plays the role of the clustering cost in the
/// acceptance probability `estimate^2 / (2 * cost_estimate)`; any value
/// at least `max_i estimate_i^2` is valid and only changes the expected
/// number of proposals (`2 * cost_estimate * N / sum_i estimate_i^2`),
/// never the conditional distribution. Under the deterministic channels
/// estimates are fixed functions, so they are computed once per point;
/// under the stochastic channel every proposal re-estimates.
pub fn d2_sample_rejection<R: Rng + ?Sized>(
    dataset: &Dataset,
    centers: &CenterSet,
    oracle: &DistanceOracle,
    cost_estimate: f64,
    rng: &mut R,
) -> Result<(usize, u64)> {
    d2_sample_rejection_with_limit(dataset, centers, oracle, cost_estimate, STARVATION_LIMIT, rng)
}

/// [`d2_sample_rejection`] with an explicit proposal budget.
pub fn d2_sample_rejection_with_limit<R: Rng + ?Sized>(
    dataset: &Dataset,
    centers: &CenterSet,
    oracle: &DistanceOracle,
    cost_estimate: f64,
    limit: u64,
    rng: &mut R,
) -> Result<(usize, u64)> {
    assert!(
        cost_estimate.is_finite() && cost_estimate > 0.0,
        "cost_estimate must be positive and finite"
    );
    let n = dataset.len();
    let deterministic = oracle.config().mode != OracleMode::Stochastic;

    let cached: Option<Vec<f64>> = if deterministic {
        let (sq, _) = oracle.min_sq_profile(dataset, centers, rng);
        for &s in &sq {
            if s > cost_estimate {
                return Err(Error::InvalidAmplitude {
                    estimate_sq: s,
                    cost_estimate,
                });
            }
        }
        if !(compensated_sum(sq.iter().copied()) > 0.0) {
            return Err(Error::DegenerateDistribution);
        }
        Some(sq)
    } else {
        None
    };

    let mut proposals = 0u64;
    while proposals < limit {
        proposals += 1;
        let i = rng.gen_range(0..n);
        let sq = match &cached {
            Some(c) => {
                oracle.record_queries(centers.len() as u64);
                c[i]
            }
            None => {
                let (sq, _failed) = oracle.estimate_min_sq(dataset.point(i), centers, rng);
                if sq > cost_estimate {
                    return Err(Error::InvalidAmplitude {
                        estimate_sq: sq,
                        cost_estimate,
                    });
                }
                sq
            }
        };
        if rng.gen::<f64>() < sq / (2.0 * cost_estimate) {
            return Ok((i, proposals));
        }
    }
    Err(Error::SamplerStarvation { proposals: limit })
}

/// Cost value used as the rejection denominator for the current center
/// set, refreshed every sampling round.
///
/// Exact mode uses the exact cost; the delta-close channel uses the full
/// estimated cost (the sum of its fixed squared estimates, which always
/// dominates each term); the stochastic channel uses an inflated sampled
/// estimate, which [`d2_sample_with_retry`] doubles further if a proposal
/// ever exceeds it.
pub fn refresh_cost_estimate<R: Rng + ?Sized>(
    dataset: &Dataset,
    centers: &CenterSet,
    oracle: &DistanceOracle,
    rng: &mut R,
) -> f64 {
    match oracle.config().mode {
        OracleMode::Exact => exact_cost(dataset, centers),
        OracleMode::DeterministicDelta => {
            let (sq, _) = oracle.min_sq_profile(dataset, centers, rng);
            compensated_sum(sq.into_iter())
        }
        OracleMode::Stochastic => {
            let m = estimator::sample_count_m(oracle.eta_tilde().max(1.0), 1, 0.5);
            let est = estimator::estimate_cost(dataset, centers, m, oracle, rng);
            4.0 * est.alpha
        }
    }
}

/// Rejection sampling with a liveness policy for the stochastic channel:
/// when a fresh estimate exceeds the current denominator, the denominator
/// doubles and the round restarts. Proposals are i.i.d., so the
/// conditional distribution is unchanged. A non-positive `cost_estimate`
/// means every point coincides with a center, in which case the draw
/// falls back to uniform.
pub fn d2_sample_with_retry<R: Rng + ?Sized>(
    dataset: &Dataset,
    centers: &CenterSet,
    oracle: &DistanceOracle,
    cost_estimate: f64,
    rng: &mut R,
) -> Result<(usize, u64)> {
    if !(cost_estimate > 0.0) {
        return Ok((rng.gen_range(0..dataset.len()), 1));
    }
    let mut denom = cost_estimate;
    for _ in 0..64 {
        match d2_sample_rejection(dataset, centers, oracle, denom, rng) {
            Err(Error::InvalidAmplitude { .. })
                if oracle.config().mode == OracleMode::Stochastic =>
            {
                denom *= 2.0;
            }
            Err(Error::DegenerateDistribution) => {
                return Ok((rng.gen_range(0..dataset.len()), 1));
            }
            other => return other,
        }
    }
    Err(Error::InvalidAmplitude {
        estimate_sq: f64::INFINITY,
        cost_estimate: denom,
    })
}

/// 2k rounds of adaptive D²-sampling: the first pick is uniform, each
/// later pick is drawn w.r.t. the centers chosen so far. Returns the 2k
/// chosen data points (duplicates are legal) as a pseudo-approximate
/// center set.
pub fn pseudo_approx_seed<R: Rng + ?Sized>(
    dataset: &Dataset,
    k: usize,
    oracle: &DistanceOracle,
    rng: &mut R,
) -> Result<CenterSet> {
    assert!(k >= 1, "k must be at least 1");
    let mut chosen = Vec::with_capacity(2 * k);
    for round in 0..2 * k {
        let index = if round == 0 {
            rng.gen_range(0..dataset.len())
        } else {
            let current = CenterSet::new(chosen.clone());
            let cost = refresh_cost_estimate(dataset, &current, oracle, rng);
            d2_sample_with_retry(dataset, &current, oracle, cost, rng)?.0
        };
        chosen.push(dataset.point(index).clone());
    }
    Ok(CenterSet::new(chosen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{normalize_dataset, Point};
    use crate::oracle::OracleConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p(coords: &[f64]) -> Point {
        Point::new(coords.to_vec())
    }

    fn line_dataset(xs: &[f64]) -> Dataset {
        normalize_dataset(xs.iter().map(|&x| p(&[x])).collect()).unwrap()
    }

    #[test]
    fn empty_center_set_means_uniform() {
        let ds = line_dataset(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let dist = d2_distribution(&ds, None, &oracle, &mut rng).unwrap();
        assert_eq!(dist.probs(), &[0.2, 0.2, 0.2, 0.2, 0.2]);
    }

    #[test]
    fn squared_estimates_normalize() {
        let d = D2Distribution::from_squared_estimates(vec![1.0, 3.0], OracleMode::Exact).unwrap();
        assert_eq!(d.probs(), &[0.25, 0.75]);
    }

    #[test]
    fn common_scale_factor_cancels() {
        let base = vec![0.7, 2.3, 5.1, 0.2];
        let scaled: Vec<f64> = base.iter().map(|x| x * 1.1 * 1.1).collect();
        let a = D2Distribution::from_squared_estimates(base, OracleMode::Exact).unwrap();
        let b = D2Distribution::from_squared_estimates(scaled, OracleMode::Exact).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn all_zero_estimates_are_degenerate() {
        let ds = line_dataset(&[0.0, 1.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let centers = CenterSet::new(ds.points().to_vec());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            d2_distribution(&ds, Some(&centers), &oracle, &mut rng),
            Err(Error::DegenerateDistribution)
        ));
    }

    #[test]
    fn coincident_point_never_sampled() {
        let ds = line_dataset(&[0.0, 1.0, 3.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let centers = CenterSet::new(vec![ds.point(0).clone()]);
        let cost = exact_cost(&ds, &centers);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..2000 {
            let (idx, _) = d2_sample_rejection(&ds, &centers, &oracle, cost, &mut rng).unwrap();
            assert_ne!(idx, 0);
        }
    }

    #[test]
    fn conditional_distribution_matches_d2() {
        // Squared distances (1, 3) with cost_estimate 4: conditional
        // distribution (0.25, 0.75) and mean proposals 2*4*2/4 = 4.
        let ds = normalize_dataset(vec![p(&[0.0, 0.0]), p(&[1.0, 0.0])]).unwrap();
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let center = CenterSet::new(vec![p(&[-0.5, 0.75f64.sqrt()])]);
        let cost_estimate = 4.0;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 20_000;
        let mut hits = [0usize; 2];
        let mut proposals = 0u64;
        for _ in 0..n {
            let (idx, props) =
                d2_sample_rejection(&ds, &center, &oracle, cost_estimate, &mut rng).unwrap();
            hits[idx] += 1;
            proposals += props;
        }
        let sigma = (0.75 * 0.25 / n as f64).sqrt();
        let observed = hits[1] as f64 / n as f64;
        assert!((observed - 0.75).abs() < 3.0 * sigma, "observed {observed}");
        let mean_props = proposals as f64 / n as f64;
        assert!(
            (mean_props - 4.0).abs() / 4.0 < 0.05,
            "mean proposals {mean_props}, expected 4"
        );
    }

    #[test]
    fn amplitude_guard_fires_when_cost_estimate_too_small() {
        let ds = line_dataset(&[0.0, 1.0, 5.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let centers = CenterSet::new(vec![ds.point(0).clone()]);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        // max squared estimate is 25; 10 < 25 violates the precondition.
        assert!(matches!(
            d2_sample_rejection(&ds, &centers, &oracle, 10.0, &mut rng),
            Err(Error::InvalidAmplitude { .. })
        ));
    }

    #[test]
    fn starvation_is_reported() {
        let ds = line_dataset(&[0.0, 1.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let centers = CenterSet::new(vec![ds.point(0).clone()]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Acceptance probability 1/(2e9) per proposal; 100 proposals starve.
        assert!(matches!(
            d2_sample_rejection_with_limit(&ds, &centers, &oracle, 1e9, 100, &mut rng),
            Err(Error::SamplerStarvation { proposals: 100 })
        ));
    }

    #[test]
    fn seed_produces_two_k_centers() {
        let ds = line_dataset(&[0.0, 1.0, 2.0, 3.0, 10.0, 11.0, 12.0, 13.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        for k in 1..=3 {
            let mut rng = ChaCha8Rng::seed_from_u64(6 + k as u64);
            let centers = pseudo_approx_seed(&ds, k, &oracle, &mut rng).unwrap();
            assert_eq!(centers.len(), 2 * k);
        }
    }

    #[test]
    fn seed_handles_fully_covered_dataset() {
        // 2k exceeds the number of distinct points; once every point is
        // a center the remaining rounds fall back to uniform.
        let ds = line_dataset(&[0.0, 1.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let centers = pseudo_approx_seed(&ds, 3, &oracle, &mut rng).unwrap();
        assert_eq!(centers.len(), 6);
    }

    #[test]
    fn first_pick_is_uniform_over_the_dataset() {
        let ds = line_dataset(&[0.0, 1.0, 2.0, 3.0]);
        let oracle = DistanceOracle::for_dataset(OracleConfig::exact(), &ds).unwrap();
        let mut counts = [0usize; 4];
        for seed in 0..4000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let centers = pseudo_approx_seed(&ds, 1, &oracle, &mut rng).unwrap();
            let first = centers.get(0);
            let idx = ds
                .points()
                .iter()
                .position(|q| q == first)
                .expect("seed centers are data points");
            counts[idx] += 1;
        }
        let sigma = (4000.0f64 * 0.25 * 0.75).sqrt();
        for &c in &counts {
            assert!((c as f64 - 1000.0).abs() < 4.0 * sigma, "counts {counts:?}");
        }
    }
}
