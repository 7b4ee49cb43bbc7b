//! Distance-estimation channels.
//!
//! The quantum distance-estimation subroutine is emulated as a classical
//! error channel over exact Euclidean geometry. Three modes:
//!
//! - `exact`: the true distance, never fails.
//! - `deterministic-delta`: a fixed function of the queried pair. Each
//!   pair gets a multiplier in `[1 - delta, 1 + delta]` derived from a
//!   seeded hash of the two points' coordinates, so repeated queries
//!   return identical values and the channel is delta-close to the
//!   Euclidean distance as a function.
//! - `stochastic`: with probability `2 * delta_fail` the estimate fails
//!   and returns garbage drawn uniformly from `[1, (1 + eps_rel) * eta]`;
//!   otherwise the true distance times a fresh uniform multiplier in
//!   `[1 - eps_rel, 1 + eps_rel]`.
//!
//! Failure events are independent per estimate, so a minimum over `t`
//! centers succeeds with probability `(1 - 2*delta_fail)^t`. The channel
//! counts every estimate request; run reports expose the counts so cost
//! claims can be checked as query counts rather than wall-clock time.

use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{squared_distance, CenterSet, Dataset, Point};
use crate::rng::splitmix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleMode {
    Exact,
    DeterministicDelta,
    Stochastic,
}

/// Parameters of the distance channel.
///
/// `eps_rel` is the relative error band; for `deterministic-delta` it
/// holds the closeness parameter delta. `delta_fail` is the per-estimate
/// failure probability parameter (failures fire with probability
/// `2 * delta_fail`); it is zero outside stochastic mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub mode: OracleMode,
    pub eps_rel: f64,
    pub delta_fail: f64,
    pub oracle_seed: u64,
}

impl OracleConfig {
    pub fn exact() -> Self {
        Self {
            mode: OracleMode::Exact,
            eps_rel: 0.0,
            delta_fail: 0.0,
            oracle_seed: 0,
        }
    }

    /// Fixed delta-close channel: every pair's multiplier is a function
    /// of `(seed, pair)`.
    pub fn deterministic_delta(seed: u64, delta: f64) -> Self {
        Self {
            mode: OracleMode::DeterministicDelta,
            eps_rel: delta,
            delta_fail: 0.0,
            oracle_seed: seed,
        }
    }

    /// Stochastic channel with relative error `eps_rel` and failure
    /// parameter `delta_fail`.
    pub fn stochastic(eps_rel: f64, delta_fail: f64) -> Self {
        Self {
            mode: OracleMode::Stochastic,
            eps_rel,
            delta_fail,
            oracle_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.eps_rel) {
            return Err(Error::InvalidOracleConfig(format!(
                "eps_rel must be in [0, 1), got {}",
                self.eps_rel
            )));
        }
        if !(0.0..0.5).contains(&self.delta_fail) {
            return Err(Error::InvalidOracleConfig(format!(
                "delta_fail must be in [0, 1/2), got {}",
                self.delta_fail
            )));
        }
        match self.mode {
            OracleMode::Exact if self.eps_rel != 0.0 || self.delta_fail != 0.0 => {
                Err(Error::InvalidOracleConfig(
                    "exact mode forces eps_rel = 0 and delta_fail = 0".into(),
                ))
            }
            OracleMode::DeterministicDelta if self.delta_fail != 0.0 => {
                Err(Error::InvalidOracleConfig(
                    "deterministic-delta mode forces delta_fail = 0".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// One answer from the channel. When `failed` is set the value is
/// garbage inside `[1, (1 + eps_rel) * eta]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceEstimate {
    pub value: f64,
    pub failed: bool,
}

/// A distance channel bound to a dataset scale (`eta` bounds the garbage
/// range). Immutable after construction; the query counter is atomic so
/// concurrent callers with independent streams may share it.
#[derive(Debug)]
pub struct DistanceOracle {
    config: OracleConfig,
    eta: f64,
    queries: AtomicU64,
}

impl DistanceOracle {
    pub fn new(config: OracleConfig, eta: f64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            eta,
            queries: AtomicU64::new(0),
        })
    }

    /// Channel bound to a dataset's aspect ratio.
    pub fn for_dataset(config: OracleConfig, dataset: &Dataset) -> Result<Self> {
        Self::new(config, dataset.eta())
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Estimated aspect ratio `(1 + eps_rel) * eta`, the worst-case
    /// stretch the channel can apply to the largest distance.
    pub fn eta_tilde(&self) -> f64 {
        (1.0 + self.config.eps_rel) * self.eta
    }

    /// Total estimate requests so far (cache-equivalent fast paths count
    /// their logical requests here too).
    pub fn queries(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    pub(crate) fn record_queries(&self, n: u64) {
        self.queries.fetch_add(n, Ordering::Relaxed);
    }

    /// Squared estimate for one pair. All public entry points derive
    /// their values from this so the two are bit-consistent.
    fn estimate_sq_inner<R: Rng + ?Sized>(&self, p: &Point, q: &Point, rng: &mut R) -> (f64, bool) {
        let d2 = squared_distance(p, q);
        match self.config.mode {
            OracleMode::Exact => (d2, false),
            OracleMode::DeterministicDelta => {
                let m = self.pair_multiplier(p, q);
                (m * m * d2, false)
            }
            OracleMode::Stochastic => {
                let eps = self.config.eps_rel;
                let failed = rng.gen::<f64>() < 2.0 * self.config.delta_fail;
                if failed {
                    let hi = (1.0 + eps) * self.eta;
                    let g = if hi > 1.0 { rng.gen_range(1.0..hi) } else { 1.0 };
                    (g * g, true)
                } else {
                    let m = 1.0 - eps + 2.0 * eps * rng.gen::<f64>();
                    (m * m * d2, false)
                }
            }
        }
    }

    /// Fixed multiplier in `[1 - delta, 1 + delta]` for a pair, symmetric
    /// in its arguments and stable across runs with the same seed.
    pub fn pair_multiplier(&self, p: &Point, q: &Point) -> f64 {
        let hp = hash_coords(p);
        let hq = hash_coords(q);
        let (lo, hi) = if hp <= hq { (hp, hq) } else { (hq, hp) };
        let mixed = splitmix64(self.config.oracle_seed ^ splitmix64(lo).wrapping_add(hi));
        let u = (mixed >> 11) as f64 / (1u64 << 53) as f64; // [0, 1)
        let delta = self.config.eps_rel;
        1.0 - delta + 2.0 * delta * u
    }

    /// One estimate of `D(p, q)` through the channel.
    pub fn estimate_distance<R: Rng + ?Sized>(
        &self,
        p: &Point,
        q: &Point,
        rng: &mut R,
    ) -> DistanceEstimate {
        self.record_queries(1);
        let (sq, failed) = self.estimate_sq_inner(p, q, rng);
        DistanceEstimate {
            value: sq.sqrt(),
            failed,
        }
    }

    /// Squared minimum estimated distance from `p` to the centers, plus
    /// the combined failure flag. One channel query per center.
    pub fn estimate_min_sq<R: Rng + ?Sized>(
        &self,
        p: &Point,
        centers: &CenterSet,
        rng: &mut R,
    ) -> (f64, bool) {
        assert!(!centers.is_empty(), "center set must be nonempty");
        self.record_queries(centers.len() as u64);
        let mut min_sq = f64::INFINITY;
        let mut failed = false;
        for c in centers.centers() {
            let (sq, f) = self.estimate_sq_inner(p, c, rng);
            failed |= f;
            if sq < min_sq {
                min_sq = sq;
            }
        }
        (min_sq, failed)
    }

    /// Estimated distance from `p` to its nearest center: the minimum of
    /// the per-center estimates. The failure flag is set when any
    /// per-center estimate failed, so it stays clear with probability
    /// `(1 - 2*delta_fail)^t`.
    pub fn estimate_min_distance<R: Rng + ?Sized>(
        &self,
        p: &Point,
        centers: &CenterSet,
        rng: &mut R,
    ) -> DistanceEstimate {
        let (sq, failed) = self.estimate_min_sq(p, centers, rng);
        DistanceEstimate {
            value: sq.sqrt(),
            failed,
        }
    }

    /// Squared min-distance estimates for every dataset point, plus the
    /// all-points success flag.
    pub fn min_sq_profile<R: Rng + ?Sized>(
        &self,
        dataset: &Dataset,
        centers: &CenterSet,
        rng: &mut R,
    ) -> (Vec<f64>, bool) {
        let mut all_ok = true;
        let profile = dataset
            .points()
            .iter()
            .map(|p| {
                let (sq, failed) = self.estimate_min_sq(p, centers, rng);
                all_ok &= !failed;
                sq
            })
            .collect();
        (profile, all_ok)
    }

    /// Per-point min-distance estimates over the whole dataset.
    pub fn min_distance_profile<R: Rng + ?Sized>(
        &self,
        dataset: &Dataset,
        centers: &CenterSet,
        rng: &mut R,
    ) -> MinDistanceProfile {
        let mut estimates = Vec::with_capacity(dataset.len());
        let mut all_ok = true;
        for p in dataset.points() {
            let est = self.estimate_min_distance(p, centers, rng);
            all_ok &= !est.failed;
            estimates.push(est);
        }
        MinDistanceProfile { estimates, all_ok }
    }
}

/// Result of estimating every point's distance to its nearest center.
/// `all_ok` models the all-points success event with probability
/// `(1 - 2*delta_fail)^(N*t)`.
#[derive(Debug, Clone)]
pub struct MinDistanceProfile {
    pub estimates: Vec<DistanceEstimate>,
    pub all_ok: bool,
}

fn hash_coords(p: &Point) -> u64 {
    // FNV-1a over the coordinate bit patterns; stable across platforms.
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for c in p.coords() {
        for b in c.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
