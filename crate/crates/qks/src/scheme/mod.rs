//! Candidate-list generation and the end-to-end pipeline.
//!
//! The pipeline is: (1) seed 2k centers by adaptive D²-sampling, (2) for
//! each repetition draw a multiset `M` of `rho * k` points D²-sampled
//! against the seed centers plus `tau * k` copies of each seed center,
//! then append the centroid tuple of every ordered k-tuple of disjoint
//! tau-subsets of `M` to the candidate list, (3) pick the least-cost
//! candidate by sampled cost estimation. With the working error split
//! `eps' = eps / 4`, the three stage factors compound to at most
//! `(1 + eps)` for `eps <= 1/2`.

mod brute_force;
mod enumerate;

pub use brute_force::{
    brute_force_opt, brute_force_opt_with_limits, BruteForceLimits, BruteForceResult,
};
pub use enumerate::{disjoint_tuple_count, DisjointTuples};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::{select_min_cost, CandidateAudit};
use crate::geometry::{exact_cost, CenterSet, Dataset, Point};
use crate::oracle::{DistanceOracle, OracleConfig, OracleMode};
use crate::rng::{derive_rng, stage};
use crate::sampler::{d2_sample_with_retry, pseudo_approx_seed, refresh_cost_estimate};

/// Parameter presets. `Guarantee` carries the analysis constants and is
/// exponentially large in `k / eps`; `Desk` shrinks every constant to
/// keep desk-scale instances tractable and carries no formal guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Desk,
    Guarantee,
}

/// Resolved scheme parameters. Fields are public so tests and the CLI
/// can override individual constants.
#[derive(Debug, Clone, Serialize)]
pub struct SchemeParams {
    pub k: usize,
    /// Target error; the final cost should be within `(1 + eps)` of
    /// optimal.
    pub eps: f64,
    /// Working error split used by candidate generation.
    pub eps_prime: f64,
    /// Accuracy target for the selection stage.
    pub selection_eps: f64,
    /// D² sample multiplier: `rho * k` points are drawn per repetition.
    pub rho: usize,
    /// Subset size for the enumeration.
    pub tau: usize,
    /// Outer repetitions (success amplification).
    pub repetitions: usize,
    /// Abort if the candidate list would exceed this many entries.
    pub candidate_cap: u64,
    pub preset: Preset,
}

pub const DEFAULT_CANDIDATE_CAP: u64 = 10_000_000;

impl SchemeParams {
    /// Analysis constants: `tau = ceil(2 / eps')`, `rho = ceil(k /
    /// eps'^4)`, `repetitions = min(2^k, 32)`, selection at `eps'`.
    pub fn guarantee(k: usize, eps: f64) -> Result<Self> {
        Self::validate_inputs(k, eps)?;
        let eps_prime = eps / 4.0;
        Ok(Self {
            k,
            eps,
            eps_prime,
            selection_eps: eps_prime,
            rho: (k as f64 / eps_prime.powi(4)).ceil() as usize,
            tau: (2.0 / eps_prime).ceil() as usize,
            repetitions: (1usize << k.min(20)).min(32),
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            preset: Preset::Guarantee,
        })
    }

    /// Desk constants: `tau = 1`, `rho = 2k`, `repetitions = min(2^k,
    /// 2)`, selection at the full `eps`. Tractable for N around 20 but
    /// without the formal guarantee.
    pub fn desk(k: usize, eps: f64) -> Result<Self> {
        Self::validate_inputs(k, eps)?;
        Ok(Self {
            k,
            eps,
            eps_prime: eps / 4.0,
            selection_eps: eps,
            rho: 2 * k,
            tau: 1,
            repetitions: (1usize << k.min(20)).min(2),
            candidate_cap: DEFAULT_CANDIDATE_CAP,
            preset: Preset::Desk,
        })
    }

    pub fn new(k: usize, eps: f64, preset: Preset) -> Result<Self> {
        match preset {
            Preset::Desk => Self::desk(k, eps),
            Preset::Guarantee => Self::guarantee(k, eps),
        }
    }

    fn validate_inputs(k: usize, eps: f64) -> Result<()> {
        if k < 1 {
            return Err(Error::InvalidParams("k must be at least 1".into()));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(Error::InvalidParams(format!(
                "eps must be in (0, 1/2], got {eps}"
            )));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        Self::validate_inputs(self.k, self.eps)?;
        if self.rho < 1 || self.tau < 1 || self.repetitions < 1 {
            return Err(Error::InvalidParams(
                "rho, tau and repetitions must be positive".into(),
            ));
        }
        if !(self.selection_eps > 0.0 && self.selection_eps <= 1.0) {
            return Err(Error::InvalidParams(
                "selection_eps must be in (0, 1]".into(),
            ));
        }
        Ok(())
    }

    /// Sampling against a delta-close channel needs more points; the
    /// multiplier `ceil(1 / (1 - delta))` compensates.
    pub fn effective_rho(&self, oracle_cfg: &OracleConfig) -> usize {
        if oracle_cfg.mode == OracleMode::DeterministicDelta && oracle_cfg.eps_rel > 0.0 {
            self.rho * ((1.0 / (1.0 - oracle_cfg.eps_rel)).ceil() as usize).max(1)
        } else {
            self.rho
        }
    }
}

/// Where a candidate came from: which repetition, and which instance
/// indices of that repetition's multiset formed its subsets (k groups of
/// tau, flattened).
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub repetition: u32,
    pub members: Vec<u32>,
}

/// The list of k-center candidates, stored flat.
#[derive(Debug, Clone)]
pub struct CandidateList {
    k: usize,
    dim: usize,
    centers: Vec<f64>,
    provenance: Vec<Provenance>,
}

impl CandidateList {
    pub fn new(k: usize, dim: usize) -> Self {
        assert!(k >= 1 && dim >= 1);
        Self {
            k,
            dim,
            centers: Vec::new(),
            provenance: Vec::new(),
        }
    }

    /// Wraps explicit center sets (used to drive selection directly).
    pub fn from_center_sets(sets: &[CenterSet]) -> Self {
        assert!(!sets.is_empty(), "candidate list must be nonempty");
        let k = sets[0].len();
        let dim = sets[0].dim();
        let mut list = Self::new(k, dim);
        for (i, s) in sets.iter().enumerate() {
            assert_eq!(s.len(), k, "candidate {i} has wrong center count");
            let flat: Vec<f64> = s
                .centers()
                .iter()
                .flat_map(|p| p.coords().iter().copied())
                .collect();
            list.centers.extend_from_slice(&flat);
            list.provenance.push(Provenance {
                repetition: 0,
                members: Vec::new(),
            });
        }
        list
    }

    pub fn len(&self) -> usize {
        self.provenance.len()
    }

    pub fn is_empty(&self) -> bool {
        self.provenance.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn centers_flat(&self, i: usize) -> &[f64] {
        let stride = self.k * self.dim;
        &self.centers[i * stride..(i + 1) * stride]
    }

    pub fn center_set(&self, i: usize) -> CenterSet {
        let centers = self
            .centers_flat(i)
            .chunks(self.dim)
            .map(|c| Point::new(c.to_vec()))
            .collect();
        CenterSet::new(centers)
    }

    pub fn provenance(&self, i: usize) -> &Provenance {
        &self.provenance[i]
    }

    /// Distinct center sets by exact coordinate equality. Identical
    /// candidates from different tuples are deduplicated here for
    /// reporting only; the list itself always keeps every enumerated
    /// entry.
    pub fn distinct_count(&self) -> usize {
        let stride = self.k * self.dim;
        let mut seen = std::collections::HashSet::with_capacity(self.len());
        for i in 0..self.len() {
            let bits: Vec<u64> = self.centers[i * stride..(i + 1) * stride]
                .iter()
                .map(|c| c.to_bits())
                .collect();
            seen.insert(bits);
        }
        seen.len()
    }

    fn push_tuple(&mut self, multiset: &[Point], tuple: &[Vec<usize>], repetition: u32) {
        let mut members = Vec::with_capacity(self.k * tuple[0].len());
        for subset in tuple {
            let inv = 1.0 / subset.len() as f64;
            let mut acc = vec![0.0f64; self.dim];
            for &idx in subset {
                members.push(idx as u32);
                for (a, c) in acc.iter_mut().zip(multiset[idx].coords()) {
                    *a += c;
                }
            }
            self.centers.extend(acc.into_iter().map(|a| a * inv));
        }
        self.provenance.push(Provenance {
            repetition,
            members,
        });
    }
}

/// Predicted list size for the given parameters against `centers`:
/// `repetitions * prod_{i<k} C(|M| - i*tau, tau)` with
/// `|M| = rho_eff * k + tau * k * |centers|`.
pub fn predicted_list_size(
    params: &SchemeParams,
    oracle_cfg: &OracleConfig,
    seed_centers: usize,
) -> u128 {
    let m = params.effective_rho(oracle_cfg) * params.k + params.tau * params.k * seed_centers;
    disjoint_tuple_count(m, params.k, params.tau)
        .saturating_mul(params.repetitions as u128)
}

/// Runs the repeat loop: per repetition, D²-sample `rho_eff * k` points
/// against `seed_centers`, add `tau * k` copies of each seed center, and
/// append the centroid tuple of every ordered k-tuple of disjoint
/// tau-subsets.
pub fn build_candidate_list(
    dataset: &Dataset,
    params: &SchemeParams,
    seed_centers: &CenterSet,
    oracle: &DistanceOracle,
    seed: u64,
) -> Result<CandidateList> {
    params.validate()?;
    assert!(!seed_centers.is_empty(), "seed center set must be nonempty");

    let rho_eff = params.effective_rho(oracle.config());
    let multiset_len = rho_eff * params.k + params.tau * params.k * seed_centers.len();
    let predicted = predicted_list_size(params, oracle.config(), seed_centers.len());
    if predicted > params.candidate_cap as u128 {
        return Err(Error::CandidateCapExceeded {
            predicted,
            cap: params.candidate_cap,
            multiset_len,
            k: params.k,
            tau: params.tau,
            repetitions: params.repetitions,
        });
    }

    let mut list = CandidateList::new(params.k, dataset.dim());
    for rep in 0..params.repetitions {
        let mut rng = derive_rng(seed, stage::CANDIDATES, rep as u64);

        let mut multiset: Vec<Point> = Vec::with_capacity(multiset_len);
        let cost = refresh_cost_estimate(dataset, seed_centers, oracle, &mut rng);
        for _ in 0..rho_eff * params.k {
            let (idx, _) = d2_sample_with_retry(dataset, seed_centers, oracle, cost, &mut rng)?;
            multiset.push(dataset.point(idx).clone());
        }
        for center in seed_centers.centers() {
            for _ in 0..params.tau * params.k {
                multiset.push(center.clone());
            }
        }
        debug_assert_eq!(multiset.len(), multiset_len);

        for tuple in DisjointTuples::new(multiset.len(), params.k, params.tau) {
            list.push_tuple(&multiset, &tuple, rep as u32);
        }
    }
    Ok(list)
}

/// Per-stage wall time and channel query count.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StageStats {
    pub secs: f64,
    pub queries: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StageBreakdown {
    pub seeding: StageStats,
    pub candidates: StageStats,
    pub selection: StageStats,
}

#[derive(Debug, Clone, Serialize)]
pub struct DatasetSummary {
    pub digest: String,
    pub n: usize,
    pub dim: usize,
    pub eta: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelectedSummary {
    pub index: usize,
    pub alpha: f64,
    pub repetition: u32,
    pub members: Vec<u32>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BruteForceSummary {
    pub opt_cost: f64,
    pub ratio: f64,
    pub within_target: bool,
}

/// Machine-readable record of one run. Identical configs and seeds
/// reproduce every field except the timings.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub dataset: DatasetSummary,
    pub params: SchemeParams,
    pub oracle: OracleConfig,
    pub run_seed: u64,
    pub rho_effective: usize,
    pub list_size: usize,
    pub distinct_candidates: usize,
    pub m_per_candidate: usize,
    pub seed_cost: f64,
    pub selected: SelectedSummary,
    pub final_cost: f64,
    pub stages: StageBreakdown,
    pub total_queries: u64,
    pub per_candidate: Vec<CandidateAudit>,
    pub audit_truncated: bool,
    pub brute_force: Option<BruteForceSummary>,
}

/// Audit entries beyond this count are dropped from reports.
const AUDIT_LIMIT: usize = 10_000;

#[derive(Debug)]
pub struct SolveOutcome {
    pub centers: CenterSet,
    pub report: RunReport,
}

/// Full pipeline: seed, enumerate candidates at the working error split,
/// select the least estimated cost. Fails with the stage name attached.
pub fn solve(
    dataset: &Dataset,
    params: &SchemeParams,
    oracle_cfg: OracleConfig,
    seed: u64,
) -> Result<SolveOutcome> {
    params.validate()?;
    let oracle = DistanceOracle::for_dataset(oracle_cfg, dataset)?;

    let t0 = Instant::now();
    let mut seeding_rng = derive_rng(seed, stage::SEEDING, 0);
    let seed_centers = pseudo_approx_seed(dataset, params.k, &oracle, &mut seeding_rng)
        .map_err(|e| e.in_stage("seeding"))?;
    let q_seed = oracle.queries();
    let t_seed = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let candidates = build_candidate_list(dataset, params, &seed_centers, &oracle, seed)
        .map_err(|e| e.in_stage("candidates"))?;
    let q_cand = oracle.queries();
    let t_cand = t1.elapsed().as_secs_f64();

    let t2 = Instant::now();
    let selection = select_min_cost(
        dataset,
        &candidates,
        params.selection_eps,
        &oracle,
        seed,
    )
    .map_err(|e| e.in_stage("selection"))?;
    let q_sel = oracle.queries();
    let t_sel = t2.elapsed().as_secs_f64();

    let winner = candidates.center_set(selection.index);
    let final_cost = exact_cost(dataset, &winner);
    let prov = candidates.provenance(selection.index);

    let audit_truncated = selection.audits.len() > AUDIT_LIMIT;
    let mut per_candidate = selection.audits;
    per_candidate.truncate(AUDIT_LIMIT);

    let report = RunReport {
        dataset: DatasetSummary {
            digest: dataset.digest(),
            n: dataset.len(),
            dim: dataset.dim(),
            eta: dataset.eta(),
            scale: dataset.scale(),
        },
        params: params.clone(),
        oracle: oracle_cfg,
        run_seed: seed,
        rho_effective: params.effective_rho(&oracle_cfg),
        list_size: candidates.len(),
        distinct_candidates: candidates.distinct_count(),
        m_per_candidate: selection.estimate.m,
        seed_cost: exact_cost(dataset, &seed_centers),
        selected: SelectedSummary {
            index: selection.index,
            alpha: selection.estimate.alpha,
            repetition: prov.repetition,
            members: prov.members.clone(),
        },
        final_cost,
        stages: StageBreakdown {
            seeding: StageStats {
                secs: t_seed,
                queries: q_seed,
            },
            candidates: StageStats {
                secs: t_cand,
                queries: q_cand - q_seed,
            },
            selection: StageStats {
                secs: t_sel,
                queries: q_sel - q_cand,
            },
        },
        total_queries: q_sel,
        per_candidate,
        audit_truncated,
        brute_force: None,
    };

    Ok(SolveOutcome {
        centers: winner,
        report,
    })
}
