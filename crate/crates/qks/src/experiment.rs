//! Run configuration and the experiment driver behind the CLI.
//!
//! A run is fully determined by its [`RunConfig`]: dataset path, scheme
//! and oracle parameters, and seeds. Reports are written atomically
//! (temp file, then rename) so partial output never lands at the target
//! path.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{load_csv, Dataset};
use crate::oracle::OracleConfig;
use crate::scheme::{
    brute_force_opt_with_limits, solve, BruteForceLimits, BruteForceSummary, Preset, RunReport,
    SchemeParams,
};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub data: PathBuf,
    pub k: usize,
    pub eps: f64,
    pub oracle: OracleConfig,
    pub preset: Preset,
    /// Optional overrides of the preset constants.
    pub rho: Option<usize>,
    pub tau: Option<usize>,
    pub repetitions: Option<usize>,
    pub candidate_cap: Option<u64>,
    pub seed: u64,
    pub brute_force: bool,
    pub brute_max_n: Option<usize>,
    pub brute_max_k: Option<usize>,
}

impl RunConfig {
    pub fn params(&self) -> Result<SchemeParams> {
        let mut params = SchemeParams::new(self.k, self.eps, self.preset)?;
        if let Some(rho) = self.rho {
            params.rho = rho;
        }
        if let Some(tau) = self.tau {
            params.tau = tau;
        }
        if let Some(reps) = self.repetitions {
            params.repetitions = reps;
        }
        if let Some(cap) = self.candidate_cap {
            params.candidate_cap = cap;
        }
        params.validate()?;
        Ok(params)
    }

    fn brute_limits(&self) -> BruteForceLimits {
        let defaults = BruteForceLimits::default();
        BruteForceLimits {
            max_n: self.brute_max_n.unwrap_or(defaults.max_n),
            max_k: self.brute_max_k.unwrap_or(defaults.max_k),
        }
    }
}

/// Loads the dataset, runs the pipeline, and (optionally) attaches the
/// brute-force optimum and achieved ratio.
pub fn run_experiment(config: &RunConfig) -> Result<RunReport> {
    let dataset = load_csv(&config.data)?;
    run_experiment_on(config, &dataset)
}

/// Same as [`run_experiment`] but with the dataset already loaded, for
/// sweeps that reuse it.
pub fn run_experiment_on(config: &RunConfig, dataset: &Dataset) -> Result<RunReport> {
    let params = config.params()?;
    let outcome = solve(dataset, &params, config.oracle, config.seed)?;
    let mut report = outcome.report;

    if config.brute_force {
        let opt = brute_force_opt_with_limits(dataset, config.k, config.brute_limits())?;
        let ratio = if opt.cost > 0.0 {
            report.final_cost / opt.cost
        } else if report.final_cost == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        report.brute_force = Some(BruteForceSummary {
            opt_cost: opt.cost,
            ratio,
            within_target: ratio <= 1.0 + config.eps,
        });
    }
    Ok(report)
}

/// Serializes the report to pretty JSON and renames it into place.
pub fn write_report_atomic(path: &Path, report: &RunReport) -> Result<()> {
    let json = serde_json::to_string_pretty(report).expect("report serializes");
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, json.as_bytes())?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
