//! `qks` — experiment harness for the k-means approximation scheme.
//!
//! Subcommands: `gen` (datasets), `run` (one seeded run with a JSON
//! report), `sweep` (seed/parameter grids to JSON lines), `opt`
//! (brute-force optimum only). Exit codes: 0 success, 2 configuration
//! error, 3 brute force infeasible, 4 sampler starvation, 5 candidate
//! list over the cap, 1 anything else.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qks::error::Error;
use qks::experiment::{run_experiment_on, write_report_atomic, RunConfig};
use qks::generate::{generate_points, GeneratorSpec};
use qks::geometry::{load_csv, normalize_dataset, write_csv};
use qks::oracle::OracleConfig;
use qks::scheme::{brute_force_opt_with_limits, BruteForceLimits, Preset};

#[derive(Parser)]
#[command(name = "qks", version, about = "Noisy-oracle k-means approximation scheme harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV.
    Gen(GenArgs),
    /// Run the full pipeline once and write a JSON report.
    Run(RunArgs),
    /// Run a config across seeds and optional delta/eps grids (JSONL out).
    Sweep(SweepArgs),
    /// Compute the exact optimum by brute force (small instances only).
    Opt(OptArgs),
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    spec: GenSpec,
    /// Generator seed (ignored by the deterministic grid).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(long, global = true, default_value = "dataset.csv")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum GenSpec {
    /// Spherical Gaussian mixture with means spaced along the first axis.
    GaussianMixture {
        #[arg(long, default_value_t = 2)]
        components: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 10.0)]
        separation: f64,
        #[arg(long, default_value_t = 0.1)]
        spread: f64,
    },
    /// Uniform points in the unit box.
    UniformBox {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Rigid lattice clusters (deterministic).
    Grid {
        #[arg(long, default_value_t = 4)]
        side: usize,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        gap: f64,
        #[arg(long, default_value_t = 1)]
        clusters: usize,
        #[arg(long, default_value_t = 0.0)]
        separation: f64,
        #[arg(long)]
        per_cluster: usize,
    },
}

#[derive(Args, Clone)]
struct OracleArgs {
    /// Distance channel: exact, deterministic-delta, or stochastic.
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// Relative error band (stochastic mode).
    #[arg(long, default_value_t = 0.0)]
    eps_rel: f64,
    /// Closeness delta (deterministic-delta) or failure parameter
    /// (stochastic).
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Seed of the deterministic channel's pair function.
    #[arg(long, default_value_t = 0)]
    oracle_seed: u64,
}

impl OracleArgs {
    fn to_config(&self) -> Result<OracleConfig, Error> {
        let cfg = match self.oracle.as_str() {
            "exact" => OracleConfig::exact(),
            "deterministic-delta" => {
                OracleConfig::deterministic_delta(self.oracle_seed, self.delta)
            }
            "stochastic" => OracleConfig::stochastic(self.eps_rel, self.delta),
            other => {
                return Err(Error::InvalidOracleConfig(format!(
                    "unknown oracle mode '{other}' (expected exact, deterministic-delta, or stochastic)"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn with_delta(&self, delta: f64) -> Self {
        let mut copy = self.clone();
        copy.delta = delta;
        copy
    }
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long)]
    k: usize,
    /// Target error; the goal is cost within (1+eps) of optimal.
    #[arg(long)]
    eps: f64,
    /// Parameter preset: desk (tractable, no formal guarantee) or
    /// guarantee (analysis constants; exponential in k/eps).
    #[arg(long, default_value = "desk")]
    preset: String,
    #[arg(long)]
    rho: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    repetitions: Option<usize>,
    #[arg(long)]
    candidate_cap: Option<u64>,
}

impl SchemeArgs {
    fn preset(&self) -> Result<Preset, Error> {
        match self.preset.as_str() {
            "desk" => Ok(Preset::Desk),
            "guarantee" => Ok(Preset::Guarantee),
            other => Err(Error::InvalidParams(format!(
                "unknown preset '{other}' (expected desk or guarantee)"
            ))),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// Dataset CSV (one point per row; '#' comments allowed).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// Run seed (QKS_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also compute the exact optimum and the achieved ratio.
    #[arg(long)]
    brute_force: bool,
    #[arg(long)]
    brute_max_n: Option<usize>,
    #[arg(long)]
    brute_max_k: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    scheme: SchemeArgs,
    #[command(flatten)]
    oracle: OracleArgs,
    /// First run seed (QKS_SEED overrides).
    #[arg(long, default_value_t = 0)]
    seed_start: u64,
    /// Number of consecutive seeds.
    #[arg(long, default_value_t = 20)]
    runs: u64,
    /// Comma-separated delta grid applied to the oracle.
    #[arg(long, value_delimiter = ',')]
    delta_grid: Vec<f64>,
    /// Comma-separated eps grid applied to the scheme.
    #[arg(long, value_delimiter = ',')]
    eps_grid: Vec<f64>,
    /// JSON-lines output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    brute_force: bool,
    #[arg(long)]
    brute_max_n: Option<usize>,
    #[arg(long)]
    brute_max_k: Option<usize>,
}

#[derive(Args)]
struct OptArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    max_n: Option<usize>,
    #[arg(long)]
    max_k: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Run(args) => run(args),
        Command::Sweep(args) => sweep(args),
        Command::Opt(args) => opt(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::InvalidParams(_) | Error::InvalidOracleConfig(_) => 2,
        Error::BruteForceInfeasible { .. } => 3,
        Error::SamplerStarvation { .. } => 4,
        Error::CandidateCapExceeded { .. } => 5,
        _ => 1,
    }
}

fn env_seed() -> Option<u64> {
    std::env::var("QKS_SEED").ok().and_then(|s| s.parse().ok())
}

fn gen(args: GenArgs) -> Result<(), Error> {
    let spec = match args.spec {
        GenSpec::GaussianMixture {
            components,
            n,
            dim,
            separation,
            spread,
        } => GeneratorSpec::GaussianMixture {
            components,
            n,
            dim,
            separation,
            spread,
        },
        GenSpec::UniformBox { n, dim } => GeneratorSpec::UniformBox { n, dim },
        GenSpec::Grid {
            side,
            dim,
            gap,
            clusters,
            separation,
            per_cluster,
        } => GeneratorSpec::Grid {
            side,
            dim,
            gap,
            clusters,
            separation,
            per_cluster,
        },
    };
    let points = generate_points(&spec, args.seed)?;
    write_csv(&args.out, &points)?;
    let ds = normalize_dataset(points)?;
    println!(
        "wrote {} points (dim {}) to {}; eta = {:.6} after normalization",
        ds.len(),
        ds.dim(),
        args.out.display(),
        ds.eta()
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn build_config(
    data: PathBuf,
    scheme: &SchemeArgs,
    oracle: &OracleArgs,
    seed: u64,
    brute_force: bool,
    brute_max_n: Option<usize>,
    brute_max_k: Option<usize>,
) -> Result<RunConfig, Error> {
    Ok(RunConfig {
        data,
        k: scheme.k,
        eps: scheme.eps,
        oracle: oracle.to_config()?,
        preset: scheme.preset()?,
        rho: scheme.rho,
        tau: scheme.tau,
        repetitions: scheme.repetitions,
        candidate_cap: scheme.candidate_cap,
        seed,
        brute_force,
        brute_max_n,
        brute_max_k,
    })
}

fn run(args: RunArgs) -> Result<(), Error> {
    let seed = env_seed().unwrap_or(args.seed);
    let config = build_config(
        args.data,
        &args.scheme,
        &args.oracle,
        seed,
        args.brute_force,
        args.brute_max_n,
        args.brute_max_k,
    )?;
    let dataset = load_csv(&config.data)?;
    let report = run_experiment_on(&config, &dataset)?;

    match &args.out {
        Some(path) => {
            write_report_atomic(path, &report)?;
            let ratio = report
                .brute_force
                .as_ref()
                .map(|b| format!(", ratio {:.4}", b.ratio))
                .unwrap_or_default();
            println!(
                "cost {:.6} over {} candidates{} -> {}",
                report.final_cost,
                report.list_size,
                ratio,
                path.display()
            );
        }
        None => println!(
            "{}",
            serde_json::to_string_pretty(&report).expect("report serializes")
        ),
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Error> {
    let seed_start = env_seed().unwrap_or(args.seed_start);
    let deltas: Vec<Option<f64>> = if args.delta_grid.is_empty() {
        vec![None]
    } else {
        args.delta_grid.iter().copied().map(Some).collect()
    };
    let epss: Vec<f64> = if args.eps_grid.is_empty() {
        vec![args.scheme.eps]
    } else {
        args.eps_grid.clone()
    };

    let dataset = load_csv(&args.data)?;
    let mut lines = String::new();
    let mut records = 0u64;
    for &eps in &epss {
        for delta in &deltas {
            let oracle = match delta {
                Some(d) => args.oracle.with_delta(*d),
                None => args.oracle.clone(),
            };
            for offset in 0..args.runs {
                let seed = seed_start + offset;
                let mut config = build_config(
                    args.data.clone(),
                    &args.scheme,
                    &oracle,
                    seed,
                    args.brute_force,
                    args.brute_max_n,
                    args.brute_max_k,
                )?;
                config.eps = eps;
                let report = run_experiment_on(&config, &dataset)?;
                lines.push_str(&serde_json::to_string(&report).expect("report serializes"));
                lines.push('\n');
                records += 1;
            }
        }
    }
    let tmp = args.out.with_extension("tmp");
    std::fs::write(&tmp, lines.as_bytes())?;
    std::fs::rename(&tmp, &args.out)?;
    println!("wrote {records} records to {}", args.out.display());
    Ok(())
}

fn opt(args: OptArgs) -> Result<(), Error> {
    let dataset = load_csv(&args.data)?;
    let defaults = BruteForceLimits::default();
    let limits = BruteForceLimits {
        max_n: args.max_n.unwrap_or(defaults.max_n),
        max_k: args.max_k.unwrap_or(defaults.max_k),
    };
    let result = brute_force_opt_with_limits(&dataset, args.k, limits)?;
    let centers: Vec<Vec<f64>> = result
        .centers
        .centers()
        .iter()
        .map(|c| c.coords().to_vec())
        .collect();
    let out = serde_json::json!({
        "cost": result.cost,
        "centers": centers,
        "assignment": result.assignment,
        "n": dataset.len(),
        "k": args.k,
        "eta": dataset.eta(),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&out).expect("json serializes")
    );
    Ok(())
}
