//! Command-line front end: training, gain sweeps, certification, the
//! finite-MDP oracle suite, and checkpoint inspection.
//!
//! Exit codes: 0 success, 1 assertion/invariant failure, 2 usage/config
//! error. Every run writes its fully resolved configuration next to its
//! outputs; re-running with that echo reproduces all CSVs byte for byte,
//! independent of `--jobs`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cascade_core::bounds::{certify, write_certificate_report};
use cascade_core::checkpoint::{load_policy, read_header, save_policy};
use cascade_core::cmdp::{train, write_training_log_csv};
use cascade_core::config::RunConfig;
use cascade_core::error::Error;
use cascade_core::inner_loop::GainSpec;
use cascade_core::oracle::{finite_mdp_oracle, random_pair};
use cascade_core::transfer::{sweep, write_heatmap_csv, write_sweep_csv, SweepMetric, TransferReport};

#[derive(Parser)]
#[command(
    name = "cascade",
    version,
    about = "Safe transfer of reduced-order policies to cascade systems"
)]
struct Cli {
    /// Number of worker threads for data-parallel stages (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides [io].out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train the constrained policy on the reduced-order model.
    Train {
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Deploy a checkpoint across the inner-loop gain grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArgs,
        /// Trained checkpoint to deploy.
        #[arg(long)]
        checkpoint: PathBuf,
        /// Use the policy mean instead of sampling actions.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        deterministic_policy: bool,
    },
    /// Fit the stability constants and evaluate the transfer safety bound.
    Certify {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        checkpoint: PathBuf,
    },
    /// Run the exhaustive finite-MDP divergence oracle over a seed range.
    Oracle {
        /// First seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of consecutive seeds.
        #[arg(long, default_value_t = 20)]
        count: u64,
        /// Apply the first bound with the wrong sign (harness self-test;
        /// expected to fail).
        #[arg(long, default_value_t = false)]
        mutant: bool,
        /// Optional report destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a checkpoint header and verify its checksum.
    Describe {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    let run = || -> Result<(), Error> {
        match cli.command {
            Command::Train { config } => cmd_train(&config),
            Command::Sweep {
                config,
                checkpoint,
                deterministic_policy,
            } => cmd_sweep(&config, &checkpoint, deterministic_policy),
            Command::Certify { config, checkpoint } => cmd_certify(&config, &checkpoint),
            Command::Oracle {
                seed,
                count,
                mutant,
                out,
            } => cmd_oracle(seed, count, mutant, out.as_deref()),
            Command::Describe { checkpoint } => cmd_describe(&checkpoint),
        }
    };
    let outcome = match jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => Err(Error::Config(format!("cannot build thread pool: {e}"))),
        },
        None => run(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_run_config(args: &ConfigArgs) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.io.out_dir = out.display().to_string();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    let dir = PathBuf::from(&cfg.io.out_dir);
    fs::create_dir_all(&dir)?;
    fs::write(dir.join("resolved_config.toml"), cfg.to_toml())?;
    Ok(dir)
}

fn cmd_train(args: &ConfigArgs) -> Result<(), Error> {
    let cfg = load_run_config(args)?;
    let dir = prepare_out_dir(&cfg)?;
    let train_cfg = cfg.train_config();
    let output = train(
        &train_cfg,
        &cfg.quad_params(),
        &cfg.safe_set(),
        &cfg.action_bounds(),
        &cfg.sweep_sampler(),
    )?;
    let checkpoint = dir.join("checkpoint.bin");
    save_policy(&checkpoint, &output.policy)?;
    let mut csv = Vec::new();
    write_training_log_csv(&output.log, &mut csv)?;
    fs::write(dir.join("training_log.csv"), csv)?;
    if let Some(last) = output.log.last() {
        println!(
            "trained {} iterations: mean_return {:.3}, mean_cost {:.5}, lambda {:.4}",
            output.log.len(),
            last.mean_return,
            last.mean_cost,
            last.lambda
        );
    } else {
        println!("trained 0 iterations: wrote the initial policy");
    }
    println!("checkpoint: {}", checkpoint.display());
    Ok(())
}

fn sweep_meta(report: &TransferReport, deterministic: bool) -> String {
    let mut meta = String::new();
    meta.push_str("[sweep]\n");
    meta.push_str(&format!("episodes_per_pair = {}\n", report.episodes));
    meta.push_str(&format!("seed = {}\n", report.seed));
    meta.push_str(&format!("deterministic_policy = {deterministic}\n"));
    if let Some(id) = report.checkpoint_id {
        meta.push_str(&format!("checkpoint_checksum = \"{id:016x}\"\n"));
    }
    let invalid: usize = report.pairs.iter().map(|p| p.invalid_episodes).sum();
    meta.push_str(&format!("invalid_episodes = {invalid}\n"));
    meta.push_str(&format!("anomaly_count = {}\n", report.anomalies.len()));
    if !report.anomalies.is_empty() {
        meta.push_str("anomalies = [\n");
        for a in &report.anomalies {
            meta.push_str(&format!("  \"{a}\",\n"));
        }
        meta.push_str("]\n");
    }
    meta
}

fn cmd_sweep(args: &ConfigArgs, checkpoint: &Path, deterministic: bool) -> Result<(), Error> {
    let cfg = load_run_config(args)?;
    let header = read_header(checkpoint)?;
    if !header.checksum_ok {
        return Err(Error::Checkpoint("checksum mismatch, refusing to load".into()));
    }
    let policy = load_policy(checkpoint)?;
    let dir = prepare_out_dir(&cfg)?;
    let report = sweep(
        &policy,
        &cfg.gain_grid(),
        &cfg.sweep_sampler(),
        &cfg.quad_params(),
        &cfg.control_params(),
        &cfg.action_bounds(),
        &cfg.safe_set(),
        cfg.goal(),
        cfg.train.horizon,
        deterministic,
        cfg.master_seed,
        Some(header.checksum),
    )?;
    let mut csv = Vec::new();
    write_sweep_csv(&report, &mut csv)?;
    fs::write(dir.join("sweep.csv"), csv)?;
    for metric in SweepMetric::ALL {
        let mut grid = Vec::new();
        write_heatmap_csv(&report, metric, &mut grid)?;
        fs::write(dir.join(format!("heatmap_{}.csv", metric.name())), grid)?;
    }
    fs::write(dir.join("sweep_meta.toml"), sweep_meta(&report, deterministic))?;
    let max_fail = report.pairs.iter().map(|p| p.p_fail).fold(0.0, f64::max);
    println!(
        "swept {} gain pairs x {} episodes; max p_fail {:.3}; outputs in {}",
        report.pairs.len(),
        report.episodes,
        max_fail,
        dir.display()
    );
    Ok(())
}

fn cmd_certify(args: &ConfigArgs, checkpoint: &Path) -> Result<(), Error> {
    let cfg = load_run_config(args)?;
    if !(cfg.certify.noise_sigma > 0.0) {
        return Err(Error::DegenerateKernel);
    }
    let policy = load_policy(checkpoint)?;
    let dir = prepare_out_dir(&cfg)?;
    let quad = cfg.certify_quad_params();
    let gains = GainSpec::new(cfg.certify.omega_n, cfg.certify.zeta, quad.inertia)
        .map_err(|e| Error::Config(e.to_string()))?;
    let outcome = certify(
        &policy,
        &gains,
        &quad,
        &cfg.control_params(),
        &cfg.action_bounds(),
        &cfg.safe_set(),
        &cfg.certify_sampler(),
        cfg.goal(),
        cfg.certify_delta(),
        cfg.train.horizon,
        cfg.certify.alpha_step,
        cfg.certify.p_weight,
        cfg.master_seed,
    )?;
    let mut report = Vec::new();
    write_certificate_report(&outcome, &mut report)?;
    fs::write(dir.join("certificate.toml"), &report)?;
    println!(
        "certificate bound {:.6} ({}), empirical safe probability {:.4} over {} episodes{}",
        outcome.certificate.bound,
        if outcome.certificate.vacuous { "vacuous" } else { "non-vacuous" },
        outcome.empirical_safe_prob,
        outcome.episodes,
        if outcome.flagged {
            " [EMPIRICAL BELOW CERTIFICATE]"
        } else {
            ""
        }
    );
    Ok(())
}

fn cmd_oracle(seed: u64, count: u64, mutant: bool, out: Option<&Path>) -> Result<(), Error> {
    let mut lines = Vec::new();
    let mut failures = 0usize;
    for s in seed..seed + count {
        let pair = random_pair(s, 3, 2, 4);
        let report = finite_mdp_oracle(&pair, mutant)?;
        for check in &report.checks {
            if !check.ok {
                failures += 1;
            }
            lines.push(format!(
                "seed {s} {}: lhs {:.6e} rhs {:.6e} {}",
                check.name,
                check.lhs,
                check.rhs,
                if check.ok { "ok" } else { "VIOLATED" }
            ));
        }
    }
    let text = lines.join("\n") + "\n";
    print!("{text}");
    if let Some(path) = out {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, &text)?;
    }
    if failures > 0 {
        return Err(Error::Numerical(format!("{failures} oracle inequalities violated")));
    }
    println!("all oracle inequalities hold over {count} seeds");
    Ok(())
}

fn cmd_describe(checkpoint: &Path) -> Result<(), Error> {
    let header = read_header(checkpoint)?;
    println!("format version: {}", header.version);
    println!("tensors: {}", header.tensor_dims.len());
    for (i, (r, c)) in header.tensor_dims.iter().enumerate() {
        println!("  tensor {i}: {r} x {c}");
    }
    println!(
        "checksum: {:016x} ({})",
        header.checksum,
        if header.checksum_ok { "ok" } else { "MISMATCH" }
    );
    if !header.checksum_ok {
        return Err(Error::Checkpoint("checksum mismatch".into()));
    }
    Ok(())
}
