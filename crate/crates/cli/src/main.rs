use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use beamlevel::sim::output::{
    write_arms_csv, write_block_trace_csv, write_file, write_manifest, write_miss_csv, write_oracle_csv,
    write_rate_cdf_csv, write_rate_vs_snr_csv, write_regret_csv, write_sweep_arms_csv,
};
use beamlevel::sim::sweep::trace_blocks;
use beamlevel::sim::{learning_run, oracle_arm_means, run_learning, run_sweep, ScenarioConfig};
use beamlevel::{build_codebook, ArrayConfig};
use clap::{Args, Parser, Subcommand};

/// Multi-hop beam-training simulator.
#[derive(Parser, Debug)]
#[command(name = "beamlevel", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Brute-force expected reward of every arm.
    Oracle(Common),
    /// Epsilon-decay learning runs and their average regret curve.
    Learn(Common),
    /// Mean rate, reward CDF and miss-detection probability per policy and SNR.
    Sweep(SweepArgs),
    /// Export a codebook as CSV.
    Codebook(CodebookArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Scenario TOML file; defaults apply to anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Start from the calibrated link budget instead of the plain defaults.
    #[arg(long, conflicts_with = "config")]
    calibrated: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Independent learning runs.
    #[arg(long)]
    runs: Option<usize>,
    /// Learning trials per run.
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated transmit SNRs in dB.
    #[arg(long, value_delimiter = ',')]
    snr_list: Option<Vec<f64>>,
    /// Channel draws per arm for the oracle.
    #[arg(long)]
    oracle_samples: Option<usize>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Evaluation blocks per SNR and policy.
    #[arg(long)]
    blocks: Option<usize>,
    /// Independent dynamic learners per SNR point.
    #[arg(long)]
    learners: Option<usize>,
    /// Write per-candidate measurements of this many full-training blocks
    /// at the first SNR to trace.csv.
    #[arg(long, default_value_t = 0)]
    trace_blocks: usize,
}

#[derive(Args, Debug)]
struct CodebookArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// UE whose codebook is exported (0-based).
    #[arg(long, default_value_t = 0)]
    ue: usize,
    #[arg(long)]
    antennas: Option<usize>,
    #[arg(long)]
    branching: Option<usize>,
    #[arg(long)]
    phase_shift: Option<f64>,
}

impl Common {
    fn resolve(&self) -> Result<(ScenarioConfig, Vec<f64>)> {
        let mut cfg = match &self.config {
            Some(path) => {
                ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?
            }
            None if self.calibrated => ScenarioConfig::calibrated(),
            None => ScenarioConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(runs) = self.runs {
            cfg.learning.runs = runs;
        }
        if let Some(trials) = self.trials {
            cfg.learning.trials = trials;
        }
        if let Some(n) = self.oracle_samples {
            cfg.learning.oracle_samples = n;
        }
        if let Some(snrs) = &self.snr_list {
            cfg.budget.transmit_snr_db = snrs.clone();
        }
        cfg.validate()?;
        if cfg.budget.transmit_snr_db.is_empty() {
            bail!("no transmit SNR points");
        }
        let snrs = cfg.budget.transmit_snr_db.clone();
        Ok((cfg, snrs))
    }
}

fn arm_names(cfg: &ScenarioConfig, snr: f64) -> Result<Vec<String>> {
    Ok(cfg.scenario(snr)?.arms.iter().map(ToString::to_string).collect())
}

fn oracle(args: &Common) -> Result<()> {
    let (cfg, snrs) = args.resolve()?;
    let mut points = Vec::new();
    for &snr in &snrs {
        let scn = cfg.scenario(snr)?;
        let o = oracle_arm_means(&scn, cfg.learning.oracle_samples, cfg.seed)?;
        println!(
            "{snr} dB: best arm {} mean {:.4}",
            scn.arms[o.best],
            o.best_mean()
        );
        points.push((snr, o));
    }
    let dir = &args.out_dir;
    let arms = arm_names(&cfg, snrs[0])?;
    write_file(dir, "oracle.csv", |w| write_oracle_csv(&arms, &points, w))?;
    write_manifest(dir, "oracle", &cfg, &snrs)?;
    Ok(())
}

fn snapshot_name(snr: f64) -> String {
    format!("bandit_snapshot_{snr}dB.csv")
}

fn learn(args: &Common) -> Result<()> {
    let (cfg, snrs) = args.resolve()?;
    if cfg.learning.runs == 0 || cfg.learning.trials == 0 {
        bail!("runs and trials must be positive");
    }
    let dir = &args.out_dir;
    let mut reports = Vec::new();
    let mut oracles = Vec::new();
    for &snr in &snrs {
        let scn = cfg.scenario(snr)?;
        let o = oracle_arm_means(&scn, cfg.learning.oracle_samples, cfg.seed)?;
        let rep = run_learning(
            &scn,
            &o,
            cfg.learning.trials,
            cfg.learning.runs,
            cfg.learning.epsilon0,
            cfg.seed,
        )?;
        let t = cfg.learning.trials;
        println!(
            "{snr} dB: avg regret {:.3e} at t={t}, output arm correct in {:.1}% of runs",
            rep.avg_regret[t - 1],
            100.0 * rep.output_accuracy()
        );
        let first = learning_run(&scn, t, cfg.learning.epsilon0, cfg.seed, 0)?;
        write_file(dir, &snapshot_name(snr), |w| {
            first.state.write_snapshot_csv(&scn.arms, w)
        })?;
        oracles.push((snr, o));
        reports.push(rep);
    }
    let arms = arm_names(&cfg, snrs[0])?;
    write_file(dir, "regret.csv", |w| write_regret_csv(&reports, w))?;
    write_file(dir, "arms.csv", |w| write_arms_csv(&arms, &reports, w))?;
    write_file(dir, "oracle.csv", |w| write_oracle_csv(&arms, &oracles, w))?;
    write_manifest(dir, "learn", &cfg, &snrs)?;
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let (mut cfg, snrs) = args.common.resolve()?;
    if let Some(b) = args.blocks {
        cfg.sweep.blocks = b;
    }
    if let Some(l) = args.learners {
        cfg.sweep.learners = l;
    }
    cfg.validate()?;
    let rep = run_sweep(&cfg, &snrs)?;
    for p in &rep.points {
        println!(
            "{:>5} dB {:<8} rate {:.4} +- {:.4}  p_miss {:.4}",
            p.transmit_snr_db,
            p.policy,
            p.mean_rate(),
            p.std_error(),
            p.miss_rate()
        );
    }
    let dir = &args.common.out_dir;
    write_file(dir, "rate_vs_snr.csv", |w| write_rate_vs_snr_csv(&rep, w))?;
    write_file(dir, "rate_cdf.csv", |w| write_rate_cdf_csv(&rep, w))?;
    write_file(dir, "miss.csv", |w| write_miss_csv(&rep, w))?;
    write_file(dir, "sweep_arms.csv", |w| write_sweep_arms_csv(&rep, w))?;
    if args.trace_blocks > 0 {
        let scn = cfg.scenario(snrs[0])?;
        let fixed = scn.fixed_arm().context("full training is infeasible")?;
        let trace = trace_blocks(&scn, fixed, cfg.seed, args.trace_blocks)?;
        write_file(dir, "trace.csv", |w| write_block_trace_csv(&trace, w))?;
    }
    write_manifest(dir, "sweep", &cfg, &snrs)?;
    Ok(())
}

fn codebook(args: &CodebookArgs) -> Result<()> {
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
        None => ScenarioConfig::default(),
    };
    let branching = match args.branching {
        Some(s) => s,
        None => *cfg
            .topology
            .branching
            .get(args.ue)
            .with_context(|| format!("no UE {} in the topology", args.ue))?,
    };
    let array = ArrayConfig::new(
        args.antennas.unwrap_or(cfg.array.num_antennas),
        cfg.array.spacing_ratio,
    )?;
    let book = build_codebook(
        &array,
        branching,
        args.phase_shift.unwrap_or(cfg.codebook.phase_shift),
    )?;
    std::fs::create_dir_all(&args.out_dir)?;
    let path = args.out_dir.join("codebook.csv");
    book.write_csv(BufWriter::new(File::create(&path)?))?;
    println!(
        "{} levels, {} finest beams -> {}",
        book.depth(),
        book.level_size(book.depth()),
        display(&path)
    );
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Oracle(a) => oracle(&a),
        Command::Learn(a) => learn(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Codebook(a) => codebook(&a),
    }
}
