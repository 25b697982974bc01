//! slowent: separation-count experiments and verification suites.
//!
//! Exit codes: 0 success, 1 failed verification, 2 invalid configuration or
//! flags, 3 computation failure, 4 position outside the materialized
//! Toeplitz depth.

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_traits::ToPrimitive;

use slowent::toeplitz::{regular_periodic_fraction, regular_symbol_at, ToeplitzSpec};
use slowent_cli::checks::{criteria_for_target, run_criterion, CheckParams, TARGETS};
use slowent_cli::config::{parse_range, parse_signed_range, ExperimentConfig, SamplerKind};
use slowent_cli::plot::emit_plot_script;
use slowent_cli::runner::{self, toeplitz_spec, RunManifest, VERIFY_MANIFEST_FILE};

#[derive(Parser)]
#[command(
    name = "slowent",
    version,
    about = "Finite-scale slow-entropy experiments and verification"
)]
struct Cli {
    /// Master seed for all derived randomness.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (overrides the config file).
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker threads; 0 picks a small automatic value.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Configuration file to start from.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

// Parsed once; the size skew between Analyze and Plot does not matter.
#[allow(clippy::large_enum_variant)]
#[derive(Subcommand)]
enum Command {
    /// Run separation counts and growth fits, writing CSVs and a plot script.
    Analyze(AnalyzeArgs),
    /// Run the acceptance suites and print a pass/fail table.
    Verify(VerifyArgs),
    /// Print Toeplitz symbols and the exact density table.
    Toeplitz(ToeplitzArgs),
    /// Re-emit the plot script for an existing output directory.
    Plot(PlotArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// System: rotation, skew, torus, shift-toeplitz, shift-regular,
    /// shift-sturmian.
    #[arg(long)]
    system: Option<String>,
    /// Quantity: pow (Bowen), mod (Hamming) or amorphic.
    #[arg(long)]
    quantity: Option<String>,
    /// Comma-separated separation thresholds, largest first.
    #[arg(long)]
    deltas: Option<String>,
    /// Comma-separated frequency thresholds, strictly decreasing.
    #[arg(long)]
    nus: Option<String>,
    /// Smallest horizon of the powers-of-two schedule.
    #[arg(long)]
    n_min: Option<String>,
    /// Largest horizon.
    #[arg(long)]
    n_max: Option<String>,
    /// Orbit horizon for amorphic runs.
    #[arg(long)]
    horizon: Option<String>,
    /// Scan method: greedy or exact.
    #[arg(long)]
    method: Option<String>,
    /// Sampler kind: auto, circle-grid, torus-grid, interval-grid,
    /// symbolic-mixed.
    #[arg(long)]
    sampler: Option<String>,
    /// Candidate count (or ceiling when scaling is active).
    #[arg(long)]
    count: Option<String>,
    /// Per-horizon candidate scaling factor; 0 keeps the count fixed.
    #[arg(long)]
    grid_factor: Option<String>,
    /// Rotation number of the circle factor.
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<String>,
    /// Use the plateau witness schedule (skew product, quantity mod).
    #[arg(long)]
    witness: bool,
    /// Witness block range lo..hi, inclusive.
    #[arg(long)]
    blocks: Option<String>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: counterexample, toeplitz-irregular, toeplitz-regular,
    /// inequalities, star-to-bowen or all.
    #[arg(default_value = "all")]
    target: String,
    /// Counterexample witness block range lo..hi, inclusive.
    #[arg(long)]
    blocks: Option<String>,
    /// Toeplitz construction depth for the irregularity certificate.
    #[arg(long)]
    depth: Option<u32>,
    /// Random pairs per system for the inequality suite.
    #[arg(long)]
    pairs: Option<usize>,
    /// Random matrices for the oracle suite.
    #[arg(long)]
    matrices: Option<usize>,
}

#[derive(Args)]
struct ToeplitzArgs {
    /// First period a_1 of the construction.
    #[arg(long, default_value_t = 2)]
    a1: u64,
    /// Block schedule: "pow2" for b_n = 2^(n+1), or comma-separated factors.
    #[arg(long, default_value = "pow2")]
    b: String,
    /// Construction depth.
    #[arg(long, default_value_t = 12)]
    depth: u32,
    /// Dump the regular trailing-zeros sequence instead.
    #[arg(long)]
    regular: bool,
    /// Inclusive position range lo..hi to print.
    #[arg(long, allow_hyphen_values = true)]
    print: Option<String>,
    /// Also write the dump to this file.
    #[arg(long)]
    export: Option<PathBuf>,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding results.csv and estimates.csv.
    #[arg(long)]
    dir: Option<PathBuf>,
}

/// An error tagged with the exit code it maps to.
struct Failure {
    code: i32,
    error: anyhow::Error,
}

type CmdResult<T> = std::result::Result<T, Failure>;

fn config_stage<T>(r: Result<T>) -> CmdResult<T> {
    r.map_err(|error| Failure { code: 2, error })
}

fn compute_stage<T>(r: Result<T>) -> CmdResult<T> {
    r.map_err(|error| {
        let depth_exceeded = error.chain().any(|cause| {
            matches!(
                cause.downcast_ref::<slowent::Error>(),
                Some(slowent::Error::DepthExceeded { .. })
            )
        });
        Failure {
            code: if depth_exceeded { 4 } else { 3 },
            error,
        }
    })
}

fn main() {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            std::process::exit(f.code);
        }
    }
}

fn dispatch(cli: &Cli) -> CmdResult<i32> {
    match &cli.command {
        Command::Analyze(args) => run_analyze_cmd(cli, args),
        Command::Verify(args) => run_verify_cmd(cli, args),
        Command::Toeplitz(args) => run_toeplitz_cmd(cli, args),
        Command::Plot(args) => run_plot_cmd(cli, args),
    }
}

/// Config file (when given), then global flags on top.
fn load_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            ExperimentConfig::parse(&text)?
        }
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
    }
    if let Some(threads) = cli.threads {
        config.run.threads = threads;
    }
    if let Some(out) = &cli.out {
        config.output.dir = out.clone();
    }
    Ok(config)
}

fn apply_overrides(config: &mut ExperimentConfig, a: &AnalyzeArgs) -> Result<()> {
    let assignments: [(&str, &str, &Option<String>); 13] = [
        ("system", "kind", &a.system),
        ("system", "rho", &a.rho),
        ("run", "quantity", &a.quantity),
        ("run", "deltas", &a.deltas),
        ("run", "nus", &a.nus),
        ("run", "n_min", &a.n_min),
        ("run", "n_max", &a.n_max),
        ("run", "horizon", &a.horizon),
        ("run", "method", &a.method),
        ("run", "blocks", &a.blocks),
        ("sampler", "kind", &a.sampler),
        ("sampler", "count", &a.count),
        ("sampler", "grid_factor", &a.grid_factor),
    ];
    for (section, key, value) in assignments {
        if let Some(v) = value {
            config.set(section, key, v)?;
        }
    }
    if a.witness {
        config.set("run", "witness", "true")?;
    }
    if config.sampler.kind == SamplerKind::Auto && (a.count.is_some() || a.grid_factor.is_some()) {
        anyhow::bail!(
            "--count and --grid-factor need an explicit --sampler kind; auto picks its own budgets"
        );
    }
    Ok(())
}

fn run_analyze_cmd(cli: &Cli, args: &AnalyzeArgs) -> CmdResult<i32> {
    let mut config = config_stage(load_config(cli))?;
    config_stage(apply_overrides(&mut config, args))?;
    config_stage(config.validate())?;
    let dir = PathBuf::from(&config.output.dir);
    let (manifest_path, output) = compute_stage(runner::run_analyze_to_dir(&config, &dir))?;
    for row in &output.estimates {
        println!(
            "{} {} delta = {}  slope = {:.4}  r2 = {:.4}  n = {}..{}",
            row.system, row.quantity, row.delta, row.slope, row.r_squared, row.n_min, row.n_max
        );
    }
    println!("wrote {}", manifest_path.display());
    Ok(0)
}

fn output_dir(cli: &Cli) -> CmdResult<PathBuf> {
    if let Some(out) = &cli.out {
        return Ok(PathBuf::from(out));
    }
    if cli.config.is_some() {
        return Ok(PathBuf::from(config_stage(load_config(cli))?.output.dir));
    }
    Ok(PathBuf::from("out"))
}

fn run_verify_cmd(cli: &Cli, args: &VerifyArgs) -> CmdResult<i32> {
    let ids = criteria_for_target(&args.target).ok_or_else(|| Failure {
        code: 2,
        error: anyhow!(
            "unknown verify target {:?}; expected one of: {}",
            args.target,
            TARGETS.join(", ")
        ),
    })?;
    let mut params = CheckParams::default();
    if let Some(blocks) = &args.blocks {
        params.blocks = config_stage(parse_range(blocks))?;
        if params.blocks.0 > params.blocks.1 {
            return Err(Failure {
                code: 2,
                error: anyhow!(
                    "block range {}..{} is empty",
                    params.blocks.0,
                    params.blocks.1
                ),
            });
        }
    }
    if let Some(depth) = args.depth {
        params.depth = depth;
    }
    if let Some(pairs) = args.pairs {
        params.pairs = pairs;
    }
    if let Some(matrices) = args.matrices {
        params.matrices = matrices;
    }
    if let Some(seed) = cli.seed {
        params.seed = seed;
    }

    let t0 = Instant::now();
    let mut outcomes = Vec::with_capacity(ids.len());
    for id in ids {
        let outcome = run_criterion(id, &params);
        println!("{}", outcome.line());
        outcomes.push(outcome);
    }
    let pass_count = outcomes.iter().filter(|o| o.passed).count();
    println!("{pass_count}/{} checks passed", outcomes.len());

    let dir = output_dir(cli)?;
    compute_stage(
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display())),
    )?;
    let manifest = RunManifest {
        tool_version: slowent_cli::TOOL_VERSION.to_string(),
        wall_clock_seconds: t0.elapsed().as_secs_f64(),
        files: Vec::new(),
        checks: outcomes
            .iter()
            .map(|o| (o.name.to_string(), o.passed))
            .collect(),
        config_echo: vec![
            format!("config.verify.target = {}", args.target),
            format!(
                "config.verify.blocks = {}..{}",
                params.blocks.0, params.blocks.1
            ),
            format!("config.verify.depth = {}", params.depth),
            format!("config.verify.pairs = {}", params.pairs),
            format!("config.verify.matrices = {}", params.matrices),
            format!("config.verify.seed = {}", params.seed),
        ],
    };
    compute_stage(manifest.write_named(&dir, VERIFY_MANIFEST_FILE))?;
    Ok(if pass_count == outcomes.len() { 0 } else { 1 })
}

fn toeplitz_report(
    args: &ToeplitzArgs,
    spec: &Option<ToeplitzSpec>,
    range: Option<(i64, i64)>,
) -> Result<String> {
    use std::fmt::Write as _;
    let mut out = String::new();
    match spec {
        None => writeln!(out, "sequence = regular  depth = {}", args.depth)?,
        Some(s) => writeln!(
            out,
            "sequence = toeplitz  a1 = {}  b = {}  depth = {}",
            s.a1(),
            args.b,
            s.depth()
        )?,
    }
    if let Some((lo, hi)) = range {
        if lo > hi {
            // Empty range: header only.
            return Ok(out);
        }
        let symbols: Vec<String> = match spec {
            None => (lo..=hi)
                .map(|k| regular_symbol_at(k).to_string())
                .collect(),
            Some(s) => (lo..=hi)
                .map(|k| s.symbol_at(k).map(|v| v.to_string()))
                .collect::<slowent::Result<_>>()?,
        };
        writeln!(out, "range = {lo}..{hi}")?;
        writeln!(out, "symbols = {}", symbols.join(","))?;
    }
    writeln!(out, "periodic densities:")?;
    for level in 1..=args.depth {
        match spec {
            None => {
                let (num, den) = regular_periodic_fraction(level);
                writeln!(
                    out,
                    "  level {level}: {num}/{den} ~ {:.6}",
                    num as f64 / den as f64
                )?;
            }
            Some(s) => {
                let d = s.periodic_density(level)?;
                writeln!(
                    out,
                    "  level {level}: {d} ~ {:.6}",
                    d.to_f64().unwrap_or(f64::NAN)
                )?;
            }
        }
    }
    Ok(out)
}

fn run_toeplitz_cmd(_cli: &Cli, args: &ToeplitzArgs) -> CmdResult<i32> {
    if args.regular && args.depth >= 63 {
        return Err(Failure {
            code: 2,
            error: anyhow!("regular density table needs depth < 63"),
        });
    }
    let range = config_stage(args.print.as_deref().map(parse_signed_range).transpose())?;
    let spec = config_stage(if args.regular {
        Ok(None)
    } else {
        toeplitz_spec(args.a1, &args.b, args.depth).map(Some)
    })?;
    let report = compute_stage(toeplitz_report(args, &spec, range))?;
    print!("{report}");
    if let Some(path) = &args.export {
        compute_stage(
            std::fs::write(path, &report).with_context(|| format!("writing {}", path.display())),
        )?;
        println!("exported to {}", path.display());
    }
    Ok(0)
}

fn run_plot_cmd(cli: &Cli, args: &PlotArgs) -> CmdResult<i32> {
    let dir = match &args.dir {
        Some(dir) => dir.clone(),
        None => output_dir(cli)?,
    };
    let path = compute_stage(emit_plot_script(&dir))?;
    println!("wrote {}", path.display());
    Ok(0)
}
