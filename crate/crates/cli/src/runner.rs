//! Experiment execution and persistence.
//!
//! Each (threshold, horizon) separation computation is an independent job.
//! Jobs run on a small worker pool and land in preassigned slots, so the CSV
//! bytes depend only on the configuration and master seed, never on thread
//! scheduling.  The manifest is the only output carrying wall-clock state; it
//! is written last, atomically, and lists only files that already exist.

use crate::config::{ExperimentConfig, MethodChoice, Quantity, SamplerKind, SystemKind};
use anyhow::{anyhow, bail, Context, Result};
use slowent::estimation::{amorphic_fit, entropy_estimate, fit_power_law};
use slowent::separation::{
    asymptotic_separation, bowen_separation, counterexample_witness_set, derive_seed,
    hamming_separation, CandidateSet, Method, SeparationResult,
};
use slowent::systems::{SequenceSource, SystemSpec};
use slowent::toeplitz::{BlockSchedule, ToeplitzSpec};
use slowent::Real;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, OnceLock};

pub const RESULTS_FILE: &str = "results.csv";
pub const ESTIMATES_FILE: &str = "estimates.csv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const VERIFY_MANIFEST_FILE: &str = "verify-manifest.txt";

/// Hamming threshold used by witness-driven runs: 1/4 minus the documented
/// floating-point slack of the witness verification.
pub const WITNESS_DELTA: f64 = 0.25 - 1e-6;

pub const RESULTS_COLUMNS: &str =
    "system,kind,method,delta,nu,n,count,seed,sampler,candidate_count";
pub const ESTIMATES_COLUMNS: &str = "system,quantity,delta,slope,intercept,r_squared,n_min,n_max";

#[derive(Clone, Debug)]
pub struct ResultRow {
    pub system: String,
    pub kind: String,
    pub method: String,
    pub delta: f64,
    pub nu: Option<f64>,
    pub n: usize,
    pub count: usize,
    pub seed: u64,
    pub sampler: String,
    pub candidate_count: usize,
}

#[derive(Clone, Debug)]
pub struct EstimateRow {
    pub system: String,
    pub quantity: String,
    pub delta: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Clone, Debug)]
pub struct AnalyzeOutput {
    pub rows: Vec<ResultRow>,
    pub estimates: Vec<EstimateRow>,
}

pub fn parse_schedule(text: &str) -> Result<BlockSchedule> {
    if text == "pow2" {
        return Ok(BlockSchedule::DoublingPowers);
    }
    let bs = text
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<u64>()
                .map_err(|e| anyhow!("bad schedule entry {v:?}: {e}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BlockSchedule::Explicit(bs))
}

pub fn toeplitz_spec(a1: u64, b: &str, depth: u32) -> Result<ToeplitzSpec> {
    Ok(ToeplitzSpec::new(a1, parse_schedule(b)?, depth)?)
}

/// System plus, for shifts, the sequence source the sampler reads.
pub fn build_system(
    config: &ExperimentConfig,
) -> Result<(SystemSpec<Real>, Option<SequenceSource<Real>>)> {
    let sc = &config.system;
    match sc.kind {
        SystemKind::Rotation => Ok((SystemSpec::circle_rotation(sc.rho)?, None)),
        SystemKind::Skew => Ok((
            SystemSpec::skew_product(sc.rho, sc.epsilon, sc.plateau_depth)?,
            None,
        )),
        SystemKind::Torus => Ok((SystemSpec::torus_skew(sc.rho)?, None)),
        SystemKind::ShiftToeplitz => {
            let spec = toeplitz_spec(sc.a1, &sc.b, sc.depth)?;
            let source = SequenceSource::Toeplitz(Arc::new(spec));
            Ok((
                SystemSpec::shift_on_subshift(source.clone(), sc.truncation_radius)?,
                Some(source),
            ))
        }
        SystemKind::ShiftRegular => {
            let source = SequenceSource::Regular;
            Ok((
                SystemSpec::shift_on_subshift(source.clone(), sc.truncation_radius)?,
                Some(source),
            ))
        }
        SystemKind::ShiftSturmian => {
            let source = SequenceSource::Sturmian {
                rho: sc.rho,
                x0: 0.0,
            };
            Ok((
                SystemSpec::shift_on_subshift(source.clone(), sc.truncation_radius)?,
                Some(source),
            ))
        }
    }
}

/// Sampler settings with `auto` resolved to the per-system default.
#[derive(Clone, Debug)]
pub struct SamplerPlan {
    pub kind: SamplerKind,
    pub count: usize,
    pub grid_factor: usize,
    pub x_lo: f64,
    pub x_hi: f64,
    pub arithmetic: usize,
    pub random: usize,
    pub bound: i64,
}

/// Defaults behind `sampler.kind = auto`:
/// - rotation: 509-point circle grid (prime, so no schedule threshold lands
///   exactly on a grid distance)
/// - skew: 512-point grid on [1/4, 1), the plateau-free transit range
/// - torus: x-grid scaled as 8 per horizon step, capped at 2^16; amorphic
///   runs use a fixed 32-point grid instead
/// - shifts: mixed symbolic offsets, a centered block of 4 per horizon step
///   (capped at 2^14) plus 512 random offsets in +-2^40; hamming runs use a
///   fixed 2048-offset block
pub fn resolve_sampler(config: &ExperimentConfig) -> SamplerPlan {
    let s = &config.sampler;
    let mut plan = SamplerPlan {
        kind: s.kind,
        count: s.count,
        grid_factor: s.grid_factor,
        x_lo: s.x_lo,
        x_hi: s.x_hi,
        arithmetic: s.arithmetic,
        random: s.random,
        bound: s.bound,
    };
    if s.kind != SamplerKind::Auto {
        return plan;
    }
    match config.system.kind {
        SystemKind::Rotation => {
            plan.kind = SamplerKind::CircleGrid;
            plan.count = 509;
            plan.grid_factor = 0;
        }
        SystemKind::Skew => {
            plan.kind = SamplerKind::IntervalGrid;
            plan.count = 512;
            plan.grid_factor = 0;
        }
        SystemKind::Torus => {
            plan.kind = SamplerKind::TorusGrid;
            if config.run.quantity == Quantity::Amorphic {
                plan.count = 32;
                plan.grid_factor = 0;
            } else {
                plan.count = 1 << 16;
                plan.grid_factor = 8;
            }
        }
        SystemKind::ShiftToeplitz | SystemKind::ShiftRegular | SystemKind::ShiftSturmian => {
            plan.kind = SamplerKind::SymbolicMixed;
            if config.run.quantity == Quantity::Mod {
                plan.arithmetic = 2048;
                plan.grid_factor = 0;
            } else {
                plan.arithmetic = 1 << 14;
                plan.grid_factor = 4;
            }
            plan.random = 512;
        }
    }
    plan
}

fn scaled(ceiling: usize, factor: usize, n: usize) -> usize {
    if factor == 0 {
        ceiling
    } else {
        (factor * n).min(ceiling).max(1)
    }
}

fn candidates_for(
    plan: &SamplerPlan,
    source: Option<&SequenceSource<Real>>,
    n: usize,
    seed: u64,
) -> Result<CandidateSet<Real>> {
    match plan.kind {
        SamplerKind::CircleGrid => Ok(CandidateSet::circle_grid(plan.count)?),
        SamplerKind::TorusGrid => Ok(CandidateSet::torus_x_grid(scaled(
            plan.count,
            plan.grid_factor,
            n,
        ))?),
        SamplerKind::IntervalGrid => Ok(CandidateSet::interval_grid(
            plan.x_lo, plan.x_hi, plan.count,
        )?),
        SamplerKind::SymbolicMixed => {
            let source = source.ok_or_else(|| anyhow!("symbolic sampler needs a shift system"))?;
            Ok(CandidateSet::symbolic_mixed(
                source,
                scaled(plan.arithmetic, plan.grid_factor, n),
                plan.random,
                plan.bound,
                seed,
            )?)
        }
        SamplerKind::Auto => unreachable!("resolve_sampler removes auto"),
    }
}

/// Powers of two from n_min (rounded up) through n_max.
pub fn horizon_schedule(n_min: usize, n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = n_min.next_power_of_two().max(2);
    while n <= n_max {
        out.push(n);
        n *= 2;
    }
    out
}

#[derive(Clone, Copy, Debug)]
enum Job {
    Pow { delta: f64, n: usize },
    Mod { delta: f64, n: usize },
    Amorphic { delta: f64, nu: f64 },
    Witness { m: u32 },
}

fn run_jobs<J, R, F>(jobs: &[J], threads: usize, f: F) -> Result<Vec<R>>
where
    J: Sync,
    R: Send + Sync,
    F: Fn(&J) -> Result<R> + Sync,
{
    let threads = threads.max(1).min(jobs.len().max(1));
    let slots: Vec<OnceLock<Result<R>>> = jobs.iter().map(|_| OnceLock::new()).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let _ = slots[i].set(f(&jobs[i]));
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().expect("worker filled every slot"))
        .collect()
}

fn effective_threads(configured: usize) -> usize {
    if configured > 0 {
        return configured;
    }
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
        .min(4)
}

fn row_from(system: &str, master_seed: u64, r: &SeparationResult<Real>) -> ResultRow {
    ResultRow {
        system: system.to_string(),
        kind: r.kind.as_str().to_string(),
        method: r.method.as_str().to_string(),
        delta: r.delta,
        nu: r.nu,
        n: r.horizon,
        count: r.count,
        seed: r.provenance.seed.unwrap_or(master_seed),
        sampler: r.provenance.sampler.clone(),
        candidate_count: r.provenance.candidate_count,
    }
}

/// Run the configured experiment; pure compute, no files touched.
pub fn run_analyze(config: &ExperimentConfig) -> Result<AnalyzeOutput> {
    config.validate()?;
    let run = &config.run;
    if run.witness && (config.system.kind != SystemKind::Skew || run.quantity != Quantity::Mod) {
        bail!("witness mode applies only to `--system skew --quantity mod`");
    }
    let (sys, source) = build_system(config)?;
    let system_name = config.system.kind.as_str();
    let plan = resolve_sampler(config);
    let method = match run.method {
        MethodChoice::Greedy => Method::Greedy,
        MethodChoice::Exact => Method::Exact,
    };

    let mut jobs: Vec<Job> = Vec::new();
    if run.witness {
        for m in run.blocks.0..=run.blocks.1 {
            jobs.push(Job::Witness { m });
        }
    } else {
        match run.quantity {
            Quantity::Pow | Quantity::Mod => {
                for &delta in &run.deltas {
                    for n in horizon_schedule(run.n_min, run.n_max) {
                        jobs.push(match run.quantity {
                            Quantity::Pow => Job::Pow { delta, n },
                            _ => Job::Mod { delta, n },
                        });
                    }
                }
            }
            Quantity::Amorphic => {
                for &delta in &run.deltas {
                    for &nu in &run.nus {
                        jobs.push(Job::Amorphic { delta, nu });
                    }
                }
            }
        }
    }
    if jobs.is_empty() {
        bail!("the configured schedules produce no jobs");
    }

    let exec = |job: &Job| -> Result<ResultRow> {
        let result = match *job {
            Job::Pow { delta, n } => {
                let seed = derive_seed(run.seed, &format!("{system_name}/pow/{delta}/{n}"));
                let cands = candidates_for(&plan, source.as_ref(), n, seed)?;
                bowen_separation(&sys, &cands, n, delta, method)?
            }
            Job::Mod { delta, n } => {
                let seed = derive_seed(run.seed, &format!("{system_name}/mod/{delta}/{n}"));
                let cands = candidates_for(&plan, source.as_ref(), n, seed)?;
                hamming_separation(&sys, &cands, n, delta, method)?
            }
            Job::Amorphic { delta, nu } => {
                let seed = derive_seed(run.seed, &format!("{system_name}/amorphic/{delta}/{nu}"));
                let cands = candidates_for(&plan, source.as_ref(), run.horizon, seed)?;
                asymptotic_separation(&sys, &cands, run.horizon, delta, nu, method)?
            }
            Job::Witness { m } => {
                let (cands, horizon) = counterexample_witness_set::<Real>(m)?;
                hamming_separation(&sys, &cands, horizon, WITNESS_DELTA, method)?
            }
        };
        Ok(row_from(system_name, run.seed, &result))
    };
    let rows = run_jobs(&jobs, effective_threads(run.threads), exec)?;

    let mut estimates = Vec::new();
    if run.witness {
        let samples: Vec<(usize, usize)> = rows.iter().map(|r| (r.n, r.count)).collect();
        let g = fit_power_law::<Real>(&samples).context("witness growth fit")?;
        estimates.push(EstimateRow {
            system: system_name.to_string(),
            quantity: "mod".to_string(),
            delta: WITNESS_DELTA,
            slope: g.slope,
            intercept: g.intercept,
            r_squared: g.r_squared,
            n_min: g.n_min,
            n_max: g.n_max,
        });
    } else {
        match run.quantity {
            Quantity::Pow | Quantity::Mod => {
                let per_delta: Vec<(f64, Vec<(usize, usize)>)> = run
                    .deltas
                    .iter()
                    .map(|&delta| {
                        let samples = rows
                            .iter()
                            .filter(|r| r.delta == delta)
                            .map(|r| (r.n, r.count))
                            .collect();
                        (delta, samples)
                    })
                    .collect();
                let e = entropy_estimate(&per_delta).context("growth estimation")?;
                for (delta, g) in e.per_delta {
                    estimates.push(EstimateRow {
                        system: system_name.to_string(),
                        quantity: run.quantity.as_str().to_string(),
                        delta,
                        slope: g.slope,
                        intercept: g.intercept,
                        r_squared: g.r_squared,
                        n_min: g.n_min,
                        n_max: g.n_max,
                    });
                }
            }
            Quantity::Amorphic => {
                for &delta in &run.deltas {
                    let samples: Vec<(f64, usize)> = rows
                        .iter()
                        .filter(|r| r.delta == delta)
                        .map(|r| (r.nu.expect("amorphic rows carry nu"), r.count))
                        .collect();
                    let a = amorphic_fit(&samples).context("amorphic estimation")?;
                    estimates.push(EstimateRow {
                        system: system_name.to_string(),
                        quantity: "amorphic".to_string(),
                        delta,
                        slope: a.slope,
                        intercept: a.intercept,
                        r_squared: a.r_squared,
                        n_min: run.horizon,
                        n_max: run.horizon,
                    });
                }
            }
        }
    }

    Ok(AnalyzeOutput { rows, estimates })
}

fn render_results(rows: &[ResultRow]) -> String {
    let mut s = String::from(RESULTS_COLUMNS);
    s.push('\n');
    for r in rows {
        let nu = r.nu.map(|v| v.to_string()).unwrap_or_default();
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.system,
            r.kind,
            r.method,
            r.delta,
            nu,
            r.n,
            r.count,
            r.seed,
            r.sampler,
            r.candidate_count
        ));
    }
    s
}

fn render_estimates(rows: &[EstimateRow]) -> String {
    let mut s = String::from(ESTIMATES_COLUMNS);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.system, r.quantity, r.delta, r.slope, r.intercept, r.r_squared, r.n_min, r.n_max
        ));
    }
    s
}

pub fn write_results_csv(dir: &Path, rows: &[ResultRow]) -> Result<PathBuf> {
    let path = dir.join(RESULTS_FILE);
    std::fs::write(&path, render_results(rows))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_estimates_csv(dir: &Path, rows: &[EstimateRow]) -> Result<PathBuf> {
    let path = dir.join(ESTIMATES_FILE);
    std::fs::write(&path, render_estimates(rows))
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

#[derive(Clone, Debug, Default)]
pub struct RunManifest {
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    pub files: Vec<String>,
    /// (check name, passed) pairs from verification runs.
    pub checks: Vec<(String, bool)>,
    pub config_echo: Vec<String>,
}

fn config_echo_lines(config: &ExperimentConfig) -> Vec<String> {
    let mut section = String::new();
    let mut out = Vec::new();
    for line in config.to_text().lines() {
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = name.to_string();
        } else if let Some((k, v)) = line.split_once(" = ") {
            out.push(format!("config.{section}.{k} = {v}"));
        }
    }
    out
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig, wall_clock_seconds: f64) -> Self {
        RunManifest {
            tool_version: crate::TOOL_VERSION.to_string(),
            wall_clock_seconds,
            files: Vec::new(),
            checks: Vec::new(),
            config_echo: config_echo_lines(config),
        }
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("tool = slowent {}\n", self.tool_version));
        s.push_str(&format!(
            "wall_clock_seconds = {:.3}\n",
            self.wall_clock_seconds
        ));
        for f in &self.files {
            s.push_str(&format!("file = {f}\n"));
        }
        for (name, ok) in &self.checks {
            s.push_str(&format!(
                "check.{name} = {}\n",
                if *ok { "pass" } else { "fail" }
            ));
        }
        for line in &self.config_echo {
            s.push_str(line);
            s.push('\n');
        }
        s
    }

    /// Atomic write: temp file in the same directory, then rename.
    pub fn write_named(&self, dir: &Path, name: &str) -> Result<PathBuf> {
        let path = dir.join(name);
        let tmp = dir.join(format!("{name}.tmp"));
        std::fs::write(&tmp, self.render())
            .with_context(|| format!("writing {}", tmp.display()))?;
        std::fs::rename(&tmp, &path)
            .with_context(|| format!("renaming into {}", path.display()))?;
        Ok(path)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        self.write_named(dir, MANIFEST_FILE)
    }
}

/// Full analyze pipeline: compute, write CSVs and plot script, then the
/// manifest.  Returns the manifest path and the computed output.
pub fn run_analyze_to_dir(
    config: &ExperimentConfig,
    dir: &Path,
) -> Result<(PathBuf, AnalyzeOutput)> {
    let t0 = std::time::Instant::now();
    let output = run_analyze(config)?;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_results_csv(dir, &output.rows)?;
    write_estimates_csv(dir, &output.estimates)?;
    let plot = crate::plot::emit_plot_script(dir)?;
    let mut manifest = RunManifest::new(config, t0.elapsed().as_secs_f64());
    manifest.files = vec![
        RESULTS_FILE.to_string(),
        ESTIMATES_FILE.to_string(),
        plot.file_name().unwrap().to_string_lossy().into_owned(),
    ];
    let path = manifest.write(dir)?;
    Ok((path, output))
}
