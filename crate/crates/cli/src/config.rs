//! Flat `key = value` configuration with `[section]` headers.
//!
//! Files are plain text: blank lines and lines starting with `#` or `;` are
//! ignored, a `[section]` line switches the target section, and every other
//! line must read `key = value`.  Unknown sections or keys are rejected so a
//! typo cannot silently fall back to a default.  Serialization emits every
//! field in a fixed order, and `parse(to_text(c)) == c` holds for every
//! representable configuration.

use anyhow::{anyhow, bail, Result};
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Rotation,
    Skew,
    Torus,
    ShiftToeplitz,
    ShiftRegular,
    ShiftSturmian,
}

impl SystemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SystemKind::Rotation => "rotation",
            SystemKind::Skew => "skew",
            SystemKind::Torus => "torus",
            SystemKind::ShiftToeplitz => "shift-toeplitz",
            SystemKind::ShiftRegular => "shift-regular",
            SystemKind::ShiftSturmian => "shift-sturmian",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rotation" => SystemKind::Rotation,
            "skew" => SystemKind::Skew,
            "torus" => SystemKind::Torus,
            "shift-toeplitz" | "toeplitz" => SystemKind::ShiftToeplitz,
            "shift-regular" | "regular" => SystemKind::ShiftRegular,
            "shift-sturmian" | "sturmian" => SystemKind::ShiftSturmian,
            other => bail!("unknown system kind {other:?}"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quantity {
    Pow,
    Mod,
    Amorphic,
}

impl Quantity {
    pub fn as_str(self) -> &'static str {
        match self {
            Quantity::Pow => "pow",
            Quantity::Mod => "mod",
            Quantity::Amorphic => "amorphic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "pow" => Quantity::Pow,
            "mod" => Quantity::Mod,
            "amorphic" => Quantity::Amorphic,
            other => bail!("unknown quantity {other:?}"),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MethodChoice {
    Greedy,
    Exact,
}

impl MethodChoice {
    pub fn as_str(self) -> &'static str {
        match self {
            MethodChoice::Greedy => "greedy",
            MethodChoice::Exact => "exact",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "greedy" => MethodChoice::Greedy,
            "exact" => MethodChoice::Exact,
            other => bail!("unknown method {other:?}"),
        })
    }
}

/// Sampler selection; `Auto` resolves per system in the runner.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Auto,
    CircleGrid,
    TorusGrid,
    IntervalGrid,
    SymbolicMixed,
}

impl SamplerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SamplerKind::Auto => "auto",
            SamplerKind::CircleGrid => "circle-grid",
            SamplerKind::TorusGrid => "torus-grid",
            SamplerKind::IntervalGrid => "interval-grid",
            SamplerKind::SymbolicMixed => "symbolic-mixed",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => SamplerKind::Auto,
            "circle-grid" => SamplerKind::CircleGrid,
            "torus-grid" => SamplerKind::TorusGrid,
            "interval-grid" => SamplerKind::IntervalGrid,
            "symbolic-mixed" => SamplerKind::SymbolicMixed,
            other => bail!("unknown sampler {other:?}"),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SystemConfig {
    /// Which system to analyze.  Default: rotation.
    pub kind: SystemKind,
    /// Rotation number of the circle factor.  Default: the golden mean.
    pub rho: f64,
    /// Bridge width parameter of the skew product, in (0, 1/8).  Default 1/16.
    pub epsilon: f64,
    /// Number of plateau levels of the interval map.  Default 20.
    pub plateau_depth: u32,
    /// Symbolic metric truncation radius K.  Default 16.
    pub truncation_radius: usize,
    /// First period a_1 of the Toeplitz structure.  Default 2.
    pub a1: u64,
    /// Block schedule: "pow2" for b_n = 2^(n+1), or an explicit comma list.
    pub b: String,
    /// Materialized Toeplitz depth.  Default 12 (covers all i64 positions).
    pub depth: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// pow (Bowen), mod (Hamming) or amorphic.  Default pow.
    pub quantity: Quantity,
    /// Separation thresholds, largest first.  Default 0.4, 0.25, 0.15, 0.1.
    pub deltas: Vec<f64>,
    /// Frequency thresholds for amorphic runs, decreasing.
    /// Default 2^-2 .. 2^-6.
    pub nus: Vec<f64>,
    /// Smallest horizon; the schedule runs over powers of two.  Default 16.
    pub n_min: usize,
    /// Largest horizon.  Default 4096.
    pub n_max: usize,
    /// Orbit horizon for amorphic runs.  Default 16384.
    pub horizon: usize,
    /// greedy or exact.  Default greedy.
    pub method: MethodChoice,
    /// Candidate ceiling for the exact solver.  Default 64.
    pub exact_limit: usize,
    /// Master seed; every sampler derives its own stream from it.  Default 1.
    pub seed: u64,
    /// Worker threads; 0 picks a small automatic value.  Default 0.
    pub threads: usize,
    /// Use the witness-driven sample schedule (skew, quantity mod).
    pub witness: bool,
    /// Witness block range, inclusive.  Default 3..6.
    pub blocks: (u32, u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplerConfig {
    /// Sampler family; auto picks per system.  Default auto.
    pub kind: SamplerKind,
    /// Base candidate count (grid size, or ceiling when scaled).  Default 512.
    pub count: usize,
    /// Per-horizon candidate scaling: candidates = min(count, factor * n).
    /// 0 disables scaling.  Default 0.
    pub grid_factor: usize,
    /// Interval grid bounds for the skew product.  Default [0.25, 1).
    pub x_lo: f64,
    pub x_hi: f64,
    /// Symbolic sampler: centered stride-1 block size.  Default 1536.
    pub arithmetic: usize,
    /// Symbolic sampler: extra random offsets.  Default 512.
    pub random: usize,
    /// Symbolic sampler: random offset bound.  Default 2^40.
    pub bound: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    /// Output directory for CSVs, manifest and plot script.  Default "out".
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub system: SystemConfig,
    pub run: RunConfig,
    pub sampler: SamplerConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemConfig {
                kind: SystemKind::Rotation,
                rho: (5.0f64.sqrt() - 1.0) / 2.0,
                epsilon: 0.0625,
                plateau_depth: 20,
                truncation_radius: 16,
                a1: 2,
                b: "pow2".into(),
                depth: 12,
            },
            run: RunConfig {
                quantity: Quantity::Pow,
                deltas: vec![0.4, 0.25, 0.15, 0.1],
                nus: vec![0.25, 0.125, 0.0625, 0.03125, 0.015625],
                n_min: 16,
                n_max: 4096,
                horizon: 16384,
                method: MethodChoice::Greedy,
                exact_limit: 64,
                seed: 1,
                threads: 0,
                witness: false,
                blocks: (3, 6),
            },
            sampler: SamplerConfig {
                kind: SamplerKind::Auto,
                count: 512,
                grid_factor: 0,
                x_lo: 0.25,
                x_hi: 1.0,
                arithmetic: 1536,
                random: 512,
                bound: 1 << 40,
            },
            output: OutputConfig { dir: "out".into() },
        }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("line {}: expected key = value", lineno + 1))?;
            config
                .set(&section, key.trim(), value.trim())
                .map_err(|e| anyhow!("line {}: {e}", lineno + 1))?;
        }
        config.validate()?;
        Ok(config)
    }

    /// Apply one `section.key = value` assignment.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("system", "kind") => self.system.kind = SystemKind::parse(value)?,
            ("system", "rho") => self.system.rho = parse_num(value)?,
            ("system", "epsilon") => self.system.epsilon = parse_num(value)?,
            ("system", "plateau_depth") => self.system.plateau_depth = parse_num(value)?,
            ("system", "truncation_radius") => self.system.truncation_radius = parse_num(value)?,
            ("system", "a1") => self.system.a1 = parse_num(value)?,
            ("system", "b") => self.system.b = value.to_string(),
            ("system", "depth") => self.system.depth = parse_num(value)?,
            ("run", "quantity") => self.run.quantity = Quantity::parse(value)?,
            ("run", "deltas") => self.run.deltas = parse_list(value)?,
            ("run", "nus") => self.run.nus = parse_list(value)?,
            ("run", "n_min") => self.run.n_min = parse_num(value)?,
            ("run", "n_max") => self.run.n_max = parse_num(value)?,
            ("run", "horizon") => self.run.horizon = parse_num(value)?,
            ("run", "method") => self.run.method = MethodChoice::parse(value)?,
            ("run", "exact_limit") => self.run.exact_limit = parse_num(value)?,
            ("run", "seed") => self.run.seed = parse_num(value)?,
            ("run", "threads") => self.run.threads = parse_num(value)?,
            ("run", "witness") => self.run.witness = parse_bool(value)?,
            ("run", "blocks") => self.run.blocks = parse_range(value)?,
            ("sampler", "kind") => self.sampler.kind = SamplerKind::parse(value)?,
            ("sampler", "count") => self.sampler.count = parse_num(value)?,
            ("sampler", "grid_factor") => self.sampler.grid_factor = parse_num(value)?,
            ("sampler", "x_lo") => self.sampler.x_lo = parse_num(value)?,
            ("sampler", "x_hi") => self.sampler.x_hi = parse_num(value)?,
            ("sampler", "arithmetic") => self.sampler.arithmetic = parse_num(value)?,
            ("sampler", "random") => self.sampler.random = parse_num(value)?,
            ("sampler", "bound") => self.sampler.bound = parse_num(value)?,
            ("output", "dir") => self.output.dir = value.to_string(),
            _ => bail!("unknown configuration key [{section}] {key}"),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.deltas.is_empty() {
            bail!("delta schedule is empty");
        }
        if self.run.n_min < 2 || self.run.n_max < self.run.n_min {
            bail!(
                "horizon schedule {}..{} is not usable",
                self.run.n_min,
                self.run.n_max
            );
        }
        if self.run.blocks.0 > self.run.blocks.1 {
            bail!(
                "block range {}..{} is empty",
                self.run.blocks.0,
                self.run.blocks.1
            );
        }
        if self.run.deltas.iter().any(|&d| !(d > 0.0 && d.is_finite())) {
            bail!("separation thresholds must be positive and finite");
        }
        if self.run.nus.iter().any(|&nu| !(nu > 0.0 && nu <= 1.0)) {
            bail!("frequency thresholds must lie in (0, 1]");
        }
        if self.run.nus.windows(2).any(|w| w[1] >= w[0]) {
            bail!("frequency thresholds must be strictly decreasing");
        }
        if self.run.quantity == Quantity::Amorphic && self.run.nus.len() < 3 {
            bail!("amorphic runs need at least 3 frequency thresholds to fit a trend");
        }
        if !(self.sampler.x_lo >= 0.0
            && self.sampler.x_lo < self.sampler.x_hi
            && self.sampler.x_hi <= 1.0)
        {
            bail!(
                "interval grid [{}, {}] is not inside [0, 1]",
                self.sampler.x_lo,
                self.sampler.x_hi
            );
        }
        Ok(())
    }

    /// Canonical text form; every field, fixed order.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "[system]");
        let _ = writeln!(s, "kind = {}", self.system.kind.as_str());
        let _ = writeln!(s, "rho = {}", self.system.rho);
        let _ = writeln!(s, "epsilon = {}", self.system.epsilon);
        let _ = writeln!(s, "plateau_depth = {}", self.system.plateau_depth);
        let _ = writeln!(s, "truncation_radius = {}", self.system.truncation_radius);
        let _ = writeln!(s, "a1 = {}", self.system.a1);
        let _ = writeln!(s, "b = {}", self.system.b);
        let _ = writeln!(s, "depth = {}", self.system.depth);
        let _ = writeln!(s, "[run]");
        let _ = writeln!(s, "quantity = {}", self.run.quantity.as_str());
        let _ = writeln!(s, "deltas = {}", join_list(&self.run.deltas));
        let _ = writeln!(s, "nus = {}", join_list(&self.run.nus));
        let _ = writeln!(s, "n_min = {}", self.run.n_min);
        let _ = writeln!(s, "n_max = {}", self.run.n_max);
        let _ = writeln!(s, "horizon = {}", self.run.horizon);
        let _ = writeln!(s, "method = {}", self.run.method.as_str());
        let _ = writeln!(s, "exact_limit = {}", self.run.exact_limit);
        let _ = writeln!(s, "seed = {}", self.run.seed);
        let _ = writeln!(s, "threads = {}", self.run.threads);
        let _ = writeln!(s, "witness = {}", self.run.witness);
        let _ = writeln!(s, "blocks = {}..{}", self.run.blocks.0, self.run.blocks.1);
        let _ = writeln!(s, "[sampler]");
        let _ = writeln!(s, "kind = {}", self.sampler.kind.as_str());
        let _ = writeln!(s, "count = {}", self.sampler.count);
        let _ = writeln!(s, "grid_factor = {}", self.sampler.grid_factor);
        let _ = writeln!(s, "x_lo = {}", self.sampler.x_lo);
        let _ = writeln!(s, "x_hi = {}", self.sampler.x_hi);
        let _ = writeln!(s, "arithmetic = {}", self.sampler.arithmetic);
        let _ = writeln!(s, "random = {}", self.sampler.random);
        let _ = writeln!(s, "bound = {}", self.sampler.bound);
        let _ = writeln!(s, "[output]");
        let _ = writeln!(s, "dir = {}", self.output.dir);
        s
    }
}

fn parse_num<T: std::str::FromStr>(value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow!("cannot parse {value:?}: {e}"))
}

fn parse_bool(value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => bail!("cannot parse {other:?} as a boolean"),
    }
}

fn parse_list(value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse_num(v.trim())).collect()
}

fn join_list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

/// Inclusive `lo..hi` range syntax, also used by `toeplitz --print`.
pub fn parse_range(value: &str) -> Result<(u32, u32)> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| anyhow!("expected lo..hi, got {value:?}"))?;
    Ok((parse_num(lo.trim())?, parse_num(hi.trim())?))
}

/// Inclusive signed `lo..hi` range for symbol printing.
pub fn parse_signed_range(value: &str) -> Result<(i64, i64)> {
    let (lo, hi) = value
        .split_once("..")
        .ok_or_else(|| anyhow!("expected lo..hi, got {value:?}"))?;
    Ok((parse_num(lo.trim())?, parse_num(hi.trim())?))
}
