use std::collections::HashSet;
use std::ffi::OsString;
use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{CliError, Failure};

#[derive(Debug, Parser)]
#[command(name = "kpspin", version, about = "Classical and quantum diagnostics of the kicked p-spin")]
pub struct Cli {
    /// TOML file supplying defaults for any flag; flags on the command line win
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Output file; standard output when absent
    #[arg(long, short, global = true, value_name = "FILE")]
    pub output: Option<PathBuf>,

    /// Root seed for every randomized step
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Write a null timestamp so reruns are byte-identical
    #[arg(long, global = true)]
    pub no_timestamp: bool,

    /// Worker threads (default: all cores)
    #[arg(long, global = true, env = "KPSPIN_THREADS", value_parser = clap::value_parser!(u32).range(1..))]
    pub threads: Option<u32>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trajectories from Fibonacci initial conditions, for phase portraits
    Portrait(PortraitArgs),
    /// Poles and nontrivial fixed points with their stability
    FixedPoints(FixedPointArgs),
    /// Stability class of one fixed point
    Classify(ClassifyArgs),
    /// Largest Lyapunov exponent
    Lyapunov(LyapunovArgs),
    /// Chaotic area from recurrence sampling
    Area(AreaArgs),
    /// Phase-space similarity as a function of alpha
    Similarity(SimilarityArgs),
    /// Any metric over a (k, alpha) grid, with checkpoints
    Scan(ScanArgs),
    /// Ratio statistics of the Floquet eigenphases
    Spectrum(SpectrumArgs),
    /// Averaged eigenvector IPR in the Jy basis
    IprDelta(IprArgs),
    /// OTOC series of Jz and its growth rate
    Otoc(OtocArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Portrait(_) => "portrait",
            Command::FixedPoints(_) => "fixed-points",
            Command::Classify(_) => "classify",
            Command::Lyapunov(_) => "lyapunov",
            Command::Area(_) => "area",
            Command::Similarity(_) => "similarity",
            Command::Scan(_) => "scan",
            Command::Spectrum(_) => "spectrum",
            Command::IprDelta(_) => "ipr-delta",
            Command::Otoc(_) => "otoc",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Model {
    /// Interaction order
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub p: u32,
    /// Kick strength
    #[arg(long, value_parser = parse_nonnegative)]
    pub k: f64,
    /// Precession angle: radians or forms like pi/2, 2pi/3, 0.25pi
    #[arg(long, value_parser = parse_angle)]
    pub alpha: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct PortraitArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    /// Number of initial conditions
    #[arg(long, default_value_t = 60, value_parser = clap::value_parser!(u64).range(1..))]
    pub orbits: u64,
    #[arg(long, default_value_t = 500, value_parser = clap::value_parser!(u64).range(1..))]
    pub kicks: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct FixedPointArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    /// Root-bracketing grid resolution in z
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(100..))]
    pub grid: u64,
}

#[derive(Debug, Args, Serialize)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    /// Fixed point as x,y,z
    #[arg(long, value_parser = parse_point)]
    pub point: Triple,
}

#[derive(Debug, Args, Serialize)]
pub struct LyapunovArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(10_000..))]
    pub steps: u64,
    #[arg(long, default_value_t = 1_000)]
    pub transient: u64,
    /// Rotated Fibonacci seeds; the largest exponent is reported
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    /// Single starting point x,y,z instead of the seed set
    #[arg(long, value_parser = parse_point)]
    pub start: Option<Triple>,
}

#[derive(Debug, Args, Serialize)]
pub struct AreaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1000..))]
    pub ntot: u64,
    /// Recurrence radius (chord distance)
    #[arg(long, default_value_t = 6e-2, value_parser = parse_positive)]
    pub dmin: f64,
    /// Recurrence horizons: lo:hi inclusive or a comma list
    #[arg(long, default_value = "120:140", value_parser = parse_t_max)]
    pub tmax: TMax,
}

#[derive(Debug, Args, Serialize)]
pub struct SimilarityArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub p: u32,
    #[arg(long, value_parser = parse_nonnegative)]
    pub k: f64,
    /// Alpha values as min:max:count, endpoints included
    #[arg(long, default_value = "0:pi:200", value_parser = parse_span)]
    pub alphas: Span,
    #[arg(long, default_value_t = 5e-4, value_parser = parse_finite)]
    pub dalpha: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    pub dk: f64,
    #[arg(long, default_value_t = 1500, value_parser = clap::value_parser!(u64).range(100..))]
    pub ntot: u64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(10..))]
    pub kicks: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricArg {
    Lyapunov,
    Area,
    Similarity,
    Gamma,
    Delta,
    QuantumLyapunov,
}

#[derive(Debug, Args, Serialize)]
pub struct ScanArgs {
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub p: u32,
    /// k axis as min:max[:count]; count defaults to 60 (classical) or 40 (quantum)
    #[arg(long, default_value = "0:10", value_parser = parse_span)]
    pub ks: Span,
    /// alpha axis as min:max[:count]
    #[arg(long, default_value = "0:pi", value_parser = parse_span)]
    pub alphas: Span,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(10_000..))]
    pub steps: u64,
    #[arg(long, default_value_t = 1_000)]
    pub transient: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub ntot: u64,
    #[arg(long, default_value_t = 6e-2, value_parser = parse_positive)]
    pub dmin: f64,
    #[arg(long, default_value = "120:140", value_parser = parse_t_max)]
    pub tmax: TMax,
    #[arg(long, default_value_t = 5e-4, value_parser = parse_finite)]
    pub dalpha: f64,
    #[arg(long, default_value_t = 0.0, value_parser = parse_finite)]
    pub dk: f64,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(10..))]
    pub kicks: u64,
    /// Number of spins N_s (Hilbert space dimension N_s + 1)
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub ns: u32,
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub otoc_steps: u64,
    /// Checkpoint file, rewritten after every batch
    #[arg(long, value_name = "FILE")]
    pub checkpoint: Option<PathBuf>,
    /// Continue from an existing checkpoint
    #[arg(long)]
    pub resume: bool,
    /// Cells per checkpoint batch
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    pub batch: u64,
    /// Stop after this many cells; the rest are reported as pending
    #[arg(long)]
    pub max_cells: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    /// Parity and, where present, the extra x-rotation symmetry
    Full,
    Parity,
    None,
}

#[derive(Debug, Args, Serialize)]
pub struct SpectrumArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub ns: u32,
    #[arg(long, value_enum, default_value_t = Reduction::Full)]
    pub reduction: Reduction,
    /// Also write the Floquet operator to a binary dump
    #[arg(long, value_name = "FILE")]
    pub dump_operator: Option<PathBuf>,
    /// Also write eigenphases and eigenvectors to a binary dump
    #[arg(long, value_name = "FILE")]
    pub dump_spectrum: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct IprArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub ns: u32,
}

#[derive(Debug, Args, Serialize)]
pub struct OtocArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: Model,
    #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(1..))]
    pub ns: u32,
    /// Number of kicks
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    pub steps: u64,
    /// COE samples for the saturation value; 0 skips normalization
    #[arg(long, default_value_t = 20, value_parser = parse_coe_samples)]
    pub coe_samples: u64,
    #[arg(long, default_value_t = 100.0, value_parser = parse_positive)]
    pub floor_multiplier: f64,
    #[arg(long, default_value_t = 0.01, value_parser = parse_positive)]
    pub floor_epsilon: f64,
    #[arg(long, default_value_t = 0.2, value_parser = parse_positive)]
    pub saturation: f64,
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u64).range(2..))]
    pub min_points: u64,
}

/// `min:max` with an optional point count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Span {
    pub min: f64,
    pub max: f64,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct TMax(pub Vec<usize>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Triple(pub [f64; 3]);

/// Radians, or a multiple of pi such as `pi/2`, `2pi/3`, `-pi/4`, `0.5*pi`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_ascii_lowercase();
    let bad = || format!("cannot read `{s}` as an angle (try 1.2, pi/2 or 2pi/3)");
    let value = if let Ok(v) = t.parse::<f64>() {
        v
    } else {
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (t.as_str(), None),
        };
        let coeff = num.strip_suffix("pi").ok_or_else(bad)?;
        let coeff = coeff.strip_suffix('*').unwrap_or(coeff);
        let c = match coeff {
            "" | "+" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        let d = match den {
            Some(d) => d.parse::<f64>().map_err(|_| bad())?,
            None => 1.0,
        };
        if d == 0.0 {
            return Err(bad());
        }
        c * PI / d
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

fn parse_finite(s: &str) -> Result<f64, String> {
    parse_angle(s)
}

fn parse_nonnegative(s: &str) -> Result<f64, String> {
    let v = parse_angle(s)?;
    if v < 0.0 {
        return Err(format!("must be >= 0, got {s}"));
    }
    Ok(v)
}

fn parse_positive(s: &str) -> Result<f64, String> {
    let v = parse_angle(s)?;
    if v <= 0.0 {
        return Err(format!("must be > 0, got {s}"));
    }
    Ok(v)
}

fn parse_coe_samples(s: &str) -> Result<u64, String> {
    let n: u64 = s.parse().map_err(|_| format!("`{s}` is not a nonnegative integer"))?;
    if n != 0 && n < 10 {
        return Err(format!("need 0 or at least 10 samples, got {n}"));
    }
    Ok(n)
}

pub fn parse_span(s: &str) -> Result<Span, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let span = match parts.as_slice() {
        [v] => {
            let v = parse_angle(v)?;
            Span { min: v, max: v, count: Some(1) }
        }
        [a, b] => Span { min: parse_angle(a)?, max: parse_angle(b)?, count: None },
        [a, b, n] => {
            let n: usize = n.parse().map_err(|_| format!("bad count `{n}` in `{s}`"))?;
            if n == 0 {
                return Err(format!("count must be >= 1 in `{s}`"));
            }
            Span { min: parse_angle(a)?, max: parse_angle(b)?, count: Some(n) }
        }
        _ => return Err(format!("expected value, min:max or min:max:count, got `{s}`")),
    };
    if span.min > span.max {
        return Err(format!("min exceeds max in `{s}`"));
    }
    Ok(span)
}

fn parse_t_max(s: &str) -> Result<TMax, String> {
    let int = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad horizon `{t}` in `{s}`"));
    let list: Vec<usize> = match s.split_once(':') {
        Some((lo, hi)) => {
            let (lo, hi) = (int(lo)?, int(hi)?);
            if lo > hi {
                return Err(format!("empty horizon range `{s}`"));
            }
            (lo..=hi).collect()
        }
        None => s.split(',').map(int).collect::<Result<_, _>>()?,
    };
    if list.contains(&0) {
        return Err("horizons must be >= 1".into());
    }
    Ok(TMax(list))
}

fn parse_point(s: &str) -> Result<Triple, String> {
    let v: Vec<f64> = s.split(',').map(parse_finite).collect::<Result<_, _>>()?;
    match v.as_slice() {
        &[x, y, z] => Ok(Triple([x, y, z])),
        _ => Err(format!("expected x,y,z, got `{s}`")),
    }
}

/// Parses `argv`, filling every flag not given on the command line from
/// the `--config` file when one is named.
pub fn parse(argv: Vec<OsString>) -> Result<Cli, Failure> {
    let cmd = Cli::command();
    // a lenient pass to find the config file and the flags already given
    let lenient = cmd.clone().ignore_errors(true).try_get_matches_from(&argv).ok();
    let config = lenient.as_ref().and_then(|m| m.get_one::<PathBuf>("config").cloned());
    let mut full = argv;
    if let (Some(path), Some(matches)) = (config, lenient) {
        let sub = matches.subcommand();
        let mut given: HashSet<String> = HashSet::new();
        for id in matches.ids() {
            if matches.value_source(id.as_str()) == Some(clap::parser::ValueSource::CommandLine) {
                given.insert(id.to_string());
            }
        }
        if let Some((_, m)) = sub {
            for id in m.ids() {
                if m.value_source(id.as_str()) == Some(clap::parser::ValueSource::CommandLine) {
                    given.insert(id.to_string());
                }
            }
        }
        let extra = config_tokens(&cmd, sub.map(|(name, _)| name), &path, &given)?;
        full.extend(extra.into_iter().map(OsString::from));
    }
    let matches = cmd.try_get_matches_from(full).map_err(Failure::Clap)?;
    Cli::from_arg_matches(&matches).map_err(Failure::Clap)
}

fn config_tokens(
    cmd: &clap::Command,
    sub: Option<&str>,
    path: &PathBuf,
    given: &HashSet<String>,
) -> Result<Vec<String>, CliError> {
    let usage = |message: String| CliError::Usage { flag: "--config".into(), message };
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    let table: toml::Table = text.parse().map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let mut tokens = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) => {
                let Some(section_cmd) = cmd.find_subcommand(key) else {
                    return Err(usage(format!("unknown section [{key}]")));
                };
                if Some(key.as_str()) == sub {
                    for (k, v) in section {
                        push_flag(section_cmd, &format!("[{key}]"), k, v, given, &mut tokens).map_err(usage)?;
                    }
                }
            }
            v => push_flag(cmd, "top level", key, v, given, &mut tokens).map_err(usage)?,
        }
    }
    Ok(tokens)
}

fn push_flag(
    cmd: &clap::Command,
    place: &str,
    key: &str,
    value: &toml::Value,
    given: &HashSet<String>,
    tokens: &mut Vec<String>,
) -> Result<(), String> {
    let arg = cmd
        .get_arguments()
        .find(|a| a.get_long() == Some(key) && a.get_id() != "config")
        .ok_or_else(|| format!("unknown key `{key}` at {place}"))?;
    if given.contains(arg.get_id().as_str()) {
        return Ok(());
    }
    let flag = format!("--{key}");
    let scalar = |v: &toml::Value| match v {
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(f) => Ok(format!("{f:?}")),
        toml::Value::Boolean(b) => Ok(b.to_string()),
        _ => Err(format!("unsupported value for `{key}` at {place}")),
    };
    let takes_value = arg.get_action().takes_values();
    match value {
        toml::Value::Boolean(b) if !takes_value => {
            if *b {
                tokens.push(flag);
            }
        }
        toml::Value::Array(items) => {
            let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_, _>>()?;
            tokens.push(flag);
            tokens.push(parts.join(","));
        }
        v => {
            tokens.push(flag);
            tokens.push(scalar(v)?);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn angles() {
        assert_eq!(parse_angle("pi/2").unwrap(), std::f64::consts::FRAC_PI_2);
        assert_eq!(parse_angle("2pi/3").unwrap(), 2.0 * PI / 3.0);
        assert_eq!(parse_angle("-pi/4").unwrap(), -PI / 4.0);
        assert_eq!(parse_angle("0.5*pi").unwrap(), 0.5 * PI);
        assert_eq!(parse_angle("1.25").unwrap(), 1.25);
        assert_eq!(parse_angle("PI").unwrap(), PI);
        assert!(parse_angle("pi/0").is_err());
        assert!(parse_angle("tau").is_err());
        assert!(parse_angle("inf").is_err());
    }

    #[test]
    fn spans_and_horizons() {
        assert_eq!(parse_span("0:pi:200").unwrap(), Span { min: 0.0, max: PI, count: Some(200) });
        assert_eq!(parse_span("1:2").unwrap().count, None);
        assert_eq!(parse_span("3").unwrap(), Span { min: 3.0, max: 3.0, count: Some(1) });
        assert!(parse_span("2:1").is_err());
        assert!(parse_span("0:1:0").is_err());
        assert_eq!(parse_t_max("120:140").unwrap().0.len(), 21);
        assert_eq!(parse_t_max("5,7").unwrap().0, vec![5, 7]);
        assert!(parse_t_max("0:3").is_err());
        assert!(parse_point("1,0").is_err());
    }
}
