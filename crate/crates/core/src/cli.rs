//! Command-line front end: argument definitions, config-file merging, and the
//! writers behind each subcommand.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::aiet::family_member;
use crate::classify::{classify_direction, classify_parameter_t, slope_of_parameter, Caps};
use crate::exactnum::{q, ProjPoint, Rational};
use crate::rauzy::coverage_measure;
use crate::schottky::{limit_set_approx, veech_checks};
use crate::surface::{first_return_direction, trace_leaf};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: String, source: io::Error },
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::ChecksFailed(_) => 1,
            CliError::Io { .. } => 2,
        }
    }

    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

#[derive(Debug, Parser)]
#[command(name = "disco", version, about = "Directional dynamics of the Disco dilation surface")]
pub struct Cli {
    /// key=value file; command-line flags take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify one direction and print the verdict as JSON
    Classify(ClassifyArgs),
    /// ω-limit sweep over a range of t (CSV rows `t,x` or an SVG scatter)
    Sweep(SweepArgs),
    /// Ping-pong intervals approximating the limit set
    Limitset(LimitsetArgs),
    /// Measure of the stopping windows with words of length at most k
    Coverage(CoverageArgs),
    /// Self-checks on the Veech group generators
    Veech,
    /// Print the return map of a direction as `x_lo x_hi slope intercept`
    DumpMap(DirectionArgs),
    /// Follow one leaf across the base edge
    Trace(TraceArgs),
}

#[derive(Debug, Args)]
pub struct DirectionArgs {
    /// slope dx/dy as p/q, integer, decimal, or `inf`
    #[arg(long, conflicts_with = "t", allow_hyphen_values = true)]
    pub slope: Option<String>,
    /// parameter t of F_t
    #[arg(long)]
    pub t: Option<String>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub direction: DirectionArgs,
    #[arg(long)]
    pub reduce_depth: Option<usize>,
    #[arg(long)]
    pub induction_steps: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(CliError::usage(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub t_min: Option<String>,
    #[arg(long)]
    pub t_max: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub burn_in: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct LimitsetArgs {
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub direction: DirectionArgs,
    /// start point on the base edge
    #[arg(long)]
    pub x: String,
    #[arg(long, default_value_t = 32)]
    pub crossings: usize,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Parsed `key=value` config file.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Config(HashMap<String, String>);

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = HashMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CliError::usage(format!("config line {}: expected key=value", n + 1)))?;
            map.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(Config(map))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|source| CliError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    /// Flag value if given, else the config value, else `None`.
    fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.0
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| CliError::usage(format!("config: bad value for {key}: `{v}`")))
            })
            .transpose()
    }
}

fn parse_rational(s: &str, what: &str) -> Result<Rational, CliError> {
    s.parse().map_err(|_| CliError::usage(format!("cannot parse {what} `{s}`")))
}

fn direction(args: &DirectionArgs, config: &Config) -> Result<ProjPoint, CliError> {
    let slope = config.pick(args.slope.clone(), "slope")?;
    let t = config.pick(args.t.clone(), "t")?;
    match (slope, t) {
        (Some(s), None) => s.parse().map_err(|_| CliError::usage(format!("cannot parse slope `{s}`"))),
        (None, Some(t)) => Ok(slope_of_parameter(&parse_rational(&t, "t")?)),
        (Some(_), Some(_)) => Err(CliError::usage("give exactly one of --slope and --t")),
        (None, None) => Err(CliError::usage("one of --slope or --t is required")),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub t_min: Rational,
    pub t_max: Rational,
    pub steps: usize,
    pub burn_in: usize,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            t_min: q(11, 100),
            t_max: q(13, 100),
            steps: 200,
            burn_in: 10_000,
            samples: 1_000,
            seed: 1,
            output: None,
            format: Format::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.t_min >= self.t_max {
            return Err(CliError::usage("t_min must be below t_max"));
        }
        if self.steps == 0 {
            return Err(CliError::usage("steps must be at least 1"));
        }
        Ok(())
    }

    fn from_args(args: &SweepArgs, config: &Config) -> Result<Self, CliError> {
        let d = SweepConfig::default();
        let rational = |flag: &Option<String>, key: &str, default: Rational| -> Result<Rational, CliError> {
            match config.pick(flag.clone(), key)? {
                Some(s) => parse_rational(&s, key),
                None => Ok(default),
            }
        };
        let cfg = SweepConfig {
            t_min: rational(&args.t_min, "t_min", d.t_min)?,
            t_max: rational(&args.t_max, "t_max", d.t_max)?,
            steps: config.pick(args.steps, "steps")?.unwrap_or(d.steps),
            burn_in: config.pick(args.burn_in, "burn_in")?.unwrap_or(d.burn_in),
            samples: config.pick(args.samples, "samples")?.unwrap_or(d.samples),
            seed: config.pick(args.seed, "seed")?.unwrap_or(d.seed),
            output: config.pick(args.output.clone(), "output")?,
            format: config.pick(args.format, "format")?.unwrap_or(d.format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Grid parameter `t_i = t_min + i·(t_max − t_min)/steps`.
    pub fn grid_point(&self, i: usize) -> Rational {
        let width = &self.t_max - &self.t_min;
        &self.t_min + &(width * q(i as i64, self.steps as i64))
    }
}

/// ω-limit samples for one grid parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepColumn {
    pub t: Rational,
    pub points: Vec<f64>,
}

/// Runs the sweep in parallel; the output order and every start point are
/// fixed by the seed alone.
pub fn sweep(cfg: &SweepConfig) -> Vec<SweepColumn> {
    (0..cfg.steps)
        .into_par_iter()
        .map(|i| {
            let t = cfg.grid_point(i);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i as u64);
            let x0: f64 = rng.gen();
            let points = family_member(&t).omega_limit_estimate(x0, cfg.burn_in, cfg.samples);
            SweepColumn { t, points }
        })
        .collect()
}

/// Number of distinct values after rounding to a grid of the given spacing.
pub fn distinct_count(points: &[f64], resolution: f64) -> usize {
    let mut cells: Vec<i64> = points.iter().map(|x| (x / resolution).round() as i64).collect();
    cells.sort_unstable();
    cells.dedup();
    cells.len()
}

pub fn sweep_csv(columns: &[SweepColumn]) -> String {
    let mut out = String::from("t,x\n");
    for col in columns {
        let t = col.t.to_f64();
        for x in &col.points {
            let _ = writeln!(out, "{t},{x}");
        }
    }
    out
}

pub fn sweep_svg(columns: &[SweepColumn], cfg: &SweepConfig) -> String {
    const W: f64 = 800.0;
    const H: f64 = 600.0;
    const MARGIN: f64 = 40.0;
    let (t0, t1) = (cfg.t_min.to_f64(), cfg.t_max.to_f64());
    let sx = |t: f64| MARGIN + (t - t0) / (t1 - t0) * (W - 2.0 * MARGIN);
    let sy = |x: f64| H - MARGIN - x * (H - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        W - 2.0 * MARGIN,
        H - 2.0 * MARGIN
    );
    let _ = writeln!(out, r#"<text x="{MARGIN}" y="{}" font-size="12">t = {t0}</text>"#, H - 12.0);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="12" text-anchor="end">t = {t1}</text>"#,
        W - MARGIN,
        H - 12.0
    );
    let _ = writeln!(out, r#"<g fill="black">"#);
    for col in columns {
        let x = sx(col.t.to_f64());
        let mut seen: Vec<i64> = col.points.iter().map(|p| (sy(*p) * 4.0).round() as i64).collect();
        seen.dedup();
        for y in seen {
            let _ = writeln!(out, r#"<rect x="{x:.2}" y="{:.2}" width="1" height="1"/>"#, y as f64 / 4.0);
        }
    }
    out.push_str("</g>\n</svg>\n");
    out
}

pub fn limitset_csv(depth: usize) -> String {
    let mut out = String::from("depth,lo_num,lo_den,hi_num,hi_den\n");
    let coords = |p: &ProjPoint| match p {
        ProjPoint::Infinity => ("1".to_string(), "0".to_string()),
        ProjPoint::Finite(x) => (x.numer().to_string(), x.denom().to_string()),
    };
    for d in 1..=depth {
        for arc in limit_set_approx(d) {
            let (ln, ld) = coords(&arc.lo);
            let (hn, hd) = coords(&arc.hi);
            let _ = writeln!(out, "{d},{ln},{ld},{hn},{hd}");
        }
    }
    out
}

pub fn coverage_csv(k_max: usize) -> String {
    let mut out = String::from("k,measure_num,measure_den,lower_bound\n");
    let ratio = q(5, 6);
    let mut power = Rational::one();
    for k in 0..=k_max {
        let m = coverage_measure(k);
        let bound = Rational::one() - &power;
        let _ = writeln!(out, "{k},{},{},{bound}", m.numer(), m.denom());
        power = &power * &ratio;
    }
    out
}

fn emit(output: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match output {
        Some(path) => {
            fs::write(path, text).map_err(|source| CliError::Io { path: path.display().to_string(), source })
        }
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Io { path: "<stdout>".into(), source }),
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Classify(args) => {
            let defaults = Caps::default();
            let caps = Caps {
                reduce_depth: config
                    .pick(args.reduce_depth, "reduce_depth")?
                    .unwrap_or(defaults.reduce_depth),
                induction_steps: config
                    .pick(args.induction_steps, "induction_steps")?
                    .unwrap_or(defaults.induction_steps),
            };
            let verdict = match (&args.direction.t, &args.direction.slope) {
                (Some(t), None) => classify_parameter_t(&parse_rational(t, "t")?, caps),
                _ => classify_direction(&direction(&args.direction, &config)?, caps),
            };
            emit(None, &format!("{}\n", verdict.to_json()), stdout)
        }
        Command::Sweep(args) => {
            let cfg = SweepConfig::from_args(&args, &config)?;
            let columns = sweep(&cfg);
            let text = match cfg.format {
                Format::Csv => sweep_csv(&columns),
                Format::Svg => sweep_svg(&columns, &cfg),
            };
            emit(cfg.output.as_deref(), &text, stdout)
        }
        Command::Limitset(args) => {
            let depth = config.pick(args.depth, "depth")?.unwrap_or(3);
            if depth == 0 {
                return Err(CliError::usage("depth must be at least 1"));
            }
            let output = config.pick(args.output, "output")?;
            emit(output.as_deref(), &limitset_csv(depth), stdout)
        }
        Command::Coverage(args) => {
            let k = config.pick(args.k, "k")?.unwrap_or(10);
            let output = config.pick(args.output, "output")?;
            emit(output.as_deref(), &coverage_csv(k), stdout)
        }
        Command::Veech => {
            let report = veech_checks();
            emit(None, &report.to_string(), stdout)?;
            match report.items.iter().filter(|i| !i.pass).count() {
                0 => Ok(()),
                n => Err(CliError::ChecksFailed(n)),
            }
        }
        Command::DumpMap(args) => {
            let p = direction(&args, &config)?;
            let map = first_return_direction(&p).map_err(|e| CliError::usage(e.to_string()))?;
            emit(None, &map.to_table(), stdout)
        }
        Command::Trace(args) => {
            let p = direction(&args.direction, &config)?;
            let x = parse_rational(&args.x, "x")?;
            let trace = trace_leaf(&x, &p, args.crossings).map_err(|e| CliError::usage(e.to_string()))?;
            emit(args.output.as_deref(), &trace.to_csv(), stdout)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("disco").chain(args.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut out = Vec::new();
        run(cli, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn classify_outputs() {
        let out = run_args(&["classify", "--t", "0/1"]).unwrap();
        assert!(out.contains(r#""tag":"CompletelyPeriodic""#));
        let out = run_args(&["classify", "--slope", "inf"]).unwrap();
        assert!(out.contains("CompletelyPeriodic"));
        let out = run_args(&["classify", "--slope", "3/2"]).unwrap();
        assert!(out.contains("TrivialAttractor") && out.contains(r#""multiplier":"1/2""#));
        let out = run_args(&["classify", "--slope", "-7/3"]).unwrap();
        assert!(out.contains("tag"));
        assert!(matches!(run_args(&["classify", "--slope", "x"]), Err(CliError::Usage(_))));
        assert!(run_args(&["classify"]).is_err());
        assert!(run_args(&["classify", "--slope", "1", "--t", "0"]).is_err());
    }

    #[test]
    fn coverage_and_limitset() {
        let out = run_args(&["coverage", "--k", "1"]).unwrap();
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("k,measure_num,measure_den,lower_bound"));
        assert_eq!(lines.next(), Some("0,1,3,0"));
        assert_eq!(lines.next(), Some("1,13,21,1/6"));

        let out = run_args(&["limitset", "--depth", "2"]).unwrap();
        assert_eq!(out.lines().count(), 1 + 4 + 12);
        assert!(out.lines().any(|l| l == "1,3,1,1,0"));
    }

    #[test]
    fn veech_and_dump() {
        let out = run_args(&["veech"]).unwrap();
        assert!(out.lines().all(|l| l.starts_with("PASS")));
        let out = run_args(&["dump-map", "--t", "0"]).unwrap();
        assert_eq!(out.lines().next(), Some("0 1/6 2 1/6"));
        assert!(run_args(&["dump-map", "--slope", "inf"]).is_err());
    }

    #[test]
    fn config_merging() {
        let cfg = Config::parse("# sweep\nsteps = 3\nseed=9\nt-min=1/10\n").unwrap();
        let args = SweepArgs {
            t_min: None,
            t_max: None,
            steps: Some(5),
            burn_in: None,
            samples: None,
            seed: None,
            output: None,
            format: None,
        };
        let merged = SweepConfig::from_args(&args, &cfg).unwrap();
        assert_eq!(merged.steps, 5);
        assert_eq!(merged.seed, 9);
        assert_eq!(merged.t_min, q(1, 10));
        assert!(Config::parse("novalue").is_err());
    }

    #[test]
    fn sweep_is_deterministic() {
        let cfg = SweepConfig { steps: 4, burn_in: 100, samples: 20, ..SweepConfig::default() };
        let a = sweep_csv(&sweep(&cfg));
        let b = sweep_csv(&sweep(&cfg));
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 1 + 4 * 20);
        let svg = sweep_svg(&sweep(&cfg), &cfg);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(distinct_count(&[0.1, 0.1000000001, 0.2], 1e-6), 2);
    }

    #[test]
    fn trace_csv() {
        let out = run_args(&["trace", "--slope", "0", "--x", "1/3", "--crossings", "2"]).unwrap();
        assert_eq!(out.lines().count(), 4);
    }
}
