//! Batch front end: flags and TOML configs in, CSV or JSON tables out.
//!
//! Exit codes are `0` on success, `1` when a check fails or a computation
//! errors, and `2` on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::moments::{weighted_moments, WeightTag};
use crate::operators::{defect_b, defect_bbar, psd_sqrt, DEFAULT_RANK_TOL};
use crate::spaces::{density_approximate, kernel_identity_sides, KernelPoint, SbContext, DEFAULT_GRAM_TOL, KERNEL_POINT_RADIUS};
use crate::symbols::{parse_complex, parse_symbol, PolynomialVector, SymbolSpec};
use crate::verify::{random_disk_points, random_polynomials, run_all, CheckReport, ToleranceConfig, DEFAULT_SEED};

const USAGE: &str = "subbergman <subcommand> --symbol S [--N int] [--M int] [--n list] [--g spec] [--g-degree int] \
[--r real] [--k int] [--out path] [--format csv|json] [--seed int] [--config path] [--threads int] \
[--weight tag] [--timings]";

/// Symbols checked by `verify` when none are given.
pub const DEFAULT_CORPUS: [&str; 4] = ["poly:0,1", "poly:0.5,0.5", "const:0.6", "blaschke:0.5"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Verify,
    Norms,
    Density,
    Moments,
    Kernel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Default, Parser)]
#[command(name = "subbergman", version, about = "Sub-Bergman space computations", override_usage = USAGE)]
struct Args {
    #[arg(value_enum)]
    subcommand: Option<Subcommand>,
    /// Symbol, e.g. `poly:0.5,0.5`, `const:0.6i`, `blaschke:0.5;0.2i|1`. Repeatable for `verify`.
    #[arg(long, value_name = "S")]
    symbol: Vec<String>,
    /// Section size.
    #[arg(long = "N", value_name = "int")]
    n_size: Option<usize>,
    /// Gram size.
    #[arg(long = "M", value_name = "int")]
    m_size: Option<usize>,
    /// Comma-separated cutoffs for `density`.
    #[arg(long = "n", value_name = "list", value_delimiter = ',')]
    n_values: Option<Vec<usize>>,
    /// Test function: `geom:q`, `poly:c0,c1,..`, `mono:k` or `random`.
    #[arg(long, value_name = "spec")]
    g: Option<String>,
    #[arg(long = "g-degree", value_name = "int")]
    g_degree: Option<usize>,
    #[arg(long, value_name = "real")]
    r: Option<f64>,
    #[arg(long, value_name = "int")]
    k: Option<usize>,
    #[arg(long, value_name = "path")]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// Seed for random samples (decimal or 0x-prefixed hex).
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long, value_name = "path")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "int", env = "SUBBERGMAN_THREADS")]
    threads: Option<usize>,
    /// Moment weight: `plain`, `mod_b_squared` or `one_minus_mod_b_squared`.
    #[arg(long, value_parser = WeightTag::from_str)]
    weight: Option<WeightTag>,
    /// Include per-check runtimes in `verify` output.
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum OneOrMany {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    subcommand: Option<Subcommand>,
    symbol: Option<OneOrMany>,
    #[serde(rename = "N")]
    n_size: Option<usize>,
    #[serde(rename = "M")]
    m_size: Option<usize>,
    #[serde(rename = "n")]
    n_values: Option<Vec<usize>>,
    g: Option<String>,
    #[serde(alias = "g-degree")]
    g_degree: Option<usize>,
    r: Option<f64>,
    k: Option<usize>,
    out: Option<PathBuf>,
    format: Option<OutputFormat>,
    seed: Option<u64>,
    threads: Option<usize>,
    weight: Option<WeightTag>,
    timings: Option<bool>,
    eig_tol: Option<f64>,
    norm_rel_tol: Option<f64>,
    exact_tol: Option<f64>,
    samples: Option<usize>,
}

/// Fully resolved invocation. Unset sizes fall back to per-subcommand defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub symbols: Vec<String>,
    pub n_size: Option<usize>,
    pub m_size: Option<usize>,
    pub n_values: Option<Vec<usize>>,
    pub g: Option<String>,
    pub g_degree: Option<usize>,
    pub r: Option<f64>,
    pub k: Option<usize>,
    pub output_path: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub threads: Option<usize>,
    pub weight: Option<WeightTag>,
    pub timings: bool,
    pub eig_tol: Option<f64>,
    pub norm_rel_tol: Option<f64>,
    pub exact_tol: Option<f64>,
    pub samples: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Run(Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}\n\nUsage: {USAGE}"),
            CliError::Run(err) => write!(f, "error [{}]: {err}", err.module()),
            CliError::Io(msg) => write!(f, "io error: {msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        CliError::Run(err)
    }
}

impl From<io::Error> for CliError {
    fn from(err: io::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(err: csv::Error) -> Self {
        CliError::Io(err.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_seed(text: &str) -> Result<u64, String> {
    let parsed = match text.strip_prefix("0x").or_else(|| text.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => text.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {text:?}: {e}"))
}

fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| usage(format!("malformed config {}: {e}", path.display())))
}

fn merge(file: ConfigFile, args: Option<Args>) -> Result<RunConfig, CliError> {
    let a = args.unwrap_or_default();
    let symbols = if !a.symbol.is_empty() {
        a.symbol
    } else {
        match file.symbol {
            Some(OneOrMany::One(s)) => vec![s],
            Some(OneOrMany::Many(v)) => v,
            None => Vec::new(),
        }
    };
    let cfg = RunConfig {
        subcommand: a
            .subcommand
            .or(file.subcommand)
            .ok_or_else(|| usage("missing subcommand (verify | norms | density | moments | kernel)"))?,
        symbols,
        n_size: a.n_size.or(file.n_size),
        m_size: a.m_size.or(file.m_size),
        n_values: a.n_values.or(file.n_values),
        g: a.g.or(file.g),
        g_degree: a.g_degree.or(file.g_degree),
        r: a.r.or(file.r),
        k: a.k.or(file.k),
        output_path: a.out.or(file.out),
        format: a.format.or(file.format).unwrap_or_default(),
        seed: a.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        threads: a.threads.or(file.threads),
        weight: a.weight.or(file.weight),
        timings: a.timings || file.timings.unwrap_or(false),
        eig_tol: file.eig_tol,
        norm_rel_tol: file.norm_rel_tol,
        exact_tol: file.exact_tol,
        samples: file.samples,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads a TOML config whose keys mirror the flags (`N`, `M`, `n`, `g_degree`, …).
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, CliError> {
    merge(read_config_file(path.as_ref())?, None)
}

/// Parses `argv` (including the program name); flags override `--config` values.
pub fn parse_args<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = Args::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    let file = match &args.config {
        Some(path) => read_config_file(path)?,
        None => ConfigFile::default(),
    };
    merge(file, Some(args))
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        for (name, v) in [("N", self.n_size), ("M", self.m_size), ("threads", self.threads), ("samples", self.samples)] {
            if v == Some(0) {
                return Err(usage(format!("{name} must be positive")));
            }
        }
        if let Some(ns) = &self.n_values {
            if ns.is_empty() {
                return Err(usage("n list is empty"));
            }
            if ns.windows(2).any(|w| w[0] >= w[1]) {
                return Err(usage("n values must be strictly ascending"));
            }
        }
        if let Some(r) = self.r {
            if !(r > 0.0 && r < 1.0) {
                return Err(usage(format!("r = {r} must lie in (0, 1)")));
            }
        }
        for (name, v) in [("eig_tol", self.eig_tol), ("norm_rel_tol", self.norm_rel_tol), ("exact_tol", self.exact_tol)] {
            if matches!(v, Some(t) if !(t > 0.0)) {
                return Err(usage(format!("{name} must be positive")));
            }
        }
        for s in &self.symbols {
            parse_symbol(s).map_err(|e| usage(e.to_string()))?;
        }
        if self.subcommand != Subcommand::Verify && self.symbols.len() > 1 {
            return Err(usage("only verify accepts several symbols"));
        }
        if let Some(g) = &self.g {
            parse_g(g, self.g_degree, self.seed)?;
        }
        Ok(())
    }

    fn single_symbol(&self) -> Result<SymbolSpec, CliError> {
        let text = self.symbols.first().ok_or_else(|| usage("--symbol is required"))?;
        Ok(parse_symbol(text)?)
    }

    pub fn tolerance_config(&self) -> ToleranceConfig {
        let mut cfg = ToleranceConfig {
            seed: self.seed,
            ..ToleranceConfig::default()
        };
        if let Some(n) = self.n_size {
            cfg.section_size = n;
        }
        if let Some(m) = self.m_size {
            cfg.gram_size = m;
        }
        if let Some(t) = self.eig_tol {
            cfg.eig_tol = t;
        }
        if let Some(t) = self.norm_rel_tol {
            cfg.norm_rel_tol = t;
        }
        if let Some(t) = self.exact_tol {
            cfg.exact_tol = t;
        }
        if let Some(s) = self.samples {
            cfg.samples = s;
        }
        if let Some(k) = self.k {
            cfg.distance_ks = vec![k];
        }
        if let Some(r) = self.r {
            cfg.distance_radii = vec![r];
        }
        cfg
    }
}

/// Builds a test function from `geom:q` (the Taylor polynomial of `1/(1 - qz)`
/// of the given degree, default 40), `poly:c0,c1,..`, `mono:k` or `random`.
pub fn parse_g(spec: &str, degree: Option<usize>, seed: u64) -> Result<PolynomialVector, CliError> {
    let spec = spec.trim();
    let bad = |reason: String| usage(format!("invalid g spec {spec:?}: {reason}"));
    if let Some(q) = spec.strip_prefix("geom:") {
        let q = parse_complex(q).map_err(|e| bad(e.to_string()))?;
        return Ok(PolynomialVector::geometric(q, degree.unwrap_or(40)));
    }
    if let Some(list) = spec.strip_prefix("poly:") {
        let coeffs = list
            .split(',')
            .map(|c| parse_complex(c).map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(PolynomialVector::new(coeffs));
    }
    if let Some(k) = spec.strip_prefix("mono:") {
        let k: usize = k.trim().parse().map_err(|e| bad(format!("{e}")))?;
        return Ok(PolynomialVector::monomial(k, Complex64::new(1.0, 0.0)));
    }
    if spec == "random" {
        return Ok(random_polynomials(seed, 1, degree.unwrap_or(12)).remove(0));
    }
    Err(bad("expected geom:q, poly:c0,c1,.., mono:k or random".into()))
}

fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormRecord {
    pub symbol: String,
    pub space: String,
    pub degree: Option<usize>,
    pub norm: f64,
    pub residual: f64,
    #[serde(rename = "N")]
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub w: Complex64,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub gap: f64,
}

/// What a subcommand produced, ready to encode.
enum Table {
    Checks(Vec<CheckReport>, bool),
    Norms(Vec<NormRecord>),
    Density(crate::spaces::ApproximationReport),
    Moments(crate::moments::MomentMatrix),
    Kernel(Vec<KernelRecord>),
}

fn compute(cfg: &RunConfig) -> Result<Table, CliError> {
    match cfg.subcommand {
        Subcommand::Verify => {
            let texts: Vec<String> = if cfg.symbols.is_empty() {
                DEFAULT_CORPUS.iter().map(|s| s.to_string()).collect()
            } else {
                cfg.symbols.clone()
            };
            let symbols = texts.iter().map(|s| parse_symbol(s)).collect::<Result<Vec<_>, _>>()?;
            let mut reports = run_all(&cfg.tolerance_config(), &symbols);
            if !cfg.timings {
                reports.iter_mut().for_each(|r| r.runtime_ms = None);
            }
            Ok(Table::Checks(reports, cfg.timings))
        }
        Subcommand::Norms => {
            let b = cfg.single_symbol()?;
            let n = cfg.n_size.unwrap_or(64);
            let fs = match &cfg.g {
                Some(g) => vec![parse_g(g, cfg.g_degree, cfg.seed)?],
                None => (0..=cfg.k.unwrap_or(8))
                    .map(|k| PolynomialVector::monomial(k, Complex64::new(1.0, 0.0)))
                    .collect(),
            };
            Ok(Table::Norms(norm_records(&b, &fs, n)?))
        }
        Subcommand::Density => {
            let b = cfg.single_symbol()?;
            let g = parse_g(cfg.g.as_deref().unwrap_or("geom:0.5"), cfg.g_degree, cfg.seed)?;
            let ns = cfg.n_values.clone().unwrap_or_else(|| vec![2, 4, 8, 16, 32]);
            Ok(Table::Density(density_approximate(&b, &g, &ns, cfg.m_size.unwrap_or(72))?))
        }
        Subcommand::Moments => {
            let b = cfg.single_symbol()?;
            let weight = cfg.weight.unwrap_or(WeightTag::OneMinusModBSquared);
            Ok(Table::Moments(weighted_moments(&b, cfg.n_size.unwrap_or(8), weight)?))
        }
        Subcommand::Kernel => {
            let b = cfg.single_symbol()?;
            let m = cfg.m_size.unwrap_or(32);
            let q = parse_g(cfg.g.as_deref().unwrap_or("random"), cfg.g_degree, cfg.seed)?;
            let radius = cfg.r.unwrap_or(KERNEL_POINT_RADIUS).min(KERNEL_POINT_RADIUS);
            let records = random_disk_points(cfg.seed, 20, radius)
                .into_iter()
                .map(|w| {
                    let (lhs, rhs) = kernel_identity_sides(&b, &q, KernelPoint::new(w)?, m)?;
                    Ok(KernelRecord {
                        w,
                        lhs,
                        rhs,
                        gap: (lhs - rhs).norm(),
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            Ok(Table::Kernel(records))
        }
    }
}

/// `A2`, `A(b)` and `A(bbar)` norms of each `f`. Blaschke symbols skip `A(b)`
/// and reach `A(bbar)` through the `S_b` preimage with Gram size `N`.
pub fn norm_records(b: &SymbolSpec, fs: &[PolynomialVector], n: usize) -> Result<Vec<NormRecord>, Error> {
    let symbol = b.to_string();
    let record = |space: &str, f: &PolynomialVector, norm: f64, residual: f64| NormRecord {
        symbol: symbol.clone(),
        space: space.to_string(),
        degree: f.degree(),
        norm,
        residual,
        n,
    };
    let mut out = Vec::new();
    match b {
        SymbolSpec::Blaschke { .. } => {
            let ctx = SbContext::new(b, n, DEFAULT_GRAM_TOL)?;
            for f in fs {
                out.push(record("A2", f, f.a2_norm(), 0.0));
                let pre = ctx.preimage(f)?;
                out.push(record("A(bbar)", f, pre.norm, pre.residual));
            }
        }
        _ => {
            let qb = defect_b(b, n)?;
            let qbb = defect_bbar(b, n)?;
            let fb = psd_sqrt(&qb, DEFAULT_RANK_TOL)?;
            let fbb = psd_sqrt(&qbb, DEFAULT_RANK_TOL)?;
            for f in fs {
                out.push(record("A2", f, f.a2_norm(), 0.0));
                let rb = fb.range_norm(f)?;
                out.push(record("A(b)", f, rb.norm, rb.residual));
                let rbb = fbb.range_norm(f)?;
                out.push(record("A(bbar)", f, rbb.norm, rbb.residual));
            }
        }
    }
    Ok(out)
}

fn write_table(table: &Table, format: OutputFormat, out: &mut dyn Write) -> Result<(), CliError> {
    if format == OutputFormat::Json {
        let text = match table {
            Table::Checks(r, _) => serde_json::to_string_pretty(r),
            Table::Norms(r) => serde_json::to_string_pretty(r),
            Table::Density(r) => serde_json::to_string_pretty(r),
            Table::Moments(m) => serde_json::to_string_pretty(&m.to_json()),
            Table::Kernel(r) => serde_json::to_string_pretty(r),
        }
        .map_err(|e| CliError::Io(e.to_string()))?;
        writeln!(out, "{text}")?;
        return Ok(());
    }
    let mut w = csv::Writer::from_writer(out);
    match table {
        Table::Checks(reports, timings) => {
            let mut header = vec!["check_name", "symbol", "parameters", "measured", "bound_or_target", "passed"];
            if *timings {
                header.push("runtime_ms");
            }
            w.write_record(&header)?;
            for r in reports {
                let mut row = vec![
                    r.check_name.clone(),
                    r.symbol.clone(),
                    r.parameter_string(),
                    fmt_f(r.measured),
                    fmt_f(r.bound_or_target),
                    r.passed.to_string(),
                ];
                if *timings {
                    row.push(r.runtime_ms.map(|t| t.to_string()).unwrap_or_default());
                }
                w.write_record(&row)?;
            }
        }
        Table::Norms(records) => {
            w.write_record(["symbol", "space", "degree", "norm", "residual", "N"])?;
            for r in records {
                w.write_record([
                    r.symbol.clone(),
                    r.space.clone(),
                    r.degree.map(|d| d.to_string()).unwrap_or_default(),
                    fmt_f(r.norm),
                    fmt_f(r.residual),
                    r.n.to_string(),
                ])?;
            }
        }
        Table::Density(report) => {
            w.write_record(["n", "error", "tail_max", "degree_of_p"])?;
            for s in &report.steps {
                w.write_record([
                    s.n.to_string(),
                    fmt_f(s.error),
                    fmt_f(s.tail_max),
                    s.degree_of_p.map(|d| d.to_string()).unwrap_or_default(),
                ])?;
            }
        }
        Table::Moments(m) => {
            w.write_record(["j", "k", "re", "im"])?;
            for j in 0..m.size() {
                for k in 0..m.size() {
                    let v = m.get(j, k);
                    w.write_record([j.to_string(), k.to_string(), fmt_f(v.re), fmt_f(v.im)])?;
                }
            }
        }
        Table::Kernel(records) => {
            w.write_record(["w_re", "w_im", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap"])?;
            for r in records {
                w.write_record(
                    [r.w.re, r.w.im, r.lhs.re, r.lhs.im, r.rhs.re, r.rhs.im, r.gap].map(fmt_f),
                )?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Runs a resolved config, writing to `output_path` or stdout. Returns the
/// exit code.
pub fn run(cfg: &RunConfig) -> Result<i32, CliError> {
    let table = match cfg.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::Io(e.to_string()))?
            .install(|| compute(cfg))?,
        None => compute(cfg)?,
    };
    match &cfg.output_path {
        Some(path) => {
            let mut file = io::BufWriter::new(fs::File::create(path)?);
            write_table(&table, cfg.format, &mut file)?;
            file.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_table(&table, cfg.format, &mut lock)?;
        }
    }
    let failed = match &table {
        Table::Checks(reports, _) => reports.iter().filter(|r| !r.passed).count(),
        _ => 0,
    };
    if failed > 0 {
        eprintln!("{failed} check(s) failed");
        return Ok(1);
    }
    Ok(0)
}

pub fn main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let args = match Args::try_parse_from(&argv) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let file = match &args.config {
        Some(path) => read_config_file(path),
        None => Ok(ConfigFile::default()),
    };
    let result = file.and_then(|f| merge(f, Some(args))).and_then(|cfg| run(&cfg));
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("{err}");
            match err {
                CliError::Usage(_) => 2,
                _ => 1,
            }
        }
    }
}
