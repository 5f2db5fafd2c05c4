//! `eigpath` command-line driver.
//!
//! Exit status: 0 on success, 1 on usage or IO errors, 2 when the numerics
//! fail (non-simple eigenvalue, Newton divergence, domain errors).

// `!(a <= b)` is used on purpose: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod problem;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use eigpath::analysis::{
    bench_complexity, error_report, fmt17, histogram, histogram_csv, linspace, sample_eigenvalues, timing_csv, SampleMethod,
};
use eigpath::chebyshev::{cheb_expand_all, ChebRequest};
use eigpath::taylor::{taylor_expand_all, taylor_expand_eigenpair, Selector, TaylorRequest};
use eigpath::{EigenPairSeries, ParametricProblem};
use serde_json::Value;

use output::Manifest;
use problem::ProblemSpec;

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }
}

impl From<eigpath::Error> for Failure {
    fn from(e: eigpath::Error) -> Self {
        Failure { code: if e.is_numerical() { 2 } else { 1 }, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(format!("io: {e}"))
    }
}

#[derive(Parser)]
#[command(name = "eigpath", version, about = "Series expansions of parametric eigenpairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand eigenpairs in a Taylor or Chebyshev basis; one JSON file per pair.
    Expand(ExpandArgs),
    /// Compare series files with direct eigensolves on a grid.
    Report(ReportArgs),
    /// Monte-Carlo sampling of tracked eigenvalues.
    Sample(SampleArgs),
    /// Time the Taylor expansion of all eigenpairs over (n, p) combinations.
    Bench(BenchArgs),
}

#[derive(Args)]
struct ProblemArgs {
    /// example1 | example2 | example3 | config:<path>
    #[arg(long)]
    problem: String,
    /// Matrix size for the built-in examples.
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Args)]
struct SeriesArgs {
    /// Taylor expansion point.
    #[arg(long, allow_negative_numbers = true)]
    mu0: Option<f64>,
    /// Chebyshev interval `a,b`.
    #[arg(long, value_parser = parse_interval, allow_hyphen_values = true)]
    interval: Option<(f64, f64)>,
    #[arg(long)]
    order: usize,
    /// `all`, or zero-based positions in the spectrum sorted by descending
    /// real part, e.g. `1,2`.
    #[arg(long, default_value = "all")]
    eig: String,
    /// Quadrature nodes for the Chebyshev projection.
    #[arg(long)]
    quad_m: Option<usize>,
    /// Round the bordered matrix to single precision (Taylor only).
    #[arg(long)]
    single_precision_e: bool,
}

#[derive(Args)]
struct ExpandArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// taylor | chebyshev
    #[arg(long)]
    method: String,
    #[command(flatten)]
    series: SeriesArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, num_args = 1.., required = true)]
    series: Vec<PathBuf>,
    /// `a,b,count`
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: (f64, f64, usize),
    /// Comma list of eig-error, vec-deviation, rayleigh.
    #[arg(long, default_value = "eig-error,vec-deviation")]
    metrics: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Expansion used by the series-based methods; `--mu0` selects Taylor,
    /// `--interval` Chebyshev.
    #[command(flatten)]
    series: SeriesArgs,
    /// Normal distribution `mean,stddev`.
    #[arg(long, value_parser = parse_interval_unordered, allow_hyphen_values = true)]
    dist: (f64, f64),
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// taylor-eval | cheb-eval | rayleigh | direct
    #[arg(long)]
    method: String,
    /// Second method run on the same samples, for histograms and speedup.
    #[arg(long)]
    compare: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// example1 | example2 | example3
    #[arg(long)]
    problem: String,
    #[arg(long, allow_negative_numbers = true)]
    mu0: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<usize>,
    /// Each timing repeats the expansion for at least this long.
    #[arg(long, default_value_t = 0.05)]
    min_seconds: f64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_floats(text: &str, count: usize) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != count {
        return Err(format!("expected {count} comma-separated values, got '{text}'"));
    }
    parts.iter().map(|p| p.parse::<f64>().map_err(|e| format!("'{p}': {e}"))).collect()
}

fn parse_interval(text: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(text, 2)?;
    if !(v[0] < v[1]) {
        return Err(format!("interval needs a < b, got {text}"));
    }
    Ok((v[0], v[1]))
}

fn parse_interval_unordered(text: &str) -> Result<(f64, f64), String> {
    let v = parse_floats(text, 2)?;
    Ok((v[0], v[1]))
}

fn parse_grid(text: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("expected a,b,count, got '{text}'"));
    }
    let a = parts[0].parse::<f64>().map_err(|e| e.to_string())?;
    let b = parts[1].parse::<f64>().map_err(|e| e.to_string())?;
    let count = parts[2].parse::<usize>().map_err(|e| e.to_string())?;
    if count == 0 {
        return Err("grid count must be positive".into());
    }
    if !(a <= b) {
        return Err(format!("grid needs a <= b, got {text}"));
    }
    Ok((a, b, count))
}

/// `None` selects every pair.
fn parse_eig(text: &str) -> Result<Option<Vec<usize>>, Failure> {
    if text == "all" {
        return Ok(None);
    }
    let list: Vec<usize> = text
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::usage(format!("--eig expects 'all' or indices, got '{text}'"))))
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err(Failure::usage("--eig is empty"));
    }
    Ok(Some(list))
}

#[derive(Clone, Copy, Debug)]
enum Expansion {
    Taylor { mu0: f64 },
    Chebyshev { lo: f64, hi: f64 },
}

fn resolve_expansion(method: Option<&str>, s: &SeriesArgs) -> Result<Expansion, Failure> {
    let e = match (method, s.mu0, s.interval) {
        (_, Some(_), Some(_)) => return Err(Failure::usage("give either --mu0 or --interval, not both")),
        (Some("taylor"), Some(mu0), None) | (None, Some(mu0), None) => Expansion::Taylor { mu0 },
        (Some("chebyshev"), None, Some((lo, hi))) | (None, None, Some((lo, hi))) => Expansion::Chebyshev { lo, hi },
        (Some("taylor"), None, _) => return Err(Failure::usage("--method taylor needs --mu0 (not --interval)")),
        (Some("chebyshev"), _, None) => return Err(Failure::usage("--method chebyshev needs --interval a,b (not --mu0)")),
        (None, None, None) => return Err(Failure::usage("give --mu0 (Taylor) or --interval a,b (Chebyshev)")),
        (Some(m), _, _) => return Err(Failure::usage(format!("unknown method '{m}' (expected taylor or chebyshev)"))),
    };
    if s.single_precision_e && matches!(e, Expansion::Chebyshev { .. }) {
        return Err(Failure::usage("--single-precision-e applies to Taylor expansions only"));
    }
    if s.quad_m.is_some() && matches!(e, Expansion::Taylor { .. }) {
        return Err(Failure::usage("--quad-m applies to Chebyshev expansions only"));
    }
    Ok(e)
}

/// Expands the requested pairs. Pairs not requested are dropped before
/// their failures can matter.
fn run_expansion(
    problem: &dyn ParametricProblem,
    e: Expansion,
    s: &SeriesArgs,
    wanted: &Option<Vec<usize>>,
) -> Result<Vec<(usize, eigpath::Result<EigenPairSeries>)>, Failure> {
    let n = problem.dim();
    if let Some(list) = wanted {
        if let Some(k) = list.iter().find(|&&k| k >= n) {
            return Err(Failure::usage(format!("--eig index {k} out of range for n = {n}")));
        }
    }
    let selector = match wanted.as_deref() {
        Some([k]) => Selector::Index(*k),
        _ => Selector::All,
    };
    let results = match e {
        Expansion::Taylor { mu0 } => {
            let mut req = TaylorRequest::new(mu0, s.order, selector);
            req.single_precision_e = s.single_precision_e;
            match selector {
                Selector::Index(k) => vec![(k, taylor_expand_eigenpair(problem, &req))],
                Selector::All => taylor_expand_all(problem, &req)?.into_iter().enumerate().collect(),
            }
        }
        Expansion::Chebyshev { lo, hi } => {
            let mut req = ChebRequest::new(lo, hi, s.order, selector);
            req.quad_m = s.quad_m;
            let all = cheb_expand_all(problem, &req)?;
            match selector {
                Selector::Index(k) => all.into_iter().map(|r| (k, r)).collect(),
                Selector::All => all.into_iter().enumerate().collect(),
            }
        }
    };
    Ok(match wanted {
        Some(list) if list.len() > 1 => {
            let mut by_index: Vec<Option<eigpath::Result<EigenPairSeries>>> = (0..n).map(|_| None).collect();
            for (k, r) in results {
                by_index[k] = Some(r);
            }
            list.iter().map(|&k| (k, by_index[k].take().unwrap_or_else(|| by_index_missing(k)))).collect()
        }
        _ => results,
    })
}

fn by_index_missing(k: usize) -> eigpath::Result<EigenPairSeries> {
    Err(eigpath::Error::InvalidArgument(format!("eigenpair {k} listed twice in --eig")))
}

fn record_series_params(m: &mut Manifest, problem: &ProblemSpec, e: Expansion, s: &SeriesArgs) {
    m.param("problem", problem.describe()).config_hash(problem.config_hash());
    match e {
        Expansion::Taylor { mu0 } => {
            m.param("method", "taylor").param("mu0", fmt17(mu0)).param("single_precision_e", s.single_precision_e);
        }
        Expansion::Chebyshev { lo, hi } => {
            let m_default = eigpath::chebyshev::default_quadrature_size(s.order);
            m.param("method", "chebyshev")
                .param("interval", format!("{},{}", fmt17(lo), fmt17(hi)))
                .param("quad_m", s.quad_m.unwrap_or(m_default));
        }
    }
    m.param("order", s.order).param("eig", &s.eig);
}

fn cmd_expand(a: &ExpandArgs) -> Result<(), Failure> {
    let e = resolve_expansion(Some(a.method.as_str()), &a.series)?;
    let spec = ProblemSpec::resolve(&a.problem.problem, a.problem.n)?;
    let problem = spec.build()?;
    let wanted = parse_eig(&a.series.eig)?;
    let results = run_expansion(problem.as_ref(), e, &a.series, &wanted)?;

    let mut manifest = Manifest::new("expand");
    record_series_params(&mut manifest, &spec, e, &a.series);
    let mut failures = Vec::new();
    for (k, r) in results {
        match r {
            Ok(s) => {
                let mut doc = s.to_json();
                doc["problem"] = spec.to_json();
                let text = serde_json::to_string_pretty(&doc).map_err(|e| Failure::usage(e.to_string()))?;
                manifest.emit(a.out.join(format!("pair_{k}.json")), text.as_bytes())?;
                if !s.diagnostics.collisions.is_empty() {
                    eprintln!("warning: pair {k} follows the same path as {:?}", s.diagnostics.collisions);
                }
            }
            Err(err) => {
                manifest.param(&format!("failed_pair_{k}"), &err);
                failures.push((k, err));
            }
        }
    }
    manifest.write(&a.out.join("manifest.txt"))?;
    if failures.is_empty() {
        return Ok(());
    }
    let text: Vec<String> = failures.iter().map(|(k, e)| format!("pair {k}: {e}")).collect();
    let code = if failures.iter().all(|(_, e)| e.is_numerical()) { 2 } else { 1 };
    Err(Failure { code, message: text.join("\n") })
}

fn load_series(paths: &[PathBuf]) -> Result<(ProblemSpec, Vec<EigenPairSeries>), Failure> {
    let mut spec: Option<ProblemSpec> = None;
    let mut out = Vec::with_capacity(paths.len());
    for path in paths {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let doc: Value = serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        let this = ProblemSpec::from_json(doc.get("problem").ok_or_else(|| Failure::usage(format!("{}: no problem record", path.display())))?)?;
        match &spec {
            Some(s) if *s != this => {
                return Err(Failure::usage(format!("{} was computed for a different problem", path.display())))
            }
            _ => spec = Some(this),
        }
        out.push(EigenPairSeries::from_json(&doc).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?);
    }
    Ok((spec.expect("at least one series"), out))
}

fn cmd_report(a: &ReportArgs) -> Result<(), Failure> {
    let mut rayleigh = false;
    for m in a.metrics.split(',').map(str::trim) {
        match m {
            "eig-error" | "vec-deviation" => {}
            "rayleigh" => rayleigh = true,
            other => return Err(Failure::usage(format!("unknown metric '{other}'"))),
        }
    }
    let (spec, series) = load_series(&a.series)?;
    let problem = spec.build()?;
    let (lo, hi, count) = a.grid;
    let report = error_report(problem.as_ref(), &series, &linspace(lo, hi, count), rayleigh)?;

    let mut manifest = Manifest::new("report");
    manifest
        .param("problem", spec.describe())
        .config_hash(spec.config_hash())
        .param("grid", format!("{},{},{count}", fmt17(lo), fmt17(hi)))
        .param("metrics", &a.metrics)
        .param("series", a.series.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(","));
    manifest.emit(a.out.join("report.csv"), report.to_csv().as_bytes())?;
    manifest.write(&a.out.join("manifest.txt"))?;

    println!("max_abs_err_lambda {}", fmt17(report.max_eig_error()));
    println!("median_abs_err_lambda {}", fmt17(report.median_eig_error()));
    println!("max_vec_deviation {}", fmt17(report.max_vec_deviation()));
    if let Some(m) = report.median_rayleigh_error() {
        println!("median_abs_err_rayleigh {}", fmt17(m));
    }
    Ok(())
}

fn sample_method(text: &str) -> Result<SampleMethod, Failure> {
    SampleMethod::parse(text)
        .ok_or_else(|| Failure::usage(format!("unknown sampling method '{text}' (taylor-eval, cheb-eval, rayleigh, direct)")))
}

fn cmd_sample(a: &SampleArgs) -> Result<(), Failure> {
    let e = resolve_expansion(None, &a.series)?;
    let mut methods = vec![sample_method(&a.method)?];
    if let Some(c) = &a.compare {
        methods.push(sample_method(c)?);
    }
    for m in &methods {
        match (m, e) {
            (SampleMethod::TaylorEval, Expansion::Chebyshev { .. }) => {
                return Err(Failure::usage("taylor-eval needs a Taylor expansion (--mu0)"))
            }
            (SampleMethod::ChebEval, Expansion::Taylor { .. }) => {
                return Err(Failure::usage("cheb-eval needs a Chebyshev expansion (--interval)"))
            }
            _ => {}
        }
    }
    let (mean, std_dev) = a.dist;
    if !(std_dev >= 0.0) {
        return Err(Failure::usage("standard deviation must be nonnegative"));
    }
    let spec = ProblemSpec::resolve(&a.problem.problem, a.problem.n)?;
    let problem = spec.build()?;
    let wanted = parse_eig(&a.series.eig)?;

    let start = Instant::now();
    let results = run_expansion(problem.as_ref(), e, &a.series, &wanted)?;
    let expansion_seconds = start.elapsed().as_secs_f64();
    let mut labels = Vec::new();
    let mut series = Vec::new();
    for (k, r) in results {
        labels.push(k);
        series.push(r?);
    }

    let mut manifest = Manifest::new("sample");
    record_series_params(&mut manifest, &spec, e, &a.series);
    manifest
        .seed(a.seed)
        .param("dist", format!("normal({},{})", fmt17(mean), fmt17(std_dev)))
        .param("count", a.count)
        .param("method", methods.iter().map(|m| m.name()).collect::<Vec<_>>().join(","));

    let mut summary = String::from("quantity,value\n");
    let mut sets = Vec::new();
    for (i, &m) in methods.iter().enumerate() {
        let set = sample_eigenvalues(problem.as_ref(), &series, mean, std_dev, a.count as usize, a.seed, m)?;
        let file = if i == 0 { "samples.csv".to_string() } else { format!("samples_{}.csv", m.name()) };
        manifest.emit(a.out.join(file), set.to_csv(&labels).as_bytes())?;
        let expansion = if m == SampleMethod::Direct { 0.0 } else { expansion_seconds };
        let sampling = set.setup_seconds + set.eval_seconds;
        for (q, v) in [("expansion_seconds", expansion), ("sampling_seconds", sampling), ("total_seconds", expansion + sampling)] {
            summary.push_str(&format!("{}.{q},{}\n", m.name(), fmt17(v)));
        }
        sets.push((set, sampling, expansion + sampling));
    }
    if let [(first, s_first, t_first), (second, s_second, t_second)] = &sets[..] {
        // Factors by which the primary method beats the comparison, without
        // and with the one-time expansion cost.
        summary.push_str(&format!("speedup,{}\n", fmt17(s_second / s_first)));
        summary.push_str(&format!("speedup_with_setup,{}\n", fmt17(t_second / t_first)));
        println!("speedup {:.2} (sampling only), {:.2} (with setup)", s_second / s_first, t_second / t_first);
        for (j, label) in labels.iter().enumerate() {
            let bins = histogram(&first.track(j), &second.track(j));
            let csv = histogram_csv(&bins, first.method.name(), second.method.name());
            manifest.emit(a.out.join(format!("histogram_pair{label}.csv")), csv.as_bytes())?;
        }
    }
    manifest.emit(a.out.join("summary.csv"), summary.as_bytes())?;
    manifest.write(&a.out.join("manifest.txt"))?;
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), Failure> {
    if a.problem.starts_with("config:") {
        return Err(Failure::usage("bench needs a built-in problem family (example1, example2, example3)"));
    }
    // Validates the name up front.
    ProblemSpec::resolve(&a.problem, Some(a.n_list[0]))?;
    if !(a.min_seconds >= 0.0) {
        return Err(Failure::usage("--min-seconds must be nonnegative"));
    }
    let name = a.problem.clone();
    let family = move |n: usize| -> eigpath::Result<Box<dyn ParametricProblem>> {
        ProblemSpec::Builtin { name: name.clone(), n }.build().map_err(|f| eigpath::Error::InvalidArgument(f.message))
    };
    let rows = bench_complexity(&family, a.mu0, &a.n_list, &a.p_list, a.min_seconds)?;
    let mut manifest = Manifest::new("bench");
    manifest
        .param("problem", &a.problem)
        .param("mu0", fmt17(a.mu0))
        .param("n_list", a.n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
        .param("p_list", a.p_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(","))
        .param("min_seconds", a.min_seconds);
    for r in rows.iter().filter(|r| r.failed_pairs > 0) {
        manifest.param(&format!("non_simple_pairs_n{}_p{}", r.n, r.p), r.failed_pairs);
    }
    manifest.emit(a.out.join("timing.csv"), timing_csv(&rows).as_bytes())?;
    manifest.write(&a.out.join("manifest.txt"))?;
    print!("{}", timing_csv(&rows));
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Failure> {
    match &cli.command {
        Command::Expand(a) => cmd_expand(a),
        Command::Report(a) => cmd_report(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
