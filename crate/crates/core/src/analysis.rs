//! Using expanded series: pointwise evaluation, comparison with direct
//! eigensolves, Monte-Carlo sampling and timing.

use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::eigenpair::EigenPairSeries;
use crate::error::{Error, Result};
use crate::linalg::{eigen_all, eigenvalues, phase_fix};
use crate::problems::ParametricProblem;
use crate::series::{CVector, C64};
use crate::taylor::{taylor_expand_all, Selector, TaylorRequest};

/// Below this norm an evaluated eigenvector is treated as vanished.
pub const DEGENERATE_NORM: f64 = 1e-14;
pub const HISTOGRAM_BINS: usize = 50;

/// `(lambda(mu), v(mu) / |v(mu)|)` with the phase of the vector fixed.
pub fn eigpath_eval(series: &EigenPairSeries, mu: f64) -> Result<(C64, CVector)> {
    let lambda = series.eigenvalue.eval(mu)?;
    let mut v = series.eigenvector.eval(mu)?;
    let norm = v.norm();
    if !(norm >= DEGENERATE_NORM) {
        return Err(Error::DegenerateEvaluation { mu, norm });
    }
    v /= C64::new(norm, 0.0);
    phase_fix(&mut v);
    Ok((lambda, v))
}

/// Rayleigh quotient `q^H A(mu) q` of the normalized series vector.
pub fn rayleigh_refine(problem: &dyn ParametricProblem, series: &EigenPairSeries, mu: f64) -> Result<C64> {
    let (_, q) = eigpath_eval(series, mu)?;
    let a = problem.eval(mu)?;
    Ok(q.dotc(&(a * &q)) / q.dotc(&q))
}

/// Greedy assignment of `estimates` to distinct entries of `direct`, taking
/// candidate pairs in order of increasing distance. Returns the index into
/// `direct` for every estimate.
pub fn greedy_match(estimates: &[C64], direct: &[C64]) -> Vec<usize> {
    let mut pairs: Vec<(f64, usize, usize)> = estimates
        .iter()
        .enumerate()
        .flat_map(|(i, e)| direct.iter().enumerate().map(move |(j, d)| ((e - d).norm(), i, j)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assigned = vec![usize::MAX; estimates.len()];
    let mut taken = vec![false; direct.len()];
    let mut left = estimates.len().min(direct.len());
    for (_, i, j) in pairs {
        if left == 0 {
            break;
        }
        if assigned[i] == usize::MAX && !taken[j] {
            assigned[i] = j;
            taken[j] = true;
            left -= 1;
        }
    }
    assigned
}

/// Errors of a set of series against direct eigensolves on a grid. Inner
/// vectors are indexed by series position.
#[derive(Clone, Debug, Default)]
pub struct ErrorReport {
    pub grid: Vec<f64>,
    /// Series label written to the `pair_index` column.
    pub labels: Vec<usize>,
    pub eig_errors: Vec<Vec<f64>>,
    /// `| |v_direct^H v(mu)| - 1 |` for the matched direct eigenvector.
    pub vec_deviation: Vec<Vec<f64>>,
    /// Errors of the Rayleigh quotient against the same matched eigenvalue.
    pub rayleigh_errors: Option<Vec<Vec<f64>>>,
    pub matching: Vec<Vec<usize>>,
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn max_of<'a>(rows: impl IntoIterator<Item = &'a Vec<f64>>) -> f64 {
    rows.into_iter().flatten().fold(0.0, |m, &x| if x.is_nan() || x > m { x } else { m })
}

impl ErrorReport {
    pub fn max_eig_error(&self) -> f64 {
        max_of(&self.eig_errors)
    }

    pub fn median_eig_error(&self) -> f64 {
        median(self.eig_errors.iter().flatten().copied().collect())
    }

    pub fn max_vec_deviation(&self) -> f64 {
        max_of(&self.vec_deviation)
    }

    /// Largest deviation over all series at each grid point.
    pub fn vec_deviation_per_mu(&self) -> Vec<f64> {
        self.vec_deviation.iter().map(|row| max_of([row])).collect()
    }

    /// Largest eigenvalue error over all series at each grid point.
    pub fn eig_error_per_mu(&self) -> Vec<f64> {
        self.eig_errors.iter().map(|row| max_of([row])).collect()
    }

    pub fn median_rayleigh_error(&self) -> Option<f64> {
        self.rayleigh_errors.as_ref().map(|r| median(r.iter().flatten().copied().collect()))
    }

    /// Columns `mu, pair_index, abs_err_lambda, vec_deviation`, plus
    /// `abs_err_rayleigh` when Rayleigh errors were computed.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("mu,pair_index,abs_err_lambda,vec_deviation");
        if self.rayleigh_errors.is_some() {
            out.push_str(",abs_err_rayleigh");
        }
        out.push('\n');
        for (g, mu) in self.grid.iter().enumerate() {
            for (s, label) in self.labels.iter().enumerate() {
                let _ = write!(out, "{},{},{},{}", fmt17(*mu), label, fmt17(self.eig_errors[g][s]), fmt17(self.vec_deviation[g][s]));
                if let Some(r) = &self.rayleigh_errors {
                    let _ = write!(out, ",{}", fmt17(r[g][s]));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Floating-point value with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![0.5 * (lo + hi)],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

/// Compares every series with a direct eigensolve at every grid point.
/// A series whose vector vanishes at some point gets deviation 1 there.
pub fn error_report(
    problem: &dyn ParametricProblem,
    series: &[EigenPairSeries],
    grid: &[f64],
    with_rayleigh: bool,
) -> Result<ErrorReport> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("error report needs a nonempty grid".into()));
    }
    if series.iter().any(|s| s.dim() != problem.dim()) {
        return Err(Error::InvalidArgument("series dimension differs from the problem".into()));
    }
    let mut report = ErrorReport {
        grid: grid.to_vec(),
        labels: series.iter().enumerate().map(|(k, s)| s.diagnostics.index.unwrap_or(k)).collect(),
        rayleigh_errors: with_rayleigh.then(Vec::new),
        ..ErrorReport::default()
    };
    for &mu in grid {
        let a = problem.eval(mu)?;
        let direct = eigen_all(&a, problem.hermitian())?;
        let estimates: Vec<C64> = series.iter().map(|s| s.eigenvalue.eval(mu)).collect::<Result<_>>()?;
        let matching = greedy_match(&estimates, &direct.values);
        let mut errs = Vec::with_capacity(series.len());
        let mut devs = Vec::with_capacity(series.len());
        let mut rq = Vec::with_capacity(series.len());
        for (s, (&j, est)) in series.iter().zip(matching.iter().zip(&estimates)) {
            if j == usize::MAX {
                errs.push(f64::INFINITY);
                devs.push(f64::INFINITY);
                rq.push(f64::INFINITY);
                continue;
            }
            errs.push((est - direct.values[j]).norm());
            match eigpath_eval(s, mu) {
                Ok((_, v)) => {
                    devs.push((direct.vectors[j].dotc(&v).norm() - 1.0).abs());
                    if with_rayleigh {
                        let q = v.dotc(&(&a * &v)) / v.dotc(&v);
                        rq.push((q - direct.values[j]).norm());
                    }
                }
                Err(Error::DegenerateEvaluation { .. }) => {
                    devs.push(1.0);
                    rq.push(f64::INFINITY);
                }
                Err(e) => return Err(e),
            }
        }
        report.eig_errors.push(errs);
        report.vec_deviation.push(devs);
        report.matching.push(matching);
        if let Some(r) = &mut report.rayleigh_errors {
            r.push(rq);
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleMethod {
    TaylorEval,
    ChebEval,
    Rayleigh,
    Direct,
}

impl SampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::TaylorEval => "taylor-eval",
            SampleMethod::ChebEval => "cheb-eval",
            SampleMethod::Rayleigh => "rayleigh",
            SampleMethod::Direct => "direct",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        Some(match text {
            "taylor-eval" => SampleMethod::TaylorEval,
            "cheb-eval" => SampleMethod::ChebEval,
            "rayleigh" => SampleMethod::Rayleigh,
            "direct" => SampleMethod::Direct,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug)]
pub struct SampleSet {
    pub seed: u64,
    pub mean: f64,
    pub std_dev: f64,
    pub method: SampleMethod,
    pub mus: Vec<f64>,
    /// `values[i][k]`: tracked eigenvalue `k` at sample `i`.
    pub values: Vec<Vec<C64>>,
    pub setup_seconds: f64,
    pub eval_seconds: f64,
}

/// Parameter `i` of a seeded sample: each sample owns a ChaCha stream, so
/// any subset can be regenerated without drawing the others.
pub fn sample_mu(seed: u64, i: u64, dist: &Normal<f64>) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i);
    dist.sample(&mut rng)
}

/// Draws `count` parameters from `N(mean, std_dev^2)` and evaluates the
/// eigenvalues tracked by `series` with `method`. Direct sampling solves the
/// full eigenproblem and follows each series by greedy matching.
pub fn sample_eigenvalues(
    problem: &dyn ParametricProblem,
    series: &[EigenPairSeries],
    mean: f64,
    std_dev: f64,
    count: usize,
    seed: u64,
    method: SampleMethod,
) -> Result<SampleSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    if series.is_empty() {
        return Err(Error::InvalidArgument("sampling needs at least one tracked series".into()));
    }
    let want_taylor = match method {
        SampleMethod::TaylorEval => Some(true),
        SampleMethod::ChebEval => Some(false),
        _ => None,
    };
    if let Some(t) = want_taylor {
        if series.iter().any(|s| s.basis().is_taylor() != t) {
            return Err(Error::InvalidArgument(format!("method {} does not match the series basis", method.name())));
        }
    }
    let dist = Normal::new(mean, std_dev).map_err(|e| Error::InvalidArgument(format!("normal distribution: {e}")))?;

    let setup = Instant::now();
    let mus: Vec<f64> = (0..count as u64).map(|i| sample_mu(seed, i, &dist)).collect();
    let setup_seconds = setup.elapsed().as_secs_f64();

    let eval = Instant::now();
    let values = mus
        .iter()
        .map(|&mu| -> Result<Vec<C64>> {
            match method {
                SampleMethod::TaylorEval | SampleMethod::ChebEval => series.iter().map(|s| s.eigenvalue.eval(mu)).collect(),
                SampleMethod::Rayleigh => series.iter().map(|s| rayleigh_refine(problem, s, mu)).collect(),
                SampleMethod::Direct => {
                    let direct = eigenvalues(&problem.eval(mu)?, problem.hermitian())?;
                    let est: Vec<C64> = series.iter().map(|s| s.eigenvalue.eval(mu)).collect::<Result<_>>()?;
                    Ok(greedy_match(&est, &direct).into_iter().map(|j| direct[j]).collect())
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let eval_seconds = eval.elapsed().as_secs_f64();
    Ok(SampleSet { seed, mean, std_dev, method, mus, values, setup_seconds, eval_seconds })
}

impl SampleSet {
    /// Real parts of tracked eigenvalue `k` across the samples.
    pub fn track(&self, k: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[k].re).collect()
    }

    /// Columns `sample, mu, lambda_<k>_re, lambda_<k>_im, ...`.
    pub fn to_csv(&self, labels: &[usize]) -> String {
        let mut out = String::from("sample,mu");
        for l in labels {
            let _ = write!(out, ",lambda_{l}_re,lambda_{l}_im");
        }
        out.push('\n');
        for (i, (mu, row)) in self.mus.iter().zip(&self.values).enumerate() {
            let _ = write!(out, "{i},{}", fmt17(*mu));
            for z in row {
                let _ = write!(out, ",{},{}", fmt17(z.re), fmt17(z.im));
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count_a: usize,
    pub count_b: usize,
}

/// Counts `a` and `b` in [`HISTOGRAM_BINS`] equal bins over their joint
/// range. The last bin is closed; non-finite values are skipped.
pub fn histogram(a: &[f64], b: &[f64]) -> Vec<HistogramBin> {
    let finite = a.iter().chain(b).copied().filter(|x| x.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    } else if hi == lo {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let width = (hi - lo) / HISTOGRAM_BINS as f64;
    let mut bins: Vec<HistogramBin> = (0..HISTOGRAM_BINS)
        .map(|k| HistogramBin {
            lo: lo + k as f64 * width,
            hi: if k + 1 == HISTOGRAM_BINS { hi } else { lo + (k + 1) as f64 * width },
            count_a: 0,
            count_b: 0,
        })
        .collect();
    let slot = |x: f64| (((x - lo) / width) as usize).min(HISTOGRAM_BINS - 1);
    for &x in a.iter().filter(|x| x.is_finite()) {
        bins[slot(x)].count_a += 1;
    }
    for &x in b.iter().filter(|x| x.is_finite()) {
        bins[slot(x)].count_b += 1;
    }
    bins
}

pub fn histogram_csv(bins: &[HistogramBin], name_a: &str, name_b: &str) -> String {
    let mut out = format!("bin_lo,bin_hi,count_{name_a},count_{name_b}\n");
    for b in bins {
        let _ = writeln!(out, "{},{},{},{}", fmt17(b.lo), fmt17(b.hi), b.count_a, b.count_b);
    }
    out
}

/// Wall-clock seconds per call of `f`, as the median of three measurements.
/// Each measurement repeats `f` until at least `min_seconds` have passed.
pub fn time_median3<T>(min_seconds: f64, mut f: impl FnMut() -> Result<T>) -> Result<f64> {
    let mut samples = Vec::with_capacity(3);
    for _ in 0..3 {
        let start = Instant::now();
        let mut calls = 0u32;
        loop {
            std::hint::black_box(f()?);
            calls += 1;
            let elapsed = start.elapsed().as_secs_f64();
            if elapsed >= min_seconds {
                samples.push(elapsed / calls as f64);
                break;
            }
        }
    }
    Ok(median(samples))
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub n: usize,
    pub p: usize,
    pub seconds: f64,
    /// Time relative to the previous row; NaN for the first.
    pub ratio: f64,
    /// Eigenpairs rejected as non-simple. They still cost their factorization.
    pub failed_pairs: usize,
}

/// Times `taylor_expand_all` for every `(n, p)` in the order `n` outer, `p`
/// inner, and reports each time relative to the previous row. Large smooth
/// kernels have numerically clustered spectral tails, so individual pairs may
/// fail; they are counted, not fatal.
pub fn bench_complexity(
    family: &dyn Fn(usize) -> Result<Box<dyn ParametricProblem>>,
    mu0: f64,
    n_list: &[usize],
    p_list: &[usize],
    min_seconds: f64,
) -> Result<Vec<TimingRow>> {
    if n_list.is_empty() || p_list.is_empty() {
        return Err(Error::InvalidArgument("benchmark needs nonempty n and p lists".into()));
    }
    let mut rows: Vec<TimingRow> = Vec::new();
    for &n in n_list {
        let problem = family(n)?;
        for &p in p_list {
            let req = TaylorRequest::new(mu0, p, Selector::All);
            let mut failed_pairs = 0;
            let seconds = time_median3(min_seconds, || {
                let all = taylor_expand_all(problem.as_ref(), &req)?;
                failed_pairs = all.iter().filter(|r| r.is_err()).count();
                Ok(all)
            })?;
            let ratio = rows.last().map_or(f64::NAN, |r| seconds / r.seconds);
            rows.push(TimingRow { n, p, seconds, ratio, failed_pairs });
        }
    }
    Ok(rows)
}

pub fn timing_csv(rows: &[TimingRow]) -> String {
    let mut out = String::from("n,p,seconds,ratio\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", r.n, r.p, fmt17(r.seconds), fmt17(r.ratio));
    }
    out
}
