//! Sliding-window experiments: replay a point stream through each algorithm,
//! query at a fixed cadence and record error and latency.

mod dataset;
mod latency;
mod synthetic;

use std::collections::BTreeMap;
use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

pub use dataset::{encode_fvecs, inject_outlier, load_dataset, parse_csv, parse_fvecs, DataFormat};
pub use latency::{measure_latency, Latency, LatencyConfig};
pub use synthetic::{desk_cloud, gaussian_clusters};

use crate::baselines::{Benchmark, UniformEstimator};
use crate::error::{Error, Result};
use crate::estimator::DynamicChamfer;
use crate::geometry::{
    chamfer_exact, EstimatorParams, InstanceConfig, Point, QuantizeMap, Side, UpdateEvent, DEFAULT_EXTENT,
};
use crate::nn::OracleKind;
use crate::par::{self, Execution};

/// Real-valued vectors as loaded from disk.
pub type RawPoints = Vec<Vec<f64>>;

pub const CSV_HEADER: &str = "run_id,update_index,algorithm,estimate,exact,relative_error,update_time_ns,query_time_ns";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Ours,
    Uniform,
    Benchmark,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Ours, Algorithm::Uniform, Algorithm::Benchmark];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ours => "ours",
            Algorithm::Uniform => "uniform",
            Algorithm::Benchmark => "benchmark",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidParam(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mode {
    /// `A` is static; the window slides over `B`.
    #[default]
    DynamicB,
    /// The window slides over an interleaving of both sets.
    DynamicAB,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "b" | "dynamic_b" => Ok(Mode::DynamicB),
            "ab" | "dynamic_ab" => Ok(Mode::DynamicAB),
            other => Err(Error::InvalidParam(format!("unknown mode {other:?} (expected b or ab)"))),
        }
    }
}

/// Where the two input sets come from.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSource {
    pub a: PathBuf,
    pub b: PathBuf,
    pub format: DataFormat,
}

impl DatasetSource {
    pub fn load(&self) -> Result<(RawPoints, RawPoints)> {
        Ok((load_dataset(&self.a, self.format)?, load_dataset(&self.b, self.format)?))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub window: usize,
    pub samples: usize,
    pub eps: f64,
    pub alpha: f64,
    pub boost_reps: usize,
    pub seeds: Vec<u64>,
    /// Steps between report rows; `None` means `max(1, window / 4)`.
    pub report_every: Option<usize>,
    pub outlier: bool,
    pub mode: Mode,
    /// `(a, b)`: `a` points of `A` then `b` of `B`, repeated. `None` uses the
    /// rounded ratio of the set sizes.
    pub ab_ratio: Option<(usize, usize)>,
    pub algorithms: Vec<Algorithm>,
    pub extent: i64,
    pub oracle: OracleKind,
    /// Report `raw_mean / (1 + eps/2)` instead of the raw sample mean.
    pub apply_shift: bool,
    /// Stop after this many window updates.
    pub max_steps: Option<usize>,
    pub exec: Execution,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            window: 100,
            samples: 150,
            eps: 0.2,
            alpha: 0.0,
            boost_reps: 1,
            seeds: vec![1, 2, 3, 4, 5],
            report_every: None,
            outlier: false,
            mode: Mode::DynamicB,
            ab_ratio: None,
            algorithms: Algorithm::ALL.to_vec(),
            extent: DEFAULT_EXTENT,
            oracle: OracleKind::Auto,
            apply_shift: false,
            max_steps: None,
            exec: Execution::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn report_every(&self) -> usize {
        self.report_every.unwrap_or((self.window / 4).max(1))
    }

    pub fn params(&self) -> EstimatorParams {
        EstimatorParams {
            eps: self.eps,
            alpha: self.alpha,
            samples: Some(self.samples),
            boost_reps: self.boost_reps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidParam("window must be at least 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParam("sample count must be at least 1".into()));
        }
        if self.report_every == Some(0) {
            return Err(Error::InvalidParam("report interval must be at least 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParam("at least one seed is required".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParam("at least one algorithm is required".into()));
        }
        if let Some((a, b)) = self.ab_ratio {
            if a == 0 || b == 0 {
                return Err(Error::InvalidParam("interleaving ratio entries must be positive".into()));
            }
        }
        self.params().validate()?;
        InstanceConfig::new(1, self.extent, 0).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub run_id: u64,
    /// Window updates applied so far.
    pub update_index: usize,
    pub algorithm: Algorithm,
    pub estimate: f64,
    pub exact: f64,
    pub relative_error: f64,
    /// Mean time of one window update since the previous row.
    pub update_time_ns: f64,
    pub query_time_ns: f64,
}

impl ReportRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{:.1},{:.1}",
            self.run_id,
            self.update_index,
            self.algorithm,
            self.estimate,
            self.exact,
            self.relative_error,
            self.update_time_ns,
            self.query_time_ns
        )
    }
}

/// `|exact - estimate| / exact`; zero when both vanish.
pub fn relative_error(estimate: f64, exact: f64) -> f64 {
    if exact > 0.0 {
        (exact - estimate).abs() / exact
    } else if estimate == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn write_csv<W: Write>(rows: &[ReportRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    out.flush()
}

/// Both sets quantized onto the grid with one map fitted to their union.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedData {
    pub dim: usize,
    pub a: Vec<Point>,
    pub b: Vec<Point>,
}

pub fn prepare(cfg: &ExperimentConfig, a_raw: &[Vec<f64>], b_raw: &[Vec<f64>]) -> Result<PreparedData> {
    if a_raw.is_empty() {
        return Err(Error::Empty("A"));
    }
    if b_raw.is_empty() {
        return Err(Error::Empty("B"));
    }
    let a_raw = if cfg.outlier { inject_outlier(a_raw)? } else { a_raw.to_vec() };
    let map = QuantizeMap::fit(a_raw.iter().chain(b_raw).map(|v| v.as_slice()), cfg.extent)?;
    Ok(PreparedData { dim: map.dim(), a: map.apply_all(&a_raw)?, b: map.apply_all(b_raw)? })
}

/// Interleaves `ra` points of `A` with `rb` points of `B` until one runs
/// out, then appends the rest.
pub fn interleave(a: &[Point], b: &[Point], ratio: (usize, usize)) -> Vec<(Side, Point)> {
    let (mut ia, mut ib) = (a.iter(), b.iter());
    let mut out = Vec::with_capacity(a.len() + b.len());
    loop {
        let before = out.len();
        out.extend(ia.by_ref().take(ratio.0).map(|p| (Side::A, p.clone())));
        out.extend(ib.by_ref().take(ratio.1).map(|p| (Side::B, p.clone())));
        if out.len() == before {
            return out;
        }
    }
}

fn default_ratio(na: usize, nb: usize) -> (usize, usize) {
    if na >= nb {
        (((na as f64 / nb.max(1) as f64).round() as usize).max(1), 1)
    } else {
        (1, ((nb as f64 / na.max(1) as f64).round() as usize).max(1))
    }
}

enum Runner {
    Ours(Box<DynamicChamfer>, bool),
    Uniform(UniformEstimator, usize),
    Benchmark(Benchmark),
}

impl Runner {
    fn new(alg: Algorithm, cfg: &ExperimentConfig, dim: usize, seed: u64) -> Result<Self> {
        Ok(match alg {
            Algorithm::Ours => {
                let inst = InstanceConfig::new(dim, cfg.extent, seed)?;
                Runner::Ours(Box::new(DynamicChamfer::new(inst, cfg.params(), cfg.oracle)?), cfg.apply_shift)
            }
            Algorithm::Uniform => {
                Runner::Uniform(UniformEstimator::new(dim, cfg.oracle, seed ^ 0x5bd1_e995_9e37_79b9), cfg.samples)
            }
            Algorithm::Benchmark => Runner::Benchmark(Benchmark::new()),
        })
    }

    fn apply(&mut self, ev: &UpdateEvent) -> Result<()> {
        match self {
            Runner::Ours(d, _) => d.apply_update(ev),
            Runner::Uniform(u, _) => u.apply(ev),
            Runner::Benchmark(b) => b.apply(ev),
        }
    }

    fn query(&mut self) -> Result<f64> {
        match self {
            Runner::Ours(d, shifted) => {
                let est = d.estimate()?;
                Ok(if *shifted { est.value } else { est.raw_mean })
            }
            Runner::Uniform(u, m) => u.query(*m),
            Runner::Benchmark(b) => Ok(b.total()? as f64),
        }
    }
}

/// Replays the window for every seed and returns rows ordered by
/// `(run_id, update_index)`, algorithms in configuration order within a step.
pub fn run_sliding_window(cfg: &ExperimentConfig, data: &PreparedData) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let (fixed, stream): (&[Point], Vec<(Side, Point)>) = match cfg.mode {
        Mode::DynamicB => (&data.a, data.b.iter().map(|p| (Side::B, p.clone())).collect()),
        Mode::DynamicAB => {
            let ratio = cfg.ab_ratio.unwrap_or_else(|| default_ratio(data.a.len(), data.b.len()));
            (&[], interleave(&data.a, &data.b, ratio))
        }
    };
    if stream.len() < cfg.window {
        return Err(Error::InvalidParam(format!(
            "stream has {} points, shorter than the window {}",
            stream.len(),
            cfg.window
        )));
    }
    let runs = par::map(cfg.exec, &cfg.seeds, |&seed| run_one(cfg, data.dim, fixed, &stream, seed));
    let mut rows = Vec::new();
    for r in runs {
        rows.extend(r?);
    }
    rows.sort_by_key(|r| (r.run_id, r.update_index));
    Ok(rows)
}

fn run_one(
    cfg: &ExperimentConfig,
    dim: usize,
    fixed: &[Point],
    stream: &[(Side, Point)],
    seed: u64,
) -> Result<Vec<ReportRow>> {
    let w = cfg.window;
    let mut runners = cfg
        .algorithms
        .iter()
        .map(|&alg| Ok((alg, Runner::new(alg, cfg, dim, seed)?)))
        .collect::<Result<Vec<_>>>()?;
    for p in fixed {
        let ev = UpdateEvent::insert(Side::A, p.clone());
        for (_, r) in &mut runners {
            r.apply(&ev)?;
        }
    }
    for (side, p) in &stream[..w] {
        let ev = UpdateEvent::insert(*side, p.clone());
        for (_, r) in &mut runners {
            r.apply(&ev)?;
        }
    }

    let steps = (stream.len() - w).min(cfg.max_steps.unwrap_or(usize::MAX));
    let every = cfg.report_every();
    let bench = runners.iter().position(|(alg, _)| *alg == Algorithm::Benchmark);
    let mut update_ns = vec![0u128; runners.len()];
    let mut since = 0usize;
    let mut rows = Vec::new();
    for t in 1..=steps {
        let (in_side, in_p) = &stream[w + t - 1];
        let (out_side, out_p) = &stream[t - 1];
        let ins = UpdateEvent::insert(*in_side, in_p.clone());
        let del = UpdateEvent::delete(*out_side, out_p.clone());
        for (i, (_, r)) in runners.iter_mut().enumerate() {
            let start = Instant::now();
            r.apply(&ins)?;
            r.apply(&del)?;
            update_ns[i] += start.elapsed().as_nanos();
        }
        since += 1;
        if t % every != 0 {
            continue;
        }
        let window = &stream[t..t + w];
        let has = |s: Side| fixed.len() * (s == Side::A) as usize + window.iter().filter(|(x, _)| *x == s).count() > 0;
        if !has(Side::A) || !has(Side::B) {
            continue;
        }
        let exact = match bench {
            Some(i) => runners[i].1.query()?,
            None => {
                let pick = |s: Side| window.iter().filter(move |(x, _)| *x == s).map(|(_, p)| p.clone());
                let a: Vec<Point> = fixed.iter().cloned().chain(pick(Side::A)).collect();
                let b: Vec<Point> = pick(Side::B).collect();
                chamfer_exact(&a, &b)? as f64
            }
        };
        for (i, (alg, r)) in runners.iter_mut().enumerate() {
            let start = Instant::now();
            let estimate = r.query()?;
            let query_ns = start.elapsed().as_nanos() as f64;
            rows.push(ReportRow {
                run_id: seed,
                update_index: t,
                algorithm: *alg,
                estimate,
                exact,
                relative_error: relative_error(estimate, exact),
                update_time_ns: update_ns[i] as f64 / since as f64,
                query_time_ns: query_ns,
            });
            update_ns[i] = 0;
        }
        since = 0;
    }
    Ok(rows)
}

/// Error statistics across runs at one report point.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateRow {
    pub algorithm: Algorithm,
    pub update_index: usize,
    pub runs: usize,
    pub mean_error: f64,
    pub min_error: f64,
    pub max_error: f64,
}

pub fn aggregate(rows: &[ReportRow]) -> Vec<AggregateRow> {
    let mut groups: BTreeMap<(Algorithm, usize), Vec<f64>> = BTreeMap::new();
    for r in rows {
        groups.entry((r.algorithm, r.update_index)).or_default().push(r.relative_error);
    }
    groups
        .into_iter()
        .map(|((algorithm, update_index), errs)| AggregateRow {
            algorithm,
            update_index,
            runs: errs.len(),
            mean_error: errs.iter().sum::<f64>() / errs.len() as f64,
            min_error: errs.iter().copied().fold(f64::INFINITY, f64::min),
            max_error: errs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
        .collect()
}

/// Whole-run statistics of one algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub rows: usize,
    pub mean_error: f64,
    pub max_error: f64,
    pub mean_update_ns: f64,
    pub mean_query_ns: f64,
}

pub fn summarize(rows: &[ReportRow]) -> Vec<Summary> {
    let mut groups: BTreeMap<Algorithm, Vec<&ReportRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.algorithm).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(algorithm, rs)| {
            let n = rs.len() as f64;
            let mean = |f: fn(&ReportRow) -> f64| rs.iter().map(|r| f(r)).sum::<f64>() / n;
            Summary {
                algorithm,
                rows: rs.len(),
                mean_error: mean(|r| r.relative_error),
                max_error: rs.iter().map(|r| r.relative_error).fold(0.0, f64::max),
                mean_update_ns: mean(|r| r.update_time_ns),
                mean_query_ns: mean(|r| r.query_time_ns),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(v: &[i64]) -> Vec<Point> {
        v.iter().map(|&c| Point::from([c])).collect()
    }

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            window: 2,
            samples: 20,
            seeds: vec![7],
            report_every: Some(1),
            extent: 16,
            exec: Execution::Sequential,
            ..Default::default()
        }
    }

    #[test]
    fn window_semantics() {
        let data = PreparedData { dim: 1, a: line(&[0, 15]), b: line(&[1, 4, 9, 13]) };
        let cfg = ExperimentConfig { algorithms: vec![Algorithm::Benchmark], ..small_cfg() };
        let rows = run_sliding_window(&cfg, &data).unwrap();
        // windows {1,4} -> {4,9} -> {9,13}; reported after each of the two steps
        let exact: Vec<f64> = rows.iter().map(|r| r.exact).collect();
        assert_eq!(exact, vec![4.0 + 6.0, 9.0 + 2.0]);
        assert!(rows.iter().all(|r| r.relative_error == 0.0 && r.estimate == r.exact));
        assert_eq!(rows.iter().map(|r| r.update_index).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn exact_without_benchmark_matches() {
        let data = PreparedData { dim: 1, a: line(&[0, 3, 15]), b: line(&[1, 4, 9, 13, 2, 2]) };
        let with = run_sliding_window(&small_cfg(), &data).unwrap();
        let without = run_sliding_window(
            &ExperimentConfig { algorithms: vec![Algorithm::Ours, Algorithm::Uniform], ..small_cfg() },
            &data,
        )
        .unwrap();
        let ex = |rows: &[ReportRow]| {
            rows.iter().filter(|r| r.algorithm == Algorithm::Ours).map(|r| (r.exact, r.estimate)).collect::<Vec<_>>()
        };
        assert_eq!(ex(&with), ex(&without));
    }

    #[test]
    fn deterministic_per_seed_and_sorted() {
        let a = desk_cloud(150, 1);
        let b = desk_cloud(150, 2);
        let cfg = ExperimentConfig {
            window: 40,
            samples: 30,
            seeds: vec![3, 1, 2],
            extent: 1 << 10,
            exec: Execution::Parallel,
            ..Default::default()
        };
        let data = prepare(&cfg, &a, &b).unwrap();
        let r1 = run_sliding_window(&cfg, &data).unwrap();
        let r2 = run_sliding_window(&ExperimentConfig { exec: Execution::Sequential, ..cfg.clone() }, &data).unwrap();
        let strip = |rows: &[ReportRow]| rows.iter().map(|r| (r.run_id, r.update_index, r.algorithm, r.estimate)).collect::<Vec<_>>();
        assert_eq!(strip(&r1), strip(&r2));
        assert!(r1.windows(2).all(|w| (w[0].run_id, w[0].update_index) <= (w[1].run_id, w[1].update_index)));
        // 110 steps, a row every 10, three algorithms, three seeds
        assert_eq!(r1.len(), 11 * 3 * 3);
    }

    #[test]
    fn stream_shorter_than_window() {
        let data = PreparedData { dim: 1, a: line(&[0]), b: line(&[1]) };
        assert!(run_sliding_window(&small_cfg(), &data).is_err());
    }

    #[test]
    fn ab_mode_interleaves() {
        let s = interleave(&line(&[1, 2, 3, 4, 5]), &line(&[9, 8]), (2, 1));
        let sides: String = s.iter().map(|(x, _)| if *x == Side::A { 'a' } else { 'b' }).collect();
        assert_eq!(sides, "aabaaba");
        assert_eq!(default_ratio(6000, 1000), (6, 1));
        assert_eq!(default_ratio(10, 30), (1, 3));

        let a = desk_cloud(120, 4);
        let b = desk_cloud(40, 5);
        let cfg = ExperimentConfig { window: 40, samples: 50, seeds: vec![1], mode: Mode::DynamicAB, ..Default::default() };
        let rows = run_sliding_window(&cfg, &prepare(&cfg, &a, &b).unwrap()).unwrap();
        assert!(!rows.is_empty());
        for r in rows.iter().filter(|r| r.algorithm == Algorithm::Benchmark) {
            assert_eq!(r.relative_error, 0.0);
        }
    }

    #[test]
    fn aggregate_is_a_fold() {
        let row = |run_id, err| ReportRow {
            run_id,
            update_index: 5,
            algorithm: Algorithm::Ours,
            estimate: 0.0,
            exact: 1.0,
            relative_error: err,
            update_time_ns: 10.0,
            query_time_ns: 20.0,
        };
        let agg = aggregate(&[row(1, 0.1), row(2, 0.3), row(3, 0.2)]);
        assert_eq!(agg.len(), 1);
        assert_eq!(agg[0].runs, 3);
        assert!((agg[0].mean_error - 0.2).abs() < 1e-12);
        assert_eq!((agg[0].min_error, agg[0].max_error), (0.1, 0.3));
        let s = summarize(&[row(1, 0.1), row(2, 0.3)]);
        assert_eq!(s[0].rows, 2);
        assert_eq!(s[0].max_error, 0.3);
    }

    #[test]
    fn csv_output() {
        let row = ReportRow {
            run_id: 1,
            update_index: 2,
            algorithm: Algorithm::Uniform,
            estimate: 3.5,
            exact: 4.0,
            relative_error: 0.125,
            update_time_ns: 100.0,
            query_time_ns: 50.0,
        };
        let mut out = Vec::new();
        write_csv(&[row], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n1,2,uniform,3.5,4,0.125,100.0,50.0\n"));
    }

    #[test]
    fn relative_error_edges() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        assert_eq!(relative_error(1.0, 0.0), f64::INFINITY);
        assert_eq!(relative_error(9.0, 10.0), 0.1);
    }

    #[test]
    fn parsing_names() {
        assert_eq!("Ours".parse::<Algorithm>().unwrap(), Algorithm::Ours);
        assert!("fast".parse::<Algorithm>().is_err());
        assert_eq!("ab".parse::<Mode>().unwrap(), Mode::DynamicAB);
        assert!("c".parse::<Mode>().is_err());
    }
}
