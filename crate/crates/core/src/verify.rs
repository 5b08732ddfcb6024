//! Randomized property suites over the whole stack, each checked against an
//! independent oracle. Used by the `verify` command and the acceptance tests.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::estimator::DynamicChamfer;
use crate::geometry::{chamfer_exact, EstimatorParams, InstanceConfig, Point, Side};
use crate::nn::{EmbeddingMap, OracleKind};
use crate::par::{self, Execution};
use crate::quadtree::DynQuadTree;
use crate::sampler::{exact_law, sample_matched_point, tv_distance};
use crate::wsampler::WeightedSampler;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        PropertyResult { name, passed, detail }
    }
}

impl fmt::Display for PropertyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{verdict} {}: {}", self.name, self.detail)
    }
}

/// Deliberate corruption used to check that the suites catch failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    Gamma,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub quick: bool,
    pub seed: u64,
    pub fault: Option<Fault>,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false, seed: 0x5eed, fault: None, exec: Execution::default() }
    }
}

/// Runs every suite; trial counts shrink under `quick`.
pub fn run_all(opts: &VerifyOptions) -> Vec<PropertyResult> {
    let q = opts.quick;
    let s = opts.seed;
    vec![
        gamma_maintenance(
            &GammaTraceConfig { traces: if q { 10 } else { 50 }, events: if q { 300 } else { 1000 }, ..Default::default() },
            s,
            opts.fault,
            opts.exec,
        ),
        sampling_law(if q { 4 } else { 10 }, if q { 30 } else { 100 }, if q { 50_000 } else { 100_000 }, 0.02, s),
        estimator_identity(if q { 10 } else { 40 }, 1e-9, s),
        estimator_confidence(&ConfidenceConfig { boost_reps: 1, ..Default::default() }.scaled(q), s),
        estimator_confidence(&ConfidenceConfig { boost_reps: 9, min_fraction: 0.95, ..Default::default() }.scaled(q), s),
        embedding_distortion(128, 0.25, if q { 300 } else { 1000 }, 0.25, 0.95, s, opts.exec),
        weighted_sampler(if q { 20_000 } else { 100_000 }, 100, 0.02, s),
    ]
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaTraceConfig {
    pub traces: usize,
    pub events: usize,
    pub max_points: usize,
    pub dims: Vec<usize>,
    pub extent: i64,
}

impl Default for GammaTraceConfig {
    fn default() -> Self {
        GammaTraceConfig { traces: 50, events: 1000, max_points: 200, dims: vec![1, 2, 8], extent: 32 }
    }
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, extent: i64) -> Point {
    Point::new((0..dim).map(|_| rng.random_range(0..extent)).collect())
}

/// A random insert/delete trace on one side set pair. Points are drawn from
/// a small grid so coincident and nearby points are common.
pub fn random_trace(rng: &mut ChaCha8Rng, dim: usize, extent: i64, events: usize, max_points: usize) -> Vec<(Side, bool, Point)> {
    let mut live: [Vec<Point>; 2] = [Vec::new(), Vec::new()];
    let mut out = Vec::with_capacity(events);
    for _ in 0..events {
        let s = rng.random_range(0..2);
        let side = if s == 0 { Side::A } else { Side::B };
        let total = live[0].len() + live[1].len();
        let insert = live[s].is_empty() || (total < max_points && rng.random_bool(0.55));
        if insert {
            let p = if !live[1 - s].is_empty() && rng.random_bool(0.1) {
                live[1 - s][rng.random_range(0..live[1 - s].len())].clone()
            } else {
                random_point(rng, dim, extent)
            };
            live[s].push(p.clone());
            out.push((side, true, p));
        } else {
            let i = rng.random_range(0..live[s].len());
            out.push((side, false, live[s].swap_remove(i)));
        }
    }
    out
}

/// Incremental counters equal a from-scratch recomputation after every event.
pub fn gamma_maintenance(cfg: &GammaTraceConfig, seed: u64, fault: Option<Fault>, exec: Execution) -> PropertyResult {
    let failures = par::map_range(exec, cfg.traces, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let dim = cfg.dims[t % cfg.dims.len()];
        let inst = InstanceConfig::new(dim, cfg.extent, rng.random()).expect("valid trace config");
        let mut tree = DynQuadTree::new(inst, &mut rng).expect("valid tree");
        let trace = random_trace(&mut rng, dim, cfg.extent, cfg.events, cfg.max_points);
        for (step, (side, insert, p)) in trace.into_iter().enumerate() {
            let r = if insert { tree.insert(&p, side) } else { tree.delete(&p, side) };
            if let Err(e) = r {
                return Some(format!("trace {t} step {step}: {e}"));
            }
            if fault == Some(Fault::Gamma) && t == 0 && step == cfg.events / 2 {
                tree.debug_corrupt_gamma();
            }
            if let Err(e) = tree.check_against_bruteforce().and_then(|_| tree.check_invariants()) {
                return Some(format!("trace {t} (d={dim}) step {step}: {e}"));
            }
        }
        None
    });
    let first = failures.iter().flatten().next().cloned();
    let bad = failures.iter().flatten().count();
    PropertyResult::new(
        "gamma_maintenance",
        first.is_none(),
        match first {
            None => format!("{} traces x {} events exact", cfg.traces, cfg.events),
            Some(f) => format!("{bad} of {} traces diverged; first: {f}", cfg.traces),
        },
    )
}

fn random_instance(rng: &mut ChaCha8Rng, dim: usize, extent: i64, na: usize, nb: usize) -> (Vec<Point>, Vec<Point>) {
    let a = (0..na).map(|_| random_point(rng, dim, extent)).collect();
    let b = (0..nb).map(|_| random_point(rng, dim, extent)).collect();
    (a, b)
}

fn build_tree(rng: &mut ChaCha8Rng, dim: usize, extent: i64, a: &[Point], b: &[Point]) -> DynQuadTree {
    let inst = InstanceConfig::new(dim, extent, rng.random()).expect("valid config");
    let mut tree = DynQuadTree::new(inst, rng).expect("valid tree");
    for p in a {
        tree.insert(p, Side::A).expect("in range");
    }
    for p in b {
        tree.insert(p, Side::B).expect("in range");
    }
    tree
}

/// Empirical sampling frequencies match `L(v_a) / sum_v gamma(v) L(v)` in
/// total variation.
pub fn sampling_law(instances: usize, max_a: usize, draws: usize, max_tv: f64, seed: u64) -> PropertyResult {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1000 + i as u64));
        let dim = 1 + i % 3;
        let na = rng.random_range(1..=max_a);
        let nb = rng.random_range(1..=max_a);
        let (a, b) = random_instance(&mut rng, dim, 256, na, nb);
        let tree = build_tree(&mut rng, dim, 256, &a, &b);
        let law = match exact_law(&tree) {
            Ok(l) => l,
            Err(e) => return PropertyResult::new("sampling_law", false, format!("instance {i}: {e}")),
        };
        let sample: Result<Vec<Point>, _> =
            (0..draws).map(|_| sample_matched_point(&tree, &mut rng).map(|s| s.point)).collect();
        match sample {
            Ok(s) => worst = worst.max(tv_distance(&law, &s)),
            Err(e) => return PropertyResult::new("sampling_law", false, format!("instance {i}: {e}")),
        }
    }
    PropertyResult::new(
        "sampling_law",
        worst < max_tv,
        format!("max TV {worst:.4} over {instances} instances of {draws} draws (bound {max_tv})"),
    )
}

/// With an exact oracle, the expected sample weight equals the Chamfer
/// distance on every instance.
pub fn estimator_identity(instances: usize, tol: f64, seed: u64) -> PropertyResult {
    let mut worst = 0.0f64;
    for i in 0..instances {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(2000 + i as u64));
        let dim = 1 + i % 4;
        let na = rng.random_range(1..=60);
        let nb = rng.random_range(1..=60);
        let (a, b) = random_instance(&mut rng, dim, 128, na, nb);
        let inst = InstanceConfig::new(dim, 128, rng.random()).expect("valid config");
        let mut est = DynamicChamfer::new(inst, EstimatorParams::default(), OracleKind::Scan).expect("valid");
        for p in &a {
            est.insert(Side::A, p.clone()).expect("in range");
        }
        for p in &b {
            est.insert(Side::B, p.clone()).expect("in range");
        }
        let exact = chamfer_exact(&a, &b).expect("nonempty") as f64;
        let expected = est.expected_raw_mean().expect("nonempty");
        let err = if exact > 0.0 { (expected - exact).abs() / exact } else { expected.abs() };
        worst = worst.max(err);
    }
    PropertyResult::new(
        "estimator_identity",
        worst <= tol,
        format!("max relative gap {worst:.2e} over {instances} instances (bound {tol:.0e})"),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceConfig {
    pub points: usize,
    pub dim: usize,
    pub samples: usize,
    pub queries: usize,
    pub boost_reps: usize,
    /// Accepted relative deviation of a raw mean from the exact value.
    pub band: f64,
    pub min_fraction: f64,
}

impl Default for ConfidenceConfig {
    fn default() -> Self {
        ConfidenceConfig { points: 500, dim: 2, samples: 2000, queries: 40, boost_reps: 1, band: 0.2, min_fraction: 0.75 }
    }
}

impl ConfidenceConfig {
    fn scaled(self, quick: bool) -> Self {
        if quick {
            ConfidenceConfig { queries: 20, ..self }
        } else {
            self
        }
    }
}

/// Fraction of independent (optionally boosted) raw means within `band` of
/// the exact value on one fixed random instance.
pub fn estimator_confidence(cfg: &ConfidenceConfig, seed: u64) -> PropertyResult {
    let name = if cfg.boost_reps > 1 { "estimator_confidence_boosted" } else { "estimator_confidence" };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(3000));
    let extent = 1 << 12;
    let (a, b) = random_instance(&mut rng, cfg.dim, extent, cfg.points, cfg.points);
    let exact = chamfer_exact(&a, &b).expect("nonempty") as f64;
    let params = EstimatorParams { eps: 0.2, alpha: 0.0, samples: Some(cfg.samples), boost_reps: cfg.boost_reps };
    let inst = InstanceConfig::new(cfg.dim, extent, rng.random()).expect("valid config");
    let mut est = DynamicChamfer::new(inst, params.clone(), OracleKind::Auto).expect("valid");
    for p in &a {
        est.insert(Side::A, p.clone()).expect("in range");
    }
    for p in &b {
        est.insert(Side::B, p.clone()).expect("in range");
    }
    let mut inside = 0;
    for _ in 0..cfg.queries {
        let r = est.query_boosted(&params).expect("nonempty");
        if (r.raw_mean - exact).abs() <= cfg.band * exact {
            inside += 1;
        }
    }
    let frac = inside as f64 / cfg.queries as f64;
    PropertyResult::new(
        name,
        frac >= cfg.min_fraction,
        format!(
            "{inside}/{} queries (m={}, reps={}) within {:.0}% of exact (need {:.0}%)",
            cfg.queries,
            cfg.samples,
            cfg.boost_reps,
            cfg.band * 100.0,
            cfg.min_fraction * 100.0
        ),
    )
}

/// Share of random pairs whose embedded l1 distance is within `band` of
/// their l2 distance.
pub fn embedding_distortion(
    dim: usize,
    eps: f64,
    pairs: usize,
    band: f64,
    min_fraction: f64,
    seed: u64,
    exec: Execution,
) -> PropertyResult {
    let map = match EmbeddingMap::new(dim, eps, seed) {
        Ok(m) => m,
        Err(e) => return PropertyResult::new("embedding_distortion", false, e.to_string()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4000));
    let diffs: Vec<Vec<f64>> = (0..pairs)
        .map(|_| {
            let scale = rng.random_range(0.1..10.0);
            (0..dim)
                .map(|_| {
                    let x: f64 = StandardNormal.sample(&mut rng);
                    let y: f64 = StandardNormal.sample(&mut rng);
                    scale * (x - y)
                })
                .collect()
        })
        .collect();
    // The map is linear, so the image distance of a pair is the image norm
    // of its difference.
    let ok = par::map(exec, &diffs, |v| {
        let l2 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let l1: f64 = map.apply(v).expect("matching dim").iter().map(|x| x.abs()).sum();
        (l1 - l2).abs() <= band * l2
    });
    let inside = ok.iter().filter(|&&b| b).count();
    PropertyResult::new(
        "embedding_distortion",
        inside as f64 >= min_fraction * pairs as f64,
        format!(
            "{inside}/{pairs} pairs within {:.0}% (d={dim}, k={}, need {:.0}%)",
            band * 100.0,
            map.target_dim(),
            min_fraction * 100.0
        ),
    )
}

/// Sum caches stay exact under random operations, per-operation visits stay
/// within `4 log2 n + 4`, and draws follow the weights.
pub fn weighted_sampler(ops: usize, k: usize, max_tv: f64, seed: u64) -> PropertyResult {
    let name = "weighted_sampler";
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(5000));
    let mut s = WeightedSampler::<u64>::new();
    let mut keys: Vec<u64> = Vec::new();
    let mut next = 0u64;
    let mut worst_ratio = 0.0f64;
    for op in 0..ops {
        let n = keys.len().max(1) as f64;
        let before = s.visits();
        let choice = rng.random_range(0..4);
        let r = if keys.is_empty() || (choice == 0 && keys.len() < 2000) {
            next += 1;
            keys.push(next);
            s.insert(next, rng.random_range(0..1000))
        } else if choice == 1 {
            let i = rng.random_range(0..keys.len());
            s.remove(keys.swap_remove(i)).map(|_| ())
        } else if choice == 2 {
            s.reweight(keys[rng.random_range(0..keys.len())], rng.random_range(0..1000))
        } else if s.total_weight() > 0 {
            s.sample(&mut rng).map(|_| ())
        } else {
            Ok(())
        };
        if let Err(e) = r {
            return PropertyResult::new(name, false, format!("op {op}: {e}"));
        }
        let n = n.max(keys.len() as f64);
        let bound = 4.0 * n.log2() + 4.0;
        worst_ratio = worst_ratio.max((s.visits() - before) as f64 / bound);
        if worst_ratio > 1.0 {
            return PropertyResult::new(name, false, format!("op {op} touched {} entries", s.visits() - before));
        }
        if (op % 97 == 0 || op + 1 == ops) && !s.check_consistency() {
            return PropertyResult::new(name, false, format!("sum cache inconsistent after op {op}"));
        }
        if s.total_weight() != s.iter().map(|(_, w)| w).sum::<u64>() {
            return PropertyResult::new(name, false, format!("root sum wrong after op {op}"));
        }
    }

    let mut small = WeightedSampler::<u64>::new();
    let weights: Vec<u64> = (0..k).map(|_| rng.random_range(1..100)).collect();
    for (i, &w) in weights.iter().enumerate() {
        small.insert(i as u64, w).expect("fresh key");
    }
    let draws = 200_000;
    let mut counts = vec![0usize; k];
    for _ in 0..draws {
        counts[small.sample(&mut rng).expect("positive total") as usize] += 1;
    }
    let total: u64 = weights.iter().sum();
    let tv = counts
        .iter()
        .zip(&weights)
        .map(|(&c, &w)| (c as f64 / draws as f64 - w as f64 / total as f64).abs())
        .sum::<f64>()
        / 2.0;
    PropertyResult::new(
        name,
        tv < max_tv,
        format!("{ops} ops consistent, max visits {:.2} of bound, TV {tv:.4} at k={k}", worst_ratio),
    )
}
