use std::time::Instant;

use super::{Algorithm, Runner};
use crate::error::{Error, Result};
use crate::geometry::{Point, Side, UpdateEvent};
use super::ExperimentConfig;

/// Settings for a latency measurement over a `B`-only sliding window.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyConfig {
    pub window: usize,
    /// Window updates to time.
    pub updates: usize,
    pub queries: usize,
    pub experiment: ExperimentConfig,
    pub seed: u64,
}

/// Mean per-operation latencies in nanoseconds.
#[derive(Debug, Clone, PartialEq)]
pub struct Latency {
    pub algorithm: Algorithm,
    pub updates: usize,
    pub insert_ns: f64,
    pub delete_ns: f64,
    /// One window update: an insertion plus a deletion.
    pub update_ns: f64,
    pub query_ns: f64,
}

fn mean(total: u128, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        total as f64 / n as f64
    }
}

/// Loads `a` and the first `window` points of `stream`, then times
/// `updates` window updates and `queries` queries.
pub fn measure_latency(alg: Algorithm, a: &[Point], stream: &[Point], cfg: &LatencyConfig) -> Result<Latency> {
    if cfg.window == 0 || stream.len() < cfg.window + cfg.updates {
        return Err(Error::InvalidParam(format!(
            "stream of {} points cannot fill a window of {} plus {} updates",
            stream.len(),
            cfg.window,
            cfg.updates
        )));
    }
    let dim = a.first().or(stream.first()).map_or(1, Point::dim);
    let mut runner = Runner::new(alg, &cfg.experiment, dim, cfg.seed)?;
    for p in a {
        runner.apply(&UpdateEvent::insert(Side::A, p.clone()))?;
    }
    for p in &stream[..cfg.window] {
        runner.apply(&UpdateEvent::insert(Side::B, p.clone()))?;
    }
    let (mut ins_ns, mut del_ns) = (0u128, 0u128);
    for t in 0..cfg.updates {
        let ins = UpdateEvent::insert(Side::B, stream[cfg.window + t].clone());
        let del = UpdateEvent::delete(Side::B, stream[t].clone());
        let start = Instant::now();
        runner.apply(&ins)?;
        ins_ns += start.elapsed().as_nanos();
        let start = Instant::now();
        runner.apply(&del)?;
        del_ns += start.elapsed().as_nanos();
    }
    let mut query_ns = 0u128;
    for _ in 0..cfg.queries {
        let start = Instant::now();
        runner.query()?;
        query_ns += start.elapsed().as_nanos();
    }
    Ok(Latency {
        algorithm: alg,
        updates: cfg.updates,
        insert_ns: mean(ins_ns, cfg.updates),
        delete_ns: mean(del_ns, cfg.updates),
        update_ns: mean(ins_ns + del_ns, cfg.updates),
        query_ns: mean(query_ns, cfg.queries),
    })
}
