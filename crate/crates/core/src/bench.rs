//! Timing and heap profile of the materialized and streaming kernels.

use std::time::Instant;

use serde::Serialize;

use crate::discretize::{discretize, Rule};
use crate::init::{init_c, init_lin};
use crate::io::kernel_to_csv;
use crate::kernel::{vandermonde_kernel, vandermonde_kernel_streaming};
use crate::memtrack::{measure, tracking_enabled, AllocStats};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchPoint {
    pub n: usize,
    pub l: usize,
    pub materialized_secs: f64,
    pub streaming_secs: f64,
    pub materialized: AllocStats,
    pub streaming: AllocStats,
    pub materialized_aux_bytes: usize,
    pub streaming_aux_bytes: usize,
    pub identical_csv: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchReport {
    pub rule: String,
    pub tracking: bool,
    pub points: Vec<BenchPoint>,
    /// Least-squares slope of `log aux` against `log (N L)`.
    pub streaming_exponent: f64,
    pub materialized_exponent: f64,
    pub all_identical: bool,
}

/// Runs both kernels on an S4D-Lin spec of size `n`.
pub fn bench_point(n: usize, l: usize, rule: Rule, seed: u64) -> Result<BenchPoint> {
    let spec = init_lin(n)?.with_c(init_c(n / 2, seed))?;
    let disc = discretize(&spec, rule)?;

    let start = Instant::now();
    let (mat, mat_stats) = measure(|| vandermonde_kernel(&spec, &disc, l));
    let materialized_secs = start.elapsed().as_secs_f64();
    let mat = mat?;

    let start = Instant::now();
    let (stream, stream_stats) = measure(|| vandermonde_kernel_streaming(&spec, &disc, l));
    let streaming_secs = start.elapsed().as_secs_f64();
    let stream = stream?;

    Ok(BenchPoint {
        n,
        l,
        materialized_secs,
        streaming_secs,
        materialized: mat_stats,
        streaming: stream_stats,
        materialized_aux_bytes: mat_stats.aux_bytes(),
        streaming_aux_bytes: stream_stats.aux_bytes(),
        identical_csv: kernel_to_csv(&mat) == kernel_to_csv(&stream),
    })
}

pub fn bench_grid(ns: &[usize], ls: &[usize], rule: Rule, seed: u64) -> Result<BenchReport> {
    let mut points = Vec::with_capacity(ns.len() * ls.len());
    for &n in ns {
        for &l in ls {
            points.push(bench_point(n, l, rule, seed)?);
        }
    }
    let size: Vec<f64> = points.iter().map(|p| (p.n * p.l) as f64).collect();
    let fit = |bytes: fn(&BenchPoint) -> usize| {
        let y: Vec<f64> = points.iter().map(|p| bytes(p).max(1) as f64).collect();
        loglog_slope(&size, &y)
    };
    Ok(BenchReport {
        rule: rule.to_string(),
        tracking: tracking_enabled(),
        streaming_exponent: fit(|p| p.streaming_aux_bytes),
        materialized_exponent: fit(|p| p.materialized_aux_bytes),
        all_identical: points.iter().all(|p| p.identical_csv),
        points,
    })
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
