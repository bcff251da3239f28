//! Training with a parallel feature-subset search, plus diagnostic tables.

use std::fmt::Write as _;
use std::ops::RangeInclusive;

use rampforge_core::clustering::kmeans::{check_selection_input, finish_selection, grid};
use rampforge_core::clustering::{ClusterError, SelectionContext, SelectionResult};
use rampforge_core::curve::{RampCurve, RawRamp};
use rampforge_core::modelbook::{train_with, ModelError, TrainConfig, TrainReport};
use rayon::prelude::*;

/// The subset search of `feature_selection` spread over `jobs` threads.
/// Rows are collected in grid order, so the result does not depend on
/// `jobs`.
pub fn parallel_feature_selection(
    curves: &[RampCurve],
    k_range: RangeInclusive<usize>,
    rng_seed: u64,
    jobs: usize,
) -> Result<SelectionResult, ClusterError> {
    check_selection_input(curves.len(), &k_range)?;
    let ctx = SelectionContext::new(curves)?;
    let configs = grid(k_range);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|_| ClusterError::BadParameter("cannot start worker threads"))?;
    let table = pool.install(|| {
        configs
            .par_iter()
            .map(|(m, k)| ctx.evaluate(*m, *k, rng_seed))
            .collect::<Result<Vec<_>, _>>()
    })?;
    finish_selection(&ctx, table)
}

pub fn train_parallel(
    ramps: &[RawRamp],
    corpus_fingerprint: &str,
    config: &TrainConfig,
    jobs: usize,
) -> Result<TrainReport, ModelError> {
    train_with(ramps, corpus_fingerprint, config, |c, r, s| {
        parallel_feature_selection(c, r, s, jobs)
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// The subset-search and weight-sweep tables as CSV.
pub fn diagnostics_csv(report: &TrainReport) -> String {
    let mut out = String::from("method,parameter,k,mean_tightness,unweighted_tightness,min_cluster_size,max_cluster_size\n");
    if let Some(sel) = &report.selection {
        for row in &sel.table {
            let _ = writeln!(
                out,
                "kmeans,{},{},{},{},{},{}",
                row.mask.bits(),
                row.k,
                opt(row.score),
                opt(row.unweighted),
                row.sizes.iter().min().copied().unwrap_or(0),
                row.sizes.iter().max().copied().unwrap_or(0)
            );
        }
    }
    if let Some(sweep) = &report.sweep {
        for row in &sweep.rows {
            let sizes = row.clustering.sizes();
            let _ = writeln!(
                out,
                "elastic,{:.1},{},{},{},{},{}",
                row.w,
                row.clustering.k,
                opt(row.clustering.mean_tightness),
                opt(row.clustering.unweighted_tightness),
                sizes.iter().min().copied().unwrap_or(0),
                sizes.iter().max().copied().unwrap_or(0)
            );
        }
    }
    out
}
