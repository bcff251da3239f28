//! Lloyd k-means with k-means++ seeding over standardized curve features,
//! and the exhaustive search over feature subsets and k.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use super::{score_partition, ClusterError, Clustering, Method};
use crate::curve::RampCurve;
use crate::features::{self, FeatureMask};

pub const MAX_ITERATIONS: usize = 300;

/// Independent k-means++ restarts per run; the lowest-inertia run wins.
pub const RESTARTS: usize = 10;

/// Minimum corpus size for the subset search.
pub const MIN_SELECTION_CURVES: usize = 16;

pub(crate) fn unit_f64(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(row: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(row, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus(rows: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = rows.len();
    let first = (rng.next_u64() % n as u64) as usize;
    let mut centers = vec![rows[first].clone()];
    let mut d2: Vec<f64> = rows.iter().map(|r| sq_dist(r, &rows[first])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = unit_f64(rng) * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && *d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            (rng.next_u64() % n as u64) as usize
        };
        for (d, r) in d2.iter_mut().zip(rows) {
            *d = d.min(sq_dist(r, &rows[pick]));
        }
        centers.push(rows[pick].clone());
    }
    centers
}

struct LloydRun {
    labels: Vec<usize>,
    inertia: f64,
}

fn lloyd(rows: &[Vec<f64>], mut centers: Vec<Vec<f64>>) -> LloydRun {
    let n = rows.len();
    let k = centers.len();
    let dims = rows.first().map_or(0, Vec::len);
    let mut labels = vec![usize::MAX; n];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        let mut dist = vec![0.0; n];
        for (i, r) in rows.iter().enumerate() {
            let (c, d) = nearest(r, &centers);
            dist[i] = d;
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
        }
        // An empty cluster takes over the point farthest from its centre,
        // unless every point already sits on its centre.
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| counts[labels[i]] > 1)
                .max_by(|&i, &j| dist[i].total_cmp(&dist[j]).then(j.cmp(&i)));
            if let Some(i) = far.filter(|&i| dist[i] > 0.0) {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                dist[i] = 0.0;
                changed = true;
            }
        }
        for (c, center) in centers.iter_mut().enumerate() {
            if counts[c] == 0 {
                continue;
            }
            let mut sum = vec![0.0; dims];
            for (r, _) in rows.iter().zip(&labels).filter(|(_, &l)| l == c) {
                for (s, v) in sum.iter_mut().zip(r) {
                    *s += v;
                }
            }
            let inv = 1.0 / counts[c] as f64;
            *center = sum.into_iter().map(|s| s * inv).collect();
        }
        if !changed {
            break;
        }
    }
    let inertia = rows
        .iter()
        .zip(&labels)
        .map(|(r, &l)| sq_dist(r, &centers[l]))
        .sum();
    LloydRun { labels, inertia }
}

/// Raw k-means labels (not canonicalized) for feature rows.
pub fn kmeans_rows(rows: &[Vec<f64>], k: usize, rng_seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut best: Option<LloydRun> = None;
    for _ in 0..RESTARTS {
        let run = lloyd(rows, plus_plus(rows, k, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    best.map(|b| b.labels).unwrap_or_default()
}

/// Features of a curve set, computed and standardized once, shared by every
/// configuration of a subset search.
#[derive(Debug, Clone)]
pub struct SelectionContext {
    curves: Vec<RampCurve>,
    rows: Vec<Vec<f64>>,
}

impl SelectionContext {
    pub fn new(curves: &[RampCurve]) -> Result<Self, ClusterError> {
        let feats = curves
            .iter()
            .map(features::compute_features)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(SelectionContext {
            curves: curves.to_vec(),
            rows: features::standardized_matrix(&feats),
        })
    }

    pub fn curves(&self) -> &[RampCurve] {
        &self.curves
    }

    fn check_k(&self, k: usize) -> Result<(), ClusterError> {
        let n = self.curves.len();
        if k < 2 || k > n {
            return Err(ClusterError::KOutOfRange { k, n });
        }
        Ok(())
    }

    fn labels(&self, mask: FeatureMask, k: usize, rng_seed: u64) -> Vec<usize> {
        let rows: Vec<Vec<f64>> = self
            .rows
            .iter()
            .map(|r| features::select_columns(r, mask))
            .collect();
        super::canonical_labels(&kmeans_rows(&rows, k, rng_seed))
    }

    pub fn cluster(&self, mask: FeatureMask, k: usize, rng_seed: u64) -> Result<Clustering, ClusterError> {
        self.check_k(k)?;
        let labels = self.labels(mask, k, rng_seed);
        Clustering::score(&self.curves, &labels, Method::KMeans, Some(mask))
    }

    /// Clusters and scores one (subset, k) configuration.
    pub fn evaluate(&self, mask: FeatureMask, k: usize, rng_seed: u64) -> Result<ConfigScore, ClusterError> {
        self.check_k(k)?;
        let labels = self.labels(mask, k, rng_seed);
        let clusters = labels.iter().max().map_or(0, |m| m + 1);
        let scores = score_partition(&self.curves, &labels, clusters)?;
        let valid = scores.sizes.iter().all(|&s| s >= 2);
        Ok(ConfigScore {
            mask,
            k,
            sizes: scores.sizes,
            tightness_per_cluster: scores.per_cluster,
            score: if valid { scores.weighted } else { None },
            unweighted: if valid { scores.unweighted } else { None },
            labels,
        })
    }
}

/// One row of the subset-search table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigScore {
    pub mask: FeatureMask,
    /// Requested number of clusters.
    pub k: usize,
    /// Sizes of the non-empty clusters found.
    pub sizes: Vec<usize>,
    pub tightness_per_cluster: Vec<Option<f64>>,
    /// Size-weighted mean tightness; `None` when the configuration is
    /// rejected for containing a cluster smaller than 2.
    pub score: Option<f64>,
    pub unweighted: Option<f64>,
    pub labels: Vec<usize>,
}

impl ConfigScore {
    pub fn is_valid(&self) -> bool {
        self.score.is_some()
    }
}

/// Index of the best row: lowest score, then smaller k, then smaller mask.
pub fn select_best(table: &[ConfigScore]) -> Option<usize> {
    table
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.score.map(|s| (i, s, r.k, r.mask)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)).then(a.3.cmp(&b.3)))
        .map(|(i, ..)| i)
}

/// Configuration grid in table order: masks ascending, then k ascending.
pub fn grid(k_range: RangeInclusive<usize>) -> Vec<(FeatureMask, usize)> {
    FeatureMask::all()
        .flat_map(|m| k_range.clone().map(move |k| (m, k)))
        .collect()
}

pub fn check_selection_input(n: usize, k_range: &RangeInclusive<usize>) -> Result<(), ClusterError> {
    if n < MIN_SELECTION_CURVES {
        return Err(ClusterError::TooFewCurves {
            need: MIN_SELECTION_CURVES,
            got: n,
        });
    }
    let (lo, hi) = (*k_range.start(), *k_range.end());
    if lo < 2 || hi < lo || hi > n {
        return Err(ClusterError::BadKRange { lo, hi });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SelectionResult {
    pub best: ConfigScore,
    pub clustering: Clustering,
    pub table: Vec<ConfigScore>,
}

/// Assembles the result from a fully evaluated table (in [`grid`] order).
pub fn finish_selection(
    ctx: &SelectionContext,
    table: Vec<ConfigScore>,
) -> Result<SelectionResult, ClusterError> {
    let best = select_best(&table).ok_or(ClusterError::AllRejected(table.len()))?;
    let best = table[best].clone();
    let clustering = Clustering::score(&ctx.curves, &best.labels, Method::KMeans, Some(best.mask))?;
    Ok(SelectionResult {
        best,
        clustering,
        table,
    })
}

/// Evaluates every non-empty feature subset for every k in `k_range` and
/// returns the tightest valid configuration with the full score table.
pub fn feature_selection(
    curves: &[RampCurve],
    k_range: RangeInclusive<usize>,
    rng_seed: u64,
) -> Result<SelectionResult, ClusterError> {
    check_selection_input(curves.len(), &k_range)?;
    let ctx = SelectionContext::new(curves)?;
    let table = grid(k_range)
        .into_iter()
        .map(|(m, k)| ctx.evaluate(m, k, rng_seed))
        .collect::<Result<Vec<_>, _>>()?;
    finish_selection(&ctx, table)
}

pub fn kmeans_cluster(
    curves: &[RampCurve],
    k: usize,
    subset: FeatureMask,
    rng_seed: u64,
) -> Result<Clustering, ClusterError> {
    let n = curves.len();
    if k < 2 || k > n {
        return Err(ClusterError::KOutOfRange { k, n });
    }
    SelectionContext::new(curves)?.cluster(subset, k, rng_seed)
}
