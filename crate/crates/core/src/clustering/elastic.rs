//! Elastic shape metric (square-root velocity functions) combined with a
//! curve-length term, and a Chinese restaurant process Gibbs sampler that
//! infers the number of clusters from the resulting distance matrix.
//!
//! The sampler is a compact stand-in for a full Bayesian curve-clustering
//! model: each curve is scored against the medoid of a candidate cluster with
//! a Gaussian pseudo-likelihood `exp(-d^2 / (2 sigma^2))`. A new table is
//! opened with weight `alpha * exp(-d0^2 / (2 sigma^2))`, where `d0` is the
//! median pairwise distance. The highest-posterior partition visited is
//! returned.

use alloc::vec;
use alloc::vec::Vec;

use libm::{exp, lgamma, log, sqrt};
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

use super::kmeans::unit_f64;
use super::{ClusterError, Clustering, Method};
use crate::curve::{curve_length, RampCurve, CONTROL_POINTS};
use crate::features::FeatureError;
use crate::linalg::{self, Vec3};

const SEGMENTS: usize = CONTROL_POINTS - 1;
const STEP: f64 = 1.0 / SEGMENTS as f64;

/// Square-root velocity samples `q = v / sqrt(|v|)` of a curve scaled to
/// unit length, one per segment of the uniform parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrvfSignature {
    pub samples: [Vec3; SEGMENTS],
}

pub fn srvf(c: &RampCurve) -> Result<SrvfSignature, FeatureError> {
    let segs = c.segments();
    if let Some(segment) = segs.iter().position(|d| *d == 0.0) {
        return Err(FeatureError::DegenerateSegment { segment });
    }
    let total: f64 = segs.iter().sum();
    let samples = core::array::from_fn(|k| {
        let d = c.points[k + 1].sub(c.points[k]).to_array();
        let v = linalg::scale(d, 1.0 / (total * STEP));
        linalg::scale(v, 1.0 / sqrt(linalg::norm(v)))
    });
    Ok(SrvfSignature { samples })
}

fn l2(a: &[Vec3; SEGMENTS], b: &[Vec3; SEGMENTS]) -> f64 {
    let ss: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = linalg::sub(*x, *y);
            linalg::dot(d, d)
        })
        .sum();
    sqrt(ss * STEP)
}

/// L2 distance between two signatures, minimised over rotations and an
/// optional reflection of the second.
pub fn srvf_distance(a: &SrvfSignature, b: &SrvfSignature) -> f64 {
    let mut best = f64::INFINITY;
    for reflect in [false, true] {
        let src: [Vec3; SEGMENTS] = if reflect {
            b.samples.map(|v| [v[0], v[1], -v[2]])
        } else {
            b.samples
        };
        let r = linalg::optimal_rotation(&src, &a.samples);
        let rotated = src.map(|v| linalg::mat_vec(&r, v));
        best = best.min(l2(&a.samples, &rotated));
    }
    best
}

/// The weighted distance with both terms scaled to `[0, 1]` by the maxima
/// observed over a corpus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticMetric {
    pub shape_max: f64,
    pub length_max: f64,
}

impl Default for ElasticMetric {
    fn default() -> Self {
        ElasticMetric {
            shape_max: 1.0,
            length_max: 1.0,
        }
    }
}

/// Pairwise normalized shape and length distances for a set of curves.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrices {
    pub n: usize,
    pub shape: Vec<f64>,
    pub length: Vec<f64>,
    pub metric: ElasticMetric,
}

impl DistanceMatrices {
    pub fn new(curves: &[RampCurve]) -> Result<Self, ClusterError> {
        let n = curves.len();
        let sigs = curves.iter().map(srvf).collect::<Result<Vec<_>, _>>()?;
        let lens: Vec<f64> = curves.iter().map(curve_length).collect();
        let mut shape = vec![0.0; n * n];
        let mut length = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let s = srvf_distance(&sigs[i], &sigs[j]);
                let l = (lens[i] - lens[j]).abs();
                shape[i * n + j] = s;
                shape[j * n + i] = s;
                length[i * n + j] = l;
                length[j * n + i] = l;
            }
        }
        let max = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(*x));
        let metric = ElasticMetric {
            shape_max: positive_or_one(max(&shape)),
            length_max: positive_or_one(max(&length)),
        };
        shape.iter_mut().for_each(|v| *v /= metric.shape_max);
        length.iter_mut().for_each(|v| *v /= metric.length_max);
        Ok(DistanceMatrices {
            n,
            shape,
            length,
            metric,
        })
    }

    pub fn weighted(&self, w: f64) -> Vec<f64> {
        self.shape
            .iter()
            .zip(&self.length)
            .map(|(s, l)| w * s + (1.0 - w) * l)
            .collect()
    }
}

fn positive_or_one(v: f64) -> f64 {
    if v > 0.0 {
        v
    } else {
        1.0
    }
}

impl ElasticMetric {
    /// Normalization maxima over all pairs of `curves`.
    pub fn fit(curves: &[RampCurve]) -> Result<Self, ClusterError> {
        Ok(DistanceMatrices::new(curves)?.metric)
    }

    /// Normalized `(shape, length)` terms for one pair.
    pub fn terms(&self, ci: &RampCurve, cj: &RampCurve) -> Result<(f64, f64), ClusterError> {
        let s = srvf_distance(&srvf(ci)?, &srvf(cj)?) / self.shape_max;
        let l = (curve_length(ci) - curve_length(cj)).abs() / self.length_max;
        Ok((s, l))
    }

    /// `w * shape + (1 - w) * length`.
    pub fn distance(&self, ci: &RampCurve, cj: &RampCurve, w: f64) -> Result<f64, ClusterError> {
        check_weight(w)?;
        let (s, l) = self.terms(ci, cj)?;
        Ok(w * s + (1.0 - w) * l)
    }
}

fn check_weight(w: f64) -> Result<(), ClusterError> {
    if (0.0..=1.0).contains(&w) {
        Ok(())
    } else {
        Err(ClusterError::BadWeight(w))
    }
}

/// Weighted distance without corpus normalization (both scales 1).
pub fn weighted_distance(ci: &RampCurve, cj: &RampCurve, w: f64) -> Result<f64, ClusterError> {
    ElasticMetric::default().distance(ci, cj, w)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticParams {
    /// CRP concentration.
    pub alpha: f64,
    /// Kernel width; `None` derives it from the distance matrix (see
    /// [`default_sigma`]).
    pub sigma: Option<f64>,
    pub sweeps: usize,
    pub rng_seed: u64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        ElasticParams {
            alpha: 1.0,
            sigma: None,
            sweeps: 500,
            rng_seed: 42,
        }
    }
}

/// Fraction of the median pairwise distance used as the default kernel
/// width.
pub const SIGMA_FRACTION: f64 = 0.5;

/// Median off-diagonal distance. When the median is zero the smallest
/// positive distance stands in; when every distance is zero the result is 0.
pub fn median_distance(dist: &[f64], n: usize) -> f64 {
    let mut vals: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| dist[i * n + j])
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    vals.sort_by(f64::total_cmp);
    let m = vals.len();
    let median = if m % 2 == 1 {
        vals[m / 2]
    } else {
        0.5 * (vals[m / 2 - 1] + vals[m / 2])
    };
    if median > 0.0 {
        median
    } else {
        vals.iter().copied().find(|v| *v > 0.0).unwrap_or(0.0)
    }
}

/// `SIGMA_FRACTION` times [`median_distance`], or 1 when that is zero.
pub fn default_sigma(dist: &[f64], n: usize) -> f64 {
    let base = median_distance(dist, n);
    if base > 0.0 {
        SIGMA_FRACTION * base
    } else {
        1.0
    }
}

struct Table {
    members: Vec<usize>,
    // sums[j] = sum of d(j, m) over members m
    sums: Vec<f64>,
}

impl Table {
    fn medoid(&self) -> usize {
        let mut best = self.members[0];
        for &m in &self.members {
            let (s, b) = (self.sums[m], self.sums[best]);
            if s < b || (s == b && m < best) {
                best = m;
            }
        }
        best
    }
}

struct Sampler<'a> {
    dist: &'a [f64],
    n: usize,
    tables: Vec<Option<Table>>,
    labels: Vec<usize>,
}

impl Sampler<'_> {
    fn add(&mut self, i: usize, t: usize) {
        let n = self.n;
        if self.tables.len() <= t {
            self.tables.resize_with(t + 1, || None);
        }
        let table = self.tables[t].get_or_insert_with(|| Table {
            members: Vec::new(),
            sums: vec![0.0; n],
        });
        table.members.push(i);
        for (j, s) in table.sums.iter_mut().enumerate() {
            *s += self.dist[j * n + i];
        }
        self.labels[i] = t;
    }

    fn remove(&mut self, i: usize) {
        let n = self.n;
        let t = self.labels[i];
        let table = self.tables[t].as_mut().expect("occupied table");
        if let Some(pos) = table.members.iter().position(|&m| m == i) {
            table.members.remove(pos);
        }
        if table.members.is_empty() {
            self.tables[t] = None;
        } else {
            for (j, s) in table.sums.iter_mut().enumerate() {
                *s -= self.dist[j * n + i];
            }
        }
    }

    fn free_slot(&self) -> usize {
        self.tables
            .iter()
            .position(Option::is_none)
            .unwrap_or(self.tables.len())
    }

    fn log_posterior(&self, log_new: f64, inv_two_sigma2: f64) -> f64 {
        let mut lp = 0.0;
        for table in self.tables.iter().flatten() {
            let med = table.medoid();
            lp += log_new + lgamma(table.members.len() as f64);
            for &m in &table.members {
                let d = self.dist[m * self.n + med];
                lp -= d * d * inv_two_sigma2;
            }
        }
        lp
    }
}

/// CRP Gibbs clustering over a precomputed symmetric distance matrix.
/// Returns raw labels of the maximum-a-posteriori partition visited.
pub fn crp_gibbs(dist: &[f64], n: usize, params: &ElasticParams) -> Result<Vec<usize>, ClusterError> {
    if params.sweeps < 1 {
        return Err(ClusterError::BadParameter("iterations must be at least 1"));
    }
    if !(params.alpha > 0.0) {
        return Err(ClusterError::BadParameter("alpha must be positive"));
    }
    let sigma = params.sigma.unwrap_or_else(|| default_sigma(dist, n));
    if !(sigma > 0.0) {
        return Err(ClusterError::BadParameter("sigma must be positive"));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let base = median_distance(dist, n);
    let log_new = log(params.alpha) - base * base * inv;
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut s = Sampler {
        dist,
        n,
        tables: Vec::new(),
        labels: vec![0; n],
    };
    for i in 0..n {
        s.add(i, 0);
    }
    let mut best_labels = s.labels.clone();
    let mut best_lp = s.log_posterior(log_new, inv);
    let mut weights: Vec<(usize, f64)> = Vec::new();
    for _ in 0..params.sweeps {
        for i in 0..n {
            s.remove(i);
            weights.clear();
            for (t, table) in s.tables.iter().enumerate() {
                if let Some(table) = table {
                    let d = dist[i * n + table.medoid()];
                    weights.push((t, log(table.members.len() as f64) - d * d * inv));
                }
            }
            weights.push((s.free_slot(), log_new));
            let top = weights.iter().fold(f64::NEG_INFINITY, |m, w| m.max(w.1));
            let total: f64 = weights.iter().map(|w| exp(w.1 - top)).sum();
            let target = unit_f64(&mut rng) * total;
            let mut acc = 0.0;
            let mut pick = weights[weights.len() - 1].0;
            for &(t, lw) in &weights {
                acc += exp(lw - top);
                if acc > target {
                    pick = t;
                    break;
                }
            }
            s.add(i, pick);
        }
        let lp = s.log_posterior(log_new, inv);
        if lp > best_lp {
            best_lp = lp;
            best_labels = s.labels.clone();
        }
    }
    Ok(best_labels)
}

/// Clusters curves with the CRP sampler under the weighted elastic metric
/// (normalized over the input curves).
pub fn elastic_cluster(
    curves: &[RampCurve],
    w: f64,
    params: &ElasticParams,
) -> Result<Clustering, ClusterError> {
    check_weight(w)?;
    if curves.len() < 2 {
        return Err(ClusterError::TooFewCurves {
            need: 2,
            got: curves.len(),
        });
    }
    let m = DistanceMatrices::new(curves)?;
    elastic_cluster_with(curves, &m, w, params)
}

/// As [`elastic_cluster`] with precomputed distance matrices.
pub fn elastic_cluster_with(
    curves: &[RampCurve],
    m: &DistanceMatrices,
    w: f64,
    params: &ElasticParams,
) -> Result<Clustering, ClusterError> {
    check_weight(w)?;
    let labels = crp_gibbs(&m.weighted(w), m.n, params)?;
    Clustering::score(curves, &labels, Method::Elastic, None)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub w: f64,
    pub clustering: Clustering,
}

impl SweepRow {
    pub fn mean_tightness(&self) -> Option<f64> {
        self.clustering.mean_tightness
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightSweep {
    pub rows: Vec<SweepRow>,
    /// Index into `rows` of the tightest clustering.
    pub best: usize,
}

impl WeightSweep {
    pub fn best_row(&self) -> &SweepRow {
        &self.rows[self.best]
    }
}

/// The eleven weights 0.0, 0.1, ..., 1.0.
pub fn sweep_weights() -> [f64; 11] {
    core::array::from_fn(|i| i as f64 / 10.0)
}

/// Picks the row with the lowest size-weighted tightness; ties go to the
/// weight closest to 0.5, then to the smaller weight.
pub fn best_weight(rows: &[(f64, Option<f64>)]) -> usize {
    let key = |i: usize| {
        let (w, t) = rows[i];
        (t.unwrap_or(f64::INFINITY), (w - 0.5).abs(), w)
    };
    (0..rows.len())
        .min_by(|&a, &b| {
            let (ka, kb) = (key(a), key(b));
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(ka.2.total_cmp(&kb.2))
        })
        .unwrap_or(0)
}

/// Runs [`elastic_cluster`] for each weight in [`sweep_weights`] and scores
/// the aligned clusters.
pub fn weight_sweep(curves: &[RampCurve], params: &ElasticParams) -> Result<WeightSweep, ClusterError> {
    if curves.len() < 2 {
        return Err(ClusterError::TooFewCurves {
            need: 2,
            got: curves.len(),
        });
    }
    let m = DistanceMatrices::new(curves)?;
    let rows = sweep_weights()
        .into_iter()
        .map(|w| {
            Ok(SweepRow {
                w,
                clustering: elastic_cluster_with(curves, &m, w, params)?,
            })
        })
        .collect::<Result<Vec<_>, ClusterError>>()?;
    let keys: Vec<(f64, Option<f64>)> = rows.iter().map(|r| (r.w, r.mean_tightness())).collect();
    Ok(WeightSweep {
        best: best_weight(&keys),
        rows,
    })
}
