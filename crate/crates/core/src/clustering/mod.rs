//! Grouping normalized curves by structure and scoring the groups.
//!
//! Two methods are provided: k-means over standardized curve features with
//! an exhaustive feature-subset search ([`kmeans`]), and a Chinese
//! restaurant process Gibbs sampler over an elastic shape/length metric
//! ([`elastic`]). Both are judged by [`tightness`] on aligned clusters.

pub mod elastic;
pub mod kmeans;

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::colorspace::delta_e;
use crate::curve::{self, CurveError, RampCurve};
use crate::features::{FeatureError, FeatureMask};

pub use elastic::{
    elastic_cluster, srvf, srvf_distance, weight_sweep, weighted_distance, ElasticMetric,
    ElasticParams, SrvfSignature, SweepRow, WeightSweep,
};
pub use kmeans::{feature_selection, kmeans_cluster, ConfigScore, SelectionContext, SelectionResult};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("tightness is undefined for a cluster of {0} curve(s); at least 2 are required")]
    UndefinedTightness(usize),
    #[error("need at least {need} curves, got {got}")]
    TooFewCurves { need: usize, got: usize },
    #[error("k = {k} is out of range for {n} curves (need 2 <= k <= n)")]
    KOutOfRange { k: usize, n: usize },
    #[error("k range {lo}..={hi} is empty or starts below 2")]
    BadKRange { lo: usize, hi: usize },
    #[error("weight w = {0} is outside [0, 1]")]
    BadWeight(f64),
    #[error("invalid sampler parameter: {0}")]
    BadParameter(&'static str),
    #[error("every configuration was rejected ({0} evaluated); each produced a singleton cluster")]
    AllRejected(usize),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    KMeans,
    Elastic,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::KMeans => "kmeans",
            Method::Elastic => "elastic",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl core::str::FromStr for Method {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "kmeans" => Ok(Method::KMeans),
            "elastic" => Ok(Method::Elastic),
            _ => Err(()),
        }
    }
}

/// A partition of a curve set into clusters, with tightness scores.
///
/// `assignments[i]` is the cluster of the i-th input curve. Cluster indices
/// are contiguous from 0 and numbered in order of first appearance.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub ids: Vec<String>,
    pub assignments: Vec<usize>,
    pub k: usize,
    pub method: Method,
    pub feature_subset: Option<FeatureMask>,
    /// `None` for singleton clusters, whose tightness is undefined.
    pub tightness_per_cluster: Vec<Option<f64>>,
    /// Size-weighted mean tightness over clusters with two or more members.
    pub mean_tightness: Option<f64>,
    /// Unweighted mean over the same clusters.
    pub unweighted_tightness: Option<f64>,
}

impl Clustering {
    pub(crate) fn score(
        curves: &[RampCurve],
        labels: &[usize],
        method: Method,
        feature_subset: Option<FeatureMask>,
    ) -> Result<Clustering, ClusterError> {
        let assignments = canonical_labels(labels);
        let k = assignments.iter().max().map_or(0, |m| m + 1);
        let scores = score_partition(curves, &assignments, k)?;
        Ok(Clustering {
            ids: curve_ids(curves),
            assignments,
            k,
            method,
            feature_subset,
            tightness_per_cluster: scores.per_cluster,
            mean_tightness: scores.weighted,
            unweighted_tightness: scores.unweighted,
        })
    }

    /// Member indices of each cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &c) in self.assignments.iter().enumerate() {
            out[c].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members().iter().map(Vec::len).collect()
    }

    pub fn has_singletons(&self) -> bool {
        self.sizes().iter().any(|&s| s < 2)
    }

    pub fn assignment_map(&self) -> BTreeMap<String, usize> {
        self.ids
            .iter()
            .cloned()
            .zip(self.assignments.iter().copied())
            .collect()
    }
}

pub(crate) fn curve_ids(curves: &[RampCurve]) -> Vec<String> {
    curves
        .iter()
        .enumerate()
        .map(|(i, c)| c.origin_id.clone().unwrap_or_else(|| i.to_string()))
        .collect()
}

/// Relabels so that clusters are numbered 0, 1, ... in order of first
/// appearance.
pub fn canonical_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Mean summed distance between corresponding control points over all
/// ordered pairs of distinct curves:
/// `1 / (n (n - 1)) * sum_i sum_j sum_x |c_i(x) - c_j(x)|`.
///
/// The curves are expected to be aligned already.
pub fn tightness(cluster: &[RampCurve]) -> Result<f64, ClusterError> {
    let n = cluster.len();
    if n < 2 {
        return Err(ClusterError::UndefinedTightness(n));
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += cluster[i]
                .points
                .iter()
                .zip(&cluster[j].points)
                .map(|(p, q)| delta_e(*p, *q))
                .sum::<f64>();
        }
    }
    // Each unordered pair stands for both ordered pairs.
    Ok(2.0 * sum / (n * (n - 1)) as f64)
}

/// Aligns a cluster and returns its tightness.
pub fn aligned_tightness(cluster: &[RampCurve]) -> Result<f64, ClusterError> {
    if cluster.len() < 2 {
        return Err(ClusterError::UndefinedTightness(cluster.len()));
    }
    tightness(&curve::aligned_points(cluster)?)
}

pub(crate) struct PartitionScores {
    pub per_cluster: Vec<Option<f64>>,
    pub sizes: Vec<usize>,
    pub weighted: Option<f64>,
    pub unweighted: Option<f64>,
}

pub(crate) fn score_partition(
    curves: &[RampCurve],
    labels: &[usize],
    k: usize,
) -> Result<PartitionScores, ClusterError> {
    let mut groups: Vec<Vec<RampCurve>> = vec![Vec::new(); k];
    for (c, &l) in curves.iter().zip(labels) {
        groups[l].push(c.clone());
    }
    let mut per_cluster = Vec::with_capacity(k);
    for g in &groups {
        per_cluster.push(if g.len() >= 2 {
            Some(aligned_tightness(g)?)
        } else {
            None
        });
    }
    let sizes: Vec<usize> = groups.iter().map(Vec::len).collect();
    let (weighted, unweighted) = weighted_means(&per_cluster, &sizes);
    Ok(PartitionScores {
        per_cluster,
        sizes,
        weighted,
        unweighted,
    })
}

/// Size-weighted and plain means of the defined per-cluster tightnesses.
pub fn weighted_means(per_cluster: &[Option<f64>], sizes: &[usize]) -> (Option<f64>, Option<f64>) {
    let mut wsum = 0.0;
    let mut wtot = 0usize;
    let mut usum = 0.0;
    let mut ucount = 0usize;
    for (t, &s) in per_cluster.iter().zip(sizes) {
        if let Some(t) = t {
            wsum += t * s as f64;
            wtot += s;
            usum += t;
            ucount += 1;
        }
    }
    if ucount == 0 {
        (None, None)
    } else {
        (Some(wsum / wtot as f64), Some(usum / ucount as f64))
    }
}
