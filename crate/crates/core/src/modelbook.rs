//! Representative curves per cluster and the trained model book.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::RangeInclusive;

use libm::{acos, sqrt};
use thiserror::Error;

use crate::clustering::{
    elastic, feature_selection, kmeans::MIN_SELECTION_CURVES, ClusterError, Clustering,
    ElasticParams, Method, SelectionResult, WeightSweep,
};
use crate::colorspace::LabColor;
use crate::curve::{self, fit_and_resample, CurveError, RampCurve, RampKind, RawRamp, CONTROL_POINTS, MIDDLE};
use crate::features::FeatureMask;
use crate::linalg::{self, Vec3};

pub const MODELBOOK_VERSION: u32 = 1;
pub const DEFAULT_DIVERGING_ANGLE: f64 = 115.0;
pub const DEFAULT_ROTATION_LIMIT: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("a representative needs at least 2 curves, got {0}")]
    ClusterTooSmall(usize),
    #[error("training needs at least {need} sequential ramps, got {got}")]
    InsufficientCorpus { need: usize, got: usize },
    #[error("duplicate model id {0:?}")]
    DuplicateId(String),
    #[error("model {id:?}: {reason}")]
    InvalidModel { id: String, reason: String },
    #[error("{name} = {value} is outside {range}")]
    BadAngle {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

/// A representative curve with the lightness profile of its cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct RampModel {
    pub id: String,
    pub method: Method,
    /// Mean aligned curve; a*-b* centroid at the origin, mean L equal to the
    /// mean of `l_profile`.
    pub shape: [LabColor; CONTROL_POINTS],
    /// Mean L* of the (unaligned) members at each control index.
    pub l_profile: [f64; CONTROL_POINTS],
    pub cluster_size: usize,
    pub member_ids: Vec<String>,
}

impl RampModel {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |reason: String| ModelError::InvalidModel {
            id: self.id.clone(),
            reason,
        };
        if self.cluster_size < 2 {
            return Err(bad(format!("cluster_size {} is below 2", self.cluster_size)));
        }
        if self.cluster_size != self.member_ids.len() {
            return Err(bad(format!(
                "cluster_size {} does not match {} member ids",
                self.cluster_size,
                self.member_ids.len()
            )));
        }
        if let Some(i) = self.l_profile.iter().position(|l| !(0.0..=100.0).contains(l)) {
            return Err(bad(format!("l_profile[{i}] = {} is outside [0, 100]", self.l_profile[i])));
        }
        if let Some(i) = self.shape.iter().position(|p| !p.is_finite()) {
            return Err(bad(format!("shape[{i}] is not finite")));
        }
        Ok(())
    }

    /// True when `l_profile` is strictly increasing or strictly decreasing.
    pub fn monotone_profile(&self) -> bool {
        let p = &self.l_profile;
        p.windows(2).all(|w| w[1] > w[0]) || p.windows(2).all(|w| w[1] < w[0])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelBook {
    pub version: u32,
    pub corpus_fingerprint: String,
    pub models: Vec<RampModel>,
    pub diverging_angle_degrees: f64,
    pub diverging_rotation_limit_degrees: f64,
}

impl ModelBook {
    pub fn empty(corpus_fingerprint: impl Into<String>) -> Self {
        ModelBook {
            version: MODELBOOK_VERSION,
            corpus_fingerprint: corpus_fingerprint.into(),
            models: Vec::new(),
            diverging_angle_degrees: DEFAULT_DIVERGING_ANGLE,
            diverging_rotation_limit_degrees: DEFAULT_ROTATION_LIMIT,
        }
    }

    pub fn model(&self, id: &str) -> Option<&RampModel> {
        self.models.iter().find(|m| m.id == id)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let a = self.diverging_angle_degrees;
        if !(a > 0.0 && a <= 180.0) {
            return Err(ModelError::BadAngle {
                name: "diverging_angle_degrees",
                value: a,
                range: "(0, 180]",
            });
        }
        let r = self.diverging_rotation_limit_degrees;
        if !(r > 0.0 && r <= 90.0) {
            return Err(ModelError::BadAngle {
                name: "diverging_rotation_limit_degrees",
                value: r,
                range: "(0, 90]",
            });
        }
        let mut seen = BTreeSet::new();
        for m in &self.models {
            if !seen.insert(m.id.as_str()) {
                return Err(ModelError::DuplicateId(m.id.clone()));
            }
            m.validate()?;
        }
        Ok(())
    }
}

fn centroid(points: &[LabColor]) -> LabColor {
    let sum = points.iter().fold(LabColor::ORIGIN, |acc, p| acc.add(*p));
    sum.scale(1.0 / points.len() as f64)
}

fn residual(src: &[Vec3], dst: &[Vec3], r: &linalg::Mat3) -> f64 {
    src.iter()
        .zip(dst)
        .map(|(s, d)| {
            let e = linalg::sub(*d, linalg::mat_vec(r, *s));
            linalg::dot(e, e)
        })
        .sum()
}

/// Builds the representative of one cluster. `id` and `method` are copied
/// into the model; member ids come from the curves' `origin_id`s.
pub fn build_representative(
    cluster: &[RampCurve],
    id: impl Into<String>,
    method: Method,
) -> Result<RampModel, ModelError> {
    let n = cluster.len();
    if n < 2 {
        return Err(ModelError::ClusterTooSmall(n));
    }
    let aligned = curve::aligned_points(cluster)?;
    let inv = 1.0 / n as f64;
    let mean: [LabColor; CONTROL_POINTS] = core::array::from_fn(|x| {
        aligned
            .iter()
            .fold(LabColor::ORIGIN, |acc, c| acc.add(c.points[x]))
            .scale(inv)
    });
    let l_profile: [f64; CONTROL_POINTS] =
        core::array::from_fn(|x| cluster.iter().map(|c| c.points[x].l).sum::<f64>() * inv);

    // The aligned frame discards the members' orientation in L*. Turn the
    // mean back onto the mean of the start-translated originals so that its
    // L channel runs the same way as the cluster's.
    let target: [LabColor; CONTROL_POINTS] = core::array::from_fn(|x| {
        cluster
            .iter()
            .fold(LabColor::ORIGIN, |acc, c| acc.add(c.points[x].sub(c.first())))
            .scale(inv)
    });
    let (mc, tc) = (centroid(&mean), centroid(&target));
    let src: Vec<Vec3> = mean.iter().map(|p| p.sub(mc).to_array()).collect();
    let dst: Vec<Vec3> = target.iter().map(|p| p.sub(tc).to_array()).collect();
    let proper = linalg::optimal_rotation(&src, &dst);
    let flip = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]];
    let flipped: Vec<Vec3> = src.iter().map(|v| linalg::mat_vec(&flip, *v)).collect();
    let improper = linalg::mat_mul(&linalg::optimal_rotation(&flipped, &dst), &flip);
    let r = if residual(&src, &dst, &improper) < residual(&src, &dst, &proper) - 1e-12 {
        improper
    } else {
        proper
    };
    // Hue differences between members shrink the target's a*-b* extent, so
    // the fit above can tilt chroma into L. Tip the shape, by the smallest
    // rotation, so that its L channel best reproduces the profile.
    let p_mean = l_profile.iter().sum::<f64>() * inv_points();
    let p: Vec<f64> = l_profile.iter().map(|l| l - p_mean).collect();
    let r = match lightness_axis(&src, &p) {
        Some(u) => linalg::mat_mul(&linalg::rotation_between(linalg::mat_vec(&r, u), [1.0, 0.0, 0.0]), &r),
        None => r,
    };
    let oriented: [LabColor; CONTROL_POINTS] =
        core::array::from_fn(|x| LabColor::from_array(linalg::mat_vec(&r, src[x])));

    let l_mean = l_profile.iter().sum::<f64>() * inv_points();
    let c = centroid(&oriented);
    let shift = LabColor::new(l_mean - c.l, -c.a, -c.b);
    let shape = oriented.map(|p| p.add(shift));

    Ok(RampModel {
        id: id.into(),
        method,
        shape,
        l_profile,
        cluster_size: n,
        member_ids: crate::clustering::curve_ids(cluster),
    })
}

/// Unit vector `u` minimising `sum (u . s_x - p_x)^2`: the direction in
/// the shape's own frame that should become L*. `None` in the degenerate
/// case where the minimiser is not unique.
fn lightness_axis(src: &[Vec3], p: &[f64]) -> Option<Vec3> {
    let mut m = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    for (s, pv) in src.iter().zip(p) {
        for a in 0..3 {
            g[a] += pv * s[a];
            for b in 0..3 {
                m[a][b] += s[a] * s[b];
            }
        }
    }
    let (values, vectors) = linalg::jacobi_eigen(&m);
    let gk: [f64; 3] = core::array::from_fn(|k| (0..3).map(|r| vectors[r][k] * g[r]).sum());
    let kmin = (0..3).min_by(|&i, &j| values[i].total_cmp(&values[j]))?;
    let gnorm = linalg::norm(g);
    if gnorm == 0.0 || libm::fabs(gk[kmin]) <= 1e-9 * gnorm {
        return None;
    }
    // On the sphere the minimiser is (M - mu I)^-1 g for the unique
    // mu < lambda_min that gives it unit length.
    let coeffs = |mu: f64| -> [f64; 3] { core::array::from_fn(|k| gk[k] / (values[k] - mu)) };
    let len2 = |mu: f64| coeffs(mu).iter().map(|c| c * c).sum::<f64>();
    let (mut lo, mut hi) = (values[kmin] - gnorm - 1.0, values[kmin]);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if len2(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let c = coeffs(lo);
    let u: Vec3 = core::array::from_fn(|r| (0..3).map(|k| vectors[r][k] * c[k]).sum());
    let n = linalg::norm(u);
    (n > 0.0).then(|| linalg::scale(u, 1.0 / n))
}

fn inv_points() -> f64 {
    1.0 / CONTROL_POINTS as f64
}

/// One model per cluster with at least two members, numbered by
/// descending cluster size (ties keep cluster order).
pub fn models_from_clustering(
    curves: &[RampCurve],
    clustering: &Clustering,
) -> Result<Vec<RampModel>, ModelError> {
    let mut groups: Vec<Vec<RampCurve>> = clustering
        .members()
        .into_iter()
        .filter(|m| m.len() >= 2)
        .map(|m| m.into_iter().map(|i| curves[i].clone()).collect())
        .collect();
    groups.sort_by(|a, b| b.len().cmp(&a.len()));
    groups
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let id = format!("{}-{}", clustering.method, i);
            build_representative(g, id, clustering.method)
        })
        .collect()
}

/// Angle in degrees between the a*-b* chords from the center control point
/// to each end of a normalized diverging ramp. `None` if either chord has
/// no a*-b* extent.
pub fn arm_angle(c: &RampCurve) -> Option<f64> {
    let center = c.points[MIDDLE];
    let u = c.first().sub(center);
    let v = c.last().sub(center);
    let (nu, nv) = (sqrt(u.a * u.a + u.b * u.b), sqrt(v.a * v.a + v.b * v.b));
    if nu == 0.0 || nv == 0.0 {
        return None;
    }
    let cos = ((u.a * v.a + u.b * v.b) / (nu * nv)).clamp(-1.0, 1.0);
    Some(acos(cos).to_degrees())
}

/// Mean arm angle over the diverging ramps of a corpus, or
/// [`DEFAULT_DIVERGING_ANGLE`] when there are none.
pub fn diverging_angle(ramps: &[RawRamp]) -> Result<f64, ModelError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for r in ramps.iter().filter(|r| r.kind == RampKind::Diverging) {
        if let Some(a) = arm_angle(&fit_and_resample(r)?) {
            sum += a;
            count += 1;
        }
    }
    Ok(if count == 0 {
        DEFAULT_DIVERGING_ANGLE
    } else {
        sum / count as f64
    })
}

/// Weight for the elastic metric: fixed, or chosen by [`weight_sweep`].
///
/// [`weight_sweep`]: crate::clustering::weight_sweep
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElasticWeight {
    Sweep,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub rng_seed: u64,
    pub k_range: RangeInclusive<usize>,
    /// Skip feature selection and run k-means with this `(k, subset)`.
    pub kmeans_fixed: Option<(usize, FeatureMask)>,
    pub elastic_weight: ElasticWeight,
    pub elastic: ElasticParams,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rng_seed: 42,
            k_range: 2..=15,
            kmeans_fixed: None,
            elastic_weight: ElasticWeight::Sweep,
            elastic: ElasticParams::default(),
        }
    }
}

impl TrainConfig {
    fn elastic_params(&self) -> ElasticParams {
        ElasticParams {
            rng_seed: self.rng_seed,
            ..self.elastic
        }
    }
}

/// Everything produced by training, including diagnostics.
#[derive(Debug, Clone)]
pub struct TrainReport {
    pub book: ModelBook,
    pub curves: Vec<RampCurve>,
    pub kmeans: Clustering,
    pub selection: Option<SelectionResult>,
    pub elastic: Clustering,
    pub sweep: Option<WeightSweep>,
    pub elastic_w: f64,
}

/// The ramp with its lighter end first.
pub fn light_first(ramp: &RawRamp) -> RawRamp {
    let mut out = ramp.clone();
    if let (Some(first), Some(last)) = (ramp.colors.first(), ramp.colors.last()) {
        if last.l > first.l {
            out.colors.reverse();
        }
    }
    out
}

/// Normalized sequential curves of a corpus, in corpus order, each running
/// from its lighter end.
pub fn sequential_curves(ramps: &[RawRamp]) -> Result<Vec<RampCurve>, ModelError> {
    Ok(ramps
        .iter()
        .filter(|r| r.kind == RampKind::Sequential)
        .map(|r| fit_and_resample(&light_first(r)))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Trains with a caller-supplied feature-selection routine (used to plug in
/// a parallel grid search).
pub fn train_with<F>(
    ramps: &[RawRamp],
    corpus_fingerprint: &str,
    config: &TrainConfig,
    select: F,
) -> Result<TrainReport, ModelError>
where
    F: FnOnce(&[RampCurve], RangeInclusive<usize>, u64) -> Result<SelectionResult, ClusterError>,
{
    let curves = sequential_curves(ramps)?;
    if curves.len() < MIN_SELECTION_CURVES {
        return Err(ModelError::InsufficientCorpus {
            need: MIN_SELECTION_CURVES,
            got: curves.len(),
        });
    }
    let (kmeans, selection) = match config.kmeans_fixed {
        Some((k, mask)) => (
            crate::clustering::kmeans_cluster(&curves, k, mask, config.rng_seed)?,
            None,
        ),
        None => {
            let sel = select(&curves, config.k_range.clone(), config.rng_seed)?;
            (sel.clustering.clone(), Some(sel))
        }
    };
    let params = config.elastic_params();
    let (elastic, sweep, elastic_w) = match config.elastic_weight {
        ElasticWeight::Fixed(w) => (elastic::elastic_cluster(&curves, w, &params)?, None, w),
        ElasticWeight::Sweep => {
            let sweep = elastic::weight_sweep(&curves, &params)?;
            let row = sweep.best_row().clone();
            (row.clustering, Some(sweep), row.w)
        }
    };
    let mut models = models_from_clustering(&curves, &kmeans)?;
    models.extend(models_from_clustering(&curves, &elastic)?);
    let book = ModelBook {
        version: MODELBOOK_VERSION,
        corpus_fingerprint: corpus_fingerprint.into(),
        models,
        diverging_angle_degrees: diverging_angle(ramps)?,
        diverging_rotation_limit_degrees: DEFAULT_ROTATION_LIMIT,
    };
    book.validate()?;
    Ok(TrainReport {
        book,
        curves,
        kmeans,
        selection,
        elastic,
        sweep,
        elastic_w,
    })
}

pub fn train(ramps: &[RawRamp], corpus_fingerprint: &str, config: &TrainConfig) -> Result<TrainReport, ModelError> {
    train_with(ramps, corpus_fingerprint, config, feature_selection)
}

/// The model book alone; see [`train`] for the diagnostics.
pub fn build_modelbook(
    ramps: &[RawRamp],
    corpus_fingerprint: &str,
    config: &TrainConfig,
) -> Result<ModelBook, ModelError> {
    Ok(train(ramps, corpus_fingerprint, config)?.book)
}
