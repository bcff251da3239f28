//! Ramp curves in CIELAB: interpolating cubic spline fit, arc-length
//! resampling to nine control points, rigid cluster alignment and affine
//! edits.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{atan2, cos, sin};
use thiserror::Error;

use crate::colorspace::{delta_e, LabColor};
use crate::linalg::{self, Mat3, IDENTITY};

/// Number of control points in a normalized ramp.
pub const CONTROL_POINTS: usize = 9;

/// Index of the middle control point.
pub const MIDDLE: usize = CONTROL_POINTS / 2;

/// Uniform segments used to tabulate arc length along a fitted spline.
pub const ARC_SAMPLES: usize = 1024;

const DEGENERATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CurveError {
    #[error("ramp {id:?} has {count} distinct colors; at least 2 are required")]
    TooFewColors { id: String, count: usize },
    #[error("ramp {id:?} contains a non-finite color at index {index}")]
    NonFinite { id: String, index: usize },
    #[error("edit scale must be positive, got {0}")]
    InvalidScale(f64),
    #[error("sample count must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error("alignment needs at least one curve")]
    EmptyCluster,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RampSource {
    ColorBrewer,
    R,
    Tableau,
    ColourLovers,
    Other,
}

impl RampSource {
    pub const ALL: [RampSource; 5] = [
        RampSource::ColorBrewer,
        RampSource::R,
        RampSource::Tableau,
        RampSource::ColourLovers,
        RampSource::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            RampSource::ColorBrewer => "colorbrewer",
            RampSource::R => "r",
            RampSource::Tableau => "tableau",
            RampSource::ColourLovers => "colourlovers",
            RampSource::Other => "other",
        }
    }
}

impl fmt::Display for RampSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RampSource {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        RampSource::ALL.into_iter().find(|v| v.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RampKind {
    Sequential,
    Diverging,
}

impl RampKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RampKind::Sequential => "sequential",
            RampKind::Diverging => "diverging",
        }
    }
}

impl fmt::Display for RampKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RampKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sequential" => Ok(RampKind::Sequential),
            "diverging" => Ok(RampKind::Diverging),
            _ => Err(()),
        }
    }
}

/// A designer ramp as it appears in the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct RawRamp {
    pub id: String,
    pub source: RampSource,
    pub kind: RampKind,
    pub colors: Vec<LabColor>,
}

/// A ramp normalized to nine control points.
#[derive(Debug, Clone, PartialEq)]
pub struct RampCurve {
    pub points: [LabColor; CONTROL_POINTS],
    pub origin_id: Option<String>,
}

impl RampCurve {
    pub fn new(points: [LabColor; CONTROL_POINTS]) -> Self {
        Self {
            points,
            origin_id: None,
        }
    }

    pub fn with_id(points: [LabColor; CONTROL_POINTS], id: impl Into<String>) -> Self {
        Self {
            points,
            origin_id: Some(id.into()),
        }
    }

    pub fn first(&self) -> LabColor {
        self.points[0]
    }

    pub fn last(&self) -> LabColor {
        self.points[CONTROL_POINTS - 1]
    }

    pub fn map(&self, f: impl FnMut(LabColor) -> LabColor) -> RampCurve {
        RampCurve {
            points: self.points.map(f),
            origin_id: self.origin_id.clone(),
        }
    }

    /// Segment lengths between consecutive control points.
    pub fn segments(&self) -> [f64; CONTROL_POINTS - 1] {
        core::array::from_fn(|i| delta_e(self.points[i], self.points[i + 1]))
    }
}

/// Total length of a curve: the summed color difference between consecutive
/// control points.
pub fn curve_length(c: &RampCurve) -> f64 {
    polyline_length(&c.points)
}

pub fn polyline_length(points: &[LabColor]) -> f64 {
    points.windows(2).map(|w| delta_e(w[0], w[1])).sum()
}

/// Removes consecutive duplicate colors.
pub fn collapse_duplicates(colors: &[LabColor]) -> Vec<LabColor> {
    let mut out: Vec<LabColor> = Vec::with_capacity(colors.len());
    for &c in colors {
        if out.last() != Some(&c) {
            out.push(c);
        }
    }
    out
}

/// Interpolating curve through a sequence of colors, parameterized by
/// cumulative chord length.
///
/// With four or more knots this is the C2 cubic interpolant with not-a-knot
/// end conditions, the same curve an interpolating cubic B-spline produces.
/// With two or three knots it degrades to the polyline.
#[derive(Debug, Clone)]
pub struct Spline {
    knots: Vec<f64>,
    values: Vec<[f64; 3]>,
    // Second derivatives at the knots; empty for the piecewise-linear case.
    moments: Vec<[f64; 3]>,
}

impl Spline {
    /// Fits through `colors`, which must contain at least two points and no
    /// consecutive duplicates.
    pub fn fit(colors: &[LabColor]) -> Spline {
        let n = colors.len();
        debug_assert!(n >= 2);
        let mut knots = Vec::with_capacity(n);
        knots.push(0.0);
        for w in colors.windows(2) {
            let last = *knots.last().unwrap_or(&0.0);
            knots.push(last + delta_e(w[0], w[1]));
        }
        let values: Vec<[f64; 3]> = colors.iter().map(|c| c.to_array()).collect();
        let moments = if n >= 4 {
            not_a_knot_moments(&knots, &values).unwrap_or_default()
        } else {
            Vec::new()
        };
        Spline {
            knots,
            values,
            moments,
        }
    }

    pub fn is_cubic(&self) -> bool {
        !self.moments.is_empty()
    }

    /// Parameter range `[0, total chord length]`.
    pub fn domain(&self) -> f64 {
        *self.knots.last().unwrap_or(&0.0)
    }

    pub fn eval(&self, t: f64) -> LabColor {
        let n = self.knots.len();
        let t = t.clamp(0.0, self.domain());
        // Segment index i with knots[i] <= t <= knots[i + 1].
        let i = match self.knots.binary_search_by(|k| k.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        };
        let (t0, t1) = (self.knots[i], self.knots[i + 1]);
        let h = t1 - t0;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let mut out = [0.0; 3];
        if self.moments.is_empty() {
            let u = (t - t0) / h;
            for k in 0..3 {
                out[k] = y0[k] + (y1[k] - y0[k]) * u;
            }
        } else {
            let (m0, m1) = (self.moments[i], self.moments[i + 1]);
            let (a, b) = (t1 - t, t - t0);
            for k in 0..3 {
                out[k] = m0[k] * a * a * a / (6.0 * h)
                    + m1[k] * b * b * b / (6.0 * h)
                    + (y0[k] / h - m0[k] * h / 6.0) * a
                    + (y1[k] / h - m1[k] * h / 6.0) * b;
            }
        }
        LabColor::from_array(out)
    }

    /// Samples `m >= 2` points equally spaced in arc length. The first and
    /// last samples are the spline's end knots exactly.
    pub fn resample(&self, m: usize) -> Vec<LabColor> {
        let domain = self.domain();
        let params: Vec<f64> = (0..=ARC_SAMPLES)
            .map(|j| domain * j as f64 / ARC_SAMPLES as f64)
            .collect();
        let pts: Vec<LabColor> = params.iter().map(|&t| self.eval(t)).collect();
        let mut cum = Vec::with_capacity(pts.len());
        cum.push(0.0);
        for w in pts.windows(2) {
            let last = *cum.last().unwrap_or(&0.0);
            cum.push(last + delta_e(w[0], w[1]));
        }
        let total = *cum.last().unwrap_or(&0.0);
        let first = LabColor::from_array(self.values[0]);
        let last = LabColor::from_array(self.values[self.values.len() - 1]);
        let mut out = Vec::with_capacity(m);
        out.push(first);
        let mut seg = 0;
        for j in 1..m - 1 {
            let target = total * j as f64 / (m - 1) as f64;
            while seg + 1 < ARC_SAMPLES && cum[seg + 1] < target {
                seg += 1;
            }
            let span = cum[seg + 1] - cum[seg];
            let u = if span > 0.0 {
                ((target - cum[seg]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            out.push(self.eval(params[seg] + u * (params[seg + 1] - params[seg])));
        }
        out.push(last);
        out
    }
}

fn not_a_knot_moments(knots: &[f64], values: &[[f64; 3]]) -> Option<Vec<[f64; 3]>> {
    let n = knots.len();
    let h: Vec<f64> = knots.windows(2).map(|w| w[1] - w[0]).collect();
    let mut a = vec![0.0; n * n];
    let mut rhs = vec![[0.0; 3]; n];
    // Third-derivative continuity across the second and second-to-last knots.
    a[0] = -h[1];
    a[1] = h[0] + h[1];
    a[2] = -h[0];
    for i in 1..n - 1 {
        a[i * n + i - 1] = h[i - 1];
        a[i * n + i] = 2.0 * (h[i - 1] + h[i]);
        a[i * n + i + 1] = h[i];
        for k in 0..3 {
            rhs[i][k] = 6.0
                * ((values[i + 1][k] - values[i][k]) / h[i]
                    - (values[i][k] - values[i - 1][k]) / h[i - 1]);
        }
    }
    let last = (n - 1) * n;
    a[last + n - 3] = -h[n - 2];
    a[last + n - 2] = h[n - 3] + h[n - 2];
    a[last + n - 1] = -h[n - 3];
    linalg::solve_dense(a, rhs, n, 1e-13)
}

/// Fits the interpolating spline through a ramp and resamples it to nine
/// arc-length-equidistant control points.
pub fn fit_and_resample(ramp: &RawRamp) -> Result<RampCurve, CurveError> {
    let pts = resample_colors(&ramp.colors, CONTROL_POINTS).map_err(|e| match e {
        CurveError::TooFewColors { count, .. } => CurveError::TooFewColors {
            id: ramp.id.clone(),
            count,
        },
        CurveError::NonFinite { index, .. } => CurveError::NonFinite {
            id: ramp.id.clone(),
            index,
        },
        other => other,
    })?;
    let mut points = [LabColor::ORIGIN; CONTROL_POINTS];
    points.copy_from_slice(&pts);
    Ok(RampCurve::with_id(points, ramp.id.clone()))
}

/// Fits the interpolating spline through arbitrary colors and samples `m`
/// arc-length-equidistant points from it.
pub fn resample_colors(colors: &[LabColor], m: usize) -> Result<Vec<LabColor>, CurveError> {
    if m < 2 {
        return Err(CurveError::TooFewSamples(m));
    }
    if let Some(index) = colors.iter().position(|c| !c.is_finite()) {
        return Err(CurveError::NonFinite {
            id: String::new(),
            index,
        });
    }
    let distinct = collapse_duplicates(colors);
    if distinct.len() < 2 {
        return Err(CurveError::TooFewColors {
            id: String::new(),
            count: distinct.len(),
        });
    }
    Ok(Spline::fit(&distinct).resample(m))
}

/// Which vector fixed a curve's orientation during alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignAnchor {
    /// First to middle control point.
    Middle,
    /// First to last control point; the middle coincided with the start.
    Last,
    /// All control points coincide with the start; translated only.
    TranslatedOnly,
}

/// The rigid motion applied to one curve by [`align_cluster`]:
/// `aligned = M * (p - start)` where `M` is `rotation` optionally followed by
/// the `b* -> -b*` reflection.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignTransform {
    pub start: LabColor,
    pub rotation: Mat3,
    pub reflected: bool,
    pub anchor: AlignAnchor,
}

impl AlignTransform {
    pub fn apply(&self, p: LabColor) -> LabColor {
        let v = linalg::mat_vec(&self.rotation, p.sub(self.start).to_array());
        let out = LabColor::from_array(v);
        if self.reflected {
            reflect_b(out)
        } else {
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignedCurve {
    pub curve: RampCurve,
    pub transform: AlignTransform,
}

fn reflect_b(p: LabColor) -> LabColor {
    LabColor::new(p.l, p.a, -p.b)
}

/// Reference direction for aligned curves: the +L* axis.
const REFERENCE: [f64; 3] = [1.0, 0.0, 0.0];

/// Rigid motion taking `c` to the canonical frame: start at the origin, the
/// first-to-middle vector along +L*, and roll fixed so that the last point
/// (or, failing that, the latest point off the L* axis) lies in the L*-a*
/// half-plane with a* >= 0.
fn canonical_transform(c: &RampCurve) -> AlignTransform {
    let start = c.first();
    let rel: [[f64; 3]; CONTROL_POINTS] = c.points.map(|p| p.sub(start).to_array());
    let scale = rel.iter().map(|v| linalg::norm(*v)).fold(0.0, f64::max);
    let eps = DEGENERATE_EPS * (1.0 + scale);
    let (dir, anchor) = if linalg::norm(rel[MIDDLE]) > eps {
        (rel[MIDDLE], AlignAnchor::Middle)
    } else if linalg::norm(rel[CONTROL_POINTS - 1]) > eps {
        (rel[CONTROL_POINTS - 1], AlignAnchor::Last)
    } else {
        return AlignTransform {
            start,
            rotation: IDENTITY,
            reflected: false,
            anchor: AlignAnchor::TranslatedOnly,
        };
    };
    let r1 = linalg::rotation_between(dir, REFERENCE);
    let roll = rel
        .iter()
        .rev()
        .map(|v| linalg::mat_vec(&r1, *v))
        .find(|v| libm::hypot(v[1], v[2]) > eps)
        .map(|v| linalg::axis_angle(REFERENCE, -atan2(v[2], v[1])))
        .unwrap_or(IDENTITY);
    AlignTransform {
        start,
        rotation: linalg::mat_mul(&roll, &r1),
        reflected: false,
        anchor,
    }
}

fn summed_distance(a: &[LabColor; CONTROL_POINTS], b: &[LabColor; CONTROL_POINTS]) -> f64 {
    a.iter().zip(b).map(|(x, y)| delta_e(*x, *y)).sum()
}

fn mean_points(curves: &[[LabColor; CONTROL_POINTS]]) -> [LabColor; CONTROL_POINTS] {
    let inv = 1.0 / curves.len() as f64;
    core::array::from_fn(|x| {
        curves
            .iter()
            .fold(LabColor::ORIGIN, |acc, c| acc.add(c[x]))
            .scale(inv)
    })
}

/// Aligns a cluster of curves to a common frame.
///
/// Each curve is translated to start at the origin and rotated so its
/// first-to-middle vector points along +L*. Reflection across the L*-a*
/// plane is then decided per curve against the mean of the other curves: a
/// curve is reflected only when that strictly lowers its summed
/// control-point distance to that mean, iterating until no decision changes.
pub fn align_cluster(curves: &[RampCurve]) -> Result<Vec<AlignedCurve>, CurveError> {
    if curves.is_empty() {
        return Err(CurveError::EmptyCluster);
    }
    let mut transforms: Vec<AlignTransform> = curves.iter().map(canonical_transform).collect();
    let base: Vec<[LabColor; CONTROL_POINTS]> = curves
        .iter()
        .zip(&transforms)
        .map(|(c, t)| c.points.map(|p| t.apply(p)))
        .collect();
    let mirrored: Vec<[LabColor; CONTROL_POINTS]> =
        base.iter().map(|pts| pts.map(reflect_b)).collect();
    let mut flags = vec![false; curves.len()];
    let current = |flags: &[bool]| -> Vec<[LabColor; CONTROL_POINTS]> {
        flags
            .iter()
            .enumerate()
            .map(|(i, &f)| if f { mirrored[i] } else { base[i] })
            .collect()
    };
    if curves.len() > 1 {
        // Greedy pass against the curves decided so far, then refinement
        // against the leave-one-out mean until no decision changes.
        for i in 1..curves.len() {
            let mean = mean_points(&current(&flags[..i]));
            flags[i] = summed_distance(&mirrored[i], &mean) < summed_distance(&base[i], &mean);
        }
        for _ in 0..(2 * curves.len() + 2) {
            let mut changed = false;
            for i in 0..curves.len() {
                let others: Vec<[LabColor; CONTROL_POINTS]> = current(&flags)
                    .into_iter()
                    .enumerate()
                    .filter_map(|(j, c)| (j != i).then_some(c))
                    .collect();
                let mean = mean_points(&others);
                let want = summed_distance(&mirrored[i], &mean) < summed_distance(&base[i], &mean);
                if want != flags[i] {
                    flags[i] = want;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    let pts = current(&flags);
    Ok(curves
        .iter()
        .zip(transforms.iter_mut())
        .zip(pts)
        .zip(flags)
        .map(|(((c, t), points), f)| {
            t.reflected = f;
            AlignedCurve {
                curve: RampCurve {
                    points,
                    origin_id: c.origin_id.clone(),
                },
                transform: t.clone(),
            }
        })
        .collect())
}

/// Aligned copies of `curves` without the transform records.
pub fn aligned_points(curves: &[RampCurve]) -> Result<Vec<RampCurve>, CurveError> {
    Ok(align_cluster(curves)?.into_iter().map(|a| a.curve).collect())
}

/// A user edit: reflection, uniform scale and a*-b* rotation about a pivot,
/// followed by translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineEdit {
    pub translate_l: f64,
    pub translate_a: f64,
    pub translate_b: f64,
    pub rotate_ab_degrees: f64,
    pub scale: f64,
    pub reflect: bool,
}

impl Default for AffineEdit {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl AffineEdit {
    pub const IDENTITY: AffineEdit = AffineEdit {
        translate_l: 0.0,
        translate_a: 0.0,
        translate_b: 0.0,
        rotate_ab_degrees: 0.0,
        scale: 1.0,
        reflect: false,
    };

    pub fn translate(l: f64, a: f64, b: f64) -> Self {
        AffineEdit {
            translate_l: l,
            translate_a: a,
            translate_b: b,
            ..Self::IDENTITY
        }
    }

    pub fn rotate(degrees: f64) -> Self {
        AffineEdit {
            rotate_ab_degrees: degrees,
            ..Self::IDENTITY
        }
    }

    pub fn scaled(scale: f64) -> Self {
        AffineEdit {
            scale,
            ..Self::IDENTITY
        }
    }

    pub fn reflection() -> Self {
        AffineEdit {
            reflect: true,
            ..Self::IDENTITY
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::IDENTITY
    }

    pub fn validate(&self) -> Result<(), CurveError> {
        if self.scale > 0.0 && self.scale.is_finite() {
            Ok(())
        } else {
            Err(CurveError::InvalidScale(self.scale))
        }
    }
}

/// Unit a*-b* direction of the reflection axis: the start-to-middle vector,
/// falling back to start-to-end, then to +a*.
fn reflection_axis(points: &[LabColor]) -> (f64, f64) {
    let start = points[0];
    let candidates = [points[points.len() / 2], points[points.len() - 1]];
    for p in candidates {
        let (da, db) = (p.a - start.a, p.b - start.b);
        let n = libm::hypot(da, db);
        if n > DEGENERATE_EPS {
            return (da / n, db / n);
        }
    }
    (1.0, 0.0)
}

fn reflect_about(points: &mut [LabColor], pivot: LabColor) {
    let (ua, ub) = reflection_axis(points);
    for p in points.iter_mut() {
        let (da, db) = (p.a - pivot.a, p.b - pivot.b);
        let along = da * ua + db * ub;
        p.a = pivot.a + 2.0 * along * ua - da;
        p.b = pivot.b + 2.0 * along * ub - db;
    }
}

fn rotate_about(points: &mut [LabColor], pivot: LabColor, degrees: f64) {
    if degrees == 0.0 {
        return;
    }
    let rad = degrees.to_radians();
    let (s, c) = (sin(rad), cos(rad));
    for p in points.iter_mut() {
        let (da, db) = (p.a - pivot.a, p.b - pivot.b);
        p.a = pivot.a + c * da - s * db;
        p.b = pivot.b + s * da + c * db;
    }
}

fn scale_about(points: &mut [LabColor], pivot: LabColor, s: f64) {
    if s == 1.0 {
        return;
    }
    for p in points.iter_mut() {
        *p = pivot.add(p.sub(pivot).scale(s));
    }
}

/// Applies `e` to a sequence of colors: reflect, scale and rotate about
/// `pivot`, then translate.
pub fn apply_edit_points(
    points: &[LabColor],
    e: &AffineEdit,
    pivot: LabColor,
) -> Result<Vec<LabColor>, CurveError> {
    e.validate()?;
    let mut out = points.to_vec();
    if out.is_empty() {
        return Ok(out);
    }
    if e.reflect {
        reflect_about(&mut out, pivot);
    }
    scale_about(&mut out, pivot, e.scale);
    rotate_about(&mut out, pivot, e.rotate_ab_degrees);
    let t = LabColor::new(e.translate_l, e.translate_a, e.translate_b);
    if t != LabColor::ORIGIN {
        for p in out.iter_mut() {
            *p = p.add(t);
        }
    }
    Ok(out)
}

/// Undoes [`apply_edit_points`] performed with the same edit and pivot.
pub fn apply_edit_inverse_points(
    points: &[LabColor],
    e: &AffineEdit,
    pivot: LabColor,
) -> Result<Vec<LabColor>, CurveError> {
    e.validate()?;
    let t = LabColor::new(e.translate_l, e.translate_a, e.translate_b);
    let mut out: Vec<LabColor> = points.iter().map(|p| p.sub(t)).collect();
    if out.is_empty() {
        return Ok(out);
    }
    rotate_about(&mut out, pivot, -e.rotate_ab_degrees);
    scale_about(&mut out, pivot, 1.0 / e.scale);
    if e.reflect {
        reflect_about(&mut out, pivot);
    }
    Ok(out)
}

pub fn apply_edit(c: &RampCurve, e: &AffineEdit, pivot: LabColor) -> Result<RampCurve, CurveError> {
    let pts = apply_edit_points(&c.points, e, pivot)?;
    let mut points = c.points;
    points.copy_from_slice(&pts);
    Ok(RampCurve {
        points,
        origin_id: c.origin_id.clone(),
    })
}

pub fn apply_edit_inverse(
    c: &RampCurve,
    e: &AffineEdit,
    pivot: LabColor,
) -> Result<RampCurve, CurveError> {
    let pts = apply_edit_inverse_points(&c.points, e, pivot)?;
    let mut points = c.points;
    points.copy_from_slice(&pts);
    Ok(RampCurve {
        points,
        origin_id: c.origin_id.clone(),
    })
}
