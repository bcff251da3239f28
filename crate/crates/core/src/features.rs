//! Structural features of a normalized ramp curve, used by k-means.

use alloc::vec;
use alloc::vec::Vec;

use libm::{acos, sqrt};
use thiserror::Error;

use crate::colorspace::LabColor;
use crate::curve::{RampCurve, CONTROL_POINTS};
use crate::linalg;

const SEGMENTS: usize = CONTROL_POINTS - 1;
const INTERIOR: usize = CONTROL_POINTS - 2;

/// Spacing of control points on the unit parameter interval.
const STEP: f64 = 1.0 / SEGMENTS as f64;

/// Sphere radii above this are treated as a flat (zero-curvature) fit.
pub const MAX_SPHERE_RADIUS: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("segment {segment} (control points {segment} and {next}) has zero length", next = .segment + 1)]
    DegenerateSegment { segment: usize },
}

/// One of the eight feature groups. The discriminant is the group's bit in a
/// [`FeatureMask`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum FeatureGroup {
    LocalAngles = 0,
    SumOfAngles = 1,
    LocalDiscriminability = 2,
    Length = 3,
    Speed = 4,
    Acceleration = 5,
    Curvature = 6,
    TurningPoints = 7,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 8] = [
        FeatureGroup::LocalAngles,
        FeatureGroup::SumOfAngles,
        FeatureGroup::LocalDiscriminability,
        FeatureGroup::Length,
        FeatureGroup::Speed,
        FeatureGroup::Acceleration,
        FeatureGroup::Curvature,
        FeatureGroup::TurningPoints,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::LocalAngles => "local_angles",
            FeatureGroup::SumOfAngles => "sum_of_angles",
            FeatureGroup::LocalDiscriminability => "local_discriminability",
            FeatureGroup::Length => "length",
            FeatureGroup::Speed => "speed",
            FeatureGroup::Acceleration => "acceleration",
            FeatureGroup::Curvature => "curvature",
            FeatureGroup::TurningPoints => "turning_points",
        }
    }

    pub fn dims(self) -> usize {
        match self {
            FeatureGroup::LocalAngles => INTERIOR,
            FeatureGroup::LocalDiscriminability => SEGMENTS,
            FeatureGroup::Speed | FeatureGroup::Acceleration => CONTROL_POINTS,
            _ => 1,
        }
    }

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }
}

/// A non-empty subset of feature groups as an 8-bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureMask(u8);

impl FeatureMask {
    pub const FULL: FeatureMask = FeatureMask(0xFF);

    pub fn new(bits: u8) -> Option<Self> {
        (bits != 0).then_some(FeatureMask(bits))
    }

    pub fn from_groups(groups: &[FeatureGroup]) -> Option<Self> {
        Self::new(groups.iter().fold(0, |m, g| m | g.bit()))
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn contains(self, g: FeatureGroup) -> bool {
        self.0 & g.bit() != 0
    }

    pub fn groups(self) -> impl Iterator<Item = FeatureGroup> {
        FeatureGroup::ALL.into_iter().filter(move |g| self.contains(*g))
    }

    /// All 255 non-empty subsets in ascending mask order.
    pub fn all() -> impl Iterator<Item = FeatureMask> {
        (1..=255u8).map(FeatureMask)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Turning angle (radians) at each interior control point.
    pub local_angles: [f64; INTERIOR],
    pub sum_of_angles: f64,
    /// Color difference of each adjacent pair.
    pub local_discriminability: [f64; SEGMENTS],
    pub length: f64,
    /// First-derivative magnitude at each control point.
    pub speed: [f64; CONTROL_POINTS],
    /// Second-derivative magnitude at each control point.
    pub acceleration: [f64; CONTROL_POINTS],
    pub curvature: f64,
    pub turning_points: u32,
}

impl FeatureVector {
    fn group_values(&self, g: FeatureGroup) -> Vec<f64> {
        match g {
            FeatureGroup::LocalAngles => self.local_angles.to_vec(),
            FeatureGroup::SumOfAngles => vec![self.sum_of_angles],
            FeatureGroup::LocalDiscriminability => self.local_discriminability.to_vec(),
            FeatureGroup::Length => vec![self.length],
            FeatureGroup::Speed => self.speed.to_vec(),
            FeatureGroup::Acceleration => self.acceleration.to_vec(),
            FeatureGroup::Curvature => vec![self.curvature],
            FeatureGroup::TurningPoints => vec![f64::from(self.turning_points)],
        }
    }

    /// All scalar dimensions, grouped in [`FeatureGroup::ALL`] order.
    pub fn flatten(&self) -> Vec<f64> {
        FeatureGroup::ALL
            .iter()
            .flat_map(|g| self.group_values(*g))
            .collect()
    }
}

/// Column ranges of each group inside [`FeatureVector::flatten`].
pub fn group_columns(g: FeatureGroup) -> core::ops::Range<usize> {
    let start: usize = FeatureGroup::ALL
        .iter()
        .take_while(|x| **x != g)
        .map(|x| x.dims())
        .sum();
    start..start + g.dims()
}

/// Total number of scalar feature dimensions.
pub fn total_dims() -> usize {
    FeatureGroup::ALL.iter().map(|g| g.dims()).sum()
}

fn diff(a: LabColor, b: LabColor) -> [f64; 3] {
    a.sub(b).to_array()
}

pub fn compute_features(c: &RampCurve) -> Result<FeatureVector, FeatureError> {
    let p = &c.points;
    let local_discriminability = c.segments();
    if let Some(segment) = local_discriminability.iter().position(|d| *d == 0.0) {
        return Err(FeatureError::DegenerateSegment { segment });
    }
    let local_angles: [f64; INTERIOR] = core::array::from_fn(|i| {
        let u = diff(p[i + 1], p[i]);
        let v = diff(p[i + 2], p[i + 1]);
        let cos = linalg::dot(u, v) / (linalg::norm(u) * linalg::norm(v));
        acos(cos.clamp(-1.0, 1.0))
    });
    let speed = core::array::from_fn(|i| {
        let d = if i == 0 {
            diff(p[1], p[0])
        } else if i == CONTROL_POINTS - 1 {
            diff(p[i], p[i - 1])
        } else {
            linalg::scale(diff(p[i + 1], p[i - 1]), 0.5)
        };
        linalg::norm(d) / STEP
    });
    let x = p.map(LabColor::to_array);
    let acceleration = core::array::from_fn(|i| {
        // Second-order one-sided stencils at the ends, central inside.
        let n = CONTROL_POINTS - 1;
        let v: [f64; 3] = core::array::from_fn(|k| match i {
            0 => 2.0 * x[0][k] - 5.0 * x[1][k] + 4.0 * x[2][k] - x[3][k],
            _ if i == n => 2.0 * x[n][k] - 5.0 * x[n - 1][k] + 4.0 * x[n - 2][k] - x[n - 3][k],
            _ => x[i + 1][k] - 2.0 * x[i][k] + x[i - 1][k],
        });
        linalg::norm(v) / (STEP * STEP)
    });
    Ok(FeatureVector {
        sum_of_angles: local_angles.iter().sum(),
        local_angles,
        length: local_discriminability.iter().sum(),
        local_discriminability,
        speed,
        acceleration,
        curvature: sphere_curvature(c),
        turning_points: turning_points(c),
    })
}

/// Inverse radius of the algebraic (Kåsa) least-squares sphere through the
/// control points; 0 when the fit is singular or flatter than
/// [`MAX_SPHERE_RADIUS`].
pub fn sphere_curvature(c: &RampCurve) -> f64 {
    sphere_fit(&c.points).map_or(0.0, |(_, r)| 1.0 / r)
}

/// Kåsa sphere fit returning `(center, radius)`.
pub fn sphere_fit(points: &[LabColor]) -> Option<([f64; 3], f64)> {
    let n = points.len() as f64;
    let centroid = points
        .iter()
        .fold(LabColor::ORIGIN, |acc, p| acc.add(*p))
        .scale(1.0 / n);
    // Minimise sum (|x|^2 + d.x + g)^2 over (d, g) on centred coordinates.
    let mut ata = vec![0.0; 16];
    let mut atb = vec![[0.0]; 4];
    for p in points {
        let x = p.sub(centroid).to_array();
        let row = [x[0], x[1], x[2], 1.0];
        let rhs = -linalg::dot(x, x);
        for i in 0..4 {
            for j in 0..4 {
                ata[i * 4 + j] += row[i] * row[j];
            }
            atb[i][0] += row[i] * rhs;
        }
    }
    let sol = linalg::solve_dense(ata, atb, 4, 1e-12)?;
    let d = [sol[0][0], sol[1][0], sol[2][0]];
    let g = sol[3][0];
    let center = linalg::scale(d, -0.5);
    let r2 = linalg::dot(center, center) - g;
    if !(r2 > 0.0) || !r2.is_finite() {
        return None;
    }
    let r = sqrt(r2);
    if r > MAX_SPHERE_RADIUS {
        return None;
    }
    let c = centroid.to_array();
    Some(([center[0] + c[0], center[1] + c[1], center[2] + c[2]], r))
}

/// Strict interior local extrema of each channel, summed over L*, a*, b*.
pub fn turning_points(c: &RampCurve) -> u32 {
    let mut count = 0;
    for ch in 0..3 {
        let v: [f64; CONTROL_POINTS] = c.points.map(|p| p.to_array()[ch]);
        for w in v.windows(3) {
            if (w[1] > w[0] && w[1] > w[2]) || (w[1] < w[0] && w[1] < w[2]) {
                count += 1;
            }
        }
    }
    count
}

/// Per-dimension z-scoring fitted on a corpus of feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        let dims = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dims];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut std = vec![0.0; dims];
        for r in rows {
            for ((s, v), m) in std.iter_mut().zip(r).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        std.iter_mut().for_each(|s| *s = sqrt(*s / n));
        Standardizer { mean, std }
    }

    /// Constant dimensions map to 0.
    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(v, (m, s))| if *s > 0.0 { (v - m) / s } else { 0.0 })
            .collect()
    }
}

/// Z-scored feature matrix for a set of curves (one row per curve, all
/// groups).
pub fn standardized_matrix(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    let rows: Vec<Vec<f64>> = features.iter().map(FeatureVector::flatten).collect();
    let st = Standardizer::fit(&rows);
    rows.iter().map(|r| st.transform(r)).collect()
}

/// Restricts a full feature row to the columns selected by `mask`.
pub fn select_columns(row: &[f64], mask: FeatureMask) -> Vec<f64> {
    mask.groups()
        .flat_map(|g| row[group_columns(g)].iter().copied())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{apply_edit, AffineEdit};
    use core::f64::consts::{FRAC_PI_2, PI};
    use libm::{cos, sin};

    fn line(d: f64) -> RampCurve {
        let dir = LabColor::new(0.6, 0.0, 0.8);
        RampCurve::new(core::array::from_fn(|i| {
            LabColor::new(20.0, 5.0, -5.0).add(dir.scale(d * i as f64))
        }))
    }

    fn arc() -> RampCurve {
        RampCurve::new(core::array::from_fn(|i| {
            let th = FRAC_PI_2 * i as f64 / 8.0;
            LabColor::new(60.0, 50.0 * cos(th), 50.0 * sin(th))
        }))
    }

    fn sphere_points(r: f64) -> RampCurve {
        RampCurve::new(core::array::from_fn(|i| {
            let th = 0.3 + 0.31 * i as f64;
            let ph = 0.2 + 0.23 * (i * i % 7) as f64;
            LabColor::new(
                50.0 + r * sin(th) * cos(ph),
                r * sin(th) * sin(ph),
                -10.0 + r * cos(th),
            )
        }))
    }

    #[test]
    fn straight_line_features() {
        let f = compute_features(&line(4.0)).unwrap();
        assert!(f.sum_of_angles.abs() < 1e-6);
        for d in f.local_discriminability {
            assert!((d - 4.0).abs() < 1e-12);
        }
        assert!((f.length - 32.0).abs() < 1e-12);
        assert_eq!(f.turning_points, 0);
        assert_eq!(f.curvature, 0.0);
        for s in f.speed {
            assert!((s - 32.0).abs() < 1e-9);
        }
        for a in f.acceleration {
            assert!(a.abs() < 1e-9);
        }
    }

    #[test]
    fn arc_features() {
        let f = compute_features(&arc()).unwrap();
        let first = f.local_angles[0];
        for a in f.local_angles {
            assert!((a - first).abs() / first < 0.01);
        }
        assert!((first - FRAC_PI_2 / 8.0).abs() < 1e-9);
        let chord = 2.0 * 50.0 * sin(FRAC_PI_2 / 16.0);
        assert!((f.length - 8.0 * chord).abs() < 1e-9);
        assert!((f.length - 25.0 * PI).abs() / (25.0 * PI) < 0.01);
        assert!((f.sum_of_angles - f.local_angles.iter().sum::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn sphere_curvature_examples() {
        let c = sphere_points(50.0);
        let (_, r) = sphere_fit(&c.points).unwrap();
        assert!((r - 50.0).abs() < 1e-6);
        assert!((sphere_curvature(&c) - 0.02).abs() < 1e-6);
        let big = apply_edit(&c, &AffineEdit::scaled(2.0), LabColor::ORIGIN).unwrap();
        assert!((sphere_curvature(&big) - 0.01).abs() < 1e-6);
        assert_eq!(sphere_curvature(&line(3.0)), 0.0);
    }

    #[test]
    fn turning_point_examples() {
        assert_eq!(turning_points(&line(2.0)), 0);
        let mut pts = line(5.0).points;
        // a* goes up then back down once.
        for (i, p) in pts.iter_mut().enumerate() {
            p.a = if i <= 4 { 2.5 * i as f64 } else { 2.5 * (8 - i) as f64 };
        }
        assert_eq!(turning_points(&RampCurve::new(pts)), 1);
        // Plateaus are not extrema.
        let mut flat = line(5.0).points;
        for p in flat.iter_mut().skip(3).take(3) {
            p.a = 10.0;
        }
        assert_eq!(turning_points(&RampCurve::new(flat)), 0);
    }

    #[test]
    fn degenerate_segment_is_reported() {
        let mut pts = line(1.0).points;
        pts[4] = pts[3];
        assert_eq!(
            compute_features(&RampCurve::new(pts)),
            Err(FeatureError::DegenerateSegment { segment: 3 })
        );
    }

    #[test]
    fn masks_and_columns() {
        assert_eq!(total_dims(), 37);
        assert_eq!(FeatureMask::all().count(), 255);
        assert_eq!(FeatureMask::new(0), None);
        let m = FeatureMask::from_groups(&[
            FeatureGroup::SumOfAngles,
            FeatureGroup::Length,
            FeatureGroup::Curvature,
            FeatureGroup::TurningPoints,
        ])
        .unwrap();
        assert_eq!(m.bits(), 0b1100_1010);
        let f = compute_features(&arc()).unwrap();
        let row = f.flatten();
        assert_eq!(row.len(), 37);
        let sel = select_columns(&row, m);
        assert_eq!(sel, vec![f.sum_of_angles, f.length, f.curvature, 0.0]);
        assert_eq!(group_columns(FeatureGroup::Speed), 17..26);
    }

    #[test]
    fn standardizer_zero_variance() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0]];
        let st = Standardizer::fit(&rows);
        assert_eq!(st.transform(&rows[0]), vec![-1.0, 0.0]);
        assert_eq!(st.transform(&rows[1]), vec![1.0, 0.0]);
    }
}
