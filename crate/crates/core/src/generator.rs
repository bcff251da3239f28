//! Seeding models with a color, diverging composition, edits and gamut
//! handling.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{atan2, cos, sin, sqrt};
use thiserror::Error;

use crate::colorspace::{in_gamut, LabColor};
use crate::curve::{apply_edit_points, resample_colors, AffineEdit, CurveError, CONTROL_POINTS};
use crate::modelbook::{ModelBook, RampModel, DEFAULT_DIVERGING_ANGLE, DEFAULT_ROTATION_LIMIT};

/// Chroma tolerance of the clipping bisection.
pub const CLIP_TOLERANCE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("seed color ({l:.4}, {a:.4}, {b:.4}) is outside the sRGB gamut")]
    SeedOutOfGamut { l: f64, a: f64, b: f64 },
    #[error("seeded color {index} has L* = {l:.4}, outside [0, 100]; try another model or seed")]
    LightnessOutOfRange { index: usize, l: f64 },
    #[error("arm rotation {value} degrees exceeds the limit of +/-{limit}")]
    RotationOutOfRange { value: f64, limit: f64 },
    #[error("colors at indices {0:?} are outside the sRGB gamut")]
    OutOfGamut(Vec<usize>),
    #[error("color {0} cannot be brought into gamut by reducing chroma")]
    Unclippable(usize),
    #[error("sample count must be at least 2, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Curve(#[from] CurveError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratedKind {
    Sequential,
    Diverging,
    Linear,
}

impl GeneratedKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GeneratedKind::Sequential => "sequential",
            GeneratedKind::Diverging => "diverging",
            GeneratedKind::Linear => "linear",
        }
    }
}

impl fmt::Display for GeneratedKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GeneratedKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "sequential" => Ok(GeneratedKind::Sequential),
            "diverging" => Ok(GeneratedKind::Diverging),
            "linear" => Ok(GeneratedKind::Linear),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GamutStatus {
    Clean,
    Clipped,
    Reverted,
    /// Freshly seeded with colors outside the gamut; see [`gamut_fit`].
    OutOfGamut,
}

impl GamutStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            GamutStatus::Clean => "clean",
            GamutStatus::Clipped => "clipped",
            GamutStatus::Reverted => "reverted",
            GamutStatus::OutOfGamut => "out_of_gamut",
        }
    }
}

impl fmt::Display for GamutStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GamutStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "clean" => Ok(GamutStatus::Clean),
            "clipped" => Ok(GamutStatus::Clipped),
            "reverted" => Ok(GamutStatus::Reverted),
            "out_of_gamut" => Ok(GamutStatus::OutOfGamut),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GamutMode {
    Strict,
    Clip,
}

impl FromStr for GamutMode {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "strict" => Ok(GamutMode::Strict),
            "clip" => Ok(GamutMode::Clip),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedRamp {
    pub colors: Vec<LabColor>,
    pub model_id: String,
    pub seed: LabColor,
    pub kind: GeneratedKind,
    /// Edits applied since seeding, oldest first.
    pub edits: Vec<AffineEdit>,
    pub gamut_status: GamutStatus,
    /// Index of the color that edits pivot about (the seed for sequential
    /// ramps, the gray center for diverging ones).
    pub anchor_index: usize,
}

impl GeneratedRamp {
    pub fn anchor(&self) -> LabColor {
        self.colors[self.anchor_index]
    }

    pub fn out_of_gamut(&self) -> Vec<usize> {
        (0..self.colors.len()).filter(|&i| !in_gamut(self.colors[i])).collect()
    }

    /// `(a, b)` projection of every color.
    pub fn projection_ab(&self) -> Vec<[f64; 2]> {
        self.colors.iter().map(|c| [c.a, c.b]).collect()
    }

    /// `(L, C)` projection of every color.
    pub fn projection_lc(&self) -> Vec<[f64; 2]> {
        self.colors.iter().map(|c| [c.l, c.chroma()]).collect()
    }
}

fn status_for(colors: &[LabColor]) -> GamutStatus {
    if colors.iter().all(|c| in_gamut(*c)) {
        GamutStatus::Clean
    } else {
        GamutStatus::OutOfGamut
    }
}

fn check_seed(seed: LabColor) -> Result<(), GenError> {
    if in_gamut(seed) {
        Ok(())
    } else {
        Err(GenError::SeedOutOfGamut {
            l: seed.l,
            a: seed.a,
            b: seed.b,
        })
    }
}

fn check_lightness(colors: &[LabColor]) -> Result<(), GenError> {
    match colors.iter().position(|c| !(0.0..=100.0).contains(&c.l)) {
        Some(index) => Err(GenError::LightnessOutOfRange {
            index,
            l: colors[index].l,
        }),
        None => Ok(()),
    }
}

/// Control index whose profile lightness is nearest `l`; ties go to the
/// lower index.
pub fn anchor_index(profile: &[f64; CONTROL_POINTS], l: f64) -> usize {
    let mut best = 0;
    for i in 1..CONTROL_POINTS {
        if (profile[i] - l).abs() < (profile[best] - l).abs() {
            best = i;
        }
    }
    best
}

/// Places a model so that the control point nearest the seed in lightness
/// becomes the seed color.
pub fn seed_sequential(model: &RampModel, seed: LabColor) -> Result<GeneratedRamp, GenError> {
    check_seed(seed)?;
    let i = anchor_index(&model.l_profile, seed.l);
    let shift = seed.sub(model.shape[i]);
    let mut colors: Vec<LabColor> = model.shape.iter().map(|p| p.add(shift)).collect();
    colors[i] = seed;
    check_lightness(&colors)?;
    Ok(GeneratedRamp {
        gamut_status: status_for(&colors),
        colors,
        model_id: model.id.clone(),
        seed,
        kind: GeneratedKind::Sequential,
        edits: Vec::new(),
        anchor_index: i,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RotationPolicy {
    Clamp,
    Reject,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DivergeOptions {
    /// Angle between the arms before user rotation, in degrees.
    pub angle_degrees: f64,
    pub rotation_limit_degrees: f64,
    pub policy: RotationPolicy,
}

impl Default for DivergeOptions {
    fn default() -> Self {
        DivergeOptions {
            angle_degrees: DEFAULT_DIVERGING_ANGLE,
            rotation_limit_degrees: DEFAULT_ROTATION_LIMIT,
            policy: RotationPolicy::Reject,
        }
    }
}

impl DivergeOptions {
    pub fn from_book(book: &ModelBook, policy: RotationPolicy) -> Self {
        DivergeOptions {
            angle_degrees: book.diverging_angle_degrees,
            rotation_limit_degrees: book.diverging_rotation_limit_degrees,
            policy,
        }
    }

    /// The rotation actually applied, and whether it was clamped.
    pub fn resolve_rotation(&self, degrees: f64) -> Result<(f64, bool), GenError> {
        let limit = self.rotation_limit_degrees;
        if degrees.is_nan() {
            return Err(GenError::RotationOutOfRange { value: degrees, limit });
        }
        if degrees.abs() <= limit {
            return Ok((degrees, false));
        }
        match self.policy {
            RotationPolicy::Clamp => Ok((degrees.clamp(-limit, limit), true)),
            RotationPolicy::Reject => Err(GenError::RotationOutOfRange { value: degrees, limit }),
        }
    }
}

fn rotate_ab(p: LabColor, center: LabColor, radians: f64) -> LabColor {
    let (s, c) = (sin(radians), cos(radians));
    let (da, db) = (p.a - center.a, p.b - center.b);
    LabColor::new(p.l, center.a + c * da - s * db, center.b + s * da + c * db)
}

/// Joins two copies of a seeded model at their lighter end. The second arm
/// is the first rotated in a*-b* by `angle + arm_rotation` about the joint,
/// and the result is shifted so the joint is gray. The output has
/// `2 * 9 - 1` colors with the joint in the middle.
pub fn seed_diverging(
    model: &RampModel,
    seed: LabColor,
    arm_rotation_degrees: f64,
    options: &DivergeOptions,
) -> Result<GeneratedRamp, GenError> {
    let (rotation, _) = options.resolve_rotation(arm_rotation_degrees)?;
    let base = seed_sequential(model, seed)?;
    let mut arm: Vec<LabColor> = base.colors;
    if arm[CONTROL_POINTS - 1].l > arm[0].l {
        arm.reverse();
    }
    let center = arm[0];
    let theta = (options.angle_degrees + rotation).to_radians();
    let gray = LabColor::new(0.0, -center.a, -center.b);
    let arm1: Vec<LabColor> = arm.iter().map(|p| p.add(gray)).collect();
    let arm2: Vec<LabColor> = arm.iter().map(|p| rotate_ab(*p, center, theta).add(gray)).collect();
    let mut colors: Vec<LabColor> = arm2.iter().rev().copied().collect();
    let mid = colors.len() - 1;
    colors[mid] = LabColor::new(center.l, 0.0, 0.0);
    colors.extend_from_slice(&arm1[1..]);
    Ok(GeneratedRamp {
        gamut_status: status_for(&colors),
        colors,
        model_id: model.id.clone(),
        seed,
        kind: GeneratedKind::Diverging,
        edits: Vec::new(),
        anchor_index: mid,
    })
}

/// Angle in degrees between the a*-b* chords from the center of a
/// diverging ramp to its two ends.
pub fn measured_arm_angle(colors: &[LabColor]) -> f64 {
    let c = colors[colors.len() / 2];
    let (u, v) = (colors[0].sub(c), colors[colors.len() - 1].sub(c));
    let cross = u.a * v.b - u.b * v.a;
    let dot = u.a * v.a + u.b * v.b;
    atan2(cross.abs(), dot).to_degrees()
}

/// Applies an edit about the ramp's anchor. If any color would leave the
/// gamut the input ramp is returned unchanged with status `Reverted`.
pub fn apply_user_edit(ramp: &GeneratedRamp, edit: &AffineEdit) -> Result<GeneratedRamp, GenError> {
    edit.validate()?;
    if edit.is_identity() {
        return Ok(ramp.clone());
    }
    let edited = apply_edit_points(&ramp.colors, edit, ramp.anchor())?;
    if !edited.iter().all(|c| in_gamut(*c)) {
        return Ok(GeneratedRamp {
            gamut_status: GamutStatus::Reverted,
            ..ramp.clone()
        });
    }
    let mut out = ramp.clone();
    out.colors = edited;
    out.edits.push(*edit);
    out.gamut_status = GamutStatus::Clean;
    Ok(out)
}

/// Largest chroma at the color's L* and hue that is in gamut, to within
/// [`CLIP_TOLERANCE`]. `None` if even the gray at that L* is out of gamut.
pub fn max_chroma(c: LabColor) -> Option<LabColor> {
    let gray = LabColor::new(c.l, 0.0, 0.0);
    if !in_gamut(gray) {
        return None;
    }
    let h = atan2(c.b, c.a);
    let at = |chroma: f64| LabColor::new(c.l, chroma * cos(h), chroma * sin(h));
    let (mut lo, mut hi) = (0.0, sqrt(c.a * c.a + c.b * c.b));
    if in_gamut(c) {
        return Some(c);
    }
    while hi - lo > CLIP_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if in_gamut(at(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(if lo == 0.0 { gray } else { at(lo) })
}

/// `Strict` fails on any out-of-gamut color; `Clip` pulls each such color
/// toward the L* axis. The anchor is never moved.
pub fn gamut_fit(ramp: &GeneratedRamp, mode: GamutMode) -> Result<GeneratedRamp, GenError> {
    let bad = ramp.out_of_gamut();
    if bad.is_empty() {
        let mut out = ramp.clone();
        if out.gamut_status == GamutStatus::OutOfGamut {
            out.gamut_status = GamutStatus::Clean;
        }
        return Ok(out);
    }
    if mode == GamutMode::Strict || bad.contains(&ramp.anchor_index) {
        return Err(GenError::OutOfGamut(bad));
    }
    let mut out = ramp.clone();
    for i in bad {
        out.colors[i] = max_chroma(out.colors[i]).ok_or(GenError::Unclippable(i))?;
    }
    out.gamut_status = GamutStatus::Clipped;
    Ok(out)
}

/// `m` colors at equal arc length along a spline through the ramp.
pub fn sample_ramp(ramp: &GeneratedRamp, m: usize) -> Result<Vec<LabColor>, GenError> {
    if m < 2 {
        return Err(GenError::TooFewSamples(m));
    }
    Ok(resample_colors(&ramp.colors, m)?)
}

pub const LINEAR_MODEL_ID: &str = "linear";

/// `m` colors evenly spaced on the segment from `c1` to `c2`.
pub fn linear_ramp(c1: LabColor, c2: LabColor, m: usize) -> Result<GeneratedRamp, GenError> {
    check_seed(c1)?;
    check_seed(c2)?;
    if m < 2 {
        return Err(GenError::TooFewSamples(m));
    }
    let d = c2.sub(c1);
    let mut colors: Vec<LabColor> = (0..m)
        .map(|i| c1.add(d.scale(i as f64 / (m - 1) as f64)))
        .collect();
    colors[m - 1] = c2;
    Ok(GeneratedRamp {
        gamut_status: status_for(&colors),
        colors,
        model_id: LINEAR_MODEL_ID.to_string(),
        seed: c1,
        kind: GeneratedKind::Linear,
        edits: Vec::new(),
        anchor_index: 0,
    })
}
