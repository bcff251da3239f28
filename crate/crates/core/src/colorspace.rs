//! sRGB <-> CIELAB conversion (D65, 2° observer), CIE76 color difference
//! and exact gamut membership.

use alloc::string::String;
use core::fmt;
use core::str::FromStr;

use libm::{cbrt, pow, sqrt};
use thiserror::Error;

/// Linear-RGB slack tolerated by the gamut test.
pub const GAMUT_EPS: f64 = 1e-9;

/// sRGB primaries to XYZ (D65).
const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.412_456_4, 0.357_576_1, 0.180_437_5],
    [0.212_672_9, 0.715_152_2, 0.072_175_0],
    [0.019_333_9, 0.119_192_0, 0.950_304_1],
];

// Reference white taken as the image of linear (1, 1, 1) so that #FFFFFF maps
// to L* = 100, a* = b* = 0 with no residual.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = invert3(RGB_TO_XYZ);

const DELTA: f64 = 6.0 / 29.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ColorError {
    #[error("malformed hex color {0:?}: expected #RRGGBB")]
    BadHex(String),
    #[error("L*a*b* ({l:.4}, {a:.4}, {b:.4}) is outside the sRGB gamut")]
    OutOfGamut { l: f64, a: f64, b: f64 },
}

impl ColorError {
    fn out_of_gamut(c: LabColor) -> Self {
        ColorError::OutOfGamut { l: c.l, a: c.a, b: c.b }
    }
}

/// An 8-bit sRGB color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct SrgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl SrgbColor {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }
}

impl fmt::Display for SrgbColor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl FromStr for SrgbColor {
    type Err = ColorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_hex(s)
    }
}

/// A point in CIELAB. Fields are `l` (L*), `a` (a*) and `b` (b*).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const ORIGIN: LabColor = LabColor::new(0.0, 0.0, 0.0);

    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }

    pub const fn from_array(v: [f64; 3]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.l, self.a, self.b]
    }

    pub fn chroma(self) -> f64 {
        sqrt(self.a * self.a + self.b * self.b)
    }

    /// Hue angle in radians, `atan2(b, a)`.
    pub fn hue(self) -> f64 {
        libm::atan2(self.b, self.a)
    }

    pub fn is_finite(self) -> bool {
        self.l.is_finite() && self.a.is_finite() && self.b.is_finite()
    }

    pub fn add(self, o: LabColor) -> LabColor {
        LabColor::new(self.l + o.l, self.a + o.a, self.b + o.b)
    }

    pub fn sub(self, o: LabColor) -> LabColor {
        LabColor::new(self.l - o.l, self.a - o.a, self.b - o.b)
    }

    pub fn scale(self, s: f64) -> LabColor {
        LabColor::new(self.l * s, self.a * s, self.b * s)
    }

    pub fn dot(self, o: LabColor) -> f64 {
        self.l * o.l + self.a * o.a + self.b * o.b
    }

    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }
}

pub fn parse_hex(text: &str) -> Result<SrgbColor, ColorError> {
    let bad = || ColorError::BadHex(String::from(text));
    let digits = text.strip_prefix('#').ok_or_else(bad)?;
    if digits.len() != 6 || !digits.bytes().all(|c| c.is_ascii_hexdigit()) {
        return Err(bad());
    }
    let byte = |i: usize| u8::from_str_radix(&digits[i..i + 2], 16).map_err(|_| bad());
    Ok(SrgbColor::new(byte(0)?, byte(2)?, byte(4)?))
}

pub fn format_hex(c: SrgbColor) -> String {
    use alloc::string::ToString;
    c.to_string()
}

fn decode_channel(v: u8) -> f64 {
    let c = f64::from(v) / 255.0;
    if c <= 0.040_45 {
        c / 12.92
    } else {
        pow((c + 0.055) / 1.055, 2.4)
    }
}

fn encode_channel(c: f64) -> f64 {
    if c <= 0.003_130_8 {
        12.92 * c
    } else {
        1.055 * pow(c, 1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > DELTA * DELTA * DELTA {
        cbrt(t)
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

fn lab_f_inv(t: f64) -> f64 {
    if t > DELTA {
        t * t * t
    } else {
        3.0 * DELTA * DELTA * (t - 4.0 / 29.0)
    }
}

fn mul3(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

const fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
    let c01 = m[1][2] * m[2][0] - m[1][0] * m[2][2];
    let c02 = m[1][0] * m[2][1] - m[1][1] * m[2][0];
    let det = m[0][0] * c00 + m[0][1] * c01 + m[0][2] * c02;
    let inv = 1.0 / det;
    [
        [
            c00 * inv,
            (m[0][2] * m[2][1] - m[0][1] * m[2][2]) * inv,
            (m[0][1] * m[1][2] - m[0][2] * m[1][1]) * inv,
        ],
        [
            c01 * inv,
            (m[0][0] * m[2][2] - m[0][2] * m[2][0]) * inv,
            (m[0][2] * m[1][0] - m[0][0] * m[1][2]) * inv,
        ],
        [
            c02 * inv,
            (m[0][1] * m[2][0] - m[0][0] * m[2][1]) * inv,
            (m[0][0] * m[1][1] - m[0][1] * m[1][0]) * inv,
        ],
    ]
}

pub fn srgb_to_lab(c: SrgbColor) -> LabColor {
    let lin = [decode_channel(c.r), decode_channel(c.g), decode_channel(c.b)];
    let xyz = mul3(&RGB_TO_XYZ, lin);
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

/// Linear-light RGB for a LAB color, unclamped.
pub fn lab_to_linear_rgb(c: LabColor) -> [f64; 3] {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let xyz = [
        WHITE[0] * lab_f_inv(fx),
        WHITE[1] * lab_f_inv(fy),
        WHITE[2] * lab_f_inv(fz),
    ];
    mul3(&XYZ_TO_RGB, xyz)
}

/// Converts to 8-bit sRGB, signalling colors outside the gamut instead of
/// clamping them.
pub fn lab_to_srgb(c: LabColor) -> Result<SrgbColor, ColorError> {
    if !c.is_finite() {
        return Err(ColorError::out_of_gamut(c));
    }
    let lin = lab_to_linear_rgb(c);
    if lin.iter().any(|&v| !(-GAMUT_EPS..=1.0 + GAMUT_EPS).contains(&v)) {
        return Err(ColorError::out_of_gamut(c));
    }
    Ok(quantize(lin))
}

fn quantize(lin: [f64; 3]) -> SrgbColor {
    let q = |v: f64| {
        let e = encode_channel(v.clamp(0.0, 1.0)) * 255.0;
        libm::round(e).clamp(0.0, 255.0) as u8
    };
    SrgbColor::new(q(lin[0]), q(lin[1]), q(lin[2]))
}

/// Converts to 8-bit sRGB, clamping each linear channel into range. For
/// display of colors already known to be out of gamut.
pub fn lab_to_srgb_clamped(c: LabColor) -> SrgbColor {
    if !c.is_finite() {
        return SrgbColor::new(0, 0, 0);
    }
    quantize(lab_to_linear_rgb(c))
}

pub fn in_gamut(c: LabColor) -> bool {
    lab_to_srgb(c).is_ok()
}

/// CIE76 color difference.
pub fn delta_e(x: LabColor, y: LabColor) -> f64 {
    x.sub(y).norm()
}
