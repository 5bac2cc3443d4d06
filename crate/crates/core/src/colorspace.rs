//! Pixel colour conversions and the Individual Typology Angle.
//!
//! sRGB is decoded with the IEC 61966-2-1 transfer function and mapped to
//! CIE XYZ under D65, then to CIE L\*a\*b\*. The reference white is taken as
//! the XYZ image of sRGB white so that `(255, 255, 255)` lands exactly on
//! the achromatic axis.

use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;

use crate::{Error, Result};

/// An 8-bit sRGB-encoded colour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct RgbColor {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl RgbColor {
    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Self { r, g, b }
    }

    pub const fn channels(self) -> [u8; 3] {
        [self.r, self.g, self.b]
    }
}

impl From<[u8; 3]> for RgbColor {
    fn from([r, g, b]: [u8; 3]) -> Self {
        Self { r, g, b }
    }
}

/// A CIE L\*a\*b\* colour (D65).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        Self { l, a, b }
    }

    pub fn ita(self, variant: ItaVariant) -> Result<f64> {
        ita_degrees(self.l, self.b, variant)
    }
}

const SRGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_SRGB: [[f64; 3]; 3] = [
    [3.2404542, -1.5371385, -0.4985314],
    [-0.9692660, 1.8760108, 0.0415560],
    [0.0556434, -0.2040259, 1.0572252],
];

const WHITE: [f64; 3] = [
    SRGB_TO_XYZ[0][0] + SRGB_TO_XYZ[0][1] + SRGB_TO_XYZ[0][2],
    SRGB_TO_XYZ[1][0] + SRGB_TO_XYZ[1][1] + SRGB_TO_XYZ[1][2],
    SRGB_TO_XYZ[2][0] + SRGB_TO_XYZ[2][1] + SRGB_TO_XYZ[2][2],
];

const LAB_EPSILON: f64 = 216.0 / 24389.0;
const LAB_KAPPA: f64 = 24389.0 / 27.0;

/// sRGB electro-optical transfer: encoded value in `[0, 1]` to linear light.
pub fn srgb_decode(encoded: f64) -> f64 {
    if encoded <= 0.04045 {
        encoded / 12.92
    } else {
        libm::pow((encoded + 0.055) / 1.055, 2.4)
    }
}

/// Inverse of [`srgb_decode`].
pub fn srgb_encode(linear: f64) -> f64 {
    if linear <= 0.0031308 {
        linear * 12.92
    } else {
        1.055 * libm::pow(linear, 1.0 / 2.4) - 0.055
    }
}

fn lab_f(t: f64) -> f64 {
    if t > LAB_EPSILON {
        libm::cbrt(t)
    } else {
        (LAB_KAPPA * t + 16.0) / 116.0
    }
}

fn lab_f_inv(f: f64) -> f64 {
    let cube = f * f * f;
    if cube > LAB_EPSILON {
        cube
    } else {
        (116.0 * f - 16.0) / LAB_KAPPA
    }
}

fn mat_mul(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Linear-light RGB (each in `[0, 1]`) to CIELab.
pub fn linear_rgb_to_cielab(linear: [f64; 3]) -> LabColor {
    let xyz = mat_mul(&SRGB_TO_XYZ, linear);
    let fx = lab_f(xyz[0] / WHITE[0]);
    let fy = lab_f(xyz[1] / WHITE[1]);
    let fz = lab_f(xyz[2] / WHITE[2]);
    LabColor {
        l: 116.0 * fy - 16.0,
        a: 500.0 * (fx - fy),
        b: 200.0 * (fy - fz),
    }
}

pub fn srgb_to_cielab(c: RgbColor) -> LabColor {
    srgb_channels_to_cielab([c.r as f64, c.g as f64, c.b as f64])
}

/// Like [`srgb_to_cielab`] but for fractional channel values on the
/// 0..=255 scale, e.g. a mean colour.
pub fn srgb_channels_to_cielab(channels: [f64; 3]) -> LabColor {
    linear_rgb_to_cielab(channels.map(|c| srgb_decode(c / 255.0)))
}

/// CIELab to 8-bit sRGB. Fails when any channel would round outside
/// `0..=255`.
pub fn cielab_to_srgb(lab: LabColor) -> Result<RgbColor> {
    let out_of_gamut = || Error::OutOfGamut {
        l: lab.l,
        a: lab.a,
        b: lab.b,
    };
    if !(lab.l.is_finite() && lab.a.is_finite() && lab.b.is_finite()) {
        return Err(out_of_gamut());
    }
    let fy = (lab.l + 16.0) / 116.0;
    let fx = fy + lab.a / 500.0;
    let fz = fy - lab.b / 200.0;
    let xyz = [
        lab_f_inv(fx) * WHITE[0],
        lab_f_inv(fy) * WHITE[1],
        lab_f_inv(fz) * WHITE[2],
    ];
    let linear = mat_mul(&XYZ_TO_SRGB, xyz);
    let mut out = [0u8; 3];
    for (dst, lin) in out.iter_mut().zip(linear) {
        // A slightly negative linear value can still round to code 0.
        let encoded = if lin < 0.0 {
            lin * 12.92 * 255.0
        } else {
            srgb_encode(lin) * 255.0
        };
        if !(-0.5..255.5).contains(&encoded) {
            return Err(out_of_gamut());
        }
        *dst = libm::round(encoded).clamp(0.0, 255.0) as u8;
    }
    Ok(RgbColor::from(out))
}

/// Bulk sRGB to CIELab conversion with a precomputed decoding table.
#[derive(Clone)]
pub struct LabConverter {
    linear: [f64; 256],
}

impl LabConverter {
    pub fn new() -> Self {
        let mut linear = [0.0; 256];
        for (i, v) in linear.iter_mut().enumerate() {
            *v = srgb_decode(i as f64 / 255.0);
        }
        Self { linear }
    }

    pub fn convert(&self, c: RgbColor) -> LabColor {
        linear_rgb_to_cielab([
            self.linear[c.r as usize],
            self.linear[c.g as usize],
            self.linear[c.b as usize],
        ])
    }
}

impl Default for LabConverter {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for LabConverter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("LabConverter")
    }
}

/// Hexcone HSV: hue in degrees `[0, 360)`, saturation and value in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hsv {
    pub h: f64,
    pub s: f64,
    pub v: f64,
}

pub fn srgb_to_hsv(c: RgbColor) -> Hsv {
    let max = c.r.max(c.g).max(c.b);
    let min = c.r.min(c.g).min(c.b);
    let v = max as f64 / 255.0;
    if max == min {
        // achromatic: hue is 0 by convention
        return Hsv { h: 0.0, s: 0.0, v };
    }
    let delta = (max - min) as f64;
    let (r, g, b) = (c.r as f64, c.g as f64, c.b as f64);
    let mut h = if max == c.r {
        60.0 * ((g - b) / delta)
    } else if max == c.g {
        60.0 * ((b - r) / delta + 2.0)
    } else {
        60.0 * ((r - g) / delta + 4.0)
    };
    if h < 0.0 {
        h += 360.0;
    }
    Hsv {
        h,
        s: delta / max as f64,
        v,
    }
}

/// Full-range BT.601 luma/chroma with a +128 chroma offset, each clamped
/// to `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCrCb {
    pub y: f64,
    pub cr: f64,
    pub cb: f64,
}

pub fn srgb_to_ycrcb(c: RgbColor) -> YCrCb {
    let (r, g, b) = (c.r as f64, c.g as f64, c.b as f64);
    let y = 0.299 * r + 0.587 * g + 0.114 * b;
    YCrCb {
        y: y.clamp(0.0, 255.0),
        cr: ((r - y) * 0.713 + 128.0).clamp(0.0, 255.0),
        cb: ((b - y) * 0.564 + 128.0).clamp(0.0, 255.0),
    }
}

/// Which arctangent turns the L\*/b\* ratio into an angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ItaVariant {
    /// Single-argument arctangent; blind to the sign of b\*.
    Arctan,
    /// Quadrant-aware arctangent.
    Arctan2,
}

impl ItaVariant {
    pub const fn as_str(self) -> &'static str {
        match self {
            ItaVariant::Arctan => "Arctan",
            ItaVariant::Arctan2 => "Arctan2",
        }
    }
}

impl fmt::Display for ItaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ItaVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Arctan" => Ok(ItaVariant::Arctan),
            "Arctan2" => Ok(ItaVariant::Arctan2),
            _ => Err(Error::UnknownName {
                kind: "ITA variant",
                value: s.to_string(),
            }),
        }
    }
}

/// Individual Typology Angle in degrees for lightness `l` and blue-yellow
/// chroma `b`.
///
/// `Arctan` gives `atan((l - 50) / b)` in `(-90, 90)` and rejects `b = 0`.
/// `Arctan2` is the quadrant-aware angle in `(-180, 180)`, written piecewise
/// so that it is bit-identical to `Arctan` whenever `b > 0`:
///
/// - `b > 0`: `atan((l - 50) / b)`
/// - `b < 0`: `atan((l - 50) / b) + sgn(l - 50) * 180`
/// - `b = 0`: `sgn(l - 50) * 90`
///
/// with `sgn(0) = 0`, so a zero numerator always yields 0°.
pub fn ita_degrees(l: f64, b: f64, variant: ItaVariant) -> Result<f64> {
    let rise = l - 50.0;
    match variant {
        ItaVariant::Arctan => {
            if b == 0.0 {
                return Err(Error::DegenerateAngle);
            }
            Ok(libm::atan(rise / b).to_degrees())
        }
        ItaVariant::Arctan2 => {
            let sign = if rise > 0.0 {
                1.0
            } else if rise < 0.0 {
                -1.0
            } else {
                0.0
            };
            if b > 0.0 {
                Ok(libm::atan(rise / b).to_degrees())
            } else if b < 0.0 {
                Ok(libm::atan(rise / b).to_degrees() + sign * 180.0)
            } else {
                Ok(sign * 90.0)
            }
        }
    }
}

/// An ITA-binned skin type, 1 (lightest) to 6 (darkest).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SkinType(u8);

impl SkinType {
    pub const ALL: [SkinType; 6] = [
        SkinType(1),
        SkinType(2),
        SkinType(3),
        SkinType(4),
        SkinType(5),
        SkinType(6),
    ];

    pub fn new(value: u8) -> Result<Self> {
        if (1..=6).contains(&value) {
            Ok(SkinType(value))
        } else {
            Err(Error::InvalidSkinType(value))
        }
    }

    pub const fn get(self) -> u8 {
        self.0
    }

    /// Zero-based position, handy for indexing 6-element tables.
    pub const fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }
}

impl fmt::Display for SkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Five strictly descending ITA cutoffs (degrees) separating six skin types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkinTypeThresholds([f64; 5]);

impl SkinTypeThresholds {
    pub const DEFAULT_CUTOFFS: [f64; 5] = [55.0, 41.0, 28.0, 19.0, 10.0];

    pub fn new(cutoffs: [f64; 5]) -> Result<Self> {
        if cutoffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidThresholds("cutoffs must be finite"));
        }
        if cutoffs.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::InvalidThresholds(
                "cutoffs must be strictly descending",
            ));
        }
        Ok(Self(cutoffs))
    }

    pub const fn cutoffs(&self) -> &[f64; 5] {
        &self.0
    }

    pub fn bin(&self, ita: f64) -> SkinType {
        bin_skin_type(ita, self)
    }
}

impl Default for SkinTypeThresholds {
    fn default() -> Self {
        Self(Self::DEFAULT_CUTOFFS)
    }
}

/// Bins an ITA into a skin type. Upper bounds are inclusive: with the
/// default table 41° is type 3 and 10° is type 6.
pub fn bin_skin_type(ita: f64, thresholds: &SkinTypeThresholds) -> SkinType {
    let darker = thresholds.0.iter().take_while(|&&cut| ita <= cut).count();
    SkinType(darker as u8 + 1)
}
