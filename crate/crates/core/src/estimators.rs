//! Per-image skin tone estimators.
//!
//! Four ways of reducing a dermoscopy image to one representative ITA:
//!
//! - [`estimate_dlhss`]: an externally supplied healthy-skin mask, with L\*
//!   and b\* each summarised by the median of the values lying within one
//!   standard deviation of their mean.
//! - [`estimate_colorseg`]: Otsu on grey levels to drop the (darker)
//!   lesion, HSV and YCrCb skin gates, then the ITA of the mean colour.
//! - [`estimate_random_patch`]: eight periphery patches of a standardized,
//!   hair-masked image; the brightest patch-mean ITA wins. Supports both
//!   arctangent variants.
//! - [`estimate_ght`]: grey-world balance, generalized histogram threshold,
//!   then an aggregate of per-pixel ITA over the bright class.
//!
//! Methods other than the random-patch one always use [`ItaVariant::Arctan2`].

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::colorspace::{
    ita_degrees, srgb_channels_to_cielab, srgb_to_hsv, srgb_to_ycrcb, ItaVariant, LabConverter,
    RgbColor, SkinType, SkinTypeThresholds,
};
use crate::imaging::{
    blackhat_hair_mask, grey_world_balance, standardize_geometry, CropWindow, Image, PixelMask,
};
use crate::thresholding::{ght_threshold, otsu_threshold, GhtParams, Histogram256};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Dlhss,
    ColorSeg,
    RandomPatch,
    Ght,
    /// Analytic ITA of a synthetic image's skin colour.
    GroundTruth,
}

impl Method {
    pub const fn as_str(self) -> &'static str {
        match self {
            Method::Dlhss => "Dlhss",
            Method::ColorSeg => "ColorSeg",
            Method::RandomPatch => "RandomPatch",
            Method::Ght => "Ght",
            Method::GroundTruth => "GroundTruth",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Method::Dlhss,
            Method::ColorSeg,
            Method::RandomPatch,
            Method::Ght,
            Method::GroundTruth,
        ]
        .into_iter()
        .find(|m| m.as_str() == s)
        .ok_or_else(|| Error::UnknownName {
            kind: "method",
            value: s.to_string(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ok,
    NoSkinDetected,
    EmptyMask,
    Degenerate,
    /// Estimate produced, but every patch centre sits on the lesion.
    LesionDominated,
    Error,
}

impl Status {
    pub const ALL: [Status; 6] = [
        Status::Ok,
        Status::NoSkinDetected,
        Status::EmptyMask,
        Status::Degenerate,
        Status::LesionDominated,
        Status::Error,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "Ok",
            Status::NoSkinDetected => "NoSkinDetected",
            Status::EmptyMask => "EmptyMask",
            Status::Degenerate => "Degenerate",
            Status::LesionDominated => "LesionDominated",
            Status::Error => "Error",
        }
    }

    /// The row status an estimator failure is reported under.
    pub fn from_error(err: &Error) -> Status {
        match err {
            Error::EmptyMask => Status::EmptyMask,
            Error::NoSkinDetected => Status::NoSkinDetected,
            Error::Degenerate(_)
            | Error::DegenerateHistogram
            | Error::DegenerateAngle
            | Error::ZeroChannel(_) => Status::Degenerate,
            _ => Status::Error,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Status {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Status::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| Error::UnknownName {
                kind: "status",
                value: s.to_string(),
            })
    }
}

/// Outcome of a successful estimator run, before it is tied to an image id.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub method: Method,
    pub variant: ItaVariant,
    pub ita_deg: f64,
    pub skin_type: SkinType,
    pub pixel_count: usize,
    pub lesion_dominated: bool,
}

impl Estimate {
    fn new(
        method: Method,
        variant: ItaVariant,
        ita_deg: f64,
        pixel_count: usize,
        thresholds: &SkinTypeThresholds,
    ) -> Self {
        Self {
            method,
            variant,
            ita_deg,
            skin_type: thresholds.bin(ita_deg),
            pixel_count,
            lesion_dominated: false,
        }
    }

    pub fn status(&self) -> Status {
        if self.lesion_dominated {
            Status::LesionDominated
        } else {
            Status::Ok
        }
    }
}

/// One row of a tones table.
///
/// `ita_deg` is present for `Ok` and `LesionDominated`; `skin_type` only for
/// `Ok`.
#[derive(Debug, Clone, PartialEq)]
pub struct ItaResult {
    pub image_id: String,
    pub method: Method,
    pub variant: ItaVariant,
    pub ita_deg: Option<f64>,
    pub skin_type: Option<SkinType>,
    pub status: Status,
    pub pixel_count: usize,
}

impl ItaResult {
    pub fn from_estimate(image_id: impl Into<String>, est: Estimate) -> Self {
        let status = est.status();
        Self {
            image_id: image_id.into(),
            method: est.method,
            variant: est.variant,
            ita_deg: Some(est.ita_deg),
            skin_type: (status == Status::Ok).then_some(est.skin_type),
            status,
            pixel_count: est.pixel_count,
        }
    }

    pub fn failed(
        image_id: impl Into<String>,
        method: Method,
        variant: ItaVariant,
        status: Status,
    ) -> Self {
        Self {
            image_id: image_id.into(),
            method,
            variant,
            ita_deg: None,
            skin_type: None,
            status,
            pixel_count: 0,
        }
    }

    pub fn from_outcome(
        image_id: impl Into<String>,
        method: Method,
        variant: ItaVariant,
        outcome: Result<Estimate>,
    ) -> Self {
        match outcome {
            Ok(est) => Self::from_estimate(image_id, est),
            Err(e) => Self::failed(image_id, method, variant, Status::from_error(&e)),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// `(ita, type)` for rows with status `Ok`.
    pub fn typed(&self) -> Option<(f64, SkinType)> {
        match (self.status, self.ita_deg, self.skin_type) {
            (Status::Ok, Some(ita), Some(t)) => Some((ita, t)),
            _ => None,
        }
    }
}

/// Closed interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    fn is_well_ordered(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvGate {
    /// Degrees.
    pub hue: Interval,
    pub saturation: Interval,
    pub value: Interval,
}

impl HsvGate {
    pub fn admits(&self, c: RgbColor) -> bool {
        let hsv = srgb_to_hsv(c);
        self.hue.contains(hsv.h) && self.saturation.contains(hsv.s) && self.value.contains(hsv.v)
    }
}

impl Default for HsvGate {
    fn default() -> Self {
        Self {
            hue: Interval::new(0.0, 25.0),
            saturation: Interval::new(0.06, 0.67),
            value: Interval::new(0.16, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YCrCbGate {
    pub y: Interval,
    pub cr: Interval,
    pub cb: Interval,
}

impl YCrCbGate {
    pub fn admits(&self, c: RgbColor) -> bool {
        let ycc = srgb_to_ycrcb(c);
        self.y.contains(ycc.y) && self.cr.contains(ycc.cr) && self.cb.contains(ycc.cb)
    }
}

impl Default for YCrCbGate {
    fn default() -> Self {
        Self {
            y: Interval::new(0.0, 255.0),
            cr: Interval::new(135.0, 180.0),
            cb: Interval::new(85.0, 135.0),
        }
    }
}

/// How a set of per-pixel ITA values is reduced to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aggregation {
    Median,
    Mean,
}

impl Aggregation {
    pub const fn as_str(self) -> &'static str {
        match self {
            Aggregation::Median => "median",
            Aggregation::Mean => "mean",
        }
    }

    fn apply(self, values: &mut [f64]) -> Option<f64> {
        match self {
            Aggregation::Median => median(values),
            Aggregation::Mean => mean(values),
        }
    }
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "median" => Ok(Aggregation::Median),
            "mean" => Ok(Aggregation::Mean),
            _ => Err(Error::UnknownName {
                kind: "aggregation",
                value: s.to_string(),
            }),
        }
    }
}

/// Free parameters of all four estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig {
    pub thresholds: SkinTypeThresholds,
    /// Side of the standardized square image (random-patch and GHT methods).
    pub side: usize,
    pub patch_size: usize,
    /// A patch is dropped when fewer than this fraction of its pixels are usable.
    pub min_usable_fraction: f64,
    pub hsv_gate: HsvGate,
    pub ycrcb_gate: YCrCbGate,
    pub blackhat_kernel: usize,
    pub blackhat_threshold: u8,
    pub ght: GhtParams,
    pub ght_aggregation: Aggregation,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            thresholds: SkinTypeThresholds::default(),
            side: 200,
            patch_size: 20,
            min_usable_fraction: 0.25,
            hsv_gate: HsvGate::default(),
            ycrcb_gate: YCrCbGate::default(),
            blackhat_kernel: 17,
            blackhat_threshold: 10,
            ght: GhtParams::default(),
            ght_aggregation: Aggregation::Median,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        SkinTypeThresholds::new(*self.thresholds.cutoffs())?;
        if self.side < crate::imaging::MIN_STANDARD_SIDE {
            return Err(Error::InvalidSide(self.side));
        }
        if self.patch_size == 0 || self.patch_size * 2 > self.side {
            return Err(Error::InvalidConfig("patch size must lie in 1..=side/2"));
        }
        if !(0.0..=1.0).contains(&self.min_usable_fraction) {
            return Err(Error::InvalidConfig(
                "min usable fraction must lie in [0, 1]",
            ));
        }
        let gates = [
            self.hsv_gate.hue,
            self.hsv_gate.saturation,
            self.hsv_gate.value,
            self.ycrcb_gate.y,
            self.ycrcb_gate.cr,
            self.ycrcb_gate.cb,
        ];
        if !gates.iter().all(Interval::is_well_ordered) {
            return Err(Error::InvalidConfig(
                "gate intervals must be finite with lo <= hi",
            ));
        }
        if self.blackhat_kernel < 3 || self.blackhat_kernel.is_multiple_of(2) {
            return Err(Error::InvalidKernel(self.blackhat_kernel));
        }
        self.ght.validate()
    }
}

fn sort_values(values: &mut [f64]) {
    values.sort_unstable_by(f64::total_cmp);
}

/// Median; the mean of the two middle values for even lengths.
pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    sort_values(values);
    let mid = values.len() / 2;
    Some(if values.len().is_multiple_of(2) {
        (values[mid - 1] + values[mid]) / 2.0
    } else {
        values[mid]
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Median of the values lying within one (population) standard deviation
/// of the mean. With zero spread every value is kept. The input is sorted
/// first, so the result does not depend on input order.
pub fn median_within_one_sigma(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    sort_values(values);
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / n;
    let sigma = libm::sqrt(var);
    let lo = values.partition_point(|&v| v < mu - sigma);
    let hi = values.partition_point(|&v| v <= mu + sigma);
    let kept = if sigma == 0.0 || lo >= hi {
        &values[..]
    } else {
        &values[lo..hi]
    };
    let mid = kept.len() / 2;
    Some(if kept.len() % 2 == 0 {
        (kept[mid - 1] + kept[mid]) / 2.0
    } else {
        kept[mid]
    })
}

/// Healthy-skin-mask method. L\* and b\* are summarised independently, and
/// the ITA is taken from the pair of summaries.
pub fn estimate_dlhss(img: &Image, mask: &PixelMask, cfg: &EstimatorConfig) -> Result<Estimate> {
    mask.ensure_matches(img)?;
    let conv = LabConverter::new();
    let (mut ls, mut bs): (Vec<f64>, Vec<f64>) = img
        .pixels()
        .iter()
        .zip(mask.bits())
        .filter(|(_, &keep)| keep)
        .map(|(&c, _)| {
            let lab = conv.convert(c);
            (lab.l, lab.b)
        })
        .unzip();
    let count = ls.len();
    let l = median_within_one_sigma(&mut ls).ok_or(Error::EmptyMask)?;
    let b = median_within_one_sigma(&mut bs).ok_or(Error::EmptyMask)?;
    let ita = ita_degrees(l, b, ItaVariant::Arctan2)?;
    Ok(Estimate::new(
        Method::Dlhss,
        ItaVariant::Arctan2,
        ita,
        count,
        &cfg.thresholds,
    ))
}

/// Colour-gate method. Pixels brighter than the Otsu threshold are taken as
/// non-lesion (lesions are assumed darker than skin); on a single-level image
/// every pixel is a candidate.
pub fn estimate_colorseg(img: &Image, cfg: &EstimatorConfig) -> Result<Estimate> {
    let grey = img.to_grey();
    let hist = Histogram256::from_levels(grey.iter().copied())?;
    let cut = match otsu_threshold(&hist) {
        Ok(t) => Some(t),
        Err(Error::DegenerateHistogram) => None,
        Err(e) => return Err(e),
    };
    let mut sums = [0u64; 3];
    let mut n = 0usize;
    for (&c, &g) in img.pixels().iter().zip(&grey) {
        if cut.is_some_and(|t| g <= t) {
            continue;
        }
        if cfg.hsv_gate.admits(c) && cfg.ycrcb_gate.admits(c) {
            sums[0] += c.r as u64;
            sums[1] += c.g as u64;
            sums[2] += c.b as u64;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoSkinDetected);
    }
    let mean_rgb = sums.map(|s| s as f64 / n as f64);
    let lab = srgb_channels_to_cielab(mean_rgb);
    let ita = ita_degrees(lab.l, lab.b, ItaVariant::Arctan2)?;
    Ok(Estimate::new(
        Method::ColorSeg,
        ItaVariant::Arctan2,
        ita,
        n,
        &cfg.thresholds,
    ))
}

/// Top-left corners of the eight periphery patches of a `side x side`
/// image: four corners and four edge midpoints, in row-major order.
pub fn patch_origins(side: usize, patch: usize) -> [(usize, usize); 8] {
    let far = side - patch;
    let mid = far / 2;
    [
        (0, 0),
        (mid, 0),
        (far, 0),
        (0, mid),
        (far, mid),
        (0, far),
        (mid, far),
        (far, far),
    ]
}

/// Random-patch method. `lesion_mask`, when given, must match `img` and
/// only feeds the lesion-domination diagnostic.
pub fn estimate_random_patch(
    img: &Image,
    variant: ItaVariant,
    cfg: &EstimatorConfig,
    lesion_mask: Option<&PixelMask>,
) -> Result<Estimate> {
    cfg.validate()?;
    if let Some(m) = lesion_mask {
        m.ensure_matches(img)?;
    }
    let std_img = standardize_geometry(img, cfg.side)?;
    let hair = blackhat_hair_mask(&std_img, cfg.blackhat_kernel, cfg.blackhat_threshold)?;
    let conv = LabConverter::new();
    let patch = cfg.patch_size;
    let floor = cfg.min_usable_fraction * (patch * patch) as f64;

    let origins = patch_origins(cfg.side, patch);
    let mut best: Option<(f64, usize)> = None;
    for &(x0, y0) in &origins {
        let mut sum = 0.0;
        let mut usable = 0usize;
        for y in y0..y0 + patch {
            for x in x0..x0 + patch {
                if hair.get(x, y) {
                    continue;
                }
                let lab = conv.convert(std_img.get(x, y));
                // b* = 0 has no arctan ITA; such pixels are unusable.
                if let Ok(ita) = ita_degrees(lab.l, lab.b, variant) {
                    sum += ita;
                    usable += 1;
                }
            }
        }
        if usable == 0 || (usable as f64) < floor {
            continue;
        }
        let patch_mean = sum / usable as f64;
        if best.is_none_or(|(b, _)| patch_mean > b) {
            best = Some((patch_mean, usable));
        }
    }
    let (ita, usable) = best.ok_or(Error::Degenerate(
        "every periphery patch is below the usable-pixel floor",
    ))?;

    let mut est = Estimate::new(Method::RandomPatch, variant, ita, usable, &cfg.thresholds);
    if let Some(lesion) = lesion_mask {
        let window = CropWindow::centred_square(img.width(), img.height());
        let half = patch as f64 / 2.0;
        est.lesion_dominated = origins.iter().all(|&(x0, y0)| {
            let (sx, sy) = window.to_source(cfg.side, x0 as f64 + half, y0 as f64 + half);
            lesion.get(sx, sy)
        });
    }
    Ok(est)
}

/// Grey-world + GHT method. The class above the threshold (the brighter
/// one) is taken as non-lesion skin.
pub fn estimate_ght(img: &Image, cfg: &EstimatorConfig) -> Result<Estimate> {
    cfg.validate()?;
    let std_img = standardize_geometry(img, cfg.side)?;
    let balanced = grey_world_balance(&std_img)?;
    let grey = balanced.to_grey();
    let hist = Histogram256::from_levels(grey.iter().copied())?;
    let cut = ght_threshold(&hist, &cfg.ght).map_err(|e| match e {
        Error::DegenerateHistogram => Error::Degenerate("single grey level after balancing"),
        other => other,
    })?;
    let conv = LabConverter::new();
    let mut itas: Vec<f64> = balanced
        .pixels()
        .iter()
        .zip(&grey)
        .filter(|(_, &g)| g > cut)
        .map(|(&c, _)| {
            let lab = conv.convert(c);
            ita_degrees(lab.l, lab.b, ItaVariant::Arctan2)
        })
        .collect::<Result<_>>()?;
    let count = itas.len();
    let ita = cfg
        .ght_aggregation
        .apply(&mut itas)
        .ok_or(Error::NoSkinDetected)?;
    Ok(Estimate::new(
        Method::Ght,
        ItaVariant::Arctan2,
        ita,
        count,
        &cfg.thresholds,
    ))
}
