//! In-memory RGB images, boolean masks and the preprocessing steps shared by
//! the estimators: geometric standardization, grey-world white balance and
//! black-hat hair masking.

use alloc::vec;
use alloc::vec::Vec;

use crate::colorspace::RgbColor;
use crate::{Error, Result};

/// Row-major 8-bit sRGB image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<RgbColor>,
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    let expected = width.saturating_mul(height);
    if width == 0 || height == 0 || expected != len {
        return Err(Error::InvalidDimensions {
            width,
            height,
            expected,
            actual: len,
        });
    }
    Ok(())
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<RgbColor>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, color: RgbColor) -> Result<Self> {
        Self::new(width, height, vec![color; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> RgbColor,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[RgbColor] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [RgbColor] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<RgbColor> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> RgbColor {
        self.pixels[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, color: RgbColor) {
        self.pixels[y * self.width + x] = color;
    }

    /// Integer BT.601 luma of every pixel.
    pub fn to_grey(&self) -> Vec<u8> {
        self.pixels.iter().map(|&c| luma(c)).collect()
    }

    pub fn crop(&self, x0: usize, y0: usize, width: usize, height: usize) -> Result<Image> {
        if x0 + width > self.width || y0 + height > self.height {
            return Err(Error::InvalidDimensions {
                width,
                height,
                expected: width * height,
                actual: 0,
            });
        }
        Image::from_fn(width, height, |x, y| self.get(x0 + x, y0 + y))
    }
}

/// `round(0.299 R + 0.587 G + 0.114 B)` in exact integer arithmetic, so a
/// constant offset on all channels shifts the result by exactly that offset.
pub fn luma(c: RgbColor) -> u8 {
    ((299 * c.r as u32 + 587 * c.g as u32 + 114 * c.b as u32 + 500) / 1000) as u8
}

/// Boolean per-pixel selection aligned with an [`Image`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl PixelMask {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width.saturating_mul(height)])
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                bits.push(f(x, y));
            }
        }
        Self::new(width, height, bits)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, value: bool) {
        self.bits[y * self.width + x] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn invert(&self) -> PixelMask {
        PixelMask {
            width: self.width,
            height: self.height,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    pub fn ensure_matches(&self, img: &Image) -> Result<()> {
        if self.width != img.width || self.height != img.height {
            return Err(Error::DimensionMismatch {
                mask_width: self.width,
                mask_height: self.height,
                image_width: img.width,
                image_height: img.height,
            });
        }
        Ok(())
    }
}

pub const MIN_STANDARD_SIDE: usize = 40;

/// The largest centred square inside a `width x height` frame. Odd margins
/// are floored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CropWindow {
    pub x0: usize,
    pub y0: usize,
    pub size: usize,
}

impl CropWindow {
    pub fn centred_square(width: usize, height: usize) -> Self {
        let size = width.min(height);
        CropWindow {
            x0: (width - size) / 2,
            y0: (height - size) / 2,
            size,
        }
    }

    /// Maps a continuous coordinate of the `side x side` standardized image
    /// back to the source pixel containing it.
    pub fn to_source(&self, side: usize, sx: f64, sy: f64) -> (usize, usize) {
        let scale = self.size as f64 / side as f64;
        let map = |v: f64, origin: usize| {
            let p = libm::floor(v * scale).max(0.0) as usize;
            origin + p.min(self.size - 1)
        };
        (map(sx, self.x0), map(sy, self.y0))
    }
}

/// Centre-crops to the largest square, then resizes to `side x side`.
pub fn standardize_geometry(img: &Image, side: usize) -> Result<Image> {
    if side < MIN_STANDARD_SIDE {
        return Err(Error::InvalidSide(side));
    }
    let w = CropWindow::centred_square(img.width, img.height);
    let square = if w.size == img.width && w.size == img.height {
        img.clone()
    } else {
        img.crop(w.x0, w.y0, w.size, w.size)?
    };
    if w.size == side {
        return Ok(square);
    }
    Ok(resize_bilinear(&square, side, side))
}

/// Bilinear resampling with pixel-centre alignment and edge clamping.
pub fn resize_bilinear(img: &Image, width: usize, height: usize) -> Image {
    let sx = img.width as f64 / width as f64;
    let sy = img.height as f64 / height as f64;
    let axis = |dst: usize, scale: f64, len: usize| {
        let pos = ((dst as f64 + 0.5) * scale - 0.5).clamp(0.0, (len - 1) as f64);
        let lo = libm::floor(pos) as usize;
        let hi = (lo + 1).min(len - 1);
        (lo, hi, pos - lo as f64)
    };
    let xs: Vec<_> = (0..width).map(|x| axis(x, sx, img.width)).collect();
    let mut pixels = Vec::with_capacity(width * height);
    for y in 0..height {
        let (y0, y1, fy) = axis(y, sy, img.height);
        for &(x0, x1, fx) in &xs {
            let p = [
                img.get(x0, y0),
                img.get(x1, y0),
                img.get(x0, y1),
                img.get(x1, y1),
            ];
            let blend = |ch: fn(RgbColor) -> u8| {
                let top = ch(p[0]) as f64 * (1.0 - fx) + ch(p[1]) as f64 * fx;
                let bottom = ch(p[2]) as f64 * (1.0 - fx) + ch(p[3]) as f64 * fx;
                libm::round(top * (1.0 - fy) + bottom * fy).clamp(0.0, 255.0) as u8
            };
            pixels.push(RgbColor::new(
                blend(|c| c.r),
                blend(|c| c.g),
                blend(|c| c.b),
            ));
        }
    }
    Image {
        width,
        height,
        pixels,
    }
}

pub fn channel_means(img: &Image) -> [f64; 3] {
    let mut sums = [0u64; 3];
    for c in &img.pixels {
        sums[0] += c.r as u64;
        sums[1] += c.g as u64;
        sums[2] += c.b as u64;
    }
    let n = img.pixels.len() as f64;
    sums.map(|s| s as f64 / n)
}

/// Per-channel gains that equalize the three channel means at their average.
pub fn grey_world_gains(img: &Image) -> Result<[f64; 3]> {
    let means = channel_means(img);
    for (mean, name) in means.iter().zip(["red", "green", "blue"]) {
        if *mean == 0.0 {
            return Err(Error::ZeroChannel(name));
        }
    }
    let grey = (means[0] + means[1] + means[2]) / 3.0;
    Ok(means.map(|m| grey / m))
}

/// Grey-world white balance: scale each channel by its gain, then round
/// and clamp to the 8-bit range. Saturated pixels are biased by the clamp.
pub fn grey_world_balance(img: &Image) -> Result<Image> {
    let gains = grey_world_gains(img)?;
    let apply = |v: u8, g: f64| libm::round(v as f64 * g).clamp(0.0, 255.0) as u8;
    let pixels = img
        .pixels
        .iter()
        .map(|c| {
            RgbColor::new(
                apply(c.r, gains[0]),
                apply(c.g, gains[1]),
                apply(c.b, gains[2]),
            )
        })
        .collect();
    Ok(Image {
        width: img.width,
        height: img.height,
        pixels,
    })
}

#[derive(Clone, Copy)]
enum Extremum {
    Max,
    Min,
}

/// Separable square-window max or min filter; the window is clipped at the
/// image border.
fn rank_filter(src: &[u8], width: usize, height: usize, radius: usize, op: Extremum) -> Vec<u8> {
    let pick = |a: u8, b: u8| match op {
        Extremum::Max => a.max(b),
        Extremum::Min => a.min(b),
    };
    let mut rows = vec![0u8; src.len()];
    for y in 0..height {
        let row = &src[y * width..(y + 1) * width];
        for x in 0..width {
            let lo = x.saturating_sub(radius);
            let hi = (x + radius).min(width - 1);
            rows[y * width + x] = row[lo..=hi].iter().copied().reduce(pick).unwrap_or(0);
        }
    }
    let mut out = vec![0u8; src.len()];
    for x in 0..width {
        for y in 0..height {
            let lo = y.saturating_sub(radius);
            let hi = (y + radius).min(height - 1);
            let mut v = rows[lo * width + x];
            for yy in lo + 1..=hi {
                v = pick(v, rows[yy * width + x]);
            }
            out[y * width + x] = v;
        }
    }
    out
}

fn check_kernel(kernel_side: usize) -> Result<()> {
    if kernel_side < 3 || kernel_side.is_multiple_of(2) {
        return Err(Error::InvalidKernel(kernel_side));
    }
    Ok(())
}

/// Morphological black-hat (closing minus original) of a grey image with a
/// `kernel_side x kernel_side` square structuring element.
pub fn blackhat(grey: &[u8], width: usize, height: usize, kernel_side: usize) -> Result<Vec<u8>> {
    check_kernel(kernel_side)?;
    check_dims(width, height, grey.len())?;
    let radius = kernel_side / 2;
    let dilated = rank_filter(grey, width, height, radius, Extremum::Max);
    let closed = rank_filter(&dilated, width, height, radius, Extremum::Min);
    Ok(closed
        .iter()
        .zip(grey)
        .map(|(&c, &g)| c.saturating_sub(g))
        .collect())
}

/// Marks thin dark structures (hair) whose black-hat response exceeds
/// `intensity_threshold`.
pub fn blackhat_hair_mask(
    img: &Image,
    kernel_side: usize,
    intensity_threshold: u8,
) -> Result<PixelMask> {
    let response = blackhat(&img.to_grey(), img.width, img.height, kernel_side)?;
    Ok(PixelMask {
        width: img.width,
        height: img.height,
        bits: response.iter().map(|&r| r > intensity_threshold).collect(),
    })
}
