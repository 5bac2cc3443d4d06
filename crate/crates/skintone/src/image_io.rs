//! PNG/JPEG decoding into core images; masks are single-channel PNGs where
//! any nonzero value is `true`.

use std::path::Path;

use image::{GrayImage, ImageReader, RgbImage};
use skintone_core::colorspace::RgbColor;
use skintone_core::imaging::{Image, PixelMask};

use crate::error::{Error, Result};

fn decode(path: &Path) -> Result<image::DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let reader = reader
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Loads an image as 8-bit RGB; alpha is dropped and 16-bit data truncated.
pub fn load_image(path: &Path) -> Result<Image> {
    let rgb = decode(path)?.to_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb
        .pixels()
        .map(|p| RgbColor::new(p[0], p[1], p[2]))
        .collect();
    Image::new(w, h, pixels).map_err(|e| Error::data(path, e))
}

pub fn load_mask(path: &Path) -> Result<PixelMask> {
    let grey = decode(path)?.to_luma8();
    let (w, h) = (grey.width() as usize, grey.height() as usize);
    let bits = grey.pixels().map(|p| p[0] != 0).collect();
    PixelMask::new(w, h, bits).map_err(|e| Error::data(path, e))
}

fn encode_err(path: &Path, e: image::ImageError) -> Error {
    Error::Encode {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn dims(path: &Path, w: usize, h: usize) -> Result<(u32, u32)> {
    match (u32::try_from(w), u32::try_from(h)) {
        (Ok(w), Ok(h)) => Ok((w, h)),
        _ => Err(Error::Encode {
            path: path.to_path_buf(),
            message: "image too large".into(),
        }),
    }
}

pub fn save_png(img: &Image, path: &Path) -> Result<()> {
    let (w, h) = dims(path, img.width(), img.height())?;
    let raw: Vec<u8> = img.pixels().iter().flat_map(|c| c.channels()).collect();
    let buf = RgbImage::from_raw(w, h, raw).expect("buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| encode_err(path, e))
}

/// Writes `true` as 255 and `false` as 0.
pub fn save_mask_png(mask: &PixelMask, path: &Path) -> Result<()> {
    let (w, h) = dims(path, mask.width(), mask.height())?;
    let raw: Vec<u8> = mask
        .bits()
        .iter()
        .map(|&b| if b { 255 } else { 0 })
        .collect();
    let buf = GrayImage::from_raw(w, h, raw).expect("buffer matches dimensions");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| encode_err(path, e))
}
