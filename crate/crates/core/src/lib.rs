//! Skin tone estimation from dermoscopy images through the Individual
//! Typology Angle (ITA), and the analysis machinery around it.
//!
//! The crate is `no_std` (it needs `alloc`) and carries no IO. Modules:
//!
//! - [`colorspace`]: sRGB/CIELab/HSV/YCrCb conversions, ITA and skin-type binning.
//! - [`thresholding`]: Otsu and generalized histogram thresholding.
//! - [`imaging`]: in-memory images and masks, geometry standardization,
//!   grey-world balancing and black-hat hair masks.
//! - [`estimators`]: the four per-image ITA estimators.
//! - [`analysis`]: type distributions, agreement matrices, classification
//!   and per-skin-type fairness metrics.
//! - [`splits`]: stratified and data-shift train/val/test assignment.
//! - [`synthgen`]: synthetic dermoscopy-like images with known ITA.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod colorspace;
mod error;
pub mod estimators;
pub mod imaging;
pub mod splits;
pub mod synthgen;
pub mod thresholding;

pub use error::{Error, Result};
