//! File formats, image IO and the command-line front end for
//! [`skintone_core`].
//!
//! - [`image_io`]: PNG/JPEG images and PNG masks.
//! - [`tables`]: tones, predictions, labels, splits and report CSVs.
//! - [`config`]: settings and their `key = value` file format.
//! - [`batch`]: parallel estimation over an image directory.
//! - [`synth`]: synthetic corpus spec files and output layout.
//! - [`report`]: text tables and SVG bar charts.
//! - [`cli`]: the `skintone` command.

pub mod batch;
pub mod cli;
pub mod config;
mod error;
pub mod image_io;
pub mod report;
pub mod synth;
pub mod tables;

pub use error::{Error, Result};
pub use skintone_core as core;
