//! Synthetic corpus files.
//!
//! A corpus spec is a `key = value` file. Numeric parameters take either a
//! single value or a half-open range `lo..hi`:
//!
//! ```text
//! count = 100
//! width = 600
//! height = 450
//! seed = 7
//! skin_l = 55..75
//! skin_a = 5..15
//! skin_b = 12..24
//! lesion_lab = 35,15,20
//! lesion_radius_frac = 0..0.25
//! hair_count = 0..4        # inclusive integer range
//! hair_width = 2
//! noise_sigma = 0
//! gain_r = 1
//! gain_g = 1
//! gain_b = 1
//! cutoff_margin = 1
//! ```
//!
//! Output layout: `images/<id>.png`, `masks/<id>_mask.png` (healthy skin:
//! outside the lesion and not hair), `lesion_masks/<id>_lesion.png` and
//! `ground_truth.csv`.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use skintone_core::colorspace::LabColor;
use skintone_core::estimators::{Interval, ItaResult};
use skintone_core::imaging::PixelMask;
use skintone_core::synthgen::{generate_synthetic, CorpusSpec};

use crate::batch::{LESION_SUFFIX, MASK_SUFFIX};
use crate::error::{Error, Result};
use crate::image_io::{save_mask_png, save_png};
use crate::tables::save_tones;

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("cannot parse `{}`", s.trim()))
}

fn parse_range(s: &str) -> std::result::Result<Interval, String> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok(Interval::new(parse_num(lo)?, parse_num(hi)?)),
        None => {
            let v = parse_num(s)?;
            Ok(Interval::new(v, v))
        }
    }
}

fn parse_int_range(s: &str) -> std::result::Result<(usize, usize), String> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok((parse_num(lo)?, parse_num(hi)?)),
        None => {
            let v = parse_num(s)?;
            Ok((v, v))
        }
    }
}

fn set(spec: &mut CorpusSpec, key: &str, value: &str) -> std::result::Result<(), String> {
    match key {
        "count" => spec.count = parse_num(value)?,
        "width" => spec.width = parse_num(value)?,
        "height" => spec.height = parse_num(value)?,
        "seed" => spec.seed = parse_num(value)?,
        "skin_l" => spec.skin_l = parse_range(value)?,
        "skin_a" => spec.skin_a = parse_range(value)?,
        "skin_b" => spec.skin_b = parse_range(value)?,
        "lesion_lab" => {
            let parts: Vec<f64> = value
                .split(',')
                .map(parse_num)
                .collect::<std::result::Result<_, _>>()?;
            let [l, a, b] = parts[..] else {
                return Err("`lesion_lab` takes three comma-separated numbers".into());
            };
            spec.lesion_lab = LabColor::new(l, a, b);
        }
        "lesion_radius_frac" => spec.lesion_radius_frac = parse_range(value)?,
        "hair_count" => spec.hair_count = parse_int_range(value)?,
        "hair_width" => spec.hair_width = parse_num(value)?,
        "noise_sigma" => spec.noise_sigma = parse_range(value)?,
        "gain_r" => spec.channel_gains[0] = parse_range(value)?,
        "gain_g" => spec.channel_gains[1] = parse_range(value)?,
        "gain_b" => spec.channel_gains[2] = parse_range(value)?,
        "cutoff_margin" => spec.cutoff_margin = parse_num(value)?,
        other => return Err(format!("unknown key `{other}`")),
    }
    Ok(())
}

pub fn parse_corpus_spec(path: &Path, text: &str) -> Result<CorpusSpec> {
    let mut spec = CorpusSpec::default();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let line_no = Some(i as u64 + 1);
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, line_no, "expected `key = value`"))?;
        set(&mut spec, k.trim(), v.trim()).map_err(|m| Error::parse(path, line_no, m))?;
    }
    Ok(spec)
}

pub fn load_corpus_spec(path: &Path) -> Result<CorpusSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_corpus_spec(path, &text)
}

#[derive(Debug, Clone)]
pub struct CorpusLayout {
    pub images: PathBuf,
    pub masks: PathBuf,
    pub lesion_masks: PathBuf,
    pub ground_truth: PathBuf,
}

impl CorpusLayout {
    pub fn new(root: &Path) -> Self {
        Self {
            images: root.join("images"),
            masks: root.join("masks"),
            lesion_masks: root.join("lesion_masks"),
            ground_truth: root.join("ground_truth.csv"),
        }
    }
}

/// Generates the corpus under `root` and returns the ground-truth rows.
pub fn write_corpus(spec: &CorpusSpec, source: &Path, root: &Path) -> Result<Vec<ItaResult>> {
    let specs = spec.sample().map_err(|e| Error::data(source, e))?;
    let layout = CorpusLayout::new(root);
    for dir in [&layout.images, &layout.masks, &layout.lesion_masks] {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let rows = specs
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let id = spec.image_id(i);
            let sample = generate_synthetic(s, &id).map_err(|e| Error::data(source, e))?;
            let healthy = PixelMask::from_fn(s.width, s.height, |x, y| {
                sample.skin_mask.get(x, y) && !sample.hair_mask.get(x, y)
            })?;
            save_png(&sample.image, &layout.images.join(format!("{id}.png")))?;
            save_mask_png(
                &healthy,
                &layout.masks.join(format!("{id}{MASK_SUFFIX}.png")),
            )?;
            save_mask_png(
                &sample.lesion_mask,
                &layout.lesion_masks.join(format!("{id}{LESION_SUFFIX}.png")),
            )?;
            Ok(sample.ground_truth)
        })
        .collect::<Result<Vec<_>>>()?;
    save_tones(&layout.ground_truth, &rows)?;
    Ok(rows)
}
