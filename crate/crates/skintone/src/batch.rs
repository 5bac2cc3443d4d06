//! Directory-level estimation. Images are processed in parallel; rows come
//! back in image-id order regardless of directory listing order.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use skintone_core::colorspace::ItaVariant;
use skintone_core::estimators::{
    estimate_colorseg, estimate_dlhss, estimate_ght, estimate_random_patch, EstimatorConfig,
    ItaResult, Method, Status,
};

use crate::error::{Error, Result};
use crate::image_io::{load_image, load_mask};

pub const MASK_SUFFIX: &str = "_mask";
pub const LESION_SUFFIX: &str = "_lesion";
const IMAGE_EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

/// Estimator selection as exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Dlhss,
    ColorSeg,
    Rp,
    Rp2,
    Ght,
}

impl MethodChoice {
    pub const ALL: [MethodChoice; 5] = [
        MethodChoice::Dlhss,
        MethodChoice::ColorSeg,
        MethodChoice::Rp,
        MethodChoice::Rp2,
        MethodChoice::Ght,
    ];

    pub const fn as_str(self) -> &'static str {
        match self {
            MethodChoice::Dlhss => "dlhss",
            MethodChoice::ColorSeg => "colorseg",
            MethodChoice::Rp => "rp",
            MethodChoice::Rp2 => "rp2",
            MethodChoice::Ght => "ght",
        }
    }

    pub const fn method(self) -> Method {
        match self {
            MethodChoice::Dlhss => Method::Dlhss,
            MethodChoice::ColorSeg => Method::ColorSeg,
            MethodChoice::Rp | MethodChoice::Rp2 => Method::RandomPatch,
            MethodChoice::Ght => Method::Ght,
        }
    }

    pub const fn variant(self) -> ItaVariant {
        match self {
            MethodChoice::Rp => ItaVariant::Arctan,
            _ => ItaVariant::Arctan2,
        }
    }
}

impl FromStr for MethodChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                format!("unknown method `{s}` (expected dlhss, colorseg, rp, rp2 or ght)")
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageEntry {
    pub image_id: String,
    pub path: PathBuf,
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| IMAGE_EXTENSIONS.iter().any(|x| x.eq_ignore_ascii_case(e)))
}

/// Image files directly inside `dir`, sorted by id (the file stem). Mask
/// files (`*_mask`, `*_lesion`) are skipped.
pub fn list_images(dir: &Path) -> Result<Vec<ImageEntry>> {
    let mut by_id = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if !path.is_file() || !is_image(&path) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else {
            continue;
        };
        if stem.ends_with(MASK_SUFFIX) || stem.ends_with(LESION_SUFFIX) {
            continue;
        }
        let id = stem.to_string();
        if let Some(prev) = by_id.insert(id.clone(), path.clone()) {
            return Err(Error::parse(
                &path,
                None,
                format!("image id `{id}` also used by {}", prev.display()),
            ));
        }
    }
    Ok(by_id
        .into_iter()
        .map(|(image_id, path)| ImageEntry { image_id, path })
        .collect())
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub method: MethodChoice,
    pub config: EstimatorConfig,
    /// Where `<id>_mask.png` files live (healthy-skin method).
    pub mask_dir: Option<PathBuf>,
    /// Where optional `<id>_lesion.png` files live (random-patch methods).
    pub lesion_dir: Option<PathBuf>,
}

pub fn estimate_one(entry: &ImageEntry, opts: &BatchOptions) -> ItaResult {
    let (method, variant) = (opts.method.method(), opts.method.variant());
    let failed = || ItaResult::failed(&entry.image_id, method, variant, Status::Error);
    let Ok(img) = load_image(&entry.path) else {
        return failed();
    };
    let cfg = &opts.config;
    let outcome = match opts.method {
        MethodChoice::Dlhss => {
            let Some(dir) = opts.mask_dir.as_deref() else {
                return failed();
            };
            let mask_path = dir.join(format!("{}{MASK_SUFFIX}.png", entry.image_id));
            match load_mask(&mask_path) {
                Ok(mask) => estimate_dlhss(&img, &mask, cfg),
                Err(_) => return failed(),
            }
        }
        MethodChoice::ColorSeg => estimate_colorseg(&img, cfg),
        MethodChoice::Rp | MethodChoice::Rp2 => {
            let lesion = opts.lesion_dir.as_ref().and_then(|dir| {
                let p = dir.join(format!("{}{LESION_SUFFIX}.png", entry.image_id));
                p.is_file().then(|| load_mask(&p))
            });
            match lesion.transpose() {
                Ok(lesion) => estimate_random_patch(&img, variant, cfg, lesion.as_ref()),
                Err(_) => return failed(),
            }
        }
        MethodChoice::Ght => estimate_ght(&img, cfg),
    };
    ItaResult::from_outcome(&entry.image_id, method, variant, outcome)
}

/// One row per entry, in input order. Per-image failures become rows with
/// status `Error`.
pub fn run_batch(entries: &[ImageEntry], opts: &BatchOptions) -> Result<Vec<ItaResult>> {
    if opts.method == MethodChoice::Dlhss {
        match &opts.mask_dir {
            None => return Err(Error::MissingMaskDir),
            Some(dir) if !dir.is_dir() => {
                return Err(Error::io(
                    dir,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "mask directory not found"),
                ))
            }
            Some(_) => {}
        }
    }
    Ok(entries.par_iter().map(|e| estimate_one(e, opts)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image_io::{save_mask_png, save_png};
    use skintone_core::colorspace::{cielab_to_srgb, LabColor};
    use skintone_core::imaging::{Image, PixelMask};

    #[test]
    fn listing_is_sorted_and_skips_masks() {
        let dir = tempfile::tempdir().unwrap();
        for name in ["b.png", "a.JPG", "a_mask.png", "c_lesion.png", "notes.txt"] {
            std::fs::write(dir.path().join(name), b"").unwrap();
        }
        let ids: Vec<String> = list_images(dir.path())
            .unwrap()
            .into_iter()
            .map(|e| e.image_id)
            .collect();
        assert_eq!(ids, ["a", "b"]);
        std::fs::write(dir.path().join("b.jpeg"), b"").unwrap();
        assert!(list_images(dir.path()).is_err());
    }

    #[test]
    fn batch_rows_and_failures() {
        let dir = tempfile::tempdir().unwrap();
        let skin = cielab_to_srgb(LabColor::new(65.0, 10.0, 15.0)).unwrap();
        let img = Image::filled(60, 50, skin).unwrap();
        save_png(&img, &dir.path().join("good.png")).unwrap();
        save_mask_png(
            &PixelMask::filled(60, 50, true).unwrap(),
            &dir.path().join("good_mask.png"),
        )
        .unwrap();
        std::fs::write(dir.path().join("bad.png"), b"garbage").unwrap();
        let entries = list_images(dir.path()).unwrap();

        let opts = BatchOptions {
            method: MethodChoice::Dlhss,
            config: EstimatorConfig::default(),
            mask_dir: Some(dir.path().to_path_buf()),
            lesion_dir: None,
        };
        let rows = run_batch(&entries, &opts).unwrap();
        assert_eq!(rows[0].image_id, "bad");
        assert_eq!(rows[0].status, Status::Error);
        assert_eq!(rows[1].status, Status::Ok);
        assert!((rows[1].ita_deg.unwrap() - 45.5).abs() < 0.5);

        let rp = BatchOptions {
            method: MethodChoice::Rp,
            ..opts
        };
        let rows = run_batch(&entries, &rp).unwrap();
        assert_eq!(rows[1].method, Method::RandomPatch);
        assert_eq!(rows[1].variant, ItaVariant::Arctan);

        let no_masks = BatchOptions {
            method: MethodChoice::Dlhss,
            mask_dir: None,
            ..rp
        };
        assert!(matches!(
            run_batch(&entries, &no_masks),
            Err(Error::MissingMaskDir)
        ));
    }

    #[test]
    fn empty_directory_gives_no_rows() {
        let dir = tempfile::tempdir().unwrap();
        let entries = list_images(dir.path()).unwrap();
        let opts = BatchOptions {
            method: MethodChoice::Ght,
            config: EstimatorConfig::default(),
            mask_dir: None,
            lesion_dir: None,
        };
        assert!(run_batch(&entries, &opts).unwrap().is_empty());
    }

    #[test]
    fn method_names() {
        for m in MethodChoice::ALL {
            assert_eq!(m.as_str().parse::<MethodChoice>(), Ok(m));
        }
        assert!("rp3".parse::<MethodChoice>().is_err());
    }
}
