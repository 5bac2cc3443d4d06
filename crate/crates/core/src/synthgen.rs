//! Synthetic dermoscopy-like images with an analytically known skin tone.
//!
//! Rendering order: uniform skin, centred lesion disc, random-walk hair,
//! per-pixel Gaussian noise in sRGB units, then global channel gains.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::colorspace::{cielab_to_srgb, ItaVariant, LabColor, RgbColor, SkinTypeThresholds};
use crate::estimators::{Interval, ItaResult, Method, Status};
use crate::imaging::{Image, PixelMask};
use crate::{Error, Result};

pub const HAIR_COLOR: RgbColor = RgbColor::new(30, 25, 20);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub skin_lab: LabColor,
    pub lesion_lab: LabColor,
    /// Lesion radius as a fraction of the shorter image side.
    pub lesion_radius_frac: f64,
    pub hair_count: usize,
    pub hair_width: usize,
    /// Standard deviation of per-channel noise, in 0..255 units.
    pub noise_sigma: f64,
    pub channel_gains: [f64; 3],
    pub width: usize,
    pub height: usize,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Clean square image: no lesion, hair, noise or gain.
    pub fn clean(skin_lab: LabColor, side: usize, seed: u64) -> Self {
        Self {
            skin_lab,
            lesion_lab: LabColor::new(35.0, 15.0, 20.0),
            lesion_radius_frac: 0.0,
            hair_count: 0,
            hair_width: 2,
            noise_sigma: 0.0,
            channel_gains: [1.0; 3],
            width: side,
            height: side,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidSyntheticSpec(
                "image dimensions must be positive",
            ));
        }
        if !(0.0..1.0).contains(&self.lesion_radius_frac) {
            return Err(Error::InvalidSyntheticSpec(
                "lesion radius fraction must lie in [0, 1)",
            ));
        }
        if self.hair_count > 0 && self.hair_width == 0 {
            return Err(Error::InvalidSyntheticSpec("hair width must be positive"));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidSyntheticSpec(
                "noise sigma must be finite and >= 0",
            ));
        }
        if self
            .channel_gains
            .iter()
            .any(|g| !(*g > 0.0 && g.is_finite()))
        {
            return Err(Error::InvalidSyntheticSpec(
                "channel gains must be finite and > 0",
            ));
        }
        Ok(())
    }

    /// ITA of `skin_lab` (Arctan2), independent of seed and artefacts.
    pub fn ground_truth_ita(&self) -> f64 {
        crate::colorspace::ita_degrees(self.skin_lab.l, self.skin_lab.b, ItaVariant::Arctan2)
            .expect("Arctan2 is defined for every b")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSample {
    pub image: Image,
    pub ground_truth: ItaResult,
    pub lesion_mask: PixelMask,
    /// Complement of `lesion_mask`; hair is tracked separately.
    pub skin_mask: PixelMask,
    pub hair_mask: PixelMask,
}

pub fn generate_synthetic(
    spec: &SyntheticSpec,
    image_id: impl Into<String>,
) -> Result<SyntheticSample> {
    spec.validate()?;
    let skin = cielab_to_srgb(spec.skin_lab)?;
    let lesion = cielab_to_srgb(spec.lesion_lab)?;
    let (w, h) = (spec.width, spec.height);

    let radius = spec.lesion_radius_frac * w.min(h) as f64;
    let (cx, cy) = (w as f64 / 2.0, h as f64 / 2.0);
    let lesion_mask = PixelMask::from_fn(w, h, |x, y| {
        let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
        dx * dx + dy * dy < radius * radius
    })?;
    let skin_mask = lesion_mask.invert();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let hair_mask = draw_hair(spec, &mut rng)?;

    let mut image = Image::from_fn(w, h, |x, y| {
        if hair_mask.get(x, y) {
            HAIR_COLOR
        } else if lesion_mask.get(x, y) {
            lesion
        } else {
            skin
        }
    })?;

    if spec.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, spec.noise_sigma)
            .map_err(|_| Error::InvalidSyntheticSpec("noise sigma must be finite and >= 0"))?;
        for px in image.pixels_mut() {
            let c = px.channels().map(|v| f64::from(v) + noise.sample(&mut rng));
            *px = quantize(c);
        }
    }
    if spec.channel_gains != [1.0; 3] {
        let g = spec.channel_gains;
        for px in image.pixels_mut() {
            let [r, gg, b] = px.channels().map(f64::from);
            *px = quantize([r * g[0], gg * g[1], b * g[2]]);
        }
    }

    let ita = spec.ground_truth_ita();
    let ground_truth = ItaResult {
        image_id: image_id.into(),
        method: Method::GroundTruth,
        variant: ItaVariant::Arctan2,
        ita_deg: Some(ita),
        skin_type: Some(SkinTypeThresholds::default().bin(ita)),
        status: Status::Ok,
        pixel_count: skin_mask.count(),
    };
    Ok(SyntheticSample {
        image,
        ground_truth,
        lesion_mask,
        skin_mask,
        hair_mask,
    })
}

fn quantize(c: [f64; 3]) -> RgbColor {
    let q = c.map(|v| libm::round(v).clamp(0.0, 255.0) as u8);
    RgbColor::new(q[0], q[1], q[2])
}

const HAIR_TURN_SIGMA: f64 = 0.12;

/// Each stroke starts at a uniform point with a uniform heading and walks in
/// unit steps for 30-80% of the longer side, stamping a square brush.
fn draw_hair(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<PixelMask> {
    let (w, h) = (spec.width, spec.height);
    let mut mask = PixelMask::filled(w, h, false)?;
    if spec.hair_count == 0 {
        return Ok(mask);
    }
    let turn = Normal::new(0.0, HAIR_TURN_SIGMA).expect("constant sigma is valid");
    let long_side = w.max(h) as f64;
    let half = spec.hair_width as isize / 2;
    for _ in 0..spec.hair_count {
        let mut x = rng.random_range(0.0..w as f64);
        let mut y = rng.random_range(0.0..h as f64);
        let mut heading = rng.random_range(0.0..core::f64::consts::TAU);
        let steps = (long_side * rng.random_range(0.3..0.8)) as usize;
        for _ in 0..steps {
            let (px, py) = (libm::floor(x) as isize, libm::floor(y) as isize);
            for dy in -half..spec.hair_width as isize - half {
                for dx in -half..spec.hair_width as isize - half {
                    let (sx, sy) = (px + dx, py + dy);
                    if (0..w as isize).contains(&sx) && (0..h as isize).contains(&sy) {
                        mask.set(sx as usize, sy as usize, true);
                    }
                }
            }
            heading += turn.sample(rng);
            x += libm::cos(heading);
            y += libm::sin(heading);
        }
    }
    Ok(mask)
}

/// Ranges from which a corpus of synthetic specs is drawn. Degenerate
/// intervals (`lo == hi`) fix a parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorpusSpec {
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub seed: u64,
    pub skin_l: Interval,
    pub skin_a: Interval,
    pub skin_b: Interval,
    pub lesion_lab: LabColor,
    pub lesion_radius_frac: Interval,
    pub hair_count: (usize, usize),
    pub hair_width: usize,
    pub noise_sigma: Interval,
    pub channel_gains: [Interval; 3],
    /// Skin colours whose ITA lies within this many degrees of a type
    /// cutoff are redrawn; 0 disables the check.
    pub cutoff_margin: f64,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        Self {
            count: 10,
            width: 200,
            height: 200,
            seed: 0,
            skin_l: Interval::new(55.0, 75.0),
            skin_a: Interval::new(5.0, 15.0),
            skin_b: Interval::new(12.0, 24.0),
            lesion_lab: LabColor::new(35.0, 15.0, 20.0),
            lesion_radius_frac: Interval::new(0.0, 0.25),
            hair_count: (0, 0),
            hair_width: 2,
            noise_sigma: Interval::new(0.0, 0.0),
            channel_gains: [Interval::new(1.0, 1.0); 3],
            cutoff_margin: 1.0,
        }
    }
}

const MAX_DRAWS: usize = 10_000;

fn draw(rng: &mut ChaCha8Rng, range: Interval) -> f64 {
    if range.lo < range.hi {
        rng.random_range(range.lo..range.hi)
    } else {
        range.lo
    }
}

impl CorpusSpec {
    /// Image ids `synth_0000`, `synth_0001`, ...
    pub fn image_id(&self, index: usize) -> String {
        format!("synth_{index:04}")
    }

    /// Draws `count` specs deterministically from `seed`.
    pub fn sample(&self) -> Result<Vec<SyntheticSpec>> {
        let ranges = [
            self.skin_l,
            self.skin_a,
            self.skin_b,
            self.lesion_radius_frac,
            self.noise_sigma,
            self.channel_gains[0],
            self.channel_gains[1],
            self.channel_gains[2],
        ];
        if ranges
            .iter()
            .any(|r| !(r.lo.is_finite() && r.hi.is_finite() && r.lo <= r.hi))
        {
            return Err(Error::InvalidSyntheticSpec(
                "ranges must be finite with lo <= hi",
            ));
        }
        if self.hair_count.0 > self.hair_count.1 {
            return Err(Error::InvalidSyntheticSpec(
                "hair count range must have lo <= hi",
            ));
        }
        let cutoffs = *SkinTypeThresholds::default().cutoffs();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut specs = Vec::with_capacity(self.count);
        for _ in 0..self.count {
            let skin_lab = (0..MAX_DRAWS)
                .map(|_| {
                    LabColor::new(
                        draw(&mut rng, self.skin_l),
                        draw(&mut rng, self.skin_a),
                        draw(&mut rng, self.skin_b),
                    )
                })
                .find(|lab| {
                    let ita = crate::colorspace::ita_degrees(lab.l, lab.b, ItaVariant::Arctan2)
                        .unwrap_or(f64::NAN);
                    cielab_to_srgb(*lab).is_ok()
                        && cutoffs
                            .iter()
                            .all(|c| libm::fabs(ita - c) >= self.cutoff_margin)
                })
                .ok_or(Error::InvalidSyntheticSpec(
                    "no in-gamut skin colour away from the type cutoffs in the given ranges",
                ))?;
            let spec = SyntheticSpec {
                skin_lab,
                lesion_lab: self.lesion_lab,
                lesion_radius_frac: draw(&mut rng, self.lesion_radius_frac),
                hair_count: rng.random_range(self.hair_count.0..=self.hair_count.1),
                hair_width: self.hair_width,
                noise_sigma: draw(&mut rng, self.noise_sigma),
                channel_gains: self.channel_gains.map(|g| draw(&mut rng, g)),
                width: self.width,
                height: self.height,
                seed: rng.random(),
            };
            spec.validate()?;
            cielab_to_srgb(spec.lesion_lab)?;
            specs.push(spec);
        }
        Ok(specs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_spec_is_uniform_with_known_truth() {
        let spec = SyntheticSpec::clean(LabColor::new(65.0, 10.0, 15.0), 64, 1);
        let s = generate_synthetic(&spec, "img").unwrap();
        let first = s.image.pixels()[0];
        assert!(s.image.pixels().iter().all(|&p| p == first));
        assert!((s.ground_truth.ita_deg.unwrap() - 45.0).abs() < 1e-9);
        assert_eq!(s.ground_truth.method, Method::GroundTruth);
        assert_eq!(s.skin_mask.count(), 64 * 64);
        assert_eq!(s.lesion_mask.count(), 0);
    }

    #[test]
    fn deterministic_per_seed() {
        let mut spec = SyntheticSpec::clean(LabColor::new(60.0, 8.0, 18.0), 80, 42);
        spec.hair_count = 5;
        spec.noise_sigma = 4.0;
        spec.lesion_radius_frac = 0.2;
        spec.channel_gains = [1.1, 1.0, 0.9];
        let a = generate_synthetic(&spec, "a").unwrap();
        let b = generate_synthetic(&spec, "a").unwrap();
        assert_eq!(a, b);
        spec.seed = 43;
        let c = generate_synthetic(&spec, "a").unwrap();
        assert_ne!(a.image, c.image);
        assert_eq!(a.ground_truth, c.ground_truth);
    }

    #[test]
    fn out_of_gamut_rejected() {
        let spec = SyntheticSpec::clean(LabColor::new(60.0, 0.0, -200.0), 16, 0);
        assert!(matches!(
            generate_synthetic(&spec, "x"),
            Err(Error::OutOfGamut { .. })
        ));
    }

    #[test]
    fn masks_partition_image() {
        let mut spec = SyntheticSpec::clean(LabColor::new(65.0, 10.0, 15.0), 50, 3);
        spec.lesion_radius_frac = 0.25;
        spec.hair_count = 3;
        let s = generate_synthetic(&spec, "p").unwrap();
        for (l, k) in s.lesion_mask.bits().iter().zip(s.skin_mask.bits()) {
            assert!(l ^ k);
        }
        assert!(s.lesion_mask.count() > 0);
        assert!(s.hair_mask.count() > 0);
        let hair = s
            .image
            .pixels()
            .iter()
            .filter(|&&p| p == HAIR_COLOR)
            .count();
        assert_eq!(hair, s.hair_mask.count());
    }

    #[test]
    fn corpus_sampling() {
        let corpus = CorpusSpec {
            count: 40,
            seed: 11,
            ..CorpusSpec::default()
        };
        let a = corpus.sample().unwrap();
        assert_eq!(a, corpus.sample().unwrap());
        assert_eq!(a.len(), 40);
        let cutoffs = SkinTypeThresholds::DEFAULT_CUTOFFS;
        for s in &a {
            let ita = s.ground_truth_ita();
            assert!(cutoffs.iter().all(|c| (ita - c).abs() >= 1.0));
            assert!((0.0..0.25).contains(&s.lesion_radius_frac));
        }
        let impossible = CorpusSpec {
            skin_l: Interval::new(5.0, 5.0),
            skin_a: Interval::new(0.0, 0.0),
            skin_b: Interval::new(-120.0, -120.0),
            ..corpus
        };
        assert!(impossible.sample().is_err());
    }

    #[test]
    fn invalid_specs() {
        let base = SyntheticSpec::clean(LabColor::new(65.0, 10.0, 15.0), 16, 0);
        for bad in [
            SyntheticSpec { width: 0, ..base },
            SyntheticSpec {
                lesion_radius_frac: 1.0,
                ..base
            },
            SyntheticSpec {
                noise_sigma: -1.0,
                ..base
            },
            SyntheticSpec {
                channel_gains: [1.0, 0.0, 1.0],
                ..base
            },
            SyntheticSpec {
                hair_count: 1,
                hair_width: 0,
                ..base
            },
        ] {
            assert!(matches!(
                generate_synthetic(&bad, "x"),
                Err(Error::InvalidSyntheticSpec(_))
            ));
        }
    }
}
