use std::collections::BTreeMap;

use proptest::prelude::*;
use skintone_core::analysis::{
    agreement_matrix, classification_metrics, fairness_by_type, LesionClass, PredictionRecord,
};
use skintone_core::colorspace::{
    bin_skin_type, cielab_to_srgb, ita_degrees, srgb_to_cielab, ItaVariant, LabColor, RgbColor,
    SkinTypeThresholds,
};
use skintone_core::estimators::{
    estimate_colorseg, estimate_dlhss, estimate_ght, estimate_random_patch, EstimatorConfig,
    ItaResult, Method, Status,
};
use skintone_core::imaging::{
    blackhat_hair_mask, grey_world_balance, standardize_geometry, Image, PixelMask,
};
use skintone_core::splits::{datashift_split, stratified_split, LabeledImage, SplitRatios, Subset};
use skintone_core::synthgen::{generate_synthetic, SyntheticSpec};
use skintone_core::thresholding::{ght_threshold, otsu_threshold, GhtParams, Histogram256, LEVELS};
use skintone_core::Error;

fn rgb() -> impl Strategy<Value = RgbColor> {
    any::<[u8; 3]>().prop_map(|[r, g, b]| RgbColor::new(r, g, b))
}

fn image(max_side: usize, lo: u8, hi: u8) -> impl Strategy<Value = Image> {
    (4..=max_side, 4..=max_side).prop_flat_map(move |(w, h)| {
        prop::collection::vec(prop::array::uniform3(lo..=hi), w * h).prop_map(move |px| {
            let px = px
                .into_iter()
                .map(|[r, g, b]| RgbColor::new(r, g, b))
                .collect();
            Image::new(w, h, px).unwrap()
        })
    })
}

fn lesion_class() -> impl Strategy<Value = LesionClass> {
    prop::sample::select(LesionClass::ALL.to_vec())
}

fn predictions(max: usize) -> impl Strategy<Value = Vec<PredictionRecord>> {
    prop::collection::vec((lesion_class(), lesion_class()), 1..max).prop_map(|pairs| {
        pairs
            .into_iter()
            .enumerate()
            .map(|(i, (t, p))| PredictionRecord::new(format!("i{i}"), t, p))
            .collect()
    })
}

fn tone(id: &str, method: Method, ita: f64) -> ItaResult {
    ItaResult {
        image_id: id.into(),
        method,
        variant: ItaVariant::Arctan2,
        ita_deg: Some(ita),
        skin_type: Some(SkinTypeThresholds::default().bin(ita)),
        status: Status::Ok,
        pixel_count: 1,
    }
}

// colour science

proptest! {
    #[test]
    fn arctan_variants_agree_for_positive_b(l in 0.0f64..100.0, b in 1e-9f64..130.0) {
        prop_assert_eq!(
            ita_degrees(l, b, ItaVariant::Arctan).unwrap(),
            ita_degrees(l, b, ItaVariant::Arctan2).unwrap()
        );
    }

    #[test]
    fn ita_is_zero_at_mid_lightness(b in -130.0f64..130.0, variant in prop::sample::select(vec![ItaVariant::Arctan, ItaVariant::Arctan2])) {
        prop_assume!(b != 0.0);
        prop_assert_eq!(ita_degrees(50.0, b, variant).unwrap(), 0.0);
    }

    #[test]
    fn binning_is_monotone(a in -180.0f64..180.0, d in 0.0f64..180.0) {
        let t = SkinTypeThresholds::default();
        prop_assert!(bin_skin_type(a + d, &t).get() <= bin_skin_type(a, &t).get());
    }

    #[test]
    fn lab_round_trip(c in rgb()) {
        let back = cielab_to_srgb(srgb_to_cielab(c)).unwrap();
        for (x, y) in c.channels().into_iter().zip(back.channels()) {
            prop_assert!(x.abs_diff(y) <= 1);
        }
    }
}

// thresholding

fn histogram() -> impl Strategy<Value = Histogram256> {
    prop::collection::vec((0usize..LEVELS, 1u64..500), 2..12).prop_filter_map(
        "two levels",
        |pairs| {
            let mut counts = [0u64; LEVELS];
            for (level, n) in pairs {
                counts[level] += n;
            }
            Histogram256::from_counts(counts)
                .ok()
                .filter(|h| h.populated_levels() >= 2)
        },
    )
}

proptest! {
    #[test]
    fn thresholds_invariant_to_count_scaling(h in histogram(), k in 2u64..6) {
        let scaled = Histogram256::from_counts(h.counts().map(|c| c * k)).unwrap();
        prop_assert_eq!(otsu_threshold(&h), otsu_threshold(&scaled));
        // exact scale invariance of GHT holds without a variance prior
        let met = GhtParams::new(0.0, 1.0, 0.0, 0.5).unwrap();
        prop_assert_eq!(ght_threshold(&h, &met), ght_threshold(&scaled, &met));
    }

    #[test]
    fn otsu_within_populated_range(h in histogram()) {
        let (lo, hi) = h.populated_range();
        let t = otsu_threshold(&h).unwrap();
        prop_assert!(lo <= t && t < hi);
        prop_assert_eq!(otsu_threshold(&h), otsu_threshold(&h.clone()));
    }
}

// imaging

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn standardized_image_is_square(img in image(90, 0, 255), side in 40usize..120) {
        prop_assume!(img.width() >= 1);
        let out = standardize_geometry(&img, side).unwrap();
        prop_assert_eq!((out.width(), out.height()), (side, side));
    }

    #[test]
    fn grey_world_idempotent_without_clamping(img in image(24, 40, 215)) {
        let once = grey_world_balance(&img).unwrap();
        let clamped = once.pixels().iter().any(|p| p.channels().iter().any(|&v| v == 0 || v == 255));
        prop_assume!(!clamped);
        let twice = grey_world_balance(&once).unwrap();
        for (a, b) in once.pixels().iter().zip(twice.pixels()) {
            for (x, y) in a.channels().into_iter().zip(b.channels()) {
                prop_assert!(x.abs_diff(y) <= 1, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn hair_mask_offset_invariant(img in image(40, 0, 200), offset in 0u8..=55) {
        let shifted = Image::from_fn(img.width(), img.height(), |x, y| {
            let [r, g, b] = img.get(x, y).channels().map(|v| v + offset);
            RgbColor::new(r, g, b)
        }).unwrap();
        prop_assert_eq!(
            blackhat_hair_mask(&img, 7, 10).unwrap(),
            blackhat_hair_mask(&shifted, 7, 10).unwrap()
        );
    }
}

// estimators

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn uniform_images_agree_across_methods(c in rgb(), w in 40usize..80, h in 40usize..80) {
        let lab = srgb_to_cielab(c);
        prop_assume!(lab.b > 0.5);
        let img = Image::filled(w, h, c).unwrap();
        let cfg = EstimatorConfig::default();
        let dl = estimate_dlhss(&img, &PixelMask::filled(w, h, true).unwrap(), &cfg).unwrap();
        let rp = estimate_random_patch(&img, ItaVariant::Arctan, &cfg, None).unwrap();
        let rp2 = estimate_random_patch(&img, ItaVariant::Arctan2, &cfg, None).unwrap();
        for e in [&rp, &rp2] {
            prop_assert!((e.ita_deg - dl.ita_deg).abs() < 0.5);
            prop_assert_eq!(e.skin_type, dl.skin_type);
        }
        match estimate_colorseg(&img, &cfg) {
            Ok(cs) => {
                prop_assert!((cs.ita_deg - dl.ita_deg).abs() < 0.5);
                prop_assert_eq!(cs.skin_type, dl.skin_type);
            }
            Err(e) => prop_assert_eq!(e, Error::NoSkinDetected),
        }
        let ght = estimate_ght(&img, &cfg).unwrap_err();
        prop_assert_eq!(Status::from_error(&ght), Status::Degenerate);
    }

    #[test]
    fn rp2_never_below_rp_on_light_images(img in image(48, 120, 255)) {
        let cfg = EstimatorConfig::default();
        let rp = estimate_random_patch(&img, ItaVariant::Arctan, &cfg, None);
        let rp2 = estimate_random_patch(&img, ItaVariant::Arctan2, &cfg, None).unwrap();
        if let Ok(rp) = rp {
            prop_assert!(rp2.ita_deg >= rp.ita_deg);
        }
        prop_assert_eq!(rp2.skin_type, cfg.thresholds.bin(rp2.ita_deg));
    }

    #[test]
    fn dlhss_invariant_to_pixel_order(img in image(30, 0, 255), seed in any::<u64>()) {
        let n = img.width() * img.height();
        let mask_bits: Vec<bool> = (0..n).map(|i| !(i as u64).wrapping_mul(seed | 1).is_multiple_of(3)).collect();
        prop_assume!(mask_bits.iter().any(|&b| b));
        let mask = PixelMask::new(img.width(), img.height(), mask_bits.clone()).unwrap();
        // reverse the pixel order together with the mask
        let rev_px: Vec<RgbColor> = img.pixels().iter().rev().copied().collect();
        let rev_img = Image::new(img.width(), img.height(), rev_px).unwrap();
        let rev_mask = PixelMask::new(img.width(), img.height(), mask_bits.into_iter().rev().collect()).unwrap();
        let cfg = EstimatorConfig::default();
        let a = estimate_dlhss(&img, &mask, &cfg);
        let b = estimate_dlhss(&rev_img, &rev_mask, &cfg);
        prop_assert_eq!(a.clone(), b);
        if let Ok(e) = a {
            prop_assert_eq!(e.skin_type, cfg.thresholds.bin(e.ita_deg));
        }
    }
}

// analysis

proptest! {
    #[test]
    fn weighted_recall_is_accuracy(preds in predictions(200)) {
        let m = classification_metrics(&preds).unwrap();
        prop_assert!((m.weighted_recall - m.accuracy).abs() < 1e-12);
    }

    #[test]
    fn balanced_accuracy_invariant_to_class_duplication(preds in predictions(100), k in 2usize..5, class in lesion_class()) {
        let mut dup = preds.clone();
        for p in preds.iter().filter(|p| p.true_label == class) {
            for j in 1..k {
                dup.push(PredictionRecord::new(format!("{}-{j}", p.image_id), p.true_label, p.pred_label));
            }
        }
        let a = classification_metrics(&preds).unwrap().balanced_accuracy;
        let b = classification_metrics(&dup).unwrap().balanced_accuracy;
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn agreement_transposes_and_counts_joins(
        a in prop::collection::vec(prop::option::of(-90.0f64..90.0), 1..60),
        b in prop::collection::vec(prop::option::of(-90.0f64..90.0), 1..60),
    ) {
        let rows = |v: &[Option<f64>], m: Method| -> Vec<ItaResult> {
            v.iter().enumerate().map(|(i, ita)| match ita {
                Some(x) => tone(&format!("img{i}"), m, *x),
                None => ItaResult::failed(format!("img{i}"), m, ItaVariant::Arctan2, Status::NoSkinDetected),
            }).collect()
        };
        let (ra, rb) = (rows(&a, Method::Dlhss), rows(&b, Method::Ght));
        let ab = agreement_matrix(&ra, &rb, 28.0);
        let ba = agreement_matrix(&rb, &ra, 28.0);
        prop_assert_eq!(ab.transpose(), ba);
        let joined = a.iter().zip(&b).filter(|(x, y)| x.is_some() && y.is_some()).count();
        prop_assert_eq!(ab.total(), joined);
        prop_assert_eq!(ab.total() + ab.excluded, a.len().max(b.len()));
    }

    #[test]
    fn group_ba_between_extreme_recalls(preds in predictions(150), itas in prop::collection::vec(-60.0f64..80.0, 150)) {
        let tones: Vec<ItaResult> = preds.iter().zip(&itas).map(|(p, &x)| tone(&p.image_id, Method::Dlhss, x)).collect();
        let report = fairness_by_type(&preds, &tones).unwrap();
        for g in report.groups.values() {
            let recalls: Vec<f64> = g.metrics.present_recalls().collect();
            let lo = recalls.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = recalls.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo - 1e-12 <= g.metrics.balanced_accuracy && g.metrics.balanced_accuracy <= hi + 1e-12);
        }
    }
}

// splits

fn labeled(max: usize) -> impl Strategy<Value = Vec<LabeledImage>> {
    prop::collection::vec(lesion_class(), 1..max).prop_map(|labels| {
        labels
            .into_iter()
            .enumerate()
            .map(|(i, l)| LabeledImage::new(format!("id{i:05}"), l))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stratified_counts_within_one(records in labeled(400), seed in any::<u64>()) {
        let ratios = SplitRatios::BASELINE;
        let split = stratified_split(&records, ratios, seed).unwrap();
        prop_assert_eq!(split.assignments.len(), records.len());
        prop_assert!(records.iter().all(|r| split.get(&r.image_id).is_some()));
        for class in LesionClass::ALL {
            let ids: Vec<&str> = records.iter().filter(|r| r.label == class).map(|r| r.image_id.as_str()).collect();
            let n = ids.len() as f64;
            for (subset, ratio) in [(Subset::Train, ratios.train), (Subset::Val, ratios.val), (Subset::Test, ratios.test)] {
                let got = ids.iter().filter(|id| split.get(id) == Some(subset)).count() as f64;
                prop_assert!((got - n * ratio).abs() < 1.0 + 1e-9);
            }
        }
        prop_assert_eq!(&split, &stratified_split(&records, ratios, seed).unwrap());
    }

    #[test]
    fn datashift_test_is_dark_only(records in labeled(200), itas in prop::collection::vec(-40.0f64..80.0, 200), seed in any::<u64>()) {
        let tones: Vec<ItaResult> = records.iter().zip(&itas).map(|(r, &x)| tone(&r.image_id, Method::Dlhss, x)).collect();
        let ita_of: BTreeMap<&str, f64> = records.iter().zip(&itas).map(|(r, &x)| (r.image_id.as_str(), x)).collect();
        match datashift_split(&tones, &records, seed, 41.0) {
            Ok(split) => {
                prop_assert_eq!(split.assignments.len(), records.len());
                for (id, subset) in &split.assignments {
                    prop_assert_eq!(*subset == Subset::Test, ita_of[id.as_str()] <= 41.0);
                }
            }
            Err(e) => prop_assert!(matches!(e, Error::EmptyTestSet | Error::EmptyTrainSet)),
        }
    }
}

// synthetic generator

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn synthetic_truth_ignores_seed_and_masks_partition(
        l in 50.0f64..75.0, a in 0.0f64..15.0, b in 5.0f64..25.0,
        seed_a in any::<u64>(), seed_b in any::<u64>(),
        radius in 0.0f64..0.45, hairs in 0usize..6, noise in 0.0f64..8.0,
    ) {
        let mut spec = SyntheticSpec::clean(LabColor::new(l, a, b), 60, seed_a);
        spec.lesion_radius_frac = radius;
        spec.hair_count = hairs;
        spec.noise_sigma = noise;
        let x = generate_synthetic(&spec, "s").unwrap();
        let y = generate_synthetic(&SyntheticSpec { seed: seed_b, ..spec }, "s").unwrap();
        prop_assert_eq!(&x.ground_truth, &y.ground_truth);
        for (les, skin) in x.lesion_mask.bits().iter().zip(x.skin_mask.bits()) {
            prop_assert!(les ^ skin);
        }
    }
}
