use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use skintone_core::thresholding::{ght_threshold, otsu_threshold, GhtParams, Histogram256, LEVELS};

/// Two Gaussian modes with random centres, spreads and masses.
fn random_bimodal(rng: &mut ChaCha8Rng) -> Histogram256 {
    let mut counts = [0u64; LEVELS];
    for _ in 0..2 {
        let centre = rng.random_range(20.0..235.0);
        let spread = rng.random_range(3.0..25.0);
        let n = rng.random_range(200..5000);
        let dist = Normal::new(centre, spread).unwrap();
        for _ in 0..n {
            let v: f64 = dist.sample(rng);
            counts[v.round().clamp(0.0, 255.0) as usize] += 1;
        }
    }
    Histogram256::from_counts(counts).unwrap()
}

fn suite() -> Vec<Histogram256> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    (0..100).map(|_| random_bimodal(&mut rng)).collect()
}

/// Exhaustive between-class variance, compared as exact fractions.
fn otsu_oracle(h: &Histogram256) -> u8 {
    let c = h.counts();
    let n: i128 = c.iter().map(|&v| v as i128).sum();
    let s: i128 = c
        .iter()
        .enumerate()
        .map(|(i, &v)| i as i128 * v as i128)
        .sum();
    let mut best: Option<(usize, i128, i128)> = None;
    for t in 0..LEVELS - 1 {
        let w0: i128 = c[..=t].iter().map(|&v| v as i128).sum();
        let s0: i128 = c[..=t]
            .iter()
            .enumerate()
            .map(|(i, &v)| i as i128 * v as i128)
            .sum();
        let w1 = n - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        // w0 w1 (mu0 - mu1)^2 = (n s0 - w0 s)^2 / (n^2 w0 w1)
        let num = (n * s0 - w0 * s).pow(2);
        let den = w0 * w1;
        match best {
            Some((_, bn, bd)) if num * bd <= bn * den => {}
            _ => best = Some((t, num, den)),
        }
    }
    best.unwrap().0 as u8
}

/// Direct per-threshold evaluation of the GHT objective with two-pass
/// class statistics.
fn ght_oracle(h: &Histogram256, p: &GhtParams) -> u8 {
    let c = h.counts();
    let n: f64 = c.iter().map(|&v| v as f64).sum();
    let class_term = |range: std::ops::Range<usize>, mode: f64| -> Option<f64> {
        let w: f64 = range.clone().map(|i| c[i] as f64).sum();
        if w == 0.0 {
            return None;
        }
        let mu = range.clone().map(|i| c[i] as f64 * i as f64).sum::<f64>() / w;
        let d: f64 = range.map(|i| c[i] as f64 * (i as f64 - mu).powi(2)).sum();
        let pi = w / n;
        let v = ((pi * p.nu * p.tau * p.tau + d) / (pi * p.nu + w)).max(1e-30);
        Some(-d / v - w * v.ln() + 2.0 * (w + p.kappa * mode) * w.ln())
    };
    let mut best: Option<(usize, f64)> = None;
    for t in 0..LEVELS - 1 {
        let (Some(a), Some(b)) = (
            class_term(0..t + 1, p.omega),
            class_term(t + 1..LEVELS, 1.0 - p.omega),
        ) else {
            continue;
        };
        if best.is_none_or(|(_, s)| a + b > s) {
            best = Some((t, a + b));
        }
    }
    best.unwrap().0 as u8
}

#[test]
fn otsu_matches_exhaustive_oracle() {
    for (i, h) in suite().iter().enumerate() {
        assert_eq!(otsu_threshold(h).unwrap(), otsu_oracle(h), "histogram {i}");
    }
}

#[test]
fn ght_matches_objective_oracle() {
    let params = [
        GhtParams::default(),
        GhtParams::new(0.0, 1.0, 0.0, 0.5).unwrap(),
        GhtParams::new(50.0, 10.0, 2.0, 0.3).unwrap(),
        GhtParams::new(1e4, 2.0, 100.0, 0.9).unwrap(),
    ];
    for p in &params {
        for (i, h) in suite().iter().enumerate() {
            assert_eq!(
                ght_threshold(h, p).unwrap(),
                ght_oracle(h, p),
                "histogram {i}, {p:?}"
            );
        }
    }
}

/// With nu = 1e12 each class variance collapses to tau^2 only while
/// `p * nu * tau^2` dwarfs the class scatter, and the residual `2 w ln w`
/// term is negligible only while `1 / tau^2` is large. tau = 0.1 sits
/// inside both bounds for these histograms.
#[test]
fn ght_large_nu_matches_otsu() {
    let p = GhtParams::new(1e12, 0.1, 0.0, 0.5).unwrap();
    for (i, h) in suite().iter().enumerate() {
        assert_eq!(
            ght_threshold(h, &p).unwrap(),
            otsu_threshold(h).unwrap(),
            "histogram {i}"
        );
    }
}

#[test]
fn thresholds_leave_both_classes_populated() {
    for h in suite() {
        let (lo, hi) = h.populated_range();
        for t in [
            otsu_threshold(&h).unwrap(),
            ght_threshold(&h, &GhtParams::default()).unwrap(),
        ] {
            assert!(lo <= t && t < hi);
        }
    }
}
