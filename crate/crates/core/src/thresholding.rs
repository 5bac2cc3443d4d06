//! Global histogram thresholds over 8-bit grey levels.
//!
//! Every threshold `t` splits the histogram into a dark class `{<= t}` and a
//! bright class `{> t}`. Only splits that leave both classes non-empty are
//! candidates, and ties go to the smallest `t`.

use crate::{Error, Result};

pub const LEVELS: usize = 256;

/// Counts of pixels per grey level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram256 {
    counts: [u64; LEVELS],
}

impl Histogram256 {
    pub fn from_counts(counts: [u64; LEVELS]) -> Result<Self> {
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::EmptyHistogram);
        }
        Ok(Self { counts })
    }

    pub fn from_levels<I: IntoIterator<Item = u8>>(levels: I) -> Result<Self> {
        let mut counts = [0u64; LEVELS];
        for level in levels {
            counts[level as usize] += 1;
        }
        Self::from_counts(counts)
    }

    pub fn counts(&self) -> &[u64; LEVELS] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn populated_levels(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Lowest and highest populated grey level.
    pub fn populated_range(&self) -> (u8, u8) {
        let lo = self.counts.iter().position(|&c| c > 0).unwrap_or(0);
        let hi = self.counts.iter().rposition(|&c| c > 0).unwrap_or(0);
        (lo as u8, hi as u8)
    }

    fn ensure_bimodal_candidate(&self) -> Result<()> {
        if self.populated_levels() < 2 {
            Err(Error::DegenerateHistogram)
        } else {
            Ok(())
        }
    }
}

/// Otsu's threshold: the split maximizing between-class variance.
///
/// The score `(N * S0 - W0 * S)^2 / (W0 * W1)` is proportional to the
/// between-class variance, where `W0`/`S0` are the count and level sum of
/// the dark class and `N`/`S` their totals.
pub fn otsu_threshold(hist: &Histogram256) -> Result<u8> {
    hist.ensure_bimodal_candidate()?;
    let total = hist.total() as i128;
    let sum: i128 = hist
        .counts
        .iter()
        .enumerate()
        .map(|(level, &c)| level as i128 * c as i128)
        .sum();

    let mut best: Option<(u8, f64)> = None;
    let (mut w0, mut s0) = (0i128, 0i128);
    for t in 0..LEVELS - 1 {
        w0 += hist.counts[t] as i128;
        s0 += t as i128 * hist.counts[t] as i128;
        let w1 = total - w0;
        if w0 == 0 || w1 == 0 {
            continue;
        }
        let spread = (total * s0 - w0 * sum) as f64;
        let score = spread * spread / (w0 as f64 * w1 as f64);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t as u8, score));
        }
    }
    best.map(|(t, _)| t).ok_or(Error::DegenerateHistogram)
}

/// Hyperparameters of generalized histogram thresholding.
///
/// `nu` and `tau` form a scaled inverse chi-squared prior on each class
/// variance (strength and scale), `kappa` and `omega` a beta prior on the
/// mixing weight (concentration and mode).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhtParams {
    pub nu: f64,
    pub tau: f64,
    pub kappa: f64,
    pub omega: f64,
}

impl GhtParams {
    pub fn new(nu: f64, tau: f64, kappa: f64, omega: f64) -> Result<Self> {
        let p = Self {
            nu,
            tau,
            kappa,
            omega,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidGhtParams("nu must be finite and >= 0"));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidGhtParams("tau must be finite and > 0"));
        }
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidGhtParams("kappa must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.omega) {
            return Err(Error::InvalidGhtParams("omega must lie in [0, 1]"));
        }
        Ok(())
    }
}

impl Default for GhtParams {
    /// A strong, narrow variance prior that behaves much like Otsu.
    fn default() -> Self {
        Self {
            nu: 1e10,
            tau: 0.01,
            kappa: 0.0,
            omega: 0.5,
        }
    }
}

const VARIANCE_FLOOR: f64 = 1e-30;

/// Per-class sufficient statistics: pixel count, level sum, squared-level sum.
#[derive(Debug, Clone, Copy, Default)]
struct ClassMoments {
    weight: f64,
    sum: f64,
    sum_sq: f64,
}

impl ClassMoments {
    /// Log-posterior contribution of one class, up to terms shared by all
    /// splits. `total` is the histogram mass, `mode` the mixing-prior mode
    /// assigned to this class.
    fn score(&self, total: f64, params: &GhtParams, mode: f64) -> f64 {
        let w = self.weight;
        let p = w / total;
        let mean = self.sum / w;
        let scatter = self.sum_sq - w * mean * mean;
        let var = ((p * params.nu * params.tau * params.tau + scatter) / (p * params.nu + w))
            .max(VARIANCE_FLOOR);
        -scatter / var - w * libm::log(var) + 2.0 * (w + params.kappa * mode) * libm::log(w)
    }
}

/// Generalized histogram threshold: the split maximizing the MAP score of
/// a two-component Gaussian mixture under conjugate priors.
///
/// Evaluated exhaustively with prefix sums. Large `nu` with `kappa = 0`
/// approaches Otsu's method; `nu = 0` gives minimum-error thresholding.
pub fn ght_threshold(hist: &Histogram256, params: &GhtParams) -> Result<u8> {
    params.validate()?;
    hist.ensure_bimodal_candidate()?;

    let mut prefix = [ClassMoments::default(); LEVELS];
    let mut acc = ClassMoments::default();
    for (level, &count) in hist.counts.iter().enumerate() {
        let (n, x) = (count as f64, level as f64);
        acc.weight += n;
        acc.sum += n * x;
        acc.sum_sq += n * x * x;
        prefix[level] = acc;
    }
    let all = prefix[LEVELS - 1];

    let mut best: Option<(u8, f64)> = None;
    for (t, dark) in prefix.iter().enumerate().take(LEVELS - 1) {
        let bright = ClassMoments {
            weight: all.weight - dark.weight,
            sum: all.sum - dark.sum,
            sum_sq: all.sum_sq - dark.sum_sq,
        };
        if dark.weight == 0.0 || bright.weight == 0.0 {
            continue;
        }
        let score = dark.score(all.weight, params, params.omega)
            + bright.score(all.weight, params, 1.0 - params.omega);
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((t as u8, score));
        }
    }
    best.map(|(t, _)| t).ok_or(Error::DegenerateHistogram)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn impulses(pairs: &[(usize, u64)]) -> Histogram256 {
        let mut counts = [0u64; LEVELS];
        for &(level, n) in pairs {
            counts[level] = n;
        }
        Histogram256::from_counts(counts).unwrap()
    }

    #[test]
    fn otsu_two_impulses_takes_smallest_tie() {
        let h = impulses(&[(50, 100), (200, 100)]);
        assert_eq!(otsu_threshold(&h), Ok(50));
    }

    #[test]
    fn single_level_is_degenerate() {
        let h = impulses(&[(77, 10)]);
        assert_eq!(otsu_threshold(&h), Err(Error::DegenerateHistogram));
        assert_eq!(
            ght_threshold(&h, &GhtParams::default()),
            Err(Error::DegenerateHistogram)
        );
    }

    #[test]
    fn empty_histogram_rejected() {
        assert_eq!(
            Histogram256::from_counts([0; LEVELS]),
            Err(Error::EmptyHistogram)
        );
    }

    #[test]
    fn ght_two_impulses() {
        let h = impulses(&[(50, 100), (200, 100)]);
        assert_eq!(ght_threshold(&h, &GhtParams::default()), Ok(50));
    }

    #[test]
    fn ght_params_validation() {
        assert!(GhtParams::new(-1.0, 0.01, 0.0, 0.5).is_err());
        assert!(GhtParams::new(1.0, 0.0, 0.0, 0.5).is_err());
        assert!(GhtParams::new(1.0, 0.01, -1.0, 0.5).is_err());
        assert!(GhtParams::new(1.0, 0.01, 0.0, 1.5).is_err());
        assert!(GhtParams::new(0.0, 1.0, 3.0, 1.0).is_ok());
    }

    #[test]
    fn adjacent_levels() {
        let h = impulses(&[(0, 3), (1, 5)]);
        assert_eq!(otsu_threshold(&h), Ok(0));
        assert_eq!(ght_threshold(&h, &GhtParams::default()), Ok(0));
    }
}
