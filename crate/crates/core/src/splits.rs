//! Train/validation/test assignment: lesion-stratified baseline splits and
//! the light-train / dark-test data-shift protocol.
//!
//! Class sizes are apportioned by largest remainder; remainder ties go to
//! Train, then Test, then Val. Within a class, ids are sorted and then
//! shuffled with a ChaCha8 generator seeded from the caller's seed, so the
//! result does not depend on input order.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analysis::{LesionClass, NUM_CLASSES};
use crate::estimators::ItaResult;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Subset {
    Train,
    Val,
    Test,
}

impl Subset {
    pub const fn as_str(self) -> &'static str {
        match self {
            Subset::Train => "train",
            Subset::Val => "val",
            Subset::Test => "test",
        }
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Baseline,
    DataShift,
}

impl SplitMode {
    pub const fn as_str(self) -> &'static str {
        match self {
            SplitMode::Baseline => "baseline",
            SplitMode::DataShift => "datashift",
        }
    }
}

/// An image id with its ground-truth lesion class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledImage {
    pub image_id: String,
    pub label: LesionClass,
}

impl LabeledImage {
    pub fn new(image_id: impl Into<String>, label: LesionClass) -> Self {
        Self {
            image_id: image_id.into(),
            label,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const BASELINE: SplitRatios = SplitRatios {
        train: 0.57,
        val: 0.14,
        test: 0.29,
    };

    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = Self { train, val, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::InvalidRatios("every ratio must be positive"));
        }
        if libm::fabs(parts.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(Error::InvalidRatios("ratios must sum to 1"));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self::BASELINE
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitAssignment {
    pub assignments: BTreeMap<String, Subset>,
    pub seed: u64,
    pub mode: SplitMode,
    /// Ids that could not be placed (data-shift records without an `Ok` tone).
    pub skipped: Vec<String>,
}

impl SplitAssignment {
    pub fn get(&self, image_id: &str) -> Option<Subset> {
        self.assignments.get(image_id).copied()
    }

    pub fn count(&self, subset: Subset) -> usize {
        self.assignments.values().filter(|&&s| s == subset).count()
    }

    pub fn ids(&self, subset: Subset) -> impl Iterator<Item = &str> {
        self.assignments
            .iter()
            .filter(move |(_, &s)| s == subset)
            .map(|(id, _)| id.as_str())
    }
}

const REMAINDER_PRIORITY: [usize; 3] = [0, 2, 1];
const FLOOR_SLACK: f64 = 1e-9;

/// Splits `n` items across `weights` (summing to 1) by largest remainder.
/// `priority` ranks slots for equal remainders; earlier wins.
fn apportion<const K: usize>(n: usize, weights: [f64; K], priority: [usize; K]) -> [usize; K] {
    let quotas = weights.map(|w| n as f64 * w);
    let mut counts = quotas.map(|q| libm::floor(q + FLOOR_SLACK).max(0.0) as usize);
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..K).collect();
    let rank = |i: usize| priority.iter().position(|&p| p == i).unwrap_or(K);
    order.sort_by(|&i, &j| {
        let fi = (quotas[i] - counts[i] as f64).max(0.0);
        let fj = (quotas[j] - counts[j] as f64).max(0.0);
        fj.total_cmp(&fi).then(rank(i).cmp(&rank(j)))
    });
    for &slot in order.iter().cycle().take(n.saturating_sub(assigned)) {
        counts[slot] += 1;
    }
    counts
}

fn group_by_class(records: &[LabeledImage]) -> Result<[Vec<&str>; NUM_CLASSES]> {
    let mut seen = BTreeSet::new();
    let mut groups: [Vec<&str>; NUM_CLASSES] = Default::default();
    for r in records {
        if !seen.insert(r.image_id.as_str()) {
            return Err(Error::DuplicateId(r.image_id.clone()));
        }
        groups[r.label.index()].push(r.image_id.as_str());
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    Ok(groups)
}

fn assign_shuffled(
    ids: &mut [&str],
    counts: [usize; 3],
    rng: &mut ChaCha8Rng,
    out: &mut BTreeMap<String, Subset>,
) {
    ids.shuffle(rng);
    let subsets = [Subset::Train, Subset::Val, Subset::Test];
    let mut it = ids.iter();
    for (subset, n) in subsets.into_iter().zip(counts) {
        for id in it.by_ref().take(n) {
            out.insert(String::from(*id), subset);
        }
    }
}

/// Lesion-stratified split with per-class largest-remainder rounding.
pub fn stratified_split(
    records: &[LabeledImage],
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitAssignment> {
    ratios.validate()?;
    let mut groups = group_by_class(records)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    for ids in groups.iter_mut() {
        let counts = apportion(ids.len(), ratios.as_array(), REMAINDER_PRIORITY);
        assign_shuffled(ids, counts, &mut rng, &mut assignments);
    }
    Ok(SplitAssignment {
        assignments,
        seed,
        mode: SplitMode::Baseline,
        skipped: Vec::new(),
    })
}

/// Stratified split whose test set has exactly `test_size` images.
///
/// Test places are apportioned across classes by largest remainder (ties to
/// the earlier class); the rest of each class is split between Train and
/// Val in the proportion `ratios.train : ratios.val`.
pub fn stratified_split_with_test_size(
    records: &[LabeledImage],
    ratios: SplitRatios,
    seed: u64,
    test_size: usize,
) -> Result<SplitAssignment> {
    ratios.validate()?;
    if test_size >= records.len() {
        return Err(Error::InvalidRatios(
            "test size must be smaller than the record count",
        ));
    }
    let mut groups = group_by_class(records)?;
    let total = records.len() as f64;
    let class_weights: [f64; NUM_CLASSES] =
        core::array::from_fn(|c| groups[c].len() as f64 / total);
    let class_priority: [usize; NUM_CLASSES] = core::array::from_fn(|c| c);
    let test_counts = apportion(test_size, class_weights, class_priority);

    let fit = ratios.train + ratios.val;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    for (ids, test) in groups.iter_mut().zip(test_counts) {
        let rest = ids.len() - test;
        let [train, val] = apportion(rest, [ratios.train / fit, ratios.val / fit], [0, 1]);
        assign_shuffled(ids, [train, val, test], &mut rng, &mut assignments);
    }
    Ok(SplitAssignment {
        assignments,
        seed,
        mode: SplitMode::Baseline,
        skipped: Vec::new(),
    })
}

pub const DATASHIFT_TRAIN_FRACTION: f64 = 0.8;

/// Data-shift protocol: images with ITA above `cutoff` are split 80:20 into
/// Train/Val (stratified by lesion); every other image is Test.
///
/// Records without an `Ok` tone row are listed in `skipped`.
pub fn datashift_split(
    tones: &[ItaResult],
    records: &[LabeledImage],
    seed: u64,
    cutoff: f64,
) -> Result<SplitAssignment> {
    let ita_by_id: BTreeMap<&str, f64> = tones
        .iter()
        .filter_map(|t| t.typed().map(|(ita, _)| (t.image_id.as_str(), ita)))
        .collect();
    let mut light = Vec::new();
    let mut dark = Vec::new();
    let mut skipped = Vec::new();
    for r in records {
        match ita_by_id.get(r.image_id.as_str()) {
            Some(&ita) if ita > cutoff => light.push(r.clone()),
            Some(_) => dark.push(r.image_id.clone()),
            None => skipped.push(r.image_id.clone()),
        }
    }
    if dark.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if light.is_empty() {
        return Err(Error::EmptyTrainSet);
    }
    let mut groups = group_by_class(&light)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = BTreeMap::new();
    let weights = [DATASHIFT_TRAIN_FRACTION, 1.0 - DATASHIFT_TRAIN_FRACTION];
    for ids in groups.iter_mut() {
        let [train, val] = apportion(ids.len(), weights, [0, 1]);
        assign_shuffled(ids, [train, val, 0], &mut rng, &mut assignments);
    }
    for id in dark {
        if assignments.insert(id.clone(), Subset::Test).is_some() {
            return Err(Error::DuplicateId(id));
        }
    }
    skipped.sort();
    Ok(SplitAssignment {
        assignments,
        seed,
        mode: SplitMode::DataShift,
        skipped,
    })
}
