//! Skin type distributions, cross-method agreement, and classification
//! metrics overall and per skin type.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::colorspace::SkinType;
use crate::estimators::ItaResult;
use crate::{Error, Result};

/// The seven lesion classes of the ISIC 2018 task 3 benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LesionClass {
    Mel,
    Nv,
    Bcc,
    Akiec,
    Bkl,
    Df,
    Vasc,
}

pub const NUM_CLASSES: usize = 7;

/// Per-class image counts of the 10015-image ISIC 2018 training set.
pub const ISIC18_CLASS_COUNTS: [(LesionClass, usize); NUM_CLASSES] = [
    (LesionClass::Mel, 1113),
    (LesionClass::Nv, 6705),
    (LesionClass::Bcc, 514),
    (LesionClass::Akiec, 327),
    (LesionClass::Bkl, 1099),
    (LesionClass::Df, 115),
    (LesionClass::Vasc, 142),
];

impl LesionClass {
    pub const ALL: [LesionClass; NUM_CLASSES] = [
        LesionClass::Mel,
        LesionClass::Nv,
        LesionClass::Bcc,
        LesionClass::Akiec,
        LesionClass::Bkl,
        LesionClass::Df,
        LesionClass::Vasc,
    ];

    pub const fn index(self) -> usize {
        self as usize
    }

    pub const fn as_str(self) -> &'static str {
        match self {
            LesionClass::Mel => "MEL",
            LesionClass::Nv => "NV",
            LesionClass::Bcc => "BCC",
            LesionClass::Akiec => "AKIEC",
            LesionClass::Bkl => "BKL",
            LesionClass::Df => "DF",
            LesionClass::Vasc => "VASC",
        }
    }
}

impl fmt::Display for LesionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LesionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        LesionClass::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownName {
                kind: "lesion class",
                value: s.to_string(),
            })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionRecord {
    pub image_id: String,
    pub true_label: LesionClass,
    pub pred_label: LesionClass,
}

impl PredictionRecord {
    pub fn new(
        image_id: impl Into<String>,
        true_label: LesionClass,
        pred_label: LesionClass,
    ) -> Self {
        Self {
            image_id: image_id.into(),
            true_label,
            pred_label,
        }
    }
}

/// Counts of `Ok` rows per skin type.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeDistribution {
    pub counts: [usize; 6],
    /// Rows left out because their status is not `Ok`.
    pub excluded: usize,
}

impl TypeDistribution {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Share of `Ok` rows with type `t`, in percent; 0 for an empty table.
    pub fn percentage(&self, t: SkinType) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            100.0 * self.counts[t.index()] as f64 / total as f64
        }
    }
}

pub fn type_distribution(results: &[ItaResult]) -> TypeDistribution {
    let mut dist = TypeDistribution::default();
    for r in results {
        match r.typed() {
            Some((_, t)) => dist.counts[t.index()] += 1,
            None => dist.excluded += 1,
        }
    }
    dist
}

/// Joint skin-type counts of two methods over the same images.
#[derive(Debug, Clone, PartialEq)]
pub struct AgreementMatrix {
    /// `counts[i][j]`: images typed `i + 1` by A and `j + 1` by B.
    pub counts: [[usize; 6]; 6],
    /// Images whose ITA is at or below the dark cutoff under both methods,
    /// sorted by id.
    pub joint_dark: Vec<String>,
    /// Images missing from, or not `Ok` in, at least one input.
    pub excluded: usize,
    pub dark_cutoff: f64,
}

impl AgreementMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..6).all(|i| (0..6).all(|j| i == j || self.counts[i][j] == 0))
    }

    pub fn transpose(&self) -> AgreementMatrix {
        let mut counts = [[0; 6]; 6];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                counts[j][i] = c;
            }
        }
        AgreementMatrix {
            counts,
            joint_dark: self.joint_dark.clone(),
            excluded: self.excluded,
            dark_cutoff: self.dark_cutoff,
        }
    }

    /// Number of images both methods assign the same type.
    pub fn agreeing(&self) -> usize {
        (0..6).map(|i| self.counts[i][i]).sum()
    }
}

fn typed_by_id(results: &[ItaResult]) -> BTreeMap<&str, (f64, SkinType)> {
    results
        .iter()
        .filter_map(|r| r.typed().map(|v| (r.image_id.as_str(), v)))
        .collect()
}

/// Cross-tabulates the skin types two methods assign to the same images.
pub fn agreement_matrix(a: &[ItaResult], b: &[ItaResult], dark_cutoff: f64) -> AgreementMatrix {
    let by_a = typed_by_id(a);
    let by_b = typed_by_id(b);
    let all_ids: BTreeSet<&str> = a.iter().chain(b).map(|r| r.image_id.as_str()).collect();

    let mut counts = [[0usize; 6]; 6];
    let mut joint_dark = Vec::new();
    let mut joined = 0;
    for (id, (ita_a, ta)) in &by_a {
        let Some((ita_b, tb)) = by_b.get(id) else {
            continue;
        };
        joined += 1;
        counts[ta.index()][tb.index()] += 1;
        if *ita_a <= dark_cutoff && *ita_b <= dark_cutoff {
            joint_dark.push(id.to_string());
        }
    }
    AgreementMatrix {
        counts,
        joint_dark,
        excluded: all_ids.len() - joined,
        dark_cutoff,
    }
}

/// Classification metrics over the seven lesion classes.
///
/// Per-class recall is `None` for classes absent from the truth. Precision
/// of a class that is never predicted is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub total: usize,
    pub support: [usize; NUM_CLASSES],
    pub predicted: [usize; NUM_CLASSES],
    pub recall: [Option<f64>; NUM_CLASSES],
    pub precision: [f64; NUM_CLASSES],
    pub f1: [f64; NUM_CLASSES],
    /// Unweighted mean of recall over classes present in the truth.
    pub balanced_accuracy: f64,
    pub weighted_precision: f64,
    pub weighted_recall: f64,
    pub weighted_f1: f64,
    pub accuracy: f64,
    /// Classes present in the truth that were never predicted (their
    /// precision was set to 0).
    pub undefined_precision: usize,
}

impl MetricsReport {
    pub fn present_recalls(&self) -> impl Iterator<Item = f64> + '_ {
        self.recall.iter().flatten().copied()
    }
}

pub fn confusion_matrix(preds: &[PredictionRecord]) -> [[usize; NUM_CLASSES]; NUM_CLASSES] {
    let mut m = [[0usize; NUM_CLASSES]; NUM_CLASSES];
    for p in preds {
        m[p.true_label.index()][p.pred_label.index()] += 1;
    }
    m
}

pub fn classification_metrics(preds: &[PredictionRecord]) -> Result<MetricsReport> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let cm = confusion_matrix(preds);
    let total = preds.len();
    let mut support = [0usize; NUM_CLASSES];
    let mut predicted = [0usize; NUM_CLASSES];
    for (t, row) in cm.iter().enumerate() {
        for (p, &n) in row.iter().enumerate() {
            support[t] += n;
            predicted[p] += n;
        }
    }

    let mut recall = [None; NUM_CLASSES];
    let mut precision = [0.0; NUM_CLASSES];
    let mut f1 = [0.0; NUM_CLASSES];
    let mut undefined_precision = 0;
    for c in 0..NUM_CLASSES {
        let tp = cm[c][c] as f64;
        if support[c] > 0 {
            recall[c] = Some(tp / support[c] as f64);
            if predicted[c] == 0 {
                undefined_precision += 1;
            }
        }
        if predicted[c] > 0 {
            precision[c] = tp / predicted[c] as f64;
        }
        let r = recall[c].unwrap_or(0.0);
        if precision[c] + r > 0.0 {
            f1[c] = 2.0 * precision[c] * r / (precision[c] + r);
        }
    }

    let present: Vec<f64> = recall.iter().flatten().copied().collect();
    let balanced_accuracy = present.iter().sum::<f64>() / present.len() as f64;
    let weighted = |per_class: &dyn Fn(usize) -> f64| {
        (0..NUM_CLASSES)
            .map(|c| support[c] as f64 * per_class(c))
            .sum::<f64>()
            / total as f64
    };
    let correct: usize = (0..NUM_CLASSES).map(|c| cm[c][c]).sum();
    Ok(MetricsReport {
        total,
        support,
        predicted,
        recall,
        precision,
        f1,
        balanced_accuracy,
        weighted_precision: weighted(&|c| precision[c]),
        weighted_recall: weighted(&|c| recall[c].unwrap_or(0.0)),
        weighted_f1: weighted(&|c| f1[c]),
        accuracy: correct as f64 / total as f64,
        undefined_precision,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupReport {
    pub size: usize,
    pub metrics: MetricsReport,
}

/// Classification metrics per assigned skin type. Types with no joined
/// image are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct FairnessReport {
    pub groups: BTreeMap<SkinType, GroupReport>,
    /// Predictions with no `Ok` tone row.
    pub unmatched: usize,
}

impl FairnessReport {
    pub fn balanced_accuracy(&self, t: SkinType) -> Option<f64> {
        self.groups.get(&t).map(|g| g.metrics.balanced_accuracy)
    }
}

pub fn fairness_by_type(preds: &[PredictionRecord], tones: &[ItaResult]) -> Result<FairnessReport> {
    let types = typed_by_id(tones);
    let mut buckets: BTreeMap<SkinType, Vec<PredictionRecord>> = BTreeMap::new();
    let mut unmatched = 0;
    for p in preds {
        match types.get(p.image_id.as_str()) {
            Some(&(_, t)) => buckets.entry(t).or_default().push(p.clone()),
            None => unmatched += 1,
        }
    }
    if buckets.is_empty() {
        return Err(Error::NoOverlap);
    }
    let mut groups = BTreeMap::new();
    for (t, records) in buckets {
        groups.insert(
            t,
            GroupReport {
                size: records.len(),
                metrics: classification_metrics(&records)?,
            },
        );
    }
    Ok(FairnessReport { groups, unmatched })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorspace::ItaVariant;
    use crate::estimators::{Method, Status};
    use alloc::format;
    use alloc::vec;
    use LesionClass::*;

    fn tone(id: &str, ita: f64, t: u8) -> ItaResult {
        ItaResult {
            image_id: id.into(),
            method: Method::Dlhss,
            variant: ItaVariant::Arctan2,
            ita_deg: Some(ita),
            skin_type: Some(SkinType::new(t).unwrap()),
            status: Status::Ok,
            pixel_count: 1,
        }
    }

    fn failed(id: &str) -> ItaResult {
        ItaResult::failed(id, Method::Dlhss, ItaVariant::Arctan2, Status::Error)
    }

    #[test]
    fn class_counts_sum_to_dataset_size() {
        let n: usize = ISIC18_CLASS_COUNTS.iter().map(|(_, n)| n).sum();
        assert_eq!(n, 10015);
    }

    #[test]
    fn distribution_cases() {
        let all_one: Vec<_> = (0..10).map(|i| tone(&format!("{i}"), 60.0, 1)).collect();
        let d = type_distribution(&all_one);
        assert_eq!(d.percentage(SkinType::new(1).unwrap()), 100.0);

        let mut mixed = Vec::new();
        for i in 0..3 {
            mixed.push(tone(&format!("a{i}"), 50.0, 2));
            mixed.push(tone(&format!("b{i}"), 30.0, 3));
        }
        for i in 0..4 {
            mixed.push(tone(&format!("c{i}"), 20.0, 4));
        }
        mixed.push(failed("bad"));
        let d = type_distribution(&mixed);
        assert_eq!(d.excluded, 1);
        let pct: Vec<f64> = SkinType::ALL.iter().map(|&t| d.percentage(t)).collect();
        assert_eq!(pct, vec![0.0, 30.0, 30.0, 40.0, 0.0, 0.0]);
        assert_eq!(
            type_distribution(&[]).percentage(SkinType::new(3).unwrap()),
            0.0
        );
    }

    #[test]
    fn agreement_self_is_diagonal() {
        let a = vec![tone("1", 60.0, 1), tone("2", 30.0, 3), tone("3", 0.0, 6)];
        let m = agreement_matrix(&a, &a, 28.0);
        assert!(m.is_diagonal());
        assert_eq!(m.total(), 3);
        assert_eq!(m.joint_dark, vec!["3".to_string()]);
    }

    #[test]
    fn agreement_single_cell_and_exclusions() {
        let a: Vec<_> = (0..7).map(|i| tone(&format!("{i}"), 60.0, 1)).collect();
        let mut b: Vec<_> = (0..7).map(|i| tone(&format!("{i}"), 50.0, 2)).collect();
        let m = agreement_matrix(&a, &b, 28.0);
        assert_eq!(m.counts[0][1], 7);
        assert_eq!(m.total(), 7);
        b.push(tone("extra", 50.0, 2));
        b[0] = failed("0");
        let m = agreement_matrix(&a, &b, 28.0);
        assert_eq!(m.total(), 6);
        assert_eq!(m.excluded, 2);
    }

    #[test]
    fn metrics_hand_case() {
        let preds = vec![
            PredictionRecord::new("1", Mel, Mel),
            PredictionRecord::new("2", Mel, Nv),
            PredictionRecord::new("3", Nv, Nv),
        ];
        let m = classification_metrics(&preds).unwrap();
        assert_eq!(m.recall[Mel.index()], Some(0.5));
        assert_eq!(m.recall[Nv.index()], Some(1.0));
        assert_eq!(m.recall[Bcc.index()], None);
        assert!((m.balanced_accuracy - 0.75).abs() < 1e-12);
        assert!((m.weighted_recall - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.weighted_precision - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(m.undefined_precision, 0);
    }

    #[test]
    fn metrics_never_predicted_class() {
        let preds = vec![
            PredictionRecord::new("1", Mel, Nv),
            PredictionRecord::new("2", Nv, Nv),
        ];
        let m = classification_metrics(&preds).unwrap();
        assert_eq!(m.precision[Mel.index()], 0.0);
        assert_eq!(m.undefined_precision, 1);
        assert_eq!(classification_metrics(&[]), Err(Error::EmptyInput));
    }

    #[test]
    fn fairness_no_overlap() {
        let preds = vec![PredictionRecord::new("x", Mel, Mel)];
        let tones = vec![tone("y", 60.0, 1)];
        assert_eq!(fairness_by_type(&preds, &tones), Err(Error::NoOverlap));
    }

    #[test]
    fn lesion_labels_parse() {
        assert_eq!("akiec".parse::<LesionClass>().unwrap(), Akiec);
        assert_eq!("VASC".parse::<LesionClass>().unwrap(), Vasc);
        assert!("SCC".parse::<LesionClass>().is_err());
    }
}
