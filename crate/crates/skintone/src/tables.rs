//! CSV schemas: tones, predictions, labels, splits and the derived reports.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use skintone_core::analysis::{
    AgreementMatrix, FairnessReport, LesionClass, PredictionRecord, TypeDistribution,
};
use skintone_core::colorspace::SkinType;
use skintone_core::estimators::{ItaResult, Status};
use skintone_core::splits::{LabeledImage, SplitAssignment};

use crate::error::{Error, Result};

pub const TONES_HEADER: [&str; 7] = [
    "image_id",
    "method",
    "variant",
    "ita_deg",
    "skin_type",
    "status",
    "pixel_count",
];
pub const PREDICTIONS_HEADER: [&str; 3] = ["image_id", "true_label", "pred_label"];
pub const SPLITS_HEADER: [&str; 2] = ["image_id", "subset"];

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn finish<W: Write>(path: &Path, mut w: W) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

/// Reads a headed CSV, checking the header names, and hands each record
/// (with its line number) to `row`.
fn read_rows<T>(
    path: &Path,
    expected: &[&str],
    mut row: impl FnMut(&csv::StringRecord) -> std::result::Result<T, String>,
) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(file);
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().ne(expected.iter().copied()) {
        return Err(Error::parse(
            path,
            Some(1),
            format!("expected header `{}`", expected.join(",")),
        ));
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map(|p| p.line());
        out.push(row(&rec).map_err(|m| Error::parse(path, line, m))?);
    }
    Ok(out)
}

fn field<T: FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> std::result::Result<T, String>
where
    T::Err: std::fmt::Display,
{
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|e| format!("column `{name}`: cannot parse `{raw}`: {e}"))
}

fn optional<T: FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    name: &str,
) -> std::result::Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match rec.get(i) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, i, name).map(Some),
    }
}

/// ITA with three decimals; negative zero is written as `0.000`.
pub fn format_ita(ita: f64) -> String {
    let s = format!("{ita:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

pub fn write_tones<W: Write>(out: W, rows: &[ItaResult]) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TONES_HEADER)?;
    for r in rows {
        let skin_type = match (r.status, r.skin_type) {
            (Status::Ok, Some(t)) => t.to_string(),
            _ => String::new(),
        };
        w.write_record([
            r.image_id.as_str(),
            r.method.as_str(),
            r.variant.as_str(),
            &r.ita_deg.map(format_ita).unwrap_or_default(),
            &skin_type,
            r.status.as_str(),
            &r.pixel_count.to_string(),
        ])?;
    }
    w.flush()
}

pub fn save_tones(path: &Path, rows: &[ItaResult]) -> Result<()> {
    let mut w = create(path)?;
    write_tones(&mut w, rows).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn load_tones(path: &Path) -> Result<Vec<ItaResult>> {
    read_rows(path, &TONES_HEADER, |rec| {
        let status: Status = field(rec, 5, "status")?;
        let ita_deg: Option<f64> = optional(rec, 3, "ita_deg")?;
        let skin_type = optional::<u8>(rec, 4, "skin_type")?
            .map(|t| SkinType::new(t).map_err(|e| format!("column `skin_type`: {e}")))
            .transpose()?;
        if status == Status::Ok && (ita_deg.is_none() || skin_type.is_none()) {
            return Err("status Ok requires ita_deg and skin_type".into());
        }
        Ok(ItaResult {
            image_id: field(rec, 0, "image_id")?,
            method: field(rec, 1, "method")?,
            variant: field(rec, 2, "variant")?,
            ita_deg,
            skin_type: skin_type.filter(|_| status == Status::Ok),
            status,
            pixel_count: field(rec, 6, "pixel_count")?,
        })
    })
}

pub fn load_predictions(path: &Path) -> Result<Vec<PredictionRecord>> {
    read_rows(path, &PREDICTIONS_HEADER, |rec| {
        Ok(PredictionRecord::new(
            field::<String>(rec, 0, "image_id")?,
            field::<LesionClass>(rec, 1, "true_label")?,
            field::<LesionClass>(rec, 2, "pred_label")?,
        ))
    })
}

pub fn save_predictions(path: &Path, rows: &[PredictionRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    let io = |e: csv::Error| csv_err(path, e);
    w.write_record(PREDICTIONS_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([&r.image_id, r.true_label.as_str(), r.pred_label.as_str()])
            .map_err(io)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Lesion labels for splitting: either `image_id,label` or a predictions
/// table, whose `true_label` column is used.
pub fn load_labels(path: &Path) -> Result<Vec<LabeledImage>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().eq(PREDICTIONS_HEADER) {
        return Ok(load_predictions(path)?
            .into_iter()
            .map(|p| LabeledImage::new(p.image_id, p.true_label))
            .collect());
    }
    read_rows(path, &["image_id", "label"], |rec| {
        Ok(LabeledImage::new(
            field::<String>(rec, 0, "image_id")?,
            field::<LesionClass>(rec, 1, "label")?,
        ))
    })
}

pub fn write_splits<W: Write>(mut out: W, split: &SplitAssignment) -> io::Result<()> {
    writeln!(out, "# seed={} mode={}", split.seed, split.mode.as_str())?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SPLITS_HEADER)?;
    for (id, subset) in &split.assignments {
        w.write_record([id.as_str(), subset.as_str()])?;
    }
    w.flush()
}

pub fn save_splits(path: &Path, split: &SplitAssignment) -> Result<()> {
    let mut w = create(path)?;
    write_splits(&mut w, split).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn write_agreement<W: Write>(out: W, m: &AgreementMatrix) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::from("type_a")];
    header.extend(SkinType::ALL.iter().map(|t| format!("b{t}")));
    w.write_record(&header)?;
    for (t, row) in SkinType::ALL.iter().zip(&m.counts) {
        let mut rec = vec![t.to_string()];
        rec.extend(row.iter().map(usize::to_string));
        w.write_record(&rec)?;
    }
    w.flush()
}

pub fn save_agreement(path: &Path, m: &AgreementMatrix) -> Result<()> {
    let mut w = create(path)?;
    write_agreement(&mut w, m).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub fn save_id_list(path: &Path, ids: &[String]) -> Result<()> {
    let mut w = create(path)?;
    for id in ids {
        writeln!(w, "{id}").map_err(|e| Error::io(path, e))?;
    }
    finish(path, w)
}

pub fn write_distribution<W: Write>(out: W, d: &TypeDistribution) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["skin_type", "count", "percentage"])?;
    for t in SkinType::ALL {
        w.write_record([
            t.to_string(),
            d.counts[t.index()].to_string(),
            format!("{:.3}", d.percentage(t)),
        ])?;
    }
    w.flush()
}

pub fn save_distribution(path: &Path, d: &TypeDistribution) -> Result<()> {
    let mut w = create(path)?;
    write_distribution(&mut w, d).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}

pub const FAIRNESS_HEADER: [&str; 8] = [
    "skin_type",
    "n",
    "balanced_accuracy",
    "accuracy",
    "weighted_precision",
    "weighted_recall",
    "weighted_f1",
    "undefined_precision",
];

pub fn write_fairness<W: Write>(out: W, r: &FairnessReport) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FAIRNESS_HEADER)?;
    for (t, g) in &r.groups {
        let m = &g.metrics;
        w.write_record([
            t.to_string(),
            g.size.to_string(),
            format!("{:.6}", m.balanced_accuracy),
            format!("{:.6}", m.accuracy),
            format!("{:.6}", m.weighted_precision),
            format!("{:.6}", m.weighted_recall),
            format!("{:.6}", m.weighted_f1),
            m.undefined_precision.to_string(),
        ])?;
    }
    w.flush()
}

pub fn save_fairness(path: &Path, r: &FairnessReport) -> Result<()> {
    let mut w = create(path)?;
    write_fairness(&mut w, r).map_err(|e| Error::io(path, e))?;
    finish(path, w)
}
