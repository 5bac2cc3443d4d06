//! Human-readable tables and SVG bar charts.

use std::fmt::Write as _;

use skintone_core::analysis::{AgreementMatrix, FairnessReport, TypeDistribution};
use skintone_core::colorspace::SkinType;

pub fn distribution_table(name: &str, d: &TypeDistribution) -> String {
    let mut out = format!("Skin type distribution: {name}\n");
    let _ = writeln!(out, "{:>6} {:>8} {:>9}", "type", "count", "percent");
    for t in SkinType::ALL {
        let _ = writeln!(
            out,
            "{:>6} {:>8} {:>8.2}%",
            t,
            d.counts[t.index()],
            d.percentage(t)
        );
    }
    let _ = writeln!(out, "{:>6} {:>8}", "total", d.total());
    let _ = writeln!(out, "excluded (not Ok): {}", d.excluded);
    out
}

pub fn agreement_table(a: &str, b: &str, m: &AgreementMatrix) -> String {
    let mut out = format!("Agreement: rows A = {a}, columns B = {b}\n");
    let _ = write!(out, "{:>6}", "");
    for t in SkinType::ALL {
        let _ = write!(out, " {:>7}", format!("B{t}"));
    }
    out.push('\n');
    for (t, row) in SkinType::ALL.iter().zip(&m.counts) {
        let _ = write!(out, "{:>6}", t);
        for c in row {
            let _ = write!(out, " {c:>7}");
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "joined {}, agreeing {}, excluded {}, jointly dark (ITA <= {}): {}",
        m.total(),
        m.agreeing(),
        m.excluded,
        m.dark_cutoff,
        m.joint_dark.len()
    );
    out
}

pub fn fairness_table(name: &str, r: &FairnessReport) -> String {
    let mut out = format!("Per-type classification metrics: {name}\n");
    let _ = writeln!(
        out,
        "{:>6} {:>6} {:>9} {:>9} {:>9} {:>9}",
        "type", "n", "bal_acc", "accuracy", "w_prec", "w_f1"
    );
    for (t, g) in &r.groups {
        let m = &g.metrics;
        let _ = writeln!(
            out,
            "{:>6} {:>6} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            t, g.size, m.balanced_accuracy, m.accuracy, m.weighted_precision, m.weighted_f1
        );
    }
    let _ = writeln!(out, "predictions without a tone: {}", r.unmatched);
    out
}

const PALETTE: [&str; 6] = [
    "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#76b7b2", "#b07aa1",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Grouped vertical bars: one group per category, one bar per series.
/// Missing values leave a gap. Values are clipped to `[0, y_max]`.
pub fn svg_grouped_bars(
    title: &str,
    categories: &[String],
    series: &[(String, Vec<Option<f64>>)],
    y_max: f64,
) -> String {
    let (width, height) = (640.0, 360.0);
    let (left, right, top, bottom) = (56.0, 16.0, 40.0, 56.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    let y_max = if y_max > 0.0 { y_max } else { 1.0 };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for k in 0..=4 {
        let v = y_max * k as f64 / 4.0;
        let y = top + plot_h - plot_h * k as f64 / 4.0;
        let _ = writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#ddd"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"##,
            left + plot_w,
            left - 6.0,
            y + 4.0,
            format_tick(v)
        );
    }
    for (ci, cat) in categories.iter().enumerate() {
        let gx = left + group_w * ci as f64 + group_w * 0.1;
        for (si, (_, values)) in series.iter().enumerate() {
            let Some(v) = values.get(ci).copied().flatten() else {
                continue;
            };
            let h = plot_h * (v.clamp(0.0, y_max) / y_max);
            let _ = writeln!(
                svg,
                r#"<rect x="{:.1}" y="{:.1}" width="{:.1}" height="{:.1}" fill="{}"/>"#,
                gx + bar_w * si as f64,
                top + plot_h - h,
                bar_w,
                h,
                PALETTE[si % PALETTE.len()]
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            left + group_w * (ci as f64 + 0.5),
            top + plot_h + 18.0,
            escape(cat)
        );
    }
    let _ = writeln!(
        svg,
        r##"<line x1="{left}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#333"/>"##,
        top + plot_h,
        left + plot_w,
        top + plot_h
    );
    for (si, (name, _)) in series.iter().enumerate() {
        let x = left + 120.0 * si as f64;
        let y = height - 14.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{x:.1}" y="{:.1}" width="10" height="10" fill="{}"/><text x="{:.1}" y="{y:.1}">{}</text>"#,
            y - 9.0,
            PALETTE[si % PALETTE.len()],
            x + 14.0,
            escape(name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn format_tick(v: f64) -> String {
    if v.fract() == 0.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

pub fn type_labels() -> Vec<String> {
    SkinType::ALL.iter().map(|t| format!("type {t}")).collect()
}

pub fn distribution_series(name: &str, d: &TypeDistribution) -> (String, Vec<Option<f64>>) {
    (
        name.to_string(),
        SkinType::ALL
            .iter()
            .map(|&t| Some(d.percentage(t)))
            .collect(),
    )
}

pub fn fairness_series(name: &str, r: &FairnessReport) -> (String, Vec<Option<f64>>) {
    (
        name.to_string(),
        SkinType::ALL
            .iter()
            .map(|&t| r.balanced_accuracy(t))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svg_has_one_rect_per_present_value() {
        let series = vec![
            ("a".to_string(), vec![Some(0.5), None, Some(2.0)]),
            ("b<c".to_string(), vec![Some(1.0), Some(0.0), None]),
        ];
        let cats: Vec<String> = ["x", "y", "z"].iter().map(|s| s.to_string()).collect();
        let svg = svg_grouped_bars("t & u", &cats, &series, 1.0);
        // 4 bars + background + 2 legend swatches
        assert_eq!(svg.matches("<rect").count(), 7);
        assert!(svg.contains("t &amp; u") && svg.contains("b&lt;c"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn distribution_table_lists_all_types() {
        let d = TypeDistribution {
            counts: [1, 0, 0, 0, 0, 3],
            excluded: 2,
        };
        let t = distribution_table("rp", &d);
        assert!(t.contains("75.00%") && t.contains("excluded (not Ok): 2"));
    }
}
