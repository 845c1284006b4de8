//! CSV and minimal standalone SVG renderings of curves and confusion matrices.

use std::fmt::Write as _;

use crate::evaluation::curves::CurvePoint;
use crate::evaluation::metrics::ConfusionMatrix;
use crate::io::fmt_real;

const SIZE: f64 = 320.0;
const PAD: f64 = 40.0;

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("threshold,tpr,fpr,precision,recall\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(p.threshold),
            fmt_real(p.tpr),
            fmt_real(p.fpr),
            fmt_real(p.precision),
            fmt_real(p.recall)
        );
    }
    out
}

pub fn confusion_csv(matrix: &ConfusionMatrix, names: &[&str]) -> String {
    let n = matrix.size();
    let mut out = String::from("truth");
    for p in 0..n {
        let _ = write!(
            out,
            ",pred_{}",
            names.get(p).unwrap_or(&"?").replace(',', ";")
        );
    }
    out.push('\n');
    for t in 0..n {
        out.push_str(&names.get(t).unwrap_or(&"?").replace(',', ";"));
        for c in matrix.row(t) {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveKind {
    Roc,
    PrecisionRecall,
}

/// Line plot of a ROC (fpr → tpr) or P-R (recall → precision) curve on the unit square.
pub fn curve_svg(points: &[CurvePoint], kind: CurveKind, title: &str) -> String {
    let (xlabel, ylabel) = match kind {
        CurveKind::Roc => ("false positive rate", "true positive rate"),
        CurveKind::PrecisionRecall => ("recall", "precision"),
    };
    let coords: Vec<(f64, f64)> = points
        .iter()
        .map(|p| match kind {
            CurveKind::Roc => (p.fpr, p.tpr),
            CurveKind::PrecisionRecall => (p.recall, p.precision),
        })
        .collect();
    let px = |x: f64| PAD + x * SIZE;
    let py = |y: f64| PAD + (1.0 - y) * SIZE;
    let total = SIZE + 2.0 * PAD;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{PAD}" y="{PAD}" width="{SIZE}" height="{SIZE}" fill="none" stroke="black"/>"#
    );
    if kind == CurveKind::Roc {
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="gray" stroke-dasharray="4"/>"#,
            px(0.0),
            py(0.0),
            px(1.0),
            py(1.0)
        );
    }
    let path: Vec<String> = coords
        .iter()
        .map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y)))
        .collect();
    let _ = writeln!(
        svg,
        r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );
    for (p, &(x, y)) in points.iter().zip(&coords) {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"><title>t={:.2}</title></circle>"#,
            px(x),
            py(y),
            p.threshold
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        total / 2.0,
        PAD / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
        total / 2.0,
        total - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="12" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 12 {})">{ylabel}</text>"#,
        total / 2.0,
        total / 2.0
    );
    svg.push_str("</svg>\n");
    svg
}

/// Confusion matrix heat map shaded by row percent.
pub fn confusion_svg(matrix: &ConfusionMatrix, names: &[&str], title: &str) -> String {
    let n = matrix.size().max(1);
    let cell = SIZE / n as f64;
    let left = PAD * 3.0;
    let total_w = left + SIZE + PAD;
    let total_h = SIZE + 2.0 * PAD;
    let pct = matrix.row_percents();

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total_w}" height="{total_h}" viewBox="0 0 {total_w} {total_h}">"#
    );
    for (t, row) in pct.iter().enumerate() {
        for (p, &v) in row.iter().enumerate() {
            let shade = (255.0 * (1.0 - v)).round() as u8;
            let x = left + p as f64 * cell;
            let y = PAD + t as f64 * cell;
            let _ = writeln!(
                svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="rgb({shade},{shade},255)" stroke="black"/>"#
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{} ({:.0}%)</text>"#,
                x + cell / 2.0,
                y + cell / 2.0,
                matrix.count(t, p),
                v * 100.0
            );
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="11">{}</text>"#,
            left - 4.0,
            PAD + (t as f64 + 0.5) * cell,
            escape(names.get(t).unwrap_or(&"?"))
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
        left + SIZE / 2.0,
        PAD / 2.0,
        escape(title)
    );
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
