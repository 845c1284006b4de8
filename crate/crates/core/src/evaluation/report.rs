//! Plain-text metrics report: `[section]` headers followed by `key = value`
//! lines, stable ordering, reals at 9 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::domain::{AggregationMode, BehaviorClass, ClassScheme};
use crate::evaluation::curves::CurvePoint;
use crate::evaluation::metrics::ConfusionMatrix;
use crate::io::fmt_real;

/// Curve section outcome: points, or why none could be computed.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveResult {
    Points(Vec<CurvePoint>),
    Unavailable(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricsReport {
    pub scheme: ClassScheme,
    pub videos: usize,
    pub clips: usize,
    pub clip_accuracy: f64,
    pub confusion: ConfusionMatrix,
    pub start_curve: CurveResult,
    pub end_curve: CurveResult,
    pub temporal: Vec<(AggregationMode, BTreeMap<BehaviorClass, f64>)>,
    /// Share of clips predicted as any behavior that truly contain one.
    pub behavior_precision: Option<f64>,
    pub base_rate: f64,
    pub review_efficiency: Option<f64>,
}

impl MetricsReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let n = self.scheme.n_classes();
        let _ = writeln!(out, "[run]");
        let _ = writeln!(out, "classes = {n}");
        let _ = writeln!(out, "class_names = {}", self.scheme.names().join(","));
        let _ = writeln!(out, "videos = {}", self.videos);
        let _ = writeln!(out, "clips = {}", self.clips);

        let _ = writeln!(out, "\n[accuracy]");
        let _ = writeln!(out, "clip_accuracy = {}", fmt_real(self.clip_accuracy));

        let _ = writeln!(out, "\n[confusion]");
        let pct = self.confusion.row_percents();
        for t in 0..n {
            let counts: Vec<String> = self.confusion.row(t).iter().map(u64::to_string).collect();
            let _ = writeln!(out, "count.{t} = {}", counts.join(","));
        }
        for (t, row) in pct.iter().enumerate() {
            let vals: Vec<String> = row.iter().map(|&v| fmt_real(v)).collect();
            let _ = writeln!(out, "row_percent.{t} = {}", vals.join(","));
        }

        for (name, curve) in [("start", &self.start_curve), ("end", &self.end_curve)] {
            let _ = writeln!(out, "\n[curve.{name}]");
            match curve {
                CurveResult::Points(points) => {
                    let _ = writeln!(out, "columns = threshold,tpr,fpr,precision,recall");
                    for (i, p) in points.iter().enumerate() {
                        let _ = writeln!(
                            out,
                            "point.{i} = {},{},{},{},{}",
                            fmt_real(p.threshold),
                            fmt_real(p.tpr),
                            fmt_real(p.fpr),
                            fmt_real(p.precision),
                            fmt_real(p.recall)
                        );
                    }
                }
                CurveResult::Unavailable(why) => {
                    let _ = writeln!(out, "unavailable = {why}");
                }
            }
        }

        for (mode, per_class) in &self.temporal {
            let _ = writeln!(out, "\n[temporal.{}]", mode.tag());
            for c in 1..n {
                let v = per_class
                    .get(&BehaviorClass(c))
                    .map_or_else(|| "absent".to_string(), |&v| fmt_real(v));
                let _ = writeln!(out, "class.{c} = {v}");
            }
        }

        let _ = writeln!(out, "\n[review]");
        let opt = |v: Option<f64>| v.map_or_else(|| "absent".to_string(), fmt_real);
        let _ = writeln!(out, "behavior_precision = {}", opt(self.behavior_precision));
        let _ = writeln!(out, "base_rate = {}", fmt_real(self.base_rate));
        let _ = writeln!(out, "efficiency = {}", opt(self.review_efficiency));
        out
    }
}

/// Sections of a rendered report, keys in file order.
pub fn parse_report(text: &str) -> Result<BTreeMap<String, Vec<(String, String)>>, String> {
    let mut sections: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            sections.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
        let section = current
            .as_ref()
            .ok_or_else(|| format!("line {}: key outside a section", lineno + 1))?;
        sections
            .get_mut(section)
            .expect("section registered")
            .push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(sections)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::metrics::confusion;

    fn sample() -> MetricsReport {
        let preds = vec![BehaviorClass(0), BehaviorClass(1), BehaviorClass(2)];
        MetricsReport {
            scheme: ClassScheme::Three,
            videos: 1,
            clips: 3,
            clip_accuracy: 1.0,
            confusion: confusion(&preds, &preds, 3).unwrap(),
            start_curve: CurveResult::Unavailable("no positive samples".into()),
            end_curve: CurveResult::Points(vec![CurvePoint {
                threshold: 0.0,
                tpr: 1.0,
                fpr: 1.0,
                precision: 0.5,
                recall: 1.0,
            }]),
            temporal: vec![(
                AggregationMode::Rough,
                BTreeMap::from([(BehaviorClass(1), 0.75)]),
            )],
            behavior_precision: Some(0.79),
            base_rate: 0.06,
            review_efficiency: Some(0.79 / 0.06),
        }
    }

    #[test]
    fn render_then_parse() {
        let text = sample().render();
        let sections = parse_report(&text).unwrap();
        let get = |s: &str, k: &str| {
            sections[s]
                .iter()
                .find(|(key, _)| key == k)
                .map(|(_, v)| v.clone())
                .unwrap()
        };
        assert_eq!(get("run", "classes"), "3");
        assert_eq!(get("confusion", "count.1"), "0,1,0");
        assert_eq!(get("temporal.rough", "class.2"), "absent");
        assert_eq!(get("curve.start", "unavailable"), "no positive samples");
        let eff: f64 = get("review", "efficiency").parse().unwrap();
        assert!((eff - 13.1667).abs() < 1e-3);
    }

    #[test]
    fn parse_rejects_orphans() {
        assert!(parse_report("a = 1").is_err());
        assert!(parse_report("[x]\nnot a pair").is_err());
    }
}
