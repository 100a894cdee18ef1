//! Grouped bar charts as standalone SVG.

use std::fmt::Write as _;

use crate::mutations::MutationKind;
use crate::study::{ImprovementMatrix, OlsModel, TargetKind, FEATURES};
use crate::bench::TargetFunction;

const PALETTE: [&str; 8] = ["#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#9c755f"];

/// `groups[g][s]` is the bar of series `s` in group `g`; missing values
/// leave a gap.
pub fn grouped_bars(title: &str, group_labels: &[String], series: &[String], groups: &[Vec<Option<f64>>]) -> String {
    let (w, h) = (900.0, 420.0);
    let (left, right, top, bottom) = (60.0, 160.0, 40.0, 40.0);
    let plot_w = w - left - right;
    let plot_h = h - top - bottom;
    let values = groups.iter().flatten().flatten().copied();
    let (lo, hi) = values.fold((0.0f64, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let span = if hi - lo > 0.0 { hi - lo } else { 1.0 };
    let y = |v: f64| top + plot_h * (hi - v) / span;

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" font-size="14" text-anchor="middle">{}</text>"#, left + plot_w / 2.0, escape(title));
    let _ = writeln!(s, r#"<line x1="{left}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="black"/>"#, y(0.0), left + plot_w);
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#, left - 4.0, y(hi) + 4.0, hi);
    let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{:.3}</text>"#, left - 4.0, y(lo) + 4.0, lo);

    let gw = plot_w / groups.len().max(1) as f64;
    let bw = gw * 0.8 / series.len().max(1) as f64;
    for (g, bars) in groups.iter().enumerate() {
        let x0 = left + g as f64 * gw + gw * 0.1;
        for (k, v) in bars.iter().enumerate() {
            let Some(v) = v else { continue };
            let (a, b) = (y(*v), y(0.0));
            let _ = writeln!(
                s,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                x0 + k as f64 * bw,
                a.min(b),
                bw,
                (a - b).abs(),
                PALETTE[k % PALETTE.len()]
            );
        }
        if let Some(label) = group_labels.get(g) {
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, x0 + gw * 0.4, h - bottom + 16.0, escape(label));
        }
    }
    for (k, name) in series.iter().enumerate() {
        let ly = top + 16.0 * k as f64;
        let _ = writeln!(s, r#"<rect x="{}" y="{}" width="10" height="10" fill="{}"/>"#, w - right + 10.0, ly, PALETTE[k % PALETTE.len()]);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, w - right + 24.0, ly + 9.0, escape(name));
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn kind_labels() -> Vec<String> {
    MutationKind::ALL.iter().map(|k| k.to_string()).collect()
}

/// Intercept and standardized coefficients per mutation for one model.
pub fn ols_chart(models: &[OlsModel], target_kind: TargetKind, title: &str) -> String {
    let mut series = vec!["intercept".to_string()];
    series.extend(FEATURES.iter().map(|f| f.to_string()));
    let groups: Vec<Vec<Option<f64>>> = MutationKind::ALL
        .iter()
        .map(|&k| match models.iter().find(|m| m.kind == k && m.target_kind == target_kind) {
            Some(m) => {
                let mut v = vec![Some(m.intercept)];
                v.extend(FEATURES.iter().map(|f| m.coefficients.get(*f).copied()));
                v
            }
            None => vec![None; 4],
        })
        .collect();
    grouped_bars(title, &kind_labels(), &series, &groups)
}

/// Mean signed improvement per mutation and target.
pub fn improvement_chart(m: &ImprovementMatrix) -> String {
    let series: Vec<String> = TargetFunction::STUDY.iter().map(|t| t.name().to_string()).collect();
    grouped_bars("Mean improvement per mutation and target", &kind_labels(), &series, &m.signed)
}
