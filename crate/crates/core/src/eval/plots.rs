//! CSV and standalone SVG renderings of ROC curves and score histograms.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 50.0;

/// Two-class histogram over shared bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Density (fraction of the class per bin width) for entailed instances.
    pub entailed: Vec<f64>,
    pub non_entailed: Vec<f64>,
}

pub fn histogram(scores: &[(f64, bool)], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let finite: Vec<f64> = scores.iter().map(|s| s.0).filter(|v| v.is_finite()).collect();
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if finite.is_empty() {
        (0.0, 1.0)
    } else if lo == hi {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = [vec![0usize; bins], vec![0usize; bins]];
    for &(s, label) in scores {
        if !s.is_finite() {
            continue;
        }
        let b = (((s - lo) / width) as usize).min(bins - 1);
        counts[usize::from(!label)][b] += 1;
    }
    let density = |c: &[usize]| -> Vec<f64> {
        let total: usize = c.iter().sum();
        c.iter()
            .map(|&k| if total == 0 { 0.0 } else { k as f64 / total as f64 / width })
            .collect()
    };
    Histogram {
        entailed: density(&counts[0]),
        non_entailed: density(&counts[1]),
        edges,
    }
}

pub fn roc_csv(points: &[(f64, f64)]) -> String {
    let mut out = String::from("fpr,tpr\n");
    for (f, t) in points {
        writeln!(out, "{f},{t}").expect("write to string");
    }
    out
}

pub fn histogram_csv(h: &Histogram) -> String {
    let mut out = String::from("bin_start,bin_end,entailment_density,non_entailment_density\n");
    for i in 0..h.entailed.len() {
        writeln!(
            out,
            "{},{},{},{}",
            h.edges[i],
            h.edges[i + 1],
            h.entailed[i],
            h.non_entailed[i]
        )
        .expect("write to string");
    }
    out
}

fn svg_open(out: &mut String, title: &str, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>
<line x1="{MARGIN}" y1="{}" x2="{}" y2="{}" stroke="black"/>
<line x1="{MARGIN}" y1="{MARGIN}" x2="{MARGIN}" y2="{}" stroke="black"/>
<text x="{}" y="{}" text-anchor="middle">{}</text>
<text x="15" y="{}" text-anchor="middle" transform="rotate(-90 15 {})">{}</text>
"#,
        WIDTH / 2.0,
        escape(title),
        HEIGHT - MARGIN,
        WIDTH - MARGIN,
        HEIGHT - MARGIN,
        HEIGHT - MARGIN,
        WIDTH / 2.0,
        HEIGHT - 12.0,
        escape(x_label),
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label),
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn px(x: f64, lo: f64, hi: f64) -> f64 {
    MARGIN + (x - lo) / (hi - lo) * (WIDTH - 2.0 * MARGIN)
}

fn py(y: f64, lo: f64, hi: f64) -> f64 {
    HEIGHT - MARGIN - (y - lo) / (hi - lo) * (HEIGHT - 2.0 * MARGIN)
}

fn tick_labels(out: &mut String, x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) {
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let xv = x_lo + f * (x_hi - x_lo);
        let yv = y_lo + f * (y_hi - y_lo);
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{}</text>"#,
            px(xv, x_lo, x_hi),
            HEIGHT - MARGIN + 14.0,
            short(xv)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{}</text>"#,
            MARGIN - 4.0,
            py(yv, y_lo, y_hi) + 3.0,
            short(yv)
        );
    }
}

fn short(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

pub fn roc_svg(points: &[(f64, f64)], auc: f64) -> String {
    let mut out = String::new();
    svg_open(
        &mut out,
        &format!("ROC curve (AUC {auc:.2})"),
        "false positive rate",
        "true positive rate",
    );
    tick_labels(&mut out, 0.0, 1.0, 0.0, 1.0);
    let _ = writeln!(
        out,
        r#"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="gray" stroke-dasharray="4 4"/>"#,
        px(0.0, 0.0, 1.0),
        py(0.0, 0.0, 1.0),
        px(1.0, 0.0, 1.0),
        py(1.0, 0.0, 1.0)
    );
    let path: Vec<String> = points
        .iter()
        .map(|&(f, t)| format!("{:.2},{:.2}", px(f, 0.0, 1.0), py(t, 0.0, 1.0)))
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline fill="none" stroke="steelblue" stroke-width="2" points="{}"/>"#,
        path.join(" ")
    );
    out.push_str("</svg>\n");
    out
}

pub fn histogram_svg(h: &Histogram, x_label: &str) -> String {
    let mut out = String::new();
    svg_open(&mut out, "Score distribution by label", x_label, "density");
    let x_lo = h.edges[0];
    let x_hi = *h.edges.last().expect("edges");
    let y_hi = h
        .entailed
        .iter()
        .chain(&h.non_entailed)
        .copied()
        .fold(0.0, f64::max)
        .max(1e-12);
    tick_labels(&mut out, x_lo, x_hi, 0.0, y_hi);
    for (series, color) in [(&h.entailed, "steelblue"), (&h.non_entailed, "darkorange")] {
        for (i, &d) in series.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let x0 = px(h.edges[i], x_lo, x_hi);
            let x1 = px(h.edges[i + 1], x_lo, x_hi);
            let y = py(d, 0.0, y_hi);
            let _ = writeln!(
                out,
                r#"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.45"/>"#,
                (x1 - x0).max(0.5),
                HEIGHT - MARGIN - y
            );
        }
    }
    let _ = writeln!(
        out,
        r#"<rect x="{:.0}" y="32" width="10" height="10" fill="steelblue" fill-opacity="0.45"/><text x="{:.0}" y="41">entailment</text>"#,
        WIDTH - 160.0,
        WIDTH - 145.0
    );
    let _ = writeln!(
        out,
        r#"<rect x="{:.0}" y="48" width="10" height="10" fill="darkorange" fill-opacity="0.45"/><text x="{:.0}" y="57">non-entailment</text>"#,
        WIDTH - 160.0,
        WIDTH - 145.0
    );
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn histogram_densities_integrate_to_one() {
        let s = [(0.0, true), (1.0, true), (2.0, false), (2.0, false), (0.5, false)];
        let h = histogram(&s, 4);
        let width = h.edges[1] - h.edges[0];
        let e: f64 = h.entailed.iter().sum::<f64>() * width;
        let n: f64 = h.non_entailed.iter().sum::<f64>() * width;
        assert!((e - 1.0).abs() < 1e-12 && (n - 1.0).abs() < 1e-12);
        assert!(histogram_csv(&h).lines().count() == 5);
    }

    #[test]
    fn svg_is_self_contained() {
        let svg = roc_svg(&[(0.0, 0.0), (0.5, 1.0), (1.0, 1.0)], 75.0);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("false positive rate"));
        let h = histogram(&[(1.0, true), (1.0, false)], 3);
        assert!(histogram_svg(&h, "score").contains("density"));
    }
}
