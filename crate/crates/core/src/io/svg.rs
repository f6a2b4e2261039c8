//! Minimal SVG plots: objective heat maps with query paths, and
//! regret-versus-cost curves.

use std::fmt::Write;

use crate::bench::Summary;

const SIZE: f64 = 400.0;
const PAD: f64 = 40.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

fn colour(t: f64) -> String {
    // Dark blue (low) to pale yellow (high).
    let t = t.clamp(0.0, 1.0);
    let r = (30.0 + 225.0 * t) as u8;
    let g = (30.0 + 200.0 * t) as u8;
    let b = (120.0 - 20.0 * t) as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Heat map of `values` on an `n × n` grid over the unit square (row `i`
/// is `x2 = (i + 0.5)/n`), with optional query paths drawn on top.
pub fn heatmap(values: &[f64], n: usize, paths: &[&[Vec<f64>]]) -> String {
    assert_eq!(values.len(), n * n, "grid size");
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cell = SIZE / n as f64;
    let mut out = String::new();
    header(&mut out, SIZE, SIZE);
    for i in 0..n {
        for j in 0..n {
            let v = (values[i * n + j] - lo) / span;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                j as f64 * cell,
                SIZE - (i + 1) as f64 * cell,
                cell + 0.5,
                cell + 0.5,
                colour(v)
            );
        }
    }
    for (k, path) in paths.iter().enumerate() {
        let pts: Vec<String> = path.iter().map(|p| format!("{:.2},{:.2}", p[0] * SIZE, SIZE - p[1] * SIZE)).collect();
        let c = PALETTE[k % PALETTE.len()];
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
        for p in path.iter() {
            let _ =
                writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{c}"/>"#, p[0] * SIZE, SIZE - p[1] * SIZE);
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Mean regret against mean cumulative cost, one line per actor.
pub fn regret_vs_cost(summary: &Summary, title: &str) -> String {
    let w = SIZE + 2.0 * PAD;
    let h = SIZE + 2.0 * PAD;
    let max_cost = summary.actors.iter().flat_map(|a| a.cost.mean.iter().copied()).fold(1e-9, f64::max);
    let max_regret = summary.actors.iter().flat_map(|a| a.regret.mean.iter().copied()).fold(1e-9, f64::max);
    let mut out = String::new();
    header(&mut out, w, h);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, w / 2.0);
    let _ = writeln!(out, r#"<path d="M{PAD},{PAD} V{} H{}" fill="none" stroke="black"/>"#, PAD + SIZE, PAD + SIZE);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">cumulative cost (max {max_cost:.3})</text>"#,
        w / 2.0,
        h - 8.0
    );
    let _ = writeln!(
        out,
        r#"<text x="12" y="{}" font-size="12" transform="rotate(-90 12 {})" text-anchor="middle">simple regret (max {max_regret:.3})</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, a) in summary.actors.iter().enumerate() {
        let c = PALETTE[k % PALETTE.len()];
        let pts: Vec<String> = a
            .cost
            .mean
            .iter()
            .zip(&a.regret.mean)
            .map(|(x, y)| format!("{:.2},{:.2}", PAD + x / max_cost * SIZE, PAD + SIZE - y / max_regret * SIZE))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{c}" stroke-width="2"/>"#, pts.join(" "));
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="12" fill="{c}">{}</text>"#,
            PAD + SIZE - 80.0,
            PAD + 16.0 * (k + 1) as f64,
            a.actor
        );
    }
    out.push_str("</svg>\n");
    out
}
