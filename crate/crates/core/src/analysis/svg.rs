//! Static SVG box-and-whisker plots.

use std::fmt::Write;

use super::stats::BoxStats;
use super::{fmt_num, AnalysisError};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const Y_TICKS: usize = 5;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn px(v: f64) -> String {
    format!("{v:.2}")
}

/// Renders one box per group on a shared linear perplexity axis.
///
/// Output depends only on the inputs, so identical inputs give identical bytes.
pub fn render_boxplot_svg(
    groups: &[BoxStats<f64>],
    title: &str,
    x_label: &str,
    y_label: &str,
) -> Result<String, AnalysisError> {
    if groups.is_empty() || groups.iter().any(|g| g.n == 0) {
        return Err(AnalysisError::NoGroups);
    }
    let lo = groups
        .iter()
        .flat_map(|g| std::iter::once(g.min).chain(g.outliers.iter().copied()))
        .fold(f64::INFINITY, f64::min);
    let hi = groups
        .iter()
        .flat_map(|g| std::iter::once(g.max).chain(g.outliers.iter().copied()))
        .fold(f64::NEG_INFINITY, f64::max);
    let pad = if hi > lo {
        (hi - lo) * 0.05
    } else {
        lo.abs().max(1.0) * 0.05
    };
    let (y_min, y_max) = (lo - pad, hi + pad);
    let plot_h = HEIGHT - TOP - BOTTOM;
    let plot_w = WIDTH - LEFT - RIGHT;
    let y = |v: f64| TOP + (y_max - v) / (y_max - y_min) * plot_h;
    let slot = plot_w / groups.len() as f64;
    let box_w = (slot * 0.5).min(60.0);

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#,
        W = WIDTH,
        H = HEIGHT
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        px(WIDTH / 2.0),
        escape(title)
    );
    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{t}" x2="{l}" y2="{b}" stroke="black"/>"#,
        l = px(LEFT),
        t = px(TOP),
        b = px(HEIGHT - BOTTOM)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{l}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/>"#,
        l = px(LEFT),
        r = px(WIDTH - RIGHT),
        b = px(HEIGHT - BOTTOM)
    );
    for i in 0..=Y_TICKS {
        let v = y_min + (y_max - y_min) * i as f64 / Y_TICKS as f64;
        let yy = px(y(v));
        let _ = writeln!(
            s,
            r#"<line x1="{a}" y1="{yy}" x2="{l}" y2="{yy}" stroke="black"/><text x="{tx}" y="{yy}" text-anchor="end" dominant-baseline="middle" font-family="sans-serif" font-size="11">{label}</text>"#,
            a = px(LEFT - 5.0),
            l = px(LEFT),
            tx = px(LEFT - 8.0),
            label = px(v)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        px(LEFT + plot_w / 2.0),
        px(HEIGHT - 15.0),
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{cy}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {cy})">{}</text>"#,
        escape(y_label),
        cy = px(TOP + plot_h / 2.0)
    );

    for (i, g) in groups.iter().enumerate() {
        let cx = LEFT + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - box_w / 2.0, cx + box_w / 2.0);
        let _ = writeln!(s, r#"<g class="group" data-value="{}">"#, fmt_num(g.value));
        let _ = writeln!(
            s,
            r#"<line class="whisker" x1="{c}" y1="{a}" x2="{c}" y2="{b}" stroke="black"/>"#,
            c = px(cx),
            a = px(y(g.max)),
            b = px(y(g.q3))
        );
        let _ = writeln!(
            s,
            r#"<line class="whisker" x1="{c}" y1="{a}" x2="{c}" y2="{b}" stroke="black"/>"#,
            c = px(cx),
            a = px(y(g.q1)),
            b = px(y(g.min))
        );
        for v in [g.min, g.max] {
            let _ = writeln!(
                s,
                r#"<line class="cap" x1="{a}" y1="{yy}" x2="{b}" y2="{yy}" stroke="black"/>"#,
                a = px(cx - box_w / 4.0),
                b = px(cx + box_w / 4.0),
                yy = px(y(v))
            );
        }
        let _ = writeln!(
            s,
            r#"<rect class="box" x="{x}" y="{top}" width="{w}" height="{h}" fill="lightsteelblue" stroke="black"/>"#,
            x = px(x0),
            top = px(y(g.q3)),
            w = px(box_w),
            h = px(y(g.q1) - y(g.q3))
        );
        let _ = writeln!(
            s,
            r#"<line class="median" x1="{a}" y1="{yy}" x2="{b}" y2="{yy}" stroke="black" stroke-width="2"/>"#,
            a = px(x0),
            b = px(x1),
            yy = px(y(g.median))
        );
        for &o in &g.outliers {
            let _ = writeln!(
                s,
                r#"<circle class="outlier" cx="{}" cy="{}" r="3" fill="none" stroke="black"/>"#,
                px(cx),
                px(y(o))
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{} (n={})</text>"#,
            px(cx),
            px(HEIGHT - BOTTOM + 16.0),
            escape(&fmt_num(g.value)),
            g.n
        );
        let _ = writeln!(s, "</g>");
    }
    let _ = writeln!(s, "</svg>");
    Ok(s)
}
