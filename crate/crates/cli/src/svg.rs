//! Minimal hand-rolled SVG renderers for the report command.
//!
//! Plain text out, no rendering dependency; coordinates are written with two
//! decimals so repeated runs produce identical bytes.

use std::fmt::Write;

const MARGIN: f64 = 50.0;
const PLOT: f64 = 500.0;

fn header(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\" \
         viewBox=\"0 0 {width:.0} {height:.0}\" font-family=\"sans-serif\" font-size=\"12\">\n"
    )
}

/// Blue-to-white ramp over [0,1]; out-of-range values are clamped.
fn heat_color(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let r = (255.0 * (1.0 - t)) as u8;
    let g = (255.0 * (1.0 - 0.75 * t)) as u8;
    format!("#{r:02x}{g:02x}ff")
}

/// Heatmap of a square matrix of values in [0,1], row 0 at the top.
pub fn heatmap(title: &str, values: &[Vec<f64>]) -> String {
    let n = values.len().max(1);
    let cell = PLOT / n as f64;
    let mut out = header(PLOT + 2.0 * MARGIN, PLOT + 2.0 * MARGIN);
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{title}</text>",
        MARGIN + PLOT / 2.0,
        MARGIN / 2.0
    );
    for (i, row) in values.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"/>",
                MARGIN + j as f64 * cell,
                MARGIN + i as f64 * cell,
                cell,
                cell,
                heat_color(v)
            );
        }
    }
    let _ = writeln!(
        out,
        "  <rect x=\"{MARGIN:.2}\" y=\"{MARGIN:.2}\" width=\"{PLOT:.2}\" height=\"{PLOT:.2}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    out.push_str("</svg>\n");
    out
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Line plot of one curve per (label, points) pair; both axes span [0,1].
pub fn line_plot(title: &str, x_label: &str, y_label: &str, curves: &[(String, Vec<(f64, f64)>)]) -> String {
    let mut out = header(PLOT + 2.0 * MARGIN + 100.0, PLOT + 2.0 * MARGIN);
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{title}</text>",
        MARGIN + PLOT / 2.0,
        MARGIN / 2.0
    );
    let x_px = |x: f64| MARGIN + x.clamp(0.0, 1.0) * PLOT;
    let y_px = |y: f64| MARGIN + (1.0 - y.clamp(0.0, 1.0)) * PLOT;
    for tick in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{tick}</text>",
            x_px(tick),
            MARGIN + PLOT + 20.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{tick}</text>",
            MARGIN - 8.0,
            y_px(tick) + 4.0
        );
    }
    for (idx, (label, points)) in curves.iter().enumerate() {
        let color = PALETTE[idx % PALETTE.len()];
        let mut path = String::new();
        for (x, y) in points {
            let _ = write!(path, "{:.2},{:.2} ", x_px(*x), y_px(*y));
        }
        let _ = writeln!(
            out,
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"2\"/>",
            path.trim_end()
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" fill=\"{color}\">{label}</text>",
            MARGIN + PLOT + 10.0,
            MARGIN + 20.0 * idx as f64 + 20.0
        );
    }
    let _ = writeln!(
        out,
        "  <rect x=\"{MARGIN:.2}\" y=\"{MARGIN:.2}\" width=\"{PLOT:.2}\" height=\"{PLOT:.2}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{x_label}</text>",
        MARGIN + PLOT / 2.0,
        MARGIN + PLOT + 40.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" \
         transform=\"rotate(-90 {:.2} {:.2})\">{y_label}</text>",
        15.0,
        MARGIN + PLOT / 2.0,
        15.0,
        MARGIN + PLOT / 2.0
    );
    out.push_str("</svg>\n");
    out
}

/// Classic silhouette plot: one horizontal bar per sample, grouped by
/// cluster, sorted descending inside each group.
pub fn silhouette(title: &str, groups: &[(usize, Vec<f64>)]) -> String {
    let n: usize = groups.iter().map(|(_, w)| w.len()).sum();
    let bar = (PLOT / n.max(1) as f64).min(12.0);
    let height = MARGIN * 2.0 + bar * n as f64 + 6.0 * groups.len() as f64;
    let mut out = header(PLOT + 2.0 * MARGIN, height);
    let _ = writeln!(out, "  <title>{title}</title>");
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{title}</text>",
        MARGIN + PLOT / 2.0,
        MARGIN / 2.0
    );
    // Widths live in [-1,1]; zero sits mid-plot.
    let x_px = |w: f64| MARGIN + (w.clamp(-1.0, 1.0) + 1.0) / 2.0 * PLOT;
    let mut y = MARGIN;
    for (cluster, widths) in groups {
        let color = PALETTE[cluster % PALETTE.len()];
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">c{cluster}</text>",
            MARGIN - 8.0,
            y + 12.0
        );
        for &w in widths {
            let (x0, x1) = if w >= 0.0 { (x_px(0.0), x_px(w)) } else { (x_px(w), x_px(0.0)) };
            let _ = writeln!(
                out,
                "  <rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\"/>",
                x0,
                y,
                (x1 - x0).max(0.2),
                bar.max(1.0) - 0.5
            );
            y += bar;
        }
        y += 6.0;
    }
    let _ = writeln!(
        out,
        "  <line x1=\"{:.2}\" y1=\"{MARGIN:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
        x_px(0.0),
        x_px(0.0),
        y
    );
    for tick in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{tick}</text>",
            x_px(tick),
            y + 20.0
        );
    }
    out.push_str("</svg>\n");
    out
}
