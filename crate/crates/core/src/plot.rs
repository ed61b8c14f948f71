//! Self-contained SVG rendering of sweep results: BER on a log axis over
//! the IDS probability grid, one series per (scheme, erasure rate) pair.
//! No drawing dependencies; the output is deterministic for equal inputs.

use std::fmt::Write as _;

use crate::harness::ResultRow;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 58.0;
const PALETTE: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
];

struct Point {
    p_ids: f64,
    log_ber: f64,
    /// True when no errors were observed and the value is the plotting
    /// floor 0.5 / total_bits rather than a measurement.
    floored: bool,
}

struct Series {
    label: String,
    points: Vec<Point>,
}

fn collect_series(rows: &[ResultRow]) -> Vec<Series> {
    let mut series: Vec<(String, Vec<Point>)> = Vec::new();
    for row in rows {
        let label = format!("{} p_e={}", row.scheme, row.p_e);
        let (ber, floored) = if row.bit_errors == 0 {
            (0.5 / row.total_bits.max(1) as f64, true)
        } else {
            (row.ber, false)
        };
        let point = Point {
            p_ids: row.p_ids,
            log_ber: ber.log10(),
            floored,
        };
        match series.iter_mut().find(|(l, _)| *l == label) {
            Some((_, pts)) => pts.push(point),
            None => series.push((label, vec![point])),
        }
    }
    series
        .into_iter()
        .map(|(label, mut points)| {
            points.sort_by(|a, b| a.p_ids.total_cmp(&b.p_ids));
            Series { label, points }
        })
        .collect()
}

/// Render result rows to an SVG document string.
pub fn render_svg(rows: &[ResultRow], title: &str) -> String {
    let series = collect_series(rows);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">{}</text>",
        WIDTH / 2.0,
        escape(title)
    );
    if series.is_empty() {
        svg.push_str("<text x=\"360\" y=\"240\" text-anchor=\"middle\">no data</text>\n</svg>\n");
        return svg;
    }

    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.p_ids))
        .collect();
    let lys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.log_ber))
        .collect();
    let (mut x0, mut x1) = min_max(&xs);
    if x0 == x1 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let (ly_min, ly_max) = min_max(&lys);
    let (ey0, ey1) = (
        ly_min.floor() as i64,
        (ly_max.ceil() as i64).max(ly_min.floor() as i64 + 1),
    );

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = |x: f64| MARGIN_L + (x - x0) / (x1 - x0) * plot_w;
    let sy = |ly: f64| MARGIN_T + (1.0 - (ly - ey0 as f64) / (ey1 - ey0) as f64) * plot_h;

    // Frame and horizontal decade gridlines.
    let _ = writeln!(
        svg,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>"
    );
    for e in ey0..=ey1 {
        let y = sy(e as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"#ddd\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">1e{e}</text>",
            MARGIN_L + plot_w,
            MARGIN_L - 8.0,
            y + 4.0
        );
    }
    // One x tick per distinct grid value.
    let mut ticks = xs.clone();
    ticks.sort_by(f64::total_cmp);
    ticks.dedup();
    for &t in &ticks {
        let x = sx(t);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333\"/>\n\
             <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{t}</text>",
            MARGIN_T + plot_h,
            MARGIN_T + plot_h + 5.0,
            MARGIN_T + plot_h + 20.0
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">p_ids</text>\n\
         <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">BER</text>",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 14.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );

    let mut any_floored = false;
    for (si, s) in series.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        if s.points.len() > 1 {
            let coords: Vec<String> = s
                .points
                .iter()
                .map(|p| format!("{:.2},{:.2}", sx(p.p_ids), sy(p.log_ber)))
                .collect();
            let _ = writeln!(
                svg,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
                coords.join(" ")
            );
        }
        for p in &s.points {
            any_floored |= p.floored;
            let fill = if p.floored { "none" } else { color };
            let _ = writeln!(
                svg,
                "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"4\" fill=\"{fill}\" stroke=\"{color}\" \
                 stroke-width=\"1.5\"/>",
                sx(p.p_ids),
                sy(p.log_ber)
            );
        }
        let ly = MARGIN_T + 14.0 + 18.0 * si as f64;
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{color}\" \
             stroke-width=\"1.5\"/>\n\
             <circle cx=\"{:.2}\" cy=\"{ly:.2}\" r=\"4\" fill=\"{color}\"/>\n\
             <text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            MARGIN_L + plot_w + 12.0,
            MARGIN_L + plot_w + 34.0,
            MARGIN_L + plot_w + 23.0,
            MARGIN_L + plot_w + 40.0,
            ly + 4.0,
            escape(&s.label)
        );
    }
    if any_floored {
        let _ = writeln!(
            svg,
            "<text x=\"{MARGIN_L}\" y=\"{:.2}\" fill=\"#555\">open markers: no errors observed; \
             plotted at 0.5 / total_bits</text>",
            HEIGHT - 2.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(rows: &[ResultRow], title: &str, path: &std::path::Path) -> std::io::Result<()> {
    std::fs::write(path, render_svg(rows, title))
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    (lo, hi)
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
