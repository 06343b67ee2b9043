//! Dependency-light static SVG charts: polyline line charts and rect-grid
//! heatmaps. For human inspection only; data files are the byte-exact record.

use std::fmt::Write as _;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

pub struct Series<'a> {
    pub label: &'a str,
    pub color: &'a str,
    pub xs: &'a [f64],
    pub ys: &'a [f64],
}

fn span(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn ticks(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    (0..=count)
        .map(|i| lo + (hi - lo) * i as f64 / count as f64)
        .collect()
}

/// Multi-series line chart.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series<'_>]) -> String {
    let (x_lo, x_hi) = span(series.iter().flat_map(|s| s.xs.iter().copied()));
    let (y_lo, y_hi) = span(series.iter().flat_map(|s| s.ys.iter().copied()));
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let x_of = |x: f64| MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let y_of = |y: f64| MARGIN_T + (y_hi - y) / (y_hi - y_lo) * plot_h;

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    );
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>",
        WIDTH / 2.0
    );
    // axes
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>"
    );
    for tx in ticks(x_lo, x_hi, 5) {
        let px = x_of(tx);
        let _ = write!(
            out,
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"black\"/>\n\
             <text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"middle\">{tx:.4}</text>\n",
            HEIGHT - MARGIN_B,
            HEIGHT - MARGIN_B + 5.0,
            HEIGHT - MARGIN_B + 18.0
        );
    }
    for ty in ticks(y_lo, y_hi, 5) {
        let py = y_of(ty);
        let _ = write!(
            out,
            "<line x1=\"{:.1}\" y1=\"{py:.1}\" x2=\"{MARGIN_L}\" y2=\"{py:.1}\" stroke=\"black\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
             text-anchor=\"end\">{ty:.3}</text>\n",
            MARGIN_L - 5.0,
            MARGIN_L - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{x_label}</text>",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        out,
        "<text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{y_label}</text>",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
    // series + legend
    for (i, s) in series.iter().enumerate() {
        let mut points = String::new();
        for (x, y) in s.xs.iter().zip(s.ys) {
            let _ = write!(points, "{:.2},{:.2} ", x_of(*x), y_of(*y));
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\"/>",
            points.trim_end(),
            s.color
        );
        let ly = MARGIN_T + 16.0 + 18.0 * i as f64;
        let _ = write!(
            out,
            "<line x1=\"{:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\" \
             stroke-width=\"2\"/>\n\
             <text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            MARGIN_L + plot_w - 150.0,
            MARGIN_L + plot_w - 120.0,
            s.color,
            MARGIN_L + plot_w - 112.0,
            ly + 4.0,
            s.label
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Heatmap over a (row value × time) grid with a linear blue–white–red map.
pub fn heatmap(
    title: &str,
    x_label: &str,
    y_label: &str,
    times: &[f64],
    row_values: &[f64],
    rows: &[Vec<f64>],
    value_range: (f64, f64),
) -> String {
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let (v_lo, v_hi) = value_range;
    let n_rows = rows.len().max(1);
    let n_cols = times.len().max(1);
    // cap the rect count so sweeping at 1 ns output stays lightweight
    let col_stride = (n_cols / 400).max(1);
    let cell_h = plot_h / n_rows as f64;

    let mut out = String::new();
    let _ = write!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
         viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\" \
         text-anchor=\"middle\">{title}</text>\n",
        WIDTH / 2.0
    );
    for (r, row) in rows.iter().enumerate() {
        let y = MARGIN_T + plot_h - (r + 1) as f64 * cell_h;
        for c0 in (0..row.len()).step_by(col_stride) {
            let c1 = (c0 + col_stride).min(row.len());
            let mean: f64 = row[c0..c1].iter().sum::<f64>() / (c1 - c0) as f64;
            let x = MARGIN_L + c0 as f64 / n_cols as f64 * plot_w;
            let w = (c1 - c0) as f64 / n_cols as f64 * plot_w;
            let t = ((mean - v_lo) / (v_hi - v_lo)).clamp(0.0, 1.0);
            // blue (low) through white to red (high)
            let (red, green, blue) = if t < 0.5 {
                let u = t * 2.0;
                ((255.0 * u) as u8, (255.0 * u) as u8, 255u8)
            } else {
                let u = (1.0 - t) * 2.0;
                (255u8, (255.0 * u) as u8, (255.0 * u) as u8)
            };
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{:.2}\" height=\"{:.2}\" \
                 fill=\"rgb({red},{green},{blue})\"/>",
                w + 0.5,
                cell_h + 0.5
            );
        }
    }
    // frame and tick labels
    let _ = writeln!(
        out,
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w:.1}\" height=\"{plot_h:.1}\" \
         fill=\"none\" stroke=\"black\"/>"
    );
    if let (Some(&t0), Some(&t1)) = (times.first(), times.last()) {
        for (frac, tv) in [(0.0, t0), (0.5, 0.5 * (t0 + t1)), (1.0, t1)] {
            let px = MARGIN_L + frac * plot_w;
            let _ = writeln!(
                out,
                "<text x=\"{px:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"middle\">{tv:.0}</text>",
                HEIGHT - MARGIN_B + 18.0
            );
        }
    }
    if let (Some(&r0), Some(&r1)) = (row_values.first(), row_values.last()) {
        for (frac, rv) in [(0.0, r0), (1.0, r1)] {
            let py = MARGIN_T + plot_h - frac * plot_h;
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{py:.1}\" font-family=\"sans-serif\" font-size=\"11\" \
                 text-anchor=\"end\">{rv:.5}</text>",
                MARGIN_L - 8.0
            );
        }
    }
    let _ = write!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">{x_label}</text>\n\
         <text x=\"18\" y=\"{:.1}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {:.1})\">{y_label}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0
    );
    out.push_str("</svg>\n");
    out
}
