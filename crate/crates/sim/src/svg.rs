//! Minimal self-contained SVG line charts (one series per scheduler or
//! class), with fixed axes, tick labels, markers, and a legend. No external
//! plotting dependency; output is deterministic.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 78.0;
const MARGIN_R: f64 = 24.0;
const MARGIN_T: f64 = 48.0;
const MARGIN_B: f64 = 58.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

fn esc(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(min: f64, max: f64, target: usize) -> Vec<f64> {
    if !(max > min) {
        return vec![min];
    }
    let raw_step = (max - min) / target as f64;
    let mag = 10f64.powf(raw_step.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| (max - min) / s <= target as f64)
        .unwrap_or(mag * 10.0);
    let first = (min / step).ceil() * step;
    let mut ticks = Vec::new();
    let mut t = first;
    while t <= max + step * 1e-9 {
        // Snap tiny float residue back onto the grid.
        ticks.push((t / step).round() * step);
        t += step;
    }
    ticks
}

fn fmt_tick(v: f64) -> String {
    if v == v.round() && v.abs() < 1e9 {
        format!("{}", v as i64)
    } else {
        let s = format!("{v:.4}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

/// Renders one line chart. Axis ranges cover the data; the y axis is
/// anchored at zero for non-negative data.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let points: Vec<(f64, f64)> = series.iter().flat_map(|s| s.points.iter().copied()).collect();
    let (x_min, x_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(x, _)| (lo.min(x), hi.max(x)));
    let (mut y_min, mut y_max) = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, y)| (lo.min(y), hi.max(y)));
    let (x_min, x_max) = if points.is_empty() { (0.0, 1.0) } else { (x_min, x_max) };
    if points.is_empty() {
        y_min = 0.0;
        y_max = 1.0;
    }
    if y_min >= 0.0 {
        y_min = 0.0;
    }
    if y_max <= y_min {
        y_max = y_min + 1.0;
    }
    y_max *= 1.05;
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };

    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let px = |x: f64| MARGIN_L + (x - x_min) / x_span * plot_w;
    let py = |y: f64| MARGIN_T + plot_h - (y - y_min) / (y_max - y_min) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="26" text-anchor="middle" font-family="sans-serif" font-size="16" font-weight="bold">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    );

    // Gridlines and ticks.
    for t in nice_ticks(y_min, y_max, 6) {
        let y = py(t);
        let _ = writeln!(
            s,
            r##"<line x1="{MARGIN_L:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="#dddddd" stroke-width="1"/>"##,
            WIDTH - MARGIN_R
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            MARGIN_L - 6.0,
            y + 4.0,
            fmt_tick(t)
        );
    }
    for t in nice_ticks(x_min, x_max, 8) {
        let x = px(t);
        let y0 = HEIGHT - MARGIN_B;
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{y0:.1}" x2="{x:.1}" y2="{:.1}" stroke="#000000" stroke-width="1"/>"##,
            y0 + 4.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{x:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 18.0,
            fmt_tick(t)
        );
    }

    // Axes.
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_L:.1}" y1="{MARGIN_T:.1}" x2="{MARGIN_L:.1}" y2="{:.1}" stroke="black" stroke-width="1.5"/>"#,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        s,
        r#"<line x1="{MARGIN_L:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="black" stroke-width="1.5"/>"#,
        HEIGHT - MARGIN_B,
        WIDTH - MARGIN_R,
        HEIGHT - MARGIN_B
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        MARGIN_L + (WIDTH - MARGIN_L - MARGIN_R) / 2.0,
        HEIGHT - 14.0,
        esc(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.1}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 20 {:.1})">{}</text>"#,
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        esc(y_label)
    );

    // Series.
    for (i, line) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut path = String::new();
        for (j, &(x, y)) in line.points.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2} ", if j == 0 { "M" } else { "L" }, px(x), py(y));
        }
        if !line.points.is_empty() {
            let _ = writeln!(
                s,
                r#"<path d="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                path.trim_end()
            );
        }
        for &(x, y) in &line.points {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.2}" cy="{:.2}" r="3.2" fill="{color}"/>"#,
                px(x),
                py(y)
            );
        }
        // Legend.
        let lx = MARGIN_L + 12.0;
        let ly = MARGIN_T + 10.0 + i as f64 * 18.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#,
            lx + 22.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="12">{}</text>"#,
            lx + 28.0,
            ly + 4.0,
            esc(&line.name)
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<Series> {
        vec![
            Series {
                name: "apeps".to_string(),
                points: vec![(2.0, 0.1), (4.0, 0.3), (6.0, 0.5)],
            },
            Series {
                name: "pbs".to_string(),
                points: vec![(2.0, 0.08), (4.0, 0.2), (6.0, 0.3)],
            },
        ]
    }

    #[test]
    fn chart_contains_labels_and_series() {
        let svg = line_chart("MSS Vs Utilization", "MSS", "Utilization", &sample());
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("MSS Vs Utilization"));
        assert!(svg.contains("apeps"));
        assert!(svg.contains("pbs"));
        assert_eq!(svg.matches("<path").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 6);
        assert!(svg.ends_with("</svg>\n"));
    }

    #[test]
    fn chart_is_deterministic() {
        let a = line_chart("t", "x", "y", &sample());
        let b = line_chart("t", "x", "y", &sample());
        assert_eq!(a, b);
    }

    #[test]
    fn empty_series_still_renders() {
        let svg = line_chart("empty", "x", "y", &[]);
        assert!(svg.contains("</svg>"));
    }

    #[test]
    fn labels_are_escaped() {
        let svg = line_chart("a < b & c", "x", "y", &[]);
        assert!(svg.contains("a &lt; b &amp; c"));
    }
}
