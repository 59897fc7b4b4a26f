//! Dependency-free SVG line charts for normalized divergence curves.
//!
//! Fixed canvas, fixed per-mode colors, `λ/λ_m` on a [0, 1] axis. Rendering
//! is a pure function of its inputs, so figures are byte-reproducible.

use crate::error::{Error, Result};

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 560.0;
const MARGIN_LEFT: f64 = 72.0;
const MARGIN_RIGHT: f64 = 150.0;
const MARGIN_TOP: f64 = 56.0;
const MARGIN_BOTTOM: f64 = 64.0;

const COLOR_AXIS: &str = "#333333";
const COLOR_GRID: &str = "#dddddd";
const FALLBACK_COLORS: [&str; 6] = [
    "#1f77b4", "#2ca02c", "#ff7f0e", "#d62728", "#9467bd", "#8c564b",
];

fn color_for(label: &str, index: usize) -> &'static str {
    let lower = label.to_ascii_lowercase();
    for (needle, color) in [
        ("ecb", "#1f77b4"),
        ("cbc", "#2ca02c"),
        ("ofb", "#ff7f0e"),
        ("cfb", "#d62728"),
        ("ctr", "#9467bd"),
        ("pcbc", "#8c564b"),
    ] {
        // "pcbc" must win over its "cbc" substring
        if lower.contains(needle) && !(needle == "cbc" && lower.contains("pcbc")) {
            return color;
        }
    }
    FALLBACK_COLORS[index % FALLBACK_COLORS.len()]
}

#[derive(Clone, Debug)]
pub struct CurveSeries {
    pub label: String,
    /// Normalized values `λ(t)/λ_m`, `t = 1..`.
    pub values: Vec<f64>,
}

/// Render one normalized curve per series on a shared horizon.
pub fn render_normalized_curves(series: &[CurveSeries], title: &str) -> Result<String> {
    if series.is_empty() {
        return Err(Error::InvalidParameter("nothing to plot".into()));
    }
    let steps = series[0].values.len();
    if steps == 0 {
        return Err(Error::InvalidParameter("empty curve".into()));
    }
    if series.iter().any(|s| s.values.len() != steps) {
        return Err(Error::Dimension("all curves must share one horizon".into()));
    }

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let x_of = |t: usize| MARGIN_LEFT + (t as f64 - 1.0) / (steps.max(2) as f64 - 1.0) * plot_w;
    let y_of = |v: f64| MARGIN_TOP + (1.0 - v.clamp(0.0, 1.0)) * plot_h;

    let mut svg = String::with_capacity(16 * 1024);
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"17\" fill=\"{COLOR_AXIS}\">{}</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        escape_xml(title)
    ));

    // horizontal grid and y labels at 0.0, 0.2, ... 1.0
    for i in 0..=5 {
        let v = i as f64 / 5.0;
        let y = y_of(v);
        svg.push_str(&format!(
            "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"{COLOR_GRID}\" stroke-width=\"1\"/>\n",
            MARGIN_LEFT + plot_w
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" \
             font-size=\"12\" fill=\"{COLOR_AXIS}\">{v:.1}</text>\n",
            MARGIN_LEFT - 8.0,
            y + 4.0
        ));
    }
    // x ticks
    let tick_count = 6.min(steps);
    for i in 0..tick_count {
        let t = 1 + i * (steps - 1) / (tick_count - 1).max(1);
        let x = x_of(t);
        svg.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" \
             stroke=\"{COLOR_AXIS}\" stroke-width=\"1\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
             font-size=\"12\" fill=\"{COLOR_AXIS}\">{t}</text>\n",
            MARGIN_TOP + plot_h + 20.0
        ));
    }
    // axes
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{MARGIN_TOP:.2}\" x2=\"{MARGIN_LEFT:.2}\" \
         y2=\"{:.2}\" stroke=\"{COLOR_AXIS}\" stroke-width=\"1.5\"/>\n",
        MARGIN_TOP + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{MARGIN_LEFT:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" \
         stroke=\"{COLOR_AXIS}\" stroke-width=\"1.5\"/>\n",
        MARGIN_TOP + plot_h,
        MARGIN_LEFT + plot_w,
        MARGIN_TOP + plot_h
    ));
    // axis labels
    svg.push_str(&format!(
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\" fill=\"{COLOR_AXIS}\">t</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 18.0
    ));
    svg.push_str(&format!(
        "<text x=\"22\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" \
         font-size=\"14\" fill=\"{COLOR_AXIS}\" transform=\"rotate(-90 22 {:.2})\">\
         lambda / lambda_m</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    for (i, s) in series.iter().enumerate() {
        let color = color_for(&s.label, i);
        let points: Vec<String> = s
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| format!("{:.2},{:.2}", x_of(idx + 1), y_of(v)))
            .collect();
        svg.push_str(&format!(
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.8\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        // legend entry
        let ly = MARGIN_TOP + 14.0 + i as f64 * 20.0;
        let lx = MARGIN_LEFT + plot_w + 14.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" \
             stroke=\"{color}\" stroke-width=\"3\"/>\n",
            lx + 22.0
        ));
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             fill=\"{COLOR_AXIS}\">{}</text>\n",
            lx + 28.0,
            ly + 4.0,
            escape_xml(&s.label)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<CurveSeries> {
        vec![
            CurveSeries {
                label: "tea/ecb".into(),
                values: vec![0.6, 0.6, 0.6, 0.6],
            },
            CurveSeries {
                label: "tea/pcbc".into(),
                values: vec![0.9, 0.89, 0.88, 0.88],
            },
        ]
    }

    #[test]
    fn render_is_deterministic() {
        let a = render_normalized_curves(&sample(), "demo").unwrap();
        let b = render_normalized_curves(&sample(), "demo").unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("<svg"));
        assert!(a.contains("polyline"));
        assert!(a.contains("tea/pcbc"));
        assert!(a.ends_with("</svg>\n"));
    }

    #[test]
    fn mode_colors_are_stable() {
        assert_eq!(color_for("xtea/pcbc", 0), "#8c564b");
        assert_eq!(color_for("xtea/cbc", 0), "#2ca02c");
        assert_eq!(color_for("anything", 2), FALLBACK_COLORS[2]);
    }

    #[test]
    fn mixed_horizons_error() {
        let series = vec![
            CurveSeries {
                label: "a".into(),
                values: vec![0.1, 0.2],
            },
            CurveSeries {
                label: "b".into(),
                values: vec![0.1],
            },
        ];
        assert!(render_normalized_curves(&series, "bad").is_err());
        assert!(render_normalized_curves(&[], "empty").is_err());
    }

    #[test]
    fn single_series_renders() {
        let one = vec![CurveSeries {
            label: "only".into(),
            values: vec![0.5; 10],
        }];
        let svg = render_normalized_curves(&one, "single").unwrap();
        assert_eq!(svg.matches("polyline").count(), 1);
    }
}
