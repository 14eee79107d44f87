//! Minimal deterministic SVG line charts.

use std::fmt::Write;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 450.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 70.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 55.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Left,
    Right,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    /// Gaps (`None`) break the polyline.
    pub values: Vec<Option<f64>>,
    pub axis: Axis,
}

#[derive(Debug, Clone)]
pub struct Band {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Default)]
pub struct LineChart {
    pub title: String,
    pub x_label: String,
    pub left_label: String,
    pub right_label: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
}

#[derive(Clone, Copy)]
struct Range {
    lo: f64,
    hi: f64,
}

impl Range {
    fn of<'a>(values: impl Iterator<Item = &'a f64>) -> Option<Range> {
        let mut r: Option<Range> = None;
        for &v in values {
            r = Some(match r {
                None => Range { lo: v, hi: v },
                Some(r) => Range { lo: r.lo.min(v), hi: r.hi.max(v) },
            });
        }
        r.map(|r| {
            if r.hi - r.lo < 1e-12 {
                Range { lo: r.lo - 0.5, hi: r.hi + 0.5 }
            } else {
                r
            }
        })
    }

    fn to_y(self, v: f64) -> f64 {
        let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        MARGIN_TOP + plot_h * (1.0 - (v - self.lo) / (self.hi - self.lo))
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl LineChart {
    fn axis_range(&self, axis: Axis) -> Option<Range> {
        Range::of(
            self.series
                .iter()
                .filter(|s| s.axis == axis)
                .flat_map(|s| s.values.iter().flatten()),
        )
    }

    fn x_len(&self) -> usize {
        self.series.iter().map(|s| s.values.len()).max().unwrap_or(0)
    }

    fn to_x(&self, t: f64) -> f64 {
        let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let span = (self.x_len().max(2) - 1) as f64;
        MARGIN_LEFT + plot_w * t / span
    }

    pub fn render(&self) -> String {
        let mut svg = String::new();
        let plot_bottom = HEIGHT - MARGIN_BOTTOM;
        let plot_right = WIDTH - MARGIN_RIGHT;
        let _ = writeln!(
            svg,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );

        for (i, band) in self.bands.iter().enumerate() {
            let x0 = self.to_x(band.start as f64);
            let x1 = self.to_x(band.end as f64);
            let color = PALETTE[i % PALETTE.len()];
            let _ = writeln!(
                svg,
                r#"<rect x="{x0:.2}" y="{MARGIN_TOP:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.12"/>"#,
                (x1 - x0).max(1.0),
                plot_bottom - MARGIN_TOP
            );
            let _ = writeln!(
                svg,
                r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{color}">{}</text>"#,
                x0 + 2.0,
                MARGIN_TOP + 12.0 + 12.0 * (i % 2) as f64,
                escape(&band.label)
            );
        }

        let _ = writeln!(
            svg,
            r#"<rect x="{MARGIN_LEFT:.2}" y="{MARGIN_TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
            plot_right - MARGIN_LEFT,
            plot_bottom - MARGIN_TOP
        );

        let n = self.x_len();
        if n > 0 {
            for k in 0..=5 {
                let t = ((n - 1) as f64 * k as f64 / 5.0).round();
                let x = self.to_x(t);
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x:.2}" y1="{plot_bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{t}</text>"#,
                    plot_bottom + 5.0,
                    plot_bottom + 18.0
                );
            }
        }
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            (MARGIN_LEFT + plot_right) / 2.0,
            HEIGHT - 12.0,
            escape(&self.x_label)
        );

        for (axis, label) in [(Axis::Left, &self.left_label), (Axis::Right, &self.right_label)] {
            let Some(range) = self.axis_range(axis) else {
                continue;
            };
            let (x, anchor, dx) = match axis {
                Axis::Left => (MARGIN_LEFT, "end", -6.0),
                Axis::Right => (plot_right, "start", 6.0),
            };
            for k in 0..=4 {
                let v = range.lo + (range.hi - range.lo) * k as f64 / 4.0;
                let y = range.to_y(v);
                let _ = writeln!(
                    svg,
                    r#"<text x="{:.2}" y="{:.2}" text-anchor="{anchor}">{v:.3}</text>"#,
                    x + dx,
                    y + 4.0
                );
            }
            let lx = match axis {
                Axis::Left => 16.0,
                Axis::Right => WIDTH - 12.0,
            };
            let ly = (MARGIN_TOP + plot_bottom) / 2.0;
            let _ = writeln!(
                svg,
                r#"<text x="{lx:.2}" y="{ly:.2}" text-anchor="middle" transform="rotate(-90 {lx:.2} {ly:.2})">{}</text>"#,
                escape(label)
            );
        }

        for (i, series) in self.series.iter().enumerate() {
            let Some(range) = self.axis_range(series.axis) else {
                continue;
            };
            let color = PALETTE[i % PALETTE.len()];
            let dash = if series.axis == Axis::Right { r#" stroke-dasharray="6 3""# } else { "" };
            let mut segment: Vec<String> = Vec::new();
            let flush = |segment: &mut Vec<String>, svg: &mut String| {
                if segment.len() > 1 {
                    let _ = writeln!(
                        svg,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5"{dash} points="{}"/>"#,
                        segment.join(" ")
                    );
                }
                segment.clear();
            };
            for (t, v) in series.values.iter().enumerate() {
                match v {
                    Some(v) => segment.push(format!("{:.2},{:.2}", self.to_x(t as f64), range.to_y(*v))),
                    None => flush(&mut segment, &mut svg),
                }
            }
            flush(&mut segment, &mut svg);
            let ly = MARGIN_TOP + 14.0 + 14.0 * i as f64;
            let _ = writeln!(
                svg,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.2}" y="{:.2}">{}</text>"#,
                plot_right - 150.0,
                ly - 4.0,
                plot_right - 130.0,
                ly - 4.0,
                plot_right - 125.0,
                ly,
                escape(&series.label)
            );
        }
        svg.push_str("</svg>\n");
        svg
    }
}
