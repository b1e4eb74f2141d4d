//! Minimal log-log line plot written as SVG text.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogLogPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    /// Printed in the upper-left corner, e.g. a fitted slope.
    pub annotation: Option<String>,
}

/// Powers of ten covering `[lo, hi]`, as exponents.
pub fn decade_ticks(lo: f64, hi: f64) -> Vec<i32> {
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    (a..=b.max(a + 1)).collect()
}

struct Axis {
    lo: f64,
    hi: f64,
    pixel_lo: f64,
    pixel_hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, pixel_lo: f64, pixel_hi: f64) -> (Self, Vec<i32>) {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| *v > 0.0 && v.is_finite()) {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.1, 1.0);
        }
        let ticks = decade_ticks(lo, hi);
        let axis = Axis {
            lo: 10f64.powi(ticks[0]),
            hi: 10f64.powi(*ticks.last().expect("at least two ticks")),
            pixel_lo,
            pixel_hi,
        };
        (axis, ticks)
    }

    fn map(&self, v: f64) -> f64 {
        let t = (v.log10() - self.lo.log10()) / (self.hi.log10() - self.lo.log10());
        self.pixel_lo + t * (self.pixel_hi - self.pixel_lo)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

impl LogLogPlot {
    pub fn render(&self) -> String {
        let all = || self.series.iter().flat_map(|s| s.points.iter());
        let (xa, xticks) = Axis::new(all().map(|p| p.0), MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (ya, yticks) = Axis::new(all().map(|p| p.1), HEIGHT - MARGIN_BOTTOM, MARGIN_TOP);
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<g class="axes" stroke="black"><line x1="{l}" y1="{b}" x2="{r}" y2="{b}"/><line x1="{l}" y1="{b}" x2="{l}" y2="{t}"/></g>"#,
            l = MARGIN_LEFT,
            r = WIDTH - MARGIN_RIGHT,
            b = HEIGHT - MARGIN_BOTTOM,
            t = MARGIN_TOP
        );
        for e in &xticks {
            let x = xa.map(10f64.powi(*e));
            let _ = writeln!(
                out,
                r#"<g class="xtick"><line x1="{x:.2}" y1="{b}" x2="{x:.2}" y2="{b2}" stroke="black"/><text x="{x:.2}" y="{ty}" text-anchor="middle">1e{e}</text></g>"#,
                b = HEIGHT - MARGIN_BOTTOM,
                b2 = HEIGHT - MARGIN_BOTTOM + 6.0,
                ty = HEIGHT - MARGIN_BOTTOM + 20.0
            );
        }
        for e in &yticks {
            let y = ya.map(10f64.powi(*e));
            let _ = writeln!(
                out,
                r#"<g class="ytick"><line x1="{l2}" y1="{y:.2}" x2="{l}" y2="{y:.2}" stroke="black"/><text x="{tx}" y="{y:.2}" text-anchor="end" dominant-baseline="middle">1e{e}</text></g>"#,
                l = MARGIN_LEFT,
                l2 = MARGIN_LEFT - 6.0,
                tx = MARGIN_LEFT - 10.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{y}" text-anchor="middle" transform="rotate(-90 20 {y})">{}</text>"#,
            escape(&self.y_label),
            y = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0
        );
        for (k, s) in self.series.iter().enumerate() {
            let color = COLORS[k % COLORS.len()];
            let pts: Vec<String> = s
                .points
                .iter()
                .map(|(x, y)| format!("{:.2},{:.2}", xa.map(*x), ya.map(*y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline class="series" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                pts.join(" ")
            );
            for p in &pts {
                let (x, y) = p.split_once(',').expect("formatted pair");
                let _ = writeln!(out, r#"<circle cx="{x}" cy="{y}" r="3" fill="{color}"/>"#);
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" fill="{color}" text-anchor="end">{}</text>"#,
                WIDTH - MARGIN_RIGHT - 10.0,
                HEIGHT - MARGIN_BOTTOM - 15.0 - 16.0 * k as f64,
                escape(&s.label)
            );
        }
        if let Some(a) = &self.annotation {
            let _ = writeln!(
                out,
                r#"<text class="annotation" x="{}" y="{}">{}</text>"#,
                MARGIN_LEFT + 10.0,
                MARGIN_TOP + 16.0,
                escape(a)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
