//! Minimal SVG line plots: polylines, labelled markers, framed axes.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub colour: &'static str,
    pub points: Vec<(f64, f64)>,
}

pub struct Marker {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub markers: Vec<Marker>,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let pts = self
            .series
            .iter()
            .flat_map(|s| s.points.iter().copied())
            .chain(self.markers.iter().map(|m| (m.x, m.y)));
        let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
        for (x, y) in pts.filter(|(x, y)| x.is_finite() && y.is_finite()) {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        if x0 > x1 {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
            (lo - d, hi + d)
        };
        let (x0, x1) = pad(x0, x1);
        let (y0, y1) = pad(y0, y1);
        (x0, x1, y0, y1)
    }

    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
        let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(
            out,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        let _ = writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{:.3}" height="{:.3}" fill="none" stroke="black"/>"#,
            WIDTH - 2.0 * MARGIN,
            HEIGHT - 2.0 * MARGIN
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="30" text-anchor="middle" font-size="14">{}</text>"#,
            WIDTH / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 15.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="15" y="{:.3}" text-anchor="middle" transform="rotate(-90 15 {:.3})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            escape(&self.y_label)
        );
        for (lo, hi, at_x) in [(x0, x1, true), (y0, y1, false)] {
            for t in 0..=4 {
                let v = lo + (hi - lo) * t as f64 / 4.0;
                if at_x {
                    let _ = writeln!(
                        out,
                        r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{v:.3}</text>"#,
                        sx(v),
                        HEIGHT - MARGIN + 16.0
                    );
                } else {
                    let _ = writeln!(
                        out,
                        r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{v:.3}</text>"#,
                        MARGIN - 6.0,
                        sy(v) + 4.0
                    );
                }
            }
        }
        for (k, s) in self.series.iter().enumerate() {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|(x, y)| x.is_finite() && y.is_finite())
                .map(|&(x, y)| format!("{:.3},{:.3}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                s.colour,
                pts.join(" ")
            );
            let ly = MARGIN + 16.0 + 16.0 * k as f64;
            let lx = WIDTH - MARGIN - 120.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="{}" stroke-width="1.5"/>"#,
                ly - 4.0,
                lx + 20.0,
                ly - 4.0,
                s.colour
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{ly:.3}">{}</text>"#,
                lx + 26.0,
                escape(&s.label)
            );
        }
        for m in &self.markers {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.3}" cy="{:.3}" r="3" fill="black"/>"#,
                sx(m.x),
                sy(m.y)
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.3}" y="{:.3}">{}</text>"#,
                sx(m.x) + 5.0,
                sy(m.y) - 5.0,
                escape(&m.label)
            );
        }
        out.push_str("</svg>\n");
        out
    }
}
