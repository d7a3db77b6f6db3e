//! Minimal SVG line plots.

use std::fmt::Write as _;

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<[f64; 2]>,
    /// Draw markers instead of a polyline.
    pub markers: bool,
}

impl Series {
    pub fn line(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self {
            label: label.into(),
            points,
            markers: false,
        }
    }

    pub fn markers(label: impl Into<String>, points: Vec<[f64; 2]>) -> Self {
        Self {
            label: label.into(),
            points,
            markers: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub width: f64,
    pub height: f64,
    /// Keep one unit equal along both axes.
    pub equal_aspect: bool,
    pub series: Vec<Series>,
}

impl Plot {
    pub fn new(title: impl Into<String>) -> Self {
        Self {
            title: title.into(),
            width: 720.0,
            height: 480.0,
            equal_aspect: false,
            series: Vec::new(),
        }
    }

    pub fn push(&mut self, s: Series) -> &mut Self {
        self.series.push(s);
        self
    }

    fn bounds(&self) -> ([f64; 2], [f64; 2]) {
        let mut x = [f64::INFINITY, f64::NEG_INFINITY];
        let mut y = x;
        for p in self.series.iter().flat_map(|s| &s.points) {
            if p[0].is_finite() && p[1].is_finite() {
                x = [x[0].min(p[0]), x[1].max(p[0])];
                y = [y[0].min(p[1]), y[1].max(p[1])];
            }
        }
        if !x[0].is_finite() {
            return ([0.0, 1.0], [0.0, 1.0]);
        }
        let pad = |r: [f64; 2]| {
            let w = (r[1] - r[0]).max(1e-12);
            [r[0] - 0.05 * w, r[1] + 0.05 * w]
        };
        (pad(x), pad(y))
    }

    pub fn render(&self) -> String {
        let margin = 50.0;
        let (xr, yr) = self.bounds();
        let (mut pw, mut ph) = (self.width - 2.0 * margin, self.height - 2.0 * margin);
        if self.equal_aspect {
            let scale = (pw / (xr[1] - xr[0])).min(ph / (yr[1] - yr[0]));
            pw = scale * (xr[1] - xr[0]);
            ph = scale * (yr[1] - yr[0]);
        }
        let sx = |x: f64| margin + (x - xr[0]) / (xr[1] - xr[0]) * pw;
        let sy = |y: f64| margin + ph - (y - yr[0]) / (yr[1] - yr[0]) * ph;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#,
            w = self.width,
            h = self.height
        );
        let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<rect x="{margin}" y="{margin}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="20" text-anchor="middle">{}</text>"#,
            margin + pw / 2.0,
            escape(&self.title)
        );
        for (v, anchor, x, y) in [
            (xr[0], "start", sx(xr[0]), margin + ph + 16.0),
            (xr[1], "end", sx(xr[1]), margin + ph + 16.0),
            (yr[0], "end", margin - 4.0, sy(yr[0])),
            (yr[1], "end", margin - 4.0, sy(yr[1]) + 10.0),
        ] {
            let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}">{v:.3}</text>"#);
        }
        for (k, series) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            if series.markers {
                for p in &series.points {
                    let _ = writeln!(
                        s,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="2" fill="{color}"/>"#,
                        sx(p[0]),
                        sy(p[1])
                    );
                }
            } else {
                // NaN points split the polyline
                for run in series.points.split(|p| !(p[0].is_finite() && p[1].is_finite())) {
                    if run.len() < 2 {
                        continue;
                    }
                    let pts: Vec<String> = run
                        .iter()
                        .map(|p| format!("{:.2},{:.2}", sx(p[0]), sy(p[1])))
                        .collect();
                    let _ = writeln!(
                        s,
                        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                        pts.join(" ")
                    );
                }
            }
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" fill="{color}">{}</text>"#,
                margin + 6.0,
                margin + 14.0 * (k as f64 + 1.0),
                escape(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_well_formed_document() {
        let mut p = Plot::new("a < b");
        p.push(Series::line("u1", vec![[0.0, 0.0], [1.0, 1.0], [f64::NAN, 0.0], [2.0, 0.5], [3.0, 0.0]]));
        p.push(Series::markers("pts", vec![[0.5, 0.5]]));
        let svg = p.render();
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
        assert!(svg.contains("a &lt; b"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 1);
    }
}
