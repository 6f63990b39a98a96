//! Static SVG line plots. Infinite samples break a polyline into pieces.

use std::fmt::Write;

use israte::ExtReal;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN: f64 = 56.0;

pub struct Series {
    pub label: String,
    pub color: &'static str,
    pub dashed: bool,
    pub points: Vec<(f64, ExtReal)>,
}

/// Shaded region between two envelopes, drawn under the series.
pub struct Band {
    pub color: &'static str,
    pub points: Vec<(f64, ExtReal, ExtReal)>,
}

pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub bands: Vec<Band>,
    /// Optional cap on the y range, so one steep curve does not flatten the rest.
    pub y_max: Option<f64>,
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        let y = y.clamp(self.y0, self.y1);
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn segments(points: &[(f64, ExtReal)]) -> Vec<Vec<(f64, f64)>> {
    let mut out = vec![];
    let mut cur = vec![];
    for &(x, v) in points {
        match v.finite() {
            Some(y) => cur.push((x, y)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

impl Plot {
    fn frame(&self) -> Frame {
        let xs = self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
        let (x0, x1) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
        let ys = self.series.iter().flat_map(|s| s.points.iter().filter_map(|p| p.1.finite()));
        let (mut y0, mut y1) = ys.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), y| (a.min(y), b.max(y)));
        if let Some(cap) = self.y_max {
            y1 = y1.min(cap);
        }
        if !y0.is_finite() || !y1.is_finite() {
            (y0, y1) = (0.0, 1.0);
        }
        if y1 - y0 < 1e-9 {
            y1 = y0 + 1.0;
        }
        let (x0, x1) = if x0.is_finite() && x1 > x0 { (x0, x1) } else { (0.0, 1.0) };
        Frame { x0, x1, y0, y1 }
    }

    pub fn to_svg(&self) -> String {
        let f = self.frame();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
        let _ = writeln!(
            s,
            r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
            WIDTH / 2.0,
            esc(&self.title)
        );
        self.axes(&mut s, &f);
        for band in &self.bands {
            for piece in band_pieces(&band.points) {
                let mut d = String::new();
                for (k, &(x, lo, _)) in piece.iter().enumerate() {
                    let _ = write!(d, "{}{:.2},{:.2} ", if k == 0 { "M" } else { "L" }, f.px(x), f.py(lo));
                }
                for &(x, _, hi) in piece.iter().rev() {
                    let _ = write!(d, "L{:.2},{:.2} ", f.px(x), f.py(hi));
                }
                let _ = writeln!(s, r#"<path d="{}Z" fill="{}" fill-opacity="0.18" stroke="none"/>"#, d, band.color);
            }
        }
        for series in &self.series {
            let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            for seg in segments(&series.points) {
                let pts: Vec<String> = seg.iter().map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
                let _ = writeln!(
                    s,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.8"{dash}/>"#,
                    pts.join(" "),
                    series.color
                );
            }
        }
        for (k, series) in self.series.iter().enumerate() {
            let y = MARGIN + 6.0 + 16.0 * k as f64;
            let x = WIDTH - MARGIN - 170.0;
            let dash = if series.dashed { r#" stroke-dasharray="6,4""# } else { "" };
            let _ = writeln!(
                s,
                r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="1.8"{dash}/><text x="{}" y="{}">{}</text>"#,
                x + 24.0,
                series.color,
                x + 30.0,
                y + 4.0,
                esc(&series.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }

    fn axes(&self, s: &mut String, f: &Frame) {
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        let _ =
            writeln!(s, r#"<rect x="{l}" y="{t}" width="{}" height="{}" fill="none" stroke="black"/>"#, r - l, b - t);
        for k in 0..=4 {
            let u = k as f64 / 4.0;
            let x = f.x0 + u * (f.x1 - f.x0);
            let y = f.y0 + u * (f.y1 - f.y0);
            let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{}</text>"#, f.px(x), b + 16.0, tick(x));
            let _ =
                writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, l - 6.0, f.py(y) + 4.0, tick(y));
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 14.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0,
            esc(&self.y_label)
        );
    }
}

fn band_pieces(points: &[(f64, ExtReal, ExtReal)]) -> Vec<Vec<(f64, f64, f64)>> {
    let mut out = vec![];
    let mut cur = vec![];
    for &(x, lo, hi) in points {
        match (lo.finite(), hi.finite()) {
            (Some(a), Some(b)) => cur.push((x, a, b)),
            _ if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            _ => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn tick(v: f64) -> String {
    let r = (v * 100.0).round() / 100.0;
    if r == 0.0 {
        "0".into()
    } else {
        format!("{r}")
    }
}

fn esc(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinite_samples_split_the_polyline() {
        let pts = vec![
            (0.0, ExtReal::from(1.0)),
            (1.0, ExtReal::from(2.0)),
            (2.0, ExtReal::PosInf),
            (3.0, ExtReal::from(1.0)),
            (4.0, ExtReal::from(0.5)),
        ];
        assert_eq!(segments(&pts).len(), 2);
        let plot = Plot {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { label: "f".into(), color: "black", dashed: false, points: pts }],
            bands: vec![],
            y_max: None,
        };
        let svg = plot.to_svg();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn all_infinite_plot_is_still_valid() {
        let plot = Plot {
            title: "inf".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                label: "f".into(),
                color: "black",
                dashed: false,
                points: vec![(0.0, ExtReal::PosInf), (1.0, ExtReal::PosInf)],
            }],
            bands: vec![],
            y_max: None,
        };
        let svg = plot.to_svg();
        assert!(!svg.contains("<polyline"));
        assert!(!svg.contains("NaN"));
    }
}
