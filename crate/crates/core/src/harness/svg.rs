//! Minimal SVG plots: axes, scatter points and polylines.

use std::fmt::Write;

const W: f64 = 480.0;
const H: f64 = 480.0;
const PAD: f64 = 48.0;

pub struct Plot {
    title: String,
    xlabel: String,
    ylabel: String,
    xr: (f64, f64),
    yr: (f64, f64),
    body: String,
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    let m = 0.05 * (hi - lo);
    (lo - m, hi + m)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Plot {
    /// Axes sized to fit all of `xs` and `ys`.
    pub fn fit(title: &str, xlabel: &str, ylabel: &str, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            title: title.into(),
            xlabel: xlabel.into(),
            ylabel: ylabel.into(),
            xr: range(xs.iter().copied()),
            yr: range(ys.iter().copied()),
            body: String::new(),
        }
    }

    fn px(&self, x: f64, y: f64) -> (f64, f64) {
        let u = PAD + (x - self.xr.0) / (self.xr.1 - self.xr.0) * (W - 2.0 * PAD);
        let v = H - PAD - (y - self.yr.0) / (self.yr.1 - self.yr.0) * (H - 2.0 * PAD);
        (u, v)
    }

    pub fn scatter(&mut self, pts: &[(f64, f64)], color: &str) -> &mut Self {
        for &(x, y) in pts {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let (u, v) = self.px(x, y);
            let _ =
                writeln!(self.body, r#"<circle cx="{u:.2}" cy="{v:.2}" r="1.6" fill="{color}" fill-opacity="0.6"/>"#);
        }
        self
    }

    pub fn line(&mut self, pts: &[(f64, f64)], color: &str) -> &mut Self {
        let path: Vec<String> = pts
            .iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| {
                let (u, v) = self.px(x, y);
                format!("{u:.2},{v:.2}")
            })
            .collect();
        if path.len() > 1 {
            let _ = writeln!(
                self.body,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        self
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="11">"#
        );
        let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let (x0, y0) = (PAD, H - PAD);
        let _ = writeln!(
            s,
            r#"<rect x="{x0}" y="{PAD}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            W - 2.0 * PAD,
            H - 2.0 * PAD
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.xr.0 + f * (self.xr.1 - self.xr.0);
            let yv = self.yr.0 + f * (self.yr.1 - self.yr.0);
            let (u, _) = self.px(xv, self.yr.0);
            let (_, v) = self.px(self.xr.0, yv);
            let _ = writeln!(s, r#"<line x1="{u:.2}" y1="{y0}" x2="{u:.2}" y2="{}" stroke="black"/>"#, y0 + 4.0);
            let _ = writeln!(s, r#"<text x="{u:.2}" y="{}" text-anchor="middle">{xv:.3}</text>"#, y0 + 16.0);
            let _ = writeln!(s, r#"<line x1="{}" y1="{v:.2}" x2="{x0}" y2="{v:.2}" stroke="black"/>"#, x0 - 4.0);
            let _ = writeln!(s, r#"<text x="{}" y="{v:.2}" text-anchor="end" dy="4">{yv:.3}</text>"#, x0 - 6.0);
        }
        let _ = writeln!(
            s,
            r#"<text x="{}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
            W / 2.0,
            escape(&self.title)
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 10.0,
            escape(&self.xlabel)
        );
        let _ = writeln!(
            s,
            r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(&self.ylabel)
        );
        s.push_str(&self.body);
        s.push_str("</svg>\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_elements() {
        let mut p = Plot::fit("a < b", "x", "y", &[0.0, 1.0], &[0.0, 2.0]);
        p.scatter(&[(0.5, 1.0)], "steelblue").line(&[(0.0, 0.0), (1.0, 2.0)], "black");
        let s = p.render();
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert_eq!(s.matches("<circle").count(), 1);
        assert_eq!(s.matches("<polyline").count(), 1);
        assert!(s.contains("a &lt; b"));
    }
}
