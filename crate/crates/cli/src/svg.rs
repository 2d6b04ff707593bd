//! Minimal static SVG plots.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;
const COLOURS: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// One curve on a log-log plot.
pub struct Curve {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub dashed: bool,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * MARGIN)
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn axes(s: &mut String, frame: &Frame, xlabel: &str, ylabel: &str, log: bool) {
    let (x0, x1) = (frame.px(frame.x.0), frame.px(frame.x.1));
    let (y0, y1) = (frame.py(frame.y.0), frame.py(frame.y.1));
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    let ticks = |lo: f64, hi: f64| -> Vec<f64> {
        if log {
            (lo.ceil() as i64..=hi.floor() as i64).map(|e| e as f64).collect()
        } else {
            let step = (hi - lo) / 4.0;
            (0..=4).map(|i| lo + step * i as f64).collect()
        }
    };
    let label = |v: f64| if log { format!("1e{}", v as i64) } else { format!("{v:.2}") };
    for t in ticks(frame.x.0, frame.x.1) {
        let x = frame.px(t);
        let _ = writeln!(s, r#"<line x1="{x:.2}" y1="{y0:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, y0 + 18.0, label(t));
    }
    for t in ticks(frame.y.0, frame.y.1) {
        let y = frame.py(t);
        let _ = writeln!(s, r#"<line x1="{:.2}" y1="{y:.2}" x2="{x0:.2}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 8.0, y + 4.0, label(t));
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="15" y="{:.2}" text-anchor="middle" transform="rotate(-90 15 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn span(values: impl Iterator<Item = f64>, pad: f64) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        return (lo - 0.5, hi + 0.5);
    }
    (lo - pad * (hi - lo), hi + pad * (hi - lo))
}

/// Log-log plot of several curves; non-positive points are skipped.
pub fn log_log(title: &str, xlabel: &str, ylabel: &str, curves: &[Curve]) -> String {
    let logged: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|c| {
            c.points
                .iter()
                .filter(|(x, y)| *x > 0.0 && *y > 0.0)
                .map(|(x, y)| (x.log10(), y.log10()))
                .collect()
        })
        .collect();
    let all = || logged.iter().flatten();
    let (xl, xh) = span(all().map(|p| p.0), 0.0);
    let (yl, yh) = span(all().map(|p| p.1), 0.05);
    let frame = Frame {
        x: (xl.floor(), xh.ceil()),
        y: (yl.floor(), yh.ceil()),
    };
    let mut s = open(title);
    axes(&mut s, &frame, xlabel, ylabel, true);
    for (i, (curve, pts)) in curves.iter().zip(&logged).enumerate() {
        let colour = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = pts
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let dash = if curve.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" fill="none" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
            path.join(" ")
        );
        if !curve.dashed {
            for &(x, y) in pts {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#,
                    frame.px(x),
                    frame.py(y)
                );
            }
        }
        let ly = MARGIN + 16.0 * i as f64 + 10.0;
        let lx = WIDTH - MARGIN - 150.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{colour}" stroke-width="1.5"{dash}/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&curve.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Scatter plot with an optional covariance ellipse at one standard
/// deviation.
pub fn scatter_with_ellipse(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    points: &[(f64, f64)],
    cov: Option<[[f64; 2]; 2]>,
) -> String {
    let ellipse: Vec<(f64, f64)> = cov.map(ellipse_points).unwrap_or_default();
    let (xl, xh) = span(points.iter().chain(&ellipse).map(|p| p.0), 0.05);
    let (yl, yh) = span(points.iter().chain(&ellipse).map(|p| p.1), 0.05);
    let frame = Frame { x: (xl, xh), y: (yl, yh) };
    let mut s = open(title);
    axes(&mut s, &frame, xlabel, ylabel, false);
    for &(x, y) in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}" fill-opacity="0.5"/>"#,
            frame.px(x),
            frame.py(y),
            COLOURS[0]
        );
    }
    if !ellipse.is_empty() {
        let path: Vec<String> = ellipse
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", frame.px(x), frame.py(y)))
            .collect();
        let _ = writeln!(
            s,
            r#"<polygon points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            path.join(" "),
            COLOURS[1]
        );
    }
    s.push_str("</svg>\n");
    s
}

/// `{L u : |u| = 1}` with `L Lᵀ = cov`.
fn ellipse_points(cov: [[f64; 2]; 2]) -> Vec<(f64, f64)> {
    let l11 = cov[0][0].max(0.0).sqrt();
    let l21 = if l11 > 0.0 { cov[1][0] / l11 } else { 0.0 };
    let l22 = (cov[1][1] - l21 * l21).max(0.0).sqrt();
    (0..=72)
        .map(|i| {
            let t = i as f64 * std::f64::consts::TAU / 72.0;
            let (u, v) = (t.cos(), t.sin());
            (l11 * u, l21 * u + l22 * v)
        })
        .collect()
}
