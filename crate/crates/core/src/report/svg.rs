//! Minimal log-log line plot.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 420.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

pub struct Series<'a> {
    pub label: &'a str,
    pub points: Vec<(f64, f64)>,
}

fn decades(lo: f64, hi: f64) -> Vec<f64> {
    let (a, b) = (lo.log10().floor() as i32, hi.log10().ceil() as i32);
    (a..=b).map(|e| 10f64.powi(e)).collect()
}

/// Renders positive-valued series on log-log axes.
pub fn loglog(title: &str, x_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| *x > 0.0 && *y > 0.0);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (1.0, 10.0, 1.0, 10.0);
    }
    // pad a degenerate range
    if x1 <= x0 {
        x1 = x0 * 10.0;
    }
    if y1 <= y0 {
        y1 = y0 * 10.0;
    }
    let (lx0, lx1) = (x0.log10() - 0.05, x1.log10() + 0.05);
    let (ly0, ly1) = (y0.log10() - 0.1, y1.log10() + 0.1);
    let px = |x: f64| MARGIN + (x.log10() - lx0) / (lx1 - lx0) * (W - 2.0 * MARGIN);
    let py = |y: f64| H - MARGIN - (y.log10() - ly0) / (ly1 - ly0) * (H - 2.0 * MARGIN);

    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{title}</text>"#, W / 2.0);
    let _ = writeln!(
        s,
        r#"<path d="M{m} {t} V{b} H{r}" stroke="black" fill="none"/>"#,
        m = MARGIN,
        t = MARGIN,
        b = H - MARGIN,
        r = W - MARGIN
    );
    for t in decades(x0, x1).into_iter().filter(|t| t.log10() >= lx0 && t.log10() <= lx1) {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{}" text-anchor="middle">{t}</text>"#, px(t), H - MARGIN + 16.0);
    }
    for t in decades(y0, y1).into_iter().filter(|t| t.log10() >= ly0 && t.log10() <= ly1) {
        let _ = writeln!(s, r#"<text x="{}" y="{:.1}" text-anchor="end">{t}</text>"#, MARGIN - 6.0, py(t) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{x_label}</text>"#, W / 2.0, H - 16.0);
    for (i, ser) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let d: Vec<String> = ser
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|&(x, y)| format!("{:.1},{:.1}", px(x), py(y)))
            .collect();
        let _ = writeln!(s, r#"<polyline points="{}" stroke="{color}" fill="none" stroke-width="2"/>"#, d.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{color}">{}</text>"#,
            MARGIN + 10.0,
            ser.label
        );
    }
    s.push_str("</svg>\n");
    s
}
