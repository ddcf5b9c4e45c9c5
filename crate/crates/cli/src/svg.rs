//! Static envelope charts: mean line with a one-standard-deviation band.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 360.0;
const PAD: f64 = 48.0;

pub fn envelope_chart(title: &str, years: &[f64], mean: &[f64], std: &[f64]) -> String {
    let lo: Vec<f64> = mean.iter().zip(std).map(|(m, s)| m - s).collect();
    let hi: Vec<f64> = mean.iter().zip(std).map(|(m, s)| m + s).collect();
    let (x0, x1) = (years[0], years[years.len() - 1]);
    let mut y0 = lo.iter().copied().fold(f64::INFINITY, f64::min);
    let mut y1 = hi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if y1 - y0 < 1e-12 * y1.abs().max(1.0) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    let px = |x: f64| PAD + (x - x0) / (x1 - x0).max(1e-12) * (W - 2.0 * PAD);
    let py = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{PAD}" y="24" font-size="14">{}</text>"#,
        escape(title)
    );
    let mut band = String::new();
    for (x, y) in years.iter().zip(&hi) {
        let _ = write!(band, "{:.2},{:.2} ", px(*x), py(*y));
    }
    for (x, y) in years.iter().zip(&lo).rev() {
        let _ = write!(band, "{:.2},{:.2} ", px(*x), py(*y));
    }
    let _ = writeln!(
        s,
        r##"<polygon points="{}" fill="#9ecae1" fill-opacity="0.6"/>"##,
        band.trim_end()
    );
    let line: Vec<String> = years
        .iter()
        .zip(mean)
        .map(|(x, y)| format!("{:.2},{:.2}", px(*x), py(*y)))
        .collect();
    let _ = writeln!(
        s,
        r##"<polyline points="{}" fill="none" stroke="#08519c" stroke-width="2"/>"##,
        line.join(" ")
    );
    let _ = writeln!(
        s,
        r#"<line x1="{PAD}" y1="{b}" x2="{r}" y2="{b}" stroke="black"/><line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{b}" stroke="black"/>"#,
        b = H - PAD,
        r = W - PAD
    );
    let _ = writeln!(s, r#"<text x="{PAD}" y="{}">{x0}</text>"#, H - PAD + 16.0);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="end">{x1}</text>"#,
        W - PAD,
        H - PAD + 16.0
    );
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, H - PAD, short(y0));
    let _ = writeln!(s, r#"<text x="4" y="{}">{}</text>"#, PAD + 4.0, short(y1));
    s.push_str("</svg>\n");
    s
}

fn short(v: f64) -> String {
    format!("{v:.3e}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
