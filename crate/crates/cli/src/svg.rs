//! Minimal SVG emitters with fixed view boxes.

use std::fmt::Write;

const SIZE: f64 = 1000.0;

fn open(out: &mut String, title: &str, stamp: Option<u64>) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {SIZE} {SIZE}" width="{SIZE}" height="{SIZE}">"#
    );
    let _ = writeln!(out, "<title>{title}</title>");
    if let Some(t) = stamp {
        let _ = writeln!(out, "<!-- generated at unix time {t} -->");
    }
    let _ = writeln!(out, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
}

/// One horizontal row of bands per fraction, at height `p/q`.
pub fn butterfly(rows: &[(f64, Vec<[f64; 2]>)], e_range: (f64, f64), row_height: f64, stamp: Option<u64>) -> String {
    let mut out = String::new();
    open(&mut out, "butterfly", stamp);
    let (lo, hi) = e_range;
    let x = |e: f64| (e - lo) / (hi - lo) * SIZE;
    let h = (row_height * SIZE).max(0.5);
    for (alpha, bands) in rows {
        let y = (1.0 - alpha) * SIZE - h / 2.0;
        for b in bands {
            let w = (x(b[1]) - x(b[0])).max(0.5);
            let _ = writeln!(out, r#"<rect x="{:.3}" y="{y:.3}" width="{w:.3}" height="{h:.3}" fill="black"/>"#, x(b[0]));
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Log-log scatter with straight segments, one series per entry.
pub fn loglog(title: &str, series: &[(&str, Vec<(f64, f64)>)], stamp: Option<u64>) -> String {
    let mut out = String::new();
    open(&mut out, title, stamp);
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|(_, s)| s.iter().copied())
        .filter(|(a, b)| *a > 0.0 && *b > 0.0)
        .map(|(a, b)| (a.ln(), b.ln()))
        .collect();
    if pts.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x0, x1) = (fold(f64::min, f64::INFINITY, |p| p.0), fold(f64::max, f64::NEG_INFINITY, |p| p.0));
    let (y0, y1) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1));
    let pad = 0.05 * SIZE;
    let sx = |x: f64| pad + (x - x0) / (x1 - x0).max(1e-12) * (SIZE - 2.0 * pad);
    let sy = |y: f64| SIZE - pad - (y - y0) / (y1 - y0).max(1e-12) * (SIZE - 2.0 * pad);
    for (i, (name, s)) in series.iter().enumerate() {
        let colour = ["black", "crimson", "steelblue", "darkgreen"][i % 4];
        let coords: Vec<String> = s
            .iter()
            .filter(|(a, b)| *a > 0.0 && *b > 0.0)
            .map(|(a, b)| format!("{:.3},{:.3}", sx(a.ln()), sy(b.ln())))
            .collect();
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{colour}"><title>{name}</title></polyline>"#, coords.join(" "));
    }
    out.push_str("</svg>\n");
    out
}
