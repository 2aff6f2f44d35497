//! Plain SVG renders: domains with region overlays, density heatmaps, envelope plots.

use std::fmt::Write;

use crate::grid::{GridDomain, Region};

const PX: f64 = 600.0;

/// Level palette for nested links; cycles past its length.
pub const PALETTE: &[&str] = &["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

fn frame(domain: &GridDomain) -> (f64, f64, f64) {
    let w = domain.window;
    let scale = PX / w.width().max(w.height());
    (scale, w.width() * scale, w.height() * scale)
}

fn header(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.1}" height="{height:.1}" viewBox="0 0 {width:.1} {height:.1}">"#
    );
}

/// Horizontal runs of marked cells as rects, y axis pointing up.
fn runs(out: &mut String, domain: &GridDomain, mark: impl Fn(usize) -> Option<String>) {
    let (scale, _, height) = frame(domain);
    let h = domain.spacing * scale;
    for j in 0..domain.ny {
        let mut i = 0;
        while i < domain.nx {
            let Some(fill) = mark(domain.index(i, j)) else {
                i += 1;
                continue;
            };
            let start = i;
            while i < domain.nx && mark(domain.index(i, j)).as_deref() == Some(fill.as_str()) {
                i += 1;
            }
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
                start as f64 * h,
                height - (j + 1) as f64 * h,
                (i - start) as f64 * h,
                h
            );
        }
    }
}

/// The domain in light grey with each overlay region drawn on top in its color.
pub fn domain_svg(domain: &GridDomain, overlays: &[(Region, String)]) -> String {
    let (_, width, height) = frame(domain);
    let mut out = String::new();
    header(&mut out, width, height);
    let mut color: Vec<Option<String>> =
        (0..domain.num_cells()).map(|c| domain.is_inside(c).then(|| "#dddddd".to_string())).collect();
    for (r, col) in overlays {
        for c in r.iter() {
            color[c] = Some(col.clone());
        }
    }
    runs(&mut out, domain, |c| color[c].clone());
    out.push_str("</svg>\n");
    out
}

/// Nested links colored by level.
pub fn links_svg(domain: &GridDomain, links: &[Region]) -> String {
    let overlays: Vec<(Region, String)> =
        links.iter().enumerate().map(|(k, l)| (l.clone(), PALETTE[k % PALETTE.len()].to_string())).collect();
    domain_svg(domain, &overlays)
}

/// Per-cell values on a white-to-red ramp, scaled by the maximum.
pub fn heatmap_svg(domain: &GridDomain, values: &[f64]) -> String {
    let (_, width, height) = frame(domain);
    let top = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let mut out = String::new();
    header(&mut out, width, height);
    runs(&mut out, domain, |c| {
        if !domain.is_inside(c) {
            return None;
        }
        let t = if top > 0.0 { (values[c] / top).clamp(0.0, 1.0) } else { 0.0 };
        // quantized to merge runs
        let g = (255.0 * (1.0 - t)).round() as u8 / 8 * 8;
        Some(format!("#ff{g:02x}{g:02x}"))
    });
    out.push_str("</svg>\n");
    out
}

/// Log-log staircase plot of `(t, s)` points with the diagonal for reference.
pub fn envelope_svg(points: &[(f64, f64)]) -> String {
    let pos: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.0 > 0.0 && p.1 > 0.0).collect();
    let mut out = String::new();
    header(&mut out, PX, PX);
    if pos.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    let lx: Vec<f64> = pos.iter().map(|p| p.0.log10()).collect();
    let ly: Vec<f64> = pos.iter().map(|p| p.1.log10()).collect();
    let lo = lx.iter().chain(&ly).copied().fold(f64::INFINITY, f64::min).floor();
    let hi = lx.iter().chain(&ly).copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(lo + 1.0);
    let m = 40.0;
    let map = |v: f64| m + (v - lo) / (hi - lo) * (PX - 2.0 * m);
    let _ = writeln!(
        out,
        r##"<line x1="{m}" y1="{:.2}" x2="{:.2}" y2="{m}" stroke="#999999" stroke-dasharray="4 4"/>"##,
        PX - m,
        PX - m
    );
    let path: Vec<String> = lx.iter().zip(&ly).map(|(x, y)| format!("{:.2},{:.2}", map(*x), PX - map(*y))).collect();
    let _ = writeln!(out, r##"<polyline points="{}" fill="none" stroke="#d62728"/>"##, path.join(" "));
    let _ = writeln!(out, r#"<text x="{m}" y="{:.0}" font-size="12">log10 t in [{lo}, {hi}]</text>"#, PX - 10.0);
    out.push_str("</svg>\n");
    out
}
