//! Polyline overlay of contour polygons with axis ticks.

use std::fmt::Write;

pub struct Layer<'a> {
    pub label: &'a str,
    pub stroke: &'a str,
    pub vertices: &'a [[f64; 2]],
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;

/// Tick positions at 1, 2 or 5 times a power of ten, about `target` of them.
pub fn nice_ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    let raw = (hi - lo) / target.max(1) as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn bounds(layers: &[Layer]) -> [f64; 4] {
    let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
    for v in layers.iter().flat_map(|l| l.vertices) {
        b[0] = b[0].min(v[0]);
        b[1] = b[1].max(v[0]);
        b[2] = b[2].min(v[1]);
        b[3] = b[3].max(v[1]);
    }
    for axis in [0, 2] {
        let pad = 0.05 * (b[axis + 1] - b[axis]).max(1e-9);
        b[axis] -= pad;
        b[axis + 1] += pad;
    }
    b
}

pub fn render(layers: &[Layer], x_label: &str, y_label: &str) -> String {
    let [x0, x1, y0, y1] = bounds(layers);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);
    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#);
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (left, right, top, bottom) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black" stroke-width="0.8"/>"#, right - left, bottom - top);
    for t in nice_ticks(x0, x1, 8) {
        let x = sx(t);
        let _ = writeln!(out, r#"<line x1="{x:.2}" y1="{bottom}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, bottom + 5.0, bottom + 18.0, tick_label(t));
    }
    for t in nice_ticks(y0, y1, 6) {
        let y = sy(t);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{left}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, left - 5.0, left - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_label}</text>"#, (left + right) / 2.0, HEIGHT - 12.0);
    let _ = writeln!(out, r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{y_label}</text>"#, (top + bottom) / 2.0, (top + bottom) / 2.0);
    for (i, layer) in layers.iter().enumerate() {
        let mut points = String::new();
        for v in layer.vertices.iter().chain(layer.vertices.first()) {
            let _ = write!(points, "{:.2},{:.2} ", sx(v[0]), sy(v[1]));
        }
        let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.2"/>"#, points.trim_end(), layer.stroke);
        let ly = top + 16.0 + 14.0 * i as f64;
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="1.2"/><text x="{:.2}" y="{:.2}">{}</text>"#, left + 10.0, left + 30.0, layer.stroke, left + 36.0, ly + 4.0, layer.label);
    }
    out.push_str("</svg>\n");
    out
}

fn tick_label(t: f64) -> String {
    let s = format!("{t:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_numbers() {
        assert_eq!(nice_ticks(0.0, 10.0, 5), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(nice_ticks(-0.3, 0.3, 3), vec![-0.2, 0.0, 0.2]);
    }

    #[test]
    fn layers_become_closed_polylines() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let svg = render(&[Layer { label: "classical", stroke: "gray", vertices: &sq }], "x", "y");
        assert_eq!(svg.matches("<polyline").count(), 1);
        assert!(svg.contains(r#"stroke="gray""#));
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        let pts: Vec<&str> = line.split('"').nth(1).unwrap().split(' ').collect();
        assert_eq!(pts.len(), 5);
        assert_eq!(pts[0], pts[4]);
    }
}
