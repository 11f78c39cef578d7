//! Minimal SVG charts: line series, grouped bars and a ranked bar list.
//!
//! Output depends only on the data; every coordinate is printed with two
//! decimals so identical inputs give identical bytes.

use std::fmt::Write as _;

use crate::CliError;

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 60.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Round tick values covering [lo, hi].
fn ticks(lo: f64, hi: f64, target: usize) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / target as f64;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 2.5, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= target as f64)
        .unwrap_or(10.0 * mag);
    let start = (lo / step).floor() as i64;
    let end = (hi / step).ceil() as i64;
    (start..=end).map(|i| i as f64 * step).collect()
}

fn label(v: f64) -> String {
    let s = if v.abs() >= 100.0 || v == v.trunc() {
        format!("{v:.0}")
    } else if v.abs() >= 1.0 {
        format!("{v:.1}")
    } else {
        format!("{v:.3}")
    };
    if s.starts_with('-') && s[1..].bytes().all(|b| b == b'0' || b == b'.') {
        s[1..].to_string()
    } else {
        s
    }
}

struct Frame {
    x0: f64,
    x1: f64,
    y_ticks: Vec<f64>,
}

impl Frame {
    fn new(x0: f64, x1: f64, y_lo: f64, y_hi: f64) -> Self {
        let (lo, hi) = if y_lo == y_hi { (y_lo - 1.0, y_hi + 1.0) } else { (y_lo, y_hi) };
        Self {
            x0,
            x1: if x1 == x0 { x0 + 1.0 } else { x1 },
            y_ticks: ticks(lo, hi, 6),
        }
    }

    fn y_range(&self) -> (f64, f64) {
        (self.y_ticks[0], *self.y_ticks.last().unwrap())
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        let (lo, hi) = self.y_range();
        HEIGHT - BOTTOM - (y - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }
}

fn open(out: &mut String, title: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    );
    let _ = writeln!(
        out,
        r#"<text transform="translate(18 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        esc(y_label)
    );
}

fn y_axis(out: &mut String, f: &Frame) {
    out.push_str("<g class=\"axis\" stroke=\"#ccc\">\n");
    for &t in &f.y_ticks {
        let y = f.py(t);
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}"/><text x="{:.2}" y="{:.2}" text-anchor="end" stroke="none" fill="#333">{}</text>"##,
            WIDTH - RIGHT,
            LEFT - 6.0,
            y + 4.0,
            label(t)
        );
    }
    out.push_str("</g>\n");
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="10" height="10" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            WIDTH - RIGHT + 16.0,
            y,
            color(i),
            WIDTH - RIGHT + 30.0,
            y + 9.0,
            esc(name)
        );
    }
}

fn empty(what: &str) -> CliError {
    CliError::Usage(format!("nothing to chart: {what}"))
}

/// One polyline with a marker per point for each named series.
pub fn line_chart(title: &str, y_label: &str, series: &[(String, Vec<(i32, f64)>)]) -> Result<String, CliError> {
    if series.is_empty() {
        return Err(empty("no series selected"));
    }
    if let Some((name, _)) = series.iter().find(|(_, pts)| pts.is_empty()) {
        return Err(empty(&format!("series {name} has no points")));
    }
    let xs = series.iter().flat_map(|(_, p)| p.iter().map(|(x, _)| *x));
    let (x0, x1) = (xs.clone().min().unwrap(), xs.max().unwrap());
    let ys = series.iter().flat_map(|(_, p)| p.iter().map(|(_, y)| *y));
    let lo = ys.clone().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = ys.fold(f64::NEG_INFINITY, f64::max);
    let f = Frame::new(f64::from(x0), f64::from(x1), lo, hi);

    let mut out = String::new();
    open(&mut out, title, y_label);
    y_axis(&mut out, &f);
    out.push_str("<g class=\"x-axis\">\n");
    for year in x0..=x1 {
        if (year - x0) % 2 == 0 || x1 - x0 <= 10 {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{year}</text>"#,
                f.px(f64::from(year)),
                HEIGHT - BOTTOM + 18.0
            );
        }
    }
    out.push_str("</g>\n");
    for (i, (name, pts)) in series.iter().enumerate() {
        let _ = writeln!(out, r#"<g class="series" data-name="{}" fill="{}">"#, esc(name), color(i));
        let path: Vec<String> = pts
            .iter()
            .map(|(x, y)| format!("{:.2},{:.2}", f.px(f64::from(*x)), f.py(*y)))
            .collect();
        let _ = writeln!(
            out,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            color(i),
            path.join(" ")
        );
        for (x, y) in pts {
            let _ = writeln!(
                out,
                r#"<circle class="point" data-x="{x}" data-y="{y}" cx="{:.2}" cy="{:.2}" r="2.5"/>"#,
                f.px(f64::from(*x)),
                f.py(*y)
            );
        }
        out.push_str("</g>\n");
    }
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    legend(&mut out, &names);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Grouped bars: one cluster per category, one bar per group within it.
pub fn grouped_bars(
    title: &str,
    y_label: &str,
    groups: &[&str],
    categories: &[(String, Vec<f64>)],
) -> Result<String, CliError> {
    if categories.is_empty() || groups.is_empty() {
        return Err(empty("no contributions"));
    }
    let vals = categories.iter().flat_map(|(_, v)| v.iter().copied());
    let lo = vals.clone().fold(0.0, f64::min);
    let hi = vals.fold(0.0, f64::max);
    let f = Frame::new(0.0, categories.len() as f64, lo, hi);
    let slot = (WIDTH - LEFT - RIGHT) / categories.len() as f64;
    let bar = slot * 0.8 / groups.len() as f64;

    let mut out = String::new();
    open(&mut out, title, y_label);
    y_axis(&mut out, &f);
    let zero = f.py(0.0);
    for (c, (name, values)) in categories.iter().enumerate() {
        let x = LEFT + slot * c as f64 + slot * 0.1;
        let _ = writeln!(out, r#"<g class="category" data-name="{}">"#, esc(name));
        for (g, v) in values.iter().enumerate() {
            let y = f.py(*v);
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-group="{}" data-value="{v}" x="{:.2}" y="{:.2}" width="{bar:.2}" height="{:.2}" fill="{}"/>"#,
                groups[g],
                x + bar * g as f64,
                y.min(zero),
                (y - zero).abs(),
                color(g)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            LEFT + slot * (c as f64 + 0.5),
            HEIGHT - BOTTOM + 18.0,
            esc(name)
        );
        out.push_str("</g>\n");
    }
    let _ = writeln!(
        out,
        r##"<line x1="{LEFT:.2}" y1="{zero:.2}" x2="{:.2}" y2="{zero:.2}" stroke="#000"/>"##,
        WIDTH - RIGHT
    );
    legend(&mut out, groups);
    out.push_str("</svg>\n");
    Ok(out)
}

/// Horizontal bars in the given order, longest expected first.
pub fn ranked_bars(title: &str, x_label: &str, items: &[(String, f64)]) -> Result<String, CliError> {
    if items.is_empty() {
        return Err(empty("no states to rank"));
    }
    let hi = items.iter().map(|(_, v)| *v).fold(0.0, f64::max).max(1e-12);
    let row = 16.0;
    let height = TOP + BOTTOM + row * items.len() as f64;
    let scale = (WIDTH - LEFT - RIGHT) / hi;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="28" font-size="15" text-anchor="middle">{}</text>"#,
        WIDTH / 2.0,
        esc(title)
    );
    for (i, (name, v)) in items.iter().enumerate() {
        let y = TOP + row * i as f64;
        let _ = writeln!(
            out,
            r#"<g class="rank" data-name="{}"><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text><rect class="bar" data-value="{v}" x="{LEFT:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{}"/><text x="{:.2}" y="{:.2}">{}</text></g>"#,
            esc(name),
            LEFT - 6.0,
            y + 11.0,
            esc(name),
            (v.max(0.0) * scale),
            row - 3.0,
            color(0),
            LEFT + v.max(0.0) * scale + 4.0,
            y + 11.0,
            label(*v)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        height - 20.0,
        esc(x_label)
    );
    out.push_str("</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ticks_are_round_and_cover_the_range() {
        assert_eq!(ticks(0.0, 513.8, 6), vec![0.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0]);
        let t = ticks(-41.0, 196.0, 6);
        assert!(t[0] <= -41.0 && *t.last().unwrap() >= 196.0);
    }

    #[test]
    fn line_chart_marks_every_point() {
        let pts: Vec<(i32, f64)> = (2000..=2022).map(|y| (y, f64::from(y - 2000))).collect();
        let svg = line_chart("t", "y", &[("A".into(), pts.clone()), ("B".into(), pts)]).unwrap();
        assert_eq!(svg.matches(r#"class="point""#).count(), 46);
        assert!(line_chart("t", "y", &[("A".into(), vec![])]).is_err());
        assert!(line_chart("t", "y", &[]).is_err());
    }

    #[test]
    fn text_is_escaped() {
        let svg = ranked_bars("a<b", "x & y", &[("S&T".into(), 1.0)]).unwrap();
        assert!(svg.contains("a&lt;b") && svg.contains("x &amp; y") && svg.contains("S&amp;T"));
    }
}
