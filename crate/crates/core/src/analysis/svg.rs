//! Minimal static SVG charts: axes, one polyline per series, labels.

use std::fmt::Write;

const W: f64 = 640.0;
const H: f64 = 360.0;
const LEFT: f64 = 56.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 32.0;
const BOTTOM: f64 = 40.0;

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

struct Frame {
    n: usize,
    y_min: f64,
    y_max: f64,
}

impl Frame {
    fn x(&self, i: usize) -> f64 {
        let pw = W - LEFT - RIGHT;
        if self.n <= 1 {
            LEFT + pw / 2.0
        } else {
            LEFT + pw * i as f64 / (self.n - 1) as f64
        }
    }

    fn y(&self, v: f64) -> f64 {
        let ph = H - TOP - BOTTOM;
        let span = (self.y_max - self.y_min).max(1e-12);
        TOP + ph * (1.0 - (v - self.y_min) / span)
    }
}

fn header(out: &mut String, title: &str, frame: &Frame, x_label: &str, y_label: &str) {
    let _ = write!(
        out,
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\" viewBox=\"0 0 {W} {H}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{W}\" height=\"{H}\" fill=\"white\"/>\n\
         <text x=\"{:.1}\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>\n",
        W / 2.0,
        escape(title)
    );
    let (x0, x1) = (LEFT, W - RIGHT);
    let (y0, y1) = (H - BOTTOM, TOP);
    let _ = writeln!(
        out,
        "<g stroke=\"black\" stroke-width=\"1\"><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\"/><line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\"/></g>"
    );
    let _ = writeln!(
        out,
        "<g font-family=\"sans-serif\" font-size=\"11\">\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>\
         <text x=\"14\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {:.1})\">{}</text>\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text>\
         <text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{:.3}</text></g>",
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(x_label),
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label),
        LEFT - 4.0,
        frame.y(frame.y_max) + 4.0,
        frame.y_max,
        LEFT - 4.0,
        frame.y(frame.y_min) + 4.0,
        frame.y_min,
    );
}

fn polyline(out: &mut String, frame: &Frame, values: &[f64], colour: &str, name: &str) {
    let points: Vec<String> = values
        .iter()
        .enumerate()
        .map(|(i, v)| format!("{:.2},{:.2}", frame.x(i), frame.y(*v)))
        .collect();
    let _ = writeln!(
        out,
        "<polyline data-series=\"{}\" fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>",
        escape(name),
        points.join(" ")
    );
}

fn bounds<'a>(values: impl Iterator<Item = &'a f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}

/// Line chart of several equally long series over a shared index axis.
pub fn line_chart(title: &str, series: &[(&str, &[f64])], y_range: Option<(f64, f64)>) -> String {
    let n = series.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let (y_min, y_max) = y_range.unwrap_or_else(|| {
        let (lo, hi) = bounds(series.iter().flat_map(|(_, s)| s.iter()));
        if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) }
    });
    let frame = Frame { n, y_min, y_max };
    let mut out = String::new();
    header(&mut out, title, &frame, "images (sorted by original score)", "score");
    let colours = ["black", "#888888", "#1f77b4", "#d62728"];
    for (k, (name, values)) in series.iter().enumerate() {
        polyline(&mut out, &frame, values, colours[k % colours.len()], name);
    }
    for (k, (name, _)) in series.iter().enumerate() {
        let y = TOP + 14.0 * k as f64 + 4.0;
        let _ = writeln!(
            out,
            "<g font-family=\"sans-serif\" font-size=\"11\"><line x1=\"{:.1}\" y1=\"{y:.1}\" x2=\"{:.1}\" y2=\"{y:.1}\" stroke=\"{}\" stroke-width=\"2\"/><text x=\"{:.1}\" y=\"{:.1}\">{}</text></g>",
            W - RIGHT - 120.0,
            W - RIGHT - 100.0,
            colours[k % colours.len()],
            W - RIGHT - 96.0,
            y + 4.0,
            escape(name)
        );
    }
    out.push_str("</svg>\n");
    out
}

/// Score changes per image with the 5th–95th percentile band, the median
/// and the zero line.
pub fn range_chart(title: &str, deltas: &[f64], p5: f64, median: f64, p95: f64) -> String {
    let (lo, hi) = bounds(deltas.iter().chain([p5, p95, 0.0].iter()));
    let pad = ((hi - lo) * 0.05).max(1e-3);
    let frame = Frame {
        n: deltas.len(),
        y_min: lo - pad,
        y_max: hi + pad,
    };
    let mut out = String::new();
    header(&mut out, title, &frame, "images (sorted by original score)", "score change");
    let (x0, x1) = (LEFT, W - RIGHT);
    let _ = writeln!(
        out,
        "<rect x=\"{x0:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"#dddddd\" stroke=\"none\"/>",
        frame.y(p95),
        x1 - x0,
        (frame.y(p5) - frame.y(p95)).max(0.0)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{0:.2}\" x2=\"{x1:.2}\" y2=\"{0:.2}\" stroke=\"black\" stroke-dasharray=\"4 3\"/>",
        frame.y(0.0)
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{0:.2}\" x2=\"{x1:.2}\" y2=\"{0:.2}\" stroke=\"#d62728\"/>",
        frame.y(median)
    );
    polyline(&mut out, &frame, deltas, "black", "delta");
    out.push_str("</svg>\n");
    out
}
