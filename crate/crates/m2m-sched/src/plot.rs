//! Static SVG plots derived from the CSV outputs. Text-only, no display
//! dependencies; the same inputs always produce the same bytes.

use std::io;
use std::path::Path;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 160.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

struct Svg {
    body: String,
}

impl Svg {
    fn new(title: &str) -> Self {
        let mut body = String::new();
        body.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" \
viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        ));
        body.push_str(&format!(
            "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
        ));
        body.push_str(&format!(
            "<text x=\"{}\" y=\"22\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
            WIDTH / 2.0,
            escape(title)
        ));
        Self { body }
    }

    fn finish(mut self, path: &Path) -> io::Result<()> {
        self.body.push_str("</svg>\n");
        std::fs::write(path, self.body)
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, stroke: &str, width: f64) {
        self.body.push_str(&format!(
            "<line x1=\"{x1:.2}\" y1=\"{y1:.2}\" x2=\"{x2:.2}\" y2=\"{y2:.2}\" \
stroke=\"{stroke}\" stroke-width=\"{width}\"/>\n"
        ));
    }

    fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        self.body.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{w:.2}\" height=\"{h:.2}\" fill=\"{fill}\"/>\n"
        ));
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, content: &str) {
        self.body.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{y:.2}\" text-anchor=\"{anchor}\">{}</text>\n",
            escape(content)
        ));
    }

    fn polyline(&mut self, pts: &[(f64, f64)], stroke: &str) {
        let coords: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        self.body.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{stroke}\" stroke-width=\"1.8\"/>\n",
            coords.join(" ")
        ));
    }

    fn axes(&mut self, x_label: &str, y_label: &str) {
        let x0 = MARGIN_L;
        let y0 = HEIGHT - MARGIN_B;
        self.line(x0, MARGIN_T, x0, y0, "#333", 1.0);
        self.line(x0, y0, WIDTH - MARGIN_R, y0, "#333", 1.0);
        self.text(
            (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
            HEIGHT - 14.0,
            "middle",
            x_label,
        );
        self.body.push_str(&format!(
            "<text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" \
transform=\"rotate(-90 18 {:.2})\">{}</text>\n",
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
            escape(y_label)
        ));
    }

    fn legend(&mut self, labels: &[String]) {
        for (i, l) in labels.iter().enumerate() {
            let y = MARGIN_T + 16.0 * i as f64 + 10.0;
            let x = WIDTH - MARGIN_R + 12.0;
            self.rect(x, y - 9.0, 11.0, 11.0, PALETTE[i % PALETTE.len()]);
            self.text(x + 16.0, y, "start", l);
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_ticks(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if !(hi > lo) {
        return vec![lo];
    }
    (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

fn fmt_tick(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

/// Histogram of per-series samples on a shared (optionally log10) x axis:
/// the empirical distribution of individual lifetimes.
pub fn histogram_svg(
    path: &Path,
    title: &str,
    x_label: &str,
    series: &[(String, Vec<f64>)],
    bins: usize,
    log_x: bool,
) -> io::Result<()> {
    let mut svg = Svg::new(title);
    let transform = |v: f64| if log_x { v.max(1e-12).log10() } else { v };
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .map(transform)
        .collect();
    if all.is_empty() || bins == 0 {
        svg.axes(x_label, "density");
        return svg.finish(path);
    }
    let lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let span = (hi - lo).max(1e-12);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;

    let mut max_density = 0.0f64;
    let mut counts: Vec<Vec<f64>> = Vec::new();
    for (_, values) in series {
        let mut c = vec![0.0; bins];
        for &v in values {
            let t = ((transform(v) - lo) / span * bins as f64).floor() as usize;
            c[t.min(bins - 1)] += 1.0;
        }
        let n = values.len().max(1) as f64;
        for x in c.iter_mut() {
            *x /= n;
            max_density = max_density.max(*x);
        }
        counts.push(c);
    }
    svg.axes(x_label, "fraction of nodes");
    for t in nice_ticks(lo, hi, 6) {
        let x = MARGIN_L + (t - lo) / span * plot_w;
        svg.line(x, HEIGHT - MARGIN_B, x, HEIGHT - MARGIN_B + 4.0, "#333", 1.0);
        let label = if log_x {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        svg.text(x, HEIGHT - MARGIN_B + 18.0, "middle", &label);
    }
    for (si, c) in counts.iter().enumerate() {
        let color = PALETTE[si % PALETTE.len()];
        let pts: Vec<(f64, f64)> = c
            .iter()
            .enumerate()
            .map(|(b, &d)| {
                (
                    MARGIN_L + (b as f64 + 0.5) / bins as f64 * plot_w,
                    HEIGHT - MARGIN_B - d / max_density.max(1e-12) * plot_h,
                )
            })
            .collect();
        svg.polyline(&pts, color);
    }
    svg.legend(&series.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    svg.finish(path)
}

/// Grouped bar chart: one group per label, one bar per series.
pub fn bar_chart_svg(
    path: &Path,
    title: &str,
    y_label: &str,
    group_labels: &[String],
    series: &[(String, Vec<f64>)],
    log_y: bool,
) -> io::Result<()> {
    let mut svg = Svg::new(title);
    svg.axes("scheme", y_label);
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let transform = |v: f64| if log_y { v.max(1e-12).log10() } else { v };
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .map(transform)
        .collect();
    if all.is_empty() {
        return svg.finish(path);
    }
    let hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lo = if log_y {
        all.iter().cloned().fold(f64::INFINITY, f64::min) - 0.2
    } else {
        0.0
    };
    let span = (hi - lo).max(1e-12);
    let groups = group_labels.len().max(1);
    let group_w = plot_w / groups as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (gi, gl) in group_labels.iter().enumerate() {
        let gx = MARGIN_L + gi as f64 * group_w;
        svg.text(gx + group_w / 2.0, HEIGHT - MARGIN_B + 18.0, "middle", gl);
        for (si, (_, vals)) in series.iter().enumerate() {
            let v = transform(vals.get(gi).copied().unwrap_or(0.0));
            let h = ((v - lo) / span * plot_h).max(0.0);
            svg.rect(
                gx + group_w * 0.1 + si as f64 * bar_w,
                HEIGHT - MARGIN_B - h,
                bar_w * 0.92,
                h,
                PALETTE[si % PALETTE.len()],
            );
        }
    }
    for t in nice_ticks(lo, hi, 5) {
        let y = HEIGHT - MARGIN_B - (t - lo) / span * plot_h;
        svg.line(MARGIN_L - 4.0, y, MARGIN_L, y, "#333", 1.0);
        let label = if log_y {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        svg.text(MARGIN_L - 8.0, y + 4.0, "end", &label);
    }
    svg.legend(&series.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    svg.finish(path)
}

/// Line chart with one polyline per series over shared x values.
pub fn line_chart_svg(
    path: &Path,
    title: &str,
    x_label: &str,
    y_label: &str,
    x: &[f64],
    series: &[(String, Vec<f64>)],
    log_y: bool,
) -> io::Result<()> {
    let mut svg = Svg::new(title);
    svg.axes(x_label, y_label);
    if x.is_empty() || series.is_empty() {
        return svg.finish(path);
    }
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let transform = |v: f64| if log_y { v.max(1e-12).log10() } else { v };
    let x_lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let x_span = (x_hi - x_lo).max(1e-12);
    let all: Vec<f64> = series
        .iter()
        .flat_map(|(_, v)| v.iter().copied())
        .map(transform)
        .collect();
    let y_hi = all.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let y_lo = all.iter().cloned().fold(f64::INFINITY, f64::min);
    let y_span = (y_hi - y_lo).max(y_hi.abs() * 1e-6).max(1e-12);
    for (si, (_, vals)) in series.iter().enumerate() {
        let pts: Vec<(f64, f64)> = x
            .iter()
            .zip(vals)
            .map(|(&xv, &yv)| {
                (
                    MARGIN_L + (xv - x_lo) / x_span * plot_w,
                    HEIGHT - MARGIN_B - (transform(yv) - y_lo) / y_span * plot_h,
                )
            })
            .collect();
        svg.polyline(&pts, PALETTE[si % PALETTE.len()]);
        for (px, py) in &pts {
            svg.rect(px - 2.0, py - 2.0, 4.0, 4.0, PALETTE[si % PALETTE.len()]);
        }
    }
    for t in nice_ticks(x_lo, x_hi, 6) {
        let px = MARGIN_L + (t - x_lo) / x_span * plot_w;
        svg.line(px, HEIGHT - MARGIN_B, px, HEIGHT - MARGIN_B + 4.0, "#333", 1.0);
        svg.text(px, HEIGHT - MARGIN_B + 18.0, "middle", &fmt_tick(t));
    }
    for t in nice_ticks(y_lo, y_hi, 5) {
        let py = HEIGHT - MARGIN_B - (t - y_lo) / y_span * plot_h;
        svg.line(MARGIN_L - 4.0, py, MARGIN_L, py, "#333", 1.0);
        let label = if log_y {
            format!("1e{}", fmt_tick(t))
        } else {
            fmt_tick(t)
        };
        svg.text(MARGIN_L - 8.0, py + 4.0, "end", &label);
    }
    svg.legend(&series.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    svg.finish(path)
}
