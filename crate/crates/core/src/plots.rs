//! Static SVG figures: log-log scatter plots, speedup bars and box plots.
//!
//! Box plots use linear-interpolation (type 7) quartiles; whiskers reach
//! the most extreme values within 1.5 IQR of the box and everything beyond
//! is drawn as an individual outlier mark.
//!
//! Data marks carry `class="mark"` plus `data-x`/`data-y` attributes with
//! their pixel centre, which keeps the output easy to inspect.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::stats::quantile_sorted;

pub const WIDTH: f64 = 640.0;
pub const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;
const MARK_SIZE: f64 = 4.0;
const OUTLIER_FACTOR: f64 = 1.5;

const BLUE: &str = "#1f77b4";
const ORANGE: &str = "#ff7f0e";
const GREY: &str = "#555555";
const PALETTE: [&str; 2] = [BLUE, ORANGE];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlotError {
    #[error("nothing to plot")]
    Empty,
    #[error("series `{0}` has no points")]
    EmptySeries(String),
    #[error("series `{series}` point {index} ({x}, {y}) is not positive on a log axis")]
    NonPositive { series: String, index: usize, x: f64, y: f64 },
    #[error("non-finite value in `{0}`")]
    NonFinite(String),
    #[error("label `{0}` used twice")]
    DuplicateLabel(String),
    #[error("group `{0}` is empty")]
    EmptyGroup(String),
    #[error("ratio {ratio} of `{label}` is not positive")]
    NonPositiveRatio { label: String, ratio: f64 },
    #[error("need at least 2 values")]
    TooFewValues,
    #[error("mean is zero")]
    ZeroMean,
    #[error("{0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkShape {
    Circle,
    Cross,
    Square,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log10,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: MarkShape,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatterOptions {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub y_scale: Scale,
}

impl Default for ScatterOptions {
    fn default() -> Self {
        ScatterOptions {
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            x_scale: Scale::Log10,
            y_scale: Scale::Log10,
        }
    }
}

/// Maps data values onto a pixel interval. Log axes span whole decades.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub scale: Scale,
    /// Data range in transformed units (decades for log axes).
    pub lo: f64,
    pub hi: f64,
    /// Pixel positions of `lo` and `hi`.
    pub start: f64,
    pub end: f64,
}

impl Axis {
    /// Smallest axis covering `values`: whole decades on a log axis, the
    /// data range padded by 5 % on a linear one.
    pub fn fit(scale: Scale, values: impl IntoIterator<Item = f64>, start: f64, end: f64) -> Axis {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let t = transform(scale, v);
            lo = lo.min(t);
            hi = hi.max(t);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        let (lo, hi) = match scale {
            Scale::Log10 => {
                let (l, h) = (lo.floor(), hi.ceil());
                if l == h {
                    (l, l + 1.0)
                } else {
                    (l, h)
                }
            }
            Scale::Linear if lo == hi => (lo - 1.0, hi + 1.0),
            Scale::Linear => {
                let pad = 0.05 * (hi - lo);
                (lo - pad, hi + pad)
            }
        };
        Axis { scale, lo, hi, start, end }
    }

    pub fn position(&self, value: f64) -> f64 {
        let t = transform(self.scale, value);
        self.start + (t - self.lo) / (self.hi - self.lo) * (self.end - self.start)
    }

    /// Tick values: every decade on log axes, about five steps otherwise.
    pub fn ticks(&self) -> Vec<f64> {
        match self.scale {
            Scale::Log10 => (self.lo as i32..=self.hi as i32).map(|d| 10f64.powi(d)).collect(),
            Scale::Linear => {
                let raw = (self.hi - self.lo) / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .into_iter()
                    .map(|m| m * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let first = (self.lo / step).ceil() as i64;
                let last = (self.hi / step).floor() as i64;
                (first..=last).map(|i| i as f64 * step).collect()
            }
        }
    }
}

fn transform(scale: Scale, v: f64) -> f64 {
    match scale {
        Scale::Linear => v,
        Scale::Log10 => v.log10(),
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn fmt_tick(v: f64, scale: Scale) -> String {
    match scale {
        Scale::Log10 => {
            let e = v.log10().round() as i32;
            if (-2..=3).contains(&e) {
                format!("{}", v)
            } else {
                format!("1e{e}")
            }
        }
        Scale::Linear => format!("{}", (v * 1e6).round() / 1e6),
    }
}

struct Canvas {
    body: String,
}

impl Canvas {
    fn new(title: &str) -> Canvas {
        let mut body = String::new();
        let _ = writeln!(
            body,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        );
        if !title.is_empty() {
            let _ = writeln!(
                body,
                r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
                WIDTH / 2.0,
                escape(title)
            );
        }
        Canvas { body }
    }

    fn line(&mut self, x1: f64, y1: f64, x2: f64, y2: f64, attrs: &str) {
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}" {attrs}/>"#
        );
    }

    fn text(&mut self, x: f64, y: f64, anchor: &str, extra: &str, content: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{x:.2}" y="{y:.2}" text-anchor="{anchor}" {extra}>{}</text>"#,
            escape(content)
        );
    }

    fn mark(&mut self, shape: MarkShape, x: f64, y: f64, color: &str, class: &str) {
        let s = MARK_SIZE;
        let data = format!(r#"class="{class}" data-x="{x:.4}" data-y="{y:.4}""#);
        let _ = match shape {
            MarkShape::Circle => writeln!(
                self.body,
                r#"<circle {data} cx="{x:.2}" cy="{y:.2}" r="{s}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
            ),
            MarkShape::Square => writeln!(
                self.body,
                r#"<rect {data} x="{:.2}" y="{:.2}" width="{}" height="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                x - s,
                y - s,
                2.0 * s,
                2.0 * s
            ),
            MarkShape::Cross => writeln!(
                self.body,
                r#"<path {data} d="M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}" stroke="{color}" stroke-width="1.5"/>"#,
                x - s,
                y - s,
                x + s,
                y + s,
                x - s,
                y + s,
                x + s,
                y - s
            ),
        };
    }

    /// Frame, gridlines, ticks and axis labels.
    fn axes(&mut self, x: Option<&Axis>, y: &Axis, x_label: &str, y_label: &str) {
        let (left, right) = (MARGIN_LEFT, WIDTH - MARGIN_RIGHT);
        let (top, bottom) = (MARGIN_TOP, HEIGHT - MARGIN_BOTTOM);
        for t in y.ticks() {
            let py = y.position(t);
            self.line(left, py, right, py, r##"class="grid" stroke="#dddddd""##);
            self.text(left - 6.0, py + 4.0, "end", "", &fmt_tick(t, y.scale));
        }
        if let Some(x) = x {
            for t in x.ticks() {
                let px = x.position(t);
                self.line(px, top, px, bottom, r##"class="grid" stroke="#dddddd""##);
                self.text(px, bottom + 16.0, "middle", "", &fmt_tick(t, x.scale));
            }
        }
        let _ = writeln!(
            self.body,
            r#"<rect x="{left}" y="{top}" width="{}" height="{}" fill="none" stroke="black"/>"#,
            right - left,
            bottom - top
        );
        self.text((left + right) / 2.0, HEIGHT - 14.0, "middle", "", x_label);
        let cy = (top + bottom) / 2.0;
        self.text(16.0, cy, "middle", &format!(r#"transform="rotate(-90 16 {cy})""#), y_label);
    }

    fn finish(mut self) -> String {
        self.body.push_str("</svg>\n");
        self.body
    }
}

fn x_range() -> (f64, f64) {
    (MARGIN_LEFT, WIDTH - MARGIN_RIGHT)
}

/// Pixel rows grow downwards, so the y axis runs from bottom to top.
fn y_range() -> (f64, f64) {
    (HEIGHT - MARGIN_BOTTOM, MARGIN_TOP)
}

/// Scatter plot with one mark shape per series.
pub fn scatter_svg(series: &[PlotSeries], opts: &ScatterOptions) -> Result<String, PlotError> {
    if series.is_empty() {
        return Err(PlotError::Empty);
    }
    for (i, s) in series.iter().enumerate() {
        if s.points.is_empty() {
            return Err(PlotError::EmptySeries(s.label.clone()));
        }
        if series[..i].iter().any(|o| o.label == s.label) {
            return Err(PlotError::DuplicateLabel(s.label.clone()));
        }
        for (index, &(x, y)) in s.points.iter().enumerate() {
            if !x.is_finite() || !y.is_finite() {
                return Err(PlotError::NonFinite(s.label.clone()));
            }
            let bad_x = opts.x_scale == Scale::Log10 && x <= 0.0;
            let bad_y = opts.y_scale == Scale::Log10 && y <= 0.0;
            if bad_x || bad_y {
                return Err(PlotError::NonPositive {
                    series: s.label.clone(),
                    index,
                    x,
                    y,
                });
            }
        }
    }
    let all = || series.iter().flat_map(|s| s.points.iter().copied());
    let (xs, xe) = x_range();
    let (ys, ye) = y_range();
    let x_axis = Axis::fit(opts.x_scale, all().map(|p| p.0), xs, xe);
    let y_axis = Axis::fit(opts.y_scale, all().map(|p| p.1), ys, ye);

    let mut c = Canvas::new(&opts.title);
    c.axes(Some(&x_axis), &y_axis, &opts.x_label, &opts.y_label);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        for &(x, y) in &s.points {
            c.mark(s.mark, x_axis.position(x), y_axis.position(y), color, "mark");
        }
        let ly = MARGIN_TOP + 14.0 + 16.0 * i as f64;
        c.mark(s.mark, MARGIN_LEFT + 14.0, ly, color, "legend-mark");
        c.text(MARGIN_LEFT + 24.0, ly + 4.0, "start", "", &s.label);
    }
    Ok(c.finish())
}

/// One bar per `(label, ratio)` in the given order on a log y axis, drawn
/// from the unity line, with a dashed line at the geometric mean.
pub fn speedup_bars_svg(bars: &[(String, f64)], title: &str, y_label: &str) -> Result<String, PlotError> {
    if bars.is_empty() {
        return Err(PlotError::Empty);
    }
    for (label, ratio) in bars {
        if !(*ratio > 0.0 && ratio.is_finite()) {
            return Err(PlotError::NonPositiveRatio {
                label: label.clone(),
                ratio: *ratio,
            });
        }
    }
    let gm = (bars.iter().map(|(_, r)| r.ln()).sum::<f64>() / bars.len() as f64).exp();
    let (ys, ye) = y_range();
    let y_axis = Axis::fit(Scale::Log10, bars.iter().map(|b| b.1).chain([1.0]), ys, ye);
    let mut c = Canvas::new(title);
    c.axes(None, &y_axis, "", y_label);

    let (left, right) = x_range();
    let slot = (right - left) / bars.len() as f64;
    let width = slot * 0.7;
    let base = y_axis.position(1.0);
    for (i, (label, ratio)) in bars.iter().enumerate() {
        let x = left + slot * i as f64 + (slot - width) / 2.0;
        let top = y_axis.position(*ratio);
        let (y, h) = if top <= base { (top, base - top) } else { (base, top - base) };
        let _ = writeln!(
            c.body,
            r#"<rect class="bar" data-ratio="{ratio}" x="{x:.2}" y="{y:.4}" width="{width:.2}" height="{h:.4}" fill="{BLUE}"/>"#
        );
        let lx = x + width / 2.0;
        let ly = HEIGHT - MARGIN_BOTTOM + 12.0;
        c.text(
            lx,
            ly,
            "end",
            &format!(r#"font-size="9" transform="rotate(-45 {lx:.2} {ly:.2})""#),
            label,
        );
    }
    c.line(left, base, right, base, r#"class="unity" stroke="black""#);
    let gy = y_axis.position(gm);
    let _ = writeln!(
        c.body,
        r#"<line class="gm" data-value="{gm}" x1="{left:.2}" y1="{gy:.4}" x2="{right:.2}" y2="{gy:.4}" stroke="{ORANGE}" stroke-dasharray="6 3"/>"#
    );
    c.text(right - 4.0, gy - 4.0, "end", &format!(r#"fill="{ORANGE}""#), &format!("GM {gm:.3}"));
    Ok(c.finish())
}

/// Five-number summary with the outlier rule applied.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxStats {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

pub fn box_stats(values: &[f64]) -> Option<BoxStats> {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - OUTLIER_FACTOR * iqr, q3 + OUTLIER_FACTOR * iqr);
    let inside: Vec<f64> = sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v)).collect();
    Some(BoxStats {
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        whisker_low: inside.first().copied().unwrap_or(q1),
        whisker_high: inside.last().copied().unwrap_or(q3),
        outliers: sorted.iter().copied().filter(|v| *v < lo_fence || *v > hi_fence).collect(),
    })
}

/// Box plot per `(label, values)` group on a linear y axis.
pub fn box_plot_svg(groups: &[(String, Vec<f64>)], title: &str, y_label: &str) -> Result<String, PlotError> {
    if groups.is_empty() {
        return Err(PlotError::Empty);
    }
    let mut stats = Vec::new();
    for (i, (label, values)) in groups.iter().enumerate() {
        if groups[..i].iter().any(|g| &g.0 == label) {
            return Err(PlotError::DuplicateLabel(label.clone()));
        }
        if values.is_empty() {
            return Err(PlotError::EmptyGroup(label.clone()));
        }
        stats.push(box_stats(values).ok_or_else(|| PlotError::NonFinite(label.clone()))?);
    }
    let (ys, ye) = y_range();
    let y_axis = Axis::fit(Scale::Linear, stats.iter().flat_map(|s| [s.min, s.max]), ys, ye);
    let mut c = Canvas::new(title);
    c.axes(None, &y_axis, "", y_label);
    let (left, right) = x_range();
    let slot = (right - left) / groups.len() as f64;
    let width = (slot * 0.5).min(60.0);
    for (i, ((label, _), s)) in groups.iter().zip(&stats).enumerate() {
        let cx = left + slot * (i as f64 + 0.5);
        let (x0, x1) = (cx - width / 2.0, cx + width / 2.0);
        let (py1, py3) = (y_axis.position(s.q1), y_axis.position(s.q3));
        let _ = writeln!(
            c.body,
            r#"<rect class="box" data-q1="{}" data-q3="{}" x="{x0:.2}" y="{py3:.4}" width="{width:.2}" height="{:.4}" fill="none" stroke="{BLUE}"/>"#,
            s.q1,
            s.q3,
            py1 - py3
        );
        let pm = y_axis.position(s.median);
        let _ = writeln!(
            c.body,
            r#"<line class="median" data-value="{}" x1="{x0:.2}" y1="{pm:.4}" x2="{x1:.2}" y2="{pm:.4}" stroke="{ORANGE}" stroke-width="2"/>"#,
            s.median
        );
        let (pl, ph) = (y_axis.position(s.whisker_low), y_axis.position(s.whisker_high));
        c.line(cx, py1, cx, pl, &format!(r#"class="whisker" stroke="{BLUE}""#));
        c.line(cx, py3, cx, ph, &format!(r#"class="whisker" stroke="{BLUE}""#));
        c.line(cx - width / 4.0, pl, cx + width / 4.0, pl, &format!(r#"class="cap" stroke="{BLUE}""#));
        c.line(cx - width / 4.0, ph, cx + width / 4.0, ph, &format!(r#"class="cap" stroke="{BLUE}""#));
        for &o in &s.outliers {
            c.mark(MarkShape::Circle, cx, y_axis.position(o), GREY, "mark outlier");
        }
        c.text(cx, HEIGHT - MARGIN_BOTTOM + 16.0, "middle", "", label);
    }
    Ok(c.finish())
}

/// `(v − mean) / mean` for each value.
pub fn relative_deviation(values: &[f64]) -> Result<Vec<f64>, PlotError> {
    if values.len() < 2 {
        return Err(PlotError::TooFewValues);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(PlotError::NonFinite("values".into()));
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    if mean == 0.0 {
        return Err(PlotError::ZeroMean);
    }
    Ok(values.iter().map(|v| (v - mean) / mean).collect())
}

/// `<dir>/<figure>_<experiment>.svg`
pub fn figure_path(dir: &Path, figure: &str, experiment: &str) -> PathBuf {
    dir.join(format!("{figure}_{experiment}.svg"))
}

pub fn write_figure(dir: &Path, figure: &str, experiment: &str, svg: &str) -> Result<PathBuf, PlotError> {
    std::fs::create_dir_all(dir).map_err(|e| PlotError::Io(format!("{}: {e}", dir.display())))?;
    let path = figure_path(dir, figure, experiment);
    std::fs::write(&path, svg).map_err(|e| PlotError::Io(format!("{}: {e}", path.display())))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(svg: &str) -> roxmltree::Document<'_> {
        let doc = roxmltree::Document::parse(svg).expect("well-formed SVG");
        let root = doc.root_element();
        for attr in ["width", "height", "viewBox"] {
            assert!(root.attribute(attr).is_some(), "missing {attr}");
        }
        doc
    }

    fn with_class<'a>(doc: &'a roxmltree::Document<'a>, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
        doc.descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').any(|w| w == class)))
            .collect()
    }

    fn attr(n: &roxmltree::Node, name: &str) -> f64 {
        n.attribute(name).unwrap().parse().unwrap()
    }

    fn series(label: &str, points: &[(f64, f64)], mark: MarkShape) -> PlotSeries {
        PlotSeries {
            label: label.into(),
            points: points.to_vec(),
            mark,
        }
    }

    #[test]
    fn single_point_single_mark() {
        let svg = scatter_svg(&[series("a", &[(3.0, 4.0)], MarkShape::Circle)], &ScatterOptions::default()).unwrap();
        let doc = parse(&svg);
        assert_eq!(with_class(&doc, "mark").len(), 1);
    }

    #[test]
    fn log_axis_positions() {
        let s = [series("a", &[(1.0, 1.0), (100.0, 10.0), (1000.0, 100.0)], MarkShape::Cross)];
        let svg = scatter_svg(&s, &ScatterOptions::default()).unwrap();
        let doc = parse(&svg);
        let marks = with_class(&doc, "mark");
        let (xs, xe) = x_range();
        let (ys, ye) = y_range();
        // x spans decades 0..3, y spans 0..2
        let p = &marks[1];
        assert!((attr(p, "data-x") - (xs + 2.0 / 3.0 * (xe - xs))).abs() < 1e-3);
        assert!((attr(p, "data-y") - (ys + 0.5 * (ye - ys))).abs() < 1e-3);

        let axis = Axis::fit(Scale::Log10, [1.0, 1000.0], 0.0, 300.0);
        assert!((axis.position(2.0) - axis.position(1.0) - 100.0 * 2f64.log10()).abs() < 1e-9);
        assert_eq!(axis.ticks(), [1.0, 10.0, 100.0, 1000.0]);
    }

    #[test]
    fn scatter_errors() {
        let opts = ScatterOptions::default();
        assert_eq!(scatter_svg(&[], &opts), Err(PlotError::Empty));
        match scatter_svg(&[series("a", &[(1.0, 1.0), (0.0, 2.0)], MarkShape::Circle)], &opts) {
            Err(PlotError::NonPositive { index: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        let dup = [series("a", &[(1.0, 1.0)], MarkShape::Circle), series("a", &[(1.0, 1.0)], MarkShape::Cross)];
        assert!(matches!(scatter_svg(&dup, &opts), Err(PlotError::DuplicateLabel(_))));
        let linear = ScatterOptions {
            x_scale: Scale::Linear,
            y_scale: Scale::Linear,
            ..ScatterOptions::default()
        };
        assert!(scatter_svg(&[series("a", &[(-1.0, 0.0)], MarkShape::Square)], &linear).is_ok());
    }

    #[test]
    fn distinct_shapes_and_escaping() {
        let s = [
            series("KADABRA <fast>", &[(1.0, 2.0), (3.0, 4.0)], MarkShape::Circle),
            series("RK & co", &[(2.0, 2.0)], MarkShape::Cross),
            series("roadNet-TX", &[(5.0, 5.0)], MarkShape::Square),
        ];
        let svg = scatter_svg(&s, &ScatterOptions::default()).unwrap();
        let doc = parse(&svg);
        let marks = with_class(&doc, "mark");
        let tags: Vec<&str> = marks.iter().map(|n| n.tag_name().name()).collect();
        assert_eq!(tags, ["circle", "circle", "path", "rect"]);
        assert!(svg.contains("KADABRA &lt;fast&gt;"));
    }

    #[test]
    fn bar_heights_follow_log_ratio() {
        let bars = |r: &[f64]| -> Vec<(String, f64)> { r.iter().enumerate().map(|(i, v)| (format!("g{i}"), *v)).collect() };
        let svg = speedup_bars_svg(&bars(&[10.0, 100.0]), "", "speedup").unwrap();
        let doc = parse(&svg);
        let rects = with_class(&doc, "bar");
        assert_eq!(rects.len(), 2);
        let (h1, h2) = (attr(&rects[0], "height"), attr(&rects[1], "height"));
        assert!((h2 - 2.0 * h1).abs() < 1e-3, "{h1} {h2}");

        let svg = speedup_bars_svg(&bars(&[1.0, 1.0, 1.0]), "", "").unwrap();
        let doc = parse(&svg);
        let unity = attr(&with_class(&doc, "unity")[0], "y1");
        for r in with_class(&doc, "bar") {
            assert_eq!(attr(&r, "height"), 0.0);
            assert!((attr(&r, "y") - unity).abs() < 1e-3);
        }

        let svg = speedup_bars_svg(&bars(&[2.0, 8.0]), "", "").unwrap();
        let doc = parse(&svg);
        let gm = &with_class(&doc, "gm")[0];
        assert!((attr(gm, "data-value") - 4.0).abs() < 1e-12);
        assert!(speedup_bars_svg(&bars(&[1.0, 0.0]), "", "").is_err());
        assert!(speedup_bars_svg(&[], "", "").is_err());
    }

    #[test]
    fn box_statistics() {
        let s = box_stats(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((s.median, s.q1, s.q3), (3.0, 2.0, 4.0));
        assert!(s.outliers.is_empty());
        let c = box_stats(&[2.0; 5]).unwrap();
        assert_eq!((c.q1, c.q3), (2.0, 2.0));
        // Q1 1.75, Q3 27.25, upper fence 65.5
        let o = box_stats(&[1.0, 2.0, 3.0, 100.0]).unwrap();
        assert_eq!((o.q1, o.q3), (1.75, 27.25));
        assert_eq!(o.outliers, [100.0]);
        assert_eq!(o.whisker_high, 3.0);
    }

    #[test]
    fn box_plot_svg_structure() {
        let groups = vec![
            ("a".to_string(), vec![1.0, 2.0, 3.0, 100.0]),
            ("b".to_string(), vec![5.0; 3]),
        ];
        let svg = box_plot_svg(&groups, "deviation", "relative").unwrap();
        let doc = parse(&svg);
        assert_eq!(with_class(&doc, "box").len(), 2);
        assert_eq!(with_class(&doc, "outlier").len(), 1);
        let zero = &with_class(&doc, "box")[1];
        assert_eq!(attr(zero, "height"), 0.0);
        assert!(box_plot_svg(&[("e".into(), vec![])], "", "").is_err());
    }

    #[test]
    fn relative_deviation_cases() {
        assert_eq!(relative_deviation(&[10.0, 10.0]).unwrap(), [0.0, 0.0]);
        let d = relative_deviation(&[8.0, 12.0]).unwrap();
        assert!((d[0] + 0.2).abs() < 1e-15 && (d[1] - 0.2).abs() < 1e-15);
        assert_eq!(relative_deviation(&[-1.0, 1.0]), Err(PlotError::ZeroMean));
        assert_eq!(relative_deviation(&[1.0]), Err(PlotError::TooFewValues));
    }

    #[test]
    fn figure_naming() {
        assert_eq!(figure_path(Path::new("r"), "speedup", "kadabra"), Path::new("r/speedup_kadabra.svg"));
    }
}
