//! Training-log analysis: curve series, gaps, trend slopes, SVG charts and
//! per-metric summaries.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::training::log::{TrainLog, CSV_HEADER};

#[derive(Debug, Clone, PartialEq)]
pub struct CurveSeries {
    pub name: String,
    /// `(epoch, value)`, epochs strictly increasing.
    pub points: Vec<(usize, f64)>,
}

impl CurveSeries {
    pub fn new(name: impl Into<String>, points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::invalid("series epochs must be strictly increasing"));
        }
        Ok(CurveSeries { name: name.into(), points })
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.1).collect()
    }

    /// The first `n` points.
    pub fn head(&self, n: usize) -> CurveSeries {
        CurveSeries { name: self.name.clone(), points: self.points[..n.min(self.points.len())].to_vec() }
    }
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

/// Parses a long-format training log; `path` is only used in errors.
pub fn parse_log(text: &str, path: &Path) -> Result<Vec<CurveSeries>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| parse_error(path, 1, e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(parse_error(path, 1, format!("expected header `{CSV_HEADER}`")));
    }
    let mut order: Vec<String> = Vec::new();
    let mut by_name: BTreeMap<String, Vec<(usize, f64, usize)>> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_error(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 3 {
            return Err(parse_error(path, line, format!("expected 3 fields, found {}", record.len())));
        }
        let epoch: usize = record[0].trim().parse().map_err(|_| parse_error(path, line, format!("bad epoch `{}`", &record[0])))?;
        let name = record[1].trim().to_string();
        if name.is_empty() {
            return Err(parse_error(path, line, "empty metric name"));
        }
        let value: f64 = record[2].trim().parse().map_err(|_| parse_error(path, line, format!("bad value `{}`", &record[2])))?;
        if !by_name.contains_key(&name) {
            order.push(name.clone());
        }
        by_name.entry(name).or_default().push((epoch, value, line));
    }
    order
        .into_iter()
        .map(|name| {
            let mut pts = by_name.remove(&name).unwrap_or_default();
            pts.sort_by_key(|p| p.0);
            if let Some(w) = pts.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(parse_error(path, w[1].2.max(w[0].2), format!("duplicate epoch {} for {name}", w[0].0)));
            }
            Ok(CurveSeries { name, points: pts.into_iter().map(|(e, v, _)| (e, v)).collect() })
        })
        .collect()
}

/// In-memory counterpart of [`load_log`].
pub fn series_from_log(log: &TrainLog) -> Vec<CurveSeries> {
    let mut out: Vec<CurveSeries> = Vec::new();
    for r in &log.records {
        for (name, v) in &r.metrics {
            match out.iter_mut().find(|s| &s.name == name) {
                Some(s) => s.points.push((r.epoch, *v)),
                None => out.push(CurveSeries { name: name.clone(), points: vec![(r.epoch, *v)] }),
            }
        }
    }
    out
}

pub fn load_log(path: &Path) -> Result<Vec<CurveSeries>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_log(&text, path)
}

/// Pointwise `real - fake`.
pub fn gap_series(real: &CurveSeries, fake: &CurveSeries) -> Result<CurveSeries> {
    if real.points.len() != fake.points.len() || real.points.iter().zip(&fake.points).any(|(a, b)| a.0 != b.0) {
        return Err(Error::Shape(format!("{} and {} are on different epoch grids", real.name, fake.name)));
    }
    let points = real.points.iter().zip(&fake.points).map(|(a, b)| (a.0, a.1 - b.1)).collect();
    Ok(CurveSeries { name: "gap".into(), points })
}

/// Ordinary least-squares slope of value against epoch.
pub fn ols_slope(points: &[(usize, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::invalid(format!("slope needs at least 2 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0 as f64).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 as f64 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("slope needs at least two distinct epochs"));
    }
    Ok(sxy / sxx)
}

/// Slope over the trailing `window` fraction of the series.
pub fn trend_slope(s: &CurveSeries, window: f64) -> Result<f64> {
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::invalid(format!("window must lie in (0, 1], got {window}")));
    }
    let k = ((s.points.len() as f64) * window).ceil() as usize;
    ols_slope(&s.points[s.points.len() - k.min(s.points.len())..])
}

const PALETTE: [&str; 8] = ["#1f77b4", "#ff7f0e", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;

fn padded_range(lo: f64, hi: f64) -> (f64, f64) {
    let span = hi - lo;
    if span <= 0.0 {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
        (lo - pad, hi + pad)
    } else {
        (lo - 0.05 * span, hi + 0.05 * span)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Line chart with axes, ticks, a legend and one polyline per series.
pub fn render_svg(series: &[CurveSeries], title: &str) -> Result<String> {
    if series.is_empty() || series.iter().all(|s| s.points.is_empty()) {
        return Err(Error::invalid("nothing to plot"));
    }
    let all = || series.iter().flat_map(|s| s.points.iter());
    let (x0, x1) = padded_range(
        all().map(|p| p.0 as f64).fold(f64::INFINITY, f64::min),
        all().map(|p| p.0 as f64).fold(f64::NEG_INFINITY, f64::max),
    );
    let (y0, y1) = padded_range(
        all().map(|p| p.1).fold(f64::INFINITY, f64::min),
        all().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max),
    );
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut o = String::new();
    let w = &mut o;
    let _ = writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#);
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(w, r#"<text x="{:.2}" y="18" text-anchor="middle" font-size="14">{}</text>"#, LEFT + pw / 2.0, escape(title));
    let _ = writeln!(w, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (xv, yv) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(w, r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#ccc"/>"##, TOP, TOP + ph);
        let _ = writeln!(w, r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{xv:.0}</text>"#, TOP + ph + 16.0);
        let _ = writeln!(w, r##"<line x1="{LEFT}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#ccc"/>"##, LEFT + pw);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 6.0, py + 4.0, tick_label(yv));
    }
    let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">epoch</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(w, r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">value</text>"#, TOP + ph / 2.0, TOP + ph / 2.0);
    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0 as f64), sy(p.1))).collect();
        let _ = writeln!(w, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 10.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(w, r#"<line x1="{lx}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="3"/>"#, lx + 20.0);
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.name));
    }
    o.push_str("</svg>\n");
    Ok(o)
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

pub fn render_curves(series: &[CurveSeries], path: &Path, title: &str) -> Result<()> {
    let svg = render_svg(series, title)?;
    crate::training::log::write_file(path, &svg)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub name: String,
    pub points: usize,
    pub min: f64,
    pub max: f64,
    #[serde(rename = "final")]
    pub last: f64,
    /// Trend over the trailing half; absent with fewer than two points.
    pub slope: Option<f64>,
}

pub fn summarize(series: &[CurveSeries]) -> Vec<MetricSummary> {
    series
        .iter()
        .filter(|s| !s.points.is_empty())
        .map(|s| {
            let v = s.values();
            MetricSummary {
                name: s.name.clone(),
                points: v.len(),
                min: v.iter().copied().fold(f64::INFINITY, f64::min),
                max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                last: *v.last().expect("non-empty"),
                slope: trend_slope(s, 0.5).ok(),
            }
        })
        .collect()
}

pub fn summary_json(series: &[CurveSeries]) -> String {
    serde_json::to_string_pretty(&summarize(series)).expect("summary serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(name: &str, pts: &[(usize, f64)]) -> CurveSeries {
        CurveSeries::new(name, pts.to_vec()).unwrap()
    }

    #[test]
    fn parse_counts_and_errors() {
        let p = Path::new("log.csv");
        assert!(parse_log("", p).unwrap().is_empty());
        let mut text = String::from("epoch,metric_name,value\n");
        for e in 0..10 {
            for m in ["a", "b", "c"] {
                text.push_str(&format!("{e},{m},{}\n", e as f64 * 0.5));
            }
        }
        let s = parse_log(&text, p).unwrap();
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|s| s.points.len() == 10));
        let dup = "epoch,metric_name,value\n0,a,1\n1,a,2\n1,a,3\n";
        match parse_log(dup, p).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            e => panic!("unexpected {e}"),
        }
        let bad = "epoch,metric_name,value\n0,a,1\nx,a,2\n";
        assert!(matches!(parse_log(bad, p).unwrap_err(), Error::Parse { line: 3, .. }));
    }

    #[test]
    fn gap_and_slope() {
        let g = gap_series(&series("r", &[(1, 5.0), (2, 7.0)]), &series("f", &[(1, 2.0), (2, 3.0)])).unwrap();
        assert_eq!(g.points, vec![(1, 3.0), (2, 4.0)]);
        assert!(gap_series(&series("r", &[(1, 5.0)]), &series("f", &[(2, 2.0)])).is_err());
        assert_eq!(trend_slope(&series("x", &[(0, 0.0), (1, 1.0), (2, 2.0)]), 1.0).unwrap(), 1.0);
        assert_eq!(trend_slope(&series("x", &[(0, 4.0), (1, 4.0), (2, 4.0)]), 1.0).unwrap(), 0.0);
        assert!(trend_slope(&series("x", &[(0, 4.0)]), 1.0).is_err());
    }

    #[test]
    fn svg_has_one_polyline_per_series() {
        let one = render_svg(&[series("flat", &[(0, 1.0), (1, 1.0)])], "t").unwrap();
        assert_eq!(one.matches("<polyline").count(), 1);
        let two = render_svg(&[series("d_loss", &[(0, 1.0)]), series("g_loss", &[(0, 2.0)])], "t").unwrap();
        assert!(two.contains(">d_loss<") && two.contains(">g_loss<"));
        assert!(render_svg(&[], "t").is_err());
    }
}
