//! Minimal standalone SVG plots: curves, reversal ladders and time-delay profiles.

use std::fmt::Write;

use crate::output::VERSION;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    /// Polylines; logarithmic abscissa when it is positive and spans two decades or more.
    Curve,
    /// Markers only, linear axes.
    Ladder,
    /// Polyline with markers, linear axes.
    Profile,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SvgError {
    #[error("dataset has no finite points to plot")]
    EmptyDataset,
}

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64> + Clone, log: bool) -> Self {
        let map = |v: f64| if log { v.log10() } else { v };
        let (mut lo, mut hi) = values
            .map(map)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        if lo == hi {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.log10() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn label(&self, t: f64) -> String {
        let v = self.lo + t * (self.hi - self.lo);
        if self.log {
            format!("1e{v:.1}")
        } else {
            format!("{v:.4}")
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders `dataset` as a standalone SVG document with deterministic element order.
pub fn emit_svg(dataset: &Dataset, kind: PlotKind) -> Result<String, SvgError> {
    let finite = |p: &&[f64; 2]| p[0].is_finite() && p[1].is_finite();
    let xs = dataset.series.iter().flat_map(|s| s.points.iter().filter(finite).map(|p| p[0]));
    if xs.clone().next().is_none() {
        return Err(SvgError::EmptyDataset);
    }
    let log_x = kind == PlotKind::Curve && {
        let (lo, hi) = xs.clone().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
        lo > 0.0 && hi / lo >= 100.0
    };
    let x_axis = Axis::fit(xs, log_x);
    let y_axis = Axis::fit(
        dataset.series.iter().flat_map(|s| s.points.iter().filter(finite).map(|p| p[1])),
        false,
    );
    let px = |x: f64| LEFT + x_axis.unit(x) * (W - LEFT - RIGHT);
    let py = |y: f64| H - BOTTOM - y_axis.unit(y) * (H - TOP - BOTTOM);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(s, "<!-- generator: bykov-atlas {VERSION} -->");
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{}</text>"#,
        W / 2.0,
        escape(&dataset.title)
    );
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<path d="M{x0:.2},{y1:.2} L{x0:.2},{y0:.2} L{x1:.2},{y0:.2}" stroke="black" fill="none"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let gx = x0 + t * (x1 - x0);
        let gy = y0 - t * (y0 - y1);
        let _ = writeln!(
            s,
            r#"<line x1="{gx:.2}" y1="{y0:.2}" x2="{gx:.2}" y2="{:.2}" stroke="black"/><text x="{gx:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="10">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            x_axis.label(t)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{gy:.2}" x2="{x0:.2}" y2="{gy:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end" font-family="sans-serif" font-size="10">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            gy + 3.0,
            y_axis.label(t)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 12.0,
        escape(&dataset.x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" font-family="sans-serif" font-size="12" transform="rotate(-90 16 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&dataset.y_label)
    );

    for (k, series) in dataset.series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = series.points.iter().filter(finite).map(|p| (px(p[0]), py(p[1]))).collect();
        let _ = writeln!(s, r#"<g id="series-{k}"><title>{}</title>"#, escape(&series.name));
        if kind != PlotKind::Ladder && pts.len() > 1 {
            let mut d = String::new();
            for (i, (x, y)) in pts.iter().enumerate() {
                let _ = write!(d, "{}{x:.2},{y:.2}", if i == 0 { "M" } else { " L" });
            }
            let _ = writeln!(s, r#"<path d="{d}" stroke="{color}" fill="none" stroke-width="1.2"/>"#);
        }
        if kind != PlotKind::Curve || pts.len() == 1 {
            for (x, y) in &pts {
                let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="2.5" fill="{color}"/>"#);
            }
        }
        let _ = writeln!(s, "</g>");
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" font-family="sans-serif" font-size="11" fill="{color}">{}</text>"#,
            x1 - 150.0,
            y1 + 14.0 * (k as f64 + 1.0),
            escape(&series.name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(points: Vec<[f64; 2]>) -> Dataset {
        Dataset {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series {
                name: "s".into(),
                points,
            }],
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        assert_eq!(emit_svg(&data(vec![]), PlotKind::Curve), Err(SvgError::EmptyDataset));
        assert_eq!(
            emit_svg(&data(vec![[f64::NAN, 1.0]]), PlotKind::Ladder),
            Err(SvgError::EmptyDataset)
        );
    }

    #[test]
    fn rendering_is_deterministic() {
        let d = data((1..50).map(|i| [10f64.powi(-i / 5), (i as f64).sin()]).collect());
        let a = emit_svg(&d, PlotKind::Curve).unwrap();
        assert_eq!(a, emit_svg(&d, PlotKind::Curve).unwrap());
        assert!(a.starts_with("<svg") && a.ends_with("</svg>\n"));
        assert!(a.contains("1e-"));
    }

    #[test]
    fn ladder_draws_markers_only() {
        let d = data((0..5).map(|n| [n as f64, 0.92 * n as f64]).collect());
        let svg = emit_svg(&d, PlotKind::Ladder).unwrap();
        assert_eq!(svg.matches("<circle").count(), 5);
        assert!(!svg.contains("stroke-width=\"1.2\""));
    }
}
