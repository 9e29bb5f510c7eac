//! Self-contained SVG line plots of aggregate curves.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::output::Aggregate;
use crate::error::{HbfError, Result};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotMetric {
    Se,
    Ee,
    Power,
}

impl PlotMetric {
    fn value(self, a: &Aggregate) -> f64 {
        match self {
            PlotMetric::Se => a.se_mean,
            PlotMetric::Ee => a.ee_mean,
            PlotMetric::Power => a.power_mw_mean,
        }
    }

    fn label(self) -> &'static str {
        match self {
            PlotMetric::Se => "spectral efficiency (bits/s/Hz)",
            PlotMetric::Ee => "energy efficiency (bits/Hz/J)",
            PlotMetric::Power => "power (mW)",
        }
    }

    pub fn file_stem(self) -> &'static str {
        match self {
            PlotMetric::Se => "se",
            PlotMetric::Ee => "ee",
            PlotMetric::Power => "power",
        }
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = lo.abs().max(1.0) * 0.05;
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

/// One polyline per solver through its mean values; non-finite means break
/// nothing, they are skipped.
pub fn render_svg(aggregates: &[Aggregate], metric: PlotMetric, x_label: &str) -> Result<String> {
    if aggregates.is_empty() {
        return Err(HbfError::InvalidArgument("nothing to plot".into()));
    }
    let mut solvers: Vec<&str> = aggregates.iter().map(|a| a.solver.as_str()).collect();
    solvers.sort();
    solvers.dedup();
    let (x0, x1) = range(aggregates.iter().map(|a| a.axis_value));
    let (y0, y1) = range(aggregates.iter().map(|a| metric.value(a)));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">{}</text>"#,
        TOP + ph / 2.0,
        metric.label()
    );
    for (i, name) in solvers.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<(f64, f64)> = aggregates
            .iter()
            .filter(|a| a.solver == *name && metric.value(a).is_finite())
            .map(|a| (a.axis_value, metric.value(a)))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let points: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            s,
            r#"<polyline class="series" data-solver="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
            escape(name),
            points.join(" ")
        );
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(name)
        );
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(aggregates: &[Aggregate], metric: PlotMetric, x_label: &str, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, render_svg(aggregates, metric, x_label)?).map_err(|e| HbfError::io(path, e))
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 || v == v.round() {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::sweep::Axis;

    fn agg(solver: &str, x: f64, y: f64) -> Aggregate {
        Aggregate {
            solver: solver.into(),
            axis: Axis::Snr,
            axis_value: x,
            n: 1,
            failed: 0,
            se_mean: y,
            se_stderr: 0.0,
            power_mw_mean: 1.0,
            power_mw_stderr: 0.0,
            ee_mean: y,
            ee_stderr: 0.0,
        }
    }

    #[test]
    fn one_series_per_solver() {
        let a = vec![agg("x", 0.0, 1.0), agg("x", 1.0, 2.0), agg("y<z", 0.0, 3.0), agg("w", 0.0, f64::NAN)];
        let svg = render_svg(&a, PlotMetric::Se, "SNR (dB)").unwrap();
        assert_eq!(svg.matches(r#"class="series""#).count(), 3);
        assert!(svg.contains("y&lt;z"));
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(render_svg(&[], PlotMetric::Ee, "x").is_err());
    }
}
