//! Minimal SVG line charts: one panel per observable against g·t.

use std::fmt::Write as _;

use crate::output::ResultTable;

const WIDTH: f64 = 640.0;
const PANEL_H: f64 = 160.0;
const MARGIN: f64 = 48.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotError(pub String);

impl std::fmt::Display for PlotError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for PlotError {}

/// Splits a series into runs of defined points.
fn segments(xs: &[f64], ys: &[Option<f64>]) -> Vec<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        match y {
            Some(y) if y.is_finite() => cur.push((*x, *y)),
            _ => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn range(vals: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        (0.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

/// Plots each of `series` against column `x`. Undefined cells break the
/// line instead of being interpolated.
pub fn render_svg(table: &ResultTable, x: &str, series: &[&str]) -> Result<String, PlotError> {
    if table.rows.is_empty() {
        return Err(PlotError("cannot plot an empty table".into()));
    }
    let xs: Vec<f64> = table
        .column(x)
        .ok_or_else(|| PlotError(format!("no column {x:?}")))?
        .into_iter()
        .map(|v| v.unwrap_or(f64::NAN))
        .collect();
    let (x0, x1) = range(xs.iter().copied().filter(|v| v.is_finite()));
    let height = MARGIN + series.len() as f64 * (PANEL_H + MARGIN);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let inner_w = WIDTH - 2.0 * MARGIN;
    for (k, name) in series.iter().enumerate() {
        let ys = table
            .column(name)
            .ok_or_else(|| PlotError(format!("no column {name:?}")))?;
        let top = MARGIN + k as f64 * (PANEL_H + MARGIN);
        let (y0, y1) = range(ys.iter().flatten().copied().filter(|v| v.is_finite()));
        let px = |v: f64| MARGIN + (v - x0) / (x1 - x0) * inner_w;
        let py = |v: f64| top + PANEL_H - (v - y0) / (y1 - y0) * PANEL_H;
        let _ = writeln!(
            s,
            r#"<g data-series="{name}"><rect x="{MARGIN}" y="{top}" width="{inner_w}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let _ = writeln!(
            s,
            r#"<text x="{MARGIN}" y="{:.1}" font-family="sans-serif" font-size="12">{name}  [{y0:.4}, {y1:.4}] vs {x} [{x0:.3}, {x1:.3}]</text>"#,
            top - 6.0
        );
        for seg in segments(&xs, &ys) {
            let pts: Vec<String> = seg.iter().map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b))).collect();
            let _ = writeln!(
                s,
                r#"<polyline data-series="{name}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                COLORS[k % COLORS.len()],
                pts.join(" ")
            );
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub const SIMULATION_SERIES: [&str; 5] = ["g2", "P0", "P1", "mean_n", "purity"];

#[cfg(test)]
mod tests {
    use super::*;

    fn table(g2: &[Option<f64>]) -> ResultTable {
        let mut t = ResultTable::new(&["t_g", "g2", "P1"]);
        for (i, g) in g2.iter().enumerate() {
            t.push(vec![Some(i as f64), *g, Some(0.1 * i as f64)]);
        }
        t
    }

    #[test]
    fn one_polyline_per_series() {
        let svg = render_svg(&table(&[Some(2.0), Some(1.5)]), "t_g", &["g2", "P1"]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches(r#"<polyline data-series="g2""#).count(), 1);
    }

    #[test]
    fn gap_breaks_line() {
        let svg = render_svg(&table(&[Some(2.0), Some(1.5), None, Some(1.0), Some(0.9)]), "t_g", &["g2"]).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
    }

    #[test]
    fn deterministic_and_rejects_empty() {
        let t = table(&[Some(2.0), Some(1.0), Some(1.2)]);
        assert_eq!(render_svg(&t, "t_g", &["g2"]), render_svg(&t, "t_g", &["g2"]));
        assert!(render_svg(&ResultTable::new(&["t_g", "g2"]), "t_g", &["g2"]).is_err());
        assert!(render_svg(&t, "t_g", &["nope"]).is_err());
    }
}
