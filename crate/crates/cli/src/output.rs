//! CSV tables, provenance headers and check reports.

use std::fmt::Write as _;

use phonon_source::dynamics::{SweepResult, Trajectory};
use phonon_source::experiment::PreparationSummary;
use phonon_source::model::{DerivedParams, RegimeReport};
use phonon_source::observables::ObservableRecord;
use phonon_source::oracle::OracleReport;

pub const SIMULATION_HEADER: [&str; 8] = ["t_ms", "t_g", "g2", "P0", "P1", "mean_n", "purity", "trace_err"];
pub const REPORT_HEADER: [&str; 8] = ["check", "lhs", "rhs", "ratio", "analytic", "numeric", "rel_dev", "pass"];

/// Full double precision: 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Rectangular numeric table; `None` cells are written as empty fields.
#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl ResultTable {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| (*s).to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.header.len(), "table rows must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn from_trajectory(traj: &Trajectory<ObservableRecord>) -> Self {
        let mut t = Self::new(&SIMULATION_HEADER);
        for ((tm, tg), r) in traj.times_ms.iter().zip(&traj.times_scaled).zip(&traj.records) {
            t.push(vec![
                Some(*tm),
                Some(*tg),
                r.g2_zero,
                Some(r.p(0)),
                Some(r.p(1)),
                Some(r.mean_n),
                Some(r.purity),
                Some(r.trace_error),
            ]);
        }
        t
    }

    pub fn from_sweep(res: &SweepResult, t_offset_ms: f64) -> Self {
        let mut t = Self::new(&["t_ms", "omega_d", "phonon_fraction", "dark_pop", "bright_leak", "phonon_pop"]);
        for r in &res.rows {
            t.push(vec![
                Some(t_offset_ms + r.t_ms),
                Some(r.omega_d),
                Some(r.phonon_fraction),
                Some(r.dark_pop),
                Some(r.bright_leak),
                Some(r.phonon_pop),
            ]);
        }
        t
    }

    pub fn to_csv(&self, provenance: &str) -> String {
        let mut out = String::from(provenance);
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| opt(*c)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `# key = value` comment block placed at the top of every CSV.
pub fn provenance(config_hash: &str, d: &DerivedParams, gamma: f64, regime: &RegimeReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# config_sha256 = {config_hash}");
    let _ = writeln!(s, "# g_nl_khz = {}", d.g_nl);
    let _ = writeln!(s, "# gamma_khz = {gamma}");
    let _ = writeln!(s, "# omega_tilde_khz = {}", d.omega_tilde);
    let failing: Vec<&str> = regime.failures().map(|r| r.name).collect();
    if failing.is_empty() {
        let _ = writeln!(s, "# regime = pass");
    } else {
        let _ = writeln!(s, "# regime = fail ({})", failing.join(" "));
    }
    s
}

pub fn summary_csv(provenance: &str, rows: &[PreparationSummary]) -> String {
    let mut s = String::from(provenance);
    s.push_str("n_th,drive_over_g,t_min_ms,t_min_g,g2_min,p1_at_tmin,p1_max,t_p1max_ms,g2_start,g2_at_tmax,interior\n");
    for r in rows {
        let cells = [
            r.point.n_th,
            r.point.drive_over_g,
            r.t_min_ms,
            r.t_min_g,
            r.g2_min,
            r.p1_at_tmin,
            r.p1_max,
            r.t_p1max_ms,
            r.g2_start,
            r.g2_at_tmax,
        ];
        let mut line: Vec<String> = cells.iter().map(|x| num(*x)).collect();
        line.push(r.interior.to_string());
        s.push_str(&line.join(","));
        s.push('\n');
    }
    s
}

/// Reads `t_min_ms` from the first data row of a summary CSV.
pub fn read_t_min(summary: &str) -> Option<f64> {
    let mut lines = summary.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next()?.split(',').collect();
    let col = header.iter().position(|h| *h == "t_min_ms")?;
    lines.next()?.split(',').nth(col)?.parse().ok()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub check: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub ratio: Option<f64>,
    pub analytic: Option<f64>,
    pub numeric: Option<f64>,
    pub rel_dev: Option<f64>,
    pub pass: bool,
}

pub fn regime_rows(r: &RegimeReport) -> Vec<ReportRow> {
    r.rows
        .iter()
        .map(|row| ReportRow {
            check: format!("regime/{}", row.name),
            lhs: Some(row.lhs),
            rhs: Some(row.rhs),
            ratio: Some(row.ratio),
            analytic: None,
            numeric: None,
            rel_dev: None,
            pass: row.pass,
        })
        .collect()
}

pub fn oracle_rows(reports: &[OracleReport]) -> Vec<ReportRow> {
    reports
        .iter()
        .flat_map(|r| {
            r.comparisons.iter().map(move |c| ReportRow {
                check: format!("{}/{}", r.check, c.label),
                lhs: None,
                rhs: None,
                ratio: None,
                analytic: Some(c.analytic),
                numeric: Some(c.numeric),
                rel_dev: c.rel_dev.is_finite().then_some(c.rel_dev),
                pass: c.pass,
            })
        })
        .collect()
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut s = REPORT_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            r.check,
            opt(r.lhs),
            opt(r.rhs),
            opt(r.ratio),
            opt(r.analytic),
            opt(r.numeric),
            opt(r.rel_dev),
            r.pass
        );
    }
    s
}

pub fn regime_text(r: &RegimeReport) -> String {
    let mut s = String::from("validity regime\n");
    for row in &r.rows {
        let _ = writeln!(
            s,
            "  [{}] {:<28} {:>12.6} {} {:<12.6} ratio {:.4} (threshold {})",
            if row.pass { "PASS" } else { "FAIL" },
            row.name,
            row.lhs,
            row.relation,
            row.rhs,
            row.ratio,
            row.threshold
        );
    }
    let _ = writeln!(s, "{}", if r.all_pass() { "all conditions hold" } else { "some conditions fail" });
    s
}

pub fn oracle_text(reports: &[OracleReport]) -> String {
    let mut s = String::from("exact-diagonalization checks\n");
    for r in reports {
        let _ = writeln!(
            s,
            "  [{}] {} (dims {:?}, tolerance {:?})",
            if r.pass() { "PASS" } else { "FAIL" },
            r.check,
            r.dims,
            r.tolerance
        );
        for c in &r.comparisons {
            let _ = writeln!(
                s,
                "      {:<32} analytic {:>14.6e}  numeric {:>14.6e}  |Δ| {:.3e}",
                c.label, c.analytic, c.numeric, c.abs_dev
            );
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_cells_and_precision() {
        let mut t = ResultTable::new(&["a", "b"]);
        t.push(vec![Some(0.1), None]);
        let csv = t.to_csv("# x\n");
        assert_eq!(csv, "# x\na,b\n1.0000000000000001e-1,\n");
        let back: f64 = "1.0000000000000001e-1".parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn summary_round_trip() {
        let text = "# h\nn_th,t_min_ms\n0.1,4.5e-2\n";
        assert_eq!(read_t_min(text), Some(0.045));
        assert_eq!(read_t_min("x\n"), None);
    }
}
