use std::fs;
use std::path::{Path, PathBuf};

use phonon_source::dynamics::adiabatic_sweep;
use phonon_source::experiment::{drive_points, run_sweep, thermal_points, PreparationPoint, PreparationRun};
use phonon_source::model::{check_regime, RegimeReport};
use phonon_source::oracle;
use phonon_source::par::Execution;

use crate::config::{ConfigError, RunConfig};
use crate::output::{self, ResultTable};
use crate::plot;

pub const EXIT_OK: u8 = 0;
pub const EXIT_IO: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_INTEGRATOR: u8 = 3;
pub const EXIT_CHECK_FAILED: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Io { path: PathBuf, source: std::io::Error },
    Config(String),
    Integrator { point: String, source: phonon_source::Error },
    Model(phonon_source::Error),
    ChecksFailed { failed: usize, report: PathBuf },
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Io { path, source } => write!(f, "{}: {source}", path.display()),
            Self::Config(msg) => write!(f, "config: {msg}"),
            Self::Integrator { point, source } => write!(f, "run {point} aborted: {source}"),
            Self::Model(e) => write!(f, "{e}"),
            Self::ChecksFailed { failed, report } => {
                write!(f, "{failed} check(s) failed; see {}", report.display())
            }
        }
    }
}

impl std::error::Error for CliError {}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e.0)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Io { .. } => EXIT_IO,
            Self::Config(_) | Self::Model(_) => EXIT_CONFIG,
            Self::Integrator { .. } => EXIT_INTEGRATOR,
            Self::ChecksFailed { .. } => EXIT_CHECK_FAILED,
        }
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

pub fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write(dir: &Path, name: &str, body: &str) -> CliResult<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, body).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    log::info!("wrote {}", path.display());
    Ok(path)
}

fn prepare_dir(dir: &Path) -> CliResult {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_owned(),
        source,
    })
}

fn point_label(p: &PreparationPoint) -> String {
    format!("nth{}_drive{}", p.n_th, p.drive_over_g)
}

/// Writes the regime report next to the results.
fn write_regime(cfg: &RunConfig, dir: &Path) -> CliResult<(RegimeReport, PathBuf)> {
    let report = check_regime(&cfg.derived(), &cfg.physical());
    let csv = output::report_csv(&output::regime_rows(&report));
    let path = write(dir, "regime.csv", &csv)?;
    write(dir, "regime.txt", &output::regime_text(&report))?;
    Ok((report, path))
}

fn run_points(cfg: &RunConfig, dir: &Path, points: &[PreparationPoint]) -> CliResult<Vec<PreparationRun>> {
    cfg.validate()?;
    prepare_dir(dir)?;
    let setup = cfg.preparation();
    let hash = cfg.hash();
    let results = run_sweep(&setup, points, Execution::default());
    let mut runs = Vec::with_capacity(points.len());
    for (point, res) in points.iter().zip(results) {
        let run = res.map_err(|source| CliError::Integrator {
            point: point_label(point),
            source,
        })?;
        for w in &run.trajectory.diagnostics.warnings {
            log::warn!("{}: {w}", point_label(point));
        }
        runs.push(run);
    }
    let (regime, _) = write_regime(cfg, dir)?;
    if !regime.all_pass() {
        log::warn!("validity regime conditions fail; see regime.txt");
    }
    for run in &runs {
        let stem = format!("prep_{}", point_label(&run.point));
        let prov = output::provenance(&hash, &run.derived, run.gamma, &check_regime(&run.derived, &cfg.physical()));
        let table = ResultTable::from_trajectory(&run.trajectory);
        write(dir, &format!("{stem}.csv"), &table.to_csv(&prov))?;
        let svg = plot::render_svg(&table, "t_g", &plot::SIMULATION_SERIES).map_err(|e| CliError::Config(e.0))?;
        write(dir, &format!("{stem}.svg"), &svg)?;
        if !run.summary.interior {
            log::warn!("{stem}: g2 minimum is not interior to the window; raise t_max");
        }
    }
    let d = cfg.derived();
    let prov = output::provenance(&hash, &d, setup.gamma(&d), &regime);
    let summaries: Vec<_> = runs.iter().map(|r| r.summary).collect();
    write(dir, "summary.csv", &output::summary_csv(&prov, &summaries))?;
    Ok(runs)
}

fn print_summaries(runs: &[PreparationRun]) {
    println!("n_th      drive/g   t_min (g·t)  g2_min     P1_max     interior");
    for r in runs {
        let s = &r.summary;
        println!(
            "{:<9} {:<9} {:<12.4} {:<10.6} {:<10.6} {}",
            s.point.n_th, s.point.drive_over_g, s.t_min_g, s.g2_min, s.p1_max, s.interior
        );
    }
}

pub fn simulate(cfg: &RunConfig, dir: &Path) -> CliResult {
    let runs = run_points(cfg, dir, &[cfg.point()?])?;
    print_summaries(&runs);
    Ok(())
}

pub fn sweep_thermal(cfg: &RunConfig, dir: &Path) -> CliResult {
    let runs = run_points(cfg, dir, &thermal_points(&cfg.n_th_sweep, cfg.drive_over_g))?;
    print_summaries(&runs);
    Ok(())
}

pub fn sweep_drive(cfg: &RunConfig, dir: &Path) -> CliResult {
    let runs = run_points(cfg, dir, &drive_points(cfg.bath_occupation()?, &cfg.drive_sweep))?;
    print_summaries(&runs);
    Ok(())
}

/// Runs the dark-to-phonon ramp. With `after`, the ramp starts `dwell_ms`
/// after the g² minimum recorded in that summary file.
pub fn adiabatic(cfg: &RunConfig, dir: &Path, after: Option<&Path>) -> CliResult {
    cfg.validate()?;
    prepare_dir(dir)?;
    let t_start = match after {
        Some(p) => {
            let t_min = output::read_t_min(&read(p)?)
                .ok_or_else(|| CliError::Config(format!("{}: no t_min_ms in summary", p.display())))?;
            t_min + cfg.dwell_ms
        }
        None => cfg.dwell_ms,
    };
    let d = cfg.derived();
    let spec = cfg.sweep_spec();
    let res = adiabatic_sweep(&d, &spec).map_err(|source| CliError::Integrator {
        point: format!("adiabatic v={}", spec.rate_per_ms),
        source,
    })?;
    let regime = check_regime(&d, &cfg.physical());
    let prov = output::provenance(&cfg.hash(), &d, d.gamma_p, &regime);
    write(dir, "adiabatic.csv", &ResultTable::from_sweep(&res, t_start).to_csv(&prov))?;
    let end = res.last();
    let summary = format!(
        "{prov}key,value\nrate_per_ms,{}\nt_start_ms,{}\nt_end_ms,{}\nloss_ratio,{}\nfinal_dark_pop,{}\nfinal_phonon_fraction,{}\nfinal_phonon_pop,{}\nfinal_bright_leak,{}\nfinal_norm,{}\n",
        output::num(spec.rate_per_ms),
        output::num(t_start),
        output::num(t_start + res.t_end_ms),
        output::num(res.loss_ratio),
        output::num(end.dark_pop),
        output::num(end.phonon_fraction),
        output::num(end.phonon_pop),
        output::num(end.bright_leak),
        output::num(end.norm),
    );
    write(dir, "adiabatic_summary.csv", &summary)?;
    println!(
        "ramp {:.4} ms: dark population {:.6}, phonon fraction {:.6}, bright leakage {:.3e}, t_end·γ_p = {:.3}",
        res.t_end_ms, end.dark_pop, end.phonon_fraction, end.bright_leak, res.loss_ratio
    );
    Ok(())
}

pub fn oracle(cfg: &RunConfig, dir: &Path) -> CliResult {
    cfg.validate()?;
    prepare_dir(dir)?;
    let reports = oracle::run_all(&cfg.derived(), Execution::default()).map_err(CliError::Model)?;
    let path = write(dir, "oracle.csv", &output::report_csv(&output::oracle_rows(&reports)))?;
    let text = output::oracle_text(&reports);
    write(dir, "oracle.txt", &text)?;
    print!("{text}");
    let failed = reports.iter().filter(|r| !r.pass()).count();
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed, report: path });
    }
    Ok(())
}

pub fn check_regime_cmd(cfg: &RunConfig, dir: &Path) -> CliResult {
    cfg.validate()?;
    prepare_dir(dir)?;
    let (report, path) = write_regime(cfg, dir)?;
    print!("{}", output::regime_text(&report));
    if !report.all_pass() {
        return Err(CliError::ChecksFailed {
            failed: report.failures().count(),
            report: path,
        });
    }
    Ok(())
}
