//! Preparation runs: a thermal dark polariton driven through the Kerr
//! Hamiltonian under the thermal-bath master equation, with g²(0) and
//! Fock populations recorded on a fixed grid.

use crate::dynamics::{evolve, IntegratorConfig, LindbladSpec, Trajectory};
use crate::error::Result;
use crate::fock::{self, thermal_state};
use crate::model::{build_effective_hamiltonian, derive, DerivedParams, PhysicalParams, TWO_PI};
use crate::observables::{find_g2_minimum, find_p1_maximum, ObservableRecord};
use crate::par::{self, Execution};

/// Which loss channel sets γ in the master equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DecayModel {
    /// γ = γ_a, the level-4 induced loss (g/8 at the default point).
    #[default]
    Nonlinear,
    /// γ = γ_a + γ_p.
    Total,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparationSetup {
    pub params: PhysicalParams,
    pub decay: DecayModel,
    /// Window length in units of 1/(2π g).
    pub t_max_over_g: f64,
    pub samples: usize,
    pub integrator: IntegratorConfig,
}

impl Default for PreparationSetup {
    fn default() -> Self {
        Self {
            params: PhysicalParams::default(),
            decay: DecayModel::Nonlinear,
            t_max_over_g: 20.0,
            samples: 400,
            integrator: IntegratorConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreparationPoint {
    pub n_th: f64,
    /// Ω̃/g.
    pub drive_over_g: f64,
}

impl PreparationSetup {
    /// The point described by `params` alone.
    pub fn base_point(&self) -> Result<PreparationPoint> {
        let d = derive(&self.params);
        Ok(PreparationPoint {
            n_th: self.params.n_th(&d)?,
            drive_over_g: d.omega_tilde / d.g_nl,
        })
    }

    pub fn derived_at(&self, point: &PreparationPoint) -> DerivedParams {
        derive(&self.params.clone().with_drive_over_g(point.drive_over_g))
    }

    /// γ in linear kHz.
    pub fn gamma(&self, d: &DerivedParams) -> f64 {
        match self.decay {
            DecayModel::Nonlinear => d.gamma_a,
            DecayModel::Total => d.gamma_a + d.gamma_p,
        }
    }

    pub fn t_max_ms(&self, d: &DerivedParams) -> f64 {
        self.t_max_over_g / (TWO_PI * d.g_nl)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PreparationSummary {
    pub point: PreparationPoint,
    pub g2_start: f64,
    pub min_index: usize,
    pub t_min_ms: f64,
    pub t_min_g: f64,
    pub g2_min: f64,
    pub p1_at_tmin: f64,
    pub p1_max_index: usize,
    pub p1_max: f64,
    pub t_p1max_ms: f64,
    pub g2_at_tmax: f64,
    /// The minimum lies strictly inside the window and g²(t_max) > g²_min.
    pub interior: bool,
}

#[derive(Clone, Debug)]
pub struct PreparationRun {
    pub point: PreparationPoint,
    pub derived: DerivedParams,
    pub gamma: f64,
    pub trajectory: Trajectory<ObservableRecord>,
    pub summary: PreparationSummary,
}

pub fn summarize(point: PreparationPoint, traj: &Trajectory<ObservableRecord>) -> Result<PreparationSummary> {
    let min = find_g2_minimum(traj)?;
    let max = find_p1_maximum(traj).expect("trajectory has samples");
    let last = traj.len() - 1;
    let g2_at = |i: usize| traj.records[i].g2_zero.unwrap_or(f64::NAN);
    let g2_at_tmax = g2_at(last);
    Ok(PreparationSummary {
        point,
        g2_start: g2_at(0),
        min_index: min.index,
        t_min_ms: min.t_ms,
        t_min_g: traj.times_scaled[min.index],
        g2_min: min.value,
        p1_at_tmin: min.p1,
        p1_max_index: max.index,
        p1_max: max.value,
        t_p1max_ms: max.t_ms,
        g2_at_tmax,
        interior: min.index > 0 && min.index < last && g2_at_tmax > min.value,
    })
}

pub fn run_preparation(setup: &PreparationSetup, point: PreparationPoint) -> Result<PreparationRun> {
    let d = setup.derived_at(&point);
    let cutoff = setup.params.cutoff;
    let a = fock::annihilation(cutoff)?;
    let h = build_effective_hamiltonian(&d, cutoff, true)?;
    let gamma = setup.gamma(&d);
    let spec = LindbladSpec::new(h, a.clone(), gamma, point.n_th)?.with_reference_rate(d.g_nl);
    let rho0 = thermal_state(point.n_th, cutoff)?;
    let t_max = setup.t_max_ms(&d);
    let mut observe_err = None;
    let trajectory = evolve(&rho0, &spec, t_max, setup.samples, &setup.integrator, |s| {
        ObservableRecord::from_sample(s, &a).unwrap_or_else(|e| {
            observe_err.get_or_insert(e);
            ObservableRecord {
                g2_zero: None,
                populations: Vec::new(),
                mean_n: f64::NAN,
                purity: f64::NAN,
                trace_error: s.trace_error,
            }
        })
    })?;
    if let Some(e) = observe_err {
        return Err(e);
    }
    let summary = summarize(point, &trajectory)?;
    Ok(PreparationRun {
        point,
        derived: d,
        gamma,
        trajectory,
        summary,
    })
}

/// Runs every point; results stay aligned with `points`.
pub fn run_sweep(
    setup: &PreparationSetup,
    points: &[PreparationPoint],
    exec: Execution,
) -> Vec<Result<PreparationRun>> {
    par::map(exec, points, |p| run_preparation(setup, *p))
}

pub fn thermal_points(n_th: &[f64], drive_over_g: f64) -> Vec<PreparationPoint> {
    n_th.iter()
        .map(|&n| PreparationPoint { n_th: n, drive_over_g })
        .collect()
}

pub fn drive_points(n_th: f64, drive_over_g: &[f64]) -> Vec<PreparationPoint> {
    drive_over_g
        .iter()
        .map(|&r| PreparationPoint { n_th, drive_over_g: r })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn short() -> PreparationSetup {
        PreparationSetup {
            params: PhysicalParams {
                cutoff: 8,
                ..PhysicalParams::default()
            },
            t_max_over_g: 4.0,
            samples: 40,
            ..PreparationSetup::default()
        }
    }

    #[test]
    fn base_point_matches_defaults() {
        let p = PreparationSetup::default().base_point().unwrap();
        assert_abs_diff_eq!(p.n_th, 0.1);
        assert_abs_diff_eq!(p.drive_over_g, 0.2, epsilon = 1e-12);
    }

    #[test]
    fn window_and_gamma() {
        let s = PreparationSetup::default();
        let d = s.derived_at(&s.base_point().unwrap());
        assert_abs_diff_eq!(s.t_max_ms(&d), 20.0 / (TWO_PI * 25.0), epsilon = 1e-12);
        assert_abs_diff_eq!(s.gamma(&d), 25.0 / 8.0, epsilon = 1e-12);
        let total = PreparationSetup {
            decay: DecayModel::Total,
            ..s
        };
        assert_abs_diff_eq!(total.gamma(&d), 3.925, epsilon = 1e-12);
    }

    #[test]
    fn short_run_starts_thermal_and_dips() {
        let s = short();
        let run = run_preparation(&s, PreparationPoint { n_th: 0.1, drive_over_g: 0.2 }).unwrap();
        assert_eq!(run.trajectory.len(), 41);
        assert_abs_diff_eq!(run.summary.g2_start, 2.0, epsilon = 1e-3);
        assert!(run.summary.g2_min < run.summary.g2_start);
        assert_abs_diff_eq!(*run.trajectory.times_scaled.last().unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_aligned_with_points() {
        let s = short();
        let pts = thermal_points(&[0.1, 0.3], 0.2);
        let seq = run_sweep(&s, &pts, Execution::Sequential);
        let par = run_sweep(&s, &pts, Execution::Parallel);
        for ((a, b), p) in seq.iter().zip(&par).zip(&pts) {
            let (a, b) = (a.as_ref().unwrap(), b.as_ref().unwrap());
            assert_eq!(a.point, *p);
            assert_eq!(a.summary, b.summary);
        }
    }

    #[test]
    fn point_builders() {
        assert_eq!(drive_points(0.1, &[0.125, 0.5]).len(), 2);
        assert_eq!(thermal_points(&[0.1], 0.2)[0].drive_over_g, 0.2);
    }
}
