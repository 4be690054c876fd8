//! Time evolution: the thermal-bath Lindblad equation for the dark-polariton
//! mode, and driven Schrödinger dynamics for the adiabatic Ω_d sweep.
//!
//! All integrators are fixed-step RK4. The step is chosen per sample
//! interval so that `dt · ‖generator‖ ≤ safety`, with `‖generator‖` an
//! a-priori bound from Gershgorin estimates.

mod adiabatic;
mod lindblad;
mod schrodinger;

pub use adiabatic::{adiabatic_sweep, SweepResult, SweepRow, SweepSpec};
pub use lindblad::{evolve, lindblad_rhs, LindbladSpec, Sample};
pub use schrodinger::{schrodinger_evolve_td, AmplitudeTrajectory, SchrodingerConfig};

use crate::fock::DensityMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    /// Upper bound on `dt · ‖generator‖`.
    pub safety: f64,
    /// Multiplies the number of RK4 steps per sample interval; 2 halves dt.
    pub substep_multiplier: usize,
    /// Replace ρ by (ρ+ρ†)/2 after every step.
    pub hermitize_every_step: bool,
    /// Largest per-step |tr ρ − 1| that is silently renormalized.
    pub trace_tolerance: f64,
    /// Eigenvalues below −tolerance at a sample produce a warning.
    pub positivity_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            safety: 0.05,
            substep_multiplier: 1,
            hermitize_every_step: true,
            trace_tolerance: 1e-8,
            positivity_tolerance: 1e-9,
        }
    }
}

/// Numerical health of one integration.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    pub steps: usize,
    /// Step size of the last sample interval, ms.
    pub dt_ms: f64,
    /// Largest per-step |tr ρ − 1| before renormalization.
    pub max_trace_error: f64,
    /// Smallest eigenvalue of ρ seen at any sample.
    pub min_eigenvalue: f64,
    /// Largest population of the top Fock level seen at any sample.
    pub max_top_population: f64,
    pub warnings: Vec<String>,
}

/// Sampled observables of one run.
#[derive(Clone, Debug)]
pub struct Trajectory<R> {
    pub times_ms: Vec<f64>,
    /// Times multiplied by the reference angular rate (e.g. 2π·g).
    pub times_scaled: Vec<f64>,
    pub records: Vec<R>,
    pub final_state: DensityMatrix,
    pub diagnostics: Diagnostics,
}

impl<R> Trajectory<R> {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sample spacing in ms.
    pub fn sample_step_ms(&self) -> f64 {
        match self.times_ms.as_slice() {
            [a, b, ..] => b - a,
            _ => 0.0,
        }
    }
}
