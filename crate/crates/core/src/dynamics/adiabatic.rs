use nalgebra::DVector;

use super::schrodinger::{schrodinger_evolve_td, SchrodingerConfig};
use crate::error::{Error, Result};
use crate::fock::{Operator, C64};
use crate::model::{polariton_basis, single_excitation_block, DerivedParams, TWO_PI};

/// Exponential ramp `Ω_d(t) = Ω_d·exp(v·t)` that converts the dark polariton
/// into a phonon.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    /// v, 1/ms.
    pub rate_per_ms: f64,
    /// v·t_end; the ramp ends at Ω_d·exp(exponent).
    pub exponent: f64,
    pub samples: usize,
    /// Damp the phonon amplitude at γ_p/2.
    pub phonon_damping: bool,
}

impl SweepSpec {
    /// `v = g̃₁₃/5` with the ramp ending at `t = 25/g̃₁₃`.
    pub fn reference(d: &DerivedParams) -> Self {
        Self {
            rate_per_ms: d.g13_tilde / 5.0,
            exponent: 5.0,
            samples: 200,
            phonon_damping: false,
        }
    }

    pub fn t_end_ms(&self) -> f64 {
        self.exponent / self.rate_per_ms
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub t_ms: f64,
    /// kHz.
    pub omega_d: f64,
    /// Phonon weight of the instantaneous dark state, Ω_d(t)²/B(t)².
    pub phonon_fraction: f64,
    /// Population of the instantaneous dark state.
    pub dark_pop: f64,
    /// Population of the instantaneous bright polaritons P₊, P₋.
    pub bright_leak: f64,
    /// Population of the bare phonon mode.
    pub phonon_pop: f64,
    pub norm: f64,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub t_end_ms: f64,
    /// `t_end·γ_p`; small when phonon loss during the ramp is negligible.
    pub loss_ratio: f64,
    pub max_norm_drift: f64,
}

impl SweepResult {
    pub fn last(&self) -> &SweepRow {
        self.rows.last().expect("sweep has the initial sample")
    }
}

fn project(v: [f64; 3], psi: &DVector<C64>) -> f64 {
    (0..3)
        .map(|k| psi[k] * v[k])
        .sum::<C64>()
        .norm_sqr()
}

/// Evolves the single-excitation sector (d, f, b) from the dark polariton
/// while Ω_d ramps up exponentially.
pub fn adiabatic_sweep(d: &DerivedParams, spec: &SweepSpec) -> Result<SweepResult> {
    if !(spec.rate_per_ms > 0.0) || !(spec.exponent > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sweep",
            reason: format!(
                "rate and exponent must be positive (v={}, v·t={})",
                spec.rate_per_ms, spec.exponent
            ),
        });
    }
    let t_end = spec.t_end_ms();
    let omega_at = |t: f64| d.omega_d * (spec.rate_per_ms * t).exp();
    let schedule = |t: f64| {
        let m = single_excitation_block(omega_at(t), d.epsilon, d.g13_tilde);
        Operator::from_real_fn(3, "sector d,f,b", |r, c| TWO_PI * m[r][c])
    };
    let dark = polariton_basis(d).dark;
    let psi0 = DVector::from_iterator(3, dark.iter().map(|&x| C64::new(x, 0.0)));
    let config = SchrodingerConfig {
        decay: spec
            .phonon_damping
            .then(|| vec![0.0, 0.0, TWO_PI * d.gamma_p / 2.0]),
        ..SchrodingerConfig::default()
    };
    let traj = schrodinger_evolve_td(&psi0, schedule, t_end, spec.samples.max(1), &config)?;
    let rows = traj
        .times_ms
        .iter()
        .zip(&traj.states)
        .map(|(&t, psi)| {
            let inst = d.with_omega_d(omega_at(t));
            let basis = polariton_basis(&inst);
            SweepRow {
                t_ms: t,
                omega_d: inst.omega_d,
                phonon_fraction: inst.phonon_fraction,
                dark_pop: project(basis.dark, psi),
                bright_leak: project(basis.plus, psi) + project(basis.minus, psi),
                phonon_pop: psi[2].norm_sqr(),
                norm: psi.norm(),
            }
        })
        .collect();
    Ok(SweepResult {
        rows,
        t_end_ms: t_end,
        loss_ratio: t_end * d.gamma_p,
        max_norm_drift: traj.max_norm_drift,
    })
}
