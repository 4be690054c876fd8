use nalgebra::DMatrix;

use super::{Diagnostics, IntegratorConfig, Trajectory};
use crate::error::{Error, Result};
use crate::fock::{DensityMatrix, Operator, C64};
use crate::model::TWO_PI;

/// Master equation
/// `ρ̇ = −i[H,ρ] + (γ/2)(1+n_th) L[a]ρ + (γ/2) n_th L[a†]ρ`,
/// `L[o]ρ = 2oρo† − o†oρ − ρo†o`.
#[derive(Clone, Debug)]
pub struct LindbladSpec {
    /// rad/ms.
    pub hamiltonian: Operator,
    pub jump_down: Operator,
    pub jump_up: Operator,
    pub n_th: f64,
    /// Linear kHz.
    pub gamma: f64,
    /// Linear kHz rate used to make times dimensionless; 0 leaves them in ms.
    pub reference_rate: f64,
}

impl LindbladSpec {
    pub fn new(hamiltonian: Operator, jump_down: Operator, gamma: f64, n_th: f64) -> Result<Self> {
        if hamiltonian.dim() != jump_down.dim() {
            return Err(Error::DimensionMismatch {
                left: hamiltonian.dim(),
                right: jump_down.dim(),
            });
        }
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "gamma",
                reason: format!("decay rate must be non-negative, got {gamma}"),
            });
        }
        if !(n_th >= 0.0) {
            return Err(Error::NegativeOccupation(n_th));
        }
        let jump_up = jump_down.adjoint();
        Ok(Self {
            hamiltonian,
            jump_down,
            jump_up,
            n_th,
            gamma,
            reference_rate: 0.0,
        })
    }

    pub fn with_reference_rate(mut self, khz: f64) -> Self {
        self.reference_rate = khz;
        self
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    /// Prefactors (rad/ms) multiplying `L[a]` and `L[a†]`.
    fn rates(&self) -> (f64, f64) {
        let half = TWO_PI * self.gamma / 2.0;
        (half * (1.0 + self.n_th), half * self.n_th)
    }

    /// Bound on the norm of the superoperator.
    pub fn generator_norm_bound(&self) -> f64 {
        let (down, up) = self.rates();
        let jump = |o: &Operator| {
            let n = o.norm_bound();
            4.0 * n * n
        };
        self.hamiltonian.spectral_spread_bound() + down * jump(&self.jump_down) + up * jump(&self.jump_up)
    }
}

/// Nonzero entries of an operator.
#[derive(Clone, Debug)]
struct Entries(Vec<(usize, usize, C64)>);

impl Entries {
    fn of(m: &DMatrix<C64>) -> Self {
        let mut out = Vec::new();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                let v = m[(r, c)];
                if v != C64::new(0.0, 0.0) {
                    out.push((r, c, v));
                }
            }
        }
        Self(out)
    }

    /// `out = X·m` for column-major n×n `m`.
    fn left_mul(&self, m: &[C64], out: &mut [C64], n: usize) {
        out.fill(C64::new(0.0, 0.0));
        for j in 0..n {
            let col = &m[j * n..(j + 1) * n];
            let dst = &mut out[j * n..(j + 1) * n];
            for &(r, k, v) in &self.0 {
                dst[r] += v * col[k];
            }
        }
    }

    /// `out += s·m·X†`.
    fn right_mul_adjoint_acc(&self, m: &[C64], out: &mut [C64], n: usize, s: C64) {
        // (m X†)[:, j] = Σ_k m[:, k] conj(X[j, k])
        for &(j, k, v) in &self.0 {
            let w = s * v.conj();
            for i in 0..n {
                out[j * n + i] += w * m[k * n + i];
            }
        }
    }
}

/// The superoperator in a form cheap to apply repeatedly.
struct Generator {
    n: usize,
    /// `H − i Σ r_k o_k†o_k`.
    effective: Entries,
    jumps: Vec<(f64, Entries)>,
}

struct Scratch {
    x: Vec<C64>,
    t: Vec<C64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            x: vec![C64::new(0.0, 0.0); n * n],
            t: vec![C64::new(0.0, 0.0); n * n],
        }
    }
}

impl Generator {
    fn new(spec: &LindbladSpec) -> Result<Self> {
        let (down, up) = spec.rates();
        let a = spec.jump_down.matrix();
        let ad = spec.jump_up.matrix();
        let ni = C64::new(0.0, -1.0);
        let mut eff = spec.hamiltonian.matrix().clone();
        let mut jumps = Vec::new();
        for (rate, o, od) in [(down, a, ad), (up, ad, a)] {
            if rate > 0.0 {
                eff += (od * o) * (ni * rate);
                jumps.push((2.0 * rate, Entries::of(o)));
            }
        }
        Ok(Self {
            n: spec.dim(),
            effective: Entries::of(&eff),
            jumps,
        })
    }

    /// `out = −i(Kρ − ρK†) + Σ 2r_k o_k ρ o_k†`.
    fn apply(&self, rho: &[C64], out: &mut [C64], s: &mut Scratch) {
        let n = self.n;
        let ni = C64::new(0.0, -1.0);
        self.effective.left_mul(rho, &mut s.x, n);
        for (o, x) in out.iter_mut().zip(&s.x) {
            *o = ni * x;
        }
        self.effective.right_mul_adjoint_acc(rho, out, n, C64::new(0.0, 1.0));
        for (w, op) in &self.jumps {
            op.left_mul(rho, &mut s.t, n);
            op.right_mul_adjoint_acc(&s.t, out, n, C64::new(*w, 0.0));
        }
    }
}

/// Right-hand side dρ/dt of the master equation.
pub fn lindblad_rhs(rho: &DensityMatrix, spec: &LindbladSpec) -> Result<Operator> {
    if rho.dim() != spec.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: spec.dim(),
        });
    }
    let g = Generator::new(spec)?;
    let n = spec.dim();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    g.apply(rho.matrix().as_slice(), &mut out, &mut Scratch::new(n));
    Operator::from_matrix(DMatrix::from_vec(n, n, out), rho.op().basis_label())
}

/// What an observer sees at each sample time.
pub struct Sample<'a> {
    pub t_ms: f64,
    pub state: &'a DensityMatrix,
    /// Largest per-step trace drift since the previous sample.
    pub trace_error: f64,
}

struct Rk4 {
    k: [Vec<C64>; 4],
    stage: Vec<C64>,
    scratch: Scratch,
}

impl Rk4 {
    fn new(n: usize) -> Self {
        let z = || vec![C64::new(0.0, 0.0); n * n];
        Self {
            k: [z(), z(), z(), z()],
            stage: z(),
            scratch: Scratch::new(n),
        }
    }

    fn step(&mut self, g: &Generator, rho: &mut [C64], dt: f64) {
        let [k1, k2, k3, k4] = &mut self.k;
        g.apply(rho, k1, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k1.iter()) {
            *s = r + k * (dt / 2.0);
        }
        g.apply(&self.stage, k2, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k2.iter()) {
            *s = r + k * (dt / 2.0);
        }
        g.apply(&self.stage, k3, &mut self.scratch);
        for ((s, r), k) in self.stage.iter_mut().zip(rho.iter()).zip(k3.iter()) {
            *s = r + k * dt;
        }
        g.apply(&self.stage, k4, &mut self.scratch);
        for i in 0..rho.len() {
            rho[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
}

fn hermitize(rho: &mut [C64], n: usize) {
    for c in 0..n {
        rho[c * n + c].im = 0.0;
        for r in 0..c {
            let avg = (rho[c * n + r] + rho[r * n + c].conj()) * 0.5;
            rho[c * n + r] = avg;
            rho[r * n + c] = avg.conj();
        }
    }
}

fn trace(rho: &[C64], n: usize) -> C64 {
    (0..n).map(|i| rho[i * n + i]).sum()
}

/// Integrates the master equation from `rho0` to `t_max_ms`, calling
/// `observe` at the `n_samples + 1` equally spaced times `0, Δ, …, t_max`.
pub fn evolve<R>(
    rho0: &DensityMatrix,
    spec: &LindbladSpec,
    t_max_ms: f64,
    n_samples: usize,
    config: &IntegratorConfig,
    mut observe: impl FnMut(&Sample<'_>) -> R,
) -> Result<Trajectory<R>> {
    let n = spec.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: n,
        });
    }
    if !(t_max_ms >= 0.0) || n_samples == 0 {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: format!("need t_max ≥ 0 and at least one sample interval (t_max={t_max_ms}, samples={n_samples})"),
        });
    }
    let generator = Generator::new(spec)?;
    let label = rho0.op().basis_label().to_owned();
    let interval = t_max_ms / n_samples as f64;
    let bound = spec.generator_norm_bound();
    let base_steps = if bound > 0.0 {
        (interval * bound / config.safety).ceil().max(1.0) as usize
    } else {
        1
    };
    let substeps = base_steps * config.substep_multiplier.max(1);
    let dt = interval / substeps as f64;

    let mut rho: Vec<C64> = rho0.matrix().as_slice().to_vec();
    let mut rk = Rk4::new(n);
    let mut diag = Diagnostics {
        dt_ms: dt,
        min_eigenvalue: f64::INFINITY,
        ..Diagnostics::default()
    };
    let mut times_ms = Vec::with_capacity(n_samples + 1);
    let mut records = Vec::with_capacity(n_samples + 1);
    let mut window_drift = 0.0f64;
    let mut state = rho0.clone();

    for k in 0..=n_samples {
        let t = k as f64 * interval;
        if k > 0 {
            for s in 0..substeps {
                rk.step(&generator, &mut rho, dt);
                if config.hermitize_every_step {
                    hermitize(&mut rho, n);
                }
                let tr = trace(&rho, n);
                let drift = (tr - 1.0).norm();
                if drift >= config.trace_tolerance {
                    return Err(Error::TraceDrift {
                        t_ms: t - interval + (s + 1) as f64 * dt,
                        drift,
                        tolerance: config.trace_tolerance,
                    });
                }
                let inv = 1.0 / tr.re;
                rho.iter_mut().for_each(|z| *z *= inv);
                window_drift = window_drift.max(drift);
                diag.steps += 1;
            }
            let m = DMatrix::from_column_slice(n, n, &rho);
            state = DensityMatrix::from_trusted(Operator::from_matrix(m, label.clone())?);
        }
        let min_ev = state.min_eigenvalue();
        if min_ev < -config.positivity_tolerance {
            diag.warnings.push(format!(
                "negative eigenvalue {min_ev:.3e} at t = {t:.6e} ms"
            ));
        }
        diag.min_eigenvalue = diag.min_eigenvalue.min(min_ev);
        diag.max_top_population = diag.max_top_population.max(state.op().entry(n - 1, n - 1).re);
        diag.max_trace_error = diag.max_trace_error.max(window_drift);
        times_ms.push(t);
        records.push(observe(&Sample {
            t_ms: t,
            state: &state,
            trace_error: window_drift,
        }));
        window_drift = 0.0;
    }

    let scale = TWO_PI * spec.reference_rate;
    let times_scaled = if scale > 0.0 {
        times_ms.iter().map(|t| t * scale).collect()
    } else {
        times_ms.clone()
    };
    Ok(Trajectory {
        times_ms,
        times_scaled,
        records,
        final_state: state,
        diagnostics: diag,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{self, expectation};
    use crate::model::{self, build_effective_hamiltonian, PhysicalParams};
    use approx::assert_abs_diff_eq;

    fn damping_spec(gamma: f64, n_th: f64, cutoff: usize) -> LindbladSpec {
        let h = Operator::zeros(cutoff + 1, "fock");
        LindbladSpec::new(h, fock::annihilation(cutoff).unwrap(), gamma, n_th).unwrap()
    }

    #[test]
    fn amplitude_damping_entries() {
        let gamma = 3.0;
        let spec = damping_spec(gamma, 0.0, 4);
        let rhs = lindblad_rhs(&fock::fock_state(1, 4).unwrap(), &spec).unwrap();
        let rate = TWO_PI * gamma;
        assert_abs_diff_eq!(rhs.entry(1, 1).re, -rate, epsilon = 1e-12);
        assert_abs_diff_eq!(rhs.entry(0, 0).re, rate, epsilon = 1e-12);
    }

    #[test]
    fn thermal_state_is_stationary() {
        for n_th in [0.1, 0.3, 0.5] {
            let spec = damping_spec(2.0, n_th, 20);
            let rho = fock::thermal_state(n_th, 20).unwrap();
            let rhs = lindblad_rhs(&rho, &spec).unwrap();
            let worst = rhs.matrix().iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert!(worst < 1e-10, "n_th={n_th}: {worst}");
        }
    }

    #[test]
    fn rhs_is_traceless() {
        let d = model::derive(&PhysicalParams::default());
        let h = build_effective_hamiltonian(&d, 8, true).unwrap();
        let spec = LindbladSpec::new(h, fock::annihilation(8).unwrap(), d.gamma_a, 0.3).unwrap();
        let rho = fock::coherent_state(C64::new(0.8, -0.6), 8).unwrap();
        let rhs = lindblad_rhs(&rho, &spec).unwrap();
        assert!(rhs.trace().norm() < 1e-10);
        assert!(rhs.hermiticity_error() < 1e-10);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = damping_spec(1.0, 0.0, 4);
        assert!(lindblad_rhs(&fock::fock_state(0, 5).unwrap(), &spec).is_err());
        assert!(LindbladSpec::new(
            Operator::zeros(3, "x"),
            fock::annihilation(3).unwrap(),
            1.0,
            0.0
        )
        .is_err());
    }

    #[test]
    fn relaxes_to_bath_occupation() {
        let gamma = 1.0;
        let n_th = 0.3;
        let spec = damping_spec(gamma, n_th, 20);
        let num = fock::number_operator(20).unwrap();
        let t_max = 10.0 / (TWO_PI * gamma);
        let traj = evolve(
            &fock::fock_state(0, 20).unwrap(),
            &spec,
            t_max,
            20,
            &IntegratorConfig::default(),
            |s| expectation(&num, s.state).unwrap().re,
        )
        .unwrap();
        assert_abs_diff_eq!(*traj.records.last().unwrap(), n_th, epsilon = 1e-4);
    }

    #[test]
    fn kerr_leaves_fock_state_invariant() {
        let d = model::derive(&PhysicalParams::default());
        let h = build_effective_hamiltonian(&d, 6, false).unwrap();
        let spec = LindbladSpec::new(h, fock::annihilation(6).unwrap(), 0.0, 0.0).unwrap();
        let rho0 = fock::fock_state(2, 6).unwrap();
        let traj = evolve(&rho0, &spec, 0.05, 5, &IntegratorConfig::default(), |_| ()).unwrap();
        let diff = (traj.final_state.matrix() - rho0.matrix()).norm();
        assert!(diff < 1e-12, "{diff}");
    }

    #[test]
    fn closed_energy_is_conserved() {
        let d = model::derive(&PhysicalParams::default());
        let h = build_effective_hamiltonian(&d, 10, false).unwrap();
        let spec = LindbladSpec::new(h.clone(), fock::annihilation(10).unwrap(), 0.0, 0.0).unwrap();
        let rho0 = fock::coherent_state(C64::new(1.2, 0.3), 10).unwrap();
        let e0 = expectation(&h, &rho0).unwrap().re;
        let traj = evolve(&rho0, &spec, 0.02, 10, &IntegratorConfig::default(), |s| {
            expectation(&h, s.state).unwrap().re
        })
        .unwrap();
        for e in traj.records {
            assert!(((e - e0) / e0).abs() < 1e-8);
        }
    }

    #[test]
    fn trace_drift_aborts() {
        // A huge step makes RK4 blow up; the drift check must catch it.
        let spec = damping_spec(50.0, 0.5, 10);
        let config = IntegratorConfig {
            safety: 1e3,
            ..IntegratorConfig::default()
        };
        let err = evolve(&fock::fock_state(10, 10).unwrap(), &spec, 1.0, 1, &config, |_| ());
        assert!(matches!(err, Err(Error::TraceDrift { .. })), "{err:?}");
    }

    #[test]
    fn sample_grid() {
        let spec = damping_spec(1.0, 0.0, 3).with_reference_rate(2.0);
        let traj = evolve(&fock::fock_state(1, 3).unwrap(), &spec, 1.0, 4, &IntegratorConfig::default(), |s| s.t_ms).unwrap();
        assert_eq!(traj.len(), 5);
        assert_eq!(traj.times_ms, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_abs_diff_eq!(traj.times_scaled[4], TWO_PI * 2.0, epsilon = 1e-12);
        assert!(traj.times_ms.windows(2).all(|w| w[1] > w[0]));
    }
}
