use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{Operator, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct SchrodingerConfig {
    /// Upper bound on `dt · ‖H‖`.
    pub safety: f64,
    /// Per-step norm drift that aborts a norm-preserving run.
    pub norm_tolerance: f64,
    /// Amplitude damping rates (rad/ms) per basis component. When set, the
    /// evolution is non-unitary and the state is not renormalized.
    pub decay: Option<Vec<f64>>,
}

impl Default for SchrodingerConfig {
    fn default() -> Self {
        Self {
            safety: 0.05,
            norm_tolerance: 1e-6,
            decay: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct AmplitudeTrajectory {
    pub times_ms: Vec<f64>,
    pub states: Vec<DVector<C64>>,
    /// Largest per-step |‖ψ‖ − 1| before renormalization (unitary runs).
    pub max_norm_drift: f64,
    pub steps: usize,
}

impl AmplitudeTrajectory {
    pub fn final_state(&self) -> &DVector<C64> {
        self.states.last().expect("trajectory has the initial sample")
    }
}

fn derivative(h: &Operator, decay: Option<&[f64]>, psi: &DVector<C64>) -> DVector<C64> {
    let mut out = h.matrix() * psi * C64::new(0.0, -1.0);
    if let Some(k) = decay {
        for (o, (rate, amp)) in out.iter_mut().zip(k.iter().zip(psi.iter())) {
            *o -= amp * *rate;
        }
    }
    out
}

/// RK4 integration of `iψ̇ = H(t)ψ` (plus optional amplitude damping),
/// sampled at `n_samples + 1` equally spaced times.
pub fn schrodinger_evolve_td(
    psi0: &DVector<C64>,
    schedule: impl Fn(f64) -> Operator,
    t_max_ms: f64,
    n_samples: usize,
    config: &SchrodingerConfig,
) -> Result<AmplitudeTrajectory> {
    let norm0 = psi0.norm();
    if (norm0 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("initial state has norm {norm0}")));
    }
    if n_samples == 0 || !(t_max_ms >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            reason: "need t_max ≥ 0 and at least one sample interval".into(),
        });
    }
    let dim = psi0.len();
    let decay = config.decay.as_deref();
    if let Some(k) = decay {
        if k.len() != dim {
            return Err(Error::DimensionMismatch { left: k.len(), right: dim });
        }
    }
    let decay_bound = decay.map_or(0.0, |k| k.iter().fold(0.0f64, |m, r| m.max(r.abs())));
    let interval = t_max_ms / n_samples as f64;

    let mut psi = psi0.clone();
    let mut out = AmplitudeTrajectory {
        times_ms: vec![0.0],
        states: vec![psi.clone()],
        max_norm_drift: 0.0,
        steps: 0,
    };
    for k in 0..n_samples {
        let t0 = k as f64 * interval;
        let probe = [t0, t0 + interval / 2.0, t0 + interval];
        let mut bound = decay_bound;
        for &t in &probe {
            let h = schedule(t);
            if h.dim() != dim {
                return Err(Error::DimensionMismatch { left: h.dim(), right: dim });
            }
            bound = bound.max(h.norm_bound() + decay_bound);
        }
        let substeps = if bound > 0.0 {
            (interval * bound / config.safety).ceil().max(1.0) as usize
        } else {
            1
        };
        let dt = interval / substeps as f64;
        for s in 0..substeps {
            let t = t0 + s as f64 * dt;
            let h0 = schedule(t);
            let hm = schedule(t + dt / 2.0);
            let h1 = schedule(t + dt);
            let k1 = derivative(&h0, decay, &psi);
            let k2 = derivative(&hm, decay, &(&psi + &k1 * C64::new(dt / 2.0, 0.0)));
            let k3 = derivative(&hm, decay, &(&psi + &k2 * C64::new(dt / 2.0, 0.0)));
            let k4 = derivative(&h1, decay, &(&psi + &k3 * C64::new(dt, 0.0)));
            psi += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(dt / 6.0, 0.0);
            out.steps += 1;
            if decay.is_none() {
                let norm = psi.norm();
                let drift = (norm - 1.0).abs();
                if drift > config.norm_tolerance {
                    return Err(Error::NormDrift {
                        t_ms: t + dt,
                        drift,
                        tolerance: config.norm_tolerance,
                    });
                }
                out.max_norm_drift = out.max_norm_drift.max(drift);
                psi /= C64::new(norm, 0.0);
            }
        }
        out.times_ms.push(t0 + interval);
        out.states.push(psi.clone());
    }
    if out.max_norm_drift > 0.0 {
        log::debug!("Schrödinger run: max per-step norm drift {:.3e}", out.max_norm_drift);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TWO_PI;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;

    fn two_level(omega: f64) -> Operator {
        Operator::from_real_fn(2, "q", move |r, c| if r != c { omega } else { 0.0 })
    }

    #[test]
    fn eigenstate_is_stationary() {
        let h = two_level(3.0);
        let s = 1.0 / 2f64.sqrt();
        let psi0 = DVector::from_vec(vec![C64::new(s, 0.0), C64::new(s, 0.0)]);
        let traj = schrodinger_evolve_td(&psi0, |_| h.clone(), 2.0, 20, &SchrodingerConfig::default()).unwrap();
        for psi in &traj.states {
            assert_abs_diff_eq!(psi0.dotc(psi).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 1.5;
        let h = two_level(omega);
        let psi0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let t = 0.7;
        let fine = SchrodingerConfig {
            safety: 0.005,
            ..SchrodingerConfig::default()
        };
        let traj = schrodinger_evolve_td(&psi0, |_| h.clone(), t, 7, &fine).unwrap();
        let p1 = traj.final_state()[1].norm_sqr();
        assert_abs_diff_eq!(p1, (omega * t).sin().powi(2), epsilon = 1e-10);
    }

    #[test]
    fn damping_reduces_norm() {
        let h = Operator::from_matrix(DMatrix::zeros(2, 2), "q").unwrap();
        let psi0 = DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        let config = SchrodingerConfig {
            decay: Some(vec![0.0, TWO_PI]),
            safety: 0.005,
            ..SchrodingerConfig::default()
        };
        let traj = schrodinger_evolve_td(&psi0, |_| h.clone(), 0.5, 5, &config).unwrap();
        assert_abs_diff_eq!(traj.final_state().norm(), (-TWO_PI * 0.5).exp(), epsilon = 1e-10);
    }

    #[test]
    fn unnormalized_start_rejected() {
        let psi0 = DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(0.0, 0.0)]);
        assert!(schrodinger_evolve_td(&psi0, |_| two_level(1.0), 1.0, 1, &SchrodingerConfig::default()).is_err());
    }

    #[test]
    fn coarse_step_aborts_on_drift() {
        let psi0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let config = SchrodingerConfig {
            safety: 2.0,
            ..SchrodingerConfig::default()
        };
        let err = schrodinger_evolve_td(&psi0, |_| two_level(10.0), 1.0, 1, &config);
        assert!(matches!(err, Err(Error::NormDrift { .. })));
    }
}
