//! Equal-time statistics of a single bosonic mode.

use crate::dynamics::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::fock::{expectation, DensityMatrix, Operator, C64};

/// Below this mean occupation g²(0) is reported as undefined.
pub const G2_UNDEFINED_BELOW: f64 = 1e-12;

fn snap(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= 4.0 * f64::EPSILON * r.abs().max(1.0) {
        r
    } else {
        x
    }
}

/// Normally ordered moment `a†ᵏaᵏ`. Entries within a few ulp of an integer
/// are set to that integer, so ladder products such as `√2·√2` are exact.
fn normal_moment(a: &Operator, k: usize) -> Result<Operator> {
    let ad = a.adjoint();
    let mut m = Operator::identity(a.dim(), a.basis_label());
    for _ in 0..k {
        m = ad.matmul(&m)?;
    }
    for _ in 0..k {
        m = m.matmul(a)?;
    }
    let cleaned = m.matrix().map(|z| C64::new(snap(z.re), snap(z.im)));
    Operator::from_matrix(cleaned, a.basis_label())
}

/// `⟨a†a†aa⟩/⟨a†a⟩²`, or `None` when `⟨a†a⟩ ≤ 1e-12`.
pub fn g2_zero(rho: &DensityMatrix, a: &Operator) -> Result<Option<f64>> {
    let mean = expectation(&normal_moment(a, 1)?, rho)?.re;
    if mean <= G2_UNDEFINED_BELOW {
        return Ok(None);
    }
    let pair = expectation(&normal_moment(a, 2)?, rho)?.re;
    Ok(Some(pair / (mean * mean)))
}

/// g²(0) of a diagonal state from its populations: `Σ n(n−1)pₙ / (Σ n pₙ)²`.
pub fn g2_from_populations(pops: &[f64]) -> Option<f64> {
    let mean: f64 = pops.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    if mean <= G2_UNDEFINED_BELOW {
        return None;
    }
    let pair: f64 = pops
        .iter()
        .enumerate()
        .map(|(n, p)| (n * n.saturating_sub(1)) as f64 * p)
        .sum();
    Some(pair / (mean * mean))
}

pub fn population(rho: &DensityMatrix, n: usize) -> Result<f64> {
    if n >= rho.dim() {
        return Err(Error::LevelOutOfRange {
            level: n,
            cutoff: rho.dim().saturating_sub(1),
        });
    }
    Ok(rho.op().entry(n, n).re)
}

pub fn mean_number(rho: &DensityMatrix, a: &Operator) -> Result<f64> {
    Ok(expectation(&normal_moment(a, 1)?, rho)?.re)
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix().iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub g2_zero: Option<f64>,
    pub populations: Vec<f64>,
    pub mean_n: f64,
    pub purity: f64,
    pub trace_error: f64,
}

impl ObservableRecord {
    pub fn measure(rho: &DensityMatrix, a: &Operator, trace_error: f64) -> Result<Self> {
        Ok(Self {
            g2_zero: g2_zero(rho, a)?,
            populations: rho.populations(),
            mean_n: mean_number(rho, a)?,
            purity: purity(rho),
            trace_error,
        })
    }

    pub fn from_sample(sample: &Sample<'_>, a: &Operator) -> Result<Self> {
        Self::measure(sample.state, a, sample.trace_error)
    }

    pub fn p(&self, n: usize) -> f64 {
        self.populations.get(n).copied().unwrap_or(0.0)
    }
}

/// A sampled extremum of a trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Extremum {
    pub index: usize,
    pub t_ms: f64,
    pub value: f64,
    /// P₁ at the same sample.
    pub p1: f64,
}

/// Global g²(0) minimum on the sample grid; ties go to the earliest sample.
pub fn find_g2_minimum(traj: &Trajectory<ObservableRecord>) -> Result<Extremum> {
    let defined: Vec<(usize, f64)> = traj
        .records
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.g2_zero.map(|g| (i, g)))
        .collect();
    if defined.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            found: defined.len(),
        });
    }
    let (index, value) = defined
        .into_iter()
        .fold(None::<(usize, f64)>, |best, (i, g)| match best {
            Some((_, b)) if g >= b => best,
            _ => Some((i, g)),
        })
        .expect("non-empty");
    Ok(Extremum {
        index,
        t_ms: traj.times_ms[index],
        value,
        p1: traj.records[index].p(1),
    })
}

/// Global P₁ maximum on the sample grid; ties go to the earliest sample.
pub fn find_p1_maximum(traj: &Trajectory<ObservableRecord>) -> Option<Extremum> {
    traj.records
        .iter()
        .enumerate()
        .fold(None::<(usize, f64)>, |best, (i, r)| match best {
            Some((_, b)) if r.p(1) <= b => best,
            _ => Some((i, r.p(1))),
        })
        .map(|(index, value)| Extremum {
            index,
            t_ms: traj.times_ms[index],
            value,
            p1: value,
        })
}
