//! Dense operator and state algebra on truncated Fock spaces.
//!
//! A single mode truncated at `cutoff` lives on the `cutoff + 1` levels
//! `|0⟩ … |cutoff⟩`. Multimode spaces are built with [`Operator::kron`], the
//! left factor being the slowest-varying index.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermiticity tolerance for [`DensityMatrix`] (max elementwise `|ρ − ρ†|`).
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Trace tolerance for [`DensityMatrix`].
pub const TRACE_TOL: f64 = 1e-10;
/// Most negative eigenvalue a [`DensityMatrix`] may carry.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Truncated thermal mass above which the renormalization is logged.
pub const TRUNCATION_REPORT: f64 = 1e-9;

/// A square complex matrix on a labelled basis.
#[derive(Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<C64>,
    basis_label: String,
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Operator")
            .field("dim", &self.dim())
            .field("basis_label", &self.basis_label)
            .finish()
    }
}

impl Operator {
    pub fn from_matrix(matrix: DMatrix<C64>, basis_label: impl Into<String>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                left: matrix.nrows(),
                right: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            basis_label: basis_label.into(),
        })
    }

    pub fn from_real_fn(
        dim: usize,
        basis_label: impl Into<String>,
        f: impl Fn(usize, usize) -> f64,
    ) -> Self {
        Self {
            matrix: DMatrix::from_fn(dim, dim, |r, c| C64::new(f(r, c), 0.0)),
            basis_label: basis_label.into(),
        }
    }

    pub fn zeros(dim: usize, basis_label: impl Into<String>) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            basis_label: basis_label.into(),
        }
    }

    pub fn identity(dim: usize, basis_label: impl Into<String>) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            basis_label: basis_label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn basis_label(&self) -> &str {
        &self.basis_label
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[(row, col)]
    }

    pub fn with_label(mut self, basis_label: impl Into<String>) -> Self {
        self.basis_label = basis_label.into();
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            basis_label: self.basis_label.clone(),
        }
    }

    fn check_dims(&self, other: &Operator) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(())
    }

    pub fn matmul(&self, other: &Operator) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix,
            basis_label: self.basis_label.clone(),
        })
    }

    pub fn add(&self, other: &Operator) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            matrix: &self.matrix + &other.matrix,
            basis_label: self.basis_label.clone(),
        })
    }

    pub fn sub(&self, other: &Operator) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            matrix: &self.matrix - &other.matrix,
            basis_label: self.basis_label.clone(),
        })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self {
            matrix: &self.matrix * factor,
            basis_label: self.basis_label.clone(),
        }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Operator) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self {
            matrix: &self.matrix * &other.matrix - &other.matrix * &self.matrix,
            basis_label: self.basis_label.clone(),
        })
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Self {
        Self {
            matrix: self.matrix.kronecker(&other.matrix),
            basis_label: format!("{}⊗{}", self.basis_label, other.basis_label),
        }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.matrix.norm()
    }

    /// Largest elementwise `|X − X†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for c in 0..n {
            for r in 0..=c {
                let d = (self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// Upper bound on the spectral norm from the larger of the max row and
    /// max column absolute sums.
    pub fn norm_bound(&self) -> f64 {
        let n = self.dim();
        let row = (0..n)
            .map(|r| (0..n).map(|c| self.matrix[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        let col = (0..n)
            .map(|c| (0..n).map(|r| self.matrix[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        row.max(col)
    }

    /// Gershgorin width `max(a_ii + R_i) − min(a_ii − R_i)` of a Hermitian
    /// operator; bounds the norm of the superoperator `X ↦ [self, X]`.
    pub fn spectral_spread_bound(&self) -> f64 {
        let n = self.dim();
        let mut hi = f64::NEG_INFINITY;
        let mut lo = f64::INFINITY;
        for r in 0..n {
            let radius: f64 = (0..n)
                .filter(|&c| c != r)
                .map(|c| self.matrix[(r, c)].norm())
                .sum();
            let center = self.matrix[(r, r)].re;
            hi = hi.max(center + radius);
            lo = lo.min(center - radius);
        }
        if n == 0 {
            0.0
        } else {
            hi - lo
        }
    }

    /// Eigenvalues of a Hermitian operator in ascending order.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn apply(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: v.len(),
            });
        }
        Ok(&self.matrix * v)
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff == 0 {
        Err(Error::InvalidCutoff(cutoff))
    } else {
        Ok(())
    }
}

fn fock_label(cutoff: usize) -> String {
    format!("fock(n_max={cutoff})")
}

/// Lowering operator with `⟨n−1|a|n⟩ = √n`.
pub fn annihilation(cutoff: usize) -> Result<Operator> {
    check_cutoff(cutoff)?;
    Ok(Operator::from_real_fn(cutoff + 1, fock_label(cutoff), |r, c| {
        if c == r + 1 {
            (c as f64).sqrt()
        } else {
            0.0
        }
    }))
}

pub fn creation(cutoff: usize) -> Result<Operator> {
    Ok(annihilation(cutoff)?.adjoint())
}

pub fn number_operator(cutoff: usize) -> Result<Operator> {
    check_cutoff(cutoff)?;
    Ok(Operator::from_real_fn(cutoff + 1, fock_label(cutoff), |r, c| {
        if r == c {
            r as f64
        } else {
            0.0
        }
    }))
}

/// A state vector normalized to unit length.
pub fn basis_vector(dim: usize, index: usize) -> DVector<C64> {
    let mut v = DVector::zeros(dim);
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    op: Operator,
}

impl DensityMatrix {
    /// Validates every density-matrix invariant.
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (max |ρ−ρ†| = {herm:.3e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_ev = op.hermitian_eigenvalues().first().copied().unwrap_or(0.0);
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(Self { op })
    }

    /// Skips the eigenvalue check; callers guarantee the invariants.
    pub(crate) fn from_trusted(op: Operator) -> Self {
        Self { op }
    }

    /// Diagonal state with the given populations, renormalized to unit trace.
    pub fn from_populations(pops: &[f64], basis_label: impl Into<String>) -> Result<Self> {
        if pops.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidState("populations must be finite and non-negative".into()));
        }
        let total: f64 = pops.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidState("populations sum to zero".into()));
        }
        let n = pops.len();
        let op = Operator::from_real_fn(n, basis_label, |r, c| {
            if r == c {
                pops[r] / total
            } else {
                0.0
            }
        });
        Ok(Self { op })
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &DVector<C64>, basis_label: impl Into<String>) -> Result<Self> {
        let norm = psi.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi / C64::new(norm, 0.0);
        let m = &v * v.adjoint();
        Ok(Self {
            op: Operator::from_matrix(m, basis_label)?,
        })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.op.matrix()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Diagonal entries `ρ_nn` (real parts).
    pub fn populations(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.op.entry(i, i).re).collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.op.hermitian_eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Truncated thermal state together with the probability mass that fell
/// outside the basis before renormalization.
#[derive(Clone, Debug)]
pub struct ThermalState {
    pub state: DensityMatrix,
    pub truncated_mass: f64,
}

/// Geometric (Bose–Einstein) distribution `p_n = n̄ⁿ/(1+n̄)ⁿ⁺¹`, renormalized
/// over `0..=cutoff`.
pub fn thermal_state_with_mass(n_th: f64, cutoff: usize) -> Result<ThermalState> {
    check_cutoff(cutoff)?;
    if !(n_th >= 0.0) || !n_th.is_finite() {
        return Err(Error::NegativeOccupation(n_th));
    }
    let ratio = n_th / (1.0 + n_th);
    let p0 = 1.0 / (1.0 + n_th);
    let pops: Vec<f64> = (0..=cutoff).map(|n| p0 * ratio.powi(n as i32)).collect();
    let kept: f64 = pops.iter().sum();
    let truncated_mass = (1.0 - kept).max(0.0);
    if truncated_mass > TRUNCATION_REPORT {
        log::warn!(
            "thermal state n_th={n_th} truncated at n_max={cutoff}: renormalizing lost mass {truncated_mass:.3e}"
        );
    }
    let state = DensityMatrix::from_populations(&pops, fock_label(cutoff))?;
    Ok(ThermalState {
        state,
        truncated_mass,
    })
}

pub fn thermal_state(n_th: f64, cutoff: usize) -> Result<DensityMatrix> {
    thermal_state_with_mass(n_th, cutoff).map(|t| t.state)
}

pub fn fock_state(n: usize, cutoff: usize) -> Result<DensityMatrix> {
    check_cutoff(cutoff)?;
    if n > cutoff {
        return Err(Error::LevelOutOfRange { level: n, cutoff });
    }
    let mut pops = vec![0.0; cutoff + 1];
    pops[n] = 1.0;
    DensityMatrix::from_populations(&pops, fock_label(cutoff))
}

/// Normalized truncated coherent state `|α⟩`. Requires `|α|² ≤ cutoff/4`.
pub fn coherent_state(alpha: C64, cutoff: usize) -> Result<DensityMatrix> {
    check_cutoff(cutoff)?;
    let norm_sqr = alpha.norm_sqr();
    let bound = cutoff as f64 / 4.0;
    if norm_sqr > bound {
        log::warn!("coherent amplitude |alpha|^2={norm_sqr} too large for n_max={cutoff}");
        return Err(Error::TruncationUnsafe { norm_sqr, bound });
    }
    let mut amp = DVector::<C64>::zeros(cutoff + 1);
    let mut term = C64::new((-norm_sqr / 2.0).exp(), 0.0);
    amp[0] = term;
    for n in 1..=cutoff {
        term = term * alpha / (n as f64).sqrt();
        amp[n] = term;
    }
    DensityMatrix::pure(&amp, fock_label(cutoff))
}

/// `tr(Xρ)`.
pub fn expectation(x: &Operator, rho: &DensityMatrix) -> Result<C64> {
    if x.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: x.dim(),
            right: rho.dim(),
        });
    }
    let (a, b) = (x.matrix(), rho.matrix());
    let n = x.dim();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn annihilation_entries() {
        let a = annihilation(2).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(a.entry(0, 1).re, 1.0);
        assert_eq!(a.entry(1, 2).re, 2f64.sqrt());
        for r in 0..3 {
            assert_eq!(a.entry(r, 0), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert_eq!(annihilation(0).unwrap_err(), Error::InvalidCutoff(0));
        assert!(number_operator(0).is_err());
        assert!(thermal_state(0.1, 0).is_err());
    }

    #[test]
    fn number_operator_is_diagonal_and_matches_product() {
        let n = number_operator(3).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let want = if r == c { r as f64 } else { 0.0 };
                assert_eq!(n.entry(r, c).re, want);
            }
        }
        let a = annihilation(3).unwrap();
        let product = a.adjoint().matmul(&a).unwrap();
        assert!((product.matrix() - n.matrix()).norm() < 1e-14);
        assert_eq!(n.trace().re, 6.0);
    }

    #[test]
    fn commutator_is_identity_below_top_level() {
        let cutoff = 7;
        let a = annihilation(cutoff).unwrap();
        let comm = a.commutator(&a.adjoint()).unwrap();
        for r in 0..cutoff {
            for c in 0..cutoff {
                let want = if r == c { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(comm.entry(r, c).re, want, epsilon = 1e-14);
                assert_abs_diff_eq!(comm.entry(r, c).im, 0.0);
            }
        }
        assert_abs_diff_eq!(comm.entry(cutoff, cutoff).re, -(cutoff as f64), epsilon = 1e-12);
    }

    #[test]
    fn thermal_state_values() {
        let vac = thermal_state(0.0, 5).unwrap();
        assert_eq!(vac.populations()[0], 1.0);
        assert!(vac.populations()[1..].iter().all(|&p| p == 0.0));

        let t = thermal_state(0.1, 20).unwrap();
        assert_abs_diff_eq!(t.populations()[0], 1.0 / 1.1, epsilon = 1e-12);

        let t = thermal_state(0.5, 20).unwrap();
        let p = t.populations();
        assert_abs_diff_eq!(p[1] / p[0], 1.0 / 3.0, epsilon = 1e-14);
        assert!(p.windows(2).all(|w| w[1] < w[0]));
        assert_abs_diff_eq!(p.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn thermal_reports_truncated_mass() {
        let t = thermal_state_with_mass(3.0, 4).unwrap();
        let expected = (0.75f64).powi(5);
        assert_abs_diff_eq!(t.truncated_mass, expected, epsilon = 1e-12);
        assert!(thermal_state(-0.1, 5).is_err());
    }

    #[test]
    fn fock_and_coherent() {
        let f = fock_state(1, 4).unwrap();
        assert_eq!(f.populations()[1], 1.0);
        assert_eq!(
            fock_state(5, 4).unwrap_err(),
            Error::LevelOutOfRange { level: 5, cutoff: 4 }
        );

        let c0 = coherent_state(C64::new(0.0, 0.0), 10).unwrap();
        assert_abs_diff_eq!(c0.populations()[0], 1.0, epsilon = 1e-15);

        let c1 = coherent_state(C64::new(1.0, 0.0), 20).unwrap();
        let n = number_operator(20).unwrap();
        assert_abs_diff_eq!(expectation(&n, &c1).unwrap().re, 1.0, epsilon = 1e-9);

        assert!(matches!(
            coherent_state(C64::new(3.0, 0.0), 20),
            Err(Error::TruncationUnsafe { .. })
        ));
    }

    #[test]
    fn kron_of_identities() {
        let i2 = Operator::identity(2, "q");
        let i3 = Operator::identity(3, "t");
        let k = i2.kron(&i3);
        assert_eq!(k.matrix(), &DMatrix::<C64>::identity(6, 6));
    }

    #[test]
    fn expectation_basics() {
        let n = number_operator(5).unwrap();
        let f3 = fock_state(3, 5).unwrap();
        assert_eq!(expectation(&n, &f3).unwrap().re, 3.0);

        let wrong = number_operator(3).unwrap();
        assert!(matches!(
            expectation(&wrong, &f3),
            Err(Error::DimensionMismatch { .. })
        ));
        let a = annihilation(3).unwrap();
        assert!(a.matmul(&Operator::identity(5, "x")).is_err());
    }

    #[test]
    fn density_matrix_validation() {
        let bad = Operator::from_real_fn(2, "q", |r, c| if r == c { 0.7 } else { 0.0 });
        assert!(DensityMatrix::new(bad).is_err());
        let neg = Operator::from_real_fn(2, "q", |r, c| match (r, c) {
            (0, 0) => 1.5,
            (1, 1) => -0.5,
            _ => 0.0,
        });
        assert!(DensityMatrix::new(neg).is_err());
        let nonherm = Operator::from_real_fn(2, "q", |r, c| match (r, c) {
            (0, 0) | (1, 1) => 0.5,
            (0, 1) => 0.1,
            _ => 0.0,
        });
        assert!(DensityMatrix::new(nonherm).is_err());
    }

    #[test]
    fn norm_bounds() {
        let h = Operator::from_real_fn(2, "q", |r, c| if r == c { 0.0 } else { 1.0 });
        assert_abs_diff_eq!(h.spectral_spread_bound(), 2.0);
        assert_abs_diff_eq!(h.norm_bound(), 1.0);
    }
}
