//! Physical parameters of the NV-ensemble / phonon system, the quantities
//! derived from them, and the Hamiltonian matrices built on top.
//!
//! Every stored rate is a linear frequency (the "/2π" value) in kHz. Matrices
//! returned by the `build_*` functions are in angular units, rad/ms, so that
//! time is measured in milliseconds.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::fock::{self, Operator, C64};

pub const TWO_PI: f64 = 2.0 * PI;

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Largest tensor-product dimension the bosonized builders accept.
pub const MAX_BOSONIZED_DIM: usize = 4096;

/// Ratio below which a "≪" condition counts as satisfied.
pub const REGIME_THRESHOLD: f64 = 0.1;

/// How the bath occupation of the dark polariton is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Bath {
    /// Mean thermal polariton number given directly.
    Occupation(f64),
    /// Phonon bath temperature in kelvin; the polariton occupation follows
    /// from the phonon fraction of the dark mode.
    Temperature(f64),
}

/// Input parameters. All frequencies are linear, in kHz.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalParams {
    /// Single-NV strain coupling g₁₃.
    pub g13: f64,
    /// Number of NV centers in the ensemble.
    pub n_centers: u64,
    /// Microwave Rabi frequency Ω_d on |2⟩↔|3⟩.
    pub omega_d: f64,
    /// Effective level-4 coupling g̃₂₄.
    pub g24_tilde: f64,
    /// Level-3 detuning ε.
    pub epsilon: f64,
    /// Level-4 detuning δ.
    pub delta: f64,
    /// Spontaneous decay of level 4, γ₄.
    pub gamma4: f64,
    /// Phonon mode frequency ω_m.
    pub omega_m: f64,
    /// Mechanical quality factor.
    pub q_factor: f64,
    /// Preparation drive Ω on |1⟩↔|2⟩.
    pub omega_drive: f64,
    pub bath: Bath,
    pub cutoff: usize,
}

impl Default for PhysicalParams {
    /// NV ensemble in a diamond phononic crystal: N = 40000, g₁₃ = 1 kHz,
    /// Ω_d = 20 kHz, g̃₂₄ = ε = 200 kHz, δ = 40 MHz, γ₄ = 10 MHz,
    /// ω_m = 800 MHz, Q = 10⁶, n_th = 0.1, n_max = 20, and a preparation
    /// drive giving Ω̃ = g/5.
    fn default() -> Self {
        Self {
            g13: 1.0,
            n_centers: 40_000,
            omega_d: 20.0,
            g24_tilde: 200.0,
            epsilon: 200.0,
            delta: 40_000.0,
            gamma4: 10_000.0,
            omega_m: 800_000.0,
            q_factor: 1e6,
            omega_drive: 0.0,
            bath: Bath::Occupation(0.1),
            cutoff: 20,
        }
        .with_drive_over_g(0.2)
    }
}

impl PhysicalParams {
    /// Sets Ω so that the dark-polariton drive Ω̃ equals `ratio·g`.
    pub fn with_drive_over_g(mut self, ratio: f64) -> Self {
        let d = derive(&self);
        self.omega_drive = ratio * d.g_nl * d.b / d.g13_tilde;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("g13", self.g13),
            ("omega_d", self.omega_d),
            ("g24_tilde", self.g24_tilde),
            ("epsilon", self.epsilon),
            ("delta", self.delta),
            ("gamma4", self.gamma4),
            ("omega_m", self.omega_m),
            ("q_factor", self.q_factor),
            ("omega_drive", self.omega_drive),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {value}"),
                });
            }
        }
        if self.n_centers == 0 {
            return Err(Error::InvalidParameter {
                name: "n_centers",
                reason: "must be at least 1".into(),
            });
        }
        if self.cutoff == 0 {
            return Err(Error::InvalidCutoff(0));
        }
        match self.bath {
            Bath::Occupation(n) if !(n >= 0.0) || !n.is_finite() => {
                Err(Error::NegativeOccupation(n))
            }
            Bath::Temperature(t) if !(t > 0.0) || !t.is_finite() => {
                Err(Error::NonPositiveTemperature(t))
            }
            _ => Ok(()),
        }
    }

    /// Bath occupation of the dark polariton.
    pub fn n_th(&self, d: &DerivedParams) -> Result<f64> {
        match self.bath {
            Bath::Occupation(n) => Ok(n),
            Bath::Temperature(t) => thermal_polariton_occupation(d, t),
        }
    }
}

/// `g̃₂₄ = g₂₄·Ω_c/ω_m`, for when the microscopic couplings are known.
pub fn g24_tilde_from_microscopic(g24: f64, omega_c: f64, omega_m: f64) -> f64 {
    g24 * omega_c / omega_m
}

/// Detuning `ω₂₄ − ω_c − g₂₄²/ω_m − ω_m` of the displaced frame; zero on
/// resonance.
pub fn resonance_mismatch(omega_24: f64, omega_c: f64, g24: f64, omega_m: f64) -> f64 {
    omega_24 - omega_c - g24 * g24 / omega_m - omega_m
}

/// Quantities that follow in closed form from [`PhysicalParams`]. Linear kHz.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedParams {
    pub omega_d: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub g24_tilde: f64,
    pub omega_m: f64,
    /// Collective coupling √N·g₁₃.
    pub g13_tilde: f64,
    /// `√(Ω_d² + g̃₁₃²)`.
    pub b: f64,
    /// `√(ε² + 4B²)`.
    pub a: f64,
    pub mu_plus: f64,
    pub mu_minus: f64,
    /// Weight of the |3⟩ spin wave in P₊.
    pub mu_coeff: f64,
    /// Weight of the bright combination in P₊.
    pub nu_coeff: f64,
    /// Kerr strength g of the dark polariton.
    pub g_nl: f64,
    /// Drive on the dark polariton, Ω̃ = Ω·g̃₁₃/B.
    pub omega_tilde: f64,
    pub omega_drive: f64,
    pub gamma_a: f64,
    pub gamma_p: f64,
    pub gamma_total: f64,
    /// Phonon weight of the dark polariton, Ω_d²/B².
    pub phonon_fraction: f64,
}

pub fn derive(p: &PhysicalParams) -> DerivedParams {
    let g13_tilde = (p.n_centers as f64).sqrt() * p.g13;
    let b2 = p.omega_d * p.omega_d + g13_tilde * g13_tilde;
    let b = b2.sqrt();
    let a = (p.epsilon * p.epsilon + 4.0 * b2).sqrt();
    let mu_plus = (p.epsilon + a) / 2.0;
    let mu_minus = (p.epsilon - a) / 2.0;
    let mix = (mu_plus * mu_plus + b2).sqrt();
    let g_nl = p.g24_tilde * p.g24_tilde * g13_tilde * g13_tilde
        / (4.0 * p.delta * p.omega_d * p.omega_d);
    let gamma_a = p.gamma4 / (2.0 * p.delta) * g_nl;
    let gamma_p = p.omega_m / p.q_factor;
    DerivedParams {
        omega_d: p.omega_d,
        epsilon: p.epsilon,
        delta: p.delta,
        g24_tilde: p.g24_tilde,
        omega_m: p.omega_m,
        g13_tilde,
        b,
        a,
        mu_plus,
        mu_minus,
        mu_coeff: mu_plus / mix,
        nu_coeff: b / mix,
        g_nl,
        omega_tilde: p.omega_drive * g13_tilde / b,
        omega_drive: p.omega_drive,
        gamma_a,
        gamma_p,
        gamma_total: gamma_a + gamma_p,
        phonon_fraction: p.omega_d * p.omega_d / b2,
    }
}

impl DerivedParams {
    /// The same system with the microwave Rabi frequency replaced, as during
    /// an adiabatic sweep of Ω_d. Rates that do not depend on Ω_d are kept.
    pub fn with_omega_d(&self, omega_d: f64) -> Self {
        let b2 = omega_d * omega_d + self.g13_tilde * self.g13_tilde;
        let b = b2.sqrt();
        let a = (self.epsilon * self.epsilon + 4.0 * b2).sqrt();
        let mu_plus = (self.epsilon + a) / 2.0;
        let mix = (mu_plus * mu_plus + b2).sqrt();
        let g_nl = self.g24_tilde * self.g24_tilde * self.g13_tilde * self.g13_tilde
            / (4.0 * self.delta * omega_d * omega_d);
        let gamma_a = if self.g_nl != 0.0 {
            self.gamma_a * g_nl / self.g_nl
        } else {
            0.0
        };
        Self {
            omega_d,
            b,
            a,
            mu_plus,
            mu_minus: (self.epsilon - a) / 2.0,
            mu_coeff: mu_plus / mix,
            nu_coeff: b / mix,
            g_nl,
            omega_tilde: self.omega_drive * self.g13_tilde / b,
            gamma_a,
            gamma_total: gamma_a + self.gamma_p,
            phonon_fraction: omega_d * omega_d / b2,
            ..self.clone()
        }
    }
}

/// Mean thermal phonon number `1/(exp(h·f/k_B·T) − 1)` at frequency `f_khz`.
pub fn bose_einstein(f_khz: f64, temperature_k: f64) -> Result<f64> {
    if !(temperature_k > 0.0) {
        return Err(Error::NonPositiveTemperature(temperature_k));
    }
    let x = PLANCK * f_khz * 1e3 / (BOLTZMANN * temperature_k);
    Ok(1.0 / x.exp_m1())
}

/// Dark-polariton bath occupation `(Ω_d²/B²)·n̄_phonon(T)`.
pub fn thermal_polariton_occupation(d: &DerivedParams, temperature_k: f64) -> Result<f64> {
    Ok(d.phonon_fraction * bose_einstein(d.omega_m, temperature_k)?)
}

/// One inequality of the validity regime.
#[derive(Clone, Debug, PartialEq)]
pub struct RegimeRow {
    pub name: &'static str,
    pub relation: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl RegimeRow {
    /// A "≪" condition: passes when `lhs/rhs ≤ threshold`.
    fn much_less(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let ratio = lhs / rhs;
        Self {
            name,
            relation: "<<",
            lhs,
            rhs,
            ratio,
            threshold: REGIME_THRESHOLD,
            pass: ratio <= REGIME_THRESHOLD,
        }
    }

    /// A plain "<" condition: passes when `lhs/rhs < 1`.
    fn less(name: &'static str, lhs: f64, rhs: f64) -> Self {
        let ratio = lhs / rhs;
        Self {
            name,
            relation: "<",
            lhs,
            rhs,
            ratio,
            threshold: 1.0,
            pass: ratio < 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeReport {
    pub rows: Vec<RegimeRow>,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &RegimeRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn row(&self, name: &str) -> Option<&RegimeRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

/// Evaluates the approximation conditions behind the effective Kerr model.
/// Failures are reported, never raised.
pub fn check_regime(d: &DerivedParams, p: &PhysicalParams) -> RegimeReport {
    let level4 = d.g24_tilde * d.omega_d / (4.0 * d.g13_tilde);
    let elimination = d.g24_tilde * d.g13_tilde / (2.0 * d.omega_d);
    let rows = vec![
        RegimeRow::much_less("level4_vs_2mu_plus", level4, 2.0 * d.mu_plus),
        RegimeRow::much_less("level4_vs_2mu_minus", level4, 2.0 * d.mu_minus.abs()),
        RegimeRow::much_less("level4_vs_mu_sum", level4, (d.mu_plus + d.mu_minus).abs()),
        RegimeRow::much_less("higher_order_nonlinearity", elimination, p.delta),
        RegimeRow::much_less("omega_d_vs_g13", d.omega_d, d.g13_tilde),
        RegimeRow::less("drive_tilde_vs_g", d.omega_tilde, d.g_nl),
        RegimeRow::less("drive_vs_g", p.omega_drive, d.g_nl),
        RegimeRow::much_less("g_vs_mu", d.g_nl, d.mu_plus.min(d.mu_minus.abs())),
    ];
    for r in rows.iter().filter(|r| !r.pass) {
        log::warn!(
            "regime condition {} fails: {:.6} / {:.6} = {:.4} (threshold {})",
            r.name,
            r.lhs,
            r.rhs,
            r.ratio,
            r.threshold
        );
    }
    RegimeReport { rows }
}

/// `−g·a†a†aa + Ω̃(a† + a)` on the dark-polariton Fock space, rad/ms.
pub fn build_effective_hamiltonian(d: &DerivedParams, cutoff: usize, drive_on: bool) -> Result<Operator> {
    let a = fock::annihilation(cutoff)?;
    let ad = a.adjoint();
    let kerr = ad.matmul(&ad)?.matmul(&a)?.matmul(&a)?;
    let mut h = kerr.scale_real(-TWO_PI * d.g_nl);
    if drive_on {
        h = h.add(&a.add(&ad)?.scale_real(TWO_PI * d.omega_tilde))?;
    }
    Ok(h)
}

/// Per-mode cutoffs of the bosonized four-mode space, ordered d ⊗ f ⊗ b ⊗ e:
/// spin waves on |2⟩ and |3⟩, the phonon, and the level-4 excitation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModeCutoffs {
    pub d: usize,
    pub f: usize,
    pub b: usize,
    pub e: usize,
}

impl ModeCutoffs {
    pub const fn uniform(n: usize) -> Self {
        Self { d: n, f: n, b: n, e: n }
    }

    /// Smallest cutoffs that hold every state with `N_ex ≤ 2`.
    pub const TWO_EXCITATIONS: Self = Self { d: 2, f: 2, b: 2, e: 1 };

    pub fn dims(&self) -> [usize; 4] {
        [self.d + 1, self.f + 1, self.b + 1, self.e + 1]
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Flat index of the occupation tuple (n_d, n_f, n_b, n_e).
    pub fn index(&self, occ: [usize; 4]) -> Option<usize> {
        let dims = self.dims();
        let mut idx = 0;
        for k in 0..4 {
            if occ[k] >= dims[k] {
                return None;
            }
            idx = idx * dims[k] + occ[k];
        }
        Some(idx)
    }

    /// Occupation tuple of a flat index.
    pub fn occupation(&self, mut idx: usize) -> [usize; 4] {
        let dims = self.dims();
        let mut occ = [0; 4];
        for k in (0..4).rev() {
            occ[k] = idx % dims[k];
            idx /= dims[k];
        }
        occ
    }
}

/// Lowering operators of the four bosonized modes embedded in the full
/// tensor-product space.
#[derive(Clone, Debug)]
pub struct BosonModes {
    pub cutoffs: ModeCutoffs,
    pub d: Operator,
    pub f: Operator,
    pub b: Operator,
    pub e: Operator,
}

impl BosonModes {
    pub fn new(cutoffs: ModeCutoffs) -> Result<Self> {
        let dim = cutoffs.total_dim();
        if dim > MAX_BOSONIZED_DIM {
            return Err(Error::DimensionLimit {
                dim,
                limit: MAX_BOSONIZED_DIM,
            });
        }
        let cs = [cutoffs.d, cutoffs.f, cutoffs.b, cutoffs.e];
        let label = format!(
            "modes d({})⊗f({})⊗b({})⊗e({})",
            cutoffs.d, cutoffs.f, cutoffs.b, cutoffs.e
        );
        let embed = |which: usize| -> Result<Operator> {
            let mut acc: Option<Operator> = None;
            for (k, &c) in cs.iter().enumerate() {
                let factor = if k == which {
                    fock::annihilation(c)?
                } else {
                    Operator::identity(c + 1, "")
                };
                acc = Some(match acc {
                    None => factor,
                    Some(prev) => prev.kron(&factor),
                });
            }
            Ok(acc.expect("four modes").with_label(label.clone()))
        };
        Ok(Self {
            cutoffs,
            d: embed(0)?,
            f: embed(1)?,
            b: embed(2)?,
            e: embed(3)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    pub fn vacuum(&self) -> DVector<C64> {
        fock::basis_vector(self.dim(), 0)
    }

    /// `n_d + n_f + n_b + 2·n_e`, conserved by `H₀ + H₁`.
    pub fn excitation_number(&self) -> Result<Operator> {
        let n = |x: &Operator| x.adjoint().matmul(x);
        n(&self.d)?
            .add(&n(&self.f)?)?
            .add(&n(&self.b)?)?
            .add(&n(&self.e)?.scale_real(2.0))
    }

    /// Creation operator `c_d·d† + c_f·f† + c_b·b†`.
    pub fn mode_creation(&self, coeffs: [f64; 3]) -> Result<Operator> {
        self.d
            .adjoint()
            .scale_real(coeffs[0])
            .add(&self.f.adjoint().scale_real(coeffs[1]))?
            .add(&self.b.adjoint().scale_real(coeffs[2]))
    }
}

/// `H₀ = ε f†f + Ω_d(f†d + d†f) + g̃₁₃(b f† + b† f)`, rad/ms.
pub fn build_bosonized_h0(d: &DerivedParams, cutoffs: ModeCutoffs) -> Result<Operator> {
    let m = BosonModes::new(cutoffs)?;
    bosonized_h0(d, &m)
}

/// `H₁ = δ e†e − g̃₂₄(b e† d + d† e b†)`, rad/ms.
pub fn build_bosonized_h1(d: &DerivedParams, cutoffs: ModeCutoffs) -> Result<Operator> {
    let m = BosonModes::new(cutoffs)?;
    bosonized_h1(d, &m)
}

pub fn bosonized_h0(d: &DerivedParams, m: &BosonModes) -> Result<Operator> {
    let (dd, ff, bb) = (&m.d, &m.f, &m.b);
    let fd = ff.adjoint().matmul(dd)?;
    let bf = ff.adjoint().matmul(bb)?;
    ff.adjoint()
        .matmul(ff)?
        .scale_real(d.epsilon)
        .add(&fd.add(&fd.adjoint())?.scale_real(d.omega_d))?
        .add(&bf.add(&bf.adjoint())?.scale_real(d.g13_tilde))
        .map(|h| h.scale_real(TWO_PI))
}

pub fn bosonized_h1(d: &DerivedParams, m: &BosonModes) -> Result<Operator> {
    let (dd, bb, ee) = (&m.d, &m.b, &m.e);
    let hop = ee.adjoint().matmul(dd)?.matmul(bb)?;
    ee.adjoint()
        .matmul(ee)?
        .scale_real(d.delta)
        .sub(&hop.add(&hop.adjoint())?.scale_real(d.g24_tilde))
        .map(|h| h.scale_real(TWO_PI))
}

/// Single-excitation block of H₀ in the (d, f, b) basis, linear kHz.
pub fn single_excitation_block(omega_d: f64, epsilon: f64, g13_tilde: f64) -> [[f64; 3]; 3] {
    [
        [0.0, omega_d, 0.0],
        [omega_d, epsilon, g13_tilde],
        [0.0, g13_tilde, 0.0],
    ]
}

/// Mode coefficients (on d†, f†, b†) of the three polariton creation
/// operators.
#[derive(Clone, Debug, PartialEq)]
pub struct PolaritonBasis {
    pub dark: [f64; 3],
    pub plus: [f64; 3],
    pub minus: [f64; 3],
}

impl PolaritonBasis {
    pub fn vectors(&self) -> [[f64; 3]; 3] {
        [self.dark, self.plus, self.minus]
    }
}

/// P₀† = (g̃₁₃ d† − Ω_d b†)/B; P₊† = μ f† + ν·bright; P₋† = −ν f† + μ·bright,
/// with bright = (Ω_d d† + g̃₁₃ b†)/B.
pub fn polariton_basis(d: &DerivedParams) -> PolaritonBasis {
    let (sb, sd) = (d.g13_tilde / d.b, d.omega_d / d.b);
    let (mu, nu) = (d.mu_coeff, d.nu_coeff);
    PolaritonBasis {
        dark: [sb, 0.0, -sd],
        plus: [nu * sd, mu, nu * sb],
        minus: [mu * sd, -nu, mu * sb],
    }
}
