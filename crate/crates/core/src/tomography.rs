//! Density-matrix reconstruction from photon statistics of the displaced
//! signal `D(γ) ν D†(γ)` at fixed `|γ|` and a uniform grid of phases.
//!
//! With `A_{kmn}(γ) = ⟨n|D(γ)|k⟩⟨m|D†(γ)|n⟩` the distributions obey
//! `P_γ(n) = Σ_km ν_km A_kmn(γ)`, and `A` at phase `φ` is `A` at `|γ|` times
//! `e^{i(m−k)φ}`. Averaging `e^{isφ} P_γ(n)` over the phase grid therefore
//! isolates the `s`-th diagonal of `ν`:
//!
//! ```text
//! P^{(s)}(n) = Σ_{m=0}^{M−s} A_{m+s,m,n}(|γ|) ν_{m+s,m}
//! ```
//!
//! which is solved row-overdetermined for each `s` by Householder QR.

use std::f64::consts::PI;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cascade::{derive_seed, estimate_from_state, CascadeConfig};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::filter::ProbeDetector;
use crate::fock::{displacement_margin, displacement_matrix, CMatrix, DensityMatrix, PhotonDistribution, CUTOFF_CEILING};

/// Largest tolerated displaced mass beyond the working cutoff.
pub const DISPLACED_TAIL_TOL: f64 = 1e-6;
/// Condition estimates above this flag a per-diagonal solve as rank deficient.
pub const CONDITION_LIMIT: f64 = 1e12;
const GRID_TOL: f64 = 1e-9;

/// Cascade used to measure displaced distributions by Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonteCarloDetector {
    pub samples_per_phase: usize,
    pub tau: f64,
    pub chi_t: f64,
    pub probe: ProbeDetector,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// `diag(D ν D†)` evaluated exactly.
    #[default]
    ExactProbabilities,
    /// First-ON statistics of a simulated cascade.
    MonteCarlo(MonteCarloDetector),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographyPlan {
    pub gamma_abs: f64,
    pub phases: Vec<f64>,
    /// Largest Fock index of the reconstructed state.
    pub m_max: usize,
    /// Photon-number rows used per linear system.
    pub n_rows: usize,
    pub backend: Backend,
}

/// `φ_j = 2πj/count`.
pub fn uniform_phases(count: usize) -> Vec<f64> {
    (0..count).map(|j| 2.0 * PI * j as f64 / count as f64).collect()
}

impl TomographyPlan {
    /// Defaults: `2M + 6` uniform phases, `2(M + 1)` rows, exact backend.
    pub fn new(gamma_abs: f64, m_max: usize) -> Self {
        Self {
            gamma_abs,
            phases: uniform_phases(2 * m_max + 6),
            m_max,
            n_rows: 2 * (m_max + 1),
            backend: Backend::ExactProbabilities,
        }
    }

    pub fn with_phase_count(mut self, count: usize) -> Self {
        self.phases = uniform_phases(count);
        self
    }

    pub fn with_rows(mut self, n_rows: usize) -> Self {
        self.n_rows = n_rows;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_abs.is_finite() && self.gamma_abs > 0.0) {
            return Err(Error::param("gamma_abs", format!("must be finite and > 0, got {}", self.gamma_abs)));
        }
        let need = 2 * self.m_max + 1;
        if self.phases.len() < need {
            return Err(Error::param(
                "phases",
                format!("{} phases cannot separate {} diagonals; need at least {need}", self.phases.len(), need),
            ));
        }
        check_uniform(&self.phases)?;
        if self.n_rows < self.m_max + 1 {
            return Err(Error::param(
                "n_rows",
                format!("{} rows underdetermine the main diagonal of size {}", self.n_rows, self.m_max + 1),
            ));
        }
        if let Backend::MonteCarlo(mc) = &self.backend {
            if mc.samples_per_phase == 0 {
                return Err(Error::param("samples_per_phase", "need at least one sample"));
            }
            mc.probe.validate()?;
            crate::cavity::CavityParams::new(mc.tau, 0.0, mc.chi_t)?;
        }
        Ok(())
    }

    fn gamma_at(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.gamma_abs, self.phases[j])
    }
}

fn check_uniform(phases: &[f64]) -> Result<()> {
    let count = phases.len();
    if count == 0 {
        return Err(Error::NonUniformGrid("empty grid".into()));
    }
    for (j, &phi) in phases.iter().enumerate() {
        let want = phases[0] + 2.0 * PI * j as f64 / count as f64;
        let diff = (phi - want + PI).rem_euclid(2.0 * PI) - PI;
        if diff.abs() > GRID_TOL {
            return Err(Error::NonUniformGrid(format!(
                "phase {j} is {phi}, expected {want} (mod 2π)"
            )));
        }
    }
    Ok(())
}

/// Photon distributions measured at each grid phase: `probabilities[j][n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseScan {
    pub phases: Vec<f64>,
    pub probabilities: Vec<Vec<f64>>,
}

impl PhaseScan {
    /// Collects `(φ, n, P)` triples. Phases are grouped by exact value in
    /// first-seen order; missing `n` entries are zero.
    pub fn from_triples(triples: &[(f64, usize, f64)]) -> Result<Self> {
        let mut phases: Vec<f64> = Vec::new();
        let mut probabilities: Vec<Vec<f64>> = Vec::new();
        for &(phi, n, p) in triples {
            if !(phi.is_finite() && p.is_finite()) {
                return Err(Error::param("measured", format!("non-finite entry ({phi}, {n}, {p})")));
            }
            let j = match phases.iter().position(|&x| x == phi) {
                Some(j) => j,
                None => {
                    phases.push(phi);
                    probabilities.push(Vec::new());
                    phases.len() - 1
                }
            };
            let row = &mut probabilities[j];
            if row.len() <= n {
                row.resize(n + 1, 0.0);
            }
            row[n] = p;
        }
        Ok(Self { phases, probabilities })
    }

    pub fn triples(&self) -> Vec<(f64, usize, f64)> {
        self.phases
            .iter()
            .zip(&self.probabilities)
            .flat_map(|(&phi, row)| row.iter().enumerate().map(move |(n, &p)| (phi, n, p)))
            .collect()
    }
}

fn displaced_matrix(nu: &DensityMatrix, gamma: Complex64, dim: usize) -> Result<CMatrix> {
    let d = displacement_matrix(gamma, dim);
    let padded = nu.padded(dim)?;
    Ok(&d * padded.matrix() * d.adjoint())
}

/// Photon distribution of `D(γ) ν D†(γ)` for `n < n_rows`.
pub fn displaced_distribution(
    nu: &DensityMatrix,
    gamma: Complex64,
    n_rows: usize,
    backend: &Backend,
    exec: Exec,
) -> Result<PhotonDistribution> {
    let margin = displacement_margin(gamma);
    let base = nu.dim().max(n_rows);
    let work = base + margin;
    let shifted = displaced_matrix(nu, gamma, work)?;
    let captured: f64 = (0..work).map(|n| shifted[(n, n)].re).sum();
    let tail = nu.trace() - captured;
    if tail > DISPLACED_TAIL_TOL {
        let mut required = work;
        while required < CUTOFF_CEILING {
            required += margin;
            let m = displaced_matrix(nu, gamma, required)?;
            let cap: f64 = (0..required).map(|n| m[(n, n)].re).sum();
            if nu.trace() - cap <= DISPLACED_TAIL_TOL {
                break;
            }
        }
        return Err(Error::InsufficientMargin {
            given: work,
            required,
            tail,
        });
    }
    match backend {
        Backend::ExactProbabilities => Ok(PhotonDistribution::exact(
            (0..n_rows).map(|n| shifted[(n, n)].re.max(0.0)).collect(),
        )),
        Backend::MonteCarlo(mc) => {
            let state = DensityMatrix::from_upper_unchecked(shifted).normalized()?;
            let cfg = CascadeConfig::ladder(n_rows - 1, mc.tau, mc.chi_t, mc.probe, mc.samples_per_phase, mc.seed)?;
            Ok(estimate_from_state(&state, &cfg, exec)?.distribution)
        }
    }
}

/// `A_{kmn}(γ) = ⟨n|D(γ)|k⟩ ⟨m|D†(γ)|n⟩`.
pub fn kernel_a(k: usize, m: usize, n: usize, gamma: Complex64) -> Complex64 {
    let d = displacement_matrix(gamma, k.max(m).max(n) + 1);
    d[(n, k)] * d[(n, m)].conj()
}

/// Sign of the exponent in the phase Fourier transform. [`FourierSign::Plus`]
/// is the convention under which the transform pairs with `A` at real `|γ|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FourierSign {
    #[default]
    Plus,
    Minus,
}

impl FourierSign {
    fn value(self) -> f64 {
        match self {
            FourierSign::Plus => 1.0,
            FourierSign::Minus => -1.0,
        }
    }
}

/// `P^{(s)}(n) = (1/N_φ) Σ_j e^{+isφ_j} P_{γ_j}(n)` on a uniform phase grid.
pub fn phase_fourier(p_matrix: &[Vec<f64>], phases: &[f64], s: i64) -> Result<Vec<Complex64>> {
    phase_fourier_with_sign(p_matrix, phases, s, FourierSign::Plus)
}

pub fn phase_fourier_with_sign(
    p_matrix: &[Vec<f64>],
    phases: &[f64],
    s: i64,
    sign: FourierSign,
) -> Result<Vec<Complex64>> {
    check_uniform(phases)?;
    if p_matrix.len() != phases.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} distributions for {} phases",
            p_matrix.len(),
            phases.len()
        )));
    }
    let width = p_matrix.iter().map(Vec::len).max().unwrap_or(0);
    let mut out = vec![Complex64::new(0.0, 0.0); width];
    let norm = 1.0 / phases.len() as f64;
    for (row, &phi) in p_matrix.iter().zip(phases) {
        let w = Complex64::from_polar(norm, sign.value() * s as f64 * phi);
        for (acc, &p) in out.iter_mut().zip(row) {
            *acc += w * p;
        }
    }
    Ok(out)
}

/// Evaluates the distributions the plan's backend would measure for `nu`.
pub fn simulate_scan(nu: &DensityMatrix, plan: &TomographyPlan, exec: Exec) -> Result<PhaseScan> {
    plan.validate()?;
    let probabilities = exec.try_map(plan.phases.len(), |j| {
        let backend = match plan.backend {
            Backend::MonteCarlo(mc) => Backend::MonteCarlo(MonteCarloDetector {
                seed: derive_seed(mc.seed, j as u64),
                ..mc
            }),
            b => b,
        };
        displaced_distribution(nu, plan.gamma_at(j), plan.n_rows, &backend, exec).map(|d| d.values)
    })?;
    Ok(PhaseScan {
        phases: plan.phases.clone(),
        probabilities,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalSolve {
    pub s: usize,
    /// `‖A x − P^{(s)}‖₂`.
    pub residual_norm: f64,
    /// Ratio of extreme singular values of the system matrix.
    pub condition: f64,
    pub rank_deficient: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    /// Hermitian by construction; positivity and unit trace are not enforced.
    pub nu_hat: DensityMatrix,
    pub diagonals: Vec<DiagonalSolve>,
    pub trace: f64,
}

impl ReconstructionResult {
    pub fn flagged(&self) -> bool {
        self.diagonals.iter().any(|d| d.rank_deficient)
    }

    pub fn trace_plausible(&self) -> bool {
        (0.9..=1.1).contains(&self.trace)
    }
}

/// Least-squares estimate of `ν` (dimension `M + 1`) from a phase scan.
pub fn reconstruct(plan: &TomographyPlan, scan: &PhaseScan, exec: Exec) -> Result<ReconstructionResult> {
    reconstruct_with_sign(plan, scan, FourierSign::Plus, exec)
}

/// [`reconstruct`] with an explicit Fourier sign, for convention checks.
pub fn reconstruct_with_sign(
    plan: &TomographyPlan,
    scan: &PhaseScan,
    sign: FourierSign,
    exec: Exec,
) -> Result<ReconstructionResult> {
    plan.validate()?;
    if scan.phases.len() != plan.phases.len()
        || scan.phases.iter().zip(&plan.phases).any(|(a, b)| (a - b).abs() > GRID_TOL)
    {
        return Err(Error::DimensionMismatch("scan phases differ from the plan's grid".into()));
    }
    if let Some(j) = scan.probabilities.iter().position(|r| r.len() < plan.n_rows) {
        return Err(Error::DimensionMismatch(format!(
            "phase {j} has {} rows, plan needs {}",
            scan.probabilities[j].len(),
            plan.n_rows
        )));
    }
    let m_max = plan.m_max;
    let rows = plan.n_rows;
    let d = displacement_matrix(Complex64::new(plan.gamma_abs, 0.0), rows.max(m_max + 1));

    let solves = exec.try_map(m_max + 1, |s| -> Result<(Vec<Complex64>, DiagonalSolve)> {
        let rhs = phase_fourier_with_sign(&scan.probabilities, &scan.phases, s as i64, sign)?;
        let b = DVector::from_iterator(rows, rhs.into_iter().take(rows));
        let cols = m_max + 1 - s;
        let a = CMatrix::from_fn(rows, cols, |n, m| d[(n, m + s)] * d[(n, m)].conj());
        let sv = a.clone().svd(false, false).singular_values;
        let (smax, smin) = sv.iter().fold((0.0f64, f64::INFINITY), |(hi, lo), &v| (hi.max(v), lo.min(v)));
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        let qr = a.clone().qr();
        let qtb = qr.q().adjoint() * &b;
        let solved = qr.r().solve_upper_triangular(&qtb);
        let rank_deficient = condition > CONDITION_LIMIT || solved.is_none();
        let x = solved.unwrap_or_else(|| DVector::zeros(cols));
        let residual_norm = (&a * &x - &b).norm();
        Ok((
            x.iter().copied().collect(),
            DiagonalSolve {
                s,
                residual_norm,
                condition,
                rank_deficient,
            },
        ))
    })?;

    let dim = m_max + 1;
    let mut upper = CMatrix::zeros(dim, dim);
    let mut diagonals = Vec::with_capacity(dim);
    for (x, diag) in solves {
        let s = diag.s;
        for (m, v) in x.into_iter().enumerate() {
            // x_m = ν_{m+s,m}; the upper triangle holds its conjugate
            upper[(m, m + s)] = v.conj();
        }
        diagonals.push(diag);
    }
    let nu_hat = DensityMatrix::from_upper_unchecked(upper);
    let trace = nu_hat.trace();
    Ok(ReconstructionResult {
        nu_hat,
        diagonals,
        trace,
    })
}
