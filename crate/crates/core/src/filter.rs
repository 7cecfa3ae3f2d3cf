//! Single pass of the Fock filter.
//!
//! The probe is a coherent state `|α⟩`; after the cavity the two probe
//! outputs carry `|κ_n α⟩ ⊗ |σ_n α⟩` for each signal component `|n⟩`. Tracing
//! out the probe with the ON/OFF detector POM (`Π₀ = Σ (1−η)^k |k⟩⟨k|`)
//! multiplies the signal density matrix elementwise by
//!
//! ```text
//! ON : exp(|α|²[κ_n κ_m* + σ_n σ_m* − 1]) · (1 − exp(−η|α|² σ_n σ_m*))
//! OFF: exp(|α|²[κ_n κ_m* + (1−η) σ_n σ_m* − 1])
//! ```
//!
//! The `e^{−|α|²}` normalization is folded into the exponent so that the
//! real part never exceeds zero and strong probes (`|α|² ~ 10⁴`) stay finite.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cavity::{resonant_components, CavityParams};
use crate::error::{Error, Result};
use crate::fock::{purity, CMatrix, DensityMatrix};

/// Probabilities below this make the conditional state undefined.
pub const IMPOSSIBLE_PROBABILITY: f64 = 1e-300;

/// Coherent probe amplitude and ON/OFF detector efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeDetector {
    pub alpha_re: f64,
    #[serde(default)]
    pub alpha_im: f64,
    pub eta: f64,
}

impl ProbeDetector {
    pub fn new(alpha: Complex64, eta: f64) -> Result<Self> {
        let p = Self {
            alpha_re: alpha.re,
            alpha_im: alpha.im,
            eta,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.alpha_re, self.alpha_im)
    }

    pub fn validate(&self) -> Result<()> {
        let a = self.alpha().norm();
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::param("alpha", format!("|alpha| must be finite and > 0, got {a}")));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::param("eta", format!("must lie in (0, 1], got {}", self.eta)));
        }
        Ok(())
    }

    /// Mean number of probe photons reaching the detector per unit `|σ|²`, `η|α|²`.
    pub fn detected_intensity(&self) -> f64 {
        self.eta * self.alpha().norm_sqr()
    }
}

/// A conditional output state, or the tag for a zero-probability outcome.
#[derive(Debug, Clone, PartialEq)]
pub enum Conditional {
    State(DensityMatrix),
    Impossible,
}

impl Conditional {
    pub fn state(&self) -> Option<&DensityMatrix> {
        match self {
            Conditional::State(s) => Some(s),
            Conditional::Impossible => None,
        }
    }

    pub fn is_impossible(&self) -> bool {
        matches!(self, Conditional::Impossible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterResult {
    pub p_on: f64,
    pub p_off: f64,
    pub state_on: Conditional,
    pub state_off: Conditional,
}

/// `−expm1(z) = 1 − e^z` without cancellation for small `|z|`.
fn one_minus_exp(z: Complex64) -> Complex64 {
    let half = (0.5 * z.im).sin();
    let re = z.re.exp_m1() * z.im.cos() - 2.0 * half * half;
    let im = z.re.exp() * z.im.sin();
    -Complex64::new(re, im)
}

/// Elementwise ON/OFF factors of one filter pass on a `dim`-level signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterChannel {
    on: CMatrix,
    off: CMatrix,
    max_exponent_re: f64,
}

impl FilterChannel {
    pub fn new(cav: &CavityParams, probe: &ProbeDetector, dim: usize) -> Result<Self> {
        cav.validate()?;
        probe.validate()?;
        let a2 = probe.alpha().norm_sqr();
        let eta = probe.eta;
        let (kappa, sigma): (Vec<_>, Vec<_>) = (0..dim).map(|n| cav.amplitudes(n)).unzip();

        let mut on = CMatrix::zeros(dim, dim);
        let mut off = CMatrix::zeros(dim, dim);
        let mut max_exponent_re = f64::NEG_INFINITY;
        for n in 0..dim {
            // diagonal: unit Kerr overlap, detector sees |σ_n α|²
            let y = eta * a2 * sigma[n].norm_sqr();
            on[(n, n)] = Complex64::new(-(-y).exp_m1(), 0.0);
            off[(n, n)] = Complex64::new((-y).exp(), 0.0);
            for m in n + 1..dim {
                let kk = kappa[n] * kappa[m].conj();
                let ss = sigma[n] * sigma[m].conj();
                let x_on = a2 * (kk + ss - 1.0);
                let x_off = a2 * (kk + (1.0 - eta) * ss - 1.0);
                max_exponent_re = max_exponent_re.max(x_on.re).max(x_off.re);
                on[(n, m)] = x_on.exp() * one_minus_exp(-eta * a2 * ss);
                off[(n, m)] = x_off.exp();
                on[(m, n)] = on[(n, m)].conj();
                off[(m, n)] = off[(n, m)].conj();
            }
        }
        if dim == 1 {
            max_exponent_re = 0.0;
        }
        Ok(Self {
            on,
            off,
            max_exponent_re,
        })
    }

    pub fn dim(&self) -> usize {
        self.on.nrows()
    }

    /// `P(ON | n) = 1 − exp(−η|α|²|σ_n|²)` per photon number.
    pub fn on_given_n(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.on[(n, n)].re).collect()
    }

    /// `P(OFF | n) = exp(−η|α|²|σ_n|²)` per photon number.
    pub fn off_given_n(&self) -> Vec<f64> {
        (0..self.dim()).map(|n| self.off[(n, n)].re).collect()
    }

    /// Largest real part of any off-diagonal exponent (diagonal exponents are
    /// zero by construction).
    pub fn max_exponent_re(&self) -> f64 {
        self.max_exponent_re
    }

    pub fn on_factors(&self) -> &CMatrix {
        &self.on
    }

    pub fn off_factors(&self) -> &CMatrix {
        &self.off
    }

    /// Applies the pass to `nu` and conditions on both detector outcomes.
    pub fn apply(&self, nu: &DensityMatrix) -> Result<FilterResult> {
        if nu.dim() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "state has dimension {}, channel {}",
                nu.dim(),
                self.dim()
            )));
        }
        let on_raw = nu.matrix().component_mul(&self.on);
        let off_raw = nu.matrix().component_mul(&self.off);
        let (p_on, state_on) = condition(on_raw);
        let (p_off, state_off) = condition(off_raw);
        Ok(FilterResult {
            p_on,
            p_off,
            state_on,
            state_off,
        })
    }
}

fn condition(raw: CMatrix) -> (f64, Conditional) {
    let p: f64 = (0..raw.nrows()).map(|n| raw[(n, n)].re).sum();
    let p = p.max(0.0);
    if p < IMPOSSIBLE_PROBABILITY {
        return (p, Conditional::Impossible);
    }
    let scaled = raw.map(|c| c / p);
    (p, Conditional::State(DensityMatrix::from_upper_unchecked(scaled)))
}

/// Exact detection probabilities and ON/OFF conditional signal states of one pass.
pub fn filter_pass(
    nu: &DensityMatrix,
    cav: &CavityParams,
    probe: &ProbeDetector,
) -> Result<FilterResult> {
    FilterChannel::new(cav, probe, nu.dim())?.apply(nu)
}

/// Good-cavity approximation of a pass tuned to `n_star`.
#[derive(Debug, Clone, PartialEq)]
pub struct AsymptoticResult {
    pub p_on: f64,
    pub state_on: Conditional,
    /// `η|α|²τ²/(χt)²`, the leakage weight of off-resonant components.
    pub leakage: f64,
}

/// Closed-form good-cavity limit (`τ ≪ χt`) of [`filter_pass`]:
///
/// ```text
/// P₁ ≈ ν_{n*n*} + c Σ_{p≠n*} ν_pp/(n*−p)²,         c = η|α|²τ²/(χt)²
/// ν_on ∝ ν_{n*n*}|n*⟩⟨n*| + c Σ_{n,k≠n*} ν_nk/((n*−n)(n*−k)) |n⟩⟨k|
/// ```
///
/// The ON state is normalized by its trace, which is the approximate `P₁`.
/// Off-resonant probe phases (Kerr phase kicks on the signal) are dropped.
pub fn filter_pass_asymptotic(
    nu: &DensityMatrix,
    cav: &CavityParams,
    probe: &ProbeDetector,
    n_star: usize,
) -> Result<AsymptoticResult> {
    cav.validate()?;
    probe.validate()?;
    let dim = nu.dim();
    if n_star >= dim {
        return Err(Error::param(
            "n_star",
            format!("{n_star} lies outside the state dimension {dim}"),
        ));
    }
    let leakage = probe.detected_intensity() * (cav.tau / cav.chi_t).powi(2);
    let mut raw = CMatrix::zeros(dim, dim);
    raw[(n_star, n_star)] = nu.get(n_star, n_star);
    let detuning = |n: usize| n_star as f64 - n as f64;
    for n in (0..dim).filter(|&n| n != n_star) {
        for k in (n..dim).filter(|&k| k != n_star) {
            raw[(n, k)] = nu.get(n, k) * leakage / (detuning(n) * detuning(k));
        }
    }
    let raw = DensityMatrix::from_upper_unchecked(raw).into_matrix();
    let (p_on, state_on) = condition(raw);
    Ok(AsymptoticResult {
        p_on,
        state_on,
        leakage,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionReport {
    pub resonant_set: Vec<usize>,
    /// `Σ_{n ∈ resonant_set} ν_nn`, the ideal-limit ON probability.
    pub resonant_weight: f64,
    pub p_on: f64,
    pub state_on: Conditional,
    /// `Tr(ν_on²)`; zero when the ON outcome is impossible.
    pub purity: f64,
}

/// Runs a pass whose cavity resonates with at least two Fock components of
/// the input support and reports the purity of the ON state.
pub fn superposition_synthesis_check(
    nu: &DensityMatrix,
    cav: &CavityParams,
    probe: &ProbeDetector,
) -> Result<SuperpositionReport> {
    cav.validate()?;
    let resonant_set = resonant_components(cav, nu.dim() - 1);
    if resonant_set.len() < 2 {
        return Err(Error::TooFewResonances {
            found: resonant_set.len(),
        });
    }
    let resonant_weight = resonant_set.iter().map(|&n| nu.get(n, n).re).sum();
    let res = filter_pass(nu, cav, probe)?;
    let purity = res.state_on.state().map(purity).unwrap_or(0.0);
    Ok(SuperpositionReport {
        resonant_set,
        resonant_weight,
        p_on: res.p_on,
        state_on: res.state_on,
        purity,
    })
}
