//! Ring-cavity transfer amplitudes and the photon-number-dependent
//! resonance profile.
//!
//! A signal with `n` photons shifts the cavity round-trip phase to
//! `φ_n = ψ − χt·n`. The cavity then reflects the probe with amplitude
//! `κ(φ)` and transmits it to the monitored port with amplitude `σ(φ)`:
//!
//! ```text
//! κ(φ) = √(1−τ) (e^{iφ} − 1) / (1 − (1−τ) e^{iφ})
//! σ(φ) = τ / (1 − (1−τ) e^{iφ})
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavityParams {
    /// Beam-splitter transmissivity, strictly inside (0, 1).
    pub tau: f64,
    /// Tunable phase shift (rad).
    pub psi: f64,
    /// Kerr phase per signal photon (rad).
    pub chi_t: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::param("tau", format!("must lie in (0, 1), got {tau}")))
    }
}

impl CavityParams {
    pub fn new(tau: f64, psi: f64, chi_t: f64) -> Result<Self> {
        let p = Self { tau, psi, chi_t };
        p.validate()?;
        Ok(p)
    }

    /// Cavity tuned so that `n_star` photons bring it to resonance (`ψ = χt·n*`).
    pub fn tuned(tau: f64, chi_t: f64, n_star: usize) -> Result<Self> {
        Self::new(tau, chi_t * n_star as f64, chi_t)
    }

    pub fn validate(&self) -> Result<()> {
        check_tau(self.tau)?;
        if !self.psi.is_finite() {
            return Err(Error::param("psi", "must be finite"));
        }
        if !(self.chi_t.is_finite() && self.chi_t > 0.0) {
            return Err(Error::param(
                "chi_t",
                format!("must be finite and > 0, got {}", self.chi_t),
            ));
        }
        Ok(())
    }

    /// `ψ/χt`, the (possibly non-integer) photon number at resonance.
    pub fn resonant_number(&self) -> f64 {
        self.psi / self.chi_t
    }

    /// Photon-number spacing between neighbouring resonances, `2π/χt`.
    pub fn resonance_period(&self) -> f64 {
        2.0 * PI / self.chi_t
    }

    /// `(κ_n, σ_n)` for a signal with `n` photons.
    pub fn amplitudes(&self, n: usize) -> (Complex64, Complex64) {
        amplitudes_unchecked(total_phase(n, self), self.tau)
    }
}

fn amplitudes_unchecked(phi: f64, tau: f64) -> (Complex64, Complex64) {
    let u = Complex64::from_polar(1.0, phi);
    let denom = 1.0 - (1.0 - tau) * u;
    // e^{iφ} − 1 = 2i sin(φ/2) e^{iφ/2}, exact zero at resonance
    let num = Complex64::new(0.0, 2.0 * (0.5 * phi).sin()) * Complex64::from_polar(1.0, 0.5 * phi);
    let kappa = (1.0 - tau).sqrt() * num / denom;
    let sigma = tau / denom;
    (kappa, sigma)
}

/// Reflection and transmission amplitudes `(κ(φ), σ(φ))`.
pub fn cavity_amplitudes(phi: f64, tau: f64) -> Result<(Complex64, Complex64)> {
    check_tau(tau)?;
    Ok(amplitudes_unchecked(phi, tau))
}

/// Round-trip phase `φ_n = ψ − χt·n`.
pub fn total_phase(n: usize, params: &CavityParams) -> f64 {
    params.psi - params.chi_t * n as f64
}

/// `|σ_n|² = [1 + 4(1−τ)/τ² · sin²(φ_n/2)]^{−1}` for `n = 0..=n_max`.
pub fn transmission_profile(params: &CavityParams, n_max: usize) -> Vec<f64> {
    let finesse = 4.0 * (1.0 - params.tau) / (params.tau * params.tau);
    (0..=n_max)
        .map(|n| {
            let s = (0.5 * total_phase(n, params)).sin();
            1.0 / (1.0 + finesse * s * s)
        })
        .collect()
}

/// All `n ≤ n_max` lying within 1/2 of a resonance `n* + j·2π/χt`, `j ∈ ℤ`.
pub fn resonant_components(params: &CavityParams, n_max: usize) -> Vec<usize> {
    let n_star = params.resonant_number();
    let period = params.resonance_period();
    (0..=n_max)
        .filter(|&n| {
            let offset = (n as f64 - n_star).rem_euclid(period);
            offset.min(period - offset) < 0.5
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resonance_is_fully_transmitting() {
        let (k, s) = cavity_amplitudes(0.0, 0.1).unwrap();
        assert_eq!(k, Complex64::new(0.0, 0.0));
        assert!((s - 1.0).norm() < 1e-15);
    }

    #[test]
    fn antiresonance_values() {
        // σ = τ/(1 + (1−τ)) at φ = π
        let (k, s) = cavity_amplitudes(PI, 0.1).unwrap();
        assert!((s.re - 0.1 / 1.9).abs() < 1e-15 && s.im.abs() < 1e-15);
        assert!((k.norm() - (1.0 - (0.1f64 / 1.9).powi(2)).sqrt()).abs() < 1e-15);
        assert!((k.norm() - 0.998_614).abs() < 1e-6);
    }

    #[test]
    fn rejects_bad_tau() {
        assert!(cavity_amplitudes(0.0, 0.0).is_err());
        assert!(cavity_amplitudes(0.0, 1.0).is_err());
        assert!(CavityParams::new(0.1, 0.0, 0.0).is_err());
        assert!(CavityParams::new(-0.1, 0.0, 0.1).is_err());
    }

    #[test]
    fn phase_examples() {
        let p = CavityParams::new(0.0002, 0.04, 0.01).unwrap();
        assert_eq!(total_phase(4, &p), 0.0);
        assert!((total_phase(5, &p) + 0.01).abs() < 1e-15);
    }

    #[test]
    fn profile_off_peak_values() {
        let p = CavityParams::new(0.0002, 0.04, 0.01).unwrap();
        let prof = transmission_profile(&p, 30);
        assert_eq!(prof.len(), 31);
        assert_eq!(prof[4], 1.0);
        // direct evaluation: 1/(1 + 4·0.9998/4e-8 · sin²(0.005))
        let want = 1.0 / (1.0 + 4.0 * 0.9998 / 4e-8 * 0.005f64.sin().powi(2));
        assert!((prof[3] - want).abs() < 1e-16 && (prof[5] - want).abs() < 1e-16);
        assert!((prof[3] - 3.999e-4).abs() < 1e-6);
    }

    #[test]
    fn resonance_sets() {
        let fig2 = CavityParams::new(0.0002, 0.04, 0.01).unwrap();
        assert_eq!(resonant_components(&fig2, 30), vec![4]);
        let wide = CavityParams::new(1e-4, PI / 2.0, PI / 2.0).unwrap();
        assert_eq!(resonant_components(&wide, 10), vec![1, 5, 9]);
        let zero = CavityParams::new(0.01, 0.0, 0.3).unwrap();
        assert_eq!(resonant_components(&zero, 0), vec![0]);
        // n* = 2.5 sits exactly between two integers
        let detuned = CavityParams::new(0.01, 1.25, 0.5).unwrap();
        assert!(resonant_components(&detuned, 10).is_empty());
    }
}
