use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::special::ln_factorials;
use crate::error::{Error, Result};

/// Default truncation tolerance on the discarded photon-number tail.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;
/// Largest cutoff [`choose_cutoff`] will return.
pub const CUTOFF_CEILING: usize = 4096;

/// Analytic single-mode input states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    Number {
        n: usize,
    },
    /// Coherent state `|β⟩`, `β = re + i·im`.
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    Thermal {
        mean_n: f64,
    },
    /// Squeezed vacuum with `sinh² r = mean_n`.
    SqueezedVacuum {
        mean_n: f64,
    },
}

/// How the Fock space is truncated when building a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cutoff {
    /// Smallest `N` whose discarded tail is below the tolerance.
    Tail(f64),
    /// Explicit `N`; fails if the discarded tail exceeds `tail_tol`.
    Fixed { n_max: usize, tail_tol: f64 },
    /// Explicit `N`, tail discarded and the state renormalized without a check.
    Truncate(usize),
}

impl Default for Cutoff {
    fn default() -> Self {
        Cutoff::Tail(DEFAULT_TAIL_TOL)
    }
}

impl Cutoff {
    /// Explicit `N` checked against [`DEFAULT_TAIL_TOL`].
    pub fn fixed(n_max: usize) -> Self {
        Cutoff::Fixed {
            n_max,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

impl StateSpec {
    pub fn coherent(beta: Complex64) -> Self {
        StateSpec::Coherent {
            re: beta.re,
            im: beta.im,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Number { .. } => Ok(()),
            StateSpec::Coherent { re, im } => {
                if re.is_finite() && im.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("beta", "amplitude must be finite"))
                }
            }
            StateSpec::Thermal { mean_n } | StateSpec::SqueezedVacuum { mean_n } => {
                if mean_n.is_finite() && mean_n >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param(
                        "mean_n",
                        format!("mean photon number must be finite and >= 0, got {mean_n}"),
                    ))
                }
            }
        }
    }

    pub fn mean_photons(&self) -> f64 {
        match *self {
            StateSpec::Number { n } => n as f64,
            StateSpec::Coherent { re, im } => re * re + im * im,
            StateSpec::Thermal { mean_n } | StateSpec::SqueezedVacuum { mean_n } => mean_n,
        }
    }

    fn is_pure(&self) -> bool {
        !matches!(self, StateSpec::Thermal { .. })
    }

    /// Photon number beyond which `p_n` is non-increasing.
    fn mode_bound(&self) -> usize {
        match *self {
            StateSpec::Number { n } => n,
            StateSpec::Coherent { re, im } => (re * re + im * im).ceil() as usize,
            _ => 0,
        }
    }

    /// `ln |c_n|` and the phase of the amplitude `⟨n|ψ⟩` (pure kinds), or
    /// `ln p_n` with unit phase for thermal states. `lf` must cover `n`.
    fn log_term(&self, n: usize, lf: &[f64]) -> (f64, Complex64) {
        let one = Complex64::new(1.0, 0.0);
        match *self {
            StateSpec::Number { n: k } => {
                if n == k {
                    (0.0, one)
                } else {
                    (f64::NEG_INFINITY, one)
                }
            }
            StateSpec::Coherent { re, im } => {
                let beta = Complex64::new(re, im);
                let x = beta.norm_sqr();
                if x == 0.0 {
                    return if n == 0 { (0.0, one) } else { (f64::NEG_INFINITY, one) };
                }
                let ln = -0.5 * x + n as f64 * beta.norm().ln() - 0.5 * lf[n];
                (ln, Complex64::from_polar(1.0, n as f64 * beta.arg()))
            }
            StateSpec::Thermal { mean_n } => {
                if mean_n == 0.0 {
                    return if n == 0 { (0.0, one) } else { (f64::NEG_INFINITY, one) };
                }
                let ln = n as f64 * (mean_n / (1.0 + mean_n)).ln() - (1.0 + mean_n).ln();
                (ln, one)
            }
            StateSpec::SqueezedVacuum { mean_n } => {
                if n % 2 == 1 {
                    return (f64::NEG_INFINITY, one);
                }
                if mean_n == 0.0 {
                    return if n == 0 { (0.0, one) } else { (f64::NEG_INFINITY, one) };
                }
                let r = mean_n.sqrt().asinh();
                let k = n / 2;
                let ln = 0.5 * lf[n] - k as f64 * 2f64.ln() - lf[k] + k as f64 * r.tanh().ln()
                    - 0.5 * r.cosh().ln();
                let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
                (ln, Complex64::new(sign, 0.0))
            }
        }
    }

    fn log_probability(&self, n: usize, lf: &[f64]) -> f64 {
        let (ln, _) = self.log_term(n, lf);
        if self.is_pure() {
            2.0 * ln
        } else {
            ln
        }
    }

    /// Analytic photon-number distribution `p_0 … p_{n_max}` (untruncated values).
    pub fn distribution(&self, n_max: usize) -> Vec<f64> {
        let lf = ln_factorials(n_max);
        (0..=n_max).map(|n| self.log_probability(n, &lf).exp()).collect()
    }
}

const TAIL_SUM_LIMIT: usize = 10_000_000;

/// Photon-number mass above `n_max`, summed from the analytic distribution.
pub fn tail_mass(spec: &StateSpec, n_max: usize) -> f64 {
    if let StateSpec::Number { n } = *spec {
        return if n > n_max { 1.0 } else { 0.0 };
    }
    let mode = spec.mode_bound();
    let step = if matches!(spec, StateSpec::SqueezedVacuum { .. }) { 2 } else { 1 };
    let mut n = n_max + 1;
    if step == 2 && n % 2 == 1 {
        n += 1;
    }
    let ln_fact_direct = |k: usize| -> f64 { (2..=k).map(|i| (i as f64).ln()).sum() };
    // running ln n! and ln (n/2)!
    let mut ln_n_fact = ln_fact_direct(n);
    let mut ln_k_fact = ln_fact_direct(n / 2);
    let mut acc = 0.0;
    while n < n_max + TAIL_SUM_LIMIT {
        let p = match *spec {
            StateSpec::Coherent { re, im } => {
                let x = re * re + im * im;
                (-x + n as f64 * x.ln() - ln_n_fact).exp()
            }
            StateSpec::Thermal { mean_n } => {
                (n as f64 * (mean_n / (1.0 + mean_n)).ln() - (1.0 + mean_n).ln()).exp()
            }
            StateSpec::SqueezedVacuum { mean_n } => {
                let r = mean_n.sqrt().asinh();
                let k = n / 2;
                (ln_n_fact - 2.0 * k as f64 * 2f64.ln() - 2.0 * ln_k_fact
                    + 2.0 * k as f64 * r.tanh().ln()
                    - r.cosh().ln())
                .exp()
            }
            StateSpec::Number { .. } => unreachable!(),
        };
        if !p.is_finite() || (p == 0.0 && n > mode) {
            break;
        }
        acc += p;
        if n > mode && p <= 1e-18 * acc {
            break;
        }
        for _ in 0..step {
            n += 1;
            ln_n_fact += (n as f64).ln();
        }
        if step == 2 {
            ln_k_fact += ((n / 2) as f64).ln();
        }
    }
    acc
}

/// Smallest `N` such that the analytic tail `Σ_{n>N} p_n` is below `eps`.
pub fn choose_cutoff(spec: &StateSpec, eps: f64) -> Result<usize> {
    spec.validate()?;
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::param("tail_tol", format!("must lie in (0, 0.1), got {eps}")));
    }
    if let StateSpec::Number { n } = *spec {
        if n > CUTOFF_CEILING {
            return Err(Error::CutoffNotConverged {
                tol: eps,
                ceiling: CUTOFF_CEILING,
            });
        }
        return Ok(n);
    }
    let probs = spec.distribution(CUTOFF_CEILING);
    let mut tail = tail_mass(spec, CUTOFF_CEILING);
    if tail >= eps {
        return Err(Error::CutoffNotConverged {
            tol: eps,
            ceiling: CUTOFF_CEILING,
        });
    }
    // walk down while the tail beyond N−1 still satisfies the bound
    let mut n = CUTOFF_CEILING;
    while n > 0 {
        let next_tail = tail + probs[n];
        if next_tail >= eps {
            break;
        }
        tail = next_tail;
        n -= 1;
    }
    Ok(n)
}

/// Builds the density matrix of `spec` on `|0⟩ … |N⟩`, with `N` resolved from
/// `cutoff`. The truncated state is renormalized to unit trace.
pub fn make_state(spec: &StateSpec, cutoff: Cutoff) -> Result<DensityMatrix> {
    spec.validate()?;
    let n_max = match cutoff {
        Cutoff::Tail(eps) => choose_cutoff(spec, eps)?,
        Cutoff::Fixed { n_max, tail_tol } => {
            let tail = tail_mass(spec, n_max);
            if tail >= tail_tol {
                return Err(Error::CutoffTooSmall {
                    given: n_max,
                    required: choose_cutoff(spec, tail_tol)?,
                    tail,
                    tol: tail_tol,
                });
            }
            n_max
        }
        Cutoff::Truncate(n_max) => n_max,
    };
    if let StateSpec::Number { n } = *spec {
        if n > n_max {
            return Err(Error::CutoffTooSmall {
                given: n_max,
                required: n,
                tail: 1.0,
                tol: DEFAULT_TAIL_TOL,
            });
        }
    }
    let lf = ln_factorials(n_max);
    if spec.is_pure() {
        let amps: Vec<Complex64> = (0..=n_max)
            .map(|n| {
                let (ln, phase) = spec.log_term(n, &lf);
                phase * ln.exp()
            })
            .collect();
        DensityMatrix::from_pure(&amps)
    } else {
        DensityMatrix::from_populations(&spec.distribution(n_max))
    }
}
