//! Cascaded filters tuned to `n₀, n₁, …` and Monte Carlo sampling of their
//! ON/OFF records.
//!
//! Every filter outcome multiplies the signal density matrix elementwise, so
//! the outcome probabilities depend on the diagonal alone. Trials therefore
//! propagate only the populations; [`conditional_state`] rebuilds the full
//! conditional matrix for a given record when it is needed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::filter::{Conditional, FilterChannel, ProbeDetector, IMPOSSIBLE_PROBABILITY};
use crate::fock::{choose_cutoff, make_state, Cutoff, DensityMatrix, PhotonDistribution, StateSpec, DEFAULT_TAIL_TOL};

/// Largest tolerated normalization drift of the running conditional state.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateRule {
    /// Exact ON/OFF conditioning of every pass.
    #[default]
    Exact,
    /// Ideal projections: ON → `|n_k⟩⟨n_k|`, OFF → populations without `n_k`.
    GoodCavity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrialMode {
    /// Stop at the first detector click.
    #[default]
    TerminateOnOn,
    /// Pass the signal through every stage and record all outcomes.
    RecordAll,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Stage {
    pub n: usize,
    pub cavity: CavityParams,
    pub probe: ProbeDetector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeConfig {
    pub stages: Vec<Stage>,
    pub samples: usize,
    pub seed: u64,
    #[serde(default)]
    pub update_rule: UpdateRule,
    #[serde(default)]
    pub mode: TrialMode,
}

impl CascadeConfig {
    /// Identical cavities tuned to `0, 1, …, n_top`.
    pub fn ladder(
        n_top: usize,
        tau: f64,
        chi_t: f64,
        probe: ProbeDetector,
        samples: usize,
        seed: u64,
    ) -> Result<Self> {
        let stages = (0..=n_top)
            .map(|n| {
                Ok(Stage {
                    n,
                    cavity: CavityParams::tuned(tau, chi_t, n)?,
                    probe,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let cfg = Self {
            stages,
            samples,
            seed,
            update_rule: UpdateRule::Exact,
            mode: TrialMode::TerminateOnOn,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_rule(mut self, rule: UpdateRule) -> Self {
        self.update_rule = rule;
        self
    }

    pub fn with_mode(mut self, mode: TrialMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::param("stages", "cascade needs at least one stage"));
        }
        for (k, st) in self.stages.iter().enumerate() {
            st.cavity.validate()?;
            st.probe.validate()?;
            let want = st.cavity.chi_t * st.n as f64;
            if (st.cavity.psi - want).abs() > 1e-12 {
                return Err(Error::param(
                    "stages",
                    format!(
                        "stage {k}: psi = {} is not chi_t * n = {want}",
                        st.cavity.psi
                    ),
                ));
            }
            if self.stages[..k].iter().any(|o| o.n == st.n) {
                return Err(Error::param("stages", format!("stage {k}: n = {} repeated", st.n)));
            }
        }
        Ok(())
    }

    pub fn max_tuned_number(&self) -> usize {
        self.stages.iter().map(|s| s.n).max().unwrap_or(0)
    }
}

/// ON/OFF outcomes of one trial, in stage order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementRecord {
    pub outcomes: Vec<bool>,
    /// Stage index of the first ON, if any.
    pub first_on: Option<usize>,
}

/// A cascade prepared for a signal dimension: per-stage `P(ON | n)`.
#[derive(Debug, Clone)]
pub struct Cascade {
    cfg: CascadeConfig,
    dim: usize,
    on_given_n: Vec<Vec<f64>>,
    off_given_n: Vec<Vec<f64>>,
}

impl Cascade {
    pub fn new(cfg: &CascadeConfig, dim: usize) -> Result<Self> {
        cfg.validate()?;
        let (on_given_n, off_given_n) = match cfg.update_rule {
            UpdateRule::Exact => cfg
                .stages
                .iter()
                .map(|st| {
                    let ch = FilterChannel::new(&st.cavity, &st.probe, dim)?;
                    Ok((ch.on_given_n(), ch.off_given_n()))
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .unzip(),
            UpdateRule::GoodCavity => cfg
                .stages
                .iter()
                .map(|st| {
                    let on: Vec<f64> = (0..dim).map(|n| if n == st.n { 1.0 } else { 0.0 }).collect();
                    let off = on.iter().map(|p| 1.0 - p).collect();
                    (on, off)
                })
                .unzip(),
        };
        Ok(Self {
            cfg: cfg.clone(),
            dim,
            on_given_n,
            off_given_n,
        })
    }

    pub fn config(&self) -> &CascadeConfig {
        &self.cfg
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Photon number the `stage`-th cavity is tuned to.
    pub fn tuned_number(&self, stage: usize) -> usize {
        self.cfg.stages[stage].n
    }

    fn check_dim(&self, nu: &DensityMatrix) -> Result<()> {
        if nu.dim() == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "cascade prepared for dimension {}, state has {}",
                self.dim,
                nu.dim()
            )))
        }
    }

    /// Joint probabilities `P(OFF₀ … OFF_{k−1}, ON_k)` per stage plus the
    /// all-OFF probability, chained exactly without sampling.
    pub fn first_on_distribution(&self, nu: &DensityMatrix) -> Result<(Vec<f64>, f64)> {
        self.check_dim(nu)?;
        let mut w = nu.populations();
        let mut out = Vec::with_capacity(self.cfg.stages.len());
        for (on, off) in self.on_given_n.iter().zip(&self.off_given_n) {
            let mut fired = 0.0;
            for ((wn, pn), qn) in w.iter_mut().zip(on).zip(off) {
                fired += *wn * pn;
                *wn *= qn;
            }
            out.push(fired);
        }
        Ok((out, w.iter().sum()))
    }
}

/// Deterministic per-trial random stream.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Mixes an index into a seed (splitmix64 finalizer), for independent
/// sub-experiments such as tomography phases.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Samples one pass of the signal through the cascade.
pub fn run_cascade_trial<R: Rng + ?Sized>(
    nu: &DensityMatrix,
    cascade: &Cascade,
    rng: &mut R,
) -> Result<MeasurementRecord> {
    cascade.check_dim(nu)?;
    let mut w: Vec<f64> = nu.populations().into_iter().map(|p| p.max(0.0)).collect();
    let total: f64 = w.iter().sum();
    // written so that NaN also fails
    let within = (total - 1.0).abs() <= TRACE_DRIFT_TOL;
    if !within {
        return Err(Error::TraceDrift {
            stage: 0,
            drift: total - 1.0,
        });
    }
    let stages = cascade.on_given_n.len();
    let mut outcomes = Vec::with_capacity(stages);
    let mut first_on = None;
    for (k, (on, off)) in cascade.on_given_n.iter().zip(&cascade.off_given_n).enumerate() {
        let p_on: f64 = w.iter().zip(on).map(|(a, b)| a * b).sum();
        let p_off: f64 = w.iter().zip(off).map(|(a, b)| a * b).sum();
        let fired = rng.random::<f64>() < p_on;
        outcomes.push(fired);
        let p_sel = if fired { p_on } else { p_off };
        if fired && first_on.is_none() {
            first_on = Some(k);
        }
        if fired && cascade.cfg.mode == TrialMode::TerminateOnOn {
            break;
        }
        if p_sel < IMPOSSIBLE_PROBABILITY {
            return Err(Error::TraceDrift {
                stage: k,
                drift: -1.0,
            });
        }
        let factors = if fired { on } else { off };
        for (wn, f) in w.iter_mut().zip(factors) {
            *wn *= f / p_sel;
        }
        let drift = w.iter().sum::<f64>() - 1.0;
        let within = drift.abs() <= TRACE_DRIFT_TOL;
        if !within {
            return Err(Error::TraceDrift { stage: k, drift });
        }
    }
    Ok(MeasurementRecord { outcomes, first_on })
}

/// Full conditional signal state after the outcomes in `record`.
pub fn conditional_state(
    nu: &DensityMatrix,
    cascade: &Cascade,
    record: &MeasurementRecord,
) -> Result<Conditional> {
    cascade.check_dim(nu)?;
    let mut state = nu.clone();
    for (k, &fired) in record.outcomes.iter().enumerate() {
        let st = &cascade.cfg.stages[k];
        let next = match cascade.cfg.update_rule {
            UpdateRule::Exact => {
                let r = FilterChannel::new(&st.cavity, &st.probe, cascade.dim)?.apply(&state)?;
                if fired {
                    r.state_on
                } else {
                    r.state_off
                }
            }
            UpdateRule::GoodCavity => good_cavity_update(&state, st.n, fired)?,
        };
        match next {
            Conditional::State(s) => state = s,
            Conditional::Impossible => return Ok(Conditional::Impossible),
        }
    }
    Ok(Conditional::State(state))
}

/// Ideal conditioning: ON → `|n_k⟩⟨n_k|`, OFF → `Σ_{p≠n_k} ν_pp/P₀ |p⟩⟨p|`.
fn good_cavity_update(nu: &DensityMatrix, n_k: usize, fired: bool) -> Result<Conditional> {
    let dim = nu.dim();
    let p_on = if n_k < dim { nu.get(n_k, n_k).re.max(0.0) } else { 0.0 };
    let p = if fired { p_on } else { 1.0 - p_on };
    if p < IMPOSSIBLE_PROBABILITY {
        return Ok(Conditional::Impossible);
    }
    if fired {
        return Ok(Conditional::State(DensityMatrix::number(n_k, dim)?));
    }
    let pops: Vec<f64> = nu
        .populations()
        .into_iter()
        .enumerate()
        .map(|(n, v)| if n == n_k { 0.0 } else { v.max(0.0) })
        .collect();
    Ok(Conditional::State(DensityMatrix::from_populations(&pops)?))
}

/// Histogram of first-ON stages with binomial 1σ half-widths.
#[derive(Debug, Clone, PartialEq)]
pub struct CascadeEstimate {
    /// `p̂_n` for the tuned numbers `0..=n_top`, with half-widths attached.
    pub distribution: PhotonDistribution,
    /// Fraction of trials in which no stage fired.
    pub all_off: f64,
    pub all_off_half_width: f64,
    pub samples: usize,
    /// Mean number of stages a trial passed through.
    pub mean_stages: f64,
}

/// `z·√(p(1−p)/samples)`, floored at `1/samples`.
pub fn binomial_half_width(p: f64, samples: usize, z: f64) -> f64 {
    let n = samples as f64;
    (z * (p * (1.0 - p) / n).max(0.0).sqrt()).max(1.0 / n)
}

fn check_ladder(cfg: &CascadeConfig) -> Result<usize> {
    for (k, st) in cfg.stages.iter().enumerate() {
        if st.n != k {
            return Err(Error::param(
                "stages",
                format!("distribution estimation needs stages tuned 0, 1, 2, ...; stage {k} is tuned to {}", st.n),
            ));
        }
    }
    Ok(cfg.stages.len() - 1)
}

/// Monte Carlo estimate of the photon distribution of `nu` from first-ON
/// statistics. Trial `i` draws from stream `i` of `cfg.seed`.
pub fn estimate_from_state(nu: &DensityMatrix, cfg: &CascadeConfig, exec: Exec) -> Result<CascadeEstimate> {
    if cfg.samples == 0 {
        return Err(Error::param("samples", "need at least one sample"));
    }
    let n_top = check_ladder(cfg)?;
    let cascade = Cascade::new(cfg, nu.dim())?;
    let records = exec.try_map(cfg.samples, |i| {
        let mut rng = trial_rng(cfg.seed, i as u64);
        run_cascade_trial(nu, &cascade, &mut rng)
    })?;
    let mut counts = vec![0usize; n_top + 1];
    let mut none = 0usize;
    let mut stages_used = 0usize;
    for r in &records {
        stages_used += r.outcomes.len();
        match r.first_on {
            Some(k) => counts[k] += 1,
            None => none += 1,
        }
    }
    let n = cfg.samples as f64;
    let values: Vec<f64> = counts.iter().map(|&c| c as f64 / n).collect();
    let half_widths = values
        .iter()
        .map(|&p| binomial_half_width(p, cfg.samples, 1.0))
        .collect();
    let all_off = none as f64 / n;
    Ok(CascadeEstimate {
        distribution: PhotonDistribution {
            values,
            half_widths: Some(half_widths),
        },
        all_off,
        all_off_half_width: binomial_half_width(all_off, cfg.samples, 1.0),
        samples: cfg.samples,
        mean_stages: stages_used as f64 / n,
    })
}

/// Builds the state for `spec` (tail below the default tolerance, and at
/// least `n_top + 1` levels) and estimates its distribution up to `n_top`.
pub fn estimate_photon_distribution(
    spec: &StateSpec,
    n_top: usize,
    cfg: &CascadeConfig,
    exec: Exec,
) -> Result<CascadeEstimate> {
    let top = check_ladder(cfg)?;
    if top != n_top {
        return Err(Error::param(
            "n_top",
            format!("stages cover 0..={top}, requested 0..={n_top}"),
        ));
    }
    let n_max = choose_cutoff(spec, DEFAULT_TAIL_TOL)?.max(n_top);
    let nu = make_state(spec, Cutoff::Truncate(n_max))?;
    estimate_from_state(&nu, cfg, exec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn fig3(n_top: usize, samples: usize, seed: u64) -> CascadeConfig {
        let probe = ProbeDetector::new(Complex64::new(20.0, 0.0), 0.4).unwrap();
        CascadeConfig::ladder(n_top, 0.001, 0.1, probe, samples, seed).unwrap()
    }

    #[test]
    fn config_validation() {
        let mut cfg = fig3(3, 10, 0);
        cfg.stages[2].cavity.psi += 1e-6;
        assert!(cfg.validate().is_err());
        let mut cfg = fig3(3, 10, 0);
        cfg.stages[3].n = 1;
        cfg.stages[3].cavity.psi = 0.1;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn number_state_fires_at_its_stage() {
        let cfg = fig3(3, 1, 0);
        let nu = DensityMatrix::number(3, 6).unwrap();
        let cascade = Cascade::new(&cfg, 6).unwrap();
        let (first_on, all_off) = cascade.first_on_distribution(&nu).unwrap();
        // stage k leaves |3⟩ dark with exp(−η|α|²|σ|²) at detuning 3 − k
        let pass = |d: f64| {
            let s = (0.5 * 0.1 * d).sin();
            (-160.0 / (1.0 + 4.0 * 0.999 / 1e-6 * s * s)).exp()
        };
        let reach3 = pass(3.0) * pass(2.0) * pass(1.0);
        assert!((first_on[3] - reach3 * (1.0 - (-160.0f64).exp())).abs() < 1e-14);
        assert!(first_on[3] > 0.97);
        assert!(all_off < 1e-60);
    }

    #[test]
    fn single_stage_off_peak_click_rate() {
        let probe = ProbeDetector::new(Complex64::new(20.0, 0.0), 0.4).unwrap();
        let cfg = CascadeConfig::ladder(0, 0.001, 0.1, probe, 1, 0).unwrap();
        let nu = DensityMatrix::number(1, 2).unwrap();
        let (fo, _) = Cascade::new(&cfg, 2).unwrap().first_on_distribution(&nu).unwrap();
        let ideal = 160.0 * 1e-6 / 0.01;
        assert!((fo[0] - ideal).abs() / ideal < 0.01, "{} vs {ideal}", fo[0]);
    }

    #[test]
    fn vacuum_fires_at_stage_zero() {
        let cfg = fig3(2, 1, 0);
        let nu = DensityMatrix::number(0, 3).unwrap();
        let (fo, _) = Cascade::new(&cfg, 3).unwrap().first_on_distribution(&nu).unwrap();
        assert!((fo[0] - (1.0 - (-160.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn terminate_mode_has_at_most_one_on() {
        let cfg = fig3(5, 200, 7);
        let nu = make_state(&StateSpec::Thermal { mean_n: 1.0 }, Cutoff::default()).unwrap();
        let cascade = Cascade::new(&cfg, nu.dim()).unwrap();
        for i in 0..200 {
            let r = run_cascade_trial(&nu, &cascade, &mut trial_rng(7, i)).unwrap();
            assert!(r.outcomes.iter().filter(|&&b| b).count() <= 1);
            if let Some(k) = r.first_on {
                assert_eq!(r.outcomes.len(), k + 1);
            }
        }
    }

    #[test]
    fn record_all_mode_and_conditional_state() {
        let cfg = fig3(4, 1, 3).with_mode(TrialMode::RecordAll);
        let nu = make_state(&StateSpec::Coherent { re: 1.2, im: 0.0 }, Cutoff::default()).unwrap();
        let cascade = Cascade::new(&cfg, nu.dim()).unwrap();
        let r = run_cascade_trial(&nu, &cascade, &mut trial_rng(3, 0)).unwrap();
        assert_eq!(r.outcomes.len(), 5);
        let st = conditional_state(&nu, &cascade, &r).unwrap();
        let st = st.state().unwrap();
        st.validate().unwrap();
    }

    #[test]
    fn good_cavity_off_removes_tuned_population() {
        let nu = make_state(&StateSpec::Thermal { mean_n: 1.0 }, Cutoff::default()).unwrap();
        let off = good_cavity_update(&nu, 0, false).unwrap();
        let off = off.state().unwrap();
        assert_eq!(off.get(0, 0).re, 0.0);
        assert!((off.get(1, 1).re - 0.5).abs() < 1e-9);
        let on = good_cavity_update(&DensityMatrix::number(2, 4).unwrap(), 2, false).unwrap();
        assert!(on.is_impossible());
    }

    #[test]
    fn zero_samples_rejected() {
        let cfg = fig3(2, 0, 0);
        let nu = DensityMatrix::number(0, 3).unwrap();
        assert!(estimate_from_state(&nu, &cfg, Exec::Sequential).is_err());
    }

    #[test]
    fn estimator_number_state() {
        // τ = 1e-4 keeps the stage-0/1 false clicks of |2⟩ near 2e-4
        let probe = ProbeDetector::new(Complex64::new(20.0, 0.0), 0.4).unwrap();
        let cfg = CascadeConfig::ladder(4, 1e-4, 0.1, probe, 500, 11).unwrap();
        let est = estimate_photon_distribution(&StateSpec::Number { n: 2 }, 4, &cfg, Exec::Parallel).unwrap();
        assert!(est.distribution.values[2] >= 0.99);
        // at τ = 1e-3 the analytic first-ON mass is 1 − (c + c/4) ≈ 0.98
        let nu = DensityMatrix::number(2, 5).unwrap();
        let (fo, _) = Cascade::new(&fig3(4, 1, 0), 5).unwrap().first_on_distribution(&nu).unwrap();
        assert!((fo[2] - (1.0 - 0.016 * 1.25)).abs() < 1e-3, "{}", fo[2]);
    }

    #[test]
    fn half_width_floor() {
        assert_eq!(binomial_half_width(0.0, 2000, 1.0), 1.0 / 2000.0);
        assert!((binomial_half_width(0.5, 100, 1.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }
}
