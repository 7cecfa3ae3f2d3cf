//! Experiment configuration (TOML) and its validation.
//!
//! A config names one experiment and carries the parameter blocks it needs.
//! [`ExperimentConfig::resolve`] fills every default and range-checks every
//! field, so the resolved config doubles as the run manifest.

use std::path::Path;

use clap::ValueEnum;
use fock_filter::cascade::UpdateRule;
use fock_filter::cavity::CavityParams;
use fock_filter::filter::ProbeDetector;
use fock_filter::fock::{Cutoff, StateSpec};
use fock_filter::tomography::{uniform_phases, Backend, MonteCarloDetector, TomographyPlan};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::presets;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Profile,
    Synthesize,
    Superposition,
    #[value(name = "measure-pn")]
    MeasurePn,
    Tomography,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Profile => "profile",
            Experiment::Synthesize => "synthesize",
            Experiment::Superposition => "superposition",
            Experiment::MeasurePn => "measure-pn",
            Experiment::Tomography => "tomography",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSection {
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeSection {
    /// Transmissivities to sweep; empty means the cavity's own τ.
    #[serde(default)]
    pub taus: Vec<f64>,
    /// Target photon number for the good-cavity comparison columns.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_star: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub n_top: usize,
    pub tau: f64,
    pub chi_t: f64,
    pub samples: usize,
    #[serde(default)]
    pub update_rule: UpdateRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographySection {
    pub m_max: usize,
    /// Defaults to `√(⟨n⟩ + 1)` of the configured state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_abs: Option<f64>,
    /// Number of uniform phases; defaults to `2M + 6`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<usize>,
    /// Defaults to `2(M + 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_rows: Option<usize>,
    #[serde(default)]
    pub backend: BackendKind,
    /// Detector cascade used by the Monte Carlo backend.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples_per_phase: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_t: Option<f64>,
    /// `phi,n,p` table to reconstruct from instead of simulating the state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    /// Clip negative eigenvalues of the estimate and renormalize.
    #[serde(default)]
    pub project_physical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Preset this config was derived from, if any. Informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    /// Version of the tool that wrote the manifest. Informational.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub artifact_version: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub state: Option<StateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Cutoff>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cavity: Option<CavityParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeDetector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<ProfileSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesize: Option<SynthesizeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cascade: Option<CascadeSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tomography: Option<TomographySection>,
}

fn need<'a, T>(field: &'a Option<T>, name: &str, exp: Experiment) -> Result<&'a T, CliError> {
    field
        .as_ref()
        .ok_or_else(|| CliError::config(name, format!("required by experiment `{}`", exp.name())))
}

fn check(name: &str, r: fock_filter::Result<()>) -> Result<(), CliError> {
    r.map_err(|e| CliError::config(name, e.to_string()))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", e.message().trim().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Fills defaults and range-checks every field the experiment uses.
    /// Sections the experiment does not use are dropped.
    pub fn resolve(mut self) -> Result<Self, CliError> {
        if let Some(name) = &self.preset {
            if presets::lookup(name).is_none() {
                return Err(CliError::config("preset", format!("unknown preset `{name}`")));
            }
        }
        self.artifact_version = Some(env!("CARGO_PKG_VERSION").to_string());
        let exp = self.experiment;
        if let Some(state) = &self.state {
            check("state", state.validate())?;
        }
        if let Some(cav) = &self.cavity {
            check("cavity", cav.validate())?;
        }
        if let Some(probe) = &self.probe {
            check("probe", probe.validate())?;
        }
        if let Some(cutoff) = self.cutoff {
            check_cutoff(cutoff)?;
        }
        match exp {
            Experiment::Profile => {
                need(&self.cavity, "cavity", exp)?;
                need(&self.profile, "profile", exp)?;
                self.keep(&["cavity", "profile"]);
            }
            Experiment::Synthesize => {
                need(&self.state, "state", exp)?;
                let cav = *need(&self.cavity, "cavity", exp)?;
                need(&self.probe, "probe", exp)?;
                let syn = self.synthesize.get_or_insert(SynthesizeSection {
                    taus: Vec::new(),
                    n_star: None,
                });
                if syn.taus.is_empty() {
                    syn.taus.push(cav.tau);
                }
                for &tau in &syn.taus {
                    check("synthesize.taus", CavityParams::new(tau, cav.psi, cav.chi_t).map(|_| ()))?;
                }
                self.cutoff.get_or_insert_with(Cutoff::default);
                self.keep(&["state", "cutoff", "cavity", "probe", "synthesize"]);
            }
            Experiment::Superposition => {
                need(&self.state, "state", exp)?;
                need(&self.cavity, "cavity", exp)?;
                need(&self.probe, "probe", exp)?;
                self.cutoff.get_or_insert_with(Cutoff::default);
                self.keep(&["state", "cutoff", "cavity", "probe"]);
            }
            Experiment::MeasurePn => {
                need(&self.state, "state", exp)?;
                let probe = *need(&self.probe, "probe", exp)?;
                let c = need(&self.cascade, "cascade", exp)?;
                if c.samples == 0 {
                    return Err(CliError::config("cascade.samples", "need at least one sample"));
                }
                let ladder = fock_filter::cascade::CascadeConfig::ladder(c.n_top, c.tau, c.chi_t, probe, c.samples, self.seed);
                check("cascade", ladder.map(|_| ()))?;
                self.keep(&["state", "probe", "cascade"]);
            }
            Experiment::Tomography => {
                let t = need(&self.tomography, "tomography", exp)?.clone();
                if t.input.is_none() {
                    need(&self.state, "state", exp)?;
                    self.cutoff.get_or_insert_with(Cutoff::default);
                }
                let t = self.resolve_tomography(t)?;
                let plan = self.plan_from(&t);
                check("tomography", plan.validate())?;
                self.tomography = Some(t);
                self.keep(&["state", "cutoff", "probe", "tomography"]);
            }
        }
        Ok(self)
    }

    fn resolve_tomography(&self, mut t: TomographySection) -> Result<TomographySection, CliError> {
        let m = t.m_max;
        if t.gamma_abs.is_none() {
            let mean = self.state.as_ref().map_or(0.0, StateSpec::mean_photons);
            t.gamma_abs = Some((mean + 1.0).sqrt());
        }
        t.phases.get_or_insert(2 * m + 6);
        t.n_rows.get_or_insert(2 * (m + 1));
        match t.backend {
            BackendKind::Exact => {
                t.samples_per_phase = None;
                t.tau = None;
                t.chi_t = None;
            }
            BackendKind::MonteCarlo => {
                if t.input.is_some() {
                    return Err(CliError::config(
                        "tomography.backend",
                        "a measured input table cannot be combined with the monte_carlo backend",
                    ));
                }
                need(&self.probe, "probe", Experiment::Tomography)?;
                let fields = [
                    ("tomography.samples_per_phase", t.samples_per_phase.is_some()),
                    ("tomography.tau", t.tau.is_some()),
                    ("tomography.chi_t", t.chi_t.is_some()),
                ];
                if let Some((name, _)) = fields.iter().find(|(_, set)| !set) {
                    return Err(CliError::config(name, "required by the monte_carlo backend"));
                }
            }
        }
        Ok(t)
    }

    /// Reconstruction plan for a resolved tomography section.
    pub fn plan_from(&self, t: &TomographySection) -> TomographyPlan {
        let backend = match t.backend {
            BackendKind::Exact => Backend::ExactProbabilities,
            BackendKind::MonteCarlo => Backend::MonteCarlo(MonteCarloDetector {
                samples_per_phase: t.samples_per_phase.unwrap_or(0),
                tau: t.tau.unwrap_or(f64::NAN),
                chi_t: t.chi_t.unwrap_or(f64::NAN),
                probe: self.probe.expect("checked during resolve"),
                seed: self.seed,
            }),
        };
        TomographyPlan {
            gamma_abs: t.gamma_abs.unwrap_or(f64::NAN),
            phases: uniform_phases(t.phases.unwrap_or(0)),
            m_max: t.m_max,
            n_rows: t.n_rows.unwrap_or(0),
            backend,
        }
    }

    fn keep(&mut self, used: &[&str]) {
        let keep = |name: &str| used.contains(&name);
        if !keep("state") {
            self.state = None;
        }
        if !keep("cutoff") {
            self.cutoff = None;
        }
        if !keep("cavity") {
            self.cavity = None;
        }
        if !keep("probe") {
            self.probe = None;
        }
        if !keep("profile") {
            self.profile = None;
        }
        if !keep("synthesize") {
            self.synthesize = None;
        }
        if !keep("cascade") {
            self.cascade = None;
        }
        if !keep("tomography") {
            self.tomography = None;
        }
    }
}

fn check_cutoff(cutoff: Cutoff) -> Result<(), CliError> {
    let tol_ok = |t: f64| t.is_finite() && t > 0.0 && t < 1.0;
    match cutoff {
        Cutoff::Tail(t) | Cutoff::Fixed { tail_tol: t, .. } if !tol_ok(t) => Err(CliError::config(
            "cutoff",
            format!("tail tolerance must lie in (0, 1), got {t}"),
        )),
        _ => Ok(()),
    }
}
