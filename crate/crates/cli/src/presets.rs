//! Named parameter sets for the standard experiments.

use std::f64::consts::PI;

use fock_filter::cascade::UpdateRule;
use fock_filter::cavity::CavityParams;
use fock_filter::filter::ProbeDetector;
use fock_filter::fock::{Cutoff, StateSpec, DEFAULT_TAIL_TOL};

use crate::config::{
    BackendKind, CascadeSection, Experiment, ExperimentConfig, ProfileSection, SynthesizeSection, TomographySection,
};

pub const NAMES: [&str; 8] = [
    "profile",
    "fig2",
    "superposition",
    "fig3-squeezed",
    "fig3-coherent",
    "fig3-thermal",
    "tomo-coherent",
    "tomo-coherent-mc",
];

/// Preset used when neither `--preset` nor `--config` is given.
pub fn default_for(exp: Experiment) -> &'static str {
    match exp {
        Experiment::Profile => "profile",
        Experiment::Synthesize => "fig2",
        Experiment::Superposition => "superposition",
        Experiment::MeasurePn => "fig3-coherent",
        Experiment::Tomography => "tomo-coherent",
    }
}

fn blank(experiment: Experiment, name: &str) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        preset: Some(name.to_string()),
        artifact_version: None,
        seed: 0,
        state: None,
        cutoff: None,
        cavity: None,
        probe: None,
        profile: None,
        synthesize: None,
        cascade: None,
        tomography: None,
    }
}

fn fig2_cavity() -> CavityParams {
    CavityParams {
        tau: 0.0002,
        psi: 0.04,
        chi_t: 0.01,
    }
}

fn probe(eta: f64) -> ProbeDetector {
    ProbeDetector {
        alpha_re: 20.0,
        alpha_im: 0.0,
        eta,
    }
}

fn fig3(name: &str, state: StateSpec) -> ExperimentConfig {
    ExperimentConfig {
        state: Some(state),
        // same probe amplitude as the fig2 preset
        probe: Some(probe(0.4)),
        cascade: Some(CascadeSection {
            n_top: 8,
            tau: 0.001,
            chi_t: 0.1,
            samples: 2000,
            update_rule: UpdateRule::Exact,
        }),
        ..blank(Experiment::MeasurePn, name)
    }
}

fn tomo(name: &str, backend: BackendKind) -> ExperimentConfig {
    let mc = backend == BackendKind::MonteCarlo;
    ExperimentConfig {
        state: Some(StateSpec::Coherent { re: 1.0, im: 0.0 }),
        cutoff: Some(Cutoff::Truncate(5)),
        probe: Some(probe(0.4)),
        tomography: Some(TomographySection {
            m_max: 5,
            gamma_abs: Some(1.0),
            phases: Some(16),
            n_rows: Some(12),
            backend,
            samples_per_phase: mc.then_some(10_000),
            tau: mc.then_some(0.001),
            chi_t: mc.then_some(0.1),
            input: None,
            project_physical: false,
        }),
        ..blank(Experiment::Tomography, name)
    }
}

pub fn lookup(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "profile" => ExperimentConfig {
            cavity: Some(fig2_cavity()),
            profile: Some(ProfileSection { n_max: 30 }),
            ..blank(Experiment::Profile, name)
        },
        "fig2" => ExperimentConfig {
            state: Some(StateSpec::Coherent { re: 2.0, im: 0.0 }),
            cutoff: Some(Cutoff::Fixed {
                n_max: 30,
                tail_tol: DEFAULT_TAIL_TOL,
            }),
            cavity: Some(fig2_cavity()),
            probe: Some(probe(0.8)),
            synthesize: Some(SynthesizeSection {
                taus: vec![0.02, 0.002, 0.0002],
                n_star: Some(4),
            }),
            ..blank(Experiment::Synthesize, name)
        },
        "superposition" => ExperimentConfig {
            state: Some(StateSpec::Coherent {
                re: 3f64.sqrt(),
                im: 0.0,
            }),
            cavity: Some(CavityParams {
                tau: 1e-4,
                psi: PI / 2.0,
                chi_t: PI / 2.0,
            }),
            probe: Some(probe(0.8)),
            ..blank(Experiment::Superposition, name)
        },
        "fig3-squeezed" => fig3(name, StateSpec::SqueezedVacuum { mean_n: 1.0 }),
        "fig3-coherent" => fig3(
            name,
            StateSpec::Coherent {
                re: 2f64.sqrt(),
                im: 0.0,
            },
        ),
        "fig3-thermal" => fig3(name, StateSpec::Thermal { mean_n: 1.0 }),
        "tomo-coherent" => tomo(name, BackendKind::Exact),
        "tomo-coherent-mc" => tomo(name, BackendKind::MonteCarlo),
        _ => return None,
    };
    Some(cfg)
}
