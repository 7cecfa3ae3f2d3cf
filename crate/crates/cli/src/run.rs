//! Experiment pipelines. Each returns named result tables.

use fock_filter::cascade::{estimate_photon_distribution, CascadeConfig};
use fock_filter::cavity::{transmission_profile, CavityParams};
use fock_filter::filter::{filter_pass, filter_pass_asymptotic, superposition_synthesis_check, Conditional};
use fock_filter::fock::{make_state, photon_distribution, purity, trace_distance, Cutoff, DensityMatrix};
use fock_filter::table::{parse_triples, Cell, Table};
use fock_filter::tomography::{reconstruct, simulate_scan, PhaseScan};
use fock_filter::Exec;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Default)]
pub struct Report {
    /// `(name, table)` in output order; names become file stems.
    pub tables: Vec<(String, Table)>,
    /// Set when results were produced but are numerically suspect.
    pub failure: Option<String>,
}

impl Report {
    fn push(&mut self, name: impl Into<String>, table: Table) {
        self.tables.push((name.into(), table));
    }
}

/// Runs a resolved config.
pub fn run(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, CliError> {
    match cfg.experiment {
        Experiment::Profile => profile(cfg),
        Experiment::Synthesize => synthesize(cfg),
        Experiment::Superposition => superposition(cfg),
        Experiment::MeasurePn => measure_pn(cfg, exec),
        Experiment::Tomography => tomography(cfg, exec),
    }
}

fn input_state(cfg: &ExperimentConfig) -> Result<DensityMatrix, CliError> {
    let spec = cfg.state.as_ref().expect("resolved");
    Ok(make_state(spec, cfg.cutoff.unwrap_or_default())?)
}

fn profile(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let cav = cfg.cavity.expect("resolved");
    let n_max = cfg.profile.as_ref().expect("resolved").n_max;
    let mut t = Table::new(&["n", "sigma2"]);
    for (n, p) in transmission_profile(&cav, n_max).into_iter().enumerate() {
        t.push(vec![n.into(), p.into()]);
    }
    let mut r = Report::default();
    r.push("profile", t);
    Ok(r)
}

fn argmax(p: &[f64]) -> usize {
    p.iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(n, _)| n)
}

fn synthesize(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let nu = input_state(cfg)?;
    let base = cfg.cavity.expect("resolved");
    let probe = cfg.probe.expect("resolved");
    let syn = cfg.synthesize.as_ref().expect("resolved");
    let p_in = nu.populations();

    let mut summary = Table::new(&[
        "tau", "p_on", "p_off", "argmax_on", "p_argmax_on", "dominance", "purity_on", "asym_p_on", "asym_trace_distance",
    ]);
    let mut dist = Table::new(&["tau", "n", "p_in", "p_on", "p_off"]);
    let mut report = Report::default();
    let mut states = Vec::new();

    for (k, &tau) in syn.taus.iter().enumerate() {
        let cav = CavityParams { tau, ..base };
        let r = filter_pass(&nu, &cav, &probe)?;
        let pops = |c: &Conditional| c.state().map_or_else(|| vec![0.0; nu.dim()], DensityMatrix::populations);
        let (on, off) = (pops(&r.state_on), pops(&r.state_off));
        let top = argmax(&on);
        let runner_up = on
            .iter()
            .enumerate()
            .filter(|&(n, _)| n != top)
            .map(|(_, &p)| p)
            .fold(0.0, f64::max);
        let dominance = if runner_up > 0.0 { on[top] / runner_up } else { f64::INFINITY };
        let purity_on = r.state_on.state().map_or(0.0, purity);
        let (asym_p, asym_td) = match syn.n_star {
            Some(n_star) => {
                let a = filter_pass_asymptotic(&nu, &cav, &probe, n_star)?;
                let td = match (r.state_on.state(), a.state_on.state()) {
                    (Some(x), Some(y)) => trace_distance(x, y),
                    _ => f64::NAN,
                };
                (a.p_on, td)
            }
            None => (f64::NAN, f64::NAN),
        };
        summary.push(vec![
            tau.into(),
            r.p_on.into(),
            r.p_off.into(),
            top.into(),
            on[top].into(),
            dominance.into(),
            purity_on.into(),
            asym_p.into(),
            asym_td.into(),
        ]);
        for n in 0..nu.dim() {
            dist.push(vec![tau.into(), n.into(), p_in[n].into(), on[n].into(), off[n].into()]);
        }
        if let Some(s) = r.state_on.state() {
            states.push((format!("state_on_{k}"), Table::density_matrix(s)));
        }
    }
    report.push("synthesis_summary", summary);
    report.push("synthesis_distribution", dist);
    report.tables.extend(states);
    Ok(report)
}

fn superposition(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let nu = input_state(cfg)?;
    let rep = superposition_synthesis_check(&nu, cfg.cavity.as_ref().expect("resolved"), cfg.probe.as_ref().expect("resolved"))?;
    let set: Vec<String> = rep.resonant_set.iter().map(usize::to_string).collect();
    let mut t = Table::new(&["resonant_set", "resonant_weight", "p_on", "purity_on"]);
    t.push(vec![set.join(";").into(), rep.resonant_weight.into(), rep.p_on.into(), rep.purity.into()]);
    let mut report = Report::default();
    report.push("superposition_summary", t);
    if let Some(s) = rep.state_on.state() {
        report.push("state_on", Table::density_matrix(s));
    }
    Ok(report)
}

fn measure_pn(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, CliError> {
    let spec = cfg.state.as_ref().expect("resolved");
    let c = cfg.cascade.as_ref().expect("resolved");
    let probe = cfg.probe.expect("resolved");
    let cascade = CascadeConfig::ladder(c.n_top, c.tau, c.chi_t, probe, c.samples, cfg.seed)?.with_rule(c.update_rule);
    let est = estimate_photon_distribution(spec, c.n_top, &cascade, exec)?;
    let truth = make_state(spec, Cutoff::default())?;
    let theory = photon_distribution(&truth).values;

    let mut summary = Table::new(&["samples", "seed", "all_off", "all_off_ci", "mean_stages"]);
    summary.push(vec![
        est.samples.into(),
        Cell::Text(cfg.seed.to_string()),
        est.all_off.into(),
        est.all_off_half_width.into(),
        est.mean_stages.into(),
    ]);
    let mut report = Report::default();
    report.push("distribution", Table::distribution(&est.distribution, &theory));
    report.push("cascade_summary", summary);
    Ok(report)
}

fn tomography(cfg: &ExperimentConfig, exec: Exec) -> Result<Report, CliError> {
    let t = cfg.tomography.as_ref().expect("resolved");
    let mut plan = cfg.plan_from(t);
    let mut report = Report::default();

    let (scan, truth) = match &t.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config("tomography.input", format!("cannot read {path}: {e}")))?;
            let scan = PhaseScan::from_triples(&parse_triples(&text)?)?;
            if scan.phases.len() != plan.phases.len() {
                return Err(CliError::config(
                    "tomography.phases",
                    format!("input has {} phases, config expects {}", scan.phases.len(), plan.phases.len()),
                ));
            }
            plan.phases = scan.phases.clone();
            plan.validate()?;
            (scan, None)
        }
        None => {
            let nu = input_state(cfg)?;
            let scan = simulate_scan(&nu, &plan, exec)?;
            let mut table = Table::new(&["phi", "n", "p"]);
            for (phi, n, p) in scan.triples() {
                table.push(vec![phi.into(), n.into(), p.into()]);
            }
            report.push("scan", table);
            (scan, Some(nu))
        }
    };

    let rec = reconstruct(&plan, &scan, exec)?;
    let nu_hat = if t.project_physical {
        rec.nu_hat.project_physical()?
    } else {
        rec.nu_hat.clone()
    };

    let mut residuals = Table::new(&["s", "residual_norm", "condition", "rank_deficient"]);
    for d in &rec.diagonals {
        residuals.push(vec![d.s.into(), d.residual_norm.into(), d.condition.into(), d.rank_deficient.into()]);
    }
    let mut cols = vec!["trace", "flagged", "trace_plausible"];
    if truth.is_some() {
        cols.push("trace_distance");
    }
    let mut summary = Table::new(&cols);
    let mut row: Vec<Cell> = vec![rec.trace.into(), rec.flagged().into(), rec.trace_plausible().into()];
    if let Some(nu) = &truth {
        row.push(trace_distance(&nu_hat, nu).into());
    }
    summary.push(row);

    report.push("nu_hat", Table::density_matrix(&nu_hat));
    report.push("residuals", residuals);
    report.push("tomography_summary", summary);
    if rec.flagged() {
        let bad: Vec<String> = rec
            .diagonals
            .iter()
            .filter(|d| d.rank_deficient)
            .map(|d| d.s.to_string())
            .collect();
        report.failure = Some(format!(
            "reconstruction is rank deficient for diagonal(s) s = {}; estimate is unreliable",
            bad.join(", ")
        ));
    }
    Ok(report)
}
