//! The experiment subcommands. Each returns a [`Report`] and, where it
//! makes sense, the columns a gnuplot script should draw.

use std::time::Instant;

use modeport::continuum::{check_family_convergence, check_superposition_convergence, fidelity_continuum, ContinuumProfile, ConvergenceReport};
use modeport::fock::{sample_haar_seeded, PureTwoModeState, C64};
use modeport::noise::{
    dephasing_threshold_demo, loss_fidelity_bounds, noisy_convergence, particle_loss_analytic, GaussianFamily,
    LossSpec, NoiseModel, NoisyConvergenceReport,
};
use modeport::protocol::{
    avg_entanglement_closed, avg_entanglement_monte_carlo, fidelity_closed, fidelity_monte_carlo, performance,
    separable_fidelity, teleport_all, MonteCarloSettings,
};
use modeport::resources::{double_well_ground, imbalance_moments, population_peaks, ResourceSpec};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{ExperimentConfig, ExperimentKind, FamilySpec};
use crate::output::{Report, Table, Value};
use crate::CliError;

/// Slack below which a row is rejected as violating the triangle bound.
pub const SLACK_TOL: f64 = 1e-10;

/// Minimum population relative to the maximum for a ground-state peak.
const PEAK_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Options {
    /// Overrides every seed in the configuration.
    pub seed: Option<u64>,
    /// Adds a `wall_time` column to sweeps; off by default so that output is reproducible byte for byte.
    pub timing: bool,
}

/// What gnuplot should draw from the first table of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub x: &'static str,
    pub ys: Vec<&'static str>,
    pub logscale: bool,
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub report: Report,
    pub plot: Option<PlotSpec>,
}

fn seed(cfg: &ExperimentConfig, opts: &Options) -> u64 {
    opts.seed.or(cfg.seed).unwrap_or(0)
}

pub fn teleport(cfg: &ExperimentConfig, opts: &Options) -> Result<Output, CliError> {
    cfg.check_kind(ExperimentKind::Teleport)?;
    let (n, nu) = (cfg.n, cfg.nu()?);
    let spec = cfg.resource()?;
    let rho = spec.build(nu)?;
    let psi = match &cfg.input {
        Some(amps) => {
            if amps.len() != n + 1 {
                return Err(CliError::Config(format!("input needs {} amplitudes, got {}", n + 1, amps.len())));
            }
            let c: Vec<C64> = amps.iter().map(|a| C64::new(a[0], a[1])).collect();
            PureTwoModeState::from_unnormalized(c.into())?
        }
        None => sample_haar_seeded(n, seed(cfg, opts)),
    };
    let mut outcomes = Table::new("outcomes", vec!["l", "lambda", "probability", "negativity", "conditional_fidelity"]);
    let mut input_fidelity = 0.0;
    for o in teleport_all(&psi, &rho)? {
        let cf = o.conditional_fidelity(&psi)?;
        input_fidelity += o.probability * cf;
        outcomes.push(vec![
            o.outcome.l.into(),
            o.outcome.lambda.into(),
            o.probability.into(),
            o.negativity().into(),
            cf.into(),
        ]);
    }
    let perf = performance(&rho, n)?;
    let mut report = Report::default();
    report.note("resource", spec.name());
    report.note("n", n);
    report.note("nu", nu);
    report.note("fidelity", perf.fidelity);
    report.note("one_minus_f", 1.0 - perf.fidelity);
    report.note("avg_entanglement", perf.avg_entanglement);
    report.note("f_sep", perf.f_sep);
    report.note("e_max", perf.e_max);
    report.note("triangle_slack", perf.triangle_slack());
    report.note("input_fidelity", input_fidelity);
    if let Some(mc) = cfg.monte_carlo {
        let settings = MonteCarloSettings { samples: mc.samples, seed: opts.seed.or(mc.seed).unwrap_or(0) };
        let f = fidelity_monte_carlo(&rho, n, settings)?;
        let e = avg_entanglement_monte_carlo(&rho, n, settings)?;
        report.note("fidelity_monte_carlo", f.mean);
        report.note("fidelity_monte_carlo_std_error", f.std_error);
        report.note("avg_entanglement_monte_carlo", e.mean);
        report.note("avg_entanglement_monte_carlo_std_error", e.std_error);
    }
    check_slack(nu, perf.triangle_slack())?;
    report.tables.push(outcomes);
    Ok(Output { report, plot: None })
}

fn check_slack(nu: usize, slack: f64) -> Result<(), CliError> {
    if slack < -SLACK_TOL {
        return Err(CliError::Failure(format!("triangle slack {slack:e} at nu={nu}")));
    }
    Ok(())
}

/// One closed-form sweep row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResultRow {
    pub nu: usize,
    pub n: usize,
    pub fidelity: f64,
    pub avg_entanglement: f64,
    pub f_sep: f64,
    pub triangle_slack: f64,
    /// Seconds spent building the resource and evaluating both closed forms.
    pub wall_time: f64,
}

pub fn sweep_row(spec: &ResourceSpec, n: usize, nu: usize) -> Result<ResultRow, CliError> {
    let start = Instant::now();
    let rho = spec.build(nu)?;
    let perf = performance(&rho, n)?;
    let wall_time = start.elapsed().as_secs_f64();
    check_slack(nu, perf.triangle_slack())?;
    Ok(ResultRow {
        nu,
        n,
        fidelity: perf.fidelity,
        avg_entanglement: perf.avg_entanglement,
        f_sep: perf.f_sep,
        triangle_slack: perf.triangle_slack(),
        wall_time,
    })
}

pub fn sweep(cfg: &ExperimentConfig, opts: &Options) -> Result<Output, CliError> {
    cfg.check_kind(ExperimentKind::Sweep)?;
    let n = cfg.n;
    let grid = cfg.grid()?;
    let spec = cfg.resource()?;
    // rayon keeps the collected order equal to the grid order
    let rows: Vec<ResultRow> = grid.par_iter().map(|&nu| sweep_row(spec, n, nu)).collect::<Result<_, _>>()?;
    let mut columns = vec!["nu", "n", "fidelity", "one_minus_f", "scaled_deficit", "avg_entanglement", "f_sep", "triangle_slack"];
    if opts.timing {
        columns.push("wall_time");
    }
    let mut table = Table::new("rows", columns);
    for r in &rows {
        let mut row: Vec<Value> = vec![
            r.nu.into(),
            r.n.into(),
            r.fidelity.into(),
            (1.0 - r.fidelity).into(),
            ((1.0 - r.fidelity) * r.nu as f64 / r.n as f64).into(),
            r.avg_entanglement.into(),
            r.f_sep.into(),
            r.triangle_slack.into(),
        ];
        if opts.timing {
            row.push(r.wall_time.into());
        }
        table.push(row);
    }
    let mut report = Report::default();
    report.note("resource", spec.name());
    report.note("n", n);
    report.tables.push(table);
    Ok(Output {
        report,
        plot: Some(PlotSpec { x: "nu", ys: vec!["one_minus_f"], logscale: true, reference: None }),
    })
}

/// Linear interpolation of the first downward crossing of zero.
fn first_crossing(times: &[f64], excess: &[f64]) -> Option<f64> {
    times.windows(2).zip(excess.windows(2)).find_map(|(t, e)| {
        (e[0] > 0.0 && e[1] <= 0.0).then(|| t[0] + (t[1] - t[0]) * e[0] / (e[0] - e[1]))
    })
}

pub fn noise(cfg: &ExperimentConfig, _opts: &Options) -> Result<Output, CliError> {
    cfg.check_kind(ExperimentKind::Noise)?;
    let n = cfg.n;
    let nu = cfg.nu()?;
    let times = cfg.times()?;
    let model = cfg.noise.as_ref().ok_or_else(|| CliError::Config("missing field 'noise'".into()))?;
    let (rho, name) = match (&cfg.threshold_state, &cfg.resource) {
        (Some(ts), None) => (ts.build(nu.max(n).max(3))?, "threshold_state"),
        (None, Some(r)) => (r.build(nu)?, r.name()),
        _ => return Err(CliError::Config("give exactly one of 'resource' or 'threshold_state'".into())),
    };
    let f_sep = separable_fidelity(n);
    let mut report = Report::default();
    report.note("resource", name);
    report.note("n", n);
    report.note("nu", rho.n_particles());
    report.note("f_sep", f_sep);
    let plot = match model {
        NoiseModel::Dephasing { lambda3, lambda4 } => {
            let mut table = Table::new("rows", vec!["t", "fidelity", "avg_entanglement", "f_sep", "excess", "criterion"]);
            let mut excess = Vec::with_capacity(times.len());
            for &t in &times {
                let out = model.apply(&rho, t)?;
                let f = fidelity_closed(&out, n)?;
                let e = avg_entanglement_closed(&out, n)?;
                excess.push(f - f_sep);
                table.push(vec![
                    t.into(),
                    f.into(),
                    e.into(),
                    f_sep.into(),
                    (f - f_sep).into(),
                    model.criterion(n, rho.n_particles(), t).into(),
                ]);
            }
            if let Some(tc) = first_crossing(&times, &excess) {
                report.note("crossing_time_grid", tc);
            }
            if let Some(ts) = &cfg.threshold_state {
                let demo = dephasing_threshold_demo(ts, n, *lambda3, *lambda4, nu)?;
                report.note("fidelity_at_zero", demo.fidelity_at_zero);
                report.note("y_threshold", demo.y_threshold);
                report.note("critical_time", demo.critical_time);
                if let Some(tb) = demo.critical_time_bisection {
                    report.note("critical_time_bisection", tb);
                }
            }
            report.tables.push(table);
            PlotSpec { x: "t", ys: vec!["fidelity"], logscale: false, reference: Some(f_sep) }
        }
        NoiseModel::Loss { channels } => {
            let bounds = loss_fidelity_bounds(&rho, channels, n, &times)?;
            let mut table = Table::new(
                "rows",
                vec!["t", "fidelity", "avg_entanglement", "f_sep", "survival_weight", "lower_bound", "bound_holds"],
            );
            for (i, &t) in times.iter().enumerate() {
                let spec = LossSpec { channels: channels.clone(), t };
                let res = particle_loss_analytic(&rho, &spec, false)?;
                let e = res.survival_weight * avg_entanglement_closed(&res.survivor, n)?;
                table.push(vec![
                    t.into(),
                    bounds.fidelity[i].into(),
                    e.into(),
                    f_sep.into(),
                    res.survival_weight.into(),
                    bounds.lower_bound[i].into(),
                    bounds.bound_holds[i].into(),
                ]);
            }
            report.note("bound_guaranteed", bounds.bound_guaranteed);
            report.note("bound_holds_everywhere", bounds.bound_holds.iter().all(|b| *b));
            if let Some(tc) = bounds.critical_time {
                report.note("certified_until", tc);
            }
            let excess: Vec<f64> = bounds.fidelity.iter().map(|f| f - f_sep).collect();
            if let Some(tc) = first_crossing(&times, &excess) {
                report.note("crossing_time_grid", tc);
            }
            if bounds.bound_guaranteed && !bounds.bound_holds.iter().all(|b| *b) {
                return Err(CliError::Failure("loss lower bound violated for a state that guarantees it".into()));
            }
            report.tables.push(table);
            PlotSpec { x: "t", ys: vec!["fidelity", "lower_bound"], logscale: false, reference: Some(f_sep) }
        }
    };
    Ok(Output { report, plot: Some(plot) })
}

fn convergence_table(rep: &ConvergenceReport, noisy: Option<&NoisyConvergenceReport>) -> Table {
    let mut columns = vec!["nu", "one_minus_f", "scaled_deficit", "entanglement_deficit"];
    if rep.overlaps.is_some() {
        columns.push("overlap");
    }
    if noisy.is_some() {
        columns.extend(["t", "alpha2_clean", "alpha2_measured", "alpha2_predicted", "fidelity_continuum", "criterion"]);
    }
    let mut table = Table::new("rows", columns);
    for (i, &nu) in rep.nu_grid.iter().enumerate() {
        let mut row: Vec<Value> = vec![
            nu.into(),
            rep.one_minus_f[i].into(),
            rep.scaled_deficit[i].into(),
            rep.entanglement_deficit[i].into(),
        ];
        if let Some(o) = &rep.overlaps {
            row.push(o[i].into());
        }
        if let Some(nr) = noisy {
            row.extend([
                nr.times[i].into(),
                nr.alpha2_clean[i].into(),
                nr.alpha2_measured[i].into(),
                nr.alpha2_predicted[i].into(),
                nr.fidelity_continuum[i].into(),
                nr.criterion[i].into(),
            ]);
        }
        table.push(row);
    }
    table
}

pub fn converge(cfg: &ExperimentConfig, _opts: &Options) -> Result<Output, CliError> {
    cfg.check_kind(ExperimentKind::Converge)?;
    let n = cfg.n;
    let grid = cfg.grid()?;
    let family = cfg.family.as_ref().ok_or_else(|| CliError::Config("missing field 'family'".into()))?;
    let mut report = Report::default();
    let (rep, noisy) = match (&cfg.noise, family) {
        (None, FamilySpec::Superposition { first, second, c1, c2 }) => {
            (check_superposition_convergence(&first.family()?, &second.family()?, *c1, *c2, &grid, n)?, None)
        }
        (None, f) => (check_family_convergence(&f.family()?, n, &grid)?, None),
        (Some(noise), FamilySpec::Gaussian { beta, center }) if *center == 0.0 => {
            let time = cfg
                .time_scaling
                .ok_or_else(|| CliError::Config("noisy convergence needs 'time_scaling'".into()))?;
            let nr = noisy_convergence(&GaussianFamily { beta: *beta }, noise, time, n, &grid)?;
            (nr.convergence.clone(), Some(nr))
        }
        (Some(_), _) => {
            return Err(CliError::Config("noisy convergence supports only centred gaussian families".into()));
        }
    };
    report.note("family", rep.family.clone());
    report.note("n", n);
    report.note("fitted_exponent", rep.fitted_exponent);
    report.note("rate_coefficient", rep.rate_coefficient);
    report.note("asymptotic_deficit", rep.asymptotic_deficit);
    report.note("converges", rep.converges);
    report.note("hypothesis_flags", Value::Json(json!(rep.hypothesis_flags)));
    if let Some(nr) = &noisy {
        report.note("substitution_error", nr.substitution_error);
        report.note("factorized", nr.factorized);
    }
    report.tables.push(convergence_table(&rep, noisy.as_ref()));
    Ok(Output {
        report,
        plot: Some(PlotSpec { x: "nu", ys: vec!["one_minus_f"], logscale: true, reference: None }),
    })
}

pub fn ground_state(cfg: &ExperimentConfig, _opts: &Options) -> Result<Output, CliError> {
    cfg.check_kind(ExperimentKind::GroundState)?;
    let (n, nu) = (cfg.n, cfg.nu()?);
    let spec = cfg.resource()?;
    let params = spec
        .bose_hubbard(nu)?
        .ok_or_else(|| CliError::Config(format!("ground-state needs a double_well resource, got {}", spec.name())))?;
    let rho = double_well_ground(&params)?;
    let gamma = params.gamma();
    let (mean, var) = imbalance_moments(&rho);
    let peaks = population_peaks(&rho, PEAK_FRACTION);
    let perf = performance(&rho, n)?;
    let mut report = Report::default();
    report.note("nu", nu);
    report.note("n", n);
    report.note("gamma", gamma);
    report.note("tunnelling", params.tunnelling);
    report.note("interaction", params.interaction);
    report.note("mean_z", mean);
    report.note("variance_z", var);
    if gamma > -1.0 {
        report.note("predicted_variance", 1.0 / (nu as f64 * (gamma + 1.0).sqrt()));
    } else if gamma < -1.0 {
        report.note("predicted_peak", (1.0 - 1.0 / (gamma * gamma)).sqrt());
    }
    report.note("peaks", Value::Json(json!(peaks)));
    report.note("fidelity", perf.fidelity);
    report.note("avg_entanglement", perf.avg_entanglement);
    report.note("f_sep", perf.f_sep);
    if let Ok(profile) = ContinuumProfile::double_well(nu, gamma) {
        report.note("fidelity_continuum", fidelity_continuum(&profile.normalized()?, n, nu)?);
    }
    check_slack(nu, perf.triangle_slack())?;
    let mut table = Table::new("rows", vec!["k", "z", "population"]);
    for (k, p) in rho.populations().into_iter().enumerate() {
        table.push(vec![k.into(), (1.0 - 2.0 * k as f64 / nu as f64).into(), p.into()]);
    }
    report.tables.push(table);
    Ok(Output {
        report,
        plot: Some(PlotSpec { x: "z", ys: vec!["population"], logscale: false, reference: None }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossing_is_interpolated() {
        let t = [0.0, 1.0, 2.0];
        assert_eq!(first_crossing(&t, &[1.0, 0.5, -0.5]), Some(1.5));
        assert_eq!(first_crossing(&t, &[1.0, 0.5, 0.1]), None);
    }
}
