//! Fast built-in verification suite at `N ≤ 3`, `ν ≤ 6` plus a few
//! quantitative checks, each compared against an independent route.

use std::f64::consts::PI;

use modeport::fock::{negativity, negativity_partial_transpose, sample_haar, seeded_rng, ResourceState, C64};
use modeport::noise::{
    dephasing_threshold_demo, loss_fidelity_bounds, mix, particle_loss_analytic, particle_loss_lindblad, LossChannel,
    LossSpec, MixingSpec, ThresholdState,
};
use modeport::oracle::{haar_moment_fidelity, teleport_outcome_oracle, Contraction};
use modeport::protocol::{
    average_teleported, average_teleported_closed, avg_entanglement_closed, fidelity_closed,
    fidelity_closed_band_off_by_one, fidelity_monte_carlo, separable_fidelity, teleport_all, MonteCarloSettings,
};
use modeport::resources::{fock_separable, gaussian_pure, max_entangled, random_mixed, GaussianSpec};

use crate::output::{Report, Table};
use crate::CliError;

/// Deliberate corruptions used to confirm that the suite detects faults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Fault {
    /// Widens the fidelity kernel band from `|k−j| ≤ N` to `|k−j| ≤ N+1`.
    BandOffByOne,
}

type Kernel = fn(&ResourceState, usize) -> modeport::Result<f64>;

struct Check {
    key: &'static str,
    run: fn(Kernel) -> modeport::Result<(bool, String)>,
}

const N_MAX: usize = 3;
const NU_MAX: usize = 6;

fn small_pairs() -> impl Iterator<Item = (usize, usize)> {
    (1..=N_MAX).flat_map(|n| (n..=NU_MAX).map(move |nu| (n, nu)))
}

fn separable(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        for k in 0..=nu {
            worst = worst.max((kernel(&fock_separable(nu, k)?, n)? - separable_fidelity(n)).abs());
        }
    }
    Ok((worst < 1e-12, format!("max |f - 2/(N+2)| = {worst:.2e}")))
}

fn maxent_fidelity(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let expect = 1.0 - n as f64 / (3.0 * (nu + 1) as f64);
        worst = worst.max((kernel(&max_entangled(nu), n)? - expect).abs());
    }
    Ok((worst < 1e-12, format!("max |f - f_maxent| = {worst:.2e}")))
}

fn maxent_entanglement(_: Kernel) -> modeport::Result<(bool, String)> {
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let (nf, nuf) = (n as f64, nu as f64);
        let expect = PI * nf * (3.0 * nuf - nf + 1.0) / (24.0 * (nuf + 1.0));
        worst = worst.max((avg_entanglement_closed(&max_entangled(nu), n)? - expect).abs());
    }
    Ok((worst < 1e-12, format!("max |E - E_maxent| = {worst:.2e}")))
}

fn haar_moments(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(21);
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let rho = random_mixed(nu, 2, &mut rng);
        worst = worst.max((kernel(&rho, n)? - haar_moment_fidelity(&rho, n)?).abs());
    }
    Ok((worst < 1e-12, format!("max deviation from fourth-moment average {worst:.2e}")))
}

fn outcome_oracle(_: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(22);
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let psi = sample_haar(n, &mut rng);
        let rho = random_mixed(nu, 2, &mut rng);
        let c = Contraction::new(n, nu)?;
        for o in teleport_all(&psi, &rho)? {
            let (p, full) = teleport_outcome_oracle(&psi, &rho, o.outcome.l, o.outcome.lambda, true)?;
            let (block, leak) = c.restrict_to_n_particles(&full);
            let mine = o.state.as_ref().map_or_else(|| block.map(|_| C64::new(0.0, 0.0)), |s| s.matrix() * C64::new(p, 0.0));
            worst = worst.max((block - mine).norm()).max(leak).max((p - o.probability).abs());
        }
    }
    Ok((worst < 1e-12, format!("max deviation from four-mode contraction {worst:.2e}")))
}

fn probability_sum(_: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(23);
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let psi = sample_haar(n, &mut rng);
        let rho = random_mixed(nu, 3, &mut rng);
        let total: f64 = teleport_all(&psi, &rho)?.iter().map(|o| o.probability).sum();
        worst = worst.max((total - 1.0).abs());
    }
    Ok((worst < 1e-10, format!("max |sum p - 1| = {worst:.2e}")))
}

fn closed_sum(_: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(24);
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let psi = sample_haar(n, &mut rng);
        let rho = random_mixed(nu, 2, &mut rng);
        let d = average_teleported(&psi, &rho)?.matrix() - average_teleported_closed(&psi, &rho)?.matrix();
        worst = worst.max(d.norm());
    }
    Ok((worst < 1e-12, format!("max |accumulated - closed| = {worst:.2e}")))
}

fn monte_carlo(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let rho = random_mixed(4, 2, &mut seeded_rng(25));
    let est = fidelity_monte_carlo(&rho, 2, MonteCarloSettings { samples: 20_000, seed: 26 })?;
    let f = kernel(&rho, 2)?;
    let z = (est.mean - f) / est.std_error;
    Ok((z.abs() <= 3.0, format!("Haar sampling z-score {z:+.2}")))
}

fn triangle(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(27);
    let mut worst = f64::INFINITY;
    for (n, nu) in small_pairs() {
        for rank in 1..=3 {
            let rho = random_mixed(nu, rank, &mut rng);
            let slack = 8.0 * avg_entanglement_closed(&rho, n)? / PI - (n as f64 + 2.0) * kernel(&rho, n)? + 2.0;
            worst = worst.min(slack);
        }
    }
    Ok((worst >= -1e-10, format!("min slack {worst:.2e}")))
}

fn probabilistic_perfect(_: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(28);
    let (mut wf, mut wp) = (0.0f64, 0.0f64);
    for (n, nu) in small_pairs() {
        let psi = sample_haar(n, &mut rng);
        let mut p = 0.0;
        for o in teleport_all(&psi, &max_entangled(nu))? {
            if (0..=(nu - n) as i64).contains(&o.outcome.l) {
                p += o.probability;
                wf = wf.max((o.conditional_fidelity(&psi)? - 1.0).abs());
            }
        }
        wp = wp.max((p - (nu - n + 1) as f64 / (nu + 1) as f64).abs());
    }
    Ok((wf < 1e-12 && wp < 1e-12, format!("fidelity {wf:.2e}; probability {wp:.2e}")))
}

fn mixing(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let mut rng = seeded_rng(29);
    let mut worst = 0.0f64;
    for (n, nu) in small_pairs() {
        let rho = random_mixed(nu, 1, &mut rng);
        let sigma = random_mixed(nu, 3, &mut rng);
        let s = 0.7 * nu as f64;
        let m = mix(&rho, &MixingSpec { undesired: sigma.clone(), weight: s })?;
        let expect = (kernel(&rho, n)? + s * kernel(&sigma, n)?) / (1.0 + s);
        worst = worst.max((kernel(&m, n)? - expect).abs());
    }
    Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
}

fn dephasing_threshold(_: Kernel) -> modeport::Result<(bool, String)> {
    let state = ThresholdState { a: 0.35, b: 0.15, c: 0.15, d: 0.35, x: -0.1, y: 0.3 };
    let rep = dephasing_threshold_demo(&state, 4, 0.5, 0.5, 4)?;
    let t = rep.critical_time_bisection.unwrap_or(f64::NAN);
    let err = (t - 1.5f64.ln() / 4.0).abs();
    Ok((err < 1e-6, format!("|t* - ln(1.5)/4| = {err:.2e}")))
}

fn loss_bound(_: Kernel) -> modeport::Result<(bool, String)> {
    let times: Vec<f64> = (0..10).map(|i| 0.05 * i as f64).collect();
    let rep = loss_fidelity_bounds(&max_entangled(NU_MAX), &[LossChannel::new(1.0, 1, 0)], 2, &times)?;
    let ok = rep.bound_guaranteed && rep.bound_holds.iter().all(|b| *b);
    Ok((ok, format!("bound held at {} of {} times", rep.bound_holds.iter().filter(|b| **b).count(), times.len())))
}

fn lindblad(_: Kernel) -> modeport::Result<(bool, String)> {
    let rho = random_mixed(NU_MAX, 2, &mut seeded_rng(30));
    let spec = LossSpec::two_particle(0.4, 0.6, 0.3, 0.2, 0.5, 0.4);
    let traj = particle_loss_lindblad(&rho, &spec, 0.05)?;
    let exact = particle_loss_analytic(&rho, &spec, false)?;
    let block = (traj.final_state.surviving_block() - exact.surviving_block()).camax();
    let trace = traj.total_trace.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    Ok((block < 1e-6 && trace < 1e-8, format!("block {block:.2e}; trace drift {trace:.2e}")))
}

fn gaussian_rate(kernel: Kernel) -> modeport::Result<(bool, String)> {
    let scaled: Vec<f64> = [250usize, 500, 1000, 2000]
        .iter()
        .map(|&nu| Ok((1.0 - kernel(&gaussian_pure(&GaussianSpec::scaled(nu, 0.75))?, 2)?) * nu as f64 / 2.0))
        .collect::<modeport::Result<_>>()?;
    let ok = scaled.windows(2).all(|w| w[1] < w[0]) && scaled.iter().all(|x| *x > 0.0) && scaled[3] < 0.2;
    Ok((ok, format!("(1-f)nu/N = {:.4} at nu=2000", scaled[3])))
}

const CHECKS: [Check; 15] = [
    Check { key: "fidelity.separable", run: separable },
    Check { key: "fidelity.max_entangled", run: maxent_fidelity },
    Check { key: "entanglement.max_entangled", run: maxent_entanglement },
    Check { key: "fidelity.haar_moments", run: haar_moments },
    Check { key: "fidelity.monte_carlo", run: monte_carlo },
    Check { key: "outcome.oracle", run: outcome_oracle },
    Check { key: "outcome.probability_sum", run: probability_sum },
    Check { key: "teleported.closed_sum", run: closed_sum },
    Check { key: "bound.triangle", run: triangle },
    Check { key: "teleport.probabilistic_perfect", run: probabilistic_perfect },
    Check { key: "mixing.linearity", run: mixing },
    Check { key: "noise.dephasing_threshold", run: dephasing_threshold },
    Check { key: "noise.loss_bound", run: loss_bound },
    Check { key: "noise.lindblad_agreement", run: lindblad },
    Check { key: "convergence.gaussian_rate", run: gaussian_rate },
];

/// Partial-transpose negativity through the Hermitian eigensolver on a state
/// with known value, so a broken linear-algebra backend is reported as an
/// environment problem rather than as a check failure.
fn probe_eigensolver() -> Result<(), CliError> {
    let state = max_entangled(3).to_density_matrix();
    let got = negativity_partial_transpose(&state);
    if !((got - negativity(&state)).abs() < 1e-10) {
        return Err(CliError::Environment(format!("eigensolver probe returned negativity {got}, expected 1.5")));
    }
    Ok(())
}

/// Runs every check; the report lists them in a fixed order.
pub fn run(fault: Option<Fault>) -> Result<(Report, bool), CliError> {
    probe_eigensolver()?;
    let kernel: Kernel = match fault {
        None => fidelity_closed,
        Some(Fault::BandOffByOne) => fidelity_closed_band_off_by_one,
    };
    let mut table = Table::new("checks", vec!["key", "passed", "detail"]);
    let mut passed = 0usize;
    for c in &CHECKS {
        let (ok, detail) = match (c.run)(kernel) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        passed += usize::from(ok);
        table.push(vec![c.key.into(), ok.into(), detail.into()]);
    }
    let mut report = Report::default();
    report.note("checks", CHECKS.len());
    report.note("passed", passed);
    if let Some(f) = fault {
        report.note("injected_fault", format!("{f:?}"));
    }
    report.tables.push(table);
    Ok((report, passed == CHECKS.len()))
}
