use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use modeport::continuum::{fidelity_continuum, ContinuumProfile};
use modeport::noise::{particle_loss_analytic, particle_loss_lindblad, LossSpec};
use modeport::oracle::teleport_outcome_oracle;
use modeport::protocol::{fidelity_closed, performance, teleport_all};
use modeport::resources::{double_well_ground, BoseHubbardParams};
use modeport_bench::{gaussian, input, mixed, SWEEP_NU};

fn closed_forms(c: &mut Criterion) {
    let mut g = c.benchmark_group("closed_forms");
    for nu in SWEEP_NU {
        let rho = gaussian(nu);
        for n in [1, 4] {
            g.bench_with_input(BenchmarkId::new(format!("performance_n{n}"), nu), &rho, |b, rho| {
                b.iter(|| performance(black_box(rho), n).unwrap())
            });
        }
    }
    let dense = mixed(400);
    g.bench_function("fidelity_dense_nu400_n3", |b| b.iter(|| fidelity_closed(black_box(&dense), 3).unwrap()));
    g.finish();
}

fn outcomes(c: &mut Criterion) {
    let mut g = c.benchmark_group("outcomes");
    let (psi, rho) = (input(3), mixed(6));
    g.bench_function("teleport_all_n3_nu6", |b| b.iter(|| teleport_all(black_box(&psi), black_box(&rho)).unwrap()));
    g.bench_function("oracle_outcome_n3_nu6", |b| {
        b.iter(|| teleport_outcome_oracle(black_box(&psi), black_box(&rho), 1, 0, true).unwrap())
    });
    g.finish();
}

fn continuum(c: &mut Criterion) {
    let mut g = c.benchmark_group("continuum");
    let profile = ContinuumProfile::double_well(1000, -2.0).unwrap().normalized().unwrap();
    g.bench_function("fidelity_two_gaussians_nu1000", |b| b.iter(|| fidelity_continuum(black_box(&profile), 2, 1000).unwrap()));
    g.finish();
}

fn ground_state(c: &mut Criterion) {
    let mut g = c.benchmark_group("ground_state");
    g.sample_size(20);
    for nu in [100, 400, 1000] {
        let params = BoseHubbardParams::from_gamma(nu, 1.0, -2.0);
        g.bench_with_input(BenchmarkId::from_parameter(nu), &params, |b, p| b.iter(|| double_well_ground(black_box(p)).unwrap()));
    }
    g.finish();
}

fn loss(c: &mut Criterion) {
    let mut g = c.benchmark_group("loss");
    g.sample_size(20);
    let rho = mixed(12);
    let spec = LossSpec::two_particle(0.4, 0.6, 0.3, 0.2, 0.5, 0.5);
    g.bench_function("analytic_nu12", |b| b.iter(|| particle_loss_analytic(black_box(&rho), &spec, true).unwrap()));
    g.bench_function("lindblad_nu12", |b| b.iter(|| particle_loss_lindblad(black_box(&rho), &spec, 0.05).unwrap()));
    g.finish();
}

criterion_group!(benches, closed_forms, outcomes, continuum, ground_state, loss);
criterion_main!(benches);
