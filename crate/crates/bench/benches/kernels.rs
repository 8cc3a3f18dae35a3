//! Hot-path benchmarks: derivative evaluation, one predictor–corrector
//! step, profile solving, and peak detection.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use heliodrop_core::analysis::{detect_peaks, DEFAULT_MIN_PROMINENCE};
use heliodrop_core::dynamics::{
    initialize, rhs, step, Mode, MultistepHistory,
};
use heliodrop_core::functional::FunctionalParams;
use heliodrop_core::grid::Grid;
use heliodrop_core::stationary::solve_profile;

fn setup_field(mode: Mode) -> (heliodrop_core::WaveField, FunctionalParams) {
    let p = FunctionalParams::helium4();
    let prof = solve_profile(0.02183599, 0.05, &p).unwrap();
    let grid = Grid::from_spacing(-250.05, 150.0, 0.15).unwrap();
    let psi = initialize(&prof, 65.78, 110.0, &grid, mode, &p).unwrap();
    (psi, p)
}

fn bench_rhs(c: &mut Criterion) {
    let (psi_q, p) = setup_field(Mode::Quantum);
    let (psi_c, _) = setup_field(Mode::Classical);
    c.bench_function("rhs_quantum_2668pts", |b| {
        b.iter(|| rhs(&psi_q, &p).unwrap())
    });
    c.bench_function("rhs_classical_2668pts", |b| {
        b.iter(|| rhs(&psi_c, &p).unwrap())
    });
}

fn bench_step(c: &mut Criterion) {
    let (psi, p) = setup_field(Mode::Quantum);
    let dt = p.constants.seconds_to_internal(1e-16);
    let (psi4, history) = MultistepHistory::bootstrap(&psi, dt, &p).unwrap();
    c.bench_function("pece_step_2668pts", |b| {
        b.iter_batched(
            || (psi4.clone(), history_clone(&psi, dt, &p)),
            |(field, mut h)| step(&field, &mut h, dt, &p).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn history_clone(
    psi: &heliodrop_core::WaveField,
    dt: f64,
    p: &FunctionalParams,
) -> MultistepHistory {
    MultistepHistory::bootstrap(psi, dt, p).unwrap().1
}

fn bench_profile(c: &mut Criterion) {
    let p = FunctionalParams::helium4();
    c.bench_function("solve_profile_large_dx0.05", |b| {
        b.iter(|| solve_profile(0.02183599, 0.05, &p).unwrap())
    });
}

fn bench_peaks(c: &mut Criterion) {
    let (psi, _) = setup_field(Mode::Quantum);
    c.bench_function("detect_peaks_full_grid", |b| {
        b.iter(|| detect_peaks(&psi, (-250.0, 50.0), DEFAULT_MIN_PROMINENCE))
    });
}

criterion_group!(benches, bench_rhs, bench_step, bench_profile, bench_peaks);
criterion_main!(benches);
