use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use s1phase_core::fields::make_dipole_map;
use s1phase_core::lifting::{mg_bruteforce, mg_local_search, LiftingProblem};
use s1phase_core::{CircleField, EnergyParams, GridSpec, JumpCost, VortexConfig};

fn random_problem(nx: usize, ny: usize, seed: u64) -> LiftingProblem {
    let grid = GridSpec::new_2d([1.0, 1.0], [nx, ny]).expect("grid");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let angles = (0..grid.num_nodes()).map(|_| rng.gen_range(0.0..std::f64::consts::TAU)).collect();
    let u = CircleField::from_angles(grid, angles).expect("field");
    LiftingProblem::new(u, JumpCost::new(&EnergyParams::default()).expect("g"), 1).expect("problem")
}

fn dipole_problem(cells_per_unit: usize) -> LiftingProblem {
    let n = cells_per_unit;
    let grid = GridSpec::new_2d([1.0, 0.5], [n + 1, n / 2 + 1]).expect("grid");
    let config = VortexConfig::dipole(grid.cell_center(n / 4, n / 4), grid.cell_center(3 * n / 4, n / 4));
    let u = make_dipole_map(&grid, &config).expect("dipole");
    LiftingProblem::new(u, JumpCost::new(&EnergyParams::default()).expect("g"), 2).expect("problem")
}

fn exhaustive(c: &mut Criterion) {
    let mut group = c.benchmark_group("mg_bruteforce");
    for (nx, ny) in [(3, 3), (3, 4)] {
        let p = random_problem(nx, ny, 5);
        group.bench_with_input(BenchmarkId::from_parameter(format!("{nx}x{ny}")), &p, |b, p| {
            b.iter(|| mg_bruteforce(black_box(p)).expect("brute force"))
        });
    }
    group.finish();
}

fn local(c: &mut Criterion) {
    let mut group = c.benchmark_group("mg_local_search");
    group.sample_size(10);
    for n in [16, 32] {
        let p = dipole_problem(n);
        group.bench_with_input(BenchmarkId::new("dipole", n), &p, |b, p| {
            b.iter(|| mg_local_search(black_box(p), 1, 4))
        });
    }
    group.finish();
}

criterion_group!(benches, exhaustive, local);
criterion_main!(benches);
