use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use s1phase_core::energy::{bulk_gradient, evaluate};
use s1phase_core::fields::make_dipole_map;
use s1phase_core::minimizer::{u_step_direct, v_step, FieldState, UStepOptions};
use s1phase_core::{EnergyParams, GridSpec, JumpCost, Mode, ScalarField, VortexConfig};

fn dipole(n: usize) -> (GridSpec, Vec<f64>, Vec<f64>) {
    let grid = GridSpec::new_2d([1.0, 0.5], [2 * n + 1, n + 1]).expect("grid");
    let config = VortexConfig::dipole(grid.cell_center(n / 2, n / 2), grid.cell_center(3 * n / 2, n / 2));
    let u = make_dipole_map(&grid, &config).expect("dipole");
    let v = (0..grid.num_nodes())
        .map(|i| {
            let [x, y] = grid.position(i);
            0.5 + 0.4 * (7.0 * x).sin() * (5.0 * y).cos()
        })
        .collect();
    (grid, u.angles().to_vec(), v)
}

fn energy(c: &mut Criterion) {
    let params = EnergyParams::default();
    let mut group = c.benchmark_group("energy");
    for n in [32, 128] {
        let (grid, x, v) = dipole(n);
        for mode in [Mode::Direct, Mode::Lifting] {
            group.bench_with_input(BenchmarkId::new(format!("evaluate_{}", mode.tag()), n), &n, |b, _| {
                b.iter(|| evaluate(&grid, black_box(&x), black_box(&v), &params, mode))
            });
            group.bench_with_input(BenchmarkId::new(format!("gradient_{}", mode.tag()), n), &n, |b, _| {
                b.iter(|| bulk_gradient(&grid, black_box(&x), black_box(&v), &params, mode))
            });
        }
    }
    group.finish();
}

fn steps(c: &mut Criterion) {
    let params = EnergyParams::default().with_epsilon(0.05);
    let (grid, x, v) = dipole(64);
    let u = s1phase_core::CircleField::from_angles(grid, x).expect("field");
    let v = ScalarField::new(grid, v).expect("v");
    let fixed: Vec<bool> = (0..grid.num_nodes()).map(|i| grid.is_boundary(i)).collect();
    let opts = UStepOptions {
        max_iters: 1,
        ..Default::default()
    };
    c.bench_function("u_step_direct_64", |b| {
        b.iter(|| u_step_direct(black_box(&u), &v, &params, Some(&fixed), &opts).expect("u-step"))
    });
    let state = FieldState::Circle(u.clone());
    c.bench_function("v_step_64", |b| b.iter(|| v_step(black_box(&state), &v, &params).expect("v-step")));
}

fn jump_cost(c: &mut Criterion) {
    let params = EnergyParams::default();
    c.bench_function("jump_cost_table", |b| b.iter(|| JumpCost::new(black_box(&params)).expect("table")));
    let g = JumpCost::new(&params).expect("table");
    c.bench_function("jump_cost_eval", |b| b.iter(|| g.eval(black_box(1.7)).expect("g")));
}

criterion_group!(benches, energy, steps, jump_cost);
criterion_main!(benches);
