use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use jetmatch::bvp::{solve_shooting, ShootingConfig, ShootingProblem};
use jetmatch::curves::{make_circle, make_line, SpeedProfile};
use jetmatch::distance::{distance, minimize_direct, DistanceConfig};
use jetmatch::energy::{discrete_energy, energy_gradient, RotationPath};
use jetmatch::jets::{jet_field, Weights};
use jetmatch::liegroup::{exp_algebra, hat2, log_rotation, AlgebraElement, Rotation};
use nalgebra::{dvector, DMatrix, Vector3};

fn line_circle(lambda: f64, nseg: usize) -> (jetmatch::jets::JetField, jetmatch::jets::JetField) {
    let w = Weights::new(vec![lambda]).unwrap();
    let c1 = make_line(
        dvector![1.0, 0.0],
        dvector![0.0, 0.0],
        SpeedProfile::Linear { v: 1.0 },
    )
    .unwrap();
    let c2 = make_circle(1.0).unwrap();
    (
        jet_field(&c1, 1, nseg, &w).unwrap(),
        jet_field(&c2, 1, nseg, &w).unwrap(),
    )
}

fn wobble_path(nseg: usize) -> RotationPath {
    let rots: Vec<Rotation> = (0..=nseg)
        .map(|m| exp_algebra(&hat2(0.3 * (m as f64 * 0.1).sin())))
        .collect();
    RotationPath::try_new(rots).unwrap()
}

fn bench_liegroup(c: &mut Criterion) {
    let w3 = jetmatch::liegroup::hat3(&Vector3::new(0.4, -0.7, 1.1));
    c.bench_function("exp_rodrigues_3d", |b| {
        b.iter(|| exp_algebra(black_box(&w3)))
    });
    let r3 = exp_algebra(&w3);
    c.bench_function("log_rotation_3d", |b| {
        b.iter(|| log_rotation(black_box(&r3)).unwrap())
    });
    let w5 = AlgebraElement::new(DMatrix::from_fn(5, 5, |i, j| {
        ((i * 7 + j * 3) as f64 * 0.13).sin()
    }))
    .unwrap();
    c.bench_function("exp_pade_5d", |b| b.iter(|| exp_algebra(black_box(&w5))));
}

fn bench_energy(c: &mut Criterion) {
    let (j1, j2) = line_circle(10.0, 400);
    let path = wobble_path(400);
    c.bench_function("discrete_energy_n400", |b| {
        b.iter(|| discrete_energy(black_box(&path), &j1, &j2).unwrap())
    });
    c.bench_function("energy_gradient_n400", |b| {
        b.iter(|| energy_gradient(black_box(&path), &j1, &j2).unwrap())
    });
}

fn bench_solvers(c: &mut Criterion) {
    let (j1, j2) = line_circle(10.0, 200);
    let problem = ShootingProblem::new(j1.clone(), j2.clone()).unwrap();
    let config = ShootingConfig::default();
    c.bench_function("shoot_line_circle_n200", |b| {
        b.iter(|| solve_shooting(&problem, &Rotation::identity(2), &config).unwrap())
    });
    let init = wobble_path(200);
    c.bench_function("direct_descent_100_iters", |b| {
        b.iter(|| minimize_direct(black_box(&init), &j1, &j2, 0.0, 100).unwrap())
    });
    let cfg = DistanceConfig {
        segments: 100,
        ..DistanceConfig::default()
    };
    let c1 = make_line(
        dvector![1.0, 0.0],
        dvector![0.0, 0.0],
        SpeedProfile::Linear { v: 1.0 },
    )
    .unwrap();
    let c2 = make_circle(1.0).unwrap();
    c.bench_function("distance_line_circle_n100", |b| {
        b.iter(|| distance(&c1, &c2, &cfg).unwrap())
    });
}

criterion_group!(benches, bench_liegroup, bench_energy, bench_solvers);
criterion_main!(benches);
