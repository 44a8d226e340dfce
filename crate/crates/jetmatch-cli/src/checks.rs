//! The seeded invariant suite behind `jetmatch check`: every cross-module
//! identity is measured against its bound and reported on one line.

use std::process::ExitCode;

use nalgebra::{dvector, DMatrix, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jetmatch::bvp::ivp_self_convergence_order;
use jetmatch::curves::{make_circle, make_line, Curve, SpeedProfile};
use jetmatch::energy::{
    discrete_energy, energy_gradient, gradient_sup_norm, RotationPath,
};
use jetmatch::error::{Error, Result};
use jetmatch::jets::{flat, inner_l, jet_field, Weights};
use jetmatch::liegroup::{
    algebra_basis, algebra_from_coords, bracket, exp_algebra, hat2, hat3, inner_algebra,
    log_rotation, vee2, AlgebraElement, Rotation,
};
use jetmatch::momentum::{diamond, diamond_pairing_check};

struct Check {
    name: &'static str,
    measured: f64,
    bound: f64,
    /// false: measured <= bound passes; true: measured must sit inside
    /// [2 - bound, bound] (used for the convergence-order window).
    window: bool,
}

impl Check {
    fn passes(&self) -> bool {
        if self.window {
            (2.0 - (self.bound - 2.0) - 2.0 * (self.bound - 2.0)..=self.bound)
                .contains(&self.measured)
        } else {
            self.measured <= self.bound
        }
    }
}

fn le(name: &'static str, measured: f64, bound: f64) -> Check {
    Check {
        name,
        measured,
        bound,
        window: false,
    }
}

fn random_skew(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> AlgebraElement {
    AlgebraElement::new(DMatrix::from_fn(n, n, |_, _| rng.random_range(-scale..scale))).unwrap()
}

fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> Rotation {
    exp_algebra(&random_skew(rng, n, 1.5))
}

fn random_jet(rng: &mut ChaCha8Rng, n: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, k, |_, _| rng.random_range(-2.0..2.0))
}

fn unit_line() -> Curve {
    make_line(
        dvector![1.0, 0.0],
        dvector![0.0, 0.0],
        SpeedProfile::Linear { v: 1.0 },
    )
    .unwrap()
}

pub fn cmd_check(lambda_text: &str, seed: u64) -> Result<ExitCode> {
    // the lambda guard itself is part of the contract: reject lambda_1 = 0
    // with a clear message before running anything
    let lambda: Vec<f64> = lambda_text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::InvalidWeights(format!("cannot parse weights: {e}")))?;
    Weights::new(lambda).map_err(|e| {
        Error::InvalidWeights(format!("{e}; the distance loses definiteness without lambda_1 > 0"))
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = Vec::new();

    // exponential/logarithm roundtrip and orthogonality
    let mut roundtrip: f64 = 0.0;
    let mut ortho: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + (rng.random_range(0..3usize));
        let mut w = random_skew(&mut rng, n, 1.0);
        let norm = w.norm();
        if norm > 3.0 {
            w = w.scale(3.0 / norm);
        }
        let r = exp_algebra(&w);
        ortho = ortho.max(
            (r.matrix().transpose() * r.matrix() - DMatrix::identity(n, n)).norm(),
        );
        roundtrip = roundtrip.max(log_rotation(&r).unwrap().sub(&w).norm());
    }
    checks.push(le("exp/log roundtrip", roundtrip, 1e-9));
    checks.push(le("exp orthogonality", ortho, 1e-12));

    // Ad-invariance of the algebra inner product and bracket orthogonality
    let mut ad: f64 = 0.0;
    let mut bracket_pairing: f64 = 0.0;
    let mut hat3_cross: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + (rng.random_range(0..3usize));
        let g = random_rotation(&mut rng, n);
        let a = random_skew(&mut rng, n, 2.0);
        let b = random_skew(&mut rng, n, 2.0);
        let lhs = inner_algebra(&a.conjugate_by(&g), &b.conjugate_by(&g)).unwrap();
        let rhs = inner_algebra(&a, &b).unwrap();
        ad = ad.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        let br = bracket(&b, &a).unwrap();
        bracket_pairing = bracket_pairing.max(inner_algebra(&a, &br).unwrap().abs());
        let u = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let v = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let lhs = bracket(&hat3(&u), &hat3(&v)).unwrap();
        hat3_cross = hat3_cross.max(lhs.sub(&hat3(&u.cross(&v))).norm());
    }
    checks.push(le("algebra inner product Ad-invariance", ad, 1e-12));
    checks.push(le("<Omega,[sigma,Omega]> = 0", bracket_pairing, 1e-12));
    checks.push(le("hat3 bracket/cross intertwine", hat3_cross, 1e-13));

    // jet-space norm invariance and flat linearity
    let weights = Weights::new(vec![1.3, 0.4]).unwrap();
    let mut norm_inv: f64 = 0.0;
    let mut flat_lin: f64 = 0.0;
    for _ in 0..100 {
        let n = 2 + (rng.random_range(0..2usize));
        let g = random_rotation(&mut rng, n);
        let a = random_jet(&mut rng, n, 2);
        let b = random_jet(&mut rng, n, 2);
        let lhs = inner_l(&(g.matrix() * &a), &(g.matrix() * &b), &weights).unwrap();
        let rhs = inner_l(&a, &b, &weights).unwrap();
        norm_inv = norm_inv.max((lhs - rhs).abs() / (1.0 + rhs.abs()));
        let alpha = rng.random_range(-2.0..2.0);
        let lin = (flat(&(&a * alpha + &b), &weights).unwrap()
            - (flat(&a, &weights).unwrap() * alpha + flat(&b, &weights).unwrap()))
        .norm();
        flat_lin = flat_lin.max(lin);
    }
    checks.push(le("jet norm O(n)-invariance", norm_inv, 1e-12));
    checks.push(le("flat map linearity", flat_lin, 1e-13));

    // diamond identities
    let mut anti: f64 = 0.0;
    let mut pairing: f64 = 0.0;
    let mut det2: f64 = 0.0;
    let mut cross3: f64 = 0.0;
    let w1 = Weights::new(vec![1.7]).unwrap();
    for _ in 0..100 {
        let n = 2 + (rng.random_range(0..2usize));
        let a = random_jet(&mut rng, n, 2);
        let b = random_jet(&mut rng, n, 2);
        let dab = diamond(&a, &b, &weights).unwrap();
        anti = anti.max(dab.add(&diamond(&b, &a, &weights).unwrap()).norm());
        let omega = random_skew(&mut rng, n, 2.0);
        let (dual, action) = diamond_pairing_check(&a, &b, &weights, &omega).unwrap();
        pairing = pairing.max((dual - action).abs());

        let a2 = random_jet(&mut rng, 2, 1);
        let b2 = random_jet(&mut rng, 2, 1);
        let det = a2[(0, 0)] * b2[(1, 0)] - a2[(1, 0)] * b2[(0, 0)];
        let d2 = diamond(&a2, &b2, &w1).unwrap();
        det2 = det2.max((vee2(&d2).unwrap() + 0.5 * 1.7 * det).abs());

        let a3 = random_jet(&mut rng, 3, 1);
        let b3 = random_jet(&mut rng, 3, 1);
        let av = Vector3::new(a3[(0, 0)], a3[(1, 0)], a3[(2, 0)]);
        let bv = Vector3::new(b3[(0, 0)], b3[(1, 0)], b3[(2, 0)]);
        let d3 = diamond(&a3, &b3, &w1).unwrap();
        cross3 = cross3
            .max((jetmatch::liegroup::vee3(&d3).unwrap() + av.cross(&bv) * (0.5 * 1.7)).norm());
    }
    checks.push(le("diamond antisymmetry", anti, 1e-13));
    checks.push(le("diamond defining pairing", pairing, 1e-12));
    checks.push(le("diamond planar determinant formula", det2, 1e-12));
    checks.push(le("diamond spatial cross-product formula", cross3, 1e-12));

    // energy identities on a random planar path
    let wl = Weights::first_order(1);
    let j1 = jet_field(&unit_line(), 1, 50, &wl)?;
    let j2 = jet_field(&make_circle(1.0)?, 1, 50, &wl)?;
    let mut rots = vec![random_rotation(&mut rng, 2)];
    for _ in 0..50 {
        rots.push(rots.last().unwrap().compose(&exp_algebra(&random_skew(&mut rng, 2, 0.1))));
    }
    let path = RotationPath::try_new(rots)?;
    let forward = discrete_energy(&path, &j1, &j2)?;
    let backward = discrete_energy(&path.inverse(), &j2, &j1)?;
    checks.push(le(
        "energy symmetry identity",
        (forward.total - backward.total).abs() / (1.0 + forward.total),
        1e-12,
    ));

    // gradient against central finite differences
    let grad = energy_gradient(&path, &j1, &j2)?;
    let basis = algebra_basis(2);
    let mut fd_err: f64 = 0.0;
    let scale = gradient_sup_norm(&grad).max(1e-12);
    for m in (0..=50).step_by(5) {
        let coords: Vec<f64> = basis
            .iter()
            .map(|b| {
                let eval = |sign: f64| {
                    let mut rots = path.nodes().to_vec();
                    rots[m] = rots[m].compose(&exp_algebra(&b.scale(sign * 1e-6)));
                    discrete_energy(
                        &RotationPath::try_new(rots).unwrap(),
                        &j1,
                        &j2,
                    )
                    .unwrap()
                    .total
                };
                (eval(1.0) - eval(-1.0)) / 2e-6
            })
            .collect();
        let fd = algebra_from_coords(2, &coords);
        fd_err = fd_err.max(grad[m].sub(&fd).norm() / scale);
    }
    checks.push(le("energy gradient vs finite differences", fd_err, 1e-5));

    // planar reduction of the stationarity force
    let problem = jetmatch::bvp::ShootingProblem::new(j1.clone(), j2.clone())?;
    let mut reduction: f64 = 0.0;
    for _ in 0..50 {
        let theta = rng.random_range(-3.0..3.0);
        let j = rng.random_range(0..=50usize);
        let g = exp_algebra(&hat2(theta));
        let s = j as f64 / 50.0;
        let expected =
            -std::f64::consts::PI * (2.0 * std::f64::consts::PI * s - theta).cos();
        let (_, force) = jetmatch::bvp::rhs(s, &g, &AlgebraElement::zeros(2), &j1, &j2)?;
        reduction = reduction.max((vee2(&force).unwrap() - expected).abs());
    }
    drop(problem);
    checks.push(le("planar reduction of the force", reduction, 1e-12));

    // integrator self-convergence order and orthogonality preservation
    let order = ivp_self_convergence_order(
        &unit_line(),
        &make_circle(1.0)?,
        1,
        &Weights::new(vec![10.0])?,
        &Rotation::identity(2),
        &[128, 256, 512],
    )?;
    checks.push(Check {
        name: "integrator self-convergence order",
        measured: order,
        bound: 2.2,
        window: true,
    });
    let w10 = Weights::new(vec![10.0])?;
    let ja = jet_field(&unit_line(), 1, 400, &w10)?;
    let jb = jet_field(&make_circle(1.0)?, 1, 400, &w10)?;
    let (ivp_path, _) = jetmatch::bvp::integrate_ivp(&exp_algebra(&hat2(0.7)), &ja, &jb)?;
    let drift = ivp_path
        .nodes()
        .iter()
        .map(|g| (g.matrix().transpose() * g.matrix() - DMatrix::identity(2, 2)).norm())
        .fold(0.0, f64::max);
    checks.push(le("integrator orthogonality drift", drift, 1e-10));

    let mut failed = 0;
    for c in &checks {
        let status = if c.passes() { "PASS" } else { "FAIL" };
        if !c.passes() {
            failed += 1;
        }
        if c.window {
            println!(
                "{status}  {name}: {measured:.6} in [{lo:.1}, {hi:.1}]",
                name = c.name,
                measured = c.measured,
                lo = 2.0 - (c.bound - 2.0),
                hi = c.bound,
            );
        } else {
            println!(
                "{status}  {name}: {measured:.3e} <= {bound:.1e}",
                name = c.name,
                measured = c.measured,
                bound = c.bound,
            );
        }
    }
    println!(
        "{} checks, {} failed (seed {seed})",
        checks.len(),
        failed
    );
    if failed > 0 {
        Ok(ExitCode::from(3u8))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}
