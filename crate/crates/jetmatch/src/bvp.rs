//! The two-point boundary value problem for critical rotation paths:
//! g' = g Omega, Omega' = diamond(j c1, g^-1 j c2) with natural boundary
//! conditions Omega(0) = Omega(1) = 0.
//!
//! The shooting forward map marches the exact stationarity recursion of the
//! discrete energy (a staggered leapfrog: segment velocities live between
//! nodes, the node force updates them), so a converged shot is a critical
//! point of the discrete energy to solver tolerance, not just an ODE
//! solution. A classical Lie-group midpoint integrator for the same
//! equations is provided for convergence studies and diagnostics.

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{discrete_energy, EnergyBreakdown, RotationPath};
use crate::error::{Error, Result};
use crate::jets::JetField;
use crate::liegroup::{
    algebra_basis, algebra_coords, algebra_from_coords, exp_algebra, project_rotation,
    AlgebraElement, Rotation,
};
use crate::momentum::diamond;

/// Smallest grid the solvers accept.
pub const MIN_SEGMENTS: usize = 16;

/// Paths closer than this in sup Frobenius distance merge during multistart
/// deduplication.
pub const DEDUP_SUP_DISTANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy)]
pub struct ShootingConfig {
    pub tol: f64,
    pub max_iter: usize,
    /// Forward-difference step for the Jacobian in algebra coordinates.
    pub fd_step: f64,
    pub max_backtracks: usize,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 50,
            fd_step: 1e-6,
            max_backtracks: 20,
        }
    }
}

/// The data of the boundary value problem: two compatible jet fields on a
/// shared grid; the unknown is the initial rotation.
#[derive(Debug, Clone)]
pub struct ShootingProblem {
    j1: JetField,
    j2: JetField,
}

impl ShootingProblem {
    pub fn new(j1: JetField, j2: JetField) -> Result<Self> {
        if !j1.compatible_with(&j2) {
            return Err(Error::DimensionMismatch(
                "jet fields disagree in grid, dimension, order, or weights".to_string(),
            ));
        }
        if j1.segments() < MIN_SEGMENTS {
            return Err(Error::GridTooCoarse(format!(
                "shooting needs at least {MIN_SEGMENTS} segments, got {}",
                j1.segments()
            )));
        }
        Ok(Self { j1, j2 })
    }

    pub fn dim(&self) -> usize {
        self.j1.dim()
    }

    pub fn segments(&self) -> usize {
        self.j1.segments()
    }

    pub fn source(&self) -> &JetField {
        &self.j1
    }

    pub fn target(&self) -> &JetField {
        &self.j2
    }

    /// Node force diamond(A1_j, g^T A2_j): the per-node potential gradient
    /// direction driving Omega'.
    fn node_force(&self, j: usize, g: &Rotation) -> AlgebraElement {
        let rotated = g.matrix().transpose() * self.j2.node(j);
        diamond(self.j1.node(j), &rotated, self.j1.weights())
            .expect("problem construction checked shapes")
    }

    fn midpoint_force(&self, m: usize, g: &Rotation) -> AlgebraElement {
        let rotated = g.matrix().transpose() * self.j2.midpoint(m);
        diamond(self.j1.midpoint(m), &rotated, self.j1.weights())
            .expect("problem construction checked shapes")
    }
}

/// A converged solution of the boundary value problem.
#[derive(Debug, Clone)]
pub struct CriticalPoint {
    pub path: RotationPath,
    /// Node-centered trivialized velocities; entry 0 is exactly zero and the
    /// last entry is the terminal residual.
    pub omegas: Vec<AlgebraElement>,
    pub energy: EnergyBreakdown,
    pub residual_norm: f64,
    pub iterations: usize,
    pub start_index: usize,
}

impl CriticalPoint {
    /// Winding number for planar proper paths, if defined.
    pub fn winding(&self) -> Option<i64> {
        self.path.winding_number().ok()
    }
}

/// Continuum right-hand side of the variational system at parameter s:
/// returns (g Omega, diamond(A1(s), g^-1 A2(s))). Jets between grid nodes
/// are linearly interpolated.
pub fn rhs(
    s: f64,
    g: &Rotation,
    omega: &AlgebraElement,
    j1: &JetField,
    j2: &JetField,
) -> Result<(DMatrix<f64>, AlgebraElement)> {
    if !j1.compatible_with(j2) {
        return Err(Error::DimensionMismatch(
            "jet fields disagree in grid, dimension, order, or weights".to_string(),
        ));
    }
    if g.dim() != j1.dim() || omega.dim() != j1.dim() {
        return Err(Error::DimensionMismatch(
            "state dimension does not match the jet fields".to_string(),
        ));
    }
    let tangent = g.matrix() * omega.matrix();
    let rotated = g.matrix().transpose() * j2.value_at(s);
    let force = diamond(&j1.value_at(s), &rotated, j1.weights())?;
    Ok((tangent, force))
}

/// Explicit Lie-group midpoint integration of the initial value problem
/// with Omega(0) = 0 on the jet grid: Omega advances by classical midpoint
/// in the algebra, g advances by g exp(ds Omega_mid). Second-order
/// convergent; the path is defensively re-projected every 64 steps.
pub fn integrate_ivp(
    g0: &Rotation,
    j1: &JetField,
    j2: &JetField,
) -> Result<(RotationPath, Vec<AlgebraElement>)> {
    let problem = ShootingProblem::new(j1.clone(), j2.clone())?;
    if g0.dim() != problem.dim() {
        return Err(Error::DimensionMismatch(
            "initial rotation does not match the jet fields".to_string(),
        ));
    }
    let nseg = problem.segments();
    let ds = j1.delta_s();
    let mut g = g0.clone();
    let mut omega = AlgebraElement::zeros(problem.dim());
    let mut rotations = Vec::with_capacity(nseg + 1);
    let mut omegas = Vec::with_capacity(nseg + 1);
    rotations.push(g.clone());
    omegas.push(omega.clone());
    for m in 0..nseg {
        let force_node = problem.node_force(m, &g);
        let omega_half = omega.add(&force_node.scale(0.5 * ds));
        let g_half = g.compose(&exp_algebra(&omega.scale(0.5 * ds)));
        let force_half = problem.midpoint_force(m, &g_half);
        g = g.compose(&exp_algebra(&omega_half.scale(ds)));
        omega = omega.add(&force_half.scale(ds));
        if (m + 1) % 64 == 0 {
            g = project_rotation(g.matrix())?;
        }
        rotations.push(g.clone());
        omegas.push(omega.clone());
    }
    Ok((RotationPath::try_new(rotations)?, omegas))
}

/// Self-convergence order of [`integrate_ivp`] from g0: solves on three
/// doubling grid levels, takes whole-path root-mean-square differences of
/// consecutive levels at shared nodes, and returns log2 of their ratio.
pub fn ivp_self_convergence_order(
    c1: &crate::curves::Curve,
    c2: &crate::curves::Curve,
    k: usize,
    weights: &crate::jets::Weights,
    g0: &Rotation,
    levels: &[usize; 3],
) -> Result<f64> {
    if levels[1] != 2 * levels[0] || levels[2] != 2 * levels[1] {
        return Err(Error::GridTooCoarse(
            "convergence study expects doubling grid levels".to_string(),
        ));
    }
    let mut solutions = Vec::with_capacity(3);
    for &nseg in levels {
        let j1 = crate::jets::jet_field(c1, k, nseg, weights)?;
        let j2 = crate::jets::jet_field(c2, k, nseg, weights)?;
        solutions.push((nseg, integrate_ivp(g0, &j1, &j2)?));
    }
    let mut diffs = [0.0; 2];
    for (i, pair) in solutions.windows(2).enumerate() {
        let (coarse_n, (coarse_path, coarse_om)) = &pair[0];
        let (fine_n, (fine_path, fine_om)) = &pair[1];
        let stride = fine_n / coarse_n;
        let mut acc = 0.0;
        for m in 0..=*coarse_n {
            let d = coarse_path.node(m).frobenius_distance(fine_path.node(m * stride));
            let e = coarse_om[m].sub(&fine_om[m * stride]).norm();
            acc += d * d + e * e;
        }
        diffs[i] = (acc / (*coarse_n as f64 + 1.0)).sqrt();
    }
    Ok((diffs[0] / diffs[1]).log2())
}

/// Outcome of one forward march of the discrete stationarity recursion.
struct March {
    rotations: Vec<Rotation>,
    segment_omegas: Vec<AlgebraElement>,
    residual: AlgebraElement,
}

/// March the discrete Euler-Lagrange recursion from g0: the segment
/// velocity starts at (ds/2) P_0(g_0), each interior node adds ds P_j(g_j),
/// and the residual is the node-centered terminal velocity
/// Omega_seg + (ds/2) P_N(g_N) = Omega(1).
fn march(problem: &ShootingProblem, g0: &Rotation) -> March {
    let nseg = problem.segments();
    let ds = 1.0 / nseg as f64;
    let mut rotations = Vec::with_capacity(nseg + 1);
    rotations.push(g0.clone());
    let mut segment_omegas = Vec::with_capacity(nseg);
    let mut omega = problem.node_force(0, g0).scale(0.5 * ds);
    let mut g = g0.clone();
    for j in 1..=nseg {
        g = g.compose(&exp_algebra(&omega.scale(ds)));
        if j % 64 == 0 {
            if let Ok(p) = project_rotation(g.matrix()) {
                g = p;
            }
        }
        segment_omegas.push(omega.clone());
        rotations.push(g.clone());
        if j < nseg {
            omega = omega.add(&problem.node_force(j, &g).scale(ds));
        }
    }
    let residual = segment_omegas[nseg - 1].add(&problem.node_force(nseg, &g).scale(0.5 * ds));
    March {
        rotations,
        segment_omegas,
        residual,
    }
}

fn critical_point_from_march(
    problem: &ShootingProblem,
    m: March,
    iterations: usize,
    start_index: usize,
) -> Result<CriticalPoint> {
    let nseg = problem.segments();
    let dim = problem.dim();
    let mut omegas = Vec::with_capacity(nseg + 1);
    omegas.push(AlgebraElement::zeros(dim));
    for j in 1..nseg {
        omegas.push(m.segment_omegas[j - 1].add(&m.segment_omegas[j]).scale(0.5));
    }
    omegas.push(m.residual.clone());
    let path = RotationPath::try_new(m.rotations)?;
    let energy = discrete_energy(&path, problem.source(), problem.target())?;
    Ok(CriticalPoint {
        path,
        omegas,
        energy,
        residual_norm: m.residual.norm(),
        iterations,
        start_index,
    })
}

/// Newton-Raphson shooting from a single initial rotation. The unknown is
/// the algebra chart zeta with g_0 = start exp(zeta); the residual is the
/// terminal velocity Omega(1). Steps are damped by halving (up to
/// `max_backtracks`) whenever the residual norm would not decrease.
pub fn solve_shooting(
    problem: &ShootingProblem,
    start: &Rotation,
    config: &ShootingConfig,
) -> Result<CriticalPoint> {
    solve_shooting_indexed(problem, start, config, 0)
}

fn solve_shooting_indexed(
    problem: &ShootingProblem,
    start: &Rotation,
    config: &ShootingConfig,
    start_index: usize,
) -> Result<CriticalPoint> {
    if start.dim() != problem.dim() {
        return Err(Error::DimensionMismatch(
            "start rotation does not match the problem".to_string(),
        ));
    }
    let n = problem.dim();
    let dof = n * (n - 1) / 2;
    let basis = algebra_basis(n);
    let mut zeta = vec![0.0; dof];
    let shoot = |coords: &[f64]| -> March {
        let g0 = start.compose(&exp_algebra(&algebra_from_coords(n, coords)));
        march(problem, &g0)
    };
    let mut current = shoot(&zeta);
    let mut res_norm = current.residual.norm();
    for iter in 0..config.max_iter {
        if res_norm <= config.tol {
            return critical_point_from_march(problem, current, iter, start_index);
        }
        // forward-difference Jacobian, one march per algebra direction
        let r0 = algebra_coords(&current.residual);
        let mut jac = DMatrix::<f64>::zeros(dof, dof);
        for (col, _) in basis.iter().enumerate() {
            let mut bumped = zeta.clone();
            bumped[col] += config.fd_step;
            let r1 = algebra_coords(&shoot(&bumped).residual);
            for row in 0..dof {
                jac[(row, col)] = (r1[row] - r0[row]) / config.fd_step;
            }
        }
        let rhs_vec = nalgebra::DVector::from_vec(r0.clone());
        let lu = jac.clone().lu();
        let delta = match lu.solve(&rhs_vec) {
            Some(d) if d.iter().all(|x| x.is_finite()) => -d,
            _ => {
                let svd = jac.svd(false, false);
                let cond = svd.singular_values.max() / svd.singular_values.min().max(1e-300);
                return Err(Error::SingularJacobian { cond });
            }
        };
        // backtracking: halve until the residual decreases
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=config.max_backtracks {
            let trial: Vec<f64> = zeta
                .iter()
                .zip(delta.iter())
                .map(|(z, d)| z + step * d)
                .collect();
            let trial_march = shoot(&trial);
            let trial_norm = trial_march.residual.norm();
            if trial_norm < res_norm {
                accepted = Some((trial, trial_march, trial_norm));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((z, m, norm)) => {
                zeta = z;
                current = m;
                res_norm = norm;
            }
            None => return Err(Error::NoConvergence(iter + 1)),
        }
    }
    if res_norm <= config.tol {
        return critical_point_from_march(problem, current, config.max_iter, start_index);
    }
    Err(Error::NoConvergence(config.max_iter))
}

/// Deterministic spread of `count` start rotations; planar starts are the
/// equispaced angles 2 pi j / count, higher dimensions use a seeded draw.
/// With `include_improper`, the same spread is repeated in the det = -1
/// component.
pub fn default_starts(n: usize, count: usize, include_improper: bool) -> Vec<Rotation> {
    let mut starts = Vec::new();
    if n == 2 {
        for j in 0..count {
            let angle = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            starts.push(exp_algebra(&crate::liegroup::hat2(angle)));
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a65746d61746368);
        starts.push(Rotation::identity(n));
        for _ in 1..count {
            let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-2.0..2.0));
            starts.push(exp_algebra(&AlgebraElement::new(m).expect("square")));
        }
    }
    if include_improper {
        let flip = Rotation::reflection(n);
        let improper: Vec<Rotation> = starts.iter().map(|g| flip.compose(g)).collect();
        starts.extend(improper);
    }
    starts
}

/// Run the shooting solver from every start, drop failures, merge paths
/// closer than [`DEDUP_SUP_DISTANCE`], and sort by energy (ties by start
/// index). Errors with [`Error::AllStartsFailed`] when nothing converged.
pub fn solve_bvp_multistart(
    problem: &ShootingProblem,
    starts: &[Rotation],
    config: &ShootingConfig,
) -> Result<Vec<CriticalPoint>> {
    if starts.is_empty() {
        return Err(Error::AllStartsFailed);
    }
    let mut found: Vec<CriticalPoint> = Vec::new();
    for (idx, start) in starts.iter().enumerate() {
        let Ok(cp) = solve_shooting_indexed(problem, start, config, idx) else {
            continue;
        };
        match found
            .iter_mut()
            .find(|other| other.path.sup_distance(&cp.path) < DEDUP_SUP_DISTANCE)
        {
            Some(existing) => {
                if cp.energy.total < existing.energy.total {
                    *existing = cp;
                }
            }
            None => found.push(cp),
        }
    }
    if found.is_empty() {
        return Err(Error::AllStartsFailed);
    }
    found.sort_by(|a, b| {
        a.energy
            .total
            .partial_cmp(&b.energy.total)
            .unwrap()
            .then(a.start_index.cmp(&b.start_index))
    });
    Ok(found)
}

/// Scalar shooting for planar problems: the same discrete stationarity
/// recursion in the angle coordinate, used as an independent cross-check of
/// the matrix solver. The unknown is theta(0).
/// Scalar forward march in the angle coordinate; returns the node angles
/// and the node-centered terminal residual.
fn scalar_shoot(problem: &ShootingProblem, theta0: f64) -> (Vec<f64>, f64) {
    let nseg = problem.segments();
    let ds = 1.0 / nseg as f64;
    let force = |j: usize, theta: f64| -> f64 {
        let g = exp_algebra(&crate::liegroup::hat2(theta));
        crate::liegroup::vee2(&problem.node_force(j, &g)).expect("2x2 force")
    };
    let mut thetas = Vec::with_capacity(nseg + 1);
    thetas.push(theta0);
    let mut omega = 0.5 * ds * force(0, theta0);
    let mut theta = theta0;
    for j in 1..=nseg {
        theta += ds * omega;
        thetas.push(theta);
        if j < nseg {
            omega += ds * force(j, theta);
        }
    }
    let residual = omega + 0.5 * ds * force(nseg, theta);
    (thetas, residual)
}

/// Bisection on the scalar residual over a bracketing interval; a robust
/// complement to Newton when the shooting sensitivity makes basins tiny.
pub fn solve_theta_2d_bisect(
    problem: &ShootingProblem,
    bracket: (f64, f64),
    config: &ShootingConfig,
) -> Result<CriticalPoint> {
    if problem.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "scalar solver requires n = 2, got {}",
            problem.dim()
        )));
    }
    let (mut a, mut b) = bracket;
    let (_, mut ra) = scalar_shoot(problem, a);
    let (_, rb) = scalar_shoot(problem, b);
    if !(ra * rb < 0.0) {
        return Err(Error::NoConvergence(0));
    }
    let mut iterations = 0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        iterations += 1;
        let (_, rm) = scalar_shoot(problem, mid);
        if ra * rm <= 0.0 {
            b = mid;
        } else {
            a = mid;
            ra = rm;
        }
    }
    let (thetas, residual) = scalar_shoot(problem, 0.5 * (a + b));
    if std::f64::consts::SQRT_2 * residual.abs() > config.tol {
        return Err(Error::NoConvergence(iterations));
    }
    scalar_critical_point(problem, &thetas, residual, iterations)
}

pub fn solve_theta_2d(
    problem: &ShootingProblem,
    start_theta: f64,
    config: &ShootingConfig,
) -> Result<CriticalPoint> {
    if problem.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "scalar solver requires n = 2, got {}",
            problem.dim()
        )));
    }
    let shoot = |theta0: f64| scalar_shoot(problem, theta0);
    let mut theta0 = start_theta;
    let (mut thetas, mut residual) = shoot(theta0);
    for iter in 0..config.max_iter {
        // the scalar residual is vee2 of the matrix residual, whose norm is
        // sqrt(2) |residual|
        if std::f64::consts::SQRT_2 * residual.abs() <= config.tol {
            return scalar_critical_point(problem, &thetas, residual, iter);
        }
        let (_, bumped) = shoot(theta0 + config.fd_step);
        let slope = (bumped - residual) / config.fd_step;
        if !slope.is_finite() || slope.abs() < 1e-300 {
            return Err(Error::SingularJacobian {
                cond: slope.abs().recip(),
            });
        }
        let delta = -residual / slope;
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=config.max_backtracks {
            let trial0 = theta0 + step * delta;
            let (trial_thetas, trial_res) = shoot(trial0);
            if trial_res.abs() < residual.abs() {
                theta0 = trial0;
                thetas = trial_thetas;
                residual = trial_res;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(Error::NoConvergence(iter + 1));
        }
    }
    if std::f64::consts::SQRT_2 * residual.abs() <= config.tol {
        return scalar_critical_point(problem, &thetas, residual, config.max_iter);
    }
    Err(Error::NoConvergence(config.max_iter))
}

fn scalar_critical_point(
    problem: &ShootingProblem,
    thetas: &[f64],
    residual: f64,
    iterations: usize,
) -> Result<CriticalPoint> {
    let nseg = problem.segments();
    let ds = 1.0 / nseg as f64;
    let rotations: Vec<Rotation> = thetas
        .iter()
        .map(|&t| exp_algebra(&crate::liegroup::hat2(t)))
        .collect();
    let path = RotationPath::try_new(rotations)?;
    let mut omegas = Vec::with_capacity(nseg + 1);
    omegas.push(AlgebraElement::zeros(2));
    for j in 1..nseg {
        let centered = (thetas[j + 1] - thetas[j - 1]) / (2.0 * ds);
        omegas.push(crate::liegroup::hat2(centered));
    }
    omegas.push(crate::liegroup::hat2(residual));
    let energy = discrete_energy(&path, problem.source(), problem.target())?;
    Ok(CriticalPoint {
        path,
        omegas,
        energy,
        residual_norm: std::f64::consts::SQRT_2 * residual.abs(),
        iterations,
        start_index: 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::{make_circle, make_line, SpeedProfile};
    use crate::energy::{energy_gradient, gradient_sup_norm};
    use crate::jets::{jet_field, Weights};
    use crate::liegroup::{hat2, inner_algebra, vee2, vee3};
    use approx::assert_abs_diff_eq;
    use nalgebra::{dvector, Vector3};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn unit_line() -> crate::curves::Curve {
        make_line(
            dvector![1.0, 0.0],
            dvector![0.0, 0.0],
            SpeedProfile::Linear { v: 1.0 },
        )
        .unwrap()
    }

    fn line_circle_problem(lambda: f64, nseg: usize) -> ShootingProblem {
        let w = Weights::new(vec![lambda]).unwrap();
        let j1 = jet_field(&unit_line(), 1, nseg, &w).unwrap();
        let j2 = jet_field(&make_circle(1.0).unwrap(), 1, nseg, &w).unwrap();
        ShootingProblem::new(j1, j2).unwrap()
    }

    #[test]
    fn rhs_vanishes_for_identical_jets() {
        let w = Weights::first_order(1);
        let j = jet_field(&make_circle(1.0).unwrap(), 1, 32, &w).unwrap();
        let g = Rotation::identity(2);
        let omega = AlgebraElement::zeros(2);
        let (tangent, force) = rhs(0.37, &g, &omega, &j, &j).unwrap();
        assert!(force.norm() < 1e-14);
        assert!(tangent.norm() < 1e-14);
    }

    #[test]
    fn rhs_2d_reduces_to_the_scalar_equation() {
        // line vs circle: the angle acceleration is -pi lambda r cos(2 pi s - theta)
        let lambda = 3.0;
        let r = 1.0;
        let w = Weights::new(vec![lambda]).unwrap();
        let j1 = jet_field(&unit_line(), 1, 64, &w).unwrap();
        let j2 = jet_field(&make_circle(r).unwrap(), 1, 64, &w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let theta = rng.random_range(-3.0..3.0);
            let m = rng.random_range(0..=64usize);
            let s = m as f64 / 64.0;
            let g = exp_algebra(&hat2(theta));
            let (_, force) = rhs(s, &g, &AlgebraElement::zeros(2), &j1, &j2).unwrap();
            let expected = -std::f64::consts::PI
                * lambda
                * r
                * (2.0 * std::f64::consts::PI * s - theta).cos();
            assert_abs_diff_eq!(vee2(&force).unwrap(), expected, epsilon = 1e-12 * lambda);
        }
    }

    #[test]
    fn rhs_3d_is_the_cross_product_form() {
        // omega' = (lambda/2) (g^-1 c2' x c1')
        let w = Weights::new(vec![0.9]).unwrap();
        let c1 = make_line(
            dvector![1.0, 0.0, 0.0],
            dvector![0.0, 0.0, 0.0],
            SpeedProfile::Linear { v: 1.0 },
        )
        .unwrap();
        let c2 = make_line(
            dvector![0.3, -1.0, 0.7],
            dvector![0.0, 0.5, 0.0],
            SpeedProfile::SinePerturbed { v: 2.0, eps: 0.2 },
        )
        .unwrap();
        let j1 = jet_field(&c1, 1, 32, &w).unwrap();
        let j2 = jet_field(&c2, 1, 32, &w).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let g = crate::testutil::random_rotation(&mut rng, 3);
            let s = rng.random_range(0.0..1.0);
            let (_, force) = rhs(s, &g, &AlgebraElement::zeros(3), &j1, &j2).unwrap();
            let a1 = j1.value_at(s).column(0).into_owned();
            let a2 = g.matrix().transpose() * j2.value_at(s).column(0);
            let c1v = Vector3::new(a1[0], a1[1], a1[2]);
            let c2v = Vector3::new(a2[0], a2[1], a2[2]);
            let expected = c2v.cross(&c1v) * (0.9 / 2.0);
            assert!((vee3(&force).unwrap() - expected).norm() < 1e-12);
        }
    }

    #[test]
    fn ivp_equilibrium_for_identical_jets() {
        let w = Weights::first_order(1);
        let j = jet_field(&make_circle(1.0).unwrap(), 1, 32, &w).unwrap();
        let (path, omegas) = integrate_ivp(&Rotation::identity(2), &j, &j).unwrap();
        for m in 0..=32 {
            assert!(path.node(m).frobenius_distance(&Rotation::identity(2)) < 1e-13);
            assert!(omegas[m].norm() < 1e-13);
        }
    }

    #[test]
    fn ivp_straight_lines_stay_flat() {
        let w = Weights::first_order(1);
        let j1 = jet_field(&unit_line(), 1, 32, &w).unwrap();
        let j2 = jet_field(
            &make_line(
                dvector![1.0, 0.0],
                dvector![0.3, 0.3],
                SpeedProfile::SinePerturbed { v: 2.0, eps: 0.05 },
            )
            .unwrap(),
            1,
            32,
            &w,
        )
        .unwrap();
        let (path, omegas) = integrate_ivp(&Rotation::identity(2), &j1, &j2).unwrap();
        assert!(omegas[32].norm() < 1e-13);
        assert!(path.node(32).frobenius_distance(&Rotation::identity(2)) < 1e-13);
    }

    #[test]
    fn ivp_self_convergence_is_second_order() {
        let w = Weights::new(vec![10.0]).unwrap();
        let order = ivp_self_convergence_order(
            &unit_line(),
            &make_circle(1.0).unwrap(),
            1,
            &w,
            &Rotation::identity(2),
            &[128, 256, 512],
        )
        .unwrap();
        assert!(
            (1.8..=2.2).contains(&order),
            "self-convergence order {order} out of [1.8, 2.2]"
        );
    }

    #[test]
    fn ivp_keeps_orthogonality() {
        let w = Weights::new(vec![25.0]).unwrap();
        let j1 = jet_field(&unit_line(), 1, 400, &w).unwrap();
        let j2 = jet_field(&make_circle(1.0).unwrap(), 1, 400, &w).unwrap();
        let (path, _) = integrate_ivp(&exp_algebra(&hat2(1.0)), &j1, &j2).unwrap();
        let worst = path
            .nodes()
            .iter()
            .map(|g| {
                (g.matrix().transpose() * g.matrix() - nalgebra::DMatrix::identity(2, 2)).norm()
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-10, "orthogonality drift {worst}");
    }

    #[test]
    fn straight_lines_shoot_in_zero_iterations() {
        let w = Weights::first_order(1);
        let j1 = jet_field(&unit_line(), 1, 100, &w).unwrap();
        let j2 = jet_field(
            &make_line(
                dvector![1.0, 0.0],
                dvector![0.0, 0.0],
                SpeedProfile::Linear { v: 2.0 },
            )
            .unwrap(),
            1,
            100,
            &w,
        )
        .unwrap();
        let problem = ShootingProblem::new(j1, j2).unwrap();
        let cp = solve_shooting(&problem, &Rotation::identity(2), &ShootingConfig::default())
            .unwrap();
        assert_eq!(cp.iterations, 0);
        assert!(cp.residual_norm < 1e-14);
        assert_abs_diff_eq!(cp.energy.total, 0.5, epsilon = 1e-12);
        let lift = cp.path.theta_lift().unwrap();
        assert!(lift.iter().all(|t| t.abs() < 1e-12));
    }

    #[test]
    fn line_circle_moderate_lambda_branches() {
        // multistart over spread rotations finds the winding-0 branch; the
        // winding-1 branch has an exponentially narrow shooting basin, so a
        // near-root start is added. Reference energies frozen from an
        // independent direct minimization of the same discrete objective.
        let problem = line_circle_problem(10.0, 400);
        let mut starts = default_starts(2, 8, false);
        starts.push(exp_algebra(&hat2(2.749027433)));
        let points =
            solve_bvp_multistart(&problem, &starts, &ShootingConfig::default()).unwrap();
        assert!(points.len() >= 2);
        let best = &points[0];
        assert_eq!(best.winding(), Some(1));
        assert_abs_diff_eq!(best.energy.total, 164.665459803, epsilon = 2e-4);
        let w0 = points
            .iter()
            .find(|p| p.winding() == Some(0))
            .expect("winding-0 branch");
        assert_abs_diff_eq!(w0.energy.total, 186.201756037, epsilon = 2e-4);
        // boundary conditions: Omega(0) exactly zero, Omega(1) within tol
        for p in &points {
            assert_eq!(p.omegas[0].norm(), 0.0);
            assert!(p.omegas[400].norm() <= 1e-8);
        }
    }

    #[test]
    fn shot_points_are_discretely_stationary() {
        let problem = line_circle_problem(10.0, 200);
        let starts = default_starts(2, 8, false);
        let points =
            solve_bvp_multistart(&problem, &starts, &ShootingConfig::default()).unwrap();
        for p in &points {
            let grad = energy_gradient(&p.path, problem.source(), problem.target()).unwrap();
            assert!(
                gradient_sup_norm(&grad) <= 1e-5,
                "gradient sup norm {}",
                gradient_sup_norm(&grad)
            );
        }
    }

    #[test]
    fn scalar_and_matrix_solvers_agree() {
        let problem = line_circle_problem(10.0, 200);
        let config = ShootingConfig::default();
        let matrix = solve_shooting(&problem, &Rotation::identity(2), &config).unwrap();
        let scalar = solve_theta_2d(&problem, 0.0, &config).unwrap();
        let lift_m = matrix.path.theta_lift().unwrap();
        let lift_s = scalar.path.theta_lift().unwrap();
        let sup = lift_m
            .iter()
            .zip(&lift_s)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(sup <= 1e-6, "solver disagreement {sup}");
        assert_abs_diff_eq!(matrix.energy.total, scalar.energy.total, epsilon = 1e-8);
    }

    #[test]
    fn scalar_2d_reduction_of_the_matrix_force() {
        // vee2 of the general node force equals the scalar rhs on random states
        let problem = line_circle_problem(7.0, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let theta = rng.random_range(-3.0..3.0);
            let j = rng.random_range(0..=64usize);
            let g = exp_algebra(&hat2(theta));
            let matrix_force = vee2(&problem.node_force(j, &g)).unwrap();
            let s = j as f64 / 64.0;
            let scalar = -std::f64::consts::PI
                * 7.0
                * (2.0 * std::f64::consts::PI * s - theta).cos();
            assert_abs_diff_eq!(matrix_force, scalar, epsilon = 1e-13 * 7.0);
        }
    }

    #[test]
    fn multistart_dedups_to_single_point_for_lines() {
        let w = Weights::first_order(1);
        let j1 = jet_field(&unit_line(), 1, 64, &w).unwrap();
        let j2 = jet_field(
            &make_line(
                dvector![1.0, 0.0],
                dvector![0.0, 0.0],
                SpeedProfile::Linear { v: 2.0 },
            )
            .unwrap(),
            1,
            64,
            &w,
        )
        .unwrap();
        let problem = ShootingProblem::new(j1, j2).unwrap();
        let points = solve_bvp_multistart(
            &problem,
            &default_starts(2, 8, false),
            &ShootingConfig::default(),
        )
        .unwrap();
        // two constant critical points survive dedup: the aligned minimizer
        // and the anti-aligned saddle theta = pi
        assert_eq!(points.len(), 2);
        assert_abs_diff_eq!(points[0].energy.total, 0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(points[1].energy.total, 4.5, epsilon = 1e-10);
        assert_eq!(points[0].winding(), Some(0));
    }

    #[test]
    fn coarse_grids_are_rejected() {
        let w = Weights::first_order(1);
        let j1 = jet_field(&unit_line(), 1, 8, &w).unwrap();
        let j2 = jet_field(&make_circle(1.0).unwrap(), 1, 8, &w).unwrap();
        assert!(matches!(
            ShootingProblem::new(j1, j2),
            Err(Error::GridTooCoarse(_))
        ));
    }

    #[test]
    fn residual_is_node_centered_terminal_velocity() {
        // the returned omegas interpolate the segment velocities; at a
        // converged point the first entry is zero and the last is below tol
        let problem = line_circle_problem(5.0, 100);
        let cp = solve_shooting(&problem, &Rotation::identity(2), &ShootingConfig::default())
            .unwrap();
        assert_eq!(cp.omegas.len(), 101);
        assert_eq!(cp.omegas[0].norm(), 0.0);
        assert!(cp.omegas[100].norm() <= 1e-8);
        // interior omegas approximate the lift's difference quotients
        let lift = cp.path.theta_lift().unwrap();
        for j in [25usize, 50, 75] {
            let centered = (lift[j + 1] - lift[j - 1]) / (2.0 / 100.0);
            assert_abs_diff_eq!(vee2(&cp.omegas[j]).unwrap(), centered, epsilon = 1e-10);
        }
    }

    #[test]
    fn improper_starts_stay_improper() {
        let problem = line_circle_problem(2.0, 64);
        let starts = default_starts(2, 4, true);
        assert_eq!(starts.len(), 8);
        let points =
            solve_bvp_multistart(&problem, &starts, &ShootingConfig::default()).unwrap();
        // both components are represented among converged critical points
        assert!(points
            .iter()
            .any(|p| p.path.component() == crate::liegroup::Component::Proper));
        assert!(points
            .iter()
            .any(|p| p.path.component() == crate::liegroup::Component::Improper));
    }

    #[test]
    fn converged_points_pair_gradient_with_omega_jumps() {
        // sanity link between the stationarity march and the energy gradient:
        // interior gradient entries are zero because consecutive segment
        // velocities differ exactly by the node force
        let problem = line_circle_problem(12.0, 128);
        let cp = solve_shooting(&problem, &exp_algebra(&hat2(1.0)), &ShootingConfig::default())
            .unwrap();
        let grad =
            energy_gradient(&cp.path, problem.source(), problem.target()).unwrap();
        for g in grad.iter().take(128).skip(1) {
            assert!(g.norm() < 1e-11);
        }
        let pairing: f64 = grad
            .iter()
            .zip(&cp.omegas)
            .map(|(g, o)| inner_algebra(g, o).unwrap())
            .sum();
        assert!(pairing.abs() < 1e-10);
    }
}
