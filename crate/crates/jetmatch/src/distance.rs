//! The curve distance: infimum of the registration energy over rotation
//! paths, computed by two independent routes that certify each other.
//!
//! Route one is multistart shooting on the discrete stationarity system;
//! route two is direct Riemannian descent on the discrete energy, seeded
//! from constant paths, a pointwise Procrustes-aligned path, and every
//! shooting solution. When the direct route finds a lower minimum (narrow
//! shooting basins do occur), its initial rotation is fed back into the
//! shooting solver so the winner carries a certified residual. The reported
//! value is the discrete energy of the best path found.

use std::time::Instant;

use nalgebra::DMatrix;

use crate::bvp::{
    default_starts, solve_bvp_multistart, solve_shooting, solve_theta_2d_bisect, CriticalPoint,
    ShootingConfig, ShootingProblem,
};
use crate::curves::Curve;
use crate::energy::{
    discrete_energy, energy_gradient, gradient_sup_norm, EnergyBreakdown, RotationPath,
};
use crate::error::{Error, Result};
use crate::jets::{jet_field, JetField, Weights};
use crate::liegroup::{exp_algebra, project_rotation, AlgebraElement, Rotation};

/// Relative agreement threshold between the two minimization routes; both
/// target the same discrete objective, so they must match to solver
/// tolerance, not discretization tolerance.
pub const AGREEMENT_RTOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct DistanceConfig {
    /// Jet order.
    pub k: usize,
    /// Jet-space weights; length must equal `k`.
    pub weights: Weights,
    /// Grid segments N (nodes 0..=N).
    pub segments: usize,
    /// Shooting residual tolerance.
    pub tol: f64,
    /// Gradient sup-norm target of the direct minimizer.
    pub direct_tol: f64,
    /// Iteration cap of the direct minimizer.
    pub max_direct_iter: usize,
    /// Number of multistart rotations.
    pub starts: usize,
    /// Also search the det = -1 component.
    pub include_improper: bool,
}

impl Default for DistanceConfig {
    fn default() -> Self {
        Self {
            k: 1,
            weights: Weights::first_order(1),
            segments: 200,
            tol: 1e-8,
            direct_tol: 1e-6,
            max_direct_iter: 200_000,
            starts: 8,
            include_improper: false,
        }
    }
}

impl DistanceConfig {
    pub fn with_lambda1(mut self, lambda1: f64) -> Result<Self> {
        let mut lambda = self.weights.as_slice().to_vec();
        lambda[0] = lambda1;
        self.weights = Weights::new(lambda)?;
        Ok(self)
    }

    fn shooting(&self) -> ShootingConfig {
        ShootingConfig {
            tol: self.tol,
            ..ShootingConfig::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Shooting,
    Direct,
    Agree,
}

#[derive(Debug, Clone, Copy)]
pub struct DirectStats {
    pub iterations: usize,
    pub converged: bool,
    pub final_gradient_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Diagnostics {
    pub gradient_sup_norm: f64,
    pub best_residual: Option<f64>,
    pub methods_agree: Option<bool>,
    pub relative_gap: Option<f64>,
    pub direct_iterations: usize,
    pub wall_time_ms: f64,
}

#[derive(Debug, Clone)]
pub struct DistanceResult {
    /// Discrete energy at the best path.
    pub value: f64,
    pub best_path: RotationPath,
    pub method: Method,
    pub energy: EnergyBreakdown,
    /// All deduplicated critical points, sorted by energy.
    pub critical_points: Vec<CriticalPoint>,
    pub diagnostics: Diagnostics,
}

impl DistanceResult {
    pub fn winding(&self) -> Option<i64> {
        self.best_path.winding_number().ok()
    }
}

/// Gradient descent on the discrete energy over the product of rotation
/// groups: update g_m <- g_m exp(-eta d_m), where d is the gradient taken
/// in a path-space Sobolev metric (the kinetic term's own quadratic form
/// plus a diagonal potential-scale estimate). The metric is a fixed
/// symmetric positive tridiagonal matrix, so the direction is one Thomas
/// solve per algebra coordinate and the method stays plain first-order
/// descent; without this the stiff kinetic term makes flat-metric descent
/// crawl at O(N^2) iterations. Armijo backtracking guards every step, so
/// accepted steps never increase the energy; stops when the (raw) gradient
/// sup-norm reaches `tol` or at `max_iter`.
pub fn minimize_direct(
    init: &RotationPath,
    j1: &JetField,
    j2: &JetField,
    tol: f64,
    max_iter: usize,
) -> Result<(RotationPath, DirectStats)> {
    const ARMIJO_C: f64 = 1e-4;
    let metric = SobolevMetric::for_problem(j1, j2)?;
    let mut path = init.clone();
    let mut energy = discrete_energy(&path, j1, j2)?.total;
    let mut grad = energy_gradient(&path, j1, j2)?;
    let mut eta = 1.0;
    let mut iterations = 0;
    let mut converged = gradient_sup_norm(&grad) <= tol;
    // previous accepted direction and step for the Barzilai-Borwein trial
    let mut previous: Option<(Vec<AlgebraElement>, f64, f64)> = None;

    while !converged && iterations < max_iter {
        iterations += 1;
        let direction = metric.solve(&grad);
        let slope = grad_dot(&grad, &direction); // = <g, M^-1 g> > 0
        if !(slope > 0.0) {
            break;
        }
        // spectral (BB1) trial step in the metric geometry, safeguarded below
        if let Some((d_prev, slope_prev, step_prev)) = &previous {
            let denom = slope_prev - grad_dot(d_prev, &grad);
            let bb = step_prev * slope_prev / denom;
            eta = if denom > 0.0 && bb.is_finite() {
                bb.clamp(1e-6, 1e6)
            } else {
                step_prev * 2.0
            };
        }
        let mut step = eta;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = step_path(&path, &direction, -step);
            let trial_energy = match discrete_energy(&trial, j1, j2) {
                Ok(e) => e.total,
                Err(_) => {
                    // a too-long step can push a segment past the branch cut
                    step *= 0.5;
                    continue;
                }
            };
            if trial_energy <= energy - ARMIJO_C * step * slope {
                accepted = Some((trial, trial_energy));
                break;
            }
            step *= 0.5;
        }
        let Some((new_path, new_energy)) = accepted else {
            break; // no admissible decrease; return best-so-far flagged
        };
        previous = Some((direction, slope, step));
        eta = step;
        path = if iterations % 64 == 0 {
            reproject(&new_path)?
        } else {
            new_path
        };
        energy = if iterations % 64 == 0 {
            discrete_energy(&path, j1, j2)?.total
        } else {
            new_energy
        };
        grad = energy_gradient(&path, j1, j2)?;
        converged = gradient_sup_norm(&grad) <= tol;
    }

    let final_norm2 = grad_dot(&grad, &grad);
    Ok((
        path,
        DirectStats {
            iterations,
            converged,
            final_gradient_norm: final_norm2.sqrt(),
        },
    ))
}

/// Fixed tridiagonal path-space metric: the kinetic Hessian at a constant
/// path plus a per-node diagonal estimate of the potential curvature.
/// Acts identically on every algebra coordinate.
struct SobolevMetric {
    /// LDL^T factors of the tridiagonal matrix.
    diag: Vec<f64>,
    lower: Vec<f64>,
    n_algebra: usize,
    dim: usize,
}

impl SobolevMetric {
    fn for_problem(j1: &JetField, j2: &JetField) -> Result<Self> {
        let nseg = j1.segments();
        let ds = j1.delta_s();
        let weights = j1.weights();
        let mut main = Vec::with_capacity(nseg + 1);
        for m in 0..=nseg {
            let a1 = crate::jets::inner_l(j1.node(m), j1.node(m), weights)?;
            let a2 = crate::jets::inner_l(j2.node(m), j2.node(m), weights)?;
            let curvature_scale = ds * (1e-6 + a1 + (a1 * a2).sqrt());
            let kinetic = if m == 0 || m == nseg { 1.0 } else { 2.0 } / ds;
            main.push(curvature_scale + kinetic);
        }
        let off = vec![-1.0 / ds; nseg];
        // LDL^T factorization of the tridiagonal (Thomas)
        let mut diag = main;
        let mut lower = off;
        for i in 0..nseg {
            lower[i] /= diag[i];
            diag[i + 1] -= lower[i] * lower[i] * diag[i];
        }
        let dim = j1.dim();
        Ok(Self {
            diag,
            lower,
            n_algebra: dim * (dim - 1) / 2,
            dim,
        })
    }

    /// M^-1 applied to a node-indexed gradient, coordinate by coordinate.
    fn solve(&self, grad: &[AlgebraElement]) -> Vec<AlgebraElement> {
        let len = grad.len();
        let mut coords: Vec<Vec<f64>> = (0..self.n_algebra).map(|_| vec![0.0; len]).collect();
        for (m, g) in grad.iter().enumerate() {
            for (c, v) in crate::liegroup::algebra_coords(g).into_iter().enumerate() {
                coords[c][m] = v;
            }
        }
        for x in coords.iter_mut() {
            // forward substitution, diagonal scale, back substitution
            for i in 1..len {
                x[i] -= self.lower[i - 1] * x[i - 1];
            }
            for i in 0..len {
                x[i] /= self.diag[i];
            }
            for i in (0..len - 1).rev() {
                x[i] -= self.lower[i] * x[i + 1];
            }
        }
        (0..len)
            .map(|m| {
                let c: Vec<f64> = coords.iter().map(|x| x[m]).collect();
                crate::liegroup::algebra_from_coords(self.dim, &c)
            })
            .collect()
    }
}

fn grad_dot(a: &[AlgebraElement], b: &[AlgebraElement]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| crate::liegroup::inner_algebra(x, y).unwrap())
        .sum()
}

fn step_path(path: &RotationPath, direction: &[AlgebraElement], scale: f64) -> RotationPath {
    let rotations = path
        .nodes()
        .iter()
        .zip(direction)
        .map(|(g, d)| g.compose(&exp_algebra(&d.scale(scale))))
        .collect();
    RotationPath::from_rotations_unchecked(rotations)
}

fn reproject(path: &RotationPath) -> Result<RotationPath> {
    let rotations = path
        .nodes()
        .iter()
        .map(|g| project_rotation(g.matrix()))
        .collect::<Result<Vec<_>>>()?;
    Ok(RotationPath::from_rotations_unchecked(rotations))
}

/// Pointwise orthogonal-Procrustes alignment of the source jets onto the
/// target jets, constrained to the proper component: node m carries the
/// rotation minimizing ||g A1_m - A2_m||_L. Returns None when the
/// alignment is degenerate or the resulting path is not admissible.
pub fn aligned_initial_path(j1: &JetField, j2: &JetField) -> Option<RotationPath> {
    let mut rotations = Vec::with_capacity(j1.segments() + 1);
    for m in 0..=j1.segments() {
        let target = crate::jets::flat(j2.node(m), j1.weights()).ok()?;
        let cross = target * j1.node(m).transpose();
        rotations.push(proper_polar(&cross)?);
    }
    RotationPath::try_new(rotations).ok()
}

/// Best proper rotation factor of a (possibly rank-deficient) matrix.
fn proper_polar(m: &DMatrix<f64>) -> Option<Rotation> {
    let n = m.nrows();
    let svd = m.clone().svd(true, true);
    let u = svd.u?;
    let v_t = svd.v_t?;
    let mut d = DMatrix::identity(n, n);
    if (&u * &v_t).determinant() < 0.0 {
        d[(n - 1, n - 1)] = -1.0;
    }
    Rotation::try_new(u * d * v_t).ok()
}

/// Single constant rotation minimizing the total potential, by Procrustes
/// on the summed cross-correlation of the jet fields.
fn best_constant_rotation(j1: &JetField, j2: &JetField) -> Option<Rotation> {
    let n = j1.dim();
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for m in 0..=j1.segments() {
        let target = crate::jets::flat(j2.node(m), j1.weights()).ok()?;
        acc += target * j1.node(m).transpose();
    }
    proper_polar(&acc)
}

struct SolveOutcome {
    critical_points: Vec<CriticalPoint>,
    direct_best: Option<(RotationPath, f64)>,
    direct_iterations: usize,
}

/// Both solver routes on prepared jet fields; `warm_paths` are extra direct
/// inits (used by the lambda sweep for continuation).
fn solve_both(
    j1: &JetField,
    j2: &JetField,
    config: &DistanceConfig,
    warm_paths: &[RotationPath],
    constants: bool,
) -> Result<SolveOutcome> {
    let problem = ShootingProblem::new(j1.clone(), j2.clone())?;
    let shooting_config = config.shooting();
    let starts = default_starts(problem.dim(), config.starts, config.include_improper);
    let mut critical_points = match solve_bvp_multistart(&problem, &starts, &shooting_config) {
        Ok(points) => points,
        Err(Error::AllStartsFailed) => Vec::new(),
        Err(e) => return Err(e),
    };

    // direct descent inits: constant paths, the aligned path, warm paths,
    // and every critical point found so far
    let len = problem.segments() + 1;
    let mut inits: Vec<RotationPath> = Vec::new();
    if constants {
        inits.push(RotationPath::constant(Rotation::identity(problem.dim()), len)?);
        if let Some(best_const) = best_constant_rotation(j1, j2) {
            inits.push(RotationPath::constant(best_const, len)?);
        }
        if config.include_improper {
            inits.push(RotationPath::constant(
                Rotation::reflection(problem.dim()),
                len,
            )?);
        }
    }
    if let Some(aligned) = aligned_initial_path(j1, j2) {
        inits.push(aligned);
    }
    inits.extend(warm_paths.iter().cloned());
    inits.extend(critical_points.iter().map(|cp| cp.path.clone()));

    let mut direct_best: Option<(RotationPath, f64)> = None;
    let mut direct_iterations = 0;
    for init in &inits {
        let Ok((path, stats)) =
            minimize_direct(init, j1, j2, config.direct_tol, config.max_direct_iter)
        else {
            continue;
        };
        direct_iterations += stats.iterations;
        let e = discrete_energy(&path, j1, j2)?.total;
        if direct_best.as_ref().is_none_or(|(_, best)| e < *best) {
            direct_best = Some((path, e));
        }
    }

    // cross-seed: certify a strictly better direct minimum through the
    // shooting solver so the winner carries a residual. Newton from the
    // candidate's initial rotation can jump out of an exponentially narrow
    // basin, so a bracketing fallback covers the planar case.
    if let Some((path, e_direct)) = &direct_best {
        let shooting_best = critical_points.first().map(|cp| cp.energy.total);
        let needs_seed = shooting_best
            .is_none_or(|e| *e_direct < e - AGREEMENT_RTOL * e.abs().max(1.0));
        if needs_seed {
            let matches = |cp: &CriticalPoint| {
                (cp.energy.total - e_direct).abs() <= AGREEMENT_RTOL * e_direct.abs().max(1.0)
            };
            let mut seeded = solve_shooting(&problem, path.node(0), &shooting_config).ok();
            if !seeded.as_ref().is_some_and(matches) {
                if let Some(cp) = bracket_from_path(&problem, path, &shooting_config) {
                    if matches(&cp) || seeded.is_none() {
                        seeded = Some(cp);
                    }
                }
            }
            if let Some(cp) = seeded {
                merge_point(&mut critical_points, cp, starts.len());
            }
        }
    }
    critical_points.sort_by(|a, b| a.energy.total.partial_cmp(&b.energy.total).unwrap());
    Ok(SolveOutcome {
        critical_points,
        direct_best,
        direct_iterations,
    })
}

/// Planar fallback: scan escalating symmetric grids around the angle of a
/// candidate path's initial rotation for a residual sign change, then
/// bisect. Catches roots whose Newton basins are exponentially narrow.
fn bracket_from_path(
    problem: &ShootingProblem,
    path: &RotationPath,
    config: &ShootingConfig,
) -> Option<CriticalPoint> {
    if problem.dim() != 2 {
        return None;
    }
    let theta0 = path.theta_lift().ok()?[0];
    let mut best: Option<CriticalPoint> = None;
    let mut width = 1e-8;
    while width <= 2e-3 {
        let offsets: Vec<f64> = (-8..=8).map(|i| theta0 + width * i as f64 / 8.0).collect();
        for pair in offsets.windows(2) {
            let Ok(cp) = solve_theta_2d_bisect(problem, (pair[0], pair[1]), config) else {
                continue;
            };
            if best
                .as_ref()
                .is_none_or(|b| cp.energy.total < b.energy.total)
            {
                best = Some(cp);
            }
        }
        if best.is_some() {
            return best;
        }
        width *= 8.0;
    }
    None
}

fn merge_point(points: &mut Vec<CriticalPoint>, mut cp: CriticalPoint, start_index: usize) {
    cp.start_index = start_index;
    match points
        .iter_mut()
        .find(|other| other.path.sup_distance(&cp.path) < crate::bvp::DEDUP_SUP_DISTANCE)
    {
        Some(existing) => {
            if cp.energy.total < existing.energy.total {
                *existing = cp;
            }
        }
        None => points.push(cp),
    }
}

/// d(c1, c2): runs both routes and returns the lower envelope with
/// provenance. Errors only propagate when both routes fail.
pub fn distance(c1: &Curve, c2: &Curve, config: &DistanceConfig) -> Result<DistanceResult> {
    let started = Instant::now();
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch(format!(
            "curves live in different dimensions: {} vs {}",
            c1.dim(),
            c2.dim()
        )));
    }
    if config.weights.order() != config.k {
        return Err(Error::InvalidWeights(format!(
            "{} weights for jet order {}",
            config.weights.order(),
            config.k
        )));
    }
    let j1 = jet_field(c1, config.k, config.segments, &config.weights)?;
    let j2 = jet_field(c2, config.k, config.segments, &config.weights)?;
    let outcome = solve_both(&j1, &j2, config, &[], true)?;
    finish_result(&j1, &j2, outcome, started)
}

fn finish_result(
    j1: &JetField,
    j2: &JetField,
    outcome: SolveOutcome,
    started: Instant,
) -> Result<DistanceResult> {
    let shooting_best = outcome.critical_points.first();
    let direct_best = outcome.direct_best.as_ref();
    let (best_path, method) = match (shooting_best, direct_best) {
        (None, None) => return Err(Error::AllStartsFailed),
        (Some(cp), None) => (cp.path.clone(), Method::Shooting),
        (None, Some((p, _))) => (p.clone(), Method::Direct),
        (Some(cp), Some((p, e_direct))) => {
            let e_shoot = cp.energy.total;
            let agree =
                (e_shoot - e_direct).abs() <= AGREEMENT_RTOL * e_shoot.abs().max(e_direct.abs()) + 1e-12;
            if agree {
                // prefer the certified path amongst the two equal minima
                (cp.path.clone(), Method::Agree)
            } else if *e_direct < e_shoot {
                (p.clone(), Method::Direct)
            } else {
                (cp.path.clone(), Method::Shooting)
            }
        }
    };
    let energy = discrete_energy(&best_path, j1, j2)?;
    let grad = energy_gradient(&best_path, j1, j2)?;
    let methods_agree = match (shooting_best, direct_best) {
        (Some(cp), Some((_, e_direct))) => Some(
            (cp.energy.total - e_direct).abs()
                <= AGREEMENT_RTOL * cp.energy.total.abs().max(e_direct.abs()) + 1e-12,
        ),
        _ => None,
    };
    let relative_gap = match (shooting_best, direct_best) {
        (Some(cp), Some((_, e_direct))) => Some(
            (cp.energy.total - e_direct).abs()
                / cp.energy.total.abs().max(e_direct.abs()).max(1e-300),
        ),
        _ => None,
    };
    Ok(DistanceResult {
        value: energy.total,
        best_path,
        method,
        diagnostics: Diagnostics {
            gradient_sup_norm: gradient_sup_norm(&grad),
            best_residual: shooting_best.map(|cp| cp.residual_norm),
            methods_agree,
            relative_gap,
            direct_iterations: outcome.direct_iterations,
            wall_time_ms: started.elapsed().as_secs_f64() * 1e3,
        },
        energy,
        critical_points: outcome.critical_points,
    })
}

/// One row of a lambda_1 sweep.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub lambda1: f64,
    pub energy: Option<f64>,
    pub winding: Option<i64>,
    pub branch_count: usize,
}

/// Sweep lambda_1 over the given values (ascending recommended), reusing
/// each row's best path as a warm start for the next; rows that fail keep
/// `energy: None` and the sweep continues.
pub fn sweep_lambda(
    c1: &Curve,
    c2: &Curve,
    lambdas: &[f64],
    config: &DistanceConfig,
) -> Result<Vec<SweepRow>> {
    if c1.dim() != c2.dim() {
        return Err(Error::DimensionMismatch(
            "curves live in different dimensions".to_string(),
        ));
    }
    let mut rows = Vec::with_capacity(lambdas.len());
    let mut warm: Option<RotationPath> = None;
    for (i, &lambda1) in lambdas.iter().enumerate() {
        let row_config = match config.clone().with_lambda1(lambda1) {
            Ok(c) => c,
            Err(_) => {
                rows.push(SweepRow {
                    lambda1,
                    energy: None,
                    winding: None,
                    branch_count: 0,
                });
                continue;
            }
        };
        let j1 = jet_field(c1, row_config.k, row_config.segments, &row_config.weights)?;
        let j2 = jet_field(c2, row_config.k, row_config.segments, &row_config.weights)?;
        let warm_paths: Vec<RotationPath> = warm.iter().cloned().collect();
        match solve_both(&j1, &j2, &row_config, &warm_paths, i == 0) {
            Ok(outcome) => match finish_result(&j1, &j2, outcome, Instant::now()) {
                Ok(result) => {
                    warm = Some(result.best_path.clone());
                    rows.push(SweepRow {
                        lambda1,
                        energy: Some(result.value),
                        winding: result.winding(),
                        branch_count: result.critical_points.len(),
                    });
                }
                Err(_) => rows.push(SweepRow {
                    lambda1,
                    energy: None,
                    winding: None,
                    branch_count: 0,
                }),
            },
            Err(_) => rows.push(SweepRow {
                lambda1,
                energy: None,
                winding: None,
                branch_count: 0,
            }),
        }
    }
    Ok(rows)
}
