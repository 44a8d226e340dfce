//! Jet fields of curves on a uniform grid over [0, 1], the weighted inner
//! product on the jet space of n x k matrices, and the induced flat map.

use nalgebra::DMatrix;

use crate::curves::{Curve, MAX_JET_ORDER};
use crate::error::{Error, Result};

/// Jet-space weights (lambda_1, ..., lambda_k); lambda_1 > 0, the rest
/// nonnegative. Without a positive first-order weight the induced distance
/// loses definiteness.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    lambda: Vec<f64>,
}

impl Weights {
    pub fn new(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::InvalidWeights("weights must be nonempty".to_string()));
        }
        if !(lambda[0] > 0.0) {
            return Err(Error::InvalidWeights(format!(
                "lambda_1 must be positive, got {}",
                lambda[0]
            )));
        }
        if lambda.iter().any(|&l| l < 0.0 || !l.is_finite()) {
            return Err(Error::InvalidWeights(
                "weights must be finite and nonnegative".to_string(),
            ));
        }
        Ok(Self { lambda })
    }

    /// The default weights (1, 0, ..., 0) for jet order k.
    pub fn first_order(k: usize) -> Self {
        let mut lambda = vec![0.0; k];
        lambda[0] = 1.0;
        Self { lambda }
    }

    pub fn order(&self) -> usize {
        self.lambda.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.lambda
    }
}

/// Weighted inner product sum_i lambda_i <a_i, b_i> = tr(L A^T B) on n x k
/// jet matrices.
pub fn inner_l(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &Weights) -> Result<f64> {
    if a.shape() != b.shape() || a.ncols() != weights.order() {
        return Err(Error::DimensionMismatch(format!(
            "inner_l: {:?} vs {:?} with {} weights",
            a.shape(),
            b.shape(),
            weights.order()
        )));
    }
    let mut acc = 0.0;
    for (i, &l) in weights.as_slice().iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        acc += l * a.column(i).dot(&b.column(i));
    }
    Ok(acc)
}

/// The flat map A -> A L (scale column i by lambda_i).
pub fn flat(a: &DMatrix<f64>, weights: &Weights) -> Result<DMatrix<f64>> {
    if a.ncols() != weights.order() {
        return Err(Error::DimensionMismatch(format!(
            "flat: {} columns vs {} weights",
            a.ncols(),
            weights.order()
        )));
    }
    let mut out = a.clone();
    for (i, &l) in weights.as_slice().iter().enumerate() {
        out.column_mut(i).scale_mut(l);
    }
    Ok(out)
}

/// Per-node jets of a curve on the uniform grid s_m = m/N, m = 0..N,
/// plus exact (analytic) or interpolated (sampled) values at segment
/// midpoints for use by integrators.
#[derive(Debug, Clone, PartialEq)]
pub struct JetField {
    nodes: Vec<DMatrix<f64>>,
    midpoints: Vec<DMatrix<f64>>,
    weights: Weights,
}

impl JetField {
    pub fn dim(&self) -> usize {
        self.nodes[0].nrows()
    }

    pub fn order(&self) -> usize {
        self.nodes[0].ncols()
    }

    /// Number of grid segments N (nodes are 0..=N).
    pub fn segments(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn delta_s(&self) -> f64 {
        1.0 / self.segments() as f64
    }

    pub fn node(&self, m: usize) -> &DMatrix<f64> {
        &self.nodes[m]
    }

    pub fn midpoint(&self, m: usize) -> &DMatrix<f64> {
        &self.midpoints[m]
    }

    pub fn weights(&self) -> &Weights {
        &self.weights
    }

    /// Jet at arbitrary s by linear interpolation between grid nodes.
    pub fn value_at(&self, s: f64) -> DMatrix<f64> {
        let nseg = self.segments();
        let x = s.clamp(0.0, 1.0) * nseg as f64;
        let i = (x.floor() as usize).min(nseg - 1);
        let t = x - i as f64;
        &self.nodes[i] * (1.0 - t) + &self.nodes[i + 1] * t
    }

    /// Shared-grid compatibility for energy evaluation.
    pub fn compatible_with(&self, other: &JetField) -> bool {
        self.dim() == other.dim()
            && self.order() == other.order()
            && self.segments() == other.segments()
            && self.weights == other.weights
    }
}

/// Build the (1, k)-jet field of a curve on an N-segment grid.
///
/// Analytic curves use exact derivative formulas at nodes and midpoints;
/// sampled curves use second-order central differences (one-sided of the
/// same order at the two ends) and midpoint interpolation.
pub fn jet_field(c: &Curve, k: usize, n_segments: usize, weights: &Weights) -> Result<JetField> {
    if k == 0 || k > MAX_JET_ORDER {
        return Err(Error::UnsupportedOrder {
            k,
            max: MAX_JET_ORDER,
        });
    }
    if weights.order() != k {
        return Err(Error::InvalidWeights(format!(
            "{} weights for jet order {k}",
            weights.order()
        )));
    }
    if n_segments < 1 {
        return Err(Error::GridTooCoarse("need at least one segment".to_string()));
    }
    let n = c.dim();
    let nodes;
    let midpoints;
    if c.is_analytic() {
        nodes = (0..=n_segments)
            .map(|m| analytic_jet(c, m as f64 / n_segments as f64, n, k))
            .collect::<Result<Vec<_>>>()?;
        midpoints = (0..n_segments)
            .map(|m| analytic_jet(c, (m as f64 + 0.5) / n_segments as f64, n, k))
            .collect::<Result<Vec<_>>>()?;
    } else {
        let values = grid_values(c, n_segments)?;
        if n_segments < k + 1 {
            return Err(Error::GridTooCoarse(format!(
                "order-{k} jets need at least {} grid segments",
                k + 1
            )));
        }
        // iterated difference grids: layer i approximates the i-th derivative
        let mut layers: Vec<Vec<nalgebra::DVector<f64>>> = vec![values];
        for _ in 0..k {
            let prev = layers.last().unwrap();
            layers.push(difference_grid(prev, n_segments));
        }
        nodes = (0..=n_segments)
            .map(|m| {
                let mut a = DMatrix::zeros(n, k);
                for i in 0..k {
                    a.set_column(i, &layers[i + 1][m]);
                }
                a
            })
            .collect();
        midpoints = (0..n_segments)
            .map(|m| (&nodes[m] + &nodes[m + 1]) * 0.5)
            .collect();
    }
    Ok(JetField {
        nodes,
        midpoints,
        weights: weights.clone(),
    })
}

fn analytic_jet(c: &Curve, s: f64, n: usize, k: usize) -> Result<DMatrix<f64>> {
    let mut a = DMatrix::zeros(n, k);
    for i in 1..=k {
        a.set_column(i - 1, &c.derivative(s, i)?);
    }
    Ok(a)
}

/// Grid values of a sampled curve; an M-segment source matches an N-segment
/// request when M is a multiple of N (decimation stays exact).
fn grid_values(c: &Curve, n_segments: usize) -> Result<Vec<nalgebra::DVector<f64>>> {
    let count = c
        .sample_count()
        .expect("grid_values is only called for sampled curves");
    let source_segments = count - 1;
    if source_segments % n_segments != 0 {
        return Err(Error::GridTooCoarse(format!(
            "sampled curve has {source_segments} segments, cannot place on a {n_segments}-segment grid"
        )));
    }
    let stride = source_segments / n_segments;
    Ok((0..=n_segments)
        .map(|m| c.value((m * stride) as f64 / source_segments as f64))
        .collect())
}

/// Second-order differences: central in the interior, 3-point one-sided at
/// the ends.
fn difference_grid(
    values: &[nalgebra::DVector<f64>],
    n_segments: usize,
) -> Vec<nalgebra::DVector<f64>> {
    let h = 1.0 / n_segments as f64;
    let last = n_segments;
    (0..=n_segments)
        .map(|m| {
            if m == 0 {
                (&values[0] * -3.0 + &values[1] * 4.0 - &values[2]) / (2.0 * h)
            } else if m == last {
                (&values[last] * 3.0 - &values[last - 1] * 4.0 + &values[last - 2]) / (2.0 * h)
            } else {
                (&values[m + 1] - &values[m - 1]) / (2.0 * h)
            }
        })
        .collect()
}
