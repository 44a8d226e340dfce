//! Dense numerics for SO(n) and its Lie algebra of skew-symmetric matrices:
//! exponential and principal logarithm, orthogonal projection, brackets,
//! inner products, and the closed-form n = 2 / n = 3 coordinate maps.

use nalgebra::{DMatrix, Vector3};

use crate::error::{Error, Result};

/// Frobenius tolerance for the orthogonality invariant R^T R = I.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

/// Rotation angles at or beyond `PI - BRANCH_CUT_MARGIN` are rejected by the
/// principal logarithm.
pub const BRANCH_CUT_MARGIN: f64 = 1e-8;

/// Connected component of O(n) an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    /// det = +1
    Proper,
    /// det = -1
    Improper,
}

/// An orthogonal matrix with its component flag.
///
/// Construction validates orthogonality to [`ORTHOGONALITY_TOL`] (Frobenius).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    m: DMatrix<f64>,
    component: Component,
}

impl Rotation {
    pub fn try_new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "rotation must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let n = m.nrows();
        let gram_err = (m.transpose() * &m - DMatrix::identity(n, n)).norm();
        if gram_err > ORTHOGONALITY_TOL {
            return Err(Error::DimensionMismatch(format!(
                "matrix is not orthogonal: ||R^T R - I|| = {gram_err:.3e}"
            )));
        }
        let component = if m.determinant() > 0.0 {
            Component::Proper
        } else {
            Component::Improper
        };
        Ok(Self { m, component })
    }

    /// Caller guarantees orthogonality (e.g. products of validated rotations).
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>, component: Component) -> Self {
        Self { m, component }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            m: DMatrix::identity(n, n),
            component: Component::Proper,
        }
    }

    /// diag(-1, 1, .., 1); the canonical representative of the det = -1 component.
    pub fn reflection(n: usize) -> Self {
        let mut m = DMatrix::identity(n, n);
        m[(0, 0)] = -1.0;
        Self {
            m,
            component: Component::Improper,
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn component(&self) -> Component {
        self.component
    }

    /// The inverse rotation.
    pub fn transpose(&self) -> Rotation {
        Self {
            m: self.m.transpose(),
            component: self.component,
        }
    }

    /// Group product self * other.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let component = if self.component == other.component {
            Component::Proper
        } else {
            Component::Improper
        };
        Self {
            m: &self.m * &other.m,
            component,
        }
    }

    /// Frobenius distance to another element of the same dimension.
    pub fn frobenius_distance(&self, other: &Rotation) -> f64 {
        (&self.m - &other.m).norm()
    }
}

/// A skew-symmetric matrix; storage is the full matrix, skew-symmetrized on
/// construction via (M - M^T)/2.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    m: DMatrix<f64>,
}

impl AlgebraElement {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "algebra element must be square and nonempty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let skew = (&m - m.transpose()) * 0.5;
        Ok(Self { m: skew })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            m: DMatrix::zeros(n, n),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    /// Norm induced by the inner product tr(A^T B).
    pub fn norm(&self) -> f64 {
        self.m.norm()
    }

    pub fn scale(&self, a: f64) -> AlgebraElement {
        Self { m: &self.m * a }
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        Self {
            m: &self.m + &other.m,
        }
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        Self {
            m: &self.m - &other.m,
        }
    }

    /// Conjugation g X g^-1, again skew.
    pub fn conjugate_by(&self, g: &Rotation) -> AlgebraElement {
        Self {
            m: g.matrix() * &self.m * g.matrix().transpose(),
        }
    }
}

/// Matrix exponential of a skew-symmetric matrix; always lands in SO(n).
///
/// Closed forms for n = 2 and n = 3 (Rodrigues), scaling-and-squaring Pade
/// for larger n.
pub fn exp_algebra(omega: &AlgebraElement) -> Rotation {
    let n = omega.dim();
    let m = match n {
        2 => {
            let theta = omega.matrix()[(1, 0)];
            rotation2(theta)
        }
        3 => {
            let w = vee3(omega).expect("3x3 algebra element");
            rodrigues(&w)
        }
        _ => omega.matrix().clone().exp(),
    };
    Rotation::from_matrix_unchecked(m, Component::Proper)
}

fn rotation2(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
}

fn rodrigues(w: &Vector3<f64>) -> DMatrix<f64> {
    let theta2 = w.norm_squared();
    let theta = theta2.sqrt();
    // a = sin(theta)/theta, b = (1 - cos(theta))/theta^2
    let (a, b) = if theta < 1e-4 {
        (
            1.0 - theta2 / 6.0 + theta2 * theta2 / 120.0,
            0.5 - theta2 / 24.0 + theta2 * theta2 / 720.0,
        )
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta2)
    };
    let k = hat3(w).matrix().clone();
    let k2 = &k * &k;
    DMatrix::identity(3, 3) + k * a + k2 * b
}

/// Principal matrix logarithm of a rotation in the identity component.
///
/// Errors with [`Error::AngleAtCut`] when any rotation angle reaches
/// `PI - BRANCH_CUT_MARGIN`, and with [`Error::ImproperComponent`] for
/// det = -1 input.
pub fn log_rotation(r: &Rotation) -> Result<AlgebraElement> {
    if r.component() == Component::Improper {
        return Err(Error::ImproperComponent);
    }
    let n = r.dim();
    match n {
        1 => Ok(AlgebraElement::zeros(1)),
        2 => {
            let theta = r.matrix()[(1, 0)].atan2(r.matrix()[(0, 0)]);
            check_angle(theta.abs())?;
            Ok(hat2(theta))
        }
        3 => {
            let tr = r.matrix().trace();
            let c = ((tr - 1.0) * 0.5).clamp(-1.0, 1.0);
            let theta = c.acos();
            check_angle(theta)?;
            // theta/(2 sin theta), series near zero
            let f = if theta < 1e-4 {
                0.5 + theta * theta / 12.0 + 7.0 * theta.powi(4) / 720.0
            } else {
                theta / (2.0 * theta.sin())
            };
            let s = r.matrix() - r.matrix().transpose();
            AlgebraElement::new(s * f)
        }
        _ => log_via_schur(r),
    }
}

fn check_angle(theta: f64) -> Result<()> {
    if theta >= std::f64::consts::PI - BRANCH_CUT_MARGIN {
        Err(Error::AngleAtCut { angle: theta })
    } else {
        Ok(())
    }
}

/// Real Schur form of an orthogonal matrix is block-diagonal with 2x2
/// rotation blocks and +-1 entries; take the log blockwise.
fn log_via_schur(r: &Rotation) -> Result<AlgebraElement> {
    let n = r.dim();
    let schur = nalgebra::linalg::Schur::new(r.matrix().clone());
    let (q, t) = schur.unpack();
    let mut log_t = DMatrix::<f64>::zeros(n, n);
    let mut i = 0;
    while i < n {
        let is_pair = i + 1 < n && t[(i + 1, i)].abs() > 1e-8;
        if is_pair {
            let cos_t = 0.5 * (t[(i, i)] + t[(i + 1, i + 1)]);
            let sin_t = 0.5 * (t[(i + 1, i)] - t[(i, i + 1)]);
            let theta = sin_t.atan2(cos_t);
            check_angle(theta.abs())?;
            log_t[(i, i + 1)] = -theta;
            log_t[(i + 1, i)] = theta;
            i += 2;
        } else {
            if t[(i, i)] < 0.0 {
                // eigenvalue -1: angle exactly pi
                return Err(Error::AngleAtCut {
                    angle: std::f64::consts::PI,
                });
            }
            i += 1;
        }
    }
    AlgebraElement::new(&q * log_t * q.transpose())
}

/// The inner product tr(A^T B) = -tr(A B) on skew-symmetric matrices.
pub fn inner_algebra(a: &AlgebraElement, b: &AlgebraElement) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "algebra inner product: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.matrix().dot(b.matrix()))
}

/// Lie bracket AB - BA.
pub fn bracket(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "bracket: {} vs {}",
            a.dim(),
            b.dim()
        )));
    }
    AlgebraElement::new(a.matrix() * b.matrix() - b.matrix() * a.matrix())
}

/// so(2) coordinate map: omega -> [[0, -omega], [omega, 0]].
pub fn hat2(omega: f64) -> AlgebraElement {
    AlgebraElement {
        m: DMatrix::from_row_slice(2, 2, &[0.0, -omega, omega, 0.0]),
    }
}

pub fn vee2(a: &AlgebraElement) -> Result<f64> {
    if a.dim() != 2 {
        return Err(Error::DimensionMismatch(format!(
            "vee2 expects 2x2, got {}x{}",
            a.dim(),
            a.dim()
        )));
    }
    Ok(a.matrix()[(1, 0)])
}

/// so(3) coordinate map with the cross-product convention
/// hat3(u) v = u x v, so that [hat3(u), hat3(v)] = hat3(u x v).
pub fn hat3(w: &Vector3<f64>) -> AlgebraElement {
    AlgebraElement {
        m: DMatrix::from_row_slice(
            3,
            3,
            &[0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0],
        ),
    }
}

pub fn vee3(a: &AlgebraElement) -> Result<Vector3<f64>> {
    if a.dim() != 3 {
        return Err(Error::DimensionMismatch(format!(
            "vee3 expects 3x3, got {}x{}",
            a.dim(),
            a.dim()
        )));
    }
    let m = a.matrix();
    Ok(Vector3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)]))
}

/// Nearest orthogonal matrix (polar factor via SVD); keeps the component of
/// sign(det M). Errors on (nearly) singular input.
pub fn project_rotation(m: &DMatrix<f64>) -> Result<Rotation> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::DimensionMismatch(format!(
            "projection expects a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-12 * smax.max(1e-300)) {
        return Err(Error::SingularMatrix);
    }
    let u = svd.u.ok_or(Error::SingularMatrix)?;
    let v_t = svd.v_t.ok_or(Error::SingularMatrix)?;
    let p = u * v_t;
    let component = if p.determinant() > 0.0 {
        Component::Proper
    } else {
        Component::Improper
    };
    Ok(Rotation::from_matrix_unchecked(p, component))
}

/// Orthonormal-direction basis of the skew matrices: E_ab = (e_a e_b^T -
/// e_b e_a^T)/sqrt(2) for a < b, flattened in row-major pair order.
pub fn algebra_basis(n: usize) -> Vec<AlgebraElement> {
    let mut basis = Vec::with_capacity(n * (n - 1) / 2);
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..n {
        for b in (a + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(a, b)] = -inv_sqrt2;
            m[(b, a)] = inv_sqrt2;
            basis.push(AlgebraElement { m });
        }
    }
    basis
}

/// Coordinates of `a` in [`algebra_basis`] order.
pub fn algebra_coords(a: &AlgebraElement) -> Vec<f64> {
    let n = a.dim();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut coords = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            coords.push(a.matrix()[(j, i)] * sqrt2);
        }
    }
    coords
}

/// Inverse of [`algebra_coords`].
pub fn algebra_from_coords(n: usize, coords: &[f64]) -> AlgebraElement {
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::zeros(n, n);
    let mut idx = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            m[(j, i)] = coords[idx] * inv_sqrt2;
            m[(i, j)] = -coords[idx] * inv_sqrt2;
            idx += 1;
        }
    }
    AlgebraElement { m }
}
