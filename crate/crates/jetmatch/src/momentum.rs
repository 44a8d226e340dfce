//! The diamond operator: the cotangent-lift momentum map of the rotation
//! action on jet space, with the flat map fused in (callers pass raw jet
//! matrices plus weights, never pre-flattened duals).

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::jets::{flat, inner_l, Weights};
use crate::liegroup::AlgebraElement;

/// diamond(A, B) = (A L B^T - B L A^T) / 2, the momentum pairing
/// tr(diamond(A, B) Omega) = <B, Omega A>_L for every skew Omega.
pub fn diamond(a: &DMatrix<f64>, b: &DMatrix<f64>, weights: &Weights) -> Result<AlgebraElement> {
    if a.shape() != b.shape() || a.ncols() != weights.order() {
        return Err(Error::DimensionMismatch(format!(
            "diamond: {:?} vs {:?} with {} weights",
            a.shape(),
            b.shape(),
            weights.order()
        )));
    }
    let bl = flat(b, weights)?;
    let albt = a * bl.transpose();
    AlgebraElement::new(albt)
}

/// Test utility exposing the defining property: returns the dual pairing
/// tr(diamond(A, B) Omega) next to <B, Omega A>_L; the two must agree.
pub fn diamond_pairing_check(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    weights: &Weights,
    omega: &AlgebraElement,
) -> Result<(f64, f64)> {
    if omega.dim() != a.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "pairing check: omega is {0}x{0} but jets are {1}-dimensional",
            omega.dim(),
            a.nrows()
        )));
    }
    let d = diamond(a, b, weights)?;
    let dual = (d.matrix() * omega.matrix()).trace();
    let action = inner_l(b, &(omega.matrix() * a), weights)?;
    Ok((dual, action))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::{vee2, vee3};
    use crate::testutil::{random_jet, random_skew};
    use approx::assert_abs_diff_eq;
    use nalgebra::{DMatrix, Vector3};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn unit_vectors_2d() {
        // A = e1, B = e2, lambda = 1: (A B^T - B A^T)/2 = [[0, 1/2], [-1/2, 0]]
        let w = Weights::new(vec![1.0]).unwrap();
        let e1 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let e2 = DMatrix::from_column_slice(2, 1, &[0.0, 1.0]);
        let d = diamond(&e1, &e2, &w).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, -0.5, 0.0]);
        assert_abs_diff_eq!(d.matrix(), &expected, epsilon = 1e-15);
    }

    #[test]
    fn equal_arguments_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let w = Weights::new(vec![1.0, 0.5]).unwrap();
        let a = random_jet(&mut rng, 3, 2, 2.0);
        assert!(diamond(&a, &a, &w).unwrap().norm() < 1e-14);
    }

    #[test]
    fn determinant_formula_2d() {
        // vee2(diamond(A, B)) = -(lambda_1/2) det[A B] for single-column jets
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let w = Weights::new(vec![1.7]).unwrap();
        for _ in 0..25 {
            let a = random_jet(&mut rng, 2, 1, 2.0);
            let b = random_jet(&mut rng, 2, 1, 2.0);
            let det = a[(0, 0)] * b[(1, 0)] - a[(1, 0)] * b[(0, 0)];
            let d = diamond(&a, &b, &w).unwrap();
            assert_abs_diff_eq!(vee2(&d).unwrap(), -0.5 * 1.7 * det, epsilon = 1e-13);
        }
    }

    #[test]
    fn cross_product_formula_3d() {
        // vee3(diamond(A, B)) = -(lambda_1/2) A x B for single-column jets
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = Weights::new(vec![0.8]).unwrap();
        for _ in 0..25 {
            let a = random_jet(&mut rng, 3, 1, 2.0);
            let b = random_jet(&mut rng, 3, 1, 2.0);
            let av = Vector3::new(a[(0, 0)], a[(1, 0)], a[(2, 0)]);
            let bv = Vector3::new(b[(0, 0)], b[(1, 0)], b[(2, 0)]);
            let d = diamond(&a, &b, &w).unwrap();
            let err = (vee3(&d).unwrap() - av.cross(&bv) * (-0.5 * 0.8)).norm();
            assert!(err < 1e-13, "err = {err}");
        }
    }

    #[test]
    fn pairing_check_agrees_and_degenerates() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let w = Weights::new(vec![1.2, 0.0, 0.4]).unwrap();
        for _ in 0..100 {
            let a = random_jet(&mut rng, 3, 3, 2.0);
            let b = random_jet(&mut rng, 3, 3, 2.0);
            let omega = random_skew(&mut rng, 3, 2.0);
            let (dual, action) = diamond_pairing_check(&a, &b, &w, &omega).unwrap();
            assert_abs_diff_eq!(dual, action, epsilon = 1e-12);
        }
        // Omega = 0 and A = 0 kill both sides
        let a = random_jet(&mut rng, 3, 3, 2.0);
        let b = random_jet(&mut rng, 3, 3, 2.0);
        let (d0, a0) =
            diamond_pairing_check(&a, &b, &w, &AlgebraElement::zeros(3)).unwrap();
        assert_eq!((d0, a0), (0.0, 0.0));
        let zero = DMatrix::zeros(3, 3);
        let omega = random_skew(&mut rng, 3, 2.0);
        let (d1, a1) = diamond_pairing_check(&zero, &b, &w, &omega).unwrap();
        assert_abs_diff_eq!(d1, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a1, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn antisymmetry_and_bilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let w = Weights::new(vec![1.0, 0.3]).unwrap();
        for _ in 0..50 {
            let a = random_jet(&mut rng, 3, 2, 2.0);
            let b = random_jet(&mut rng, 3, 2, 2.0);
            let c = random_jet(&mut rng, 3, 2, 2.0);
            let alpha = rng.random_range(-2.0..2.0);
            let dab = diamond(&a, &b, &w).unwrap();
            let dba = diamond(&b, &a, &w).unwrap();
            assert!(dab.add(&dba).norm() < 1e-13);
            // linear in the first slot
            let lhs = diamond(&(&a * alpha + &c), &b, &w).unwrap();
            let rhs = dab.scale(alpha).add(&diamond(&c, &b, &w).unwrap());
            assert!(lhs.sub(&rhs).norm() < 1e-12);
            // linear in the second slot
            let lhs = diamond(&a, &(&b * alpha + &c), &w).unwrap();
            let rhs = dab.scale(alpha).add(&diamond(&a, &c, &w).unwrap());
            assert!(lhs.sub(&rhs).norm() < 1e-12);
        }
    }
}
