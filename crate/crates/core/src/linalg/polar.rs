use num_complex::Complex64;

use super::{adjoint_matmul, identity, matmul, ComplexMatrix};

/// Unitary factor of a polar decomposition `a = V·|a|`.
#[derive(Debug, Clone)]
pub struct Polar {
    pub unitary: ComplexMatrix,
    /// Dimension of `ker a` on which `V` was completed rather than determined
    /// by `a`. Zero for invertible input.
    pub completed_dim: usize,
}

/// Relative singular-value cutoff below which a direction counts as kernel.
const RANK_CUTOFF: f64 = 1e-12;

/// Unitary `V` with `a = V·|a|`.
///
/// On the range of `|a|` the factor is `U_r V_r*` from the SVD and is unique.
/// When `a` is singular, `V` is completed by mapping an orthonormal basis of
/// `ker a` onto one of `ker a*`; both bases come from Gram–Schmidt on the
/// kernel-projected standard basis vectors taken in index order, so the
/// completion depends only on `a` and not on the SVD's sign choices.
///
/// Inputs already close to unitary skip the SVD and use the Newton–Schulz
/// iteration, which converges to the same factor.
pub fn polar_unitary(a: &ComplexMatrix) -> Polar {
    let n = a.nrows();
    if n == 0 {
        return Polar {
            unitary: ComplexMatrix::zeros(0, 0),
            completed_dim: 0,
        };
    }
    if let Some(unitary) = newton_schulz(a) {
        return Polar {
            unitary,
            completed_dim: 0,
        };
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = sigma_max * RANK_CUTOFF * n as f64;
    let kept: Vec<usize> = (0..n)
        .filter(|&i| sigma_max > 0.0 && svd.singular_values[i] > cutoff)
        .collect();

    let mut left = ComplexMatrix::zeros(n, kept.len());
    let mut right = ComplexMatrix::zeros(n, kept.len());
    for (c, &i) in kept.iter().enumerate() {
        left.set_column(c, &u.column(i));
        right.set_column(c, &v_t.row(i).adjoint());
    }
    let mut unitary = &left * right.adjoint();

    let completed_dim = n - kept.len();
    if completed_dim > 0 {
        let left_kernel = kernel_basis(&left, completed_dim);
        let right_kernel = kernel_basis(&right, completed_dim);
        unitary += left_kernel * right_kernel.adjoint();
    }
    Polar {
        unitary,
        completed_dim,
    }
}

/// Frobenius residual `‖a*a − 1‖` below which the iteration is used; it
/// keeps every squared singular value in `[1/2, 3/2]`.
const NEWTON_SCHULZ_START: f64 = 0.5;

/// `x ← x(3 − x*x)/2` until `x*x = 1` to rounding, or `None` when `a` is too
/// far from unitary for the iteration to be quick.
fn newton_schulz(a: &ComplexMatrix) -> Option<ComplexMatrix> {
    let n = a.nrows();
    let eye = identity(n);
    let floor = 8.0 * f64::EPSILON * n as f64;
    let mut x = a.clone();
    let mut gram = adjoint_matmul(&x, &x);
    let mut residual = (&gram - &eye).norm();
    if residual > NEWTON_SCHULZ_START {
        return None;
    }
    for _ in 0..40 {
        if residual <= floor {
            return Some(x);
        }
        let step = (&eye * Complex64::new(3.0, 0.0) - &gram) * Complex64::new(0.5, 0.0);
        x = matmul(&x, &step);
        gram = adjoint_matmul(&x, &x);
        let next = (&gram - &eye).norm();
        if next >= residual {
            // stalled at rounding level
            return (residual < 1e-10).then_some(x);
        }
        residual = next;
    }
    None
}

/// Orthonormal basis of the orthogonal complement of `range` (an isometry),
/// built from `e_0, e_1, …` in index order.
fn kernel_basis(range: &ComplexMatrix, dim: usize) -> ComplexMatrix {
    let n = range.nrows();
    // A standard basis vector is accepted once its residual exceeds this;
    // one always exists among the unprocessed vectors (Σ residuals² = dim).
    let threshold = 0.5 / (n as f64).sqrt();
    let mut basis: Vec<nalgebra::DVector<Complex64>> = Vec::with_capacity(dim);
    let eye = identity(n);
    for j in 0..n {
        if basis.len() == dim {
            break;
        }
        let mut v = eye.column(j).into_owned();
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            let proj = range * (range.adjoint() * &v);
            v -= proj;
            for b in &basis {
                let coef = b.dotc(&v);
                v -= b * coef;
            }
        }
        let norm = v.norm();
        if norm > threshold {
            basis.push(v / Complex64::new(norm, 0.0));
        }
    }
    let mut out = ComplexMatrix::zeros(n, basis.len());
    for (c, b) in basis.iter().enumerate() {
        out.set_column(c, b);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, unitarity_residual};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn unitary_is_fixed() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = haar_unitary(6, &mut rng);
        let p = polar_unitary(&u);
        assert_eq!(p.completed_dim, 0);
        assert!((p.unitary - u).norm() < 1e-13);
    }

    #[test]
    fn positive_diagonal_gives_identity() {
        let a = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
        let p = polar_unitary(&a);
        assert!((p.unitary - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn kernel_completion_rule() {
        let a = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(5.0)]));
        let p = polar_unitary(&a);
        assert_eq!(p.completed_dim, 1);
        assert!((p.unitary[(1, 1)] - c(1.0)).norm() < 1e-14);
        assert!((p.unitary.clone() - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn zero_matrix_completes_to_identity() {
        let p = polar_unitary(&ComplexMatrix::zeros(3, 3));
        assert_eq!(p.completed_dim, 3);
        assert!((p.unitary - identity(3)).norm() < 1e-14);
    }

    #[test]
    fn factorization_holds_for_singular_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = haar_unitary(5, &mut rng);
        let w = haar_unitary(5, &mut rng);
        let d = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            c(3.0),
            c(1.0),
            c(0.0),
            c(0.5),
            c(0.0),
        ]));
        let a = &u * &d * w.adjoint();
        let p = polar_unitary(&a);
        assert_eq!(p.completed_dim, 2);
        assert!(unitarity_residual(&p.unitary) < 1e-12);
        let abs_a = &w * &d * w.adjoint();
        assert!((&p.unitary * abs_a - &a).norm() < 1e-12);
    }
}
