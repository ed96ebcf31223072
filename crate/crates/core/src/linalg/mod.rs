//! Dense complex matrix kernel.
//!
//! Everything in the crate is measured in the normalized Hilbert–Schmidt
//! norm `‖a‖₂ = tr(a*a)^{1/2}` where `tr` is the trace divided by the
//! dimension, so the identity has norm one in every dimension.

mod json;
mod polar;
mod spectral;

pub use json::{matrix_to_json, MatrixJson};
pub use polar::{polar_unitary, Polar};
pub use spectral::{
    branch_power, branch_power_with, cluster_at, gaps_by_size, nearest_root_index, order_frames,
    project_to_order, scalar_branch_power, spectral_cluster, unitary_eig, ArgBranch,
    SpectralApproximant, SpectralDecomposition,
};
pub(crate) use spectral::{cluster_mean, cluster_members, root_of_unity, unitary_eig_frames};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;

/// Input unitarity tolerance used when callers do not override it.
pub const DEFAULT_INPUT_TOL: f64 = 1e-8;
/// Tolerance synthesized outputs are held to.
pub const DEFAULT_OUTPUT_TOL: f64 = 1e-12;

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Below this many scalar multiply-adds the plain complex product is used.
const SPLIT_PRODUCT_MIN: usize = 1 << 14;

/// `a · b`.
///
/// nalgebra has no optimized kernel for complex entries, so larger products
/// are assembled from four real products, which it does hand to one.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (n, k, m) = (a.nrows(), a.ncols(), b.ncols());
    if n * k * m < SPLIT_PRODUCT_MIN {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// `f* · m · f` for a frame `f`: `m` restricted to the range of `f`.
pub fn compress(f: &ComplexMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    matmul(&adjoint_matmul(f, m), f)
}

/// `f · b · f*`: a block on the range of `f` written in the ambient space.
pub fn expand(f: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    matmul(&matmul(f, b), &f.adjoint())
}

/// `a* · b`.
pub fn adjoint_matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    matmul(&a.adjoint(), b)
}

pub fn check_square(a: &ComplexMatrix) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    Ok(a.nrows())
}

pub fn check_finite(a: &ComplexMatrix) -> Result<()> {
    if a.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// `(1/n) Σ a_ii`.
pub fn normalized_trace(a: &ComplexMatrix) -> Complex64 {
    let n = a.nrows();
    if n == 0 {
        return Complex64::new(0.0, 0.0);
    }
    a.diagonal().iter().sum::<Complex64>() / n as f64
}

/// Normalized Hilbert–Schmidt norm, `sqrt(tr(a* a))`.
pub fn hs_norm(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    if n == 0 {
        return 0.0;
    }
    (a.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64).sqrt()
}

pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    hs_norm(&(a - b))
}

/// Largest singular value.
pub fn operator_norm(a: &ComplexMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

/// Frobenius norm of `a* a − 1` (unnormalized, so it bounds the operator norm).
pub fn unitarity_residual(a: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    (adjoint_matmul(a, a) - identity(n)).norm()
}

/// Checks `‖a* a − 1‖_F ≤ tol` and returns the residual.
pub fn assert_unitary(a: &ComplexMatrix, tol: f64) -> Result<f64> {
    check_square(a)?;
    check_finite(a)?;
    let residual = unitarity_residual(a);
    if residual <= tol {
        Ok(residual)
    } else {
        Err(Error::NotUnitary { residual, tol })
    }
}

/// Frobenius norm of `a a* − a* a`.
pub fn normality_residual(a: &ComplexMatrix) -> f64 {
    let adj = a.adjoint();
    (matmul(a, &adj) - matmul(&adj, a)).norm()
}

/// `a^k` by repeated squaring.
pub fn matrix_power(a: &ComplexMatrix, mut k: u64) -> ComplexMatrix {
    let mut result: Option<ComplexMatrix> = None;
    let mut base = a.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = Some(match result {
                Some(r) => matmul(&r, &base),
                None => base.clone(),
            });
        }
        k >>= 1;
        if k > 0 {
            base = matmul(&base, &base);
        }
    }
    result.unwrap_or_else(|| identity(a.nrows()))
}

/// Eigendecomposition of the Hermitian part `(a + a*)/2`, eigenvalues ascending.
pub fn hermitian_eig(a: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), ComplexMatrix::zeros(0, 0));
    }
    let h = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Orthonormal frame (n × rank) for the dominant eigenspace of an
/// approximate projection.
pub fn range_frame(p: &ComplexMatrix, rank: usize) -> ComplexMatrix {
    let n = p.nrows();
    let (_, vectors) = hermitian_eig(p);
    vectors.columns(n - rank, rank).into_owned()
}

/// `frame · frame*`.
pub fn frame_projection(frame: &ComplexMatrix) -> ComplexMatrix {
    matmul(frame, &frame.adjoint())
}

/// Concatenates frames column-wise; all must share the row count `n`.
pub fn hcat(n: usize, frames: &[&ComplexMatrix]) -> ComplexMatrix {
    let cols: usize = frames.iter().map(|f| f.ncols()).sum();
    let mut out = ComplexMatrix::zeros(n, cols);
    let mut at = 0;
    for f in frames {
        out.columns_mut(at, f.ncols()).copy_from(f);
        at += f.ncols();
    }
    out
}

/// Haar-distributed unitary: QR of a complex Ginibre matrix with the phases
/// of `R`'s diagonal absorbed into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    if n == 0 {
        return ComplexMatrix::zeros(0, 0);
    }
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Hermitian matrix with i.i.d. complex Gaussian entries, `(G + G*)/2`.
pub fn gue<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
}

/// `exp(i·h)` for Hermitian `h`, computed spectrally so the result is unitary
/// to machine precision.
pub fn expi_hermitian(h: &ComplexMatrix) -> ComplexMatrix {
    let (values, vectors) = hermitian_eig(h);
    let mut scaled = vectors.clone();
    for (j, &x) in values.iter().enumerate() {
        let ph = Complex64::from_polar(1.0, x);
        for z in scaled.column_mut(j).iter_mut() {
            *z *= ph;
        }
    }
    matmul(&scaled, &vectors.adjoint())
}

/// Circular distance between two angles, in `[0, π]`.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// Maps an angle to the principal interval `(−π, π]`.
pub fn principal_angle(theta: f64) -> f64 {
    use std::f64::consts::{PI, TAU};
    let mut t = theta.rem_euclid(TAU);
    if t > PI {
        t -= TAU;
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(values: &[Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
    }

    #[test]
    fn trace_examples() {
        assert_eq!(normalized_trace(&identity(5)), c(1.0, 0.0));
        assert_eq!(normalized_trace(&ComplexMatrix::zeros(3, 3)), c(0.0, 0.0));
        assert_eq!(
            normalized_trace(&diag(&[c(1.0, 0.0), c(-1.0, 0.0)])),
            c(0.0, 0.0)
        );
    }

    #[test]
    fn hs_norm_examples() {
        assert_eq!(hs_norm(&ComplexMatrix::zeros(4, 4)), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = haar_unitary(7, &mut rng);
        assert!((hs_norm(&u) - 1.0).abs() < 1e-14);
        let a = diag(&[c(2.0, 0.0), c(0.0, 0.0)]);
        assert!((hs_norm(&a) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn unitarity_examples() {
        assert_eq!(assert_unitary(&identity(3), 1e-12).unwrap(), 0.0);
        let a = diag(&[c(1.0, 0.0), c(1.0 + 1e-6, 0.0)]);
        match assert_unitary(&a, 1e-12) {
            Err(Error::NotUnitary { residual, .. }) => assert!((residual - 2e-6).abs() < 1e-11),
            other => panic!("expected failure, got {other:?}"),
        }
        let t: f64 = 0.731;
        let rot = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                c(t.cos(), 0.0),
                c(-t.sin(), 0.0),
                c(t.sin(), 0.0),
                c(t.cos(), 0.0),
            ],
        );
        assert!(assert_unitary(&rot, 1e-12).is_ok());
    }

    #[test]
    fn non_finite_rejected() {
        let mut a = identity(2);
        a[(0, 1)] = c(f64::NAN, 0.0);
        assert!(matches!(assert_unitary(&a, 1.0), Err(Error::NonFinite)));
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = haar_unitary(5, &mut rng);
        let mut naive = identity(5);
        for _ in 0..13 {
            naive = &naive * &u;
        }
        assert!((matrix_power(&u, 13) - naive).norm() < 1e-12);
        assert_eq!(matrix_power(&u, 0), identity(5));
    }

    #[test]
    fn expi_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = gue(9, &mut rng);
        let u = expi_hermitian(&(h * c(0.3, 0.0)));
        assert!(unitarity_residual(&u) < 1e-12);
    }

    #[test]
    fn angles() {
        use std::f64::consts::PI;
        assert!((principal_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((principal_angle(-PI) - PI).abs() < 1e-12);
        assert!((circular_distance(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-12);
    }
}
