//! Clock-and-shift representations of the discrete Heisenberg group.
//!
//! With `ω = e^{2πip/q}`, `U = diag(1, ω, …, ω^{q−1})` and `V` the cyclic
//! shift `e_j ↦ e_{j+1}` satisfy `UV = ωVU`, hence `U^aV^b = ω^{ab}V^bU^a`
//! and `Z = UVU⁻¹V⁻¹ = ω·1`. Words are written `U^aV^bZ^c` in that order.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{matmul, matrix_power, root_of_unity, ComplexMatrix};

fn omega_power(p: i64, k: i64, q: usize) -> Complex64 {
    let q = q as i128;
    let e = (p as i128 * k as i128).rem_euclid(q);
    root_of_unity(e as usize, q as usize)
}

fn unit_root(z: Complex64, q: usize, name: &str) -> Result<Complex64> {
    if !z.re.is_finite() || !z.im.is_finite() || (z.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!(
            "{name} must have modulus one"
        )));
    }
    Ok(Complex64::from_polar(1.0, z.arg() / q as f64))
}

/// The pair `(U, V)` for `ω = e^{2πip/q}`.
pub fn clock_shift_rep(p: i64, q: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let one = Complex64::new(1.0, 0.0);
    clock_shift_twisted(p, q, one, one)
}

/// Clock-and-shift pair scaled so that `U^q = α` and `V^q = β` (for `p`
/// prime to `q`); the `q`-th roots use the principal argument.
pub fn clock_shift_twisted(
    p: i64,
    q: usize,
    alpha: Complex64,
    beta: Complex64,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if q < 1 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    let a = unit_root(alpha, q, "alpha")?;
    let b = unit_root(beta, q, "beta")?;
    let mut u = ComplexMatrix::zeros(q, q);
    let mut v = ComplexMatrix::zeros(q, q);
    for j in 0..q {
        u[(j, j)] = a * omega_power(p, j as i64, q);
        v[((j + 1) % q, j)] = b;
    }
    Ok((u, v))
}

/// Normalized trace of `U^aV^bZ^c` for the untwisted pair.
///
/// Only `V^b` with `q | b` has nonzero diagonal, and then the trace is
/// `ω^c` times the average of `ω^{ja}`, which is 1 when `q | pa` and 0
/// otherwise. Zero is returned exactly.
pub fn heisenberg_word_trace(a: i64, b: i64, c: i64, p: i64, q: usize) -> Result<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    heisenberg_word_trace_twisted(a, b, c, p, q, one, one)
}

pub fn heisenberg_word_trace_twisted(
    a: i64,
    b: i64,
    c: i64,
    p: i64,
    q: usize,
    alpha: Complex64,
    beta: Complex64,
) -> Result<Complex64> {
    if q < 1 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    let ra = unit_root(alpha, q, "alpha")?;
    let rb = unit_root(beta, q, "beta")?;
    let qi = q as i128;
    if (b as i128).rem_euclid(qi) != 0 || (p as i128 * a as i128).rem_euclid(qi) != 0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    Ok(ra.powi(a as i32) * rb.powi(b as i32) * omega_power(p, c, q))
}

/// `U^aV^bZ^c` as a dense matrix, for checking the closed form.
pub fn heisenberg_word_matrix(a: i64, b: i64, c: i64, p: i64, q: usize) -> Result<ComplexMatrix> {
    let (u, v) = clock_shift_rep(p, q)?;
    let pow = |m: &ComplexMatrix, k: i64| {
        if k >= 0 {
            matrix_power(m, k as u64)
        } else {
            matrix_power(&m.adjoint(), k.unsigned_abs())
        }
    };
    let z = matmul(&matmul(&u, &v), &matmul(&u.adjoint(), &v.adjoint()));
    Ok(matmul(&matmul(&pow(&u, a), &pow(&v, b)), &pow(&z, c)))
}

/// Continued-fraction convergents `p/q` of `theta` with `q ≤ max_q`.
pub fn convergents(theta: f64, max_q: u64) -> Vec<(i64, u64)> {
    let mut out = Vec::new();
    if !theta.is_finite() || max_q == 0 {
        return out;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i128, 1i128, 1i128, 0i128);
    let mut x = theta;
    for _ in 0..64 {
        let a = x.floor();
        let ai = a as i128;
        let (p2, q2) = (ai * p1 + p0, ai * q1 + q0);
        if q2 > max_q as i128 {
            break;
        }
        out.push((p2 as i64, q2 as u64));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = x - a;
        if frac < 1e-12 {
            break;
        }
        x = 1.0 / frac;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{normalized_trace, unitarity_residual};
    use crate::presentation::{preset_heisenberg, relation_defect, UnitaryTuple};

    #[test]
    fn commutator_is_scalar() {
        for (p, q) in [(0, 1), (1, 3), (2, 5), (-1, 7), (5, 12)] {
            let (u, v) = clock_shift_rep(p, q).unwrap();
            assert!(unitarity_residual(&u) < 1e-14);
            let z = &u * &v * u.adjoint() * v.adjoint();
            let w = omega_power(p, 1, q);
            let resid = (z - ComplexMatrix::identity(q, q) * w).norm();
            assert!(resid <= 1e-14, "p={p} q={q}: {resid:e}");
        }
    }

    #[test]
    fn trivial_pairs_commute() {
        for (p, q) in [(0, 4), (3, 1)] {
            let (u, v) = clock_shift_rep(p, q).unwrap();
            assert!((&u * &v - &v * &u).norm() < 1e-15);
        }
        assert!(clock_shift_rep(1, 0).is_err());
    }

    #[test]
    fn heisenberg_relations_hold_exactly() {
        let (u, v) = clock_shift_rep(1, 3).unwrap();
        let t = UnitaryTuple::new(vec![u, v], 1e-12).unwrap();
        assert!(relation_defect(&preset_heisenberg(), &t).unwrap() < 1e-15);
    }

    #[test]
    fn twisted_pair_has_prescribed_powers() {
        let alpha = Complex64::from_polar(1.0, 0.7);
        let beta = Complex64::from_polar(1.0, -2.1);
        let (u, v) = clock_shift_twisted(2, 5, alpha, beta).unwrap();
        let eye = ComplexMatrix::identity(5, 5);
        assert!((matrix_power(&u, 5) - &eye * alpha).norm() < 1e-13);
        assert!((matrix_power(&v, 5) - &eye * beta).norm() < 1e-13);
        let z = &u * &v * u.adjoint() * v.adjoint();
        assert!((z - eye * omega_power(2, 1, 5)).norm() < 1e-14);
        assert!(clock_shift_twisted(1, 3, Complex64::new(2.0, 0.0), alpha).is_err());
    }

    #[test]
    fn trace_examples() {
        assert_eq!(
            heisenberg_word_trace(0, 0, 0, 1, 3).unwrap(),
            Complex64::new(1.0, 0.0)
        );
        assert_eq!(
            heisenberg_word_trace(1, 0, 0, 1, 3).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        let t = heisenberg_word_trace(3, 3, 0, 1, 3).unwrap();
        assert!((t.norm() - 1.0).abs() < 1e-15);
        let dense = normalized_trace(&heisenberg_word_matrix(3, 3, 0, 1, 3).unwrap());
        assert!((t - dense).norm() < 1e-14);
    }

    #[test]
    fn closed_form_matches_dense_words() {
        for (p, q) in [(1, 3), (2, 4), (3, 5), (-2, 6)] {
            for a in -4..=4 {
                for b in -4..=4 {
                    for c in -2..=2 {
                        let closed = heisenberg_word_trace(a, b, c, p, q).unwrap();
                        let dense =
                            normalized_trace(&heisenberg_word_matrix(a, b, c, p, q).unwrap());
                        assert!(
                            (closed - dense).norm() < 1e-13,
                            "({a},{b},{c}) p={p} q={q}: {closed} vs {dense}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn commutation_convention() {
        let (p, q) = (2, 7);
        let (u, v) = clock_shift_rep(p, q).unwrap();
        for (a, b) in [(1, 1), (2, 3), (4, 6)] {
            let lhs = matrix_power(&u, a) * matrix_power(&v, b);
            let rhs = matrix_power(&v, b) * matrix_power(&u, a) * omega_power(p, (a * b) as i64, q);
            assert!((lhs - rhs).norm() < 1e-13);
        }
    }

    #[test]
    fn golden_ratio_convergents_are_fibonacci() {
        let theta = (5f64.sqrt() - 1.0) / 2.0;
        let qs: Vec<u64> = convergents(theta, 233).iter().map(|c| c.1).collect();
        assert_eq!(qs, vec![1, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233]);
        let last = convergents(theta, 233).last().copied().unwrap();
        assert_eq!(last, (144, 233));
    }
}
