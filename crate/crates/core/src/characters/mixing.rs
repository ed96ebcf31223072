//! Tensor powers, rational mixtures of traces and root-of-unity nets.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type ExactComplex = Complex<BigRational>;

/// Trace vector of `π̃ = π ⊕ 1` given that of a `dim`-dimensional `π`.
pub fn with_trivial_summand(values: &[Complex64], dim: usize) -> Vec<Complex64> {
    let d = dim as f64;
    values.iter().map(|&v| (v * d + 1.0) / (d + 1.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaApproximation {
    /// Tensor power.
    pub power: u32,
    /// `value_i^power`: the traces of the tensor power.
    pub traces: Vec<Complex64>,
    /// `max_i |value_i|^power`.
    pub max_abs: f64,
}

/// Least `N ≥ 1` with `max_i |value_i|^N < eps`.
pub fn tensor_power_delta(values: &[Complex64], eps: f64) -> Result<DeltaApproximation> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument("eps must be positive".into()));
    }
    let mut m = 0.0f64;
    for (i, v) in values.iter().enumerate() {
        let r = v.norm();
        if !r.is_finite() || r >= 1.0 {
            return Err(Error::InvalidArgument(format!(
                "|value {i}| = {r} is not below 1"
            )));
        }
        m = m.max(r);
    }
    let below = |n: u32| m.powi(n as i32) < eps;
    let mut n: u32 = if m == 0.0 || below(1) {
        1
    } else {
        (eps.ln() / m.ln()).ceil().clamp(1.0, i32::MAX as f64) as u32
    };
    while !below(n) {
        n = n.checked_add(1).ok_or(Error::Overflow("tensor power"))?;
    }
    while n > 1 && below(n - 1) {
        n -= 1;
    }
    Ok(DeltaApproximation {
        power: n,
        traces: values.iter().map(|v| v.powi(n as i32)).collect(),
        max_abs: m.powi(n as i32),
    })
}

/// Block sum `⊕ π_i^{⊕k_i}` whose normalized trace is `Σ w_i tr π_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    /// Total dimension `L = Σ k_i n_i`, the least one that works.
    pub total_dim: BigInt,
    pub multiplicities: Vec<BigInt>,
    /// `Σ w_i t_i`.
    pub traces: Vec<ExactComplex>,
}

impl Mixture {
    /// Normalized trace of the block sum, `Σ k_i n_i t_i / L`, computed from
    /// the multiplicities.
    pub fn block_traces(&self, dims: &[u64], traces: &[Vec<ExactComplex>]) -> Vec<ExactComplex> {
        let len = traces.first().map_or(0, Vec::len);
        let l = BigRational::from_integer(self.total_dim.clone());
        (0..len)
            .map(|g| {
                let mut acc = ExactComplex::new(BigRational::zero(), BigRational::zero());
                for (i, t) in traces.iter().enumerate() {
                    let w =
                        BigRational::from_integer(&self.multiplicities[i] * BigInt::from(dims[i]))
                            / &l;
                    acc += scale(&t[g], &w);
                }
                acc
            })
            .collect()
    }
}

fn scale(z: &ExactComplex, w: &BigRational) -> ExactComplex {
    ExactComplex::new(&z.re * w, &z.im * w)
}

/// Convex combination of trace vectors of representations of dimensions
/// `dims` with rational `weights`, realized by a block sum.
///
/// `k_i = w_i L / n_i` must be integral, so `L` is the least common multiple
/// of the denominators of `w_i / n_i`.
pub fn mix_traces(
    dims: &[u64],
    weights: &[BigRational],
    traces: &[Vec<ExactComplex>],
) -> Result<Mixture> {
    if dims.is_empty() || dims.len() != weights.len() || dims.len() != traces.len() {
        return Err(Error::InvalidArgument(
            "dims, weights and traces must be nonempty and of equal length".into(),
        ));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument("dimensions must be positive".into()));
    }
    if weights.iter().any(|w| !w.is_positive()) {
        return Err(Error::InvalidArgument("weights must be positive".into()));
    }
    if weights.iter().sum::<BigRational>() != BigRational::one() {
        return Err(Error::InvalidArgument("weights must sum to 1".into()));
    }
    let len = traces[0].len();
    if traces.iter().any(|t| t.len() != len) {
        return Err(Error::InvalidArgument(
            "trace vectors have different lengths".into(),
        ));
    }
    let per_dim: Vec<BigRational> = weights
        .iter()
        .zip(dims)
        .map(|(w, &n)| w / BigRational::from_integer(BigInt::from(n)))
        .collect();
    let total_dim = per_dim.iter().fold(BigInt::one(), |l, r| l.lcm(r.denom()));
    let multiplicities = per_dim
        .iter()
        .map(|r| (r * BigRational::from_integer(total_dim.clone())).to_integer())
        .collect();
    let mixed = (0..len)
        .map(|g| {
            traces.iter().zip(weights).fold(
                ExactComplex::new(BigRational::zero(), BigRational::zero()),
                |acc, (t, w)| acc + scale(&t[g], w),
            )
        })
        .collect();
    Ok(Mixture {
        total_dim,
        multiplicities,
        traces: mixed,
    })
}

/// Parses `p/q` or an integer. Decimal notation is refused.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("`{s}` is not a rational p/q"));
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

/// Index `l ∈ {0, …, k−1}` of the `k`-th root of unity nearest to
/// `e^{2πiθ}` and the chordal distance to it. Midpoints go to the lower
/// index.
pub fn nearest_root_phase(theta: f64, k: u64) -> Result<(u64, f64)> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    if !theta.is_finite() {
        return Err(Error::NonFinite);
    }
    let kf = k as f64;
    let x = (theta.rem_euclid(1.0) * kf).rem_euclid(kf);
    let lo = x.floor();
    let l = if x - lo > 0.5 { lo + 1.0 } else { lo } as u64 % k;
    let mut diff = (theta - l as f64 / kf).rem_euclid(1.0);
    if diff > 0.5 {
        diff -= 1.0;
    }
    Ok((l, 2.0 * (std::f64::consts::PI * diff).sin().abs()))
}

/// Largest error [`nearest_root_phase`] can return: the chord spanning half
/// the spacing of the `k`-th roots.
pub fn root_net_bound(k: u64) -> f64 {
    2.0 * (std::f64::consts::PI / (2.0 * k as f64)).sin()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn q(s: &str) -> BigRational {
        parse_rational(s).unwrap()
    }

    fn re(s: &str) -> ExactComplex {
        ExactComplex::new(q(s), BigRational::zero())
    }

    #[test]
    fn cyclic_three_example() {
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        let values = with_trivial_summand(&[w, w * w], 1);
        assert!((values[0].norm() - 0.5).abs() < 1e-15);
        let d = tensor_power_delta(&values, 0.01).unwrap();
        assert_eq!(d.power, 7);
        assert!((d.max_abs - 1.0 / 128.0).abs() < 1e-15);
    }

    #[test]
    fn delta_examples() {
        assert_eq!(
            tensor_power_delta(&[Complex64::new(0.0, 0.0)], 0.3)
                .unwrap()
                .power,
            1
        );
        assert_eq!(
            tensor_power_delta(&[Complex64::new(0.9, 0.0)], 0.5)
                .unwrap()
                .power,
            7
        );
        assert_eq!(tensor_power_delta(&[], 0.5).unwrap().power, 1);
        assert!(tensor_power_delta(&[Complex64::new(0.0, 1.0)], 0.5).is_err());
        assert!(tensor_power_delta(&[Complex64::new(0.5, 0.0)], 0.0).is_err());
    }

    #[test]
    fn delta_power_is_minimal() {
        for m in [0.1, 0.5, 0.77, 0.9, 0.999] {
            for eps in [0.9, 0.1, 1e-3, 1e-9] {
                let n = tensor_power_delta(&[Complex64::new(m, 0.0)], eps)
                    .unwrap()
                    .power;
                assert!(m.powi(n as i32) < eps);
                assert!(n == 1 || m.powi(n as i32 - 1) >= eps);
            }
        }
    }

    #[test]
    fn mix_examples() {
        let single = mix_traces(&[3], &[q("1")], &[vec![re("1"), re("-1/3")]]).unwrap();
        assert_eq!(single.total_dim, BigInt::from(3));
        assert_eq!(single.traces, vec![re("1"), re("-1/3")]);

        let z2 = mix_traces(
            &[1, 1],
            &[q("1/2"), q("1/2")],
            &[vec![re("1"), re("1")], vec![re("1"), re("-1")]],
        )
        .unwrap();
        assert_eq!(z2.total_dim, BigInt::from(2));
        assert_eq!(z2.traces[1], re("0"));

        let thirds = mix_traces(&[1, 1], &[q("1/3"), q("2/3")], &[vec![], vec![]]).unwrap();
        assert_eq!(thirds.total_dim, BigInt::from(3));
        assert_eq!(
            thirds.multiplicities,
            vec![BigInt::from(1), BigInt::from(2)]
        );
    }

    #[test]
    fn block_sum_reproduces_mixture() {
        let dims = [2, 3, 4];
        let weights = [q("1/6"), q("1/2"), q("1/3")];
        let traces = vec![
            vec![re("1"), ExactComplex::new(q("1/2"), q("-1/2"))],
            vec![re("1"), re("-1/3")],
            vec![re("1"), ExactComplex::new(q("0"), q("1/4"))],
        ];
        let m = mix_traces(&dims, &weights, &traces).unwrap();
        assert_eq!(m.block_traces(&dims, &traces), m.traces);
        let l: BigInt = m
            .multiplicities
            .iter()
            .zip(dims)
            .map(|(k, n)| k * BigInt::from(n))
            .sum();
        assert_eq!(l, m.total_dim);
        assert_eq!(m.total_dim, BigInt::from(12));
    }

    #[test]
    fn mix_rejects_bad_weights() {
        let t = vec![vec![re("1")], vec![re("1")]];
        assert!(mix_traces(&[1, 1], &[q("1/2"), q("1/3")], &t).is_err());
        assert!(mix_traces(&[1, 1], &[q("3/2"), q("-1/2")], &t).is_err());
        assert!(mix_traces(&[1, 0], &[q("1/2"), q("1/2")], &t).is_err());
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(parse_rational(" -4/6 ").unwrap(), q("-2/3"));
    }

    #[test]
    fn root_phase_examples() {
        assert_eq!(nearest_root_phase(0.0, 5).unwrap(), (0, 0.0));
        assert_eq!(nearest_root_phase(0.3, 10).unwrap(), (3, 0.0));
        assert_eq!(nearest_root_phase(0.26, 4).unwrap().0, 1);
        assert_eq!(nearest_root_phase(0.97, 4).unwrap().0, 0);
        assert_eq!(nearest_root_phase(-0.25, 4).unwrap().0, 3);
        assert!(nearest_root_phase(0.1, 0).is_err());
    }

    #[test]
    fn root_phase_error_is_bounded() {
        for k in [1, 2, 3, 7, 64] {
            for i in 0..500 {
                let theta = i as f64 / 500.0 * 3.0 - 1.0;
                let (l, err) = nearest_root_phase(theta, k).unwrap();
                assert!(l < k);
                assert!(err <= root_net_bound(k) + 1e-15);
                let hit = Complex64::from_polar(1.0, TAU * l as f64 / k as f64);
                let z = Complex64::from_polar(1.0, TAU * theta);
                assert!(((hit - z).norm() - err).abs() < 1e-12);
            }
        }
    }
}
