//! Spectral calculus for unitary and normal matrices.

use std::f64::consts::TAU;

use nalgebra::Schur;
use num_complex::Complex64;

use super::{
    assert_unitary, check_finite, check_square, circular_distance, frame_projection, hcat,
    hermitian_eig, matmul, normality_residual, principal_angle, ComplexMatrix, DEFAULT_INPUT_TOL,
};
use crate::error::{Error, Result};

/// Eigenphases of a unitary with the orthogonal projections onto the
/// corresponding eigenspaces.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub dim: usize,
    /// Ascending, in `(−π, π]`.
    pub phases: Vec<f64>,
    pub projections: Vec<ComplexMatrix>,
    /// Orthonormal frames (dim × rank) with `frame·frame* = projection`.
    pub frames: Vec<ComplexMatrix>,
}

impl SpectralDecomposition {
    pub fn ranks(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.ncols()).collect()
    }

    /// `Σ e^{iφ_k} P_k`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (phi, p) in self.phases.iter().zip(&self.projections) {
            out += p * Complex64::from_polar(1.0, *phi);
        }
        out
    }
}

/// Finite-spectrum unitary `Ω = Σ λ_k P_k` approximating a unitary by merging
/// eigenspaces.
#[derive(Debug, Clone)]
pub struct SpectralApproximant {
    pub dim: usize,
    /// Unit-modulus cluster values `λ_k`.
    pub phases: Vec<Complex64>,
    pub projections: Vec<ComplexMatrix>,
    pub frames: Vec<ComplexMatrix>,
    /// Largest circular distance from a `λ_k` to a merged eigenphase.
    pub radius: f64,
}

impl SpectralApproximant {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn omega(&self) -> ComplexMatrix {
        self.power(1.0)
    }

    /// `Σ λ_k^t P_k` with the principal branch.
    pub fn power(&self, t: f64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (k, p) in self.projections.iter().enumerate() {
            out += p * self.scalar_power(k, t);
        }
        out
    }

    /// `λ_k^t` with the principal branch.
    pub fn scalar_power(&self, k: usize, t: f64) -> Complex64 {
        scalar_branch_power(self.phases[k], t, ArgBranch::Principal)
    }
}

/// Which interval `Arg` takes values in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgBranch {
    /// `(−π, π]`.
    Principal,
    /// `[0, 2π)`. Only useful for exercising the invariant checks.
    NonNegative,
}

impl ArgBranch {
    fn arg(self, z: Complex64) -> f64 {
        let a = principal_angle(z.arg());
        match self {
            ArgBranch::Principal => a,
            ArgBranch::NonNegative => a.rem_euclid(TAU),
        }
    }
}

/// `|z|^t e^{i t Arg z}`.
pub fn scalar_branch_power(z: Complex64, t: f64, branch: ArgBranch) -> Complex64 {
    let r = z.norm();
    if r == 0.0 {
        return if t == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    Complex64::from_polar(r.powf(t), t * branch.arg(z))
}

/// Deflation threshold for the Schur iteration. Machine epsilon stalls on
/// highly degenerate spectra; this converges quickly and reconstructs better.
const SCHUR_EPS: f64 = 1e-14;

/// Schur form of a normal matrix: eigenvalues and orthonormal eigenvectors.
pub(crate) fn normal_eig(a: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let schur =
        Schur::try_new(a.clone(), SCHUR_EPS, 2000 * n).ok_or(Error::EigenFailure { dim: n })?;
    let (q, t) = schur.unpack();
    let values = t.diagonal().iter().cloned().collect();
    Ok((values, reorthonormalize(q)))
}

/// Consecutive eigenvalues of the Hermitian surrogate closer than this are
/// resolved together by a Schur decomposition.
const SURROGATE_GROUP_GAP: f64 = 1e-4;
/// Rotation `α` of the surrogate `(e^{−iα}u + e^{iα}u*)/2`.
const SURROGATE_ANGLE: f64 = 1.0;

/// Eigenvalues and orthonormal eigenvectors of a unitary.
///
/// The Hermitian matrix `h = (e^{−iα}u + e^{iα}u*)/2` is a function of `u`,
/// so its eigenspaces are invariant under `u`. Each run of nearly equal
/// eigenvalues of `h` is resolved by diagonalizing `u` compressed to it;
/// isolated ones are read off as Rayleigh quotients.
pub(crate) fn unitary_eig_vectors(u: &ComplexMatrix) -> Result<(Vec<Complex64>, ComplexMatrix)> {
    let n = u.nrows();
    if n == 0 {
        return Ok((Vec::new(), ComplexMatrix::zeros(0, 0)));
    }
    let rot = Complex64::from_polar(1.0, -SURROGATE_ANGLE);
    let h = (u * rot + u.adjoint() * rot.conj()) * Complex64::new(0.5, 0.0);
    let (cosines, basis) = hermitian_eig(&h);
    let ub = matmul(u, &basis);
    let mut values = Vec::with_capacity(n);
    let mut vectors = ComplexMatrix::zeros(n, n);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && cosines[end] - cosines[end - 1] < SURROGATE_GROUP_GAP {
            end += 1;
        }
        let group = basis.columns(start, end - start).into_owned();
        let compressed = matmul(
            &group.adjoint(),
            &ub.columns(start, end - start).into_owned(),
        );
        if end - start == 1 {
            let z = compressed[(0, 0)];
            values.push(if z.norm() > 0.0 { z / z.norm() } else { z });
            vectors.set_column(start, &group.column(0));
        } else {
            let (vals, q) = normal_eig(&compressed)?;
            values.extend(vals);
            vectors
                .columns_mut(start, end - start)
                .copy_from(&matmul(&group, &q));
        }
        start = end;
    }
    Ok((values, vectors))
}

/// Householder QR of a nearly unitary `q`, with the phases of `R`'s diagonal
/// moved back into the columns so each column stays close to the input.
fn reorthonormalize(q: ComplexMatrix) -> ComplexMatrix {
    let qr = q.qr();
    let r = qr.r();
    let mut out = qr.q();
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            col *= d / d.norm();
        }
    }
    out
}

/// Spectral decomposition of a unitary. Eigenphases whose circular distance
/// is at most `tol` are chained into one eigenspace; the merged phase is the
/// circular mean.
pub fn unitary_eig(u: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    eig_frames(u, tol, true)
}

/// [`unitary_eig`] without the projections, which are left empty.
pub(crate) fn unitary_eig_frames(u: &ComplexMatrix, tol: f64) -> Result<SpectralDecomposition> {
    eig_frames(u, tol, false)
}

fn eig_frames(u: &ComplexMatrix, tol: f64, projections: bool) -> Result<SpectralDecomposition> {
    if tol <= 0.0 {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    assert_unitary(u, tol.max(DEFAULT_INPUT_TOL))?;
    let n = u.nrows();
    let (values, vectors) = unitary_eig_vectors(u)?;
    let phases: Vec<f64> = values.iter().map(|z| principal_angle(z.arg())).collect();
    let groups = chain_groups(&phases, tol);

    let mut parts: Vec<(f64, ComplexMatrix)> = groups
        .into_iter()
        .map(|members| {
            let mean = circular_mean(members.iter().map(|&i| (phases[i], 1.0)));
            let cols: Vec<_> = members
                .iter()
                .map(|&i| vectors.column(i).into_owned())
                .collect();
            let mut frame = ComplexMatrix::zeros(n, cols.len());
            for (c, col) in cols.iter().enumerate() {
                frame.set_column(c, col);
            }
            (mean, frame)
        })
        .collect();
    parts.sort_by(|a, b| a.0.total_cmp(&b.0));

    Ok(SpectralDecomposition {
        dim: n,
        phases: parts.iter().map(|p| p.0).collect(),
        projections: if projections {
            parts.iter().map(|p| frame_projection(&p.1)).collect()
        } else {
            Vec::new()
        },
        frames: parts.into_iter().map(|p| p.1).collect(),
    })
}

/// Single-linkage chaining of angles on the circle.
fn chain_groups(phases: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let n = phases.len();
    if n == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| phases[i].total_cmp(&phases[j]));
    let sorted: Vec<f64> = order.iter().map(|&i| phases[i]).collect();
    let gaps = circular_gaps(&sorted);
    let cuts: Vec<usize> = (0..n).filter(|&i| gaps[i] > tol).collect();
    runs(&cuts, n)
        .into_iter()
        .map(|run| run.into_iter().map(|p| order[p]).collect())
        .collect()
}

/// `gaps[i]` is the gap from sorted position `i` to `i + 1`, the last entry
/// wrapping around through `π`.
fn circular_gaps(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                sorted[i + 1] - sorted[i]
            } else {
                sorted[0] + TAU - sorted[n - 1]
            }
        })
        .collect()
}

/// Splits the circular index range `0..n` after each cut position.
fn runs(cuts: &[usize], n: usize) -> Vec<Vec<usize>> {
    if cuts.is_empty() {
        return vec![(0..n).collect()];
    }
    let mut cuts = cuts.to_vec();
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(cuts.len());
    for (w, &c) in cuts.iter().enumerate() {
        let next = cuts[(w + 1) % cuts.len()];
        let mut run = Vec::new();
        let mut i = (c + 1) % n;
        loop {
            run.push(i);
            if i == next {
                break;
            }
            i = (i + 1) % n;
        }
        out.push(run);
    }
    out
}

fn circular_mean(items: impl Iterator<Item = (f64, f64)>) -> f64 {
    let s: Complex64 = items.map(|(phi, w)| Complex64::from_polar(w, phi)).sum();
    principal_angle(s.arg())
}

/// Merges adjacent eigenphases whose circular gap is below `gap_tol`. If more
/// than `max_clusters` clusters remain, only the `max_clusters` largest gaps
/// are kept as cluster boundaries.
pub fn spectral_cluster(
    d: &SpectralDecomposition,
    max_clusters: usize,
    gap_tol: f64,
) -> Result<SpectralApproximant> {
    if max_clusters < 1 {
        return Err(Error::InvalidArgument(
            "max_clusters must be at least 1".into(),
        ));
    }
    let gaps = circular_gaps(&d.phases);
    let mut cuts: Vec<usize> = (0..gaps.len()).filter(|&i| gaps[i] >= gap_tol).collect();
    if cuts.len() > max_clusters {
        cuts.sort_by(|&i, &j| gaps[j].total_cmp(&gaps[i]).then(i.cmp(&j)));
        cuts.truncate(max_clusters);
    }
    Ok(assemble(d, &cuts))
}

/// Positions in the sorted gap sequence of `d`, largest gap first (ties by
/// position). Cutting at the first `c` entries yields `c` clusters.
pub fn gaps_by_size(d: &SpectralDecomposition) -> Vec<usize> {
    let gaps = circular_gaps(&d.phases);
    let mut order: Vec<usize> = (0..gaps.len()).collect();
    order.sort_by(|&i, &j| gaps[j].total_cmp(&gaps[i]).then(i.cmp(&j)));
    order
}

/// Groups consecutive eigenphases of `d`, cutting after each listed gap
/// position (see [`gaps_by_size`]). No cuts means a single cluster.
pub fn cluster_at(d: &SpectralDecomposition, cuts: &[usize]) -> SpectralApproximant {
    assemble(d, cuts)
}

/// Indices into `d.phases` of each cluster obtained by cutting at `cuts`.
pub(crate) fn cluster_members(d: &SpectralDecomposition, cuts: &[usize]) -> Vec<Vec<usize>> {
    if d.phases.is_empty() {
        Vec::new()
    } else {
        runs(cuts, d.phases.len())
    }
}

/// Rank-weighted circular mean of the member eigenphases.
pub(crate) fn cluster_mean(d: &SpectralDecomposition, members: &[usize]) -> f64 {
    circular_mean(
        members
            .iter()
            .map(|&i| (d.phases[i], d.frames[i].ncols() as f64)),
    )
}

fn assemble(d: &SpectralDecomposition, cuts: &[usize]) -> SpectralApproximant {
    let mut out = SpectralApproximant {
        dim: d.dim,
        phases: Vec::new(),
        projections: Vec::new(),
        frames: Vec::new(),
        radius: 0.0,
    };
    for members in cluster_members(d, cuts) {
        let mean = cluster_mean(d, &members);
        for &i in &members {
            out.radius = out.radius.max(circular_distance(mean, d.phases[i]));
        }
        let frames: Vec<&ComplexMatrix> = members.iter().map(|&i| &d.frames[i]).collect();
        let frame = hcat(d.dim, &frames);
        out.phases.push(Complex64::from_polar(1.0, mean));
        out.projections.push(frame_projection(&frame));
        out.frames.push(frame);
    }
    out
}

/// Applies `z ↦ |z|^t e^{i t Arg z}` eigenvalue-wise to a normal matrix,
/// with `Arg ∈ (−π, π]`.
pub fn branch_power(x: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    branch_power_with(x, t, ArgBranch::Principal)
}

pub fn branch_power_with(x: &ComplexMatrix, t: f64, branch: ArgBranch) -> Result<ComplexMatrix> {
    check_square(x)?;
    check_finite(x)?;
    let scale = 1.0 + x.norm_squared();
    let residual = normality_residual(x);
    let tol = DEFAULT_INPUT_TOL * scale;
    if residual > tol {
        return Err(Error::NotNormal { residual, tol });
    }
    let (values, vectors) = normal_eig(x)?;
    let mut scaled = vectors.clone();
    for (j, z) in values.iter().enumerate() {
        if z.norm() == 0.0 && t < 0.0 {
            return Err(Error::InvalidArgument(
                "negative power of a singular matrix".into(),
            ));
        }
        let f = scalar_branch_power(*z, t, branch);
        for e in scaled.column_mut(j).iter_mut() {
            *e *= f;
        }
    }
    Ok(scaled * vectors.adjoint())
}

/// Index `j ∈ {1, …, m}` of the `m`-th root of unity `e^{2πij/m}` nearest to
/// `e^{i·phase}`. Exact midpoints go to the smaller index.
pub fn nearest_root_index(phase: f64, m: usize) -> usize {
    assert!(m >= 1, "root order must be positive");
    let mf = m as f64;
    let x = (phase / TAU * mf).rem_euclid(mf);
    let lo = x.floor();
    let frac = x - lo;
    let lo = lo as usize;
    let index = |k: usize| if k.is_multiple_of(m) { m } else { k % m };
    if frac < 0.5 {
        index(lo)
    } else if frac > 0.5 {
        index(lo + 1)
    } else {
        index(lo).min(index(lo + 1))
    }
}

/// Eigenframes of `u` grouped by nearest `m`-th root: entry `j − 1` spans the
/// eigenvectors rounded to `e^{2πij/m}`.
pub fn order_frames(u: &ComplexMatrix, m: usize, tol: f64) -> Result<Vec<ComplexMatrix>> {
    if m < 1 {
        return Err(Error::InvalidArgument("root order must be positive".into()));
    }
    assert_unitary(u, tol)?;
    let n = u.nrows();
    let (values, vectors) = unitary_eig_vectors(u)?;
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, z) in values.iter().enumerate() {
        members[nearest_root_index(z.arg(), m) - 1].push(i);
    }
    Ok(members
        .into_iter()
        .map(|cols| {
            let mut f = ComplexMatrix::zeros(n, cols.len());
            for (c, &i) in cols.iter().enumerate() {
                f.set_column(c, &vectors.column(i));
            }
            f
        })
        .collect())
}

/// `e^{2πij/m}`.
pub(crate) fn root_of_unity(j: usize, m: usize) -> Complex64 {
    let r = (j % m) as f64 / m as f64;
    // snap the real axis so that roots ±1 are exact
    if r == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if 2 * (j % m) == m {
        Complex64::new(-1.0, 0.0)
    } else {
        Complex64::from_polar(1.0, TAU * r)
    }
}

/// Rounds every eigenphase of `u` to the nearest `m`-th root of unity,
/// keeping the eigenvectors.
pub fn project_to_order(u: &ComplexMatrix, m: usize) -> Result<ComplexMatrix> {
    let frames = order_frames(u, m, DEFAULT_INPUT_TOL)?;
    let n = u.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (j, f) in frames.iter().enumerate() {
        if f.ncols() > 0 {
            out += frame_projection(f) * root_of_unity(j + 1, m);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, hs_distance, identity, matrix_power, unitarity_residual};
    use nalgebra::DVector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn diag(values: &[Complex64]) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&DVector::from_column_slice(values))
    }

    fn cis(t: f64) -> Complex64 {
        Complex64::from_polar(1.0, t)
    }

    fn decomposition(phases: &[f64]) -> SpectralDecomposition {
        let n = phases.len();
        let u = diag(&phases.iter().map(|&p| cis(p)).collect::<Vec<_>>());
        let d = unitary_eig(&u, 1e-12).unwrap();
        assert_eq!(d.dim, n);
        d
    }

    #[test]
    fn eig_identity() {
        let d = unitary_eig(&identity(4), 1e-8).unwrap();
        assert_eq!(d.phases.len(), 1);
        assert!(d.phases[0].abs() < 1e-14);
        assert!((&d.projections[0] - identity(4)).norm() < 1e-13);
    }

    #[test]
    fn eig_reflection() {
        let d = unitary_eig(&diag(&[cis(0.0), cis(PI)]), 1e-8).unwrap();
        assert_eq!(d.phases.len(), 2);
        assert!(d.phases[0].abs() < 1e-14);
        assert!((d.phases[1] - PI).abs() < 1e-14);
        let e00 = diag(&[Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        assert!((&d.projections[0] - e00).norm() < 1e-13);
    }

    #[test]
    fn eig_rotation_by_two_thirds_pi() {
        let t = TAU / 3.0;
        let r = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                cis(0.0) * t.cos(),
                -cis(0.0) * t.sin(),
                cis(0.0) * t.sin(),
                cis(0.0) * t.cos(),
            ],
        );
        let d = unitary_eig(&r, 1e-8).unwrap();
        assert!((d.phases[0] + t).abs() < 1e-12);
        assert!((d.phases[1] - t).abs() < 1e-12);
        // brute-force eigenvectors: (1, ∓i)/√2 for e^{±it}
        let s = 0.5f64.sqrt();
        let v_plus = DVector::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(0.0, -s)]);
        let p_plus = &v_plus * v_plus.adjoint();
        assert!((&d.projections[1] - &p_plus).norm() < 1e-12);
        assert!((&d.projections[0] - p_plus.conjugate()).norm() < 1e-12);
    }

    #[test]
    fn eig_reconstructs_random_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for &n in &[1usize, 3, 40, 200] {
            let u = haar_unitary(n, &mut rng);
            let d = unitary_eig(&u, 1e-10).unwrap();
            assert!((d.reconstruct() - &u).norm() <= 1e-9, "dim {n}");
            let total: ComplexMatrix = d.projections.iter().sum();
            assert!((total - identity(n)).norm() < 1e-10);
        }
    }

    #[test]
    fn eig_merges_degenerate_eigenspaces() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = haar_unitary(6, &mut rng);
        let u =
            &q * diag(&[cis(1.0), cis(1.0), cis(1.0), cis(-2.0), cis(-2.0), cis(PI)]) * q.adjoint();
        let d = unitary_eig(&u, 1e-8).unwrap();
        assert_eq!(d.ranks(), vec![2, 3, 1]);
    }

    #[test]
    fn branch_power_scalar_reflection() {
        let x = identity(3) * cis(PI);
        let y = branch_power(&x, 0.1).unwrap();
        assert!((y - identity(3) * cis(PI / 10.0)).norm() < 1e-13);
        assert!((branch_power(&identity(3), 0.37).unwrap() - identity(3)).norm() < 1e-13);
    }

    #[test]
    fn branch_root_recovers_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let u = haar_unitary(20, &mut rng);
        let r = branch_power(&u, 1.0 / 7.0).unwrap();
        assert!((matrix_power(&r, 7) - &u).norm() < 1e-10);
    }

    #[test]
    fn branch_power_rejects_non_normal() {
        let x = ComplexMatrix::from_row_slice(
            2,
            2,
            &[cis(0.0), cis(0.0), Complex64::new(0.0, 0.0), cis(0.0)],
        );
        assert!(matches!(
            branch_power(&x, 0.5),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn wrong_branch_differs() {
        let z = cis(-PI / 2.0);
        let good = scalar_branch_power(z, 0.1, ArgBranch::Principal);
        let bad = scalar_branch_power(z, 0.1, ArgBranch::NonNegative);
        assert!((good - cis(-PI / 20.0)).norm() < 1e-15);
        assert!((bad - good).norm() > 0.1);
    }

    #[test]
    fn cluster_single_phase() {
        let d = decomposition(&[0.0]);
        let a = spectral_cluster(&d, 4, 1e-6).unwrap();
        assert_eq!(a.len(), 1);
        assert!((a.phases[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn cluster_merges_close_phases() {
        let d = decomposition(&[0.0, 1e-9, PI]);
        assert_eq!(d.phases.len(), 3);
        let a = spectral_cluster(&d, 8, 1e-6).unwrap();
        assert_eq!(a.len(), 2);
        let args: Vec<f64> = a.phases.iter().map(|z| z.arg().abs()).collect();
        assert!(args.iter().any(|&t| t < 1e-8));
        assert!(args.iter().any(|&t| (t - PI).abs() < 1e-12));
        let u = d.reconstruct();
        assert!(hs_distance(&a.omega(), &u) <= a.radius + 1e-15);
    }

    #[test]
    fn cluster_roots_stay_separate() {
        let m = 7;
        let phases: Vec<f64> = (0..m)
            .map(|j| principal_angle(TAU * j as f64 / m as f64))
            .collect();
        let d = decomposition(&phases);
        let a = spectral_cluster(&d, m, TAU / m as f64 * 0.9).unwrap();
        assert_eq!(a.len(), m);
        assert!(spectral_cluster(&d, 0, 0.1).is_err());
    }

    #[test]
    fn cluster_count_capped_by_largest_gaps() {
        let d = decomposition(&[-2.0, -1.9, 0.0, 0.05, 2.0]);
        let a = spectral_cluster(&d, 3, 1e-6).unwrap();
        assert_eq!(a.len(), 3);
        let total: ComplexMatrix = a.projections.iter().sum();
        assert!((total - identity(5)).norm() < 1e-13);
    }

    #[test]
    fn cutting_at_largest_gaps() {
        let d = decomposition(&[-2.0, -1.99, -2.01, 0.5, 0.52, 2.9, 2.91, -3.1]);
        let order = gaps_by_size(&d);
        let a = cluster_at(&d, &order[..3]);
        assert_eq!(a.len(), 3);
        // -3.1 joins 2.9 and 2.91 across π
        assert!(a.radius < 0.2);
        assert_eq!(cluster_at(&d, &[]).len(), 1);
        assert_eq!(cluster_at(&d, &order).len(), 8);
    }

    #[test]
    fn root_rounding_examples() {
        assert_eq!(nearest_root_index(TAU * 0.26, 4), 1);
        assert_eq!(nearest_root_index(TAU * 0.26, 2), 1);
        assert_eq!(nearest_root_index(0.0, 5), 5);
        // midpoint between roots 5 (= 1) and 1 of order 5
        assert_eq!(nearest_root_index(TAU * 0.1, 5), 1);
        // midpoint between roots 1 and 2 of order 4
        assert_eq!(nearest_root_index(TAU * 0.375, 4), 1);
    }

    #[test]
    fn project_to_order_examples() {
        let u = diag(&[cis(TAU * 0.26)]);
        let v = project_to_order(&u, 4).unwrap();
        assert!((v[(0, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        let v = project_to_order(&u, 2).unwrap();
        assert!((v[(0, 0)] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn project_to_order_is_idempotent_and_finite_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = haar_unitary(25, &mut rng);
        for m in [1usize, 2, 5, 21] {
            let v = project_to_order(&u, m).unwrap();
            assert!(unitarity_residual(&v) < 1e-12);
            assert!((matrix_power(&v, m as u64) - identity(25)).norm() < 1e-12);
            let w = project_to_order(&v, m).unwrap();
            assert!((w - &v).norm() < 1e-12);
        }
    }
}
