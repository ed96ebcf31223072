//! Correctors for chain and hnn-chain presentations, exact samplers and
//! controlled perturbation.
//!
//! Both correctors follow the same pipeline. The central element
//! `W = x_i^{N_i}` is estimated from the inputs and replaced by a unitary
//! `Ω = Σ λ_k P_k` with finitely many eigenvalues. Inside each eigenspace of
//! `Ω`, every `x_i · λ_k^{−1/N_i}` is rounded to a unitary of order `N_i`, the
//! resulting spectral families are aligned to an exact solution of the
//! projection system, and the generators are reassembled. The hnn-chain
//! corrector additionally forces `rank P^{(1)}_k = rank P^{(m)}_k` and replaces
//! `u` by a unitary conjugating the first family onto the last.

use std::f64::consts::TAU;
use std::time::Instant;

use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    assert_unitary, cluster_at, cluster_mean, cluster_members, compress, expand, expi_hermitian,
    gaps_by_size, gue, haar_unitary, hcat, hs_norm, matmul, matrix_power, order_frames,
    polar_unitary, principal_angle, root_of_unity, scalar_branch_power, spectral_cluster,
    unitary_eig_frames, ArgBranch, ComplexMatrix, SpectralApproximant, SpectralDecomposition,
};
use crate::presentation::{relation_defect, GroupPresentation, PresentationKind, UnitaryTuple};
use crate::projection::{
    align_system, chain_system, conjugating_unitary, hnn_system, nearest_feasible_ranks,
    synthesize_family, LinearProjectionSystem, ProjectionFamily, RankVector,
};

/// Eigenphases of `W` closer than this are treated as one eigenvalue.
const EIG_MERGE_TOL: f64 = 1e-8;
/// Unitarity tolerance for intermediate compressions.
const INNER_TOL: f64 = 1e-8;
/// Largest number of `W`-eigenvalues drawn by [`sample_exact_rep`].
pub const MAX_SAMPLED_CLUSTERS: usize = 4;
/// Defect the sampler guarantees.
pub const SAMPLE_DEFECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizeOptions {
    /// Upper bound on the number of eigenvalues of `Ω`; `min(dim, 16)` when
    /// unset.
    pub max_clusters: Option<usize>,
    /// When set, eigenphases of `W` are merged across every gap below this
    /// (radians) instead of choosing the cluster count by cost.
    pub gap_tol: Option<f64>,
    pub input_unitarity_tol: f64,
    /// Largest relation defect accepted for the output.
    pub output_defect_tol: f64,
    /// Recorded in the report; the correctors themselves are deterministic.
    pub seed: u64,
}

impl Default for StabilizeOptions {
    fn default() -> Self {
        StabilizeOptions {
            max_clusters: None,
            gap_tol: None,
            input_unitarity_tol: 1e-8,
            output_defect_tol: 1e-9,
            seed: 0,
        }
    }
}

impl StabilizeOptions {
    pub fn validate(&self) -> Result<()> {
        if self.max_clusters == Some(0) {
            return Err(Error::InvalidArgument(
                "max_clusters must be at least 1".into(),
            ));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.input_unitarity_tol)
            || !positive(self.output_defect_tol)
            || self.gap_tol.is_some_and(|g| !positive(g))
        {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(())
    }

    fn cluster_cap(&self, dim: usize) -> usize {
        self.max_clusters.unwrap_or(dim.min(16)).max(1)
    }
}

/// Measurements of one correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub preset: String,
    pub dim: usize,
    /// Perturbation size, when the input came from [`perturb`].
    pub eps: Option<f64>,
    pub trial: Option<usize>,
    pub seed: u64,
    pub defect_before: f64,
    /// `None` when the correction failed.
    pub defect_after: Option<f64>,
    /// `‖U_i − U_i′‖₂` per generator.
    pub distance_moved: Vec<f64>,
    /// Number of eigenvalues of `Ω`.
    pub clusters: usize,
    pub wall_time_s: f64,
    pub failed: bool,
    pub failure: Option<String>,
}

impl StabilityRecord {
    pub fn max_distance(&self) -> f64 {
        self.distance_moved.iter().cloned().fold(0.0, f64::max)
    }
}

struct ChainData<'a> {
    a: &'a [u64],
    b: &'a [u64],
    hnn: bool,
}

fn chain_data(p: &GroupPresentation) -> Result<ChainData<'_>> {
    match &p.kind {
        PresentationKind::Chain { a, b } => Ok(ChainData { a, b, hnn: false }),
        PresentationKind::HnnChain { a, b } => Ok(ChainData { a, b, hnn: true }),
        PresentationKind::Generic => Err(Error::InvalidPresentation(
            "only chain and hnn-chain presentations have a corrector".into(),
        )),
    }
}

/// Corrects an almost-representation of a chain presentation.
pub fn stabilize_chain(
    p: &GroupPresentation,
    t: &UnitaryTuple,
    opts: &StabilizeOptions,
) -> Result<(UnitaryTuple, StabilityRecord)> {
    if !matches!(p.kind, PresentationKind::Chain { .. }) {
        return Err(Error::InvalidPresentation(format!(
            "{} is not a chain presentation",
            p.label()
        )));
    }
    correct(p, t, opts)
}

/// Corrects an almost-representation of an hnn-chain presentation; the first
/// matrix of the tuple is `u`.
pub fn stabilize_case2(
    p: &GroupPresentation,
    t: &UnitaryTuple,
    opts: &StabilizeOptions,
) -> Result<(UnitaryTuple, StabilityRecord)> {
    if !matches!(p.kind, PresentationKind::HnnChain { .. }) {
        return Err(Error::InvalidPresentation(format!(
            "{} is not an hnn-chain presentation",
            p.label()
        )));
    }
    correct(p, t, opts)
}

/// Dispatches on the presentation kind.
pub fn stabilize(
    p: &GroupPresentation,
    t: &UnitaryTuple,
    opts: &StabilizeOptions,
) -> Result<(UnitaryTuple, StabilityRecord)> {
    chain_data(p)?;
    correct(p, t, opts)
}

fn correct(
    p: &GroupPresentation,
    t: &UnitaryTuple,
    opts: &StabilizeOptions,
) -> Result<(UnitaryTuple, StabilityRecord)> {
    let start = Instant::now();
    opts.validate()?;
    let data = chain_data(p)?;
    if t.len() != p.num_generators {
        return Err(Error::DimensionMismatch {
            expected: p.num_generators,
            found: t.len(),
        });
    }
    let n = t.dim;
    if n == 0 {
        return Err(Error::InvalidArgument("empty tuple dimension".into()));
    }
    for m in &t.matrices {
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: m.nrows(),
            });
        }
        assert_unitary(m, opts.input_unitarity_tol).map_err(Error::at("input"))?;
    }
    let defect_before = relation_defect(p, t)?;

    let sys = if data.hnn {
        hnn_system(data.a, data.b)
    } else {
        chain_system(data.a, data.b)
    }
    .map_err(Error::at("system"))?;
    let orders: Vec<u64> = sys.sizes.iter().map(|&s| s as u64).collect();
    let xs: Vec<&ComplexMatrix> = p.chain_generators().map(|g| &t.matrices[g]).collect();
    let u = data.hnn.then(|| &t.matrices[0]);

    // central word
    let mut avg = ComplexMatrix::zeros(n, n);
    for (x, &order) in xs.iter().zip(&orders) {
        avg += matrix_power(x, order);
    }
    avg /= Complex64::new(xs.len() as f64, 0.0);
    let w = polar_unitary(&avg).unitary;

    let spectrum = unitary_eig_frames(&w, EIG_MERGE_TOL).map_err(Error::at("spectrum"))?;
    let omega = match opts.gap_tol {
        Some(g) => spectral_cluster(&spectrum, opts.cluster_cap(n), g)?,
        None => {
            let mut weighted: Vec<(&ComplexMatrix, Option<u64>)> = xs
                .iter()
                .zip(&orders)
                .map(|(x, &o)| (*x, Some(o)))
                .collect();
            if let Some(u) = u {
                weighted.push((u, None));
            }
            select_clusters(&spectrum, &weighted, opts.cluster_cap(n))
        }
    };

    let m = xs.len();
    let mut out: Vec<ComplexMatrix> = vec![ComplexMatrix::zeros(n, n); m];
    let mut new_u = ComplexMatrix::zeros(n, n);
    for k in 0..omega.len() {
        let frame = &omega.frames[k];
        let dk = frame.ncols();
        let mut approx = Vec::with_capacity(m);
        for (i, (x, &order)) in xs.iter().zip(&orders).enumerate() {
            let local = compress(frame, x);
            let unit = polar_unitary(&local).unitary * omega.scalar_power(k, -1.0 / order as f64);
            let frames =
                order_frames(&unit, order as usize, INNER_TOL).map_err(Error::at("rounding"))?;
            approx.push(ProjectionFamily::from_frames(
                format!("x{}", i + 1),
                dk,
                frames,
            ));
        }
        let targets: Vec<Vec<f64>> = approx
            .iter()
            .map(|f| f.ranks().into_iter().map(|r| r as f64).collect())
            .collect();
        let ranks = nearest_feasible_ranks(&sys, &targets, dk).map_err(Error::at("ranks"))?;
        let exact = align_system(&sys, &approx, &ranks).map_err(Error::at("alignment"))?;
        for (i, fam) in exact.iter().enumerate() {
            let order = orders[i] as usize;
            let block = fam.combine(|s| root_of_unity(s + 1, order))
                * omega.scalar_power(k, 1.0 / order as f64);
            out[i] += expand(frame, &block);
        }
        if let Some(u) = u {
            let local = compress(frame, u);
            let v = conjugating_unitary(&exact[0], &exact[m - 1], &local)
                .map_err(Error::at("conjugator"))?;
            new_u += expand(frame, &v);
        }
    }

    let matrices = match u {
        Some(_) => std::iter::once(new_u).chain(out).collect(),
        None => out,
    };
    let corrected = UnitaryTuple::new(matrices, 1e-10).map_err(Error::at("verification"))?;
    let defect_after = relation_defect(p, &corrected)?;
    if defect_after > opts.output_defect_tol {
        return Err(Error::at("verification")(Error::DefectTooLarge {
            defect: defect_after,
            tol: opts.output_defect_tol,
        }));
    }
    let record = StabilityRecord {
        preset: p.label(),
        dim: n,
        eps: None,
        trial: None,
        seed: opts.seed,
        defect_before,
        defect_after: Some(defect_after),
        distance_moved: t.distances(&corrected),
        clusters: omega.len(),
        wall_time_s: start.elapsed().as_secs_f64(),
        failed: false,
        failure: None,
    };
    Ok((corrected, record))
}

/// Chooses how many eigenvalues `Ω` gets by cutting the spectrum of `W` at
/// its `c` largest gaps, for the `c` minimizing
/// `Σ_j ‖x_j − Σ_k P_k x_j P_k‖₂² + Σ_j (‖W − Ω‖₂ / N_j)²`.
/// The first term is the mass the correction must discard because it is not
/// block diagonal, the second what rounding `W` to `Ω` costs each generator.
fn select_clusters(
    d: &SpectralDecomposition,
    mats: &[(&ComplexMatrix, Option<u64>)],
    max_clusters: usize,
) -> SpectralApproximant {
    let count = d.phases.len();
    let n = d.dim as f64;
    let frames: Vec<&ComplexMatrix> = d.frames.iter().collect();
    let z = hcat(d.dim, &frames);
    let mut offsets = Vec::with_capacity(count + 1);
    offsets.push(0);
    for f in &d.frames {
        offsets.push(offsets.last().unwrap() + f.ncols());
    }
    // mass[j][p][q]: squared entries of z* x_j z between eigenspaces p and q
    let mass: Vec<Vec<Vec<f64>>> = mats
        .iter()
        .map(|(x, _)| {
            let y = compress(&z, x);
            let mut g = vec![vec![0.0; count]; count];
            for (p, row) in g.iter_mut().enumerate() {
                for (q, cell) in row.iter_mut().enumerate() {
                    *cell = y
                        .view(
                            (offsets[p], offsets[q]),
                            (offsets[p + 1] - offsets[p], offsets[q + 1] - offsets[q]),
                        )
                        .norm_squared();
                }
            }
            g
        })
        .collect();
    let totals: Vec<f64> = mass.iter().map(|g| g.iter().flatten().sum()).collect();

    let order = gaps_by_size(d);
    let mut best: Option<(f64, usize)> = None;
    for c in 1..=max_clusters.min(count) {
        let groups = cluster_members(d, &order[..c]);
        let mut spread = 0.0;
        for members in &groups {
            let mean = Complex64::from_polar(1.0, cluster_mean(d, members));
            for &i in members {
                let r = d.frames[i].ncols() as f64;
                spread += r * (Complex64::from_polar(1.0, d.phases[i]) - mean).norm_sqr();
            }
        }
        spread /= n;
        let mut cost = 0.0;
        for ((g, total), (_, order)) in mass.iter().zip(&totals).zip(mats) {
            let inside: f64 = groups
                .iter()
                .map(|members| {
                    members
                        .iter()
                        .flat_map(|&p| members.iter().map(move |&q| g[p][q]))
                        .sum::<f64>()
                })
                .sum();
            cost += (total - inside).max(0.0) / n;
            if let Some(o) = order {
                cost += spread / (*o as f64 * *o as f64);
            }
        }
        if best.is_none_or(|(b, _)| cost < b - 1e-15) {
            best = Some((cost, c));
        }
    }
    let c = best.map_or(1, |(_, c)| c);
    cluster_at(d, &order[..c.min(order.len())])
}

/// Random exact representation of a chain or hnn-chain presentation.
///
/// Draws `s ≤ min(dim, 4)` well-separated eigenvalues `λ_k` of `W` and a
/// random split of the dimension among them; in each eigenspace, ranks come
/// from [`nearest_feasible_ranks`] applied to random targets, family 1 is a
/// Haar-random coordinate family and each later family is a Haar-random split
/// of the equation subspaces of the previous one. For hnn-chains `u` acts on
/// each eigenspace as Haar-random isometries between matching slots of the
/// first and last families.
pub fn sample_exact_rep(p: &GroupPresentation, dim: usize, seed: u64) -> Result<UnitaryTuple> {
    let data = chain_data(p)?;
    if dim == 0 {
        return Err(Error::InvalidArgument(
            "dimension must be at least 1".into(),
        ));
    }
    let sys = if data.hnn {
        hnn_system(data.a, data.b)?
    } else {
        chain_system(data.a, data.b)?
    };
    let m = sys.num_families();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = rng.random_range(1..=dim.min(MAX_SAMPLED_CLUSTERS));
    let mut cuts: Vec<usize> = sample_indices(&mut rng, dim - 1, s - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    cuts.push(dim);
    let theta0 = rng.random_range(-0.5..0.5) * TAU;
    let basis = haar_unitary(dim, &mut rng);

    let mut xs = vec![ComplexMatrix::zeros(dim, dim); m];
    let mut u = ComplexMatrix::zeros(dim, dim);
    let mut at = 0;
    for (k, &end) in cuts.iter().enumerate() {
        let dk = end - at;
        let frame = basis.columns(at, dk).into_owned();
        at = end;
        let jitter = rng.random_range(-0.125..0.125);
        let lambda = Complex64::from_polar(
            1.0,
            principal_angle(theta0 + TAU * (k as f64 + jitter) / s as f64),
        );
        let mut targets: Vec<Vec<f64>> = sys
            .sizes
            .iter()
            .map(|&size| random_targets(size, dk, &mut rng))
            .collect();
        if data.hnn {
            targets[m - 1] = targets[0].clone();
        }
        let ranks = nearest_feasible_ranks(&sys, &targets, dk)?;
        let fams = random_families(&sys, &ranks, dk, &mut rng)?;
        for (i, fam) in fams.iter().enumerate() {
            let order = sys.sizes[i];
            let block = fam.combine(|s| root_of_unity(s + 1, order))
                * scalar_branch_power(lambda, 1.0 / order as f64, ArgBranch::Principal);
            xs[i] += expand(&frame, &block);
        }
        if data.hnn {
            let mut v = ComplexMatrix::zeros(dk, dk);
            for (e, f) in fams[0].frames.iter().zip(&fams[m - 1].frames) {
                v += matmul(&matmul(f, &haar_unitary(e.ncols(), &mut rng)), &e.adjoint());
            }
            u += expand(&frame, &v);
        }
    }
    let matrices = if data.hnn {
        std::iter::once(u).chain(xs).collect()
    } else {
        xs
    };
    let tuple = UnitaryTuple::new(matrices, 1e-10)?;
    let defect = relation_defect(p, &tuple)?;
    if defect > SAMPLE_DEFECT_TOL {
        return Err(Error::DefectTooLarge {
            defect,
            tol: SAMPLE_DEFECT_TOL,
        });
    }
    Ok(tuple)
}

/// Nonnegative targets summing to `dim`, skewed so that a few slots dominate.
fn random_targets<R: Rng>(size: usize, dim: usize, rng: &mut R) -> Vec<f64> {
    let w: Vec<f64> = (0..size).map(|_| rng.random::<f64>().powi(3)).collect();
    let total: f64 = w.iter().sum::<f64>().max(f64::MIN_POSITIVE);
    w.into_iter().map(|x| x * dim as f64 / total).collect()
}

/// Exact families with the given ranks in `C^dim`, Haar-random inside the
/// constraints.
pub(crate) fn random_families<R: Rng>(
    sys: &LinearProjectionSystem,
    ranks: &RankVector,
    dim: usize,
    rng: &mut R,
) -> Result<Vec<ProjectionFamily>> {
    let mut fams = vec![synthesize_family(
        "x1",
        &ranks.ranks[0],
        &haar_unitary(dim, rng),
    )?];
    for block in 0..sys.num_families() - 1 {
        let mut frames = vec![ComplexMatrix::zeros(dim, 0); sys.sizes[block + 1]];
        for (_, eq) in sys.block(block) {
            let left: Vec<&ComplexMatrix> =
                eq.left.iter().map(|&s| &fams[block].frames[s]).collect();
            let space = hcat(dim, &left);
            let mixed = matmul(&space, &haar_unitary(space.ncols(), rng));
            let mut at = 0;
            for &s in &eq.right {
                let r = ranks.ranks[block + 1][s];
                frames[s] = mixed.columns(at, r).into_owned();
                at += r;
            }
        }
        fams.push(ProjectionFamily::from_frames(
            format!("x{}", block + 2),
            dim,
            frames,
        ));
    }
    Ok(fams)
}

/// `U_i · exp(i·eps·H_i)` with independent Hermitian `H_i`, `‖H_i‖₂ = 1`.
pub fn perturb(t: &UnitaryTuple, eps: f64, seed: u64) -> Result<UnitaryTuple> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation size must be finite and nonnegative, got {eps}"
        )));
    }
    if eps == 0.0 || t.dim == 0 {
        return Ok(t.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let matrices = t
        .matrices
        .iter()
        .map(|x| {
            let h = gue(t.dim, &mut rng);
            let h = &h * Complex64::new(eps / hs_norm(&h), 0.0);
            matmul(x, &expi_hermitian(&h))
        })
        .collect();
    Ok(UnitaryTuple::from_parts(t.dim, matrices))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, unitarity_residual};
    use crate::presentation::{preset_case2, preset_chain};

    fn presets() -> Vec<GroupPresentation> {
        vec![
            preset_chain(&[2, 5], &[3, 7]).unwrap(),
            preset_chain(&[2], &[2]).unwrap(),
            preset_case2(&[2, 3], &[3, 2]).unwrap(),
        ]
    }

    #[test]
    fn sampler_is_exact_and_seeded() {
        for p in presets() {
            for dim in [1, 2, 7, 20] {
                let a = sample_exact_rep(&p, dim, 1).unwrap();
                assert!(relation_defect(&p, &a).unwrap() <= SAMPLE_DEFECT_TOL);
                assert_eq!(a, sample_exact_rep(&p, dim, 1).unwrap());
                let b = sample_exact_rep(&p, dim, 2).unwrap();
                assert!(a.distances(&b).iter().any(|&d| d > 1e-3));
            }
        }
    }

    #[test]
    fn sampler_dimension_one_is_scalar() {
        let p = preset_chain(&[2, 5], &[3, 7]).unwrap();
        let t = sample_exact_rep(&p, 1, 9).unwrap();
        let w = t.matrices[0][(0, 0)].powu(10);
        assert!((t.matrices[1][(0, 0)].powu(15) - w).norm() < 1e-13);
        assert!((t.matrices[2][(0, 0)].powu(21) - w).norm() < 1e-13);
        assert!(relation_defect(&p, &t).unwrap() < 1e-14);
    }

    #[test]
    fn perturb_examples() {
        let p = preset_chain(&[2], &[2]).unwrap();
        let t = sample_exact_rep(&p, 6, 3).unwrap();
        assert_eq!(perturb(&t, 0.0, 1).unwrap(), t);
        for eps in [1e-2, 1e-3] {
            let q = perturb(&t, eps, 1).unwrap();
            for (m, d) in q.matrices.iter().zip(t.distances(&q)) {
                assert!(unitarity_residual(m) < 1e-12);
                assert!(d <= eps * (1.0 + 1e-2));
            }
        }
        assert!(perturb(&t, -1.0, 1).is_err());
    }

    #[test]
    fn identity_tuple_is_fixed() {
        for p in presets() {
            let t = UnitaryTuple::identity(p.num_generators, 5);
            let (out, rec) = stabilize(&p, &t, &StabilizeOptions::default()).unwrap();
            assert!(out.distances(&t).iter().all(|&d| d < 1e-12));
            assert_eq!(rec.clusters, 1);
        }
    }

    #[test]
    fn exact_input_is_fixed() {
        for p in presets() {
            for seed in 0..5 {
                let t = sample_exact_rep(&p, 24, seed).unwrap();
                let (out, rec) = stabilize(&p, &t, &StabilizeOptions::default()).unwrap();
                assert!(
                    rec.max_distance() < 1e-8,
                    "{}: {:?}",
                    p.label(),
                    rec.distance_moved
                );
                assert!(rec.defect_after.unwrap() <= 1e-10);
                assert_eq!(out.len(), t.len());
            }
        }
    }

    #[test]
    fn perturbed_input_is_corrected() {
        for p in presets() {
            for seed in 0..3 {
                let t = sample_exact_rep(&p, 30, seed).unwrap();
                let q = perturb(&t, 1e-3, seed + 100).unwrap();
                let (out, rec) = stabilize(&p, &q, &StabilizeOptions::default()).unwrap();
                assert!(rec.defect_after.unwrap() <= 1e-9);
                assert!(rec.defect_before > rec.defect_after.unwrap());
                assert!(
                    rec.max_distance() < 0.1,
                    "{}: {:?}",
                    p.label(),
                    rec.distance_moved
                );
                let (again, rec2) = stabilize(&p, &out, &StabilizeOptions::default()).unwrap();
                assert!(rec2.max_distance() < 1e-8);
                assert!(again.distances(&out).iter().all(|&d| d < 1e-8));
            }
        }
    }

    #[test]
    fn hand_example_is_fixed_point() {
        let p = preset_case2(&[2], &[2]).unwrap();
        let c = |x: f64| Complex64::new(x, 0.0);
        let swap = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let x1 = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let x2 = -&x1;
        let t = UnitaryTuple::new(vec![swap, x1, x2], 1e-12).unwrap();
        assert!(relation_defect(&p, &t).unwrap() < 1e-15);
        let (out, _) = stabilize_case2(&p, &t, &StabilizeOptions::default()).unwrap();
        assert!(out.distances(&t).iter().all(|&d| d < 1e-12));
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let chain = preset_chain(&[2], &[2]).unwrap();
        let hnn = preset_case2(&[2], &[2]).unwrap();
        let t = UnitaryTuple::identity(3, 2);
        assert!(stabilize_chain(&hnn, &t, &StabilizeOptions::default()).is_err());
        assert!(stabilize_case2(
            &chain,
            &UnitaryTuple::identity(2, 2),
            &StabilizeOptions::default()
        )
        .is_err());
        let bad = UnitaryTuple {
            dim: 2,
            matrices: vec![identity(2) * Complex64::new(2.0, 0.0), identity(2)],
        };
        let err = stabilize(&chain, &bad, &StabilizeOptions::default()).unwrap_err();
        assert!(err.to_string().contains("input"));
    }
}
