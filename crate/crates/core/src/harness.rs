//! Experiment runner: seeded trials, grid sweeps and the invariant suite.
//!
//! A trial samples an exact representation, perturbs it and corrects it.
//! Seeds for the sample depend on `(seed, dim, trial)` only, so every `eps`
//! in a sweep perturbs the same exact representations.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{
    clock_shift_rep, heisenberg_word_matrix, heisenberg_word_trace, mix_traces, nearest_root_phase,
    parse_rational, root_net_bound, tensor_power_delta, verify_induced_trace, CentralCharacterSpec,
    ExactComplex, FiniteGroup,
};
use crate::error::{Error, Result};
use crate::linalg::{
    branch_power_with, haar_unitary, hs_distance, hs_norm, identity, matmul, matrix_power,
    normalized_trace, polar_unitary, unitarity_residual, ArgBranch, ComplexMatrix,
};
use crate::presentation::{
    preset_heisenberg, relation_defect, GroupPresentation, PresentationKind, UnitaryTuple,
};
use crate::projection::{
    align_system, chain_system, conjugating_unitary, nearest_feasible_ranks, synthesize_family,
    system_residual, ProjectionFamily,
};
use crate::stabilize::{perturb, sample_exact_rep, stabilize, StabilityRecord, StabilizeOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Preset name such as `chain:2,5:3,7` or `hnn:2,3:3,2`.
    pub preset: String,
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub options: StabilizeOptions,
    /// Record wall-clock time per trial. Off makes reports bit-for-bit
    /// reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<std::path::PathBuf>,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn new(preset: &str, dims: Vec<usize>, eps: Vec<f64>, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            preset: preset.into(),
            dims,
            eps,
            trials,
            seed,
            options: StabilizeOptions::default(),
            timing: true,
            out: None,
        }
    }

    /// Checks the grid and returns the parsed presentation.
    pub fn validate(&self) -> Result<GroupPresentation> {
        let p = GroupPresentation::parse_preset(&self.preset)?;
        if matches!(p.kind, PresentationKind::Generic) {
            return Err(Error::InvalidPresentation(format!(
                "`{}` has no corrector",
                self.preset
            )));
        }
        if self.dims.is_empty() || self.eps.is_empty() {
            return Err(Error::InvalidArgument(
                "dims and eps must be nonempty".into(),
            ));
        }
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be positive".into()));
        }
        if self.dims.contains(&0) {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        if self.eps.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::InvalidArgument(
                "eps values must be finite and nonnegative".into(),
            ));
        }
        self.options.validate()?;
        Ok(p)
    }

    /// Grid cells in output order: dimension, then eps, then trial.
    pub fn cells(&self) -> Vec<TrialCell> {
        let mut out = Vec::with_capacity(self.dims.len() * self.eps.len() * self.trials);
        for &dim in &self.dims {
            for &eps in &self.eps {
                for trial in 0..self.trials {
                    out.push(TrialCell {
                        dim,
                        eps,
                        trial,
                        seed: self.seed,
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialCell {
    pub dim: usize,
    pub eps: f64,
    pub trial: usize,
    /// Base seed of the experiment.
    pub seed: u64,
}

impl TrialCell {
    pub fn sample_seed(&self) -> u64 {
        derive_seed(self.seed, &[self.dim as u64, self.trial as u64])
    }

    pub fn perturb_seed(&self) -> u64 {
        derive_seed(self.sample_seed(), &[self.eps.to_bits()])
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds `parts` into `base` with SplitMix64 steps.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix(base), |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Sample, perturb and correct one cell. Failures at any stage are recorded
/// in the returned record rather than returned as errors.
pub fn run_trial(
    p: &GroupPresentation,
    cell: &TrialCell,
    options: &StabilizeOptions,
    timing: bool,
) -> StabilityRecord {
    let start = Instant::now();
    let mut opts = options.clone();
    opts.seed = cell.perturb_seed();
    let mut record = StabilityRecord {
        preset: p.label(),
        dim: cell.dim,
        eps: Some(cell.eps),
        trial: Some(cell.trial),
        seed: cell.seed,
        defect_before: f64::NAN,
        defect_after: None,
        distance_moved: Vec::new(),
        clusters: 0,
        wall_time_s: 0.0,
        failed: true,
        failure: None,
    };
    let outcome = sample_exact_rep(p, cell.dim, cell.sample_seed())
        .map_err(Error::at("sample"))
        .and_then(|exact| {
            perturb(&exact, cell.eps, cell.perturb_seed()).map_err(Error::at("perturb"))
        })
        .and_then(|noisy| {
            record.defect_before = relation_defect(p, &noisy)?;
            stabilize(p, &noisy, &opts)
        });
    match outcome {
        Ok((_, r)) => {
            record.defect_after = r.defect_after;
            record.distance_moved = r.distance_moved;
            record.clusters = r.clusters;
            record.failed = false;
        }
        Err(e) => record.failure = Some(e.to_string()),
    }
    if timing {
        record.wall_time_s = start.elapsed().as_secs_f64();
    }
    record
}

/// Aggregate over all trials and dimensions at one `eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub eps: f64,
    pub trials: usize,
    pub failures: usize,
    /// Median over trials and generators of `‖U_i − U_i′‖₂`.
    pub median_distance: f64,
    pub max_distance: f64,
    pub max_defect_after: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub records: Vec<StabilityRecord>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    pub fn failures(&self) -> usize {
        self.records.iter().filter(|r| r.failed).count()
    }

    /// Medians in decreasing order of `eps` strictly decrease.
    pub fn curve_is_decreasing(&self) -> bool {
        let mut rows: Vec<&SummaryRow> = self.summary.iter().collect();
        rows.sort_by(|a, b| b.eps.total_cmp(&a.eps));
        rows.windows(2)
            .all(|w| w[1].median_distance < w[0].median_distance)
    }
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Runs every cell of the grid, in parallel, and returns the records in grid
/// order.
pub fn sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    let p = config.validate()?;
    let records: Vec<StabilityRecord> = config
        .cells()
        .par_iter()
        .map(|c| run_trial(&p, c, &config.options, config.timing))
        .collect();
    let summary = summarize(&config.eps, &records);
    Ok(SweepReport { records, summary })
}

pub fn summarize(eps: &[f64], records: &[StabilityRecord]) -> Vec<SummaryRow> {
    eps.iter()
        .map(|&e| {
            let at: Vec<&StabilityRecord> = records.iter().filter(|r| r.eps == Some(e)).collect();
            let mut dist: Vec<f64> = at
                .iter()
                .filter(|r| !r.failed)
                .flat_map(|r| r.distance_moved.iter().copied())
                .collect();
            SummaryRow {
                eps: e,
                trials: at.len(),
                failures: at.iter().filter(|r| r.failed).count(),
                max_distance: dist.iter().copied().fold(0.0, f64::max),
                median_distance: median(&mut dist),
                max_defect_after: at.iter().filter_map(|r| r.defect_after).fold(0.0, f64::max),
            }
        })
        .collect()
}

/// One line of the invariant suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tol: f64,
    pub passed: bool,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} {:<44} measured {:.3e}  tol {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.tol
        )
    }
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Branch used by the `branch_power` checks; anything but the principal
    /// branch is a deliberate fault.
    pub branch: ArgBranch,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 7,
            branch: ArgBranch::Principal,
        }
    }
}

fn check(name: &str, measured: Result<f64>, tol: f64) -> Check {
    let (measured, passed) = match measured {
        Ok(m) => (m, m <= tol),
        Err(_) => (f64::INFINITY, false),
    };
    Check {
        name: name.into(),
        measured,
        tol,
        passed,
    }
}

fn max_over<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |acc, x| Ok(acc.max(x?)))
}

/// Runs each module's invariants at small dimensions, dimension 1 included.
pub fn verify(opts: &VerifyOptions) -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dims = [1usize, 2, 8, 24];
    let mut out = Vec::new();
    let c = |z: f64| Complex64::new(z, 0.0);

    let haar: Vec<ComplexMatrix> = dims.iter().map(|&n| haar_unitary(n, &mut rng)).collect();
    out.push(check(
        "linalg: identity has unit norm",
        Ok(dims
            .iter()
            .chain(&[64])
            .map(|&n| (hs_norm(&identity(n)) - 1.0).abs())
            .fold(0.0, f64::max)),
        1e-15,
    ));
    out.push(check(
        "linalg: polar fixes unitaries",
        Ok(haar
            .iter()
            .map(|u| hs_distance(&polar_unitary(u).unitary, u))
            .fold(0.0, f64::max)),
        1e-12,
    ));
    out.push(check(
        "linalg: polar factor is unitary",
        Ok(dims
            .iter()
            .map(|&n| {
                let a = ComplexMatrix::from_fn(n, n, |_, _| {
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
                });
                unitarity_residual(&polar_unitary(&a).unitary)
            })
            .fold(0.0, f64::max)),
        1e-12,
    ));

    out.push(check(
        "branch_power: m-th root returns the input",
        max_over(haar.iter().flat_map(|u| {
            [2u64, 3, 5].map(|m| {
                let r = branch_power_with(u, 1.0 / m as f64, opts.branch)?;
                Ok(hs_distance(&matrix_power(&r, m), u))
            })
        })),
        1e-12,
    ));
    // near the identity the principal root is nearer still
    out.push(check(
        "branch_power: principal branch near identity",
        max_over(dims.iter().map(|&n| {
            let mut x = ComplexMatrix::zeros(n, n);
            for j in 0..n {
                let theta = 0.1 * ((j as f64 + 0.5) / n as f64 - 0.5);
                x[(j, j)] = Complex64::from_polar(1.0, theta);
            }
            let q = haar_unitary(n, &mut rng);
            let x = matmul(&matmul(&q, &x), &q.adjoint());
            let r = branch_power_with(&x, 0.5, opts.branch)?;
            Ok((hs_distance(&r, &identity(n)) - hs_distance(&x, &identity(n))).max(0.0))
        })),
        1e-14,
    ));

    let presets = ["chain:2,5:3,7", "chain:2:2", "hnn:2,3:3,2"]
        .map(|s| GroupPresentation::parse_preset(s).expect("built-in preset"));
    out.push(check(
        "presentations: identity tuple is exact",
        max_over(
            presets
                .iter()
                .map(|p| relation_defect(p, &UnitaryTuple::identity(p.num_generators, 3))),
        ),
        0.0,
    ));

    out.push(check(
        "projection: chain block sizes for 2,5|3,7",
        chain_system(&[2, 5], &[3, 7]).map(|s| {
            let per_block = |b| s.equations.iter().filter(|e| e.block == b).count();
            let ok = s.sizes == [10, 15, 21] && per_block(0) == 5 && per_block(1) == 3;
            if ok {
                0.0
            } else {
                1.0
            }
        }),
        0.0,
    ));
    out.push(check(
        "projection: rounding then alignment is exact",
        max_over([1usize, 5, 16].iter().map(|&n| {
            let sys = chain_system(&[2, 5], &[3, 7])?;
            let p = GroupPresentation::parse_preset("chain:2,5:3,7")?;
            let exact = sample_exact_rep(&p, n, rng.random())?;
            let noisy = perturb(&exact, 1e-3, rng.random())?;
            let fams: Vec<ProjectionFamily> = noisy
                .matrices
                .iter()
                .zip(&sys.sizes)
                .enumerate()
                .map(|(i, (x, &order))| {
                    let frames = crate::linalg::order_frames(x, order, 1e-8)?;
                    Ok(ProjectionFamily::from_frames(
                        format!("x{}", i + 1),
                        n,
                        frames,
                    ))
                })
                .collect::<Result<_>>()?;
            let targets: Vec<Vec<f64>> = fams
                .iter()
                .map(|f| f.ranks().into_iter().map(|r| r as f64).collect())
                .collect();
            let ranks = nearest_feasible_ranks(&sys, &targets, n)?;
            ranks.check(&sys, n)?;
            let aligned = align_system(&sys, &fams, &ranks)?;
            Ok(system_residual(&sys, &aligned))
        })),
        1e-12,
    ));
    out.push(check(
        "projection: conjugator intertwines",
        max_over([1usize, 6, 20].iter().map(|&n| {
            let ranks: Vec<usize> = {
                let mut r = vec![0; 3];
                for _ in 0..n {
                    r[rng.random_range(0..3)] += 1;
                }
                r
            };
            let p = synthesize_family("p", &ranks, &haar_unitary(n, &mut rng))?;
            let q = synthesize_family("q", &ranks, &haar_unitary(n, &mut rng))?;
            let v = conjugating_unitary(&p, &q, &haar_unitary(n, &mut rng))?;
            Ok(p.projections
                .iter()
                .zip(&q.projections)
                .map(|(a, b)| (matmul(&matmul(&v, a), &v.adjoint()) - b).norm())
                .fold(unitarity_residual(&v), f64::max))
        })),
        1e-11,
    ));

    let sample_seed: u64 = rng.random();
    out.push(check(
        "stabilizers: sampled tuples are exact",
        max_over(presets.iter().flat_map(|p| {
            dims.iter()
                .map(move |&n| relation_defect(p, &sample_exact_rep(p, n, sample_seed)?))
        })),
        1e-10,
    ));
    let corrections: Vec<Result<(f64, f64)>> = presets
        .iter()
        .flat_map(|p| {
            dims.iter().map(move |&n| {
                let exact = sample_exact_rep(p, n, sample_seed ^ n as u64)?;
                let (fixed, _) = stabilize(p, &exact, &StabilizeOptions::default())?;
                let idem = exact.distances(&fixed).into_iter().fold(0.0, f64::max);
                let noisy = perturb(&exact, 1e-3, sample_seed)?;
                let (_, rec) = stabilize(p, &noisy, &StabilizeOptions::default())?;
                Ok((rec.defect_after.unwrap_or(f64::INFINITY), idem))
            })
        })
        .collect();
    out.push(check(
        "stabilizers: corrected defect",
        max_over(
            corrections
                .iter()
                .map(|r| r.as_ref().map(|x| x.0).map_err(clone_err)),
        ),
        1e-9,
    ));
    out.push(check(
        "stabilizers: exact input does not move",
        max_over(
            corrections
                .iter()
                .map(|r| r.as_ref().map(|x| x.1).map_err(clone_err)),
        ),
        1e-8,
    ));

    out.push(check(
        "characters: clock-shift commutator is scalar",
        max_over([(0i64, 1usize), (1, 3), (2, 7), (5, 24)].map(|(p, q)| {
            let (u, v) = clock_shift_rep(p, q)?;
            let z = matmul(&matmul(&u, &v), &matmul(&u.adjoint(), &v.adjoint()));
            let w = Complex64::from_polar(1.0, std::f64::consts::TAU * p as f64 / q as f64);
            Ok((z - identity(q) * w).norm())
        })),
        1e-14,
    ));
    out.push(check(
        "characters: word trace closed form",
        max_over([(1i64, 3usize), (3, 8)].into_iter().flat_map(|(p, q)| {
            (-3i64..=3).flat_map(move |a| {
                (-3i64..=3).map(move |b| {
                    let closed = heisenberg_word_trace(a, b, 1, p, q)?;
                    let dense = normalized_trace(&heisenberg_word_matrix(a, b, 1, p, q)?);
                    Ok((closed - dense).norm())
                })
            })
        })),
        1e-13,
    ));
    out.push(check(
        "characters: tensor power is minimal",
        max_over([0.5f64, 0.9, 0.99].map(|m| {
            let n = tensor_power_delta(&[c(m)], 0.01)?.power as i32;
            let minimal = m.powi(n) < 0.01 && (n == 1 || m.powi(n - 1) >= 0.01);
            Ok(if minimal { 0.0 } else { 1.0 })
        })),
        0.0,
    ));
    out.push(check(
        "characters: mixture is exact",
        (|| {
            let q = parse_rational;
            let re = |s: &str| -> Result<ExactComplex> { Ok(ExactComplex::new(q(s)?, q("0")?)) };
            let dims = [1, 2, 3];
            let traces = vec![
                vec![re("1")?, re("-1")?],
                vec![re("1")?, re("0")?],
                vec![re("1")?, re("1/3")?],
            ];
            let m = mix_traces(&dims, &[q("1/4")?, q("1/4")?, q("1/2")?], &traces)?;
            Ok(if m.block_traces(&dims, &traces) == m.traces {
                0.0
            } else {
                1.0
            })
        })(),
        0.0,
    ));
    out.push(check(
        "characters: root net error bound",
        max_over((0..200).map(|i| {
            let theta = i as f64 / 199.0;
            let (_, err) = nearest_root_phase(theta, 12)?;
            Ok((err - root_net_bound(12)).max(0.0))
        })),
        1e-15,
    ));
    out.push(check(
        "characters: induced trace matches monomial",
        (|| {
            let mut worst = 0.0f64;
            let groups = [
                FiniteGroup::cyclic(1)?,
                FiniteGroup::cyclic(4)?,
                FiniteGroup::dihedral(6)?,
                FiniteGroup::symmetric(3)?.direct_product(&FiniteGroup::cyclic(4)?)?,
            ];
            for g in &groups {
                for &z in &g.center() {
                    let spec = CentralCharacterSpec::cyclic(g, z, 1)?;
                    worst = worst.max(verify_induced_trace(g, &spec)?);
                }
            }
            Ok(worst)
        })(),
        1e-12,
    ));
    out.push(check(
        "characters: heisenberg relations hold",
        clock_shift_rep(2, 9).and_then(|(u, v)| {
            relation_defect(&preset_heisenberg(), &UnitaryTuple::new(vec![u, v], 1e-12)?)
        }),
        1e-14,
    ));
    out
}

fn clone_err(e: &Error) -> Error {
    Error::InvalidArgument(e.to_string())
}
