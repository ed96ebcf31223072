//! Linear equation systems over orthogonal projection families.
//!
//! In `M_n` the normalized trace of a projection is `rank / n`, so "equal
//! trace" conditions become integer rank equalities. This module solves those
//! integer systems, realizes rank vectors as projection families, aligns
//! approximate families to exact solutions, and builds unitaries conjugating
//! one family onto another.
//!
//! Slot `s` (zero-based) of a family belonging to a generator of order `N`
//! holds the spectral projection for the root `e^{2πi(s+1)/N}`, so the last
//! slot is the eigenvalue `1`.

use std::collections::HashMap;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    adjoint_matmul, compress, frame_projection, hcat, hermitian_eig, identity, matmul,
    polar_unitary, range_frame, ComplexMatrix, MatrixJson,
};
use crate::presentation::chain_orders;

/// Families larger than this are refused by [`chain_system`].
pub const MAX_FAMILY_SIZE: u64 = 4096;

/// `Σ_{s ∈ left} P^{(block)}_s = Σ_{s ∈ right} P^{(block+1)}_s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Equation {
    pub block: usize,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearProjectionSystem {
    pub sizes: Vec<usize>,
    pub equations: Vec<Equation>,
    /// Pairs of families whose ranks must agree slot by slot.
    #[serde(default)]
    pub ties: Vec<(usize, usize)>,
}

impl LinearProjectionSystem {
    pub fn new(
        sizes: Vec<usize>,
        equations: Vec<Equation>,
        ties: Vec<(usize, usize)>,
    ) -> Result<Self> {
        let sys = LinearProjectionSystem {
            sizes,
            equations,
            ties,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.sizes.is_empty() || self.sizes.contains(&0) {
            return bad("every family needs at least one slot".into());
        }
        let m = self.sizes.len();
        for (e, eq) in self.equations.iter().enumerate() {
            if eq.block + 1 >= m {
                return bad(format!("equation {e} refers to block {}", eq.block));
            }
            if eq.left.is_empty() || eq.right.is_empty() {
                return bad(format!("equation {e} has an empty side"));
            }
        }
        for block in 0..m.saturating_sub(1) {
            for (side, family) in [(0, block), (1, block + 1)] {
                let mut seen = vec![0usize; self.sizes[family]];
                for eq in self.equations.iter().filter(|eq| eq.block == block) {
                    let slots = if side == 0 { &eq.left } else { &eq.right };
                    for &s in slots {
                        if s >= seen.len() {
                            return bad(format!("slot {s} out of range for family {family}"));
                        }
                        seen[s] += 1;
                    }
                }
                if let Some(s) = seen.iter().position(|&c| c != 1) {
                    return bad(format!(
                        "slot {s} of family {family} appears {} times in block {block}",
                        seen[s]
                    ));
                }
            }
        }
        for &(f, g) in &self.ties {
            if f >= m || g >= m || f == g || self.sizes[f] != self.sizes[g] {
                return bad(format!("invalid tie between families {f} and {g}"));
            }
        }
        Ok(())
    }

    pub fn num_families(&self) -> usize {
        self.sizes.len()
    }

    pub fn block(&self, block: usize) -> impl Iterator<Item = (usize, &Equation)> {
        self.equations
            .iter()
            .enumerate()
            .filter(move |(_, eq)| eq.block == block)
    }

    pub fn with_tie(mut self, f: usize, g: usize) -> Result<Self> {
        self.ties.push((f, g));
        self.validate()?;
        Ok(self)
    }
}

/// The system satisfied by the spectral families of `x₁,…,x_m` in a
/// representation of the chain presentation: within block `i`, slot `k` of
/// family `i` and slot `j` of family `i+1` share an equation exactly when
/// `e^{2πi a_i k/N_i} = e^{2πi b_i j/N_{i+1}}`.
pub fn chain_system(a: &[u64], b: &[u64]) -> Result<LinearProjectionSystem> {
    if a.iter().chain(b).any(|&x| x == 0) {
        return Err(Error::InvalidPresentation(
            "exponents must be positive".into(),
        ));
    }
    let orders = chain_orders(a, b)?;
    if let Some(&n) = orders.iter().find(|&&n| n > MAX_FAMILY_SIZE) {
        return Err(Error::InvalidPresentation(format!(
            "order {n} exceeds the family size limit {MAX_FAMILY_SIZE}"
        )));
    }
    let key = |exp: u64, k: u64, n: u64| {
        let num = (exp as u128 * k as u128 % n as u128) as u64;
        let g = num.gcd(&n);
        (num / g, n / g)
    };
    let mut equations = Vec::new();
    for i in 0..a.len() {
        let (nl, nr) = (orders[i], orders[i + 1]);
        let first = equations.len();
        let mut index: HashMap<(u64, u64), usize> = HashMap::new();
        for s in 0..nl {
            let e = *index.entry(key(a[i], s + 1, nl)).or_insert_with(|| {
                equations.push(Equation {
                    block: i,
                    left: Vec::new(),
                    right: Vec::new(),
                });
                equations.len() - 1
            });
            equations[e].left.push(s as usize);
        }
        for s in 0..nr {
            let e = index.get(&key(b[i], s + 1, nr)).ok_or_else(|| {
                Error::InvalidPresentation(format!(
                    "root {} of x_{} has no partner in block {}",
                    s + 1,
                    i + 2,
                    i + 1
                ))
            })?;
            equations[*e].right.push(s as usize);
        }
        if let Some(eq) = equations[first..].iter().find(|eq| eq.right.is_empty()) {
            return Err(Error::InvalidPresentation(format!(
                "root {} of x_{} has no partner in block {}",
                eq.left[0] + 1,
                i + 1,
                i + 1
            )));
        }
    }
    LinearProjectionSystem::new(
        orders.iter().map(|&n| n as usize).collect(),
        equations,
        Vec::new(),
    )
}

/// [`chain_system`] with the first and last families tied, as forced by
/// `u x₁ u⁻¹ = x_m`.
pub fn hnn_system(a: &[u64], b: &[u64]) -> Result<LinearProjectionSystem> {
    let sys = chain_system(a, b)?;
    let last = sys.num_families() - 1;
    sys.with_tie(0, last)
}

/// One rank per slot per family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankVector {
    pub ranks: Vec<Vec<usize>>,
}

impl RankVector {
    /// Every family's ranks sum to `dim`, every equation balances and tied
    /// families agree.
    pub fn check(&self, sys: &LinearProjectionSystem, dim: usize) -> Result<()> {
        if self.ranks.len() != sys.num_families() {
            return Err(Error::RankMismatch(format!(
                "{} families for a system with {}",
                self.ranks.len(),
                sys.num_families()
            )));
        }
        for (f, (r, &size)) in self.ranks.iter().zip(&sys.sizes).enumerate() {
            if r.len() != size {
                return Err(Error::RankMismatch(format!(
                    "family {f} has {} slots, expected {size}",
                    r.len()
                )));
            }
            let total: usize = r.iter().sum();
            if total != dim {
                return Err(Error::RankMismatch(format!(
                    "family {f} ranks sum to {total}, expected {dim}"
                )));
            }
        }
        for (e, eq) in sys.equations.iter().enumerate() {
            let l: usize = eq.left.iter().map(|&s| self.ranks[eq.block][s]).sum();
            let r: usize = eq.right.iter().map(|&s| self.ranks[eq.block + 1][s]).sum();
            if l != r {
                return Err(Error::RankMismatch(format!(
                    "equation {e} (block {}): left rank {l} != right rank {r}",
                    eq.block
                )));
            }
        }
        for &(f, g) in &sys.ties {
            if self.ranks[f] != self.ranks[g] {
                return Err(Error::RankMismatch(format!(
                    "tied families {f} and {g} differ"
                )));
            }
        }
        Ok(())
    }

    /// `Σ |rank − target|` over all slots.
    pub fn deviation(&self, targets: &[Vec<f64>]) -> f64 {
        self.ranks
            .iter()
            .zip(targets)
            .flat_map(|(r, t)| r.iter().zip(t).map(|(&x, &y)| (x as f64 - y).abs()))
            .sum()
    }
}

/// Tied families are enumerated exhaustively when they have at most this many
/// rank compositions.
const TIE_ENUMERATION_LIMIT: u128 = 20_000;

/// Integer ranks for `sys` closest to `targets` in `Σ|rank − target|`.
///
/// Without ties the problem is a convex-cost flow (source → family 1 →
/// equations → … → family m → sink, one unit of flow per unit of rank) and
/// the result is an exact minimizer. With one tie, every composition of the
/// tied family is tried when there are few enough, skipping those whose own
/// deviation already exceeds the best found; otherwise the result of
/// `tie_heuristic` is used.
pub fn nearest_feasible_ranks(
    sys: &LinearProjectionSystem,
    targets: &[Vec<f64>],
    dim: usize,
) -> Result<RankVector> {
    sys.validate()?;
    if targets.len() != sys.num_families()
        || targets.iter().zip(&sys.sizes).any(|(t, &n)| t.len() != n)
    {
        return Err(Error::InvalidArgument(
            "target shape does not match the system".into(),
        ));
    }
    if targets.iter().flatten().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument(
            "targets must be finite and nonnegative".into(),
        ));
    }
    let free = || vec![None; sys.num_families()];
    if sys.ties.is_empty() {
        return solve_pinned(sys, targets, dim, &free())
            .ok_or_else(|| Error::RankInfeasible("flow did not reach the full dimension".into()));
    }

    let heuristic = tie_heuristic(sys, targets, dim);
    if sys.ties.len() == 1 {
        let (f, g) = sys.ties[0];
        if compositions_count(dim, sys.sizes[f]) <= TIE_ENUMERATION_LIMIT {
            let mut best: Option<(f64, RankVector)> =
                heuristic.map(|rv| (rv.deviation(targets), rv));
            for_each_composition(dim, sys.sizes[f], &mut |c| {
                // the tied families alone already cost this much
                let bound: f64 = c
                    .iter()
                    .enumerate()
                    .map(|(s, &r)| {
                        (r as f64 - targets[f][s]).abs() + (r as f64 - targets[g][s]).abs()
                    })
                    .sum();
                if best.as_ref().is_some_and(|(bd, _)| bound >= *bd - 1e-9) {
                    return;
                }
                let mut pins = free();
                pins[f] = Some(c.to_vec());
                pins[g] = Some(c.to_vec());
                if let Some(rv) = solve_pinned(sys, targets, dim, &pins) {
                    let d = rv.deviation(targets);
                    if best.as_ref().is_none_or(|(bd, _)| d < *bd - 1e-9) {
                        best = Some((d, rv));
                    }
                }
            });
            return best.map(|(_, rv)| rv).ok_or_else(|| {
                Error::RankInfeasible(format!(
                    "no assignment with families {f} and {g} tied sums to {dim}"
                ))
            });
        }
    }
    heuristic.ok_or_else(|| {
        Error::RankInfeasible(format!("could not equalize tied families {:?}", sys.ties))
    })
}

/// Solves against targets averaged over each tied pair; if the tied families
/// still disagree, pins them to one family's ranks, then the other's, then to
/// everything on the last slot.
fn tie_heuristic(
    sys: &LinearProjectionSystem,
    targets: &[Vec<f64>],
    dim: usize,
) -> Option<RankVector> {
    let free = || vec![None; sys.num_families()];
    let mut averaged = targets.to_vec();
    for &(f, g) in &sys.ties {
        for s in 0..sys.sizes[f] {
            let mean = 0.5 * (targets[f][s] + targets[g][s]);
            averaged[f][s] = mean;
            averaged[g][s] = mean;
        }
    }
    let tie_free = LinearProjectionSystem {
        ties: Vec::new(),
        ..sys.clone()
    };
    let first = solve_pinned(&tie_free, &averaged, dim, &free())?;
    if first.check(sys, dim).is_ok() {
        return Some(first);
    }
    let mut candidates: Vec<Vec<Vec<usize>>> = Vec::new();
    for pick in 0..2 {
        candidates.push(
            sys.ties
                .iter()
                .map(|&(f, g)| first.ranks[if pick == 0 { f } else { g }].clone())
                .collect(),
        );
    }
    candidates.push(
        sys.ties
            .iter()
            .map(|&(f, _)| {
                let mut v = vec![0; sys.sizes[f]];
                *v.last_mut().expect("nonempty family") = dim;
                v
            })
            .collect(),
    );
    candidates.into_iter().find_map(|cand| {
        let mut pins = free();
        for (&(f, g), c) in sys.ties.iter().zip(&cand) {
            pins[f] = Some(c.clone());
            pins[g] = Some(c.clone());
        }
        solve_pinned(sys, targets, dim, &pins).filter(|rv| rv.check(sys, dim).is_ok())
    })
}

fn compositions_count(total: usize, parts: usize) -> u128 {
    // C(total + parts − 1, parts − 1), saturating
    let k = parts.saturating_sub(1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(total as u128 + k - i) / (i + 1);
        if acc > TIE_ENUMERATION_LIMIT * 1000 {
            return u128::MAX;
        }
    }
    acc
}

/// Calls `f` on every vector of `parts` nonnegative integers summing to
/// `total`, in lexicographic order.
pub(crate) fn for_each_composition(total: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(buf: &mut Vec<usize>, left: usize, parts: usize, f: &mut dyn FnMut(&[usize])) {
        if buf.len() + 1 == parts {
            buf.push(left);
            f(buf);
            buf.pop();
            return;
        }
        for x in 0..=left {
            buf.push(x);
            rec(buf, left - x, parts, f);
            buf.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(&mut Vec::with_capacity(parts), total, parts, f);
}

struct FlowArc {
    from: usize,
    to: usize,
    flow: usize,
    target: f64,
    weight: f64,
}

impl FlowArc {
    fn cost(&self, f: usize) -> f64 {
        self.weight * (f as f64 - self.target).abs()
    }
}

/// Min-cost flow with unit augmentations along Bellman–Ford shortest paths.
/// Pinned families get a prohibitive weight; the result is rejected when a
/// pin could not be honoured.
fn solve_pinned(
    sys: &LinearProjectionSystem,
    targets: &[Vec<f64>],
    dim: usize,
    pins: &[Option<Vec<usize>>],
) -> Option<RankVector> {
    const SOURCE: usize = 0;
    const SINK: usize = 1;
    let m = sys.num_families();
    let total_target: f64 = targets.iter().flatten().sum();
    let heavy = 1e3 * (1.0 + total_target + (m * dim) as f64);

    // node of the equation containing each slot, on its left and right
    let mut left_node: Vec<Vec<usize>> = sys.sizes.iter().map(|&s| vec![SINK; s]).collect();
    let mut right_node: Vec<Vec<usize>> = sys.sizes.iter().map(|&s| vec![SOURCE; s]).collect();
    for (e, eq) in sys.equations.iter().enumerate() {
        for &s in &eq.left {
            left_node[eq.block][s] = 2 + e;
        }
        for &s in &eq.right {
            right_node[eq.block + 1][s] = 2 + e;
        }
    }
    let nodes = 2 + sys.equations.len();
    let mut arcs = Vec::new();
    let mut slot_arc = vec![Vec::new(); m];
    for f in 0..m {
        for s in 0..sys.sizes[f] {
            let (target, weight) = match &pins[f] {
                Some(p) => (p[s] as f64, heavy),
                None => (targets[f][s], 1.0),
            };
            slot_arc[f].push(arcs.len());
            arcs.push(FlowArc {
                from: right_node[f][s],
                to: left_node[f][s],
                flow: 0,
                target,
                weight,
            });
        }
    }

    for _ in 0..dim {
        let mut dist = vec![f64::INFINITY; nodes];
        let mut via: Vec<Option<(usize, bool)>> = vec![None; nodes];
        dist[SOURCE] = 0.0;
        for _ in 0..nodes {
            let mut changed = false;
            for (i, a) in arcs.iter().enumerate() {
                if a.flow < dim && dist[a.from].is_finite() {
                    let d = dist[a.from] + a.cost(a.flow + 1) - a.cost(a.flow);
                    if d < dist[a.to] - 1e-9 {
                        dist[a.to] = d;
                        via[a.to] = Some((i, true));
                        changed = true;
                    }
                }
                if a.flow > 0 && dist[a.to].is_finite() {
                    let d = dist[a.to] + a.cost(a.flow - 1) - a.cost(a.flow);
                    if d < dist[a.from] - 1e-9 {
                        dist[a.from] = d;
                        via[a.from] = Some((i, false));
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if !dist[SINK].is_finite() {
            return None;
        }
        let mut v = SINK;
        let mut steps = 0;
        while v != SOURCE {
            let (i, forward) = via[v]?;
            if forward {
                arcs[i].flow += 1;
                v = arcs[i].from;
            } else {
                arcs[i].flow -= 1;
                v = arcs[i].to;
            }
            steps += 1;
            if steps > arcs.len() + nodes {
                return None;
            }
        }
    }

    let ranks: Vec<Vec<usize>> = slot_arc
        .iter()
        .map(|ids| ids.iter().map(|&i| arcs[i].flow).collect())
        .collect();
    for (f, pin) in pins.iter().enumerate() {
        if let Some(p) = pin {
            if &ranks[f] != p {
                return None;
            }
        }
    }
    Some(RankVector { ranks })
}

/// Orthogonal projections indexed by slot, with orthonormal frames spanning
/// their ranges.
#[derive(Debug, Clone)]
pub struct ProjectionFamily {
    pub dim: usize,
    pub label: String,
    pub projections: Vec<ComplexMatrix>,
    /// `frames[s]` is `dim × rank_s` with `frames[s]·frames[s]* = projections[s]`.
    pub frames: Vec<ComplexMatrix>,
}

impl ProjectionFamily {
    pub fn from_frames(label: impl Into<String>, dim: usize, frames: Vec<ComplexMatrix>) -> Self {
        ProjectionFamily {
            dim,
            label: label.into(),
            projections: frames.iter().map(frame_projection).collect(),
            frames,
        }
    }

    /// Accepts approximate projections; each frame spans the dominant
    /// eigenvectors, as many as the rounded trace.
    pub fn from_projections(
        label: impl Into<String>,
        dim: usize,
        projections: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let mut frames = Vec::with_capacity(projections.len());
        for p in &projections {
            if p.nrows() != dim || p.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.nrows(),
                });
            }
            let rank = p.trace().re.round().clamp(0.0, dim as f64) as usize;
            frames.push(range_frame(p, rank));
        }
        Ok(ProjectionFamily {
            dim,
            label: label.into(),
            projections,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.projections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projections.is_empty()
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.ncols()).collect()
    }

    /// Largest Frobenius violation among `P² = P`, `P* = P`, `P_jP_k = 0` and
    /// `Σ P = 1`.
    pub fn residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut sum = ComplexMatrix::zeros(self.dim, self.dim);
        for (j, p) in self.projections.iter().enumerate() {
            worst = worst.max((p * p - p).norm()).max((p.adjoint() - p).norm());
            for q in &self.projections[j + 1..] {
                worst = worst.max((p * q).norm());
            }
            sum += p;
        }
        worst.max((sum - identity(self.dim)).norm())
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let r = self.residual();
        if r > tol {
            return Err(Error::InvalidArgument(format!(
                "family `{}` violates projection invariants by {r:.3e}",
                self.label
            )));
        }
        Ok(())
    }

    /// `Σ c_s P_s`.
    pub fn combine(&self, coeffs: impl Fn(usize) -> num_complex::Complex64) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (s, p) in self.projections.iter().enumerate() {
            if self.frames[s].ncols() > 0 {
                out += p * coeffs(s);
            }
        }
        out
    }
}

#[derive(Serialize, Deserialize)]
struct FamilyWire {
    label: String,
    dim: usize,
    projections: Vec<MatrixJson>,
}

impl Serialize for ProjectionFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        FamilyWire {
            label: self.label.clone(),
            dim: self.dim,
            projections: self.projections.iter().cloned().map(MatrixJson).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProjectionFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = FamilyWire::deserialize(d)?;
        ProjectionFamily::from_projections(
            w.label,
            w.dim,
            w.projections.into_iter().map(|m| m.0).collect(),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Coordinate family `basis · diag(blocks of ones) · basis*`, blocks in slot
/// order.
pub fn synthesize_family(
    label: impl Into<String>,
    ranks: &[usize],
    basis: &ComplexMatrix,
) -> Result<ProjectionFamily> {
    let n = basis.nrows();
    let total: usize = ranks.iter().sum();
    if total != n || basis.ncols() != n {
        return Err(Error::RankMismatch(format!(
            "ranks sum to {total} for a basis of dimension {n}"
        )));
    }
    let mut frames = Vec::with_capacity(ranks.len());
    let mut at = 0;
    for &r in ranks {
        frames.push(basis.columns(at, r).into_owned());
        at += r;
    }
    Ok(ProjectionFamily::from_frames(label, n, frames))
}

/// Splits the range of the isometry `space` into pieces of the given ranks,
/// slot by slot: each piece is the dominant `rank`-dimensional eigenspace of
/// the approximate projection compressed to what is still unassigned.
fn corner_split(
    space: &ComplexMatrix,
    approx: &[&ComplexMatrix],
    ranks: &[usize],
    what: &dyn Fn() -> String,
) -> Result<Vec<ComplexMatrix>> {
    let n = space.nrows();
    let total: usize = ranks.iter().sum();
    if total != space.ncols() {
        return Err(Error::RankInfeasible(format!(
            "{}: ranks sum to {total} but the subspace has dimension {}",
            what(),
            space.ncols()
        )));
    }
    let mut rest = space.clone();
    let mut out = Vec::with_capacity(ranks.len());
    for (p, &r) in approx.iter().zip(ranks) {
        let d = rest.ncols();
        if r == 0 {
            out.push(ComplexMatrix::zeros(n, 0));
        } else if r == d {
            out.push(std::mem::replace(&mut rest, ComplexMatrix::zeros(n, 0)));
        } else {
            let compressed = compress(&rest, p);
            let (_, vecs) = hermitian_eig(&compressed);
            out.push(matmul(&rest, &vecs.columns(d - r, r).into_owned()));
            rest = matmul(&rest, &vecs.columns(0, d - r).into_owned());
        }
    }
    Ok(out)
}

/// Exact families with the prescribed ranks satisfying every equation of
/// `sys`, close to `approx`.
///
/// Family 1 is carved out of the whole space slot by slot; family `i+1` is
/// then carved, equation by equation, out of the subspace spanned by the
/// family-`i` slots on that equation's left side, so each equation holds as a
/// matrix identity by construction.
pub fn align_system(
    sys: &LinearProjectionSystem,
    approx: &[ProjectionFamily],
    ranks: &RankVector,
) -> Result<Vec<ProjectionFamily>> {
    let m = sys.num_families();
    if approx.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{} approximate families for {m} families",
            approx.len()
        )));
    }
    let n = approx[0].dim;
    for (f, fam) in approx.iter().enumerate() {
        if fam.dim != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: fam.dim,
            });
        }
        if fam.len() != sys.sizes[f] {
            return Err(Error::InvalidArgument(format!(
                "family {f} has {} slots, system expects {}",
                fam.len(),
                sys.sizes[f]
            )));
        }
    }
    ranks.check(sys, n)?;

    let mut frames: Vec<Vec<ComplexMatrix>> = Vec::with_capacity(m);
    let first: Vec<&ComplexMatrix> = approx[0].projections.iter().collect();
    frames.push(corner_split(
        &identity(n),
        &first,
        &ranks.ranks[0],
        &|| "family 1".to_string(),
    )?);
    for block in 0..m - 1 {
        let mut next = vec![ComplexMatrix::zeros(n, 0); sys.sizes[block + 1]];
        for (e, eq) in sys.block(block) {
            let left: Vec<&ComplexMatrix> = eq.left.iter().map(|&s| &frames[block][s]).collect();
            let space = hcat(n, &left);
            let targets: Vec<&ComplexMatrix> = eq
                .right
                .iter()
                .map(|&s| &approx[block + 1].projections[s])
                .collect();
            let r: Vec<usize> = eq
                .right
                .iter()
                .map(|&s| ranks.ranks[block + 1][s])
                .collect();
            let pieces = corner_split(&space, &targets, &r, &|| format!("equation {e}"))?;
            for (&s, piece) in eq.right.iter().zip(pieces) {
                next[s] = piece;
            }
        }
        frames.push(next);
    }
    Ok(frames
        .into_iter()
        .zip(approx)
        .map(|(f, a)| ProjectionFamily::from_frames(a.label.clone(), n, f))
        .collect())
}

/// Largest Frobenius violation of the equations of `sys` by `families`.
pub fn system_residual(sys: &LinearProjectionSystem, families: &[ProjectionFamily]) -> f64 {
    let n = families.first().map_or(0, |f| f.dim);
    sys.equations
        .iter()
        .map(|eq| {
            let mut diff = ComplexMatrix::zeros(n, n);
            for &s in &eq.left {
                diff += &families[eq.block].projections[s];
            }
            for &s in &eq.right {
                diff -= &families[eq.block + 1].projections[s];
            }
            diff.norm()
        })
        .fold(0.0, f64::max)
}

/// Unitary `V` with `V P_k V* = Q_k` for every slot, close to the hint `x`
/// when `x` nearly intertwines the families.
///
/// Each block `Q_k x P_k`, seen as a map from the range of `P_k` to that of
/// `Q_k`, is replaced by the unitary factor of its polar decomposition.
pub fn conjugating_unitary(
    p: &ProjectionFamily,
    q: &ProjectionFamily,
    x: &ComplexMatrix,
) -> Result<ComplexMatrix> {
    let n = p.dim;
    if q.dim != n || x.nrows() != n || x.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if q.dim != n { q.dim } else { x.nrows() },
        });
    }
    if p.len() != q.len() {
        return Err(Error::RankMismatch(format!(
            "families have {} and {} slots",
            p.len(),
            q.len()
        )));
    }
    for (k, (e, f)) in p.frames.iter().zip(&q.frames).enumerate() {
        if e.ncols() != f.ncols() {
            return Err(Error::RankMismatch(format!(
                "slot {k}: rank {} vs {}",
                e.ncols(),
                f.ncols()
            )));
        }
    }
    let total: usize = p.ranks().iter().sum();
    if total != n {
        return Err(Error::RankMismatch(format!(
            "family ranks sum to {total}, expected {n}"
        )));
    }
    let mut v = ComplexMatrix::zeros(n, n);
    for (e, f) in p.frames.iter().zip(&q.frames) {
        if e.ncols() == 0 {
            continue;
        }
        let block = matmul(&adjoint_matmul(f, x), e);
        let w = polar_unitary(&block).unitary;
        v += matmul(&matmul(f, &w), &e.adjoint());
    }
    Ok(v)
}
