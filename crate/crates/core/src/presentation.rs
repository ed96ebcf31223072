//! Group presentations, words, and the relation defect of a tuple of
//! unitaries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    assert_unitary, hs_norm, identity, matmul, matrix_power, ComplexMatrix, MatrixJson,
};

/// A word in the generators and their inverses, kept in normal form: no zero
/// exponents and no two adjacent letters on the same generator.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<(usize, i64)>", into = "Vec<(usize, i64)>")]
pub struct Word {
    letters: Vec<(usize, i64)>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn new(letters: impl IntoIterator<Item = (usize, i64)>) -> Self {
        let mut out: Vec<(usize, i64)> = Vec::new();
        for (g, e) in letters {
            match out.last_mut() {
                Some((last, exp)) if *last == g => {
                    *exp += e;
                    if *exp == 0 {
                        out.pop();
                    }
                }
                _ if e != 0 => out.push((g, e)),
                _ => {}
            }
        }
        Word { letters: out }
    }

    pub fn letters(&self) -> &[(usize, i64)] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word::new(self.letters.iter().rev().map(|&(g, e)| (g, -e)))
    }

    pub fn concat(&self, other: &Word) -> Self {
        Word::new(self.letters.iter().chain(other.letters.iter()).cloned())
    }

    /// `[x, y] = x y x⁻¹ y⁻¹`.
    pub fn commutator(x: &Word, y: &Word) -> Self {
        x.concat(y).concat(&x.inverse()).concat(&y.inverse())
    }

    pub fn generator(g: usize) -> Self {
        Word::new([(g, 1)])
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.0).max()
    }
}

impl From<Vec<(usize, i64)>> for Word {
    fn from(v: Vec<(usize, i64)>) -> Self {
        Word::new(v)
    }
}

impl From<Word> for Vec<(usize, i64)> {
    fn from(w: Word) -> Self {
        w.letters
    }
}

/// Which of the supported presentation families a presentation belongs to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresentationKind {
    /// `⟨x₁,…,x_m | x_i^{a_i} = x_{i+1}^{b_i}⟩`.
    Chain {
        a: Vec<u64>,
        b: Vec<u64>,
    },
    /// `⟨u, x₁,…,x_m | u x₁ u⁻¹ = x_m, x_i^{a_i} = x_{i+1}^{b_i}⟩` with
    /// `Π a_i = Π b_i`; `u` is generator 0.
    HnnChain {
        a: Vec<u64>,
        b: Vec<u64>,
    },
    Generic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    pub num_generators: usize,
    pub relators: Vec<Word>,
    pub kind: PresentationKind,
}

impl GroupPresentation {
    pub fn generic(num_generators: usize, relators: Vec<Word>) -> Result<Self> {
        for r in &relators {
            if let Some(g) = r.max_generator() {
                if g >= num_generators {
                    return Err(Error::GeneratorOutOfRange {
                        index: g,
                        generators: num_generators,
                    });
                }
            }
        }
        Ok(GroupPresentation {
            num_generators,
            relators,
            kind: PresentationKind::Generic,
        })
    }

    /// Orders `N_i` of the finite-order parts of the chain generators, for
    /// chain and hnn-chain presentations.
    pub fn orders(&self) -> Option<Vec<u64>> {
        match &self.kind {
            PresentationKind::Chain { a, b } | PresentationKind::HnnChain { a, b } => {
                chain_orders(a, b).ok()
            }
            PresentationKind::Generic => None,
        }
    }

    /// Generator indices of `x₁,…,x_m`.
    pub fn chain_generators(&self) -> std::ops::Range<usize> {
        match self.kind {
            PresentationKind::HnnChain { .. } => 1..self.num_generators,
            _ => 0..self.num_generators,
        }
    }

    pub fn exponents(&self) -> Option<(&[u64], &[u64])> {
        match &self.kind {
            PresentationKind::Chain { a, b } | PresentationKind::HnnChain { a, b } => Some((a, b)),
            PresentationKind::Generic => None,
        }
    }

    /// Short textual name, e.g. `chain:2,5:3,7`; parsed back by
    /// [`GroupPresentation::parse_preset`] for the preset families.
    pub fn label(&self) -> String {
        let join = |v: &[u64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        match &self.kind {
            PresentationKind::Chain { a, b } => format!("chain:{}:{}", join(a), join(b)),
            PresentationKind::HnnChain { a, b } => format!("hnn:{}:{}", join(a), join(b)),
            PresentationKind::Generic if *self == preset_heisenberg() => "heisenberg".into(),
            PresentationKind::Generic => format!("generic:{}", self.num_generators),
        }
    }

    /// Parses `chain:2,5:3,7`, `hnn:2,3:3,2` (or `hnn-chain:…`) and
    /// `heisenberg`.
    pub fn parse_preset(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        if spec == "heisenberg" {
            return Ok(preset_heisenberg());
        }
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::InvalidPresentation(format!("cannot parse preset `{spec}`"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let nums = |s: &str| -> Result<Vec<u64>> {
            s.split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
                .collect()
        };
        let (a, b) = (nums(parts[1])?, nums(parts[2])?);
        match parts[0] {
            "chain" => preset_chain(&a, &b),
            "hnn" | "hnn-chain" => preset_case2(&a, &b),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for GroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// `N_i = b₁⋯b_{i−1}·a_i⋯a_{m−1}` for `i = 1..m`, in checked 128-bit
/// arithmetic.
pub fn chain_orders(a: &[u64], b: &[u64]) -> Result<Vec<u64>> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidPresentation(
            "exponent lists must be nonempty and of equal length".into(),
        ));
    }
    let m = a.len() + 1;
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut n: u128 = 1;
        for &x in b[..i].iter().chain(&a[i..]) {
            n = n.checked_mul(x as u128).ok_or(Error::Overflow("N_i"))?;
        }
        out.push(u64::try_from(n).map_err(|_| Error::Overflow("N_i"))?);
    }
    Ok(out)
}

fn validate_exponents(a: &[u64], b: &[u64]) -> Result<()> {
    if a.len() != b.len() || a.is_empty() {
        return Err(Error::InvalidPresentation(
            "exponent lists must be nonempty and of equal length".into(),
        ));
    }
    if let Some(x) = a.iter().chain(b).find(|&&x| x < 2) {
        return Err(Error::InvalidPresentation(format!(
            "exponent {x} is below 2"
        )));
    }
    Ok(())
}

fn chain_relators(a: &[u64], b: &[u64], offset: usize) -> Vec<Word> {
    (0..a.len())
        .map(|i| Word::new([(offset + i, a[i] as i64), (offset + i + 1, -(b[i] as i64))]))
        .collect()
}

/// `⟨x₁,…,x_m | x_i^{a_i} x_{i+1}^{−b_i}⟩`.
pub fn preset_chain(a: &[u64], b: &[u64]) -> Result<GroupPresentation> {
    validate_exponents(a, b)?;
    chain_orders(a, b)?;
    Ok(GroupPresentation {
        num_generators: a.len() + 1,
        relators: chain_relators(a, b, 0),
        kind: PresentationKind::Chain {
            a: a.to_vec(),
            b: b.to_vec(),
        },
    })
}

/// `⟨u, x₁,…,x_m | u x₁ u⁻¹ x_m⁻¹, x_i^{a_i} x_{i+1}^{−b_i}⟩`, requiring
/// `Π a_i = Π b_i`.
pub fn preset_case2(a: &[u64], b: &[u64]) -> Result<GroupPresentation> {
    validate_exponents(a, b)?;
    let prod = |v: &[u64]| {
        v.iter()
            .try_fold(1u128, |acc, &x| acc.checked_mul(x as u128))
            .ok_or(Error::Overflow("exponent product"))
    };
    let (pa, pb) = (prod(a)?, prod(b)?);
    if pa != pb {
        return Err(Error::InvalidPresentation(format!(
            "hnn-chain needs equal exponent products, got {pa} and {pb}"
        )));
    }
    let orders = chain_orders(a, b)?;
    debug_assert_eq!(orders[0], orders[orders.len() - 1]);
    let m = a.len() + 1;
    let mut relators = vec![Word::new([(0, 1), (1, 1), (0, -1), (m, -1)])];
    relators.extend(chain_relators(a, b, 1));
    Ok(GroupPresentation {
        num_generators: m + 1,
        relators,
        kind: PresentationKind::HnnChain {
            a: a.to_vec(),
            b: b.to_vec(),
        },
    })
}

/// Discrete Heisenberg group: `u` and `v` commute with `[u, v]`.
pub fn preset_heisenberg() -> GroupPresentation {
    let u = Word::generator(0);
    let v = Word::generator(1);
    let c = Word::commutator(&u, &v);
    GroupPresentation {
        num_generators: 2,
        relators: vec![Word::commutator(&u, &c), Word::commutator(&v, &c)],
        kind: PresentationKind::Generic,
    }
}

/// One unitary per generator, all of the same dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryTuple {
    pub dim: usize,
    pub matrices: Vec<ComplexMatrix>,
}

impl UnitaryTuple {
    /// Validates shapes and unitarity at `tol`.
    pub fn new(matrices: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let dim = matrices.first().map(|m| m.nrows()).unwrap_or(0);
        for m in &matrices {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
            assert_unitary(m, tol)?;
        }
        Ok(UnitaryTuple { dim, matrices })
    }

    pub(crate) fn from_parts(dim: usize, matrices: Vec<ComplexMatrix>) -> Self {
        UnitaryTuple { dim, matrices }
    }

    pub fn identity(num_generators: usize, dim: usize) -> Self {
        UnitaryTuple {
            dim,
            matrices: vec![identity(dim); num_generators],
        }
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// `q · t · q*` applied to every matrix.
    pub fn conjugate(&self, q: &ComplexMatrix) -> Self {
        let qa = q.adjoint();
        UnitaryTuple {
            dim: self.dim,
            matrices: self
                .matrices
                .iter()
                .map(|m| matmul(&matmul(q, m), &qa))
                .collect(),
        }
    }

    /// Per-generator `‖U_i − V_i‖₂`.
    pub fn distances(&self, other: &UnitaryTuple) -> Vec<f64> {
        self.matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| hs_norm(&(a - b)))
            .collect()
    }
}

/// On-disk form of a tuple: the matrices plus the presentation they are
/// meant to represent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TupleFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presentation: Option<String>,
    pub matrices: Vec<MatrixJson>,
}

impl TupleFile {
    pub fn new(presentation: Option<&GroupPresentation>, tuple: &UnitaryTuple) -> Self {
        TupleFile {
            presentation: presentation.map(|p| p.label()),
            matrices: tuple.matrices.iter().cloned().map(MatrixJson).collect(),
        }
    }

    pub fn into_tuple(self, tol: f64) -> Result<UnitaryTuple> {
        UnitaryTuple::new(self.matrices.into_iter().map(|m| m.0).collect(), tol)
    }
}

/// Presentation file:
/// `{"generators": s, "relators": [[[gen, exp], …], …], "case": …, "a": […], "b": […]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PresentationFile {
    pub generators: usize,
    pub relators: Vec<Word>,
    pub case: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub a: Vec<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub b: Vec<u64>,
}

impl From<&GroupPresentation> for PresentationFile {
    fn from(p: &GroupPresentation) -> Self {
        let (case, a, b) = match &p.kind {
            PresentationKind::Chain { a, b } => ("chain", a.clone(), b.clone()),
            PresentationKind::HnnChain { a, b } => ("hnn-chain", a.clone(), b.clone()),
            PresentationKind::Generic => ("generic", Vec::new(), Vec::new()),
        };
        PresentationFile {
            generators: p.num_generators,
            relators: p.relators.clone(),
            case: case.into(),
            a,
            b,
        }
    }
}

impl TryFrom<PresentationFile> for GroupPresentation {
    type Error = Error;

    fn try_from(f: PresentationFile) -> Result<Self> {
        let built = match f.case.as_str() {
            "chain" => preset_chain(&f.a, &f.b)?,
            "hnn-chain" => preset_case2(&f.a, &f.b)?,
            "generic" => return GroupPresentation::generic(f.generators, f.relators),
            other => {
                return Err(Error::InvalidPresentation(format!(
                    "unknown case `{other}`"
                )))
            }
        };
        if built.num_generators != f.generators || built.relators != f.relators {
            return Err(Error::InvalidPresentation(format!(
                "relators do not match the {} exponent data",
                f.case
            )));
        }
        Ok(built)
    }
}

/// Product of the letters in word order; negative exponents use adjoints.
pub fn evaluate_word(w: &Word, t: &UnitaryTuple) -> Result<ComplexMatrix> {
    let mut out = identity(t.dim);
    for &(g, e) in w.letters() {
        let m = t.matrices.get(g).ok_or(Error::GeneratorOutOfRange {
            index: g,
            generators: t.len(),
        })?;
        let factor = if e > 0 {
            matrix_power(m, e as u64)
        } else {
            matrix_power(&m.adjoint(), e.unsigned_abs())
        };
        out = matmul(&out, &factor);
    }
    Ok(out)
}

/// `‖r_j(U) − 1‖₂` for every relator.
pub fn relator_defects(p: &GroupPresentation, t: &UnitaryTuple) -> Result<Vec<f64>> {
    if t.len() != p.num_generators {
        return Err(Error::DimensionMismatch {
            expected: p.num_generators,
            found: t.len(),
        });
    }
    let one = identity(t.dim);
    p.relators
        .iter()
        .map(|r| Ok(hs_norm(&(evaluate_word(r, t)? - &one))))
        .collect()
}

/// `max_j ‖r_j(U) − 1‖₂`.
pub fn relation_defect(p: &GroupPresentation, t: &UnitaryTuple) -> Result<f64> {
    Ok(relator_defects(p, t)?.into_iter().fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use num_complex::Complex64;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn pair() -> UnitaryTuple {
        let u = ComplexMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let v = ComplexMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        UnitaryTuple::new(vec![u, v], 1e-12).unwrap()
    }

    #[test]
    fn word_normal_form() {
        let w = Word::new([(0, 2), (0, -2), (1, 1), (1, 2), (0, 0)]);
        assert_eq!(w.letters(), &[(1, 3)]);
        assert!(Word::new([(0, 1), (0, -1)]).is_identity());
        let x = Word::generator(0);
        assert!(x.concat(&x.inverse()).is_identity());
    }

    #[test]
    fn evaluate_examples() {
        let t = pair();
        let e = evaluate_word(&Word::identity(), &t).unwrap();
        assert_eq!(e, identity(2));
        let cancel = Word::from(vec![(0, 1), (0, -1)]);
        assert_eq!(evaluate_word(&cancel, &t).unwrap(), identity(2));
        let comm = Word::commutator(&Word::generator(0), &Word::generator(1));
        let m = evaluate_word(&comm, &t).unwrap();
        assert!((m + identity(2)).norm() < 1e-15);
        assert!(matches!(
            evaluate_word(&Word::generator(5), &t),
            Err(Error::GeneratorOutOfRange { index: 5, .. })
        ));
    }

    #[test]
    fn defect_examples() {
        let comm = Word::commutator(&Word::generator(0), &Word::generator(1));
        let p = GroupPresentation::generic(2, vec![comm]).unwrap();
        assert!((relation_defect(&p, &pair()).unwrap() - 2.0).abs() < 1e-15);
        for p in [
            preset_chain(&[2, 5], &[3, 7]).unwrap(),
            preset_case2(&[2, 3], &[3, 2]).unwrap(),
            preset_heisenberg(),
        ] {
            let t = UnitaryTuple::identity(p.num_generators, 4);
            assert_eq!(relation_defect(&p, &t).unwrap(), 0.0);
        }
    }

    #[test]
    fn chain_preset_worked_example() {
        let p = preset_chain(&[2, 5], &[3, 7]).unwrap();
        assert_eq!(p.num_generators, 3);
        assert_eq!(p.relators[0].letters(), &[(0, 2), (1, -3)]);
        assert_eq!(p.relators[1].letters(), &[(1, 5), (2, -7)]);
        assert_eq!(p.orders().unwrap(), vec![10, 15, 21]);
        assert_eq!(
            preset_chain(&[2], &[2]).unwrap().relators[0].letters(),
            &[(0, 2), (1, -2)]
        );
        assert_eq!(
            preset_chain(&[3, 2], &[2, 3]).unwrap().orders().unwrap(),
            vec![6, 4, 6]
        );
        assert!(preset_chain(&[1, 5], &[3, 7]).is_err());
        assert!(preset_chain(&[2], &[2, 3]).is_err());
    }

    #[test]
    fn case2_presets() {
        let p = preset_case2(&[2, 3], &[3, 2]).unwrap();
        assert_eq!(p.orders().unwrap(), vec![6, 9, 6]);
        assert_eq!(p.chain_generators(), 1..4);
        let p = preset_case2(&[2], &[2]).unwrap();
        assert_eq!(p.relators[0].letters(), &[(0, 1), (1, 1), (0, -1), (2, -1)]);
        assert_eq!(p.relators[1].letters(), &[(1, 2), (2, -2)]);
        assert!(preset_case2(&[4, 3], &[2, 6]).is_ok());
        assert!(preset_case2(&[2, 5], &[3, 7]).is_err());
    }

    #[test]
    fn orders_detect_overflow() {
        let a = vec![1u64 << 40, 1 << 40];
        let b = vec![2, 2];
        assert!(matches!(chain_orders(&a, &b), Err(Error::Overflow(_))));
    }

    #[test]
    fn heisenberg_relators() {
        let p = preset_heisenberg();
        assert_eq!(p.relators.len(), 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = UnitaryTuple::new(
            vec![haar_unitary(3, &mut rng), haar_unitary(3, &mut rng)],
            1e-10,
        )
        .unwrap();
        assert!(relation_defect(&p, &t).unwrap() > 1e-3);
    }

    #[test]
    fn defect_is_conjugation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = preset_chain(&[2, 5], &[3, 7]).unwrap();
        let t =
            UnitaryTuple::new((0..3).map(|_| haar_unitary(6, &mut rng)).collect(), 1e-10).unwrap();
        let q = haar_unitary(6, &mut rng);
        let d0 = relation_defect(&p, &t).unwrap();
        let d1 = relation_defect(&p, &t.conjugate(&q)).unwrap();
        assert!((d0 - d1).abs() < 1e-10);
    }

    #[test]
    fn preset_labels_round_trip() {
        for s in ["chain:2,5:3,7", "hnn:2,3:3,2", "heisenberg"] {
            let p = GroupPresentation::parse_preset(s).unwrap();
            assert_eq!(p.label(), s);
        }
        assert!(GroupPresentation::parse_preset("chain:2,x:3,7").is_err());
    }

    #[test]
    fn presentation_file_round_trip() {
        let p = preset_case2(&[2, 3], &[3, 2]).unwrap();
        let json = serde_json::to_string(&PresentationFile::from(&p)).unwrap();
        assert!(json.contains(r#""case":"hnn-chain""#));
        let back: PresentationFile = serde_json::from_str(&json).unwrap();
        assert_eq!(GroupPresentation::try_from(back).unwrap(), p);
        let mut tampered = PresentationFile::from(&p);
        tampered.relators.pop();
        assert!(GroupPresentation::try_from(tampered).is_err());
    }
}
