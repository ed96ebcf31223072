//! Finite groups and representations induced from central characters.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Largest group built from permutation generators.
pub const MAX_GROUP_ORDER: usize = 4096;
/// Largest Cayley table accepted; associativity is checked on all triples.
pub const MAX_TABLE_ORDER: usize = 512;

/// Finite group as a Cayley table on `0..order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroup {
    order: usize,
    table: Vec<usize>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FiniteGroup {
    /// Group generated by permutations of `0..degree`, with the product
    /// `(gh)(x) = g(h(x))`. Element 0 is the identity; the rest are numbered
    /// in breadth-first order over the generators.
    pub fn from_permutations(generators: &[Vec<usize>]) -> Result<Self> {
        let degree = generators.first().map_or(0, Vec::len);
        for g in generators {
            if g.len() != degree {
                return Err(Error::InvalidGroup(
                    "generators act on different numbers of points".into(),
                ));
            }
            let mut seen = vec![false; degree];
            for &x in g {
                if x >= degree || std::mem::replace(&mut seen[x], true) {
                    return Err(Error::InvalidGroup(format!("{g:?} is not a permutation")));
                }
            }
        }
        let compose =
            |g: &[usize], h: &[usize]| -> Vec<usize> { h.iter().map(|&x| g[x]).collect() };
        let mut elements: Vec<Vec<usize>> = vec![(0..degree).collect()];
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        index.insert(elements[0].clone(), 0);
        let mut next = 0;
        while next < elements.len() {
            for g in generators {
                let e = compose(g, &elements[next]);
                if !index.contains_key(&e) {
                    if elements.len() == MAX_GROUP_ORDER {
                        return Err(Error::InvalidGroup(format!(
                            "group order exceeds {MAX_GROUP_ORDER}"
                        )));
                    }
                    index.insert(e.clone(), elements.len());
                    elements.push(e);
                }
            }
            next += 1;
        }
        let n = elements.len();
        let mut table = vec![0; n * n];
        for (i, g) in elements.iter().enumerate() {
            for (j, h) in elements.iter().enumerate() {
                table[i * n + j] = index[&compose(g, h)];
            }
        }
        Ok(Self::assemble(n, table, 0))
    }

    /// Validates a Cayley table: Latin square, two-sided identity and
    /// associativity.
    pub fn from_table(rows: &[Vec<usize>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidGroup("empty table".into()));
        }
        if n > MAX_TABLE_ORDER {
            return Err(Error::InvalidGroup(format!(
                "table order {n} exceeds {MAX_TABLE_ORDER}"
            )));
        }
        let mut table = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n || r.iter().any(|&x| x >= n) {
                return Err(Error::InvalidGroup("table is not n×n over 0..n".into()));
            }
            table.extend_from_slice(r);
        }
        for i in 0..n {
            let mut row = vec![false; n];
            let mut col = vec![false; n];
            for j in 0..n {
                if std::mem::replace(&mut row[table[i * n + j]], true)
                    || std::mem::replace(&mut col[table[j * n + i]], true)
                {
                    return Err(Error::InvalidGroup("table is not a Latin square".into()));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| table[e * n + g] == g && table[g * n + e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                let ab = table[a * n + b];
                for c in 0..n {
                    if table[ab * n + c] != table[a * n + table[b * n + c]] {
                        return Err(Error::InvalidGroup(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        Ok(Self::assemble(n, table, identity))
    }

    fn assemble(order: usize, table: Vec<usize>, identity: usize) -> Self {
        let inverses = (0..order)
            .map(|g| {
                (0..order)
                    .find(|&h| table[g * order + h] == identity)
                    .expect("Latin square has inverses")
            })
            .collect();
        FiniteGroup {
            order,
            table,
            identity,
            inverses,
        }
    }

    pub fn cyclic(n: usize) -> Result<Self> {
        Self::abelian(&[n])
    }

    /// `Z_{n_1} × … × Z_{n_k}`, element index in mixed radix with the last
    /// factor fastest.
    pub fn abelian(orders: &[usize]) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::InvalidGroup(
                "cyclic factors must be nonempty".into(),
            ));
        }
        let n = orders
            .iter()
            .try_fold(1usize, |acc, &m| acc.checked_mul(m))
            .filter(|&n| n <= MAX_GROUP_ORDER)
            .ok_or_else(|| Error::InvalidGroup(format!("group order exceeds {MAX_GROUP_ORDER}")))?;
        let digits = |mut x: usize| {
            let mut d = vec![0; orders.len()];
            for (k, &m) in orders.iter().enumerate().rev() {
                d[k] = x % m;
                x /= m;
            }
            d
        };
        let mut table = vec![0; n * n];
        for i in 0..n {
            let a = digits(i);
            for j in 0..n {
                let b = digits(j);
                table[i * n + j] = orders
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &m)| acc * m + (a[k] + b[k]) % m);
            }
        }
        Ok(Self::assemble(n, table, 0))
    }

    /// Dihedral group of order `2n` acting on the vertices of an `n`-gon.
    pub fn dihedral(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidGroup("dihedral groups need n ≥ 3".into()));
        }
        let rotation = (0..n).map(|i| (i + 1) % n).collect();
        let reflection = (0..n).map(|i| (n - i) % n).collect();
        Self::from_permutations(&[rotation, reflection])
    }

    pub fn symmetric(n: usize) -> Result<Self> {
        if n < 2 {
            return Self::from_permutations(&[]);
        }
        let cycle = (0..n).map(|i| (i + 1) % n).collect();
        let mut swap: Vec<usize> = (0..n).collect();
        swap.swap(0, 1);
        Self::from_permutations(&[cycle, swap])
    }

    /// Direct product; `(g, h)` has index `g·|H| + h`.
    pub fn direct_product(&self, other: &FiniteGroup) -> Result<Self> {
        let (n, m) = (self.order, other.order);
        let order = n
            .checked_mul(m)
            .filter(|&o| o <= MAX_GROUP_ORDER)
            .ok_or_else(|| Error::InvalidGroup(format!("group order exceeds {MAX_GROUP_ORDER}")))?;
        let mut table = vec![0; order * order];
        for i in 0..order {
            for j in 0..order {
                table[i * order + j] = self.mul(i / m, j / m) * m + other.mul(i % m, j % m);
            }
        }
        Ok(Self::assemble(
            order,
            table,
            self.identity * m + other.identity,
        ))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.order + b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != self.identity {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    /// Elements commuting with every element, in increasing order.
    pub fn center(&self) -> Vec<usize> {
        (0..self.order)
            .filter(|&z| (0..self.order).all(|g| self.mul(z, g) == self.mul(g, z)))
            .collect()
    }

    pub fn is_abelian(&self) -> bool {
        self.center().len() == self.order
    }

    /// Cayley table rows.
    pub fn table(&self) -> Vec<Vec<usize>> {
        self.table
            .chunks(self.order)
            .map(<[usize]>::to_vec)
            .collect()
    }
}

/// On-disk group description: permutation generators or a Cayley table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupFile {
    Generators { generators: Vec<Vec<usize>> },
    Table { table: Vec<Vec<usize>> },
}

impl GroupFile {
    pub fn build(&self) -> Result<FiniteGroup> {
        match self {
            GroupFile::Generators { generators } => FiniteGroup::from_permutations(generators),
            GroupFile::Table { table } => FiniteGroup::from_table(table),
        }
    }
}

/// A character `χ` of a central subgroup `H₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentralCharacterSpec {
    pub subgroup: Vec<usize>,
    pub values: Vec<Complex64>,
}

const CHARACTER_TOL: f64 = 1e-12;

impl CentralCharacterSpec {
    /// `χ(z^j) = e^{2πi·j·l/ord(z)}` on the cyclic subgroup generated by `z`.
    pub fn cyclic(g: &FiniteGroup, z: usize, l: i64) -> Result<Self> {
        if z >= g.order() {
            return Err(Error::InvalidArgument(format!("element {z} out of range")));
        }
        let k = g.element_order(z);
        let mut subgroup = Vec::with_capacity(k);
        let mut values = Vec::with_capacity(k);
        let mut x = g.identity();
        for j in 0..k {
            subgroup.push(x);
            let e = (j as i128 * l as i128).rem_euclid(k as i128) as usize;
            values.push(crate::linalg::root_of_unity(e, k));
            x = g.mul(x, z);
        }
        Ok(CentralCharacterSpec { subgroup, values })
    }

    /// Trivial character of `{e}`.
    pub fn trivial(g: &FiniteGroup) -> Self {
        CentralCharacterSpec {
            subgroup: vec![g.identity()],
            values: vec![Complex64::new(1.0, 0.0)],
        }
    }

    fn lookup(&self, g: &FiniteGroup) -> Result<Vec<Option<Complex64>>> {
        if self.subgroup.len() != self.values.len() || self.subgroup.is_empty() {
            return Err(Error::InvalidArgument(
                "subgroup and values must be nonempty and of equal length".into(),
            ));
        }
        let mut chi = vec![None; g.order()];
        for (&h, &v) in self.subgroup.iter().zip(&self.values) {
            if h >= g.order() {
                return Err(Error::InvalidArgument(format!("element {h} out of range")));
            }
            if chi[h].replace(v).is_some() {
                return Err(Error::InvalidArgument(format!("element {h} listed twice")));
            }
        }
        Ok(chi)
    }

    /// Checks that `H₀` is a central subgroup and `χ` a unitary character.
    pub fn validate(&self, g: &FiniteGroup) -> Result<()> {
        let chi = self.lookup(g)?;
        let center = g.center();
        for (&h, v) in self.subgroup.iter().zip(&self.values) {
            if center.binary_search(&h).is_err() {
                return Err(Error::InvalidArgument(format!(
                    "element {h} is not central"
                )));
            }
            if (v.norm() - 1.0).abs() > CHARACTER_TOL {
                return Err(Error::InvalidArgument(format!(
                    "χ({h}) does not have modulus one"
                )));
            }
        }
        for (&a, &va) in self.subgroup.iter().zip(&self.values) {
            for (&b, &vb) in self.subgroup.iter().zip(&self.values) {
                let ab = g.mul(a, b);
                let vab = chi[ab].ok_or_else(|| {
                    Error::InvalidArgument("subgroup is not closed under products".into())
                })?;
                if (vab - va * vb).norm() > CHARACTER_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "χ is not multiplicative at ({a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Normalized trace at `x` of the representation induced from a central
/// character: `χ(x)` on `H₀` and 0 off it.
pub fn induced_central_trace(
    g: &FiniteGroup,
    spec: &CentralCharacterSpec,
    x: usize,
) -> Result<Complex64> {
    spec.validate(g)?;
    if x >= g.order() {
        return Err(Error::InvalidArgument(format!("element {x} out of range")));
    }
    Ok(spec
        .subgroup
        .iter()
        .position(|&h| h == x)
        .map_or(Complex64::new(0.0, 0.0), |i| spec.values[i]))
}

/// Monomial matrix `e_j ↦ phases[j]·e_{perm[j]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialMatrix {
    pub perm: Vec<usize>,
    pub phases: Vec<Complex64>,
}

impl MonomialMatrix {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    pub fn normalized_trace(&self) -> Complex64 {
        let s: Complex64 = (0..self.dim())
            .filter(|&j| self.perm[j] == j)
            .map(|j| self.phases[j])
            .sum();
        s / self.dim() as f64
    }

    /// `self · other`.
    pub fn mul(&self, other: &MonomialMatrix) -> MonomialMatrix {
        let perm = other.perm.iter().map(|&k| self.perm[k]).collect();
        let phases = (0..other.dim())
            .map(|j| self.phases[other.perm[j]] * other.phases[j])
            .collect();
        MonomialMatrix { perm, phases }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut m = ComplexMatrix::zeros(n, n);
        for j in 0..n {
            m[(self.perm[j], j)] = self.phases[j];
        }
        m
    }
}

/// The induced representation `Ind_{H₀}^G χ` in the basis of left coset
/// representatives `t_1, …, t_r` (least index first): `x t_j = t_k h` gives
/// `ρ(x) e_j = χ(h) e_k`. Entry `x` of the result is `ρ(x)`.
pub fn induced_representation(
    g: &FiniteGroup,
    spec: &CentralCharacterSpec,
) -> Result<Vec<MonomialMatrix>> {
    spec.validate(g)?;
    let chi = spec.lookup(g)?;
    let n = g.order();
    let mut coset = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for t in 0..n {
        if coset[t] == usize::MAX {
            for &h in &spec.subgroup {
                coset[g.mul(t, h)] = reps.len();
            }
            reps.push(t);
        }
    }
    Ok((0..n)
        .map(|x| {
            let mut perm = Vec::with_capacity(reps.len());
            let mut phases = Vec::with_capacity(reps.len());
            for &t in &reps {
                let xt = g.mul(x, t);
                let k = coset[xt];
                let h = g.mul(g.inverse(reps[k]), xt);
                perm.push(k);
                phases.push(chi[h].expect("coset decomposition lands in the subgroup"));
            }
            MonomialMatrix { perm, phases }
        })
        .collect())
}

/// Largest gap over all elements between [`induced_central_trace`] and the
/// normalized trace of the explicit induced representation.
pub fn verify_induced_trace(g: &FiniteGroup, spec: &CentralCharacterSpec) -> Result<f64> {
    let rho = induced_representation(g, spec)?;
    let mut worst = 0.0f64;
    for (x, m) in rho.iter().enumerate() {
        worst = worst.max((induced_central_trace(g, spec, x)? - m.normalized_trace()).norm());
    }
    Ok(worst)
}
