//! Skew-symmetrizable exchange matrices, their mutation and relabeling, and
//! the exchange matrices attached to Dynkin diagrams.

use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::IntMatrix;

/// A skew-symmetrizable integer matrix together with its minimal symmetrizer.
///
/// The symmetrizer `d` satisfies `eps[i][j] * d[j] == -eps[j][i] * d[i]`, so
/// that `eps · D` is skew-symmetric. It is recomputed on construction and
/// reduced to the smallest positive integers on each connected component.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExchangeMatrix {
    entries: IntMatrix,
    d: Vec<i64>,
}

#[derive(Serialize, Deserialize)]
struct ExchangeMatrixRepr {
    n: usize,
    entries: Vec<Vec<i64>>,
    #[serde(default)]
    d: Option<Vec<i64>>,
}

impl ExchangeMatrix {
    pub fn new(entries: IntMatrix) -> Result<Self> {
        let d = symmetrizer(&entries)?;
        Ok(Self { entries, d })
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows)?)
    }

    /// Like [`ExchangeMatrix::new`], additionally checking a caller-supplied
    /// symmetrizer. Any positive multiple of the minimal one is accepted.
    pub fn with_symmetrizer(entries: IntMatrix, d: &[i64]) -> Result<Self> {
        let m = Self::new(entries)?;
        if d.len() != m.rank() {
            return Err(Error::DimensionMismatch {
                expected: m.rank(),
                found: d.len(),
            });
        }
        if d.iter().any(|&x| x < 1) {
            return Err(Error::NotSkewSymmetrizable(format!(
                "symmetrizer {d:?} is not positive"
            )));
        }
        let n = m.rank();
        for i in 0..n {
            for j in 0..n {
                if m.entries[(i, j)] * d[j] != -m.entries[(j, i)] * d[i] {
                    return Err(Error::NotSkewSymmetrizable(format!(
                        "supplied symmetrizer {d:?} fails at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(m)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: ExchangeMatrixRepr =
            serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let entries = IntMatrix::from_rows(&repr.entries)?;
        if entries.rank() != repr.n {
            return Err(Error::DimensionMismatch {
                expected: repr.n,
                found: entries.rank(),
            });
        }
        match repr.d {
            Some(d) => Self::with_symmetrizer(entries, &d),
            None => Self::new(entries),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("exchange matrix serializes")
    }

    pub fn rank(&self) -> usize {
        self.entries.rank()
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    pub fn symmetrizer(&self) -> &[i64] {
        &self.d
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[(i, j)]
    }

    /// The matrix of the opposite mutation class.
    pub fn negated(&self) -> Self {
        Self {
            entries: -&self.entries,
            d: self.d.clone(),
        }
    }

    /// Principal submatrix on the index set `indices` (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self> {
        for &i in indices {
            self.check_index(i)?;
        }
        let rows: Vec<Vec<i64>> = indices
            .iter()
            .map(|&i| indices.iter().map(|&j| self.get(i, j)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn mutate(&self, k: usize) -> Result<Self> {
        mutate_matrix(self, k)
    }

    pub fn relabel(&self, sigma: &Permutation) -> Result<Self> {
        relabel(self, sigma)
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        if k >= self.rank() {
            Err(Error::IndexOutOfRange {
                index: k,
                rank: self.rank(),
            })
        } else {
            Ok(())
        }
    }

    /// Transpositions `(a b)` with `d_a == d_b`; they generate the admissible
    /// relabelings.
    pub fn admissible_transpositions(&self) -> Vec<Permutation> {
        let n = self.rank();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.d[a] == self.d[b] {
                    out.push(Permutation::transposition(n, a, b));
                }
            }
        }
        out
    }
}

impl Serialize for ExchangeMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ExchangeMatrixRepr {
            n: self.rank(),
            entries: self.entries.rows(),
            d: Some(self.d.clone()),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ExchangeMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let repr = ExchangeMatrixRepr::deserialize(deserializer)?;
        let entries = IntMatrix::from_rows(&repr.entries).map_err(D::Error::custom)?;
        let m = match repr.d {
            Some(d) => ExchangeMatrix::with_symmetrizer(entries, &d),
            None => ExchangeMatrix::new(entries),
        };
        m.map_err(D::Error::custom)
    }
}

impl fmt::Display for ExchangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.entries)?;
        write!(f, "d = {:?}", self.d)
    }
}

/// Minimal positive symmetrizer, solved component by component.
pub fn symmetrizer(m: &IntMatrix) -> Result<Vec<i64>> {
    let n = m.rank();
    for i in 0..n {
        if m[(i, i)] != 0 {
            return Err(Error::NotSkewSymmetrizable(format!(
                "nonzero diagonal entry at {i}"
            )));
        }
        for j in 0..n {
            let (a, b) = (m[(i, j)], m[(j, i)]);
            if (a == 0) != (b == 0) || (a != 0 && a.signum() == b.signum()) {
                return Err(Error::NotSkewSymmetrizable(format!(
                    "entries ({i},{j})={a} and ({j},{i})={b} are not sign-skew"
                )));
            }
        }
    }

    let mut d: Vec<Option<Ratio<i64>>> = vec![None; n];
    let mut result = vec![0i64; n];
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(Ratio::from_integer(1));
        let mut component = vec![root];
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            let di = d[i].expect("visited");
            for j in 0..n {
                if m[(i, j)] == 0 {
                    continue;
                }
                // eps_ij d_j = -eps_ji d_i
                let dj = di * Ratio::new(-m[(j, i)], m[(i, j)]);
                match d[j] {
                    None => {
                        d[j] = Some(dj);
                        component.push(j);
                        stack.push(j);
                    }
                    Some(existing) if existing != dj => {
                        return Err(Error::NotSkewSymmetrizable(format!(
                            "inconsistent symmetrizer around index {j}"
                        )));
                    }
                    Some(_) => {}
                }
            }
        }
        let lcm = component
            .iter()
            .fold(1i64, |acc, &i| acc.lcm(d[i].expect("visited").denom()));
        let ints: Vec<i64> = component
            .iter()
            .map(|&i| (d[i].expect("visited") * lcm).to_integer())
            .collect();
        let gcd = ints.iter().fold(0i64, |acc, &x| acc.gcd(&x));
        for (&i, &x) in component.iter().zip(&ints) {
            result[i] = x / gcd;
        }
    }
    Ok(result)
}

/// Matrix mutation in direction `k` (0-based).
pub fn mutate_matrix(eps: &ExchangeMatrix, k: usize) -> Result<ExchangeMatrix> {
    eps.check_index(k)?;
    let n = eps.rank();
    let e = &eps.entries;
    let mut out = IntMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = if i == k || j == k {
                -e[(i, j)]
            } else {
                let (eik, ekj) = (e[(i, k)], e[(k, j)]);
                let t1 = eik.abs().checked_mul(ekj);
                let t2 = eik.checked_mul(ekj.abs());
                t1.zip(t2)
                    .and_then(|(a, b)| a.checked_add(b))
                    .and_then(|s| e[(i, j)].checked_add(s / 2))
                    .ok_or(Error::Overflow("matrix mutation"))?
            };
        }
    }
    Ok(ExchangeMatrix {
        entries: out,
        d: eps.d.clone(),
    })
}

/// A bijection of `{0, …, n-1}`, stored as the image list `sigma[i] = σ(i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            if x >= n || seen[x] {
                return Err(Error::InvalidPermutation(images));
            }
            seen[x] = true;
        }
        Ok(Self(images))
    }

    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Self {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(a, b);
        Self(p)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &s) in self.0.iter().enumerate() {
            inv[s] = i;
        }
        Self(inv)
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &s)| i == s)
    }

    /// Moves the entry at position `i` to position `σ(i)`.
    pub fn permute<T: Clone>(&self, v: &[T]) -> Vec<T> {
        let inv = self.inverse();
        (0..v.len()).map(|i| v[inv.0[i]].clone()).collect()
    }
}

/// `eps'_{ij} = eps_{σ⁻¹(i), σ⁻¹(j)}`; requires `d_{σ⁻¹(i)} = d_i`.
pub fn relabel(eps: &ExchangeMatrix, sigma: &Permutation) -> Result<ExchangeMatrix> {
    let n = eps.rank();
    if sigma.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: sigma.len(),
        });
    }
    let inv = sigma.inverse();
    if (0..n).any(|i| eps.d[inv.apply(i)] != eps.d[i]) {
        return Err(Error::SymmetrizerMismatch);
    }
    let mut out = IntMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[(i, j)] = eps.entries[(inv.apply(i), inv.apply(j))];
        }
    }
    Ok(ExchangeMatrix {
        entries: out,
        d: eps.d.clone(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Arrows point from smaller to larger labels.
    #[default]
    Linear,
    /// Alternating sources and sinks along the diagram.
    Bipartite,
}

impl FromStr for Orientation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Self::Linear),
            "bipartite" => Ok(Self::Bipartite),
            other => Err(Error::Parse(format!("unknown orientation {other:?}"))),
        }
    }
}

/// A (possibly decomposable) Dynkin type such as `A3`, `G2` or `A1xA1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynkinType {
    components: Vec<(char, usize)>,
}

impl DynkinType {
    pub fn new(family: char, rank: usize) -> Result<Self> {
        let family = family.to_ascii_uppercase();
        let ok = match family {
            'A' => rank >= 1,
            'B' => rank >= 2,
            'C' => rank >= 3,
            'D' => rank >= 4,
            'E' => (6..=8).contains(&rank),
            'F' => rank == 4,
            'G' => rank == 2,
            _ => false,
        };
        if ok {
            Ok(Self {
                components: vec![(family, rank)],
            })
        } else {
            Err(Error::InvalidType(format!("{family}{rank}")))
        }
    }

    pub fn components(&self) -> &[(char, usize)] {
        &self.components
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.1).sum()
    }
}

impl FromStr for DynkinType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut components = Vec::new();
        for part in s.trim().split(['x', 'X', '×']) {
            let mut chars = part.trim().chars();
            let family = chars
                .next()
                .ok_or_else(|| Error::InvalidType(s.to_string()))?;
            let rank: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::InvalidType(s.to_string()))?;
            components.extend(DynkinType::new(family, rank)?.components);
        }
        Ok(Self { components })
    }
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .components
            .iter()
            .map(|(c, r)| format!("{c}{r}"))
            .collect();
        write!(f, "{}", parts.join("x"))
    }
}

fn cartan_component(family: char, n: usize) -> IntMatrix {
    let mut a = IntMatrix::identity(n);
    for i in 0..n {
        a[(i, i)] = 2;
    }
    let link = |a: &mut IntMatrix, i: usize, j: usize| {
        a[(i, j)] = -1;
        a[(j, i)] = -1;
    };
    match family {
        'A' | 'B' | 'C' | 'F' | 'G' => {
            for i in 0..n.saturating_sub(1) {
                link(&mut a, i, i + 1);
            }
        }
        'D' => {
            for i in 0..n - 2 {
                link(&mut a, i, i + 1);
            }
            link(&mut a, n - 3, n - 1);
        }
        'E' => {
            link(&mut a, 0, 2);
            link(&mut a, 1, 3);
            for i in 2..n - 1 {
                link(&mut a, i, i + 1);
            }
        }
        _ => unreachable!("validated by DynkinType::new"),
    }
    match family {
        'B' => a[(n - 1, n - 2)] = -2,
        'C' => a[(n - 2, n - 1)] = -2,
        'F' => a[(1, 2)] = -2,
        'G' => a[(1, 0)] = -3,
        _ => {}
    }
    a
}

/// Cartan matrix (Bourbaki labeling), block diagonal for products.
pub fn cartan_matrix(ty: &DynkinType) -> IntMatrix {
    let n = ty.rank();
    let mut a = IntMatrix::zeros(n);
    let mut offset = 0;
    for &(family, r) in &ty.components {
        let block = cartan_component(family, r);
        for i in 0..r {
            for j in 0..r {
                a[(offset + i, offset + j)] = block[(i, j)];
            }
        }
        offset += r;
    }
    a
}

/// Exchange matrix with `|eps_ij| = -a_ij` off the diagonal.
pub fn build_cartan_seed(ty: &DynkinType, orientation: Orientation) -> Result<ExchangeMatrix> {
    let a = cartan_matrix(ty);
    let n = a.rank();
    let color = two_coloring(&a);
    let mut eps = IntMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            if i == j || a[(i, j)] == 0 {
                continue;
            }
            let source = match orientation {
                Orientation::Linear => i < j,
                Orientation::Bipartite => color[i] == 0,
            };
            eps[(i, j)] = if source { a[(i, j)] } else { -a[(i, j)] };
        }
    }
    ExchangeMatrix::new(eps)
}

fn two_coloring(a: &IntMatrix) -> Vec<u8> {
    let n = a.rank();
    let mut color = vec![u8::MAX; n];
    for root in 0..n {
        if color[root] != u8::MAX {
            continue;
        }
        color[root] = 0;
        let mut stack = vec![root];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if j != i && a[(i, j)] != 0 && color[j] == u8::MAX {
                    color[j] = 1 - color[i];
                    stack.push(j);
                }
            }
        }
    }
    color
}
