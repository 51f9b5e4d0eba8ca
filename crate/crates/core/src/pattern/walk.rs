use serde::Serialize;

use crate::error::{Error, Result};
use crate::exchange::{ExchangeMatrix, Permutation};
use crate::fpoly::{mutate_f, FPolynomial};
use crate::matrix::IntMatrix;

/// One edge of the labeled exchange graph, seen from its source.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Step {
    Mutation { k: usize },
    Permutation { sigma: Permutation },
}

impl Step {
    pub fn mutation(k: usize) -> Self {
        Step::Mutation { k }
    }

    pub fn inverse(&self) -> Self {
        match self {
            Step::Mutation { k } => Step::Mutation { k: *k },
            Step::Permutation { sigma } => Step::Permutation {
                sigma: sigma.inverse(),
            },
        }
    }
}

/// Inverse of a path: reversed, each step inverted.
pub fn invert_path(path: &[Step]) -> Vec<Step> {
    path.iter().rev().map(Step::inverse).collect()
}

/// Tropical X-transformation of an integer vector in direction `k`.
pub(crate) fn tropical_mutate_int(x: &mut [i64], eps: &ExchangeMatrix, k: usize) -> Result<()> {
    let xk = x[k];
    for (i, xi) in x.iter_mut().enumerate() {
        if i == k {
            continue;
        }
        let coef = (xk.signum() * eps.get(i, k)).max(0);
        *xi = coef
            .checked_mul(xk)
            .and_then(|t| xi.checked_add(t))
            .ok_or(Error::Overflow("tropical transport"))?;
    }
    x[k] = -xk;
    Ok(())
}

/// Exchange matrix, C-matrix and F-polynomials relative to a starting seed,
/// carried along a path in the exchange graph.
///
/// Column `j` of `c` is the image of the `j`-th basis vector of the starting
/// chart; its rows are the c-vectors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeedWalk {
    pub eps: ExchangeMatrix,
    pub c: IntMatrix,
    pub fs: Option<Vec<FPolynomial>>,
}

impl SeedWalk {
    pub fn start(eps: ExchangeMatrix) -> Self {
        let n = eps.rank();
        Self {
            eps,
            c: IntMatrix::identity(n),
            fs: Some(vec![FPolynomial::one(n); n]),
        }
    }

    /// A walk that skips the F-polynomials (only `eps` and `c`).
    pub fn start_tropical(eps: ExchangeMatrix) -> Self {
        let n = eps.rank();
        Self {
            eps,
            c: IntMatrix::identity(n),
            fs: None,
        }
    }

    pub fn step(&self, step: &Step) -> Result<Self> {
        match step {
            Step::Mutation { k } => self.mutate(*k),
            Step::Permutation { sigma } => self.relabel(sigma),
        }
    }

    pub fn walk(&self, path: &[Step]) -> Result<Self> {
        path.iter().try_fold(self.clone(), |w, s| w.step(s))
    }

    pub fn mutate(&self, k: usize) -> Result<Self> {
        self.eps.check_index(k)?;
        let fs = match &self.fs {
            Some(fs) => Some(mutate_f(fs, &self.c, &self.eps, k)?),
            None => None,
        };
        let mut columns = self.c.columns();
        for col in &mut columns {
            tropical_mutate_int(col, &self.eps, k)?;
        }
        Ok(Self {
            eps: self.eps.mutate(k)?,
            c: IntMatrix::from_columns(&columns)?,
            fs,
        })
    }

    pub fn relabel(&self, sigma: &Permutation) -> Result<Self> {
        let eps = self.eps.relabel(sigma)?;
        let c = IntMatrix::from_rows(&sigma.permute(&self.c.rows()))?;
        let fs = self.fs.as_ref().map(|fs| sigma.permute(fs));
        Ok(Self { eps, c, fs })
    }

    pub fn f_polynomials(&self) -> &[FPolynomial] {
        self.fs.as_deref().expect("walk tracks F-polynomials")
    }
}

/// C-matrix mutation by the row recursion
/// `c'_kj = -c_kj`, `c'_ij = c_ij + [eps_ik]_+ c_kj + eps_ik [-c_kj]_+`.
pub fn c_row_recursion(c: &IntMatrix, eps: &ExchangeMatrix, k: usize) -> IntMatrix {
    let n = c.rank();
    let mut out = c.clone();
    for j in 0..n {
        let ckj = c[(k, j)];
        out[(k, j)] = -ckj;
        for i in (0..n).filter(|&i| i != k) {
            let eik = eps.get(i, k);
            out[(i, j)] = c[(i, j)] + eik.max(0) * ckj + eik * (-ckj).max(0);
        }
    }
    out
}
