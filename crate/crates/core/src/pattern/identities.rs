//! C-, G- and F-matrices between the base vertex and other vertices, and the
//! matrix identities relating them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::walk::{c_row_recursion, invert_path, SeedWalk};
use super::{ExchangePattern, VertexId};
use crate::error::{Error, Result};
use crate::fpoly::{f_matrix, FMatrix};
use crate::matrix::IntMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

impl FromStr for Sign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "plus" | "pos" => Ok(Sign::Plus),
            "-" | "minus" | "neg" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unknown sign {other:?}"))),
        }
    }
}

/// Walk from vertex `v` back to the base, starting with `sign · eps^(v)`.
fn walk_to_base(p: &ExchangePattern, v: VertexId, sign: Sign, with_f: bool) -> Result<SeedWalk> {
    let vert = p.vertex(v)?;
    let eps = match sign {
        Sign::Plus => vert.eps.clone(),
        Sign::Minus => vert.eps.negated(),
    };
    let start = if with_f {
        SeedWalk::start(eps)
    } else {
        SeedWalk::start_tropical(eps)
    };
    start.walk(&invert_path(&p.path(v)?))
}

/// `C^{±s}_{v -> v0}`.
fn c_to_base_signed(p: &ExchangePattern, v: VertexId, sign: Sign) -> Result<IntMatrix> {
    Ok(walk_to_base(p, v, sign, false)?.c)
}

/// `C^s_{v -> v0}`, whose columns generate the cone of `v` in the base chart.
pub fn c_to_base(p: &ExchangePattern, v: VertexId) -> Result<IntMatrix> {
    c_to_base_signed(p, v, Sign::Plus)
}

/// `C^{-s}_{v -> v0}`.
pub fn c_to_base_opposite(p: &ExchangePattern, v: VertexId) -> Result<IntMatrix> {
    c_to_base_signed(p, v, Sign::Minus)
}

/// `C^s_{v0 -> v}` (stored on the vertex).
pub fn c_from_base(p: &ExchangePattern, v: VertexId) -> Result<IntMatrix> {
    Ok(p.vertex(v)?.c.clone())
}

/// `C^{-s}_{v0 -> v}`.
pub fn c_from_base_opposite(p: &ExchangePattern, v: VertexId) -> Result<IntMatrix> {
    let start = SeedWalk::start_tropical(p.initial().negated());
    Ok(start.walk(&p.path(v)?)?.c)
}

/// `F^s_{v -> v0}`.
pub fn f_matrix_to_base(p: &ExchangePattern, v: VertexId) -> Result<FMatrix> {
    Ok(f_matrix(walk_to_base(p, v, Sign::Plus, true)?.f_polynomials()))
}

/// The sign `σ` with `σ · c_k` non-negative, for the `k`-th row of `C^s_{v0 -> v}`.
pub fn tropical_sign(p: &ExchangePattern, v: VertexId, k: usize) -> Result<Sign> {
    let vert = p.vertex(v)?;
    vert.eps.check_index(k)?;
    let row = vert.c.row(k);
    let pos = row.iter().any(|&x| x > 0);
    let neg = row.iter().any(|&x| x < 0);
    match (pos, neg) {
        (true, false) => Ok(Sign::Plus),
        (false, true) => Ok(Sign::Minus),
        (false, false) => Err(Error::Internal(format!("c-vector {k} at {v} is zero"))),
        (true, true) => Err(Error::Internal(format!(
            "c-vector {k} at {v} is not sign-coherent: {row:?}"
        ))),
    }
}

/// Outcome of an exact matrix identity check: the residual is zero iff it holds.
#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub holds: bool,
    pub residual: IntMatrix,
}

impl IdentityReport {
    fn from_residual(residual: IntMatrix) -> Self {
        Self {
            holds: residual.is_zero(),
            residual,
        }
    }
}

/// `C^s_{v -> v0} · C^{-s}_{v0 -> v} = Id`.
pub fn tropical_duality_check(p: &ExchangePattern, v: VertexId) -> Result<IdentityReport> {
    let lhs = &c_to_base(p, v)? * &c_from_base_opposite(p, v)?;
    Ok(IdentityReport::from_residual(
        &lhs - &IntMatrix::identity(p.rank()),
    ))
}

/// `C^s_{v -> v0} + eps^(v0) · F^s_{v -> v0} = C^{-s}_{v -> v0}`.
#[allow(non_snake_case)]
pub fn fuGy_check(p: &ExchangePattern, v: VertexId) -> Result<IdentityReport> {
    let c = c_to_base(p, v)?;
    let f = f_matrix_to_base(p, v)?;
    let c_opp = c_to_base_opposite(p, v)?;
    let lhs = &c + &(p.initial().entries() * &f);
    Ok(IdentityReport::from_residual(&lhs - &c_opp))
}

/// `C^{-s}_{v -> v0}`, the limit of `log X^(v0)(E(g0, t L^(v)_k)) / t`
/// in column `k`.
pub fn limit_target(p: &ExchangePattern, v: VertexId) -> Result<IntMatrix> {
    c_to_base_opposite(p, v)
}

#[derive(Clone, Debug, Serialize)]
pub struct FcReport {
    pub product: IntMatrix,
    pub nonpositive: bool,
}

/// `F^s_{v -> v0} · C^{±s}_{v0 -> v}`.
pub fn fc_product(p: &ExchangePattern, v: VertexId, sign: Sign) -> Result<FcReport> {
    let f = f_matrix_to_base(p, v)?;
    let c = match sign {
        Sign::Plus => c_from_base(p, v)?,
        Sign::Minus => c_from_base_opposite(p, v)?,
    };
    let product = &f * &c;
    Ok(FcReport {
        nonpositive: product.is_nonpositive(),
        product,
    })
}

/// Compares the stored C-matrices with the row recursion along every
/// mutation edge. Returns the offending edges.
pub fn row_recursion_check(p: &ExchangePattern) -> Vec<(VertexId, usize, VertexId)> {
    p.mutation_edges()
        .filter(|&(a, k, b)| {
            let va = &p.vertices[a.0];
            c_row_recursion(&va.c, &va.eps, k) != p.vertices[b.0].c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::Orientation;
    use crate::pattern::{enumerate_type, EnumerateOptions};

    fn pat(ty: &str) -> ExchangePattern {
        enumerate_type(
            &ty.parse().unwrap(),
            Orientation::Linear,
            EnumerateOptions {
                cap: 10_000,
                include_permutations: true,
            },
        )
        .unwrap()
    }

    #[test]
    fn base_vertex_identities_are_trivial() {
        let p = pat("A2");
        let v0 = p.base;
        for k in 0..2 {
            assert_eq!(tropical_sign(&p, v0, k).unwrap(), Sign::Plus);
        }
        let fugy = fuGy_check(&p, v0).unwrap();
        assert!(fugy.holds);
        let fc = fc_product(&p, v0, Sign::Plus).unwrap();
        assert!(fc.product.is_zero() && fc.nonpositive);
        assert_eq!(c_to_base(&p, v0).unwrap(), IntMatrix::identity(2));
    }

    #[test]
    fn first_a2_mutation_has_negative_sign() {
        let p = pat("A2");
        let v1 = p.mutation_neighbor(p.base, 0).unwrap();
        assert_eq!(tropical_sign(&p, v1, 0).unwrap(), Sign::Minus);
        assert_eq!(p.vertex(v1).unwrap().c.row(0), &[-1, 0]);
    }

    #[test]
    fn identities_hold_on_small_types() {
        for ty in ["A2", "B2", "G2", "A3", "B3", "C3"] {
            let p = pat(ty);
            for v in p.ids() {
                assert!(tropical_duality_check(&p, v).unwrap().holds, "{ty} {v}");
                assert!(fuGy_check(&p, v).unwrap().holds, "{ty} {v}");
                for s in [Sign::Plus, Sign::Minus] {
                    assert!(fc_product(&p, v, s).unwrap().nonpositive, "{ty} {v} {s}");
                }
                for k in 0..p.rank() {
                    tropical_sign(&p, v, k).unwrap();
                }
            }
            assert!(row_recursion_check(&p).is_empty());
        }
    }

    #[test]
    fn limit_target_is_conjugated_g_transpose() {
        for ty in ["A2", "B2", "G2", "B3"] {
            let p = pat(ty);
            let d = p.initial().symmetrizer().to_vec();
            let dm = IntMatrix::diagonal(&d);
            for v in &p.vertices {
                let lhs = &limit_target(&p, v.id).unwrap() * &dm;
                let rhs = &dm * &v.g.transpose();
                assert_eq!(lhs, rhs, "{ty} {}", v.id);
            }
        }
    }

    #[test]
    fn sign_parsing() {
        assert_eq!("+".parse::<Sign>().unwrap(), Sign::Plus);
        assert_eq!("minus".parse::<Sign>().unwrap(), Sign::Minus);
        assert!("0".parse::<Sign>().is_err());
        assert_eq!(Sign::Minus.flip(), Sign::Plus);
    }
}
