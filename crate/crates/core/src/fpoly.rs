//! Sparse integer polynomials in `y_1, …, y_n` and the F-polynomial recursion.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exchange::ExchangeMatrix;
use crate::matrix::IntMatrix;
use crate::semifield::Semifield;

/// Exponent vectors are ordered lexicographically; the largest one is the
/// leading monomial used by exact division.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FPolynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

/// Matrix of maximal degrees, `f_ij = deg_{y_j} F_i`.
pub type FMatrix = IntMatrix;

impl FPolynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::monomial(vec![0; nvars], BigInt::one())
    }

    pub fn monomial(exp: Vec<u32>, coef: BigInt) -> Self {
        let nvars = exp.len();
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(exp, coef);
        }
        Self { nvars, terms }
    }

    pub fn var(nvars: usize, j: usize) -> Self {
        let mut exp = vec![0; nvars];
        exp[j] = 1;
        Self::monomial(exp, BigInt::one())
    }

    /// Builds a polynomial from `(exponent, coefficient)` pairs, merging
    /// repeated exponents.
    pub fn from_terms(nvars: usize, terms: &[(Vec<u32>, i64)]) -> Result<Self> {
        let mut p = Self::zero(nvars);
        for (exp, c) in terms {
            if exp.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    found: exp.len(),
                });
            }
            p = p.add(&Self::monomial(exp.clone(), BigInt::from(*c)));
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.constant_term().is_one()
    }

    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&vec![0; self.nvars])
            .cloned()
            .unwrap_or_default()
    }

    pub fn has_positive_coefficients(&self) -> bool {
        self.terms.values().all(|c| c.is_positive())
    }

    fn leading(&self) -> Option<(&Vec<u32>, &BigInt)> {
        self.terms.iter().next_back()
    }

    fn add_term(&mut self, exp: Vec<u32>, coef: BigInt) {
        let entry = self.terms.entry(exp).or_default();
        *entry += coef;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.nvars);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Exact division; `None` if `divisor` does not divide `self`.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (dexp, dcoef) = divisor.leading()?;
        let mut rem = self.clone();
        let mut quot = Self::zero(self.nvars);
        while let Some((rexp, rcoef)) = rem.leading() {
            if rexp.iter().zip(dexp).any(|(r, d)| r < d) {
                return None;
            }
            let (q, r) = rcoef.div_rem(dcoef);
            if !r.is_zero() {
                return None;
            }
            let exp: Vec<u32> = rexp.iter().zip(dexp).map(|(r, d)| r - d).collect();
            let t = Self::monomial(exp, q);
            rem = rem.sub(&t.mul(divisor));
            quot = quot.add(&t);
        }
        Some(quot)
    }

    /// Evaluation in a semifield. Only meaningful for positive coefficients.
    pub fn eval_in<S: Semifield>(&self, y: &[S]) -> S {
        let mut acc: Option<S> = None;
        for (exp, coef) in &self.terms {
            let mut term = S::from_count(coef);
            for (yj, &e) in y.iter().zip(exp) {
                if e != 0 {
                    term = term.mul(&yj.powi(e as i64));
                }
            }
            acc = Some(match acc {
                None => term,
                Some(a) => a.add(&term),
            });
        }
        acc.expect("evaluating the zero polynomial in a semifield")
    }

    pub fn eval_f64(&self, y: &[f64]) -> Result<f64> {
        self.check_point(y.len(), y.iter().all(|&v| v > 0.0))?;
        Ok(self
            .terms
            .iter()
            .map(|(exp, coef)| {
                exp.iter()
                    .zip(y)
                    .fold(coef.to_f64().unwrap_or(f64::NAN), |acc, (&e, &v)| {
                        acc * v.powi(e as i32)
                    })
            })
            .sum())
    }

    pub fn eval_rational(&self, y: &[BigRational]) -> Result<BigRational> {
        self.check_point(y.len(), y.iter().all(|v| v.is_positive()))?;
        let mut acc = BigRational::zero();
        for (exp, coef) in &self.terms {
            let mut term = BigRational::from_integer(coef.clone());
            for (&e, v) in exp.iter().zip(y) {
                term *= num_traits::pow(v.clone(), e as usize);
            }
            acc += term;
        }
        Ok(acc)
    }

    fn check_point(&self, len: usize, positive: bool) -> Result<()> {
        if len != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                found: len,
            });
        }
        if !positive {
            return Err(Error::Domain(
                "polynomial evaluation needs positive arguments".into(),
            ));
        }
        Ok(())
    }

    /// Maximal exponent of each variable.
    pub fn degrees(&self) -> Vec<u32> {
        let mut out = vec![0; self.nvars];
        for exp in self.terms.keys() {
            for (o, &e) in out.iter_mut().zip(exp) {
                *o = (*o).max(e);
            }
        }
        out
    }

    /// Reorders the variables: `y_j` becomes `y_{σ(j)}` where `sigma[j] = σ(j)`.
    pub fn rename_vars(&self, sigma: &[usize]) -> Self {
        let mut out = Self::zero(self.nvars);
        for (exp, c) in &self.terms {
            let mut e = vec![0; self.nvars];
            for (j, &x) in exp.iter().enumerate() {
                e[sigma[j]] = x;
            }
            out.add_term(e, c.clone());
        }
        out
    }
}

impl fmt::Debug for FPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for FPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (idx, (exp, coef)) in self.terms.iter().enumerate() {
            match (idx, coef.is_negative()) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono: Vec<String> = exp
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(j, &e)| match e {
                    1 => format!("y{}", j + 1),
                    _ => format!("y{}^{e}", j + 1),
                })
                .collect();
            let c = coef.abs();
            match (mono.is_empty(), c.is_one()) {
                (true, _) => write!(f, "{c}")?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{c}*{}", mono.join("*"))?,
            }
        }
        Ok(())
    }
}

impl Serialize for FPolynomial {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        #[serde(untagged)]
        enum Coef {
            Small(i64),
            Big(String),
        }
        #[derive(Serialize)]
        struct Term<'a> {
            exp: &'a [u32],
            coef: Coef,
        }
        let mut seq = serializer.serialize_seq(Some(self.terms.len()))?;
        for (exp, c) in &self.terms {
            let coef = c.to_i64().map_or_else(|| Coef::Big(c.to_string()), Coef::Small);
            seq.serialize_element(&Term { exp, coef })?;
        }
        seq.end()
    }
}

/// One step of the F-polynomial recursion in direction `k`.
///
/// `c` and `eps` are the C-matrix and exchange matrix *before* the mutation.
pub fn mutate_f(
    fs: &[FPolynomial],
    c: &IntMatrix,
    eps: &ExchangeMatrix,
    k: usize,
) -> Result<Vec<FPolynomial>> {
    eps.check_index(k)?;
    let n = eps.rank();
    if fs.len() != n || c.rank() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: fs.len(),
        });
    }
    let nvars = fs[k].nvars();
    let mut plus = FPolynomial::one(nvars);
    let mut minus = FPolynomial::one(nvars);
    let mut exp_plus = vec![0u32; nvars];
    let mut exp_minus = vec![0u32; nvars];
    for j in 0..nvars.min(n) {
        let ckj = c[(k, j)];
        exp_plus[j] = ckj.max(0) as u32;
        exp_minus[j] = (-ckj).max(0) as u32;
    }
    plus = plus.mul(&FPolynomial::monomial(exp_plus, BigInt::one()));
    minus = minus.mul(&FPolynomial::monomial(exp_minus, BigInt::one()));
    for (l, fl) in fs.iter().enumerate() {
        let e = eps.get(k, l);
        if e > 0 {
            plus = plus.mul(&fl.pow(e as u32));
        } else if e < 0 {
            minus = minus.mul(&fl.pow((-e) as u32));
        }
    }
    let numerator = plus.add(&minus);
    let new_fk = numerator.div_exact(&fs[k]).ok_or_else(|| {
        Error::Internal(format!(
            "F-polynomial recursion: {} is not divisible by {}",
            numerator, fs[k]
        ))
    })?;
    if !new_fk.constant_term().is_one() {
        return Err(Error::Internal(format!(
            "F-polynomial {new_fk} has constant term different from 1"
        )));
    }
    let mut out = fs.to_vec();
    out[k] = new_fk;
    Ok(out)
}

pub fn f_matrix(fs: &[FPolynomial]) -> FMatrix {
    let n = fs.len();
    let mut m = IntMatrix::zeros(n);
    for (i, f) in fs.iter().enumerate() {
        for (j, d) in f.degrees().into_iter().enumerate().take(n) {
            m[(i, j)] = d as i64;
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchange::{build_cartan_seed, Orientation};
    use crate::semifield::{LogPositive, PositiveRational};

    fn p(n: usize, terms: &[(Vec<u32>, i64)]) -> FPolynomial {
        FPolynomial::from_terms(n, terms).unwrap()
    }

    fn a2() -> ExchangeMatrix {
        build_cartan_seed(&"A2".parse().unwrap(), Orientation::Linear).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let one = FPolynomial::one(2);
        assert_eq!(one.eval_f64(&[0.3, 7.0]).unwrap(), 1.0);
        let f = p(2, &[(vec![0, 0], 1), (vec![1, 0], 1)]);
        assert_eq!(f.eval_f64(&[1.0, 1.0]).unwrap(), 2.0);
        let g = p(2, &[(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 1], 1)]);
        let y = [BigRational::from_integer(2.into()), BigRational::from_integer(3.into())];
        assert_eq!(g.eval_rational(&y).unwrap(), BigRational::from_integer(10.into()));
        assert!(matches!(g.eval_f64(&[0.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(g.eval_f64(&[-2.0, 1.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn semifield_evaluation_agrees() {
        let g = p(2, &[(vec![0, 0], 1), (vec![0, 1], 2), (vec![1, 1], 1)]);
        let exact = g.eval_in(&[
            PositiveRational::from_ratio(2, 1).unwrap(),
            PositiveRational::from_ratio(3, 1).unwrap(),
        ]);
        assert_eq!(exact, PositiveRational::from_ratio(13, 1).unwrap());
        let logged = g.eval_in(&[LogPositive::from_value(2.0), LogPositive::from_value(3.0)]);
        assert!((logged.value() - 13.0).abs() < 1e-12);
    }

    #[test]
    fn exact_division() {
        let a = p(2, &[(vec![0, 0], 1), (vec![1, 0], 1)]);
        let b = p(2, &[(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 1], 1)]);
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        assert!(b.div_exact(&a).is_none());
        let two = p(2, &[(vec![0, 0], 2)]);
        assert!(a.div_exact(&two).is_none());
    }

    #[test]
    fn first_a2_mutation() {
        let fs = vec![FPolynomial::one(2); 2];
        let out = mutate_f(&fs, &IntMatrix::identity(2), &a2(), 0).unwrap();
        assert_eq!(out[0], p(2, &[(vec![0, 0], 1), (vec![1, 0], 1)]));
        assert!(out[1].is_one());
        assert_eq!(f_matrix(&out).rows(), vec![vec![1, 0], vec![0, 0]]);
    }

    #[test]
    fn inexact_division_is_an_error() {
        let fs = vec![
            p(2, &[(vec![0, 0], 1), (vec![0, 1], 1)]),
            FPolynomial::one(2),
        ];
        let r = mutate_f(&fs, &IntMatrix::identity(2), &a2(), 0);
        assert!(matches!(r, Err(Error::Internal(_))));
    }

    #[test]
    fn f_matrix_examples() {
        assert!(f_matrix(&vec![FPolynomial::one(3); 3]).is_zero());
        let fs = vec![
            p(2, &[(vec![0, 0], 1), (vec![1, 0], 1)]),
            p(2, &[(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 1], 1)]),
        ];
        assert_eq!(f_matrix(&fs).rows(), vec![vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn json_shape() {
        let f = p(2, &[(vec![0, 0], 1), (vec![1, 1], 1)]);
        assert_eq!(
            serde_json::to_string(&f).unwrap(),
            r#"[{"exp":[0,0],"coef":1},{"exp":[1,1],"coef":1}]"#
        );
    }

    #[test]
    fn display() {
        let f = p(2, &[(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 1], 2)]);
        assert_eq!(f.to_string(), "1 + y2 + 2*y1*y2");
    }
}
