//! Semifields in which cluster X-transformations are evaluated.
//!
//! A cluster X-transformation is subtraction free, so the same formula can be
//! evaluated over any semifield:
//!
//! * [`PositiveRational`]: exact positive rationals, for identity checks;
//! * [`LogPositive`]: positive reals stored by their logarithm, so that
//!   `1 + X` becomes a log-sum-exp and large exponents never overflow;
//! * [`Tropical`]: the min-plus semifield, where the same formula becomes the
//!   piecewise-linear tropical X-transformation.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

pub trait Semifield: Clone + Debug + PartialEq {
    fn one() -> Self;

    /// Image of a positive integer (a polynomial coefficient).
    fn from_count(n: &BigInt) -> Self;

    fn mul(&self, rhs: &Self) -> Self;

    fn div(&self, rhs: &Self) -> Self;

    fn add(&self, rhs: &Self) -> Self;

    fn powi(&self, e: i64) -> Self;

    fn inv(&self) -> Self {
        Self::one().div(self)
    }
}

/// Strictly positive exact rational.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositiveRational(BigRational);

impl PositiveRational {
    pub fn new(value: BigRational) -> Option<Self> {
        value.is_positive().then_some(Self(value))
    }

    pub fn from_ratio(num: i64, den: i64) -> Option<Self> {
        if den == 0 {
            return None;
        }
        Self::new(BigRational::new(num.into(), den.into()))
    }

    pub fn value(&self) -> &BigRational {
        &self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Semifield for PositiveRational {
    fn one() -> Self {
        Self(BigRational::one())
    }

    fn from_count(n: &BigInt) -> Self {
        Self(BigRational::from_integer(n.clone()))
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self(&self.0 * &rhs.0)
    }

    fn div(&self, rhs: &Self) -> Self {
        Self(&self.0 / &rhs.0)
    }

    fn add(&self, rhs: &Self) -> Self {
        Self(&self.0 + &rhs.0)
    }

    fn powi(&self, e: i64) -> Self {
        let e = i32::try_from(e).expect("exponent out of range");
        Self(num_traits::pow::Pow::pow(&self.0, e))
    }
}

/// A positive real number represented by its natural logarithm.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct LogPositive(pub f64);

impl LogPositive {
    pub fn from_value(x: f64) -> Self {
        Self(x.ln())
    }

    pub fn log(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }
}

/// `log(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `log(1 + e^a)`.
pub fn softplus(a: f64) -> f64 {
    log_add_exp(0.0, a)
}

/// Logistic function `1 / (1 + e^{-a})`, the derivative of [`softplus`].
pub fn logistic(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

impl Semifield for LogPositive {
    fn one() -> Self {
        Self(0.0)
    }

    fn from_count(n: &BigInt) -> Self {
        Self(n.to_f64().unwrap_or(f64::INFINITY).ln())
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self(self.0 + rhs.0)
    }

    fn div(&self, rhs: &Self) -> Self {
        Self(self.0 - rhs.0)
    }

    fn add(&self, rhs: &Self) -> Self {
        Self(log_add_exp(self.0, rhs.0))
    }

    fn powi(&self, e: i64) -> Self {
        Self(self.0 * e as f64)
    }
}

/// Min-plus semifield over `T`: addition is `min`, multiplication is `+`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Tropical<T>(pub T);

pub trait TropicalScalar:
    Clone
    + Debug
    + PartialEq
    + PartialOrd
    + Zero
    + FromPrimitive
    + std::ops::Add<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
}

impl TropicalScalar for f64 {}
impl TropicalScalar for i64 {}
impl TropicalScalar for BigRational {}

impl<T: TropicalScalar> Semifield for Tropical<T> {
    fn one() -> Self {
        Self(T::zero())
    }

    fn from_count(_n: &BigInt) -> Self {
        Self::one()
    }

    fn mul(&self, rhs: &Self) -> Self {
        Self(self.0.clone() + rhs.0.clone())
    }

    fn div(&self, rhs: &Self) -> Self {
        Self(self.0.clone() - rhs.0.clone())
    }

    fn add(&self, rhs: &Self) -> Self {
        if rhs.0 < self.0 {
            rhs.clone()
        } else {
            self.clone()
        }
    }

    fn powi(&self, e: i64) -> Self {
        let factor = T::from_i64(e).expect("exponent representable in scalar");
        Self(self.0.clone() * factor)
    }
}

pub fn tropical_vec<T: Clone>(x: &[T]) -> Vec<Tropical<T>> {
    x.iter().cloned().map(Tropical).collect()
}

pub fn untropical_vec<T: Clone>(x: &[Tropical<T>]) -> Vec<T> {
    x.iter().map(|t| t.0.clone()).collect()
}
