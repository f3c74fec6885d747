//! Exact coefficient rings: rationals and Laurent polynomials in the
//! equivariant parameter `t`.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{self, q, Rational};
use super::series::SeriesElement;
use crate::error::{Error, Result};

/// An exact commutative coefficient ring containing the rationals.
///
/// Everything downstream (series, Fock vectors, operators) is generic over
/// this trait. There are deliberately no floating-point implementations.
pub trait Coeff:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn from_rational(x: &Rational) -> Self;

    fn from_i64(n: i64) -> Self {
        Self::from_rational(&q(n))
    }

    fn scale(&self, x: &Rational) -> Self;

    /// Exact inverse when `self` is a unit of the ring.
    fn try_inv(&self) -> Option<Self>;

    /// The substitution t -> -t (identity on rings without t).
    fn negate_t(&self) -> Self {
        self.clone()
    }

    /// Embed a rational series. Rings without series variables only accept
    /// constants.
    fn from_q_series(s: &SeriesElement<Rational>) -> Result<Self> {
        match s.constant_value() {
            Some(c) => Ok(Self::from_rational(&c)),
            None => Err(Error::Config(format!(
                "series in variables {:?} cannot be embedded in a scalar ring",
                s.vars()
            ))),
        }
    }

    fn render(&self) -> String;
}

impl Coeff for Rational {
    fn from_rational(x: &Rational) -> Self {
        x.clone()
    }

    fn scale(&self, x: &Rational) -> Self {
        self * x
    }

    fn try_inv(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }

    fn render(&self) -> String {
        rational::to_string(self)
    }
}

/// Laurent polynomial in `t` with rational coefficients.
///
/// Stored as `t^low * (c_0 + c_1 t + ...)` with no zero coefficient at either
/// end; the zero polynomial has empty `coeffs`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct TPoly {
    low: i64,
    coeffs: Vec<Rational>,
}

impl TPoly {
    pub fn monomial(c: Rational, e: i64) -> Self {
        Self::from_parts(e, vec![c])
    }

    pub fn t() -> Self {
        Self::monomial(q(1), 1)
    }

    pub fn from_parts(low: i64, coeffs: Vec<Rational>) -> Self {
        let mut p = TPoly { low, coeffs };
        p.normalize();
        p
    }

    fn normalize(&mut self) {
        while self.coeffs.last().is_some_and(|c| c.is_zero()) {
            self.coeffs.pop();
        }
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead > 0 {
            self.coeffs.drain(..lead);
            self.low += lead as i64;
        }
        if self.coeffs.is_empty() {
            self.low = 0;
        }
    }

    pub fn coeff(&self, e: i64) -> Rational {
        let i = e - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            Rational::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Lowest exponent present (None for zero).
    pub fn min_exp(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then_some(self.low)
    }

    /// Highest exponent present (None for zero).
    pub fn max_exp(&self) -> Option<i64> {
        (!self.coeffs.is_empty()).then(|| self.low + self.coeffs.len() as i64 - 1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, &Rational)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.low + i as i64, c))
    }

    /// Value at t = 0; fails if there are negative powers of t.
    pub fn at_zero(&self) -> Result<Rational> {
        match self.min_exp() {
            Some(e) if e < 0 => Err(Error::Domain(format!(
                "Laurent polynomial has a pole t^{e} at t = 0"
            ))),
            _ => Ok(self.coeff(0)),
        }
    }

    pub fn is_polynomial(&self) -> bool {
        self.min_exp().is_none_or(|e| e >= 0)
    }

    pub fn shift(&self, e: i64) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        TPoly {
            low: self.low + e,
            coeffs: self.coeffs.clone(),
        }
    }
}

impl Zero for TPoly {
    fn zero() -> Self {
        TPoly::default()
    }
    fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }
}

impl One for TPoly {
    fn one() -> Self {
        TPoly::monomial(q(1), 0)
    }
}

impl Add for TPoly {
    type Output = TPoly;
    fn add(self, rhs: TPoly) -> TPoly {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let low = self.low.min(rhs.low);
        let high = self.max_exp().unwrap().max(rhs.max_exp().unwrap());
        let coeffs = (low..=high).map(|e| self.coeff(e) + rhs.coeff(e)).collect();
        TPoly::from_parts(low, coeffs)
    }
}

impl Neg for TPoly {
    type Output = TPoly;
    fn neg(self) -> TPoly {
        TPoly {
            low: self.low,
            coeffs: self.coeffs.into_iter().map(|c| -c).collect(),
        }
    }
}

impl Sub for TPoly {
    type Output = TPoly;
    fn sub(self, rhs: TPoly) -> TPoly {
        self + (-rhs)
    }
}

impl Mul for TPoly {
    type Output = TPoly;
    fn mul(self, rhs: TPoly) -> TPoly {
        if self.is_zero() || rhs.is_zero() {
            return TPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        TPoly::from_parts(self.low + rhs.low, out)
    }
}

impl Coeff for TPoly {
    fn from_rational(x: &Rational) -> Self {
        TPoly::monomial(x.clone(), 0)
    }

    fn scale(&self, x: &Rational) -> Self {
        TPoly::from_parts(self.low, self.coeffs.iter().map(|c| c * x).collect())
    }

    fn try_inv(&self) -> Option<Self> {
        let nonzero: Vec<_> = self.terms().collect();
        match nonzero.as_slice() {
            [(e, c)] => Some(TPoly::monomial(c.recip(), -e)),
            _ => None,
        }
    }

    fn negate_t(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if (self.low + i as i64).rem_euclid(2) == 1 {
                    -c.clone()
                } else {
                    c.clone()
                }
            })
            .collect();
        TPoly::from_parts(self.low, coeffs)
    }

    fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in self.terms() {
            let c = rational::to_string(c);
            parts.push(match e {
                0 => c,
                1 => format!("{c}*t"),
                _ => format!("{c}*t^{e}"),
            });
        }
        parts.join(" + ")
    }
}
