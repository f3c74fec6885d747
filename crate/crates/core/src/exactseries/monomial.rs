//! The single global monomial t^a (-t)^b u^m carried alongside Laurent
//! polynomials in t when fractional powers appear.

use std::ops::Mul;

use num_traits::{One, Zero};
use serde::Serialize;

use super::coeff::TPoly;
use super::rational::{self, q, Rational};
use crate::error::{Error, Result};

/// `t^t_exp * (-t)^neg_t_exp * u^u_exp`. The two t-bases are kept apart;
/// they are only merged once both exponents are integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FracMonomial {
    pub t_exp: Rational,
    pub neg_t_exp: Rational,
    pub u_exp: i64,
}

impl Default for FracMonomial {
    fn default() -> Self {
        FracMonomial {
            t_exp: Rational::zero(),
            neg_t_exp: Rational::zero(),
            u_exp: 0,
        }
    }
}

impl FracMonomial {
    pub fn t_pow(e: Rational) -> Self {
        FracMonomial { t_exp: e, ..Default::default() }
    }

    pub fn neg_t_pow(e: Rational) -> Self {
        FracMonomial { neg_t_exp: e, ..Default::default() }
    }

    pub fn u_pow(e: i64) -> Self {
        FracMonomial { u_exp: e, ..Default::default() }
    }

    pub fn inverse(&self) -> Self {
        FracMonomial {
            t_exp: -self.t_exp.clone(),
            neg_t_exp: -self.neg_t_exp.clone(),
            u_exp: -self.u_exp,
        }
    }

    pub fn pow(&self, n: i64) -> Self {
        FracMonomial {
            t_exp: &self.t_exp * q(n),
            neg_t_exp: &self.neg_t_exp * q(n),
            u_exp: self.u_exp * n,
        }
    }

    /// Fractional parts of the two t-exponents.
    pub fn fractional_residue(&self) -> (Rational, Rational) {
        let fr = |x: &Rational| x - x.floor();
        (fr(&self.t_exp), fr(&self.neg_t_exp))
    }

    pub fn is_integral(&self) -> bool {
        self.t_exp.is_integer() && self.neg_t_exp.is_integer()
    }

    /// Merge into an ordinary Laurent monomial in t. Fails unless both
    /// exponents are integers.
    pub fn fold(&self) -> Result<TPoly> {
        if !self.is_integral() {
            return Err(Error::Integrity(format!(
                "fractional t-monomial t^{} (-t)^{} did not cancel",
                rational::to_string(&self.t_exp),
                rational::to_string(&self.neg_t_exp)
            )));
        }
        let a = rational::to_i64(&self.t_exp).expect("integral");
        let b = rational::to_i64(&self.neg_t_exp).expect("integral");
        let sign = if b.rem_euclid(2) == 0 { q(1) } else { q(-1) };
        Ok(TPoly::monomial(sign, a + b))
    }

    pub fn is_one(&self) -> bool {
        self.t_exp.is_zero() && self.neg_t_exp.is_zero() && self.u_exp == 0
    }
}

impl Mul for FracMonomial {
    type Output = FracMonomial;
    fn mul(self, rhs: FracMonomial) -> FracMonomial {
        FracMonomial {
            t_exp: self.t_exp + rhs.t_exp,
            neg_t_exp: self.neg_t_exp + rhs.neg_t_exp,
            u_exp: self.u_exp + rhs.u_exp,
        }
    }
}

#[derive(Serialize)]
struct Repr {
    t: String,
    neg_t: String,
    u: i64,
}

impl Serialize for FracMonomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        Repr {
            t: rational::to_string(&self.t_exp),
            neg_t: rational::to_string(&self.neg_t_exp),
            u: self.u_exp,
        }
        .serialize(s)
    }
}

impl One for FracMonomial {
    fn one() -> Self {
        Self::default()
    }
}
