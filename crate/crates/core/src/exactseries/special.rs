//! The special functions S, varsigma, their powers, exponentials of linear
//! forms and Pochhammer symbols, all as truncated series.

use std::sync::Arc;

use num_traits::{One, Zero};

use super::coeff::Coeff;
use super::rational::{self, q, Rational};
use super::series::{SeriesElement, INF};
use crate::error::{Error, Result};

fn one_var(var: &str) -> Arc<[String]> {
    Arc::from(vec![var.to_string()])
}

fn pow_c<C: Coeff>(c: &C, n: u64) -> C {
    let mut acc = C::one();
    for _ in 0..n {
        acc = acc * c.clone();
    }
    acc
}

/// varsigma(c z) = 2 sinh(c z / 2), known through z^trunc.
pub fn varsigma<C: Coeff>(var: &str, scale: &C, trunc: i64) -> SeriesElement<C> {
    let terms = (1..=trunc.max(0)).step_by(2).map(|n| {
        let n = n as u64;
        let denom = rational::factorial(n) * num_bigint::BigInt::from(2).pow((n - 1) as u32);
        let c = pow_c(scale, n).scale(&Rational::new(1.into(), denom));
        (vec![n as i64], c)
    });
    SeriesElement::from_terms(one_var(var), vec![trunc], terms)
}

/// S(c z) = varsigma(c z) / (c z), known through z^trunc.
pub fn s_fn<C: Coeff>(var: &str, scale: &C, trunc: i64) -> SeriesElement<C> {
    let terms = (0..=trunc.max(0)).step_by(2).map(|n| {
        let n = n as u64;
        let denom = rational::factorial(n + 1) * num_bigint::BigInt::from(2).pow(n as u32);
        let c = pow_c(scale, n).scale(&Rational::new(1.into(), denom));
        (vec![n as i64], c)
    });
    SeriesElement::from_terms(one_var(var), vec![trunc], terms)
}

/// 1 / varsigma(c z), known through z^trunc.
pub fn inv_varsigma<C: Coeff>(var: &str, scale: &C, trunc: i64) -> Result<SeriesElement<C>> {
    if scale.is_zero() {
        return Err(Error::Domain("1/varsigma(0) is a pole of infinite order".into()));
    }
    varsigma(var, scale, trunc + 2).inverse().map(|s| s.truncate(&[trunc]))
}

/// S(c z)^e = exp(e log S(c z)) in the variables of `exponent` (which must
/// contain `var`), truncated to `trunc` per variable.
pub fn s_power<C: Coeff>(
    var: &str,
    scale: &C,
    exponent: &SeriesElement<C>,
    trunc: &[i64],
) -> Result<SeriesElement<C>> {
    let vars = if exponent.vars().is_empty() {
        one_var(var)
    } else {
        exponent.vars().clone()
    };
    if trunc.len() != vars.len() {
        return Err(Error::Config("truncation length mismatch".into()));
    }
    let i = vars
        .iter()
        .position(|v| v == var)
        .ok_or_else(|| Error::Config(format!("undeclared series variable {var}")))?;
    let s = s_fn(var, scale, trunc[i]).embed(&vars)?.truncate(trunc);
    let log_s = s.log()?;
    let e = exponent.embed(&vars)?.truncate(trunc);
    if e.valuation().iter().any(|v| *v < 0) {
        return Err(Error::Domain("exponent of S-power has a pole".into()));
    }
    let prod = log_s.try_mul(&e)?.truncate(trunc);
    prod.exp().map(|r| r.truncate(trunc))
}

/// exp(x * sum_i form_i v_i) on the given variables, known up to `prec`.
pub fn exp_linear<C: Coeff>(vars: &Arc<[String]>, prec: &[i64], x: &Rational, form: &[Rational]) -> SeriesElement<C> {
    let n = vars.len();
    let mut terms: Vec<(Vec<i64>, Rational)> = vec![(vec![0; n], q(1))];
    for i in 0..n {
        if form[i].is_zero() {
            continue;
        }
        let a = x * &form[i];
        let mut next = Vec::new();
        for (e, c) in &terms {
            let mut pw = Rational::one();
            for k in 0..=prec[i].max(0) {
                let mut e2 = e.clone();
                e2[i] = k;
                next.push((e2, c * &pw / Rational::from_integer(rational::factorial(k as u64))));
                pw *= &a;
            }
        }
        terms = next;
    }
    SeriesElement::from_terms(
        vars.clone(),
        prec.to_vec(),
        terms.into_iter().map(|(e, c)| (e, C::from_rational(&c))),
    )
}

fn linear_factor<C: Coeff>(x: &SeriesElement<C>, shift: i64) -> SeriesElement<C> {
    x.try_add(&SeriesElement::constant(C::from_i64(shift)))
        .expect("constant broadcast")
}

/// (1+x)_n: (x+1)...(x+n) for n >= 0 and 1/(x(x-1)...(x+n+1)) for n < 0.
pub fn pochhammer<C: Coeff>(x: &SeriesElement<C>, n: i64, trunc: &[i64]) -> Result<SeriesElement<C>> {
    let x = x.truncate_if_sized(trunc);
    if n >= 0 {
        let mut acc = SeriesElement::constant(C::one());
        for i in 1..=n {
            acc = acc.try_mul(&linear_factor(&x, i))?;
        }
        return Ok(acc.truncate_if_sized(trunc));
    }
    let den = pochhammer_recip(&x, n, trunc)?;
    den.inverse().map(|s| s.truncate_if_sized(trunc)).map_err(|_| {
        Error::Domain(format!(
            "(1+x)_{n} has non-invertible denominator {}",
            den.render()
        ))
    })
}

/// 1/(1+x)_n, which is a polynomial in x for n <= 0.
pub fn pochhammer_recip<C: Coeff>(x: &SeriesElement<C>, n: i64, trunc: &[i64]) -> Result<SeriesElement<C>> {
    let x = x.truncate_if_sized(trunc);
    if n <= 0 {
        let mut acc = SeriesElement::constant(C::one());
        for i in 0..(-n) {
            acc = acc.try_mul(&linear_factor(&x, -i))?;
        }
        return Ok(acc.truncate_if_sized(trunc));
    }
    let mut acc = SeriesElement::constant(C::one());
    for i in 1..=n {
        let f = linear_factor(&x, i);
        let inv = f.inverse().map_err(|_| {
            Error::Domain(format!("Pochhammer factor {} is not invertible", f.render()))
        })?;
        acc = acc.try_mul(&inv)?;
    }
    Ok(acc.truncate_if_sized(trunc))
}

impl<C: Coeff> SeriesElement<C> {
    /// Re-express in a larger variable list; missing variables are exact.
    pub fn embed(&self, target: &Arc<[String]>) -> Result<Self> {
        if self.vars() == target {
            return Ok(self.clone());
        }
        let idx: Vec<usize> = self
            .vars()
            .iter()
            .map(|v| {
                target
                    .iter()
                    .position(|t| t == v)
                    .ok_or_else(|| Error::Config(format!("undeclared series variable {v}")))
            })
            .collect::<Result<_>>()?;
        let m = target.len();
        let mut prec = vec![INF; m];
        for (k, j) in idx.iter().enumerate() {
            prec[*j] = self.prec()[k];
        }
        let terms = self.terms().iter().map(|(e, c)| {
            let mut ex = vec![0; m];
            for (k, j) in idx.iter().enumerate() {
                ex[*j] = e[k];
            }
            (ex, c.clone())
        });
        Ok(SeriesElement::from_terms(target.clone(), prec, terms))
    }

    /// Truncate when the truncation vector fits the variable list; constants
    /// pass through unchanged.
    pub fn truncate_if_sized(&self, trunc: &[i64]) -> Self {
        if self.vars().len() == trunc.len() {
            self.truncate(trunc)
        } else {
            self.clone()
        }
    }
}
