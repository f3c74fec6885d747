//! Truncated multivariate Laurent series with exact coefficients.
//!
//! Each series remembers, per variable, the largest exponent up to which its
//! coefficients are known exactly (`prec`). Products propagate precision the
//! usual way for Laurent series: multiplying by something with a pole of order
//! p costs p orders. Exact polynomials carry `INF` precision.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde_json::{json, Value};

use super::coeff::Coeff;
use super::rational::{self, q, Rational};
use crate::error::{Error, Result};

/// Precision marker for exactly known directions.
pub const INF: i64 = i64::MAX / 4;

fn sat_add(a: i64, b: i64) -> i64 {
    if a >= INF || b >= INF {
        INF
    } else {
        a + b
    }
}

pub type Exps = Vec<i64>;

#[derive(Clone, PartialEq)]
pub struct SeriesElement<C> {
    vars: Arc<[String]>,
    prec: Vec<i64>,
    terms: BTreeMap<Exps, C>,
}

/// Variable names plus the per-variable truncation a computation targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeriesRing {
    vars: Arc<[String]>,
    trunc: Vec<i64>,
    pole: Vec<i64>,
}

impl SeriesRing {
    pub fn new(vars: &[&str], trunc: &[i64]) -> Result<Self> {
        if vars.len() != trunc.len() {
            return Err(Error::Config("one truncation per variable required".into()));
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Config(format!("duplicate variable {v}")));
            }
        }
        Ok(SeriesRing {
            vars: vars.iter().map(|s| s.to_string()).collect(),
            trunc: trunc.to_vec(),
            pole: vec![0; vars.len()],
        })
    }

    /// Declare how many orders of pole a variable may acquire; primitive
    /// series in that variable are then generated with that much slack.
    pub fn with_poles(mut self, var: &str, order: i64) -> Result<Self> {
        let i = self.index(var)?;
        self.pole[i] = order;
        Ok(self)
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn trunc(&self) -> &[i64] {
        &self.trunc
    }

    pub fn pole_bounds(&self) -> &[i64] {
        &self.pole
    }

    /// Precision used when generating primitive series.
    pub fn working_prec(&self) -> Vec<i64> {
        self.trunc
            .iter()
            .zip(&self.pole)
            .map(|(t, p)| t + p)
            .collect()
    }

    pub fn index(&self, var: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v == var)
            .ok_or_else(|| Error::Config(format!("undeclared series variable {var}")))
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn var<C: Coeff>(&self, name: &str) -> Result<SeriesElement<C>> {
        let i = self.index(name)?;
        let mut e = vec![0; self.len()];
        e[i] = 1;
        Ok(SeriesElement::monomial(self.vars.clone(), e, C::one()))
    }

    pub fn constant<C: Coeff>(&self, c: C) -> SeriesElement<C> {
        SeriesElement::monomial(self.vars.clone(), vec![0; self.len()], c)
    }
}

impl<C: Coeff> fmt::Debug for SeriesElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl<C: Coeff> SeriesElement<C> {
    pub fn constant(c: C) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Vec::new(), c);
        }
        SeriesElement {
            vars: Arc::from(Vec::<String>::new()),
            prec: Vec::new(),
            terms,
        }
    }

    pub fn monomial(vars: Arc<[String]>, exps: Exps, c: C) -> Self {
        let n = vars.len();
        assert_eq!(exps.len(), n, "exponent vector length");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exps, c);
        }
        SeriesElement {
            vars,
            prec: vec![INF; n],
            terms,
        }
    }

    /// Build from raw terms; terms beyond `prec` are dropped.
    pub fn from_terms(vars: Arc<[String]>, prec: Vec<i64>, terms: impl IntoIterator<Item = (Exps, C)>) -> Self {
        let mut map: BTreeMap<Exps, C> = BTreeMap::new();
        for (e, c) in terms {
            assert_eq!(e.len(), vars.len(), "exponent vector length");
            if e.iter().zip(&prec).any(|(x, p)| x > p) || c.is_zero() {
                continue;
            }
            match map.get_mut(&e) {
                Some(v) => {
                    let s = v.clone() + c;
                    if s.is_zero() {
                        map.remove(&e);
                    } else {
                        *v = s;
                    }
                }
                None => {
                    map.insert(e, c);
                }
            }
        }
        SeriesElement { vars, prec, terms: map }
    }

    /// Univariate series from consecutive coefficients starting at `low`.
    pub fn univariate(var: &str, low: i64, coeffs: Vec<C>, prec: i64) -> Self {
        let vars: Arc<[String]> = Arc::from(vec![var.to_string()]);
        let terms = coeffs
            .into_iter()
            .enumerate()
            .map(|(i, c)| (vec![low + i as i64], c));
        Self::from_terms(vars, vec![prec], terms)
    }

    pub fn vars(&self) -> &Arc<[String]> {
        &self.vars
    }

    pub fn prec(&self) -> &[i64] {
        &self.prec
    }

    pub fn terms(&self) -> &BTreeMap<Exps, C> {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_exact_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Per-variable lowest exponent present (the tracked pole bound). For the
    /// zero series this is one past the precision.
    pub fn valuation(&self) -> Vec<i64> {
        let n = self.vars.len();
        if self.terms.is_empty() {
            return self.prec.iter().map(|p| sat_add(*p, 1)).collect();
        }
        let mut v = vec![INF; n];
        for e in self.terms.keys() {
            for i in 0..n {
                v[i] = v[i].min(e[i]);
            }
        }
        v
    }

    pub fn pole_bound(&self) -> Vec<i64> {
        self.valuation().into_iter().map(|v| v.min(0)).collect()
    }

    /// Coefficient at an exponent vector; errors if it lies beyond the known
    /// precision.
    pub fn coeff(&self, e: &[i64]) -> Result<C> {
        if e.len() != self.vars.len() {
            return Err(Error::Config("exponent vector length mismatch".into()));
        }
        if e.iter().zip(&self.prec).any(|(x, p)| x > p) {
            return Err(Error::Integrity(format!(
                "coefficient {e:?} requested beyond known precision {:?}",
                self.prec
            )));
        }
        Ok(self.terms.get(e).cloned().unwrap_or_else(C::zero))
    }

    /// Coefficient of a single variable power in a univariate series.
    pub fn coeff1(&self, e: i64) -> Result<C> {
        self.coeff(&[e])
    }

    fn lift_to(&self, vars: &Arc<[String]>) -> Result<Self> {
        if self.vars == *vars {
            return Ok(self.clone());
        }
        if self.vars.is_empty() {
            let n = vars.len();
            let terms = self
                .terms.values().map(|c| (vec![0; n], c.clone()))
                .collect();
            return Ok(SeriesElement {
                vars: vars.clone(),
                prec: vec![INF; n],
                terms,
            });
        }
        Err(Error::Config(format!(
            "mismatched variable sets {:?} and {:?}",
            self.vars, vars
        )))
    }

    fn unify(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if a.vars == b.vars {
            Ok((a.clone(), b.clone()))
        } else if a.vars.is_empty() {
            Ok((a.lift_to(&b.vars)?, b.clone()))
        } else {
            Ok((a.clone(), b.lift_to(&a.vars)?))
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::unify(self, other)?;
        let prec: Vec<i64> = a.prec.iter().zip(&b.prec).map(|(x, y)| *x.min(y)).collect();
        let terms = a.terms.into_iter().chain(b.terms);
        Ok(Self::from_terms(a.vars, prec, terms))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::unify(self, other)?;
        let n = a.vars.len();
        let va = a.valuation();
        let vb = b.valuation();
        let prec: Vec<i64> = (0..n)
            .map(|i| sat_add(a.prec[i], vb[i]).min(sat_add(b.prec[i], va[i])))
            .collect();
        let mut out: BTreeMap<Exps, C> = BTreeMap::new();
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                let e: Exps = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
                if e.iter().zip(&prec).any(|(x, p)| x > p) {
                    continue;
                }
                let prod = ca.clone() * cb.clone();
                match out.get_mut(&e) {
                    Some(v) => *v = v.clone() + prod,
                    None => {
                        out.insert(e, prod);
                    }
                }
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(SeriesElement { vars: a.vars, prec, terms: out })
    }

    pub fn scale(&self, x: &Rational) -> Self {
        self.map_coeffs(|c| c.scale(x))
    }

    pub fn scale_c(&self, x: &C) -> Self {
        self.map_coeffs(|c| c.clone() * x.clone())
    }

    pub fn map_coeffs(&self, f: impl Fn(&C) -> C) -> Self {
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), f(c)));
        Self::from_terms(self.vars.clone(), self.prec.clone(), terms)
    }

    /// Restrict to exponents at most `trunc` (never raises precision).
    pub fn truncate(&self, trunc: &[i64]) -> Self {
        let prec: Vec<i64> = self.prec.iter().zip(trunc).map(|(p, t)| *p.min(t)).collect();
        let terms = self.terms.iter().map(|(e, c)| (e.clone(), c.clone()));
        Self::from_terms(self.vars.clone(), prec, terms)
    }

    /// Multiply by the monomial x^e exactly.
    pub fn shift(&self, e: &[i64]) -> Self {
        let prec = self.prec.iter().zip(e).map(|(p, s)| sat_add(*p, *s)).collect();
        let terms = self
            .terms
            .iter()
            .map(|(x, c)| (x.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone()));
        Self::from_terms(self.vars.clone(), prec, terms)
    }

    /// Check that every variable is known at least up to `trunc`.
    pub fn require_prec(&self, trunc: &[i64]) -> Result<()> {
        if self.vars.is_empty() {
            return Ok(());
        }
        if self.prec.iter().zip(trunc).any(|(p, t)| p < t) {
            return Err(Error::Integrity(format!(
                "series known only to {:?}, {:?} required",
                self.prec, trunc
            )));
        }
        Ok(())
    }

    /// Equality of the coefficients both sides know.
    pub fn agrees_with(&self, other: &Self) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.terms.is_empty(),
            Err(_) => false,
        }
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.clone().neg())
    }

    /// Inverse of a series whose lowest term is a single unit monomial.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.vars.len();
        if self.terms.is_empty() {
            return Err(Error::Domain("inverse of zero series".into()));
        }
        let v = self.valuation();
        let lead = self.terms.get(&v).ok_or_else(|| {
            Error::Domain("series has no single leading monomial; not invertible".into())
        })?;
        let lead_inv = lead.try_inv().ok_or_else(|| {
            Error::Domain(format!("leading coefficient {} is not a unit", lead.render()))
        })?;
        let neg_v: Vec<i64> = v.iter().map(|x| -x).collect();
        // u = s * x^{-v} / lead = 1 + r
        let u = self.shift(&neg_v).scale_c(&lead_inv);
        let mut r = u.clone();
        r.terms.remove(&vec![0; n]);
        for e in r.terms.keys() {
            for i in 0..n {
                if e[i] > 0 && u.prec[i] >= INF {
                    return Err(Error::Domain(
                        "inverse of an exact polynomial needs a truncation".into(),
                    ));
                }
            }
        }
        let one = SeriesElement::from_terms(self.vars.clone(), u.prec.clone(), [(vec![0; n], C::one())]);
        let neg_r = r.clone().neg();
        let mut acc = one.clone();
        let mut pw = one;
        loop {
            pw = pw.try_mul(&neg_r)?.truncate(&u.prec);
            if pw.terms.is_empty() {
                break;
            }
            acc = acc.try_add(&pw)?;
        }
        acc.prec = u.prec.clone();
        Ok(acc.shift(&neg_v).scale_c(&lead_inv))
    }

    fn check_power_series(&self, what: &str) -> Result<()> {
        if self.valuation().iter().any(|v| *v < 0) {
            return Err(Error::Domain(format!("{what} of a series with a pole")));
        }
        for e in self.terms.keys() {
            for (i, x) in e.iter().enumerate() {
                if *x > 0 && self.prec[i] >= INF {
                    return Err(Error::Domain(format!(
                        "{what} of an exact polynomial needs a truncation"
                    )));
                }
            }
        }
        Ok(())
    }

    fn nilpotent_sum(&self, coeff: impl Fn(usize) -> Rational) -> Result<Self> {
        let n = self.vars.len();
        let one = SeriesElement::from_terms(self.vars.clone(), self.prec.clone(), [(vec![0; n], C::one())]);
        let mut acc = one.scale(&coeff(0));
        let mut pw = one;
        let mut k = 1;
        loop {
            pw = pw.try_mul(self)?.truncate(&self.prec);
            if pw.terms.is_empty() {
                break;
            }
            acc = acc.try_add(&pw.scale(&coeff(k)))?;
            k += 1;
        }
        Ok(acc)
    }

    /// exp(s) for s with zero constant term and no poles.
    pub fn exp(&self) -> Result<Self> {
        self.check_power_series("exp")?;
        let n = self.vars.len();
        if self.terms.contains_key(&vec![0; n]) {
            return Err(Error::Domain("exp of a series with nonzero constant term".into()));
        }
        self.nilpotent_sum(|k| Rational::new(1.into(), rational::factorial(k as u64)))
    }

    /// log(s) for s with constant term exactly 1.
    pub fn log(&self) -> Result<Self> {
        self.check_power_series("log")?;
        let n = self.vars.len();
        let c0 = self.terms.get(&vec![0; n]).cloned().unwrap_or_else(C::zero);
        if c0 != C::one() {
            return Err(Error::Domain(format!(
                "log of a series with constant term {} (must be 1)",
                c0.render()
            )));
        }
        let mut r = self.clone();
        r.terms.remove(&vec![0; n]);
        r.nilpotent_sum(|k| {
            if k == 0 {
                Rational::zero()
            } else if k % 2 == 1 {
                Rational::new(1.into(), (k as i64).into())
            } else {
                Rational::new((-1).into(), (k as i64).into())
            }
        })
    }

    pub fn pow_int(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow_int(-e);
        }
        let n = self.vars.len();
        let mut acc = SeriesElement::monomial(self.vars.clone(), vec![0; n], C::one());
        for _ in 0..e {
            acc = acc.try_mul(self)?;
        }
        Ok(acc)
    }

    /// Substitute linear forms for the variables of a series in one variable
    /// or more: `x_i -> sum_j forms[i][j] * y_j` in the target ring.
    pub fn compose_linear(&self, target: &Arc<[String]>, target_prec: &[i64], forms: &[Vec<Rational>]) -> Result<Self> {
        let n = self.vars.len();
        if forms.len() != n {
            return Err(Error::Config("one linear form per variable required".into()));
        }
        let m = target.len();
        let mut out = SeriesElement::from_terms(target.clone(), target_prec.to_vec(), std::iter::empty());
        // The source must be a power series known far enough in total degree.
        if self.valuation().iter().any(|v| *v < 0) {
            // Allowed only for a single variable substituted by a single
            // scaled variable.
            let simple: Vec<Option<(usize, Rational)>> = forms
                .iter()
                .map(|f| {
                    let nz: Vec<_> = f.iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                    (nz.len() == 1).then(|| (nz[0].0, nz[0].1.clone()))
                })
                .collect();
            if simple.iter().any(|s| s.is_none()) {
                return Err(Error::Domain(
                    "substituting a sum of variables into a Laurent pole".into(),
                ));
            }
            let mut p = vec![INF; m];
            let mut terms = Vec::new();
            for (e, c) in &self.terms {
                let mut ex = vec![0; m];
                let mut cc = c.clone();
                for (i, s) in simple.iter().enumerate() {
                    let (j, a) = s.as_ref().unwrap();
                    ex[*j] += e[i];
                    cc = cc.scale(&rational::pow(a, e[i]));
                }
                terms.push((ex, cc));
            }
            for (i, s) in simple.iter().enumerate() {
                let (j, _) = s.as_ref().unwrap();
                p[*j] = p[*j].min(self.prec[i]);
            }
            let p: Vec<i64> = p.iter().zip(target_prec).map(|(a, b)| *a.min(b)).collect();
            return Ok(SeriesElement::from_terms(target.clone(), p, terms));
        }
        // A source term of total degree k lands in total degree k, so the
        // result is exact on the target box only if the source is known up to
        // the box's largest total degree in the variables actually used.
        let total_prec = self.prec.iter().copied().min().unwrap_or(INF);
        let used: Vec<bool> = (0..m).map(|j| forms.iter().any(|f| !f[j].is_zero())).collect();
        let needed: i64 = (0..m).filter(|j| used[*j]).map(|j| target_prec[j].clamp(0, INF)).fold(0, sat_add);
        if total_prec < needed {
            return Err(Error::Integrity(format!(
                "substitution needs source precision {needed}, have {total_prec}"
            )));
        }
        let lin: Vec<SeriesElement<C>> = forms
            .iter()
            .map(|f| {
                let terms = f.iter().enumerate().map(|(j, c)| {
                    let mut e = vec![0; m];
                    e[j] = 1;
                    (e, C::from_rational(c))
                });
                SeriesElement::from_terms(target.clone(), target_prec.to_vec(), terms)
            })
            .collect();
        let mut cache: BTreeMap<(usize, i64), SeriesElement<C>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut term = SeriesElement::from_terms(target.clone(), target_prec.to_vec(), [(vec![0; m], c.clone())]);
            for (i, k) in e.iter().enumerate() {
                if *k == 0 {
                    continue;
                }
                let pw = match cache.get(&(i, *k)) {
                    Some(p) => p.clone(),
                    None => {
                        let p = lin[i].pow_int(*k)?;
                        cache.insert((i, *k), p.clone());
                        p
                    }
                };
                term = term.try_mul(&pw)?;
            }
            out = out.try_add(&term)?;
        }
        Ok(out)
    }

    pub fn negate_t_coeffs(&self) -> Self {
        self.map_coeffs(|c| c.negate_t())
    }

    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (e, c) in &self.terms {
            let mut mono = Vec::new();
            for (i, x) in e.iter().enumerate() {
                match x {
                    0 => {}
                    1 => mono.push(self.vars[i].clone()),
                    _ => mono.push(format!("{}^{}", self.vars[i], x)),
                }
            }
            let cs = c.render();
            let cs = if cs.contains(' ') { format!("({cs})") } else { cs };
            if mono.is_empty() {
                parts.push(cs);
            } else {
                parts.push(format!("{cs}*{}", mono.join("*")));
            }
        }
        let mut s = parts.join(" + ");
        if self.prec.iter().any(|p| *p < INF) {
            let ps: Vec<String> = self
                .vars
                .iter()
                .zip(&self.prec)
                .filter(|(_, p)| **p < INF)
                .map(|(v, p)| format!("{v}^{}", p + 1))
                .collect();
            s.push_str(&format!(" + O({})", ps.join(",")));
        }
        s
    }

    /// JSON array of `{exponents, coeff}` objects, sorted by exponent.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.terms
                .iter()
                .map(|(e, c)| json!({"exponents": e, "coeff": c.render()}))
                .collect(),
        )
    }
}

impl SeriesElement<Rational> {
    /// The constant value if the series has no variable dependence.
    pub fn constant_value(&self) -> Option<Rational> {
        let n = self.vars.len();
        if self.terms.keys().all(|e| e.iter().all(|x| *x == 0)) {
            Some(self.terms.get(&vec![0; n]).cloned().unwrap_or_else(Rational::zero))
        } else {
            None
        }
    }

    pub fn from_json(vars: &[&str], prec: &[i64], v: &Value) -> Result<Self> {
        let arr = v
            .as_array()
            .ok_or_else(|| Error::Parse("series JSON must be an array".into()))?;
        let mut terms = Vec::new();
        for item in arr {
            let e = item
                .get("exponents")
                .and_then(|e| e.as_array())
                .ok_or_else(|| Error::Parse("missing exponents".into()))?
                .iter()
                .map(|x| x.as_i64().ok_or_else(|| Error::Parse("bad exponent".into())))
                .collect::<Result<Vec<i64>>>()?;
            let c = item
                .get("coeff")
                .and_then(|c| c.as_str())
                .ok_or_else(|| Error::Parse("missing coeff".into()))?;
            terms.push((e, rational::parse(c)?));
        }
        let vars: Arc<[String]> = vars.iter().map(|s| s.to_string()).collect();
        if terms.iter().any(|(e, _)| e.len() != vars.len()) {
            return Err(Error::Parse("exponent vector length mismatch".into()));
        }
        Ok(SeriesElement::from_terms(vars, prec.to_vec(), terms))
    }
}

impl<C: Coeff> Zero for SeriesElement<C> {
    fn zero() -> Self {
        SeriesElement::constant(C::zero())
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl<C: Coeff> One for SeriesElement<C> {
    fn one() -> Self {
        SeriesElement::constant(C::one())
    }
}

impl<C: Coeff> Add for SeriesElement<C> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("series addition")
    }
}

impl<C: Coeff> Sub for SeriesElement<C> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.try_add(&rhs.neg()).expect("series subtraction")
    }
}

impl<C: Coeff> Mul for SeriesElement<C> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.try_mul(&rhs).expect("series multiplication")
    }
}

impl<C: Coeff> Neg for SeriesElement<C> {
    type Output = Self;
    fn neg(self) -> Self {
        SeriesElement {
            terms: self.terms.into_iter().map(|(e, c)| (e, -c)).collect(),
            ..self
        }
    }
}

impl<C: Coeff> Coeff for SeriesElement<C> {
    fn from_rational(x: &Rational) -> Self {
        SeriesElement::constant(C::from_rational(x))
    }

    fn scale(&self, x: &Rational) -> Self {
        SeriesElement::scale(self, x)
    }

    fn try_inv(&self) -> Option<Self> {
        self.inverse().ok()
    }

    fn negate_t(&self) -> Self {
        self.negate_t_coeffs()
    }

    fn from_q_series(s: &SeriesElement<Rational>) -> Result<Self> {
        let terms = s.terms.iter().map(|(e, c)| (e.clone(), C::from_rational(c)));
        Ok(SeriesElement::from_terms(s.vars.clone(), s.prec.clone(), terms))
    }

    fn render(&self) -> String {
        SeriesElement::render(self)
    }
}

/// Convenience: the rational 1 as a series constant.
pub fn one_q() -> SeriesElement<Rational> {
    SeriesElement::constant(q(1))
}
