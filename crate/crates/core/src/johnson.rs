//! Finite-`r` orbifold brackets of `C_{r,s}` and their large-`r` constant
//! terms.
//!
//! Every factor `A_{a/r}(z)` expands as `Σ_i c_i(z) E_{ir+a}(z)`. A bracket
//! only sees the `z^{k+1}` coefficient of each factor, which is a finite sum
//! of weighted bilinears once the `i` range is cut down by energy balance.
//! The genus parameter `u` is set to 1; the genus of a term is recoverable
//! from its `z`- and `t`-degrees by homogeneity.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exactseries::{pochhammer_recip, q, rational, s_power, Coeff, FracMonomial, Rational, SeriesElement, TPoly};
use crate::gwformulas::ContactData;
use crate::wedgeops::{inv_varsigma_coeff, vev, WedgeOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum JohnsonMode {
    /// Non-equivariant limit: the `t`-powers carried by the `r`-energy are
    /// stripped and the remaining coefficients are evaluated at `t = 0`.
    TZero,
    /// Coefficients in `ℚ[t, t⁻¹]` with the fractional prefactors tracked.
    Full,
}

/// One insertion `A_{a/r}[k]`: age numerator `a` with `0 ≤ a < r` and the
/// `z^{k+1}` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct AgeInsertion {
    pub numerator: i64,
    pub k: i64,
}

impl AgeInsertion {
    pub fn new(numerator: i64, k: i64) -> Self {
        AgeInsertion { numerator, k }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbifoldRequest {
    pub r: i64,
    pub s: i64,
    pub d: i64,
    /// Insertions at `0`, in bracket order.
    pub left: Vec<AgeInsertion>,
    /// Insertions at `∞`, in bracket order; each enters as `A*_{a/s}`.
    pub right: Vec<AgeInsertion>,
    pub mode: JohnsonMode,
    /// Keep the factor `e^{tα_r/(ur)}`, which cannot contribute when `r > d`.
    pub with_exp_r: bool,
}

/// The value of a bracket: `t`-polynomial part times the tracked monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbifoldValue {
    pub poly: TPoly,
    pub monomial: FracMonomial,
}

impl OrbifoldValue {
    /// Fold the monomial into the polynomial. A nonzero value whose monomial
    /// kept a fractional exponent is an integrity failure.
    pub fn fold(&self) -> Result<TPoly> {
        if self.poly.is_zero() {
            return Ok(TPoly::zero());
        }
        Ok(self.poly.clone() * self.monomial.fold()?)
    }
}

/// One summand `c_i(z) E_{ir+a}(z)` of a factor.
#[derive(Clone, Debug)]
pub struct ATerm<C: Coeff> {
    pub i: i64,
    pub j: i64,
    pub coeff: SeriesElement<C>,
}

/// A truncated expansion of `A_{a/r}(z)` (without the `t^{a/r}/u`
/// prefactor) over a window of `i`.
#[derive(Clone, Debug)]
pub struct AOverR<C: Coeff> {
    pub a: i64,
    pub r: i64,
    pub terms: Vec<ATerm<C>>,
}

struct Params<C> {
    /// Value substituted for `t` inside the coefficients.
    t: C,
    /// Replaces the `t` of `(tzS)^i`; 1 when the `t`-powers are stripped.
    tau: C,
}

fn params<C: Coeff>(mode: JohnsonMode, negate: bool, t: impl Fn() -> C) -> Params<C> {
    match mode {
        JohnsonMode::TZero => Params { t: C::zero(), tau: C::one() },
        JohnsonMode::Full => {
            let t = if negate { -t() } else { t() };
            Params { tau: t.clone(), t }
        }
    }
}

fn z_series<C: Coeff>(low: i64, coeffs: Vec<C>, prec: i64) -> SeriesElement<C> {
    SeriesElement::univariate("z", low, coeffs, prec)
}

/// `c_i(z)` known through `z^prec`.
fn a_coefficient<C: Coeff>(a: i64, r: i64, i: i64, prec: i64, p: &Params<C>) -> Result<SeriesElement<C>> {
    let lead = i + i64::from(a > 0);
    // the power-series part only needs to reach prec - lead
    let n = (prec - lead).max(0);
    let rq = q(r);
    // (tz + a)/r
    let x = z_series(0, vec![C::from_i64(a).scale(&rq.recip()), p.t.scale(&rq.recip())], n);
    let expo = x.try_add(&SeriesElement::constant(C::from_i64(i)))?;
    let mut c = s_power("z", &C::from_i64(r), &expo, &[n])?;
    c = c.try_mul(&pochhammer_recip(&x, i, &[n])?)?.truncate(&[n]);
    if a > 0 {
        // z/(tz + a) = (z/a) / (1 + tz/a)
        let den = z_series(0, vec![C::one(), p.t.scale(&q(a).recip())], n);
        c = c.try_mul(&den.inverse()?)?.truncate(&[n]).scale(&q(a).recip());
    }
    let mut tau_i = C::one();
    let base = if i >= 0 { p.tau.clone() } else { p.tau.try_inv().ok_or_else(|| Error::Domain("τ is not invertible".into()))? };
    for _ in 0..i.abs() {
        tau_i = tau_i * base.clone();
    }
    Ok(c.scale_c(&tau_i).shift(&[lead]).truncate(&[prec]))
}

/// Expansion of `A_{a/r}` for `i` in `lo..=hi`, each coefficient known
/// through `z^prec`.
pub fn build_a_over_r<C: Coeff>(a: i64, r: i64, lo: i64, hi: i64, prec: i64, mode: JohnsonMode, t: impl Fn() -> C) -> Result<AOverR<C>> {
    if r <= 0 || a < 0 || a >= r {
        return Err(Error::Domain(format!("age numerator {a} must lie in [0, {r})")));
    }
    let p = params(mode, false, t);
    build_with(a, r, lo, hi, prec, &p)
}

fn build_with<C: Coeff>(a: i64, r: i64, lo: i64, hi: i64, prec: i64, p: &Params<C>) -> Result<AOverR<C>> {
    let mut terms = Vec::new();
    for i in lo..=hi {
        let coeff = a_coefficient(a, r, i, prec, p)?;
        if !coeff.is_exact_zero() {
            terms.push(ATerm { i, j: i * r + a, coeff });
        }
    }
    Ok(AOverR { a, r, terms })
}

impl<C: Coeff> AOverR<C> {
    /// The `z^{k+1}` coefficient as an operator.
    pub fn coefficient(&self, k: i64) -> Result<WedgeOperator<C>> {
        let n = k + 1;
        let mut out = Vec::new();
        for t in &self.terms {
            out.push(extract(&t.coeff, t.j, n)?);
        }
        Ok(WedgeOperator::Sum(out))
    }
}

/// `[z^n] (c(z) E_j(z))` as a weighted bilinear.
fn extract<C: Coeff>(c: &SeriesElement<C>, j: i64, n: i64) -> Result<WedgeOperator<C>> {
    let need = if j == 0 { n + 1 } else { n };
    c.require_prec(&[need])?;
    let low = c.valuation().first().copied().unwrap_or(0).min(n);
    let deg = (n - low).max(0) as usize;
    let mut weight = vec![C::zero(); deg + 1];
    let mut constant = C::zero();
    for (e, ce) in c.terms() {
        let e = e[0];
        if e <= n {
            let m = (n - e) as usize;
            let f = Rational::new(1.into(), rational::factorial(m as u64));
            weight[m] = weight[m].clone() + ce.scale(&f);
        }
        if j == 0 && e <= n + 1 {
            // [z^{n-e}] 1/ς(z) = inv_varsigma_coeff(n - e - 1)
            constant = constant + ce.scale(&inv_varsigma_coeff(n - e - 1));
        }
    }
    Ok(WedgeOperator::EWeighted { j, weight, constant })
}

fn check(req: &OrbifoldRequest) -> Result<()> {
    if req.r <= 0 || req.s <= 0 {
        return Err(Error::Domain("r and s must be positive".into()));
    }
    if req.d < 0 {
        return Err(Error::Domain("negative degree".into()));
    }
    for (side, m) in [(&req.left, req.r), (&req.right, req.s)] {
        for x in side.iter() {
            if x.numerator < 0 || x.numerator >= m {
                return Err(Error::Domain(format!("age numerator {} must lie in [0, {m})", x.numerator)));
            }
            if x.k < 0 {
                return Err(Error::Domain("ψ-power must be non-negative".into()));
            }
        }
    }
    Ok(())
}

/// Upper end of the `i` window: the `z^{k+1}` coefficient needs
/// `i + [a > 0] ≤ k + 1`.
fn hi_of(x: &AgeInsertion) -> i64 {
    x.k + 1 - i64::from(x.numerator > 0)
}

/// `i` windows for one side: `Σ (i_f m + a_f) = target` for some target in
/// `targets`, with each `i_f` at most its `hi`.
fn windows(side: &[AgeInsertion], m: i64, targets: &[i64], mode: JohnsonMode) -> Vec<(i64, i64)> {
    let sum_a: i64 = side.iter().map(|x| x.numerator).sum();
    let his: Vec<i64> = side.iter().map(hi_of).collect();
    let total_hi: i64 = his.iter().sum();
    let min_target = targets.iter().copied().min().unwrap_or(0);
    side.iter()
        .zip(&his)
        .map(|(x, hi)| {
            let mut lo = (min_target - sum_a).div_euclid(m) - (total_hi - hi);
            if mode == JohnsonMode::TZero && x.numerator == 0 {
                // (1 + tz/r)_i^{-1} vanishes at t = 0 for i < 0
                lo = lo.max(0);
            }
            (lo, *hi)
        })
        .collect()
}

/// Johnson's bracket `⟨∏A_{a/r}[k] e^{tα_r/(ur)} (t^{1/r}(-t)^{1/s})^{-d} P_d
/// e^{-tα_{-s}/(us)} ∏A*_{a/s}[k]⟩` at `u = 1`.
pub fn orbifold_bracket(req: &OrbifoldRequest) -> Result<OrbifoldValue> {
    check(req)?;
    match req.mode {
        JohnsonMode::TZero => {
            let v = bracket_ops::<Rational>(req, Rational::zero)?;
            Ok(OrbifoldValue { poly: TPoly::from_rational(&v), monomial: FracMonomial::default() })
        }
        JohnsonMode::Full => {
            let poly = bracket_ops::<TPoly>(req, TPoly::t)?;
            let mut mono = FracMonomial::default();
            for x in &req.left {
                mono = mono * FracMonomial::t_pow(Rational::new(x.numerator.into(), req.r.into()));
            }
            for x in &req.right {
                mono = mono * FracMonomial::neg_t_pow(Rational::new(x.numerator.into(), req.s.into()));
            }
            let step = FracMonomial::t_pow(Rational::new(1.into(), req.r.into()))
                * FracMonomial::neg_t_pow(Rational::new(1.into(), req.s.into()));
            mono = mono * step.pow(-req.d);
            Ok(OrbifoldValue { poly, monomial: mono })
        }
    }
}

fn bracket_ops<C: Coeff>(req: &OrbifoldRequest, t: fn() -> C) -> Result<C> {
    let (r, s, d) = (req.r, req.s, req.d);
    let left_targets: Vec<i64> = if req.with_exp_r { (0..=d / r).map(|k| d - k * r).collect() } else { vec![d] };
    let right_targets: Vec<i64> = (0..=d / s).map(|k| d - k * s).collect();
    let lp = params(req.mode, false, t);
    let rp = params(req.mode, true, t);
    let mut ops = Vec::new();
    for (x, (lo, hi)) in req.left.iter().zip(windows(&req.left, r, &left_targets, req.mode)) {
        let a = build_with(x.numerator, r, lo, hi, x.k + 2, &lp)?;
        ops.push(a.coefficient(x.k)?);
    }
    if req.with_exp_r {
        let c = match req.mode {
            JohnsonMode::TZero => C::one(),
            JohnsonMode::Full => t(),
        };
        ops.push(WedgeOperator::ExpAlpha(c.scale(&q(r).recip()), r));
    }
    ops.push(WedgeOperator::Project(d as u64));
    // e^{-tα_{-s}/(us)}; with the (-t)-powers stripped it is e^{α_{-s}/s}
    let c = match req.mode {
        JohnsonMode::TZero => C::one(),
        JohnsonMode::Full => -t(),
    };
    ops.push(WedgeOperator::ExpAlpha(c.scale(&q(s).recip()), -s));
    for (x, (lo, hi)) in req.right.iter().zip(windows(&req.right, s, &right_targets, req.mode)) {
        let a = build_with(x.numerator, s, lo, hi, x.k + 2, &rp)?;
        ops.push(a.coefficient(x.k)?.adjoint_with(false));
    }
    vev(&ops, None)
}

/// The data of a contact request as Johnson insertions at a given `r = s`.
/// Positive parts `a` become ages `a/r`, negative parts `b` become `(r+b)/r`,
/// and stationary insertions `τ_k(ω)` become `A_{0/r}[k]` on the left.
pub fn request_for(cd: &ContactData, r: i64, mode: JohnsonMode) -> Result<OrbifoldRequest> {
    let d = cd.degree()?;
    let ks = cd.stationary_ks()?;
    let cap = cd.mu_inf.is_empty();
    let s = if cap { 1 } else { r };
    let side = |parts: &[i64], m: i64| -> Vec<AgeInsertion> {
        parts.iter().map(|p| AgeInsertion::new(if *p > 0 { *p } else { m + p }, 0)).collect()
    };
    let mut left = side(&cd.positives0(), r);
    left.extend(side(&cd.negatives0(), r));
    left.extend(ks.iter().map(|k| AgeInsertion::new(0, *k)));
    let mut right = side(&cd.positives_inf(), s);
    right.extend(side(&cd.negatives_inf(), s));
    let max_part = cd.mu0.iter().chain(&cd.mu_inf).map(|x| x.abs()).max().unwrap_or(0);
    if r <= max_part {
        return Err(Error::Domain(format!("r = {r} must exceed every |contact order| (max {max_part})")));
    }
    Ok(OrbifoldRequest { r, s, d, left, right, mode, with_exp_r: false })
}

/// `r^{ρ_-}` times the non-equivariant bracket, as a function of `r`.
pub fn normalized_bracket(cd: &ContactData, r: i64) -> Result<Rational> {
    let req = request_for(cd, r, JohnsonMode::TZero)?;
    let v = orbifold_bracket(&req)?.fold()?.coeff(0);
    Ok(v * rational::pow(&q(r), cd.rho_minus() as i64))
}

/// A polynomial in `r` fitted through samples.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RFit {
    /// Coefficients of `r^0, r^1, ...`.
    #[serde(serialize_with = "ser_rationals")]
    pub coeffs: Vec<Rational>,
    pub samples: Vec<i64>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(rational::to_string))
}

impl RFit {
    pub fn constant_term(&self) -> Rational {
        self.coeffs.first().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, r: &Rational) -> Rational {
        self.coeffs.iter().rev().fold(Rational::zero(), |acc, c| acc * r + c)
    }
}

/// Coefficients of the interpolating polynomial through `(x_i, y_i)`.
pub fn lagrange(xs: &[Rational], ys: &[Rational]) -> Vec<Rational> {
    let n = xs.len();
    let mut out = vec![Rational::zero(); n];
    for i in 0..n {
        // basis polynomial ∏_{j≠i} (x - x_j)/(x_i - x_j)
        let mut basis = vec![Rational::one()];
        let mut den = Rational::one();
        for j in 0..n {
            if j == i {
                continue;
            }
            let mut next = vec![Rational::zero(); basis.len() + 1];
            for (k, b) in basis.iter().enumerate() {
                next[k + 1] += b;
                next[k] -= b * &xs[j];
            }
            basis = next;
            den *= &xs[i] - &xs[j];
        }
        let f = &ys[i] / den;
        for (k, b) in basis.iter().enumerate() {
            out[k] += b * &f;
        }
    }
    while out.len() > 1 && out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

/// The relative invariant as the `r⁰` term of `r^{ρ_-}` times the orbifold
/// bracket. The fit starts at degree `ρ_- + 2` (capped by the sample count),
/// grows while samples remain, and is accepted once every further sample
/// confirms it.
pub fn relative_via_limit(cd: &ContactData, r_samples: &[i64]) -> Result<(Rational, RFit)> {
    let floor = stable_floor(cd)?;
    if let Some(bad) = r_samples.iter().find(|r| **r <= floor) {
        return Err(Error::Domain(format!("sample r = {bad} must exceed {floor}")));
    }
    if r_samples.len() < 2 {
        return Err(Error::Config("need at least two samples of r".into()));
    }
    // start at ρ_- + 2, or lower when only a few samples were given
    let mut deg = (cd.rho_minus() + 2).min(r_samples.len() - 2);
    let xs: Vec<Rational> = r_samples.iter().map(|r| q(*r)).collect();
    let ys = r_samples.iter().map(|r| normalized_bracket(cd, *r)).collect::<Result<Vec<_>>>()?;
    while deg + 2 <= xs.len() {
        let coeffs = lagrange(&xs[..=deg], &ys[..=deg]);
        let fit = RFit { coeffs, samples: r_samples.to_vec() };
        if xs[deg + 1..].iter().zip(&ys[deg + 1..]).all(|(x, y)| fit.eval(x) == *y) {
            return Ok((fit.constant_term(), fit));
        }
        deg += 1;
    }
    Err(Error::Domain("degree bound too small for the given samples".into()))
}

/// Smallest `R` such that brackets for `r > R` are in the stable range: the
/// larger of the two positive-part sums, i.e. `d` plus the negative contact
/// on the heavier side. Below it, summands whose r-energy would otherwise
/// be too large to survive can still reach the vacuum.
pub fn stable_floor(cd: &ContactData) -> Result<i64> {
    let d = cd.degree()?;
    let p0: i64 = cd.positives0().iter().sum();
    let pi: i64 = cd.positives_inf().iter().sum();
    Ok(d.max(p0).max(pi))
}

/// Default samples: `count` consecutive values above [`stable_floor`].
pub fn default_samples(cd: &ContactData, count: usize) -> Result<Vec<i64>> {
    let start = stable_floor(cd)? + 1;
    Ok((start..start + count as i64).collect())
}

/// The orbifold side of a contact request at explicit `(r, s)`, scaled by
/// `r^{ρ_-}` and folded to a polynomial in `t`.
///
/// `s` must equal `r` for a tube or `1` for a cap. A tube may also be asked
/// at `s = 1` when every part at infinity is 1: the point at infinity is
/// then not orbifold, and the cap bracket times `d!` stands in for it.
pub fn bracket_at(cd: &ContactData, r: i64, s: i64, mode: JohnsonMode) -> Result<TPoly> {
    let (data, scale) = rs_data(cd, r, s)?;
    let v = orbifold_bracket(&request_for(&data, r, mode)?)?.fold()?;
    Ok(v * TPoly::from_rational(&(scale * rational::pow(&q(r), data.rho_minus() as i64))))
}

/// [`relative_via_limit`] for the same `(r, s)` convention as [`bracket_at`].
pub fn relative_at_s(cd: &ContactData, s_is_one: bool, r_samples: &[i64]) -> Result<(Rational, RFit)> {
    let (data, scale) = if s_is_one { rs_data(cd, 2, 1)? } else { (cd.clone(), q(1)) };
    let (v, mut fit) = relative_via_limit(&data, r_samples)?;
    fit.coeffs.iter_mut().for_each(|c| *c *= &scale);
    Ok((v * scale, fit))
}

fn rs_data(cd: &ContactData, r: i64, s: i64) -> Result<(ContactData, Rational)> {
    let d = cd.degree()?;
    match (cd.mu_inf.is_empty(), s) {
        (true, 1) => Ok((cd.clone(), q(1))),
        (false, s) if s == r => Ok((cd.clone(), q(1))),
        (false, 1) if cd.mu_inf.iter().all(|m| *m == 1) => {
            let cap = ContactData { mu_inf: vec![], ..cd.clone() };
            Ok((cap, Rational::from_integer(rational::factorial(d as u64))))
        }
        (false, 1) => Err(Error::Domain("s = 1 allows only contact order 1 at infinity".into())),
        _ => Err(Error::Unsupported(format!("s = {s} with r = {r}: only s = r, or s = 1, are implemented"))),
    }
}
