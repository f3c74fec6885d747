//! Equivariant generating series of the cap and tube without negative
//! contact, as vacuum expectations over `ℚ[t, t⁻¹]`-valued Laurent series.
//!
//! Two-element blocks of `E(x_1..x_n, s)` contribute `x_i x_j / (x_i + x_j)`
//! up to a power series, which is not a Laurent series in several
//! variables. Every series here is therefore returned multiplied by the
//! normalizer `∏_{i<j} (x_i + x_j)`, taken over pairs inside each group of
//! `E` variables. For at most one variable per group the normalizer is 1.

use std::sync::Arc;

use num_traits::{One, Zero};

use crate::combinat::set_partitions;
use crate::error::{Error, Result};
use crate::exactseries::{
    pochhammer_recip, q, s_fn, s_power, varsigma, Coeff, Rational, SeriesElement, SeriesRing, TPoly,
};
use crate::wedgeops::{vev, WedgeOperator};

type TSeries = SeriesElement<TPoly>;
type Series = SeriesElement<Rational>;
type Op = WedgeOperator<TSeries>;

/// A normalized equivariant generating series.
#[derive(Clone, Debug)]
pub struct EqGf {
    pub series: TSeries,
    /// Variable pairs `(x_i, x_j)` whose sums multiply the true series.
    pub normalizer: Vec<(String, String)>,
}

impl EqGf {
    /// The series at `t = 0`; fails on negative powers of `t`.
    pub fn at_t_zero(&self) -> Result<Series> {
        let terms = self
            .series
            .terms()
            .iter()
            .map(|(e, c)| Ok((e.clone(), c.at_zero()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SeriesElement::from_terms(self.series.vars().clone(), self.series.prec().to_vec(), terms))
    }

    /// Largest power of `t` in any coefficient, or `None` if some coefficient
    /// has a negative power.
    pub fn t_degree(&self) -> Option<i64> {
        let mut deg = 0;
        for c in self.series.terms().values() {
            if !c.is_polynomial() {
                return None;
            }
            deg = deg.max(c.max_exp().unwrap_or(0));
        }
        Some(deg)
    }
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

fn build_ring(groups: &[(&[String], i64)], order: i64) -> Result<Arc<SeriesRing>> {
    let all: Vec<&str> = groups.iter().flat_map(|(g, _)| g.iter().map(String::as_str)).collect();
    let mut ring = SeriesRing::new(&all, &vec![order; all.len()])?;
    for (g, pole) in groups {
        for v in g.iter() {
            ring = ring.with_poles(v, *pole)?;
        }
    }
    Ok(Arc::new(ring))
}

fn lift(s: &Series) -> Result<TSeries> {
    TSeries::from_q_series(s)
}

fn sum_form(ring: &SeriesRing, idx: &[usize]) -> Vec<Rational> {
    let mut f = vec![Rational::zero(); ring.len()];
    for i in idx {
        f[*i] = Rational::one();
    }
    f
}

fn monomial_of(ring: &SeriesRing, idx: &[usize]) -> Series {
    let mut e = vec![0; ring.len()];
    for i in idx {
        e[*i] += 1;
    }
    SeriesElement::monomial(ring.vars().clone(), e, q(1))
}

/// `1/S(x_{i1} + ... + x_{ik})` in the ring variables.
fn inv_s_of_sum(ring: &SeriesRing, idx: &[usize]) -> Result<Series> {
    let prec = ring.working_prec();
    let need: i64 = idx.iter().map(|i| prec[*i]).sum();
    let inv = s_fn::<Rational>("x", &q(1), need + 1).inverse()?;
    inv.compose_linear(ring.vars(), &prec, &[sum_form(ring, idx)])
}

fn pair_sum(ring: &SeriesRing, i: usize, j: usize) -> Series {
    SeriesElement::from_terms(
        ring.vars().clone(),
        ring.working_prec(),
        [i, j].iter().map(|k| {
            let mut e = vec![0; ring.len()];
            e[*k] = 1;
            (e, q(1))
        }),
    )
}

/// `P · E(x_{idx}, s)` with `P = ∏_{i<j} (x_i + x_j)`; the normalizer is
/// distributed into the two-element blocks so that every term is a Laurent
/// series.
fn e_operator(ring: &Arc<SeriesRing>, idx: &[usize], s: &TPoly) -> Result<(Op, Vec<(usize, usize)>)> {
    let n = idx.len();
    let pairs: Vec<(usize, usize)> =
        (0..n).flat_map(|a| (a + 1..n).map(move |b| (idx[a], idx[b]))).collect();
    let mut terms = Vec::new();
    for p in set_partitions(n) {
        let blocks: Vec<Vec<usize>> = p.iter().map(|b| b.iter().map(|i| idx[*i]).collect()).collect();
        // normalizer pairs not absorbed by a two-element block
        let mut rest = Series::constant(q(1));
        for (a, b) in &pairs {
            if !blocks.iter().any(|blk| blk.len() == 2 && blk.contains(a) && blk.contains(b)) {
                rest = rest.try_mul(&pair_sum(ring, *a, *b))?;
            }
        }
        let mut factors = Vec::new();
        for blk in &blocks {
            factors.push(block_operator(ring, blk)?);
        }
        let mut scalar = lift(&rest)?;
        for _ in 0..(n - blocks.len()) {
            scalar = scalar.scale_c(s);
        }
        terms.push(Op::scaled(scalar, Op::Product(factors)));
    }
    Ok((Op::Sum(terms), pairs))
}

/// `T(x_B) E_0(|x_B|)` for one block, times `|x_B|` when the block has two
/// elements.
fn block_operator(ring: &Arc<SeriesRing>, blk: &[usize]) -> Result<Op> {
    let k = blk.len();
    let form = sum_form(ring, blk);
    if k == 1 {
        return Ok(Op::ESeries { j: 0, form, ring: ring.clone(), delta: true });
    }
    let prod = monomial_of(ring, blk);
    let bare = Op::ESeries { j: 0, form: form.clone(), ring: ring.clone(), delta: false };
    let sum = pair_or_sum(ring, blk);
    // T = ∏x (Σx)^{k-2}; the operator coefficient for k = 2 is T·Σx
    let t_coeff = prod.try_mul(&sum.pow_int((k as i64 - 2).max(0) + i64::from(k == 2))?)?;
    // scalar part T/ς(Σx) = ∏x (Σx)^{k-3}/S(Σx); for k = 2 the extra Σx
    // cancels the denominator
    let pole_free = prod.try_mul(&sum.pow_int(k as i64 - 3 + i64::from(k == 2))?)?;
    let scalar = pole_free.try_mul(&inv_s_of_sum(ring, blk)?)?;
    Ok(Op::Sum(vec![
        Op::scaled(lift(&t_coeff)?, bare),
        Op::scaled(lift(&scalar)?, Op::identity()),
    ]))
}

fn pair_or_sum(ring: &SeriesRing, blk: &[usize]) -> Series {
    SeriesElement::from_terms(
        ring.vars().clone(),
        ring.working_prec(),
        blk.iter().map(|k| {
            let mut e = vec![0; ring.len()];
            e[*k] = 1;
            (e, q(1))
        }),
    )
}

/// `A(x) = S(x)^{tx} Σ_{0≤k≤kmax} ς(x)^k/(1+tx)_k E_k(x)`. Only `k ≥ 0` can
/// reach the vacuum when the factor sits at the end of the bracket.
fn a_operator(ring: &Arc<SeriesRing>, var: &str, kmax: i64) -> Result<Op> {
    let prec = ring.working_prec();
    let x: TSeries = ring.var(var)?;
    let tx = x.scale_c(&TPoly::t());
    let sp = s_power::<TPoly>(var, &TPoly::one(), &tx, &prec)?;
    let i = ring.index(var)?;
    let sig = lift(&varsigma::<Rational>(var, &q(1), prec[i] + 1).embed(ring.vars())?.truncate(&prec))?;
    let mut terms = Vec::new();
    let mut sk = TSeries::constant(TPoly::one());
    for k in 0..=kmax {
        let c = sp.try_mul(&sk)?.try_mul(&pochhammer_recip(&tx, k, &prec)?)?.truncate(&prec);
        terms.push(Op::scaled(c, WedgeOperator::e_series(k, var, ring)?));
        sk = sk.try_mul(&sig)?.truncate(&prec);
    }
    Ok(Op::Sum(terms))
}

fn alphas(parts: &[i64], sign: i64) -> Vec<Op> {
    parts
        .iter()
        .map(|a| Op::scaled(TSeries::from_rational(&(q(1) / q(*a))), Op::Alpha(sign * a)))
        .collect()
}

fn check_positive(mu: &[i64]) -> Result<i64> {
    if mu.is_empty() || mu.iter().any(|m| *m <= 0) {
        return Err(Error::Domain(format!("{mu:?} must be a nonempty list of positive parts")));
    }
    Ok(mu.iter().sum())
}

fn finish(val: TSeries, ring: &SeriesRing, pairs: Vec<(usize, usize)>, order: i64) -> EqGf {
    let v = ring.vars();
    EqGf {
        series: val.truncate(&vec![order; ring.len()]),
        normalizer: pairs.into_iter().map(|(a, b)| (v[a].clone(), v[b].clone())).collect(),
    }
}

/// `G(μ | z_1..z_n ; w_1..w_m) = ⟨∏ α_{μ_i}/μ_i · E(z, t) e^{α_{-1}} ∏ A*(w_j)⟩`
/// with `m ≤ 1`.
pub fn eq_cap_gf(mu: &[i64], n: usize, m: usize, order: i64) -> Result<EqGf> {
    let d = check_positive(mu)?;
    if m > 1 {
        return Err(Error::Unsupported("at most one A* factor".into()));
    }
    let zs = names("z", n);
    let ws = names("w", m);
    let ring = build_ring(&[(&zs, 1), (&ws, d + 1)], order)?;
    let zi: Vec<usize> = (0..n).collect();
    let (e, pairs) = e_operator(&ring, &zi, &TPoly::t())?;
    let mut ops = alphas(mu, 1);
    ops.push(e);
    ops.push(Op::ExpAlpha(TSeries::one(), -1));
    for w in &ws {
        ops.push(a_operator(&ring, w, d)?.adjoint_with(true));
    }
    Ok(finish(vev(&ops, None)?, &ring, pairs, order))
}

/// `⟨∏ A(z_i) e^{α_1} E(w, -t) ∏ α_{-ν_j}/ν_j⟩` with `n ≤ 1`.
pub fn eq_cap_infinity_gf(nu: &[i64], n: usize, m: usize, order: i64) -> Result<EqGf> {
    let d = check_positive(nu)?;
    if n > 1 {
        return Err(Error::Unsupported("at most one A factor".into()));
    }
    let zs = names("z", n);
    let ws = names("w", m);
    let ring = build_ring(&[(&zs, d + 1), (&ws, 1)], order)?;
    let wi: Vec<usize> = (n..n + m).collect();
    let (e, pairs) = e_operator(&ring, &wi, &(-TPoly::t()))?;
    let mut ops = Vec::new();
    for z in &zs {
        ops.push(a_operator(&ring, z, d)?);
    }
    ops.push(Op::ExpAlpha(TSeries::one(), 1));
    ops.push(e);
    ops.extend(alphas(nu, -1));
    Ok(finish(vev(&ops, None)?, &ring, pairs, order))
}

/// `⟨∏ α_{μ_i}/μ_i · E(z, t) E(w, -t) ∏ α_{-ν_j}/ν_j⟩`.
pub fn eq_tube_gf(mu: &[i64], nu: &[i64], n: usize, m: usize, order: i64) -> Result<EqGf> {
    let d = check_positive(mu)?;
    if check_positive(nu)? != d {
        return Err(Error::Domain(format!("{mu:?} and {nu:?} have different degrees")));
    }
    let zs = names("z", n);
    let ws = names("w", m);
    let ring = build_ring(&[(&zs, 1), (&ws, 1)], order)?;
    let zi: Vec<usize> = (0..n).collect();
    let wi: Vec<usize> = (n..n + m).collect();
    let (ez, mut pairs) = e_operator(&ring, &zi, &TPoly::t())?;
    let (ew, pw) = e_operator(&ring, &wi, &(-TPoly::t()))?;
    pairs.extend(pw);
    let mut ops = alphas(mu, 1);
    ops.push(ez);
    ops.push(ew);
    ops.extend(alphas(nu, -1));
    Ok(finish(vev(&ops, None)?, &ring, pairs, order))
}

/// The non-equivariant tube series `⟨∏ α_μ/μ ∏ E_0(z_i) ∏ E_0(w_j) ∏ α_{-ν}/ν⟩`
/// times the same normalizer as [`eq_tube_gf`].
pub fn stationary_tube_gf(mu: &[i64], nu: &[i64], n: usize, m: usize, order: i64) -> Result<Series> {
    check_positive(mu)?;
    check_positive(nu)?;
    let zs = names("z", n);
    let ws = names("w", m);
    let ring = build_ring(&[(&zs, 1), (&ws, 1)], order)?;
    type QOp = WedgeOperator<Series>;
    let al = |p: &[i64], sign: i64| -> Vec<QOp> {
        p.iter().map(|a| QOp::scaled_q(q(1) / q(*a), QOp::Alpha(sign * a))).collect()
    };
    let mut ops = al(mu, 1);
    for v in zs.iter().chain(&ws) {
        ops.push(QOp::e_series(0, v, &ring)?);
    }
    ops.extend(al(nu, -1));
    let mut val = vev(&ops, None)?;
    for group in [(0..n).collect::<Vec<_>>(), (n..n + m).collect()] {
        for a in 0..group.len() {
            for b in a + 1..group.len() {
                val = val.try_mul(&pair_sum(&ring, group[a], group[b]))?;
            }
        }
    }
    Ok(val.truncate(&vec![order; ring.len()]))
}

/// `⟨∏ α_μ/μ E_0(z) e^{α_{-1}}⟩`, the stationary one-point cap series.
pub fn stationary_cap_gf(mu: &[i64], order: i64) -> Result<Series> {
    check_positive(mu)?;
    let ring = build_ring(&[(&["z".to_string()], 1)], order)?;
    type QOp = WedgeOperator<Series>;
    let mut ops: Vec<QOp> = mu.iter().map(|a| QOp::scaled_q(q(1) / q(*a), QOp::Alpha(*a))).collect();
    ops.push(QOp::e_series(0, "z", &ring)?);
    ops.push(QOp::ExpAlpha(Series::one(), -1));
    Ok(vev(&ops, None)?.truncate(&[order]))
}

/// Rename helper for callers comparing series built in different rings.
pub fn relabel(s: &TSeries, vars: &[&str]) -> Result<TSeries> {
    if vars.len() != s.vars().len() {
        return Err(Error::Config("relabel needs one name per variable".into()));
    }
    let v: Arc<[String]> = vars.iter().map(|x| x.to_string()).collect();
    Ok(SeriesElement::from_terms(v, s.prec().to_vec(), s.terms().iter().map(|(e, c)| (e.clone(), c.clone()))))
}
