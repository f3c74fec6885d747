//! Closed-form evaluators for cap and tube invariants.
//!
//! Non-equivariant invariants with negative contact are vacuum expectations
//! of zero-mode operators `E_j[0]` sandwiched between bosonic modes; the
//! equivariant generating series live in [`equivariant`].

pub mod equivariant;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::combinat::{injections, partitions, permutations, set_partitions};
use crate::error::{Error, Result};
use crate::exactseries::{inv_varsigma, q, rational, varsigma, Rational, SeriesElement};
use crate::wedgeops::{apply, basis_up_to, connected_from, vev, StateReport, WedgeOperator};

pub use equivariant::{eq_cap_gf, eq_cap_infinity_gf, eq_tube_gf, EqGf};

type Op = WedgeOperator<Rational>;
type Series = SeriesElement<Rational>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum InsertionClass {
    Omega,
    Bold0,
    BoldInf,
}

/// `τ_k(class)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Insertion {
    pub k: u32,
    pub class: InsertionClass,
}

impl Insertion {
    pub fn omega(k: u32) -> Self {
        Insertion { k, class: InsertionClass::Omega }
    }
}

/// Signed contact orders at `0` and `∞` plus interior insertions.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContactData {
    pub mu0: Vec<i64>,
    #[serde(rename = "muInf", default)]
    pub mu_inf: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<i64>,
    #[serde(default)]
    pub insertions: Vec<Insertion>,
}

impl ContactData {
    pub fn new(mu0: Vec<i64>, mu_inf: Vec<i64>, insertions: Vec<Insertion>) -> Self {
        ContactData { mu0, mu_inf, d: None, insertions }
    }

    /// Stationary data: every insertion is `τ_k(ω)`.
    pub fn stationary(mu0: &[i64], mu_inf: &[i64], ks: &[u32]) -> Self {
        Self::new(mu0.to_vec(), mu_inf.to_vec(), ks.iter().map(|k| Insertion::omega(*k)).collect())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("contact data: {e}")))
    }

    /// The degree, checking that every contact order is nonzero and that both
    /// sides sum to it.
    pub fn degree(&self) -> Result<i64> {
        if self.mu0.iter().chain(&self.mu_inf).any(|m| *m == 0) {
            return Err(Error::Domain("contact orders must be nonzero".into()));
        }
        let s0: i64 = self.mu0.iter().sum();
        let d = self.d.unwrap_or(s0);
        if d <= 0 {
            return Err(Error::Domain(format!("degree must be positive, got {d}")));
        }
        if s0 != d {
            return Err(Error::Domain(format!("contact orders at 0 sum to {s0}, not the degree {d}")));
        }
        if !self.mu_inf.is_empty() {
            let si: i64 = self.mu_inf.iter().sum();
            if si != d {
                return Err(Error::Domain(format!("contact orders at infinity sum to {si}, not {d}")));
            }
        }
        Ok(d)
    }

    /// Psi powers of the insertions, all of which must be `ω`.
    pub fn stationary_ks(&self) -> Result<Vec<i64>> {
        self.insertions
            .iter()
            .map(|i| match i.class {
                InsertionClass::Omega => Ok(i.k as i64),
                c => Err(Error::Unsupported(format!(
                    "class {c:?} belongs to the equivariant formulas, not the stationary ones"
                ))),
            })
            .collect()
    }

    pub fn positives0(&self) -> Vec<i64> {
        self.mu0.iter().copied().filter(|m| *m > 0).collect()
    }

    pub fn negatives0(&self) -> Vec<i64> {
        self.mu0.iter().copied().filter(|m| *m < 0).collect()
    }

    pub fn positives_inf(&self) -> Vec<i64> {
        self.mu_inf.iter().copied().filter(|m| *m > 0).collect()
    }

    pub fn negatives_inf(&self) -> Vec<i64> {
        self.mu_inf.iter().copied().filter(|m| *m < 0).collect()
    }

    /// Number of negative contact orders on both sides.
    pub fn rho_minus(&self) -> usize {
        self.negatives0().len() + self.negatives_inf().len()
    }
}

/// One summand of `Σ_P N_{b_P} E_{b_P}[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SetPartitionTerm {
    /// Blocks of `{1..m}` ordered by smallest element.
    pub blocks: Vec<Vec<usize>>,
    pub n: Rational,
    pub operator: Op,
}

/// All set partitions of `{1..m}` in canonical order.
pub fn enumerate_set_partitions(m: usize) -> Vec<Vec<Vec<usize>>> {
    set_partitions(m)
        .into_iter()
        .map(|p| p.into_iter().map(|b| b.into_iter().map(|i| i + 1).collect()).collect())
        .collect()
}

fn block_sum(b: &[i64], block: &[usize]) -> i64 {
    block.iter().map(|i| b[i - 1]).sum()
}

/// `N_{b_P} = ∏_blocks (l-1)! ∏_{i≥2} b_{block_i}` for 1-based blocks.
pub fn n_weight(b: &[i64], p: &[Vec<usize>]) -> Rational {
    let mut n = Rational::one();
    for block in p {
        n *= Rational::from_integer(rational::factorial(block.len().saturating_sub(1) as u64));
        for i in block.iter().skip(1) {
            n *= q(b[i - 1]);
        }
    }
    n
}

/// The summands of `Σ_P N_{b_P} E_{b_P}[0]` in canonical order.
pub fn set_partition_terms(b: &[i64]) -> Vec<SetPartitionTerm> {
    enumerate_set_partitions(b.len())
        .into_iter()
        .map(|p| {
            let ops = p.iter().map(|blk| Op::ECoeff(block_sum(b, blk), 0)).collect();
            SetPartitionTerm { n: n_weight(b, &p), operator: Op::Product(ops), blocks: p }
        })
        .collect()
}

/// `Σ_P N_{b_P} E_{b_P}[0]` as a single operator; the identity for empty `b`.
pub fn negative_contact_operator(b: &[i64]) -> Op {
    if b.is_empty() {
        return Op::identity();
    }
    Op::Sum(set_partition_terms(b).into_iter().map(|t| Op::scaled_q(t.n, t.operator)).collect())
}

/// `{α_a, E_{b_P}[0]}` reduced with `[α_j, E_k[0]] = j α_{j+k}`. A bracket
/// that reaches `α_0` is a multiple of the charge and vanishes.
pub fn nested_bracket(a: i64, b: &[i64], p: &[Vec<usize>]) -> Op {
    let mut c = q(1);
    let mut j = a;
    for blk in p {
        c *= q(j);
        j += block_sum(b, blk);
        if j == 0 {
            return Op::zero();
        }
    }
    Op::scaled_q(c, Op::Alpha(j))
}

/// The same bracket as an unreduced tree of commutators.
pub fn nested_bracket_expanded(a: i64, b: &[i64], p: &[Vec<usize>]) -> Op {
    p.iter()
        .fold(Op::Alpha(a), |acc, blk| Op::commutator(acc, Op::ECoeff(block_sum(b, blk), 0)))
}

/// `Σ_P N_{b_P} {α_a, E_{b_P}[0]} = a (a+Σb)^{n-1} α_{a+Σb}` on every state of
/// energy at most `cap`, with the brackets expanded as commutators.
pub fn verify_lemma_comb(a: i64, b: &[i64], cap: u64) -> Result<Vec<StateReport>> {
    let total = a + b.iter().sum::<i64>();
    if a <= 0 || b.iter().any(|x| *x >= 0) || total <= 0 || b.is_empty() {
        return Err(Error::Domain(format!(
            "need a > 0, nonempty negative b and a + Σb > 0 (a = {a}, b = {b:?})"
        )));
    }
    let lhs = Op::Sum(
        enumerate_set_partitions(b.len())
            .iter()
            .map(|p| Op::scaled_q(n_weight(b, p), nested_bracket_expanded(a, b, p)))
            .collect(),
    );
    let coeff = q(a) * rational::pow(&q(total), b.len() as i64 - 1);
    let rhs = Op::scaled_q(coeff, Op::Alpha(total));
    let reach = cap + a.unsigned_abs() + b.iter().map(|x| x.unsigned_abs()).sum::<u64>();
    basis_up_to::<Rational>(cap)
        .into_iter()
        .map(|(l, v)| Ok(StateReport { state: l, pass: apply(&lhs, &v, reach)? == apply(&rhs, &v, reach)? }))
        .collect()
}

/// `Σ_P N_{b_P} E_{b_P}[0]` agrees for every reordering of `b` on all states of
/// energy at most `cap`.
pub fn verify_negative_symmetry(b: &[i64], cap: u64) -> Result<bool> {
    let reference = negative_contact_operator(b);
    let reach = cap + b.iter().map(|x| x.unsigned_abs()).sum::<u64>();
    let basis = basis_up_to::<Rational>(cap);
    let images: Vec<_> = basis.iter().map(|(_, v)| apply(&reference, v, reach)).collect::<Result<_>>()?;
    for perm in permutations(b.len()).into_iter().skip(1) {
        let pb: Vec<i64> = perm.iter().map(|i| b[*i]).collect();
        let op = negative_contact_operator(&pb);
        for ((_, v), img) in basis.iter().zip(&images) {
            if apply(&op, v, reach)? != *img {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One side of a contact shape of degree `d`: a partition of `d + e` followed
/// by negative parts of total size `e ≤ 2` and magnitude at most `neg_max`,
/// at most four parts in all.
fn contact_sides(d: i64, neg_max: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    for extra in 0..=2i64 {
        for negs in partitions(extra, neg_max) {
            for pos in partitions(d + extra, d + extra) {
                let mut v = pos;
                v.extend(negs.iter().map(|b| -b));
                if v.len() <= 4 {
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Every tube shape `μ⁰ | μ^∞` of degree `1..=dmax` built from
/// [`contact_sides`], with at most five parts in total, and optionally the cap
/// shapes with empty `μ^∞`. No insertions are attached.
pub fn contact_shapes(dmax: i64, neg_max: i64, caps: bool) -> Vec<ContactData> {
    let mut out = Vec::new();
    for d in 1..=dmax {
        let sides = contact_sides(d, neg_max);
        for l in &sides {
            if caps {
                out.push(ContactData::stationary(l, &[], &[]));
            }
            for r in &sides {
                if l.len() + r.len() <= 5 {
                    out.push(ContactData::stationary(l, r, &[]));
                }
            }
        }
    }
    out
}

fn alpha_product(parts: &[i64], sign: i64) -> Vec<Op> {
    parts.iter().map(|a| Op::Alpha(sign * a)).collect()
}

fn prod_q(xs: &[i64]) -> Rational {
    xs.iter().fold(q(1), |acc, x| acc * q(*x))
}

/// Disconnected stationary cap invariant `⟨μ⁰ | ∏ τ_{k_i}(ω)⟩•`.
pub fn cap_invariant(cd: &ContactData) -> Result<Rational> {
    if !cd.mu_inf.is_empty() {
        return Err(Error::Domain("the cap has no contact data at infinity".into()));
    }
    let d = cd.degree()?;
    let ks = cd.stationary_ks()?;
    let pos = cd.positives0();
    let mut ops = alpha_product(&pos, 1);
    ops.push(negative_contact_operator(&cd.negatives0()));
    ops.extend(ks.iter().map(|k| Op::ECoeff(0, *k)));
    ops.extend((0..d).map(|_| Op::Alpha(-1)));
    let norm = prod_q(&pos) * Rational::from_integer(rational::factorial(d as u64));
    Ok(vev(&ops, None)? / norm)
}

/// The tube operator formula for arbitrary (possibly unbalanced) data. The
/// right-hand negative factor is the adjoint of the left-hand construction.
fn tube_bracket(pos0: &[i64], neg0: &[i64], ks: &[i64], neg_inf: &[i64], pos_inf: &[i64]) -> Result<Rational> {
    let mut ops = alpha_product(pos0, 1);
    if !neg0.is_empty() {
        ops.push(negative_contact_operator(neg0));
    }
    ops.extend(ks.iter().map(|k| Op::ECoeff(0, *k)));
    if !neg_inf.is_empty() {
        ops.push(negative_contact_operator(neg_inf).adjoint());
    }
    ops.extend(alpha_product(pos_inf, -1));
    Ok(vev(&ops, None)? / (prod_q(pos0) * prod_q(pos_inf)))
}

/// Disconnected stationary tube invariant `⟨μ⁰ | ∏ τ_{k_i}(ω) | μ^∞⟩•`.
pub fn tube_invariant(cd: &ContactData) -> Result<Rational> {
    if cd.mu_inf.is_empty() {
        return Err(Error::Domain("the tube needs contact data at infinity".into()));
    }
    cd.degree()?;
    let ks = cd.stationary_ks()?;
    tube_bracket(&cd.positives0(), &cd.negatives0(), &ks, &cd.negatives_inf(), &cd.positives_inf())
}

#[derive(Clone, Copy)]
enum Marking {
    Pos0(i64),
    Neg0(i64),
    Interior(i64),
    NegInf(i64),
    PosInf(i64),
}

fn markings(cd: &ContactData, ks: &[i64]) -> Vec<Marking> {
    let mut m: Vec<Marking> = cd.positives0().into_iter().map(Marking::Pos0).collect();
    m.extend(cd.negatives0().into_iter().map(Marking::Neg0));
    m.extend(ks.iter().map(|k| Marking::Interior(*k)));
    m.extend(cd.negatives_inf().into_iter().map(Marking::NegInf));
    m.extend(cd.positives_inf().into_iter().map(Marking::PosInf));
    m
}

/// Connected stationary tube invariant: the cumulant of the disconnected
/// formula over the set of markings. Each block of markings is evaluated as
/// the disconnected invariant of the sub-data it carries.
pub fn connected_tube_invariant(cd: &ContactData) -> Result<Rational> {
    if cd.mu_inf.is_empty() {
        return Err(Error::Domain("the tube needs contact data at infinity".into()));
    }
    cd.degree()?;
    let ks = cd.stationary_ks()?;
    let marks = markings(cd, &ks);
    connected_from(marks.len(), |block| {
        let (mut p0, mut n0, mut ins, mut ni, mut pi) = (vec![], vec![], vec![], vec![], vec![]);
        for i in block {
            match marks[*i] {
                Marking::Pos0(a) => p0.push(a),
                Marking::Neg0(b) => n0.push(b),
                Marking::Interior(k) => ins.push(k),
                Marking::NegInf(b) => ni.push(b),
                Marking::PosInf(a) => pi.push(a),
            }
        }
        tube_bracket(&p0, &n0, &ins, &ni, &pi)
    })
}

/// One side of the explicit one-point formula: the sum over set partitions
/// of the negative parts and injective assignments of blocks to positive
/// parts with `a_l + |b_J| > 0`.
fn one_side(pos: &[i64], neg: &[i64], order: i64) -> Result<Series> {
    let z = |c: i64| varsigma::<Rational>("z", &q(c), order);
    let mut acc = Series::constant(q(0));
    for p in set_partitions(neg.len()) {
        for img in injections(p.len(), pos.len()) {
            let mut term = Series::constant(q(1));
            let mut ok = true;
            for (blk, l) in p.iter().zip(&img) {
                let a = pos[*l];
                let s = a + blk.iter().map(|i| neg[*i]).sum::<i64>();
                if s <= 0 {
                    ok = false;
                    break;
                }
                let c = q(a) * rational::pow(&q(s), blk.len() as i64 - 1);
                term = term.try_mul(&z(s))?.scale(&c);
            }
            if !ok {
                continue;
            }
            for (t, a) in pos.iter().enumerate() {
                if !img.contains(&t) {
                    term = term.try_mul(&z(*a))?;
                }
            }
            acc = acc.try_add(&term)?;
        }
    }
    Ok(acc)
}

/// `F°(z) = Σ_k ⟨μ⁰ | τ_k(ω) | μ^∞⟩° z^{k+1}` from the explicit formula,
/// known through `z^order`. Insertions in `cd` are ignored; `z` marks the
/// single interior point.
pub fn one_point_tube_connected(cd: &ContactData, order: i64) -> Result<Series> {
    if cd.mu_inf.is_empty() {
        return Err(Error::Domain("the tube needs contact data at infinity".into()));
    }
    cd.degree()?;
    let (p0, pi) = (cd.positives0(), cd.positives_inf());
    // every term carries at least one varsigma per positive part, so one
    // extra order on the numerator covers the pole of 1/ς
    let left = one_side(&p0, &cd.negatives0(), order + 1)?;
    let right = one_side(&pi, &cd.negatives_inf(), order + 1)?;
    let num = left.try_mul(&right)?;
    let f = num.try_mul(&inv_varsigma("z", &q(1), order + 1)?)?;
    Ok(f.truncate(&[order]).scale(&(q(1) / (prod_q(&p0) * prod_q(&pi)))))
}

/// Genus-zero Hodge values: `1/a` and `ab/(a+b)` in the unstable range,
/// `∏a (Σa)^{n-3}` otherwise.
pub fn genus0_hodge(a: &[Rational]) -> Result<Rational> {
    let sum: Rational = a.iter().cloned().sum();
    match a.len() {
        0 => Err(Error::Domain("no markings".into())),
        1 => {
            if a[0].is_zero() {
                return Err(Error::Domain("1/a has a pole at a = 0".into()));
            }
            Ok(a[0].recip())
        }
        2 => {
            if sum.is_zero() {
                return Err(Error::Domain("ab/(a+b) has a pole at a + b = 0".into()));
            }
            Ok(&a[0] * &a[1] / sum)
        }
        n => {
            let p: Rational = a.iter().cloned().product();
            Ok(p * rational::pow(&sum, n as i64 - 3))
        }
    }
}

/// `C_P(r) = (l-1)! ∏_{i≥2} b_i / r^l` for one block of negative parts.
pub fn coeff_cp(b: &[i64], r: &Rational) -> Result<Rational> {
    if b.is_empty() || b.iter().any(|x| *x >= 0) {
        return Err(Error::Domain(format!("block {b:?} must be nonempty and negative")));
    }
    if r.is_zero() || r.is_negative() {
        return Err(Error::Domain("r must be positive".into()));
    }
    let p: Vec<usize> = (1..=b.len()).collect();
    Ok(n_weight(b, &[p]) / rational::pow(r, b.len() as i64))
}
