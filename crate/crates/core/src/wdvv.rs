//! Genus-zero relative invariants of `(P¹, 0 ∪ ∞)` with one positive contact
//! at each side and negative contacts at `0`, computed from WDVV.
//!
//! Insertions are basis classes `[1]_0`, `[H]_0`, `[0]_i`, `[∞]_i` (`i ≠ 0`).
//! The evaluator applies the vanishing rules (contact orders must sum to the
//! degree on both sides, and the number of `H` insertions must equal the
//! dimension), then the divisor rule, and finally solves the WDVV equation
//! for the one unknown term.

use std::collections::HashMap;
use std::fmt;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactseries::{q, rational, Rational};
use crate::gwformulas::{coeff_cp, set_partition_terms};
use crate::wedgeops::{vev, WedgeOperator};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum Label {
    One,
    H,
    /// The point class of the divisor at 0.
    Bold0,
    /// The point class of the divisor at ∞.
    BoldInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisClass {
    pub sector: i64,
    pub label: Label,
}

impl BasisClass {
    pub fn new(sector: i64, label: Label) -> Result<Self> {
        let interior = matches!(label, Label::One | Label::H);
        if interior != (sector == 0) {
            return Err(Error::Domain(format!("{label:?} does not live in sector {sector}")));
        }
        Ok(BasisClass { sector, label })
    }

    pub fn one() -> Self {
        BasisClass { sector: 0, label: Label::One }
    }

    pub fn h() -> Self {
        BasisClass { sector: 0, label: Label::H }
    }

    pub fn zero(i: i64) -> Self {
        BasisClass { sector: i, label: Label::Bold0 }
    }

    pub fn inf(i: i64) -> Self {
        BasisClass { sector: i, label: Label::BoldInf }
    }

    /// The dual class under the pairing.
    pub fn dual(&self) -> Self {
        match self.label {
            Label::One => Self::h(),
            Label::H => Self::one(),
            Label::Bold0 => Self::zero(-self.sector),
            Label::BoldInf => Self::inf(-self.sector),
        }
    }

    /// The full basis with sectors in `-bound..=bound`.
    pub fn basis(bound: i64) -> Vec<Self> {
        let mut out = vec![Self::one(), Self::h()];
        for i in -bound..=bound {
            if i != 0 {
                out.push(Self::zero(i));
                out.push(Self::inf(i));
            }
        }
        out
    }
}

/// `([α]_i, [β]_j)`.
pub fn pairing(a: &BasisClass, b: &BasisClass) -> i64 {
    if a.sector + b.sector != 0 {
        return 0;
    }
    use Label::*;
    match (a.label, b.label) {
        (One, H) | (H, One) | (Bold0, Bold0) | (BoldInf, BoldInf) => 1,
        _ => 0,
    }
}

impl fmt::Display for BasisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.label {
            Label::One => write!(f, "[1]_0"),
            Label::H => write!(f, "[H]_0"),
            Label::Bold0 => write!(f, "[0]_{}", self.sector),
            Label::BoldInf => write!(f, "[inf]_{}", self.sector),
        }
    }
}

/// An invariant `I_d(insertions)` with insertions sorted; invariants are
/// symmetric in their markings.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Config {
    pub d: i64,
    pub insertions: Vec<BasisClass>,
}

impl Config {
    pub fn new(d: i64, mut insertions: Vec<BasisClass>) -> Self {
        insertions.sort();
        Config { d, insertions }
    }

    fn side(&self, l: Label) -> Vec<i64> {
        self.insertions.iter().filter(|c| c.label == l).map(|c| c.sector).collect()
    }

    /// Zero by the contact-order and dimension rules.
    pub fn vanishes(&self) -> bool {
        let (mu0, mui) = (self.side(Label::Bold0), self.side(Label::BoldInf));
        if self.d < 0 || mu0.iter().sum::<i64>() != self.d || mui.iter().sum::<i64>() != self.d {
            return true;
        }
        let interior = self.insertions.iter().filter(|c| c.sector == 0).count() as i64;
        let hs = self.insertions.iter().filter(|c| c.label == Label::H).count() as i64;
        let positive = mu0.iter().chain(&mui).filter(|x| **x > 0).count() as i64;
        hs != positive + interior - 2
    }

    /// The same invariant with `0` and `∞` exchanged.
    pub fn mirrored(&self) -> Self {
        let flip = |c: &BasisClass| match c.label {
            Label::Bold0 => BasisClass::inf(c.sector),
            Label::BoldInf => BasisClass::zero(c.sector),
            _ => *c,
        };
        Config::new(self.d, self.insertions.iter().map(flip).collect())
    }

    /// `Some((a, b, d))` when this is `([0]_a, [0]_{b..}, [∞]_d)` with
    /// `a > 0`, every `b < 0`, and no interior insertions.
    pub fn family(&self) -> Option<(i64, Vec<i64>, i64)> {
        let mu0 = self.side(Label::Bold0);
        let mui = self.side(Label::BoldInf);
        if mu0.len() + mui.len() != self.insertions.len() || mui != [self.d] || self.d <= 0 {
            return None;
        }
        let pos: Vec<i64> = mu0.iter().copied().filter(|x| *x > 0).collect();
        let neg: Vec<i64> = mu0.iter().copied().filter(|x| *x < 0).collect();
        if pos.len() != 1 {
            return None;
        }
        Some((pos[0], neg, self.d))
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.insertions.iter().map(|c| c.to_string()).collect();
        write!(f, "I_{}({})", self.d, s.join(", "))
    }
}

/// One WDVV instance: `Σ I(x1, x2, S1, T) I(T∨, x3, x4, S2)` against the
/// same sum with `x2` and `x3` exchanged.
#[derive(Clone, Debug)]
pub struct WdvvInstance {
    pub d: i64,
    pub first: [BasisClass; 4],
    pub rest: Vec<BasisClass>,
}

/// A product term of the expanded equation that survives the vanishing
/// rules.
#[derive(Clone, Debug)]
pub struct WdvvTerm {
    pub left: Config,
    pub right: Config,
}

impl WdvvInstance {
    fn sector_bound(&self) -> i64 {
        self.d + self.first.iter().chain(&self.rest).map(|c| c.sector.abs()).sum::<i64>()
    }

    fn side_terms(&self, x2: BasisClass, x3: BasisClass) -> Vec<WdvvTerm> {
        let [x1, _, _, x4] = self.first;
        let n = self.rest.len();
        let basis = BasisClass::basis(self.sector_bound());
        let mut out = Vec::new();
        for mask in 0..(1usize << n) {
            let s1: Vec<BasisClass> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| self.rest[i]).collect();
            let s2: Vec<BasisClass> = (0..n).filter(|i| mask >> i & 1 == 0).map(|i| self.rest[i]).collect();
            for d1 in 0..=self.d {
                for t in &basis {
                    let mut l = vec![x1, x2, *t];
                    l.extend(&s1);
                    let left = Config::new(d1, l);
                    if left.vanishes() {
                        continue;
                    }
                    let mut r = vec![t.dual(), x3, x4];
                    r.extend(&s2);
                    let right = Config::new(self.d - d1, r);
                    if right.vanishes() {
                        continue;
                    }
                    out.push(WdvvTerm { left, right });
                }
            }
        }
        out
    }

    /// Surviving terms of the two sides.
    pub fn terms(&self) -> (Vec<WdvvTerm>, Vec<WdvvTerm>) {
        let [_, x2, x3, _] = self.first;
        (self.side_terms(x2, x3), self.side_terms(x3, x2))
    }

    /// The instance that determines `I_d([0]_a, [0]_{b_1..b_n}, [∞]_d)`:
    /// insertions `[0]_a, [∞]_d, [H]_0, [∞]_{-b_n}, [0]_{b_1..b_{n-1}}` in
    /// degree `d - b_n`.
    pub fn for_family(a: i64, b: &[i64], d: i64) -> Result<Self> {
        let Some((last, init)) = b.split_last() else {
            return Err(Error::Domain("the recursion needs at least one negative part".into()));
        };
        Ok(WdvvInstance {
            d: d - last,
            first: [BasisClass::zero(a), BasisClass::inf(d), BasisClass::h(), BasisClass::inf(-last)],
            rest: init.iter().map(|x| BasisClass::zero(*x)).collect(),
        })
    }

    /// `LHS - RHS` with every invariant supplied by `eval`.
    pub fn residual(&self, eval: &mut dyn FnMut(&Config) -> Result<Rational>) -> Result<Rational> {
        let (l, r) = self.terms();
        let mut total = Rational::zero();
        for t in l {
            total += eval(&t.left)? * eval(&t.right)?;
        }
        for t in r {
            total -= eval(&t.left)? * eval(&t.right)?;
        }
        Ok(total)
    }
}

fn check_family(a: i64, b: &[i64], d: i64) -> Result<()> {
    if a <= 0 || d <= 0 || b.iter().any(|x| *x >= 0) || a + b.iter().sum::<i64>() != d {
        return Err(Error::Domain(format!("need a > 0, negative b and a + Σb = d > 0; got a={a}, b={b:?}, d={d}")));
    }
    Ok(())
}

/// Memoized evaluator. Degree-zero three-point invariants with a single
/// negative contact, all at one side, equal 1 (a known genus-zero
/// computation that WDVV cannot reach); everything else is derived.
#[derive(Default)]
pub struct Evaluator {
    memo: HashMap<Config, Rational>,
    closed_form: bool,
}

impl Evaluator {
    /// Evaluates the family through the WDVV recursion.
    pub fn recursive() -> Self {
        Evaluator::default()
    }

    /// Uses `d^{n-1}` for the family instead of the recursion.
    pub fn closed_form() -> Self {
        Evaluator { closed_form: true, ..Default::default() }
    }

    pub fn eval(&mut self, c: &Config) -> Result<Rational> {
        if c.vanishes() {
            return Ok(Rational::zero());
        }
        if let Some(v) = self.memo.get(c) {
            return Ok(v.clone());
        }
        let v = self.eval_new(c)?;
        self.memo.insert(c.clone(), v.clone());
        Ok(v)
    }

    fn eval_new(&mut self, c: &Config) -> Result<Rational> {
        // divisor rule
        if let Some(i) = c.insertions.iter().position(|x| x.label == Label::H) {
            let mut rest = c.insertions.clone();
            rest.remove(i);
            return Ok(q(c.d) * self.eval(&Config::new(c.d, rest))?);
        }
        if c.d == 0 && c.insertions.len() == 3 {
            for side in [Label::Bold0, Label::BoldInf] {
                let s = c.side(side);
                if s.len() == 3 && s.iter().filter(|x| **x < 0).count() == 1 {
                    return Ok(q(1));
                }
            }
        }
        if let Some((a, b, d)) = c.family() {
            if b.is_empty() {
                return Ok(Rational::new(1.into(), d.into()));
            }
            if self.closed_form {
                return Ok(rational::pow(&q(d), b.len() as i64 - 1));
            }
            return self.solve_family(c, a, &b, d);
        }
        let m = c.mirrored();
        if m.family().is_some() {
            return self.eval(&m);
        }
        Err(Error::Unsupported(format!("{c} is outside the family this evaluator covers")))
    }

    /// Solves the instance of [`WdvvInstance::for_family`] for the target.
    fn solve_family(&mut self, target: &Config, a: i64, b: &[i64], d: i64) -> Result<Rational> {
        let inst = WdvvInstance::for_family(a, b, d)?;
        let (l, r) = inst.terms();
        let mut coeff = Rational::zero();
        let mut known = Rational::zero();
        for (terms, sign) in [(l, q(1)), (r, q(-1))] {
            for t in terms {
                let (lt, rt) = (t.left == *target, t.right == *target);
                if lt && rt {
                    return Err(Error::Unsupported(format!("{target} appears quadratically")));
                }
                if lt || rt {
                    let other = if lt { &t.right } else { &t.left };
                    coeff += &sign * self.eval(other)?;
                } else {
                    known += &sign * self.eval(&t.left)? * self.eval(&t.right)?;
                }
            }
        }
        if coeff.is_zero() {
            return Err(Error::Unsupported(format!("WDVV does not determine {target}")));
        }
        Ok(-known / coeff)
    }
}

/// `I_d([0]_a, [0]_{b..}, [∞]_d)` and friends, computed through WDVV.
pub fn i_d(insertions: &[BasisClass], d: i64) -> Result<Rational> {
    Evaluator::recursive().eval(&Config::new(d, insertions.to_vec()))
}

/// Every `(a, b, d)` of the family with `d ≤ dmax`, at most `nmax` negative
/// parts, each at least `-neg_max`.
pub fn family_members(dmax: i64, nmax: usize, neg_max: i64) -> Vec<(i64, Vec<i64>, i64)> {
    let mut bs: Vec<Vec<i64>> = vec![vec![]];
    let mut all = bs.clone();
    for _ in 0..nmax {
        bs = bs.iter().flat_map(|v| (-neg_max..=-1).map(move |x| [v.clone(), vec![x]].concat())).collect();
        all.extend(bs.iter().cloned());
    }
    let mut out = Vec::new();
    for d in 1..=dmax {
        for b in &all {
            out.push((d - b.iter().sum::<i64>(), b.clone(), d));
        }
    }
    out
}

/// The family invariant from the recursion.
pub fn family_value(a: i64, b: &[i64], d: i64) -> Result<Rational> {
    check_family(a, b, d)?;
    let mut ins = vec![BasisClass::zero(a), BasisClass::inf(d)];
    ins.extend(b.iter().map(|x| BasisClass::zero(*x)));
    i_d(&ins, d)
}

/// `LHS - RHS` of the instance that determines the family value, with every
/// invariant taken from the closed form `d^{n-1}`.
pub fn wdvv_residual(a: i64, b: &[i64], d: i64) -> Result<Rational> {
    check_family(a, b, d)?;
    let mut ev = Evaluator::closed_form();
    WdvvInstance::for_family(a, b, d)?.residual(&mut |c| ev.eval(c))
}

#[derive(Clone, Debug, Serialize)]
pub struct WdvvReport {
    pub value: String,
    pub closed_form: String,
    pub residual_check: String,
}

/// Recursion value, closed form and residual for one family member.
pub fn report(a: i64, b: &[i64], d: i64) -> Result<WdvvReport> {
    let v = family_value(a, b, d)?;
    let closed = rational::pow(&q(d), b.len() as i64 - 1);
    let res = if b.is_empty() { Rational::zero() } else { wdvv_residual(a, b, d)? };
    Ok(WdvvReport {
        value: rational::to_string(&v),
        closed_form: rational::to_string(&closed),
        residual_check: rational::to_string(&res),
    })
}

/// The operator-formula side of the genus-zero invariant
/// `⟨(a, b_1..b_m) | ∅ | (d)⟩`: blocks of partitions with more than one part
/// use `N_{b_P}`, the single block uses `r^m C_P(r)`. Equal to
/// `(a + Σb)^{m-1}` exactly when `C_P` is right.
pub fn first_way(a: i64, b: &[i64], r: i64) -> Result<Rational> {
    check_family(a, b, a + b.iter().sum::<i64>())?;
    let d = a + b.iter().sum::<i64>();
    let left = WedgeOperator::scaled_q(Rational::new(1.into(), a.into()), WedgeOperator::Alpha(a));
    let right = WedgeOperator::scaled_q(Rational::new(1.into(), d.into()), WedgeOperator::Alpha(-d));
    let mut total = Rational::zero();
    for t in set_partition_terms(b) {
        let w = if t.blocks.len() > 1 {
            t.n
        } else {
            rational::pow(&q(r), b.len() as i64) * coeff_cp(b, &q(r))?
        };
        total += w * vev(&[left.clone(), t.operator, right.clone()], None)?;
    }
    Ok(total)
}

/// `(a + Σb)^{m-1}`, the value WDVV assigns to the same invariant.
pub fn second_way(a: i64, b: &[i64]) -> Result<Rational> {
    let d = a + b.iter().sum::<i64>();
    check_family(a, b, d)?;
    family_value(a, b, d)
}
