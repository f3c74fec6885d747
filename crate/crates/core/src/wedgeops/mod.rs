//! Operators on the charge-zero Fock space and their vacuum expectations.
//!
//! Operators are trees evaluated lazily against sparse vectors. Every
//! evaluation carries an energy bound for each intermediate state: a state
//! whose energy exceeds what the operators to its left can still remove can
//! never reach the vacuum, so dropping it is exact. A user-supplied cap is only
//! needed when some factor can lower energy without limit.

mod parse;
mod verify;

pub use parse::parse_operator;
pub use verify::{
    all_pass, verify_adjointness, verify_alpha_commutation, verify_alpha_ecoeff, verify_commutation, StateReport,
};

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exactseries::{exp_linear, inv_varsigma, rational, Coeff, Rational, SeriesRing};
use crate::fock::{bilinear_terms, FockVector, Partition};

/// Coefficient of `z^(k+1)` in `1/varsigma(z)`.
pub fn inv_varsigma_coeff(k: i64) -> Rational {
    thread_local! {
        static CACHE: std::cell::RefCell<Vec<Rational>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    let e = k + 1;
    if e < -1 {
        return Rational::zero();
    }
    let idx = (e + 1) as usize;
    CACHE.with(|c| {
        let mut c = c.borrow_mut();
        if c.len() <= idx {
            let n = (idx as i64 + 8).max(16);
            let s = inv_varsigma::<Rational>("z", &Rational::one(), n).expect("1/varsigma");
            *c = (-1..=n).map(|i| s.coeff1(i).expect("in range")).collect();
        }
        c[idx].clone()
    })
}

/// A linear combination of the ring variables, e.g. `z + w`.
pub type LinearForm = Vec<Rational>;

#[derive(Clone, Debug, PartialEq)]
pub enum WedgeOperator<C> {
    /// `α_j = E_j(0)`; `α_0` is the charge, which vanishes here.
    Alpha(i64),
    /// `E_j(L)` for a linear form `L` in the ring variables. With `delta`
    /// false the scalar `δ_{j,0}/ς(L)` is omitted.
    ESeries {
        j: i64,
        form: LinearForm,
        ring: Arc<SeriesRing>,
        delta: bool,
    },
    /// `E_j[k]`, the `z^(k+1)` coefficient of `E_j(z)`.
    ECoeff(i64, i64),
    /// `Σ_k w(k - j/2) E_{k-j,k} + constant`, with `w` a polynomial given by
    /// its coefficients. Coefficient extraction from series of operators
    /// lands here.
    EWeighted { j: i64, weight: Vec<C>, constant: C },
    Energy,
    Project(u64),
    /// `exp(c α_m)`, expanded by energy.
    ExpAlpha(C, i64),
    Scaled(C, Box<WedgeOperator<C>>),
    Product(Vec<WedgeOperator<C>>),
    Sum(Vec<WedgeOperator<C>>),
}

use WedgeOperator as Op;

impl<C: Coeff> WedgeOperator<C> {
    pub fn identity() -> Self {
        Op::Product(Vec::new())
    }

    pub fn zero() -> Self {
        Op::Sum(Vec::new())
    }

    /// `E_j(var)` in the given ring.
    pub fn e_series(j: i64, var: &str, ring: &Arc<SeriesRing>) -> Result<Self> {
        let i = ring.index(var)?;
        let mut form = vec![Rational::zero(); ring.len()];
        form[i] = Rational::one();
        Ok(Op::ESeries { j, form, ring: ring.clone(), delta: true })
    }

    pub fn scaled(c: C, op: Self) -> Self {
        Op::Scaled(c, Box::new(op))
    }

    pub fn scaled_q(x: Rational, op: Self) -> Self {
        Op::Scaled(C::from_rational(&x), Box::new(op))
    }

    pub fn product(ops: Vec<Self>) -> Self {
        Op::Product(ops)
    }

    pub fn commutator(a: Self, b: Self) -> Self {
        Op::Sum(vec![
            Op::Product(vec![a.clone(), b.clone()]),
            Op::scaled_q(rational::q(-1), Op::Product(vec![b, a])),
        ])
    }

    /// `E_j[k]` as a weighted bilinear: weight `x^(k+1)/(k+1)!` plus the
    /// pole-term coefficient for `j = 0`.
    pub fn ecoeff_weighted(j: i64, k: i64) -> Self {
        let e = (k + 1).max(0) as usize;
        let mut weight = vec![C::zero(); e + 1];
        if k >= -1 {
            weight[e] = C::from_rational(&Rational::new(1.into(), rational::factorial(e as u64)));
        }
        let constant = if j == 0 { C::from_rational(&inv_varsigma_coeff(k)) } else { C::zero() };
        Op::EWeighted { j, weight, constant }
    }

    /// Energy change `-j` when the operator is homogeneous.
    pub fn energy_delta(&self) -> Option<i64> {
        match self {
            Op::Alpha(j) | Op::ECoeff(j, _) => Some(-j),
            Op::ESeries { j, .. } | Op::EWeighted { j, .. } => Some(-j),
            Op::Energy | Op::Project(_) => Some(0),
            Op::ExpAlpha(_, m) => (*m == 0).then_some(0),
            Op::Scaled(_, o) => o.energy_delta(),
            Op::Product(v) => v.iter().map(|o| o.energy_delta()).sum(),
            Op::Sum(v) => {
                let ds: Vec<Option<i64>> = v.iter().map(|o| o.energy_delta()).collect();
                match ds.first() {
                    None => Some(0),
                    Some(d) => ds.iter().all(|x| x == d).then_some(*d).flatten(),
                }
            }
        }
    }

    /// The largest energy the operator can remove from a state, `None` when
    /// unbounded.
    pub fn max_lowering(&self) -> Option<u64> {
        match self {
            Op::Alpha(j) | Op::ECoeff(j, _) => Some((*j).max(0) as u64),
            Op::ESeries { j, .. } | Op::EWeighted { j, .. } => Some((*j).max(0) as u64),
            Op::Energy | Op::Project(_) => Some(0),
            Op::ExpAlpha(_, m) => (*m <= 0).then_some(0),
            Op::Scaled(_, o) => o.max_lowering(),
            Op::Product(v) => v.iter().map(|o| o.max_lowering()).sum(),
            Op::Sum(v) => v.iter().map(|o| o.max_lowering()).try_fold(0, |a, b| b.map(|b| a.max(b))),
        }
    }

    /// The largest energy the operator can add to a state, `None` when
    /// unbounded.
    pub fn max_raising(&self) -> Option<u64> {
        match self {
            Op::Alpha(j) | Op::ECoeff(j, _) => Some((-*j).max(0) as u64),
            Op::ESeries { j, .. } | Op::EWeighted { j, .. } => Some((-*j).max(0) as u64),
            Op::Energy | Op::Project(_) => Some(0),
            Op::ExpAlpha(_, m) => (*m >= 0).then_some(0),
            Op::Scaled(_, o) => o.max_raising(),
            Op::Product(v) => v.iter().map(|o| o.max_raising()).sum(),
            Op::Sum(v) => v.iter().map(|o| o.max_raising()).try_fold(0, |a, b| b.map(|b| a.max(b))),
        }
    }

    /// Adjoint, optionally combined with the substitution `t -> -t`.
    pub fn adjoint_with(&self, negate_t: bool) -> Self {
        let nt = |c: &C| if negate_t { c.negate_t() } else { c.clone() };
        match self {
            Op::Alpha(j) => Op::Alpha(-j),
            Op::ESeries { j, form, ring, delta } => Op::ESeries {
                j: -j,
                form: form.clone(),
                ring: ring.clone(),
                delta: *delta,
            },
            Op::ECoeff(j, k) => Op::ECoeff(-j, *k),
            Op::EWeighted { j, weight, constant } => Op::EWeighted {
                j: -j,
                weight: weight.iter().map(nt).collect(),
                constant: nt(constant),
            },
            Op::Energy => Op::Energy,
            Op::Project(l) => Op::Project(*l),
            Op::ExpAlpha(c, m) => Op::ExpAlpha(nt(c), -m),
            Op::Scaled(c, o) => Op::Scaled(nt(c), Box::new(o.adjoint_with(negate_t))),
            Op::Product(v) => Op::Product(v.iter().rev().map(|o| o.adjoint_with(negate_t)).collect()),
            Op::Sum(v) => Op::Sum(v.iter().map(|o| o.adjoint_with(negate_t)).collect()),
        }
    }

    pub fn adjoint(&self) -> Self {
        self.adjoint_with(false)
    }

    /// Largest input energy that can reach output energy `out`; `None`
    /// means unbounded. A projection bounds its input whatever lies left of it.
    fn input_bound(&self, out: Option<u64>) -> Option<u64> {
        match self {
            Op::Project(l) => Some(*l),
            Op::Product(v) => v.iter().fold(out, |cur, o| o.input_bound(cur)),
            Op::Sum(v) => v.iter().map(|o| o.input_bound(out)).try_fold(0, |a, b| b.map(|b| a.max(b))),
            Op::Scaled(_, o) => o.input_bound(out),
            _ => out.and_then(|o| self.max_lowering().map(|l| o + l)),
        }
    }
}

impl<C: Coeff> fmt::Display for WedgeOperator<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Op::Alpha(j) => write!(f, "(alpha {j})"),
            Op::ESeries { j, form, ring, delta } => {
                let terms: Vec<String> = form
                    .iter()
                    .zip(ring.vars().iter())
                    .filter(|(c, _)| !c.is_zero())
                    .map(|(c, v)| if c.is_one() { v.clone() } else { format!("{}*{v}", rational::to_string(c)) })
                    .collect();
                let d = if *delta { "E" } else { "E~" };
                write!(f, "({d} {j} {})", terms.join("+"))
            }
            Op::ECoeff(j, k) => write!(f, "(Ek {j} {k})"),
            Op::EWeighted { j, .. } => write!(f, "(Ew {j} ..)"),
            Op::Energy => write!(f, "(H)"),
            Op::Project(l) => write!(f, "(P {l})"),
            Op::ExpAlpha(c, m) => write!(f, "(exp {} {m})", c.render()),
            Op::Scaled(c, o) => write!(f, "(scale {} {o})", c.render()),
            Op::Product(v) => {
                write!(f, "(*")?;
                for o in v {
                    write!(f, " {o}")?;
                }
                write!(f, ")")
            }
            Op::Sum(v) => {
                write!(f, "(+")?;
                for o in v {
                    write!(f, " {o}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Evaluation state: the optional global cap and whether it cut anything.
struct Eval {
    cap: Option<u64>,
    binding: Cell<bool>,
}

impl Eval {
    /// Output bound for one factor: the bound imposed by the factors to its
    /// left, else what the factor can reach from the current state.
    fn bound(&self, computed: Option<u64>, reach: Option<u64>) -> Result<u64> {
        let computed = computed.or(reach);
        match (computed, self.cap) {
            (Some(b), Some(c)) => {
                if b > c {
                    self.binding.set(true);
                }
                Ok(b.min(c))
            }
            (Some(b), None) => Ok(b),
            (None, Some(c)) => {
                self.binding.set(true);
                Ok(c)
            }
            (None, None) => Err(Error::Config(
                "an operator lowers energy without bound; an energy cap is required".into(),
            )),
        }
    }

    fn run<C: Coeff>(&self, op: &Op<C>, v: &FockVector<C>, out: u64) -> Result<FockVector<C>> {
        if v.is_empty() {
            return Ok(FockVector::zero());
        }
        match op {
            Op::Alpha(0) => Ok(FockVector::zero()),
            Op::Alpha(j) => Ok(apply_bilinear(v, *j, out, |_| Ok(C::one()), None)?),
            Op::ECoeff(j, k) => self.run(&Op::ecoeff_weighted(*j, *k), v, out),
            Op::EWeighted { j, weight, constant } => {
                let w = |x: &Rational| Ok(eval_poly(weight, x));
                let c = (!constant.is_zero()).then_some(constant);
                apply_bilinear(v, *j, out, w, c)
            }
            Op::ESeries { j, form, ring, delta } => apply_series(v, *j, form, ring, *delta, out),
            Op::Energy => {
                let mut r = FockVector::zero();
                for (l, c) in v.entries() {
                    if l.size() <= out {
                        r.add_term(l.clone(), c.clone() * C::from_i64(l.size() as i64));
                    }
                }
                Ok(r)
            }
            Op::Project(l) => {
                let mut r = FockVector::zero();
                if *l <= out {
                    for (p, c) in v.entries() {
                        if p.size() == *l {
                            r.add_term(p.clone(), c.clone());
                        }
                    }
                }
                Ok(r)
            }
            Op::ExpAlpha(c, m) => {
                let mut acc = v.clone();
                acc.cap(out);
                if *m == 0 {
                    return Ok(acc);
                }
                let limit = if *m > 0 { out + v.max_energy().unwrap_or(0) } else { out };
                let mut cur = v.clone();
                let mut n = 1i64;
                loop {
                    cur = apply_bilinear(&cur, *m, limit, |_| Ok(C::one()), None)?;
                    if cur.is_empty() {
                        break;
                    }
                    cur = cur.scale_c(c).scale(&rational::frac(1, n));
                    let mut keep = cur.clone();
                    keep.cap(out);
                    acc = acc.add(&keep);
                    n += 1;
                }
                Ok(acc)
            }
            Op::Scaled(c, o) => Ok(self.run(o, v, out)?.scale_c(c)),
            Op::Sum(ops) => {
                let mut acc = FockVector::zero();
                for o in ops {
                    acc = acc.add(&self.run(o, v, out)?);
                }
                Ok(acc)
            }
            Op::Product(ops) => {
                // bounds[i] = allowed energy of the output of ops[i]
                let mut bounds = Vec::with_capacity(ops.len());
                let mut cur = Some(out);
                for o in ops {
                    bounds.push(cur);
                    cur = o.input_bound(cur);
                }
                let mut state = v.clone();
                for (o, b) in ops.iter().zip(bounds).rev() {
                    let reach = o.max_raising().map(|r| state.max_energy().unwrap_or(0) + r);
                    let b = self.bound(b, reach)?;
                    state = self.run(o, &state, b)?;
                    if state.is_empty() {
                        break;
                    }
                }
                state.cap(out);
                Ok(state)
            }
        }
    }
}

fn eval_poly<C: Coeff>(coeffs: &[C], x: &Rational) -> C {
    let mut acc = C::zero();
    for c in coeffs.iter().rev() {
        acc = acc.scale(x) + c.clone();
    }
    acc
}

fn apply_bilinear<C: Coeff>(
    v: &FockVector<C>,
    j: i64,
    out: u64,
    weight: impl Fn(&Rational) -> Result<C>,
    constant: Option<&C>,
) -> Result<FockVector<C>> {
    let mut r = FockVector::zero();
    let mut cache: HashMap<Rational, C> = HashMap::new();
    for (l, c) in v.entries() {
        let e = l.size() as i64 - j;
        if e < 0 || e as u64 > out {
            continue;
        }
        for t in bilinear_terms(l, j).iter() {
            let x = t.shift(j);
            let w = match cache.get(&x) {
                Some(w) => w.clone(),
                None => {
                    let w = weight(&x)?;
                    cache.insert(x, w.clone());
                    w
                }
            };
            if w.is_zero() {
                continue;
            }
            let term = if t.sign > 0 { c.clone() * w } else { -(c.clone() * w) };
            r.add_term(t.target.clone(), term);
        }
        if let Some(k) = constant {
            r.add_term(l.clone(), c.clone() * k.clone());
        }
    }
    Ok(r)
}

fn apply_series<C: Coeff>(
    v: &FockVector<C>,
    j: i64,
    form: &[Rational],
    ring: &SeriesRing,
    delta: bool,
    out: u64,
) -> Result<FockVector<C>> {
    let prec = ring.working_prec();
    let vars = ring.vars().clone();
    let weight = |x: &Rational| C::from_q_series(&exp_linear::<Rational>(&vars, &prec, x, form));
    let constant = if delta && j == 0 {
        let nz: Vec<usize> = (0..form.len()).filter(|i| !form[*i].is_zero()).collect();
        if nz.len() != 1 {
            return Err(Error::Domain(
                "the pole term of E_0 needs a single scaled variable as argument".into(),
            ));
        }
        let i = nz[0];
        let s = inv_varsigma::<Rational>(&vars[i], &form[i], prec[i])?.embed(&vars)?;
        Some(C::from_q_series(&s)?)
    } else {
        None
    };
    apply_bilinear(v, j, out, weight, constant.as_ref())
}

/// `op v` with every component of energy above `energy_cap` dropped.
pub fn apply<C: Coeff>(op: &WedgeOperator<C>, v: &FockVector<C>, energy_cap: u64) -> Result<FockVector<C>> {
    let ev = Eval { cap: Some(energy_cap), binding: Cell::new(false) };
    let mut r = ev.run(op, v, energy_cap)?;
    r.cap(energy_cap);
    Ok(r)
}

fn vev_once<C: Coeff>(ops: &[WedgeOperator<C>], cap: Option<u64>) -> Result<(C, bool)> {
    let ev = Eval { cap, binding: Cell::new(false) };
    let prod = Op::Product(ops.to_vec());
    let r = ev.run(&prod, &FockVector::vacuum(), 0)?;
    Ok((r.vacuum_coeff(), ev.binding.get()))
}

/// `⟨O_1 ... O_n⟩`. Intermediate energies are bounded automatically where
/// possible; `energy_cap` is required only for factors that lower energy
/// without limit. When the cap actually truncates something the evaluation is
/// repeated at `cap + 2` and a change is reported as [`Error::CapTooSmall`].
pub fn vev<C: Coeff>(ops: &[WedgeOperator<C>], energy_cap: Option<u64>) -> Result<C> {
    let total: Option<i64> = ops.iter().map(|o| o.energy_delta()).sum();
    if let Some(d) = total {
        if d != 0 {
            return Ok(C::zero());
        }
    }
    let (val, binding) = vev_once(ops, energy_cap)?;
    if binding {
        let cap = energy_cap.expect("binding implies a cap");
        let (again, _) = vev_once(ops, Some(cap + 2))?;
        if again != val {
            return Err(Error::CapTooSmall { cap });
        }
    }
    Ok(val)
}

/// Connected expectation: the cumulant of the ordered expectation over set
/// partitions of the factor list, blocks keeping the original order.
pub fn connected_vev<C: Coeff>(ops: &[WedgeOperator<C>], energy_cap: Option<u64>) -> Result<C> {
    connected_from(ops.len(), |block| {
        let sub: Vec<Op<C>> = block.iter().map(|i| ops[*i].clone()).collect();
        vev(&sub, energy_cap)
    })
}

/// The cumulant transform for an arbitrary block evaluator.
///
/// Uses `full(S) = Σ_{B ∋ min S} conn(B) full(S \ B)`, which is the
/// Möbius inversion over set partitions organised by the block of the
/// smallest element. Blocks are passed to `eval` in increasing order.
pub fn connected_from<C: Coeff>(n: usize, mut eval: impl FnMut(&[usize]) -> Result<C>) -> Result<C> {
    if n == 0 {
        return Ok(C::zero());
    }
    assert!(n < 26, "cumulant over {n} factors is out of reach");
    let members = |mask: usize| (0..n).filter(|i| mask >> i & 1 == 1).collect::<Vec<_>>();
    let size = 1usize << n;
    let mut full: Vec<Option<C>> = vec![None; size];
    full[0] = Some(C::one());
    let mut conn: Vec<Option<C>> = vec![None; size];
    let all = size - 1;
    // subsets in increasing order of mask are processed after their subsets
    for mask in 1..size {
        let low = mask & mask.wrapping_neg();
        let f = eval(&members(mask))?;
        let mut c = f.clone();
        full[mask] = Some(f);
        let rest = mask ^ low;
        // proper sub-blocks B = low | sub with sub a proper subset of rest
        let mut sub = rest;
        loop {
            sub = sub.wrapping_sub(1) & rest;
            if sub == rest {
                break;
            }
            let b = low | sub;
            let cb = conn[b].as_ref().expect("smaller mask");
            let fr = full[mask ^ b].as_ref().expect("smaller mask");
            if !cb.is_zero() && !fr.is_zero() {
                c = c - cb.clone() * fr.clone();
            }
            if sub == 0 {
                break;
            }
        }
        conn[mask] = Some(c);
    }
    Ok(conn[all].take().expect("computed"))
}

/// The basis states of energy at most `n`, as unit vectors.
pub fn basis_up_to<C: Coeff>(n: u64) -> Vec<(Partition, FockVector<C>)> {
    crate::fock::partitions_up_to(n)
        .into_iter()
        .map(|l| (l.clone(), FockVector::basis(l)))
        .collect()
}
