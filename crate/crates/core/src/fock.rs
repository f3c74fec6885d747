//! Charge-zero semi-infinite wedge space with the partition basis.
//!
//! `v_λ = (λ_1 - 1/2) ∧ (λ_2 - 3/2) ∧ ...`. Internally a half-integer
//! position `k` is stored as the integer `p = k - 1/2`, so the occupied
//! positions of `v_λ` are `p_i = λ_i - i`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};

use crate::exactseries::{frac, Coeff, Rational};
use crate::error::{Error, Result};

/// A weakly decreasing list of positive integers.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.contains(&0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Domain(format!("{parts:?} is not a partition")));
        }
        Ok(Partition(parts))
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn size(&self) -> u64 {
        self.0.iter().map(|p| *p as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Occupied positions `p_i = λ_i - i` for `i = 1..=window`.
    fn occupied(&self, window: usize) -> Vec<i64> {
        (0..window)
            .map(|i| self.0.get(i).copied().unwrap_or(0) as i64 - (i as i64 + 1))
            .collect()
    }

    fn from_occupied(ps: &[i64]) -> Partition {
        let mut parts: Vec<u32> = ps
            .iter()
            .enumerate()
            .map(|(i, p)| (p + i as i64 + 1) as u32)
            .collect();
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition(parts)
    }

    pub fn maya(&self) -> MayaView {
        let ps = self.occupied(self.len() + 1);
        let occupied_positive = ps.iter().filter(|p| **p >= 0).map(|p| HalfInt::from_p(*p)).collect();
        let vacant_negative = (-(self.len() as i64)..0)
            .filter(|p| !ps.contains(p))
            .map(HalfInt::from_p)
            .rev()
            .collect();
        MayaView {
            occupied_positive,
            vacant_negative,
        }
    }

    pub fn from_maya(m: &MayaView) -> Result<Self> {
        if m.occupied_positive.len() != m.vacant_negative.len() {
            return Err(Error::Domain("Maya diagram has nonzero charge".into()));
        }
        let mut pos: Vec<i64> = m.occupied_positive.iter().map(|h| h.p()).collect();
        let neg: Vec<i64> = m.vacant_negative.iter().map(|h| h.p()).collect();
        if pos.iter().any(|p| *p < 0) || neg.iter().any(|p| *p >= 0) {
            return Err(Error::Domain("Maya entries have the wrong sign".into()));
        }
        let low = neg.iter().copied().min().unwrap_or(0);
        pos.extend((low..0).filter(|p| !neg.contains(p)));
        pos.sort_unstable_by(|a, b| b.cmp(a));
        pos.dedup();
        Ok(Partition::from_occupied(&pos))
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;
    fn try_from(v: Vec<u32>) -> Result<Self> {
        Partition::new(v)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Vec<u32> {
        p.0
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|p| p.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// A half-integer, stored as twice its value (always odd).
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct HalfInt(i64);

impl HalfInt {
    pub fn from_twice(t: i64) -> Result<Self> {
        if t.rem_euclid(2) != 1 {
            return Err(Error::Domain(format!("{t}/2 is not a half-integer")));
        }
        Ok(HalfInt(t))
    }

    fn from_p(p: i64) -> Self {
        HalfInt(2 * p + 1)
    }

    pub fn twice(self) -> i64 {
        self.0
    }

    pub fn p(self) -> i64 {
        (self.0 - 1).div_euclid(2)
    }

    pub fn value(self) -> Rational {
        frac(self.0, 2)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2", self.0)
    }
}

/// Occupied positive and vacant negative positions of a charge-zero state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MayaView {
    pub occupied_positive: Vec<HalfInt>,
    pub vacant_negative: Vec<HalfInt>,
}

impl MayaView {
    pub fn charge(&self) -> i64 {
        self.occupied_positive.len() as i64 - self.vacant_negative.len() as i64
    }
}

pub fn energy(l: &Partition) -> u64 {
    l.size()
}

/// `:Ψ_a Ψ_b^*:` applied to `v_λ`; `None` when the result vanishes.
pub fn fermion_bilinear(a: HalfInt, b: HalfInt, l: &Partition) -> Option<(Partition, i32)> {
    let (pa, pb) = (a.p(), b.p());
    let window = l.len() + 2 + pa.unsigned_abs().max(pb.unsigned_abs()) as usize;
    let ps = l.occupied(window);
    if pa == pb {
        let occ = ps.contains(&pa);
        return match (pa >= 0, occ) {
            (true, true) => Some((l.clone(), 1)),
            (false, false) => Some((l.clone(), -1)),
            _ => None,
        };
    }
    move_particle(&ps, pa, pb)
}

fn move_particle(ps: &[i64], pa: i64, pb: i64) -> Option<(Partition, i32)> {
    let i = ps.iter().position(|p| *p == pb)?;
    // everything below the window is occupied
    if pa < -(ps.len() as i64) || ps.contains(&pa) {
        return None;
    }
    let mut rest: Vec<i64> = ps.to_vec();
    rest.remove(i);
    let above = rest.iter().filter(|p| **p > pa).count();
    rest.insert(above, pa);
    let sign = if (i + above) % 2 == 0 { 1 } else { -1 };
    Some((Partition::from_occupied(&rest), sign))
}

/// One nonzero term of `Σ_k w(k - j/2) E_{k-j,k} v_λ`: the removed position
/// `k`, the resulting partition and the sign.
#[derive(Clone, Debug)]
pub struct BilinearTerm {
    pub k: HalfInt,
    pub target: Partition,
    pub sign: i32,
}

impl BilinearTerm {
    /// The argument `k - j/2` fed to weight functions.
    pub fn shift(&self, j: i64) -> Rational {
        frac(self.k.twice() - j, 2)
    }
}

type TermCache = RwLock<HashMap<(Partition, i64), Arc<Vec<BilinearTerm>>>>;
static BILINEAR_CACHE: Lazy<TermCache> = Lazy::new(|| RwLock::new(HashMap::new()));

/// All nonzero terms of the bilinear sum defining `E_j` on `v_λ`.
pub fn bilinear_terms(l: &Partition, j: i64) -> Arc<Vec<BilinearTerm>> {
    let key = (l.clone(), j);
    if let Some(t) = BILINEAR_CACHE.read().expect("cache lock").get(&key) {
        return t.clone();
    }
    let window = l.len() + j.unsigned_abs() as usize + 2;
    let ps = l.occupied(window);
    let mut out = Vec::new();
    if j == 0 {
        for p in ps.iter().filter(|p| **p >= 0) {
            out.push(BilinearTerm { k: HalfInt::from_p(*p), target: l.clone(), sign: 1 });
        }
        for p in -(l.len() as i64)..0 {
            if !ps.contains(&p) {
                out.push(BilinearTerm { k: HalfInt::from_p(p), target: l.clone(), sign: -1 });
            }
        }
    } else {
        for pb in &ps {
            if let Some((target, sign)) = move_particle(&ps, pb - j, *pb) {
                out.push(BilinearTerm { k: HalfInt::from_p(*pb), target, sign });
            }
        }
    }
    let out = Arc::new(out);
    BILINEAR_CACHE.write().expect("cache lock").insert(key, out.clone());
    out
}

type PartitionTable = RwLock<Vec<Arc<Vec<Partition>>>>;
static PARTITIONS: Lazy<PartitionTable> = Lazy::new(|| RwLock::new(vec![Arc::new(vec![Partition::empty()])]));

/// All partitions of `n`, in reverse lexicographic order. Built once per `n`.
pub fn partitions_of(n: u64) -> Arc<Vec<Partition>> {
    let n = n as usize;
    if let Some(t) = PARTITIONS.read().expect("table lock").get(n) {
        return t.clone();
    }
    let mut table = PARTITIONS.write().expect("table lock");
    while table.len() <= n {
        let m = table.len() as u32;
        let mut out = Vec::new();
        fn rec(rem: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if rem == 0 {
                out.push(Partition(cur.clone()));
                return;
            }
            for p in (1..=rem.min(max)).rev() {
                cur.push(p);
                rec(rem - p, p, cur, out);
                cur.pop();
            }
        }
        rec(m, m, &mut Vec::new(), &mut out);
        table.push(Arc::new(out));
    }
    table[n].clone()
}

/// All partitions of size at most `n`.
pub fn partitions_up_to(n: u64) -> Vec<Partition> {
    (0..=n).flat_map(|k| partitions_of(k).as_ref().clone()).collect()
}

/// A finite combination of basis vectors with coefficients in `C`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector<C> {
    entries: BTreeMap<Partition, C>,
}

impl<C: Coeff> Default for FockVector<C> {
    fn default() -> Self {
        FockVector { entries: BTreeMap::new() }
    }
}

impl<C: Coeff> FockVector<C> {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn basis(l: Partition) -> Self {
        Self::basis_with(l, C::one())
    }

    pub fn basis_with(l: Partition, c: C) -> Self {
        let mut v = Self::default();
        v.add_term(l, c);
        v
    }

    pub fn vacuum() -> Self {
        Self::basis(Partition::empty())
    }

    pub fn entries(&self) -> &BTreeMap<Partition, C> {
        &self.entries
    }

    pub fn into_entries(self) -> BTreeMap<Partition, C> {
        self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, l: &Partition) -> C {
        self.entries.get(l).cloned().unwrap_or_else(C::zero)
    }

    pub fn add_term(&mut self, l: Partition, c: C) {
        if c.is_zero() {
            return;
        }
        match self.entries.get_mut(&l) {
            Some(v) => {
                let s = v.clone() + c;
                if s.is_zero() {
                    self.entries.remove(&l);
                } else {
                    *v = s;
                }
            }
            None => {
                self.entries.insert(l, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (l, c) in &other.entries {
            out.add_term(l.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale_c(&(-C::one())))
    }

    pub fn scale_c(&self, c: &C) -> Self {
        let mut out = Self::default();
        for (l, x) in &self.entries {
            out.add_term(l.clone(), x.clone() * c.clone());
        }
        out
    }

    pub fn scale(&self, x: &Rational) -> Self {
        let mut out = Self::default();
        for (l, c) in &self.entries {
            out.add_term(l.clone(), c.scale(x));
        }
        out
    }

    pub fn map(&self, f: impl Fn(&C) -> C) -> Self {
        let mut out = Self::default();
        for (l, c) in &self.entries {
            out.add_term(l.clone(), f(c));
        }
        out
    }

    pub fn max_energy(&self) -> Option<u64> {
        self.entries.keys().map(|l| l.size()).max()
    }

    /// Keep only components of energy at most `cap`.
    pub fn cap(&mut self, cap: u64) {
        self.entries.retain(|l, _| l.size() <= cap);
    }

    pub fn vacuum_coeff(&self) -> C {
        self.get(&Partition::empty())
    }
}

/// `Σ_λ v[λ] w[λ]` (the basis is orthonormal and coefficients are real).
pub fn inner<C: Coeff>(v: &FockVector<C>, w: &FockVector<C>) -> C {
    let mut acc = C::zero();
    for (l, c) in &v.entries {
        if let Some(d) = w.entries.get(l) {
            acc = acc + c.clone() * d.clone();
        }
    }
    acc
}

/// Charge of a basis state (always zero; exposed for the invariant checks).
pub fn charge(l: &Partition) -> i64 {
    l.maya().charge()
}
