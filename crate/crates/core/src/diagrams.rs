//! Interaction diagrams and the bracket bookkeeping behind the large-`r`
//! analysis of products of `A`-operators.
//!
//! Operators carry an energy `k r + b`; `k` is the r-energy. `F_n` moves the
//! first factor of positive r-energy to the left by commutators until every
//! factor has r-energy zero. Each summand it produces is recorded by a forest
//! on `{1..n}` (an interaction diagram), and can be read back from the forest
//! alone by [`readout`].

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::combinat::set_partitions;
use crate::error::{Error, Result};
use crate::exactseries::{rational, Coeff, Rational};
use crate::johnson::{build_a_over_r, JohnsonMode};
use crate::wedgeops::{apply, basis_up_to, vev, WedgeOperator};

type Op = WedgeOperator<Rational>;

/// The minimal structure the bracket recursions need.
pub trait BracketAlgebra: Clone {
    fn bracket(&self, other: &Self) -> Self;
    fn product(factors: Vec<Self>) -> Self;
    fn sum(terms: Vec<Self>) -> Self;
}

impl<C: Coeff> BracketAlgebra for WedgeOperator<C> {
    fn bracket(&self, other: &Self) -> Self {
        WedgeOperator::commutator(self.clone(), other.clone())
    }
    fn product(factors: Vec<Self>) -> Self {
        if factors.len() == 1 {
            return factors.into_iter().next().expect("one factor");
        }
        WedgeOperator::Product(factors)
    }
    fn sum(terms: Vec<Self>) -> Self {
        WedgeOperator::Sum(terms)
    }
}

/// Elements of the free associative algebra over ℤ on letters `0..n`, as
/// word → coefficient maps. Identities that hold here hold for any operators.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct FreeElement(BTreeMap<Vec<u8>, i64>);

impl FreeElement {
    pub fn letter(i: u8) -> Self {
        FreeElement(BTreeMap::from([(vec![i], 1)]))
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u8>, i64> {
        &self.0
    }

    fn add_scaled(&mut self, other: &FreeElement, c: i64) {
        for (w, x) in &other.0 {
            let e = self.0.entry(w.clone()).or_insert(0);
            *e += c * x;
            if *e == 0 {
                self.0.remove(w);
            }
        }
    }

    fn mul(&self, other: &FreeElement) -> FreeElement {
        let mut out = FreeElement::default();
        for (u, x) in &self.0 {
            for (v, y) in &other.0 {
                let mut w = u.clone();
                w.extend(v);
                out.add_scaled(&FreeElement(BTreeMap::from([(w, 1)])), x * y);
            }
        }
        out
    }
}

impl BracketAlgebra for FreeElement {
    fn bracket(&self, other: &Self) -> Self {
        let mut out = self.mul(other);
        out.add_scaled(&other.mul(self), -1);
        out
    }
    fn product(factors: Vec<Self>) -> Self {
        factors.iter().fold(FreeElement(BTreeMap::from([(vec![], 1)])), |acc, f| acc.mul(f))
    }
    fn sum(terms: Vec<Self>) -> Self {
        let mut out = FreeElement::default();
        for t in &terms {
            out.add_scaled(t, 1);
        }
        out
    }
}

/// Bracket expressions as text, e.g. `[O1,[O2,O3]]·O4`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr(pub String);

impl BracketAlgebra for Expr {
    fn bracket(&self, other: &Self) -> Self {
        Expr(format!("[{},{}]", self.0, other.0))
    }
    fn product(factors: Vec<Self>) -> Self {
        Expr(factors.into_iter().map(|e| e.0).collect::<Vec<_>>().join("·"))
    }
    fn sum(terms: Vec<Self>) -> Self {
        Expr(terms.into_iter().map(|e| e.0).collect::<Vec<_>>().join(" + "))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An operator with energy `k r + b`.
#[derive(Clone, Debug)]
pub struct GradedOp<A> {
    pub op: A,
    pub r_energy: i64,
    pub residual: i64,
}

impl<A: BracketAlgebra> GradedOp<A> {
    pub fn new(op: A, r_energy: i64, residual: i64) -> Self {
        GradedOp { op, r_energy, residual }
    }

    pub fn bracket(&self, other: &Self) -> Self {
        GradedOp {
            op: self.op.bracket(&other.op),
            r_energy: self.r_energy + other.r_energy,
            residual: self.residual + other.residual,
        }
    }
}

/// A directed forest on a finite set of positive integers. Serialized as
/// `{"vertices": [..], "edges": [[j, i], ..]}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct InteractionDiagram {
    pub vertices: Vec<usize>,
    pub edges: Vec<(usize, usize)>,
}

impl InteractionDiagram {
    pub fn edgeless(n: usize) -> Self {
        InteractionDiagram { vertices: (1..=n).collect(), edges: Vec::new() }
    }

    /// Sorts vertices and edges and checks that every edge `(j, i)` joins
    /// two vertices with `j > i` and that no vertex has two outgoing edges.
    pub fn new(mut vertices: Vec<usize>, mut edges: Vec<(usize, usize)>) -> Result<Self> {
        vertices.sort_unstable();
        edges.sort_unstable();
        let d = InteractionDiagram { vertices, edges };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Domain(format!("not an interaction diagram: {m}")));
        if self.vertices.windows(2).any(|w| w[0] >= w[1]) {
            return bad("vertices must be distinct and sorted".into());
        }
        if self.vertices.first() == Some(&0) {
            return bad("vertices must be positive".into());
        }
        let mut out_deg: HashMap<usize, usize> = HashMap::new();
        for &(j, i) in &self.edges {
            if self.vertices.binary_search(&j).is_err() || self.vertices.binary_search(&i).is_err() {
                return bad(format!("edge ({j},{i}) leaves the vertex set"));
            }
            if j <= i {
                return bad(format!("edge ({j},{i}) must point to a smaller vertex"));
            }
            let c = out_deg.entry(j).or_insert(0);
            *c += 1;
            if *c > 1 {
                return bad(format!("vertex {j} has two outgoing edges"));
            }
        }
        Ok(())
    }

    /// Connected components, ordered by their smallest vertex.
    pub fn components(&self) -> Vec<InteractionDiagram> {
        let mut root: HashMap<usize, usize> = self.vertices.iter().map(|v| (*v, *v)).collect();
        fn find(root: &mut HashMap<usize, usize>, v: usize) -> usize {
            let p = root[&v];
            if p == v {
                return v;
            }
            let r = find(root, p);
            root.insert(v, r);
            r
        }
        for &(j, i) in &self.edges {
            let (a, b) = (find(&mut root, j), find(&mut root, i));
            root.insert(a.max(b), a.min(b));
        }
        let mut groups: BTreeMap<usize, InteractionDiagram> = BTreeMap::new();
        for &v in &self.vertices {
            let r = find(&mut root, v);
            groups.entry(r).or_insert_with(|| InteractionDiagram { vertices: vec![], edges: vec![] }).vertices.push(v);
        }
        for &(j, i) in &self.edges {
            let r = find(&mut root, j);
            groups.get_mut(&r).expect("component").edges.push((j, i));
        }
        groups.into_values().collect()
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    /// The vertex sets of the components: the combinatorial type.
    pub fn combinatorial_type(&self) -> Vec<Vec<usize>> {
        self.components().into_iter().map(|c| c.vertices).collect()
    }

    /// The contractions `(a, b)` performed by the readout, in order: each
    /// time the smallest vertex with one outgoing and no incoming edge.
    pub fn contraction_steps(&self) -> Result<Vec<(usize, usize)>> {
        self.validate()?;
        let mut edges = self.edges.clone();
        let mut steps = Vec::new();
        while !edges.is_empty() {
            let leaf = edges
                .iter()
                .filter(|(a, _)| !edges.iter().any(|(_, i)| i == a))
                .min()
                .copied()
                .ok_or_else(|| Error::Integrity("a forest always has a leaf".into()))?;
            edges.retain(|e| *e != leaf);
            steps.push(leaf);
        }
        Ok(steps)
    }
}

impl fmt::Display for InteractionDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e: Vec<String> = self.edges.iter().map(|(j, i)| format!("{j}->{i}")).collect();
        write!(f, "{{{}}}", e.join(", "))
    }
}

/// `L(J)`: the nested brackets recorded by `J`, with vertex `v` carrying
/// `ops[v - 1]`.
pub fn readout<A: BracketAlgebra>(j: &InteractionDiagram, ops: &[A]) -> Result<A> {
    if j.vertices.last().is_some_and(|v| *v > ops.len()) {
        return Err(Error::Domain(format!("diagram uses vertex {} but only {} operators", j.vertices.last().unwrap(), ops.len())));
    }
    let mut slot: BTreeMap<usize, A> = j.vertices.iter().map(|v| (*v, ops[v - 1].clone())).collect();
    for (a, b) in j.contraction_steps()? {
        let oa = slot.remove(&a).expect("live vertex");
        let ob = slot.get_mut(&b).expect("live vertex");
        *ob = ob.bracket(&oa);
    }
    Ok(A::product(slot.into_values().collect()))
}

/// [`readout`] on wedge operators.
pub fn l_of_j<C: Coeff>(j: &InteractionDiagram, ops: &[WedgeOperator<C>]) -> Result<WedgeOperator<C>> {
    readout(j, ops)
}

/// `L(J)` as a bracket expression in `O1..On`.
pub fn bracket_expression(j: &InteractionDiagram, n: usize) -> Result<String> {
    let names: Vec<Expr> = (1..=n).map(|i| Expr(format!("O{i}"))).collect();
    Ok(readout(j, &names)?.0)
}

/// `F_n` by its defining recursion.
pub fn f_n<A: BracketAlgebra>(ops: &[GradedOp<A>]) -> Result<A> {
    if ops.iter().map(|o| o.r_energy).sum::<i64>() != 0 {
        return Err(Error::Domain("F_n needs total r-energy zero".into()));
    }
    Ok(f_rec(ops.to_vec()))
}

fn f_rec<A: BracketAlgebra>(ops: Vec<GradedOp<A>>) -> A {
    let Some(i0) = ops.iter().position(|o| o.r_energy > 0) else {
        return A::product(ops.into_iter().map(|o| o.op).collect());
    };
    let terms = (0..i0)
        .map(|j| {
            let mut next = ops.clone();
            let moved = next.remove(i0);
            next[j] = next[j].bracket(&moved);
            f_rec(next)
        })
        .collect();
    A::sum(terms)
}

/// The diagrams the `F_n` recursion creates, recorded while it runs on the
/// labels alone.
pub fn k_by_recursion(r_energies: &[i64]) -> Vec<InteractionDiagram> {
    fn rec(live: Vec<(usize, i64)>, edges: Vec<(usize, usize)>, n: usize, out: &mut Vec<InteractionDiagram>) {
        let Some(i0) = live.iter().position(|(_, k)| *k > 0) else {
            let mut e = edges;
            e.sort_unstable();
            out.push(InteractionDiagram { vertices: (1..=n).collect(), edges: e });
            return;
        };
        for j in 0..i0 {
            let mut next = live.clone();
            let (v, k) = next.remove(i0);
            next[j].1 += k;
            let mut e = edges.clone();
            e.push((v, next[j].0));
            rec(next, e, n, out);
        }
    }
    if r_energies.iter().sum::<i64>() != 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    rec(r_energies.iter().copied().enumerate().map(|(i, k)| (i + 1, k)).collect(), vec![], r_energies.len(), &mut out);
    out.sort();
    out
}

/// Replays the readout of `J` on r-energy labels (`labels[v - 1]` for vertex
/// `v`). Every step must move the first factor of positive r-energy, and all
/// labels must end at zero.
pub fn is_valid(j: &InteractionDiagram, labels: &[i64]) -> Result<bool> {
    let mut live: BTreeMap<usize, i64> = j.vertices.iter().map(|v| (*v, labels[v - 1])).collect();
    for (a, b) in j.contraction_steps()? {
        let first_positive = live.iter().find(|(_, k)| **k > 0).map(|(v, _)| *v);
        let front_ok = live.values().next().is_some_and(|k| *k <= 0);
        if first_positive != Some(a) {
            return Ok(false);
        }
        if !front_ok {
            // moving the first positive factor means it was not at the front
            return Err(Error::Integrity(format!("step ({a},{b}) is valid but the front factor has positive r-energy")));
        }
        let ka = live.remove(&a).expect("live vertex");
        *live.get_mut(&b).expect("live vertex") += ka;
    }
    Ok(live.values().all(|k| *k == 0))
}

/// Every interaction diagram on `{1..n}`: each vertex points to a smaller
/// one or to nothing, `n!` in all.
pub fn all_diagrams(n: usize) -> Vec<InteractionDiagram> {
    let mut out = vec![vec![]];
    for v in 2..=n {
        let mut next = Vec::new();
        for e in &out {
            next.push(e.clone());
            for i in 1..v {
                let mut e2 = e.clone();
                e2.push((v, i));
                next.push(e2);
            }
        }
        out = next;
    }
    let mut ds: Vec<InteractionDiagram> = out
        .into_iter()
        .map(|mut e: Vec<(usize, usize)>| {
            e.sort_unstable();
            InteractionDiagram { vertices: (1..=n).collect(), edges: e }
        })
        .collect();
    ds.sort();
    ds
}

/// `K`: the valid diagrams for the given r-energies. Only the labels are
/// consulted; with nonzero total r-energy nothing is valid.
pub fn enumerate_k(r_energies: &[i64]) -> Result<Vec<InteractionDiagram>> {
    let mut out = Vec::new();
    for d in all_diagrams(r_energies.len()) {
        if is_valid(&d, r_energies)? {
            out.push(d);
        }
    }
    Ok(out)
}

/// `Σ_{J ∈ K} L(J)`.
pub fn graph_sum<A: BracketAlgebra>(ops: &[GradedOp<A>]) -> Result<A> {
    let labels: Vec<i64> = ops.iter().map(|o| o.r_energy).collect();
    let plain: Vec<A> = ops.iter().map(|o| o.op.clone()).collect();
    let terms = enumerate_k(&labels)?.iter().map(|j| readout(j, &plain)).collect::<Result<Vec<_>>>()?;
    Ok(A::sum(terms))
}

/// `G_n`: the connected part of [`graph_sum`].
pub fn g_n_connected<A: BracketAlgebra>(ops: &[GradedOp<A>]) -> Result<A> {
    let labels: Vec<i64> = ops.iter().map(|o| o.r_energy).collect();
    let plain: Vec<A> = ops.iter().map(|o| o.op.clone()).collect();
    let mut terms = Vec::new();
    for j in enumerate_k(&labels)? {
        if j.is_connected() {
            terms.push(readout(&j, &plain)?);
        }
    }
    Ok(A::sum(terms))
}

/// `F_n = Σ_{J∈K} L(J)` in the free algebra on `n` letters.
pub fn verify_graph_sum_free(r_energies: &[i64]) -> Result<bool> {
    let ops: Vec<GradedOp<FreeElement>> =
        r_energies.iter().enumerate().map(|(i, k)| GradedOp::new(FreeElement::letter(i as u8), *k, 0)).collect();
    Ok(f_n(&ops)? == graph_sum(&ops)?)
}

/// `F_n = Σ_{J∈K} L(J)` for wedge operators, compared on every basis state
/// of energy at most `cap`.
pub fn verify_graph_sum(ops: &[GradedOp<Op>], cap: u64) -> Result<bool> {
    let lhs = f_n(ops)?;
    let rhs = graph_sum(ops)?;
    let reach = cap + ops.iter().map(|o| o.op.max_raising().unwrap_or(0)).sum::<u64>();
    for (_, v) in basis_up_to::<Rational>(cap) {
        if apply(&lhs, &v, reach)? != apply(&rhs, &v, reach)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `J ∈ K ⟺ J_i ∈ K(O_{P_i})` for every component, over all diagrams on
/// `{1..n}`.
pub fn verify_key_lemma(r_energies: &[i64]) -> Result<bool> {
    for d in all_diagrams(r_energies.len()) {
        let whole = is_valid(&d, r_energies)?;
        let mut parts = true;
        for c in d.components() {
            parts &= is_valid(&c, r_energies)?;
        }
        if whole != parts {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `L(J) = L(J_1)⋯L(J_t)` as bracket expressions, over all diagrams on
/// `{1..n}`.
pub fn verify_factorization(n: usize) -> Result<bool> {
    let names: Vec<Expr> = (1..=n).map(|i| Expr(format!("O{i}"))).collect();
    for d in all_diagrams(n) {
        let whole = readout(&d, &names)?;
        let parts = Expr::product(d.components().iter().map(|c| readout(c, &names)).collect::<Result<Vec<_>>>()?);
        if whole != parts {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerates r-energy signatures of length `n` with entries in
/// `-kmax..=kmax` and total zero.
pub fn signatures(n: usize, kmax: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (-kmax..=kmax).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    out.retain(|v| v.iter().sum::<i64>() == 0);
    out
}

/// Concrete operators for a signature: `E_{-(k r + b)}[1]`, which has
/// energy `k r + b`.
pub fn sample_ops(r_energies: &[i64], residuals: &[i64], r: i64) -> Vec<GradedOp<Op>> {
    r_energies
        .iter()
        .zip(residuals)
        .map(|(k, b)| GradedOp::new(Op::ECoeff(-(k * r + b), 1), *k, *b))
        .collect()
}

// ---------- the large-r lemma ----------

/// One coefficient of the lemma check: `[z^e]` of both sides.
#[derive(Clone, Debug, Serialize)]
pub struct CoefficientReport {
    pub exponents: Vec<i64>,
    pub lhs: String,
    pub rhs: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct LemmaBasicReport {
    pub r: i64,
    pub coefficients: Vec<CoefficientReport>,
}

impl LemmaBasicReport {
    pub fn pass(&self) -> bool {
        self.coefficients.iter().all(|c| c.pass)
    }
}

/// `[z^e] R_{m,a}(z)`: the summand of `A_a` with r-energy `-m`, at `t = 0`
/// with the `t`-powers stripped. Negative `a` stands for age `(r + a)/r`.
pub fn r_summand(a: i64, m: i64, r: i64, e: i64) -> Result<Op> {
    let (num, i) = if a >= 0 { (a, m) } else { (r + a, m - 1) };
    let zero = || Rational::from_integer(0.into());
    let f = build_a_over_r::<Rational>(num, r, i, i, e + 1, JohnsonMode::TZero, zero)?;
    f.coefficient(e - 1)
}

/// Vectors `m` with `m_i ≤ hi_i` and `Σ m = total`.
fn m_vectors(his: &[i64], total: i64) -> Vec<Vec<i64>> {
    let n = his.len();
    if n == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let rest: i64 = his[1..].iter().sum();
    let mut out = Vec::new();
    for m0 in (total - rest)..=his[0] {
        for mut tail in m_vectors(&his[1..], total - m0) {
            tail.insert(0, m0);
            out.push(tail);
        }
    }
    out
}

/// `[z_B^{e_B}] (f_{a_B} E_{|a_B|}(|z_B|)) = Σ_{|m_B| = 0} G(R_{m_B, a_B})[e_B]`.
pub fn block_coefficient(a: &[i64], e: &[i64], r: i64) -> Result<Op> {
    let his: Vec<i64> = e.iter().map(|x| x + 1).collect();
    let mut terms = Vec::new();
    for m in m_vectors(&his, 0) {
        let labels: Vec<i64> = m.iter().map(|x| -x).collect();
        let conn: Vec<InteractionDiagram> = enumerate_k(&labels)?.into_iter().filter(|j| j.is_connected()).collect();
        if conn.is_empty() {
            continue;
        }
        let ops = (0..a.len()).map(|i| r_summand(a[i], m[i], r, e[i])).collect::<Result<Vec<_>>>()?;
        for j in conn {
            terms.push(readout(&j, &ops)?);
        }
    }
    Ok(Op::Sum(terms))
}

fn exponent_boxes(n: usize, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<i64>| {
                (lo..=hi).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Smallest `r` for which the lemma is asserted here: above `Σ|a_i|` plus
/// the energies of `L1` and `L2`.
pub fn lemma_basic_floor(a: &[i64], l1: &Op, l2: &Op) -> Result<i64> {
    let e = |o: &Op| o.energy_delta().map(i64::abs).ok_or_else(|| Error::Domain("L1 and L2 need fixed energy".into()));
    Ok(a.iter().map(|x| x.abs()).sum::<i64>() + e(l1)? + e(l2)?)
}

/// Compares `⟨L1 ∏A_{a_i}(z_i) L2⟩` against the partition sum
/// `Σ_P ⟨L1 ∏_j f_{a_{P_j}} E_{|a_{P_j}|}(|z_{P_j}|) L2⟩` coefficient by
/// coefficient, for exponents `-1..=order` in each variable. The block
/// factors come from `G` through [`block_coefficient`]; nothing about `f` is
/// assumed.
pub fn verify_lemma_basic(a: &[i64], r: i64, l1: &Op, l2: &Op, order: i64) -> Result<LemmaBasicReport> {
    if r <= a.iter().map(|x| x.abs()).sum::<i64>() {
        return Err(Error::Domain(format!("r = {r} must exceed Σ|a_i|")));
    }
    let d1 = l1.energy_delta().ok_or_else(|| Error::Domain("L1 needs fixed energy".into()))?;
    let d2 = l2.energy_delta().ok_or_else(|| Error::Domain("L2 needs fixed energy".into()))?;
    let n = a.len();
    let sum_a: i64 = a.iter().sum();
    let partitions = set_partitions(n);
    let mut coefficients = Vec::new();
    for e in exponent_boxes(n, -1, order) {
        // direct side: the r-energies must balance the fixed energies exactly
        let gap = d1 + d2 - sum_a;
        let mut lhs = Rational::from_integer(0.into());
        if gap.rem_euclid(r) == 0 {
            let his: Vec<i64> = e.iter().map(|x| x + 1).collect();
            for m in m_vectors(&his, gap / r) {
                let mut ops = vec![l1.clone()];
                for i in 0..n {
                    ops.push(r_summand(a[i], m[i], r, e[i])?);
                }
                ops.push(l2.clone());
                lhs += vev(&ops, None)?;
            }
        }
        let mut rhs = Rational::from_integer(0.into());
        for p in &partitions {
            let mut ops = vec![l1.clone()];
            for blk in p {
                let ab: Vec<i64> = blk.iter().map(|i| a[*i]).collect();
                let eb: Vec<i64> = blk.iter().map(|i| e[*i]).collect();
                ops.push(block_coefficient(&ab, &eb, r)?);
            }
            ops.push(l2.clone());
            rhs += vev(&ops, None)?;
        }
        coefficients.push(CoefficientReport {
            pass: lhs == rhs,
            exponents: e,
            lhs: rational::to_string(&lhs),
            rhs: rational::to_string(&rhs),
        });
    }
    Ok(LemmaBasicReport { r, coefficients })
}
