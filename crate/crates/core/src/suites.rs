//! The verification suites, one per acceptance criterion. Shared by the
//! `acceptance` test target and `p1wedge verify`.

use std::thread;

use serde::Serialize;

use crate::diagrams::{
    bracket_expression, enumerate_k, g_n_connected, k_by_recursion, sample_ops, signatures, verify_factorization,
    verify_graph_sum, verify_graph_sum_free, verify_key_lemma, Expr, GradedOp,
};
use crate::error::{Error, Result};
use crate::exactseries::{frac, inv_varsigma, q, rational, varsigma, Rational};
use crate::gwformulas::equivariant::{eq_cap_gf, eq_cap_infinity_gf, eq_tube_gf, relabel, stationary_tube_gf};
use crate::gwformulas::{
    cap_invariant, connected_tube_invariant, contact_shapes, one_point_tube_connected, tube_invariant,
    verify_lemma_comb, ContactData, Insertion,
};
use crate::johnson::{default_samples, orbifold_bracket, relative_via_limit, request_for, JohnsonMode};
use crate::wdvv::{family_members, family_value, wdvv_residual};
use crate::wedgeops::{all_pass, verify_alpha_commutation, verify_alpha_ecoeff, verify_commutation};
use crate::combinat::partitions;
use crate::Series;

/// Suite names in criterion order.
pub const SUITES: [&str; 9] =
    ["commutation", "comb", "diagrams", "wdvv", "cross_pipeline", "one_point", "cap_tube", "equivariant", "integrity"];

const MAX_LISTED: usize = 20;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub criterion: usize,
    pub name: String,
    pub pass: bool,
    pub checks: usize,
    /// The first few failures; `failed` counts all of them.
    pub failures: Vec<String>,
    pub failed: usize,
}

#[derive(Default)]
struct Tally {
    checks: usize,
    failed: usize,
    failures: Vec<String>,
}

impl Tally {
    fn fail(&mut self, msg: String) {
        self.failed += 1;
        if self.failures.len() < MAX_LISTED {
            self.failures.push(msg);
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.fail(what());
        }
    }

    /// Counts an errored computation as a failure.
    fn check_res(&mut self, r: Result<bool>, what: impl FnOnce() -> String) {
        match r {
            Ok(ok) => self.check(ok, what),
            Err(e) => {
                self.checks += 1;
                self.fail(format!("{}: {e}", what()));
            }
        }
    }

    fn merge(&mut self, other: Tally) {
        self.checks += other.checks;
        self.failed += other.failed;
        for f in other.failures {
            if self.failures.len() < MAX_LISTED {
                self.failures.push(f);
            }
        }
    }
}

fn workers() -> usize {
    thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Runs `f` on every item, spread over the available cores.
fn sharded<T: Sync>(items: &[T], f: impl Fn(&T, &mut Tally) + Sync) -> Tally {
    let chunk = items.len().div_ceil(workers()).max(1);
    let f = &f;
    let parts: Vec<Tally> = thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|c| {
                s.spawn(move || {
                    let mut t = Tally::default();
                    for it in c {
                        f(it, &mut t);
                    }
                    t
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite worker panicked")).collect()
    });
    let mut out = Tally::default();
    for p in parts {
        out.merge(p);
    }
    out
}

pub fn run_suite(name: &str) -> Result<SuiteReport> {
    let idx = SUITES
        .iter()
        .position(|s| *s == name)
        .ok_or_else(|| Error::Config(format!("unknown suite {name:?}; expected one of {}", SUITES.join(", "))))?;
    let t = match idx {
        0 => commutation(),
        1 => comb(),
        2 => diagrams(),
        3 => wdvv(),
        4 => cross_pipeline(),
        5 => one_point(),
        6 => cap_tube(),
        7 => equivariant(),
        _ => integrity(),
    };
    Ok(SuiteReport {
        criterion: idx + 1,
        name: name.to_string(),
        pass: t.failed == 0 && t.checks > 0,
        checks: t.checks,
        failures: t.failures,
        failed: t.failed,
    })
}

/// All suites, in criterion order.
pub fn run_all() -> Vec<SuiteReport> {
    SUITES.iter().map(|s| run_suite(s).expect("known suite")).collect()
}

fn commutation() -> Tally {
    let pairs: Vec<(i64, i64)> = (-3..=3).flat_map(|j| (-3..=3).map(move |k| (j, k))).collect();
    sharded(&pairs, |&(j, k), t| {
        t.check_res(verify_commutation(j, k, 6, 8).map(|r| all_pass(&r)), || format!("[E_{j}(z), E_{k}(w)]"));
        t.check_res(verify_alpha_commutation(j, k, 8).map(|r| all_pass(&r)), || format!("[α_{j}, α_{k}]"));
        t.check_res(verify_alpha_ecoeff(j, k, 8).map(|r| all_pass(&r)), || format!("[α_{j}, E_{k}[0]]"));
    })
}

fn comb() -> Tally {
    let mut cases = Vec::new();
    for a in 1..=4 {
        let mut bs: Vec<Vec<i64>> = vec![vec![]];
        for _ in 0..3 {
            bs = bs.iter().flat_map(|v| [-1, -2].map(|x| [v.clone(), vec![x]].concat())).collect();
            cases.extend(bs.iter().filter(|b| a + b.iter().sum::<i64>() > 0).map(|b| (a, b.clone())));
        }
    }
    sharded(&cases, |(a, b), t| {
        t.check_res(verify_lemma_comb(*a, b, 6).map(|r| all_pass(&r)), || format!("a={a} b={b:?}"));
    })
}

fn diagrams() -> Tally {
    let sigs: Vec<Vec<i64>> = (1..=5).flat_map(|n| signatures(n, 2)).collect();
    let mut t = sharded(&sigs, |sig, t| {
        t.check_res(enumerate_k(sig).map(|k| k == k_by_recursion(sig)), || format!("K by recursion {sig:?}"));
        t.check_res(verify_graph_sum_free(sig), || format!("graph sum {sig:?}"));
        t.check_res(verify_key_lemma(sig), || format!("component criterion {sig:?}"));
    });
    for n in 1..=5 {
        t.check_res(verify_factorization(n), || format!("factorization n={n}"));
    }
    // concrete operators on a small subset
    for n in 2..=3 {
        for sig in signatures(n, 1) {
            let res: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
            t.check_res(verify_graph_sum(&sample_ops(&sig, &res, 2), 2), || format!("operator graph sum {sig:?}"));
        }
    }
    // the four-factor example, subscripts (1, 0, 0, -1)
    let energies = [-1, 0, 0, 1];
    match enumerate_k(&energies) {
        Ok(k) => {
            t.check(k.len() == 4, || format!("four-factor K has {} diagrams", k.len()));
            let connected: Vec<_> = k.iter().filter(|j| j.is_connected()).collect();
            t.check(
                connected.len() == 1 && bracket_expression(connected[0], 4).ok().as_deref() == Some("[O1,[O2,[O3,O4]]]"),
                || "four-factor connected part".into(),
            );
        }
        Err(e) => t.fail(format!("four-factor example: {e}")),
    }
    let names: Vec<GradedOp<Expr>> =
        energies.iter().enumerate().map(|(i, k)| GradedOp::new(Expr(format!("O{}", i + 1)), *k, 0)).collect();
    t.check_res(g_n_connected(&names).map(|g| g.0 == "[O1,[O2,[O3,O4]]]"), || "G_4 is the chain bracket".into());
    t
}

fn wdvv() -> Tally {
    sharded(&family_members(4, 3, 3), |(a, b, d), t| {
        let expect = rational::pow(&q(*d), b.len() as i64 - 1);
        t.check_res(family_value(*a, b, *d).map(|v| v == expect), || format!("I_{d}(a={a}, b={b:?})"));
        if !b.is_empty() {
            t.check_res(wdvv_residual(*a, b, *d).map(|r| r == q(0)), || format!("residual a={a} b={b:?} d={d}"));
        }
    })
}

fn insertion_lists() -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for k in 0..=3 {
        out.push(vec![k]);
        for k2 in k..=3 {
            out.push(vec![k, k2]);
        }
    }
    out
}

fn closed_form(cd: &ContactData) -> Result<Rational> {
    if cd.mu_inf.is_empty() {
        cap_invariant(cd)
    } else {
        tube_invariant(cd)
    }
}

fn cross_pipeline() -> Tally {
    let mut cases = Vec::new();
    for shape in contact_shapes(3, 2, true) {
        for ks in insertion_lists() {
            let mut cd = shape.clone();
            cd.insertions = ks.iter().map(|k| Insertion::omega(*k)).collect();
            cases.push(cd);
        }
    }
    sharded(&cases, |cd, t| {
        let label = || format!("{:?}|{:?} {:?}", cd.mu0, cd.mu_inf, cd.stationary_ks().unwrap_or_default());
        let closed = match closed_form(cd) {
            Ok(v) => v,
            Err(e) => return t.fail(format!("{}: {e}", label())),
        };
        let lim = default_samples(cd, 4).and_then(|s| relative_via_limit(cd, &s));
        match lim {
            Ok((v, fit)) => {
                t.check(v == closed, || format!("{}: Johnson limit differs from closed form", label()));
                t.check(fit.coeffs.len() == 1, || format!("{}: bracket depends on r", label()));
            }
            Err(e) => t.fail(format!("{}: {e}", label())),
        }
        if let ([ins], false) = (cd.insertions.as_slice(), cd.mu_inf.is_empty()) {
            let k = ins.k as i64;
            let r = one_point_tube_connected(cd, k + 2)
                .and_then(|f| f.coeff1(k + 1))
                .and_then(|f| Ok(f == connected_tube_invariant(cd)?));
            t.check_res(r, || format!("{}: one-point function vs connected expectation", label()));
        }
    })
}

/// `∏ς(a_i z) ∏ς(a'_j z) / (∏a_i ∏a'_j ς(z))` through `z^order`.
fn no_negative_formula(mu: &[i64], nu: &[i64], order: i64) -> Result<Series> {
    let mut num = Series::constant(q(1));
    let mut denom = q(1);
    for a in mu.iter().chain(nu) {
        num = num.try_mul(&varsigma("z", &q(*a), order + 1))?;
        denom *= q(*a);
    }
    let f = num.try_mul(&inv_varsigma("z", &q(1), order + 1)?)?;
    Ok(f.truncate(&[order]).scale(&(q(1) / denom)))
}

fn one_point() -> Tally {
    let mut t = Tally::default();
    let order = 7;
    for d in 1..=3 {
        for mu in partitions(d, d) {
            for nu in partitions(d, d) {
                let cd = ContactData::stationary(&mu, &nu, &[]);
                let label = format!("{mu:?}|{nu:?}");
                let f = match one_point_tube_connected(&cd, order) {
                    Ok(f) => f,
                    Err(e) => {
                        t.fail(format!("{label}: {e}"));
                        continue;
                    }
                };
                t.check_res(no_negative_formula(&mu, &nu, order).map(|g| g.agrees_with(&f)), || label.clone());
                for k in 0..order {
                    let with = ContactData::stationary(&mu, &nu, &[k as u32]);
                    let r = f.coeff1(k + 1).and_then(|c| Ok(c == connected_tube_invariant(&with)?));
                    t.check_res(r, || format!("{label} τ_{k} vs connected expectation"));
                }
            }
        }
    }
    match one_point_tube_connected(&ContactData::stationary(&[1], &[1], &[]), order) {
        Ok(f) => {
            let c = |e| f.coeff1(e).unwrap_or_else(|_| q(-99));
            t.check(c(1) == q(1), || "τ_0 ↦ 1".into());
            t.check(c(3) == frac(1, 24), || "τ_2 ↦ 1/24".into());
            t.check(c(2) == q(0), || "τ_1 ↦ 0".into());
        }
        Err(e) => t.fail(e.to_string()),
    }
    t
}

fn cap_tube() -> Tally {
    let mut cases = Vec::new();
    for shape in contact_shapes(3, 2, true).into_iter().filter(|c| c.mu_inf.is_empty()) {
        for ks in insertion_lists() {
            cases.push((shape.mu0.clone(), ks));
        }
    }
    sharded(&cases, |(mu, ks), t| {
        let d: i64 = mu.iter().sum();
        let ones = vec![1; d as usize];
        let r = tube_invariant(&ContactData::stationary(mu, &ones, ks)).and_then(|tube| {
            let cap = cap_invariant(&ContactData::stationary(mu, &[], ks))?;
            Ok(tube == cap * Rational::from_integer(rational::factorial(d as u64)))
        });
        t.check_res(r, || format!("{mu:?} {ks:?}"));
    })
}

fn equivariant() -> Tally {
    let mut t = Tally::default();
    for d in 1..=2 {
        for mu in partitions(d, d) {
            for nu in partitions(d, d) {
                for (n, m) in [(1, 0), (0, 1), (2, 0), (1, 1), (2, 1)] {
                    let label = format!("tube {mu:?}|{nu:?} n={n} m={m}");
                    let g = match eq_tube_gf(&mu, &nu, n, m, 3) {
                        Ok(g) => g,
                        Err(e) => {
                            t.fail(format!("{label}: {e}"));
                            continue;
                        }
                    };
                    let bound = (n as i64 - 1).max(0) + (m as i64 - 1).max(0);
                    t.check(g.t_degree().is_some_and(|deg| deg <= bound), || format!("{label}: t-degree"));
                    let r = g.at_t_zero().and_then(|s| Ok(s.agrees_with(&stationary_tube_gf(&mu, &nu, n, m, 3)?)));
                    t.check_res(r, || format!("{label}: t = 0"));
                }
            }
        }
    }
    for mu in [vec![1], vec![2], vec![1, 1], vec![2, 1]] {
        for (n, m) in [(1, 0), (2, 0), (0, 1), (1, 1), (2, 1)] {
            let label = format!("cap {mu:?} n={n} m={m}");
            let g = match eq_cap_gf(&mu, n, m, 3) {
                Ok(g) => g,
                Err(e) => {
                    t.fail(format!("{label}: {e}"));
                    continue;
                }
            };
            t.check(g.t_degree().is_some(), || format!("{label}: not polynomial in t"));
            let within = g.series.terms().iter().all(|(e, c)| {
                let bound = (n as i64 - 1).max(0) + e[n..].iter().map(|x| x + 1).sum::<i64>();
                c.max_exp().unwrap_or(0) <= bound
            });
            t.check(within, || format!("{label}: t-degree bound"));
            t.check_res(adjoint_symmetric(&mu, n, m, &g.series), || format!("{label}: adjoint symmetry"));
        }
    }
    t
}

/// The cap at infinity with the roles of the two variable groups exchanged
/// and `t ↦ -t` reproduces the cap at zero.
fn adjoint_symmetric(mu: &[i64], n: usize, m: usize, g: &crate::TSeries) -> Result<bool> {
    let h = eq_cap_infinity_gf(mu, m, n, 3)?;
    let mut names: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
    names.extend((1..=m).map(|i| format!("w{i}")));
    let hv: Vec<&str> = names[n..].iter().chain(&names[..n]).map(|s| s.as_str()).collect();
    let h = relabel(&h.series, &hv)?.embed(g.vars())?.negate_t_coeffs();
    Ok(g.agrees_with(&h))
}

fn integrity() -> Tally {
    let mut cases = Vec::new();
    for shape in contact_shapes(2, 2, true) {
        for ks in [vec![], vec![0], vec![2], vec![1, 0]] {
            let mut cd = shape.clone();
            cd.insertions = ks.iter().map(|k| Insertion::omega(*k)).collect();
            cases.push(cd);
        }
    }
    sharded(&cases, |cd, t| {
        let label = || format!("{:?}|{:?} {:?}", cd.mu0, cd.mu_inf, cd.stationary_ks().unwrap_or_default());
        let samples = match default_samples(cd, 2) {
            Ok(s) => s,
            Err(e) => return t.fail(format!("{}: {e}", label())),
        };
        for r in samples {
            let run = || -> Result<bool> {
                let full = orbifold_bracket(&request_for(cd, r, JohnsonMode::Full)?)?;
                if !full.monomial.is_integral() {
                    return Err(Error::Integrity(format!("fractional exponent left at r = {r}")));
                }
                let zero = orbifold_bracket(&request_for(cd, r, JohnsonMode::TZero)?)?.fold()?;
                Ok(full.fold()?.coeff(0) == zero.coeff(0))
            };
            t.check_res(run(), || format!("{} r={r}", label()));
        }
    })
}
