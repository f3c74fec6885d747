use std::collections::BTreeSet;

use num_traits::{One, Zero};
use p1wedge::combinat::{mobius_weight, set_partitions};
use p1wedge::exactseries::{frac, q, varsigma, Rational};
use p1wedge::gwformulas::equivariant::{stationary_cap_gf, stationary_tube_gf};
use p1wedge::gwformulas::*;
use p1wedge::wedgeops::{all_pass, apply, basis_up_to, connected_from, vev, WedgeOperator};
use p1wedge::exactseries::Coeff;
use p1wedge::{Error, Series, TPoly};
use proptest::prelude::*;

type Op = WedgeOperator<Rational>;

// ---------- character oracle for the no-negative invariants ----------

/// χ^λ(μ) by the Murnaghan–Nakayama rule on beta-sets.
fn character(lambda: &[i64], mu: &[i64]) -> i64 {
    let n = lambda.len() as i64;
    let beta: BTreeSet<i64> = lambda.iter().enumerate().map(|(i, l)| l - i as i64 + n - 1).collect();
    mn(&beta, mu)
}

fn mn(beta: &BTreeSet<i64>, mu: &[i64]) -> i64 {
    let Some((k, rest)) = mu.split_first() else { return 1 };
    let mut total = 0;
    for &b in beta {
        let t = b - k;
        if t < 0 || beta.contains(&t) {
            continue;
        }
        let between = beta.range(t + 1..b).count();
        let mut nb = beta.clone();
        nb.remove(&b);
        nb.insert(t);
        let sign = if between.is_multiple_of(2) { 1 } else { -1 };
        total += sign * mn(&nb, rest);
    }
    total
}

fn partitions(n: i64, max: i64) -> Vec<Vec<i64>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in (1..=n.min(max)).rev() {
        for mut rest in partitions(n - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn factorial(n: u64) -> Rational {
    (1..=n).fold(q(1), |a, i| a * q(i as i64))
}

/// `[z^{k+1}]` of the `E_0(z)` eigenvalue on `v_λ`, from the exponential
/// series directly.
fn e0_eigen(lambda: &[i64], k: i64) -> Rational {
    let e = (k + 1) as u64;
    let mut s = q(0);
    for (i, l) in lambda.iter().enumerate() {
        let i = i as i64 + 1;
        let a = frac(2 * (l - i) + 1, 2);
        let b = frac(-2 * i + 1, 2);
        s += p1wedge::exactseries::rational::pow(&a, e as i64) - p1wedge::exactseries::rational::pow(&b, e as i64);
    }
    s / factorial(e) + inv_varsigma_oracle(k + 1)
}

fn inv_varsigma_oracle(n: i64) -> Rational {
    let s: Series = varsigma("z", &q(1), n + 2);
    s.inverse().unwrap().coeff1(n).unwrap()
}

fn oracle_tube(mu: &[i64], nu: &[i64], ks: &[i64]) -> Rational {
    let d: i64 = mu.iter().sum();
    let mut total = q(0);
    for l in partitions(d, d) {
        let mut e = q(1);
        for k in ks {
            e *= e0_eigen(&l, *k);
        }
        total += q(character(&l, mu) * character(&l, nu)) * e;
    }
    let norm: i64 = mu.iter().chain(nu).product();
    total / q(norm)
}

fn oracle_cap(mu: &[i64], ks: &[i64]) -> Rational {
    let d: i64 = mu.iter().sum();
    let ones = vec![1; d as usize];
    oracle_tube(mu, &ones, ks) / factorial(d as u64)
}

// ---------- set partitions and weights ----------

#[test]
fn set_partition_counts() {
    assert_eq!(enumerate_set_partitions(0), vec![Vec::<Vec<usize>>::new()]);
    let two = enumerate_set_partitions(2);
    assert_eq!(two.len(), 2);
    assert!(two.contains(&vec![vec![1], vec![2]]) && two.contains(&vec![vec![1, 2]]));
    assert_eq!(enumerate_set_partitions(3).len(), 5);
    assert_eq!(enumerate_set_partitions(4).len(), 15);
    for p in enumerate_set_partitions(4) {
        for w in p.windows(2) {
            assert!(w[0][0] < w[1][0]);
        }
        for b in &p {
            assert!(b.windows(2).all(|x| x[0] < x[1]));
        }
    }
}

#[test]
fn n_weight_values() {
    assert_eq!(n_weight(&[-1, -2], &[vec![1], vec![2]]), q(1));
    assert_eq!(n_weight(&[-1, -2], &[vec![1, 2]]), q(-2));
    assert_eq!(n_weight(&[-1, -2, -3], &[vec![1, 2, 3]]), q(12));
}

#[test]
fn nested_bracket_values() {
    assert_eq!(nested_bracket(2, &[-1], &[vec![1]]), Op::scaled_q(q(2), Op::Alpha(1)));
    assert_eq!(nested_bracket(1, &[-1], &[vec![1]]), Op::zero());
    assert_eq!(nested_bracket(3, &[-1, -1], &[vec![1], vec![2]]), Op::scaled_q(q(6), Op::Alpha(1)));
}

#[test]
fn nested_bracket_matches_commutators() {
    let b = [-1, -2];
    for p in enumerate_set_partitions(2) {
        for a in 1..=4 {
            let reduced = nested_bracket(a, &b, &p);
            let expanded = nested_bracket_expanded(a, &b, &p);
            for (_, v) in basis_up_to::<Rational>(5) {
                let x = apply(&reduced, &v, 8).unwrap();
                let y = apply(&expanded, &v, 8).unwrap();
                assert_eq!(x, y, "a={a} p={p:?}");
            }
        }
    }
}

#[test]
fn lemma_comb_examples() {
    assert!(all_pass(&verify_lemma_comb(2, &[-1], 6).unwrap()));
    assert!(all_pass(&verify_lemma_comb(4, &[-1, -1], 6).unwrap()));
    assert!(all_pass(&verify_lemma_comb(4, &[-2, -1], 6).unwrap()));
    assert!(matches!(verify_lemma_comb(1, &[-1], 6), Err(Error::Domain(_))));
}

#[test]
fn negative_symmetry() {
    for b in [vec![-1, -2], vec![-2, -1, -1], vec![-1, -2, -2]] {
        assert!(verify_negative_symmetry(&b, 6).unwrap(), "{b:?}");
    }
}

// ---------- invariants ----------

#[test]
fn cap_examples() {
    let cd = ContactData::stationary(&[1], &[], &[0]);
    assert_eq!(cap_invariant(&cd).unwrap(), frac(23, 24));
    let cd = ContactData::stationary(&[1, 1], &[], &[0]);
    assert_eq!(cap_invariant(&cd).unwrap(), frac(47, 24));
    assert_eq!(cap_invariant(&cd).unwrap(), oracle_cap(&[1, 1], &[0]));
}

#[test]
fn tube_examples() {
    assert_eq!(tube_invariant(&ContactData::stationary(&[2, -1], &[1], &[])).unwrap(), q(1));
    assert_eq!(tube_invariant(&ContactData::stationary(&[1], &[1], &[0])).unwrap(), frac(23, 24));
    assert_eq!(tube_invariant(&ContactData::stationary(&[1], &[1], &[1])).unwrap(), q(0));
    assert_eq!(connected_tube_invariant(&ContactData::stationary(&[1], &[1], &[0])).unwrap(), q(1));
}

#[test]
fn tube_rejects_unbalanced() {
    let cd = ContactData::stationary(&[2], &[1], &[]);
    assert!(matches!(tube_invariant(&cd), Err(Error::Domain(_))));
    let cd = ContactData::stationary(&[1], &[], &[0]);
    assert!(matches!(tube_invariant(&cd), Err(Error::Domain(_))));
}

#[test]
fn contact_json() {
    let cd = ContactData::from_json(r#"{"mu0":[2,-1], "muInf":[1], "insertions":[{"k":0,"class":"omega"}]}"#).unwrap();
    assert_eq!(cd.mu0, vec![2, -1]);
    assert_eq!(cd.mu_inf, vec![1]);
    assert_eq!(cd.degree().unwrap(), 1);
    assert_eq!(cd.rho_minus(), 1);
    let bold = ContactData::from_json(r#"{"mu0":[1], "muInf":[1], "insertions":[{"k":0,"class":"bold0"}]}"#).unwrap();
    assert!(matches!(tube_invariant(&bold), Err(Error::Unsupported(_))));
}

#[test]
fn no_negative_matches_characters() {
    for d in 1..=3 {
        for mu in partitions(d, d) {
            for nu in partitions(d, d) {
                for ks in [vec![], vec![0], vec![1], vec![2], vec![0, 2], vec![3, 1]] {
                    let kk: Vec<u32> = ks.iter().map(|k| *k as u32).collect();
                    let cd = ContactData::stationary(&mu, &nu, &kk);
                    assert_eq!(tube_invariant(&cd).unwrap(), oracle_tube(&mu, &nu, &ks), "{mu:?} {nu:?} {ks:?}");
                }
            }
            for ks in [vec![0], vec![2, 0]] {
                let kk: Vec<u32> = ks.iter().map(|k| *k as u32).collect();
                assert_eq!(cap_invariant(&ContactData::stationary(&mu, &[], &kk)).unwrap(), oracle_cap(&mu, &ks));
            }
        }
    }
}

// ---------- the explicit one-point function ----------

#[test]
fn one_point_examples() {
    let f = one_point_tube_connected(&ContactData::stationary(&[1], &[1], &[]), 7).unwrap();
    assert!(f.agrees_with(&varsigma("z", &q(1), 7)));
    assert_eq!(f.coeff1(1).unwrap(), q(1));
    assert_eq!(f.coeff1(3).unwrap(), frac(1, 24));
    assert_eq!(f.coeff1(2).unwrap(), q(0));
    let f = one_point_tube_connected(&ContactData::stationary(&[2, -1], &[1], &[]), 7).unwrap();
    assert!(f.agrees_with(&varsigma("z", &q(1), 7)));
    let f = one_point_tube_connected(&ContactData::stationary(&[1, 1], &[2], &[]), 7).unwrap();
    // two positive parts on the left each contribute a factor ς(z)
    let s1: Series = varsigma("z", &q(1), 7);
    let s2: Series = varsigma("z", &q(2), 7);
    assert!(f.agrees_with(&s1.try_mul(&s2).unwrap().scale(&frac(1, 2)).truncate(&[7])));
}

#[test]
fn one_point_without_valid_assignment_is_zero() {
    // the only positive part is too small to absorb the negative part
    let f = one_point_tube_connected(&ContactData::stationary(&[1, 1, -1], &[1], &[]), 5).unwrap();
    assert!(f.agrees_with(&Series::constant(q(0))));
}

/// Connected invariants through the cumulant agree with the explicit
/// formula on every contact shape of degree at most 3 with negative parts
/// at least -2.
#[test]
fn one_point_matches_cumulant() {
    for cd in contact_shapes(3, 2, false) {
        let f = one_point_tube_connected(&cd, 6).unwrap();
        for k in 0..=5u32 {
            let mut with = cd.clone();
            with.insertions = vec![Insertion::omega(k)];
            let c = connected_tube_invariant(&with).unwrap();
            assert_eq!(c, f.coeff1(k as i64 + 1).unwrap(), "{:?}|{:?} τ_{k}", cd.mu0, cd.mu_inf);
        }
    }
}

// ---------- small helpers ----------

#[test]
fn hodge_values() {
    assert_eq!(genus0_hodge(&[q(3)]).unwrap(), frac(1, 3));
    assert_eq!(genus0_hodge(&[q(2), q(3)]).unwrap(), frac(6, 5));
    assert_eq!(genus0_hodge(&[q(1), q(1), q(1)]).unwrap(), q(1));
    assert_eq!(genus0_hodge(&[q(1), q(2), q(3), q(4)]).unwrap(), q(240));
    assert!(matches!(genus0_hodge(&[q(1), q(-1)]), Err(Error::Domain(_))));
}

#[test]
fn coeff_cp_values() {
    assert_eq!(coeff_cp(&[-1], &q(7)).unwrap(), frac(1, 7));
    assert_eq!(coeff_cp(&[-1, -2], &q(5)).unwrap(), frac(-2, 25));
    assert_eq!(coeff_cp(&[-1, -1, -1], &q(2)).unwrap(), frac(1, 4));
    assert!(coeff_cp(&[1], &q(2)).is_err());
}

#[test]
fn cumulant_matches_mobius_sum() {
    // an arbitrary non-multiplicative set function
    let full = |s: &[usize]| -> Rational { s.iter().map(|i| q(*i as i64 + 2)).fold(q(1), |a, b| a * b) + q(s.len() as i64).pow(2) };
    for n in 1..=5 {
        let fast = connected_from(n, |s| Ok(full(s))).unwrap();
        let mut slow = q(0);
        for p in set_partitions(n) {
            let mut t = q(mobius_weight(p.len()));
            for b in &p {
                t *= full(b);
            }
            slow += t;
        }
        assert_eq!(fast, slow, "n={n}");
    }
}

// ---------- equivariant series ----------

#[test]
fn eq_cap_trivial() {
    let g = eq_cap_gf(&[1], 0, 0, 3).unwrap();
    assert_eq!(g.series.coeff(&[]).unwrap(), TPoly::one());
    let g = eq_cap_infinity_gf(&[1], 0, 0, 3).unwrap();
    assert_eq!(g.series.coeff(&[]).unwrap(), TPoly::one());
    // bosonic modes of different size commute, so ⟨α_2 α_{-1} α_{-1}⟩ = 0
    let g = eq_tube_gf(&[2], &[1, 1], 0, 0, 3).unwrap();
    assert!(g.series.is_exact_zero());
    let g = eq_tube_gf(&[2], &[2], 0, 0, 3).unwrap();
    assert_eq!(g.series.coeff(&[]).unwrap(), TPoly::from_rational(&frac(1, 2)));
}

#[test]
fn eq_tube_one_point_is_stationary() {
    let g = eq_tube_gf(&[1], &[1], 1, 0, 6).unwrap();
    assert_eq!(g.t_degree(), Some(0));
    let s = g.at_t_zero().unwrap();
    for k in 0..=5 {
        let cd = ContactData::stationary(&[1], &[1], &[k]);
        assert_eq!(s.coeff1(k as i64 + 1).unwrap(), tube_invariant(&cd).unwrap());
    }
}

#[test]
fn eq_tube_degree_and_specialization() {
    for d in 1..=2 {
        for mu in partitions(d, d) {
            for nu in partitions(d, d) {
                for (n, m) in [(1, 0), (0, 1), (2, 0), (1, 1), (2, 1)] {
                    let g = eq_tube_gf(&mu, &nu, n, m, 3).unwrap();
                    let bound = (n as i64 - 1).max(0) + (m as i64 - 1).max(0);
                    let deg = g.t_degree().expect("polynomial in t");
                    assert!(deg <= bound, "{mu:?} {nu:?} n={n} m={m} deg={deg}");
                    let st = stationary_tube_gf(&mu, &nu, n, m, 3).unwrap();
                    assert!(g.at_t_zero().unwrap().agrees_with(&st), "{mu:?} {nu:?} n={n} m={m}");
                }
            }
        }
    }
}

#[test]
fn eq_cap_specializes_to_cap() {
    for d in 1..=3 {
        for mu in partitions(d, d) {
            let g = eq_cap_gf(&mu, 1, 0, 5).unwrap();
            assert!(g.t_degree().unwrap() <= 0);
            let s = g.at_t_zero().unwrap();
            let st = stationary_cap_gf(&mu, 5).unwrap();
            for e in -1..=5 {
                assert_eq!(s.coeff1(e).unwrap(), st.coeff1(e).unwrap());
            }
            for k in 0..=4u32 {
                let cd = ContactData::stationary(&mu, &[], &[k]);
                assert_eq!(s.coeff1(k as i64 + 1).unwrap(), cap_invariant(&cd).unwrap(), "{mu:?} τ_{k}");
            }
        }
    }
}

#[test]
fn eq_cap_adjoint_symmetry() {
    for mu in [vec![1], vec![2], vec![1, 1], vec![2, 1]] {
        for (n, m) in [(0, 1), (1, 1), (2, 1), (1, 0)] {
            let g = eq_cap_gf(&mu, n, m, 3).unwrap();
            let h = eq_cap_infinity_gf(&mu, m, n, 3).unwrap();
            // variables of h are (z_A.., w_E..); those of g are (z_E.., w_A..)
            let mut names: Vec<String> = (1..=n).map(|i| format!("z{i}")).collect();
            names.extend((1..=m).map(|i| format!("w{i}")));
            let hv: Vec<&str> = (1..=m).map(|i| names[n + i - 1].as_str()).chain(names[..n].iter().map(|s| s.as_str())).collect();
            let h = p1wedge::gwformulas::equivariant::relabel(&h.series, &hv).unwrap();
            let h = h.embed(g.series.vars()).unwrap().negate_t_coeffs();
            assert!(g.series.agrees_with(&h), "{mu:?} n={n} m={m}");
        }
    }
}

#[test]
fn eq_cap_degree_bound() {
    for mu in [vec![1], vec![2], vec![1, 1]] {
        for (n, m) in [(1, 0), (2, 0), (0, 1), (1, 1)] {
            let g = eq_cap_gf(&mu, n, m, 3).unwrap();
            assert!(g.t_degree().is_some(), "{mu:?} n={n} m={m}");
            // each A* factor contributes at most its w-exponent plus one
            for (e, c) in g.series.terms() {
                let bound = (n as i64 - 1).max(0) + e[n..].iter().map(|x| x + 1).sum::<i64>();
                assert!(c.max_exp().unwrap_or(0) <= bound, "{mu:?} n={n} m={m} at {e:?}");
            }
        }
    }
}

#[test]
fn eq_cap_infinity_drops_positive_energy() {
    // only k ≤ 0 terms of A(z) reach the vacuum, so the result is a series
    // in z with no contribution from E_k, k > d
    let g = eq_cap_infinity_gf(&[1], 1, 0, 4).unwrap();
    assert!(g.t_degree().is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn cap_tube_compatibility(pos in prop::collection::vec(1i64..=3, 1..=2), negs in prop::collection::vec(-2i64..=-1, 0..=2), ks in prop::collection::vec(0u32..=3, 0..=2)) {
        let mut mu = pos.clone();
        mu.extend(&negs);
        let d: i64 = mu.iter().sum();
        prop_assume!((1..=3).contains(&d));
        let ones = vec![1; d as usize];
        let tube = tube_invariant(&ContactData::stationary(&mu, &ones, &ks)).unwrap();
        let cap = cap_invariant(&ContactData::stationary(&mu, &[], &ks)).unwrap();
        prop_assert_eq!(tube, cap * factorial(d as u64));
    }

    #[test]
    fn one_point_parity(pos in prop::collection::vec(1i64..=3, 1..=2), negs in prop::collection::vec(-2i64..=-1, 0..=2), nu_extra in 0i64..=1) {
        let mut mu = pos.clone();
        mu.extend(&negs);
        let d: i64 = mu.iter().sum();
        prop_assume!(d >= 1);
        let nu = if nu_extra == 1 && d > 1 { vec![d - 1, 1] } else { vec![d] };
        let f = one_point_tube_connected(&ContactData::stationary(&mu, &nu, &[]), 7).unwrap();
        // z-exponents have the parity of the number of positive parts minus one
        let parity = (pos.len() + nu.len() + 1) as i64 % 2;
        for (e, c) in f.terms() {
            prop_assert!(e[0].rem_euclid(2) == parity || c.is_zero());
        }
    }

    #[test]
    fn symmetric_in_negatives(b in prop::collection::vec(-2i64..=-1, 2..=3), a in 1i64..=5) {
        let sum: i64 = b.iter().sum();
        prop_assume!(a + sum > 0);
        let mut rev = b.clone();
        rev.reverse();
        let mut mu = vec![a];
        mu.extend(&b);
        let mut mu2 = vec![a];
        mu2.extend(&rev);
        let d = a + sum;
        let ones = vec![1; d as usize];
        let x = tube_invariant(&ContactData::stationary(&mu, &ones, &[1])).unwrap();
        let y = tube_invariant(&ContactData::stationary(&mu2, &ones, &[1])).unwrap();
        prop_assert_eq!(x, y);
    }
}

#[test]
fn vev_of_cap_operator_list() {
    // brute-force evaluation of the cap operator list for μ = (1, 1), τ_0
    let ops = vec![Op::Alpha(1), Op::Alpha(1), Op::ECoeff(0, 0), Op::Alpha(-1), Op::Alpha(-1)];
    assert_eq!(vev(&ops, None).unwrap() / q(2), frac(47, 24));
}
