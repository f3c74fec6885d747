use p1wedge::exactseries::{frac, q, Rational};
use p1wedge::gwformulas::{cap_invariant, tube_invariant, ContactData};
use p1wedge::johnson::*;
use p1wedge::wedgeops::{apply, basis_up_to, WedgeOperator};
use p1wedge::{Error, TPoly};
use proptest::prelude::*;

type Op = WedgeOperator<Rational>;

fn t0(r: i64, s: i64, d: i64, left: &[(i64, i64)], right: &[(i64, i64)]) -> OrbifoldRequest {
    OrbifoldRequest {
        r,
        s,
        d,
        left: left.iter().map(|(a, k)| AgeInsertion::new(*a, *k)).collect(),
        right: right.iter().map(|(a, k)| AgeInsertion::new(*a, *k)).collect(),
        mode: JohnsonMode::TZero,
        with_exp_r: false,
    }
}

fn value(req: &OrbifoldRequest) -> Rational {
    orbifold_bracket(req).unwrap().fold().unwrap().coeff(0)
}

fn closed(cd: &ContactData) -> Rational {
    if cd.mu_inf.is_empty() {
        cap_invariant(cd).unwrap()
    } else {
        tube_invariant(cd).unwrap()
    }
}

fn same_on_basis(a: &Op, b: &Op, energy: u64) {
    for (l, v) in basis_up_to::<Rational>(energy) {
        assert_eq!(apply(a, &v, energy + 8).unwrap(), apply(b, &v, energy + 8).unwrap(), "on {l:?}");
    }
}

#[test]
fn small_cap_bracket() {
    // ⟨A_{1/2}[0] A_{0/2}[0] P_1 e^{α_{-1}}⟩ = ⟨α_1 E_0[0] α_{-1}⟩
    let req = t0(2, 1, 1, &[(1, 0), (0, 0)], &[]);
    assert_eq!(value(&req), frac(23, 24));
}

#[test]
fn degree_mismatch_is_zero() {
    let req = t0(3, 1, 2, &[(1, 0), (0, 0)], &[]);
    assert_eq!(value(&req), q(0));
    let mut full = req.clone();
    full.mode = JohnsonMode::Full;
    assert_eq!(orbifold_bracket(&full).unwrap().fold().unwrap(), TPoly::default());
}

#[test]
fn age_out_of_range() {
    let zero = || q(0);
    assert!(matches!(build_a_over_r::<Rational>(3, 3, 0, 0, 2, JohnsonMode::TZero, zero), Err(Error::Domain(_))));
    let req = t0(3, 1, 1, &[(4, 0)], &[]);
    assert!(matches!(orbifold_bracket(&req), Err(Error::Domain(_))));
}

#[test]
fn leading_terms() {
    let zero = || q(0);
    // positive age: the i = 0 summand at z^1 is α_a / a
    for (a, r) in [(1, 3), (2, 5), (3, 4)] {
        let op = build_a_over_r::<Rational>(a, r, 0, 0, 2, JohnsonMode::TZero, zero).unwrap().coefficient(0).unwrap();
        same_on_basis(&op, &Op::scaled_q(frac(1, a), Op::Alpha(a)), 5);
    }
    // zero age at t = 0: the r-energy zero summand is E_0(z)
    for k in 0..=3 {
        let op = build_a_over_r::<Rational>(0, 4, 0, 0, k + 2, JohnsonMode::TZero, zero).unwrap().coefficient(k).unwrap();
        same_on_basis(&op, &Op::ECoeff(0, k), 5);
    }
    // at t = 0 the zero-age operator has no negative-index summands
    let a = build_a_over_r::<Rational>(0, 4, -3, -1, 4, JohnsonMode::TZero, zero).unwrap();
    assert!(a.terms.is_empty());
}

#[test]
fn exp_r_factor_is_inert_for_large_r() {
    for cd in [
        ContactData::stationary(&[2, -1], &[1], &[0]),
        ContactData::stationary(&[1, 1], &[2], &[2]),
        ContactData::stationary(&[3, -1], &[], &[1, 0]),
    ] {
        let d = cd.degree().unwrap();
        for mode in [JohnsonMode::TZero, JohnsonMode::Full] {
            let mut req = request_for(&cd, d + 2, mode).unwrap();
            let a = orbifold_bracket(&req).unwrap();
            req.with_exp_r = true;
            let b = orbifold_bracket(&req).unwrap();
            assert_eq!(a.fold().unwrap(), b.fold().unwrap());
        }
    }
}

#[test]
fn limit_example() {
    let cd = ContactData::stationary(&[2, -1], &[1], &[]);
    let (v, fit) = relative_via_limit(&cd, &[3, 4, 5]).unwrap();
    assert_eq!(v, q(1));
    assert_eq!(fit.coeffs, vec![q(1)]);
    assert!(matches!(relative_via_limit(&cd, &[1, 4, 5]), Err(Error::Domain(_))));
}

#[test]
fn limit_matches_closed_form() {
    for (mu0, mu_inf, ks) in [
        (vec![1], vec![1], vec![0u32]),
        (vec![3, -1, -1], vec![2, -1], vec![2]),
        (vec![2, 1, -1], vec![], vec![2, 0]),
        (vec![2, 2, -2], vec![1, 1], vec![1, 1]),
    ] {
        let cd = ContactData::stationary(&mu0, &mu_inf, &ks);
        let samples = default_samples(&cd, 5).unwrap();
        let (v, fit) = relative_via_limit(&cd, &samples).unwrap();
        assert_eq!(v, closed(&cd), "{mu0:?}|{mu_inf:?} {ks:?}");
        assert_eq!(fit.coeffs.len(), 1, "stationary brackets are r-independent");
    }
}

#[test]
fn lagrange_recovers_polynomial() {
    let xs: Vec<Rational> = (2..6).map(q).collect();
    let ys: Vec<Rational> = xs.iter().map(|x| x * x * q(3) - x + frac(1, 2)).collect();
    assert_eq!(lagrange(&xs, &ys), vec![frac(1, 2), q(-1), q(3)]);
}

#[test]
fn full_mode_folds_and_specializes() {
    for (mu0, mu_inf, ks) in [
        (vec![2, -1], vec![1], vec![]),
        (vec![3, -1, -1], vec![2, -1], vec![2u32]),
        (vec![2, 1, -1], vec![2], vec![2, 0]),
        (vec![1, 1], vec![], vec![1]),
    ] {
        let cd = ContactData::stationary(&mu0, &mu_inf, &ks);
        for r in 4..=5 {
            let full = orbifold_bracket(&request_for(&cd, r, JohnsonMode::Full).unwrap()).unwrap();
            let folded = full.fold().expect("fractional exponents cancel");
            let zero = value(&request_for(&cd, r, JohnsonMode::TZero).unwrap());
            assert_eq!(folded.coeff(0), zero, "{mu0:?}|{mu_inf:?} r={r}");
        }
    }
}

#[test]
fn fractional_residue_detected() {
    // unbalanced ages leave a fractional exponent; the bracket is zero so the
    // fold is harmless, but the monomial itself is not integral
    let mut req = t0(3, 1, 1, &[(2, 0)], &[]);
    req.mode = JohnsonMode::Full;
    let v = orbifold_bracket(&req).unwrap();
    assert!(!v.monomial.is_integral());
    assert!(v.fold().unwrap() == TPoly::default());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn r_independent(pos in prop::collection::vec(1i64..=3, 1..=2), negs in prop::collection::vec(-2i64..=-1, 0..=1), k in 0u32..=3, right_split in any::<bool>()) {
        let mut mu0 = pos.clone();
        mu0.extend(&negs);
        let d: i64 = mu0.iter().sum();
        prop_assume!((1..=3).contains(&d));
        let mu_inf = if right_split && d > 1 { vec![d - 1, 1] } else { vec![d] };
        let cd = ContactData::stationary(&mu0, &mu_inf, &[k]);
        let expect = closed(&cd);
        for r in default_samples(&cd, 3).unwrap() {
            prop_assert_eq!(normalized_bracket(&cd, r).unwrap(), expect.clone());
        }
    }
}
