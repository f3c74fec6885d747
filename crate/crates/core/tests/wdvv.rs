use p1wedge::exactseries::{frac, q, rational};
use p1wedge::gwformulas::{connected_tube_invariant, tube_invariant, ContactData};
use p1wedge::johnson::{default_samples, relative_via_limit};
use p1wedge::wdvv::*;
use p1wedge::Error;

fn z(i: i64) -> BasisClass {
    BasisClass::zero(i)
}

fn inf(i: i64) -> BasisClass {
    BasisClass::inf(i)
}

fn family() -> Vec<(i64, Vec<i64>, i64)> {
    family_members(4, 3, 3)
}

#[test]
fn documented_values() {
    assert_eq!(i_d(&[z(2), inf(2)], 2).unwrap(), frac(1, 2));
    assert_eq!(i_d(&[z(3), z(-1), inf(2)], 2).unwrap(), q(1));
    assert_eq!(i_d(&[z(4), z(-1), z(-1), inf(2)], 2).unwrap(), q(2));
    assert_eq!(wdvv_residual(2, &[-1], 1).unwrap(), q(0));
    assert_eq!(wdvv_residual(3, &[-1, -1], 1).unwrap(), q(0));
}

#[test]
fn vanishing_rules() {
    // contact orders do not add up to the degree
    assert_eq!(i_d(&[z(3), inf(2)], 2).unwrap(), q(0));
    // dimension: each interior marking needs one H
    assert_eq!(i_d(&[z(2), inf(2), BasisClass::h(), BasisClass::one()], 2).unwrap(), q(0));
    assert_eq!(i_d(&[z(2), inf(2), BasisClass::h(), BasisClass::h()], 2).unwrap(), q(2));
    // divisor rule
    assert_eq!(i_d(&[z(3), z(-1), inf(2), BasisClass::h()], 2).unwrap(), q(2));
    assert_eq!(i_d(&[z(3), BasisClass::h(), inf(3)], 3).unwrap(), q(1));
    // mirror image of the family
    assert_eq!(i_d(&[inf(4), inf(-1), inf(-1), z(2)], 2).unwrap(), q(2));
}

#[test]
fn outside_family_is_unsupported() {
    // negative contact on both sides
    let r = i_d(&[z(2), z(-1), inf(2), inf(-1)], 1);
    assert!(matches!(r, Err(Error::Unsupported(_))), "{r:?}");
}

#[test]
fn pairing_and_duals() {
    let basis = BasisClass::basis(3);
    for a in &basis {
        assert_eq!(a.dual().dual(), *a);
        for b in &basis {
            assert_eq!(pairing(a, b), i64::from(*b == a.dual()));
        }
    }
    assert!(matches!(BasisClass::new(0, Label::Bold0), Err(Error::Domain(_))));
    assert!(matches!(BasisClass::new(2, Label::H), Err(Error::Domain(_))));
}

#[test]
fn closed_form_by_recursion() {
    for (a, b, d) in family() {
        let expect = rational::pow(&q(d), b.len() as i64 - 1);
        assert_eq!(family_value(a, &b, d).unwrap(), expect, "a={a} b={b:?} d={d}");
        if !b.is_empty() {
            assert_eq!(wdvv_residual(a, &b, d).unwrap(), q(0), "a={a} b={b:?} d={d}");
        }
    }
}

/// Bumping any invariant that actually contributes breaks the equation.
#[test]
fn residual_detects_perturbation() {
    for (a, b, d) in [(2, vec![-1], 1), (3, vec![-1, -1], 1), (5, vec![-2, -1], 2)] {
        let inst = WdvvInstance::for_family(a, &b, d).unwrap();
        let (l, r) = inst.terms();
        let mut ev = Evaluator::closed_form();
        let mut configs: Vec<Config> = l.iter().chain(&r).flat_map(|t| [t.left.clone(), t.right.clone()]).collect();
        configs.sort();
        configs.dedup();
        assert!(!configs.is_empty());
        for target in configs {
            let res = inst
                .residual(&mut |c| Ok(ev.eval(c)? + if *c == target { q(1) } else { q(0) }))
                .unwrap();
            assert_ne!(res, q(0), "{target}");
        }
    }
}

#[test]
fn agrees_with_closed_forms_and_johnson() {
    for (a, b, d) in family() {
        if b.len() > 2 || d > 3 {
            continue;
        }
        let mu0 = [vec![a], b.clone()].concat();
        let cd = ContactData::stationary(&mu0, &[d], &[]);
        let v = family_value(a, &b, d).unwrap();
        assert_eq!(tube_invariant(&cd).unwrap(), v, "{mu0:?}");
        assert_eq!(connected_tube_invariant(&cd).unwrap(), v, "{mu0:?}");
        if b.len() <= 1 {
            let (lim, _) = relative_via_limit(&cd, &default_samples(&cd, 3).unwrap()).unwrap();
            assert_eq!(lim, v, "{mu0:?}");
        }
    }
}

#[test]
fn two_ways_agree() {
    for (a, b) in [(3, vec![-1]), (4, vec![-1, -2]), (5, vec![-2, -1]), (6, vec![-1, -1, -2]), (7, vec![-3, -1, -2])] {
        for r in [5, 8] {
            assert_eq!(first_way(a, &b, r).unwrap(), second_way(a, &b).unwrap(), "{a} {b:?}");
        }
    }
}
