use p1wedge::exactseries::{q, Rational};
use p1wedge::fock::{
    bilinear_terms, charge, energy, fermion_bilinear, inner, partitions_of, partitions_up_to, FockVector, HalfInt,
    Partition,
};
use proptest::prelude::*;

fn p(v: &[u32]) -> Partition {
    Partition::new(v.to_vec()).unwrap()
}

fn h(twice: i64) -> HalfInt {
    HalfInt::from_twice(twice).unwrap()
}

#[test]
fn bilinear_examples() {
    assert_eq!(fermion_bilinear(h(1), h(-1), &p(&[])), Some((p(&[1]), 1)));
    for k in 1..6 {
        assert_eq!(fermion_bilinear(h(-(2 * k - 1)), h(-(2 * k - 1)), &p(&[])), None);
    }
    assert_eq!(fermion_bilinear(h(-1), h(1), &p(&[1])), Some((p(&[]), 1)));
}

#[test]
fn diagonal_bilinear() {
    // v_(1): occupied positive {1/2}, vacant negative {-1/2}
    assert_eq!(fermion_bilinear(h(1), h(1), &p(&[1])), Some((p(&[1]), 1)));
    assert_eq!(fermion_bilinear(h(-1), h(-1), &p(&[1])), Some((p(&[1]), -1)));
    assert_eq!(fermion_bilinear(h(3), h(3), &p(&[1])), None);
}

#[test]
fn wedge_sign() {
    // move 1/2 to 5/2 in v_(1,1) = 1/2 ∧ -1/2 ∧ -5/2 ...: stays sorted, sign +
    assert_eq!(fermion_bilinear(h(5), h(1), &p(&[1, 1])), Some((p(&[3, 1]), 1)));
    // move -1/2 to 5/2: passes 1/2, sign -
    let (target, sign) = fermion_bilinear(h(5), h(-1), &p(&[1, 1])).unwrap();
    assert_eq!(target, p(&[3, 2]));
    assert_eq!(sign, -1);
}

#[test]
fn energies() {
    assert_eq!(energy(&p(&[])), 0);
    assert_eq!(energy(&p(&[3, 1])), 4);
    assert_eq!(energy(&p(&[1, 1, 1])), 3);
}

#[test]
fn inner_products() {
    let vac: FockVector<Rational> = FockVector::vacuum();
    assert_eq!(inner(&vac, &vac), q(1));
    let a: FockVector<Rational> = FockVector::basis(p(&[1]));
    let b: FockVector<Rational> = FockVector::basis(p(&[2]));
    assert_eq!(inner(&a, &b), q(0));
    let c = a.scale(&q(2)).add(&vac.scale(&q(3)));
    assert_eq!(inner(&c, &a), q(2));
}

#[test]
fn partition_counts() {
    let counts = [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42, 56, 77];
    for (n, c) in counts.iter().enumerate() {
        assert_eq!(partitions_of(n as u64).len(), *c);
    }
}

#[test]
fn partition_validation_and_json() {
    assert!(Partition::new(vec![1, 2]).is_err());
    assert_eq!(p(&[2, 1, 0]), p(&[2, 1]));
    let s = serde_json::to_string(&p(&[3, 1])).unwrap();
    assert_eq!(s, "[3,1]");
    let back: Partition = serde_json::from_str("[3,1]").unwrap();
    assert_eq!(back, p(&[3, 1]));
    assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
}

#[test]
fn maya_roundtrip_to_twelve() {
    for l in partitions_up_to(12) {
        let m = l.maya();
        assert_eq!(m.occupied_positive.len(), m.vacant_negative.len());
        assert_eq!(Partition::from_maya(&m).unwrap(), l);
        // energy = sum of occupied positives minus sum of vacant negatives
        let e: Rational = m.occupied_positive.iter().map(|x| x.value()).sum::<Rational>()
            - m.vacant_negative.iter().map(|x| x.value()).sum::<Rational>();
        assert_eq!(e, q(l.size() as i64));
    }
}

#[test]
fn reachable_states_have_charge_zero() {
    let mut frontier = vec![p(&[])];
    let mut seen = std::collections::BTreeSet::new();
    while let Some(l) = frontier.pop() {
        if l.size() > 7 || !seen.insert(l.clone()) {
            continue;
        }
        assert_eq!(charge(&l), 0);
        for j in -3..=3 {
            for t in bilinear_terms(&l, j).iter() {
                frontier.push(t.target.clone());
            }
        }
    }
    assert_eq!(seen.len(), partitions_up_to(7).len());
}

fn arb_partition(max: u64) -> impl Strategy<Value = Partition> {
    (0..=max).prop_flat_map(|n| {
        let all = partitions_of(n);
        (0..all.len()).prop_map(move |i| all[i].clone())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bilinear_adjointness(l in arb_partition(8), a in -9i64..9, b in -9i64..9) {
        let (a, b) = (h(2 * a + 1), h(2 * b + 1));
        if let Some((mu, s)) = fermion_bilinear(a, b, &l) {
            prop_assert_eq!(fermion_bilinear(b, a, &mu), Some((l.clone(), s)));
        }
    }

    #[test]
    fn bilinear_terms_match_pointwise(l in arb_partition(8), j in -4i64..=4) {
        for t in bilinear_terms(&l, j).iter() {
            let a = HalfInt::from_twice(t.k.twice() - 2 * j).unwrap();
            let got = fermion_bilinear(a, t.k, &l);
            prop_assert_eq!(got, Some((t.target.clone(), t.sign)));
            prop_assert_eq!(t.target.size() as i64, l.size() as i64 - j);
        }
    }
}
