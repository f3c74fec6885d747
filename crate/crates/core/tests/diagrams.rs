use p1wedge::diagrams::*;
use p1wedge::exactseries::{frac, q, Rational};
use p1wedge::gwformulas::coeff_cp;
use p1wedge::wedgeops::{apply, basis_up_to, WedgeOperator};
use p1wedge::Error;
use proptest::prelude::*;

type Op = WedgeOperator<Rational>;

fn diagram(n: usize, edges: &[(usize, usize)]) -> InteractionDiagram {
    InteractionDiagram::new((1..=n).collect(), edges.to_vec()).unwrap()
}

fn same_on_basis(a: &Op, b: &Op, cap: u64, reach: u64) -> bool {
    basis_up_to::<Rational>(cap).into_iter().all(|(_, v)| apply(a, &v, reach).unwrap() == apply(b, &v, reach).unwrap())
}

#[test]
fn four_factor_example() {
    // R_{1}, R_{0}, R_{0}, R_{-1}: the subscript is minus the r-energy
    let k = enumerate_k(&[-1, 0, 0, 1]).unwrap();
    let expect = vec![
        diagram(4, &[(2, 1), (3, 2), (4, 3)]),
        diagram(4, &[(2, 1), (4, 2)]),
        diagram(4, &[(3, 1), (4, 3)]),
        diagram(4, &[(4, 1)]),
    ];
    let mut sorted = expect.clone();
    sorted.sort();
    assert_eq!(k, sorted);
    let exprs: Vec<String> = expect.iter().map(|j| bracket_expression(j, 4).unwrap()).collect();
    assert_eq!(exprs, ["[O1,[O2,[O3,O4]]]", "[O1,[O2,O4]]·O3", "[O1,[O3,O4]]·O2", "[O1,O4]·O2·O3"]);
    let connected: Vec<_> = k.iter().filter(|j| j.is_connected()).collect();
    assert_eq!(connected, vec![&expect[0]]);
    let names: Vec<GradedOp<Expr>> =
        [-1, 0, 0, 1].iter().enumerate().map(|(i, k)| GradedOp::new(Expr(format!("O{}", i + 1)), *k, 0)).collect();
    assert_eq!(g_n_connected(&names).unwrap().0, "[O1,[O2,[O3,O4]]]");
}

#[test]
fn base_cases() {
    assert_eq!(enumerate_k(&[0, 0, 0]).unwrap(), vec![InteractionDiagram::edgeless(3)]);
    let free: Vec<GradedOp<FreeElement>> = (0..3).map(|i| GradedOp::new(FreeElement::letter(i), 0, 0)).collect();
    let prod = f_n(&free).unwrap();
    assert_eq!(prod.terms().len(), 1);
    assert_eq!(prod.terms().get(&vec![0, 1, 2]), Some(&1));
    // a positive first factor kills everything
    let lead: Vec<GradedOp<FreeElement>> =
        [1, -1, 0].iter().enumerate().map(|(i, k)| GradedOp::new(FreeElement::letter(i as u8), *k, 0)).collect();
    assert!(f_n(&lead).unwrap().terms().is_empty());
    assert!(enumerate_k(&[1, -1, 0]).unwrap().is_empty());
    assert!(matches!(f_n(&lead[..2].iter().cloned().chain([GradedOp::new(FreeElement::letter(2), 1, 0)]).collect::<Vec<_>>()), Err(Error::Domain(_))));
    // a single operator of r-energy zero
    let single = [GradedOp::new(Op::ECoeff(2, 1), 0, -2)];
    assert_eq!(g_n_connected(&single).unwrap(), Op::Sum(vec![Op::ECoeff(2, 1)]));
}

#[test]
fn readout_small_cases() {
    let ops = [Op::Alpha(1), Op::ECoeff(-1, 0)];
    assert_eq!(l_of_j(&diagram(2, &[]), &ops).unwrap(), Op::Product(ops.to_vec()));
    assert_eq!(l_of_j(&diagram(2, &[(2, 1)]), &ops).unwrap(), Op::commutator(ops[0].clone(), ops[1].clone()));
    assert!(matches!(InteractionDiagram::new(vec![1, 2], vec![(1, 2)]), Err(Error::Domain(_))));
    assert!(matches!(InteractionDiagram::new(vec![1, 2, 3], vec![(3, 1), (3, 2)]), Err(Error::Domain(_))));
    assert!(matches!(InteractionDiagram::new(vec![1, 2], vec![(3, 1)]), Err(Error::Domain(_))));
}

#[test]
fn json_shape() {
    let j = diagram(3, &[(3, 1)]);
    let s = serde_json::to_string(&j).unwrap();
    assert_eq!(s, r#"{"vertices":[1,2,3],"edges":[[3,1]]}"#);
    let back: InteractionDiagram = serde_json::from_str(&s).unwrap();
    assert_eq!(back, j);
}

#[test]
fn diagram_count() {
    for n in 1..=5 {
        let f: usize = (1..=n).product();
        assert_eq!(all_diagrams(n).len(), f);
    }
}

/// Validity agrees with the diagrams the recursion actually records, and the
/// graph sum reproduces `F_n` in the free algebra, for every signature with
/// n ≤ 5 and |k| ≤ 2.
#[test]
fn recursion_and_graph_sum_free() {
    for n in 1..=5 {
        for sig in signatures(n, 2) {
            assert_eq!(enumerate_k(&sig).unwrap(), k_by_recursion(&sig), "{sig:?}");
            assert!(verify_graph_sum_free(&sig).unwrap(), "{sig:?}");
        }
    }
}

#[test]
fn key_lemma_and_factorization() {
    for n in 1..=5 {
        for sig in signatures(n, 2) {
            assert!(verify_key_lemma(&sig).unwrap(), "{sig:?}");
        }
        assert!(verify_factorization(n).unwrap());
    }
}

#[test]
fn positive_prefix_vanishes() {
    for n in 2..=5 {
        for sig in signatures(n, 2) {
            let mut acc = 0;
            if sig.iter().any(|k| {
                acc += k;
                acc > 0
            }) {
                assert!(enumerate_k(&sig).unwrap().is_empty(), "{sig:?}");
            }
        }
    }
}

#[test]
fn graph_sum_on_wedge_operators() {
    for n in 2..=4 {
        for sig in signatures(n, 1) {
            let res: Vec<i64> = (0..n as i64).map(|i| i % 2).collect();
            assert!(verify_graph_sum(&sample_ops(&sig, &res, 2), 2).unwrap(), "{sig:?}");
        }
    }
}

#[test]
fn connected_sum_over_types() {
    // F_n = Σ_P ∏_i G(O_{P_i}) in the free algebra
    for n in 1..=5 {
        for sig in signatures(n, 2) {
            let ops: Vec<GradedOp<FreeElement>> =
                sig.iter().enumerate().map(|(i, k)| GradedOp::new(FreeElement::letter(i as u8), *k, 0)).collect();
            let mut terms = Vec::new();
            for p in p1wedge::combinat::set_partitions(n) {
                let factors: Vec<FreeElement> = p
                    .iter()
                    .map(|b| g_n_connected(&b.iter().map(|i| ops[*i].clone()).collect::<Vec<_>>()).unwrap())
                    .collect();
                terms.push(FreeElement::product(factors));
            }
            assert_eq!(FreeElement::sum(terms), f_n(&ops).unwrap(), "{sig:?}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Validity never looks past the r-energy labels.
    #[test]
    fn validity_is_label_only(sig_idx in 0usize..1000, res in prop::collection::vec(-3i64..=3, 5)) {
        let sigs = signatures(4, 2);
        let sig = &sigs[sig_idx % sigs.len()];
        let a = sample_ops(sig, &res[..4], 3);
        let b = sample_ops(sig, &[0, 0, 0, 0], 5);
        let labels = |ops: &[GradedOp<Op>]| ops.iter().map(|o| o.r_energy).collect::<Vec<_>>();
        prop_assert_eq!(enumerate_k(&labels(&a)).unwrap(), enumerate_k(&labels(&b)).unwrap());
    }

    #[test]
    fn brackets_add_gradings(k1 in -2i64..=2, b1 in -2i64..=2, k2 in -2i64..=2, b2 in -2i64..=2) {
        let x = GradedOp::new(Op::ECoeff(-(3 * k1 + b1), 0), k1, b1);
        let y = GradedOp::new(Op::ECoeff(-(3 * k2 + b2), 0), k2, b2);
        let z = x.bracket(&y);
        prop_assert_eq!((z.r_energy, z.residual), (k1 + k2, b1 + b2));
        if let Some(e) = z.op.energy_delta() {
            prop_assert_eq!(e, 3 * (k1 + k2) + b1 + b2);
        }
    }
}

// ---------- the large-r lemma ----------

#[test]
fn lemma_single_factor() {
    // L2 raises by one more than L1 lowers, minus the age
    for (a, l1, l2) in [(2, 1, -3), (0, 1, -1), (-1, 2, -1)] {
        let rep = verify_lemma_basic(&[a], 9, &Op::Alpha(l1), &Op::Alpha(l2), 3).unwrap();
        assert!(rep.pass(), "{a}");
        assert!(rep.coefficients.iter().any(|c| c.lhs != "0"), "{a}");
    }
}

#[test]
fn lemma_zero_ages() {
    let l1 = Op::Product(vec![Op::Alpha(1), Op::Alpha(1)]);
    let l2 = Op::scaled_q(frac(1, 2), Op::Product(vec![Op::Alpha(-1), Op::Alpha(-1)]));
    let rep = verify_lemma_basic(&[0, 0], 7, &l1, &l2, 4).unwrap();
    assert!(rep.pass());
    assert!(rep.coefficients.iter().any(|c| c.lhs != "0"));
}

#[test]
fn lemma_negative_ages() {
    for r in [7, 8] {
        let rep = verify_lemma_basic(&[-1, -1], r, &Op::Alpha(3), &Op::Alpha(-1), 3).unwrap();
        assert!(rep.pass(), "r = {r}");
        assert!(rep.coefficients.iter().any(|c| c.lhs != "0"));
    }
}

#[test]
fn lemma_mixed_ages() {
    let l2 = Op::Product(vec![Op::Alpha(-1), Op::Alpha(-2)]);
    for r in [9, 10] {
        let rep = verify_lemma_basic(&[2, -1], r, &Op::Alpha(2), &l2, 2).unwrap();
        assert!(rep.pass(), "r = {r}");
        assert!(rep.coefficients.iter().any(|c| c.lhs != "0"));
    }
}

#[test]
fn lemma_rejects_small_r() {
    assert!(matches!(verify_lemma_basic(&[2, -2], 4, &Op::Alpha(1), &Op::Alpha(-1), 1), Err(Error::Domain(_))));
}

/// The `y_1 ⋯ y_m` coefficient of a block of negative ages is
/// `C_P(r) E_{|b|}[0]` with `C_P` from the closed form.
#[test]
fn block_coefficient_matches_coeff_cp() {
    for b in [vec![-1, -1], vec![-1, -2], vec![-2, -1]] {
        for r in [7, 9] {
            let op = block_coefficient(&b, &vec![1; b.len()], r).unwrap();
            let c = coeff_cp(&b, &q(r)).unwrap();
            let sum: i64 = b.iter().sum();
            let expect = Op::scaled_q(c, Op::ECoeff(sum, 0));
            assert!(same_on_basis(&op, &expect, 4, 4 + 2 * r as u64 + 4), "{b:?} r={r}");
        }
    }
}
