use suffcause::covinf::{
    check_thm5_premises, check_thm6_premises, monotone_expectation_premise, theorem4, transfer_sign, Assertion,
    Assertions, CovQuantity, Relation, RepFacts, TransferNodes,
};
use suffcause::expansion::{expand_structure, stratum_conditioning_set, stratum_independent, stratum_open_path};
use suffcause::fixtures::load;
use suffcause::graph::Dag;
use suffcause::oracle::{conditional_covariance, conditional_independent, random_instance_with, InstanceConstraints};
use suffcause::rational::{ratio, Prob};
use suffcause::scm::{ResponseTable, Scm};
use suffcause::signs::{qualitative_cov_sign, Sign};
use suffcause::sufficient::{
    enumerate_msc_over_events, is_determinative, is_nonredundant, reduce_to_nonredundant, BoolExpr, CoCause,
    Conjunction, EventSystem, Literal, Representation,
};
use suffcause::sweep::{derive_two_parent, transfer_conclusions};

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nodes(d: &str, e1: &str, e2: &str, f: &str, g: &str, q: &[&str]) -> TransferNodes {
    TransferNodes {
        d: d.into(),
        e1: e1.into(),
        e2: e2.into(),
        f: f.into(),
        g: g.into(),
        q: q.iter().map(|s| s.to_string()).collect(),
    }
}

#[test]
fn figure1_structure() {
    let g = load("fig1").unwrap().graph;
    let mut anc = g.ancestors("B1").unwrap();
    anc.sort();
    assert_eq!(anc, vec!["E1", "F", "GB", "GP", "P1"]);
    assert!(!g.d_separated(&["P2"], &["B1"], &[]).unwrap());
    assert!(!g.d_separated(&["P2"], &["B1"], &["P1"]).unwrap());
}

#[test]
fn figure1_gb_cannot_be_marginalized() {
    // GB points into both B1 and B2, so it is a common cause of two
    // remaining nodes and marginalizing it is not allowed.
    let g = load("fig1").unwrap().graph;
    assert!(!g.can_marginalize(&["GB"]).unwrap());
    assert!(g.marginalize(&["GB"]).is_err());
}

#[test]
fn figure1_sign_equality_fails_for_b1_p2() {
    let g = load("fig1").unwrap().graph;
    let p = check_thm5_premises(&g, &nodes("P1", "E1", "GP", "B1", "P2", &[]), None, &Assertions::default()).unwrap();
    assert!(!p.holds());
    assert!(p.failures().iter().any(|c| c.contains("B1")), "{:?}", p.failures());
}

#[test]
fn null_graph_witness_path() {
    // under the null hypothesis the only open path given P1 is the one through E1
    let g = load("fig7").unwrap().graph;
    let idx = |n: &str| g.index(n).unwrap();
    let p = g.open_path(&[idx("P2")], &[idx("B1")], &[idx("P1")]).unwrap().unwrap();
    assert_eq!(p.render(&g), "P2 <- GP -> P1 <- E1 -> B1");
    let p = g.open_path(&[idx("P2")], &[idx("B1")], &[]).unwrap().unwrap();
    assert_eq!(p.render(&g), "P2 <- GP -> P1 -> B1");
}

fn rep_of(m: &suffcause::model::ModelFile, d: &str) -> Representation {
    m.representation(d).unwrap().clone()
}

#[test]
fn figure2_expansions_and_strata() {
    let m = load("fig2_i").unwrap();
    let e = expand_structure(&m.graph, "D", &rep_of(&m, "D")).unwrap();
    assert_eq!(stratum_conditioning_set(&e, 0), vec!["D", "E1*E2", "E3*E4"]);
    assert_eq!(stratum_conditioning_set(&e, 1), vec!["D"]);
    for (a, b) in [("E1", "E3"), ("E1", "E4"), ("E2", "E3"), ("E2", "E4")] {
        assert!(stratum_independent::<&str>(&e, a, b, &[], 0).unwrap(), "{a} {b}");
    }
    // marginalizing the AND nodes gives back the original parents of D
    let back = e.graph.marginalize(&e.auxiliary_nodes()).unwrap();
    let d = back.index("D").unwrap();
    assert_eq!(back.parents(d).len(), 4);

    // exact enumeration agrees
    let dist = m.scm().unwrap().joint_distribution().unwrap();
    assert!(conditional_independent(&dist, &["E1"], &["E3"], &[], &[("D", 0)]).unwrap());

    let m = load("fig2_iii").unwrap();
    let e = expand_structure(&m.graph, "D", &rep_of(&m, "D")).unwrap();
    assert_eq!(e.and_nodes, vec!["E1*E2", "A*~E2"]);
    assert!(!stratum_independent::<&str>(&e, "E1", "A", &[], 0).unwrap());
    assert!(!stratum_independent::<&str>(&e, "E1", "E2", &[], 0).unwrap());
    assert!(!stratum_independent::<&str>(&e, "E2", "A", &[], 0).unwrap());
    let p = stratum_open_path::<&str>(&e, "E1", "A", &[], 0).unwrap().unwrap();
    assert_eq!(p.render(&e.graph), "E1 -> E1*E2 <- E2 -> A*~E2 <- A");
    let dist = m.scm().unwrap().joint_distribution().unwrap();
    assert!(!conditional_independent(&dist, &["E1"], &["A"], &[], &[("D", 0)]).unwrap());
}

#[test]
fn figure3_redundancy_obscures_independence() {
    let m = load("fig3_i").unwrap();
    let e = expand_structure(&m.graph, "D", &rep_of(&m, "D")).unwrap();
    assert!(stratum_independent::<&str>(&e, "A", "E", &[], 0).unwrap());

    let m = load("fig3_ii").unwrap();
    let rep = rep_of(&m, "D");
    let e = expand_structure(&m.graph, "D", &rep).unwrap();
    assert_eq!(stratum_conditioning_set(&e, 0), vec!["D", "A*B", "A*Q", "E*F"]);
    assert!(!stratum_independent::<&str>(&e, "A", "E", &[], 0).unwrap());

    // redundancy shows only once Q is read as the event B*E
    let target = BoolExpr::parse("A*B | A*B*E | E*F").unwrap();
    let cands: Vec<(&str, BoolExpr)> = ["A", "B", "E", "F"]
        .iter()
        .map(|&n| (n, BoolExpr::var(n)))
        .chain([("Q", BoolExpr::parse("B*E").unwrap())])
        .collect();
    let sys = EventSystem::new("D", &target, &cands).unwrap();
    assert!(is_determinative(&sys, &rep.terms).unwrap());
    assert!(!is_nonredundant(&sys, &rep.terms).unwrap());
    let reduced = reduce_to_nonredundant(&sys, &rep.terms).unwrap();
    let shown: Vec<String> = reduced.iter().map(|c| c.to_string()).collect();
    assert_eq!(shown, vec!["A*B", "E*F"]);
    // the exact model: A and E are in fact independent within D = 0
    let dist = m.scm().unwrap().joint_distribution().unwrap();
    assert!(conditional_independent(&dist, &["A"], &["E"], &[], &[("D", 0)]).unwrap());
}

#[test]
fn example1_conjunction_lists() {
    let a = BoolExpr::parse("B | C*E").unwrap();
    let d = BoolExpr::parse("E*F").unwrap();
    let b = BoolExpr::var("B");
    let c = BoolExpr::var("C");
    let e = BoolExpr::var("E");
    let msc = enumerate_msc_over_events(&a, &[("B", b.clone()), ("C", c.clone()), ("D", d.clone())]).unwrap();
    assert_eq!(msc.iter().map(|c| c.to_string()).collect::<Vec<_>>(), vec!["B", "C*D"]);
    let cands = [("B", b), ("C", c), ("D", d), ("E", e)];
    let msc = enumerate_msc_over_events(&a, &cands).unwrap();
    assert_eq!(msc.iter().map(|c| c.to_string()).collect::<Vec<_>>(), vec!["B", "C*D", "C*E"]);

    let sys = EventSystem::new("A", &a, &cands).unwrap();
    let terms = vec![Conjunction::of(&["B"]), Conjunction::of(&["C", "D"]), Conjunction::of(&["C", "E"])];
    assert!(!is_determinative(&sys, &terms[..2]).unwrap());
    assert!(is_determinative(&sys, &terms).unwrap());
    assert!(!is_nonredundant(&sys, &terms).unwrap());
    let reduced = reduce_to_nonredundant(&sys, &terms).unwrap();
    assert_eq!(reduced.iter().map(|c| c.to_string()).collect::<Vec<_>>(), vec!["B", "C*E"]);
}

#[test]
fn figure5_and_6_applicability() {
    let none = Assertions::default();
    for (fx, q, sign_eq) in [
        ("fig5_i", vec![], true),
        ("fig5_ii", vec![], true),
        ("fig5_iii", vec![], false),
        ("fig6_i", vec!["Q"], false),
        ("fig6_ii", vec!["Q"], false),
    ] {
        let g = load(fx).unwrap().graph;
        let n = nodes("D", "E1", "E2", "F", "G", &q);
        let p5 = check_thm5_premises(&g, &n, None, &none).unwrap();
        assert_eq!(p5.holds(), sign_eq, "{fx}: {:?}", p5.failures());
        let p6 = check_thm6_premises(&g, &n).unwrap();
        assert!(p6.holds(), "{fx}: {:?}", p6.failures());
    }
}

#[test]
fn monotone_expectation_conditions() {
    let g = load("fig5_i").unwrap().graph;
    assert!(monotone_expectation_premise(&g, "F", "E1", "D", &[]).unwrap());
    let g = load("fig5_iii").unwrap().graph;
    assert!(monotone_expectation_premise(&g, "F", "E1", "D", &[]).unwrap());
    let unsigned =
        Dag::from_edges(&["E1", "E2", "D", "F"], &[("E1", "F"), ("D", "F"), ("E1", "D"), ("E2", "D")]).unwrap();
    assert!(!monotone_expectation_premise(&unsigned, "F", "E1", "D", &[]).unwrap());
}

#[test]
fn example7_both_directions() {
    let g = load("fig7").unwrap().graph;
    for (d, e, f, gg) in [("P1", "E1", "B1", "P2"), ("P2", "E2", "B2", "P1")] {
        let mut a = Assertions::default();
        a.push(Assertion::NoSynergism { d: d.into(), x: e.into(), y: "GP".into() });
        let mut facts = RepFacts::from_assertions(d, e, "GP", &a).unwrap();
        facts.establish_parent_facts(&g, None, &a).unwrap();
        let inner = theorem4(&facts);
        let vii = inner.iter().find(|c| c.case == "two-parent (vii)").expect("case (vii)");
        assert_eq!(vii.relation, Relation::Le0);
        let p = check_thm6_premises(&g, &nodes(d, e, "GP", f, gg, &[])).unwrap();
        let out = transfer_sign(&p, vii).unwrap();
        assert_eq!(out.quantity, CovQuantity::new(f, gg, d, 1));
        assert_eq!(out.relation, Relation::Le0);
    }
}

#[test]
fn figure7_association_confirmed_by_oracle() {
    let g = load("fig7").unwrap().graph;
    assert_eq!(qualitative_cov_sign(&g, "E1", "B1").unwrap(), Sign::Positive);
    let c = InstanceConstraints::from_signed_graph(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..25 {
        let m = random_instance_with(&g, &c, &mut rng).unwrap().scm;
        let dist = m.joint_distribution().unwrap();
        assert!(!conditional_covariance(&dist, "E1", "B1", &[]).unwrap().is_negative());
    }
}

#[test]
fn inner_zero_gives_outer_zero_under_sign_equality() {
    // D = A1 E1 | A2 E2 | A3 E1 E2 with A1 == 1: Cov(E1,E2|D=0) = 0 transfers
    let g = load("fig5_i").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut c = InstanceConstraints::from_signed_graph(&g.graph);
    c.monotone.retain(|(n, _, _)| n != "D");
    c.plans.insert(
        "D".into(),
        suffcause::oracle::CocausePlan {
            e1: "E1".into(),
            e2: "E2".into(),
            bits: [
                suffcause::oracle::Draw::Zero,
                suffcause::oracle::Draw::One,
                suffcause::oracle::Draw::Random,
                suffcause::oracle::Draw::Random,
            ],
            mode: suffcause::oracle::PlanMode::Joint,
        },
    );
    let inst = random_instance_with(&g.graph, &c, &mut rng).unwrap();
    let n = nodes("D", "E1", "E2", "F", "G", &[]);
    let (h5, _, out) =
        transfer_conclusions(&inst.scm, &n, inst.representations.get("D"), &Assertions::default()).unwrap();
    assert!(h5);
    let zero =
        out.iter().find(|c| c.case.starts_with("sign-equality transfer of two-parent (iv)")).expect("transferred (iv)");
    assert_eq!(zero.relation, Relation::Eq0);
    let dist = inst.scm.joint_distribution().unwrap();
    assert!(conditional_covariance(&dist, "F", "G", &[("D", 0)]).unwrap().is_zero());
}

/// E1 = E2 = C (fair coin), D = A3 E1 E2 with P(A3) = 1/10.
fn shared_coin_model() -> Scm {
    let g = Dag::from_edges(&["C", "E1", "E2", "D"], &[("C", "E1"), ("C", "E2"), ("E1", "D"), ("E2", "D")]).unwrap();
    let coin = ResponseTable::new("C", vec![], vec![0, 1], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
    let copy = |n: &str| ResponseTable::deterministic(n, vec!["C".into()], 0b10).unwrap();
    let d = ResponseTable::new("D", vec!["E1".into(), "E2".into()], vec![0, 0b1000], vec![ratio(9, 10), ratio(1, 10)])
        .unwrap();
    Scm::new(g, vec![coin, copy("E1"), copy("E2"), d]).unwrap()
}

#[test]
fn case_vi_literal_statement_fails() {
    // A1 == 0 and Cov(E1,E2) >= 0, yet Cov(E1,E2|D=0) > 0.
    let m = shared_coin_model();
    let dist = m.joint_distribution().unwrap();
    assert!(conditional_covariance(&dist, "E1", "E2", &[]).unwrap().is_positive());
    let c0 = conditional_covariance(&dist, "E1", "E2", &[("D", 0)]).unwrap();
    assert!(c0.is_positive());
    // 0.45/0.95 * 0.5/0.95
    assert_eq!(c0, ratio(45, 95) * ratio(50, 95));
    // the corrected case needs Cov(E1,E2) <= 0 and so stays silent here
    let rep = Representation::new(
        "D",
        vec![Conjunction::with_cocause(vec![Literal::pos("E1"), Literal::pos("E2")], CoCause::states([1]))],
    );
    let (_, out) = derive_two_parent(&m, "D", "E1", "E2", Some(&rep), &Assertions::default()).unwrap();
    assert!(out.iter().all(|c| c.case != "two-parent (vi)"));
    let dist = m.joint_distribution().unwrap();
    for c in &out {
        assert!(suffcause::oracle::verify_claim(&dist, c).unwrap(), "{c}");
    }
}

#[test]
fn case_viii_pairwise_independence_is_not_enough() {
    // A0, A1 fair and independent, A2 = A0 xor A1; E1, E2 independent fair coins
    let g = Dag::from_edges(&["E1", "E2", "D"], &[("E1", "D"), ("E2", "D")]).unwrap();
    let coin = |n: &str| ResponseTable::new(n, vec![], vec![0, 1], vec![ratio(1, 2), ratio(1, 2)]).unwrap();
    let row = |a0: bool, a1: bool, a2: bool| suffcause::scm::row_from_fn(2, |v| a0 || (a1 && v[0]) || (a2 && v[1]));
    let states = [(false, false, false), (false, true, true), (true, false, true), (true, true, false)];
    let d = ResponseTable::new(
        "D",
        vec!["E1".into(), "E2".into()],
        states.iter().map(|&(a, b, c)| row(a, b, c)).collect(),
        vec![ratio(1, 4); 4],
    )
    .unwrap();
    let m = Scm::new(g, vec![coin("E1"), coin("E2"), d.clone()]).unwrap();
    let rep = Representation::new(
        "D",
        vec![
            Conjunction::with_cocause(vec![], CoCause::states([2, 3])),
            Conjunction::with_cocause(vec![Literal::pos("E1")], CoCause::states([1, 3])),
            Conjunction::with_cocause(vec![Literal::pos("E2")], CoCause::states([1, 2])),
        ],
    );
    let (facts, out) = derive_two_parent(&m, "D", "E1", "E2", Some(&rep), &Assertions::default()).unwrap();
    assert!(facts.a1_indep_a2 && facts.a0_indep_a1 && facts.a0_indep_a2 && facts.e1_indep_e2);
    assert!(!facts.a1_indep_a0a2 && !facts.a2_indep_a0a1);
    assert!(out.iter().all(|c| c.case != "two-parent (viii)"));
    let dist = m.joint_distribution().unwrap();
    let c0: Prob = conditional_covariance(&dist, "E1", "E2", &[("D", 0)]).unwrap();
    // within D = 0: P(0,0) = 2/5, other cells 1/5
    assert_eq!(c0, ratio(1, 25));
}
