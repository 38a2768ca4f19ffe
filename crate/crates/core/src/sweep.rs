//! Seeded sweeps: draw constrained parameterizations, derive conclusions
//! through the inference pipeline, and check each one exactly.

use std::collections::BTreeSet;

use num_traits::Signed;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::covinf::{
    check_thm5_premises, check_thm6_premises, sign_equality, theorem4, transfer_sign, Assertion, Assertions, Flag,
    RepFacts, SignConclusion, TransferNodes,
};
use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeSign};
use crate::oracle::{
    quantity_value, random_instance_with, verify_claim, CocausePlan, Draw, InstanceConstraints, PlanMode,
};
use crate::rational;
use crate::scm::Scm;
use crate::sufficient::{canonical_representation, Literal, Representation};

pub const CASES: [&str; 8] = ["i", "ii", "iii", "iv", "v", "vi", "vii", "viii"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub label: String,
    pub seed: u64,
    pub instances: usize,
    /// Instances where the targeted conclusion was derived.
    pub applicable: usize,
    pub conclusions: usize,
    pub verified: usize,
    /// Draws discarded because a stratum of D had probability zero.
    pub redrawn: usize,
    /// First few failing instances, described.
    pub failures: Vec<String>,
}

impl SweepReport {
    fn new(label: &str, seed: u64) -> Self {
        SweepReport { label: label.into(), seed, ..Default::default() }
    }

    pub fn passed(&self) -> bool {
        self.verified == self.conclusions && self.failures.is_empty()
    }

    fn record(&mut self, idx: usize, dist: &crate::scm::ExactDistribution, c: &SignConclusion) -> Result<()> {
        self.conclusions += 1;
        if verify_claim(dist, c)? {
            self.verified += 1;
        } else if self.failures.len() < 5 {
            let v = quantity_value(dist, &c.quantity)?;
            self.failures.push(format!("instance {idx}: {c} but value is {}", rational::format(&v)));
        }
        Ok(())
    }
}

fn both_strata(dist: &crate::scm::ExactDistribution, d: &str) -> Result<bool> {
    let c = dist.column(d)?;
    let p1 = dist.probability(|w| w.values[c] == 1);
    Ok(p1.is_positive() && p1 < rational::one())
}

const MAX_REDRAWS: usize = 10_000;

/// Two-parent conclusions for `d` in `m` from a representation of its
/// equation (the canonical one when `rep` is None).
pub fn derive_two_parent(
    m: &Scm,
    d: &str,
    e1: &str,
    e2: &str,
    rep: Option<&Representation>,
    asserts: &Assertions,
) -> Result<(RepFacts, Vec<SignConclusion>)> {
    let t = m.equation(d)?;
    let canonical;
    let rep = match rep {
        Some(r) => r,
        None => {
            canonical = canonical_representation(t);
            &canonical
        }
    };
    let mut facts = RepFacts::from_table(t, rep, e1, e2)?;
    facts.apply_assertions(asserts)?;
    facts.establish_parent_facts(m.graph(), Some(m), asserts)?;
    let out = theorem4(&facts);
    Ok((facts, out))
}

/// Graph and generator for one two-parent case. Parents E1, E2 of D; where
/// the case needs a covariance sign, they share a cause C with signed edges.
pub fn case_setup(case: &str, flip: bool) -> Result<(Dag, InstanceConstraints)> {
    use Draw::{One, Random as R, Zero};
    let k = if flip { 2 } else { 1 };
    let with_k = |d: Draw| {
        let mut b = [R; 4];
        b[k] = d;
        b
    };
    // (bits, mode, edge signs C->E1, C->E2; None = independent roots)
    let (bits, mode, common): ([Draw; 4], PlanMode, Option<(EdgeSign, EdgeSign)>) = match case {
        "i" => ([Zero, R, R, R], PlanMode::Joint, Some((EdgeSign::Unsigned, EdgeSign::Unsigned))),
        "ii" => ([Zero, R, R, R], PlanMode::Independent, None),
        "iii" => (with_k(One), PlanMode::Joint, Some((EdgeSign::Positive, EdgeSign::Negative))),
        "iv" => (with_k(One), PlanMode::Joint, Some((EdgeSign::Unsigned, EdgeSign::Unsigned))),
        "v" => (with_k(Zero), PlanMode::Joint, Some((EdgeSign::Positive, EdgeSign::Positive))),
        "vi" => (with_k(Zero), PlanMode::Joint, Some((EdgeSign::Positive, EdgeSign::Negative))),
        "vii" => ([R, R, R, Zero], PlanMode::Joint, Some((EdgeSign::Positive, EdgeSign::Negative))),
        "viii" => ([R, R, R, Zero], PlanMode::Independent, None),
        _ => return Err(Error::Invalid(format!("unknown case `{case}` (expected i..viii)"))),
    };
    let mut nodes = vec!["E1", "E2", "D"];
    let mut edges = vec![
        ("E1".to_string(), "D".to_string(), EdgeSign::Positive),
        ("E2".to_string(), "D".to_string(), EdgeSign::Positive),
    ];
    if let Some((s1, s2)) = common {
        nodes.insert(0, "C");
        edges.push(("C".into(), "E1".into(), s1));
        edges.push(("C".into(), "E2".into(), s2));
    }
    let g = Dag::new(nodes, edges)?;
    let mut c = InstanceConstraints::from_signed_graph(&g);
    c.monotone.retain(|(n, _, _)| n != "D");
    c.plans.insert("D".into(), CocausePlan { e1: "E1".into(), e2: "E2".into(), bits, mode });
    Ok((g, c))
}

/// `n` instances of a case; every derived conclusion is checked, and the
/// case itself must be derived in every instance.
pub fn sweep_case(case: &str, seed: u64, n: usize) -> Result<SweepReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SweepReport::new(&format!("two-parent ({case})"), seed);
    let tag = format!("two-parent ({case})");
    let none = Assertions::default();
    let mut idx = 0;
    while rep.instances < n {
        idx += 1;
        let flip = rng.gen_bool(0.5);
        let (g, c) = case_setup(case, flip)?;
        let inst = random_instance_with(&g, &c, &mut rng)?;
        let dist = inst.scm.joint_distribution()?;
        if !both_strata(&dist, "D")? {
            rep.redrawn += 1;
            if rep.redrawn > MAX_REDRAWS {
                return Err(Error::SatisfiabilityTimeout(rep.redrawn));
            }
            continue;
        }
        let (_, out) = derive_two_parent(&inst.scm, "D", "E1", "E2", inst.representations.get("D"), &none)?;
        rep.instances += 1;
        if out.iter().any(|c| c.case == tag) {
            rep.applicable += 1;
        } else if rep.failures.len() < 5 {
            rep.failures.push(format!("instance {idx}: case not derived"));
        }
        for c in &out {
            rep.record(idx, &dist, c)?;
        }
    }
    Ok(rep)
}

const PALETTE: [([Draw; 4], PlanMode); 4] = [
    ([Draw::Random, Draw::Random, Draw::Random, Draw::Zero], PlanMode::Independent),
    ([Draw::Zero, Draw::Random, Draw::Random, Draw::Random], PlanMode::Independent),
    ([Draw::Random, Draw::One, Draw::Random, Draw::Random], PlanMode::Joint),
    ([Draw::Random, Draw::Zero, Draw::Random, Draw::Random], PlanMode::Joint),
];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct TransferSweep {
    pub report: SweepReport,
    pub sign_equality_holds: bool,
    pub common_cause_holds: bool,
    /// Instances where at least one transferred conclusion was derived.
    pub transferred: usize,
}

/// Conclusions about Cov(F,G|D=s) for one parameterization: sign equality
/// (both strata) and transfers of every two-parent conclusion.
pub fn transfer_conclusions(
    m: &Scm,
    n: &TransferNodes,
    rep: Option<&Representation>,
    asserts: &Assertions,
) -> Result<(bool, bool, Vec<SignConclusion>)> {
    let g = m.graph();
    let (_, inner) = derive_two_parent(m, &n.d, &n.e1, &n.e2, rep, asserts)?;
    let p5 = check_thm5_premises(g, n, Some(m), asserts)?;
    let p6 = check_thm6_premises(g, n)?;
    let mut out = Vec::new();
    if p5.holds() {
        for s in [0, 1] {
            out.push(sign_equality(&p5, s)?);
        }
    }
    for p in [&p5, &p6] {
        if !p.holds() {
            continue;
        }
        for c in &inner {
            if let Ok(t) = transfer_sign(p, c) {
                out.push(t);
            }
        }
    }
    Ok((p5.holds(), p6.holds(), out))
}

/// Random parameterizations of a signed graph with D planned from a palette
/// of co-cause patterns; every transferred conclusion is checked exactly.
pub fn sweep_transfer(g: &Dag, n: &TransferNodes, seed: u64, count: usize) -> Result<TransferSweep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = TransferSweep {
        report: SweepReport::new(&format!("transfer Cov({},{}|{})", n.f, n.g, n.d), seed),
        ..Default::default()
    };
    let none = Assertions::default();
    let mut idx = 0;
    while out.report.instances < count {
        idx += 1;
        let (bits, mode) = PALETTE[rng.gen_range(0..PALETTE.len())];
        let mut c = InstanceConstraints::from_signed_graph(g);
        c.monotone.retain(|(node, _, _)| *node != n.d);
        c.plans.insert(n.d.clone(), CocausePlan { e1: n.e1.clone(), e2: n.e2.clone(), bits, mode });
        let inst = random_instance_with(g, &c, &mut rng)?;
        let dist = inst.scm.joint_distribution()?;
        if !both_strata(&dist, &n.d)? {
            out.report.redrawn += 1;
            if out.report.redrawn > MAX_REDRAWS {
                return Err(Error::SatisfiabilityTimeout(out.report.redrawn));
            }
            continue;
        }
        let (h5, h6, concl) = transfer_conclusions(&inst.scm, n, inst.representations.get(&n.d), &none)?;
        out.sign_equality_holds |= h5;
        out.common_cause_holds |= h6;
        out.report.instances += 1;
        if !concl.is_empty() {
            out.transferred += 1;
            out.report.applicable += 1;
        }
        for cc in &concl {
            out.report.record(idx, &dist, cc)?;
        }
    }
    Ok(out)
}

/// Generator constraints encoding assertions: signed edges become monotone
/// constraints; co-cause assertions on two-parent nodes become plans;
/// no-synergism on larger nodes forbids every term containing both parents.
pub fn constraints_from_assertions(g: &Dag, asserts: &Assertions) -> Result<InstanceConstraints> {
    let mut c = InstanceConstraints::from_signed_graph(g);
    let parents_of = |d: &str| -> Result<Vec<String>> {
        Ok(g.parents(g.index(d)?).iter().map(|&p| g.name(p).to_string()).collect())
    };
    let plan_for = |c: &mut InstanceConstraints, d: &str, x: &str, y: &str| -> Result<bool> {
        let ps = parents_of(d)?;
        if ps.len() != 2 || !ps.iter().any(|p| p == x) || !ps.iter().any(|p| p == y) {
            return Ok(false);
        }
        if !c.plans.contains_key(d) {
            c.monotone.retain(|(n, _, _)| n != d);
            c.plans.insert(
                d.into(),
                CocausePlan { e1: x.into(), e2: y.into(), bits: [Draw::Random; 4], mode: PlanMode::Joint },
            );
        }
        Ok(true)
    };
    for a in &asserts.items {
        match a {
            Assertion::NoSynergism { d, x, y } => {
                if plan_for(&mut c, d, x, y)? {
                    c.plans.get_mut(d.as_str()).unwrap().bits[3] = Draw::Zero;
                    continue;
                }
                let others: Vec<String> = parents_of(d)?.into_iter().filter(|p| p != x && p != y).collect();
                for mask in 0..3usize.pow(others.len() as u32) {
                    let mut lits = vec![Literal::pos(x.as_str()), Literal::pos(y.as_str())];
                    let mut r = mask;
                    for o in &others {
                        match r % 3 {
                            1 => lits.push(Literal::pos(o.as_str())),
                            2 => lits.push(Literal::neg(o.as_str())),
                            _ => {}
                        }
                        r /= 3;
                    }
                    c.forbidden_terms.push((d.clone(), lits));
                }
            }
            Assertion::CoCause { d, literals, flag } => {
                let ps = parents_of(d)?;
                if ps.len() != 2 || literals.iter().any(|l| l.complemented) {
                    return Err(Error::Premise(format!(
                        "cannot generate `{a}`: needs a two-parent node and positive literals"
                    )));
                }
                plan_for(&mut c, d, &ps[0], &ps[1])?;
                let plan = c.plans.get_mut(d.as_str()).unwrap();
                let k = literals.iter().fold(0, |k, l| k | if l.base == plan.e1 { 1 } else { 2 });
                plan.bits[k] = if *flag == Flag::Zero { Draw::Zero } else { Draw::One };
            }
            Assertion::CoCauseIndependent { d, .. } => {
                let ps = parents_of(d)?;
                if ps.len() == 2 {
                    plan_for(&mut c, d, &ps[0], &ps[1])?;
                    c.plans.get_mut(d.as_str()).unwrap().mode = PlanMode::Independent;
                }
            }
            Assertion::Cov { .. } | Assertion::Independent { .. } => {}
        }
    }
    Ok(c)
}

/// Searches for a parameterization with Cov(x,y|given=stratum) > 0.
/// Returns the instance index and value of the first one found.
#[allow(clippy::too_many_arguments)]
pub fn search_positive(
    g: &Dag,
    c: &InstanceConstraints,
    x: &str,
    y: &str,
    given: &str,
    stratum: u8,
    seed: u64,
    count: usize,
) -> Result<Option<(usize, String)>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for idx in 0..count {
        let inst = random_instance_with(g, c, &mut rng)?;
        let dist = inst.scm.joint_distribution()?;
        let v = crate::oracle::conditional_covariance(&dist, x, y, &[(given, stratum as u32)])?;
        if v.is_positive() {
            return Ok(Some((idx, rational::format(&v))));
        }
    }
    Ok(None)
}

/// Names of the parents of `d`, in declaration order.
pub fn parent_names(g: &Dag, d: &str) -> Result<BTreeSet<String>> {
    Ok(g.parents(g.index(d)?).iter().map(|&p| g.name(p).to_string()).collect())
}


#[cfg(test)]
mod transfer_tests {
    use super::*;
    use crate::fixtures;

    fn nodes(q: &[&str]) -> TransferNodes {
        TransferNodes {
            d: "D".into(),
            e1: "E1".into(),
            e2: "E2".into(),
            f: "F".into(),
            g: "G".into(),
            q: q.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn figure_sweeps() {
        for (fx, q, p5, p6) in [
            ("fig5_i", vec![], true, true),
            ("fig5_ii", vec![], true, true),
            ("fig5_iii", vec![], false, true),
            ("fig6_i", vec!["Q"], false, true),
            ("fig6_ii", vec!["Q"], false, true),
        ] {
            let m = fixtures::load(fx).unwrap();
            let s = sweep_transfer(&m.graph, &nodes(&q), 3, 30).unwrap();
            eprintln!("{fx}: {:?} p5={} p6={}", s.report, s.sign_equality_holds, s.common_cause_holds);
            assert!(s.report.passed(), "{fx}: {:?}", s.report.failures);
            assert_eq!((s.sign_equality_holds, s.common_cause_holds), (p5, p6), "{fx}");
        }
    }
}
