//! Exact ground truth over enumerated distributions, and a seeded generator
//! of constrained random parameterizations.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::covinf::{CovQuantity, Relation, SignConclusion};
use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeSign};
use crate::rational::{ratio, Prob};
use crate::scm::{ExactDistribution, ResponseTable, Scm, World};
use crate::signs::{detect_monotonic_effect, Sign};
use crate::sufficient::{canonical_representation, CoCause, Conjunction, Literal, Representation};

fn stratum_index(dist: &ExactDistribution, cond: &[(&str, u32)]) -> Result<Vec<(usize, u32)>> {
    cond.iter().map(|&(n, v)| Ok((dist.column(n)?, v))).collect()
}

fn in_stratum(w: &World, cond: &[(usize, u32)]) -> bool {
    cond.iter().all(|&(c, v)| w.values[c] == v)
}

/// E[XY | cond] - E[X | cond] E[Y | cond], exactly.
pub fn conditional_covariance(dist: &ExactDistribution, x: &str, y: &str, cond: &[(&str, u32)]) -> Result<Prob> {
    let (xi, yi) = (dist.column(x)?, dist.column(y)?);
    let cond = stratum_index(dist, cond)?;
    let mut mass = Prob::zero();
    let mut ex = Prob::zero();
    let mut ey = Prob::zero();
    let mut exy = Prob::zero();
    for w in dist.worlds().iter().filter(|w| in_stratum(w, &cond)) {
        let (vx, vy) = (Prob::from_integer(w.values[xi].into()), Prob::from_integer(w.values[yi].into()));
        mass += &w.prob;
        ex += &w.prob * &vx;
        ey += &w.prob * &vy;
        exy += &w.prob * &vx * &vy;
    }
    if mass.is_zero() {
        return Err(Error::ZeroProbability);
    }
    Ok(&exy / &mass - (&ex / &mass) * (&ey / &mass))
}

pub fn covariance(dist: &ExactDistribution, x: &str, y: &str) -> Result<Prob> {
    conditional_covariance(dist, x, y, &[])
}

/// Exact factorization check of X _||_ Y | Z within the stratum. Zero
/// probability Z-cells are skipped; a zero-probability stratum is vacuously
/// independent.
pub fn conditional_independent(
    dist: &ExactDistribution,
    x: &[&str],
    y: &[&str],
    z: &[&str],
    stratum: &[(&str, u32)],
) -> Result<bool> {
    let cols = |s: &[&str]| s.iter().map(|n| dist.column(n)).collect::<Result<Vec<_>>>();
    let (xc, yc, zc) = (cols(x)?, cols(y)?, cols(z)?);
    let cond = stratum_index(dist, stratum)?;
    let key = |w: &World, c: &[usize]| -> Vec<u32> { c.iter().map(|&i| w.values[i]).collect() };
    type Key = Vec<u32>;
    let mut pxyz: BTreeMap<(Key, Key, Key), Prob> = BTreeMap::new();
    let mut pxz: BTreeMap<(Vec<u32>, Vec<u32>), Prob> = BTreeMap::new();
    let mut pyz: BTreeMap<(Vec<u32>, Vec<u32>), Prob> = BTreeMap::new();
    let mut pz: BTreeMap<Vec<u32>, Prob> = BTreeMap::new();
    for w in dist.worlds().iter().filter(|w| in_stratum(w, &cond)) {
        let (kx, ky, kz) = (key(w, &xc), key(w, &yc), key(w, &zc));
        *pxyz.entry((kx.clone(), ky.clone(), kz.clone())).or_insert_with(Prob::zero) += &w.prob;
        *pxz.entry((kx, kz.clone())).or_insert_with(Prob::zero) += &w.prob;
        *pyz.entry((ky, kz.clone())).or_insert_with(Prob::zero) += &w.prob;
        *pz.entry(kz).or_insert_with(Prob::zero) += &w.prob;
    }
    for ((kx, kz), a) in &pxz {
        let total = &pz[kz];
        if total.is_zero() {
            continue;
        }
        for ((ky, kz2), b) in pyz.range((Vec::new(), kz.clone())..) {
            if kz2 != kz {
                continue;
            }
            let joint = pxyz.get(&(kx.clone(), ky.clone(), kz.clone())).cloned().unwrap_or_else(Prob::zero);
            if &joint * total != a * b {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact value of a covariance quantity.
pub fn quantity_value(dist: &ExactDistribution, q: &CovQuantity) -> Result<Prob> {
    conditional_covariance(dist, &q.x, &q.y, &[(&q.given, q.stratum as u32)])
}

pub fn verify_claim(dist: &ExactDistribution, claim: &SignConclusion) -> Result<bool> {
    let v = quantity_value(dist, &claim.quantity)?;
    Ok(match &claim.relation {
        Relation::Le0 => !v.is_positive(),
        Relation::Ge0 => !v.is_negative(),
        Relation::Eq0 => v.is_zero(),
        Relation::SignEquals(other) => {
            let w = quantity_value(dist, other)?;
            v.signum() == w.signum()
        }
    })
}

/// How one co-cause bit of a two-parent plan is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Draw {
    Random,
    Zero,
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    /// Random bits drawn independently; states are all their combinations.
    Independent,
    /// A handful of states with arbitrary joint bit patterns.
    Joint,
}

/// Builds a two-parent node as `A0 | A1*E1 | A2*E2 | A3*E1*E2` from drawn
/// co-cause bits, so the generating representation is known exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocausePlan {
    pub e1: String,
    pub e2: String,
    pub bits: [Draw; 4],
    pub mode: PlanMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceConstraints {
    /// (node, parent, required sign).
    pub monotone: Vec<(String, String, EdgeSign)>,
    /// (node, literal set) pairs that must not appear as a canonical term.
    pub forbidden_terms: Vec<(String, Vec<Literal>)>,
    pub plans: BTreeMap<String, CocausePlan>,
    /// Upper bound on response states per non-root node.
    pub max_states: usize,
    /// Every constrained edge must have an effect in some state.
    pub strict: bool,
    pub max_rejections: usize,
}

impl Default for InstanceConstraints {
    fn default() -> Self {
        InstanceConstraints {
            monotone: Vec::new(),
            forbidden_terms: Vec::new(),
            plans: BTreeMap::new(),
            max_states: 3,
            strict: false,
            max_rejections: 10_000,
        }
    }
}

impl InstanceConstraints {
    /// Monotonicity required on every signed edge, with strict effects.
    pub fn from_signed_graph(g: &Dag) -> Self {
        let monotone = g
            .edges()
            .filter(|(_, _, s)| *s != EdgeSign::Unsigned)
            .map(|(a, b, s)| (g.name(b).to_string(), g.name(a).to_string(), s))
            .collect();
        InstanceConstraints { monotone, strict: true, ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub scm: Scm,
    /// Generating representations of planned nodes.
    pub representations: BTreeMap<String, Representation>,
}

pub fn random_instance(g: &Dag, c: &InstanceConstraints, seed: u64) -> Result<Scm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(random_instance_with(g, c, &mut rng)?.scm)
}

pub fn random_instance_with(g: &Dag, c: &InstanceConstraints, rng: &mut ChaCha8Rng) -> Result<Instance> {
    for (node, parent, _) in &c.monotone {
        let (d, p) = (g.index(node)?, g.index(parent)?);
        if !g.has_edge(p, d) {
            return Err(Error::NotAParent(parent.clone(), node.clone()));
        }
    }
    let mut equations = Vec::with_capacity(g.len());
    let mut representations = BTreeMap::new();
    for i in 0..g.len() {
        let name = g.name(i);
        let parents: Vec<String> = g.parents(i).iter().map(|&p| g.name(p).to_string()).collect();
        if let Some(plan) = c.plans.get(name) {
            let (t, rep) = planned_table(name, &parents, plan, rng)?;
            representations.insert(name.to_string(), rep);
            equations.push(t);
        } else if parents.is_empty() {
            let w0 = rng.gen_range(1..=9i64);
            let w1 = rng.gen_range(1..=9i64);
            equations.push(ResponseTable::new(
                name,
                parents,
                vec![0, 1],
                vec![ratio(w0, w0 + w1), ratio(w1, w0 + w1)],
            )?);
        } else {
            equations.push(constrained_table(name, parents, c, rng)?);
        }
    }
    Ok(Instance { scm: Scm::new(g.clone(), equations)?, representations })
}

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Prob> {
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..=9)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| ratio(x, total)).collect()
}

/// Closes a row upward along the constrained directions: for a positive
/// parent k, output 1 at c forces 1 at c with bit k set; for a negative one,
/// at c with bit k cleared.
fn monotone_closure(mut row: u64, m: usize, dirs: &[(usize, EdgeSign)]) -> u64 {
    let n = 1usize << m;
    loop {
        let before = row;
        for c in 0..n {
            if row >> c & 1 == 0 {
                continue;
            }
            for &(k, s) in dirs {
                let target = match s {
                    EdgeSign::Positive => c | 1 << k,
                    EdgeSign::Negative => c & !(1 << k),
                    EdgeSign::Unsigned => c,
                };
                row |= 1 << target;
            }
        }
        if row == before {
            return row;
        }
    }
}

fn row_respects(row: u64, m: usize, dirs: &[(usize, EdgeSign)]) -> bool {
    dirs.iter().all(|&(k, s)| {
        (0..1usize << m).filter(|c| c >> k & 1 == 0).all(|c| {
            let (lo, hi) = (row >> c & 1, row >> (c | 1 << k) & 1);
            match s {
                EdgeSign::Positive => hi >= lo,
                EdgeSign::Negative => hi <= lo,
                EdgeSign::Unsigned => true,
            }
        })
    })
}

/// Random table honouring the node's monotonicity and forbidden-term
/// constraints. Rows are proposed either uniformly or as a monotone closure
/// (or its dual) of a uniform row, then rejected unless they pass the
/// per-row check; whole tables are rejected on the table-level checks.
fn constrained_table(
    name: &str,
    parents: Vec<String>,
    c: &InstanceConstraints,
    rng: &mut ChaCha8Rng,
) -> Result<ResponseTable> {
    let m = parents.len();
    let width = 1usize << m;
    let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
    let dirs: Vec<(usize, EdgeSign)> = c
        .monotone
        .iter()
        .filter(|(n, _, s)| n == name && *s != EdgeSign::Unsigned)
        .map(|(_, p, s)| (parents.iter().position(|x| x == p).unwrap(), *s))
        .collect();
    let flipped: Vec<(usize, EdgeSign)> = dirs
        .iter()
        .map(|&(k, s)| (k, if s == EdgeSign::Positive { EdgeSign::Negative } else { EdgeSign::Positive }))
        .collect();
    let forbidden: Vec<BTreeSet<&Literal>> =
        c.forbidden_terms.iter().filter(|(n, _)| n == name).map(|(_, l)| l.iter().collect()).collect();
    let mut rejections = 0usize;
    loop {
        let k = rng.gen_range(1..=c.max_states.max(1));
        let mut rows = Vec::with_capacity(k);
        while rows.len() < k {
            let raw = rng.gen::<u64>() & mask;
            let row = if dirs.is_empty() {
                raw
            } else {
                match rng.gen_range(0..3) {
                    0 => raw,
                    1 => monotone_closure(raw, m, &dirs),
                    _ => !monotone_closure(!raw & mask, m, &flipped) & mask,
                }
            };
            if row_respects(row, m, &dirs) {
                rows.push(row);
            } else {
                rejections += 1;
                if rejections > c.max_rejections {
                    return Err(Error::SatisfiabilityTimeout(rejections));
                }
            }
        }
        let t = ResponseTable::new(name, parents.clone(), rows, weights(rng, k))?;
        let strict_ok = !c.strict
            || dirs
                .iter()
                .all(|&(k, _)| detect_monotonic_effect(&t, &parents[k]).map(|e| !e.degenerate).unwrap_or(false));
        let forbid_ok = forbidden.is_empty() || {
            let rep = canonical_representation(&t.dedupe_states());
            rep.terms.iter().all(|term| !forbidden.contains(&term.literals.iter().collect()))
        };
        if strict_ok && forbid_ok {
            return Ok(t);
        }
        rejections += 1;
        if rejections > c.max_rejections {
            return Err(Error::SatisfiabilityTimeout(rejections));
        }
    }
}

fn planned_table(
    name: &str,
    parents: &[String],
    plan: &CocausePlan,
    rng: &mut ChaCha8Rng,
) -> Result<(ResponseTable, Representation)> {
    let pos = |e: &str| parents.iter().position(|p| p == e);
    let (k1, k2) = match (pos(&plan.e1), pos(&plan.e2)) {
        (Some(a), Some(b)) if parents.len() == 2 && a != b => (a, b),
        _ => {
            return Err(Error::Premise(format!(
                "planned node `{name}` must have exactly the parents `{}` and `{}`",
                plan.e1, plan.e2
            )))
        }
    };
    let fixed = |d: Draw| match d {
        Draw::Zero => Some(false),
        Draw::One => Some(true),
        Draw::Random => None,
    };
    let mut states: Vec<[bool; 4]> = Vec::new();
    let mut probs: Vec<Prob> = Vec::new();
    match plan.mode {
        PlanMode::Independent => {
            let mut per_bit: Vec<Vec<(bool, Prob)>> = Vec::new();
            for &d in &plan.bits {
                match fixed(d) {
                    Some(b) => per_bit.push(vec![(b, ratio(1, 1))]),
                    None => {
                        let w = rng.gen_range(1..=9i64);
                        per_bit.push(vec![(false, ratio(10 - w, 10)), (true, ratio(w, 10))]);
                    }
                }
            }
            let mut combos: Vec<([bool; 4], Prob)> = vec![([false; 4], ratio(1, 1))];
            for (k, options) in per_bit.iter().enumerate() {
                let mut next = Vec::new();
                for (bits, p) in &combos {
                    for (b, q) in options {
                        let mut nb = *bits;
                        nb[k] = *b;
                        next.push((nb, p * q));
                    }
                }
                combos = next;
            }
            for (b, p) in combos {
                states.push(b);
                probs.push(p);
            }
        }
        PlanMode::Joint => {
            let n = rng.gen_range(1..=4usize);
            for _ in 0..n {
                let mut b = [false; 4];
                for (k, &d) in plan.bits.iter().enumerate() {
                    b[k] = fixed(d).unwrap_or_else(|| rng.gen_bool(0.5));
                }
                states.push(b);
            }
            probs = weights(rng, n);
        }
    }
    let rows: Vec<u64> = states
        .iter()
        .map(|a| {
            (0..4usize).fold(0u64, |row, c| {
                let (v1, v2) = (c >> k1 & 1 == 1, c >> k2 & 1 == 1);
                if a[0] || (a[1] && v1) || (a[2] && v2) || (a[3] && v1 && v2) {
                    row | 1 << c
                } else {
                    row
                }
            })
        })
        .collect();
    let table = ResponseTable::new(name, parents.to_vec(), rows, probs)?;
    let lits: [Vec<Literal>; 4] = [
        vec![],
        vec![Literal::pos(plan.e1.as_str())],
        vec![Literal::pos(plan.e2.as_str())],
        vec![Literal::pos(plan.e1.as_str()), Literal::pos(plan.e2.as_str())],
    ];
    let mut terms = Vec::new();
    for (k, l) in lits.iter().enumerate() {
        let set: BTreeSet<usize> = (0..states.len()).filter(|&j| states[j][k]).collect();
        let cocause = if set.is_empty() {
            continue;
        } else if set.len() == states.len() {
            CoCause::One
        } else {
            CoCause::States(set)
        };
        terms.push(Conjunction::with_cocause(l.clone(), cocause));
    }
    Ok((table, Representation::new(name, terms)))
}

/// Checks a generated Scm against the constraints it was drawn under.
pub fn satisfies(m: &Scm, c: &InstanceConstraints) -> Result<bool> {
    for (node, parent, s) in &c.monotone {
        let t = m.equation(node)?;
        let eff = detect_monotonic_effect(t, parent)?;
        let want = Sign::from(*s);
        let ok = if c.strict { !eff.degenerate && eff.sign == want } else { eff.degenerate || eff.sign == want };
        if !ok {
            return Ok(false);
        }
    }
    for (node, lits) in &c.forbidden_terms {
        let rep = canonical_representation(&m.equation(node)?.dedupe_states());
        let want: BTreeSet<&Literal> = lits.iter().collect();
        if rep.terms.iter().any(|t| t.literals.iter().collect::<BTreeSet<_>>() == want) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::row_from_fn;

    fn fair(name: &str) -> ResponseTable {
        ResponseTable::new(name, vec![], vec![0, 1], vec![ratio(1, 2), ratio(1, 2)]).unwrap()
    }

    fn or_model() -> ExactDistribution {
        let g = Dag::from_edges(&["E1", "E2", "D"], &[("E1", "D"), ("E2", "D")]).unwrap();
        let or = ResponseTable::from_fn("D", vec!["E1".into(), "E2".into()], |v| v[0] || v[1]).unwrap();
        Scm::new(g, vec![fair("E1"), fair("E2"), or]).unwrap().joint_distribution().unwrap()
    }

    #[test]
    fn disjunction_stratum_covariance() {
        let d = or_model();
        assert_eq!(conditional_covariance(&d, "E1", "E2", &[("D", 1)]).unwrap(), ratio(-1, 9));
        assert_eq!(covariance(&d, "E1", "E2").unwrap(), ratio(0, 1));
        assert_eq!(covariance(&d, "E1", "E1").unwrap(), ratio(1, 4));
        assert_eq!(conditional_covariance(&d, "E1", "E2", &[("D", 0)]).unwrap(), ratio(0, 1));
    }

    #[test]
    fn zero_probability_stratum() {
        let g = Dag::from_edges(&["X", "Y"], &[]).unwrap();
        let one = ResponseTable::deterministic("X", vec![], 1).unwrap();
        let d = Scm::new(g, vec![one, fair("Y")]).unwrap().joint_distribution().unwrap();
        assert_eq!(conditional_covariance(&d, "X", "Y", &[("X", 0)]), Err(Error::ZeroProbability));
    }

    #[test]
    fn fork_and_collider() {
        let g = Dag::from_edges(&["C", "X", "Y"], &[("C", "X"), ("C", "Y")]).unwrap();
        let copy = |n: &str| ResponseTable::from_fn(n, vec!["C".into()], |v| v[0]).unwrap();
        let d = Scm::new(g, vec![fair("C"), copy("X"), copy("Y")]).unwrap().joint_distribution().unwrap();
        assert!(!conditional_independent(&d, &["X"], &["Y"], &[], &[]).unwrap());
        assert!(conditional_independent(&d, &["X"], &["Y"], &["C"], &[]).unwrap());
        let d = or_model();
        assert!(conditional_independent(&d, &["E1"], &["E2"], &[], &[]).unwrap());
        assert!(!conditional_independent(&d, &["E1"], &["E2"], &["D"], &[]).unwrap());
        assert!(conditional_independent(&d, &["E1"], &["E2"], &[], &[("D", 0)]).unwrap());
    }

    #[test]
    fn claims() {
        let d = or_model();
        let q = CovQuantity::new("E1", "E2", "D", 1);
        let claim = |relation| SignConclusion { quantity: q.clone(), relation, case: "t".into(), premises: vec![] };
        assert!(verify_claim(&d, &claim(Relation::Le0)).unwrap());
        assert!(!verify_claim(&d, &claim(Relation::Ge0)).unwrap());
        let zero = SignConclusion { quantity: CovQuantity::new("E1", "E2", "D", 0), ..claim(Relation::Eq0) };
        assert!(verify_claim(&d, &zero).unwrap());
    }

    #[test]
    fn generator_respects_constraints() {
        let g = Dag::new(["E", "D"], [("E".to_string(), "D".to_string(), EdgeSign::Positive)]).unwrap();
        let c = InstanceConstraints { max_states: 4, ..InstanceConstraints::from_signed_graph(&g) };
        for seed in 0..50 {
            let m = random_instance(&g, &c, seed).unwrap();
            assert!(satisfies(&m, &c).unwrap());
            // no state with f(1)=0, f(0)=1
            assert!(m.equation("D").unwrap().rows().iter().all(|&r| r != 0b01));
        }
        assert_eq!(random_instance(&g, &c, 7).unwrap(), random_instance(&g, &c, 7).unwrap());
    }

    #[test]
    fn forbidden_synergy_term() {
        let g = Dag::from_edges(&["E1", "E2", "D"], &[("E1", "D"), ("E2", "D")]).unwrap();
        let mut c = InstanceConstraints::default();
        c.forbidden_terms.push(("D".into(), vec![Literal::pos("E1"), Literal::pos("E2")]));
        for seed in 0..50 {
            let m = random_instance(&g, &c, seed).unwrap();
            let rep = canonical_representation(&m.equation("D").unwrap().dedupe_states());
            assert!(rep.terms.iter().all(|t| t.literals != vec![Literal::pos("E1"), Literal::pos("E2")]));
        }
    }

    #[test]
    fn planned_node_matches_its_representation() {
        let g = Dag::from_edges(&["E1", "E2", "D"], &[("E1", "D"), ("E2", "D")]).unwrap();
        let mut c = InstanceConstraints::default();
        c.plans.insert(
            "D".into(),
            CocausePlan {
                e1: "E1".into(),
                e2: "E2".into(),
                bits: [Draw::Zero, Draw::Random, Draw::Random, Draw::Random],
                mode: PlanMode::Independent,
            },
        );
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance_with(&g, &c, &mut rng).unwrap();
        let t = inst.scm.equation("D").unwrap();
        let rep = &inst.representations["D"];
        assert!(crate::sufficient::is_determinative(t, &rep.terms).unwrap());
        assert!(t.rows().iter().all(|&r| r & 1 == 0));
        assert_eq!(row_from_fn(2, |v| v[0] || v[1]), 0b1110);
    }
}
