//! Subcommand dispatch and report emission (JSON and plain text).

use std::fmt::Write as _;

use num_traits::{Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::covinf::{
    check_thm5_premises, check_thm6_premises, check_two_parent_premise, sign_equality, theorem4, transfer_sign,
    Assertion, Assertions, PremiseReport, RepFacts, SignConclusion, TransferNodes,
};
use crate::error::{Error, Result};
use crate::expansion::{
    expand_structure, stratum_conditioning_set, stratum_independent, stratum_open_path, ExpandedDag,
};
use crate::graph::{Dag, EdgeSign};
use crate::model::{parse_assertion, ModelFile};
use crate::oracle::{conditional_covariance, conditional_independent, random_instance_with, verify_claim};
use crate::rational;
use crate::scm::DEFAULT_BUDGET;
use crate::signs::{detect_monotonic_effect, monotonically_associated, qualitative_cov_sign};
use crate::sufficient::{canonical_representation, reduce_to_nonredundant, Representation};
use crate::sweep::{constraints_from_assertions, sweep_case, CASES};

pub const SUBCOMMANDS: [&str; 7] = ["canonical", "expand", "dsep", "stratum-ci", "signs", "covsign", "oracle-check"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Flags {
    pub node: Option<String>,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub given: Vec<String>,
    pub e1: Option<String>,
    pub e2: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub q: Vec<String>,
    pub stratum: Option<u8>,
    pub seed: u64,
    pub budget: u128,
    pub samples: usize,
    pub asserts: Vec<String>,
    pub case: Option<String>,
    /// dsep / stratum-ci: expected verdict (true = separated).
    pub expect: Option<bool>,
}

impl Default for Flags {
    fn default() -> Self {
        Flags {
            node: None,
            x: Vec::new(),
            y: Vec::new(),
            given: Vec::new(),
            e1: None,
            e2: None,
            f: None,
            g: None,
            q: Vec::new(),
            stratum: None,
            seed: 0,
            budget: DEFAULT_BUDGET,
            samples: 200,
            asserts: Vec::new(),
            case: None,
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    /// False when a requested check failed or a premise was violated.
    pub ok: bool,
    pub body: Value,
    pub text: String,
}

impl Report {
    pub fn json(&self) -> String {
        serde_json::to_string_pretty(&self.body).expect("report serializes")
    }
}

fn need<'a>(v: &'a Option<String>, flag: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Invalid(format!("missing --{flag}")))
}

fn need_model<'a>(m: Option<&'a ModelFile>, cmd: &str) -> Result<&'a ModelFile> {
    m.ok_or_else(|| Error::Invalid(format!("`{cmd}` needs a model file")))
}

fn conclusion_json(c: &SignConclusion) -> Value {
    json!({
        "statement": format!("{} {}", c.quantity, c.relation),
        "quantity": c.quantity.to_string(),
        "relation": c.relation.to_string(),
        "case": c.case,
        "premises": c.premises,
    })
}

fn premise_json(p: &PremiseReport) -> Value {
    json!({
        "holds": p.holds(),
        "checks": p.checks.iter().map(|c| json!({"clause": c.clause, "holds": c.holds, "detail": c.detail})).collect::<Vec<_>>(),
    })
}

/// Runs one subcommand. Errors are for malformed requests (unknown node,
/// missing flag); failed checks and premises give `ok = false`.
pub fn run(cmd: &str, model: Option<&ModelFile>, flags: &Flags) -> Result<Report> {
    match cmd {
        "canonical" => canonical(need_model(model, cmd)?, flags),
        "expand" => expand(need_model(model, cmd)?, flags),
        "dsep" => dsep(need_model(model, cmd)?, flags),
        "stratum-ci" => stratum_ci(need_model(model, cmd)?, flags),
        "signs" => signs(need_model(model, cmd)?),
        "covsign" => covsign(need_model(model, cmd)?, flags),
        "oracle-check" => oracle_check(model, flags),
        _ => Err(Error::Invalid(format!("unknown subcommand `{cmd}` (expected one of {})", SUBCOMMANDS.join(", ")))),
    }
}

fn canonical(m: &ModelFile, flags: &Flags) -> Result<Report> {
    let nodes: Vec<String> = match &flags.node {
        Some(n) => {
            m.graph.index(n)?;
            vec![n.clone()]
        }
        None => m.graph.names().iter().filter(|n| m.equations.contains_key(*n)).cloned().collect(),
    };
    let mut reps = Vec::new();
    let mut text = String::new();
    for n in &nodes {
        let t =
            m.equations.get(n).ok_or_else(|| Error::Equation { node: n.clone(), reason: "missing equation".into() })?;
        let rep = canonical_representation(t);
        let nonred = Representation::new(n.as_str(), reduce_to_nonredundant(t, &rep.terms)?);
        writeln!(text, "{rep}").unwrap();
        if nonred != rep {
            writeln!(text, "  nonredundant: {nonred}").unwrap();
        }
        reps.push(json!({
            "node": n,
            "states": t.num_states(),
            "representation": rep.to_string(),
            "terms": rep.terms.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "nonredundant": nonred.to_string(),
        }));
    }
    Ok(Report { ok: true, body: json!({"command": "canonical", "representations": reps}), text })
}

/// The model's declared representation for `d`, else the canonical one of
/// its equation.
fn representation_for(m: &ModelFile, d: &str) -> Result<Representation> {
    if let Some(r) = m.representation(d) {
        return Ok(r.clone());
    }
    match m.equations.get(d) {
        Some(t) => Ok(canonical_representation(&t.dedupe_states())),
        None => Err(Error::Invalid(format!("`{d}` has neither a rep line nor an equation"))),
    }
}

fn expanded(m: &ModelFile, d: &str) -> Result<ExpandedDag> {
    expand_structure(&m.graph, d, &representation_for(m, d)?)
}

fn edge_line(g: &Dag, a: usize, b: usize, s: EdgeSign) -> String {
    match s.symbol() {
        Some(sym) => format!("edge {} {} {sym}", g.name(a), g.name(b)),
        None => format!("edge {} {}", g.name(a), g.name(b)),
    }
}

fn expand(m: &ModelFile, flags: &Flags) -> Result<Report> {
    let d = need(&flags.node, "node")?;
    let e = expanded(m, d)?;
    let mut text = format!("# {}\n", e.representation);
    for (n, k) in e.annotated() {
        writeln!(text, "node {n} [{}]", k.as_str()).unwrap();
    }
    for (a, b, s) in e.graph.edges() {
        writeln!(text, "{}", edge_line(&e.graph, a, b, s)).unwrap();
    }
    let body = json!({
        "command": "expand",
        "node": d,
        "representation": e.representation.to_string(),
        "nodes": e.annotated().iter().map(|(n, k)| json!({"name": n, "kind": k.as_str()})).collect::<Vec<_>>(),
        "edges": e.graph.edges().map(|(a, b, s)| json!({
            "from": e.graph.name(a), "to": e.graph.name(b), "sign": s.symbol().unwrap_or("")
        })).collect::<Vec<_>>(),
    });
    Ok(Report { ok: true, body, text })
}

fn nonempty<'a>(v: &'a [String], flag: &str) -> Result<&'a [String]> {
    if v.is_empty() {
        Err(Error::Invalid(format!("missing --{flag}")))
    } else {
        Ok(v)
    }
}

fn dsep(m: &ModelFile, flags: &Flags) -> Result<Report> {
    let g = &m.graph;
    let (x, y) = (nonempty(&flags.x, "x")?, nonempty(&flags.y, "y")?);
    let (xi, yi, zi) = (g.indices(x)?, g.indices(y)?, g.indices(&flags.given)?);
    let separated = g.d_separated_idx(&xi, &yi, &zi)?;
    let witness = if separated { None } else { g.open_path(&xi, &yi, &zi)?.map(|p| p.render(g)) };
    let ok = flags.expect.is_none_or(|e| e == separated);
    let verdict = if separated { "separated" } else { "not separated" };
    let mut text =
        format!("{{{}}} vs {{{}}} given {{{}}}: {verdict}\n", x.join(","), y.join(","), flags.given.join(","));
    if let Some(w) = &witness {
        writeln!(text, "witness: {w}").unwrap();
    }
    let body = json!({
        "command": "dsep", "x": x, "y": y, "given": flags.given,
        "separated": separated, "verdict": verdict, "witness": witness, "ok": ok,
    });
    Ok(Report { ok, body, text })
}

fn stratum_ci(m: &ModelFile, flags: &Flags) -> Result<Report> {
    let d = need(&flags.node, "node")?;
    let (x, y) = (nonempty(&flags.x, "x")?, nonempty(&flags.y, "y")?);
    if x.len() != 1 || y.len() != 1 {
        return Err(Error::Invalid("stratum-ci takes one --x and one --y".into()));
    }
    let stratum = flags.stratum.unwrap_or(0);
    if stratum > 1 {
        return Err(Error::Invalid("--stratum must be 0 or 1".into()));
    }
    let e = expanded(m, d)?;
    let indep = stratum_independent(&e, &x[0], &y[0], &flags.given, stratum)?;
    let witness = if indep {
        None
    } else {
        stratum_open_path(&e, &x[0], &y[0], &flags.given, stratum)?.map(|p| p.render(&e.graph))
    };
    let verdict = if indep { "independent" } else { "not implied independent" };
    let mut cond = stratum_conditioning_set(&e, stratum);
    cond.extend(flags.given.iter().cloned());
    let exact = match m.scm() {
        Ok(scm) if !flags.given.contains(&d.to_string()) => {
            let dist = scm.joint_distribution_with_budget(flags.budget)?;
            let z: Vec<&str> = flags.given.iter().map(String::as_str).collect();
            Some(conditional_independent(&dist, &[&x[0]], &[&y[0]], &z, &[(d, stratum as u32)])?)
        }
        _ => None,
    };
    // a sound graphical claim contradicted by the exact model is a failure
    let mut ok = !(indep && exact == Some(false));
    if let Some(want) = flags.expect {
        ok &= want == indep;
    }
    let mut text = format!("{} vs {} in stratum {d}={stratum}: {verdict}\n", x[0], y[0]);
    writeln!(text, "conditioning on {{{}}} in the expanded graph ({})", cond.join(","), e.representation).unwrap();
    if let Some(w) = &witness {
        writeln!(text, "witness: {w}").unwrap();
    }
    if let Some(ex) = exact {
        writeln!(text, "exact model: {}", if ex { "independent" } else { "dependent" }).unwrap();
    }
    let body = json!({
        "command": "stratum-ci", "node": d, "stratum": stratum, "x": x[0], "y": y[0], "given": flags.given,
        "representation": e.representation.to_string(), "conditioning": cond,
        "independent": indep, "verdict": verdict, "witness": witness, "exact_independent": exact, "ok": ok,
    });
    Ok(Report { ok, body, text })
}

fn signs(m: &ModelFile) -> Result<Report> {
    let g = &m.graph;
    let mut edges = Vec::new();
    let mut text = String::new();
    for (a, b, s) in g.edges() {
        let (an, bn) = (g.name(a), g.name(b));
        let detected = match m.equations.get(bn) {
            Some(t) => {
                let eff = detect_monotonic_effect(t, an)?;
                Some(if eff.degenerate { "none".to_string() } else { eff.sign.as_str().to_string() })
            }
            None => None,
        };
        writeln!(
            text,
            "{an} -> {bn}: declared {}, effect {}",
            s.symbol().unwrap_or("unsigned"),
            detected.as_deref().unwrap_or("unknown")
        )
        .unwrap();
        edges.push(json!({"from": an, "to": bn, "declared": s.symbol().unwrap_or(""), "effect": detected}));
    }
    let mut pairs = Vec::new();
    let names = g.names();
    for i in 0..names.len() {
        for j in i + 1..names.len() {
            let assoc = monotonically_associated(g, &names[i], &names[j])?;
            let cov = qualitative_cov_sign(g, &names[i], &names[j])?;
            writeln!(text, "{} ~ {}: association {}, covariance {}", names[i], names[j], assoc, cov).unwrap();
            pairs
                .push(json!({"x": names[i], "y": names[j], "association": assoc.as_str(), "covariance": cov.as_str()}));
        }
    }
    Ok(Report { ok: true, body: json!({"command": "signs", "edges": edges, "pairs": pairs}), text })
}

/// Model assertions plus those given on the command line.
fn all_assertions(m: &ModelFile, flags: &Flags) -> Result<Assertions> {
    let mut a = m.assertions.clone();
    for s in &flags.asserts {
        a.push(parse_assertion(s, &m.graph)?);
    }
    Ok(a)
}

struct Derivation {
    facts: Vec<String>,
    inner: Vec<SignConclusion>,
    outer: Vec<SignConclusion>,
    premises: Vec<(String, PremiseReport)>,
    not_applicable: Vec<String>,
    transfer_requested: bool,
}

impl Derivation {
    fn targets(&self) -> &[SignConclusion] {
        if self.transfer_requested {
            &self.outer
        } else {
            &self.inner
        }
    }
}

fn derive(m: &ModelFile, flags: &Flags, asserts: &Assertions) -> Result<Derivation> {
    let g = &m.graph;
    let d = need(&flags.node, "node")?;
    let di = g.index(d)?;
    let parents: Vec<&str> = g.parents(di).iter().map(|&p| g.name(p)).collect();
    let (e1, e2) = match (&flags.e1, &flags.e2) {
        (Some(a), Some(b)) => (a.clone(), b.clone()),
        (None, None) if parents.len() == 2 => (parents[0].to_string(), parents[1].to_string()),
        _ => return Err(Error::Invalid("give --e1 and --e2 (or use a node with exactly two parents)".into())),
    };
    let mut out = Derivation {
        facts: Vec::new(),
        inner: Vec::new(),
        outer: Vec::new(),
        premises: Vec::new(),
        not_applicable: Vec::new(),
        transfer_requested: flags.f.is_some() || flags.g.is_some(),
    };
    let scm = m.scm().ok();
    let mut two_parent_ok = true;
    if parents.len() != 2 || !parents.contains(&e1.as_str()) || !parents.contains(&e2.as_str()) {
        two_parent_ok = false;
        out.not_applicable
            .push(format!("two-parent: {d} has parents {{{}}}, not exactly {{{e1},{e2}}}", parents.join(",")));
    }
    let mut facts = None;
    if two_parent_ok {
        let built = match m.equations.get(d) {
            Some(t) => check_two_parent_premise(t, &e1, &e2).and_then(|_| {
                let rep = match m.representation(d) {
                    Some(r) => r.clone(),
                    None => canonical_representation(t),
                };
                let mut f = RepFacts::from_table(t, &rep, &e1, &e2)?;
                f.apply_assertions(asserts)?;
                Ok(f)
            }),
            None => {
                let mut bad = Vec::new();
                for e in [&e1, &e2] {
                    if g.edge_sign(g.index(e)?, di) != Some(EdgeSign::Positive) {
                        bad.push(format!("edge {e} -> {d} is not signed +"));
                    }
                }
                if bad.is_empty() {
                    RepFacts::from_assertions(d, &e1, &e2, asserts)
                } else {
                    Err(Error::Premise(bad.join("; ")))
                }
            }
        };
        match built {
            Ok(mut f) => {
                f.establish_parent_facts(g, scm.as_ref(), asserts)?;
                facts = Some(f);
            }
            Err(Error::Premise(p)) => out.not_applicable.push(format!("two-parent: {p}")),
            Err(e) => return Err(e),
        }
    }
    if let Some(f) = &facts {
        out.facts = f.provenance.clone();
        out.inner = theorem4(f);
        if out.inner.is_empty() {
            out.not_applicable.push("two-parent: no case (i)-(viii) has its premises established".into());
        }
    }
    if out.transfer_requested {
        let nodes = TransferNodes {
            d: d.to_string(),
            e1: e1.clone(),
            e2: e2.clone(),
            f: need(&flags.f, "f")?.to_string(),
            g: need(&flags.g, "g")?.to_string(),
            q: flags.q.clone(),
        };
        let p5 = check_thm5_premises(g, &nodes, scm.as_ref(), asserts)?;
        let p6 = check_thm6_premises(g, &nodes)?;
        for (name, p) in [("sign-equality transfer", &p5), ("common-cause transfer", &p6)] {
            if !p.holds() {
                out.not_applicable.push(format!("{name}: fails {}", p.failures().join("; ")));
                continue;
            }
            if p.kind == crate::covinf::Transfer::SignEquality {
                for s in [0u8, 1] {
                    if flags.stratum.is_none_or(|x| x == s) {
                        out.outer.push(sign_equality(p, s)?);
                    }
                }
            }
            for c in &out.inner {
                match transfer_sign(p, c) {
                    Ok(t) => out.outer.push(t),
                    Err(Error::Premise(why)) => out.not_applicable.push(format!("{name} of {}: {why}", c.case)),
                    Err(e) => return Err(e),
                }
            }
        }
        out.premises.push(("sign-equality".into(), p5));
        out.premises.push(("common-cause".into(), p6));
    }
    if let Some(s) = flags.stratum {
        out.inner.retain(|c| c.quantity.stratum == s);
        out.outer.retain(|c| c.quantity.stratum == s);
    }
    Ok(out)
}

fn covsign(m: &ModelFile, flags: &Flags) -> Result<Report> {
    let asserts = all_assertions(m, flags)?;
    let dv = derive(m, flags, &asserts)?;
    let ok = !dv.targets().is_empty();
    let mut text = String::new();
    for f in &dv.facts {
        writeln!(text, "fact: {f}").unwrap();
    }
    for c in dv.inner.iter().chain(&dv.outer) {
        writeln!(text, "{c}").unwrap();
    }
    for n in &dv.not_applicable {
        writeln!(text, "not applicable: {n}").unwrap();
    }
    let body = json!({
        "command": "covsign",
        "node": flags.node,
        "assertions": asserts.items.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "facts": dv.facts,
        "conclusions": dv.inner.iter().map(conclusion_json).collect::<Vec<_>>(),
        "transferred": dv.outer.iter().map(conclusion_json).collect::<Vec<_>>(),
        "premises": dv.premises.iter().map(|(k, p)| json!({"transfer": k, "report": premise_json(p)})).collect::<Vec<_>>(),
        "not_applicable": dv.not_applicable,
        "ok": ok,
    });
    Ok(Report { ok, body, text })
}

fn asserted_covs_hold(dist: &crate::scm::ExactDistribution, asserts: &Assertions) -> Result<bool> {
    for a in &asserts.items {
        match a {
            Assertion::Cov { x, y, sign } => {
                let c = conditional_covariance(dist, x, y, &[])?;
                let holds = match sign {
                    crate::covinf::CovSign::Le0 => !c.is_positive(),
                    crate::covinf::CovSign::Ge0 => !c.is_negative(),
                    crate::covinf::CovSign::Eq0 => c.is_zero(),
                    crate::covinf::CovSign::Unknown => true,
                };
                if !holds {
                    return Ok(false);
                }
            }
            Assertion::Independent { x, y } if !conditional_independent(dist, &[x], &[y], &[], &[])? => {
                return Ok(false);
            }
            _ => {}
        }
    }
    Ok(true)
}

fn oracle_check(model: Option<&ModelFile>, flags: &Flags) -> Result<Report> {
    if let Some(case) = &flags.case {
        let cases: Vec<&str> = if case == "all" { CASES.to_vec() } else { vec![case.as_str()] };
        let mut sweeps = Vec::new();
        let mut text = String::new();
        let mut ok = true;
        for c in cases {
            let r = sweep_case(c, flags.seed, flags.samples)?;
            let pass = r.passed() && r.applicable == r.instances;
            ok &= pass;
            writeln!(
                text,
                "{}: {} instances, {}/{} conclusions verified{}",
                r.label,
                r.instances,
                r.verified,
                r.conclusions,
                if pass { "" } else { " FAILED" }
            )
            .unwrap();
            for f in &r.failures {
                writeln!(text, "  {f}").unwrap();
            }
            sweeps.push(serde_json::to_value(&r).expect("serializes"));
        }
        return Ok(Report {
            ok,
            body: json!({"command": "oracle-check", "seed": flags.seed, "sweeps": sweeps, "ok": ok}),
            text,
        });
    }
    let m = need_model(model, "oracle-check without --case")?;
    let asserts = all_assertions(m, flags)?;
    let dv = derive(m, flags, &asserts)?;
    let claims: Vec<SignConclusion> = dv.inner.iter().chain(&dv.outer).cloned().collect();
    let mut text = String::new();
    for c in &claims {
        writeln!(text, "claim: {c}").unwrap();
    }
    for n in &dv.not_applicable {
        writeln!(text, "not applicable: {n}").unwrap();
    }
    let mut checked = 0usize;
    let mut verified = 0usize;
    let mut skipped = 0usize;
    let mut failures: Vec<String> = Vec::new();
    let mut check = |dist: &crate::scm::ExactDistribution, label: &str| -> Result<()> {
        for c in &claims {
            match verify_claim(dist, c) {
                Ok(true) => {
                    checked += 1;
                    verified += 1;
                }
                Ok(false) => {
                    checked += 1;
                    let v = crate::oracle::quantity_value(dist, &c.quantity)?;
                    if failures.len() < 5 {
                        failures.push(format!("{label}: {c} but value is {}", rational::format(&v)));
                    }
                }
                Err(Error::ZeroProbability) => skipped += 1,
                Err(e) => return Err(e),
            }
        }
        Ok(())
    };
    let mode;
    let mut instances = 0usize;
    if let Ok(scm) = m.scm() {
        mode = "exact";
        instances = 1;
        check(&scm.joint_distribution_with_budget(flags.budget)?, "model")?;
    } else {
        mode = "sweep";
        let c = constraints_from_assertions(&m.graph, &asserts)?;
        let mut rng = ChaCha8Rng::seed_from_u64(flags.seed);
        let mut redrawn = 0usize;
        while instances < flags.samples {
            let inst = random_instance_with(&m.graph, &c, &mut rng)?;
            let dist = inst.scm.joint_distribution_with_budget(flags.budget)?;
            if !asserted_covs_hold(&dist, &asserts)? {
                redrawn += 1;
                if redrawn > 100 * flags.samples.max(1) {
                    return Err(Error::SatisfiabilityTimeout(redrawn));
                }
                continue;
            }
            instances += 1;
            check(&dist, &format!("instance {instances}"))?;
        }
    }
    let ok = !claims.is_empty() && failures.is_empty();
    writeln!(
        text,
        "{mode}: {instances} parameterizations, {verified}/{checked} checks passed, {skipped} in empty strata"
    )
    .unwrap();
    for f in &failures {
        writeln!(text, "  {f}").unwrap();
    }
    let body = json!({
        "command": "oracle-check", "mode": mode, "seed": flags.seed, "instances": instances,
        "claims": claims.iter().map(conclusion_json).collect::<Vec<_>>(),
        "not_applicable": dv.not_applicable,
        "checked": checked, "verified": verified, "skipped_empty_strata": skipped, "failures": failures, "ok": ok,
    });
    Ok(Report { ok, body, text })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn flags() -> Flags {
        Flags::default()
    }

    #[test]
    fn example7_covsign() {
        let m = fixtures::load("fig7").unwrap();
        let f = Flags {
            node: Some("P1".into()),
            e1: Some("E1".into()),
            e2: Some("GP".into()),
            f: Some("B1".into()),
            g: Some("P2".into()),
            asserts: vec!["no-synergism E1*GP".into()],
            ..flags()
        };
        let r = run("covsign", Some(&m), &f).unwrap();
        assert!(r.ok, "{}", r.text);
        assert!(r.text.contains("Cov(B1,P2|P1=1) <= 0  [common-cause transfer of two-parent (vii)]"), "{}", r.text);
        assert!(r.text.contains("not applicable: sign-equality transfer"), "{}", r.text);
    }

    #[test]
    fn dsep_witness() {
        let m = fixtures::load("fig7").unwrap();
        let f = Flags { x: vec!["P2".into()], y: vec!["B1".into()], given: vec!["P1".into()], ..flags() };
        let r = run("dsep", Some(&m), &f).unwrap();
        assert_eq!(r.body["separated"], json!(false));
        assert_eq!(r.body["witness"], json!("P2 <- GP -> P1 <- E1 -> B1"));
    }

    #[test]
    fn stratum_ci_fig2() {
        let m = fixtures::load("fig2_i").unwrap();
        let f =
            Flags { node: Some("D".into()), x: vec!["E1".into()], y: vec!["E3".into()], stratum: Some(0), ..flags() };
        let r = run("stratum-ci", Some(&m), &f).unwrap();
        assert_eq!(r.body["independent"], json!(true));
        assert_eq!(r.body["exact_independent"], json!(true));
        assert!(r.ok);
    }

    #[test]
    fn oracle_case_sweep() {
        let f = Flags { case: Some("i".into()), seed: 5, samples: 20, ..flags() };
        let r = run("oracle-check", None, &f).unwrap();
        assert!(r.ok, "{}", r.text);
    }

    #[test]
    fn oracle_sweep_example7() {
        let m = fixtures::load("fig7").unwrap();
        let f = Flags {
            node: Some("P1".into()),
            e1: Some("E1".into()),
            e2: Some("GP".into()),
            f: Some("B1".into()),
            g: Some("P2".into()),
            asserts: vec!["no-synergism E1*GP".into()],
            samples: 10,
            seed: 1,
            ..flags()
        };
        let r = run("oracle-check", Some(&m), &f).unwrap();
        assert!(r.ok, "{}", r.text);
    }

    #[test]
    fn unknown_subcommand() {
        assert!(run("serve", None, &flags()).is_err());
    }
}
