//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion fails. Thresholds are pinned below.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use suffcause::covinf::{check_thm5_premises, check_thm6_premises, Assertion, Assertions, TransferNodes};
use suffcause::expansion::{expand_structure, stratum_independent};
use suffcause::fixtures::load;
use suffcause::graph::{Dag, EdgeSign};
use suffcause::oracle::{conditional_independent, random_instance, InstanceConstraints};
use suffcause::rational::ratio;
use suffcause::report::{run, Flags};
use suffcause::scm::ResponseTable;
use suffcause::signs::{detect_monotonic_effect, monotonic_effect_via_canonical};
use suffcause::sufficient::{
    canonical_representation, enumerate_msc_over_events, is_determinative, is_minimal_sufficient, BoolExpr,
};
use suffcause::sweep::{constraints_from_assertions, search_positive, sweep_case, sweep_transfer, CASES};

const SEED: u64 = 20240611;

const C1_M2_SAMPLES: usize = 1000;
const C1_LIMIT: Duration = Duration::from_secs(10);
const C2_LIMIT: Duration = Duration::from_secs(1);
const C3_LIMIT: Duration = Duration::from_secs(10);
const C4_PER_CASE: usize = 200;
const C4_LIMIT: Duration = Duration::from_secs(60);
const C5_DAGS: usize = 500;
const C5_MAX_NODES: usize = 6;
const C5_LIMIT: Duration = Duration::from_secs(120);
const C6_TRANSFERRED: usize = 100;
const C6_LIMIT: Duration = Duration::from_secs(120);
const C7_INSTANCES: usize = 100;
const C7_SEARCH: usize = 2000;
const C7_LIMIT: Duration = Duration::from_secs(60);

struct Outcome {
    pass: bool,
    detail: String,
    report: Value,
}

fn outcome(pass: bool, detail: String, report: Value) -> Outcome {
    Outcome { pass, detail, report }
}

/// Every table from criterion 1: all 15 supports over one parent, then
/// sampled supports over two.
fn criterion1_tables() -> Vec<ResponseTable> {
    let table = |parents: &[&str], support: Vec<u64>| {
        let n = support.len() as i64;
        let names = parents.iter().map(|s| s.to_string()).collect();
        ResponseTable::new("D", names, support, vec![ratio(1, n); n as usize]).unwrap()
    };
    let mut out = Vec::new();
    for mask in 1u32..16 {
        out.push(table(&["E"], (0..4).filter(|r| mask >> r & 1 == 1).collect()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..C1_M2_SAMPLES {
        let mask: u32 = rng.gen_range(1..1 << 16);
        out.push(table(&["E1", "E2"], (0..16).filter(|r| mask >> r & 1 == 1).collect()));
    }
    out
}

fn c1() -> Outcome {
    let tables = criterion1_tables();
    let mut bad = Vec::new();
    let mut terms = 0usize;
    for t in &tables {
        let rep = canonical_representation(t);
        terms += rep.terms.len();
        let ok =
            is_determinative(t, &rep.terms).unwrap() && rep.terms.iter().all(|c| is_minimal_sufficient(t, c).unwrap());
        if !ok {
            bad.push(format!("{:?}", t.rows()));
        }
    }
    let detail = format!("{} tables, {} terms, {} failures", tables.len(), terms, bad.len());
    outcome(bad.is_empty(), detail, json!({"tables": tables.len(), "terms": terms, "failures": bad}))
}

fn c2() -> Outcome {
    let mut checks: Vec<(&str, bool)> = Vec::new();
    let names = |v: Vec<suffcause::sufficient::Conjunction>| v.iter().map(|c| c.to_string()).collect::<Vec<_>>();

    let a = BoolExpr::parse("B | C*E").unwrap();
    let b = ("B", BoolExpr::var("B"));
    let c = ("C", BoolExpr::var("C"));
    let d = ("D", BoolExpr::parse("E*F").unwrap());
    let e = ("E", BoolExpr::var("E"));
    let l1 = names(enumerate_msc_over_events(&a, &[b.clone(), c.clone(), d.clone()]).unwrap());
    checks.push(("example 1 {B, C*D}", l1 == ["B", "C*D"]));
    let l2 = names(enumerate_msc_over_events(&a, &[b, c, d, e]).unwrap());
    checks.push(("example 1 {B, C*D, C*E}", l2 == ["B", "C*D", "C*E"]));

    let t = ResponseTable::new("D", vec!["E".into()], vec![0b11, 0b10, 0b01, 0b00], vec![ratio(1, 4); 4]).unwrap();
    checks.push(("example 4 representation", canonical_representation(&t).to_string() == "D = {0} | {1}*E | {2}*~E"));

    let verdict = |fx: &str, x: &str, y: &str| {
        let m = load(fx).unwrap();
        let e = expand_structure(&m.graph, "D", m.representation("D").unwrap()).unwrap();
        stratum_independent::<&str>(&e, x, y, &[], 0).unwrap()
    };
    checks.push(("figure 2(ii) E1, E3 independent in D=0", verdict("fig2_i", "E1", "E3")));
    checks.push(("figure 2(iv) E1, A dependent in D=0", !verdict("fig2_iii", "E1", "A")));
    checks.push(("figure 3(i) A, E independent in D=0", verdict("fig3_i", "A", "E")));
    checks.push(("figure 3(ii) A, E not implied independent in D=0", !verdict("fig3_ii", "A", "E")));

    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    let detail = format!("{}/{} examples reproduced", checks.len() - failed.len(), checks.len());
    let report = json!(checks.iter().map(|(k, v)| json!({"check": k, "ok": v})).collect::<Vec<_>>());
    outcome(failed.is_empty(), detail, report)
}

fn c3() -> Outcome {
    let mut compared = 0usize;
    let mut bad = Vec::new();
    for t in criterion1_tables() {
        for p in t.parents().to_vec() {
            compared += 1;
            let direct = detect_monotonic_effect(&t, &p).unwrap().sign;
            let canon = monotonic_effect_via_canonical(&t, &p).unwrap();
            if direct != canon {
                bad.push(format!("{:?} {p}: {direct:?} vs {canon:?}", t.rows()));
            }
        }
    }
    let detail = format!("{compared} table/parent pairs, {} disagreements", bad.len());
    outcome(bad.is_empty(), detail, json!({"compared": compared, "disagreements": bad}))
}

fn c4() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for case in CASES {
        let r = sweep_case(case, SEED, C4_PER_CASE).unwrap();
        let ok = r.passed() && r.instances >= C4_PER_CASE && r.applicable == r.instances;
        pass &= ok;
        parts.push(format!("{case} {}/{}", r.verified, r.conclusions));
        reports.push(serde_json::to_value(&r).unwrap());
    }
    outcome(pass, format!("verified {}", parts.join(", ")), Value::Array(reports))
}

fn random_dag(rng: &mut ChaCha8Rng) -> Dag {
    let n = rng.gen_range(2..=C5_MAX_NODES);
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let mut edges = Vec::new();
    for j in 0..n {
        for i in 0..j {
            if rng.gen_bool(0.4) {
                edges.push((names[i].as_str(), names[j].as_str()));
            }
        }
    }
    let refs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    Dag::from_edges(&refs, &edges).unwrap()
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut separated, mut connected, mut dependent) = (0usize, 0usize, 0usize);
    let mut bad = Vec::new();
    for k in 0..C5_DAGS {
        let g = random_dag(&mut rng);
        let m = random_instance(&g, &InstanceConstraints::default(), rng.gen()).unwrap();
        let dist = m.joint_distribution().unwrap();
        let n = g.len();
        for x in 0..n {
            for y in x + 1..n {
                let rest: Vec<usize> = (0..n).filter(|&i| i != x && i != y).collect();
                for mask in 0u32..1 << rest.len() {
                    let z: Vec<&str> =
                        rest.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| g.name(i)).collect();
                    let (xs, ys) = ([g.name(x)], [g.name(y)]);
                    let ci = conditional_independent(&dist, &xs, &ys, &z, &[]).unwrap();
                    if g.d_separated(&xs, &ys, &z).unwrap() {
                        separated += 1;
                        if !ci {
                            bad.push(format!("dag {k}: {} _||_ {} | {:?}", xs[0], ys[0], z));
                        }
                    } else {
                        connected += 1;
                        dependent += usize::from(!ci);
                    }
                }
            }
        }
    }
    let detail = format!(
        "{C5_DAGS} dags, {separated} separations confirmed exactly, {} violations ({dependent}/{connected} connections dependent)",
        bad.len()
    );
    let report = json!({"dags": C5_DAGS, "separated": separated, "connected": connected, "dependent": dependent, "violations": bad});
    outcome(bad.is_empty(), detail, report)
}

fn transfer_nodes(q: &[&str]) -> TransferNodes {
    TransferNodes {
        d: "D".into(),
        e1: "E1".into(),
        e2: "E2".into(),
        f: "F".into(),
        g: "G".into(),
        q: q.iter().map(|s| s.to_string()).collect(),
    }
}

fn c6() -> Outcome {
    let figures: [(&str, &[&str], bool); 5] = [
        ("fig5_i", &[], true),
        ("fig5_ii", &[], true),
        ("fig5_iii", &[], false),
        ("fig6_i", &["Q"], false),
        ("fig6_ii", &["Q"], false),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    let mut reports = Vec::new();
    for (fx, q, sign_eq) in figures {
        let g = load(fx).unwrap().graph;
        let n = transfer_nodes(q);
        let p5 = check_thm5_premises(&g, &n, None, &Assertions::default()).unwrap().holds();
        let p6 = check_thm6_premises(&g, &n).unwrap().holds();
        let pattern = p5 == sign_eq && p6;
        // about a third of draws yield no transferable two-parent conclusion
        let mut count = C6_TRANSFERRED;
        let mut s = sweep_transfer(&g, &n, SEED, count).unwrap();
        while s.transferred < C6_TRANSFERRED && count < 8 * C6_TRANSFERRED {
            count *= 2;
            s = sweep_transfer(&g, &n, SEED, count).unwrap();
        }
        let ok = pattern && s.report.passed() && s.transferred >= C6_TRANSFERRED;
        pass &= ok;
        parts.push(format!("{fx} {}{} {}", if p5 { "E" } else { "-" }, if p6 { "C" } else { "-" }, s.transferred));
        reports.push(json!({"figure": fx, "sign_equality": p5, "common_cause": p6, "sweep": s}));
    }
    let detail = format!("pattern and transferred parameterizations: {}", parts.join(", "));
    outcome(pass, detail, Value::Array(reports))
}

fn c7() -> Outcome {
    let m = load("fig7").unwrap();
    let flags = Flags {
        node: Some("P1".into()),
        e1: Some("E1".into()),
        e2: Some("GP".into()),
        f: Some("B1".into()),
        g: Some("P2".into()),
        asserts: vec!["no-synergism P1 E1 GP".into()],
        seed: SEED,
        samples: C7_INSTANCES,
        ..Flags::default()
    };
    let r = run("oracle-check", Some(&m), &flags).unwrap();
    let target = r.text.contains("claim: Cov(B1,P2|P1=1) <= 0");
    let instances = r.body["instances"].as_u64().unwrap_or(0) as usize;
    let null_ok = r.ok && target && instances >= C7_INSTANCES;

    // alternative: familial cause F restored, every edge signed +
    let f1 = load("fig1").unwrap().graph;
    let signed = f1.with_signs(f1.edges().map(|(a, b, _)| ((a, b), EdgeSign::Positive)).collect::<Vec<_>>()).unwrap();
    let mut asserts = Assertions::default();
    asserts.push(Assertion::NoSynergism { d: "P1".into(), x: "E1".into(), y: "GP".into() });
    let c = constraints_from_assertions(&signed, &asserts).unwrap();
    let found = search_positive(&signed, &c, "B1", "P2", "P1", 1, SEED, C7_SEARCH).unwrap();

    let detail = format!(
        "{instances} null parameterizations, {}; alternative {}",
        if null_ok { "all Cov(B1,P2|P1=1) <= 0" } else { "check FAILED" },
        match &found {
            Some((i, v)) => format!("positive at draw {i} ({v})"),
            None => format!("no positive value in {C7_SEARCH} draws"),
        }
    );
    let report = json!({"null": r.body, "alternative": found.as_ref().map(|(i, v)| json!({"draw": i, "value": v}))});
    outcome(null_ok && found.is_some(), detail, report)
}

type Criterion = (u8, &'static str, fn() -> Outcome, Option<Duration>);

const CRITERIA: [Criterion; 7] = [
    (1, "canonical representation", c1, Some(C1_LIMIT)),
    (2, "worked examples", c2, Some(C2_LIMIT)),
    (3, "monotonic effect equivalence", c3, Some(C3_LIMIT)),
    (4, "two-parent cases (i)-(viii)", c4, Some(C4_LIMIT)),
    (5, "d-separation soundness", c5, Some(C5_LIMIT)),
    (6, "sign-equality / common-cause transfer", c6, Some(C6_LIMIT)),
    (7, "null-hypothesis test end to end", c7, Some(C7_LIMIT)),
];

/// Runs criteria 1-7; returns the serialized report and the printable lines.
fn suite() -> (String, Vec<(bool, String)>) {
    let mut report = serde_json::Map::new();
    let mut lines = Vec::new();
    for (n, name, f, limit) in CRITERIA {
        let start = Instant::now();
        let o = f();
        let took = start.elapsed();
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = o.pass && in_time;
        let limit_text = limit.map(|l| format!(" / limit {} s", l.as_secs())).unwrap_or_default();
        lines.push((
            pass,
            format!(
                "criterion {n} {name}: {} ({}; {:.2} s{limit_text})",
                if pass { "PASS" } else { "FAIL" },
                o.detail,
                took.as_secs_f64()
            ),
        ));
        report.insert(format!("criterion_{n}"), json!({"pass": o.pass, "result": o.report}));
    }
    (serde_json::to_string(&Value::Object(report)).unwrap(), lines)
}

fn main() -> ExitCode {
    let (first, lines) = suite();
    let mut all = true;
    for (pass, line) in &lines {
        all &= pass;
        println!("{line}");
    }
    let (second, _) = suite();
    let same = first == second;
    all &= same;
    println!(
        "criterion 8 determinism: {} (two runs, {} byte report, {})",
        if same { "PASS" } else { "FAIL" },
        first.len(),
        if same { "identical" } else { "differ" }
    );
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
