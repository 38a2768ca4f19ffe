//! Line-oriented model files.
//!
//! ```text
//! # comment
//! node E1
//! node D
//! edge E1 D +
//! equation D states 2
//! state 0 prob 1/2 bits 01
//! state 1 prob 1/2 bits 11
//! rep D E1 | {1}
//! assert no-synergism D E1 E2
//! ```
//!
//! Bit `c` of a `bits` string is the output on parent configuration `c`,
//! where bit `k` of `c` is the k-th parent in declaration order.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use crate::covinf::{Assertion, Assertions, CovSign, Flag};
use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeSign};
use crate::rational::{self, Prob};
use crate::scm::{ResponseTable, Scm};
use crate::signs::validate_edge_signs;
use crate::sufficient::{is_determinative, CoCause, Conjunction, Literal, Representation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelFile {
    pub graph: Dag,
    /// Keyed by node name.
    pub equations: BTreeMap<String, ResponseTable>,
    pub representations: Vec<Representation>,
    pub assertions: Assertions,
}

fn perr(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

struct PendingEquation {
    line: usize,
    node: String,
    declared: usize,
    states: Vec<(usize, usize, Prob, String)>,
}

/// Parses a literal conjunction `X*~Y` (or `1` for the empty one).
pub fn parse_literals(text: &str) -> Result<Vec<Literal>> {
    if text == "1" {
        return Ok(Vec::new());
    }
    text.split('*').map(parse_literal).collect()
}

fn parse_literal(part: &str) -> Result<Literal> {
    let (neg, name) = match part.strip_prefix('~') {
        Some(rest) => (true, rest),
        None => (false, part),
    };
    if name.is_empty() || !valid_name(name) {
        return Err(Error::Invalid(format!("bad literal `{part}`")));
    }
    Ok(if neg { Literal::neg(name) } else { Literal::pos(name) })
}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && name != "0" && name != "1" && !name.chars().any(|c| c.is_whitespace() || "*|~{},#".contains(c))
}

/// Parses one term such as `{0,2}*E1*~E2`, `E1`, `1` or `0`.
pub fn parse_term(text: &str) -> Result<Conjunction> {
    let mut cocause = CoCause::One;
    let mut literals = Vec::new();
    let mut seen_cocause = false;
    for part in text.split('*').map(str::trim) {
        if part.starts_with('{') || part == "0" || part == "1" {
            if seen_cocause {
                return Err(Error::Invalid(format!("two co-cause factors in `{text}`")));
            }
            seen_cocause = true;
            cocause = match part {
                "0" => CoCause::Zero,
                "1" => CoCause::One,
                _ => {
                    let inner = part
                        .strip_prefix('{')
                        .and_then(|p| p.strip_suffix('}'))
                        .ok_or_else(|| Error::Invalid(format!("bad co-cause `{part}`")))?;
                    let states = inner
                        .split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|_| Error::Invalid(format!("bad state `{s}`"))))
                        .collect::<Result<Vec<_>>>()?;
                    CoCause::states(states)
                }
            };
        } else {
            literals.push(parse_literal(part)?);
        }
    }
    Ok(Conjunction::with_cocause(literals, cocause))
}

/// Parses the text after `rep`: `D term | term ...`.
pub fn parse_representation(text: &str) -> Result<Representation> {
    let text = text.trim();
    let (d, rest) =
        text.split_once(char::is_whitespace).ok_or_else(|| Error::Invalid("rep needs a node and terms".into()))?;
    let rest = rest.trim();
    let terms = if rest == "0" {
        Vec::new()
    } else {
        rest.split('|').map(|t| parse_term(t.trim())).collect::<Result<Vec<_>>>()?
    };
    Ok(Representation::new(d, terms))
}

fn known(g: &Dag, name: &str) -> Result<()> {
    g.index(name).map(|_| ())
}

/// Parses an assertion (without the `assert` keyword) against a graph.
///
/// `no-synergism` accepts `D X Y`, `D X*Y`, or just `X*Y`, in which case D
/// is the unique common child of X and Y.
pub fn parse_assertion(text: &str, g: &Dag) -> Result<Assertion> {
    let words: Vec<&str> = text.split_whitespace().collect();
    let bad = || Error::Invalid(format!("cannot parse assertion `{}`", text.trim()));
    let (&head, args) = words.split_first().ok_or_else(bad)?;
    let a = match (head, args) {
        ("no-synergism", [d, x, y]) => Assertion::NoSynergism { d: d.to_string(), x: x.to_string(), y: y.to_string() },
        ("no-synergism", [d, xy]) => {
            let (x, y) = xy.split_once('*').ok_or_else(bad)?;
            Assertion::NoSynergism { d: d.to_string(), x: x.into(), y: y.into() }
        }
        ("no-synergism", [xy]) => {
            let (x, y) = xy.split_once('*').ok_or_else(bad)?;
            let (xi, yi) = (g.index(x)?, g.index(y)?);
            let common: Vec<usize> = g.children(xi).iter().copied().filter(|c| g.children(yi).contains(c)).collect();
            match common.as_slice() {
                [d] => Assertion::NoSynergism { d: g.name(*d).into(), x: x.into(), y: y.into() },
                [] => return Err(Error::Invalid(format!("`{x}` and `{y}` have no common child"))),
                _ => return Err(Error::Invalid(format!("`{x}` and `{y}` have several common children; name one"))),
            }
        }
        ("cocause", [d, lits, flag]) => {
            let flag = match *flag {
                "zero" => Flag::Zero,
                "one" => Flag::One,
                _ => return Err(bad()),
            };
            Assertion::CoCause { d: d.to_string(), literals: parse_literals(lits)?, flag }
        }
        ("cocause-independent", [d, terms @ ..]) if terms.len() >= 2 => Assertion::CoCauseIndependent {
            d: d.to_string(),
            terms: terms.iter().map(|t| parse_literals(t)).collect::<Result<_>>()?,
        },
        ("cov", [x, y, s]) => {
            Assertion::Cov { x: x.to_string(), y: y.to_string(), sign: CovSign::parse(s).ok_or_else(bad)? }
        }
        ("independent", [x, y]) => Assertion::Independent { x: x.to_string(), y: y.to_string() },
        _ => return Err(bad()),
    };
    match &a {
        Assertion::NoSynergism { d, x, y } => {
            let di = g.index(d)?;
            for p in [x, y] {
                if !g.has_edge(g.index(p)?, di) {
                    return Err(Error::NotAParent(p.clone(), d.clone()));
                }
            }
        }
        Assertion::CoCause { d, literals, .. } => {
            known(g, d)?;
            for l in literals {
                known(g, &l.base)?;
            }
        }
        Assertion::CoCauseIndependent { d, terms } => {
            known(g, d)?;
            for l in terms.iter().flatten() {
                known(g, &l.base)?;
            }
        }
        Assertion::Cov { x, y, .. } | Assertion::Independent { x, y } => {
            known(g, x)?;
            known(g, y)?;
        }
    }
    Ok(a)
}

fn parse_sign(s: &str, line: usize) -> Result<EdgeSign> {
    match s {
        "+" => Ok(EdgeSign::Positive),
        "-" => Ok(EdgeSign::Negative),
        _ => Err(perr(line, format!("edge sign must be + or -, got `{s}`"))),
    }
}

fn at_line(line: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Parse { .. } => e,
        other => perr(line, other.to_string()),
    }
}

/// Parses and validates a model: acyclicity, equation/parent consistency,
/// probability sums, declared signs against equations, and representations
/// against equations.
pub fn parse_model(text: &str) -> Result<ModelFile> {
    let mut nodes: Vec<(String, usize)> = Vec::new();
    let mut edges: Vec<(String, String, EdgeSign, usize)> = Vec::new();
    let mut eqs: Vec<PendingEquation> = Vec::new();
    let mut reps: Vec<(Representation, usize)> = Vec::new();
    let mut asserts: Vec<(String, usize)> = Vec::new();
    let mut open: Option<usize> = None;

    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words[0] != "state" {
            if let Some(i) = open.take() {
                let e = &eqs[i];
                if e.states.len() != e.declared {
                    return Err(perr(
                        e.line,
                        format!("equation {} declares {} states, found {}", e.node, e.declared, e.states.len()),
                    ));
                }
            }
        }
        match words.as_slice() {
            ["node", name] => {
                if !valid_name(name) {
                    return Err(perr(line, format!("invalid node name `{name}`")));
                }
                if nodes.iter().any(|(n, _)| n == name) {
                    return Err(perr(line, format!("duplicate node `{name}`")));
                }
                nodes.push((name.to_string(), line));
            }
            ["edge", a, b, rest @ ..] if rest.len() <= 1 => {
                for n in [a, b] {
                    if !nodes.iter().any(|(m, _)| m == n) {
                        return Err(perr(line, format!("unknown node `{n}`")));
                    }
                }
                let s = match rest {
                    [] => EdgeSign::Unsigned,
                    [s] => parse_sign(s, line)?,
                    _ => unreachable!(),
                };
                edges.push((a.to_string(), b.to_string(), s, line));
            }
            ["equation", name, "states", k] => {
                if !nodes.iter().any(|(m, _)| m == name) {
                    return Err(perr(line, format!("unknown node `{name}`")));
                }
                if eqs.iter().any(|e| e.node == *name) {
                    return Err(perr(line, format!("second equation for `{name}`")));
                }
                let declared: usize = k.parse().map_err(|_| perr(line, format!("bad state count `{k}`")))?;
                if declared == 0 {
                    return Err(perr(line, "an equation needs at least one state"));
                }
                eqs.push(PendingEquation { line, node: name.to_string(), declared, states: Vec::new() });
                open = Some(eqs.len() - 1);
            }
            ["state", idx, "prob", p, "bits", bits] => {
                let i = open.ok_or_else(|| perr(line, "state line outside an equation"))?;
                let e = &mut eqs[i];
                let idx: usize = idx.parse().map_err(|_| perr(line, format!("bad state index `{idx}`")))?;
                if idx != e.states.len() {
                    return Err(perr(line, format!("expected state {}, got {idx}", e.states.len())));
                }
                if idx >= e.declared {
                    return Err(perr(line, format!("equation {} declares only {} states", e.node, e.declared)));
                }
                let p = rational::parse(p).ok_or_else(|| perr(line, format!("bad probability `{p}`")))?;
                if !bits.bytes().all(|b| b == b'0' || b == b'1') {
                    return Err(perr(line, format!("bits must be 0/1, got `{bits}`")));
                }
                e.states.push((line, idx, p, bits.to_string()));
            }
            ["rep", ..] => {
                let rest = content["rep".len()..].trim();
                let rep = parse_representation(rest).map_err(at_line(line))?;
                reps.push((rep, line));
            }
            ["assert", ..] => asserts.push((content["assert".len()..].trim().to_string(), line)),
            _ => return Err(perr(line, format!("unrecognized line `{content}`"))),
        }
    }
    if let Some(i) = open {
        let e = &eqs[i];
        if e.states.len() != e.declared {
            return Err(perr(
                e.line,
                format!("equation {} declares {} states, found {}", e.node, e.declared, e.states.len()),
            ));
        }
    }

    let graph =
        Dag::new(nodes.iter().map(|(n, _)| n.clone()), edges.iter().map(|(a, b, s, _)| (a.clone(), b.clone(), *s)))
            .map_err(|e| {
                let line = match &e {
                    Error::DuplicateEdge(a, b) => {
                        edges.iter().filter(|(x, y, ..)| x == a && y == b).nth(1).map(|x| x.3)
                    }
                    Error::SelfLoop(a) => edges.iter().find(|(x, y, ..)| x == a && y == a).map(|x| x.3),
                    Error::Cycle(n) => edges.iter().find(|(_, y, ..)| y == n).map(|x| x.3),
                    _ => None,
                };
                perr(line.unwrap_or(0), e.to_string())
            })?;

    let mut equations = BTreeMap::new();
    for e in &eqs {
        let i = graph.index(&e.node).map_err(at_line(e.line))?;
        let parents: Vec<String> = graph.parents(i).iter().map(|&p| graph.name(p).to_string()).collect();
        let width = 1usize << parents.len().min(6);
        let mut rows = Vec::new();
        let mut probs = Vec::new();
        for (line, _, p, bits) in &e.states {
            if bits.len() != width {
                return Err(perr(
                    *line,
                    format!("{} has {} parents: need {width} bits, got {}", e.node, parents.len(), bits.len()),
                ));
            }
            let row = bits.bytes().enumerate().fold(0u64, |acc, (c, b)| acc | (((b == b'1') as u64) << c));
            rows.push(row);
            probs.push(p.clone());
        }
        let t = ResponseTable::new(e.node.clone(), parents, rows, probs).map_err(at_line(e.line))?;
        validate_edge_signs(&graph, &[&t]).map_err(at_line(e.line))?;
        equations.insert(e.node.clone(), t);
    }

    let mut representations = Vec::new();
    for (rep, line) in reps {
        crate::expansion::expand_structure(&graph, &rep.target, &rep).map_err(at_line(line))?;
        if let Some(t) = equations.get(&rep.target) {
            if !is_determinative(t, &rep.terms).map_err(at_line(line))? {
                return Err(perr(
                    line,
                    format!("representation for {} is not determinative for its equation", rep.target),
                ));
            }
        }
        representations.push(rep);
    }

    let mut assertions = Assertions::default();
    for (text, line) in asserts {
        assertions.push(parse_assertion(&text, &graph).map_err(at_line(line))?);
    }
    Ok(ModelFile { graph, equations, representations, assertions })
}

impl ModelFile {
    /// A graph-only model.
    pub fn from_graph(graph: Dag) -> Self {
        ModelFile { graph, equations: BTreeMap::new(), representations: Vec::new(), assertions: Assertions::default() }
    }

    pub fn from_scm(m: &Scm) -> Self {
        let mut out = ModelFile::from_graph(m.graph().clone());
        for t in m.equations() {
            out.equations.insert(t.node().to_string(), t.clone());
        }
        out
    }

    pub fn has_equations(&self) -> bool {
        self.equations.len() == self.graph.len()
    }

    /// The full Scm; errors when any node lacks an equation.
    pub fn scm(&self) -> Result<Scm> {
        if let Some(n) = self.graph.names().iter().find(|n| !self.equations.contains_key(*n)) {
            return Err(Error::Equation { node: n.clone(), reason: "missing equation".into() });
        }
        Scm::new(self.graph.clone(), self.graph.names().iter().map(|n| self.equations[n].clone()).collect())
    }

    pub fn representation(&self, d: &str) -> Option<&Representation> {
        self.representations.iter().find(|r| r.target == d)
    }

    /// Canonical text: nodes, edges, equations (node order), reps, asserts.
    pub fn serialize(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for ModelFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.graph;
        let mut out = String::new();
        for n in g.names() {
            writeln!(out, "node {n}")?;
        }
        for (a, b, s) in g.edges() {
            match s.symbol() {
                Some(sym) => writeln!(out, "edge {} {} {sym}", g.name(a), g.name(b))?,
                None => writeln!(out, "edge {} {}", g.name(a), g.name(b))?,
            }
        }
        for n in g.names() {
            if let Some(t) = self.equations.get(n) {
                writeln!(out, "equation {n} states {}", t.num_states())?;
                for s in 0..t.num_states() {
                    let bits: String = (0..t.num_configs()).map(|c| if t.output(s, c) { '1' } else { '0' }).collect();
                    writeln!(out, "state {s} prob {} bits {bits}", rational::format(t.prob(s)))?;
                }
            }
        }
        for r in &self.representations {
            let body = r.to_string();
            let rhs = body.split_once(" = ").map(|x| x.1).unwrap_or("0");
            writeln!(out, "rep {} {rhs}", r.target)?;
        }
        for a in &self.assertions.items {
            writeln!(out, "assert {a}")?;
        }
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "node A\nnode B\nedge A B\n";

    #[test]
    fn minimal_two_node() {
        let m = parse_model(MINIMAL).unwrap();
        assert_eq!(m.graph.len(), 2);
        assert_eq!(m.graph.edges().count(), 1);
        assert!(m.scm().is_err());
    }

    #[test]
    fn probability_sum_error_names_node() {
        let text = "node A\nequation A states 2\nstate 0 prob 1/2 bits 0\nstate 1 prob 5/8 bits 1\n";
        let err = parse_model(text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("`A`") && msg.contains("9/8"), "{msg}");
    }

    #[test]
    fn line_numbers_on_errors() {
        let cases = [
            ("node A\nedge A Z\n", 2),
            ("node A\nnode A\n", 2),
            ("node A\nnode B\nedge A B\nedge B A\n", 4),
            ("node A\nfoo\n", 2),
            ("node A\nequation A states 1\nstate 0 prob 1 bits 01\n", 3),
            ("node A\nnode B\nedge A B +\nequation A states 1\nstate 0 prob 1 bits 1\nequation B states 1\nstate 0 prob 1 bits 10\n", 6),
        ];
        for (text, line) in cases {
            match parse_model(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn round_trip() {
        let text = "\
node E1
node E2 # trailing comment
node D
edge E1 D +
edge E2 D
equation E1 states 2
state 0 prob 0.25 bits 0
state 1 prob 3/4 bits 1
equation E2 states 1
state 0 prob 1 bits 1
equation D states 2
state 0 prob 1/3 bits 0111
state 1 prob 2/3 bits 0001
rep D {0}*E1 | {0}*E2 | E1*E2
assert no-synergism D E1*E2
assert cov E1 E2 =0
assert cocause D 1 zero
";
        let m = parse_model(text).unwrap();
        let s = m.serialize();
        let m2 = parse_model(&s).unwrap();
        assert_eq!(m, m2);
        assert_eq!(s, m2.serialize());
        assert!(s.contains("state 0 prob 1/4 bits 0"));
        assert!(s.contains("rep D {0}*E1 | {0}*E2 | E1*E2"));
        assert!(s.contains("assert no-synergism D E1 E2"));
        assert!(m.scm().is_ok());
    }

    #[test]
    fn nondeterminative_rep_rejected() {
        let text = "node E\nnode D\nedge E D\nequation D states 1\nstate 0 prob 1 bits 01\nrep D ~E\n";
        assert!(matches!(parse_model(text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn no_synergism_infers_common_child() {
        let g = Dag::from_edges(&["X", "Y", "D", "W"], &[("X", "D"), ("Y", "D"), ("X", "W")]).unwrap();
        let a = parse_assertion("no-synergism X*Y", &g).unwrap();
        assert_eq!(a.to_string(), "no-synergism D X Y");
        assert!(parse_assertion("no-synergism X W", &g).is_err());
    }

    #[test]
    fn terms() {
        assert_eq!(parse_term("{0,2}*E1*~E2").unwrap().to_string(), "{0,2}*E1*~E2");
        assert_eq!(parse_term("1").unwrap().to_string(), "1");
        assert!(parse_term("{0}*{1}").is_err());
        assert!(parse_term("E1*").is_err());
    }
}
