//! Sufficient conjunctions, determinative sets and the canonical
//! co-cause representation of a binary node.
//!
//! All checks are exhaustive over a [`TruthSurface`]: a finite grid of
//! (response state, point) pairs on which the target and every literal base
//! has a definite value. A [`ResponseTable`] is a surface whose points are
//! parent configurations; an [`EventSystem`] is a surface over assignments of
//! base events, used for statements about plain events rather than causes.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::ResponseTable;

pub trait TruthSurface {
    fn target_name(&self) -> &str;
    /// Literal bases in canonical (declaration) order.
    fn bases(&self) -> &[String];
    fn num_states(&self) -> usize;
    fn num_points(&self) -> usize;
    fn target(&self, state: usize, point: usize) -> bool;
    fn base_value(&self, base: usize, point: usize) -> bool;
}

impl TruthSurface for ResponseTable {
    fn target_name(&self) -> &str {
        self.node()
    }

    fn bases(&self) -> &[String] {
        self.parents()
    }

    fn num_states(&self) -> usize {
        ResponseTable::num_states(self)
    }

    fn num_points(&self) -> usize {
        self.num_configs()
    }

    fn target(&self, state: usize, point: usize) -> bool {
        self.output(state, point)
    }

    fn base_value(&self, base: usize, point: usize) -> bool {
        (point >> base) & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub base: String,
    pub complemented: bool,
}

impl Literal {
    pub fn pos(base: impl Into<String>) -> Self {
        Literal { base: base.into(), complemented: false }
    }

    pub fn neg(base: impl Into<String>) -> Self {
        Literal { base: base.into(), complemented: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.complemented {
            write!(f, "~{}", self.base)
        } else {
            f.write_str(&self.base)
        }
    }
}

/// The response-term factor of a conjunction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoCause {
    One,
    Zero,
    /// Disjunction of the indicators of these response states.
    States(BTreeSet<usize>),
}

impl CoCause {
    pub fn states(states: impl IntoIterator<Item = usize>) -> Self {
        CoCause::States(states.into_iter().collect())
    }

    fn mask(&self, n: usize) -> Result<Vec<bool>> {
        match self {
            CoCause::One => Ok(vec![true; n]),
            CoCause::Zero => Ok(vec![false; n]),
            CoCause::States(s) => {
                if s.is_empty() || s.len() >= n {
                    return Err(Error::InvalidCoCause(format!(
                        "state set must be a nonempty strict subset of {n} states"
                    )));
                }
                if let Some(&bad) = s.iter().find(|&&i| i >= n) {
                    return Err(Error::InvalidCoCause(format!("state {bad} out of range")));
                }
                let mut m = vec![false; n];
                for &i in s {
                    m[i] = true;
                }
                Ok(m)
            }
        }
    }
}

impl fmt::Display for CoCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoCause::One => f.write_str("1"),
            CoCause::Zero => f.write_str("0"),
            CoCause::States(s) => {
                let items: Vec<String> = s.iter().map(usize::to_string).collect();
                write!(f, "{{{}}}", items.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Conjunction {
    pub literals: Vec<Literal>,
    pub cocause: CoCause,
}

impl Conjunction {
    pub fn new(literals: Vec<Literal>) -> Self {
        Conjunction { literals, cocause: CoCause::One }
    }

    pub fn with_cocause(literals: Vec<Literal>, cocause: CoCause) -> Self {
        Conjunction { literals, cocause }
    }

    /// Positive literals over the given bases.
    pub fn of(bases: &[&str]) -> Self {
        Conjunction::new(bases.iter().map(|b| Literal::pos(*b)).collect())
    }

    pub fn mentions(&self, base: &str) -> bool {
        self.literals.iter().any(|l| l.base == base)
    }

    pub fn contains(&self, lit: &Literal) -> bool {
        self.literals.contains(lit)
    }

    /// (literal count, literal positions and polarities) relative to `bases`.
    pub fn sort_key(&self, bases: &[String]) -> (usize, Vec<(usize, bool)>) {
        let mut lits: Vec<(usize, bool)> = self
            .literals
            .iter()
            .map(|l| (bases.iter().position(|b| *b == l.base).unwrap_or(usize::MAX), l.complemented))
            .collect();
        lits.sort_unstable();
        (lits.len(), lits)
    }

    /// Literals reordered to the surface's base order.
    pub fn canonicalized(&self, bases: &[String]) -> Conjunction {
        let mut c = self.clone();
        c.literals.sort_by_key(|l| (bases.iter().position(|b| *b == l.base).unwrap_or(usize::MAX), l.complemented));
        c
    }

    /// Same literals, co-cause removed.
    pub fn literals_only(&self) -> Conjunction {
        Conjunction::new(self.literals.clone())
    }
}

impl fmt::Display for Conjunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        if self.cocause != CoCause::One || self.literals.is_empty() {
            parts.push(self.cocause.to_string());
        }
        parts.extend(self.literals.iter().map(Literal::to_string));
        f.write_str(&parts.join("*"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Representation {
    pub target: String,
    pub terms: Vec<Conjunction>,
}

impl Representation {
    pub fn new(target: impl Into<String>, terms: Vec<Conjunction>) -> Self {
        Representation { target: target.into(), terms }
    }

    /// Terms whose literal set equals `lits` (any co-cause).
    pub fn terms_with_literals<'a>(&'a self, lits: &'a [Literal]) -> impl Iterator<Item = &'a Conjunction> + 'a {
        let want: BTreeSet<&Literal> = lits.iter().collect();
        self.terms.iter().filter(move |t| t.literals.iter().collect::<BTreeSet<_>>() == want)
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "{} = 0", self.target);
        }
        let terms: Vec<String> = self.terms.iter().map(Conjunction::to_string).collect();
        write!(f, "{} = {}", self.target, terms.join(" | "))
    }
}

/// A conjunction resolved against a surface.
struct Compiled {
    lits: Vec<(usize, bool)>,
    states: Vec<bool>,
}

impl Compiled {
    fn holds<S: TruthSurface + ?Sized>(&self, s: &S, state: usize, point: usize) -> bool {
        self.states[state] && self.lits.iter().all(|&(b, neg)| s.base_value(b, point) != neg)
    }

    fn drop_literal(&self, k: usize) -> Compiled {
        let mut lits = self.lits.clone();
        lits.remove(k);
        Compiled { lits, states: self.states.clone() }
    }

    fn has_cocause(&self) -> bool {
        !self.states.iter().all(|&b| b)
    }

    fn drop_cocause(&self) -> Compiled {
        Compiled { lits: self.lits.clone(), states: vec![true; self.states.len()] }
    }
}

fn compile<S: TruthSurface + ?Sized>(s: &S, c: &Conjunction) -> Result<Compiled> {
    let bases = s.bases();
    let mut lits = Vec::with_capacity(c.literals.len());
    let mut seen = BTreeSet::new();
    for l in &c.literals {
        let b = bases.iter().position(|x| *x == l.base).ok_or_else(|| Error::ForeignLiteral(l.base.clone()))?;
        if !seen.insert(b) {
            return Err(Error::RepeatedLiteral(l.base.clone()));
        }
        lits.push((b, l.complemented));
    }
    lits.sort_unstable();
    Ok(Compiled { lits, states: c.cocause.mask(s.num_states())? })
}

fn sufficient_compiled<S: TruthSurface + ?Sized>(s: &S, c: &Compiled) -> bool {
    (0..s.num_states()).all(|st| (0..s.num_points()).all(|p| !c.holds(s, st, p) || s.target(st, p)))
}

fn minimal_compiled<S: TruthSurface + ?Sized>(s: &S, c: &Compiled) -> bool {
    if !sufficient_compiled(s, c) {
        return false;
    }
    if c.has_cocause() && sufficient_compiled(s, &c.drop_cocause()) {
        return false;
    }
    (0..c.lits.len()).all(|k| !sufficient_compiled(s, &c.drop_literal(k)))
}

fn determinative_compiled<S: TruthSurface + ?Sized>(s: &S, terms: &[Compiled]) -> bool {
    (0..s.num_states())
        .all(|st| (0..s.num_points()).all(|p| s.target(st, p) == terms.iter().any(|t| t.holds(s, st, p))))
}

pub fn is_sufficient<S: TruthSurface + ?Sized>(s: &S, c: &Conjunction) -> Result<bool> {
    Ok(sufficient_compiled(s, &compile(s, c)?))
}

/// Sufficient, and neither dropping one literal nor dropping the co-cause
/// keeps it sufficient. Single drops suffice: sufficiency is preserved under
/// adding literals.
pub fn is_minimal_sufficient<S: TruthSurface + ?Sized>(s: &S, c: &Conjunction) -> Result<bool> {
    Ok(minimal_compiled(s, &compile(s, c)?))
}

pub fn is_determinative<S: TruthSurface + ?Sized>(s: &S, terms: &[Conjunction]) -> Result<bool> {
    let compiled = terms.iter().map(|t| compile(s, t)).collect::<Result<Vec<_>>>()?;
    Ok(determinative_compiled(s, &compiled))
}

pub fn is_nonredundant<S: TruthSurface + ?Sized>(s: &S, terms: &[Conjunction]) -> Result<bool> {
    let compiled = terms.iter().map(|t| compile(s, t)).collect::<Result<Vec<_>>>()?;
    if !determinative_compiled(s, &compiled) {
        return Err(Error::NotDeterminative);
    }
    Ok((0..compiled.len()).all(|k| {
        let rest: Vec<&Compiled> = compiled.iter().enumerate().filter(|&(i, _)| i != k).map(|(_, c)| c).collect();
        !(0..s.num_states())
            .all(|st| (0..s.num_points()).all(|p| s.target(st, p) == rest.iter().any(|t| t.holds(s, st, p))))
    }))
}

/// Drops literals scanning from the last canonical position backwards, then
/// the co-cause, keeping each drop that preserves sufficiency. Earlier
/// literals are therefore the ones retained when several reductions exist.
pub fn reduce_to_minimal<S: TruthSurface + ?Sized>(s: &S, c: &Conjunction) -> Result<Conjunction> {
    let mut cur = compile(s, c)?;
    if !sufficient_compiled(s, &cur) {
        return Err(Error::NotSufficient);
    }
    let mut k = cur.lits.len();
    while k > 0 {
        k -= 1;
        let cand = cur.drop_literal(k);
        if sufficient_compiled(s, &cand) {
            cur = cand;
        }
    }
    let mut cocause = c.cocause.clone();
    if cur.has_cocause() && sufficient_compiled(s, &cur.drop_cocause()) {
        cocause = CoCause::One;
    }
    let bases = s.bases();
    let literals = cur.lits.iter().map(|&(b, neg)| Literal { base: bases[b].clone(), complemented: neg }).collect();
    Ok(Conjunction { literals, cocause })
}

/// Sorts terms canonically and greedily drops each one whose removal keeps
/// the set determinative.
pub fn reduce_to_nonredundant<S: TruthSurface + ?Sized>(s: &S, terms: &[Conjunction]) -> Result<Vec<Conjunction>> {
    let mut sorted: Vec<Conjunction> = terms.iter().map(|t| t.canonicalized(s.bases())).collect();
    sorted.sort_by_key(|t| t.sort_key(s.bases()));
    let compiled = sorted.iter().map(|t| compile(s, t)).collect::<Result<Vec<_>>>()?;
    if !determinative_compiled(s, &compiled) {
        return Err(Error::NotDeterminative);
    }
    let mut keep = vec![true; sorted.len()];
    for k in 0..sorted.len() {
        keep[k] = false;
        let rest: Vec<&Compiled> = compiled.iter().zip(&keep).filter(|(_, &kp)| kp).map(|(c, _)| c).collect();
        let still = (0..s.num_states())
            .all(|st| (0..s.num_points()).all(|p| s.target(st, p) == rest.iter().any(|t| t.holds(s, st, p))));
        if !still {
            keep[k] = true;
        }
    }
    Ok(sorted.into_iter().zip(keep).filter(|(_, k)| *k).map(|(t, _)| t).collect())
}

type Positions = Vec<(usize, bool)>;
type SortKey = (usize, Positions);

/// The canonical representation: for every conjunction P of parents and
/// complements, the co-cause is identically one when P alone is minimal
/// sufficient, otherwise the disjunction of the state indicators W_j for which
/// W_j P is minimal sufficient. Terms whose co-cause would be identically zero
/// are omitted. Terms are sorted by literal count, then by literal positions.
///
/// Expects deduplicated states; with duplicates the state sets simply list
/// every copy.
pub fn canonical_representation(t: &ResponseTable) -> Representation {
    let m = t.num_parents();
    let n_states = t.num_states();
    let n_cfg = t.num_configs();
    // Configurations satisfying the conjunction (care mask, value mask).
    let sat = |care: usize, val: usize| -> u64 {
        (0..n_cfg).filter(|&c| c & care == val).fold(0u64, |acc, c| acc | (1u64 << c))
    };
    let row_sufficient = |row: u64, cover: u64| row & cover == cover;
    let all_sufficient = |cover: u64| t.rows().iter().all(|&r| row_sufficient(r, cover));

    let mut terms: Vec<(SortKey, Conjunction)> = Vec::new();
    let mut ternary = vec![0u8; m];
    let total = 3usize.pow(m as u32);
    for code in 0..total {
        let mut x = code;
        for d in ternary.iter_mut() {
            *d = (x % 3) as u8;
            x /= 3;
        }
        let mut care = 0usize;
        let mut val = 0usize;
        for (k, &d) in ternary.iter().enumerate() {
            if d != 0 {
                care |= 1 << k;
                if d == 1 {
                    val |= 1 << k;
                }
            }
        }
        let cover = sat(care, val);
        let drops: Vec<u64> =
            (0..m).filter(|k| care >> k & 1 == 1).map(|k| sat(care & !(1 << k), val & !(1 << k))).collect();
        let cocause = if all_sufficient(cover) {
            if drops.iter().all(|&d| !all_sufficient(d)) {
                Some(CoCause::One)
            } else {
                None
            }
        } else {
            let states: BTreeSet<usize> = (0..n_states)
                .filter(|&j| {
                    let r = t.row(j);
                    row_sufficient(r, cover) && drops.iter().all(|&d| !row_sufficient(r, d))
                })
                .collect();
            if states.is_empty() {
                None
            } else {
                Some(CoCause::States(states))
            }
        };
        if let Some(cocause) = cocause {
            let lits: Vec<(usize, bool)> =
                (0..m).filter(|k| care >> k & 1 == 1).map(|k| (k, val >> k & 1 == 0)).collect();
            let literals =
                lits.iter().map(|&(k, neg)| Literal { base: t.parents()[k].clone(), complemented: neg }).collect();
            terms.push(((lits.len(), lits), Conjunction { literals, cocause }));
        }
    }
    terms.sort_by(|a, b| a.0.cmp(&b.0));
    Representation { target: t.node().to_string(), terms: terms.into_iter().map(|(_, c)| c).collect() }
}

/// Boolean expressions over named base events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Var(String),
    Not(Box<BoolExpr>),
    And(Vec<BoolExpr>),
    Or(Vec<BoolExpr>),
}

impl BoolExpr {
    pub fn var(name: &str) -> Self {
        BoolExpr::Var(name.to_string())
    }

    /// Parses `|` (or), `*`/`&` (and), `~` (not), parentheses, `0`, `1` and
    /// identifiers. `*` binds tighter than `|`.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens = tokenize(text)?;
        let mut pos = 0;
        let e = parse_or(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Invalid(format!("trailing input in expression `{text}`")));
        }
        Ok(e)
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            BoolExpr::Const(_) => {}
            BoolExpr::Var(v) => {
                out.insert(v.clone());
            }
            BoolExpr::Not(e) => e.vars(out),
            BoolExpr::And(es) | BoolExpr::Or(es) => es.iter().for_each(|e| e.vars(out)),
        }
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> bool) -> bool {
        match self {
            BoolExpr::Const(b) => *b,
            BoolExpr::Var(v) => env(v),
            BoolExpr::Not(e) => !e.eval(env),
            BoolExpr::And(es) => es.iter().all(|e| e.eval(env)),
            BoolExpr::Or(es) => es.iter().any(|e| e.eval(env)),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(&ch) = chars.peek() {
        if ch.is_whitespace() {
            chars.next();
        } else if "|*&~()".contains(ch) {
            out.push(ch.to_string());
            chars.next();
        } else if ch.is_alphanumeric() || ch == '_' || ch == '.' {
            let mut id = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_alphanumeric() || c == '_' || c == '.' {
                    id.push(c);
                    chars.next();
                } else {
                    break;
                }
            }
            out.push(id);
        } else {
            return Err(Error::Invalid(format!("unexpected `{ch}` in expression")));
        }
    }
    Ok(out)
}

fn parse_or(t: &[String], pos: &mut usize) -> Result<BoolExpr> {
    let mut items = vec![parse_and(t, pos)?];
    while t.get(*pos).map(String::as_str) == Some("|") {
        *pos += 1;
        items.push(parse_and(t, pos)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { BoolExpr::Or(items) })
}

fn parse_and(t: &[String], pos: &mut usize) -> Result<BoolExpr> {
    let mut items = vec![parse_atom(t, pos)?];
    while matches!(t.get(*pos).map(String::as_str), Some("*") | Some("&")) {
        *pos += 1;
        items.push(parse_atom(t, pos)?);
    }
    Ok(if items.len() == 1 { items.pop().unwrap() } else { BoolExpr::And(items) })
}

fn parse_atom(t: &[String], pos: &mut usize) -> Result<BoolExpr> {
    let tok = t.get(*pos).ok_or_else(|| Error::Invalid("unexpected end of expression".into()))?;
    *pos += 1;
    match tok.as_str() {
        "~" => Ok(BoolExpr::Not(Box::new(parse_atom(t, pos)?))),
        "(" => {
            let e = parse_or(t, pos)?;
            if t.get(*pos).map(String::as_str) != Some(")") {
                return Err(Error::Invalid("missing `)`".into()));
            }
            *pos += 1;
            Ok(e)
        }
        "0" => Ok(BoolExpr::Const(false)),
        "1" => Ok(BoolExpr::Const(true)),
        "|" | "*" | "&" | ")" => Err(Error::Invalid(format!("unexpected `{tok}`"))),
        id => Ok(BoolExpr::Var(id.to_string())),
    }
}

/// A target event and named candidate events, all boolean functions of a
/// shared finite set of base events. Points are assignments of the base
/// events; there is a single response state.
#[derive(Debug, Clone)]
pub struct EventSystem {
    target_name: String,
    names: Vec<String>,
    target_col: Vec<bool>,
    candidate_cols: Vec<Vec<bool>>,
    points: usize,
}

impl EventSystem {
    pub fn new(target_name: &str, target: &BoolExpr, candidates: &[(&str, BoolExpr)]) -> Result<Self> {
        let mut vars = BTreeSet::new();
        target.vars(&mut vars);
        for (_, e) in candidates {
            e.vars(&mut vars);
        }
        let vars: Vec<String> = vars.into_iter().collect();
        if vars.len() > 20 {
            return Err(Error::Invalid("too many base events".into()));
        }
        let points = 1usize << vars.len();
        let column = |e: &BoolExpr| -> Vec<bool> {
            (0..points)
                .map(|p| {
                    e.eval(&|v: &str| {
                        let k = vars.iter().position(|x| x == v).unwrap();
                        (p >> k) & 1 == 1
                    })
                })
                .collect()
        };
        let mut names = Vec::new();
        for (n, _) in candidates {
            if names.iter().any(|x: &String| x == n) {
                return Err(Error::DuplicateNode(n.to_string()));
            }
            names.push(n.to_string());
        }
        Ok(EventSystem {
            target_name: target_name.to_string(),
            names,
            target_col: column(target),
            candidate_cols: candidates.iter().map(|(_, e)| column(e)).collect(),
            points,
        })
    }
}

impl TruthSurface for EventSystem {
    fn target_name(&self) -> &str {
        &self.target_name
    }

    fn bases(&self) -> &[String] {
        &self.names
    }

    fn num_states(&self) -> usize {
        1
    }

    fn num_points(&self) -> usize {
        self.points
    }

    fn target(&self, _state: usize, point: usize) -> bool {
        self.target_col[point]
    }

    fn base_value(&self, base: usize, point: usize) -> bool {
        self.candidate_cols[base][point]
    }
}

/// Every conjunction of candidate events (no complements) that is minimal
/// sufficient for the target, in canonical order.
pub fn enumerate_msc_over_events(target: &BoolExpr, candidates: &[(&str, BoolExpr)]) -> Result<Vec<Conjunction>> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    if candidates.len() > 20 {
        return Err(Error::Invalid("too many candidate events".into()));
    }
    let sys = EventSystem::new("target", target, candidates)?;
    let k = candidates.len();
    let mut found: Vec<(usize, Positions, Conjunction)> = Vec::new();
    for mask in 0usize..(1 << k) {
        let lits: Vec<(usize, bool)> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| (i, false)).collect();
        let c = Compiled { lits: lits.clone(), states: vec![true] };
        if minimal_compiled(&sys, &c) {
            let conj = Conjunction::new(lits.iter().map(|&(i, _)| Literal::pos(candidates[i].0)).collect());
            found.push((lits.len(), lits, conj));
        }
    }
    found.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    Ok(found.into_iter().map(|(_, _, c)| c).collect())
}
