//! Signs of conditional covariances between two parents of a binary node,
//! and their transfer to other pairs of nodes.
//!
//! The two-parent cases work on a representation
//! `D = A0 | A1*E1 | A2*E2 | A3*E1*E2`. Facts about the co-causes come from a
//! supplied representation (exact, from response-state probabilities) or
//! from assertions. Facts about the parents' marginal covariance come from
//! graph structure first, then from an exact Scm, then from assertions.
//!
//! Two cases are stated with corrected side conditions:
//! * (vi) needs Cov(E1,E2) <= 0, not >= 0. With E1 = E2 a fair coin and
//!   D = A3*E1*E2 the >= 0 version yields a strictly positive covariance in
//!   the D = 0 stratum.
//! * (viii) needs one of A1, A2 independent of the pair formed by the other
//!   two co-causes. Pairwise independence alone admits A2 = A0 xor A1, which
//!   gives a nonzero covariance.

use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::rational::Prob;
use crate::scm::{ResponseTable, Scm};
use crate::signs::{
    detect_monotonic_effect, directed_path_signs, monotonically_associated_idx, qualitative_cov_sign, Sign,
};
use crate::sufficient::{is_determinative, CoCause, Literal, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    Zero,
    One,
    Neither,
}

impl Flag {
    pub fn as_str(self) -> &'static str {
        match self {
            Flag::Zero => "zero",
            Flag::One => "one",
            Flag::Neither => "neither",
        }
    }
}

/// Known sign of an (unconditional) covariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CovSign {
    #[serde(rename = "<=0")]
    Le0,
    #[serde(rename = ">=0")]
    Ge0,
    #[serde(rename = "=0")]
    Eq0,
    #[serde(rename = "unknown")]
    Unknown,
}

impl CovSign {
    pub fn le0(self) -> bool {
        matches!(self, CovSign::Le0 | CovSign::Eq0)
    }

    pub fn ge0(self) -> bool {
        matches!(self, CovSign::Ge0 | CovSign::Eq0)
    }

    pub fn flip(self) -> CovSign {
        match self {
            CovSign::Le0 => CovSign::Ge0,
            CovSign::Ge0 => CovSign::Le0,
            s => s,
        }
    }

    pub fn of(value: &Prob) -> CovSign {
        if value.is_zero() {
            CovSign::Eq0
        } else if *value < Prob::zero() {
            CovSign::Le0
        } else {
            CovSign::Ge0
        }
    }

    pub fn parse(text: &str) -> Option<CovSign> {
        match text {
            "<=0" => Some(CovSign::Le0),
            ">=0" => Some(CovSign::Ge0),
            "=0" => Some(CovSign::Eq0),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            CovSign::Le0 => "<=0",
            CovSign::Ge0 => ">=0",
            CovSign::Eq0 => "=0",
            CovSign::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Representation,
    Structural,
    Oracle,
    Asserted,
}

impl Source {
    pub fn as_str(self) -> &'static str {
        match self {
            Source::Representation => "representation",
            Source::Structural => "structural",
            Source::Oracle => "oracle",
            Source::Asserted => "asserted",
        }
    }
}

/// Substantive premises that cannot be read off the graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Assertion {
    /// A3 == 0 in D's representation over parents x, y.
    NoSynergism {
        d: String,
        x: String,
        y: String,
    },
    /// The co-cause of the term with these literals is identically 0 or 1.
    CoCause {
        d: String,
        literals: Vec<Literal>,
        flag: Flag,
    },
    /// The co-causes of these terms are mutually independent.
    CoCauseIndependent {
        d: String,
        terms: Vec<Vec<Literal>>,
    },
    Cov {
        x: String,
        y: String,
        sign: CovSign,
    },
    Independent {
        x: String,
        y: String,
    },
}

fn literal_set(lits: &[Literal]) -> String {
    if lits.is_empty() {
        "1".to_string()
    } else {
        lits.iter().map(Literal::to_string).collect::<Vec<_>>().join("*")
    }
}

impl fmt::Display for Assertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Assertion::NoSynergism { d, x, y } => write!(f, "no-synergism {d} {x} {y}"),
            Assertion::CoCause { d, literals, flag } => {
                write!(f, "cocause {d} {} {}", literal_set(literals), flag.as_str())
            }
            Assertion::CoCauseIndependent { d, terms } => {
                let ts: Vec<String> = terms.iter().map(|t| literal_set(t)).collect();
                write!(f, "cocause-independent {d} {}", ts.join(" "))
            }
            Assertion::Cov { x, y, sign } => write!(f, "cov {x} {y} {}", sign.as_str()),
            Assertion::Independent { x, y } => write!(f, "independent {x} {y}"),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assertions {
    pub items: Vec<Assertion>,
}

impl Assertions {
    pub fn push(&mut self, a: Assertion) {
        self.items.push(a);
    }

    /// Asserted sign of Cov(x, y), in either order.
    pub fn cov(&self, x: &str, y: &str) -> Option<CovSign> {
        let pair = |a: &str, b: &str| (a == x && b == y) || (a == y && b == x);
        self.items.iter().find_map(|it| match it {
            Assertion::Cov { x: a, y: b, sign } if pair(a, b) => Some(*sign),
            Assertion::Independent { x: a, y: b } if pair(a, b) => Some(CovSign::Eq0),
            _ => None,
        })
    }

    pub fn independent(&self, x: &str, y: &str) -> bool {
        self.items
            .iter()
            .any(|it| matches!(it, Assertion::Independent { x: a, y: b } if (a == x && b == y) || (a == y && b == x)))
    }
}

/// Facts about `D = A0 | A1*E1 | A2*E2 | A3*E1*E2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepFacts {
    pub d: String,
    pub e1: String,
    pub e2: String,
    pub flags: [Flag; 4],
    pub a1_indep_a2: bool,
    pub a0_indep_a1: bool,
    pub a0_indep_a2: bool,
    /// A1 independent of the pair (A0, A2).
    pub a1_indep_a0a2: bool,
    /// A2 independent of the pair (A0, A1).
    pub a2_indep_a0a1: bool,
    pub e1_indep_e2: bool,
    pub cov_e1_e2: CovSign,
    /// One line per established fact, with its source.
    pub provenance: Vec<String>,
    /// Flags were computed from a representation and cannot be overridden.
    pub exact_flags: bool,
}

/// Index of a term's literal set among {}, {E1}, {E2}, {E1,E2}.
fn term_index(lits: &[Literal], e1: &str, e2: &str) -> Result<usize> {
    let mut k = 0;
    for l in lits {
        if l.complemented {
            return Err(Error::Premise(format!(
                "term over `{}` contains a complemented parent; the representation must use E1 and E2 uncomplemented",
                literal_set(lits)
            )));
        }
        let bit = if l.base == e1 {
            1
        } else if l.base == e2 {
            2
        } else {
            return Err(Error::Premise(format!("literal `{}` is neither `{e1}` nor `{e2}`", l.base)));
        };
        if k & bit != 0 {
            return Err(Error::RepeatedLiteral(l.base.clone()));
        }
        k |= bit;
    }
    Ok(k)
}

const A_NAMES: [&str; 4] = ["A0", "A1", "A2", "A3"];

impl RepFacts {
    /// No facts established.
    pub fn new(d: &str, e1: &str, e2: &str) -> Self {
        RepFacts {
            d: d.into(),
            e1: e1.into(),
            e2: e2.into(),
            flags: [Flag::Neither; 4],
            a1_indep_a2: false,
            a0_indep_a1: false,
            a0_indep_a2: false,
            a1_indep_a0a2: false,
            a2_indep_a0a1: false,
            e1_indep_e2: false,
            cov_e1_e2: CovSign::Unknown,
            provenance: Vec::new(),
            exact_flags: false,
        }
    }

    /// Exact co-cause facts for a two-parent equation and a determinative
    /// representation of it. Both parents must have positive effects.
    pub fn from_table(t: &ResponseTable, rep: &Representation, e1: &str, e2: &str) -> Result<Self> {
        check_two_parent_premise(t, e1, e2)?;
        if rep.target != t.node() {
            return Err(Error::Invalid(format!("representation is for `{}`, not `{}`", rep.target, t.node())));
        }
        if !is_determinative(t, &rep.terms)? {
            return Err(Error::NotDeterminative);
        }
        let n = t.num_states();
        let mut events = [vec![false; n], vec![false; n], vec![false; n], vec![false; n]];
        for term in &rep.terms {
            let k = term_index(&term.literals, e1, e2)?;
            match &term.cocause {
                CoCause::One => events[k].iter_mut().for_each(|b| *b = true),
                CoCause::Zero => {}
                CoCause::States(s) => s.iter().for_each(|&j| events[k][j] = true),
            }
        }
        let prob =
            |pred: &dyn Fn(usize) -> bool| -> Prob { (0..n).filter(|&j| pred(j)).map(|j| t.prob(j).clone()).sum() };
        let mut f = RepFacts::new(t.node(), e1, e2);
        f.exact_flags = true;
        for k in 0..4 {
            let p = prob(&|j| events[k][j]);
            f.flags[k] = if p.is_zero() {
                Flag::Zero
            } else if p.is_one() {
                Flag::One
            } else {
                Flag::Neither
            };
            if f.flags[k] != Flag::Neither {
                f.provenance.push(format!(
                    "{} == {} [representation]",
                    A_NAMES[k],
                    if f.flags[k] == Flag::Zero { 0 } else { 1 }
                ));
            }
        }
        let indep2 = |a: usize, b: usize| -> bool {
            prob(&|j| events[a][j] && events[b][j]) == prob(&|j| events[a][j]) * prob(&|j| events[b][j])
        };
        // x independent of the pair (y, z): factorization over all four cells.
        let indep_pair = |x: usize, y: usize, z: usize| -> bool {
            let px = prob(&|j| events[x][j]);
            [(false, false), (false, true), (true, false), (true, true)].iter().all(|&(vy, vz)| {
                let cell = prob(&|j| events[y][j] == vy && events[z][j] == vz);
                prob(&|j| events[x][j] && events[y][j] == vy && events[z][j] == vz) == &px * &cell
            })
        };
        f.a1_indep_a2 = indep2(1, 2);
        f.a0_indep_a1 = indep2(0, 1);
        f.a0_indep_a2 = indep2(0, 2);
        f.a1_indep_a0a2 = indep_pair(1, 0, 2);
        f.a2_indep_a0a1 = indep_pair(2, 0, 1);
        for (holds, text) in [
            (f.a1_indep_a2, "A1 _||_ A2"),
            (f.a0_indep_a1, "A0 _||_ A1"),
            (f.a0_indep_a2, "A0 _||_ A2"),
            (f.a1_indep_a0a2, "A1 _||_ (A0,A2)"),
            (f.a2_indep_a0a1, "A2 _||_ (A0,A1)"),
        ] {
            if holds {
                f.provenance.push(format!("{text} [representation]"));
            }
        }
        Ok(f)
    }

    /// Co-cause facts from assertions only.
    pub fn from_assertions(d: &str, e1: &str, e2: &str, asserts: &Assertions) -> Result<Self> {
        let mut f = RepFacts::new(d, e1, e2);
        f.apply_assertions(asserts)?;
        Ok(f)
    }

    /// Adds asserted co-cause facts. An assertion contradicting a fact already
    /// computed from a representation is a premise violation.
    pub fn apply_assertions(&mut self, asserts: &Assertions) -> Result<()> {
        for a in &asserts.items {
            match a {
                Assertion::NoSynergism { d, x, y } if *d == self.d => {
                    let pair: BTreeSet<&str> = [x.as_str(), y.as_str()].into();
                    if pair != [self.e1.as_str(), self.e2.as_str()].into() {
                        continue;
                    }
                    self.set_flag(3, Flag::Zero, &format!("no synergism between {x} and {y}"))?;
                }
                Assertion::CoCause { d, literals, flag } if *d == self.d => {
                    let k = term_index(literals, &self.e1, &self.e2)?;
                    self.set_flag(k, *flag, "cocause assertion")?;
                }
                Assertion::CoCauseIndependent { d, terms } if *d == self.d => {
                    let ks =
                        terms.iter().map(|t| term_index(t, &self.e1, &self.e2)).collect::<Result<BTreeSet<_>>>()?;
                    let has = |k: usize| ks.contains(&k);
                    if self.exact_flags {
                        let computed = (!(has(1) && has(2)) || self.a1_indep_a2)
                            && (!(has(0) && has(1)) || self.a0_indep_a1)
                            && (!(has(0) && has(2)) || self.a0_indep_a2)
                            && (!(has(0) && has(1) && has(2)) || (self.a1_indep_a0a2 && self.a2_indep_a0a1));
                        if !computed {
                            return Err(Error::Premise(format!(
                                "assertion `{a}` contradicts the co-cause distribution of the representation"
                            )));
                        }
                        continue;
                    }
                    if has(1) && has(2) {
                        self.a1_indep_a2 = true;
                    }
                    if has(0) && has(1) {
                        self.a0_indep_a1 = true;
                    }
                    if has(0) && has(2) {
                        self.a0_indep_a2 = true;
                    }
                    if has(0) && has(1) && has(2) {
                        self.a1_indep_a0a2 = true;
                        self.a2_indep_a0a1 = true;
                    }
                    let names: Vec<&str> = ks.iter().map(|&k| A_NAMES[k]).collect();
                    self.provenance.push(format!("{} mutually independent [asserted]", names.join(", ")));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn set_flag(&mut self, k: usize, flag: Flag, why: &str) -> Result<()> {
        let had = self.exact_flags;
        if had && self.flags[k] != flag {
            return Err(Error::Premise(format!(
                "assertion `{why}` says {} is {} but the representation gives {}",
                A_NAMES[k],
                flag.as_str(),
                self.flags[k].as_str()
            )));
        }
        if flag == Flag::Neither || (had && self.flags[k] == flag) {
            return Ok(());
        }
        self.flags[k] = flag;
        self.provenance.push(format!("{} == {} [asserted: {why}]", A_NAMES[k], if flag == Flag::Zero { 0 } else { 1 }));
        Ok(())
    }

    /// Establishes E1 _||_ E2 and the sign of Cov(E1, E2): graph structure
    /// first, then an exact Scm, then assertions.
    pub fn establish_parent_facts(&mut self, g: &Dag, scm: Option<&Scm>, asserts: &Assertions) -> Result<()> {
        let (e1, e2) = (self.e1.clone(), self.e2.clone());
        let (i1, i2) = (g.index(&e1)?, g.index(&e2)?);
        if g.d_separated_idx(&[i1], &[i2], &[])? {
            self.e1_indep_e2 = true;
            self.cov_e1_e2 = CovSign::Eq0;
            self.provenance.push(format!("{e1} _||_ {e2} [structural: d-separated given nothing]"));
            self.provenance.push(format!("Cov({e1},{e2}) =0 [structural]"));
            return Ok(());
        }
        match qualitative_cov_sign(g, &e1, &e2)? {
            Sign::Positive => self.cov_e1_e2 = CovSign::Ge0,
            Sign::Negative => self.cov_e1_e2 = CovSign::Le0,
            _ => {}
        }
        if self.cov_e1_e2 != CovSign::Unknown {
            self.provenance
                .push(format!("Cov({e1},{e2}) {} [structural: monotone association]", self.cov_e1_e2.as_str()));
        }
        if let Some(m) = scm {
            let dist = m.joint_distribution()?;
            let c = crate::oracle::conditional_covariance(&dist, &e1, &e2, &[])?;
            let exact = CovSign::of(&c);
            if exact == CovSign::Eq0 {
                // binary variables: zero covariance is independence
                self.e1_indep_e2 = true;
                self.provenance.push(format!("{e1} _||_ {e2} [oracle]"));
            }
            if self.cov_e1_e2 != exact {
                self.cov_e1_e2 = exact;
                self.provenance.push(format!("Cov({e1},{e2}) {} [oracle]", exact.as_str()));
            }
            return Ok(());
        }
        if !self.e1_indep_e2 && asserts.independent(&e1, &e2) {
            self.e1_indep_e2 = true;
            self.cov_e1_e2 = CovSign::Eq0;
            self.provenance.push(format!("{e1} _||_ {e2} [asserted]"));
        }
        if self.cov_e1_e2 == CovSign::Unknown {
            if let Some(s) = asserts.cov(&e1, &e2) {
                self.cov_e1_e2 = s;
                self.provenance.push(format!("Cov({e1},{e2}) {} [asserted]", s.as_str()));
            }
        }
        Ok(())
    }

    fn zero(&self, k: usize) -> bool {
        self.flags[k] == Flag::Zero
    }

    fn one(&self, k: usize) -> bool {
        self.flags[k] == Flag::One
    }
}

/// D must have exactly the parents E1 and E2, each with a positive effect.
pub fn check_two_parent_premise(t: &ResponseTable, e1: &str, e2: &str) -> Result<()> {
    let ps: BTreeSet<&str> = t.parents().iter().map(String::as_str).collect();
    if e1 == e2 || ps != [e1, e2].into() {
        return Err(Error::Premise(format!(
            "`{}` must have exactly the parents `{e1}` and `{e2}` (marginalize any others first)",
            t.node()
        )));
    }
    for e in [e1, e2] {
        let eff = detect_monotonic_effect(t, e)?;
        if eff.sign != Sign::Positive {
            return Err(Error::Premise(format!("`{e}` does not have a positive monotonic effect on `{}`", t.node())));
        }
    }
    Ok(())
}

/// Cov(x, y | given = stratum).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CovQuantity {
    pub x: String,
    pub y: String,
    pub given: String,
    pub stratum: u8,
}

impl CovQuantity {
    pub fn new(x: &str, y: &str, given: &str, stratum: u8) -> Self {
        CovQuantity { x: x.into(), y: y.into(), given: given.into(), stratum }
    }

    fn same_pair(&self, a: &str, b: &str) -> bool {
        (self.x == a && self.y == b) || (self.x == b && self.y == a)
    }
}

impl fmt::Display for CovQuantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cov({},{}|{}={})", self.x, self.y, self.given, self.stratum)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=0")]
    Le0,
    #[serde(rename = ">=0")]
    Ge0,
    #[serde(rename = "=0")]
    Eq0,
    #[serde(rename = "sign-equals")]
    SignEquals(CovQuantity),
}

impl Relation {
    pub fn flip(&self) -> Relation {
        match self {
            Relation::Le0 => Relation::Ge0,
            Relation::Ge0 => Relation::Le0,
            r => r.clone(),
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Relation::Le0 => f.write_str("<= 0"),
            Relation::Ge0 => f.write_str(">= 0"),
            Relation::Eq0 => f.write_str("= 0"),
            Relation::SignEquals(q) => write!(f, "has the sign of {q}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SignConclusion {
    pub quantity: CovQuantity,
    pub relation: Relation,
    pub case: String,
    pub premises: Vec<String>,
}

impl fmt::Display for SignConclusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}  [{}]", self.quantity, self.relation, self.case)
    }
}

/// Every two-parent case whose premises the facts establish.
pub fn theorem4(facts: &RepFacts) -> Vec<SignConclusion> {
    let RepFacts { d, e1, e2, .. } = facts;
    let f = facts;
    let cov = f.cov_e1_e2;
    let q = |s: u8| CovQuantity::new(e1, e2, d, s);
    let mut out = Vec::new();
    let mut emit = |case: &str, stratum: u8, relation: Relation, premises: Vec<String>| {
        let mut all = vec![
            format!("{d} has exactly the parents {e1}, {e2}"),
            format!("{e1} and {e2} have positive monotonic effects on {d}"),
        ];
        all.extend(premises);
        out.push(SignConclusion {
            quantity: q(stratum),
            relation,
            case: format!("two-parent ({case})"),
            premises: all,
        });
    };
    let a = |k: usize, v: u8| format!("A{k} == {v}");
    let cov_text = |rel: &str| format!("Cov({e1},{e2}) {rel}");
    let either = |v: u8, test: &dyn Fn(usize) -> bool| -> Option<String> {
        [1, 2].into_iter().find(|&k| test(k)).map(|k| a(k, v))
    };

    if f.zero(0) {
        emit("i", 1, Relation::Le0, vec![a(0, 0)]);
        if f.a1_indep_a2 && f.e1_indep_e2 {
            emit("ii", 0, Relation::Le0, vec![a(0, 0), "A1 _||_ A2".into(), format!("{e1} _||_ {e2}")]);
        }
    }
    if let Some(p) = either(1, &|k| f.one(k)) {
        if cov.le0() {
            emit("iii", 1, Relation::Le0, vec![p.clone(), cov_text("<= 0")]);
        }
        emit("iv", 0, Relation::Eq0, vec![p]);
    }
    if let Some(p) = either(0, &|k| f.zero(k)) {
        if cov.ge0() {
            emit("v", 1, Relation::Ge0, vec![p.clone(), cov_text(">= 0")]);
        }
        if cov.le0() {
            emit("vi", 0, Relation::Le0, vec![p, cov_text("<= 0")]);
        }
    }
    if f.zero(3) {
        if cov.le0() {
            emit("vii", 1, Relation::Le0, vec![a(3, 0), cov_text("<= 0")]);
        }
        let joint = if f.a1_indep_a0a2 {
            Some("A1 _||_ (A0,A2)")
        } else if f.a2_indep_a0a1 {
            Some("A2 _||_ (A0,A1)")
        } else {
            None
        };
        if let (Some(j), true) = (joint, f.e1_indep_e2) {
            emit("viii", 0, Relation::Eq0, vec![a(3, 0), j.to_string(), format!("{e1} _||_ {e2}")]);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Positive,
    Negative,
}

/// Complements each parent with a negative effect.
pub fn relabel_table(t: &ResponseTable, e1: &str, e2: &str, polarity: [Polarity; 2]) -> Result<ResponseTable> {
    let mut out = t.clone();
    for (e, p) in [(e1, polarity[0]), (e2, polarity[1])] {
        if p == Polarity::Negative {
            out = out.complement_parent(e)?;
        }
    }
    Ok(out)
}

/// `relabeled` describes D with every negative-effect parent replaced by its
/// complement (including the sign of Cov(E1, E2), which flips once per
/// complemented parent). Conclusions are read back on the original parents.
pub fn theorem4_negative_analogue(relabeled: &RepFacts, polarity: [Polarity; 2]) -> Vec<SignConclusion> {
    let flips = polarity.iter().filter(|&&p| p == Polarity::Negative).count();
    let mut out = theorem4(relabeled);
    for c in &mut out {
        if flips % 2 == 1 {
            c.relation = c.relation.flip();
        }
        if flips > 0 {
            c.case.push_str(" via complements");
            for (e, p) in [(&relabeled.e1, polarity[0]), (&relabeled.e2, polarity[1])] {
                if p == Polarity::Negative {
                    c.premises.push(format!("{e} has a negative effect; A-terms refer to ~{e}"));
                }
            }
        }
    }
    out
}

/// Node roles for the transfer results.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferNodes {
    pub d: String,
    pub e1: String,
    pub e2: String,
    pub f: String,
    pub g: String,
    pub q: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseCheck {
    pub clause: String,
    pub holds: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Transfer {
    #[serde(rename = "sign-equality")]
    SignEquality,
    #[serde(rename = "common-cause")]
    CommonCause,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseReport {
    pub kind: Transfer,
    pub nodes: TransferNodes,
    pub checks: Vec<PremiseCheck>,
    /// Sign equality only: Cov(F,E1) or Cov(G,E2) is known to be exactly 0.
    pub degenerate: bool,
    /// Common-cause form only: every Q_i reaches F and G with equal signs.
    pub q_agree: bool,
    /// Common-cause form only: every Q_i reaches F and G with opposite signs.
    pub q_oppose: bool,
}

impl PremiseReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.clause.as_str()).collect()
    }
}

fn dsep_check(g: &Dag, x: &[&str], y: &[&str], z: &[&str]) -> Result<PremiseCheck> {
    let holds = g.d_separated(x, y, z)?;
    let detail = if holds {
        String::from("d-separated")
    } else {
        let (xi, yi, zi) = (g.indices(x)?, g.indices(y)?, g.indices(z)?);
        match g.open_path(&xi, &yi, &zi)? {
            Some(p) => format!("open path {}", p.render(g)),
            None => String::new(),
        }
    };
    let set = |s: &[&str]| if s.len() == 1 { s[0].to_string() } else { format!("{{{}}}", s.join(",")) };
    Ok(PremiseCheck { clause: format!("{} _||_ {} | {}", set(x), set(y), set(z)), holds, detail })
}

fn require_parents(g: &Dag, n: &TransferNodes) -> Result<()> {
    let d = g.index(&n.d)?;
    for e in [&n.e1, &n.e2] {
        if !g.has_edge(g.index(e)?, d) {
            return Err(Error::NotAParent(e.clone(), n.d.clone()));
        }
    }
    g.index(&n.f)?;
    g.index(&n.g)?;
    g.indices(&n.q)?;
    Ok(())
}

/// Whether Cov(x, y) >= 0 can be established, and whether it is exactly 0.
fn nonnegative_cov(g: &Dag, x: &str, y: &str, scm: Option<&Scm>, asserts: &Assertions) -> Result<PremiseCheck> {
    let clause = format!("Cov({x},{y}) >= 0");
    let structural = qualitative_cov_sign(g, x, y)?;
    let mk = |holds: bool, detail: String| Ok(PremiseCheck { clause: clause.clone(), holds, detail });
    match structural {
        Sign::Zero => return mk(true, "=0 [structural: d-separated given nothing]".into()),
        Sign::Positive => return mk(true, "[structural: positive monotone association]".into()),
        _ => {}
    }
    if let Some(m) = scm {
        let c = crate::oracle::conditional_covariance(&m.joint_distribution()?, x, y, &[])?;
        let s = CovSign::of(&c);
        return mk(s.ge0(), format!("{} [oracle]", s.as_str()));
    }
    match asserts.cov(x, y) {
        Some(s) if s.ge0() => mk(true, format!("{} [asserted]", s.as_str())),
        _ => mk(false, "not established".into()),
    }
}

/// Sign-equality transfer: F, G d-separated given {E1,E2,D}; F from {E2,D}
/// given E1; G from {E1,D} given E2; Cov(F,E1) >= 0 and Cov(G,E2) >= 0.
pub fn check_thm5_premises(
    g: &Dag,
    n: &TransferNodes,
    scm: Option<&Scm>,
    asserts: &Assertions,
) -> Result<PremiseReport> {
    require_parents(g, n)?;
    let (d, e1, e2, f, gn) = (n.d.as_str(), n.e1.as_str(), n.e2.as_str(), n.f.as_str(), n.g.as_str());
    let mut checks = vec![
        dsep_check(g, &[f], &[gn], &[e1, e2, d])?,
        dsep_check(g, &[f], &[e2, d], &[e1])?,
        dsep_check(g, &[gn], &[e1, d], &[e2])?,
    ];
    let cf = nonnegative_cov(g, f, e1, scm, asserts)?;
    let cg = nonnegative_cov(g, gn, e2, scm, asserts)?;
    let degenerate = cf.detail.starts_with("=0") || cg.detail.starts_with("=0");
    checks.push(cf);
    checks.push(cg);
    Ok(PremiseReport {
        kind: Transfer::SignEquality,
        nodes: TransferNodes { q: Vec::new(), ..n.clone() },
        checks,
        degenerate,
        q_agree: false,
        q_oppose: false,
    })
}

/// Sufficient structural conditions for E[F | E, D, Q] to be nondecreasing
/// in E: (i) F _||_ D | Q+E and F, E positively associated (or unconnected);
/// (ii) F descends from E and D, F and E share no common cause, and every
/// directed path from E to F avoiding D is positive.
pub fn monotone_expectation_premise(g: &Dag, f: &str, e: &str, d: &str, q: &[String]) -> Result<bool> {
    Ok(monotone_expectation_reason(g, f, e, d, q)?.is_some())
}

fn monotone_expectation_reason(g: &Dag, f: &str, e: &str, d: &str, q: &[String]) -> Result<Option<&'static str>> {
    let (fi, ei, di) = (g.index(f)?, g.index(e)?, g.index(d)?);
    let mut z = g.indices(q)?;
    z.push(ei);
    if g.d_separated_idx(&[fi], &[di], &z)?
        && matches!(monotonically_associated_idx(g, fi, ei), Sign::Positive | Sign::Zero)
    {
        return Ok(Some("condition (i)"));
    }
    let desc_e = g.descendants_of(ei);
    let desc_d = g.descendants_of(di);
    if desc_e.contains(&fi) && desc_d.contains(&fi) && g.common_causes(fi, ei).is_empty() {
        let signs = directed_path_signs(g, ei, fi, &[di]);
        if signs.is_empty() || signs.uniform() == Some(Sign::Positive) {
            return Ok(Some("condition (ii)"));
        }
    }
    Ok(None)
}

/// Common-cause transfer: the five d-separation clauses, Q structure, the
/// monotone-expectation premises, and the Q path-sign pattern.
pub fn check_thm6_premises(g: &Dag, n: &TransferNodes) -> Result<PremiseReport> {
    require_parents(g, n)?;
    let (d, e1, e2, f, gn) = (n.d.as_str(), n.e1.as_str(), n.e2.as_str(), n.f.as_str(), n.g.as_str());
    let q: Vec<&str> = n.q.iter().map(String::as_str).collect();
    fn with<'a>(base: &[&'a str], q: &[&'a str]) -> Vec<&'a str> {
        base.iter().chain(q).copied().collect()
    }
    let mut checks = vec![
        dsep_check(g, &[f], &[gn], &with(&[e1, e2, d], &q))?,
        dsep_check(g, &[f], &[e2], &with(&[e1, d], &q))?,
        dsep_check(g, &[gn], &[e1], &with(&[e2, d], &q))?,
    ];
    if !q.is_empty() {
        checks.push(dsep_check(g, &q, &[e1, e2], &[d])?);
        checks.push(dsep_check(g, &q, &[d], &[])?);
        let (fi, gi) = (g.index(f)?, g.index(gn)?);
        let not_cause: Vec<&str> =
            q.iter().copied().filter(|&x| !g.is_common_cause(g.index(x).unwrap(), fi, gi)).collect();
        checks.push(PremiseCheck {
            clause: "each Q_i is a common cause of F and G".into(),
            holds: not_cause.is_empty(),
            detail: if not_cause.is_empty() {
                String::new()
            } else {
                format!("not common causes: {}", not_cause.join(","))
            },
        });
        let qi = g.indices(&q)?;
        let mut problem = None;
        'outer: for (a, &x) in qi.iter().enumerate() {
            for &y in &qi[a + 1..] {
                if g.has_edge(x, y) || g.has_edge(y, x) {
                    problem = Some(format!("edge between {} and {}", g.name(x), g.name(y)));
                    break 'outer;
                }
                let mut ax = g.ancestors_of(x);
                ax.insert(x);
                let mut ay = g.ancestors_of(y);
                ay.insert(y);
                if let Some(c) = ax.intersection(&ay).next() {
                    problem = Some(format!("{} and {} share the ancestor {}", g.name(x), g.name(y), g.name(*c)));
                    break 'outer;
                }
            }
        }
        checks.push(PremiseCheck {
            clause: "Q members structurally independent".into(),
            holds: problem.is_none(),
            detail: problem.unwrap_or_default(),
        });
    }
    for (x, e) in [(f, e1), (gn, e2)] {
        let reason = monotone_expectation_reason(g, x, e, d, &n.q)?;
        checks.push(PremiseCheck {
            clause: format!("E[{x}|{e},{d},Q] nondecreasing in {e}"),
            holds: reason.is_some(),
            detail: reason.unwrap_or("neither sufficient condition holds").to_string(),
        });
    }
    let (fi, gi) = (g.index(f)?, g.index(gn)?);
    let mut q_agree = true;
    let mut q_oppose = true;
    for &x in &q {
        let xi = g.index(x)?;
        match (directed_path_signs(g, xi, fi, &[]).uniform(), directed_path_signs(g, xi, gi, &[]).uniform()) {
            (Some(a), Some(b)) => {
                q_agree &= a == b;
                q_oppose &= a != b;
            }
            _ => {
                q_agree = false;
                q_oppose = false;
            }
        }
    }
    Ok(PremiseReport { kind: Transfer::CommonCause, nodes: n.clone(), checks, degenerate: false, q_agree, q_oppose })
}

/// Transfers a two-parent conclusion about Cov(E1,E2|D=s) to Cov(F,G|D=s).
pub fn transfer_sign(premises: &PremiseReport, inner: &SignConclusion) -> Result<SignConclusion> {
    if !premises.holds() {
        return Err(Error::Premise(format!("transfer premises fail: {}", premises.failures().join("; "))));
    }
    let n = &premises.nodes;
    if !inner.quantity.same_pair(&n.e1, &n.e2) || inner.quantity.given != n.d {
        return Err(Error::Invalid(format!(
            "inner conclusion is about {}, not Cov({},{}|{})",
            inner.quantity, n.e1, n.e2, n.d
        )));
    }
    let relation = match (premises.kind, &inner.relation) {
        (_, Relation::SignEquals(_)) => return Err(Error::Invalid("inner conclusion must be a sign bound".into())),
        (Transfer::SignEquality, _) if premises.degenerate => Relation::Eq0,
        (Transfer::SignEquality, r) => r.clone(),
        (Transfer::CommonCause, Relation::Eq0) => match (premises.q_agree, premises.q_oppose) {
            (true, true) => Relation::Eq0,
            (true, false) => Relation::Ge0,
            (false, true) => Relation::Le0,
            (false, false) => return Err(Error::Premise("Q path signs neither agree nor oppose".into())),
        },
        (Transfer::CommonCause, Relation::Ge0) if premises.q_agree => Relation::Ge0,
        (Transfer::CommonCause, Relation::Le0) if premises.q_oppose => Relation::Le0,
        (Transfer::CommonCause, r) => {
            return Err(Error::Premise(format!(
                "inner relation {r} needs Q paths of {} sign",
                if *r == Relation::Ge0 { "the same" } else { "opposite" }
            )))
        }
    };
    let tag = match premises.kind {
        Transfer::SignEquality => "sign-equality transfer",
        Transfer::CommonCause => "common-cause transfer",
    };
    let mut prem: Vec<String> = premises.checks.iter().map(|c| c.clause.clone()).collect();
    prem.push(format!("{} {}", inner.quantity, inner.relation));
    prem.extend(inner.premises.iter().cloned());
    Ok(SignConclusion {
        quantity: CovQuantity::new(&n.f, &n.g, &n.d, inner.quantity.stratum),
        relation,
        case: format!("{tag} of {}", inner.case),
        premises: prem,
    })
}

/// The bare sign-equality statement Cov(F,G|D=s) ~ Cov(E1,E2|D=s). When a
/// side covariance is exactly 0 the outer covariance is 0 instead.
pub fn sign_equality(premises: &PremiseReport, stratum: u8) -> Result<SignConclusion> {
    if premises.kind != Transfer::SignEquality {
        return Err(Error::Invalid("sign equality needs the sign-equality premises".into()));
    }
    if !premises.holds() {
        return Err(Error::Premise(format!("transfer premises fail: {}", premises.failures().join("; "))));
    }
    let n = &premises.nodes;
    let relation = if premises.degenerate {
        Relation::Eq0
    } else {
        Relation::SignEquals(CovQuantity::new(&n.e1, &n.e2, &n.d, stratum))
    };
    Ok(SignConclusion {
        quantity: CovQuantity::new(&n.f, &n.g, &n.d, stratum),
        relation,
        case: "sign-equality transfer".into(),
        premises: premises.checks.iter().map(|c| c.clause.clone()).collect(),
    })
}
