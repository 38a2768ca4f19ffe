//! Monotonic effects, edge and path signs, monotonic association.

use std::fmt;
use std::ops::Mul;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeSign, Path};
use crate::scm::{ResponseTable, Scm};
use crate::sufficient::canonical_representation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Positive,
    Negative,
    Zero,
    Undefined,
}

impl Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        use Sign::*;
        match (self, rhs) {
            (Undefined, _) | (_, Undefined) => Undefined,
            (Zero, _) | (_, Zero) => Zero,
            (Positive, x) | (x, Positive) => x,
            (Negative, Negative) => Positive,
        }
    }
}

impl From<EdgeSign> for Sign {
    fn from(s: EdgeSign) -> Sign {
        match s {
            EdgeSign::Positive => Sign::Positive,
            EdgeSign::Negative => Sign::Negative,
            EdgeSign::Unsigned => Sign::Undefined,
        }
    }
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Positive => Sign::Negative,
            Sign::Negative => Sign::Positive,
            s => s,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Negative => "negative",
            Sign::Zero => "zero",
            Sign::Undefined => "undefined",
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of a monotonicity scan. `degenerate` marks a parent the output never
/// depends on; its sign is reported as positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneEffect {
    pub sign: Sign,
    pub degenerate: bool,
}

pub fn detect_monotonic_effect(t: &ResponseTable, e: &str) -> Result<MonotoneEffect> {
    let k = t.parent_position(e)?;
    let mut up = false;
    let mut down = false;
    for &row in t.rows() {
        for c in (0..t.num_configs()).filter(|c| c >> k & 1 == 0) {
            let lo = row >> c & 1;
            let hi = row >> (c | 1 << k) & 1;
            up |= hi > lo;
            down |= hi < lo;
        }
    }
    Ok(match (up, down) {
        (false, false) => MonotoneEffect { sign: Sign::Positive, degenerate: true },
        (true, false) => MonotoneEffect { sign: Sign::Positive, degenerate: false },
        (false, true) => MonotoneEffect { sign: Sign::Negative, degenerate: false },
        (true, true) => MonotoneEffect { sign: Sign::Undefined, degenerate: false },
    })
}

/// Positive iff no canonical term contains the complement of `e`, negative iff
/// none contains `e` itself. A parent absent from every term reads positive.
pub fn monotonic_effect_via_canonical(t: &ResponseTable, e: &str) -> Result<Sign> {
    t.parent_position(e)?;
    let rep = canonical_representation(&t.dedupe_states());
    let mut pos = false;
    let mut neg = false;
    for term in &rep.terms {
        for l in term.literals.iter().filter(|l| l.base == e) {
            if l.complemented {
                neg = true;
            } else {
                pos = true;
            }
        }
    }
    Ok(match (pos, neg) {
        (_, false) => Sign::Positive,
        (false, true) => Sign::Negative,
        (true, true) => Sign::Undefined,
    })
}

/// The edge sign an equation induces on the edge from `parent`.
pub fn induced_edge_sign(t: &ResponseTable, parent: &str) -> Result<EdgeSign> {
    let eff = detect_monotonic_effect(t, parent)?;
    Ok(match eff.sign {
        Sign::Positive => EdgeSign::Positive,
        Sign::Negative => EdgeSign::Negative,
        _ => EdgeSign::Unsigned,
    })
}

/// Every declared edge sign must match the equation of its head. Degenerate
/// edges accept either sign.
pub fn validate_edge_signs(g: &Dag, tables: &[&ResponseTable]) -> Result<()> {
    for t in tables {
        let d = g.index(t.node())?;
        for p in t.parents() {
            let pi = g.index(p)?;
            let declared = g.edge_sign(pi, d).ok_or_else(|| Error::NotAParent(p.clone(), t.node().into()))?;
            if declared == EdgeSign::Unsigned {
                continue;
            }
            let eff = detect_monotonic_effect(t, p)?;
            let ok = eff.degenerate || Sign::from(declared) == eff.sign;
            if !ok {
                return Err(Error::Equation {
                    node: t.node().to_string(),
                    reason: format!(
                        "edge {p} -> {} declared {} but the equation's effect is {}",
                        t.node(),
                        declared.symbol().unwrap_or("?"),
                        eff.sign
                    ),
                });
            }
        }
    }
    Ok(())
}

/// The graph of an Scm with every edge signed from its equation.
pub fn signed_graph(m: &Scm) -> Result<Dag> {
    let g = m.graph();
    let mut signs = Vec::new();
    for t in m.equations() {
        let d = g.index(t.node())?;
        for p in t.parents() {
            signs.push(((g.index(p)?, d), induced_edge_sign(t, p)?));
        }
    }
    g.with_signs(signs)
}

pub fn path_sign(g: &Dag, p: &Path) -> Result<Sign> {
    if !p.is_directed() {
        return Err(Error::InvalidPath("directed"));
    }
    let mut s = Sign::Positive;
    for w in p.nodes.windows(2) {
        let e = g.edge_sign(w[0], w[1]).ok_or(Error::InvalidPath("a path of the graph"))?;
        s = s * Sign::from(e);
    }
    Ok(s)
}

/// Set of signs realized by directed paths, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SignSet(u8);

impl SignSet {
    const POS: u8 = 1;
    const NEG: u8 = 2;
    const UNDEF: u8 = 4;

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, s: Sign) -> bool {
        self.0 & Self::bit(s) != 0
    }

    /// The one sign every path has, if all paths share a defined sign.
    pub fn uniform(self) -> Option<Sign> {
        match self.0 {
            Self::POS => Some(Sign::Positive),
            Self::NEG => Some(Sign::Negative),
            _ => None,
        }
    }

    fn bit(s: Sign) -> u8 {
        match s {
            Sign::Positive => Self::POS,
            Sign::Negative => Self::NEG,
            _ => Self::UNDEF,
        }
    }

    fn insert(&mut self, s: Sign) {
        self.0 |= Self::bit(s);
    }

    fn times(self, e: EdgeSign) -> SignSet {
        let mut out = SignSet::default();
        for s in [Sign::Positive, Sign::Negative, Sign::Undefined] {
            if self.contains(s) {
                out.insert(s * Sign::from(e));
            }
        }
        out
    }
}

/// Signs of all directed paths from `from` to `to` that avoid `avoid`.
pub fn directed_path_signs(g: &Dag, from: usize, to: usize, avoid: &[usize]) -> SignSet {
    if from == to || avoid.contains(&from) || avoid.contains(&to) {
        return SignSet::default();
    }
    let mut acc = vec![SignSet::default(); g.len()];
    acc[from].insert(Sign::Positive);
    for &n in g.topological_order() {
        if acc[n].is_empty() || n == to {
            continue;
        }
        for &c in g.children(n) {
            if avoid.contains(&c) {
                continue;
            }
            let add = acc[n].times(g.edge_sign(n, c).unwrap_or_default());
            acc[c].0 |= add.0;
        }
    }
    acc[to]
}

/// Both clauses checked together: directed paths between `x` and `y`, and for
/// each common cause the sign pairs of paths into `x` (avoiding `y`) and into
/// `y` (avoiding `x`). Zero when there are neither paths nor common causes.
pub fn monotonically_associated_idx(g: &Dag, x: usize, y: usize) -> Sign {
    if x == y {
        return Sign::Positive;
    }
    let mut direct = directed_path_signs(g, x, y, &[]);
    direct.0 |= directed_path_signs(g, y, x, &[]).0;
    let causes = g.common_causes(x, y);
    if direct.is_empty() && causes.is_empty() {
        return Sign::Zero;
    }
    let mut positive = direct.is_empty() || direct.uniform() == Some(Sign::Positive);
    let mut negative = direct.is_empty() || direct.uniform() == Some(Sign::Negative);
    for c in causes {
        let sx = directed_path_signs(g, c, x, &[y]).uniform();
        let sy = directed_path_signs(g, c, y, &[x]).uniform();
        match (sx, sy) {
            (Some(a), Some(b)) => {
                positive &= a == b;
                negative &= a != b;
            }
            _ => {
                positive = false;
                negative = false;
            }
        }
    }
    match (positive, negative) {
        (true, false) => Sign::Positive,
        (false, true) => Sign::Negative,
        (true, true) => Sign::Zero,
        (false, false) => Sign::Undefined,
    }
}

pub fn monotonically_associated(g: &Dag, x: &str, y: &str) -> Result<Sign> {
    Ok(monotonically_associated_idx(g, g.index(x)?, g.index(y)?))
}

/// Claimed sign of Cov(x, y): positive means >= 0, negative means <= 0, zero
/// means exactly 0 (d-separated given nothing), undefined means no claim.
pub fn qualitative_cov_sign(g: &Dag, x: &str, y: &str) -> Result<Sign> {
    let (xi, yi) = (g.index(x)?, g.index(y)?);
    if xi != yi && g.d_separated_idx(&[xi], &[yi], &[])? {
        return Ok(Sign::Zero);
    }
    Ok(monotonically_associated_idx(g, xi, yi))
}
