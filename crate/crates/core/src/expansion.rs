//! Graphs augmented with a node's sufficient-causation structure, and
//! independence queries within the D = 0 and D = 1 strata.
//!
//! For a representation `D = M_1 | ... | M_n` with `M_i = A_i * P_i`, the
//! expanded graph drops D's incoming edges and adds one AND node per term
//! (parents: its co-cause node, if any, and the bases of its literals), with
//! every AND node pointing into D. Co-cause nodes share the exogenous parent
//! U, which stands for D's response state.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Dag, EdgeSign, Path};
use crate::scm::{ExactDistribution, Scm, World};
use crate::sufficient::{is_determinative, CoCause, Conjunction, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    Base,
    Exogenous,
    Cocause,
    And,
    Or,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Base => "base",
            NodeKind::Exogenous => "exogenous",
            NodeKind::Cocause => "cocause",
            NodeKind::And => "and",
            NodeKind::Or => "or",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedDag {
    pub base: Dag,
    pub graph: Dag,
    pub target: String,
    pub exogenous: Option<String>,
    /// Co-cause node per term (None for identically-one co-causes).
    pub cocause_nodes: Vec<Option<String>>,
    pub and_nodes: Vec<String>,
    pub representation: Representation,
    kinds: BTreeMap<String, NodeKind>,
}

impl ExpandedDag {
    pub fn kind(&self, name: &str) -> Option<NodeKind> {
        self.kinds.get(name).copied()
    }

    pub fn auxiliary_nodes(&self) -> Vec<String> {
        self.exogenous
            .iter()
            .cloned()
            .chain(self.cocause_nodes.iter().flatten().cloned())
            .chain(self.and_nodes.iter().cloned())
            .collect()
    }

    /// Adds U (D's response state), each A_i and each M_i as derived columns
    /// of a base distribution. D's column already equals the OR of the M_i
    /// when the representation is determinative.
    pub fn derived_distribution(&self, base: &ExactDistribution) -> Result<ExactDistribution> {
        let d = base.column(&self.target)?;
        let lits: Vec<Vec<(usize, bool)>> = self
            .representation
            .terms
            .iter()
            .map(|t| t.literals.iter().map(|l| Ok((base.column(&l.base)?, l.complemented))).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let names = self.auxiliary_nodes();
        let terms = self.representation.terms.clone();
        let has_u = self.exogenous.is_some();
        let cocause_present: Vec<bool> = self.cocause_nodes.iter().map(Option::is_some).collect();
        base.with_derived(&names, |w: &World| {
            let state = w.states[d] as usize;
            let mut out = Vec::with_capacity(names.len());
            if has_u {
                out.push(state as u32);
            }
            let a: Vec<bool> = terms
                .iter()
                .map(|t| match &t.cocause {
                    CoCause::One => true,
                    CoCause::Zero => false,
                    CoCause::States(s) => s.contains(&state),
                })
                .collect();
            for (i, &present) in cocause_present.iter().enumerate() {
                if present {
                    out.push(a[i] as u32);
                }
            }
            for (i, l) in lits.iter().enumerate() {
                let m = a[i] && l.iter().all(|&(c, neg)| (w.values[c] == 1) != neg);
                out.push(m as u32);
            }
            out
        })
    }

    /// Node names with their kinds, in graph order.
    pub fn annotated(&self) -> Vec<(String, NodeKind)> {
        self.graph.names().iter().map(|n| (n.clone(), self.kinds[n])).collect()
    }
}

fn and_node_name(d: &str, i: usize, t: &Conjunction, cocause: Option<&str>) -> String {
    if t.literals.is_empty() {
        return format!("{d}.M{i}");
    }
    let lits: Vec<String> = t.literals.iter().map(|l| l.to_string()).collect();
    match cocause {
        Some(a) => format!("{a}*{}", lits.join("*")),
        None => lits.join("*"),
    }
}

/// Expands without checking determinativeness (no equation needed).
pub fn expand_structure(base: &Dag, d: &str, rep: &Representation) -> Result<ExpandedDag> {
    let di = base.index(d)?;
    if rep.target != d {
        return Err(Error::Invalid(format!("representation is for `{}`, not `{d}`", rep.target)));
    }
    let parents: BTreeSet<&str> = base.parents(di).iter().map(|&p| base.name(p)).collect();
    for t in &rep.terms {
        let mut seen = BTreeSet::new();
        for l in &t.literals {
            if !parents.contains(l.base.as_str()) {
                return Err(Error::ForeignLiteral(l.base.clone()));
            }
            if !seen.insert(l.base.as_str()) {
                return Err(Error::RepeatedLiteral(l.base.clone()));
            }
        }
    }
    let terms: Vec<&Conjunction> = rep.terms.iter().filter(|t| t.cocause != CoCause::Zero).collect();
    let mut kinds: BTreeMap<String, NodeKind> = base.names().iter().map(|n| (n.clone(), NodeKind::Base)).collect();
    kinds.insert(d.to_string(), NodeKind::Or);
    let mut names: Vec<String> = base.names().to_vec();
    fn claim(
        name: String,
        kind: NodeKind,
        kinds: &mut BTreeMap<String, NodeKind>,
        names: &mut Vec<String>,
    ) -> Result<String> {
        if kinds.insert(name.clone(), kind).is_some() {
            return Err(Error::DuplicateNode(name));
        }
        names.push(name.clone());
        Ok(name)
    }
    let needs_u = terms.iter().any(|t| matches!(t.cocause, CoCause::States(_)));
    let exogenous =
        if needs_u { Some(claim(format!("{d}.U"), NodeKind::Exogenous, &mut kinds, &mut names)?) } else { None };
    let mut cocause_nodes = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        cocause_nodes.push(match t.cocause {
            CoCause::States(_) => Some(claim(format!("{d}.A{i}"), NodeKind::Cocause, &mut kinds, &mut names)?),
            _ => None,
        });
    }
    let mut and_nodes = Vec::new();
    for (i, t) in terms.iter().enumerate() {
        let mut name = and_node_name(d, i, t, cocause_nodes[i].as_deref());
        if kinds.contains_key(&name) {
            name = format!("{d}.M{i}");
        }
        and_nodes.push(claim(name, NodeKind::And, &mut kinds, &mut names)?);
    }
    let mut edges: Vec<(String, String, EdgeSign)> = base
        .edges()
        .filter(|&(_, b, _)| b != di)
        .map(|(a, b, s)| (base.name(a).to_string(), base.name(b).to_string(), s))
        .collect();
    for (i, t) in terms.iter().enumerate() {
        let m = &and_nodes[i];
        if let (Some(u), Some(a)) = (&exogenous, &cocause_nodes[i]) {
            edges.push((u.clone(), a.clone(), EdgeSign::Unsigned));
            edges.push((a.clone(), m.clone(), EdgeSign::Positive));
        }
        for l in &t.literals {
            let s = if l.complemented { EdgeSign::Negative } else { EdgeSign::Positive };
            edges.push((l.base.clone(), m.clone(), s));
        }
        edges.push((m.clone(), d.to_string(), EdgeSign::Positive));
    }
    let graph = Dag::new(names, edges)?;
    let representation = Representation::new(d, terms.into_iter().cloned().collect());
    Ok(ExpandedDag {
        base: base.clone(),
        graph,
        target: d.to_string(),
        exogenous,
        cocause_nodes,
        and_nodes,
        representation,
        kinds,
    })
}

/// Expands `d` in `m` by a determinative representation of its equation.
pub fn expand(m: &Scm, d: &str, rep: &Representation) -> Result<ExpandedDag> {
    let t = m.equation(d)?;
    if !is_determinative(t, &rep.terms)? {
        return Err(Error::NotDeterminative);
    }
    expand_structure(m.graph(), d, rep)
}

/// {D} and every AND node for stratum 0 (each M_i is then 0); {D} for 1.
pub fn stratum_conditioning_set(e: &ExpandedDag, stratum: u8) -> Vec<String> {
    let mut out = vec![e.target.clone()];
    if stratum == 0 {
        out.extend(e.and_nodes.iter().cloned());
    }
    out
}

fn conditioning<S: AsRef<str>>(e: &ExpandedDag, z: &[S], stratum: u8) -> Result<Vec<usize>> {
    let mut names: Vec<String> = z.iter().map(|s| s.as_ref().to_string()).collect();
    for n in stratum_conditioning_set(e, stratum) {
        if !names.contains(&n) {
            names.push(n);
        }
    }
    e.graph.indices(&names)
}

/// d-separation of x and y given z plus the stratum's conditioning set. True
/// is a sound independence claim; false only means not implied independent.
pub fn stratum_independent<S: AsRef<str>>(e: &ExpandedDag, x: &str, y: &str, z: &[S], stratum: u8) -> Result<bool> {
    let (xi, yi) = (e.graph.index(x)?, e.graph.index(y)?);
    let zi = conditioning(e, z, stratum)?;
    e.graph.d_separated_idx(&[xi], &[yi], &zi)
}

/// Witness of a stratum dependence claim, when one exists.
pub fn stratum_open_path<S: AsRef<str>>(
    e: &ExpandedDag,
    x: &str,
    y: &str,
    z: &[S],
    stratum: u8,
) -> Result<Option<Path>> {
    let (xi, yi) = (e.graph.index(x)?, e.graph.index(y)?);
    let zi = conditioning(e, z, stratum)?;
    e.graph.open_path(&[xi], &[yi], &zi)
}
