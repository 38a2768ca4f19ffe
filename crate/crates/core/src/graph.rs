//! Directed acyclic graphs over named binary nodes.
//!
//! Node order is declaration order. Every node list handed out by this module
//! (parents, children, ancestor sets) is sorted by that order so downstream
//! truth-table indexing is deterministic.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSign {
    Positive,
    Negative,
    #[default]
    Unsigned,
}

impl EdgeSign {
    pub fn symbol(self) -> Option<&'static str> {
        match self {
            EdgeSign::Positive => Some("+"),
            EdgeSign::Negative => Some("-"),
            EdgeSign::Unsigned => None,
        }
    }
}

/// Immutable DAG. Build with [`Dag::new`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    names: Vec<String>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    signs: BTreeMap<(usize, usize), EdgeSign>,
    topo: Vec<usize>,
}

/// One step of a path: the edge between `nodes[i]` and `nodes[i + 1]`
/// points forward when `forward[i]` is true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub nodes: Vec<usize>,
    pub forward: Vec<bool>,
}

impl Path {
    pub fn is_directed(&self) -> bool {
        self.forward.iter().all(|&f| f)
    }

    pub fn render(&self, g: &Dag) -> String {
        let mut out = g.name(self.nodes[0]).to_string();
        for (i, &f) in self.forward.iter().enumerate() {
            out.push_str(if f { " -> " } else { " <- " });
            out.push_str(g.name(self.nodes[i + 1]));
        }
        out
    }
}

impl Dag {
    pub fn new<N, S, E>(nodes: N, edges: E) -> Result<Self>
    where
        N: IntoIterator<Item = S>,
        S: Into<String>,
        E: IntoIterator<Item = (String, String, EdgeSign)>,
    {
        let names: Vec<String> = nodes.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(names.len());
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(Error::DuplicateNode(n.clone()));
            }
        }
        let n = names.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        let mut signs = BTreeMap::new();
        for (a, b, s) in edges {
            let ia = *index.get(&a).ok_or_else(|| Error::UnknownNode(a.clone()))?;
            let ib = *index.get(&b).ok_or_else(|| Error::UnknownNode(b.clone()))?;
            if ia == ib {
                return Err(Error::SelfLoop(a));
            }
            if signs.insert((ia, ib), s).is_some() {
                return Err(Error::DuplicateEdge(a, b));
            }
            parents[ib].push(ia);
            children[ia].push(ib);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }
        let topo = topological_order(&parents, &children).map_err(|i| Error::Cycle(names[i].clone()))?;
        Ok(Dag { names, index, parents, children, signs, topo })
    }

    /// Convenience constructor for unsigned edges given as name pairs.
    pub fn from_edges(nodes: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        Dag::new(nodes.iter().copied(), edges.iter().map(|(a, b)| (a.to_string(), b.to_string(), EdgeSign::Unsigned)))
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn indices<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index(n.as_ref())).collect()
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.signs.contains_key(&(a, b))
    }

    pub fn edge_sign(&self, a: usize, b: usize) -> Option<EdgeSign> {
        self.signs.get(&(a, b)).copied()
    }

    /// Edges in (from, to) order with their signs.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, EdgeSign)> + '_ {
        self.signs.iter().map(|(&(a, b), &s)| (a, b, s))
    }

    /// Copy of the graph with replaced edge signs.
    pub fn with_signs(&self, signs: impl IntoIterator<Item = ((usize, usize), EdgeSign)>) -> Result<Dag> {
        let mut g = self.clone();
        for ((a, b), s) in signs {
            match g.signs.get_mut(&(a, b)) {
                Some(slot) => *slot = s,
                None => return Err(Error::Invalid(format!("no edge {} -> {}", self.name(a), self.name(b)))),
            }
        }
        Ok(g)
    }

    pub fn ancestors_of(&self, i: usize) -> BTreeSet<usize> {
        closure(i, &self.parents)
    }

    pub fn descendants_of(&self, i: usize) -> BTreeSet<usize> {
        closure(i, &self.children)
    }

    pub fn ancestors(&self, name: &str) -> Result<Vec<String>> {
        let i = self.index(name)?;
        Ok(self.ancestors_of(i).into_iter().map(|j| self.names[j].clone()).collect())
    }

    pub fn descendants(&self, name: &str) -> Result<Vec<String>> {
        let i = self.index(name)?;
        Ok(self.descendants_of(i).into_iter().map(|j| self.names[j].clone()).collect())
    }

    /// Nodes reachable from `from` by a directed path that never enters `avoid`.
    /// `from` itself is included.
    pub fn reachable_avoiding(&self, from: usize, avoid: Option<usize>) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        if Some(from) == avoid {
            return seen;
        }
        seen[from] = true;
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            for &c in &self.children[n] {
                if !seen[c] && Some(c) != avoid {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        seen
    }

    /// `c` has a directed path to `b` not through `a` and one to `a` not through `b`.
    pub fn is_common_cause(&self, c: usize, a: usize, b: usize) -> bool {
        if c == a || c == b || a == b {
            return false;
        }
        self.reachable_avoiding(c, Some(b))[a] && self.reachable_avoiding(c, Some(a))[b]
    }

    pub fn common_causes(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.is_common_cause(c, a, b)).collect()
    }

    fn check_disjoint(&self, sets: &[&[usize]]) -> Result<()> {
        let mut seen = vec![false; self.len()];
        for s in sets {
            let mut local = BTreeSet::new();
            for &i in *s {
                if !local.insert(i) {
                    continue;
                }
                if seen[i] {
                    return Err(Error::OverlappingSets(self.names[i].clone()));
                }
                seen[i] = true;
            }
        }
        Ok(())
    }

    /// Marks every node that is in `z` or has a descendant in `z`.
    fn ancestral_closure(&self, z: &[usize]) -> Vec<bool> {
        let mut mark = vec![false; self.len()];
        let mut stack: Vec<usize> = z.to_vec();
        for &i in z {
            mark[i] = true;
        }
        while let Some(n) = stack.pop() {
            for &p in &self.parents[n] {
                if !mark[p] {
                    mark[p] = true;
                    stack.push(p);
                }
            }
        }
        mark
    }

    /// Index-based d-separation by active-trail reachability.
    pub fn d_separated_idx(&self, x: &[usize], y: &[usize], z: &[usize]) -> Result<bool> {
        self.check_disjoint(&[x, y, z])?;
        let reach = self.active_reachable(x, z);
        Ok(!y.iter().any(|&i| reach[i]))
    }

    /// Nodes connected to some member of `x` by a path that is open given `z`.
    pub fn active_reachable(&self, x: &[usize], z: &[usize]) -> Vec<bool> {
        let n = self.len();
        let mut in_z = vec![false; n];
        for &i in z {
            in_z[i] = true;
        }
        let anc = self.ancestral_closure(z);
        // visited[node][0] = arrived travelling up (from a child),
        // visited[node][1] = arrived travelling down (from a parent).
        let mut visited = vec![[false; 2]; n];
        let mut reach = vec![false; n];
        let mut queue: VecDeque<(usize, usize)> = x.iter().map(|&i| (i, 0)).collect();
        while let Some((node, dir)) = queue.pop_front() {
            if visited[node][dir] {
                continue;
            }
            visited[node][dir] = true;
            if !in_z[node] {
                reach[node] = true;
            }
            if dir == 0 {
                if !in_z[node] {
                    queue.extend(self.parents[node].iter().map(|&p| (p, 0)));
                    queue.extend(self.children[node].iter().map(|&c| (c, 1)));
                }
            } else {
                if !in_z[node] {
                    queue.extend(self.children[node].iter().map(|&c| (c, 1)));
                }
                if anc[node] {
                    queue.extend(self.parents[node].iter().map(|&p| (p, 0)));
                }
            }
        }
        reach
    }

    pub fn d_separated<S: AsRef<str>>(&self, x: &[S], y: &[S], z: &[S]) -> Result<bool> {
        let (x, y, z) = (self.indices(x)?, self.indices(y)?, self.indices(z)?);
        self.d_separated_idx(&x, &y, &z)
    }

    /// First open path (depth-first, neighbours in declaration order) from a
    /// member of `x` to a member of `y` given `z`, or `None` when separated.
    pub fn open_path(&self, x: &[usize], y: &[usize], z: &[usize]) -> Result<Option<Path>> {
        self.check_disjoint(&[x, y, z])?;
        let n = self.len();
        let mut in_z = vec![false; n];
        for &i in z {
            in_z[i] = true;
        }
        let anc = self.ancestral_closure(z);
        let mut is_target = vec![false; n];
        for &i in y {
            is_target[i] = true;
        }
        let ctx = PathSearch { g: self, in_z: &in_z, anc: &anc, is_target: &is_target };
        for &start in x {
            let mut nodes = vec![start];
            let mut forward = Vec::new();
            let mut on_path = vec![false; n];
            on_path[start] = true;
            if ctx.dfs(&mut nodes, &mut forward, &mut on_path) {
                return Ok(Some(Path { nodes, forward }));
            }
        }
        Ok(None)
    }

    /// Whether a literal path is blocked given `z` (path-blocking definition).
    pub fn path_blocked(&self, p: &Path, z: &[usize]) -> bool {
        let mut in_z = vec![false; self.len()];
        for &i in z {
            in_z[i] = true;
        }
        let anc = self.ancestral_closure(z);
        (1..p.nodes.len().saturating_sub(1)).any(|k| {
            let node = p.nodes[k];
            let collider = p.forward[k - 1] && !p.forward[k];
            if collider {
                !anc[node]
            } else {
                in_z[node]
            }
        })
    }

    /// Marginalization is legal iff no node of `w` is a common cause of two
    /// retained nodes.
    pub fn marginalization_blocker(&self, w: &[usize]) -> Option<(usize, usize, usize)> {
        let mut in_w = vec![false; self.len()];
        for &i in w {
            in_w[i] = true;
        }
        let retained: Vec<usize> = (0..self.len()).filter(|&i| !in_w[i]).collect();
        for &c in w {
            for (k, &a) in retained.iter().enumerate() {
                for &b in &retained[k + 1..] {
                    if self.is_common_cause(c, a, b) {
                        return Some((c, a, b));
                    }
                }
            }
        }
        None
    }

    pub fn can_marginalize<S: AsRef<str>>(&self, w: &[S]) -> Result<bool> {
        let w = self.indices(w)?;
        Ok(self.marginalization_blocker(&w).is_none())
    }

    /// Retained node `r`'s parents after contracting every directed path whose
    /// interior lies in `w`, with the sign carried by those paths.
    pub(crate) fn contracted_parents(&self, in_w: &[bool], r: usize) -> BTreeMap<usize, EdgeSign> {
        // Walk backwards from r through w-nodes, composing signs.
        let mut out: BTreeMap<usize, Vec<EdgeSign>> = BTreeMap::new();
        let mut stack: Vec<(usize, EdgeSign)> = vec![(r, EdgeSign::Positive)];
        while let Some((node, acc)) = stack.pop() {
            for &p in &self.parents[node] {
                let s = compose(self.signs[&(p, node)], acc);
                if in_w[p] {
                    stack.push((p, s));
                } else {
                    out.entry(p).or_default().push(s);
                }
            }
        }
        out.into_iter()
            .map(|(p, ss)| {
                let first = ss[0];
                let sign = if ss.iter().all(|&s| s == first) { first } else { EdgeSign::Unsigned };
                (p, sign)
            })
            .collect()
    }

    /// The marginalization over `w`: retained nodes in their original order,
    /// with an edge a -> b iff a -> b exists or a directed path from a to b
    /// runs only through `w`. Contracted edges keep a sign only when every
    /// contributing path agrees on it.
    pub fn marginalize_idx(&self, w: &[usize]) -> Result<Dag> {
        if let Some((c, a, b)) = self.marginalization_blocker(w) {
            return Err(Error::IllegalMarginalization(
                self.names[c].clone(),
                self.names[a].clone(),
                self.names[b].clone(),
            ));
        }
        let mut in_w = vec![false; self.len()];
        for &i in w {
            in_w[i] = true;
        }
        let retained: Vec<usize> = (0..self.len()).filter(|&i| !in_w[i]).collect();
        let mut edges = Vec::new();
        for &r in &retained {
            for (p, s) in self.contracted_parents(&in_w, r) {
                edges.push((self.names[p].clone(), self.names[r].clone(), s));
            }
        }
        Dag::new(retained.iter().map(|&i| self.names[i].clone()), edges)
    }

    pub fn marginalize<S: AsRef<str>>(&self, w: &[S]) -> Result<Dag> {
        let w = self.indices(w)?;
        self.marginalize_idx(&w)
    }

    /// Same node names and the same signed edge set, ignoring declaration order.
    pub fn isomorphic_by_name(&self, other: &Dag) -> bool {
        let a: BTreeSet<&String> = self.names.iter().collect();
        let b: BTreeSet<&String> = other.names.iter().collect();
        if a != b {
            return false;
        }
        let ea: BTreeSet<(&str, &str, EdgeSign)> =
            self.edges().map(|(x, y, s)| (self.name(x), self.name(y), s)).collect();
        let eb: BTreeSet<(&str, &str, EdgeSign)> =
            other.edges().map(|(x, y, s)| (other.name(x), other.name(y), s)).collect();
        ea == eb
    }
}

impl fmt::Display for Dag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.names {
            writeln!(f, "node {n}")?;
        }
        for (a, b, s) in self.edges() {
            match s.symbol() {
                Some(sym) => writeln!(f, "edge {} {} {}", self.names[a], self.names[b], sym)?,
                None => writeln!(f, "edge {} {}", self.names[a], self.names[b])?,
            }
        }
        Ok(())
    }
}

pub(crate) fn compose(a: EdgeSign, b: EdgeSign) -> EdgeSign {
    use EdgeSign::*;
    match (a, b) {
        (Unsigned, _) | (_, Unsigned) => Unsigned,
        (Positive, x) | (x, Positive) => x,
        (Negative, Negative) => Positive,
    }
}

struct PathSearch<'a> {
    g: &'a Dag,
    in_z: &'a [bool],
    anc: &'a [bool],
    is_target: &'a [bool],
}

impl PathSearch<'_> {
    fn interior_open(&self, node: usize, came_forward: bool, go_forward: bool) -> bool {
        if came_forward && !go_forward {
            self.anc[node]
        } else {
            !self.in_z[node]
        }
    }

    fn dfs(&self, nodes: &mut Vec<usize>, forward: &mut Vec<bool>, on_path: &mut [bool]) -> bool {
        let cur = *nodes.last().unwrap();
        let mut nbrs: Vec<(usize, bool)> = self.g.children[cur]
            .iter()
            .map(|&c| (c, true))
            .chain(self.g.parents[cur].iter().map(|&p| (p, false)))
            .collect();
        nbrs.sort_unstable();
        for (next, fwd) in nbrs {
            if on_path[next] {
                continue;
            }
            if let Some(&came) = forward.last() {
                if !self.interior_open(cur, came, fwd) {
                    continue;
                }
            }
            nodes.push(next);
            forward.push(fwd);
            if self.is_target[next] {
                return true;
            }
            on_path[next] = true;
            if self.dfs(nodes, forward, on_path) {
                return true;
            }
            on_path[next] = false;
            nodes.pop();
            forward.pop();
        }
        false
    }
}

fn closure(start: usize, adj: &[Vec<usize>]) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    let mut stack = vec![start];
    while let Some(n) = stack.pop() {
        for &m in &adj[n] {
            if out.insert(m) {
                stack.push(m);
            }
        }
    }
    out
}

/// Kahn's algorithm, ties broken by declaration order. Returns a node on a
/// cycle on failure.
fn topological_order(parents: &[Vec<usize>], children: &[Vec<usize>]) -> std::result::Result<Vec<usize>, usize> {
    let n = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(&i) = ready.iter().next() {
        ready.remove(&i);
        order.push(i);
        for &c in &children[i] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).find(|&i| indeg[i] > 0).unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> Dag {
        Dag::from_edges(&["A", "B", "C"], &[("A", "B"), ("B", "C")]).unwrap()
    }

    #[test]
    fn descendants_of_chain_head() {
        assert_eq!(chain().descendants("A").unwrap(), vec!["B", "C"]);
        assert_eq!(chain().ancestors("C").unwrap(), vec!["A", "B"]);
    }

    #[test]
    fn isolated_node_has_no_ancestors() {
        let g = Dag::from_edges(&["X", "Y"], &[]).unwrap();
        assert!(g.ancestors("X").unwrap().is_empty());
        assert!(g.d_separated(&["X"], &["Y"], &[] as &[&str]).unwrap());
    }

    #[test]
    fn unknown_node_is_an_error() {
        assert_eq!(chain().ancestors("Q"), Err(Error::UnknownNode("Q".into())));
    }

    #[test]
    fn rejects_cycles_loops_and_duplicates() {
        assert!(matches!(Dag::from_edges(&["A", "B"], &[("A", "B"), ("B", "A")]), Err(Error::Cycle(_))));
        assert!(matches!(Dag::from_edges(&["A"], &[("A", "A")]), Err(Error::SelfLoop(_))));
        assert!(matches!(Dag::from_edges(&["A", "B"], &[("A", "B"), ("A", "B")]), Err(Error::DuplicateEdge(..))));
        assert!(matches!(Dag::from_edges(&["A", "A"], &[]), Err(Error::DuplicateNode(_))));
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = chain();
        assert!(matches!(g.d_separated(&["A"], &["A"], &[] as &[&str]), Err(Error::OverlappingSets(_))));
        assert!(matches!(g.d_separated(&["A"], &["C"], &["A"]), Err(Error::OverlappingSets(_))));
    }

    #[test]
    fn chain_fork_collider() {
        let g = chain();
        assert!(!g.d_separated(&["A"], &["C"], &[] as &[&str]).unwrap());
        assert!(g.d_separated(&["A"], &["C"], &["B"]).unwrap());

        let fork = Dag::from_edges(&["C", "X", "Y"], &[("C", "X"), ("C", "Y")]).unwrap();
        assert!(!fork.d_separated(&["X"], &["Y"], &[] as &[&str]).unwrap());
        assert!(fork.d_separated(&["X"], &["Y"], &["C"]).unwrap());

        let coll = Dag::from_edges(&["X", "Y", "D", "K"], &[("X", "D"), ("Y", "D"), ("D", "K")]).unwrap();
        assert!(coll.d_separated(&["X"], &["Y"], &[] as &[&str]).unwrap());
        assert!(!coll.d_separated(&["X"], &["Y"], &["D"]).unwrap());
        assert!(!coll.d_separated(&["X"], &["Y"], &["K"]).unwrap());
    }

    #[test]
    fn witness_path_matches_blocking_definition() {
        let coll = Dag::from_edges(&["X", "Y", "D"], &[("X", "D"), ("Y", "D")]).unwrap();
        let p = coll.open_path(&[0], &[1], &[2]).unwrap().unwrap();
        assert_eq!(p.render(&coll), "X -> D <- Y");
        assert!(!coll.path_blocked(&p, &[2]));
        assert!(coll.open_path(&[0], &[1], &[]).unwrap().is_none());
    }

    #[test]
    fn marginalization_legality() {
        let g = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        assert!(g.can_marginalize(&["A"]).unwrap());
        let fork = Dag::from_edges(&["C", "A", "B"], &[("C", "A"), ("C", "B")]).unwrap();
        assert!(!fork.can_marginalize(&["C"]).unwrap());
        assert!(matches!(fork.marginalize(&["C"]), Err(Error::IllegalMarginalization(..))));
    }

    #[test]
    fn marginalize_contracts_paths() {
        let g = Dag::from_edges(&["A", "M", "B"], &[("A", "M"), ("M", "B")]).unwrap();
        let m = g.marginalize(&["M"]).unwrap();
        assert_eq!(m.names(), &["A".to_string(), "B".to_string()]);
        assert!(m.has_edge(0, 1));
        let id = Dag::from_edges(&["A", "B"], &[("A", "B")]).unwrap();
        assert_eq!(id.marginalize(&[] as &[&str]).unwrap(), id);
    }

    #[test]
    fn contracted_edge_signs() {
        let g = Dag::new(
            ["A", "M", "B"],
            [("A".into(), "M".into(), EdgeSign::Negative), ("M".into(), "B".into(), EdgeSign::Negative)],
        )
        .unwrap();
        let m = g.marginalize(&["M"]).unwrap();
        assert_eq!(m.edge_sign(0, 1), Some(EdgeSign::Positive));
        let h = Dag::new(
            ["A", "M", "B"],
            [
                ("A".into(), "M".into(), EdgeSign::Negative),
                ("M".into(), "B".into(), EdgeSign::Positive),
                ("A".into(), "B".into(), EdgeSign::Positive),
            ],
        )
        .unwrap();
        assert_eq!(h.marginalize(&["M"]).unwrap().edge_sign(0, 1), Some(EdgeSign::Unsigned));
    }

    #[test]
    fn common_cause_definition() {
        // C -> A -> B: C reaches B only through A.
        let g = Dag::from_edges(&["C", "A", "B"], &[("C", "A"), ("A", "B")]).unwrap();
        assert!(!g.is_common_cause(0, 1, 2));
        assert!(g.can_marginalize(&["C"]).unwrap());
        let h = Dag::from_edges(&["C", "A", "B"], &[("C", "A"), ("A", "B"), ("C", "B")]).unwrap();
        assert!(h.is_common_cause(0, 1, 2));
    }
}
