//! Binary structural equations as finite response tables, and exact joint
//! distributions by enumeration of response states.
//!
//! A response state is encoded by its row: bit `c` of the row is the node's
//! output under parent configuration `c`, where bit `k` of `c` is the value of
//! the `k`-th parent (parents in declaration order). With `m` parents the row
//! is therefore a number in `[0, 2^(2^m))`, which doubles as the canonical
//! interchange code for the mechanism.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::graph::Dag;
use crate::rational::Prob;

/// Largest supported parent count: rows are stored in a `u64`.
pub const MAX_PARENTS: usize = 6;

pub const DEFAULT_BUDGET: u128 = 1 << 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseTable {
    node: String,
    parents: Vec<String>,
    rows: Vec<u64>,
    probs: Vec<Prob>,
}

impl ResponseTable {
    pub fn new(node: impl Into<String>, parents: Vec<String>, rows: Vec<u64>, probs: Vec<Prob>) -> Result<Self> {
        let node = node.into();
        let bad = |reason: String| Error::Equation { node: node.clone(), reason };
        if parents.len() > MAX_PARENTS {
            return Err(bad(format!("{} parents, at most {MAX_PARENTS} supported", parents.len())));
        }
        if rows.is_empty() {
            return Err(bad("needs at least one response state".into()));
        }
        if rows.len() != probs.len() {
            return Err(bad("row and probability counts differ".into()));
        }
        let width = 1u32 << parents.len();
        for &r in &rows {
            if width < 64 && r >> width != 0 {
                return Err(bad(format!("row {r} does not fit {width} parent configurations")));
            }
        }
        if probs.iter().any(|p| p < &Prob::zero()) {
            return Err(bad("negative state probability".into()));
        }
        let total: Prob = probs.iter().sum();
        if !total.is_one() {
            return Err(bad(format!("state probabilities sum to {}", crate::rational::format(&total))));
        }
        for (i, p) in parents.iter().enumerate() {
            if parents[..i].contains(p) || *p == node {
                return Err(bad(format!("bad parent list at `{p}`")));
            }
        }
        Ok(ResponseTable { node, parents, rows, probs })
    }

    /// Single-state (deterministic) equation.
    pub fn deterministic(node: impl Into<String>, parents: Vec<String>, row: u64) -> Result<Self> {
        ResponseTable::new(node, parents, vec![row], vec![Prob::one()])
    }

    /// Deterministic equation from a function of the parent values.
    pub fn from_fn(node: impl Into<String>, parents: Vec<String>, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let m = parents.len();
        let row = row_from_fn(m, f);
        ResponseTable::deterministic(node, parents, row)
    }

    pub fn node(&self) -> &str {
        &self.node
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn num_parents(&self) -> usize {
        self.parents.len()
    }

    pub fn num_configs(&self) -> usize {
        1 << self.parents.len()
    }

    pub fn num_states(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn probs(&self) -> &[Prob] {
        &self.probs
    }

    pub fn row(&self, state: usize) -> u64 {
        self.rows[state]
    }

    pub fn prob(&self, state: usize) -> &Prob {
        &self.probs[state]
    }

    pub fn parent_position(&self, name: &str) -> Result<usize> {
        self.parents
            .iter()
            .position(|p| p == name)
            .ok_or_else(|| Error::NotAParent(name.to_string(), self.node.clone()))
    }

    /// Unchecked lookup.
    #[inline]
    pub fn output(&self, state: usize, config: usize) -> bool {
        (self.rows[state] >> config) & 1 == 1
    }

    pub fn eval(&self, state: usize, config: usize) -> Result<bool> {
        if state >= self.rows.len() {
            return Err(Error::OutOfRange(format!("state {state} of `{}`", self.node)));
        }
        if config >= self.num_configs() {
            return Err(Error::OutOfRange(format!("parent configuration {config} of `{}`", self.node)));
        }
        Ok(self.output(state, config))
    }

    pub fn is_deduplicated(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.rows.iter().all(|r| seen.insert(*r))
    }

    /// Merges states with identical rows, summing their probabilities. The
    /// surviving states keep the order of first appearance.
    pub fn dedupe_states(&self) -> ResponseTable {
        let mut order: Vec<u64> = Vec::new();
        let mut mass: HashMap<u64, Prob> = HashMap::new();
        for (r, p) in self.rows.iter().zip(&self.probs) {
            match mass.get_mut(r) {
                Some(m) => *m += p,
                None => {
                    order.push(*r);
                    mass.insert(*r, p.clone());
                }
            }
        }
        let probs = order.iter().map(|r| mass[r].clone()).collect();
        ResponseTable { node: self.node.clone(), parents: self.parents.clone(), rows: order, probs }
    }

    /// Copy with the given parent's value complemented in every row.
    pub fn complement_parent(&self, name: &str) -> Result<ResponseTable> {
        let k = self.parent_position(name)?;
        let n = self.num_configs();
        let rows = self
            .rows
            .iter()
            .map(|&r| (0..n).filter(|&c| (r >> (c ^ (1 << k))) & 1 == 1).fold(0u64, |acc, c| acc | (1 << c)))
            .collect();
        Ok(ResponseTable { rows, ..self.clone() })
    }

    /// Copy restricted to the given states, probabilities renormalized.
    pub fn restrict(&self, states: &[usize]) -> Result<ResponseTable> {
        let total: Prob = states.iter().map(|&s| self.probs[s].clone()).sum();
        if total.is_zero() {
            return Err(Error::ZeroProbability);
        }
        ResponseTable::new(
            self.node.clone(),
            self.parents.clone(),
            states.iter().map(|&s| self.rows[s]).collect(),
            states.iter().map(|&s| &self.probs[s] / &total).collect(),
        )
    }
}

/// Row encoding of a boolean function of `m` inputs.
pub fn row_from_fn(m: usize, f: impl Fn(&[bool]) -> bool) -> u64 {
    let mut row = 0u64;
    let mut vals = vec![false; m];
    for c in 0..(1usize << m) {
        for (k, v) in vals.iter_mut().enumerate() {
            *v = (c >> k) & 1 == 1;
        }
        if f(&vals) {
            row |= 1 << c;
        }
    }
    row
}

/// A causal DAG with one response table per node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scm {
    graph: Dag,
    equations: Vec<ResponseTable>,
}

impl Scm {
    /// `equations` may come in any order; each must match its node's parents.
    pub fn new(graph: Dag, equations: Vec<ResponseTable>) -> Result<Self> {
        let mut slots: Vec<Option<ResponseTable>> = vec![None; graph.len()];
        for t in equations {
            let i = graph.index(t.node())?;
            let expected: Vec<&str> = graph.parents(i).iter().map(|&p| graph.name(p)).collect();
            let got: Vec<&str> = t.parents().iter().map(String::as_str).collect();
            if expected != got {
                return Err(Error::Equation {
                    node: t.node().to_string(),
                    reason: format!("parents {got:?} do not match graph parents {expected:?}"),
                });
            }
            if slots[i].replace(t).is_some() {
                return Err(Error::Equation { node: graph.name(i).to_string(), reason: "given twice".into() });
            }
        }
        let equations = slots
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                t.ok_or_else(|| Error::Equation { node: graph.name(i).to_string(), reason: "missing equation".into() })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scm { graph, equations })
    }

    pub fn graph(&self) -> &Dag {
        &self.graph
    }

    pub fn equations(&self) -> &[ResponseTable] {
        &self.equations
    }

    pub fn equation(&self, name: &str) -> Result<&ResponseTable> {
        Ok(&self.equations[self.graph.index(name)?])
    }

    pub fn equation_at(&self, i: usize) -> &ResponseTable {
        &self.equations[i]
    }

    pub fn world_count(&self) -> u128 {
        self.equations.iter().fold(1u128, |acc, t| acc.saturating_mul(t.num_states() as u128))
    }

    pub fn with_equation(&self, t: ResponseTable) -> Result<Scm> {
        let mut eqs = self.equations.clone();
        let i = self.graph.index(t.node())?;
        eqs[i] = t;
        Scm::new(self.graph.clone(), eqs)
    }

    pub fn joint_distribution(&self) -> Result<ExactDistribution> {
        self.joint_distribution_with_budget(DEFAULT_BUDGET)
    }

    /// Enumerates every combination of response states (zero-probability
    /// states skipped) and evaluates the nodes in topological order.
    pub fn joint_distribution_with_budget(&self, budget: u128) -> Result<ExactDistribution> {
        let needed = self.world_count();
        if needed > budget {
            return Err(Error::BudgetExceeded { needed, budget });
        }
        let n = self.graph.len();
        let mut worlds = Vec::new();
        let mut values = vec![0u32; n];
        let mut states = vec![0u32; n];
        self.enumerate(0, Prob::one(), &mut values, &mut states, &mut worlds);
        Ok(ExactDistribution { columns: self.graph.names().to_vec(), worlds })
    }

    fn enumerate(&self, k: usize, mass: Prob, values: &mut [u32], states: &mut [u32], out: &mut Vec<World>) {
        let order = self.graph.topological_order();
        if k == order.len() {
            out.push(World { values: values.to_vec(), states: states.to_vec(), prob: mass });
            return;
        }
        let node = order[k];
        let t = &self.equations[node];
        let config =
            self.graph.parents(node).iter().enumerate().fold(0usize, |c, (bit, &p)| c | ((values[p] as usize) << bit));
        for s in 0..t.num_states() {
            let p = t.prob(s);
            if p.is_zero() {
                continue;
            }
            values[node] = t.output(s, config) as u32;
            states[node] = s as u32;
            self.enumerate(k + 1, &mass * p, values, states, out);
        }
    }

    /// Substitutes the equations of `w` into the retained nodes, yielding an
    /// Scm on the marginalized graph. Each retained node's new response state
    /// is the tuple of its own state and the states of the `w` nodes feeding
    /// it through `w`-only paths.
    pub fn marginalize(&self, w: &[&str]) -> Result<Scm> {
        self.marginalize_with_budget(w, DEFAULT_BUDGET)
    }

    pub fn marginalize_with_budget(&self, w: &[&str], budget: u128) -> Result<Scm> {
        let g = &self.graph;
        let w_idx = g.indices(w)?;
        let target = g.marginalize_idx(&w_idx)?;
        let mut in_w = vec![false; g.len()];
        for &i in &w_idx {
            in_w[i] = true;
        }
        let mut equations = Vec::new();
        for r in (0..g.len()).filter(|&i| !in_w[i]) {
            let new_parents: Vec<usize> = g.contracted_parents(&in_w, r).into_keys().collect();
            // w-ancestry of r, in topological order.
            let mut feed = vec![false; g.len()];
            let mut stack = vec![r];
            while let Some(n) = stack.pop() {
                for &p in g.parents(n) {
                    if in_w[p] && !feed[p] {
                        feed[p] = true;
                        stack.push(p);
                    }
                }
            }
            let mut members: Vec<usize> = g.topological_order().iter().copied().filter(|&i| feed[i]).collect();
            members.push(r);
            let combos =
                members.iter().fold(1u128, |acc, &i| acc.saturating_mul(self.equations[i].num_states() as u128));
            if combos > budget {
                return Err(Error::BudgetExceeded { needed: combos, budget });
            }
            let width = 1usize << new_parents.len();
            let mut rows = Vec::new();
            let mut probs = Vec::new();
            let mut choice = vec![0usize; members.len()];
            loop {
                let mass: Prob =
                    members.iter().zip(&choice).map(|(&i, &s)| self.equations[i].prob(s).clone()).product();
                if !mass.is_zero() {
                    let mut row = 0u64;
                    let mut vals = vec![0u32; g.len()];
                    for c in 0..width {
                        for (bit, &p) in new_parents.iter().enumerate() {
                            vals[p] = ((c >> bit) & 1) as u32;
                        }
                        for (&i, &s) in members.iter().zip(&choice) {
                            let cfg = g
                                .parents(i)
                                .iter()
                                .enumerate()
                                .fold(0usize, |acc, (bit, &p)| acc | ((vals[p] as usize) << bit));
                            vals[i] = self.equations[i].output(s, cfg) as u32;
                        }
                        if vals[r] == 1 {
                            row |= 1 << c;
                        }
                    }
                    rows.push(row);
                    probs.push(mass);
                }
                // odometer
                let mut k = 0;
                loop {
                    if k == members.len() {
                        break;
                    }
                    choice[k] += 1;
                    if choice[k] < self.equations[members[k]].num_states() {
                        break;
                    }
                    choice[k] = 0;
                    k += 1;
                }
                if k == members.len() {
                    break;
                }
            }
            let parents = new_parents.iter().map(|&p| g.name(p).to_string()).collect();
            equations.push(ResponseTable::new(g.name(r), parents, rows, probs)?.dedupe_states());
        }
        Scm::new(target, equations)
    }
}

/// One enumerated world: node values, the response state chosen for each
/// base node, and its exact probability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct World {
    pub values: Vec<u32>,
    pub states: Vec<u32>,
    pub prob: Prob,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactDistribution {
    columns: Vec<String>,
    worlds: Vec<World>,
}

impl ExactDistribution {
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn worlds(&self) -> &[World] {
        &self.worlds
    }

    pub fn column(&self, name: &str) -> Result<usize> {
        self.columns.iter().position(|c| c == name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn total_mass(&self) -> Prob {
        self.worlds.iter().map(|w| &w.prob).sum()
    }

    pub fn probability(&self, pred: impl Fn(&World) -> bool) -> Prob {
        self.worlds.iter().filter(|w| pred(w)).map(|w| &w.prob).sum()
    }

    /// Marginal over the given columns.
    pub fn marginal(&self, cols: &[usize]) -> BTreeMap<Vec<u32>, Prob> {
        let mut out: BTreeMap<Vec<u32>, Prob> = BTreeMap::new();
        for w in &self.worlds {
            let key: Vec<u32> = cols.iter().map(|&c| w.values[c]).collect();
            *out.entry(key).or_insert_with(Prob::zero) += &w.prob;
        }
        out
    }

    /// Adds columns computed from each world (values and response states).
    pub fn with_derived(&self, names: &[String], f: impl Fn(&World) -> Vec<u32>) -> Result<ExactDistribution> {
        for n in names {
            if self.columns.contains(n) {
                return Err(Error::DuplicateNode(n.clone()));
            }
        }
        let mut columns = self.columns.clone();
        columns.extend(names.iter().cloned());
        let worlds = self
            .worlds
            .iter()
            .map(|w| {
                let extra = f(w);
                debug_assert_eq!(extra.len(), names.len());
                let mut values = w.values.clone();
                values.extend(extra);
                World { values, states: w.states.clone(), prob: w.prob.clone() }
            })
            .collect();
        Ok(ExactDistribution { columns, worlds })
    }
}
