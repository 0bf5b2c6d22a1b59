//! Arbitrary two-terminal pswitch networks, evaluated by edge factoring.

use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{complement, is_open_probability, is_probability};
use crate::{Error, Rational, Result};

/// Default maximum number of edges [`GeneralCircuit::eval`] will factor.
pub const DEFAULT_FACTORING_CAP: usize = 30;

/// Stable identifier of an edge. Conditioning keeps the ids of surviving
/// edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SwitchState {
    Open,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub u: usize,
    pub v: usize,
    pub prob: Rational,
}

/// Undirected multigraph of pswitches with two terminals.
///
/// Nodes are named by strings. After closing an edge by
/// [`condition`](GeneralCircuit::condition) its endpoints are merged, which
/// may merge the terminals themselves; such a circuit is always closed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GeneralCircuit {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    source: usize,
    sink: usize,
    next_id: usize,
}

impl GeneralCircuit {
    /// An edgeless circuit with the given terminal names.
    pub fn new(source: &str, sink: &str) -> Result<Self> {
        if source == sink {
            return Err(Error::InvalidArgument(format!(
                "terminals must differ, both are {source:?}"
            )));
        }
        Ok(Self::with_terminals(source, sink))
    }

    pub(crate) fn with_terminals(source: &str, sink: &str) -> Self {
        GeneralCircuit {
            nodes: vec![source.to_string(), sink.to_string()],
            edges: Vec::new(),
            source: 0,
            sink: 1,
            next_id: 0,
        }
    }

    /// Adds a pswitch between `u` and `v`, creating nodes as needed.
    pub fn add_edge(&mut self, u: &str, v: &str, prob: Rational) -> Result<EdgeId> {
        if !is_open_probability(&prob) {
            return Err(Error::InvalidProbability(prob));
        }
        Ok(self.push_edge_unchecked(u, v, prob))
    }

    pub(crate) fn push_edge_unchecked(&mut self, u: &str, v: &str, prob: Rational) -> EdgeId {
        let u = self.node_index(u);
        let v = self.node_index(v);
        let id = EdgeId(self.next_id);
        self.next_id += 1;
        self.edges.push(Edge { id, u, v, prob });
        id
    }

    fn node_index(&mut self, name: &str) -> usize {
        match self.nodes.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                self.nodes.push(name.to_string());
                self.nodes.len() - 1
            }
        }
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_name(&self, index: usize) -> &str {
        &self.nodes[index]
    }

    pub fn terminals(&self) -> (&str, &str) {
        (&self.nodes[self.source], &self.nodes[self.sink])
    }

    pub fn terminals_merged(&self) -> bool {
        self.source == self.sink
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.edges.iter().find(|e| e.id == id)
    }

    pub fn position(&self, id: EdgeId) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// Edge probabilities in edge order.
    pub fn edge_probs(&self) -> Vec<Rational> {
        self.edges.iter().map(|e| e.prob.clone()).collect()
    }

    /// Fixes one pswitch: closing contracts the edge, opening deletes it.
    pub fn condition(&self, id: EdgeId, state: SwitchState) -> Result<GeneralCircuit> {
        let pos = self.position(id).ok_or(Error::UnknownSwitch(id.0))?;
        let mut out = self.clone();
        let edge = out.edges.remove(pos);
        if state == SwitchState::Closed && edge.u != edge.v {
            let (keep, gone) = (edge.u.min(edge.v), edge.u.max(edge.v));
            let relabel = |n: &mut usize| {
                if *n == gone {
                    *n = keep;
                }
            };
            for e in &mut out.edges {
                relabel(&mut e.u);
                relabel(&mut e.v);
            }
            relabel(&mut out.source);
            relabel(&mut out.sink);
        }
        Ok(out)
    }

    /// Exact closure probability with the default factoring cap.
    pub fn eval(&self) -> Result<Rational> {
        self.eval_capped(DEFAULT_FACTORING_CAP)
    }

    pub fn eval_capped(&self, cap: usize) -> Result<Rational> {
        self.factor_checked(self.edge_probs(), cap)
    }

    /// Closure probability with edge probabilities replaced, in edge order,
    /// by `probs` (each in `[0, 1]`).
    pub fn eval_with(&self, probs: &[Rational]) -> Result<Rational> {
        if probs.len() != self.edges.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} edge probabilities, got {}",
                self.edges.len(),
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !is_probability(p)) {
            return Err(Error::InvalidProbability(bad.clone()));
        }
        self.factor_checked(probs.to_vec(), DEFAULT_FACTORING_CAP)
    }

    fn factor_checked(&self, probs: Vec<Rational>, cap: usize) -> Result<Rational> {
        if self.edges.len() > cap {
            return Err(Error::ResourceLimit {
                what: "edge count for factoring",
                actual: self.edges.len(),
                limit: cap,
            });
        }
        let work = self
            .edges
            .iter()
            .zip(probs)
            .map(|(e, p)| (e.u, e.v, p))
            .collect();
        Ok(factor(work, self.source, self.sink, self.nodes.len()))
    }
}

type WorkEdge = (usize, usize, Rational);

// P = p * P(contract e) + (1 - p) * P(delete e), pivoting on an edge at the
// source terminal.
fn factor(mut edges: Vec<WorkEdge>, s: usize, t: usize, n: usize) -> Rational {
    if s == t {
        return Rational::one();
    }
    edges.retain(|(u, v, _)| u != v);
    let reach = reachable(&edges, s, n);
    if !reach[t] {
        return Rational::zero();
    }
    edges.retain(|(u, _, _)| reach[*u]);

    let direct = edges
        .iter()
        .position(|(u, v, _)| (*u == s && *v == t) || (*u == t && *v == s));
    let pos = direct
        .or_else(|| edges.iter().position(|(u, v, _)| *u == s || *v == s))
        .expect("source has an edge when the sink is reachable");
    let (u, v, p) = edges.swap_remove(pos);
    let other = if u == s { v } else { u };

    let closed = if p.is_zero() {
        Rational::zero()
    } else if other == t {
        Rational::one()
    } else {
        let merged = edges
            .iter()
            .map(|(a, b, q)| {
                let a = if *a == other { s } else { *a };
                let b = if *b == other { s } else { *b };
                (a, b, q.clone())
            })
            .collect();
        factor(merged, s, t, n)
    };
    let open = if p.is_one() {
        Rational::zero()
    } else {
        factor(edges, s, t, n)
    };
    &p * closed + complement(&p) * open
}

fn reachable(edges: &[WorkEdge], from: usize, n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[from] = true;
    let mut stack = vec![from];
    while let Some(x) = stack.pop() {
        for (u, v, _) in edges {
            let next = if *u == x {
                *v
            } else if *v == x {
                *u
            } else {
                continue;
            };
            if !seen[next] {
                seen[next] = true;
                stack.push(next);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// Bridge network: two paths s-a-t and s-b-t with a bridge a-b.
    fn bridge() -> (GeneralCircuit, EdgeId) {
        let h = || ratio(1, 2);
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        g.add_edge("s", "a", h()).unwrap();
        g.add_edge("a", "t", h()).unwrap();
        g.add_edge("s", "b", h()).unwrap();
        g.add_edge("b", "t", h()).unwrap();
        let id = g.add_edge("a", "b", h()).unwrap();
        (g, id)
    }

    #[test]
    fn bridge_conditioning() {
        let (g, id) = bridge();
        assert_eq!(g.eval().unwrap(), ratio(1, 2));
        let closed = g.condition(id, SwitchState::Closed).unwrap();
        assert_eq!(closed.eval().unwrap(), ratio(9, 16));
        let open = g.condition(id, SwitchState::Open).unwrap();
        assert_eq!(open.eval().unwrap(), ratio(7, 16));
    }

    #[test]
    fn small_cases() {
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        let id = g.add_edge("s", "t", ratio(2, 7)).unwrap();
        assert_eq!(g.eval().unwrap(), ratio(2, 7));
        let closed = g.condition(id, SwitchState::Closed).unwrap();
        assert!(closed.terminals_merged());
        assert_eq!(closed.eval().unwrap(), ratio(1, 1));
        let open = g.condition(id, SwitchState::Open).unwrap();
        assert_eq!(open.eval().unwrap(), ratio(0, 1));

        g.add_edge("t", "s", ratio(1, 2)).unwrap();
        // 1 - (5/7)(1/2)
        assert_eq!(g.eval().unwrap(), ratio(9, 14));
    }

    #[test]
    fn two_parallel_halves_match_state_enumeration() {
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        g.add_edge("s", "t", ratio(1, 2)).unwrap();
        g.add_edge("s", "t", ratio(1, 2)).unwrap();
        // states (closed, closed), (closed, open), (open, closed) connect
        let brute = ratio(3, 4);
        assert_eq!(g.eval().unwrap(), brute);
    }

    #[test]
    fn errors() {
        assert!(GeneralCircuit::new("x", "x").is_err());
        let (g, _) = bridge();
        assert!(matches!(
            g.condition(EdgeId(99), SwitchState::Open),
            Err(Error::UnknownSwitch(99))
        ));
        assert!(matches!(
            g.eval_capped(4),
            Err(Error::ResourceLimit { limit: 4, .. })
        ));
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        assert!(g.add_edge("s", "t", ratio(1, 1)).is_err());
    }

    #[test]
    fn disconnected_and_dangling() {
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        g.add_edge("s", "a", ratio(1, 2)).unwrap();
        g.add_edge("b", "t", ratio(1, 2)).unwrap();
        assert_eq!(g.eval().unwrap(), ratio(0, 1));
        g.add_edge("s", "t", ratio(1, 3)).unwrap();
        assert_eq!(g.eval().unwrap(), ratio(1, 3));
    }
}
