//! Series-parallel circuits.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::general::GeneralCircuit;
use crate::rational::{complement, is_open_probability, is_probability};
use crate::{Error, Rational, Result};

/// How a pswitch is attached to the rest of a circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Orientation {
    Series,
    Parallel,
}

impl Orientation {
    /// Orientation forced by the backward rule when inserting `x` around a
    /// residual target `p`: series if `x > p`, parallel if `x < p`, `None`
    /// when they coincide.
    pub fn for_insertion(x: &Rational, p: &Rational) -> Option<Self> {
        match x.cmp(p) {
            std::cmp::Ordering::Greater => Some(Orientation::Series),
            std::cmp::Ordering::Less => Some(Orientation::Parallel),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Orientation::Series => Orientation::Parallel,
            Orientation::Parallel => Orientation::Series,
        }
    }

    /// Combines two closure probabilities.
    pub fn combine(self, a: &Rational, b: &Rational) -> Rational {
        match self {
            Orientation::Series => a * b,
            Orientation::Parallel => a + b - a * b,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Orientation::Series => "series",
            Orientation::Parallel => "parallel",
        }
    }

    fn tag(self) -> &'static str {
        match self {
            Orientation::Series => "s",
            Orientation::Parallel => "p",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A series-parallel pswitch network.
///
/// Internal nodes are n-ary and kept flat: a series node never has a series
/// child, and likewise for parallel. Leaves hold probabilities strictly
/// inside `(0, 1)`; the endpoint values are only admitted through
/// [`SpCircuit::endpoint_leaf`], where `0` is a permanently open wire and
/// `1` a permanently closed one.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpCircuit {
    node: Node,
    size: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Node {
    Leaf(Rational),
    Compose(Orientation, Vec<SpCircuit>),
}

/// Borrowed view of the top node of an [`SpCircuit`].
#[derive(Clone, Copy, Debug)]
pub enum View<'a> {
    Leaf(&'a Rational),
    Series(&'a [SpCircuit]),
    Parallel(&'a [SpCircuit]),
}

impl SpCircuit {
    pub fn leaf(prob: Rational) -> Result<Self> {
        if !is_open_probability(&prob) {
            return Err(Error::InvalidProbability(prob));
        }
        Ok(Self::leaf_unchecked(prob))
    }

    /// A leaf that may also be `0` or `1`. Used by analyses that reason
    /// about degenerate switches; the public parsers never produce these.
    pub fn endpoint_leaf(prob: Rational) -> Result<Self> {
        if !is_probability(&prob) {
            return Err(Error::InvalidProbability(prob));
        }
        Ok(Self::leaf_unchecked(prob))
    }

    fn leaf_unchecked(prob: Rational) -> Self {
        SpCircuit {
            node: Node::Leaf(prob),
            size: 1,
        }
    }

    pub fn series(children: Vec<SpCircuit>) -> Result<Self> {
        Self::compose(Orientation::Series, children)
    }

    pub fn parallel(children: Vec<SpCircuit>) -> Result<Self> {
        Self::compose(Orientation::Parallel, children)
    }

    /// Builds a series or parallel node, splicing in children of the same
    /// orientation.
    pub fn compose(orientation: Orientation, children: Vec<SpCircuit>) -> Result<Self> {
        if children.len() < 2 {
            return Err(Error::Arity {
                kind: orientation.name(),
                got: children.len(),
            });
        }
        let mut flat = Vec::with_capacity(children.len());
        for child in children {
            match child.node {
                Node::Compose(o, grandchildren) if o == orientation => flat.extend(grandchildren),
                node => flat.push(SpCircuit {
                    node,
                    size: child.size,
                }),
            }
        }
        let size = flat.iter().map(|c| c.size).sum();
        Ok(SpCircuit {
            node: Node::Compose(orientation, flat),
            size,
        })
    }

    /// Wraps `inner` with one more pswitch of probability `x`, the step of
    /// every backward construction. The new leaf comes first.
    pub fn wrap(x: Rational, orientation: Orientation, inner: SpCircuit) -> Result<Self> {
        Self::compose(orientation, vec![Self::endpoint_leaf(x)?, inner])
    }

    pub fn view(&self) -> View<'_> {
        match &self.node {
            Node::Leaf(p) => View::Leaf(p),
            Node::Compose(Orientation::Series, c) => View::Series(c),
            Node::Compose(Orientation::Parallel, c) => View::Parallel(c),
        }
    }

    /// Number of pswitches.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.node, Node::Leaf(_))
    }

    /// Leaf probabilities in pre-order. Leaf positions in this order are
    /// the switch ids used throughout the crate.
    pub fn leaf_probs(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.size);
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<Rational>) {
        match &self.node {
            Node::Leaf(p) => out.push(p.clone()),
            Node::Compose(_, children) => children.iter().for_each(|c| c.collect_leaves(out)),
        }
    }

    pub fn has_endpoints(&self) -> bool {
        self.leaf_probs().iter().any(|p| !is_open_probability(p))
    }

    /// Exact closure probability.
    pub fn eval(&self) -> Rational {
        match &self.node {
            Node::Leaf(p) => p.clone(),
            Node::Compose(o, children) => {
                let mut it = children.iter().map(SpCircuit::eval);
                let first = it.next().expect("composite node has children");
                it.fold(first, |acc, p| o.combine(&acc, &p))
            }
        }
    }

    /// Closure probability with the leaf probabilities replaced, in
    /// pre-order, by `probs`.
    pub fn eval_with(&self, probs: &[Rational]) -> Result<Rational> {
        if probs.len() != self.size {
            return Err(Error::InvalidArgument(format!(
                "expected {} leaf probabilities, got {}",
                self.size,
                probs.len()
            )));
        }
        let mut next = 0;
        Ok(self.eval_indexed(probs, &mut next))
    }

    fn eval_indexed(&self, probs: &[Rational], next: &mut usize) -> Rational {
        match &self.node {
            Node::Leaf(_) => {
                *next += 1;
                probs[*next - 1].clone()
            }
            Node::Compose(o, children) => {
                let mut acc = children[0].eval_indexed(probs, next);
                for child in &children[1..] {
                    let p = child.eval_indexed(probs, next);
                    acc = o.combine(&acc, &p);
                }
                acc
            }
        }
    }

    /// Closure probability times `scale^size` when leaf `i` closes with
    /// probability `numers[i] / scale`. Integer-only, so it avoids the gcd
    /// reductions of rational evaluation in tight loops.
    pub(crate) fn eval_scaled(&self, numers: &[BigInt], powers: &[BigInt]) -> BigInt {
        let mut next = 0;
        self.eval_scaled_indexed(numers, powers, &mut next).0
    }

    fn eval_scaled_indexed(
        &self,
        numers: &[BigInt],
        powers: &[BigInt],
        next: &mut usize,
    ) -> (BigInt, usize) {
        match &self.node {
            Node::Leaf(_) => {
                *next += 1;
                (numers[*next - 1].clone(), 1)
            }
            Node::Compose(o, children) => {
                let (mut acc, mut k) = children[0].eval_scaled_indexed(numers, powers, next);
                for child in &children[1..] {
                    let (v, j) = child.eval_scaled_indexed(numers, powers, next);
                    acc = match o {
                        Orientation::Series => acc * v,
                        Orientation::Parallel => {
                            let both = &acc * &v;
                            acc * &powers[j] + v * &powers[k] - both
                        }
                    };
                    k += j;
                }
                (acc, k)
            }
        }
    }

    /// Swaps series and parallel everywhere and replaces each leaf `p` by
    /// `1 - p`. The dual closes with probability `1 - P(self)`.
    pub fn dual(&self) -> SpCircuit {
        let node = match &self.node {
            Node::Leaf(p) => Node::Leaf(complement(p)),
            Node::Compose(o, children) => {
                Node::Compose(o.dual(), children.iter().map(SpCircuit::dual).collect())
            }
        };
        SpCircuit {
            node,
            size: self.size,
        }
    }

    /// True when the circuit can be grown one pswitch at a time, each new
    /// pswitch attached in series or parallel to everything built so far.
    pub fn is_ssp(&self) -> bool {
        match &self.node {
            Node::Leaf(_) => true,
            Node::Compose(_, children) => {
                let mut big = children.iter().filter(|c| c.size > 1);
                match (big.next(), big.next()) {
                    (None, _) => true,
                    (Some(inner), None) => inner.is_ssp(),
                    _ => false,
                }
            }
        }
    }

    /// Removes `0`/`1` endpoint leaves. A closed wire is neutral in series
    /// and absorbing in parallel; an open wire the reverse. The result is
    /// either free of endpoint leaves or a single endpoint leaf.
    pub fn simplify_endpoints(&self) -> SpCircuit {
        match &self.node {
            Node::Leaf(_) => self.clone(),
            Node::Compose(o, children) => {
                let (absorbing, neutral) = match o {
                    Orientation::Series => (Rational::zero(), Rational::one()),
                    Orientation::Parallel => (Rational::one(), Rational::zero()),
                };
                let mut kept = Vec::new();
                for child in children {
                    let child = child.simplify_endpoints();
                    match &child.node {
                        Node::Leaf(p) if *p == absorbing => return child,
                        Node::Leaf(p) if *p == neutral => {}
                        _ => kept.push(child),
                    }
                }
                match kept.len() {
                    0 => Self::leaf_unchecked(neutral),
                    1 => kept.pop().expect("one child"),
                    _ => Self::compose(*o, kept).expect("at least two children"),
                }
            }
        }
    }

    /// The same network as a graph between terminals `s` and `t`. Edge ids
    /// follow the pre-order leaf numbering.
    pub fn to_general(&self) -> GeneralCircuit {
        let mut g = GeneralCircuit::with_terminals("s", "t");
        let mut fresh = 0usize;
        self.lay_out(&mut g, "s".to_string(), "t".to_string(), &mut fresh);
        g
    }

    fn lay_out(&self, g: &mut GeneralCircuit, from: String, to: String, fresh: &mut usize) {
        match &self.node {
            Node::Leaf(p) => {
                g.push_edge_unchecked(&from, &to, p.clone());
            }
            Node::Compose(Orientation::Parallel, children) => {
                for child in children {
                    child.lay_out(g, from.clone(), to.clone(), fresh);
                }
            }
            Node::Compose(Orientation::Series, children) => {
                let mut start = from;
                for (i, child) in children.iter().enumerate() {
                    let end = if i + 1 == children.len() {
                        to.clone()
                    } else {
                        *fresh += 1;
                        format!("n{fresh}")
                    };
                    child.lay_out(g, start, end.clone(), fresh);
                    start = end;
                }
            }
        }
    }

    pub(crate) fn write_expr(&self, out: &mut String) {
        match &self.node {
            Node::Leaf(p) => {
                out.push_str(&format!("{}/{}", p.numer(), p.denom()));
            }
            Node::Compose(o, children) => {
                out.push('(');
                out.push_str(o.tag());
                for child in children {
                    out.push(' ');
                    child.write_expr(out);
                }
                out.push(')');
            }
        }
    }
}

/// Canonical s-expression, e.g. `(p (s 1/2 1/2) 1/2)`.
impl fmt::Display for SpCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        self.write_expr(&mut out);
        f.write_str(&out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn half() -> SpCircuit {
        SpCircuit::leaf(ratio(1, 2)).unwrap()
    }

    fn series_then_parallel() -> SpCircuit {
        let s = SpCircuit::series(vec![half(), half()]).unwrap();
        SpCircuit::parallel(vec![s, half()]).unwrap()
    }

    fn two_paths() -> SpCircuit {
        let s = SpCircuit::series(vec![half(), half()]).unwrap();
        SpCircuit::parallel(vec![s.clone(), s]).unwrap()
    }

    #[test]
    fn worked_examples() {
        assert_eq!(series_then_parallel().eval(), ratio(5, 8));
        assert_eq!(two_paths().eval(), ratio(7, 16));
        assert_eq!(SpCircuit::leaf(ratio(3, 7)).unwrap().eval(), ratio(3, 7));
    }

    #[test]
    fn dual_pair() {
        let c = SpCircuit::series(vec![half(), half()]).unwrap();
        assert_eq!(c.eval(), ratio(1, 4));
        let d = c.dual();
        assert!(matches!(d.view(), View::Parallel(_)));
        assert_eq!(d.eval(), ratio(3, 4));
        assert_eq!(series_then_parallel().dual().eval(), ratio(3, 8));
        assert_eq!(d.dual(), c);
        let leaf = SpCircuit::leaf(ratio(2, 7)).unwrap();
        assert_eq!(leaf.dual(), SpCircuit::leaf(ratio(5, 7)).unwrap());
    }

    #[test]
    fn ssp_predicate() {
        assert!(series_then_parallel().is_ssp());
        assert!(!two_paths().is_ssp());
        assert!(half().is_ssp());
    }

    #[test]
    fn construction_rules() {
        assert!(SpCircuit::leaf(ratio(0, 1)).is_err());
        assert!(SpCircuit::leaf(ratio(1, 1)).is_err());
        assert!(SpCircuit::endpoint_leaf(ratio(1, 1)).is_ok());
        assert!(SpCircuit::endpoint_leaf(ratio(3, 2)).is_err());
        assert!(matches!(
            SpCircuit::series(vec![half()]),
            Err(Error::Arity { got: 1, .. })
        ));
        let nested = SpCircuit::series(vec![
            SpCircuit::series(vec![half(), half()]).unwrap(),
            half(),
        ])
        .unwrap();
        match nested.view() {
            View::Series(children) => assert_eq!(children.len(), 3),
            _ => panic!("expected series"),
        }
        assert_eq!(nested.size(), 3);
    }

    #[test]
    fn eval_with_overrides_in_preorder() {
        let c = series_then_parallel();
        let probs = vec![ratio(1, 1), ratio(1, 1), ratio(0, 1)];
        assert_eq!(c.eval_with(&probs).unwrap(), ratio(1, 1));
        assert!(c.eval_with(&probs[..2]).is_err());
    }

    #[test]
    fn endpoint_simplification() {
        let open = SpCircuit::endpoint_leaf(ratio(0, 1)).unwrap();
        let closed = SpCircuit::endpoint_leaf(ratio(1, 1)).unwrap();
        let c = SpCircuit::parallel(vec![half(), open.clone()]).unwrap();
        assert_eq!(c.simplify_endpoints(), half());
        let c = SpCircuit::series(vec![half(), open.clone()]).unwrap();
        assert_eq!(c.simplify_endpoints(), open);
        let c = SpCircuit::parallel(vec![
            half(),
            SpCircuit::series(vec![half(), closed]).unwrap(),
        ])
        .unwrap();
        let s = c.simplify_endpoints();
        assert_eq!(s, SpCircuit::parallel(vec![half(), half()]).unwrap());
        assert_eq!(s.eval(), c.eval());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(series_then_parallel().to_string(), "(p (s 1/2 1/2) 1/2)");
    }
}
