//! Greedy approximation of arbitrary probabilities over arbitrary pswitch
//! sets, and the matching error bounds.
//!
//! The construction works backwards from the target `p_1 = p_d`. Each
//! round simulates every tuple of `m` pswitches from the set, inserting
//! each one in series when it exceeds the current residual and in parallel
//! when it is below it, and keeps the tuple whose product of attenuation
//! factors ([`r_factor`]) is smallest. Once fewer than `m + 1` pswitches of
//! budget remain, the innermost residual is filled with the ssp circuit of
//! that size that comes closest to it.
//!
//! Errors propagate outwards multiplicatively: an inner circuit missing
//! its residual by `e` makes the whole circuit miss the target by `e`
//! times the product of the attenuation factors of the insertions around
//! it ([`propagate_error`]).

use std::fmt;

use num_traits::{One, Zero};

use crate::circuit::{Orientation, SpCircuit};
use crate::oracle::{Family, Oracle};
use crate::pswitch::PswitchSet;
use crate::rational::{abs_diff, complement, is_open_probability, ratio};
use crate::synthesis::residual;
use crate::{Error, Rational, Result};

/// Default largest step length; each round costs `|S|^m` simulations.
pub const DEFAULT_MAX_STEP: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxConfig {
    /// Pswitches chosen jointly per greedy round (`m`).
    pub step: usize,
    /// Maximum number of pswitches in the result (`n`).
    pub budget: usize,
    pub set: PswitchSet,
    pub target: Rational,
    pub max_step: usize,
}

impl ApproxConfig {
    pub fn new(set: PswitchSet, target: Rational, budget: usize, step: usize) -> Result<Self> {
        let cfg = ApproxConfig {
            step,
            budget,
            set,
            target,
            max_step: DEFAULT_MAX_STEP,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !is_open_probability(&self.target) {
            return Err(Error::InvalidProbability(self.target.clone()));
        }
        if self.step == 0 || self.step > self.budget {
            return Err(Error::InvalidArgument(format!(
                "step m = {} must satisfy 1 <= m <= n = {}",
                self.step, self.budget
            )));
        }
        if self.step > self.max_step {
            return Err(Error::ResourceLimit {
                what: "greedy step length",
                actual: self.step,
                limit: self.max_step,
            });
        }
        Ok(())
    }
}

/// Error attenuation of one insertion: `x` in series, `1 - x` in parallel.
pub fn r_factor(x: &Rational, orientation: Orientation) -> Rational {
    match orientation {
        Orientation::Series => x.clone(),
        Orientation::Parallel => complement(x),
    }
}

/// Outcome of simulating a tuple of insertions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cost {
    /// Product of the attenuation factors along the path.
    Factor(Rational),
    /// Element `index` (0-based) of the tuple equals the residual it would
    /// be inserted around, so a single pswitch finishes the circuit.
    ExactHit { index: usize },
}

impl Cost {
    /// The cost as a number; an exact hit costs nothing.
    pub fn value(&self) -> Rational {
        match self {
            Cost::Factor(f) => f.clone(),
            Cost::ExactHit { .. } => Rational::zero(),
        }
    }
}

/// Simulates inserting `xs` in order around the residual `p`.
pub fn f_cost(xs: &[Rational], set: &PswitchSet, p: &Rational) -> Result<Cost> {
    if !is_open_probability(p) {
        return Err(Error::InvalidProbability(p.clone()));
    }
    if let Some(bad) = xs.iter().find(|x| !set.contains(x)) {
        return Err(Error::InvalidArgument(format!(
            "{bad} is not in the pswitch set"
        )));
    }
    Ok(simulate(xs, p))
}

/// Outer error implied by an inner error `e_inner` beneath `segment`.
pub fn propagate_error(segment: &[(Rational, Orientation)], e_inner: &Rational) -> Rational {
    segment
        .iter()
        .fold(e_inner.clone(), |e, (x, o)| e * r_factor(x, *o))
}

/// One greedy insertion, outermost first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Insertion {
    pub x: Rational,
    pub orientation: Orientation,
    /// Residual target before the insertion.
    pub before: Rational,
    /// Residual target left for the circuit inside.
    pub after: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Approximation {
    /// The final circuit, with any `0`/`1` filler removed.
    pub circuit: SpCircuit,
    pub achieved: Rational,
    /// `|achieved - target|`.
    pub error: Rational,
    pub insertions: Vec<Insertion>,
    /// Residual the innermost circuit was chosen to approximate.
    pub residual: Rational,
    /// Innermost circuit before filler removal. It may be a bare `0` or
    /// `1` wire when that lies closer to the residual than any circuit
    /// over the set.
    pub fill: SpCircuit,
    /// `|eval(fill) - residual|`.
    pub inner_error: Rational,
}

impl Approximation {
    /// Product of the attenuation factors of all insertions.
    pub fn attenuation(&self) -> Rational {
        self.insertions.iter().fold(Rational::one(), |acc, i| {
            acc * r_factor(&i.x, i.orientation)
        })
    }

    pub fn segment(&self) -> Vec<(Rational, Orientation)> {
        self.insertions
            .iter()
            .map(|i| (i.x.clone(), i.orientation))
            .collect()
    }

    pub fn is_exact(&self) -> bool {
        self.error.is_zero()
    }
}

impl fmt::Display for Approximation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, i) in self.insertions.iter().enumerate() {
            writeln!(
                f,
                "k={} p={} x={} {} r={}",
                k + 1,
                i.before,
                i.x,
                i.orientation,
                r_factor(&i.x, i.orientation)
            )?;
        }
        writeln!(
            f,
            "fill {} for residual {} (inner error {})",
            self.fill, self.residual, self.inner_error
        )
    }
}

/// Runs the greedy construction.
///
/// With budget `n` and step `m`, up to `floor((n - 1) / m)` rounds of `m`
/// insertions are made, leaving between 1 and `m` pswitches for the
/// innermost circuit. The search stops early when the residual is itself
/// in the set or a tuple hits a residual exactly. Among tuples of equal
/// cost the lexicographically smallest wins.
pub fn approx_greedy(cfg: &ApproxConfig) -> Result<Approximation> {
    cfg.validate()?;
    let values = cfg.set.values();
    let mut p = cfg.target.clone();
    let mut insertions = Vec::new();
    let rounds = (cfg.budget - 1) / cfg.step;
    let mut fill = None;

    for _ in 0..rounds {
        if cfg.set.contains(&p) {
            break;
        }
        let (tuple, cost) = best_tuple(values, cfg.step, &p);
        let used = match cost {
            Cost::ExactHit { index } => index,
            Cost::Factor(_) => tuple.len(),
        };
        for x in &tuple[..used] {
            let o = Orientation::for_insertion(x, &p).expect("non-hits have an orientation");
            let after = residual(x, &p, o);
            insertions.push(Insertion {
                x: x.clone(),
                orientation: o,
                before: std::mem::replace(&mut p, after.clone()),
                after,
            });
        }
        if let Cost::ExactHit { index } = cost {
            fill = Some(SpCircuit::leaf(tuple[index].clone())?);
            break;
        }
    }

    let fill = match fill {
        Some(leaf) => leaf,
        None if cfg.set.contains(&p) => SpCircuit::leaf(p.clone())?,
        None => closest_fill(&cfg.set, &p, cfg.budget - insertions.len())?,
    };
    let inner_error = abs_diff(&fill.eval(), &p);
    let mut circuit = fill.clone();
    for ins in insertions.iter().rev() {
        circuit = SpCircuit::wrap(ins.x.clone(), ins.orientation, circuit)?;
    }
    let circuit = circuit.simplify_endpoints();
    let achieved = circuit.eval();
    let error = abs_diff(&achieved, &cfg.target);
    Ok(Approximation {
        circuit,
        achieved,
        error,
        insertions,
        residual: p,
        fill,
        inner_error,
    })
}

fn best_tuple(values: &[Rational], m: usize, p: &Rational) -> (Vec<Rational>, Cost) {
    let mut best: Option<(Vec<Rational>, Cost)> = None;
    let mut digits = vec![0usize; m];
    loop {
        let tuple: Vec<Rational> = digits.iter().map(|&i| values[i].clone()).collect();
        let cost = simulate(&tuple, p);
        if best.as_ref().is_none_or(|(_, c)| cost.value() < c.value()) {
            let hit = matches!(cost, Cost::ExactHit { .. });
            best = Some((tuple, cost));
            if hit {
                break;
            }
        }
        // odometer increment, last position fastest: lexicographic order
        let mut pos = m;
        loop {
            if pos == 0 {
                return best.expect("at least one tuple");
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < values.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
    best.expect("at least one tuple")
}

fn simulate(xs: &[Rational], p: &Rational) -> Cost {
    let mut p = p.clone();
    let mut cost = Rational::one();
    for (index, x) in xs.iter().enumerate() {
        let Some(o) = Orientation::for_insertion(x, &p) else {
            return Cost::ExactHit { index };
        };
        cost *= r_factor(x, o);
        p = residual(x, &p, o);
    }
    Cost::Factor(cost)
}

/// Closest ssp circuit of at most `room` pswitches to `p`, falling back to
/// an open (`0`) or closed (`1`) wire when one of those is strictly closer.
/// Ties prefer fewer pswitches, then the smaller value.
fn closest_fill(set: &PswitchSet, p: &Rational, room: usize) -> Result<SpCircuit> {
    let table = Oracle::default().enumerate(set, room, Family::Ssp)?;
    let mut best: Option<(Rational, &Rational)> = None;
    for (_, v) in table.iter() {
        let d = abs_diff(v, p);
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, v));
        }
    }
    let (best_distance, best_value) = best.expect("the set is non-empty");
    for wire in [Rational::zero(), Rational::one()] {
        if abs_diff(&wire, p) < best_distance {
            return SpCircuit::endpoint_leaf(wire);
        }
    }
    Ok(table
        .witness(best_value)
        .expect("listed values have witnesses"))
}

/// Error bound for a single-element set `{p}` with `m = 1`, and the target
/// attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SingleBound {
    /// `max(p, 1 - p)^n / 2`.
    pub bound: Rational,
    /// The target whose approximation error equals the bound.
    pub worst_target: Rational,
}

pub fn bound_single(p: &Rational, n: usize) -> Result<SingleBound> {
    if !is_open_probability(p) {
        return Err(Error::InvalidProbability(p.clone()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let big = if *p < complement(p) {
        complement(p)
    } else {
        p.clone()
    };
    let bound = pow(&big, n) / ratio(2, 1);
    let worst_target = if *p <= ratio(1, 2) {
        complement(&bound)
    } else {
        bound.clone()
    };
    Ok(SingleBound {
        bound,
        worst_target,
    })
}

fn pow(base: &Rational, exp: usize) -> Rational {
    (0..exp).fold(Rational::one(), |acc, _| acc * base)
}

fn halving_exponent(n: usize) -> usize {
    n.div_ceil(2) - 1
}

/// `Δ/2 · ((3 + Δ)Δ/2)^(⌈n/2⌉ - 1)`, the `m = 1` bound for maximal
/// interval `Δ`.
pub fn bound_m1(delta: &Rational, n: usize) -> Rational {
    let two = ratio(2, 1);
    let factor = (ratio(3, 1) + delta) * delta / &two;
    delta / &two * pow(&factor, halving_exponent(n))
}

/// `Δ/2 · ((2 + Δ)Δ/2)^(⌈n/2⌉ - 1)`, the `m = 2` bound.
pub fn bound_m2(delta: &Rational, n: usize) -> Rational {
    let two = ratio(2, 1);
    let factor = (&two + delta) * delta / &two;
    delta / &two * pow(&factor, halving_exponent(n))
}

/// `Δ/2 · (Δ(1 - Δ))^(⌈n/2⌉ - 1)` with `Δ = 1/q`, the `m = 2` bound for
/// the uniform set `{1/q, ..., (q-1)/q}`.
pub fn bound_uniform(q: u64, n: usize) -> Rational {
    let delta = ratio(1, q as i64);
    let factor = &delta * complement(&delta);
    &delta / ratio(2, 1) * pow(&factor, halving_exponent(n))
}

/// The applicable greedy error bound for step `m` in `{1, 2}`; uniform
/// sets with `m = 2` get the tighter uniform bound.
pub fn bound_greedy(set: &PswitchSet, n: usize, m: usize) -> Result<Rational> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let delta = set.max_interval();
    match (m, set.uniform_q()) {
        (1, _) => Ok(bound_m1(&delta, n)),
        (2, Some(q)) => Ok(bound_uniform(q, n)),
        (2, None) => Ok(bound_m2(&delta, n)),
        _ => Err(Error::InvalidArgument(format!(
            "error bounds are known for m = 1 and m = 2, not m = {m}"
        ))),
    }
}
