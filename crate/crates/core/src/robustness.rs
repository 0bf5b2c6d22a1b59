//! Sensitivity of closure probabilities to errors in the pswitches.
//!
//! Every pswitch may be off from its nominal probability by at most an
//! allowance `ε`. The circuit error is the induced change in closure
//! probability. This module computes closed-form bounds on that error and
//! its exact worst case.
//!
//! Switches are addressed by index: pre-order leaf position for
//! series-parallel circuits, edge position for general ones.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::circuit::SpCircuit;
use crate::general::GeneralCircuit;
use crate::pswitch::PswitchSet;
use crate::rational::{abs_diff, complement, int, is_probability, ratio};
use crate::{Error, Rational, Result};

/// Default largest switch count for [`worst_case_error`].
pub const DEFAULT_VERTEX_CAP: usize = 20;

/// A network whose closure probability is a function of its switch
/// probabilities.
pub trait Network {
    fn switch_count(&self) -> usize;
    /// Nominal switch probabilities in switch-index order.
    fn probabilities(&self) -> Vec<Rational>;
    /// Closure probability with the switch probabilities replaced by
    /// `probs`, each in `[0, 1]`.
    fn eval_at(&self, probs: &[Rational]) -> Result<Rational>;
    /// Closure probability times `powers[1]^switch_count` when switch `i`
    /// closes with probability `numers[i] / powers[1]`; `powers[k]` holds
    /// `powers[1]^k`. `None` when the network has no integer evaluator.
    fn eval_scaled(&self, _numers: &[BigInt], _powers: &[BigInt]) -> Option<BigInt> {
        None
    }
}

impl Network for SpCircuit {
    fn switch_count(&self) -> usize {
        self.size()
    }

    fn probabilities(&self) -> Vec<Rational> {
        self.leaf_probs()
    }

    fn eval_at(&self, probs: &[Rational]) -> Result<Rational> {
        self.eval_with(probs)
    }

    fn eval_scaled(&self, numers: &[BigInt], powers: &[BigInt]) -> Option<BigInt> {
        Some(SpCircuit::eval_scaled(self, numers, powers))
    }
}

impl Network for GeneralCircuit {
    fn switch_count(&self) -> usize {
        self.edge_count()
    }

    fn probabilities(&self) -> Vec<Rational> {
        self.edge_probs()
    }

    fn eval_at(&self, probs: &[Rational]) -> Result<Rational> {
        self.eval_with(probs)
    }
}

fn check_eps(eps: &Rational) -> Result<()> {
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "error allowance {eps} is negative"
        )));
    }
    Ok(())
}

/// `ε / min(min S, 1 - max S)`: the error bound for ssp circuits.
pub fn bound_ssp(set: &PswitchSet, eps: &Rational) -> Result<Rational> {
    check_eps(eps)?;
    let low = set.min().clone();
    let high = complement(set.max());
    Ok(eps / low.min(high))
}

/// `n·ε`: the error bound for any circuit of `n` pswitches.
pub fn bound_general(n: usize, eps: &Rational) -> Result<Rational> {
    check_eps(eps)?;
    Ok(int(n as i64) * eps)
}

/// A bound of the form `sqrt(squared)`, compared exactly and rendered to
/// a requested number of decimal digits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SqrtBound {
    pub squared: Rational,
}

impl SqrtBound {
    /// Whether `value <= sqrt(squared)`, decided exactly.
    pub fn admits(&self, value: &Rational) -> bool {
        !value.is_positive() || value * value <= self.squared
    }

    /// `sqrt(squared)` truncated to `digits` decimal places.
    pub fn lower(&self, digits: u32) -> Rational {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = (&self.squared * Rational::from_integer(&scale * &scale)).floor();
        Rational::new(scaled.to_integer().sqrt(), scale)
    }

    /// [`lower`](Self::lower) plus one unit in the last place; never below
    /// the true value.
    pub fn upper(&self, digits: u32) -> Rational {
        let scale = BigInt::from(10u32).pow(digits);
        self.lower(digits) + Rational::new(BigInt::one(), scale)
    }

    /// Decimal rendering that states its precision.
    pub fn describe(&self, digits: u32) -> String {
        format!(
            "{} (truncated to {digits} digits; exact square {})",
            crate::rational::to_decimal(&self.lower(digits), digits),
            self.squared
        )
    }
}

impl fmt::Display for SqrtBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sqrt({})", self.squared)
    }
}

/// `c·√n·ε` with `c = max over t in S of 1/√(t(1 - t))`: the error bound
/// for series-parallel circuits of `n` pswitches.
pub fn bound_sp(set: &PswitchSet, n: usize, eps: &Rational) -> Result<SqrtBound> {
    check_eps(eps)?;
    let tau = set
        .values()
        .iter()
        .map(|t| t * complement(t))
        .min()
        .expect("the set is non-empty");
    Ok(SqrtBound {
        squared: int(n as i64) * eps * eps / tau,
    })
}

/// An assignment of per-switch deviations, each at most `ε` in size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Perturbation {
    epsilon: Rational,
    deltas: BTreeMap<usize, Rational>,
}

impl Perturbation {
    pub fn new(epsilon: Rational) -> Result<Self> {
        check_eps(&epsilon)?;
        Ok(Perturbation {
            epsilon,
            deltas: BTreeMap::new(),
        })
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    /// Sets the deviation of one switch; `|delta|` must not exceed `ε`.
    pub fn with_delta(mut self, switch: usize, delta: Rational) -> Result<Self> {
        if delta.abs() > self.epsilon {
            return Err(Error::Perturbation(format!(
                "delta {delta} for switch {switch} exceeds the allowance {}",
                self.epsilon
            )));
        }
        self.deltas.insert(switch, delta);
        Ok(self)
    }

    pub fn delta(&self, switch: usize) -> Rational {
        self.deltas
            .get(&switch)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    /// Perturbed probabilities; every one must stay in `[0, 1]`.
    pub fn apply(&self, probs: &[Rational]) -> Result<Vec<Rational>> {
        if let Some((&id, _)) = self.deltas.range(probs.len()..).next() {
            return Err(Error::UnknownSwitch(id));
        }
        probs
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let q = p + self.delta(i);
                if is_probability(&q) {
                    Ok(q)
                } else {
                    Err(Error::Perturbation(format!(
                        "switch {i} moves from {p} to {q}, outside [0, 1]"
                    )))
                }
            })
            .collect()
    }
}

/// `|P(p + δ) - P(p)|` for one particular perturbation.
pub fn perturbed_error<N: Network + ?Sized>(
    c: &N,
    perturbation: &Perturbation,
) -> Result<Rational> {
    let nominal = c.probabilities();
    let moved = perturbation.apply(&nominal)?;
    Ok(abs_diff(&c.eval_at(&moved)?, &c.eval_at(&nominal)?))
}

fn shifted(probs: &[Rational], eps: &Rational, up: bool) -> Result<Vec<Rational>> {
    probs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let q = if up { p + eps } else { p - eps };
            if is_probability(&q) {
                Ok(q)
            } else {
                Err(Error::Perturbation(format!(
                    "switch {i} moves from {p} to {q}, outside [0, 1]"
                )))
            }
        })
        .collect()
}

/// Exact worst-case circuit error under allowance `eps`, over every
/// switch deviating by `±eps`.
///
/// The closure probability is affine in each switch probability, so its
/// extremes over the box of allowed deviations sit at the box's corners;
/// all `2^n` corners are evaluated. Fails beyond
/// [`DEFAULT_VERTEX_CAP`] switches.
pub fn worst_case_error<N: Network + ?Sized>(c: &N, eps: &Rational) -> Result<Rational> {
    worst_case_error_capped(c, eps, DEFAULT_VERTEX_CAP)
}

pub fn worst_case_error_capped<N: Network + ?Sized>(
    c: &N,
    eps: &Rational,
    cap: usize,
) -> Result<Rational> {
    check_eps(eps)?;
    let n = c.switch_count();
    if n > cap {
        return Err(Error::ResourceLimit {
            what: "switches for corner enumeration",
            actual: n,
            limit: cap,
        });
    }
    let nominal = c.probabilities();
    let up = shifted(&nominal, eps, true)?;
    let down = shifted(&nominal, eps, false)?;
    if let Some(worst) = scaled_corner_search(c, &nominal, &up, &down) {
        return Ok(worst);
    }
    let base = c.eval_at(&nominal)?;
    let mut worst = Rational::zero();
    let mut probs = down.clone();
    for mask in 0u64..(1u64 << n) {
        for (i, p) in probs.iter_mut().enumerate() {
            let src = if mask >> i & 1 == 1 { &up } else { &down };
            p.clone_from(&src[i]);
        }
        let e = abs_diff(&c.eval_at(&probs)?, &base);
        if e > worst {
            worst = e;
        }
    }
    Ok(worst)
}

/// Corner search over a common denominator, for networks with an integer
/// evaluator.
fn scaled_corner_search<N: Network + ?Sized>(
    c: &N,
    nominal: &[Rational],
    up: &[Rational],
    down: &[Rational],
) -> Option<Rational> {
    let n = nominal.len();
    let scale = nominal
        .iter()
        .chain(up)
        .chain(down)
        .fold(BigInt::one(), |l, p| l.lcm(p.denom()));
    let mut powers = vec![BigInt::one()];
    for k in 0..n {
        let next = &powers[k] * &scale;
        powers.push(next);
    }
    let numers = |probs: &[Rational]| -> Vec<BigInt> {
        probs
            .iter()
            .map(|p| p.numer() * (&scale / p.denom()))
            .collect()
    };
    let (up, down) = (numers(up), numers(down));
    let base = c.eval_scaled(&numers(nominal), &powers)?;
    let mut worst = BigInt::zero();
    let mut probs = down.clone();
    for mask in 0u64..(1u64 << n) {
        for (i, p) in probs.iter_mut().enumerate() {
            let src = if mask >> i & 1 == 1 { &up } else { &down };
            p.clone_from(&src[i]);
        }
        let e = (c.eval_scaled(&probs, &powers)? - &base).abs();
        if e > worst {
            worst = e;
        }
    }
    Some(Rational::new(worst, powers[n].clone()))
}

/// The same quantity as [`worst_case_error`] in two evaluations.
///
/// Closure probability never decreases when a switch becomes more likely to
/// close, so the extremes over the box are the all-up and all-down corners.
/// Has no switch cap.
pub fn worst_case_error_monotone<N: Network + ?Sized>(c: &N, eps: &Rational) -> Result<Rational> {
    check_eps(eps)?;
    let nominal = c.probabilities();
    let base = c.eval_at(&nominal)?;
    let high = c.eval_at(&shifted(&nominal, eps, true)?)? - &base;
    let low = &base - c.eval_at(&shifted(&nominal, eps, false)?)?;
    Ok(high.max(low))
}

/// `ε·|P(C | x closed) - P(C | x open)|` for switch `switch`.
pub fn error_contribution<N: Network + ?Sized>(
    c: &N,
    switch: usize,
    eps: &Rational,
) -> Result<Rational> {
    check_eps(eps)?;
    let mut probs = c.probabilities();
    if switch >= probs.len() {
        return Err(Error::UnknownSwitch(switch));
    }
    probs[switch] = Rational::one();
    let closed = c.eval_at(&probs)?;
    probs[switch] = Rational::zero();
    let open = c.eval_at(&probs)?;
    Ok(eps * abs_diff(&closed, &open))
}

/// The total error of one perturbation split switch by switch.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Telescoping {
    /// `|P(p + δ) - P(p)|`.
    pub total: Rational,
    /// `|P^(k) - P^(k-1)|` where `P^(k)` perturbs only the first `k`
    /// switches.
    pub steps: Vec<Rational>,
}

impl Telescoping {
    pub fn sum(&self) -> Rational {
        self.steps.iter().fold(Rational::zero(), |acc, s| acc + s)
    }

    /// `total <= sum <= n·ε`.
    pub fn holds(&self, eps: &Rational) -> bool {
        let sum = self.sum();
        self.total <= sum && sum <= int(self.steps.len() as i64) * eps
    }
}

pub fn telescoping<N: Network + ?Sized>(c: &N, perturbation: &Perturbation) -> Result<Telescoping> {
    let nominal = c.probabilities();
    let moved = perturbation.apply(&nominal)?;
    let mut probs = nominal.clone();
    let mut previous = c.eval_at(&probs)?;
    let base = previous.clone();
    let mut steps = Vec::with_capacity(nominal.len());
    for (k, p) in moved.into_iter().enumerate() {
        probs[k] = p;
        let next = c.eval_at(&probs)?;
        steps.push(abs_diff(&next, &previous));
        previous = next;
    }
    Ok(Telescoping {
        total: abs_diff(&previous, &base),
        steps,
    })
}

/// Parallel strings of equal-probability switches whose error grows with
/// the logarithm of the switch count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LowerBoundFamily {
    /// Switches per full string.
    pub b: usize,
    /// Number of full strings.
    pub a: usize,
    /// Switches in the final, shorter string; always between 1 and `b`.
    pub remainder: usize,
    pub circuit: SpCircuit,
}

impl LowerBoundFamily {
    pub fn general(&self) -> GeneralCircuit {
        self.circuit.to_general()
    }
}

/// `a` strings of `b` switches plus one string of `n - ab`, all of
/// probability `p`, in parallel. `b` is the integer in `[1, n]` minimizing
/// `|(1/p)^b - n/b|` (the smallest on ties) and `a = ⌈n/b⌉ - 1`.
pub fn lower_bound_family(p: &Rational, n: usize) -> Result<LowerBoundFamily> {
    if !crate::rational::is_open_probability(p) {
        return Err(Error::InvalidProbability(p.clone()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("need at least 2 switches".into()));
    }
    let inv = p.recip();
    let mut power = Rational::one();
    let mut best: Option<(Rational, usize)> = None;
    for b in 1..=n {
        power *= &inv;
        let gap = abs_diff(&power, &ratio(n as i64, b as i64));
        if best.as_ref().is_none_or(|(g, _)| gap < *g) {
            best = Some((gap, b));
        }
    }
    let b = best.expect("n >= 1").1;
    let a = n.div_ceil(b) - 1;
    let remainder = n - a * b;
    let string = |len: usize| -> Result<SpCircuit> {
        let leaves: Vec<SpCircuit> = (0..len)
            .map(|_| SpCircuit::leaf(p.clone()))
            .collect::<Result<_>>()?;
        if len == 1 {
            Ok(leaves.into_iter().next().expect("one leaf"))
        } else {
            SpCircuit::series(leaves)
        }
    };
    let mut strings = (0..a).map(|_| string(b)).collect::<Result<Vec<_>>>()?;
    strings.push(string(remainder)?);
    let circuit = if strings.len() == 1 {
        strings.pop().expect("one string")
    } else {
        SpCircuit::parallel(strings)?
    };
    Ok(LowerBoundFamily {
        b,
        a,
        remainder,
        circuit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::format::parse_sp;

    fn r(a: i64, b: i64) -> Rational {
        ratio(a, b)
    }

    #[test]
    fn closed_forms() {
        let eps = r(1, 100);
        let half = PswitchSet::new(vec![r(1, 2)]).unwrap();
        assert_eq!(bound_ssp(&half, &eps).unwrap(), r(1, 50));
        let thirds = PswitchSet::uniform(3).unwrap();
        assert_eq!(bound_ssp(&thirds, &eps).unwrap(), r(3, 100));
        assert_eq!(bound_ssp(&thirds, &r(0, 1)).unwrap(), r(0, 1));
        assert_eq!(bound_general(7, &eps).unwrap(), r(7, 100));
        assert!(bound_general(1, &r(-1, 2)).is_err());

        let b = bound_sp(&half, 9, &eps).unwrap();
        assert_eq!(b.squared, r(36, 10000));
        assert_eq!(b.lower(4), r(6, 100));
        let tenths = PswitchSet::uniform(10).unwrap();
        assert_eq!(bound_sp(&tenths, 1, &r(1, 1)).unwrap().squared, r(100, 9));
        let two = bound_sp(&half, 2, &r(1, 1)).unwrap();
        assert!(two.lower(10) < two.upper(10));
        assert!(two.admits(&r(2828, 1000)) && !two.admits(&r(2829, 1000)));
    }

    #[test]
    fn worst_cases() {
        let eps = r(1, 100);
        let leaf = SpCircuit::leaf(r(2, 5)).unwrap();
        assert_eq!(worst_case_error(&leaf, &eps).unwrap(), eps);
        let s = parse_sp("(s 1/2 1/2)").unwrap();
        assert_eq!(worst_case_error(&s, &eps).unwrap(), &eps + &eps * &eps);
        let c = parse_sp("(p (s 1/2 1/2) 1/2)").unwrap();
        let w = worst_case_error(&c, &eps).unwrap();
        assert!(w <= r(1, 50));
        assert_eq!(worst_case_error_monotone(&c, &eps).unwrap(), w);
        assert_eq!(worst_case_error(&c.to_general(), &eps).unwrap(), w);
        assert!(worst_case_error(&SpCircuit::leaf(r(1, 200)).unwrap(), &eps).is_err());
        assert!(worst_case_error_capped(&c, &eps, 2)
            .unwrap_err()
            .is_resource_limit());
    }

    #[test]
    fn contributions() {
        let eps = r(1, 1000);
        let mut g = GeneralCircuit::new("s", "t").unwrap();
        for (u, v) in [("s", "a"), ("a", "t"), ("s", "b"), ("b", "t"), ("a", "b")] {
            g.add_edge(u, v, r(1, 2)).unwrap();
        }
        assert_eq!(error_contribution(&g, 4, &eps).unwrap(), &eps / int(8));
        let leaf = SpCircuit::leaf(r(1, 3)).unwrap();
        assert_eq!(error_contribution(&leaf, 0, &eps).unwrap(), eps);
        assert!(matches!(
            error_contribution(&leaf, 1, &eps),
            Err(Error::UnknownSwitch(1))
        ));
    }

    #[test]
    fn perturbations() {
        let c = parse_sp("(s 1/2 1/3)").unwrap();
        let eps = r(1, 10);
        let pert = Perturbation::new(eps.clone())
            .unwrap()
            .with_delta(0, r(1, 10))
            .unwrap()
            .with_delta(1, r(-1, 20))
            .unwrap();
        // (3/5)(17/60) - 1/6
        assert_eq!(perturbed_error(&c, &pert).unwrap(), r(1, 300));
        let t = telescoping(&c, &pert).unwrap();
        assert_eq!(t.total, r(1, 300));
        assert!(t.holds(&eps));
        assert!(Perturbation::new(eps.clone())
            .unwrap()
            .with_delta(0, r(1, 5))
            .is_err());
        let far = Perturbation::new(eps)
            .unwrap()
            .with_delta(5, r(0, 1))
            .unwrap();
        assert!(matches!(
            far.apply(&c.leaf_probs()),
            Err(Error::UnknownSwitch(5))
        ));
    }

    #[test]
    fn lower_bound_construction() {
        let f = lower_bound_family(&r(1, 2), 6).unwrap();
        assert_eq!((f.b, f.a, f.remainder), (2, 2, 2));
        assert_eq!(f.circuit.eval(), r(37, 64));
        assert_eq!(f.general().eval().unwrap(), r(37, 64));
        let f = lower_bound_family(&r(1, 2), 2).unwrap();
        assert_eq!(f.circuit.size(), 2);
        assert!(lower_bound_family(&r(1, 2), 1).is_err());
    }
}
