//! Exact synthesis of `a/q^n` over the uniform pswitch set
//! `{1/q, ..., (q-1)/q}`.
//!
//! Both synthesizers work backwards: the outermost pswitch is chosen first
//! and the residual probability the rest of the circuit must realize is
//! carried inwards until it is itself a member of the set. Progress is
//! measured by the characteristic value [`char_d`], which reaches `1`
//! exactly on members of the set.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::circuit::{Orientation, SpCircuit};
use crate::oracle::{Family, Oracle};
use crate::pswitch::PswitchSet;
use crate::rational::{is_open_probability, q_adic_exponent, ratio};
use crate::{Error, Rational, Result};

/// Largest exponent `w` tried when writing a probability as `b/q^w`.
pub const DEFAULT_EXPONENT_CAP: u32 = 64;

/// `p = numer / q^exponent` with the smallest possible exponent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QAdic {
    pub numer: BigInt,
    pub exponent: u32,
}

pub fn q_adic(p: &Rational, q: u64) -> Result<QAdic> {
    if q < 2 {
        return Err(Error::UnsupportedQ(q, "need q >= 2"));
    }
    if !is_open_probability(p) {
        return Err(Error::InvalidProbability(p.clone()));
    }
    let exponent = q_adic_exponent(p, q, DEFAULT_EXPONENT_CAP).ok_or_else(|| Error::NotQAdic {
        value: p.clone(),
        q,
        cap: DEFAULT_EXPONENT_CAP,
    })?;
    let scale = BigInt::from(q).pow(exponent);
    let numer = (p * Rational::from_integer(scale)).to_integer();
    Ok(QAdic { numer, exponent })
}

/// `d(b/q^w) = q^(w-1) / gcd(b, q^(w-1))`.
pub fn char_d(p: &Rational, q: u64) -> Result<BigInt> {
    let QAdic { numer, exponent } = q_adic(p, q)?;
    let base = BigInt::from(q).pow(exponent - 1);
    let g = numer.gcd(&base);
    Ok(base / g)
}

/// Residual after wrapping with pswitch `x`: `p/x` in series when `x > p`,
/// `(p - x)/(1 - x)` in parallel when `x < p`. Fails with
/// [`Error::ExactHit`] when `x == p`.
pub fn h_step(x: &Rational, p: &Rational) -> Result<(Rational, Orientation)> {
    for v in [x, p] {
        if !is_open_probability(v) {
            return Err(Error::InvalidProbability(v.clone()));
        }
    }
    let orientation = Orientation::for_insertion(x, p).ok_or_else(|| Error::ExactHit(p.clone()))?;
    Ok((residual(x, p, orientation), orientation))
}

pub(crate) fn residual(x: &Rational, p: &Rational, orientation: Orientation) -> Rational {
    match orientation {
        Orientation::Series => p / x,
        Orientation::Parallel => (p - x) / (Rational::one() - x),
    }
}

/// One backward insertion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Step {
    /// Probability of the inserted pswitch.
    pub x: Rational,
    pub orientation: Orientation,
    /// Residual target before the insertion.
    pub residual: Rational,
    /// `d(residual)`.
    pub d: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SynthesisTrace {
    pub q: u64,
    pub target: Rational,
    pub steps: Vec<Step>,
    pub terminal_leaf: Rational,
}

impl SynthesisTrace {
    /// Residual targets, ending with the terminal leaf.
    pub fn p_sequence(&self) -> Vec<Rational> {
        self.steps
            .iter()
            .map(|s| s.residual.clone())
            .chain(std::iter::once(self.terminal_leaf.clone()))
            .collect()
    }

    /// `d` of every residual, ending with `1` for the terminal leaf.
    pub fn d_sequence(&self) -> Vec<BigInt> {
        self.steps
            .iter()
            .map(|s| s.d.clone())
            .chain(std::iter::once(BigInt::one()))
            .collect()
    }

    /// Rebuilds the circuit from the innermost leaf outwards.
    pub fn replay(&self) -> Result<SpCircuit> {
        let mut circuit = SpCircuit::leaf(self.terminal_leaf.clone())?;
        for step in self.steps.iter().rev() {
            circuit = SpCircuit::wrap(step.x.clone(), step.orientation, circuit)?;
        }
        Ok(circuit)
    }
}

impl fmt::Display for SynthesisTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "k={} p={} d={} x={} {}",
                k + 1,
                s.residual,
                s.d,
                s.x,
                s.orientation
            )?;
        }
        write!(
            f,
            "k={} p={} d=1 leaf",
            self.steps.len() + 1,
            self.terminal_leaf
        )
    }
}

/// A synthesized circuit with its trace and, where a size theorem covers
/// `q`, the bound it was checked against.
#[derive(Clone, Debug)]
pub struct Synthesis {
    pub circuit: SpCircuit,
    pub trace: SynthesisTrace,
    /// Exponent `n` of the target written as `a/q^n` with minimal `n`.
    pub exponent: u32,
    pub bound: Option<SizeBound>,
}

impl Synthesis {
    pub fn within_bound(&self) -> bool {
        self.bound
            .as_ref()
            .is_none_or(|b| self.circuit.size() as u64 <= b.tightest())
    }
}

/// Algorithm with greedy choice: at each step insert the pswitch that
/// minimizes `d` of the next residual, taking the largest such pswitch on
/// ties.
pub fn synth_backward(target: &Rational, q: u64) -> Result<Synthesis> {
    let set = PswitchSet::uniform(q)?;
    synthesize(target, q, |p, d| {
        let mut best: Option<(BigInt, Rational, Orientation)> = None;
        for x in set.values() {
            let Some(orientation) = Orientation::for_insertion(x, p) else {
                continue;
            };
            // residuals that leave the q-adic rationals can never finish
            let next_d = match char_d(&residual(x, p, orientation), q) {
                Ok(d) => d,
                Err(Error::NotQAdic { .. }) => continue,
                Err(e) => return Err(e),
            };
            if best.as_ref().is_none_or(|(bd, _, _)| next_d <= *bd) {
                best = Some((next_d, x.clone(), orientation));
            }
        }
        match best {
            Some((next_d, x, orientation)) if next_d < *d => Ok((x, orientation)),
            _ => Err(Error::NoProgress {
                residual: p.clone(),
                d: d.to_string(),
            }),
        }
    })
}

/// Deterministic insertion tables: the even-`q` table for even `q`
/// (including multiples of 6) and the odd-multiple-of-3 table otherwise.
/// The result is checked against the matching size theorem.
pub fn synth_rule_based(target: &Rational, q: u64) -> Result<Synthesis> {
    let set = PswitchSet::uniform(q)?;
    let rule: fn(&Rational, &BigInt, &BigInt, u64) -> (Rational, Orientation) =
        if q.is_multiple_of(2) {
            even_rule
        } else if q.is_multiple_of(3) {
            odd_three_rule
        } else {
            return Err(Error::UnsupportedQ(
                q,
                "rule tables need q even or an odd multiple of 3",
            ));
        };
    let synthesis = synthesize(target, q, |p, d| {
        let numer = q_adic(p, q)?.numer;
        let (x, orientation) = rule(p, d, &numer, q);
        let fails = || Error::NoProgress {
            residual: p.clone(),
            d: d.to_string(),
        };
        if !set.contains(&x) || Orientation::for_insertion(&x, p) != Some(orientation) {
            return Err(fails());
        }
        if char_d(&residual(&x, p, orientation), q)? >= *d {
            return Err(fails());
        }
        Ok((x, orientation))
    })?;
    let bound = size_bound(q, synthesis.exponent)?;
    let table_bound = bound.even.or(bound.odd_three).expect("q is covered");
    if synthesis.circuit.size() as u64 > table_bound {
        return Err(Error::BoundViolated {
            size: synthesis.circuit.size(),
            bound: table_bound,
        });
    }
    Ok(synthesis)
}

fn even_rule(p: &Rational, d: &BigInt, _numer: &BigInt, q: u64) -> (Rational, Orientation) {
    let half = ratio(1, 2);
    if d.is_even() {
        let orientation = if *p < half {
            Orientation::Series
        } else {
            Orientation::Parallel
        };
        return (half, orientation);
    }
    let two_s = 1u64 << floor_log(2, q);
    if *p < half {
        (frac(two_s, q), Orientation::Series)
    } else {
        (frac(q - two_s, q), Orientation::Parallel)
    }
}

fn odd_three_rule(p: &Rational, d: &BigInt, numer: &BigInt, q: u64) -> (Rational, Orientation) {
    let third = ratio(1, 3);
    let two_thirds = ratio(2, 3);
    let even_b = numer.is_even();
    if (d % 3u32).is_zero() {
        if *p <= third {
            (third, Orientation::Series)
        } else if *p <= two_thirds {
            if even_b {
                (two_thirds, Orientation::Series)
            } else {
                (third, Orientation::Parallel)
            }
        } else {
            (two_thirds, Orientation::Parallel)
        }
    } else {
        let three_s = 3u64.pow(floor_log(3, q));
        if *p <= third {
            (frac(three_s, q), Orientation::Series)
        } else if *p <= two_thirds {
            if even_b {
                (frac(2 * three_s, q), Orientation::Series)
            } else {
                (
                    frac(q.saturating_sub(2 * three_s), q),
                    Orientation::Parallel,
                )
            }
        } else {
            (frac(q - three_s, q), Orientation::Parallel)
        }
    }
}

fn frac(a: u64, b: u64) -> Rational {
    Rational::new(BigInt::from(a), BigInt::from(b))
}

fn synthesize<F>(target: &Rational, q: u64, mut choose: F) -> Result<Synthesis>
where
    F: FnMut(&Rational, &BigInt) -> Result<(Rational, Orientation)>,
{
    let exponent = q_adic(target, q)?.exponent;
    let mut steps = Vec::new();
    let mut p = target.clone();
    loop {
        let d = char_d(&p, q)?;
        if d.is_one() {
            break;
        }
        let (x, orientation) = choose(&p, &d)?;
        let next = residual(&x, &p, orientation);
        steps.push(Step {
            x,
            orientation,
            residual: p,
            d,
        });
        p = next;
    }
    let trace = SynthesisTrace {
        q,
        target: target.clone(),
        steps,
        terminal_leaf: p,
    };
    let circuit = trace.replay()?;
    debug_assert_eq!(circuit.eval(), *target);
    Ok(Synthesis {
        circuit,
        trace,
        exponent,
        bound: size_bound(q, exponent).ok(),
    })
}

/// Size guarantees for realizing `a/q^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeBound {
    /// `ceil(log2 q)(n-1)+1`, for even `q`.
    pub even: Option<u64>,
    /// `ceil(log3 q)(n-1)+1`, for odd multiples of 3.
    pub odd_three: Option<u64>,
    /// Piecewise bound for multiples of 6.
    pub six: Option<u64>,
}

impl SizeBound {
    pub fn tightest(&self) -> u64 {
        [self.even, self.odd_three, self.six]
            .into_iter()
            .flatten()
            .min()
            .expect("at least one bound applies")
    }
}

/// Bounds that apply to `q` at exponent `n`.
pub fn size_bound(q: u64, n: u32) -> Result<SizeBound> {
    if q < 2 {
        return Err(Error::UnsupportedQ(q, "need q >= 2"));
    }
    if n < 1 {
        return Err(Error::InvalidArgument(
            "exponent n must be at least 1".into(),
        ));
    }
    let linear = |k: u64| k.saturating_mul(n as u64 - 1).saturating_add(1);
    let even = q.is_multiple_of(2).then(|| linear(ceil_log(2, q) as u64));
    let odd_three = (q % 2 == 1 && q.is_multiple_of(3)).then(|| linear(ceil_log(3, q) as u64));
    let six = q.is_multiple_of(6).then(|| {
        let s = floor_log(6, q) as u64;
        let six_s = 6u64.pow(s as u32);
        let k = if six_s == q {
            2 * s
        } else if 2 * six_s >= q {
            2 * s + 1
        } else if 3 * six_s >= q {
            2 * s + 2
        } else {
            2 * s + 3
        };
        linear(k)
    });
    if even.is_none() && odd_three.is_none() {
        return Err(Error::UnsupportedQ(
            q,
            "no size bound unless q is a multiple of 2 or 3",
        ));
    }
    Ok(SizeBound {
        even,
        odd_three,
        six,
    })
}

/// Largest `s` with `base^s <= q`.
fn floor_log(base: u64, q: u64) -> u32 {
    let mut s = 0;
    let mut power = base;
    while power <= q {
        s += 1;
        power = power.saturating_mul(base);
    }
    s
}

/// Smallest `c` with `base^c >= q`.
fn ceil_log(base: u64, q: u64) -> u32 {
    let mut c = 0;
    let mut power = 1u64;
    while power < q {
        c += 1;
        power = power.saturating_mul(base);
    }
    c
}

pub fn is_prime(q: u64) -> bool {
    q >= 2
        && (2..)
            .take_while(|d| d * d <= q)
            .all(|d| !q.is_multiple_of(d))
}

/// Whether `target` is realizable by any series-parallel circuit over the
/// uniform set of prime `q`.
///
/// With `target = a/q^n` in lowest terms, a circuit of fewer than `n`
/// pswitches only produces denominators dividing `q^(n-1)`, and for prime
/// `q` anything not realizable with `n` pswitches is not realizable with
/// more. So the question reduces to the oracle table at size `n`.
pub fn realizable_prime(target: &Rational, q: u64, oracle: &Oracle) -> Result<bool> {
    if !is_prime(q) {
        return Err(Error::UnsupportedQ(q, "q must be prime"));
    }
    let n = q_adic(target, q)?.exponent as usize;
    let table = oracle.enumerate(&PswitchSet::uniform(q)?, n, Family::Sp)?;
    Ok(table.optimal_size(target).is_some())
}
