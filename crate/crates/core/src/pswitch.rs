use std::fmt;

use num_traits::{One, Zero};

use crate::rational::{is_open_probability, ratio};
use crate::{Error, Rational, Result};

/// The probabilities a circuit designer may pick pswitches from.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PswitchSet {
    values: Vec<Rational>,
    uniform_q: Option<u64>,
}

impl PswitchSet {
    /// Sorts `values`; rejects duplicates, an empty set, and anything
    /// outside `(0, 1)`.
    pub fn new(mut values: Vec<Rational>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidSet("empty".into()));
        }
        if let Some(bad) = values.iter().find(|v| !is_open_probability(v)) {
            return Err(Error::InvalidProbability(bad.clone()));
        }
        values.sort();
        if let Some(w) = values.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidSet(format!("duplicate value {}", w[0])));
        }
        let uniform_q = detect_uniform(&values);
        Ok(PswitchSet { values, uniform_q })
    }

    /// `{1/q, 2/q, ..., (q-1)/q}`.
    pub fn uniform(q: u64) -> Result<Self> {
        if q < 2 {
            return Err(Error::UnsupportedQ(q, "need q >= 2"));
        }
        let values = (1..q as i64).map(|a| ratio(a, q as i64)).collect();
        Ok(PswitchSet {
            values,
            uniform_q: Some(q),
        })
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Some(q)` when the set is exactly `{1/q, ..., (q-1)/q}`.
    pub fn uniform_q(&self) -> Option<u64> {
        self.uniform_q
    }

    pub fn contains(&self, p: &Rational) -> bool {
        self.values.binary_search(p).is_ok()
    }

    pub fn min(&self) -> &Rational {
        &self.values[0]
    }

    pub fn max(&self) -> &Rational {
        &self.values[self.values.len() - 1]
    }

    /// Largest gap between consecutive values of `0, s_1, ..., s_k, 1`.
    pub fn max_interval(&self) -> Rational {
        let mut prev = Rational::zero();
        let mut widest = Rational::zero();
        for v in self.values.iter().chain(std::iter::once(&Rational::one())) {
            let gap = v - &prev;
            if gap > widest {
                widest = gap;
            }
            prev = v.clone();
        }
        widest
    }
}

fn detect_uniform(values: &[Rational]) -> Option<u64> {
    let q = values.len() as i64 + 1;
    values
        .iter()
        .enumerate()
        .all(|(i, v)| *v == ratio(i as i64 + 1, q))
        .then_some(q as u64)
}

/// Comma-separated fractions, e.g. `1/5,2/5,3/5,4/5`.
impl fmt::Display for PswitchSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}
