//! Greedy synthesis size versus brute-force optimal size.

use std::fmt;

use super::{Family, Oracle};
use crate::pswitch::PswitchSet;
use crate::rational::{ratio, to_decimal};
use crate::synthesis::{q_adic, size_bound, synth_backward};
use crate::{Error, Rational, Result};

/// Statistics for the targets whose optimal size is `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fig7Row {
    pub family: Family,
    pub n: usize,
    pub targets: usize,
    /// Sum of synthesized sizes over all targets.
    pub total_size: usize,
    pub max_size: usize,
    /// Targets whose synthesized size exceeds the size bound for their
    /// exponent.
    pub bound_violations: usize,
    /// Targets synthesized with exactly `n` pswitches.
    pub optimal_hits: usize,
}

impl Fig7Row {
    /// Average synthesized size; `None` when no target has optimal size `n`.
    pub fn average(&self) -> Option<Rational> {
        (self.targets > 0).then(|| ratio(self.total_size as i64, self.targets as i64))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fig7Report {
    pub q: u64,
    pub rows: Vec<Fig7Row>,
}

impl Fig7Report {
    /// Human-readable descriptions of every failed expectation: a size
    /// bound exceeded, or, for `q` of 2 or 3, an average above `n`.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            if row.bound_violations > 0 {
                out.push(format!(
                    "{} n={}: {} targets exceed the size bound",
                    row.family, row.n, row.bound_violations
                ));
            }
            if matches!(self.q, 2 | 3) && row.optimal_hits != row.targets {
                out.push(format!(
                    "{} n={}: {} of {} targets not synthesized at optimal size",
                    row.family,
                    row.n,
                    row.targets - row.optimal_hits,
                    row.targets
                ));
            }
        }
        out
    }
}

impl fmt::Display for Fig7Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "q={}", self.q)?;
        writeln!(f, "family n targets average max bound_violations")?;
        for row in &self.rows {
            let average = row.average().map_or_else(
                || "-".to_string(),
                |a| format!("{a} ({})", to_decimal(&a, 4)),
            );
            writeln!(
                f,
                "{} {} {} {} {} {}",
                row.family, row.n, row.targets, average, row.max_size, row.bound_violations
            )?;
        }
        Ok(())
    }
}

/// For each `n`, synthesizes every value over `{1/q, ..., (q-1)/q}` whose
/// optimal size is `n` and records the synthesized sizes. Optimality is
/// measured against both the series-parallel and the ssp family.
pub fn fig7_experiment(q: u64, n_values: &[usize], oracle: &Oracle) -> Result<Fig7Report> {
    if !q.is_multiple_of(2) && !q.is_multiple_of(3) {
        return Err(Error::UnsupportedQ(q, "need a multiple of 2 or 3"));
    }
    let Some(&largest) = n_values.iter().max() else {
        return Err(Error::InvalidArgument("no sizes requested".into()));
    };
    let set = PswitchSet::uniform(q)?;
    let mut rows = Vec::new();
    for family in [Family::Sp, Family::Ssp] {
        let table = oracle.enumerate(&set, largest, family)?;
        for &n in n_values {
            let mut row = Fig7Row {
                family,
                n,
                targets: 0,
                total_size: 0,
                max_size: 0,
                bound_violations: 0,
                optimal_hits: 0,
            };
            for target in table.values_at(n) {
                let synthesized = synth_backward(target, q)?;
                let size = synthesized.circuit.size();
                let bound = size_bound(q, q_adic(target, q)?.exponent)?.tightest();
                row.targets += 1;
                row.total_size += size;
                row.max_size = row.max_size.max(size);
                row.bound_violations += usize::from(size as u64 > bound);
                row.optimal_hits += usize::from(size == n);
            }
            rows.push(row);
        }
    }
    Ok(Fig7Report { q, rows })
}
