//! Brute-force tables of every probability realizable by small circuits.
//!
//! A table records, for each size `k`, the values whose smallest
//! realization uses exactly `k` pswitches, together with one witness
//! circuit of that size. Values are compared as exact rationals.

mod cache;
mod fig7;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use crate::circuit::{Orientation, SpCircuit};
use crate::pswitch::PswitchSet;
use crate::rational::complement;
use crate::synthesis::{is_prime, q_adic};
use crate::{Error, Rational, Result};

pub use fig7::{fig7_experiment, Fig7Report, Fig7Row};

/// Default cap on `|S|^max_size`; admits size 6 over `q = 10`.
pub const DEFAULT_MAX_LEAF_PRODUCT: u128 = 1_000_000;
/// Default cap on the number of distinct values held in a table.
pub const DEFAULT_MAX_VALUES: usize = 4_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Any series-parallel composition.
    Sp,
    /// One pswitch added at a time around the whole circuit.
    Ssp,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Sp => "sp",
            Family::Ssp => "ssp",
        }
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "sp" => Some(Family::Sp),
            "ssp" => Some(Family::Ssp),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
enum Origin {
    Leaf,
    Combine(Orientation, usize, usize),
    Explicit(SpCircuit),
}

#[derive(Clone, Debug)]
struct Entry {
    value: Rational,
    size: usize,
    origin: Origin,
}

/// Realizable values by optimal size.
#[derive(Clone, Debug)]
pub struct RealizableTable {
    family: Family,
    set: PswitchSet,
    max_size: usize,
    entries: Vec<Entry>,
    index: HashMap<Rational, usize>,
    by_size: Vec<Vec<usize>>,
}

/// Answer to an optimal-size query.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimalSize {
    Size(usize),
    /// Not realizable with at most `max_size` pswitches.
    NotWithin(usize),
    /// Provably not realizable by any series-parallel circuit.
    Never,
}

impl RealizableTable {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn set(&self) -> &PswitchSet {
        &self.set
    }

    pub fn max_size(&self) -> usize {
        self.max_size
    }

    /// Number of distinct values realizable with at most `max_size`
    /// pswitches.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Values whose optimal size is exactly `k`, ascending.
    pub fn values_at(&self, k: usize) -> impl Iterator<Item = &Rational> + '_ {
        let ids: &[usize] = if k >= 1 && k <= self.max_size {
            &self.by_size[k - 1]
        } else {
            &[]
        };
        ids.iter().map(move |&i| &self.entries[i].value)
    }

    /// `(size, value)` pairs ordered by size, then value.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &Rational)> + '_ {
        (1..=self.max_size).flat_map(move |k| self.values_at(k).map(move |v| (k, v)))
    }

    pub fn optimal_size(&self, target: &Rational) -> Option<usize> {
        self.index.get(target).map(|&i| self.entries[i].size)
    }

    /// Like [`optimal_size`](Self::optimal_size), but for a series-parallel
    /// table over a uniform set with prime `q` a miss at the target's own
    /// exponent is reported as never realizable.
    pub fn classify(&self, target: &Rational) -> OptimalSize {
        if let Some(k) = self.optimal_size(target) {
            return OptimalSize::Size(k);
        }
        if self.family == Family::Sp {
            if let Some(q) = self.set.uniform_q().filter(|&q| is_prime(q)) {
                if let Ok(qa) = q_adic(target, q) {
                    if qa.exponent as usize <= self.max_size {
                        return OptimalSize::Never;
                    }
                }
            }
        }
        OptimalSize::NotWithin(self.max_size)
    }

    /// A circuit of optimal size realizing `target`.
    pub fn witness(&self, target: &Rational) -> Option<SpCircuit> {
        self.index.get(target).map(|&i| self.build_witness(i))
    }

    fn build_witness(&self, id: usize) -> SpCircuit {
        let entry = &self.entries[id];
        match &entry.origin {
            Origin::Leaf => SpCircuit::leaf(entry.value.clone()).expect("set members are valid"),
            Origin::Explicit(c) => c.clone(),
            Origin::Combine(o, a, b) => {
                SpCircuit::compose(*o, vec![self.build_witness(*a), self.build_witness(*b)])
                    .expect("two children")
            }
        }
    }

    /// Whether `v` and `1 - v` always share an optimal size. Holds when the
    /// set is closed under complement.
    pub fn is_duality_closed(&self) -> bool {
        self.entries
            .iter()
            .all(|e| self.optimal_size(&complement(&e.value)) == Some(e.size))
    }

    fn push(&mut self, value: Rational, size: usize, origin: Origin) -> usize {
        let id = self.entries.len();
        self.index.insert(value.clone(), id);
        self.entries.push(Entry {
            value,
            size,
            origin,
        });
        self.by_size[size - 1].push(id);
        id
    }
}

/// Enumeration front-end holding resource caps and an optional cache
/// directory.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub cache_dir: Option<PathBuf>,
    pub max_leaf_product: u128,
    pub max_values: usize,
}

impl Default for Oracle {
    fn default() -> Self {
        Oracle {
            cache_dir: None,
            max_leaf_product: DEFAULT_MAX_LEAF_PRODUCT,
            max_values: DEFAULT_MAX_VALUES,
        }
    }
}

impl Oracle {
    pub fn with_cache_dir(dir: impl Into<PathBuf>) -> Self {
        Oracle {
            cache_dir: Some(dir.into()),
            ..Oracle::default()
        }
    }

    /// Builds (or loads from the cache) the table of values realizable with
    /// at most `max_size` pswitches from `set`.
    pub fn enumerate(
        &self,
        set: &PswitchSet,
        max_size: usize,
        family: Family,
    ) -> Result<RealizableTable> {
        if max_size == 0 {
            return Err(Error::InvalidArgument("max_size must be at least 1".into()));
        }
        let work = (set.len() as u128).checked_pow(max_size as u32);
        if work.is_none_or(|w| w > self.max_leaf_product) {
            return Err(Error::ResourceLimit {
                what: "|S|^max_size",
                actual: work.map_or(usize::MAX, |w| w.min(usize::MAX as u128) as usize),
                limit: self.max_leaf_product.min(usize::MAX as u128) as usize,
            });
        }
        if let Some(dir) = &self.cache_dir {
            let path = cache::path_for(dir, set, max_size, family);
            if path.exists() {
                return cache::load(&path, set, max_size, family);
            }
            let table = build(set, max_size, family, self.max_values)?;
            cache::store(&path, &table)?;
            return Ok(table);
        }
        build(set, max_size, family, self.max_values)
    }
}

/// Uncached enumeration with the default caps.
pub fn enumerate(set: &PswitchSet, max_size: usize, family: Family) -> Result<RealizableTable> {
    Oracle::default().enumerate(set, max_size, family)
}

fn empty_table(set: &PswitchSet, max_size: usize, family: Family) -> RealizableTable {
    RealizableTable {
        family,
        set: set.clone(),
        max_size,
        entries: Vec::new(),
        index: HashMap::new(),
        by_size: vec![Vec::new(); max_size],
    }
}

fn build(
    set: &PswitchSet,
    max_size: usize,
    family: Family,
    max_values: usize,
) -> Result<RealizableTable> {
    let mut table = empty_table(set, max_size, family);
    // exact[k - 1]: ids of every value realizable with exactly k pswitches
    let mut exact: Vec<Vec<usize>> = Vec::with_capacity(max_size);
    let leaves: Vec<usize> = set
        .values()
        .iter()
        .map(|v| table.push(v.clone(), 1, Origin::Leaf))
        .collect();
    exact.push(leaves.clone());

    for k in 2..=max_size {
        let mut level: Vec<usize> = Vec::new();
        let pairs: Vec<(usize, usize)> = match family {
            Family::Sp => (1..=k / 2).map(|i| (i, k - i)).collect(),
            Family::Ssp => vec![(1, k - 1)],
        };
        for (i, j) in pairs {
            let (left, right) = match family {
                Family::Sp => (&exact[i - 1], &exact[j - 1]),
                Family::Ssp => (&leaves, &exact[j - 1]),
            };
            for (ai, &a) in left.iter().enumerate() {
                let rights = if family == Family::Sp && i == j {
                    &right[ai..]
                } else {
                    &right[..]
                };
                for &b in rights {
                    for o in [Orientation::Series, Orientation::Parallel] {
                        let v = o.combine(&table.entries[a].value, &table.entries[b].value);
                        let id = match table.index.get(&v) {
                            Some(&id) => id,
                            None => table.push(v, k, Origin::Combine(o, a, b)),
                        };
                        level.push(id);
                    }
                }
                if table.entries.len() > max_values {
                    return Err(Error::ResourceLimit {
                        what: "realizable values in table",
                        actual: table.entries.len(),
                        limit: max_values,
                    });
                }
            }
        }
        level.sort_unstable_by(|&x, &y| table.entries[x].value.cmp(&table.entries[y].value));
        level.dedup();
        exact.push(level);
    }
    for ids in &mut table.by_size {
        ids.sort_unstable_by(|&x, &y| table.entries[x].value.cmp(&table.entries[y].value));
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn halves_ssp() {
        let s = PswitchSet::uniform(2).unwrap();
        let t = enumerate(&s, 2, Family::Ssp).unwrap();
        assert_eq!(
            t.values_at(1).cloned().collect::<Vec<_>>(),
            vec![ratio(1, 2)]
        );
        assert_eq!(
            t.values_at(2).cloned().collect::<Vec<_>>(),
            vec![ratio(1, 4), ratio(3, 4)]
        );
    }

    #[test]
    fn optimal_sizes() {
        let t = enumerate(&PswitchSet::uniform(2).unwrap(), 4, Family::Sp).unwrap();
        assert_eq!(t.optimal_size(&ratio(5, 8)), Some(3));
        assert_eq!(t.optimal_size(&ratio(1, 2)), Some(1));
        let t = enumerate(&PswitchSet::uniform(3).unwrap(), 3, Family::Sp).unwrap();
        assert_eq!(t.optimal_size(&ratio(2, 9)), Some(2));
        for s in t.set().values() {
            assert_eq!(t.optimal_size(s), Some(1));
        }
        assert_eq!(t.classify(&ratio(1, 81)), OptimalSize::NotWithin(3));
    }

    #[test]
    fn witnesses_have_optimal_size() {
        let t = enumerate(&PswitchSet::uniform(4).unwrap(), 4, Family::Sp).unwrap();
        for (k, v) in t.iter() {
            let w = t.witness(v).unwrap();
            assert_eq!(w.size(), k);
            assert_eq!(w.eval(), *v);
        }
        assert!(t.is_duality_closed());
    }

    #[test]
    fn caps() {
        let s = PswitchSet::uniform(10).unwrap();
        assert!(matches!(
            enumerate(&s, 7, Family::Sp),
            Err(Error::ResourceLimit { .. })
        ));
        let tight = Oracle {
            max_values: 50,
            ..Oracle::default()
        };
        assert!(tight
            .enumerate(&s, 3, Family::Sp)
            .unwrap_err()
            .is_resource_limit());
    }
}
