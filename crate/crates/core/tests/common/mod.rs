#![allow(dead_code)]

use pswitch::rational::ratio;
use pswitch::{GeneralCircuit, Orientation, PswitchSet, Rational, SpCircuit};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform `a/den` with `0 < a < den`.
pub fn prob(rng: &mut ChaCha8Rng, den: i64) -> Rational {
    ratio(rng.gen_range(1..den), den)
}

/// A target with a random denominator up to 101.
pub fn target(rng: &mut ChaCha8Rng) -> Rational {
    let den = rng.gen_range(2..=101);
    prob(rng, den)
}

/// A set of up to `max_len` distinct values with denominators up to
/// `max_den`.
pub fn set(rng: &mut ChaCha8Rng, max_len: usize, max_den: i64) -> PswitchSet {
    let len = rng.gen_range(1..=max_len);
    let mut values: Vec<Rational> = Vec::new();
    while values.len() < len {
        let den = rng.gen_range(2..=max_den);
        let v = prob(rng, den);
        if !values.contains(&v) {
            values.push(v);
        }
    }
    PswitchSet::new(values).unwrap()
}

fn orientation(rng: &mut ChaCha8Rng) -> Orientation {
    if rng.gen_bool(0.5) {
        Orientation::Series
    } else {
        Orientation::Parallel
    }
}

/// Random series-parallel circuit of exactly `size` leaves drawn from
/// `values`.
pub fn sp(rng: &mut ChaCha8Rng, size: usize, values: &[Rational]) -> SpCircuit {
    if size == 1 {
        return SpCircuit::leaf(values.choose(rng).unwrap().clone()).unwrap();
    }
    let left = rng.gen_range(1..size);
    let a = sp(rng, left, values);
    let b = sp(rng, size - left, values);
    SpCircuit::compose(orientation(rng), vec![a, b]).unwrap()
}

/// Random ssp circuit of exactly `size` leaves drawn from `values`.
pub fn ssp(rng: &mut ChaCha8Rng, size: usize, values: &[Rational]) -> SpCircuit {
    let mut c = SpCircuit::leaf(values.choose(rng).unwrap().clone()).unwrap();
    for _ in 1..size {
        let leaf = SpCircuit::leaf(values.choose(rng).unwrap().clone()).unwrap();
        let children = if rng.gen_bool(0.5) {
            vec![leaf, c]
        } else {
            vec![c, leaf]
        };
        c = SpCircuit::compose(orientation(rng), children).unwrap();
    }
    c
}

/// Random multigraph on `nodes` nodes (terminals `s` and `t` among them)
/// with `edges` pswitches.
pub fn general(rng: &mut ChaCha8Rng, nodes: usize, edges: usize, den: i64) -> GeneralCircuit {
    let name = |i: usize| match i {
        0 => "s".to_string(),
        1 => "t".to_string(),
        k => format!("v{k}"),
    };
    let mut g = GeneralCircuit::new("s", "t").unwrap();
    for _ in 0..edges {
        let u = rng.gen_range(0..nodes);
        let mut v = rng.gen_range(0..nodes);
        if v == u {
            v = (u + 1) % nodes;
        }
        g.add_edge(&name(u), &name(v), prob(rng, den)).unwrap();
    }
    g
}

/// Closure probability by summing over all `2^m` switch states.
pub fn brute_force(g: &GeneralCircuit) -> Rational {
    let edges = g.edges();
    let (s, t) = g.terminals();
    let names: Vec<String> = {
        let mut v: Vec<String> = vec![s.to_string(), t.to_string()];
        for e in edges {
            for n in [g.node_name(e.u), g.node_name(e.v)] {
                if !v.iter().any(|x| x == n) {
                    v.push(n.to_string());
                }
            }
        }
        v
    };
    let index = |n: &str| names.iter().position(|x| x == n).unwrap();
    let mut total = ratio(0, 1);
    for mask in 0u32..(1 << edges.len()) {
        let mut weight = ratio(1, 1);
        let mut parent: Vec<usize> = (0..names.len()).collect();
        fn find(p: &mut Vec<usize>, x: usize) -> usize {
            if p[x] != x {
                let r = find(p, p[x]);
                p[x] = r;
            }
            p[x]
        }
        for (i, e) in edges.iter().enumerate() {
            if mask >> i & 1 == 1 {
                weight *= &e.prob;
                let a = find(&mut parent, index(g.node_name(e.u)));
                let b = find(&mut parent, index(g.node_name(e.v)));
                parent[a] = b;
            } else {
                weight *= ratio(1, 1) - &e.prob;
            }
        }
        if find(&mut parent, 0) == find(&mut parent, 1) {
            total += weight;
        }
    }
    total
}
