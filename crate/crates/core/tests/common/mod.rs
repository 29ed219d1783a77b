//! Brute-force oracles shared by the integration tests. Nothing here calls the
//! search code under test: permutations are plain image vectors and groups are
//! explicit element sets.

#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;

use modeq_core::fostruct::Structure;
use modeq_core::permgrp::{Perm, PermGroup};

pub type Images = Vec<usize>;

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

/// Every fixture, sorted by file name.
pub fn fixtures() -> Vec<(String, Structure)> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(fixture_dir())
        .expect("fixtures directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "st"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let m = Structure::parse(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            (p.file_stem().unwrap().to_string_lossy().into_owned(), m)
        })
        .collect()
}

pub fn fixture(name: &str) -> Structure {
    let text = std::fs::read_to_string(fixture_dir().join(format!("{name}.st"))).unwrap();
    Structure::parse(&text).unwrap()
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Images> {
    let mut v: Images = (0..n).collect();
    let mut out = vec![v.clone()];
    while next_permutation(&mut v) {
        out.push(v.clone());
    }
    out
}

/// Exhaustive filter of all permutations of the universe.
pub fn oracle_automorphisms(m: &Structure) -> BTreeSet<Images> {
    all_permutations(m.size())
        .into_iter()
        .filter(|p| {
            (0..m.size()).all(|x| m.sort_of(x) == m.sort_of(p[x]))
                && m.constants().iter().all(|c| p[c.element] == c.element)
                && m.relations().iter().all(|r| {
                    r.tuples.iter().all(|t| {
                        r.tuples
                            .contains(&t.iter().map(|&x| p[x]).collect::<Vec<_>>())
                    })
                })
        })
        .collect()
}

pub fn compose(p: &[usize], q: &[usize]) -> Images {
    q.iter().map(|&x| p[x]).collect()
}

pub fn inverse(p: &[usize]) -> Images {
    let mut out = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        out[y] = x;
    }
    out
}

pub fn identity(n: usize) -> Images {
    (0..n).collect()
}

/// Closure of a generating set under composition, by breadth-first search.
pub fn closure(degree: usize, gens: &[Images]) -> BTreeSet<Images> {
    let mut seen = BTreeSet::from([identity(degree)]);
    let mut queue = VecDeque::from([identity(degree)]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = compose(g, &x);
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn images(p: &Perm) -> Images {
    p.images().collect()
}

/// Element set of a library group, recomputed from its generators alone.
pub fn element_set(g: &PermGroup) -> BTreeSet<Images> {
    let gens: Vec<Images> = g.generators().iter().map(images).collect();
    closure(g.degree(), &gens)
}

pub fn to_perm(p: &[usize]) -> Perm {
    Perm::from_images(p.to_vec()).unwrap()
}

/// Every subgroup generated by at most two elements.
pub fn two_generated_subgroups(elements: &BTreeSet<Images>) -> BTreeSet<BTreeSet<Images>> {
    let degree = elements.iter().next().unwrap().len();
    let v: Vec<&Images> = elements.iter().collect();
    let mut out = BTreeSet::new();
    for i in 0..v.len() {
        for j in i..v.len() {
            out.insert(closure(degree, &[v[i].clone(), v[j].clone()]));
        }
    }
    out
}

pub fn is_normal(h: &BTreeSet<Images>, g: &BTreeSet<Images>) -> bool {
    g.iter().all(|x| {
        h.iter()
            .all(|y| h.contains(&compose(&compose(x, y), &inverse(x))))
    })
}

pub fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Splittings of `Z/m → Z/k`, `k = m/n`: a homomorphism `Z/k → Z/m` is fixed
/// by the image `x` of `1`, which needs `k·x ≡ 0 (mod m)`, and it splits the
/// reduction iff `x ≡ 1 (mod k)`.
pub fn cyclic_splittings(m: usize, n: usize) -> usize {
    let k = m / n;
    (0..m)
        .filter(|&x| (k * x).is_multiple_of(m) && x % k == 1 % k)
        .count()
}
