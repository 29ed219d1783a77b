mod common;

use std::collections::BTreeSet;

use common::*;
use modeq_core::autcomp::{acl, automorphism_group, dcl, ParameterSet};
use modeq_core::permgrp::{parse_cycles, PermGroup};
use proptest::prelude::*;

fn permutation(n: usize) -> impl Strategy<Value = Images> {
    Just((0..n).collect::<Images>()).prop_shuffle()
}

fn generators() -> impl Strategy<Value = (usize, Vec<Images>)> {
    (1usize..=7).prop_flat_map(|n| (Just(n), prop::collection::vec(permutation(n), 0..4)))
}

fn group(n: usize, gens: &[Images]) -> PermGroup {
    PermGroup::from_generators(n, gens.iter().map(|g| to_perm(g)).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn order_and_membership((n, gens) in generators(), probe in (1usize..=7).prop_flat_map(permutation)) {
        let g = group(n, &gens);
        let elements = closure(n, &gens);
        prop_assert_eq!(g.order(), elements.len() as u128);
        if probe.len() == n {
            prop_assert_eq!(g.contains(&to_perm(&probe)), elements.contains(&probe));
        }
        let listed: BTreeSet<Images> = g.elements(5040).unwrap().iter().map(images).collect();
        prop_assert_eq!(listed, elements);
    }

    #[test]
    fn stabilizers_match_filtering((n, gens) in generators(), points in prop::collection::btree_set(0usize..7, 0..3)) {
        let points: Vec<usize> = points.into_iter().filter(|&p| p < n).collect();
        let g = group(n, &gens);
        let elements = closure(n, &gens);
        let pointwise: BTreeSet<Images> = elements.iter().filter(|p| points.iter().all(|&x| p[x] == x)).cloned().collect();
        prop_assert_eq!(element_set(&g.pointwise_stabilizer(&points).unwrap()), pointwise);
        let set: BTreeSet<usize> = points.iter().copied().collect();
        let setwise: BTreeSet<Images> = elements.iter().filter(|p| points.iter().all(|&x| set.contains(&p[x]))).cloned().collect();
        prop_assert_eq!(element_set(&g.setwise_stabilizer(&points).unwrap()), setwise);
    }

    #[test]
    fn orbits_and_transporters((n, gens) in generators(), a in 0usize..7, b in 0usize..7) {
        let (a, b) = (a % n, b % n);
        let g = group(n, &gens);
        let elements = closure(n, &gens);
        let orbit: BTreeSet<usize> = elements.iter().map(|p| p[a]).collect();
        prop_assert_eq!(g.point_orbit(a).unwrap().into_iter().collect::<BTreeSet<_>>(), orbit.clone());
        match g.transporter(&[a], &[b]).unwrap() {
            Some(t) => {
                prop_assert!(g.contains(&t));
                prop_assert_eq!(t.apply(a), b);
            }
            None => prop_assert!(!orbit.contains(&b)),
        }
    }

    #[test]
    fn normality_and_joins((n, gens) in generators(), sub in prop::collection::vec(any::<prop::sample::Index>(), 0..3)) {
        let elements = closure(n, &gens);
        let list: Vec<&Images> = elements.iter().collect();
        let picked: Vec<Images> = sub.iter().map(|i| list[i.index(list.len())].clone()).collect();
        let h_set = closure(n, &picked);
        let (g, h) = (group(n, &gens), group(n, &picked));
        prop_assert_eq!(h.is_normal_in(&g), is_normal(&h_set, &elements));
        prop_assert!(h.join(&g).unwrap().same_group(&g));
    }
}

#[test]
fn cycle_notation() {
    let names: Vec<String> = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let p = parse_cycles("(a b c)(d)", &names).unwrap();
    assert_eq!(images(&p), vec![1, 2, 0, 3]);
    assert_eq!(p.to_cycle_string(&names), "(a b c)");
    assert!(parse_cycles("(a b a)", &names).is_err());
}

fn fixture_name() -> impl Strategy<Value = &'static str> {
    prop::sample::select(vec![
        "c3",
        "set3",
        "t4",
        "s3",
        "cover_m4_n2",
        "cover_m4_n2_e0",
        "c3_both",
        "c3_point",
        "two_c3",
        "c3_free2",
        "path4",
        "square",
        "pentagon",
        "k23",
        "bipartite",
        "chain4",
        "cyclic_order5",
        "klein",
        "colored7",
    ])
}

fn fixing(all: &BTreeSet<Images>, a: &BTreeSet<usize>) -> BTreeSet<Images> {
    all.iter()
        .filter(|p| a.iter().all(|&x| p[x] == x))
        .cloned()
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `A ⊆ B` gives `Aut(M/B) ≤ Aut(M/A)` and `dcl(A) ⊆ dcl(B)`; `dcl` is a
    /// closure operator and agrees with the fixed points of the exhaustive group.
    #[test]
    fn galois_connection(name in fixture_name(), a in prop::collection::btree_set(0usize..7, 0..3), extra in prop::collection::btree_set(0usize..7, 0..2)) {
        let m = fixture(name);
        let a: BTreeSet<usize> = a.into_iter().filter(|&x| x < m.size()).collect();
        let b: BTreeSet<usize> = a.iter().copied().chain(extra.into_iter().filter(|&x| x < m.size())).collect();
        let all = oracle_automorphisms(&m);
        let (fa, fb) = (fixing(&all, &a), fixing(&all, &b));
        prop_assert!(fb.is_subset(&fa));
        let da = dcl(&m, &ParameterSet::real(a.iter().copied())).unwrap();
        let db = dcl(&m, &ParameterSet::real(b.iter().copied())).unwrap();
        let expected: BTreeSet<usize> = (0..m.size()).filter(|&x| fa.iter().all(|p| p[x] == x)).collect();
        prop_assert_eq!(&da, &expected);
        prop_assert!(a.is_subset(&da) && da.is_subset(&db));
        prop_assert_eq!(dcl(&m, &ParameterSet::real(da.iter().copied())).unwrap(), da.clone());
        prop_assert_eq!(acl(&m, &ParameterSet::real(a.iter().copied())).unwrap().len(), m.size());
    }

    /// Tuples with the same orbit are exactly those an exhaustive automorphism maps together.
    #[test]
    fn homogeneity(name in fixture_name(), s in prop::collection::vec(0usize..7, 1..3), t in prop::collection::vec(0usize..7, 1..3)) {
        let m = fixture(name);
        let s: Vec<usize> = s.into_iter().map(|x| x % m.size()).collect();
        let t: Vec<usize> = t.into_iter().take(s.len()).map(|x| x % m.size()).collect();
        prop_assume!(s.len() == t.len());
        let aut = automorphism_group(&m);
        if s.iter().zip(&t).any(|(&x, &y)| m.sort_of(x) != m.sort_of(y)) {
            prop_assert!(aut.same_orbit(&s, &t).is_err());
            return Ok(());
        }
        let oracle = oracle_automorphisms(&m).iter().any(|p| s.iter().zip(&t).all(|(&x, &y)| p[x] == y));
        prop_assert_eq!(aut.same_orbit(&s, &t).unwrap(), oracle);
    }
}
