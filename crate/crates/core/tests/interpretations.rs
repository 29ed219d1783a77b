mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use common::*;
use modeq_core::autcomp::{automorphism_group, AutResult};
use modeq_core::catalog::{directed_cycle, symmetric};
use modeq_core::fostruct::{defined_set, parse_formula, DefinableSet};
use modeq_core::imaginaries::{canonical_parameter, coset_sort, quotient_sort};
use modeq_core::morphcat::{
    equivalent_premorphisms, exact_sequence, group_to_structure, interpret_via_groups,
    invert_isomorphism, Equivalence, Premorphism,
};
use modeq_core::permgrp::PermGroup;
use modeq_core::towers::cyclic_two_power_tower;
use modeq_core::Limits;
use proptest::prelude::*;

fn shared(name: &str) -> Arc<AutResult> {
    Arc::new(automorphism_group(&fixture(name)))
}

fn pairs(n: usize) -> impl Strategy<Value = BTreeSet<Vec<usize>>> {
    prop::collection::btree_set((0..n, 0..n).prop_map(|(a, b)| vec![a, b]), 1..5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The canonical parameter of `σ(R)` is fixed by `σ Stab(R) σ⁻¹`, and
    /// `Stab(R)` is the exhaustive setwise stabilizer of `R`.
    #[test]
    fn canonical_parameters_conjugate(name in prop::sample::select(vec!["t4", "square", "k23", "s3", "pentagon"]), r in pairs(4), pick in any::<prop::sample::Index>()) {
        let limits = Limits::default();
        let aut = shared(name);
        let all = oracle_automorphisms(aut.structure());
        let list: Vec<&Images> = all.iter().collect();
        let sigma = list[pick.index(list.len())];
        let image = |p: &Images, r: &BTreeSet<Vec<usize>>| -> BTreeSet<Vec<usize>> {
            r.iter().map(|t| t.iter().map(|&x| p[x]).collect()).collect()
        };
        let cp = canonical_parameter(&aut, &r, &limits).unwrap();
        let stab: BTreeSet<Images> = all.iter().filter(|p| image(p, &r) == r).cloned().collect();
        prop_assert_eq!(element_set(&cp.stabilizer), stab.clone());
        let moved = canonical_parameter(&aut, &image(sigma, &r), &limits).unwrap();
        let conjugated: BTreeSet<Images> = stab.iter().map(|h| compose(&compose(sigma, h), &inverse(sigma))).collect();
        prop_assert_eq!(element_set(&moved.stabilizer), conjugated);
        prop_assert_eq!(cp.is_zero_definable(), all.iter().all(|p| image(p, &r) == r));
    }
}

#[test]
fn coset_sorts_have_index_many_classes() {
    let limits = Limits::default();
    let m = group_to_structure(&symmetric(3), &limits)
        .unwrap()
        .structure;
    let aut = automorphism_group(&m);
    for h in two_generated_subgroups(&element_set(aut.group())) {
        let k = PermGroup::from_elements(m.size(), h.iter().map(|p| to_perm(p))).unwrap();
        let (sort, identity_class) = coset_sort(&aut, &k, &limits).unwrap();
        assert_eq!(sort.num_classes(), 6 / h.len());
        assert_eq!(sort.representative(identity_class), identity(6).as_slice());
    }
}

#[test]
fn quotient_by_a_definable_equivalence() {
    let limits = Limits::default();
    let m = fixture("two_c3");
    let aut = automorphism_group(&m);
    // Pairs from V x W, identified when they differ by the same rotation.
    let v = m.sort_id("V").unwrap();
    let w = m.sort_id("W").unwrap();
    let d = DefinableSet::explicit(
        vec![v, w],
        (0..3).flat_map(|a| (3..6).map(move |b| vec![a, b])),
    );
    let e_formula = parse_formula(
        "exists u:V, t:W. (E(x1,u) & F(y1,t) & ((x2 = u & y2 = t) | (x2 = x1 & y2 = y1)))",
    )
    .unwrap();
    let raw = defined_set(&m, &e_formula).unwrap();
    let e = DefinableSet::explicit(raw.signature.clone(), raw.tuples.iter().cloned());
    // Not symmetric on its own: one rotation step forward only.
    assert!(quotient_sort(&aut, &d, &e, &limits).is_err());
    // The full diagonal-rotation relation is an equivalence with 3 classes.
    let e_full = DefinableSet::explicit(
        vec![v, w, v, w],
        (0..3).flat_map(|a| {
            (0..3).flat_map(move |b| {
                (0..3).map(move |k| vec![a, 3 + b, (a + k) % 3, 3 + (b + k) % 3])
            })
        }),
    );
    let q = quotient_sort(&aut, &d, &e_full, &limits).unwrap();
    assert_eq!(q.num_classes(), 3);
}

/// Inclusions of 0-definable sorts: the restriction is onto `Aut(N)` exactly
/// when every automorphism of `N` extends, which the exhaustive groups decide.
#[test]
fn embeddings_match_extension_oracle() {
    let limits = Limits::default();
    let cases = [
        ("two_c3", "V"),
        ("c3_free2", "N"),
        ("bipartite", "A"),
        ("cover_m4_n2", "N"),
        ("cover_m4_n2_e0", "N"),
    ];
    let mut outcomes = BTreeSet::new();
    for (name, sort) in cases {
        let total = shared(name);
        let seq = exact_sequence(total.clone(), &[sort], &limits);
        let (sub, embed) = total.structure().induced("sub", &[sort]).unwrap();
        let sub_aut = oracle_automorphisms(&sub);
        let restricted: BTreeSet<Images> = oracle_automorphisms(total.structure())
            .iter()
            .map(|p| {
                embed
                    .iter()
                    .map(|&y| embed.iter().position(|&z| z == p[y]).unwrap())
                    .collect()
            })
            .collect();
        let g = Premorphism::real(
            Arc::new(automorphism_group(&sub)),
            total.clone(),
            embed.clone(),
        )
        .unwrap();
        g.check().unwrap();
        let expected = restricted == sub_aut;
        assert_eq!(g.is_embedding().unwrap(), expected, "{name}");
        assert_eq!(seq.is_ok(), expected, "{name}");
        outcomes.insert(expected);
    }
    assert_eq!(outcomes.len(), 2);
}

#[test]
fn restriction_is_contravariant() {
    let limits = Limits::default();
    let t = cyclic_two_power_tower(3, &limits).unwrap();
    let (f, g) = (t.inclusion(0).unwrap(), t.inclusion(1).unwrap());
    let gf = g.compose(&f).unwrap();
    let direct = gf.restriction(&limits).unwrap();
    let (rf, rg) = (
        f.restriction(&limits).unwrap(),
        g.restriction(&limits).unwrap(),
    );
    for (sigma, image) in direct.table() {
        assert_eq!(rf.apply(rg.apply(&sigma).unwrap()), Some(&image));
    }
    let id = Premorphism::identity(t.levels[2].clone());
    let rid = id.restriction(&limits).unwrap();
    assert!(rid.table().iter().all(|(a, b)| a == b));
}

#[test]
fn double_inversion_is_equivalent() {
    let limits = Limits::default();
    for name in ["c3", "set3", "square", "k23", "two_c3", "chain4"] {
        let n = shared(name);
        let reg = group_to_structure(n.group(), &limits).unwrap();
        let r = Arc::new(automorphism_group(&reg.structure));
        let psi = reg.translation_hom(n.group(), &r, &limits).unwrap();
        let g = interpret_via_groups(n.clone(), r, &psi, &limits).unwrap();
        let h = invert_isomorphism(&g, &limits).unwrap();
        assert!(
            h.is_embedding().unwrap() && h.is_surjection().unwrap(),
            "{name}"
        );
        let back = invert_isomorphism(&h, &limits).unwrap();
        assert_eq!(
            equivalent_premorphisms(&back, &g, &limits).unwrap(),
            Equivalence::Equivalent,
            "{name}"
        );
    }
}

#[test]
fn rotated_embeddings_are_equivalent() {
    let limits = Limits::default();
    let c3 = Arc::new(automorphism_group(&directed_cycle(3)));
    let c3_both = shared("c3_both");
    let id = Premorphism::real(c3.clone(), c3_both.clone(), vec![0, 1, 2]).unwrap();
    let rotated = Premorphism::real(c3.clone(), c3_both.clone(), vec![1, 2, 0]).unwrap();
    assert_eq!(
        equivalent_premorphisms(&id, &rotated, &limits).unwrap(),
        Equivalence::Equivalent
    );
    let mut tight = limits;
    tight.max_equivalence_carrier = 2;
    assert_eq!(
        equivalent_premorphisms(&id, &rotated, &tight).unwrap(),
        Equivalence::Undecided
    );
    // A directed path is not definable in the undirected square.
    let path = Premorphism::real(shared("chain4"), shared("square"), vec![0, 1, 2, 3]).unwrap();
    assert!(path.check().is_err());
}
