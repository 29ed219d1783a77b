mod common;

use common::*;
use modeq_core::autcomp::ParameterSet;
use modeq_core::covers::{build_torsor_cover, CoverStructure, Verdict};
use modeq_core::fostruct::Structure;
use modeq_core::sections::{find_sections, section_from_imaginary, section_imaginary};
use modeq_core::towers::{build_tower, check_finitary, inverse_limit_truncation, parse_inclusions};
use modeq_core::{Error, Limits};
use proptest::prelude::*;

fn shuffle(n: usize, seed: u64) -> Vec<usize> {
    let mut v: Vec<usize> = (0..n).collect();
    let mut s = seed;
    for i in (1..n).rev() {
        s = s
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        v.swap(i, (s >> 33) as usize % (i + 1));
    }
    v
}

/// A permutation of each sort block of `m`.
fn blockwise(m: &Structure, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m.size()).collect();
    for (k, s) in m.sorts().iter().enumerate() {
        let p = shuffle(s.elements.len(), seed.wrapping_add(k as u64));
        for (i, &j) in p.iter().enumerate() {
            order[s.elements[i]] = s.elements[j];
        }
    }
    order
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn section_count_ignores_labels(m in 2usize..=12, pick in any::<prop::sample::Index>(), named in any::<bool>(), seed in any::<u64>()) {
        let divisors: Vec<usize> = (2..=m).filter(|n| m % n == 0).collect();
        let n = divisors[pick.index(divisors.len())];
        let limits = Limits::default();
        let cover = build_torsor_cover(m, n, named.then_some(0)).unwrap();
        let base = find_sections(&cover.exact_sequence(&limits).unwrap(), &limits).unwrap().len();
        let order = blockwise(cover.structure(), seed);
        let relabeled = cover.structure().relabeled(&order, |x| format!("{x}_r")).unwrap();
        let again = CoverStructure::from_structure(relabeled).unwrap();
        prop_assert!(again.validate().unwrap().passes());
        let count = find_sections(&again.exact_sequence(&limits).unwrap(), &limits).unwrap().len();
        prop_assert_eq!(count, base);
        let expected = if named { 1 } else { cyclic_splittings(m, n) };
        prop_assert_eq!(count, expected);
    }
}

#[test]
fn fixture_covers_validate() {
    for name in ["cover_m4_n2", "cover_m4_n2_e0"] {
        let cover = CoverStructure::from_structure(fixture(name)).unwrap();
        let report = cover.validate().unwrap();
        assert!(report.passes(), "{name}: {report:?}");
        assert_eq!(cover.deck_group().unwrap().order(), 2);
    }
}

#[test]
fn non_free_deck_group_is_rejected() {
    // The deck relation swaps one fiber and fixes the other: not a C2 cover.
    let text = "structure Broken\nsort C = { a, b, c, d }\nsort N = { x, y }\n\
        fun pr : C -> N = { (a) -> x, (b) -> x, (c) -> y, (d) -> y }\n\
        fun deck0 : C -> C = { (a) -> a, (b) -> b, (c) -> c, (d) -> d }\n\
        fun deck1 : C -> C = { (a) -> b, (b) -> a, (c) -> c, (d) -> d }\n";
    let m = Structure::parse(text).unwrap();
    let result = CoverStructure::from_structure(m).and_then(|c| c.deck_group());
    assert!(matches!(result, Err(Error::C2Violation(_))), "{result:?}");
}

#[test]
fn six_over_two_has_a_section_but_no_point() {
    let limits = Limits::default();
    let cover = build_torsor_cover(6, 2, None).unwrap();
    let report = cover.main_theorem_report(&limits).unwrap();
    assert_eq!(report.sections, 1);
    assert!(report.definable_points.is_empty());
    assert!(!report.elimination);
    assert_eq!(report.verdict, Verdict::Pass);
    let seq = cover.exact_sequence(&limits).unwrap();
    let s = &find_sections(&seq, &limits).unwrap()[0];
    let si = section_imaginary(&seq, s, &limits).unwrap();
    assert!(si.verification.holds());
    // No single cover point has the section's fixing group.
    for &c in &cover.c_points {
        assert!(!cover
            .aut
            .fixing(&ParameterSet::real([c]))
            .unwrap()
            .same_group(&si.stabilizer));
    }
}

#[test]
fn four_over_two_does_not_split() {
    let limits = Limits::default();
    let cover = build_torsor_cover(4, 2, None).unwrap();
    let seq = cover.exact_sequence(&limits).unwrap();
    assert!(find_sections(&seq, &limits).unwrap().is_empty());
    let report = cover.main_theorem_report(&limits).unwrap();
    assert!(report.elimination && report.elimination_vacuous);
}

#[test]
fn named_point_lifts_through_a_cover_point() {
    let limits = Limits::default();
    let cover = build_torsor_cover(6, 3, Some(1)).unwrap();
    let seq = cover.exact_sequence(&limits).unwrap();
    let sections = find_sections(&seq, &limits).unwrap();
    assert_eq!(sections.len(), 1);
    let a = ParameterSet::real([cover.c_points[1]]);
    assert!(section_from_imaginary(&seq, &a, &limits)
        .unwrap()
        .same_as(&sections[0]));
    // Fixing nothing leaves the deck group, so lifts are not unique.
    assert!(matches!(
        section_from_imaginary(&seq, &ParameterSet::empty(), &limits),
        Err(Error::LiftNotUnique(_))
    ));
}

#[test]
fn deck_transformations_in_the_group_and_the_structure() {
    let limits = Limits::default();
    let c4 = build_torsor_cover(6, 3, None)
        .unwrap()
        .check_c4(&limits)
        .unwrap();
    // Every deck map is named, so all are 0-definable in M; in the bare group only the identity is.
    assert_eq!(c4.m_side.len(), 3);
    assert_eq!(c4.group_side, vec!["id".to_string()]);
    assert!(!c4.holds);
}

#[test]
fn tower_from_inclusion_text() {
    let limits = Limits::default();
    let levels = vec![fixture("c3"), fixture("c3_both")];
    let inc = parse_inclusions("map 0 -> 1\n0 -> 0\n1 -> 1\n2 -> 2\n", &levels).unwrap();
    let t = build_tower(levels, inc, &limits).unwrap();
    assert!(check_finitary(&t).unwrap());
    let tr = inverse_limit_truncation(&t, 1).unwrap();
    assert_eq!(tr.orders, vec![3, 3]);
    assert_eq!(tr.kernel_orders, vec![1]);
    assert!(tr.coherent);
    assert!(inverse_limit_truncation(&t, 2).is_err());
}
