mod common;

use std::collections::HashMap;

use common::*;
use modeq_core::autcomp::automorphism_group;
use modeq_core::fostruct::{
    comprehension_set, defined_set, defined_set_with, eval_formula, parse_comprehension,
    parse_formula, CheckedFormula, Formula, Structure, Term,
};
use proptest::prelude::*;

#[test]
fn fixtures_survive_printing() {
    for (name, m) in fixtures() {
        let again = Structure::parse(&m.to_text()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(again.element_names(), m.element_names(), "{name}");
        assert_eq!(again.relations(), m.relations(), "{name}");
        assert_eq!(again.constants(), m.constants(), "{name}");
    }
}

#[test]
fn full_sort_and_edges_of_a_triangle() {
    let m = fixture("c3");
    assert_eq!(
        defined_set(&m, &parse_formula("x = x").unwrap())
            .unwrap()
            .len(),
        3
    );
    let edges = defined_set(&m, &parse_formula("E(x,y)").unwrap()).unwrap();
    assert_eq!(edges.tuples, m.relation("E").unwrap().tuples);
    let none = defined_set(&m, &parse_formula("E(x,y) & E(y,x)").unwrap()).unwrap();
    assert!(none.is_empty());
}

#[test]
fn comprehension_fixes_variable_order() {
    let m = fixture("c3");
    let c = parse_comprehension("{ y:V, x:V | E(x,y) }").unwrap();
    let set = comprehension_set(&m, &c).unwrap();
    let reversed: Vec<Vec<usize>> = m
        .relation("E")
        .unwrap()
        .tuples
        .iter()
        .map(|t| vec![t[1], t[0]])
        .collect();
    assert_eq!(set.tuples.into_iter().collect::<Vec<_>>(), {
        let mut r = reversed;
        r.sort();
        r
    });
}

#[test]
fn two_sorted_quantifiers() {
    let m = fixture("bipartite");
    let a = m.sort_id("A").unwrap();
    let f = parse_formula("exists y:B. R(x,y)").unwrap();
    let set = defined_set_with(&m, &[("x".into(), a)], &f).unwrap();
    let expected: std::collections::BTreeSet<Vec<usize>> = m
        .relation("R")
        .unwrap()
        .tuples
        .iter()
        .map(|t| vec![t[0]])
        .collect();
    assert_eq!(set.tuples, expected);
}

#[test]
fn sort_errors_are_reported() {
    let m = fixture("bipartite");
    assert!(defined_set(&m, &parse_formula("R(x,x)").unwrap()).is_err());
    assert!(parse_formula("E(x,").is_err());
    assert!(Structure::parse("structure X\nsort V = { a }\nrel E/2 : V,V = { (a,b) }\n").is_err());
}

#[test]
fn named_constants_and_literals() {
    let m = fixture("c3_point");
    let f = parse_formula("x = k").unwrap();
    let set = defined_set(&m, &f).unwrap();
    assert_eq!(set.tuples.len(), 1);
    let lit = defined_set(&m, &parse_formula("E(@0, x)").unwrap()).unwrap();
    assert_eq!(
        lit.tuples.into_iter().next().unwrap(),
        vec![m.element("1").unwrap()]
    );
}

fn var() -> impl Strategy<Value = String> {
    prop_oneof![Just("x".to_string()), Just("y".to_string())]
}

/// Formulas over a single binary relation `E`, free variables among `x, y`.
fn formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        (var(), var())
            .prop_map(|(a, b)| Formula::Atom("E".into(), vec![Term::Name(a), Term::Name(b)])),
        (var(), var()).prop_map(|(a, b)| Formula::Eq(Term::Name(a), Term::Name(b))),
    ];
    atom.prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(|f| Formula::Not(Box::new(f))),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..3).prop_map(Formula::Or),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Implies(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Formula::Iff(Box::new(a), Box::new(b))),
            (var(), inner.clone()).prop_map(|(v, f)| Formula::Exists(v, "V".into(), Box::new(f))),
            (var(), inner).prop_map(|(v, f)| Formula::Forall(v, "V".into(), Box::new(f))),
        ]
    })
}

fn graph_fixture() -> impl Strategy<Value = &'static str> {
    prop_oneof![
        Just("c3"),
        Just("square"),
        Just("path4"),
        Just("pentagon"),
        Just("chain4"),
        Just("k23")
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn printing_and_parsing_agree(f in formula()) {
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn defined_sets_are_invariant(name in graph_fixture(), f in formula()) {
        let m = fixture(name);
        let vars = [("x".to_string(), 0), ("y".to_string(), 0)];
        let set = defined_set_with(&m, &vars, &f).unwrap();
        for g in oracle_automorphisms(&m) {
            for t in &set.tuples {
                prop_assert!(set.contains(&[g[t[0]], g[t[1]]]));
            }
        }
    }

    #[test]
    fn evaluation_matches_defined_set(name in graph_fixture(), f in formula()) {
        let m = fixture(name);
        let vars = [("x".to_string(), 0), ("y".to_string(), 0)];
        let set = defined_set_with(&m, &vars, &f).unwrap();
        let free = CheckedFormula::check(&m, &f, &[]).unwrap().free_variables().to_vec();
        for a in 0..m.size() {
            for b in 0..m.size() {
                let env: HashMap<String, usize> = [("x", a), ("y", b)]
                    .into_iter()
                    .filter(|(v, _)| free.iter().any(|(w, _)| w == v))
                    .map(|(v, e)| (v.to_string(), e))
                    .collect();
                prop_assert_eq!(eval_formula(&m, &f, &env).unwrap(), set.contains(&[a, b]));
            }
        }
    }

    #[test]
    fn relabeling_preserves_the_group_order(name in graph_fixture(), seed in any::<u64>()) {
        let m = fixture(name);
        let mut order: Vec<usize> = (0..m.size()).collect();
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let r = m.relabeled(&order, |x| format!("r{x}")).unwrap();
        prop_assert_eq!(automorphism_group(&r).group().order(), oracle_automorphisms(&m).len() as u128);
    }
}
