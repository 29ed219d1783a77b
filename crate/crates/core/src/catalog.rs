//! Small groups and standard structures used by tests, examples and the CLI.

use crate::error::Result;
use crate::fostruct::{Structure, StructureBuilder};
use crate::permgrp::{Perm, PermGroup};

fn group(degree: usize, gens: Vec<Perm>) -> PermGroup {
    PermGroup::from_generators(degree, gens).expect("catalog generators are well formed")
}

fn cycle_perm(degree: usize, points: &[usize]) -> Perm {
    Perm::from_cycles(degree, &[points.to_vec()]).unwrap()
}

/// `Z/n` acting regularly on `n` points.
pub fn cyclic(n: usize) -> PermGroup {
    let points: Vec<usize> = (0..n).collect();
    group(n, vec![cycle_perm(n, &points)])
}

pub fn klein_four() -> PermGroup {
    let a = Perm::from_cycles(4, &[vec![0, 1], vec![2, 3]]).unwrap();
    let b = Perm::from_cycles(4, &[vec![0, 2], vec![1, 3]]).unwrap();
    group(4, vec![a, b])
}

pub fn symmetric(n: usize) -> PermGroup {
    PermGroup::symmetric(n)
}

/// Symmetries of a square, order 8.
pub fn dihedral4() -> PermGroup {
    group(
        4,
        vec![
            cycle_perm(4, &[0, 1, 2, 3]),
            Perm::from_cycles(4, &[vec![1, 3]]).unwrap(),
        ],
    )
}

pub fn alternating4() -> PermGroup {
    group(
        4,
        vec![cycle_perm(4, &[0, 1, 2]), cycle_perm(4, &[1, 2, 3])],
    )
}

/// `Z/2 × Z/4` on `2 + 4` points.
pub fn z2_x_z4() -> PermGroup {
    group(
        6,
        vec![cycle_perm(6, &[0, 1]), cycle_perm(6, &[2, 3, 4, 5])],
    )
}

/// The quaternion group in its regular representation. Points are
/// `sign * 4 + unit` with units `1, i, j, k`.
pub fn quaternion() -> PermGroup {
    // Unit products: (u, v) -> (sign flip, unit).
    const TABLE: [[(bool, usize); 4]; 4] = [
        [(false, 0), (false, 1), (false, 2), (false, 3)],
        [(false, 1), (true, 0), (false, 3), (true, 2)],
        [(false, 2), (true, 3), (true, 0), (false, 1)],
        [(false, 3), (false, 2), (true, 1), (true, 0)],
    ];
    let left = |u: usize| {
        let images = (0..8)
            .map(|p| {
                let (sign, v) = (p / 4 == 1, p % 4);
                let (flip, w) = TABLE[u][v];
                usize::from(sign ^ flip) * 4 + w
            })
            .collect();
        Perm::from_images(images).unwrap()
    };
    group(8, vec![left(1), left(2)])
}

/// The groups on which the regular-structure construction is exercised.
pub fn group_catalog() -> Vec<(String, PermGroup)> {
    let mut out: Vec<(String, PermGroup)> =
        (1..=12).map(|n| (format!("Z/{n}"), cyclic(n))).collect();
    out.push(("Z/2xZ/2".into(), klein_four()));
    out.push(("S3".into(), symmetric(3)));
    out.push(("D4".into(), dihedral4()));
    out.push(("Q8".into(), quaternion()));
    out.push(("A4".into(), alternating4()));
    out.push(("Z/2xZ/4".into(), z2_x_z4()));
    out
}

fn names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

/// Adds the heap relation `x - y + z = w (mod n)` on `sort`.
pub(crate) fn add_heap(
    b: &mut StructureBuilder,
    rel: &str,
    sort: &str,
    elements: &[String],
) -> Result<()> {
    let n = elements.len();
    let mut tuples = Vec::with_capacity(n * n * n);
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                let w = (x + n - y + z) % n;
                tuples.push(vec![&elements[x], &elements[y], &elements[z], &elements[w]]);
            }
        }
    }
    b.relation(rel, &[sort, sort, sort, sort], &tuples)?;
    Ok(())
}

pub(crate) fn add_successor(
    b: &mut StructureBuilder,
    rel: &str,
    sort: &str,
    elements: &[String],
) -> Result<()> {
    let n = elements.len();
    let tuples: Vec<Vec<&String>> = (0..n)
        .map(|i| vec![&elements[i], &elements[(i + 1) % n]])
        .collect();
    b.relation(rel, &[sort, sort], &tuples)?;
    Ok(())
}

/// The directed `n`-cycle on elements `0..n`.
pub fn directed_cycle(n: usize) -> Structure {
    let elems: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut b = StructureBuilder::new(&format!("C{n}"));
    b.sort("V", elems.iter().map(String::as_str)).unwrap();
    add_successor(&mut b, "E", "V", &elems).unwrap();
    b.build().unwrap()
}

/// The heap torsor `T(Z/n)`: one sort with `H(x,y,z,w) ⇔ x - y + z = w`.
pub fn torsor(n: usize) -> Structure {
    let elems: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let mut b = StructureBuilder::new(&format!("T{n}"));
    b.sort("V", elems.iter().map(String::as_str)).unwrap();
    add_heap(&mut b, "H", "V", &elems).unwrap();
    b.build().unwrap()
}

/// An `n`-element set with no structure.
pub fn pure_set(n: usize) -> Structure {
    let elems = names("a", n);
    let mut b = StructureBuilder::new(&format!("Set{n}"));
    b.sort("V", elems.iter().map(String::as_str)).unwrap();
    b.build().unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_orders() {
        let orders: Vec<u128> = group_catalog().iter().map(|(_, g)| g.order()).collect();
        let mut expected: Vec<u128> = (1..=12).collect();
        expected.extend([4, 6, 8, 8, 12, 8]);
        assert_eq!(orders, expected);
    }

    #[test]
    fn quaternion_has_a_unique_involution() {
        let q = quaternion();
        let involutions = q
            .elements(100)
            .unwrap()
            .into_iter()
            .filter(|g| !g.is_identity() && g.compose(g).is_identity())
            .count();
        assert_eq!(involutions, 1);
    }

    #[test]
    fn torsor_relation_size() {
        assert_eq!(torsor(4).relation("H").unwrap().tuples.len(), 64);
    }
}
