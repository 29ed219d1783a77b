//! Automorphism groups of finite structures, relative automorphism groups
//! `Aut(M/A)`, definable and algebraic closure, and orbit equality.
//!
//! The search is individualization-refinement. Colorings are vectors of
//! 64-bit hashes of a point's refinement history, so two colorings computed
//! along corresponding branches agree exactly when the branches are related by
//! an automorphism. Every leaf is verified before it becomes a generator, and
//! orbit pruning at each base level keeps the search to one successful leaf per
//! new coset representative.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fostruct::Structure;
use crate::imaginaries::ImaginarySort;
use crate::permgrp::{Perm, PermGroup};

/// An element of a bounded imaginary sort: the class with index `class`.
#[derive(Clone, Debug)]
pub struct ImaginaryElement {
    pub sort: Arc<ImaginarySort>,
    pub class: usize,
}

/// Parameters for `Aut(M/A)`: real elements are fixed pointwise, imaginary
/// elements (classes) are fixed setwise.
#[derive(Clone, Debug, Default)]
pub struct ParameterSet {
    pub real: BTreeSet<usize>,
    pub imaginary: Vec<ImaginaryElement>,
}

impl ParameterSet {
    pub fn empty() -> ParameterSet {
        ParameterSet::default()
    }

    pub fn real(points: impl IntoIterator<Item = usize>) -> ParameterSet {
        ParameterSet {
            real: points.into_iter().collect(),
            imaginary: Vec::new(),
        }
    }

    pub fn imaginary(element: ImaginaryElement) -> ParameterSet {
        ParameterSet {
            real: BTreeSet::new(),
            imaginary: vec![element],
        }
    }

    pub fn union(&self, other: &ParameterSet) -> ParameterSet {
        let mut out = self.clone();
        out.real.extend(other.real.iter().copied());
        out.imaginary.extend(other.imaginary.iter().cloned());
        out
    }

    pub fn is_empty(&self) -> bool {
        self.real.is_empty() && self.imaginary.is_empty()
    }
}

/// `Aut(M)` together with the stable root coloring found by refinement.
#[derive(Clone, Debug)]
pub struct AutResult {
    structure: Arc<Structure>,
    group: PermGroup,
    cells: Vec<Vec<usize>>,
}

impl AutResult {
    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    pub fn shared_structure(&self) -> Arc<Structure> {
        self.structure.clone()
    }

    pub fn group(&self) -> &PermGroup {
        &self.group
    }

    /// The cells of the equitable partition at the root of the search.
    pub fn certificate(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn fixing(&self, a: &ParameterSet) -> Result<PermGroup> {
        fixing_subgroup(&self.group, a)
    }

    pub fn dcl(&self, a: &ParameterSet) -> Result<BTreeSet<usize>> {
        Ok(fixed_points(&self.fixing(a)?))
    }

    /// Elements with a finite orbit under `Aut(M/A)`.
    pub fn acl(&self, a: &ParameterSet) -> Result<BTreeSet<usize>> {
        let h = self.fixing(a)?;
        Ok(h.orbits().into_iter().flatten().collect())
    }

    pub fn same_orbit(&self, a: &[usize], b: &[usize]) -> Result<bool> {
        check_tuple_pair(&self.structure, a, b)?;
        Ok(self.group.transporter(a, b)?.is_some())
    }
}

fn check_tuple_pair(m: &Structure, a: &[usize], b: &[usize]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::SortMismatch(format!(
            "tuples of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    for (&x, &y) in a.iter().zip(b) {
        for &e in &[x, y] {
            if e >= m.size() {
                return Err(Error::UnknownElement(format!("#{e}")));
            }
        }
        if m.sort_of(x) != m.sort_of(y) {
            return Err(Error::SortMismatch(format!(
                "`{}` and `{}` lie in different sorts",
                m.element_name(x),
                m.element_name(y)
            )));
        }
    }
    Ok(())
}

pub fn fixed_points(g: &PermGroup) -> BTreeSet<usize> {
    (0..g.degree())
        .filter(|&x| g.generators().iter().all(|s| s.fixes(x)))
        .collect()
}

/// The subgroup of `g` fixing the real parameters pointwise and the imaginary
/// ones setwise. Imaginary classes are handled by adjoining them as extra
/// points, stabilizing, and projecting back onto the original domain.
pub fn fixing_subgroup(g: &PermGroup, a: &ParameterSet) -> Result<PermGroup> {
    let n = g.degree();
    for &p in &a.real {
        if p >= n {
            return Err(Error::UnknownElement(format!("#{p}")));
        }
    }
    if a.imaginary.is_empty() {
        return g.pointwise_stabilizer(&a.real.iter().copied().collect::<Vec<_>>());
    }
    let mut sorts: Vec<Arc<ImaginarySort>> = Vec::new();
    for e in &a.imaginary {
        if e.class >= e.sort.num_classes() {
            return Err(Error::UnknownElement(format!(
                "imaginary class {}",
                e.class
            )));
        }
        if e.sort.degree() != n {
            return Err(Error::DegreeMismatch {
                expected: n,
                found: e.sort.degree(),
            });
        }
        if !sorts.iter().any(|s| Arc::ptr_eq(s, &e.sort)) {
            sorts.push(e.sort.clone());
        }
    }
    let mut offsets = Vec::new();
    let mut total = n;
    for s in &sorts {
        offsets.push(total);
        total += s.num_classes();
    }
    let mut gens = Vec::new();
    for s in g.generators() {
        let mut ext = s.clone();
        for sort in &sorts {
            ext = ext.direct_sum(&sort.act(s)?);
        }
        gens.push(ext);
    }
    let extended = PermGroup::from_generators(total, gens)?;
    let mut points: Vec<usize> = a.real.iter().copied().collect();
    for e in &a.imaginary {
        let k = sorts.iter().position(|s| Arc::ptr_eq(s, &e.sort)).unwrap();
        points.push(offsets[k] + e.class);
    }
    let stab = extended.pointwise_stabilizer(&points)?;
    let domain: Vec<usize> = (0..n).collect();
    let gens = stab
        .generators()
        .iter()
        .map(|p| p.restrict(&domain))
        .collect::<Result<Vec<_>>>()?;
    PermGroup::from_generators(n, gens)
}

/// True iff `p` maps each sort onto itself, preserves every relation and fixes
/// every constant.
pub fn is_automorphism(m: &Structure, p: &Perm) -> bool {
    if p.degree() != m.size() {
        return false;
    }
    (0..m.size()).all(|x| m.sort_of(p.apply(x)) == m.sort_of(x))
        && m.constants().iter().all(|c| p.fixes(c.element))
        && m.relations().iter().all(|r| {
            r.tuples
                .iter()
                .all(|t| r.tuples.contains(&p.apply_tuple(t)))
        })
}

fn hash_of<T: Hash>(value: T) -> u64 {
    let mut h = DefaultHasher::new();
    value.hash(&mut h);
    h.finish()
}

fn distinct(colors: &[u64]) -> usize {
    colors
        .iter()
        .collect::<std::collections::HashSet<_>>()
        .len()
}

fn sorted(colors: &[u64]) -> Vec<u64> {
    let mut v = colors.to_vec();
    v.sort_unstable();
    v
}

struct Refiner<'a> {
    m: &'a Structure,
}

impl<'a> Refiner<'a> {
    fn initial(&self) -> Vec<u64> {
        let mut names: Vec<Vec<&str>> = vec![Vec::new(); self.m.size()];
        for c in self.m.constants() {
            names[c.element].push(&c.name);
        }
        (0..self.m.size())
            .map(|x| {
                names[x].sort_unstable();
                hash_of((self.m.sort_of(x), &names[x]))
            })
            .collect()
    }

    /// Refines to an equitable coloring. Each round replaces a color by a hash
    /// of the old color and the multiset of (relation, position, colors of the
    /// tuple) over the tuples through the point.
    fn refine(&self, colors: &mut Vec<u64>) {
        let n = colors.len();
        let mut count = distinct(colors);
        loop {
            let mut sig: Vec<Vec<u64>> = vec![Vec::new(); n];
            for (r, rel) in self.m.relations().iter().enumerate() {
                for t in &rel.tuples {
                    let mut h = DefaultHasher::new();
                    r.hash(&mut h);
                    for &x in t {
                        colors[x].hash(&mut h);
                    }
                    let base = h.finish();
                    for (p, &x) in t.iter().enumerate() {
                        sig[x].push(hash_of((base, p)));
                    }
                }
            }
            let next: Vec<u64> = (0..n)
                .map(|x| {
                    sig[x].sort_unstable();
                    hash_of((colors[x], &sig[x]))
                })
                .collect();
            *colors = next;
            let c = distinct(colors);
            if c == count {
                return;
            }
            count = c;
        }
    }

    fn individualize(&self, colors: &mut [u64], x: usize, depth: usize) {
        colors[x] = hash_of((colors[x], "individualized", depth));
    }
}

/// A node on the leftmost path of the search tree.
struct Node {
    colors: Vec<u64>,
    cell: u64,
    base_point: usize,
}

struct Search<'a> {
    refiner: Refiner<'a>,
    path: Vec<Node>,
    leaf: Vec<u64>,
    profiles: Vec<Vec<u64>>,
}

impl<'a> Search<'a> {
    fn new(m: &'a Structure) -> Search<'a> {
        let refiner = Refiner { m };
        let mut colors = refiner.initial();
        refiner.refine(&mut colors);
        let mut path = Vec::new();
        let mut profiles = vec![sorted(&colors)];
        loop {
            let mut count: HashMap<u64, usize> = HashMap::new();
            for &c in &colors {
                *count.entry(c).or_default() += 1;
            }
            let Some(b) = (0..colors.len()).find(|&x| count[&colors[x]] > 1) else {
                break;
            };
            let cell = colors[b];
            let mut next = colors.clone();
            refiner.individualize(&mut next, b, path.len());
            refiner.refine(&mut next);
            profiles.push(sorted(&next));
            path.push(Node {
                colors,
                cell,
                base_point: b,
            });
            colors = next;
        }
        Search {
            refiner,
            path,
            leaf: colors,
            profiles,
        }
    }

    /// Continues from a right-hand coloring matched with the left path at
    /// `level`, returning the first verified automorphism below it.
    fn descend(&self, level: usize, right: Vec<u64>) -> Option<Perm> {
        if level == self.path.len() {
            let at: HashMap<u64, usize> = right.iter().enumerate().map(|(y, &c)| (c, y)).collect();
            let images: Vec<usize> = self.leaf.iter().map(|c| at[c]).collect();
            let p = Perm::from_images(images).ok()?;
            return is_automorphism(self.refiner.m, &p).then_some(p);
        }
        let cell = self.path[level].cell;
        for y in (0..right.len()).filter(|&y| right[y] == cell) {
            if let Some(p) = self.branch(level, &right, y) {
                return Some(p);
            }
        }
        None
    }

    fn branch(&self, level: usize, right: &[u64], y: usize) -> Option<Perm> {
        let mut next = right.to_vec();
        self.refiner.individualize(&mut next, y, level);
        self.refiner.refine(&mut next);
        if sorted(&next) != self.profiles[level + 1] {
            return None;
        }
        self.descend(level + 1, next)
    }

    fn run(&self) -> Vec<Perm> {
        let n = self.leaf.len();
        let mut gens: Vec<Perm> = Vec::new();
        for i in (0..self.path.len()).rev() {
            let node = &self.path[i];
            let mut orbit = orbit_of(&gens, node.base_point, n);
            for c in 0..n {
                if node.colors[c] != node.cell || orbit[c] {
                    continue;
                }
                if let Some(p) = self.branch(i, &node.colors, c) {
                    gens.push(p);
                    orbit = orbit_of(&gens, node.base_point, n);
                }
            }
        }
        gens
    }
}

fn orbit_of(gens: &[Perm], x: usize, n: usize) -> Vec<bool> {
    let mut seen = vec![false; n];
    seen[x] = true;
    let mut stack = vec![x];
    while let Some(y) = stack.pop() {
        for g in gens {
            let z = g.apply(y);
            if !seen[z] {
                seen[z] = true;
                stack.push(z);
            }
        }
    }
    seen
}

pub fn automorphism_group(m: &Structure) -> AutResult {
    automorphism_group_shared(Arc::new(m.clone()))
}

pub fn automorphism_group_shared(m: Arc<Structure>) -> AutResult {
    let search = Search::new(&m);
    let gens = search.run();
    let mut cells: HashMap<u64, Vec<usize>> = HashMap::new();
    for (x, &c) in search
        .path
        .first()
        .map(|n| &n.colors)
        .unwrap_or(&search.leaf)
        .iter()
        .enumerate()
    {
        cells.entry(c).or_default().push(x);
    }
    let mut cells: Vec<Vec<usize>> = cells.into_values().collect();
    cells.sort();
    let group =
        PermGroup::from_generators(m.size(), gens).expect("generators have the universe degree");
    AutResult {
        structure: m,
        group,
        cells,
    }
}

/// Every sort-preserving permutation that is an automorphism, by exhaustive
/// enumeration. Refuses universes with more than `max_points` elements.
pub fn brute_force_automorphisms(m: &Structure, max_points: usize) -> Result<Vec<Perm>> {
    if m.size() > max_points {
        return Err(Error::Precondition(format!(
            "brute-force enumeration limited to {max_points} points, structure has {}",
            m.size()
        )));
    }
    let sorts: Vec<&[usize]> = m.sorts().iter().map(|s| s.elements.as_slice()).collect();
    let mut out = Vec::new();
    let mut images: Vec<usize> = (0..m.size()).collect();
    fn go(
        m: &Structure,
        sorts: &[&[usize]],
        k: usize,
        images: &mut Vec<usize>,
        out: &mut Vec<Perm>,
    ) {
        if k == sorts.len() {
            let p = Perm::from_images(images.clone()).unwrap();
            if is_automorphism(m, &p) {
                out.push(p);
            }
            return;
        }
        let s = sorts[k];
        let mut order: Vec<usize> = s.to_vec();
        permute(&mut order, 0, &mut |perm| {
            for (&x, &y) in s.iter().zip(perm) {
                images[x] = y;
            }
            go(m, sorts, k + 1, images, out);
        });
    }
    fn permute(v: &mut Vec<usize>, k: usize, f: &mut dyn FnMut(&[usize])) {
        if k == v.len() {
            f(v);
            return;
        }
        for i in k..v.len() {
            v.swap(k, i);
            permute(v, k + 1, f);
            v.swap(k, i);
        }
    }
    go(m, &sorts, 0, &mut images, &mut out);
    out.sort();
    Ok(out)
}

pub fn aut_fixing(m: &Structure, a: &ParameterSet) -> Result<PermGroup> {
    automorphism_group(m).fixing(a)
}

pub fn dcl(m: &Structure, a: &ParameterSet) -> Result<BTreeSet<usize>> {
    automorphism_group(m).dcl(a)
}

pub fn acl(m: &Structure, a: &ParameterSet) -> Result<BTreeSet<usize>> {
    automorphism_group(m).acl(a)
}

pub fn same_orbit(m: &Structure, a: &[usize], b: &[usize]) -> Result<bool> {
    automorphism_group(m).same_orbit(a, b)
}
