//! Bounded-arity imaginary sorts, canonical parameters, and realization of
//! subgroups of `Aut(M)` as stabilizers of imaginary elements.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::autcomp::{fixed_points, AutResult, ImaginaryElement, ParameterSet};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::fostruct::{DefinableSet, Provenance, SortId};
use crate::permgrp::{Perm, PermGroup};

/// One quotient `D/E`: a set of tuples partitioned into classes.
#[derive(Clone, Debug)]
pub struct Component {
    pub signature: Vec<SortId>,
    /// Each class as a sorted list of tuples; the first tuple is the representative.
    classes: Vec<Vec<Vec<usize>>>,
}

/// A sort of `M^eq`: a disjoint union of quotients `D_i/E_i`, with classes
/// numbered consecutively across components.
#[derive(Clone, Debug)]
pub struct ImaginarySort {
    name: String,
    degree: usize,
    components: Vec<Component>,
    offsets: Vec<usize>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl ImaginarySort {
    fn from_components(name: &str, degree: usize, components: Vec<Component>) -> ImaginarySort {
        let mut offsets = Vec::new();
        let mut index = Vec::new();
        let mut next = 0;
        for c in &components {
            offsets.push(next);
            let mut map = HashMap::new();
            for (k, class) in c.classes.iter().enumerate() {
                for t in class {
                    map.insert(t.clone(), next + k);
                }
            }
            index.push(map);
            next += c.classes.len();
        }
        ImaginarySort {
            name: name.to_string(),
            degree,
            components,
            offsets,
            index,
        }
    }

    /// Disjoint union of sorts over the same structure.
    pub fn union(name: &str, sorts: &[ImaginarySort]) -> Result<ImaginarySort> {
        let degree = sorts.first().map(|s| s.degree).unwrap_or(0);
        if let Some(s) = sorts.iter().find(|s| s.degree != degree) {
            return Err(Error::DegreeMismatch {
                expected: degree,
                found: s.degree,
            });
        }
        let components = sorts
            .iter()
            .flat_map(|s| s.components.iter().cloned())
            .collect();
        Ok(ImaginarySort::from_components(name, degree, components))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Size of the underlying universe.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn num_classes(&self) -> usize {
        self.offsets
            .last()
            .map_or(0, |o| o + self.components.last().unwrap().classes.len())
    }

    pub fn component_of(&self, class: usize) -> usize {
        self.offsets.partition_point(|&o| o <= class) - 1
    }

    pub fn class_tuples(&self, class: usize) -> &[Vec<usize>] {
        let c = self.component_of(class);
        &self.components[c].classes[class - self.offsets[c]]
    }

    pub fn representative(&self, class: usize) -> &[usize] {
        &self.class_tuples(class)[0]
    }

    pub fn class_of(&self, component: usize, tuple: &[usize]) -> Option<usize> {
        self.index.get(component)?.get(tuple).copied()
    }

    /// The permutation of classes induced by a permutation of the universe.
    pub fn act(&self, g: &Perm) -> Result<Perm> {
        let images = (0..self.num_classes())
            .map(|k| {
                let c = self.component_of(k);
                let image = g.apply_tuple(self.representative(k));
                self.class_of(c, &image).ok_or_else(|| {
                    Error::NotInvariant(format!(
                        "sort `{}` is not closed under the permutation",
                        self.name
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Perm::from_images(images).map_err(|_| {
            Error::NotInvariant(format!(
                "the permutation does not act on the classes of `{}`",
                self.name
            ))
        })
    }

    /// The base set `D` of a component.
    pub fn base(&self, component: usize) -> DefinableSet {
        let c = &self.components[component];
        DefinableSet {
            signature: c.signature.clone(),
            tuples: c.classes.iter().flatten().cloned().collect(),
            provenance: Provenance::OrbitUnion,
        }
    }

    /// The equivalence `E` of a component, materialized as pairs concatenated
    /// into tuples of twice the arity.
    pub fn equivalence(&self, component: usize) -> DefinableSet {
        let c = &self.components[component];
        let mut tuples = BTreeSet::new();
        for class in &c.classes {
            for x in class {
                for y in class {
                    tuples.insert(x.iter().chain(y).copied().collect());
                }
            }
        }
        DefinableSet {
            signature: c.signature.iter().chain(&c.signature).copied().collect(),
            tuples,
            provenance: Provenance::OrbitUnion,
        }
    }

    pub fn element(self: &Arc<Self>, class: usize) -> ImaginaryElement {
        ImaginaryElement {
            sort: self.clone(),
            class,
        }
    }
}

fn check_invariant(group: &PermGroup, set: &BTreeSet<Vec<usize>>, what: &str) -> Result<()> {
    for g in group.generators() {
        for t in set {
            if !set.contains(&g.apply_tuple(t)) {
                return Err(Error::NotInvariant(format!(
                    "{what} is not invariant under Aut(M): {t:?} leaves it"
                )));
            }
        }
    }
    Ok(())
}

/// The sort `D/E`. `E` is given as tuples `x̄ȳ` of twice the arity of `D`.
pub fn quotient_sort(
    aut: &AutResult,
    d: &DefinableSet,
    e: &DefinableSet,
    limits: &Limits,
) -> Result<ImaginarySort> {
    let k = d.arity();
    if k > limits.kmax {
        return Err(Error::ArityTooLarge {
            arity: k,
            kmax: limits.kmax,
        });
    }
    if e.arity() != 2 * k {
        return Err(Error::NotAnEquivalence(format!(
            "E has arity {}, expected {}",
            e.arity(),
            2 * k
        )));
    }
    let mut related: HashMap<&[usize], BTreeSet<&[usize]>> = HashMap::new();
    for t in &e.tuples {
        let (x, y) = t.split_at(k);
        if !d.contains(x) || !d.contains(y) {
            return Err(Error::NotAnEquivalence(format!(
                "E relates {x:?} and {y:?} outside D"
            )));
        }
        related.entry(x).or_default().insert(y);
    }
    let empty = BTreeSet::new();
    for x in &d.tuples {
        let xs = related.get(x.as_slice()).unwrap_or(&empty);
        if !xs.contains(x.as_slice()) {
            return Err(Error::NotAnEquivalence(format!(
                "E is not reflexive at {x:?}"
            )));
        }
        for y in xs {
            let ys = related.get(y).unwrap_or(&empty);
            if !ys.contains(x.as_slice()) {
                return Err(Error::NotAnEquivalence(format!(
                    "E is not symmetric at {x:?}, {y:?}"
                )));
            }
            if ys != xs {
                return Err(Error::NotAnEquivalence(format!(
                    "E is not transitive through {y:?}"
                )));
            }
        }
    }
    check_invariant(aut.group(), &d.tuples, "D")?;
    check_invariant(aut.group(), &e.tuples, "E")?;
    let mut seen: BTreeSet<&[usize]> = BTreeSet::new();
    let mut classes = Vec::new();
    for x in &d.tuples {
        if seen.contains(x.as_slice()) {
            continue;
        }
        let class: Vec<Vec<usize>> = related[x.as_slice()].iter().map(|y| y.to_vec()).collect();
        seen.extend(related[x.as_slice()].iter().copied());
        classes.push(class);
    }
    let name = format!("{}/E", aut.structure().name());
    Ok(ImaginarySort::from_components(
        &name,
        aut.structure().size(),
        vec![Component {
            signature: d.signature.clone(),
            classes,
        }],
    ))
}

/// The sort `Aut(M)·ē / ~K` where `ē` enumerates the universe and
/// `σ(ē) ~K τ(ē)` iff `τ ∈ σK`. Classes are the left cosets of `K`; the class
/// of `ē` itself is returned alongside the sort.
pub fn coset_sort(
    aut: &AutResult,
    k: &PermGroup,
    limits: &Limits,
) -> Result<(ImaginarySort, usize)> {
    if !k.is_subgroup_of(aut.group()) {
        return Err(Error::NotASubgroup("K is not contained in Aut(M)".into()));
    }
    let elements = aut.group().elements(limits.max_group_order)?;
    let k_elements = k.elements(limits.max_group_order)?;
    let index: HashMap<&Perm, usize> = elements.iter().enumerate().map(|(i, e)| (e, i)).collect();
    let mut done = vec![false; elements.len()];
    let mut classes = Vec::new();
    let mut identity_class = 0;
    for s in &elements {
        if done[index[s]] {
            continue;
        }
        let mut class: Vec<Vec<usize>> = Vec::with_capacity(k_elements.len());
        for h in &k_elements {
            let sh = s.compose(h);
            if sh.is_identity() {
                identity_class = classes.len();
            }
            done[index[&sh]] = true;
            class.push(sh.images().collect());
        }
        class.sort();
        classes.push(class);
    }
    let m = aut.structure();
    let signature = (0..m.size()).map(|x| m.sort_of(x)).collect();
    let sort = ImaginarySort::from_components(
        &format!("{}/cosets", m.name()),
        m.size(),
        vec![Component { signature, classes }],
    );
    Ok((sort, identity_class))
}

/// `{σ ∈ Aut(M) : σ(R) = R}` together with the orbit of `R`.
#[derive(Clone, Debug)]
pub struct CanonicalParameter {
    pub relation: BTreeSet<Vec<usize>>,
    pub stabilizer: PermGroup,
    pub orbit: Vec<BTreeSet<Vec<usize>>>,
}

impl CanonicalParameter {
    pub fn is_fixed_by(&self, g: &Perm) -> bool {
        self.stabilizer.contains(g)
    }

    /// Interdefinable parameters are fixed by the same automorphisms.
    pub fn interdefinable(&self, other: &CanonicalParameter) -> bool {
        self.stabilizer.same_group(&other.stabilizer)
    }

    pub fn is_zero_definable(&self) -> bool {
        self.orbit.len() == 1
    }
}

fn apply_to_relation(g: &Perm, r: &BTreeSet<Vec<usize>>) -> BTreeSet<Vec<usize>> {
    r.iter().map(|t| g.apply_tuple(t)).collect()
}

pub fn canonical_parameter(
    aut: &AutResult,
    r: &BTreeSet<Vec<usize>>,
    limits: &Limits,
) -> Result<CanonicalParameter> {
    let arity = r.iter().next().map_or(0, |t| t.len());
    if arity > limits.kmax {
        return Err(Error::ArityTooLarge {
            arity,
            kmax: limits.kmax,
        });
    }
    let n = aut.structure().size();
    if let Some(t) = r
        .iter()
        .find(|t| t.len() != arity || t.iter().any(|&x| x >= n))
    {
        return Err(Error::UnknownElement(format!("tuple {t:?}")));
    }
    // The orbit of R under Aut(M), as extra points.
    let gens = aut.group().generators();
    let mut orbit = vec![r.clone()];
    let mut index: HashMap<BTreeSet<Vec<usize>>, usize> = HashMap::from([(r.clone(), 0)]);
    let mut i = 0;
    while i < orbit.len() {
        for g in gens {
            let image = apply_to_relation(g, &orbit[i]);
            if !index.contains_key(&image) {
                index.insert(image.clone(), orbit.len());
                orbit.push(image);
            }
        }
        i += 1;
    }
    let mut ext = Vec::new();
    for g in gens {
        let on_orbit: Vec<usize> = orbit
            .iter()
            .map(|s| index[&apply_to_relation(g, s)])
            .collect();
        ext.push(g.direct_sum(&Perm::from_images(on_orbit)?));
    }
    let extended = PermGroup::from_generators(n + orbit.len(), ext)?;
    let stab = extended.pointwise_stabilizer(&[n])?;
    let domain: Vec<usize> = (0..n).collect();
    let stabilizer = PermGroup::from_generators(
        n,
        stab.generators()
            .iter()
            .map(|p| p.restrict(&domain))
            .collect::<Result<Vec<_>>>()?,
    )?;
    Ok(CanonicalParameter {
        relation: r.clone(),
        stabilizer,
        orbit,
    })
}

/// A single imaginary element `a` with `Aut(M/a) = H`: the class of the
/// enumeration tuple in the coset sort of `H`.
pub fn realize_stabilizer(aut: &AutResult, h: &PermGroup, limits: &Limits) -> Result<ParameterSet> {
    let (sort, class) = coset_sort(aut, h, limits)?;
    Ok(ParameterSet::imaginary(Arc::new(sort).element(class)))
}

/// Whether `dcl(A)` is 0-definable: the closure of `A` in the universe, in the
/// sorts of `A`, and in the coset sort of `Aut(M/A)`, must each be
/// `Aut(M)`-invariant as a set.
pub fn is_zero_definable(aut: &AutResult, a: &ParameterSet, limits: &Limits) -> Result<bool> {
    let k = aut.fixing(a)?;
    let g = aut.group();
    let real = fixed_points(&k);
    let invariant_points =
        |perm_on: &dyn Fn(&Perm) -> Result<Perm>, points: &BTreeSet<usize>| -> Result<bool> {
            for s in g.generators() {
                let p = perm_on(s)?;
                if points.iter().any(|&x| !points.contains(&p.apply(x))) {
                    return Ok(false);
                }
            }
            Ok(true)
        };
    if !invariant_points(&|s| Ok(s.clone()), &real)? {
        return Ok(false);
    }
    let (cosets, _) = coset_sort(aut, &k, limits)?;
    let mut sorts: Vec<ImaginarySort> = vec![cosets];
    for e in &a.imaginary {
        sorts.push((*e.sort).clone());
    }
    for sort in &sorts {
        let on_classes = |s: &Perm| sort.act(s);
        let fixed: BTreeSet<usize> = {
            let acts = k
                .generators()
                .iter()
                .map(on_classes)
                .collect::<Result<Vec<_>>>()?;
            (0..sort.num_classes())
                .filter(|&c| acts.iter().all(|p| p.fixes(c)))
                .collect()
        };
        if !invariant_points(&on_classes, &fixed)? {
            return Ok(false);
        }
    }
    Ok(true)
}
