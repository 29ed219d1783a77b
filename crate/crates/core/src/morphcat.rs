//! Interpretations between finite structures: pre-morphisms into `M^eq`,
//! embeddings, surjections, isomorphisms, the structure of a group, and the
//! exact sequence of a 0-definable substructure.

use std::collections::{BTreeSet, HashMap};
use std::sync::Arc;

use crate::autcomp::{automorphism_group, fixing_subgroup, AutResult, ParameterSet};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::fostruct::{Structure, StructureBuilder};
use crate::imaginaries::{coset_sort, ImaginarySort};
use crate::permgrp::{GroupHom, Perm, PermGroup};

/// Where the image of an interpretation lives.
#[derive(Clone, Debug)]
pub enum Carrier {
    /// A 0-definable set of real elements, in carrier order.
    Real(Vec<usize>),
    /// All classes of an imaginary sort.
    Imaginary(Arc<ImaginarySort>),
}

impl Carrier {
    pub fn len(&self) -> usize {
        match self {
            Carrier::Real(points) => points.len(),
            Carrier::Imaginary(sort) => sort.num_classes(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The permutation of carrier positions induced by `g`.
    pub fn act(&self, g: &Perm) -> Result<Perm> {
        match self {
            Carrier::Real(points) => g.restrict(points),
            Carrier::Imaginary(sort) => sort.act(g),
        }
    }

    /// Every carrier point as a parameter.
    pub fn parameters(&self) -> ParameterSet {
        match self {
            Carrier::Real(points) => ParameterSet::real(points.iter().copied()),
            Carrier::Imaginary(sort) => ParameterSet {
                real: BTreeSet::new(),
                imaginary: (0..sort.num_classes()).map(|c| sort.element(c)).collect(),
            },
        }
    }
}

/// An injective map from the universe of `N` onto a carrier in `M^eq`.
#[derive(Clone, Debug)]
pub struct Premorphism {
    source: Arc<AutResult>,
    target: Arc<AutResult>,
    carrier: Carrier,
    map: Vec<usize>,
}

impl Premorphism {
    /// `map[i]` is the carrier position of source element `i`. The map must be
    /// a bijection onto the carrier.
    pub fn new(
        source: Arc<AutResult>,
        target: Arc<AutResult>,
        carrier: Carrier,
        map: Vec<usize>,
    ) -> Result<Premorphism> {
        let n = source.structure().size();
        if map.len() != n {
            return Err(Error::NotAnInterpretation(format!(
                "map has {} entries for {} source elements",
                map.len(),
                n
            )));
        }
        if carrier.len() != n {
            return Err(Error::NotAnInterpretation(format!(
                "carrier has {} points but the source has {n} elements",
                carrier.len()
            )));
        }
        if let Carrier::Real(points) = &carrier {
            if let Some(&p) = points.iter().find(|&&p| p >= target.structure().size()) {
                return Err(Error::UnknownElement(format!("#{p}")));
            }
        }
        let mut seen = vec![false; n];
        for &c in &map {
            if c >= n || std::mem::replace(&mut seen[c], true) {
                return Err(Error::NotAnInterpretation(
                    "map is not injective onto the carrier".into(),
                ));
            }
        }
        Ok(Premorphism {
            source,
            target,
            carrier,
            map,
        })
    }

    /// A map onto a set of real elements: `images[i]` is the target element of
    /// source element `i`.
    pub fn real(
        source: Arc<AutResult>,
        target: Arc<AutResult>,
        images: Vec<usize>,
    ) -> Result<Premorphism> {
        let n = images.len();
        Premorphism::new(source, target, Carrier::Real(images), (0..n).collect())
    }

    pub fn identity(m: Arc<AutResult>) -> Premorphism {
        let n = m.structure().size();
        Premorphism::real(m.clone(), m, (0..n).collect()).unwrap()
    }

    pub fn source(&self) -> &AutResult {
        &self.source
    }

    pub fn target(&self) -> &AutResult {
        &self.target
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Images of the basic relations of `N` as sets of carrier-position
    /// tuples. Sorts and constants count as unary relations.
    pub fn relation_images(&self) -> Vec<BTreeSet<Vec<usize>>> {
        let n = self.source.structure();
        let mut out = Vec::new();
        for s in n.sorts() {
            out.push(s.elements.iter().map(|&x| vec![self.map[x]]).collect());
        }
        for r in n.relations() {
            out.push(
                r.tuples
                    .iter()
                    .map(|t| t.iter().map(|&x| self.map[x]).collect())
                    .collect(),
            );
        }
        for c in n.constants() {
            out.push(BTreeSet::from([vec![self.map[c.element]]]));
        }
        out
    }

    /// Generators of `Aut(M)` acting on carrier positions.
    pub fn carrier_action(&self) -> Result<Vec<Perm>> {
        self.target
            .group()
            .generators()
            .iter()
            .map(|g| self.carrier.act(g))
            .collect()
    }

    /// Verifies that the carrier is `Aut(M)`-invariant and that the image of
    /// every basic relation is `Aut(M)`-invariant.
    pub fn check(&self) -> Result<()> {
        let action = self.carrier_action().map_err(|e| {
            Error::NotAnInterpretation(format!("the carrier is not a 0-definable sort: {e}"))
        })?;
        let names = self.source.structure();
        let labels: Vec<String> = names
            .sorts()
            .iter()
            .map(|s| format!("sort {}", s.name))
            .chain(
                names
                    .relations()
                    .iter()
                    .map(|r| format!("relation {}", r.name)),
            )
            .chain(
                names
                    .constants()
                    .iter()
                    .map(|c| format!("constant {}", c.name)),
            )
            .collect();
        for (image, label) in self.relation_images().iter().zip(labels) {
            for p in &action {
                if image.iter().any(|t| !image.contains(&p.apply_tuple(t))) {
                    return Err(Error::NotAnInterpretation(format!(
                        "the image of {label} is not invariant in the target"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Carrier permutation `p` pulled back to a permutation of `N`.
    fn pull_back(&self, p: &Perm) -> Perm {
        let mut inverse = vec![0; self.map.len()];
        for (i, &c) in self.map.iter().enumerate() {
            inverse[c] = i;
        }
        Perm::from_images(self.map.iter().map(|&c| inverse[p.apply(c)]).collect()).unwrap()
    }

    /// The image of `Aut(M)` acting on `N` through the map.
    pub fn induced_group(&self) -> Result<PermGroup> {
        let gens = self
            .carrier_action()?
            .iter()
            .map(|p| self.pull_back(p))
            .collect();
        PermGroup::from_generators(self.map.len(), gens)
    }

    /// The restriction homomorphism `Aut(M) → Aut(N)`.
    pub fn restriction(&self, limits: &Limits) -> Result<GroupHom> {
        let images = self
            .carrier_action()?
            .iter()
            .map(|p| self.pull_back(p))
            .collect();
        GroupHom::new(
            self.target.group().clone(),
            self.source.group().clone(),
            images,
            limits.max_group_order,
        )
    }

    /// No proper expansion of the image is definable: the group induced on
    /// the carrier is all of `Aut(N)`.
    pub fn is_embedding(&self) -> Result<bool> {
        Ok(self.induced_group()?.same_group(self.source.group()))
    }

    /// The carrier generates everything: `Aut(M)` fixing each carrier point is trivial.
    pub fn is_surjection(&self) -> Result<bool> {
        Ok(fixing_subgroup(self.target.group(), &self.carrier.parameters())?.is_trivial())
    }

    /// `self ∘ inner` for a real-carrier `self`.
    pub fn compose(&self, inner: &Premorphism) -> Result<Premorphism> {
        let Carrier::Real(outer_points) = &self.carrier else {
            return Err(Error::Precondition(
                "composition needs a real outer carrier".into(),
            ));
        };
        let Carrier::Real(inner_points) = &inner.carrier else {
            return Err(Error::Precondition(
                "composition needs a real inner carrier".into(),
            ));
        };
        if !Arc::ptr_eq(&inner.target, &self.source) {
            return Err(Error::Precondition(
                "the premorphisms are not composable".into(),
            ));
        }
        let images = (0..inner.map.len())
            .map(|x| {
                let y = inner_points[inner.map[x]];
                outer_points[self.map[y]]
            })
            .collect();
        Premorphism::real(inner.source.clone(), self.target.clone(), images)
    }
}

/// The interpretation of `S` in `T^eq` determined by a homomorphism
/// `ψ: Aut(S) → Aut(T)`. For each `Aut(S)`-orbit with representative `s`, the
/// orbit is carried by the cosets of `ψ(Stab(s))`, and `ρ(s) ↦ ψ(ρ)·ψ(Stab(s))`.
pub fn interpret_via_groups(
    source: Arc<AutResult>,
    target: Arc<AutResult>,
    psi: &GroupHom,
    limits: &Limits,
) -> Result<Premorphism> {
    let g = source.group();
    let mut sorts = Vec::new();
    let mut reps = Vec::new();
    let mut orbit_of = vec![0; source.structure().size()];
    for (j, orbit) in g.orbits().into_iter().enumerate() {
        let rep = orbit[0];
        let stab = g.pointwise_stabilizer(&[rep])?;
        let images = stab
            .generators()
            .iter()
            .map(|s| {
                psi.apply(s)
                    .cloned()
                    .ok_or_else(|| Error::NotAHomomorphism("ψ is not defined on Aut(S)".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        let k = PermGroup::from_generators(target.structure().size(), images)?;
        sorts.push(coset_sort(&target, &k, limits)?.0);
        reps.push(rep);
        for &x in &orbit {
            orbit_of[x] = j;
        }
    }
    let name = format!(
        "{}/{}",
        target.structure().name(),
        source.structure().name()
    );
    let sort = Arc::new(ImaginarySort::union(&name, &sorts)?);
    let mut map = Vec::new();
    for (x, &j) in orbit_of.iter().enumerate() {
        let rho = g
            .transporter(&[reps[j]], &[x])?
            .expect("x lies in the orbit of its representative");
        let tau = psi.apply(&rho).expect("ψ is defined on Aut(S)");
        let tuple: Vec<usize> = tau.images().collect();
        map.push(sort.class_of(j, &tuple).expect("ψ(ρ) lies in Aut(T)"));
    }
    Premorphism::new(source, target, Carrier::Imaginary(sort), map)
}

/// The inverse `h: M → N` of an isomorphism `g: N → M`, checked to be an
/// interpretation whose restriction is the inverse of `ĝ`.
pub fn invert_isomorphism(g: &Premorphism, limits: &Limits) -> Result<Premorphism> {
    g.check()?;
    if !g.is_embedding()? || !g.is_surjection()? {
        return Err(Error::Precondition(
            "the premorphism is not an isomorphism".into(),
        ));
    }
    let m = g.target.clone();
    let n = g.source.clone();
    let ghat = g.restriction(limits)?;
    let h = match &g.carrier {
        Carrier::Real(points) if points.len() == m.structure().size() => {
            let mut images = vec![0; points.len()];
            for (x, &c) in g.map.iter().enumerate() {
                images[points[c]] = x;
            }
            Premorphism::real(m.clone(), n.clone(), images)?
        }
        _ => interpret_via_groups(m.clone(), n.clone(), &ghat, limits)?,
    };
    h.check()?;
    // The graph of h is invariant under σ acting on M jointly with ĝ(σ) on N^eq.
    let action = h.carrier_action_of(&ghat)?;
    for (sigma, on_carrier) in m.group().generators().iter().zip(action) {
        if h.pull_back(&on_carrier) != *sigma {
            return Err(Error::NotAnInterpretation(
                "the inverse map is not equivariant".into(),
            ));
        }
    }
    Ok(h)
}

impl Premorphism {
    /// The action of `ψ(σ)` on this carrier, for each generator `σ` of `ψ`'s source.
    fn carrier_action_of(&self, psi: &GroupHom) -> Result<Vec<Perm>> {
        psi.generator_images()
            .iter()
            .map(|t| self.carrier.act(t))
            .collect()
    }
}

/// Result of a bounded equivalence search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Equivalence {
    Equivalent,
    Inequivalent,
    /// A carrier exceeds the configured search cap.
    Undecided,
}

/// Searches for an `Aut(M)`-equivariant bijection between the carriers that
/// carries the image of each basic relation under `g1` to its image under `g2`.
pub fn equivalent_premorphisms(
    g1: &Premorphism,
    g2: &Premorphism,
    limits: &Limits,
) -> Result<Equivalence> {
    if g1.source.structure() != g2.source.structure()
        || g1.target.structure() != g2.target.structure()
    {
        return Err(Error::Precondition(
            "premorphisms have different source or target".into(),
        ));
    }
    let n = g1.carrier.len();
    if n > limits.max_equivalence_carrier || g2.carrier.len() > limits.max_equivalence_carrier {
        return Ok(Equivalence::Undecided);
    }
    let a = g1.carrier_action()?;
    let b = g2.carrier_action()?;
    let r1 = g1.relation_images();
    let r2: Vec<BTreeSet<Vec<usize>>> = g2.relation_images();
    let mut f: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    let found = extend_equivariant(&a, &b, &mut f, &mut used, &mut |f| {
        r1.iter().zip(&r2).all(|(x, y)| {
            x.iter()
                .all(|t| y.contains(&t.iter().map(|&c| f[c]).collect::<Vec<_>>()))
        })
    });
    Ok(if found {
        Equivalence::Equivalent
    } else {
        Equivalence::Inequivalent
    })
}

/// Depth-first search over equivariant injections: fixing the image of the
/// least unassigned point determines the map on its whole orbit.
fn extend_equivariant(
    a: &[Perm],
    b: &[Perm],
    f: &mut Vec<Option<usize>>,
    used: &mut Vec<bool>,
    accept: &mut dyn FnMut(&[usize]) -> bool,
) -> bool {
    let Some(x) = f.iter().position(Option::is_none) else {
        let total: Vec<usize> = f.iter().map(|v| v.unwrap()).collect();
        return accept(&total);
    };
    for y in 0..f.len() {
        if used[y] {
            continue;
        }
        let saved_f = f.clone();
        let saved_used = used.clone();
        f[x] = Some(y);
        used[y] = true;
        let mut stack = vec![x];
        let mut ok = true;
        'spread: while let Some(p) = stack.pop() {
            let q = f[p].unwrap();
            for (ga, gb) in a.iter().zip(b) {
                let (p2, q2) = (ga.apply(p), gb.apply(q));
                match f[p2] {
                    Some(v) if v != q2 => {
                        ok = false;
                        break 'spread;
                    }
                    Some(_) => {}
                    None if used[q2] => {
                        ok = false;
                        break 'spread;
                    }
                    None => {
                        f[p2] = Some(q2);
                        used[q2] = true;
                        stack.push(p2);
                    }
                }
            }
        }
        if ok && extend_equivariant(a, b, f, used, accept) {
            return true;
        }
        *f = saved_f;
        *used = saved_used;
    }
    false
}

/// The structure `(G, R_d)_{d ∈ G}` with `R_d = {(x, x∘d)}`, whose
/// automorphisms are exactly the left translations.
#[derive(Clone, Debug)]
pub struct RegularStructure {
    pub structure: Structure,
    /// `elements[i]` is the group element named `g{i}`; `g0` is the identity.
    pub elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
}

impl RegularStructure {
    /// Left translation by `g` as a permutation of the universe.
    pub fn translation(&self, g: &Perm) -> Perm {
        Perm::from_images(
            self.elements
                .iter()
                .map(|x| self.index[&g.compose(x)])
                .collect(),
        )
        .unwrap()
    }

    /// `G → Aut(structure)`, `g ↦ λ_g`.
    pub fn translation_hom(
        &self,
        group: &PermGroup,
        aut: &AutResult,
        limits: &Limits,
    ) -> Result<GroupHom> {
        GroupHom::from_fn(
            group.clone(),
            aut.group().clone(),
            limits.max_group_order,
            |g| Ok(self.translation(g)),
        )
    }
}

pub fn group_to_structure(g: &PermGroup, limits: &Limits) -> Result<RegularStructure> {
    let mut elements = g.elements(limits.max_group_order)?;
    elements.sort();
    let id = Perm::identity(g.degree());
    let pos = elements.iter().position(|e| *e == id).unwrap();
    elements.swap(0, pos);
    elements[1..].sort();
    let index: HashMap<Perm, usize> = elements
        .iter()
        .enumerate()
        .map(|(i, e)| (e.clone(), i))
        .collect();
    let names: Vec<String> = (0..elements.len()).map(|i| format!("g{i}")).collect();
    let mut b = StructureBuilder::new("G");
    b.sort("G", names.iter().map(String::as_str))?;
    for (k, d) in elements.iter().enumerate() {
        let tuples: Vec<Vec<usize>> = elements
            .iter()
            .enumerate()
            .map(|(i, x)| vec![i, index[&x.compose(d)]])
            .collect();
        b.relation_by_index(&format!("R{k}"), &["G", "G"], tuples, false)?;
    }
    Ok(RegularStructure {
        structure: b.build()?,
        elements,
        index,
    })
}

/// `1 → Aut(M/N) → Aut(M) → Aut(N) → 1` for the substructure on some sorts.
#[derive(Clone, Debug)]
pub struct ExactSequence {
    pub total: Arc<AutResult>,
    pub base: Arc<AutResult>,
    /// `embedding[i]` is the element of `M` carrying element `i` of `N`.
    pub embedding: Vec<usize>,
    pub kernel: PermGroup,
    pub restriction: GroupHom,
}

impl ExactSequence {
    pub fn premorphism(&self) -> Premorphism {
        Premorphism::real(
            self.base.clone(),
            self.total.clone(),
            self.embedding.clone(),
        )
        .unwrap()
    }
}

pub fn exact_sequence(
    total: Arc<AutResult>,
    sub_sorts: &[&str],
    limits: &Limits,
) -> Result<ExactSequence> {
    let name = format!("{}|{}", total.structure().name(), sub_sorts.join(","));
    let (base, embedding) = total.structure().induced(&name, sub_sorts)?;
    let base = Arc::new(automorphism_group(&base));
    let g = Premorphism::real(base.clone(), total.clone(), embedding.clone())?;
    g.check()?;
    let restriction = g.restriction(limits)?;
    if !restriction.is_surjective() {
        return Err(Error::NotAnEmbedding(format!(
            "restriction image has order {} but Aut(N) has order {}",
            restriction.image().order(),
            base.group().order()
        )));
    }
    let kernel = total.group().pointwise_stabilizer(&embedding)?;
    if !kernel.same_group(&restriction.kernel()) || !kernel.is_normal_in(total.group()) {
        return Err(Error::NotAHomomorphism(
            "kernel of restriction disagrees with Aut(M/N)".into(),
        ));
    }
    Ok(ExactSequence {
        total,
        base,
        embedding,
        kernel,
        restriction,
    })
}
