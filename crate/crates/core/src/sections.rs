//! Splittings of the restriction map `Aut(M) → Aut(N)` and the imaginary
//! parameter sets that correspond to them.

use std::collections::HashSet;

use crate::autcomp::{fixed_points, ParameterSet};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::imaginaries::realize_stabilizer;
use crate::morphcat::ExactSequence;
use crate::permgrp::{GroupHom, Perm, PermGroup};

/// A homomorphism `ĝ: Aut(N) → Aut(M)` with `ĥ ∘ ĝ = id`.
#[derive(Clone, Debug)]
pub struct Section {
    pub ghat: GroupHom,
}

impl Section {
    /// `ĝ(Aut(N))` as a subgroup of `Aut(M)`.
    pub fn image(&self) -> PermGroup {
        self.ghat.image()
    }

    pub fn lift(&self, rho: &Perm) -> Option<&Perm> {
        self.ghat.apply(rho)
    }

    /// Same images on every element of `Aut(N)`.
    pub fn same_as(&self, other: &Section) -> bool {
        self.ghat.table() == other.ghat.table()
    }
}

fn fibers(seq: &ExactSequence, q: &Perm) -> Vec<Perm> {
    let mut out: Vec<Perm> = seq
        .restriction
        .table()
        .into_iter()
        .filter(|(_, image)| image == q)
        .map(|(sigma, _)| sigma)
        .collect();
    out.sort();
    out
}

fn order_of(p: &Perm) -> usize {
    let mut k = 1;
    let mut x = p.clone();
    while !x.is_identity() {
        x = x.compose(p);
        k += 1;
    }
    k
}

/// Checks `ĥ ∘ ĝ = id` on every element of `Aut(N)` and injectivity.
fn splits(seq: &ExactSequence, ghat: &GroupHom) -> bool {
    ghat.table()
        .iter()
        .all(|(rho, sigma)| seq.restriction.apply(sigma) == Some(rho))
        && ghat.is_injective()
}

/// Every section, by exhaustive search over lifts of the generators of
/// `Aut(N)`. An empty result certifies that the sequence does not split.
pub fn find_sections(seq: &ExactSequence, limits: &Limits) -> Result<Vec<Section>> {
    let quotient = seq.base.group().clone();
    let order = quotient.order();
    if order > limits.max_group_order as u128 {
        return Err(Error::BoundExceeded {
            order,
            bound: limits.max_group_order,
        });
    }
    let gens = quotient.generators().to_vec();
    let choices: Vec<Vec<Perm>> = gens
        .iter()
        .map(|q| {
            let k = order_of(q);
            fibers(seq, q)
                .into_iter()
                .filter(|s| order_of(s) == k)
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut pick = Vec::with_capacity(gens.len());
    fn go(
        seq: &ExactSequence,
        quotient: &PermGroup,
        choices: &[Vec<Perm>],
        pick: &mut Vec<Perm>,
        out: &mut Vec<Section>,
        limits: &Limits,
    ) {
        if pick.len() == choices.len() {
            if let Ok(ghat) = GroupHom::new(
                quotient.clone(),
                seq.total.group().clone(),
                pick.clone(),
                limits.max_group_order,
            ) {
                if splits(seq, &ghat) {
                    out.push(Section { ghat });
                }
            }
            return;
        }
        for s in &choices[pick.len()] {
            pick.push(s.clone());
            go(seq, quotient, choices, pick, out, limits);
            pick.pop();
        }
    }
    go(seq, &quotient, &choices, &mut pick, &mut out, limits);
    Ok(out)
}

/// Outcome of checking a parameter set against a sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    /// `M ⊆ dcl(N ∪ A)`: nothing but the identity fixes `N` and `A`.
    pub generates_total: bool,
    /// `dcl(A) ∩ N^eq = dcl_N(∅)` for imaginaries of `N` up to arity `kmax`.
    pub base_closure_trivial: bool,
    /// Imaginaries of `M` up to arity `kmax` fixed by `Aut(M/A)` are fixed by
    /// a strictly larger group, so `kmax` is too small to see all of `dcl(A)`.
    pub kmax_binds: bool,
}

impl Verification {
    pub fn holds(&self) -> bool {
        self.generates_total && self.base_closure_trivial
    }
}

/// A parameter set whose fixing group is the image of a section.
#[derive(Clone, Debug)]
pub struct SectionImaginary {
    pub parameters: ParameterSet,
    pub stabilizer: PermGroup,
    pub verification: Verification,
}

pub fn section_imaginary(
    seq: &ExactSequence,
    s: &Section,
    limits: &Limits,
) -> Result<SectionImaginary> {
    let h = s.image();
    let mut parameters = realize_stabilizer(&seq.total, &h, limits)?;
    parameters.real = fixed_points(&h);
    let stabilizer = seq.total.fixing(&parameters)?;
    let verification = verify_section_imaginary(seq, &parameters, limits)?;
    Ok(SectionImaginary {
        parameters,
        stabilizer,
        verification,
    })
}

fn subsets(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) {
    fn go(
        n: usize,
        k: usize,
        start: usize,
        cur: &mut Vec<usize>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for x in start..n {
            cur.push(x);
            if !go(n, k, x + 1, cur, f) {
                return false;
            }
            cur.pop();
        }
        true
    }
    go(n, k, 0, &mut Vec::new(), f);
}

/// The subgroup `L ≥ K` fixing every imaginary of arity at most `kmax` that
/// `K` fixes: a class over a tuple `ā` is fixed by `K` iff its stabilizer
/// contains `⟨K, Stab(ā)⟩`, so `L = ⋂ ⟨K, Stab(S)⟩` over sets `|S| = kmax`.
fn bounded_closure_group(
    g: &PermGroup,
    k: &PermGroup,
    kmax: usize,
    limits: &Limits,
) -> Result<PermGroup> {
    let elements = g.elements(limits.max_group_order)?;
    let mut current: HashSet<Perm> = elements.into_iter().collect();
    let target = k.order() as usize;
    let size = kmax.min(g.degree());
    let mut failure = None;
    subsets(g.degree(), size, &mut |s| {
        if current.len() == target {
            return false;
        }
        let joined = match g.pointwise_stabilizer(s).and_then(|st| st.join(k)) {
            Ok(j) => j,
            Err(e) => {
                failure = Some(e);
                return false;
            }
        };
        current.retain(|p| joined.contains(p));
        true
    });
    if let Some(e) = failure {
        return Err(e);
    }
    PermGroup::from_elements(g.degree(), {
        let mut v: Vec<Perm> = current.into_iter().collect();
        v.sort();
        v
    })
}

pub fn verify_section_imaginary(
    seq: &ExactSequence,
    a: &ParameterSet,
    limits: &Limits,
) -> Result<Verification> {
    let total = seq.total.group();
    let with_base = a.union(&ParameterSet::real(seq.embedding.iter().copied()));
    let generates_total = seq.total.fixing(&with_base)?.is_trivial();

    let k = seq.total.fixing(a)?;
    let aut_n = seq.base.group();
    let images = k
        .generators()
        .iter()
        .map(|g| {
            seq.restriction
                .apply(g)
                .cloned()
                .ok_or_else(|| Error::NotAHomomorphism("restriction undefined".into()))
        })
        .collect::<Result<Vec<_>>>()?;
    let k_on_n = PermGroup::from_generators(aut_n.degree(), images)?;
    let base_closure_trivial = if k_on_n.same_group(aut_n) {
        true
    } else {
        let size = limits.kmax.min(aut_n.degree());
        let mut ok = true;
        let mut failure = None;
        subsets(aut_n.degree(), size, &mut |s| match aut_n
            .pointwise_stabilizer(s)
            .and_then(|st| st.join(&k_on_n))
        {
            Ok(j) if j.same_group(aut_n) => true,
            Ok(_) => {
                ok = false;
                false
            }
            Err(e) => {
                failure = Some(e);
                false
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        ok
    };

    let kmax_binds = !bounded_closure_group(total, &k, limits.kmax, limits)?.same_group(&k);
    Ok(Verification {
        generates_total,
        base_closure_trivial,
        kmax_binds,
    })
}

/// The section determined by `A`: each `ρ ∈ Aut(N)` lifts to the unique
/// element of `Aut(M/A)` restricting to `ρ`.
pub fn section_from_imaginary(
    seq: &ExactSequence,
    a: &ParameterSet,
    limits: &Limits,
) -> Result<Section> {
    let k = seq.total.fixing(a)?;
    let k_elements = k.elements(limits.max_group_order)?;
    let quotient = seq.base.group();
    let mut lift_of = std::collections::HashMap::new();
    for sigma in &k_elements {
        let rho = seq
            .restriction
            .apply(sigma)
            .ok_or_else(|| Error::NotAHomomorphism("restriction undefined".into()))?;
        if lift_of.insert(rho.clone(), sigma.clone()).is_some() {
            return Err(Error::LiftNotUnique(format!(
                "{rho:?} has more than one lift fixing A"
            )));
        }
    }
    for rho in quotient.elements(limits.max_group_order)? {
        if !lift_of.contains_key(&rho) {
            return Err(Error::MissingLift(format!("{rho:?} has no lift fixing A")));
        }
    }
    let images = quotient
        .generators()
        .iter()
        .map(|q| lift_of[q].clone())
        .collect();
    let ghat = GroupHom::new(
        quotient.clone(),
        seq.total.group().clone(),
        images,
        limits.max_group_order,
    )?;
    if !splits(seq, &ghat) {
        return Err(Error::NotAHomomorphism(
            "the lifts do not split the restriction".into(),
        ));
    }
    Ok(Section { ghat })
}
