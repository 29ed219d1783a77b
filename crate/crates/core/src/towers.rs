//! Finite chains `M_0 ⊆ M_1 ⊆ …` of 0-definable substructures and the
//! inverse system of their automorphism groups.

use std::sync::Arc;

use crate::autcomp::{automorphism_group, AutResult, ParameterSet};
use crate::catalog::{add_heap, add_successor};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::fostruct::{Structure, StructureBuilder};
use crate::morphcat::Premorphism;
use crate::permgrp::{GroupHom, Perm};

#[derive(Clone, Debug)]
pub struct Tower {
    pub levels: Vec<Arc<AutResult>>,
    /// `inclusions[k][x]` is the element of level `k+1` carrying element `x` of level `k`.
    pub inclusions: Vec<Vec<usize>>,
    /// `connecting[k]: Aut(M_{k+1}) → Aut(M_k)`.
    pub connecting: Vec<GroupHom>,
}

impl Tower {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn inclusion(&self, k: usize) -> Result<Premorphism> {
        Premorphism::real(
            self.levels[k].clone(),
            self.levels[k + 1].clone(),
            self.inclusions[k].clone(),
        )
    }
}

/// Restriction of `Aut(upper)` to the image of `images`, as a homomorphism onto
/// `Aut(lower)`.
fn connecting_hom(
    lower: &AutResult,
    upper: &AutResult,
    images: &[usize],
    limits: &Limits,
) -> Result<GroupHom> {
    let restricted = upper
        .group()
        .generators()
        .iter()
        .map(|g| g.restrict(images))
        .collect::<Result<Vec<Perm>>>()
        .map_err(|_| {
            Error::NotInvariant("the image of a level is not invariant in the next".into())
        })?;
    let hom = GroupHom::new(
        upper.group().clone(),
        lower.group().clone(),
        restricted,
        limits.max_group_order,
    )
    .map_err(|e| {
        Error::NotAnEmbedding(format!(
            "restriction does not land in Aut of the lower level: {e}"
        ))
    })?;
    if !hom.is_surjective() {
        return Err(Error::NotAnEmbedding(format!(
            "restriction onto {} is not surjective",
            lower.structure().name()
        )));
    }
    Ok(hom)
}

pub fn build_tower(
    levels: Vec<Structure>,
    inclusions: Vec<Vec<usize>>,
    limits: &Limits,
) -> Result<Tower> {
    if levels.is_empty() || inclusions.len() + 1 != levels.len() {
        return Err(Error::Precondition(format!(
            "{} levels need {} inclusions, got {}",
            levels.len(),
            levels.len().saturating_sub(1),
            inclusions.len()
        )));
    }
    let levels: Vec<Arc<AutResult>> = levels
        .iter()
        .map(|m| Arc::new(automorphism_group(m)))
        .collect();
    let mut connecting = Vec::new();
    for (k, images) in inclusions.iter().enumerate() {
        let (lower, upper) = (&levels[k], &levels[k + 1]);
        let g = Premorphism::real(lower.clone(), upper.clone(), images.clone())?;
        g.check()
            .map_err(|e| Error::NotInvariant(format!("level {k} in level {}: {e}", k + 1)))?;
        connecting.push(connecting_hom(lower, upper, images, limits)?);
    }
    Ok(Tower {
        levels,
        inclusions,
        connecting,
    })
}

/// Each level is its own algebraic closure of the empty set, and each level
/// is invariant in the next.
pub fn check_finitary(t: &Tower) -> Result<bool> {
    for (k, level) in t.levels.iter().enumerate() {
        if level.acl(&ParameterSet::empty())?.len() != level.structure().size() {
            return Ok(false);
        }
        if let Some(images) = t.inclusions.get(k) {
            let upper = t.levels[k + 1].group();
            if upper
                .generators()
                .iter()
                .any(|g| g.restrict(images).is_err())
            {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// `G_0 ← G_1 ← … ← G_k` with a coherence certificate.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub orders: Vec<u128>,
    pub kernel_orders: Vec<u128>,
    pub maps: Vec<GroupHom>,
    /// Every generator of `G_k` maps down the chain, each map is surjective,
    /// and `|G_j| = |ker_j| · |G_{j-1}|`.
    pub coherent: bool,
}

pub fn inverse_limit_truncation(t: &Tower, k: usize) -> Result<Truncation> {
    if k >= t.len() {
        return Err(Error::Precondition(format!("level {k} out of range")));
    }
    let orders: Vec<u128> = t.levels[..=k].iter().map(|l| l.group().order()).collect();
    let maps: Vec<GroupHom> = t.connecting[..k].to_vec();
    let kernel_orders: Vec<u128> = maps.iter().map(|h| h.kernel().order()).collect();
    let mut coherent = maps.iter().all(|h| h.is_surjective());
    for j in 1..=k {
        coherent &= orders[j] == kernel_orders[j - 1] * orders[j - 1];
    }
    for g in t.levels[k].group().generators() {
        let mut x = g.clone();
        for j in (0..k).rev() {
            match maps[j].apply(&x) {
                Some(y) if t.levels[j].group().contains(y) => x = y.clone(),
                _ => {
                    coherent = false;
                    break;
                }
            }
        }
    }
    Ok(Truncation {
        orders,
        kernel_orders,
        maps,
        coherent,
    })
}

/// Level `k` has sorts `S0..Sk`, `Sj` an oriented torsor over `Z/2^(j+1)`,
/// with projections `p_j : S(j+1) -> Sj`. Each level is included in the next
/// by the identity on names, giving `Z/2 ← Z/4 ← Z/8 ← …`.
pub fn cyclic_two_power_tower(levels: usize, limits: &Limits) -> Result<Tower> {
    let sort_elements = |j: usize| -> Vec<String> {
        (0..1usize << (j + 1))
            .map(|i| format!("s{j}_{i}"))
            .collect()
    };
    let mut structures = Vec::new();
    for k in 0..levels {
        let mut b = StructureBuilder::new(&format!("L{k}"));
        for j in 0..=k {
            b.sort(
                &format!("S{j}"),
                sort_elements(j).iter().map(String::as_str),
            )?;
        }
        for j in 0..=k {
            let e = sort_elements(j);
            add_heap(&mut b, &format!("H{j}"), &format!("S{j}"), &e)?;
            add_successor(&mut b, &format!("Succ{j}"), &format!("S{j}"), &e)?;
        }
        for j in 0..k {
            let (hi, lo) = (sort_elements(j + 1), sort_elements(j));
            let rows: Vec<Vec<&String>> = hi
                .iter()
                .enumerate()
                .map(|(i, x)| vec![x, &lo[i % lo.len()]])
                .collect();
            b.function_by_names(
                &format!("p{j}"),
                &[format!("S{}", j + 1), format!("S{j}")],
                &rows,
            )?;
        }
        structures.push(b.build()?);
    }
    let inclusions = (0..levels.saturating_sub(1))
        .map(|k| {
            let (lo, hi) = (&structures[k], &structures[k + 1]);
            (0..lo.size())
                .map(|x| hi.element(lo.element_name(x)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    build_tower(structures, inclusions, limits)
}

/// Parses inclusion blocks:
///
/// ```text
/// map 0 -> 1
///   a -> a
///   b -> c
/// ```
pub fn parse_inclusions(text: &str, levels: &[Structure]) -> Result<Vec<Vec<usize>>> {
    let mut out: Vec<Option<Vec<Option<usize>>>> = vec![None; levels.len().saturating_sub(1)];
    let mut current: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| Error::Syntax {
            line: lineno + 1,
            column: 1,
            message: message.to_string(),
        };
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| syntax("expected `->`"))?;
        let (lhs, rhs) = (lhs.trim(), rhs.trim());
        if let Some(from) = lhs.strip_prefix("map ") {
            let from: usize = from
                .trim()
                .parse()
                .map_err(|_| syntax("expected a level number"))?;
            let to: usize = rhs.parse().map_err(|_| syntax("expected a level number"))?;
            if to != from + 1 || to >= levels.len() {
                return Err(syntax("inclusions go from level i to level i+1"));
            }
            out[from] = Some(vec![None; levels[from].size()]);
            current = Some(from);
            continue;
        }
        let k = current.ok_or_else(|| syntax("element line before any `map` header"))?;
        let x = levels[k].element(lhs)?;
        let y = levels[k + 1].element(rhs)?;
        out[k].as_mut().unwrap()[x] = Some(y);
    }
    out.into_iter()
        .enumerate()
        .map(|(k, m)| {
            let m = m.ok_or_else(|| Error::Precondition(format!("no inclusion for level {k}")))?;
            m.into_iter()
                .enumerate()
                .map(|(x, y)| {
                    y.ok_or_else(|| {
                        Error::Precondition(format!(
                            "`{}` of level {k} has no image",
                            levels[k].element_name(x)
                        ))
                    })
                })
                .collect()
        })
        .collect()
}
