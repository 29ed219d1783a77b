//! Map files describing a pre-morphism `N -> M^eq`:
//!
//! ```text
//! # optional: the equivalence on representative tuples, over 2k variables
//! equiv { x1:V, x2:V, y1:V, y2:V | ... }
//! n0 -> a
//! n1 -> (a, b)
//! ```
//!
//! Single-element representatives without `equiv` give a real carrier. Otherwise
//! the carrier is the quotient of the orbits of the representatives by `equiv`
//! (equality when absent).

use std::collections::BTreeSet;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use modeq_core::autcomp::AutResult;
use modeq_core::fostruct::{comprehension_set, parse_comprehension, DefinableSet};
use modeq_core::imaginaries::quotient_sort;
use modeq_core::morphcat::{Carrier, Premorphism};
use modeq_core::Limits;

pub struct MapFile {
    pub equiv: Option<String>,
    /// Source element name and representative tuple of target names.
    pub lines: Vec<(String, Vec<String>)>,
}

pub fn parse(text: &str) -> Result<MapFile> {
    let mut equiv = None;
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("equiv") {
            equiv = Some(rest.trim().to_string());
            continue;
        }
        let (lhs, rhs) = line
            .split_once("->")
            .ok_or_else(|| anyhow!("line {}: expected `element -> representative`", i + 1))?;
        let rhs = rhs.trim();
        let tuple = match rhs.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
            Some(inner) => inner.split(',').map(|s| s.trim().to_string()).collect(),
            None => vec![rhs.to_string()],
        };
        if tuple.iter().any(String::is_empty) {
            bail!("line {}: empty element name", i + 1);
        }
        lines.push((lhs.trim().to_string(), tuple));
    }
    Ok(MapFile { equiv, lines })
}

/// Builds the pre-morphism. The outer error is malformed input; the inner one
/// means the map does not describe an interpretation.
pub fn build(
    file: &MapFile,
    source: Arc<AutResult>,
    target: Arc<AutResult>,
    limits: &Limits,
) -> Result<std::result::Result<Premorphism, String>> {
    let (n, m) = (source.structure(), target.structure());
    let mut reps: Vec<Option<Vec<usize>>> = vec![None; n.size()];
    for (x, tuple) in &file.lines {
        let i = n.element(x).with_context(|| format!("in {}", n.name()))?;
        let t = tuple
            .iter()
            .map(|y| m.element(y))
            .collect::<modeq_core::Result<Vec<_>>>()
            .with_context(|| format!("in {}", m.name()))?;
        if reps[i].replace(t).is_some() {
            bail!("`{x}` is mapped twice");
        }
    }
    let reps: Vec<Vec<usize>> = reps
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.ok_or_else(|| anyhow!("`{}` has no image", n.element_name(i))))
        .collect::<Result<_>>()?;
    let k = reps[0].len();
    if reps.iter().any(|r| r.len() != k) {
        bail!("representatives have different lengths");
    }
    if k == 1 && file.equiv.is_none() {
        let images = reps.iter().map(|r| r[0]).collect();
        return Ok(Premorphism::real(source, target, images).map_err(|e| e.to_string()));
    }
    let signature: Vec<_> = reps[0].iter().map(|&x| m.sort_of(x)).collect();
    if reps.iter().any(|r| {
        r.iter()
            .map(|&x| m.sort_of(x))
            .ne(signature.iter().copied())
    }) {
        bail!("representatives lie in different sorts");
    }
    let mut d = BTreeSet::new();
    for r in &reps {
        d.extend(target.group().orbit(r)?);
    }
    let e = match &file.equiv {
        Some(text) => {
            let c = parse_comprehension(text).context("in `equiv`")?;
            comprehension_set(m, &c).context("in `equiv`")?
        }
        None => {
            let sig = signature.iter().chain(&signature).copied().collect();
            DefinableSet::explicit(sig, d.iter().map(|t| t.iter().chain(t).copied().collect()))
        }
    };
    let d = DefinableSet::explicit(signature, d);
    let sort = match quotient_sort(&target, &d, &e, limits) {
        Ok(s) => Arc::new(s),
        Err(err) => return Ok(Err(err.to_string())),
    };
    let map = reps
        .iter()
        .map(|r| {
            sort.class_of(0, r)
                .ok_or_else(|| anyhow!("representative outside the carrier"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Premorphism::new(source, target, Carrier::Imaginary(sort), map).map_err(|e| e.to_string()))
}
