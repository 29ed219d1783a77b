//! Permutation groups: permutations, stabilizer chains, orbits, stabilizers,
//! subgroup tests and homomorphisms.

mod chain;
mod group;
mod hom;
mod perm;

pub use group::PermGroup;
pub use hom::GroupHom;
pub use perm::Perm;

use std::collections::HashMap;

use crate::error::{Error, Result};

/// The permutations induced on a finite set of tuples that is closed under
/// every generator. Returns one permutation of `tuples` per generator.
pub fn induced_action(gens: &[Perm], tuples: &[Vec<usize>]) -> Result<Vec<Perm>> {
    let index: HashMap<&[usize], usize> = tuples
        .iter()
        .enumerate()
        .map(|(i, t)| (t.as_slice(), i))
        .collect();
    gens.iter()
        .map(|g| {
            let images = tuples
                .iter()
                .map(|t| {
                    index
                        .get(g.apply_tuple(t).as_slice())
                        .copied()
                        .ok_or_else(|| Error::NotInvariant(format!("tuple {t:?} leaves the set")))
                })
                .collect::<Result<Vec<_>>>()?;
            Perm::from_images(images)
        })
        .collect()
}

/// Parses cycle notation such as `(a0 a1 a2)(b0 b1)` over named points.
pub fn parse_cycles(text: &str, names: &[String]) -> Result<Perm> {
    let lookup: HashMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let mut cycles = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .strip_prefix('(')
            .ok_or_else(|| syntax(text, "expected `(`"))?;
        let close = open.find(')').ok_or_else(|| syntax(text, "missing `)`"))?;
        let body = &open[..close];
        let cycle = body
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|name| {
                lookup
                    .get(name)
                    .copied()
                    .ok_or_else(|| Error::UnknownElement(name.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        if !cycle.is_empty() {
            cycles.push(cycle);
        }
        rest = open[close + 1..].trim_start();
    }
    Perm::from_cycles(names.len(), &cycles)
}

fn syntax(text: &str, message: &str) -> Error {
    Error::Syntax {
        line: 1,
        column: 1,
        message: format!("{message} in `{text}`"),
    }
}

/// A group file: `group <name>` followed by `gen = <cycles>` lines.
pub fn parse_group_file(text: &str, names: &[String]) -> Result<(String, PermGroup)> {
    let mut name = None;
    let mut gens = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("group") {
            name = Some(rest.trim().to_string());
        } else if let Some(rest) = line.strip_prefix("gen") {
            let cycles = rest.trim_start().strip_prefix('=').ok_or(Error::Syntax {
                line: lineno + 1,
                column: 1,
                message: "expected `gen = <cycles>`".into(),
            })?;
            gens.push(parse_cycles(cycles, names).map_err(|e| match e {
                Error::Syntax { message, .. } => Error::Syntax {
                    line: lineno + 1,
                    column: 1,
                    message,
                },
                other => other,
            })?);
        } else {
            return Err(Error::Syntax {
                line: lineno + 1,
                column: 1,
                message: format!("unexpected line `{line}`"),
            });
        }
    }
    let name = name.ok_or(Error::Syntax {
        line: 1,
        column: 1,
        message: "missing `group <name>` header".into(),
    })?;
    Ok((name, PermGroup::from_generators(names.len(), gens)?))
}
