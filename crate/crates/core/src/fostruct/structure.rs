use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type SortId = usize;
pub type RelId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sort {
    pub name: String,
    /// Universe indices, in declaration order.
    pub elements: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub name: String,
    pub signature: Vec<SortId>,
    pub tuples: BTreeSet<Vec<usize>>,
    /// Declared with `fun`: the last coordinate is a function of the others.
    pub is_function: bool,
}

impl Relation {
    pub fn arity(&self) -> usize {
        self.signature.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constant {
    pub name: String,
    pub sort: SortId,
    pub element: usize,
}

/// A finite multi-sorted relational structure with named constants.
///
/// The universe is the disjoint union of the sorts; elements are numbered
/// `0..size()` in declaration order, so each sort occupies a contiguous block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Structure {
    name: String,
    sorts: Vec<Sort>,
    relations: Vec<Relation>,
    constants: Vec<Constant>,
    element_names: Vec<String>,
    element_sort: Vec<SortId>,
    element_index: HashMap<String, usize>,
}

impl Structure {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn size(&self) -> usize {
        self.element_names.len()
    }

    pub fn sorts(&self) -> &[Sort] {
        &self.sorts
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn constants(&self) -> &[Constant] {
        &self.constants
    }

    pub fn element_names(&self) -> &[String] {
        &self.element_names
    }

    pub fn element_name(&self, e: usize) -> &str {
        &self.element_names[e]
    }

    pub fn sort_of(&self, e: usize) -> SortId {
        self.element_sort[e]
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.element_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    pub fn sort_id(&self, name: &str) -> Result<SortId> {
        self.sorts
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| Error::UnknownSort(name.to_string()))
    }

    pub fn relation_id(&self, name: &str) -> Result<RelId> {
        self.relations
            .iter()
            .position(|r| r.name == name)
            .ok_or_else(|| Error::UnknownRelation(name.to_string()))
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        Ok(&self.relations[self.relation_id(name)?])
    }

    pub fn constant(&self, name: &str) -> Option<&Constant> {
        self.constants.iter().find(|c| c.name == name)
    }

    /// Evaluates a declared function at the given arguments.
    pub fn apply_function(&self, name: &str, args: &[usize]) -> Result<usize> {
        let rel = self.relation(name)?;
        if !rel.is_function {
            return Err(Error::UnknownRelation(format!("{name} is not a function")));
        }
        let mut lo = args.to_vec();
        lo.push(0);
        rel.tuples
            .range(lo..)
            .next()
            .filter(|t| t[..args.len()] == *args)
            .map(|t| t[args.len()])
            .ok_or_else(|| Error::UnknownElement(format!("{name}{args:?}")))
    }

    /// Parses the structure file format.
    pub fn parse(text: &str) -> Result<Structure> {
        super::parse::parse_structure(text)
    }

    /// Canonical text form; `parse(to_text())` reproduces the structure.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "structure {}", self.name);
        for s in &self.sorts {
            let names: Vec<&str> = s.elements.iter().map(|&e| self.element_name(e)).collect();
            let _ = writeln!(out, "sort {} = {{ {} }}", s.name, names.join(", "));
        }
        for r in &self.relations {
            let sig: Vec<&str> = r
                .signature
                .iter()
                .map(|&s| self.sorts[s].name.as_str())
                .collect();
            if r.is_function {
                let (dom, cod) = sig.split_at(sig.len() - 1);
                let entries: Vec<String> = r
                    .tuples
                    .iter()
                    .map(|t| {
                        let args: Vec<&str> = t[..t.len() - 1]
                            .iter()
                            .map(|&e| self.element_name(e))
                            .collect();
                        format!(
                            "({}) -> {}",
                            args.join(","),
                            self.element_name(t[t.len() - 1])
                        )
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "fun {} : {} -> {} = {{ {} }}",
                    r.name,
                    dom.join(","),
                    cod[0],
                    entries.join(", ")
                );
            } else {
                let entries: Vec<String> = r
                    .tuples
                    .iter()
                    .map(|t| {
                        let names: Vec<&str> = t.iter().map(|&e| self.element_name(e)).collect();
                        format!("({})", names.join(","))
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    "rel {}/{} : {} = {{ {} }}",
                    r.name,
                    r.arity(),
                    sig.join(","),
                    entries.join(", ")
                );
            }
        }
        for c in &self.constants {
            let _ = writeln!(
                out,
                "const {} : {} = {}",
                c.name,
                self.sorts[c.sort].name,
                self.element_name(c.element)
            );
        }
        out
    }

    /// The substructure on the named sorts: relations and constants whose sorts
    /// all lie among them. Returns it with the map from its universe into ours.
    pub fn induced(&self, name: &str, sort_names: &[&str]) -> Result<(Structure, Vec<usize>)> {
        let ids: Vec<SortId> = sort_names
            .iter()
            .map(|s| self.sort_id(s))
            .collect::<Result<_>>()?;
        let mut b = StructureBuilder::new(name);
        let mut embedding = Vec::new();
        for &s in &ids {
            let sort = &self.sorts[s];
            b.sort(
                &sort.name,
                sort.elements.iter().map(|&e| self.element_name(e)),
            )?;
            embedding.extend(sort.elements.iter().copied());
        }
        let mut local = vec![usize::MAX; self.size()];
        for (i, &e) in embedding.iter().enumerate() {
            local[e] = i;
        }
        for r in &self.relations {
            if r.signature.iter().all(|s| ids.contains(s)) {
                let sig: Vec<String> = r
                    .signature
                    .iter()
                    .map(|&s| self.sorts[s].name.clone())
                    .collect();
                let tuples = r
                    .tuples
                    .iter()
                    .map(|t| t.iter().map(|&e| local[e]).collect());
                b.relation_by_index(&r.name, &sig, tuples, r.is_function)?;
            }
        }
        for c in &self.constants {
            if ids.contains(&c.sort) {
                b.constant(
                    &c.name,
                    &self.sorts[c.sort].name,
                    self.element_name(c.element),
                )?;
            }
        }
        Ok((b.build()?, embedding))
    }

    /// The same structure with every element renamed by `rename` and each sort
    /// listed in the order given by `order` (a permutation of each sort's block).
    pub fn relabeled(&self, order: &[usize], rename: impl Fn(&str) -> String) -> Result<Structure> {
        let mut b = StructureBuilder::new(&self.name);
        for s in &self.sorts {
            let names: Vec<String> = s
                .elements
                .iter()
                .map(|&e| rename(self.element_name(order[e])))
                .collect();
            b.sort(&s.name, names.iter().map(String::as_str))?;
        }
        for r in &self.relations {
            let sig: Vec<String> = r
                .signature
                .iter()
                .map(|&s| self.sorts[s].name.clone())
                .collect();
            let tuples: Vec<Vec<String>> = r
                .tuples
                .iter()
                .map(|t| t.iter().map(|&e| rename(self.element_name(e))).collect())
                .collect();
            if r.is_function {
                b.function_by_names(&r.name, &sig, &tuples)?;
            } else {
                b.relation(&r.name, &sig, &tuples)?;
            }
        }
        for c in &self.constants {
            b.constant(
                &c.name,
                &self.sorts[c.sort].name,
                &rename(self.element_name(c.element)),
            )?;
        }
        b.build()
    }
}

/// Incremental, validating construction of a [`Structure`].
#[derive(Debug, Clone)]
pub struct StructureBuilder {
    name: String,
    sorts: Vec<Sort>,
    relations: Vec<Relation>,
    constants: Vec<Constant>,
    element_names: Vec<String>,
    element_sort: Vec<SortId>,
    element_index: HashMap<String, usize>,
}

impl StructureBuilder {
    pub fn new(name: &str) -> StructureBuilder {
        StructureBuilder {
            name: name.to_string(),
            sorts: Vec::new(),
            relations: Vec::new(),
            constants: Vec::new(),
            element_names: Vec::new(),
            element_sort: Vec::new(),
            element_index: HashMap::new(),
        }
    }

    fn identifier_taken(&self, name: &str) -> bool {
        self.sorts.iter().any(|s| s.name == name)
            || self.relations.iter().any(|r| r.name == name)
            || self.constants.iter().any(|c| c.name == name)
    }

    pub fn sort<'a>(
        &mut self,
        name: &str,
        elements: impl IntoIterator<Item = &'a str>,
    ) -> Result<SortId> {
        if self.identifier_taken(name) {
            return Err(Error::DuplicateIdentifier(name.to_string()));
        }
        let id = self.sorts.len();
        let mut members = Vec::new();
        for e in elements {
            if self.element_index.contains_key(e) {
                return Err(Error::DuplicateIdentifier(e.to_string()));
            }
            let idx = self.element_names.len();
            self.element_names.push(e.to_string());
            self.element_sort.push(id);
            self.element_index.insert(e.to_string(), idx);
            members.push(idx);
        }
        if members.is_empty() {
            return Err(Error::EmptySort(name.to_string()));
        }
        self.sorts.push(Sort {
            name: name.to_string(),
            elements: members,
        });
        Ok(id)
    }

    fn sort_ids(&self, signature: &[impl AsRef<str>]) -> Result<Vec<SortId>> {
        signature
            .iter()
            .map(|s| {
                self.sorts
                    .iter()
                    .position(|x| x.name == s.as_ref())
                    .ok_or_else(|| Error::UnknownSort(s.as_ref().to_string()))
            })
            .collect()
    }

    pub fn element(&self, name: &str) -> Result<usize> {
        self.element_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownElement(name.to_string()))
    }

    /// Adds a relation whose tuples are given by element names.
    pub fn relation<S: AsRef<str>>(
        &mut self,
        name: &str,
        signature: &[impl AsRef<str>],
        tuples: &[Vec<S>],
    ) -> Result<RelId> {
        let resolved = tuples
            .iter()
            .map(|t| {
                t.iter()
                    .map(|e| self.element(e.as_ref()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        self.relation_by_index(name, signature, resolved, false)
    }

    /// Adds a relation (or function graph) whose tuples are universe indices.
    pub fn relation_by_index(
        &mut self,
        name: &str,
        signature: &[impl AsRef<str>],
        tuples: impl IntoIterator<Item = Vec<usize>>,
        is_function: bool,
    ) -> Result<RelId> {
        if self.identifier_taken(name) {
            return Err(Error::DuplicateIdentifier(name.to_string()));
        }
        let sig = self.sort_ids(signature)?;
        if sig.is_empty() {
            return Err(Error::SortMismatch(format!(
                "relation `{name}` has arity 0"
            )));
        }
        let mut set = BTreeSet::new();
        for t in tuples {
            if t.len() != sig.len() {
                return Err(Error::SortMismatch(format!(
                    "tuple of length {} in `{name}` of arity {}",
                    t.len(),
                    sig.len()
                )));
            }
            for (i, (&e, &s)) in t.iter().zip(&sig).enumerate() {
                if e >= self.element_names.len() {
                    return Err(Error::UnknownElement(format!("#{e}")));
                }
                if self.element_sort[e] != s {
                    return Err(Error::SortMismatch(format!(
                        "element `{}` at position {} of `{name}` is not of sort `{}`",
                        self.element_names[e],
                        i + 1,
                        self.sorts[s].name
                    )));
                }
            }
            set.insert(t);
        }
        if is_function {
            self.check_function(name, &sig, &set)?;
        }
        self.relations.push(Relation {
            name: name.to_string(),
            signature: sig,
            tuples: set,
            is_function,
        });
        Ok(self.relations.len() - 1)
    }

    /// Adds a function given as `(args..., value)` rows of element names.
    pub fn function_by_names<S: AsRef<str>>(
        &mut self,
        name: &str,
        signature: &[impl AsRef<str>],
        rows: &[Vec<S>],
    ) -> Result<RelId> {
        let resolved = rows
            .iter()
            .map(|t| {
                t.iter()
                    .map(|e| self.element(e.as_ref()))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        self.relation_by_index(name, signature, resolved, true)
    }

    fn check_function(
        &self,
        name: &str,
        sig: &[SortId],
        graph: &BTreeSet<Vec<usize>>,
    ) -> Result<()> {
        let (dom, _) = sig.split_at(sig.len() - 1);
        let mut seen: HashMap<&[usize], usize> = HashMap::new();
        for t in graph {
            let args = &t[..t.len() - 1];
            if let Some(prev) = seen.insert(args, t[t.len() - 1]) {
                return Err(Error::NotAFunction {
                    name: name.to_string(),
                    detail: format!(
                        "two values {} and {} for the same arguments",
                        self.element_names[prev],
                        self.element_names[t[t.len() - 1]]
                    ),
                });
            }
        }
        let domain_size: usize = dom.iter().map(|&s| self.sorts[s].elements.len()).product();
        if seen.len() != domain_size {
            return Err(Error::NotAFunction {
                name: name.to_string(),
                detail: format!(
                    "defined on {} of {} argument tuples",
                    seen.len(),
                    domain_size
                ),
            });
        }
        Ok(())
    }

    pub fn constant(&mut self, name: &str, sort: &str, element: &str) -> Result<()> {
        if self.identifier_taken(name) {
            return Err(Error::DuplicateIdentifier(name.to_string()));
        }
        let s = self.sort_ids(&[sort])?[0];
        let e = self.element(element)?;
        if self.element_sort[e] != s {
            return Err(Error::SortMismatch(format!(
                "constant `{name}` declared in `{sort}` but `{element}` is not of that sort"
            )));
        }
        self.constants.push(Constant {
            name: name.to_string(),
            sort: s,
            element: e,
        });
        Ok(())
    }

    pub fn build(self) -> Result<Structure> {
        if self.sorts.is_empty() {
            return Err(Error::EmptySort(format!(
                "structure `{}` declares no sorts",
                self.name
            )));
        }
        Ok(Structure {
            name: self.name,
            sorts: self.sorts,
            relations: self.relations,
            constants: self.constants,
            element_names: self.element_names,
            element_sort: self.element_sort,
            element_index: self.element_index,
        })
    }
}
