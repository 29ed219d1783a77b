//! Two-sorted cover structures `(C, N, pr)` with a named deck group.
//!
//! A structure is read as a cover when it has sorts `C` and `N`, a function
//! `pr : C -> N`, and unary functions `C -> C` whose names start with `deck`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::autcomp::{automorphism_group, fixed_points, AutResult, ParameterSet};
use crate::catalog::{add_heap, add_successor};
use crate::config::Limits;
use crate::error::{Error, Result};
use crate::fostruct::{Structure, StructureBuilder};
use crate::imaginaries::canonical_parameter;
use crate::morphcat::{exact_sequence, ExactSequence};
use crate::permgrp::{Perm, PermGroup};
use crate::sections::{find_sections, section_imaginary, Section};

#[derive(Clone, Debug)]
pub struct CoverStructure {
    pub aut: Arc<AutResult>,
    /// Universe indices of the elements of `C` and `N`, in sort order.
    pub c_points: Vec<usize>,
    pub n_points: Vec<usize>,
    /// `pr[i]` is the position in `n_points` of the image of `c_points[i]`.
    pub pr: Vec<usize>,
    pub fibers: Vec<Vec<usize>>,
    /// The declared deck group, acting on positions in `c_points`.
    pub gamma: PermGroup,
    pub deck_names: Vec<String>,
}

impl CoverStructure {
    pub fn from_structure(m: Structure) -> Result<CoverStructure> {
        let malformed = |msg: &str| Error::MalformedCover(msg.to_string());
        let c = m.sort_id("C").map_err(|_| malformed("no sort `C`"))?;
        let n = m.sort_id("N").map_err(|_| malformed("no sort `N`"))?;
        let c_points = m.sorts()[c].elements.clone();
        let n_points = m.sorts()[n].elements.clone();
        let c_local: HashMap<usize, usize> =
            c_points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let n_local: HashMap<usize, usize> =
            n_points.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let pr_rel = m
            .relation("pr")
            .map_err(|_| malformed("no function `pr`"))?;
        if !pr_rel.is_function || pr_rel.signature != [c, n] {
            return Err(malformed("`pr` must be a function C -> N"));
        }
        let mut pr = vec![0; c_points.len()];
        for t in &pr_rel.tuples {
            pr[c_local[&t[0]]] = n_local[&t[1]];
        }
        let mut fibers = vec![Vec::new(); n_points.len()];
        for (i, &y) in pr.iter().enumerate() {
            fibers[y].push(i);
        }
        let mut deck = Vec::new();
        let mut deck_names = Vec::new();
        for r in m.relations() {
            if !r.name.starts_with("deck") {
                continue;
            }
            if !r.is_function || r.signature != [c, c] {
                return Err(malformed(&format!(
                    "`{}` must be a function C -> C",
                    r.name
                )));
            }
            let mut images = vec![0; c_points.len()];
            for t in &r.tuples {
                images[c_local[&t[0]]] = c_local[&t[1]];
            }
            deck.push(
                Perm::from_images(images)
                    .map_err(|_| malformed(&format!("`{}` is not a bijection", r.name)))?,
            );
            deck_names.push(r.name.clone());
        }
        let gamma = PermGroup::from_generators(c_points.len(), deck)?;
        Ok(CoverStructure {
            aut: Arc::new(automorphism_group(&m)),
            c_points,
            n_points,
            pr,
            fibers,
            gamma,
            deck_names,
        })
    }

    pub fn structure(&self) -> &Structure {
        self.aut.structure()
    }

    pub fn name(&self) -> &str {
        self.structure().name()
    }

    pub fn exact_sequence(&self, limits: &Limits) -> Result<ExactSequence> {
        exact_sequence(self.aut.clone(), &["N"], limits)
    }

    /// `Aut(M/N)` acting on `C`, required to equal the declared group.
    pub fn deck_group(&self) -> Result<PermGroup> {
        let actual = self.kernel_on_c()?;
        if !actual.same_group(&self.gamma) {
            return Err(Error::C2Violation(format!(
                "Aut(M/N) has order {} but the declared deck group has order {}",
                actual.order(),
                self.gamma.order()
            )));
        }
        Ok(actual)
    }

    fn kernel_on_c(&self) -> Result<PermGroup> {
        self.aut
            .group()
            .pointwise_stabilizer(&self.n_points)?
            .restrict(&self.c_points)
    }

    pub fn validate(&self) -> Result<CoverReport> {
        let m = self.structure();
        let covering_map = self
            .fibers
            .iter()
            .all(|f| !f.is_empty() && f.len() == self.fibers[0].len());

        let (base, _) = m.induced("N", &["N"])?;
        let aut_n = automorphism_group(&base);
        let c = m.sort_id("C")?;
        let c_local: HashMap<usize, usize> = self
            .c_points
            .iter()
            .enumerate()
            .map(|(i, &x)| (x, i))
            .collect();
        let mut image_definable = true;
        for r in m
            .relations()
            .iter()
            .filter(|r| r.signature.iter().all(|&s| s == c))
        {
            let image: BTreeSet<Vec<usize>> = r
                .tuples
                .iter()
                .map(|t| t.iter().map(|x| self.pr[c_local[x]]).collect())
                .collect();
            for g in aut_n.group().generators() {
                if image.iter().any(|t| !image.contains(&g.apply_tuple(t))) {
                    image_definable = false;
                }
            }
        }

        let mut c1 = true;
        for &x in &self.c_points {
            let params = ParameterSet::real(self.n_points.iter().copied().chain([x]));
            let h = self.aut.fixing(&params)?;
            if h.generators()
                .iter()
                .any(|g| self.c_points.iter().any(|&y| !g.fixes(y)))
            {
                c1 = false;
            }
        }

        let kernel = self.kernel_on_c()?;
        let preserves_fibers = self
            .gamma
            .generators()
            .iter()
            .all(|g| (0..self.c_points.len()).all(|i| self.pr[g.apply(i)] == self.pr[i]));
        let regular_on_fibers = self.fibers.iter().all(|f| {
            !f.is_empty()
                && self.gamma.order() == f.len() as u128
                && self
                    .gamma
                    .point_orbit(f[0])
                    .map(|o| o.len() == f.len())
                    .unwrap_or(false)
        });
        let c2 = preserves_fibers && regular_on_fibers && kernel.same_group(&self.gamma);
        Ok(CoverReport {
            covering_map,
            image_definable,
            c1,
            c2,
            c3: "not checked (out of scope)",
        })
    }

    /// All deck-equivariant bijections between fibers.
    pub fn groupoid(&self, limits: &Limits) -> Result<Groupoid> {
        let gamma = self.gamma.elements(limits.max_group_order)?;
        let mut morphisms = Vec::new();
        for (n1, f1) in self.fibers.iter().enumerate() {
            let c1 = f1[0];
            for (n2, f2) in self.fibers.iter().enumerate() {
                for &c2 in f2 {
                    let mut map = BTreeMap::new();
                    for g in &gamma {
                        let (x, y) = (g.apply(c1), g.apply(c2));
                        if let Some(old) = map.insert(x, y) {
                            if old != y {
                                return Err(Error::C2Violation(
                                    "the deck group does not act freely".into(),
                                ));
                            }
                        }
                    }
                    if map.len() != f1.len()
                        || map.values().collect::<BTreeSet<_>>().len() != f2.len()
                    {
                        return Err(Error::C2Violation(
                            "the deck group is not transitive on fibers".into(),
                        ));
                    }
                    morphisms.push(FiberMap {
                        source: n1,
                        target: n2,
                        map,
                    });
                }
            }
        }
        let index = morphisms
            .iter()
            .enumerate()
            .map(|(i, m)| (m.map.clone(), i))
            .collect();
        Ok(Groupoid {
            objects: self.n_points.len(),
            morphisms,
            index,
        })
    }

    /// Sections of `Aut(M) → Aut(N)` whose imaginaries are not interdefinable
    /// with a single point of `C`.
    pub fn elimination(
        &self,
        seq: &ExactSequence,
        sections: &[Section],
        limits: &Limits,
    ) -> Result<Elimination> {
        let point_stabilizers = self
            .c_points
            .iter()
            .map(|&a| self.aut.fixing(&ParameterSet::real([a])))
            .collect::<Result<Vec<_>>>()?;
        for (i, s) in sections.iter().enumerate() {
            let si = section_imaginary(seq, s, limits)?;
            if !point_stabilizers
                .iter()
                .any(|h| h.same_group(&si.stabilizer))
            {
                return Ok(Elimination {
                    holds: false,
                    vacuous: false,
                    witness: Some(i),
                });
            }
        }
        Ok(Elimination {
            holds: true,
            vacuous: sections.is_empty(),
            witness: None,
        })
    }

    pub fn eliminates_section_imaginaries(&self, limits: &Limits) -> Result<Elimination> {
        let seq = self.exact_sequence(limits)?;
        let sections = find_sections(&seq, limits)?;
        self.elimination(&seq, &sections, limits)
    }

    /// Sections, definable points of `N`, elimination, and whether the two
    /// implications relating them hold.
    pub fn main_theorem_report(&self, limits: &Limits) -> Result<MainTheoremReport> {
        let seq = self.exact_sequence(limits)?;
        let sections = find_sections(&seq, limits)?;
        let base = seq.base.structure();
        let definable_points: Vec<String> = fixed_points(seq.base.group())
            .into_iter()
            .map(|x| base.element_name(x).to_string())
            .collect();
        let elimination = self.elimination(&seq, &sections, limits)?;
        let mut kmax_binds = false;
        for s in &sections {
            kmax_binds |= section_imaginary(&seq, s, limits)?.verification.kmax_binds;
        }
        let has_section = !sections.is_empty();
        let has_point = !definable_points.is_empty();
        let point_implies_section = !has_point || has_section;
        let elimination_consistent = !elimination.holds || (has_section == has_point);
        Ok(MainTheoremReport {
            instance: self.name().to_string(),
            sections: sections.len(),
            definable_points,
            elimination: elimination.holds,
            elimination_vacuous: elimination.vacuous,
            point_implies_section,
            elimination_consistent,
            kmax_binds,
            verdict: if point_implies_section && elimination_consistent {
                Verdict::Pass
            } else {
                Verdict::Fail
            },
        })
    }

    /// Which deck transformations are 0-definable in `M`, against which are
    /// 0-definable in the bare group `(Γ, ·)`.
    pub fn check_c4(&self, limits: &Limits) -> Result<C4Report> {
        let elements = self.gamma.elements(limits.max_group_order)?;
        let names: Vec<String> = elements.iter().map(|g| self.deck_label(g)).collect();
        let mut m_side = BTreeSet::new();
        for (i, g) in elements.iter().enumerate() {
            let graph: BTreeSet<Vec<usize>> = (0..self.c_points.len())
                .map(|x| vec![self.c_points[x], self.c_points[g.apply(x)]])
                .collect();
            if canonical_parameter(&self.aut, &graph, limits)?.is_zero_definable() {
                m_side.insert(i);
            }
        }
        let index: HashMap<&Perm, usize> =
            elements.iter().enumerate().map(|(i, g)| (g, i)).collect();
        let mut b = StructureBuilder::new("Gamma");
        b.sort("G", names.iter().map(String::as_str))?;
        let mul: Vec<Vec<usize>> = elements
            .iter()
            .enumerate()
            .flat_map(|(i, x)| elements.iter().enumerate().map(move |(j, y)| (i, j, x, y)))
            .map(|(i, j, x, y)| vec![i, j, index[&x.compose(y)]])
            .collect();
        b.relation_by_index("Mul", &["G", "G", "G"], mul, false)?;
        let group_aut = automorphism_group(&b.build()?);
        let group_side: BTreeSet<usize> = fixed_points(group_aut.group());
        Ok(C4Report {
            holds: m_side == group_side,
            m_side: m_side.into_iter().map(|i| names[i].clone()).collect(),
            group_side: group_side.into_iter().map(|i| names[i].clone()).collect(),
        })
    }

    fn deck_label(&self, g: &Perm) -> String {
        if g.is_identity() {
            return "id".into();
        }
        let m = self.structure();
        if let Some(r) = self.deck_names.iter().find(|name| {
            let rel = m.relation(name).unwrap();
            rel.tuples.iter().all(|t| {
                let i = self.c_points.iter().position(|&x| x == t[0]).unwrap();
                self.c_points[g.apply(i)] == t[1]
            })
        }) {
            return r.clone();
        }
        let names: Vec<&str> = self.c_points.iter().map(|&x| m.element_name(x)).collect();
        g.to_cycle_string(&names)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverReport {
    pub covering_map: bool,
    pub image_definable: bool,
    pub c1: bool,
    pub c2: bool,
    pub c3: &'static str,
}

impl CoverReport {
    pub fn passes(&self) -> bool {
        self.covering_map && self.image_definable && self.c1 && self.c2
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Elimination {
    pub holds: bool,
    pub vacuous: bool,
    /// Index of a section whose imaginary is not a point closure.
    pub witness: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Vacuous,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MainTheoremReport {
    pub instance: String,
    pub sections: usize,
    pub definable_points: Vec<String>,
    pub elimination: bool,
    pub elimination_vacuous: bool,
    /// A definable point yields a section.
    pub point_implies_section: bool,
    /// Under elimination, sections exist exactly when definable points do.
    pub elimination_consistent: bool,
    pub kmax_binds: bool,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct C4Report {
    pub m_side: Vec<String>,
    pub group_side: Vec<String>,
    pub holds: bool,
}

/// The unique deck-equivariant bijection between two fibers sending a given
/// point to another. Maps are keyed by positions in `c_points`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberMap {
    pub source: usize,
    pub target: usize,
    pub map: BTreeMap<usize, usize>,
}

#[derive(Clone, Debug)]
pub struct Groupoid {
    pub objects: usize,
    pub morphisms: Vec<FiberMap>,
    index: HashMap<BTreeMap<usize, usize>, usize>,
}

impl Groupoid {
    /// Morphisms sending `c1` to `c2`.
    pub fn between(&self, c1: usize, c2: usize) -> Vec<usize> {
        (0..self.morphisms.len())
            .filter(|&i| self.morphisms[i].map.get(&c1) == Some(&c2))
            .collect()
    }

    /// `second ∘ first`, when composable, as a morphism index.
    pub fn compose(&self, first: usize, second: usize) -> Option<usize> {
        let (f, g) = (&self.morphisms[first], &self.morphisms[second]);
        if f.target != g.source {
            return None;
        }
        let map: BTreeMap<usize, usize> = f.map.iter().map(|(&x, y)| (x, g.map[y])).collect();
        self.index.get(&map).copied()
    }

    pub fn identity(&self, object: usize) -> Option<usize> {
        self.morphisms.iter().position(|m| {
            m.source == object && m.target == object && m.map.iter().all(|(x, y)| x == y)
        })
    }
}

/// The cyclic cover `Z/m → Z/(m/n)`: `C` and `N` are oriented torsors with a
/// heap relation and a successor relation, `pr(c_i) = n_(i mod m/n)`, and
/// `deck_j(c_i) = c_(i + j·m/n)` for `j < n`. An optional named point becomes
/// the constant `e` on `N`.
pub fn build_torsor_cover(
    m: usize,
    n: usize,
    named_point: Option<usize>,
) -> Result<CoverStructure> {
    if m == 0 || n == 0 || !m.is_multiple_of(n) {
        return Err(Error::Precondition(format!("{n} does not divide {m}")));
    }
    let k = m / n;
    if let Some(p) = named_point {
        if p >= k {
            return Err(Error::UnknownElement(format!("n{p}")));
        }
    }
    let cs: Vec<String> = (0..m).map(|i| format!("c{i}")).collect();
    let ns: Vec<String> = (0..k).map(|i| format!("n{i}")).collect();
    let name = match named_point {
        Some(p) => format!("cover_m{m}_n{n}_e{p}"),
        None => format!("cover_m{m}_n{n}"),
    };
    let mut b = StructureBuilder::new(&name);
    b.sort("C", cs.iter().map(String::as_str))?;
    b.sort("N", ns.iter().map(String::as_str))?;
    add_heap(&mut b, "H_C", "C", &cs)?;
    add_successor(&mut b, "S_C", "C", &cs)?;
    add_heap(&mut b, "H_N", "N", &ns)?;
    add_successor(&mut b, "S_N", "N", &ns)?;
    for j in 0..n {
        let rows: Vec<Vec<&String>> = (0..m).map(|i| vec![&cs[i], &cs[(i + j * k) % m]]).collect();
        b.function_by_names(&format!("deck{j}"), &["C", "C"], &rows)?;
    }
    let rows: Vec<Vec<&String>> = (0..m).map(|i| vec![&cs[i], &ns[i % k]]).collect();
    b.function_by_names("pr", &["C", "N"], &rows)?;
    if let Some(p) = named_point {
        b.constant("e", "N", &ns[p])?;
    }
    CoverStructure::from_structure(b.build()?)
}

/// Every instance `(m, n, named?)` with `2 ≤ m ≤ max_m`, `n | m`, `n > 1`.
pub fn cyclic_family(max_m: usize) -> Vec<(usize, usize, Option<usize>)> {
    let mut out = Vec::new();
    for m in 2..=max_m {
        for n in (2..=m).filter(|n| m % n == 0) {
            out.push((m, n, None));
            out.push((m, n, Some(0)));
        }
    }
    out
}

pub fn family_sweep(max_m: usize, limits: &Limits) -> Vec<Result<MainTheoremReport>> {
    cyclic_family(max_m)
        .into_par_iter()
        .map(|(m, n, p)| build_torsor_cover(m, n, p)?.main_theorem_report(limits))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_over_two() {
        let cover = build_torsor_cover(4, 2, None).unwrap();
        assert_eq!(cover.aut.group().order(), 4);
        assert!(cover.validate().unwrap().passes());
        assert_eq!(cover.deck_group().unwrap().order(), 2);
        let seq = cover.exact_sequence(&Limits::default()).unwrap();
        assert_eq!(seq.kernel.order(), 2);
        assert_eq!(seq.base.group().order(), 2);
    }

    #[test]
    fn named_point_rigidifies_the_base() {
        let cover = build_torsor_cover(4, 2, Some(0)).unwrap();
        let seq = cover.exact_sequence(&Limits::default()).unwrap();
        assert!(seq.base.group().is_trivial());
    }

    #[test]
    fn proper_subgroup_of_the_deck_group_fails_c2() {
        let mut cover = build_torsor_cover(4, 2, None).unwrap();
        cover.gamma = PermGroup::trivial(4);
        assert!(!cover.validate().unwrap().c2);
        assert!(matches!(cover.deck_group(), Err(Error::C2Violation(_))));
    }

    #[test]
    fn groupoid_of_four_over_two() {
        let cover = build_torsor_cover(4, 2, None).unwrap();
        let g = cover.groupoid(&Limits::default()).unwrap();
        assert_eq!(g.morphisms.len(), 8);
        let id = g.identity(0).unwrap();
        assert_eq!(g.compose(id, id), Some(id));
    }

    #[test]
    fn trivial_cover_has_trivial_deck_group() {
        let cover = build_torsor_cover(3, 1, None).unwrap();
        assert!(cover.deck_group().unwrap().is_trivial());
    }
}
