use std::collections::{BTreeSet, HashMap, HashSet};

use super::chain::StabChain;
use super::perm::Perm;
use crate::error::{Error, Result};

/// A permutation group on `{0, .., degree-1}` given by generators, with an
/// eagerly built stabilizer chain.
#[derive(Clone, Debug)]
pub struct PermGroup {
    degree: usize,
    gens: Vec<Perm>,
    chain: StabChain,
}

impl PermGroup {
    pub fn trivial(degree: usize) -> PermGroup {
        PermGroup {
            degree,
            gens: Vec::new(),
            chain: StabChain::build(degree, &[], &[]),
        }
    }

    /// Group closure of `gens`. Identity generators are dropped.
    pub fn from_generators(degree: usize, gens: Vec<Perm>) -> Result<PermGroup> {
        for g in &gens {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
        }
        let gens: Vec<Perm> = gens.into_iter().filter(|g| !g.is_identity()).collect();
        let chain = StabChain::build(degree, &gens, &[]);
        Ok(PermGroup {
            degree,
            gens,
            chain,
        })
    }

    /// Like `from_generators` but keeps only generators that enlarge the group.
    pub fn from_elements(
        degree: usize,
        elements: impl IntoIterator<Item = Perm>,
    ) -> Result<PermGroup> {
        let mut group = PermGroup::trivial(degree);
        for g in elements {
            if g.degree() != degree {
                return Err(Error::DegreeMismatch {
                    expected: degree,
                    found: g.degree(),
                });
            }
            if !group.contains(&g) {
                let mut gens = group.gens.clone();
                gens.push(g);
                group = PermGroup::from_generators(degree, gens)?;
            }
        }
        Ok(group)
    }

    pub fn symmetric(degree: usize) -> PermGroup {
        let mut gens = Vec::new();
        if degree >= 2 {
            gens.push(Perm::from_cycles(degree, &[vec![0, 1]]).unwrap());
            gens.push(Perm::from_cycles(degree, &[(0..degree).collect()]).unwrap());
        }
        PermGroup::from_generators(degree, gens).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn generators(&self) -> &[Perm] {
        &self.gens
    }

    pub fn order(&self) -> u128 {
        self.chain.order()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn base(&self) -> Vec<usize> {
        self.chain.levels.iter().map(|l| l.base).collect()
    }

    pub fn contains(&self, g: &Perm) -> bool {
        self.chain.contains(g)
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.gens.iter().all(|g| other.contains(g))
    }

    /// Equality as sets of permutations.
    pub fn same_group(&self, other: &PermGroup) -> bool {
        self.order() == other.order() && self.is_subgroup_of(other)
    }

    pub fn elements(&self, bound: usize) -> Result<Vec<Perm>> {
        let order = self.order();
        if order > bound as u128 {
            return Err(Error::BoundExceeded { order, bound });
        }
        Ok(self.chain.elements())
    }

    fn check_points(&self, points: impl IntoIterator<Item = usize>) -> Result<()> {
        for p in points {
            if p >= self.degree {
                return Err(Error::PointOutOfRange {
                    point: p,
                    degree: self.degree,
                });
            }
        }
        Ok(())
    }

    pub fn point_orbit(&self, p: usize) -> Result<Vec<usize>> {
        self.check_points([p])?;
        let mut seen = vec![false; self.degree];
        seen[p] = true;
        let mut orbit = vec![p];
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for g in &self.gens {
                let y = g.apply(x);
                if !seen[y] {
                    seen[y] = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        Ok(orbit)
    }

    /// Orbits on points, each sorted, in order of smallest element.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.degree];
        let mut out = Vec::new();
        for p in 0..self.degree {
            if !seen[p] {
                let orbit = self.point_orbit(p).unwrap();
                for &x in &orbit {
                    seen[x] = true;
                }
                out.push(orbit);
            }
        }
        out
    }

    /// The orbit of a tuple under the coordinatewise action.
    pub fn orbit(&self, tuple: &[usize]) -> Result<BTreeSet<Vec<usize>>> {
        self.check_points(tuple.iter().copied())?;
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        let mut queue = vec![tuple.to_vec()];
        seen.insert(tuple.to_vec());
        while let Some(t) = queue.pop() {
            for g in &self.gens {
                let u = g.apply_tuple(&t);
                if seen.insert(u.clone()) {
                    queue.push(u);
                }
            }
        }
        Ok(seen)
    }

    /// `{σ ∈ G : σ(a) = a for all a ∈ points}`, by rebuilding the chain with
    /// `points` as base prefix.
    pub fn pointwise_stabilizer(&self, points: &[usize]) -> Result<PermGroup> {
        self.check_points(points.iter().copied())?;
        let prefix: Vec<usize> = points
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let chain = StabChain::build(self.degree, &self.gens, &prefix);
        let gens = chain.stabilizer_gens(prefix.len());
        PermGroup::from_generators(self.degree, gens)
    }

    /// `{σ ∈ G : σ(B) = B}` by backtracking over the chain with base prefix `B`.
    pub fn setwise_stabilizer(&self, set: &[usize]) -> Result<PermGroup> {
        self.check_points(set.iter().copied())?;
        let prefix: Vec<usize> = set
            .iter()
            .copied()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut inside = vec![false; self.degree];
        for &b in &prefix {
            inside[b] = true;
        }
        let chain = StabChain::build(self.degree, &self.gens, &prefix);
        let mut result =
            PermGroup::from_generators(self.degree, chain.stabilizer_gens(prefix.len()))?;
        let mut found = Vec::new();
        backtrack(
            &chain,
            prefix.len(),
            &mut |level, image| inside[image] && level < prefix.len(),
            &mut |p| {
                found.push(p.clone());
                true
            },
        );
        for p in found {
            if !result.contains(&p) {
                let mut gens = result.gens.clone();
                gens.push(p);
                result = PermGroup::from_generators(self.degree, gens)?;
            }
        }
        Ok(result)
    }

    /// Some `σ ∈ G` with `σ(from[i]) = to[i]` for all `i`, if one exists.
    pub fn transporter(&self, from: &[usize], to: &[usize]) -> Result<Option<Perm>> {
        self.check_points(from.iter().chain(to).copied())?;
        if from.len() != to.len() {
            return Ok(None);
        }
        let mut target: HashMap<usize, usize> = HashMap::new();
        for (&a, &b) in from.iter().zip(to) {
            if let Some(&old) = target.get(&a) {
                if old != b {
                    return Ok(None);
                }
            }
            target.insert(a, b);
        }
        let mut prefix: Vec<usize> = Vec::new();
        for &a in from {
            if !prefix.contains(&a) {
                prefix.push(a);
            }
        }
        let chain = StabChain::build(self.degree, &self.gens, &prefix);
        let mut hit = None;
        backtrack(
            &chain,
            prefix.len(),
            &mut |level, image| level < prefix.len() && target[&prefix[level]] == image,
            &mut |p| {
                hit = Some(p.clone());
                false
            },
        );
        Ok(hit)
    }

    pub fn is_normal_in(&self, g: &PermGroup) -> bool {
        self.is_subgroup_of(g)
            && g.gens
                .iter()
                .all(|x| self.gens.iter().all(|h| self.contains(&h.conjugate_by(x))))
    }

    pub fn join(&self, other: &PermGroup) -> Result<PermGroup> {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().filter(|g| !self.contains(g)).cloned());
        PermGroup::from_generators(self.degree, gens)
    }

    pub fn conjugate(&self, by: &Perm) -> PermGroup {
        let gens = self.gens.iter().map(|g| g.conjugate_by(by)).collect();
        PermGroup::from_generators(self.degree, gens).unwrap()
    }

    /// The image of the action on an invariant point subset, in local indices.
    pub fn restrict(&self, points: &[usize]) -> Result<PermGroup> {
        let gens = self
            .gens
            .iter()
            .map(|g| g.restrict(points))
            .collect::<Result<Vec<_>>>()?;
        PermGroup::from_generators(points.len(), gens)
    }

    /// All subgroups, as sorted lists of indices into `elements`.
    pub fn all_subgroups(&self, bound: usize) -> Result<(Vec<Perm>, Vec<BTreeSet<usize>>)> {
        let elements = self.elements(bound)?;
        let index: HashMap<&Perm, usize> =
            elements.iter().enumerate().map(|(i, p)| (p, i)).collect();
        let closure = |seed: &BTreeSet<usize>| -> BTreeSet<usize> {
            let mut set = seed.clone();
            set.insert(index[&Perm::identity(self.degree)]);
            loop {
                let current: Vec<usize> = set.iter().copied().collect();
                let mut grew = false;
                for &a in &current {
                    for &b in &current {
                        let c = index[&elements[a].compose(&elements[b])];
                        if set.insert(c) {
                            grew = true;
                        }
                    }
                }
                if !grew {
                    return set;
                }
            }
        };
        let mut subgroups: HashSet<BTreeSet<usize>> = HashSet::new();
        let cyclic: Vec<BTreeSet<usize>> = (0..elements.len())
            .map(|i| closure(&BTreeSet::from([i])))
            .collect();
        let mut frontier: Vec<BTreeSet<usize>> = Vec::new();
        for c in &cyclic {
            if subgroups.insert(c.clone()) {
                frontier.push(c.clone());
            }
        }
        while let Some(h) = frontier.pop() {
            for c in &cyclic {
                if c.is_subset(&h) {
                    continue;
                }
                let joined = closure(&h.union(c).copied().collect());
                if subgroups.insert(joined.clone()) {
                    frontier.push(joined);
                }
            }
        }
        let mut list: Vec<BTreeSet<usize>> = subgroups.into_iter().collect();
        list.sort_by(|a, b| a.len().cmp(&b.len()).then(a.cmp(b)));
        Ok((elements, list))
    }
}

/// Depth-first search over chain transversals. At level `i` the candidate
/// prefix product `u_0 ∘ … ∘ u_i` maps base point `b_i` to `image`;
/// `prune(i, image)` keeps the branch. A branch that survives `depth` levels is
/// passed to `visit`, which returns `false` to stop the search.
pub(crate) fn backtrack(
    chain: &StabChain,
    depth: usize,
    prune: &mut dyn FnMut(usize, usize) -> bool,
    visit: &mut dyn FnMut(&Perm) -> bool,
) {
    fn go(
        chain: &StabChain,
        depth: usize,
        level: usize,
        prefix: &Perm,
        prune: &mut dyn FnMut(usize, usize) -> bool,
        visit: &mut dyn FnMut(&Perm) -> bool,
    ) -> bool {
        if level == depth {
            return visit(prefix);
        }
        let l = &chain.levels[level];
        for &p in &l.orbit {
            let u = l.transversal[p].as_ref().unwrap();
            let candidate = prefix.compose(u);
            if !prune(level, candidate.apply(l.base)) {
                continue;
            }
            if !go(chain, depth, level + 1, &candidate, prune, visit) {
                return false;
            }
        }
        true
    }
    let depth = depth.min(chain.levels.len());
    go(chain, depth, 0, &Perm::identity(chain.degree), prune, visit);
}
