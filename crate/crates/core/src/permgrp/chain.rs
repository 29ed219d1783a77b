//! Stabilizer chains (base and strong generating set) built with the
//! deterministic Schreier–Sims procedure.

use super::perm::Perm;

#[derive(Clone, Debug)]
pub(crate) struct Level {
    pub base: usize,
    /// Strong generators fixing every earlier base point.
    pub gens: Vec<Perm>,
    /// `transversal[p]` maps the base point to `p`, for `p` in the basic orbit.
    pub transversal: Vec<Option<Perm>>,
    pub orbit: Vec<usize>,
}

impl Level {
    fn new(base: usize, degree: usize) -> Level {
        let mut transversal = vec![None; degree];
        transversal[base] = Some(Perm::identity(degree));
        Level {
            base,
            gens: Vec::new(),
            transversal,
            orbit: vec![base],
        }
    }

    fn recompute_orbit(&mut self) {
        let degree = self.transversal.len();
        self.transversal.iter_mut().for_each(|t| *t = None);
        self.transversal[self.base] = Some(Perm::identity(degree));
        self.orbit.clear();
        self.orbit.push(self.base);
        let mut i = 0;
        while i < self.orbit.len() {
            let p = self.orbit[i];
            for s in &self.gens {
                let q = s.apply(p);
                if self.transversal[q].is_none() {
                    let u = s.compose(self.transversal[p].as_ref().unwrap());
                    self.transversal[q] = Some(u);
                    self.orbit.push(q);
                }
            }
            i += 1;
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct StabChain {
    pub degree: usize,
    pub levels: Vec<Level>,
}

impl StabChain {
    /// Builds a chain whose base starts with `base_prefix` (in that order).
    pub fn build(degree: usize, gens: &[Perm], base_prefix: &[usize]) -> StabChain {
        let mut chain = StabChain {
            degree,
            levels: base_prefix.iter().map(|&b| Level::new(b, degree)).collect(),
        };
        for g in gens {
            let (residue, _) = chain.sift(g.clone(), 0);
            if !residue.is_identity() {
                chain.insert(0, residue);
            }
        }
        chain
    }

    /// Strips `h` through the levels starting at `from`; returns the residue
    /// and the level at which stripping stopped.
    pub fn sift(&self, mut h: Perm, from: usize) -> (Perm, usize) {
        for (j, level) in self.levels.iter().enumerate().skip(from) {
            let p = h.apply(level.base);
            match &level.transversal[p] {
                Some(u) => h = u.inverse().compose(&h),
                None => return (h, j),
            }
        }
        let n = self.levels.len();
        (h, n)
    }

    pub fn contains(&self, g: &Perm) -> bool {
        g.degree() == self.degree && self.sift(g.clone(), 0).0.is_identity()
    }

    fn insert(&mut self, start: usize, g: Perm) {
        let mut j = start;
        while j < self.levels.len() && g.fixes(self.levels[j].base) {
            j += 1;
        }
        if j == self.levels.len() {
            let b = g
                .first_moved()
                .expect("inserted element is not the identity");
            self.levels.push(Level::new(b, self.degree));
        }
        for i in start..=j {
            self.levels[i].gens.push(g.clone());
        }
        for i in (start..=j).rev() {
            self.update_level(i);
        }
    }

    fn update_level(&mut self, i: usize) {
        self.levels[i].recompute_orbit();
        let orbit = self.levels[i].orbit.clone();
        let ngens = self.levels[i].gens.len();
        for &p in &orbit {
            for s in 0..ngens {
                let level = &self.levels[i];
                let gen = &level.gens[s];
                let q = gen.apply(p);
                let up = level.transversal[p].as_ref().unwrap();
                let uq = level.transversal[q].as_ref().unwrap();
                let schreier = uq.inverse().compose(gen).compose(up);
                if schreier.is_identity() {
                    continue;
                }
                let (residue, _) = self.sift(schreier, i + 1);
                if !residue.is_identity() {
                    self.insert(i + 1, residue);
                }
            }
        }
    }

    pub fn order(&self) -> u128 {
        self.levels
            .iter()
            .fold(1u128, |acc, l| acc.saturating_mul(l.orbit.len() as u128))
    }

    /// Strong generators fixing the first `depth` base points.
    pub fn stabilizer_gens(&self, depth: usize) -> Vec<Perm> {
        self.levels
            .get(depth)
            .map(|l| l.gens.clone())
            .unwrap_or_default()
    }

    /// All group elements, as products `u_0 ∘ u_1 ∘ … ∘ u_k` of transversal elements.
    pub fn elements(&self) -> Vec<Perm> {
        let mut out = vec![Perm::identity(self.degree)];
        for level in self.levels.iter().rev() {
            let mut next = Vec::with_capacity(out.len() * level.orbit.len());
            for &p in &level.orbit {
                let u = level.transversal[p].as_ref().unwrap();
                for g in &out {
                    next.push(u.compose(g));
                }
            }
            out = next;
        }
        out
    }
}
