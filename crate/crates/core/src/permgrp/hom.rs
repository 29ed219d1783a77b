use std::collections::HashMap;

use super::group::PermGroup;
use super::perm::Perm;
use crate::error::{Error, Result};

/// A homomorphism between permutation groups, given by the images of the
/// source generators and verified on the whole source group.
#[derive(Clone, Debug)]
pub struct GroupHom {
    source: PermGroup,
    target: PermGroup,
    images: Vec<Perm>,
    table: HashMap<Perm, Perm>,
}

impl GroupHom {
    /// Verifies that `source.generators()[i] ↦ images[i]` extends to a
    /// homomorphism into `target`. Sources larger than `bound` are rejected.
    ///
    /// The check walks the Cayley graph of the source from the identity: every
    /// element receives the image of the word that first reaches it, and every
    /// edge `x → s∘x` must satisfy `φ(s∘x) = φ(s)∘φ(x)`.
    pub fn new(
        source: PermGroup,
        target: PermGroup,
        images: Vec<Perm>,
        bound: usize,
    ) -> Result<GroupHom> {
        if images.len() != source.generators().len() {
            return Err(Error::NotAHomomorphism(format!(
                "{} generator images supplied for {} generators",
                images.len(),
                source.generators().len()
            )));
        }
        let order = source.order();
        if order > bound as u128 {
            return Err(Error::BoundExceeded { order, bound });
        }
        for img in &images {
            if img.degree() != target.degree() || !target.contains(img) {
                return Err(Error::NotAHomomorphism(
                    "a generator image lies outside the target group".into(),
                ));
            }
        }
        let id_s = Perm::identity(source.degree());
        let id_t = Perm::identity(target.degree());
        let mut table: HashMap<Perm, Perm> = HashMap::with_capacity(order as usize);
        table.insert(id_s.clone(), id_t);
        let mut queue = vec![id_s];
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i].clone();
            let fx = table[&x].clone();
            for (s, fs) in source.generators().iter().zip(&images) {
                let y = s.compose(&x);
                let fy = fs.compose(&fx);
                match table.get(&y) {
                    Some(existing) if *existing != fy => {
                        return Err(Error::NotAHomomorphism(format!(
                            "element {y:?} receives two different images"
                        )));
                    }
                    Some(_) => {}
                    None => {
                        table.insert(y.clone(), fy);
                        queue.push(y);
                    }
                }
            }
            i += 1;
        }
        Ok(GroupHom {
            source,
            target,
            images,
            table,
        })
    }

    /// The homomorphism `σ ↦ f(σ)` for a map already known to be a
    /// homomorphism on all of `source` (e.g. a restriction map).
    pub fn from_fn(
        source: PermGroup,
        target: PermGroup,
        bound: usize,
        f: impl Fn(&Perm) -> Result<Perm>,
    ) -> Result<GroupHom> {
        let images = source
            .generators()
            .iter()
            .map(&f)
            .collect::<Result<Vec<_>>>()?;
        GroupHom::new(source, target, images, bound)
    }

    pub fn source(&self) -> &PermGroup {
        &self.source
    }

    pub fn target(&self) -> &PermGroup {
        &self.target
    }

    pub fn generator_images(&self) -> &[Perm] {
        &self.images
    }

    pub fn apply(&self, x: &Perm) -> Option<&Perm> {
        self.table.get(x)
    }

    /// Source elements paired with their images, in a deterministic order.
    pub fn table(&self) -> Vec<(Perm, Perm)> {
        let mut rows: Vec<(Perm, Perm)> = self
            .table
            .iter()
            .map(|(a, b)| (a.clone(), b.clone()))
            .collect();
        rows.sort();
        rows
    }

    pub fn kernel(&self) -> PermGroup {
        let kernel_elements = self
            .table
            .iter()
            .filter(|(_, img)| img.is_identity())
            .map(|(x, _)| x.clone());
        let mut sorted: Vec<Perm> = kernel_elements.collect();
        sorted.sort();
        PermGroup::from_elements(self.source.degree(), sorted).unwrap()
    }

    pub fn image(&self) -> PermGroup {
        PermGroup::from_generators(self.target.degree(), self.images.clone()).unwrap()
    }

    pub fn is_surjective(&self) -> bool {
        self.image().same_group(&self.target)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_trivial()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cyclic(n: usize) -> PermGroup {
        let images = (0..n).map(|x| (x + 1) % n).collect();
        PermGroup::from_generators(n, vec![Perm::from_images(images).unwrap()]).unwrap()
    }

    #[test]
    fn reduction_mod_two() {
        let z4 = cyclic(4);
        let z2 = cyclic(2);
        let gen_image = z2.generators()[0].clone();
        let h = GroupHom::new(z4.clone(), z2, vec![gen_image], 2000).unwrap();
        assert_eq!(h.kernel().order(), 2);
        assert!(h.is_surjective());
        assert!(h.kernel().is_normal_in(&z4));
        assert_eq!(h.kernel().order() * h.image().order(), z4.order());
    }

    #[test]
    fn rejects_non_homomorphism() {
        // Z/2 -> Z/4 sending the generator to a generator of order 4.
        let z2 = cyclic(2);
        let z4 = cyclic(4);
        let g = z4.generators()[0].clone();
        assert!(matches!(
            GroupHom::new(z2, z4, vec![g], 2000),
            Err(Error::NotAHomomorphism(_))
        ));
    }

    #[test]
    fn rejects_large_sources() {
        let s = PermGroup::symmetric(7);
        let t = PermGroup::trivial(1);
        let images = vec![Perm::identity(1); s.generators().len()];
        assert!(matches!(
            GroupHom::new(s, t, images, 2000),
            Err(Error::BoundExceeded { .. })
        ));
    }
}
