/// Search and enumeration limits shared by the higher-level operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest arity of user-facing imaginary sorts.
    pub kmax: usize,
    /// Largest group order that may be enumerated element by element.
    pub max_group_order: usize,
    /// Largest carrier for the pre-morphism equivalence search.
    pub max_equivalence_carrier: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            kmax: 3,
            max_group_order: 2000,
            max_equivalence_carrier: 64,
        }
    }
}
