//! Finite many-sorted structures and first-order formulas over them.

mod formula;
mod lexer;
mod parse;
mod structure;

pub use formula::{
    comprehension_set, defined_set, defined_set_with, eval_formula, for_each_tuple,
    parse_comprehension, parse_formula, CheckedFormula, Comprehension, DefinableSet, Formula,
    Provenance, Term,
};
pub use structure::{Constant, RelId, Relation, Sort, SortId, Structure, StructureBuilder};
