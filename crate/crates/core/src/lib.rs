//! Combinatorics of regular directed complexes: oriented graded posets,
//! molecules, morphisms and their factorisations, shape constructions,
//! and finite (marked, inflate, merge) directed complexes.

pub mod complex;
pub mod construct;
pub mod corpus;
pub mod iso;
pub mod molecule;
pub mod morphism;
pub mod ogposet;
