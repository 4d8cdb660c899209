//! Executable reductions to two-variable, single-letter fragments of
//! quantified modal and intuitionistic logics, together with the finite
//! Kripke model checking and bounded model search that verify them.

pub mod formula;
pub mod int;
pub mod kripke;
pub mod modal;
pub mod search;
pub mod suites;
