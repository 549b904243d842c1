//! Workbench for the Kneser-Lovasz propositional formula family: instance
//! generation, substitution reductions between parameter levels, resolution
//! refutation checking and transport, counting circuits, and the semantic
//! oracles behind the k = 2 and k = 3 coloring arguments.

pub mod brute;
pub mod cdcl;
pub mod cnf;
pub mod counting;
pub mod dimacs;
pub mod error;
pub mod harness;
pub mod numbering;
pub mod oracle;
pub mod proof;
pub mod subsets;
pub mod subst;

pub use cnf::{gen_cnf, Clause, Cnf, Lit, Variant};
pub use error::{Error, Result};
pub use numbering::{Coloring, Domain, Numbering, VarId};
pub use subsets::{binomial, colex_unrank, enum_ksubsets, enum_stable, KSubset};
