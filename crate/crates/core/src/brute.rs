//! Exhaustive truth-table satisfiability check, usable as an independent
//! oracle against solver results and proof checking on small instances.

use crate::cnf::Cnf;
use crate::error::{Error, Result};

const MAX_BRUTE_VARS: u32 = 28;

/// True iff the instance has no satisfying assignment. Only for instances
/// with at most 28 variables.
pub fn is_unsat_brute(cnf: &Cnf) -> Result<bool> {
    let vars = cnf.var_count()?;
    brute_clauses(vars, &clause_masks(cnf)).map(|model| model.is_none())
}

/// Returns a satisfying assignment (bitmask over vars, bit i = var i+1) or
/// None when unsatisfiable.
pub fn brute_model(cnf: &Cnf) -> Result<Option<u64>> {
    let vars = cnf.var_count()?;
    brute_clauses(vars, &clause_masks(cnf))
}

fn clause_masks(cnf: &Cnf) -> Vec<(u64, u64)> {
    cnf.clauses
        .iter()
        .map(|c| {
            let mut pos = 0u64;
            let mut neg = 0u64;
            for l in c.literals() {
                let bit = 1u64 << (l.var - 1);
                if l.positive {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect()
}

fn brute_clauses(vars: u32, masks: &[(u64, u64)]) -> Result<Option<u64>> {
    if vars > MAX_BRUTE_VARS {
        return Err(Error::invalid(format!(
            "brute force limited to {MAX_BRUTE_VARS} variables, instance has {vars}"
        )));
    }
    'outer: for assign in 0..(1u64 << vars) {
        for &(pos, neg) in masks {
            if (pos & assign) == 0 && (neg & !assign) == 0 {
                continue 'outer;
            }
        }
        return Ok(Some(assign));
    }
    Ok(None)
}

/// Truth-table unsatisfiability of a bare clause list (used to cross-check
/// proof checker soundness).
pub fn clauses_unsat_brute(vars: u32, clauses: &[crate::cnf::Clause]) -> Result<bool> {
    let masks: Vec<(u64, u64)> = clauses
        .iter()
        .map(|c| {
            let mut pos = 0u64;
            let mut neg = 0u64;
            for l in c.literals() {
                let bit = 1u64 << (l.var - 1);
                if l.positive {
                    pos |= bit;
                } else {
                    neg |= bit;
                }
            }
            (pos, neg)
        })
        .collect();
    brute_clauses(vars, &masks).map(|m| m.is_none())
}
