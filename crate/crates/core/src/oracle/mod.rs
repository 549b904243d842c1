//! Semantic oracles for the coloring arguments behind the k = 2 and k = 3
//! cases: the per-class trichotomies, the k = 2 counting chain, the k = 3
//! partition bounds, and witness extraction for monochromatic disjoint
//! pairs. Everything here is computed by direct enumeration over concrete
//! colorings; nothing depends on the CNF or proof machinery, so these
//! functions double as independent cross-checks for the rest of the crate.

pub mod k2;
pub mod k3;

use crate::error::{Error, Result};
use crate::numbering::Coloring;
use crate::subsets::KSubset;

/// The three per-class alternatives shared by the k = 2 and k = 3 analyses.
/// When several hold, reports prefer DisjointPair, then CommonElement, then
/// Small, for determinism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Alternative {
    DisjointPair(KSubset, KSubset),
    CommonElement(u32),
    Small,
}

impl Alternative {
    pub fn kind(&self) -> &'static str {
        match self {
            Alternative::DisjointPair(..) => "disjoint-pair",
            Alternative::CommonElement(_) => "common-element",
            Alternative::Small => "small",
        }
    }
}

/// First disjoint co-colored pair in a family, scanning in colex order.
pub fn disjoint_pair(family: &[KSubset]) -> Option<(KSubset, KSubset)> {
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            if a.disjoint(b) {
                return Some((a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Smallest element common to every member of a nonempty family.
pub fn common_element(family: &[KSubset]) -> Option<u32> {
    let first = family.first()?;
    first
        .elements()
        .iter()
        .copied()
        .find(|&x| family.iter().all(|s| s.contains(x)))
}

/// A verified monochromatic disjoint pair of a total coloring with
/// colors = n - 2k + 1, k <= 3. One always exists; failing to find one
/// signals a bug, not bad input.
pub fn find_mono_disjoint(coloring: &Coloring) -> Result<(KSubset, KSubset, u32)> {
    if coloring.k < 1 || coloring.k > 3 {
        return Err(Error::invalid("witness extraction supports k in {1,2,3}"));
    }
    if coloring.colors != coloring.n - 2 * coloring.k + 1 {
        return Err(Error::invalid(format!(
            "expected colors = n - 2k + 1 = {}, got {}",
            coloring.n - 2 * coloring.k + 1,
            coloring.colors
        )));
    }
    let sets = coloring.sets()?;
    for color in 1..=coloring.colors {
        let class = coloring.class(&sets, color);
        if let Some((a, b)) = disjoint_pair(&class) {
            return Ok((a, b, color));
        }
    }
    Err(Error::Inconsistency(format!(
        "no monochromatic disjoint pair in a (n={}, k={}) coloring with {} colors",
        coloring.n, coloring.k, coloring.colors
    )))
}

/// Check a claimed witness against a coloring.
pub fn verify_witness(
    coloring: &Coloring,
    a: &KSubset,
    b: &KSubset,
    color: u32,
) -> Result<bool> {
    let sets = coloring.sets()?;
    let class = coloring.class(&sets, color);
    Ok(a.disjoint(b) && class.contains(a) && class.contains(b))
}
