//! The variable-numbering contract shared by all generators:
//! `id = rank(subset) * colors + color`, with rank taken 0-based within the
//! instance's domain enumeration (all k-subsets, or the stable ones only)
//! and colors in [1, colors]. Ids are dense in [1, colors * |domain|].

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::subsets::{enum_ksubsets, enum_stable, KSubset};

/// Which sets carry variables in an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    All,
    Stable,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::All => write!(f, "all"),
            Domain::Stable => write!(f, "stable"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarId {
    pub subset: KSubset,
    pub color: u32,
    pub id: u32,
}

/// Dense bijection between (subset, color) pairs and variable ids.
#[derive(Debug, Clone)]
pub struct Numbering {
    pub n: u32,
    pub k: u32,
    pub colors: u32,
    pub domain: Domain,
    sets: Vec<KSubset>,
    rank_of: HashMap<Vec<u32>, u32>,
}

impl Numbering {
    pub fn new(n: u32, k: u32, colors: u32, domain: Domain) -> Result<Self> {
        if colors < 1 {
            return Err(Error::invalid("colors must be >= 1"));
        }
        let sets = match domain {
            Domain::All => enum_ksubsets(n, k)?,
            Domain::Stable => enum_stable(n, k)?,
        };
        let rank_of = sets
            .iter()
            .enumerate()
            .map(|(i, s)| (s.elements().to_vec(), i as u32))
            .collect();
        Ok(Numbering {
            n,
            k,
            colors,
            domain,
            sets,
            rank_of,
        })
    }

    pub fn sets(&self) -> &[KSubset] {
        &self.sets
    }

    pub fn var_count(&self) -> u32 {
        self.colors * self.sets.len() as u32
    }

    pub fn rank(&self, subset: &KSubset) -> Result<u32> {
        self.rank_of
            .get(subset.elements())
            .copied()
            .ok_or_else(|| {
                Error::Contract(format!(
                    "subset {:?} not in the {} domain of ({}, {})",
                    subset.elements(),
                    self.domain,
                    self.n,
                    self.k
                ))
            })
    }

    pub fn id(&self, subset: &KSubset, color: u32) -> Result<u32> {
        if color < 1 || color > self.colors {
            return Err(Error::Contract(format!(
                "color {color} out of [1, {}]",
                self.colors
            )));
        }
        Ok(self.rank(subset)? * self.colors + color)
    }

    pub fn var(&self, subset: &KSubset, color: u32) -> Result<VarId> {
        Ok(VarId {
            id: self.id(subset, color)?,
            subset: subset.clone(),
            color,
        })
    }

    /// Inverse of `id`: recover (subset, color) from a variable id.
    pub fn decode(&self, id: u32) -> Result<(&KSubset, u32)> {
        if id < 1 || id > self.var_count() {
            return Err(Error::Contract(format!(
                "variable id {id} out of [1, {}]",
                self.var_count()
            )));
        }
        let zero = id - 1;
        let rank = zero / self.colors;
        let color = zero % self.colors + 1;
        Ok((&self.sets[rank as usize], color))
    }
}

/// A total color assignment over an instance domain, functional by
/// construction (each set gets exactly one color).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    pub n: u32,
    pub k: u32,
    pub colors: u32,
    pub domain: Domain,
    /// color of the set at each domain position, values in [1, colors]
    pub assignment: Vec<u32>,
}

impl Coloring {
    pub fn new(n: u32, k: u32, colors: u32, domain: Domain, assignment: Vec<u32>) -> Result<Self> {
        let numbering = Numbering::new(n, k, colors, domain)?;
        if assignment.len() != numbering.sets().len() {
            return Err(Error::invalid(format!(
                "assignment must be total: expected {} entries, got {}",
                numbering.sets().len(),
                assignment.len()
            )));
        }
        if assignment.iter().any(|&c| c < 1 || c > colors) {
            return Err(Error::invalid("assignment values must lie in [1, colors]"));
        }
        Ok(Coloring {
            n,
            k,
            colors,
            domain,
            assignment,
        })
    }

    pub fn random(
        n: u32,
        k: u32,
        colors: u32,
        domain: Domain,
        rng: &mut impl rand::Rng,
    ) -> Result<Self> {
        let numbering = Numbering::new(n, k, colors, domain)?;
        let assignment = (0..numbering.sets().len())
            .map(|_| rng.random_range(1..=colors))
            .collect();
        Coloring::new(n, k, colors, domain, assignment)
    }

    /// Domain sets, colex-ordered, aligned with `assignment`.
    pub fn sets(&self) -> Result<Vec<KSubset>> {
        Ok(Numbering::new(self.n, self.k, self.colors, self.domain)?
            .sets()
            .to_vec())
    }

    /// The sets of one color class.
    pub fn class(&self, sets: &[KSubset], color: u32) -> Vec<KSubset> {
        sets.iter()
            .zip(&self.assignment)
            .filter(|(_, &c)| c == color)
            .map(|(s, _)| s.clone())
            .collect()
    }
}
