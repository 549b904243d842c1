//! Variable substitutions between adjacent parameter levels: a total map
//! from the variables of the (k+1, n) instance onto those of the (k, n-2)
//! instance that carries the clause set of the former exactly onto the
//! clause set of the latter (with multiplicity), for both the Kneser and
//! Schrijver families. Color indices are always preserved.

use std::collections::HashMap;
use std::fmt;

use crate::cnf::{gen_cnf, Clause, Cnf, Lit, Variant};
use crate::error::{Error, Result};
use crate::numbering::Numbering;
use crate::subsets::KSubset;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceDesc {
    pub variant: Variant,
    pub n: u32,
    pub k: u32,
}

impl InstanceDesc {
    pub fn colors(&self) -> u32 {
        self.n - 2 * self.k + 1
    }

    pub fn numbering(&self) -> Result<Numbering> {
        Numbering::new(self.n, self.k, self.colors(), self.variant.domain())
    }
}

impl fmt::Display for InstanceDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({},{})", self.variant, self.k, self.n)
    }
}

#[derive(Debug, Clone)]
pub struct Substitution {
    pub source: InstanceDesc,
    pub target: InstanceDesc,
    /// map[id] = image id, 1-based; map[0] unused
    map: Vec<u32>,
}

impl Substitution {
    pub fn identity(desc: InstanceDesc) -> Result<Substitution> {
        let vars = desc.numbering()?.var_count();
        Ok(Substitution {
            source: desc,
            target: desc,
            map: (0..=vars).collect(),
        })
    }

    pub fn image_var(&self, id: u32) -> Result<u32> {
        self.map
            .get(id as usize)
            .copied()
            .filter(|_| id >= 1)
            .ok_or_else(|| {
                Error::Contract(format!(
                    "variable {id} outside the domain of the substitution {} -> {}",
                    self.source, self.target
                ))
            })
    }

    pub fn image_lit(&self, lit: Lit) -> Result<Lit> {
        Ok(Lit {
            var: self.image_var(lit.var)?,
            positive: lit.positive,
        })
    }

    pub fn image_clause(&self, clause: &Clause) -> Result<Clause> {
        Ok(Clause::new(
            clause
                .literals()
                .iter()
                .map(|&l| self.image_lit(l))
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn source_var_count(&self) -> u32 {
        (self.map.len() - 1) as u32
    }

    /// Two-column export: "source-id target-id" per line.
    pub fn to_two_column(&self) -> String {
        let mut out = String::new();
        for id in 1..self.map.len() {
            out.push_str(&format!("{} {}\n", id, self.map[id]));
        }
        out
    }
}

/// Image of a (k+1)-subset of [n] under the level-lowering map: the k
/// smallest elements when they fit in [n-2]; otherwise the set contains both
/// n-1 and n, and they are replaced by the largest element of [n-2] missing
/// from the rest.
pub fn image_set(a: &KSubset, k: u32, n: u32) -> Result<KSubset> {
    debug_assert_eq!(a.k(), k + 1);
    let firsts: &[u32] = &a.elements()[..k as usize];
    let case1 = *firsts.last().unwrap() <= n - 2;
    let has_top_pair = a.contains(n - 1) && a.contains(n);
    // the two dispatch conditions are equivalent; assert both directions
    if case1 == has_top_pair {
        return Err(Error::Inconsistency(format!(
            "substitution dispatch disagrees on {:?}",
            a.elements()
        )));
    }
    if case1 {
        KSubset::new_unguarded(firsts.to_vec(), n - 2)
    } else {
        let p: Vec<u32> = a
            .elements()
            .iter()
            .copied()
            .filter(|&x| x != n - 1 && x != n)
            .collect();
        debug_assert_eq!(p.len() as u32, k - 1);
        let mut lambda = n - 2;
        while p.binary_search(&lambda).is_ok() {
            lambda -= 1;
        }
        let mut elements = p;
        elements.push(lambda);
        elements.sort_unstable();
        KSubset::new_unguarded(elements, n - 2)
    }
}

/// Build the substitution from the (k+1, n) instance onto the (k, n-2) one.
pub fn build_phi(k: u32, n: u32, variant: Variant) -> Result<Substitution> {
    if !matches!(variant, Variant::Kneser | Variant::Schrijver) {
        return Err(Error::invalid(
            "substitutions are defined for the kneser and schrijver variants",
        ));
    }
    if n < 2 * (k + 1) || n < 3 {
        return Err(Error::invalid(format!(
            "need n >= 2(k+1) and n >= 3, got n={n} k={k}"
        )));
    }
    let source = InstanceDesc {
        variant,
        n,
        k: k + 1,
    };
    let target = InstanceDesc {
        variant,
        n: n - 2,
        k,
    };
    let src_num = source.numbering()?;
    let tgt_num = target.numbering()?;
    debug_assert_eq!(source.colors(), target.colors());
    let colors = source.colors();
    let mut map = vec![0u32; src_num.var_count() as usize + 1];
    for a in src_num.sets() {
        let c = image_set(a, k, n)?;
        if variant == Variant::Schrijver && !c.is_stable() {
            return Err(Error::Inconsistency(format!(
                "image {:?} of stable {:?} is not stable",
                c.elements(),
                a.elements()
            )));
        }
        for i in 1..=colors {
            map[src_num.id(a, i)? as usize] = tgt_num.id(&c, i)?;
        }
    }
    Ok(Substitution {
        source,
        target,
        map,
    })
}

/// Apply the substitution clause-wise. Duplicate literals within a clause are
/// merged; with `dedupe`, duplicate clauses are collapsed keeping first
/// occurrences.
pub fn apply_to_cnf(phi: &Substitution, source_cnf: &Cnf, dedupe: bool) -> Result<Cnf> {
    if source_cnf.n != phi.source.n
        || source_cnf.k != phi.source.k
        || source_cnf.domain != phi.source.variant.domain()
    {
        return Err(Error::Contract(format!(
            "cnf ({}, {}) does not match the substitution source {}",
            source_cnf.k, source_cnf.n, phi.source
        )));
    }
    let mut clauses = Vec::with_capacity(source_cnf.clauses.len());
    for c in &source_cnf.clauses {
        clauses.push(phi.image_clause(c)?);
    }
    if dedupe {
        let mut seen = std::collections::HashSet::new();
        clauses.retain(|c| seen.insert(c.clone()));
    }
    Ok(Cnf {
        n: phi.target.n,
        k: phi.target.k,
        colors: phi.target.colors(),
        variant: phi.target.variant,
        domain: phi.target.variant.domain(),
        clauses,
    })
}

#[derive(Debug, Clone)]
pub struct ImageReport {
    pub source: InstanceDesc,
    pub target: InstanceDesc,
    pub image_matches_target: bool,
    pub ant_witnesses_ok: bool,
    pub cons_witnesses_ok: bool,
    pub max_multiplicity: usize,
    pub failures: Vec<String>,
}

impl ImageReport {
    pub fn pass(&self) -> bool {
        self.image_matches_target && self.ant_witnesses_ok && self.cons_witnesses_ok
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let verdict = |b: bool| if b { "pass" } else { "fail" };
        out.push_str(&format!(
            "verify-subst source={} target={} check=image-set-equality verdict={}\n",
            self.source,
            self.target,
            verdict(self.image_matches_target)
        ));
        out.push_str(&format!(
            "verify-subst source={} target={} check=ant-surjectivity verdict={}\n",
            self.source,
            self.target,
            verdict(self.ant_witnesses_ok)
        ));
        out.push_str(&format!(
            "verify-subst source={} target={} check=cons-surjectivity verdict={}\n",
            self.source,
            self.target,
            verdict(self.cons_witnesses_ok)
        ));
        out.push_str(&format!(
            "verify-subst source={} target={} max-multiplicity={}\n",
            self.source, self.target, self.max_multiplicity
        ));
        for f in &self.failures {
            out.push_str(&format!("verify-subst failure: {f}\n"));
        }
        out
    }
}

/// For a stable set C in [n-2] pick the element of {n-1, n} whose addition
/// keeps the lifted set stable in [n].
fn stable_lift_element(c: &KSubset, n: u32) -> u32 {
    if c.contains(n - 2) {
        n // n-1 would sit next to n-2; 1 is absent since C is stable
    } else {
        n - 1
    }
}

fn lift_set(c: &KSubset, extra: u32, n: u32) -> Result<KSubset> {
    let mut elements = c.elements().to_vec();
    elements.push(extra);
    elements.sort_unstable();
    KSubset::new_unguarded(elements, n)
}

/// Check that the substitution image is precisely the target instance:
/// (i) the deduplicated image clause set equals the target clause set,
/// (ii) every target Ant clause has an explicitly constructed preimage,
/// (iii) every target binary clause has a preimage pair, stable where the
/// variant requires it. First counterexamples are recorded, not raised.
pub fn verify_image(phi: &Substitution) -> Result<ImageReport> {
    let variant = phi.source.variant;
    let (_k, n) = (phi.target.k, phi.source.n);
    let source_cnf = gen_cnf(variant, phi.source.n, phi.source.k, None)?;
    let target_cnf = gen_cnf(variant, phi.target.n, phi.target.k, None)?;
    let mut failures = Vec::new();

    // (i) clause-set equality plus multiplicity accounting
    let mut image_count: HashMap<Clause, usize> = HashMap::new();
    for c in &source_cnf.clauses {
        *image_count.entry(phi.image_clause(c)?).or_insert(0) += 1;
    }
    let target_set: std::collections::HashSet<&Clause> = target_cnf.clauses.iter().collect();
    let mut image_matches_target = true;
    for c in image_count.keys() {
        if !target_set.contains(c) {
            image_matches_target = false;
            failures.push(format!("image clause {c} not in target instance"));
            break;
        }
    }
    for c in &target_cnf.clauses {
        if !image_count.contains_key(c) {
            image_matches_target = false;
            failures.push(format!("target clause {c} has no preimage clause"));
            break;
        }
    }
    let max_multiplicity = image_count.values().copied().max().unwrap_or(0);

    let src_num = phi.source.numbering()?;
    let tgt_num = phi.target.numbering()?;
    let colors = phi.target.colors();

    // (ii) Ant surjectivity witnesses
    let mut ant_witnesses_ok = true;
    for c in tgt_num.sets() {
        let extra = match variant {
            Variant::Schrijver => stable_lift_element(c, n),
            _ => n - 1,
        };
        let a = lift_set(c, extra, n)?;
        let ok = (variant != Variant::Schrijver || a.is_stable())
            && src_num.rank(&a).is_ok()
            && (1..=colors).all(|i| {
                matches!(
                    (src_num.id(&a, i), tgt_num.id(c, i)),
                    (Ok(src), Ok(tgt)) if phi.image_var(src).ok() == Some(tgt)
                )
            });
        if !ok {
            ant_witnesses_ok = false;
            failures.push(format!(
                "ant witness for {:?}: lift {:?} does not map back",
                c.elements(),
                a.elements()
            ));
            break;
        }
    }

    // (iii) binary-clause surjectivity witnesses
    let mut cons_witnesses_ok = true;
    'outer: for (i, c) in tgt_num.sets().iter().enumerate() {
        for d in &tgt_num.sets()[i + 1..] {
            if !c.disjoint(d) {
                continue;
            }
            // distribute n-1 and n so both lifted sets stay stable
            let (ea, eb) = match variant {
                Variant::Schrijver if c.contains(n - 2) || d.contains(1) => (n, n - 1),
                _ => (n - 1, n),
            };
            let a = lift_set(c, ea, n)?;
            let b = lift_set(d, eb, n)?;
            let ok = a.disjoint(&b)
                && (variant != Variant::Schrijver || (a.is_stable() && b.is_stable()))
                && src_num.rank(&a).is_ok()
                && src_num.rank(&b).is_ok()
                && (1..=colors).all(|col| {
                    let sa = src_num.id(&a, col).unwrap();
                    let sb = src_num.id(&b, col).unwrap();
                    phi.image_var(sa).ok() == tgt_num.id(c, col).ok()
                        && phi.image_var(sb).ok() == tgt_num.id(d, col).ok()
                });
            if !ok {
                cons_witnesses_ok = false;
                failures.push(format!(
                    "cons witness for ({:?}, {:?}): lifts ({:?}, {:?}) invalid",
                    c.elements(),
                    d.elements(),
                    a.elements(),
                    b.elements()
                ));
                break 'outer;
            }
        }
    }

    Ok(ImageReport {
        source: phi.source,
        target: phi.target,
        image_matches_target,
        ant_witnesses_ok,
        cons_witnesses_ok,
        max_multiplicity,
        failures,
    })
}

/// Compose the per-level substitutions from (k_top, n_top) all the way down
/// to k = 1, validating each step's precondition.
pub fn compose_phi(k_top: u32, n_top: u32, variant: Variant) -> Result<Substitution> {
    if k_top < 2 {
        return Err(Error::invalid("composition needs k_top >= 2"));
    }
    let mut n = n_top;
    let mut current: Option<Substitution> = None;
    for k in (1..k_top).rev() {
        let step = build_phi(k, n, variant)?;
        current = Some(match current {
            None => step,
            Some(prev) => {
                debug_assert_eq!(prev.target.k, step.source.k);
                debug_assert_eq!(prev.target.n, step.source.n);
                let mut map = vec![0u32; prev.map.len()];
                for (id, slot) in map.iter_mut().enumerate().skip(1) {
                    *slot = step.image_var(prev.map[id])?;
                }
                Substitution {
                    source: prev.source,
                    target: step.target,
                    map,
                }
            }
        });
        n -= 2;
    }
    Ok(current.expect("k_top >= 2 yields at least one step"))
}
