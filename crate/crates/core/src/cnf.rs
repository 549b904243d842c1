//! CNF instances for the Kneser / Schrijver families in refutation form
//! (Ant together with the negation of Cons), plus the onto variants and the
//! pigeonhole alias at k = 1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numbering::{Domain, Numbering};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit {
    pub var: u32,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: u32) -> Lit {
        Lit {
            var,
            positive: true,
        }
    }

    pub fn neg(var: u32) -> Lit {
        Lit {
            var,
            positive: false,
        }
    }

    pub fn negated(self) -> Lit {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    pub fn to_dimacs(self) -> i32 {
        if self.positive {
            self.var as i32
        } else {
            -(self.var as i32)
        }
    }

    pub fn from_dimacs(x: i32) -> Result<Lit> {
        if x == 0 {
            return Err(Error::invalid("literal 0 is reserved"));
        }
        Ok(Lit {
            var: x.unsigned_abs(),
            positive: x > 0,
        })
    }
}

/// A duplicate-free, sorted set of literals. Tautologies are representable
/// (resolvents of transported proofs can be tautological) but the generators
/// never emit them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Clause {
    literals: Vec<Lit>,
}

impl Clause {
    pub fn new(mut literals: Vec<Lit>) -> Clause {
        literals.sort_unstable();
        literals.dedup();
        Clause { literals }
    }

    pub fn empty() -> Clause {
        Clause { literals: vec![] }
    }

    pub fn literals(&self) -> &[Lit] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn is_tautology(&self) -> bool {
        self.literals
            .windows(2)
            .any(|w| w[0].var == w[1].var && w[0].positive != w[1].positive)
    }

    pub fn contains(&self, lit: Lit) -> bool {
        self.literals.binary_search(&lit).is_ok()
    }

    /// self subsumes other: every literal of self occurs in other.
    pub fn subsumes(&self, other: &Clause) -> bool {
        self.literals.iter().all(|&l| other.contains(l))
    }

    pub fn to_dimacs(&self) -> Vec<i32> {
        self.literals.iter().map(|l| l.to_dimacs()).collect()
    }

    pub fn from_dimacs(lits: &[i32]) -> Result<Clause> {
        Ok(Clause::new(
            lits.iter()
                .map(|&x| Lit::from_dimacs(x))
                .collect::<Result<Vec<_>>>()?,
        ))
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.literals {
            write!(f, "{} ", l.to_dimacs())?;
        }
        write!(f, "0")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Kneser,
    KneserOnto,
    Schrijver,
    SchrijverOnto,
    Php,
}

impl Variant {
    pub fn domain(self) -> Domain {
        match self {
            Variant::Schrijver | Variant::SchrijverOnto => Domain::Stable,
            _ => Domain::All,
        }
    }

    pub fn has_onto(self) -> bool {
        matches!(self, Variant::KneserOnto | Variant::SchrijverOnto)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Kneser => "kneser",
            Variant::KneserOnto => "kneser-onto",
            Variant::Schrijver => "schrijver",
            Variant::SchrijverOnto => "schrijver-onto",
            Variant::Php => "php",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        match s {
            "kneser" => Ok(Variant::Kneser),
            "kneser-onto" => Ok(Variant::KneserOnto),
            "schrijver" => Ok(Variant::Schrijver),
            "schrijver-onto" => Ok(Variant::SchrijverOnto),
            "php" => Ok(Variant::Php),
            other => Err(Error::invalid(format!("unknown variant '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cnf {
    pub n: u32,
    pub k: u32,
    pub colors: u32,
    pub variant: Variant,
    pub domain: Domain,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn numbering(&self) -> Result<Numbering> {
        Numbering::new(self.n, self.k, self.colors, self.domain)
    }

    pub fn var_count(&self) -> Result<u32> {
        Ok(self.numbering()?.var_count())
    }
}

/// One all-positive clause of width `colors` per domain set, in colex order.
pub fn gen_ant(num: &Numbering) -> Result<Vec<Clause>> {
    let mut out = Vec::with_capacity(num.sets().len());
    for s in num.sets() {
        let lits = (1..=num.colors)
            .map(|c| num.id(s, c).map(Lit::pos))
            .collect::<Result<Vec<_>>>()?;
        out.push(Clause::new(lits));
    }
    Ok(out)
}

/// Negated-Cons clauses: for every unordered pair of disjoint domain sets
/// (lower colex rank first) and every color, a binary all-negative clause.
pub fn gen_not_cons(num: &Numbering) -> Result<Vec<Clause>> {
    let sets = num.sets();
    let mut out = Vec::new();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if !a.disjoint(b) {
                continue;
            }
            for c in 1..=num.colors {
                out.push(Clause::new(vec![
                    Lit::neg(num.id(a, c)?),
                    Lit::neg(num.id(b, c)?),
                ]));
            }
        }
    }
    Ok(out)
}

/// At-most-one-color clauses: C(colors, 2) binary clauses per domain set.
pub fn gen_onto(num: &Numbering) -> Result<Vec<Clause>> {
    let mut out = Vec::new();
    for s in num.sets() {
        for l in 1..=num.colors {
            for t in l + 1..=num.colors {
                out.push(Clause::new(vec![
                    Lit::neg(num.id(s, l)?),
                    Lit::neg(num.id(s, t)?),
                ]));
            }
        }
    }
    Ok(out)
}

/// Build a full instance: Ant, then Onto for the onto variants, then the
/// negation of Cons. colors defaults to n - 2k + 1.
pub fn gen_cnf(variant: Variant, n: u32, k: u32, colors_override: Option<u32>) -> Result<Cnf> {
    if variant == Variant::Php && k != 1 {
        return Err(Error::invalid("variant php requires k = 1"));
    }
    if k < 1 || n < 2 * k {
        return Err(Error::invalid(format!(
            "need 1 <= k and 2k <= n, got n={n} k={k}"
        )));
    }
    let colors = colors_override.unwrap_or(n - 2 * k + 1);
    let domain = variant.domain();
    let num = Numbering::new(n, k, colors, domain)?;
    if num.sets().is_empty() {
        return Err(Error::invalid("empty domain"));
    }
    let mut clauses = gen_ant(&num)?;
    if variant.has_onto() {
        clauses.extend(gen_onto(&num)?);
    }
    clauses.extend(gen_not_cons(&num)?);
    debug_assert!(clauses.iter().all(|c| !c.is_tautology()));
    Ok(Cnf {
        n,
        k,
        colors,
        variant,
        domain,
        clauses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute::is_unsat_brute;
    use crate::subsets::binomial;

    #[test]
    fn ant_counts() {
        let num = Numbering::new(5, 2, 2, Domain::All).unwrap();
        let ant = gen_ant(&num).unwrap();
        assert_eq!(ant.len(), 10);
        assert!(ant.iter().all(|c| c.len() == 2));

        let num = Numbering::new(5, 2, 2, Domain::Stable).unwrap();
        assert_eq!(gen_ant(&num).unwrap().len(), 5);

        let num = Numbering::new(3, 1, 2, Domain::All).unwrap();
        let ant = gen_ant(&num).unwrap();
        assert_eq!(ant.len(), 3);
        assert!(ant.iter().all(|c| c.len() == 2));
    }

    #[test]
    fn not_cons_counts() {
        let num = Numbering::new(5, 2, 2, Domain::All).unwrap();
        assert_eq!(gen_not_cons(&num).unwrap().len(), 30);
        let num = Numbering::new(5, 2, 2, Domain::Stable).unwrap();
        assert_eq!(gen_not_cons(&num).unwrap().len(), 10);
        let num = Numbering::new(4, 2, 1, Domain::All).unwrap();
        assert_eq!(gen_not_cons(&num).unwrap().len(), 3);
    }

    #[test]
    fn onto_counts() {
        let num = Numbering::new(5, 2, 2, Domain::All).unwrap();
        assert_eq!(gen_onto(&num).unwrap().len(), 10);
        let num = Numbering::new(7, 2, 4, Domain::All).unwrap();
        assert_eq!(gen_onto(&num).unwrap().len(), 126);
        let num = Numbering::new(4, 2, 1, Domain::All).unwrap();
        assert_eq!(gen_onto(&num).unwrap().len(), 0);
    }

    #[test]
    fn kneser_5_2_shape() {
        let cnf = gen_cnf(Variant::Kneser, 5, 2, None).unwrap();
        assert_eq!(cnf.var_count().unwrap(), 20);
        assert_eq!(cnf.clauses.len(), 40);
        assert!(is_unsat_brute(&cnf).unwrap());
    }

    #[test]
    fn kneser_5_2_three_colors_sat() {
        use crate::cdcl::{solve_cnf, Budget, SolveResult};
        let cnf = gen_cnf(Variant::Kneser, 5, 2, Some(3)).unwrap();
        assert_eq!(cnf.var_count().unwrap(), 30);
        // 30 variables is past the truth-table limit; a proper 3-coloring
        // of the Petersen graph exists, so the solver must find a model
        match solve_cnf(&cnf, &Budget::default(), false).unwrap().result {
            SolveResult::Sat(_) => {}
            other => panic!("expected sat, got {other:?}"),
        }
    }

    #[test]
    fn schrijver_5_2_shape() {
        let cnf = gen_cnf(Variant::Schrijver, 5, 2, None).unwrap();
        assert_eq!(cnf.var_count().unwrap(), 10);
        assert_eq!(cnf.clauses.len(), 15);
        assert!(is_unsat_brute(&cnf).unwrap());
    }

    #[test]
    fn php_alias_matches_k1_kneser() {
        let php = gen_cnf(Variant::Php, 4, 1, None).unwrap();
        let kne = gen_cnf(Variant::Kneser, 4, 1, None).unwrap();
        assert_eq!(php.clauses, kne.clauses);
        assert!(gen_cnf(Variant::Php, 6, 2, None).is_err());
    }

    #[test]
    fn kneser_k1_is_php_shape() {
        // m = n pigeons (singletons), n-1 holes (colors)
        for n in 2..=7u32 {
            let cnf = gen_cnf(Variant::Kneser, n, 1, None).unwrap();
            let holes = n - 1;
            let pigeon_axioms = n;
            let conflicts = holes * n * (n - 1) / 2;
            assert_eq!(cnf.clauses.len() as u32, pigeon_axioms + conflicts);
            assert!(cnf
                .clauses
                .iter()
                .take(n as usize)
                .all(|c| c.len() == holes as usize
                    && c.literals().iter().all(|l| l.positive)));
            assert!(cnf
                .clauses
                .iter()
                .skip(n as usize)
                .all(|c| c.len() == 2 && c.literals().iter().all(|l| !l.positive)));
        }
    }

    #[test]
    fn closed_form_clause_counts() {
        for n in 2..=12u32 {
            for k in 1..=3u32 {
                if n < 2 * k {
                    continue;
                }
                let cnf = gen_cnf(Variant::Kneser, n, k, None).unwrap();
                let colors = (n - 2 * k + 1) as u64;
                let dom = binomial(n as u64, k as u64);
                let pairs = dom * binomial((n - k) as u64, k as u64) / 2;
                assert_eq!(cnf.var_count().unwrap() as u64, colors * dom);
                assert_eq!(cnf.clauses.len() as u64, dom + colors * pairs);
            }
        }
    }

    #[test]
    fn schrijver_clauses_embed_in_kneser() {
        // every Schrijver clause is, after renumbering onto the full domain,
        // a Kneser clause over stable sets
        let sch = gen_cnf(Variant::Schrijver, 7, 2, None).unwrap();
        let kne = gen_cnf(Variant::Kneser, 7, 2, None).unwrap();
        let sch_num = sch.numbering().unwrap();
        let kne_num = kne.numbering().unwrap();
        let kne_set: std::collections::HashSet<_> = kne.clauses.iter().collect();
        for c in &sch.clauses {
            let renumbered = Clause::new(
                c.literals()
                    .iter()
                    .map(|l| {
                        let (s, col) = sch_num.decode(l.var).unwrap();
                        let id = kne_num.id(s, col).unwrap();
                        Lit {
                            var: id,
                            positive: l.positive,
                        }
                    })
                    .collect(),
            );
            assert!(kne_set.contains(&renumbered));
        }
    }

    #[test]
    fn clause_dedup_and_tautology() {
        let c = Clause::new(vec![Lit::pos(3), Lit::pos(3), Lit::neg(1)]);
        assert_eq!(c.len(), 2);
        assert!(!c.is_tautology());
        let t = Clause::new(vec![Lit::pos(2), Lit::neg(2)]);
        assert!(t.is_tautology());
    }

    #[test]
    fn chromatic_boundary_small() {
        use crate::cdcl::{solve_cnf, Budget, SolveResult};
        // colors = n-2k+1 unsat, n-2k+2 sat; truth tables where they fit,
        // the solver above that
        for (n, k) in [(4u32, 2u32), (5, 2), (4, 1), (5, 1)] {
            let hard = gen_cnf(Variant::Kneser, n, k, None).unwrap();
            assert!(is_unsat_brute(&hard).unwrap(), "kneser({n},{k}) not unsat");
            let easy = gen_cnf(Variant::Kneser, n, k, Some(n - 2 * k + 2)).unwrap();
            let sat = if easy.var_count().unwrap() <= 28 {
                !is_unsat_brute(&easy).unwrap()
            } else {
                matches!(
                    solve_cnf(&easy, &Budget::default(), false).unwrap().result,
                    SolveResult::Sat(_)
                )
            };
            assert!(sat, "kneser({n},{k})+1 not sat");
        }
    }
}
