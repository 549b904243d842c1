//! A compact CDCL SAT solver: two-watched literals, first-UIP clause
//! learning, activity-based branching with phase saving, Luby restarts, and
//! optional DRAT logging. It exists so the campaign harness has a working
//! default backend in environments without an external solver; any DIMACS
//! solver can replace it through the harness configuration.

use std::time::{Duration, Instant};

use crate::cnf::{Cnf, Lit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    /// Truth value per variable, index var - 1.
    Sat(Vec<bool>),
    Unsat,
    /// Budget exhausted.
    Unknown,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
}

#[derive(Debug, Clone, Default)]
pub struct Budget {
    pub max_conflicts: Option<u64>,
    pub timeout: Option<Duration>,
}

#[derive(Debug)]
pub struct Outcome {
    pub result: SolveResult,
    pub stats: SolveStats,
    /// DRAT proof text, present when requested and the result is Unsat.
    pub drat: Option<String>,
}

const fn code(l: Lit) -> u32 {
    (l.var - 1) * 2 + if l.positive { 0 } else { 1 }
}

fn code_var(c: u32) -> usize {
    (c / 2) as usize
}

fn code_to_dimacs(c: u32) -> i32 {
    let v = (c / 2 + 1) as i32;
    if c % 2 == 0 {
        v
    } else {
        -v
    }
}

/// luby(i), 1-based: 1 1 2 1 1 2 4 ...
fn luby(i: u64) -> u64 {
    let mut k = 1u64;
    let mut size = 1u64;
    while size < i {
        size = 2 * size + 1;
        k += 1;
    }
    let mut i = i - 1; // offset within the block of length `size`
    while size - 1 != i {
        size = (size - 1) / 2;
        k -= 1;
        i %= size;
    }
    1 << (k - 1)
}

struct Solver {
    num_vars: usize,
    clauses: Vec<Vec<u32>>,
    watches: Vec<Vec<usize>>,
    value: Vec<i8>, // per var: 0 unset, 1 true, -1 false
    level: Vec<u32>,
    reason: Vec<Option<usize>>,
    trail: Vec<u32>,
    trail_lim: Vec<usize>,
    head: usize,
    activity: Vec<f64>,
    var_inc: f64,
    phase: Vec<bool>,
    seen: Vec<bool>,
    stats: SolveStats,
    drat: Option<String>,
}

impl Solver {
    fn new(num_vars: usize, log_drat: bool) -> Solver {
        Solver {
            num_vars,
            clauses: Vec::new(),
            watches: vec![Vec::new(); num_vars * 2],
            value: vec![0; num_vars],
            level: vec![0; num_vars],
            reason: vec![None; num_vars],
            trail: Vec::new(),
            trail_lim: Vec::new(),
            head: 0,
            activity: vec![0.0; num_vars],
            var_inc: 1.0,
            phase: vec![false; num_vars],
            seen: vec![false; num_vars],
            stats: SolveStats::default(),
            drat: log_drat.then(String::new),
        }
    }

    fn lit_value(&self, c: u32) -> i8 {
        let v = self.value[code_var(c)];
        if c % 2 == 0 {
            v
        } else {
            -v
        }
    }

    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    fn enqueue(&mut self, c: u32, reason: Option<usize>) {
        let v = code_var(c);
        self.value[v] = if c % 2 == 0 { 1 } else { -1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.phase[v] = c % 2 == 0;
        self.trail.push(c);
    }

    /// Returns Some(conflicting clause) on conflict.
    fn propagate(&mut self) -> Option<usize> {
        while self.head < self.trail.len() {
            let falsified = self.trail[self.head] ^ 1;
            self.head += 1;
            self.stats.propagations += 1;
            let mut i = 0;
            'clauses: while i < self.watches[falsified as usize].len() {
                let ci = self.watches[falsified as usize][i];
                if self.clauses[ci][0] == falsified {
                    self.clauses[ci].swap(0, 1);
                }
                let other = self.clauses[ci][0];
                if self.lit_value(other) == 1 {
                    i += 1;
                    continue;
                }
                for j in 2..self.clauses[ci].len() {
                    if self.lit_value(self.clauses[ci][j]) != -1 {
                        let nw = self.clauses[ci][j];
                        self.clauses[ci].swap(1, j);
                        self.watches[falsified as usize].swap_remove(i);
                        self.watches[nw as usize].push(ci);
                        continue 'clauses;
                    }
                }
                if self.lit_value(other) == -1 {
                    return Some(ci);
                }
                self.enqueue(other, Some(ci));
                i += 1;
            }
        }
        None
    }

    fn attach(&mut self, lits: Vec<u32>) -> usize {
        let ci = self.clauses.len();
        debug_assert!(lits.len() >= 2);
        self.watches[lits[0] as usize].push(ci);
        self.watches[lits[1] as usize].push(ci);
        self.clauses.push(lits);
        ci
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
    }

    /// First-UIP conflict analysis; returns (learned clause, backjump level).
    /// learned[0] is the asserting literal.
    fn analyze(&mut self, conflict: usize) -> (Vec<u32>, u32) {
        let mut learned: Vec<u32> = vec![0]; // slot for the asserting literal
        let mut counter = 0usize;
        let mut clause = conflict;
        let mut index = self.trail.len();
        let mut asserting = u32::MAX; // sentinel until the first pivot is known
        loop {
            for pos in 0..self.clauses[clause].len() {
                let l = self.clauses[clause][pos];
                let v = code_var(l);
                if self.seen[v] || self.level[v] == 0 || l == asserting ^ 1 {
                    continue;
                }
                self.seen[v] = true;
                self.bump(v);
                if self.level[v] == self.decision_level() {
                    counter += 1;
                } else {
                    learned.push(l);
                }
            }
            // walk back to the next marked literal on the trail
            loop {
                index -= 1;
                if self.seen[code_var(self.trail[index])] {
                    break;
                }
            }
            let l = self.trail[index];
            let v = code_var(l);
            self.seen[v] = false;
            counter -= 1;
            if counter == 0 {
                asserting = l ^ 1;
                break;
            }
            clause = self.reason[v].expect("non-decision literal has a reason");
            asserting = l ^ 1; // exclude this pivot when expanding its reason
        }
        learned[0] = asserting;
        for &l in &learned[1..] {
            self.seen[code_var(l)] = false;
        }
        let backjump = learned[1..]
            .iter()
            .map(|&l| self.level[code_var(l)])
            .max()
            .unwrap_or(0);
        (learned, backjump)
    }

    fn backtrack(&mut self, target: u32) {
        while self.decision_level() > target {
            let lim = self.trail_lim.pop().expect("level > 0");
            while self.trail.len() > lim {
                let c = self.trail.pop().unwrap();
                let v = code_var(c);
                self.value[v] = 0;
                self.reason[v] = None;
            }
        }
        self.head = self.trail.len();
    }

    fn pick_branch(&self) -> Option<u32> {
        let mut best: Option<usize> = None;
        for v in 0..self.num_vars {
            if self.value[v] != 0 {
                continue;
            }
            match best {
                Some(b) if self.activity[b] >= self.activity[v] => {}
                _ => best = Some(v),
            }
        }
        best.map(|v| (v as u32) * 2 + if self.phase[v] { 0 } else { 1 })
    }

    fn log_learned(&mut self, lits: &[u32]) {
        if let Some(drat) = &mut self.drat {
            for &l in lits {
                drat.push_str(&code_to_dimacs(l).to_string());
                drat.push(' ');
            }
            drat.push_str("0\n");
        }
    }
}

/// Solve a raw clause list over `num_vars` variables.
pub fn solve_clauses(
    num_vars: u32,
    clause_list: &[Vec<Lit>],
    budget: &Budget,
    log_drat: bool,
) -> Result<Outcome> {
    for c in clause_list {
        if c.iter().any(|l| l.var == 0 || l.var > num_vars) {
            return Err(Error::invalid("literal outside declared variable range"));
        }
    }
    let mut s = Solver::new(num_vars as usize, log_drat);
    let start = Instant::now();

    // load clauses: dedupe literals, drop tautologies, special-case units
    for c in clause_list {
        let mut lits: Vec<u32> = c.iter().map(|&l| code(l)).collect();
        lits.sort_unstable();
        lits.dedup();
        if lits.windows(2).any(|w| w[0] ^ 1 == w[1]) {
            continue; // tautology
        }
        match lits.len() {
            0 => {
                return Ok(Outcome {
                    result: SolveResult::Unsat,
                    stats: s.stats,
                    drat: s.drat.map(|d| d + "0\n"),
                })
            }
            1 => match s.lit_value(lits[0]) {
                1 => {}
                -1 => {
                    return Ok(Outcome {
                        result: SolveResult::Unsat,
                        stats: s.stats,
                        drat: s.drat.map(|d| d + "0\n"),
                    })
                }
                _ => s.enqueue(lits[0], None),
            },
            _ => {
                s.attach(lits);
            }
        }
    }
    if s.propagate().is_some() {
        return Ok(Outcome {
            result: SolveResult::Unsat,
            stats: s.stats,
            drat: s.drat.map(|d| d + "0\n"),
        });
    }

    let mut conflicts_until_restart = 100 * luby(1);
    loop {
        if let Some(conflict) = s.propagate() {
            s.stats.conflicts += 1;
            if s.decision_level() == 0 {
                return Ok(Outcome {
                    result: SolveResult::Unsat,
                    stats: s.stats,
                    drat: s.drat.map(|d| d + "0\n"),
                });
            }
            let (learned, backjump) = s.analyze(conflict);
            s.log_learned(&learned);
            s.backtrack(backjump);
            if learned.len() == 1 {
                s.enqueue(learned[0], None);
            } else {
                let asserting = learned[0];
                let ci = s.attach(learned);
                s.enqueue(asserting, Some(ci));
            }
            s.var_inc /= 0.95;

            if let Some(max) = budget.max_conflicts {
                if s.stats.conflicts >= max {
                    return Ok(Outcome {
                        result: SolveResult::Unknown,
                        stats: s.stats,
                        drat: None,
                    });
                }
            }
            if conflicts_until_restart > 0 {
                conflicts_until_restart -= 1;
            } else {
                s.stats.restarts += 1;
                conflicts_until_restart = 100 * luby(s.stats.restarts + 1);
                s.backtrack(0);
            }
            // timeout checks ride on conflicts to stay cheap
            if let Some(t) = budget.timeout {
                if s.stats.conflicts % 256 == 0 && start.elapsed() > t {
                    return Ok(Outcome {
                        result: SolveResult::Unknown,
                        stats: s.stats,
                        drat: None,
                    });
                }
            }
        } else {
            match s.pick_branch() {
                None => {
                    let model = (0..s.num_vars).map(|v| s.value[v] == 1).collect();
                    return Ok(Outcome {
                        result: SolveResult::Sat(model),
                        stats: s.stats,
                        drat: None,
                    });
                }
                Some(c) => {
                    s.stats.decisions += 1;
                    s.trail_lim.push(s.trail.len());
                    s.enqueue(c, None);
                }
            }
        }
    }
}

pub fn solve_cnf(cnf: &Cnf, budget: &Budget, log_drat: bool) -> Result<Outcome> {
    let clause_list: Vec<Vec<Lit>> = cnf
        .clauses
        .iter()
        .map(|c| c.literals().to_vec())
        .collect();
    solve_clauses(cnf.var_count()?, &clause_list, budget, log_drat)
}

/// Check a model against a clause list.
pub fn model_satisfies(model: &[bool], clause_list: &[Vec<Lit>]) -> bool {
    clause_list.iter().all(|c| {
        c.iter()
            .any(|l| model[l.var as usize - 1] == l.positive)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brute::{clauses_unsat_brute, is_unsat_brute};
    use crate::cnf::{gen_cnf, Variant};
    use crate::proof::{check_refutation, import_drat, CheckMode};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solve_default(cnf: &Cnf, drat: bool) -> Outcome {
        solve_cnf(cnf, &Budget::default(), drat).unwrap()
    }

    #[test]
    fn trivial_instances() {
        let out = solve_clauses(1, &[vec![Lit::pos(1)]], &Budget::default(), false).unwrap();
        assert_eq!(out.result, SolveResult::Sat(vec![true]));
        let out = solve_clauses(
            1,
            &[vec![Lit::pos(1)], vec![Lit::neg(1)]],
            &Budget::default(),
            false,
        )
        .unwrap();
        assert_eq!(out.result, SolveResult::Unsat);
    }

    #[test]
    fn agrees_with_brute_force_on_random_3cnf() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..300 {
            let num_vars = rng.random_range(3..=12u32);
            let num_clauses = rng.random_range(1..=50);
            let clause_list: Vec<Vec<Lit>> = (0..num_clauses)
                .map(|_| {
                    (0..3)
                        .map(|_| {
                            let v = rng.random_range(1..=num_vars);
                            if rng.random::<bool>() {
                                Lit::pos(v)
                            } else {
                                Lit::neg(v)
                            }
                        })
                        .collect()
                })
                .collect();
            let out =
                solve_clauses(num_vars, &clause_list, &Budget::default(), false).unwrap();
            let unsat = clauses_unsat_brute(
                num_vars,
                &clause_list
                    .iter()
                    .cloned()
                    .map(crate::cnf::Clause::new)
                    .collect::<Vec<_>>(),
            )
            .unwrap();
            match out.result {
                SolveResult::Sat(model) => {
                    assert!(model_satisfies(&model, &clause_list));
                    assert!(!unsat);
                }
                SolveResult::Unsat => assert!(unsat),
                SolveResult::Unknown => panic!("no budget was set"),
            }
        }
    }

    #[test]
    fn kneser_instances_solve_correctly() {
        for (n, k) in [(5u32, 2u32), (6, 2), (6, 1)] {
            let hard = gen_cnf(Variant::Kneser, n, k, None).unwrap();
            assert_eq!(solve_default(&hard, false).result, SolveResult::Unsat);
            let easy = gen_cnf(Variant::Kneser, n, k, Some(n - 2 * k + 2)).unwrap();
            match solve_default(&easy, false).result {
                SolveResult::Sat(model) => {
                    let lits: Vec<Vec<Lit>> = easy
                        .clauses
                        .iter()
                        .map(|c| c.literals().to_vec())
                        .collect();
                    assert!(model_satisfies(&model, &lits));
                }
                other => panic!("expected sat, got {other:?}"),
            }
        }
    }

    #[test]
    fn drat_output_imports_as_resolution_proof() {
        for (variant, n, k) in [
            (Variant::Kneser, 5u32, 2u32),
            (Variant::Schrijver, 6, 2),
            (Variant::Kneser, 5, 1),
        ] {
            let cnf = gen_cnf(variant, n, k, None).unwrap();
            assert!(is_unsat_brute(&cnf).unwrap());
            let out = solve_default(&cnf, true);
            assert_eq!(out.result, SolveResult::Unsat);
            let drat = out.drat.expect("drat requested");
            let proof = import_drat(&cnf, &mut drat.as_bytes()).unwrap();
            let v = check_refutation(&cnf, &proof, CheckMode::Strict);
            assert!(v.ok, "step {:?}: {:?}", v.failed_step, v.reason);
        }
    }

    #[test]
    fn conflict_budget_reports_unknown() {
        let cnf = gen_cnf(Variant::Kneser, 8, 2, None).unwrap();
        let out = solve_cnf(
            &cnf,
            &Budget {
                max_conflicts: Some(1),
                timeout: None,
            },
            false,
        )
        .unwrap();
        assert_eq!(out.result, SolveResult::Unknown);
    }

    #[test]
    fn luby_sequence() {
        let want = [1u64, 1, 2, 1, 1, 2, 4, 1, 1, 2, 1, 1, 2, 4, 8];
        let got: Vec<u64> = (1..=15).map(luby).collect();
        assert_eq!(got, want);
    }
}
