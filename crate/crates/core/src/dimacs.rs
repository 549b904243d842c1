//! DIMACS CNF serialization. Metadata comments come first, then the problem
//! line, then clauses in generation order; parsing is the exact inverse on
//! generator output.

use std::io::{BufRead, Write};

use crate::cnf::{Clause, Cnf, Variant};
use crate::error::{Error, Result};
use crate::numbering::Domain;

pub const NUMBERING_CONTRACT: &str = "id = colex_rank(subset) * colors + color (rank within domain)";

pub fn write_dimacs(cnf: &Cnf, sink: &mut impl Write) -> Result<()> {
    writeln!(
        sink,
        "c variant={} n={} k={} colors={} domain={}",
        cnf.variant, cnf.n, cnf.k, cnf.colors, cnf.domain
    )?;
    writeln!(sink, "c numbering: {NUMBERING_CONTRACT}")?;
    if cnf.variant.has_onto() {
        // two readings of the onto constraint exist; the conjunctive
        // at-most-one form is the one emitted, the disjunctive form is a
        // tautology and would constrain nothing
        writeln!(sink, "c onto=at-most-one alt=disjunctive-reading-tautological")?;
    }
    writeln!(sink, "p cnf {} {}", cnf.var_count()?, cnf.clauses.len())?;
    for c in &cnf.clauses {
        writeln!(sink, "{c}")?;
    }
    Ok(())
}

pub fn dimacs_string(cnf: &Cnf) -> Result<String> {
    let mut buf = Vec::new();
    write_dimacs(cnf, &mut buf)?;
    Ok(String::from_utf8(buf).expect("dimacs output is ascii"))
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

pub fn parse_dimacs(source: &mut impl BufRead) -> Result<Cnf> {
    let mut meta: Option<(Variant, u32, u32, u32, Domain)> = None;
    let mut header: Option<(u32, usize)> = None;
    let mut clauses: Vec<Clause> = Vec::new();
    let mut pending: Vec<i32> = Vec::new();

    for (idx, line) in source.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            if meta.is_none() {
                if let Some(m) = parse_meta(rest.trim()) {
                    meta = Some(m);
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let mut it = rest.split_whitespace();
            if it.next() != Some("cnf") {
                return Err(parse_err(lineno, "expected 'p cnf V C'"));
            }
            let v: u32 = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "bad variable count"))?;
            let c: usize = it
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| parse_err(lineno, "bad clause count"))?;
            header = Some((v, c));
            continue;
        }
        if header.is_none() {
            return Err(parse_err(lineno, "clause before problem line"));
        }
        for tok in line.split_whitespace() {
            let x: i32 = tok
                .parse()
                .map_err(|_| parse_err(lineno, format!("bad literal '{tok}'")))?;
            if x == 0 {
                clauses.push(Clause::from_dimacs(&pending)?);
                pending.clear();
            } else {
                pending.push(x);
            }
        }
    }
    if !pending.is_empty() {
        return Err(parse_err(0, "unterminated clause at end of input"));
    }
    let (vars, clause_count) =
        header.ok_or_else(|| parse_err(0, "missing problem line"))?;
    if clauses.len() != clause_count {
        return Err(parse_err(
            0,
            format!("expected {clause_count} clauses, found {}", clauses.len()),
        ));
    }
    let (variant, n, k, colors, domain) =
        meta.ok_or_else(|| parse_err(0, "missing 'c variant=...' metadata line"))?;
    let cnf = Cnf {
        n,
        k,
        colors,
        variant,
        domain,
        clauses,
    };
    if cnf.var_count()? != vars {
        return Err(parse_err(
            0,
            format!(
                "problem line declares {vars} variables but metadata implies {}",
                cnf.var_count()?
            ),
        ));
    }
    Ok(cnf)
}

fn parse_meta(rest: &str) -> Option<(Variant, u32, u32, u32, Domain)> {
    let mut variant = None;
    let mut n = None;
    let mut k = None;
    let mut colors = None;
    let mut domain = None;
    for field in rest.split_whitespace() {
        let (key, val) = field.split_once('=')?;
        match key {
            "variant" => variant = val.parse::<Variant>().ok(),
            "n" => n = val.parse::<u32>().ok(),
            "k" => k = val.parse::<u32>().ok(),
            "colors" => colors = val.parse::<u32>().ok(),
            "domain" => {
                domain = match val {
                    "all" => Some(Domain::All),
                    "stable" => Some(Domain::Stable),
                    _ => None,
                }
            }
            _ => {}
        }
    }
    Some((variant?, n?, k?, colors?, domain?))
}
