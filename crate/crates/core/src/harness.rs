//! Solver campaigns: run an external DIMACS solver over a grid of generated
//! instances, parse and optionally proof-check the results, and emit a
//! fixed-schema CSV. Solvers are subprocesses behind a small adapter config
//! (command template plus output conventions), so any DIMACS solver plugs in;
//! the `KNESER_SOLVER` environment variable overrides the default command.

use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::brute::is_unsat_brute;
use crate::cnf::{gen_cnf, Cnf, Variant};
use crate::dimacs::write_dimacs;
use crate::error::{Error, Result};
use crate::proof::{check_refutation, import_drat, CheckMode};

pub const SOLVER_ENV_VAR: &str = "KNESER_SOLVER";
pub const CSV_HEADER: &str = "variant,k,n,colors,vars,clauses,result,seconds,conflicts,proof_checked";

/// Adapter for an external solver subprocess. The command is a whitespace-
/// split template; `{cnf}` is replaced by the DIMACS path and `{proof}`,
/// when present, by a DRAT output path.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub command: String,
    pub sat_exit: i32,
    pub unsat_exit: i32,
    /// regex whose first capture group is the conflict count
    pub conflicts_regex: Option<String>,
}

impl SolverConfig {
    pub fn new(command: impl Into<String>) -> SolverConfig {
        SolverConfig {
            command: command.into(),
            sat_exit: 10,
            unsat_exit: 20,
            conflicts_regex: Some(r"c conflicts[:= ]+(\d+)".into()),
        }
    }

    pub fn supports_proof(&self) -> bool {
        self.command.contains("{proof}")
    }

    /// Parse a key=value config file ("command", "sat_exit", "unsat_exit",
    /// "conflicts_regex"). Unknown keys are rejected to catch typos.
    pub fn parse(text: &str) -> Result<SolverConfig> {
        let mut config: Option<SolverConfig> = None;
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected key=value".into(),
            })?;
            let err = |msg: String| Error::Parse {
                line: idx + 1,
                msg,
            };
            match key.trim() {
                "command" => {
                    config
                        .get_or_insert_with(|| SolverConfig::new(""))
                        .command = value.trim().to_string();
                }
                "sat_exit" => {
                    config
                        .get_or_insert_with(|| SolverConfig::new(""))
                        .sat_exit = value
                        .trim()
                        .parse()
                        .map_err(|_| err("bad sat_exit".into()))?;
                }
                "unsat_exit" => {
                    config
                        .get_or_insert_with(|| SolverConfig::new(""))
                        .unsat_exit = value
                        .trim()
                        .parse()
                        .map_err(|_| err("bad unsat_exit".into()))?;
                }
                "conflicts_regex" => {
                    regex::Regex::new(value.trim())
                        .map_err(|e| err(format!("bad conflicts_regex: {e}")))?;
                    config
                        .get_or_insert_with(|| SolverConfig::new(""))
                        .conflicts_regex = Some(value.trim().to_string());
                }
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        let config = config.ok_or_else(|| Error::invalid("empty solver config"))?;
        if config.command.is_empty() || !config.command.contains("{cnf}") {
            return Err(Error::invalid(
                "solver config needs a command containing {cnf}",
            ));
        }
        Ok(config)
    }

    /// The configured solver: `KNESER_SOLVER` if set, else the fallback.
    pub fn from_env_or(fallback: SolverConfig) -> SolverConfig {
        match std::env::var(SOLVER_ENV_VAR) {
            Ok(cmd) if !cmd.trim().is_empty() => SolverConfig::new(cmd),
            _ => fallback,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunResult {
    Sat,
    Unsat,
    Timeout,
    Error(String),
}

impl RunResult {
    pub fn as_str(&self) -> &str {
        match self {
            RunResult::Sat => "SAT",
            RunResult::Unsat => "UNSAT",
            RunResult::Timeout => "TIMEOUT",
            RunResult::Error(_) => "ERROR",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolverRun {
    pub variant: Variant,
    pub k: u32,
    pub n: u32,
    pub colors: u32,
    pub vars: u32,
    pub clauses: usize,
    pub result: RunResult,
    pub seconds: f64,
    pub conflicts: Option<u64>,
    pub proof_checked: bool,
}

impl SolverRun {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.3},{},{}",
            self.variant,
            self.k,
            self.n,
            self.colors,
            self.vars,
            self.clauses,
            self.result.as_str(),
            self.seconds,
            self.conflicts.map(|c| c.to_string()).unwrap_or_default(),
            self.proof_checked
        )
    }
}

fn spawn_solver(
    config: &SolverConfig,
    cnf_path: &Path,
    proof_path: &Path,
) -> Result<std::process::Child> {
    let words: Vec<String> = config
        .command
        .split_whitespace()
        .map(|w| {
            w.replace("{cnf}", &cnf_path.to_string_lossy())
                .replace("{proof}", &proof_path.to_string_lossy())
        })
        .collect();
    let (program, args) = words
        .split_first()
        .ok_or_else(|| Error::Solver("empty solver command".into()))?;
    Command::new(program)
        .args(args)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .stdin(Stdio::null())
        .spawn()
        .map_err(|e| Error::Solver(format!("failed to start '{program}': {e}")))
}

/// Run one solver subprocess on an instance. Timeouts kill the process and
/// record a TIMEOUT row; proof checking failures downgrade `proof_checked`
/// but keep the run.
pub fn run_solver(
    cnf: &Cnf,
    config: &SolverConfig,
    timeout: Duration,
    want_proof: bool,
) -> Result<SolverRun> {
    let dir = tempfile::tempdir()?;
    let cnf_path = dir.path().join("instance.cnf");
    let proof_path = dir.path().join("proof.drat");
    {
        let mut f = std::fs::File::create(&cnf_path)?;
        write_dimacs(cnf, &mut f)?;
    }

    let start = Instant::now();
    let mut child = spawn_solver(config, &cnf_path, &proof_path)?;
    let mut timed_out = false;
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) => {
                if start.elapsed() > timeout {
                    let _ = child.kill();
                    let _ = child.wait();
                    timed_out = true;
                    break;
                }
                std::thread::sleep(Duration::from_millis(5));
            }
            Err(e) => return Err(Error::Solver(format!("wait failed: {e}"))),
        }
    }
    let seconds = start.elapsed().as_secs_f64();

    let mut run = SolverRun {
        variant: cnf.variant,
        k: cnf.k,
        n: cnf.n,
        colors: cnf.colors,
        vars: cnf.var_count()?,
        clauses: cnf.clauses.len(),
        result: RunResult::Timeout,
        seconds,
        conflicts: None,
        proof_checked: false,
    };
    if timed_out {
        return Ok(run);
    }

    let mut output = String::new();
    if let Some(mut out) = child.stdout.take() {
        let _ = out.read_to_string(&mut output);
    }
    if let Some(mut err) = child.stderr.take() {
        let _ = err.read_to_string(&mut output);
    }
    let status = child.wait().map_err(|e| Error::Solver(e.to_string()))?;

    run.result = match status.code() {
        Some(c) if c == config.sat_exit => RunResult::Sat,
        Some(c) if c == config.unsat_exit => RunResult::Unsat,
        _ if output.contains("s UNSATISFIABLE") => RunResult::Unsat,
        _ if output.contains("s SATISFIABLE") => RunResult::Sat,
        Some(c) => RunResult::Error(format!("unrecognized exit code {c}")),
        None => RunResult::Error("killed by signal".into()),
    };
    if let Some(pattern) = &config.conflicts_regex {
        if let Ok(re) = regex::Regex::new(pattern) {
            run.conflicts = re
                .captures(&output)
                .and_then(|c| c.get(1))
                .and_then(|m| m.as_str().parse().ok());
        }
    }

    if want_proof
        && run.result == RunResult::Unsat
        && config.supports_proof()
        && proof_path.exists()
    {
        run.proof_checked = check_drat_file(cnf, &proof_path).unwrap_or(false);
    }
    Ok(run)
}

/// Import a DRAT file as a resolution refutation, check it, and cross-check
/// unsatisfiability by truth table when the instance is small enough.
pub fn check_drat_file(cnf: &Cnf, proof_path: &Path) -> Result<bool> {
    let file = std::fs::File::open(proof_path)?;
    let mut reader = std::io::BufReader::new(file);
    let proof = import_drat(cnf, &mut reader)?;
    if !check_refutation(cnf, &proof, CheckMode::Strict).ok {
        return Ok(false);
    }
    if cnf.var_count()? <= 24 && !is_unsat_brute(cnf)? {
        return Err(Error::Inconsistency(
            "proof checked but truth table found a model".into(),
        ));
    }
    Ok(true)
}

#[derive(Debug, Clone)]
pub struct CampaignSpec {
    pub variant: Variant,
    pub k: u32,
    pub n_lo: u32,
    pub n_hi: u32,
    pub colors_override: Option<u32>,
    pub timeout: Duration,
    pub want_proof: bool,
    pub workers: usize,
}

#[derive(Debug)]
pub struct Campaign {
    pub spec: CampaignSpec,
    pub rows: Vec<SolverRun>,
}

impl Campaign {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.csv_row());
            out.push('\n');
        }
        out
    }
}

/// Run the grid with a bounded worker pool; per-row failures become ERROR
/// rows and the campaign continues.
pub fn campaign(spec: &CampaignSpec, config: &SolverConfig) -> Result<Campaign> {
    if spec.n_lo > spec.n_hi || spec.n_lo < 2 * spec.k {
        return Err(Error::invalid("campaign needs 2k <= n_lo <= n_hi"));
    }
    let ns: Vec<u32> = (spec.n_lo..=spec.n_hi).collect();
    let next = AtomicUsize::new(0);
    let rows: Mutex<Vec<Option<SolverRun>>> = Mutex::new(vec![None; ns.len()]);
    let workers = spec.workers.clamp(1, ns.len().max(1));

    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&n) = ns.get(i) else { break };
                let run = gen_cnf(spec.variant, n, spec.k, spec.colors_override)
                    .and_then(|cnf| run_solver(&cnf, config, spec.timeout, spec.want_proof));
                let row = run.unwrap_or_else(|e| SolverRun {
                    variant: spec.variant,
                    k: spec.k,
                    n,
                    colors: spec
                        .colors_override
                        .unwrap_or_else(|| n.saturating_sub(2 * spec.k) + 1),
                    vars: 0,
                    clauses: 0,
                    result: RunResult::Error(e.to_string()),
                    seconds: 0.0,
                    conflicts: None,
                    proof_checked: false,
                });
                rows.lock().expect("row lock").get_mut(i).map(|slot| *slot = Some(row));
            });
        }
    });

    let rows = rows
        .into_inner()
        .expect("row lock")
        .into_iter()
        .map(|r| r.expect("every grid point produced a row"))
        .collect();
    Ok(Campaign {
        spec: spec.clone(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;
    use std::os::unix::fs::PermissionsExt;

    fn script_solver(dir: &Path, body: &str) -> SolverConfig {
        let path = dir.join("fake-solver.sh");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "#!/bin/sh\n{body}").unwrap();
        f.flush().unwrap();
        std::fs::set_permissions(&path, std::fs::Permissions::from_mode(0o755)).unwrap();
        SolverConfig::new(format!("{} {{cnf}}", path.display()))
    }

    fn small_cnf() -> Cnf {
        gen_cnf(Variant::Kneser, 5, 2, None).unwrap()
    }

    #[test]
    fn config_parse_roundtrip() {
        let text = "command=kissat -q {cnf} {proof}\nsat_exit=10\nunsat_exit=20\n\
                    conflicts_regex=c conflicts[: ]+(\\d+)\n";
        let c = SolverConfig::parse(text).unwrap();
        assert_eq!(c.command, "kissat -q {cnf} {proof}");
        assert!(c.supports_proof());
        assert_eq!((c.sat_exit, c.unsat_exit), (10, 20));
    }

    #[test]
    fn config_parse_rejects_garbage() {
        assert!(SolverConfig::parse("commandkissat\n").is_err());
        assert!(SolverConfig::parse("bogus_key=1\ncommand=x {cnf}\n").is_err());
        assert!(SolverConfig::parse("command=no-placeholder\n").is_err());
        assert!(SolverConfig::parse("").is_err());
    }

    #[test]
    fn exit_codes_map_to_results() {
        let dir = tempfile::tempdir().unwrap();
        let unsat = script_solver(dir.path(), "exit 20");
        let run = run_solver(&small_cnf(), &unsat, Duration::from_secs(5), false).unwrap();
        assert_eq!(run.result, RunResult::Unsat);
        assert_eq!(run.vars, 20);
        assert_eq!(run.clauses, 40);

        let sat = script_solver(dir.path(), "exit 10");
        let run = run_solver(&small_cnf(), &sat, Duration::from_secs(5), false).unwrap();
        assert_eq!(run.result, RunResult::Sat);

        let odd = script_solver(dir.path(), "exit 3");
        let run = run_solver(&small_cnf(), &odd, Duration::from_secs(5), false).unwrap();
        assert!(matches!(run.result, RunResult::Error(_)));
    }

    #[test]
    fn status_line_fallback_and_conflicts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = script_solver(
            dir.path(),
            "echo 'c conflicts: 42'\necho 's UNSATISFIABLE'\nexit 0",
        );
        let run = run_solver(&small_cnf(), &cfg, Duration::from_secs(5), false).unwrap();
        assert_eq!(run.result, RunResult::Unsat);
        assert_eq!(run.conflicts, Some(42));
    }

    #[test]
    fn timeout_kills_solver() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = script_solver(dir.path(), "sleep 30");
        let start = Instant::now();
        let run = run_solver(&small_cnf(), &cfg, Duration::from_millis(200), false).unwrap();
        assert_eq!(run.result, RunResult::Timeout);
        assert!(start.elapsed() < Duration::from_secs(5));
    }

    #[test]
    fn csv_schema() {
        let spec = CampaignSpec {
            variant: Variant::Kneser,
            k: 2,
            n_lo: 5,
            n_hi: 6,
            colors_override: None,
            timeout: Duration::from_secs(5),
            want_proof: false,
            workers: 2,
        };
        let dir = tempfile::tempdir().unwrap();
        let cfg = script_solver(dir.path(), "exit 20");
        let c = campaign(&spec, &cfg).unwrap();
        let csv = c.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        let first = lines.next().unwrap();
        assert!(first.starts_with("kneser,2,5,2,20,40,UNSAT,"));
        assert_eq!(lines.next().unwrap().split(',').count(), 10);
        assert!(lines.next().is_none());
    }

    #[test]
    fn campaign_survives_missing_solver() {
        let spec = CampaignSpec {
            variant: Variant::Kneser,
            k: 2,
            n_lo: 5,
            n_hi: 5,
            colors_override: None,
            timeout: Duration::from_secs(1),
            want_proof: false,
            workers: 1,
        };
        let cfg = SolverConfig::new("/nonexistent/solver {cnf}");
        let c = campaign(&spec, &cfg).unwrap();
        assert_eq!(c.rows.len(), 1);
        assert!(matches!(c.rows[0].result, RunResult::Error(_)));
    }
}
