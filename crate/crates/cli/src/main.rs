//! `kneser`: command-line front end for the Kneser-Lovasz formula workbench.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on usage errors.
//! The `solve` subcommand follows SAT-competition conventions instead
//! (10 = satisfiable, 20 = unsatisfiable, 0 = inconclusive).

use std::fs::File;
use std::io::{self, BufReader, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use kneser_core::cdcl::{self, Budget, SolveResult};
use kneser_core::cnf::gen_cnf;
use kneser_core::counting::{build_count, check_count_identities};
use kneser_core::dimacs::{parse_dimacs, write_dimacs};
use kneser_core::harness::{self, CampaignSpec, SolverConfig};
use kneser_core::oracle::{self, k2, k3};
use kneser_core::proof::{self, CheckMode};
use kneser_core::subst::{build_phi, verify_image};
use kneser_core::{Coloring, Error, KSubset, Variant};

#[derive(Parser)]
#[command(
    name = "kneser",
    about = "Generate, reduce, audit, and solve Kneser-Lovasz formula instances",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum VariantArg {
    Kneser,
    KneserOnto,
    Schrijver,
    SchrijverOnto,
    Php,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Kneser => Variant::Kneser,
            VariantArg::KneserOnto => Variant::KneserOnto,
            VariantArg::Schrijver => Variant::Schrijver,
            VariantArg::SchrijverOnto => Variant::SchrijverOnto,
            VariantArg::Php => Variant::Php,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ProofFormat {
    /// Native line format: `i <lits> 0` inputs, `r <l> <r> <pivot> <lits> 0`.
    Native,
    /// DRAT clause additions, reconstructed into resolution steps.
    Drat,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Strict,
    Tolerant,
}

impl From<ModeArg> for CheckMode {
    fn from(m: ModeArg) -> CheckMode {
        match m {
            ModeArg::Strict => CheckMode::Strict,
            ModeArg::Tolerant => CheckMode::Tolerant,
        }
    }
}

#[derive(Args)]
struct InstanceArgs {
    /// Formula family member
    #[arg(long, value_enum, default_value = "kneser")]
    variant: VariantArg,
    /// Ground-set size
    #[arg(long)]
    n: u32,
    /// Subset size
    #[arg(long)]
    k: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a DIMACS CNF instance
    Gen {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Number of colors (default n - 2k + 1, the unsatisfiable boundary)
        #[arg(long)]
        colors: Option<u32>,
        /// Output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Emit the substitution map from the (k+1, n) instance onto the
    /// (k, n-2) one, as two-column text: source-id target-id
    Subst {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Verify that the substitution image equals the target instance exactly
    VerifySubst {
        #[command(flatten)]
        inst: InstanceArgs,
    },
    /// Transport a refutation of the (k, n) instance to (k-1, n-2) and check it
    Transport {
        #[command(flatten)]
        inst: InstanceArgs,
        /// Refutation of the source instance
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum, default_value = "native")]
        format: ProofFormat,
        /// Write the transported proof here (native format)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a resolution refutation against a DIMACS instance
    CheckProof {
        /// DIMACS CNF file
        #[arg(long)]
        cnf: PathBuf,
        #[arg(long)]
        proof: PathBuf,
        #[arg(long, value_enum, default_value = "native")]
        format: ProofFormat,
        #[arg(long, value_enum, default_value = "strict")]
        mode: ModeArg,
    },
    /// Build the n-input popcount circuit; report size and verify its outputs
    CountCircuit {
        #[arg(long)]
        n: usize,
        /// Print the gate-level netlist
        #[arg(long)]
        netlist: bool,
    },
    /// Check the four counting identities at width n
    Identities {
        #[arg(long, default_value = "12")]
        n: usize,
        /// Random samples beyond the exhaustive range
        #[arg(long, default_value = "10000")]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Classify random 2-subset color classes: disjoint pair, common
    /// element, or size <= 3, re-verifying every verdict
    OracleK2 {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "100")]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Bound random 3-subset color classes via the A/B/C/D partition,
    /// recording which analysis case fired
    OracleK3 {
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "100")]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Audit the counting-chain inequalities (k = 2) or the witness
    /// extraction (k = 3) over seeded random colorings
    Audit {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        n: u32,
        #[arg(long, default_value = "100")]
        samples: u64,
        #[arg(long, default_value = "0")]
        seed: u64,
        /// Line-oriented report file
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Extract a monochromatic disjoint pair from one random coloring
    Witness {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, default_value = "0")]
        seed: u64,
    },
    /// Run a solver campaign over an n-range and emit CSV
    Bench {
        #[arg(long, value_enum, default_value = "kneser")]
        variant: VariantArg,
        #[arg(long, default_value = "2")]
        k: u32,
        #[arg(long)]
        n_lo: u32,
        #[arg(long)]
        n_hi: u32,
        #[arg(long)]
        colors: Option<u32>,
        /// Per-instance timeout in seconds
        #[arg(long, default_value = "60")]
        timeout: u64,
        /// key=value solver adapter config (default: this binary's `solve`;
        /// the KNESER_SOLVER environment variable overrides the command)
        #[arg(long)]
        solver_config: Option<PathBuf>,
        /// Request and check DRAT proofs on UNSAT results
        #[arg(long)]
        proof: bool,
        #[arg(long, default_value = "4")]
        workers: usize,
        /// CSV output file (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve a DIMACS file with the built-in CDCL solver
    /// (exit 10 = SAT, 20 = UNSAT, 0 = budget exhausted)
    Solve {
        cnf: PathBuf,
        /// Write a DRAT proof here on UNSAT
        #[arg(long)]
        proof: Option<PathBuf>,
        #[arg(long)]
        max_conflicts: Option<u64>,
        /// Timeout in seconds
        #[arg(long)]
        timeout: Option<u64>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn write_out(output: Option<&PathBuf>, text: &str) -> kneser_core::Result<()> {
    match output {
        Some(path) => {
            let mut f = File::create(path)?;
            f.write_all(text.as_bytes())?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn fmt_set(s: &KSubset) -> String {
    let parts: Vec<String> = s.elements().iter().map(|e| e.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

fn read_proof(
    path: &PathBuf,
    format: ProofFormat,
    cnf: &kneser_core::Cnf,
) -> kneser_core::Result<proof::ResolutionProof> {
    let mut reader = BufReader::new(File::open(path)?);
    match format {
        ProofFormat::Native => proof::parse_native_proof(&mut reader),
        ProofFormat::Drat => proof::import_drat(cnf, &mut reader),
    }
}

fn run(cli: Cli) -> kneser_core::Result<u8> {
    match cli.command {
        Command::Gen {
            inst,
            colors,
            output,
        } => {
            let cnf = gen_cnf(inst.variant.into(), inst.n, inst.k, colors)?;
            let mut buf = Vec::new();
            write_dimacs(&cnf, &mut buf)?;
            write_out(output.as_ref(), std::str::from_utf8(&buf).unwrap())?;
            Ok(0)
        }
        Command::Subst { inst, output } => {
            let phi = build_phi(inst.k, inst.n, inst.variant.into())?;
            write_out(output.as_ref(), &phi.to_two_column())?;
            Ok(0)
        }
        Command::VerifySubst { inst } => {
            let phi = build_phi(inst.k, inst.n, inst.variant.into())?;
            let report = verify_image(&phi)?;
            println!("{}", report.render());
            Ok(if report.pass() { 0 } else { 1 })
        }
        Command::Transport {
            inst,
            proof: proof_path,
            format,
            output,
        } => {
            if inst.k < 2 {
                return Err(Error::invalid("transport needs a source with k >= 2"));
            }
            let variant: Variant = inst.variant.into();
            let source = gen_cnf(variant, inst.n, inst.k, None)?;
            let src_proof = read_proof(&proof_path, format, &source)?;
            let pre = proof::check_refutation(&source, &src_proof, CheckMode::Strict);
            if !pre.ok {
                println!("source proof: FAIL ({})", pre.reason.unwrap_or_default());
                return Ok(1);
            }
            let phi = build_phi(inst.k - 1, inst.n, variant)?;
            let transported = proof::transport(&src_proof, &phi)?;
            let target = gen_cnf(variant, inst.n - 2, inst.k - 1, None)?;
            let verdict = proof::check_refutation(&target, &transported, CheckMode::Tolerant);
            println!(
                "source steps: {}  transported steps: {}  target check: {}",
                src_proof.len(),
                transported.len(),
                if verdict.ok { "pass" } else { "FAIL" }
            );
            if let Some(path) = output {
                write_out(Some(&path), &proof::emit_proof(&transported))?;
            }
            Ok(if verdict.ok && transported.len() <= src_proof.len() {
                0
            } else {
                1
            })
        }
        Command::CheckProof {
            cnf,
            proof: proof_path,
            format,
            mode,
        } => {
            let instance = parse_dimacs(&mut BufReader::new(File::open(cnf)?))?;
            let refutation = read_proof(&proof_path, format, &instance)?;
            let verdict = proof::check_refutation(&instance, &refutation, mode.into());
            if verdict.ok {
                println!("pass: {} steps", refutation.len());
                Ok(0)
            } else {
                println!(
                    "FAIL at step {}: {}",
                    verdict
                        .failed_step
                        .map_or("-".into(), |s| s.to_string()),
                    verdict.reason.unwrap_or_default()
                );
                Ok(1)
            }
        }
        Command::CountCircuit { n, netlist } => {
            let circuit = build_count(n)?;
            let exhaustive = n <= 16;
            let mut ok = true;
            if exhaustive {
                for x in 0u64..(1 << n) {
                    let input: Vec<bool> = (0..n).map(|i| x >> i & 1 == 1).collect();
                    if circuit.eval(&input)? != u64::from(x.count_ones()) {
                        ok = false;
                        break;
                    }
                }
            }
            println!(
                "n={} gates={} output_width={} popcount_check={}",
                n,
                circuit.size(),
                circuit.output_width(),
                if !exhaustive {
                    "skipped(n>16)"
                } else if ok {
                    "pass"
                } else {
                    "FAIL"
                }
            );
            if netlist {
                print!("{}", circuit.to_netlist());
            }
            Ok(if ok { 0 } else { 1 })
        }
        Command::Identities { n, samples, seed } => {
            let report = check_count_identities(n, samples, seed)?;
            println!("{}", report.render());
            Ok(if report.pass() { 0 } else { 1 })
        }
        Command::OracleK2 { n, samples, seed } => {
            if n < 5 {
                return Err(Error::invalid("oracle-k2 needs n >= 5"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<KSubset> = kneser_core::enum_ksubsets(n, 2)?;
            let mut counts = [0u64; 3];
            for _ in 0..samples {
                let family: Vec<KSubset> = all
                    .iter()
                    .filter(|_| rand::Rng::random::<bool>(&mut rng))
                    .cloned()
                    .collect();
                let verdict = k2::class_trichotomy_k2(n, &family)?;
                let idx = match &verdict.alternative {
                    oracle::Alternative::DisjointPair(a, b) => {
                        if !a.disjoint(b) || !family.contains(a) || !family.contains(b) {
                            return Err(Error::invalid("disjoint-pair verdict failed re-check"));
                        }
                        0
                    }
                    oracle::Alternative::CommonElement(x) => {
                        if !family.iter().all(|s| s.contains(*x)) {
                            return Err(Error::invalid("common-element verdict failed re-check"));
                        }
                        1
                    }
                    oracle::Alternative::Small => {
                        if family.len() > 3 {
                            return Err(Error::invalid("small verdict failed re-check"));
                        }
                        2
                    }
                };
                counts[idx] += 1;
            }
            println!(
                "n={n} samples={samples} seed={seed} disjoint-pair={} common-element={} small={}",
                counts[0], counts[1], counts[2]
            );
            Ok(0)
        }
        Command::OracleK3 { n, samples, seed } => {
            if n < 7 {
                return Err(Error::invalid("oracle-k3 needs n >= 7"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let all: Vec<KSubset> = kneser_core::enum_ksubsets(n, 3)?;
            let mut ab_cases = [0u64; 7];
            let mut cd_cases = [0u64; 5];
            let mut alternatives = [0u64; 3];
            for _ in 0..samples {
                // bias toward small families so the partition path is exercised
                let keep = rand::Rng::random_range(&mut rng, 1..=all.len().min(3 * n as usize));
                let family: Vec<KSubset> = all
                    .iter()
                    .filter(|_| rand::Rng::random_range(&mut rng, 0..all.len()) < keep)
                    .cloned()
                    .collect();
                let analysis = k3::class_bound_k3(n, &family)?;
                let idx = match &analysis.alternative {
                    oracle::Alternative::DisjointPair(..) => 0,
                    oracle::Alternative::CommonElement(_) => 1,
                    oracle::Alternative::Small => 2,
                };
                alternatives[idx] += 1;
                if let Some(c) = analysis.ab_case {
                    ab_cases[c as usize] += 1;
                }
                if let Some(c) = analysis.cd_case {
                    cd_cases[c as usize] += 1;
                }
            }
            println!(
                "n={n} samples={samples} seed={seed} disjoint-pair={} common-element={} bounded={}",
                alternatives[0], alternatives[1], alternatives[2]
            );
            println!(
                "ab-cases: {}",
                (1..7)
                    .map(|i| format!("{i}:{}", ab_cases[i]))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            println!(
                "cd-cases: {}",
                (1..5)
                    .map(|i| format!("{i}:{}", cd_cases[i]))
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            Ok(0)
        }
        Command::Audit {
            k,
            n,
            samples,
            seed,
            output,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut report = format!("audit k={k} n={n} samples={samples} seed={seed}\n");
            let mut failures = 0u64;
            match k {
                2 => {
                    if n < 6 {
                        return Err(Error::invalid("audit --k 2 needs n >= 6"));
                    }
                    for i in 0..samples {
                        let coloring = Coloring::random(
                            n,
                            2,
                            n - 3,
                            kneser_core::numbering::Domain::All,
                            &mut rng,
                        )?;
                        let audit = k2::audit_k2(&coloring)?;
                        let ok = audit.all_ok();
                        if !ok {
                            failures += 1;
                            report.push_str(&audit.render());
                        }
                        report.push_str(&format!(
                            "sample={} verdict={}\n",
                            i,
                            if ok { "pass" } else { "FAIL" }
                        ));
                    }
                }
                3 => {
                    if n < 7 {
                        return Err(Error::invalid("audit --k 3 needs n >= 7"));
                    }
                    for i in 0..samples {
                        let coloring = Coloring::random(
                            n,
                            3,
                            n - 5,
                            kneser_core::numbering::Domain::All,
                            &mut rng,
                        )?;
                        let (a, b, color) = k3::find_mono_disjoint_k3(&coloring)?;
                        let ok = oracle::verify_witness(&coloring, &a, &b, color)?;
                        if !ok {
                            failures += 1;
                        }
                        report.push_str(&format!(
                            "sample={} witness={} {} color={} verdict={}\n",
                            i,
                            fmt_set(&a),
                            fmt_set(&b),
                            color,
                            if ok { "pass" } else { "FAIL" }
                        ));
                    }
                }
                _ => return Err(Error::invalid("audit supports --k 2 or --k 3")),
            }
            report.push_str(&format!(
                "total={} failures={} verdict={}\n",
                samples,
                failures,
                if failures == 0 { "pass" } else { "FAIL" }
            ));
            write_out(output.as_ref(), &report)?;
            if output.is_some() {
                println!(
                    "audit k={k} n={n}: {}/{} passed",
                    samples - failures,
                    samples
                );
            }
            Ok(if failures == 0 { 0 } else { 1 })
        }
        Command::Witness { n, k, seed } => {
            let colors = n
                .checked_sub(2 * k)
                .map(|d| d + 1)
                .ok_or_else(|| Error::invalid("witness needs n >= 2k"))?;
            let domain = kneser_core::numbering::Domain::All;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let coloring = Coloring::random(n, k, colors, domain, &mut rng)?;
            let (a, b, color) = oracle::find_mono_disjoint(&coloring)?;
            let ok = oracle::verify_witness(&coloring, &a, &b, color)?;
            println!(
                "n={n} k={k} seed={seed} witness={} {} color={color} verified={}",
                fmt_set(&a),
                fmt_set(&b),
                if ok { "pass" } else { "FAIL" }
            );
            Ok(if ok { 0 } else { 1 })
        }
        Command::Bench {
            variant,
            k,
            n_lo,
            n_hi,
            colors,
            timeout,
            solver_config,
            proof,
            workers,
            output,
        } => {
            let fallback = match solver_config {
                Some(path) => {
                    let mut text = String::new();
                    File::open(path)?.read_to_string(&mut text)?;
                    SolverConfig::parse(&text)?
                }
                None => builtin_solver_config()?,
            };
            let config = SolverConfig::from_env_or(fallback);
            let spec = CampaignSpec {
                variant: variant.into(),
                k,
                n_lo,
                n_hi,
                colors_override: colors,
                timeout: Duration::from_secs(timeout),
                want_proof: proof,
                workers,
            };
            let campaign = harness::campaign(&spec, &config)?;
            write_out(output.as_ref(), &campaign.to_csv())?;
            Ok(0)
        }
        Command::Solve {
            cnf,
            proof: proof_path,
            max_conflicts,
            timeout,
        } => {
            let instance = parse_dimacs(&mut BufReader::new(File::open(cnf)?))?;
            let budget = Budget {
                max_conflicts,
                timeout: timeout.map(Duration::from_secs),
            };
            let outcome = cdcl::solve_cnf(&instance, &budget, proof_path.is_some())?;
            println!("c conflicts: {}", outcome.stats.conflicts);
            println!("c decisions: {}", outcome.stats.decisions);
            match outcome.result {
                SolveResult::Sat(model) => {
                    println!("s SATISFIABLE");
                    let mut line = String::from("v");
                    for (i, &v) in model.iter().enumerate() {
                        line.push_str(&format!(" {}{}", if v { "" } else { "-" }, i + 1));
                    }
                    line.push_str(" 0");
                    println!("{line}");
                    Ok(10)
                }
                SolveResult::Unsat => {
                    println!("s UNSATISFIABLE");
                    if let Some(path) = proof_path {
                        let drat = outcome.drat.unwrap_or_else(|| "0\n".into());
                        write_out(Some(&path), &drat)?;
                    }
                    Ok(20)
                }
                SolveResult::Unknown => {
                    println!("s UNKNOWN");
                    Ok(0)
                }
            }
        }
    }
}

/// Adapter for this binary's own `solve` subcommand, used when no external
/// solver is configured.
fn builtin_solver_config() -> kneser_core::Result<SolverConfig> {
    let exe = std::env::current_exe()?;
    let exe = exe
        .to_str()
        .ok_or_else(|| Error::invalid("executable path is not UTF-8"))?;
    Ok(SolverConfig::new(format!(
        "{exe} solve {{cnf}} --proof {{proof}}"
    )))
}
