//! Command-line front end. Every command prints a JSON report embedding its
//! resolved configuration, optionally also writing it to `--report`.
//!
//! Exit status: 0 when every check passes, 1 when a check fails (the report
//! carries the witness), 2 for usage, input and cap errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Ratio;
use serde::Serialize;
use serde_json::{json, Value};

use crate::circuit::{
    compile_cc_refutation, extract_cc2_refutation, lines_from_cp_proof, lines_from_resolution, parse_circuit,
    verify_separation, write_circuit, Compilation, SeparationWitness,
};
use crate::cnf::{parse_dimacs, to_dimacs, Assignment, CnfFormula, Side, VariablePartition};
use crate::cp::{check_cp_proof, default_weight_bound, parse_proof_lines, resolution_refutation_from_dpll, CpProof};
use crate::error::{Error, Result};
use crate::protocol::ProtocolConfig;
use crate::random_lab::{
    expansion_report, heavy_partition_search, heavy_sat_fraction, profile_distinctness, sample_f, sample_tensor,
    unsat_rate, CheckMode, DistributionParams,
};

#[derive(Debug, Parser)]
#[command(name = "cutwork", version, about = "Cutting Planes refutations, protocols and monotone CSP-SAT circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample a random formula and write it as DIMACS.
    Gen(GenArgs),
    /// Check a Cutting Planes proof against a formula.
    CheckProof(CheckProofArgs),
    /// Compile a refutation into a monotone circuit file.
    Compile(CompileArgs),
    /// Check that a circuit separates accepting from rejecting instances.
    VerifySep(CircuitArgs),
    /// Extract and validate a 2-bit protocol refutation from a circuit.
    Extract(CircuitArgs),
    /// Run a random-distribution experiment.
    Stats(StatsArgs),
    /// Compile, verify separation and extract in one run.
    Roundtrip(CompileArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Dist {
    F,
    Tensor,
}

#[derive(Debug, Args, Serialize)]
struct DistArgs {
    #[arg(long, value_enum, default_value = "f")]
    dist: Dist,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl DistArgs {
    fn params(&self) -> Result<DistributionParams> {
        DistributionParams::new(self.m, self.n, self.d, self.seed)
    }

    fn sample(&self) -> Result<(CnfFormula, Option<VariablePartition>)> {
        let p = self.params()?;
        Ok(match self.dist {
            Dist::F => (sample_f(&p)?, None),
            Dist::Tensor => {
                let (f, part) = sample_tensor(&p)?;
                (f, Some(part))
            }
        })
    }
}

#[derive(Debug, Args, Serialize)]
struct GenArgs {
    #[command(flatten)]
    dist: DistArgs,
    /// DIMACS output path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CheckProofArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    proof: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct PartitionArgs {
    /// `alternating`, `search`, or `x:1,3 y:2,4`.
    #[arg(long, num_args = 1.., default_value = "alternating")]
    partition: Vec<String>,
    /// Seed for `--partition search`.
    #[arg(long, default_value_t = 0)]
    partition_seed: u64,
    #[arg(long, default_value_t = 20)]
    max_depth: usize,
    /// Per-side cap on enumerated inputs (as a variable count).
    #[arg(long, default_value_t = 12)]
    enum_cap: usize,
}

impl PartitionArgs {
    fn config(&self) -> ProtocolConfig {
        ProtocolConfig {
            max_depth: self.max_depth,
            enum_cap: self.enum_cap,
        }
    }

    fn resolve(&self, f: &CnfFormula) -> Result<VariablePartition> {
        parse_partition(&self.partition.join(" "), f, self.partition_seed)
    }
}

#[derive(Debug, Args, Serialize)]
struct CompileArgs {
    #[arg(long)]
    cnf: PathBuf,
    /// Cutting Planes proof to compile instead of a resolution refutation.
    #[arg(long)]
    proof: Option<PathBuf>,
    /// Weight bound for proof lines; defaults to n³.
    #[arg(long)]
    weight_bound: Option<u64>,
    #[command(flatten)]
    partition: PartitionArgs,
    /// Circuit output path.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
struct CircuitArgs {
    #[arg(long)]
    cnf: PathBuf,
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    partition: PartitionArgs,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum StatsCheck {
    Unsat,
    Expansion,
    Profiles,
    Partition,
    HeavySat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SideArg {
    X,
    Y,
}

#[derive(Debug, Args, Serialize)]
struct StatsArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long, value_enum, default_value = "unsat")]
    check: StatsCheck,
    #[arg(long, default_value_t = 20)]
    samples: usize,
    #[arg(long, default_value = "1/2")]
    epsilon: String,
    /// Largest subset size for the expansion check; defaults to ⌊n/(e d²)⌋.
    #[arg(long)]
    s_max: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Largest enumeration run exactly before falling back to sampling.
    #[arg(long, default_value_t = 10_000_000)]
    exact_budget: u64,
    #[arg(long, value_enum, default_value = "x")]
    side: SideArg,
    #[arg(long)]
    report: Option<PathBuf>,
}

struct Outcome {
    pass: bool,
    result: Value,
}

/// Parses `argv` (including the program name), runs the command and returns
/// the exit status.
pub fn run_command<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let (name, config, report_path) = describe(&cli.command);
    match execute(&cli.command) {
        Ok(outcome) => {
            let report = json!({
                "command": name,
                "config": config,
                "pass": outcome.pass,
                "result": outcome.result,
            });
            let text = serde_json::to_string_pretty(&report).expect("reports serialize") + "\n";
            if let Some(path) = report_path {
                if let Err(e) = fs::write(path, &text) {
                    let _ = writeln!(err, "error: cannot write report {}: {e}", path.display());
                    return 2;
                }
            }
            let _ = out.write_all(text.as_bytes());
            if outcome.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn describe(cmd: &Command) -> (&'static str, Value, Option<&PathBuf>) {
    match cmd {
        Command::Gen(a) => ("gen", to_json(a), a.report.as_ref()),
        Command::CheckProof(a) => ("check-proof", to_json(a), a.report.as_ref()),
        Command::Compile(a) => ("compile", to_json(a), a.report.as_ref()),
        Command::VerifySep(a) => ("verify-sep", to_json(a), a.report.as_ref()),
        Command::Extract(a) => ("extract", to_json(a), a.report.as_ref()),
        Command::Stats(a) => ("stats", to_json(a), a.report.as_ref()),
        Command::Roundtrip(a) => ("roundtrip", to_json(a), a.report.as_ref()),
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Gen(a) => gen(a),
        Command::CheckProof(a) => check_proof(a),
        Command::Compile(a) => compile(a).map(|(o, _)| o),
        Command::VerifySep(a) => verify_sep(a),
        Command::Extract(a) => extract(a),
        Command::Stats(a) => stats(a),
        Command::Roundtrip(a) => roundtrip(a),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn read_cnf(path: &Path) -> Result<CnfFormula> {
    parse_dimacs(&read(path)?)
}

fn literals(a: &Assignment) -> Vec<i64> {
    a.iter().map(|(v, b)| if b { v as i64 } else { -(v as i64) }).collect()
}

/// Parses `alternating`, `search` or `x:<vars> y:<vars>` (either side may be
/// empty, e.g. `x:1 y:`).
pub fn parse_partition(text: &str, f: &CnfFormula, seed: u64) -> Result<VariablePartition> {
    let n = f.num_vars();
    match text.trim() {
        "alternating" => return Ok(VariablePartition::alternating(n)),
        "search" => {
            return heavy_partition_search(f, Ratio::new(1, 4), 1000, seed, None)?.partition(n);
        }
        _ => {}
    }
    let mut sides: [Option<Vec<u32>>; 2] = [None, None];
    for tok in text.split_whitespace() {
        let (slot, list) = if let Some(l) = tok.strip_prefix("x:") {
            (0, l)
        } else if let Some(l) = tok.strip_prefix("y:") {
            (1, l)
        } else {
            return Err(Error::InvalidArgument(format!("bad partition token `{tok}`")));
        };
        let vars = list
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<u32>().map_err(|_| Error::InvalidArgument(format!("bad variable `{s}`"))))
            .collect::<Result<Vec<_>>>()?;
        if sides[slot].replace(vars).is_some() {
            return Err(Error::InvalidArgument(format!("partition side given twice in `{text}`")));
        }
    }
    let [xs, ys] = sides;
    let (xs, ys) = match (xs, ys) {
        (Some(x), Some(y)) => (x, y),
        (Some(x), None) => {
            let y = (1..=n as u32).filter(|v| !x.contains(v)).collect();
            (x, y)
        }
        (None, Some(y)) => ((1..=n as u32).filter(|v| !y.contains(v)).collect(), y),
        (None, None) => return Err(Error::InvalidArgument("empty partition".into())),
    };
    VariablePartition::new(n, xs, ys)
}

fn partition_json(p: &VariablePartition) -> Value {
    json!({ "x": p.xvars(), "y": p.yvars() })
}

fn gen(a: &GenArgs) -> Result<Outcome> {
    let (f, part) = a.dist.sample()?;
    fs::write(&a.out, to_dimacs(&f))?;
    Ok(Outcome {
        pass: true,
        result: json!({
            "clauses": f.num_clauses(),
            "vars": f.num_vars(),
            "partition": part.as_ref().map(partition_json),
        }),
    })
}

fn check_proof(a: &CheckProofArgs) -> Result<Outcome> {
    let f = read_cnf(&a.cnf)?;
    let lines = parse_proof_lines(&read(&a.proof)?)?;
    let width = lines.first().map_or(f.num_vars(), |l| l.inequality.num_vars());
    if width != f.num_vars() {
        return Err(Error::Dimension(format!(
            "proof lines have {width} coefficients, formula has {} variables",
            f.num_vars()
        )));
    }
    let report = check_cp_proof(&CpProof::for_formula(&f, lines));
    Ok(Outcome {
        pass: report.refutation,
        result: to_json(&report),
    })
}

type Compiled = (CnfFormula, VariablePartition, Compilation);

fn compile(a: &CompileArgs) -> Result<(Outcome, Option<Compiled>)> {
    let f = read_cnf(&a.cnf)?;
    let part = a.partition.resolve(&f)?;
    let cfg = a.partition.config();
    let lines = match &a.proof {
        Some(path) => {
            let proof = CpProof::for_formula(&f, parse_proof_lines(&read(path)?)?);
            let bound = a.weight_bound.unwrap_or_else(|| default_weight_bound(f.num_vars()));
            lines_from_cp_proof(&proof, &f, &part, bound, &cfg)
        }
        None => resolution_refutation_from_dpll(&f).and_then(|r| lines_from_resolution(&r, &part)),
    };
    let lines = match lines {
        Ok(l) => l,
        Err(Error::Satisfiable(model)) => {
            return Ok((
                Outcome {
                    pass: false,
                    result: json!({ "partition": partition_json(&part), "satisfiable": true, "model": literals(&model) }),
                },
                None,
            ));
        }
        Err(Error::InvalidRefutation(msg)) => {
            return Ok((
                Outcome {
                    pass: false,
                    result: json!({ "partition": partition_json(&part), "invalid_refutation": msg }),
                },
                None,
            ));
        }
        Err(e) => return Err(e),
    };
    let comp = compile_cc_refutation(&lines, &f, &part, &cfg)?;
    if let Some(out) = &a.out {
        fs::write(out, write_circuit(&comp.circuit))?;
    }
    let result = json!({
        "partition": partition_json(&part),
        "lines": comp.stats.lines,
        "gates": comp.stats.gates,
        "max_protocol_depth": comp.stats.max_depth,
        "linear_estimate": comp.stats.linear_estimate.to_string(),
        "conservative_bound": comp.stats.conservative_bound.to_string(),
        "within_conservative_bound": comp.stats.within_conservative_bound(),
    });
    Ok((
        Outcome {
            pass: comp.stats.within_conservative_bound(),
            result,
        },
        Some((f, part, comp)),
    ))
}

fn witness_json(w: &SeparationWitness, part: &VariablePartition) -> Value {
    match *w {
        SeparationWitness::Accepting { x } => json!({ "side": "x", "assignment": literals(&part.unpack_x(x)) }),
        SeparationWitness::Rejecting { y } => json!({ "side": "y", "assignment": literals(&part.unpack_y(y)) }),
    }
}

fn separation_json(c: &crate::circuit::MonotoneCircuit, f: &CnfFormula, part: &VariablePartition) -> Result<(bool, Value)> {
    let sep = verify_separation(c, f, part)?;
    Ok((
        sep.pass,
        json!({
            "pass": sep.pass,
            "accepting_checked": sep.accepting_checked,
            "rejecting_checked": sep.rejecting_checked,
            "witness": sep.witness.as_ref().map(|w| witness_json(w, part)),
        }),
    ))
}

fn extraction_json(c: &crate::circuit::MonotoneCircuit, f: &CnfFormula, part: &VariablePartition) -> Result<(bool, Value)> {
    match extract_cc2_refutation(c, f, part) {
        Ok(ext) => Ok((
            ext.report.is_refutation(),
            to_json(&ext.report),
        )),
        Err(Error::NotSeparating(msg)) => Ok((false, json!({ "not_separating": msg }))),
        Err(e) => Err(e),
    }
}

fn verify_sep(a: &CircuitArgs) -> Result<Outcome> {
    let f = read_cnf(&a.cnf)?;
    let part = a.partition.resolve(&f)?;
    let c = parse_circuit(&read(&a.circuit)?)?;
    let (pass, mut result) = separation_json(&c, &f, &part)?;
    result["partition"] = partition_json(&part);
    result["gates"] = json!(c.len());
    Ok(Outcome { pass, result })
}

fn extract(a: &CircuitArgs) -> Result<Outcome> {
    let f = read_cnf(&a.cnf)?;
    let part = a.partition.resolve(&f)?;
    let c = parse_circuit(&read(&a.circuit)?)?;
    let (pass, result) = extraction_json(&c, &f, &part)?;
    Ok(Outcome {
        pass,
        result: json!({ "partition": partition_json(&part), "extraction": result }),
    })
}

fn roundtrip(a: &CompileArgs) -> Result<Outcome> {
    let (compiled, data) = compile(a)?;
    let Some((f, part, comp)) = data else {
        return Ok(compiled);
    };
    let (sep_pass, sep) = separation_json(&comp.circuit, &f, &part)?;
    let (ext_pass, ext) = if sep_pass {
        extraction_json(&comp.circuit, &f, &part)?
    } else {
        (false, Value::Null)
    };
    let lengths_match = ext["line_count"] == json!(comp.circuit.len());
    Ok(Outcome {
        pass: compiled.pass && sep_pass && ext_pass && lengths_match,
        result: json!({
            "compile": compiled.result,
            "separation": sep,
            "extraction": ext,
            "extraction_length_matches_gates": lengths_match,
        }),
    })
}

fn parse_epsilon(s: &str) -> Result<Ratio<u64>> {
    let bad = || Error::InvalidArgument(format!("bad epsilon `{s}`, expected p/q"));
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let (p, q): (u64, u64) = (p.trim().parse().map_err(|_| bad())?, q.trim().parse().map_err(|_| bad())?);
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

fn stats(a: &StatsArgs) -> Result<Outcome> {
    let eps = parse_epsilon(&a.epsilon)?;
    let mode = CheckMode::Auto {
        exact_budget: a.exact_budget,
        trials: a.trials,
    };
    let seed = a.dist.seed;
    Ok(match a.check {
        StatsCheck::Unsat => {
            let r = unsat_rate(&a.dist.params()?, a.dist.dist == Dist::Tensor, a.samples)?;
            Outcome {
                pass: true,
                result: to_json(&r),
            }
        }
        StatsCheck::Expansion => {
            let (f, _) = a.dist.sample()?;
            let s_max = a.s_max.unwrap_or_else(|| crate::random_lab::expansion_s_max(f.num_vars(), f.width()));
            let r = expansion_report(&f, eps, s_max, mode, seed)?;
            Outcome {
                pass: r.pass,
                result: to_json(&r),
            }
        }
        StatsCheck::Profiles => {
            let (f, _) = a.dist.sample()?;
            let r = profile_distinctness(&f, mode, seed)?;
            Outcome {
                pass: r.distinct,
                result: to_json(&r),
            }
        }
        StatsCheck::Partition => {
            let (f, _) = a.dist.sample()?;
            let r = heavy_partition_search(&f, eps, a.trials as usize, seed, None)?;
            Outcome {
                pass: r.accepted,
                result: to_json(&r),
            }
        }
        StatsCheck::HeavySat => {
            let (f, given) = a.dist.sample()?;
            let part = match given {
                Some(p) => p,
                None => heavy_partition_search(&f, eps, a.trials as usize, seed, None)?.partition(f.num_vars())?,
            };
            let side = match a.side {
                SideArg::X => Side::X,
                SideArg::Y => Side::Y,
            };
            let r = heavy_sat_fraction(&f, &part, side, eps, mode, seed)?;
            Outcome {
                pass: true,
                result: json!({ "partition": partition_json(&part), "report": to_json(&r) }),
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run_command(std::iter::once("cutwork").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(&["frobnicate"]).0, 2);
        assert_eq!(run(&["check-proof", "--cnf"]).0, 2);
        assert_eq!(run(&["check-proof", "--cnf", "/nonexistent.cnf", "--proof", "/nonexistent.cpp"]).0, 2);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn partition_specs() {
        let f = CnfFormula::new(4, vec![crate::cnf::Clause::from_dimacs(&[1, 2, 3, 4]).unwrap()]).unwrap();
        let p = parse_partition("x:1,3 y:2,4", &f, 0).unwrap();
        assert_eq!((p.xvars(), p.yvars()), (&[1, 3][..], &[2, 4][..]));
        assert_eq!(parse_partition("alternating", &f, 0).unwrap(), p);
        let p = parse_partition("x:1", &f, 0).unwrap();
        assert_eq!(p.yvars(), &[2, 3, 4]);
        assert!(parse_partition("x:1 x:2", &f, 0).is_err());
        assert!(parse_partition("z:1", &f, 0).is_err());
        assert!(parse_partition("x:1,2 y:2,3,4", &f, 0).is_err());
        assert_eq!(parse_partition("search", &f, 3).unwrap().num_vars(), 4);
    }

    #[test]
    fn epsilons() {
        assert_eq!(parse_epsilon("1/4").unwrap(), Ratio::new(1, 4));
        assert!(parse_epsilon("1/0").is_err());
        assert!(parse_epsilon("half").is_err());
    }
}
