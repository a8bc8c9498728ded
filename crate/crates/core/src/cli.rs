//! Command-line front end: `check`, `comb` and `sample`.
//!
//! Exit codes: 0 extremal, 1 not extremal, 2 inconclusive, 3 routes
//! disagree, 64 usage or parse error, 65 membership failure, 66 i/o error,
//! 70 internal error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::algebra::Algebra;
use crate::error::Error;
use crate::extremality::{
    extremal_auto, extremal_conjugate, extremal_direct, extremal_kraus, extremal_reduced,
    povm_extremal, povm_extremal_auto, tester_extremal, ExtremalityReport, Verdict,
};
use crate::gchannel::{verify_comb, verify_gpovm, verify_tester, GchanInstance, Povm};
use crate::io::{
    read_json, write_json, OperatorFile, Problem, ProblemFile, Role, SubspaceSpec, WitnessFile,
};
use crate::linalg::Tolerance;
use crate::sample;
use crate::subspace::{comb_algebra, comb_perp_basis, Subspace};

pub const EXIT_EXTREMAL: i32 = 0;
pub const EXIT_NOT_EXTREMAL: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_DISAGREEMENT: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_MEMBERSHIP: i32 = 65;
pub const EXIT_IO: i32 = 66;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "gchan", version, about = "Membership and extremality checks for generalized quantum channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Verify membership and decide extremality of a problem file.
    Check {
        problem: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Relative tolerance for rank and positivity decisions.
        #[arg(long, env = "GCHAN_TOL")]
        tol: Option<f64>,
        /// Print the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Emit the basis of `J_n^⊥` or its dimension counts as JSON Lines.
    Comb {
        /// Algebras `B_0,…,B_n`; each is a size `d` or blocks `d1+d2+…`.
        #[arg(long)]
        algebras: String,
        #[arg(long, value_enum, default_value_t = EmitArg::Dims)]
        emit: EmitArg,
    },
    /// Write a seeded random problem file.
    Sample {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// channel, gchannel: `in,out`; gchannel with comb: `h0,h1,out`;
        /// povm, pvm: `dim,outcomes`; tester: `h0,h1,outcomes`.
        #[arg(long)]
        dims: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Constraint family for gchannel samples.
        #[arg(long, value_enum, default_value_t = ConstraintArg::Full)]
        constraint: ConstraintArg,
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Direct,
    Kraus,
    Conjugate,
    Reduced,
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmitArg {
    #[value(name = "perp_basis", alias = "perp-basis")]
    PerpBasis,
    Dims,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Channel,
    Gchannel,
    Povm,
    Pvm,
    Tester,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ConstraintArg {
    Full,
    Diag,
    Comb,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Check { problem, method, tol, json } => cmd_check(&problem, method, tol, json, out),
        Command::Comb { algebras, emit } => cmd_comb(&algebras, emit, out),
        Command::Sample { kind, dims, seed, constraint, out: path } => {
            cmd_sample(kind, &dims, seed, constraint, path.as_deref(), out)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::Shape(_) | Error::InvalidAlgebra(_) | Error::Index { .. } => EXIT_USAGE,
        Error::NotMember(_)
        | Error::NotTester(_)
        | Error::NotPositive { .. }
        | Error::NotChannel { .. }
        | Error::NotPvm(_)
        | Error::NotInvertible { .. } => EXIT_MEMBERSHIP,
        Error::Io(_) => EXIT_IO,
    }
}

fn verdict_code(rep: &ExtremalityReport) -> i32 {
    if rep.disagreement {
        return EXIT_DISAGREEMENT;
    }
    match rep.verdict {
        Verdict::Extremal => EXIT_EXTREMAL,
        Verdict::NotExtremal => EXIT_NOT_EXTREMAL,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn channel_method(gi: &GchanInstance, method: MethodArg) -> crate::error::Result<ExtremalityReport> {
    match method {
        MethodArg::Direct => extremal_direct(gi),
        MethodArg::Kraus => extremal_kraus(gi),
        MethodArg::Conjugate => extremal_conjugate(gi),
        MethodArg::Reduced => extremal_reduced(gi),
        MethodArg::Auto => extremal_auto(gi),
    }
}

fn povm_method(p: &Povm, method: MethodArg, tol: &Tolerance) -> crate::error::Result<ExtremalityReport> {
    match method {
        MethodArg::Direct => povm_extremal(p, tol),
        MethodArg::Auto => povm_extremal_auto(p, tol),
        m => channel_method(&GchanInstance::new(p.to_map(tol)?, p.subspace().clone())?, m),
    }
}

/// Witness path `<dir>/<stem>.witness.json`.
pub fn witness_path(problem: &Path) -> PathBuf {
    let stem = problem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into());
    problem.with_file_name(format!("{stem}.witness.json"))
}

pub fn cmd_check(
    path: &Path,
    method: MethodArg,
    tol: Option<f64>,
    json: bool,
    out: &mut dyn Write,
) -> crate::error::Result<i32> {
    let file: ProblemFile = read_json(path)?;
    let tol = tol.or(file.tol).unwrap_or(Tolerance::DEFAULT);
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Parse(format!("tolerance {tol} outside (0, 1)")));
    }
    let tol = Tolerance::new(tol);
    let problem = file.resolve(&tol)?;
    let mut lines: Vec<String> = Vec::new();
    let rep = match &problem {
        Problem::Gchannel(gi) => {
            let m = gi.verify();
            lines.push(format!("membership: {}", m.describe()));
            if !m.member {
                return membership_failure(out, &lines);
            }
            channel_method(gi, method)?
        }
        Problem::Gpovm(p) => {
            let m = verify_gpovm(p, &tol);
            lines.push(format!("membership: {}", m.describe()));
            if !m.member {
                return membership_failure(out, &lines);
            }
            povm_method(p, method, &tol)?
        }
        Problem::Comb(c) => {
            let r = verify_comb(c, &tol);
            lines.push(format!(
                "membership: comb={} rung residuals {:?} terminal residual {:.3e} min eigenvalue {:.3e}",
                r.member, r.residuals, r.terminal_residual, r.min_eigenvalue
            ));
            if !r.member {
                return membership_failure(out, &lines);
            }
            let (x, input, output) = c.as_gchannel()?;
            let (_, j) = sample::comb_constraint(c.algebras(), &tol)?;
            let map = crate::cp_map::CpMap::from_choi(&x, &input, &output, &tol)?;
            channel_method(&GchanInstance::new(map, j)?, method)?
        }
        Problem::Tester(t) => {
            let r = verify_tester(t, &tol);
            lines.push(format!(
                "membership: tester={} factorization residual {:.3e} min eigenvalue {:.3e}",
                r.member, r.factorization_residual, r.min_eigenvalue
            ));
            if !r.member {
                return membership_failure(out, &lines);
            }
            match method {
                MethodArg::Auto => tester_extremal(t, &tol)?,
                m => povm_method(&t.as_gpovm(&tol)?, m, &tol)?,
            }
        }
    };
    let code = verdict_code(&rep);
    let mut witness_file = None;
    if rep.verdict == Verdict::NotExtremal && (rep.witness.is_some() || rep.effect_witness.is_some()) {
        let wp = witness_path(path);
        write_json(&wp, &WitnessFile::from_report(&rep))?;
        witness_file = Some(wp);
    }
    if json {
        let value = serde_json::json!({
            "verdict": rep.verdict.as_str(),
            "method": rep.method.as_str(),
            "margin": rep.margin,
            "rank_data": {
                "unknowns": rep.rank_data.unknowns,
                "equations": rep.rank_data.equations,
                "rank": rep.rank_data.rank,
                "nullity": rep.rank_data.nullity,
                "structural": rep.rank_data.structural,
                "null_residual": rep.rank_data.null_residual,
            },
            "cross_checks": rep.cross_checks.iter().map(|(m, v)| serde_json::json!({"method": m.as_str(), "verdict": v.as_str()})).collect::<Vec<_>>(),
            "disagreement": rep.disagreement,
            "note": rep.note,
            "witness_file": witness_file.as_ref().map(|p| p.display().to_string()),
        });
        writeln!(out, "{}", serde_json::to_string_pretty(&value).expect("json")).map_err(io_err)?;
        return Ok(code);
    }
    lines.push(format!("verdict: {}", rep.verdict));
    lines.push(format!("method: {}", rep.method));
    lines.push(format!("margin: {:.6e}", rep.margin));
    let d = &rep.rank_data;
    lines.push(format!(
        "rank_data: unknowns={} equations={} rank={} nullity={} structural={} null_residual={:.3e}",
        d.unknowns, d.equations, d.rank, d.nullity, d.structural, d.null_residual
    ));
    for (m, v) in &rep.cross_checks {
        lines.push(format!("cross_check: {m} {v}"));
    }
    if rep.disagreement {
        lines.push("disagreement: true".into());
    }
    if let Some(n) = &rep.note {
        lines.push(format!("note: {n}"));
    }
    if let Some(p) = &witness_file {
        lines.push(format!("witness: {}", p.display()));
    }
    for l in lines {
        writeln!(out, "{l}").map_err(io_err)?;
    }
    Ok(code)
}

fn membership_failure(out: &mut dyn Write, lines: &[String]) -> crate::error::Result<i32> {
    for l in lines {
        writeln!(out, "{l}").map_err(io_err)?;
    }
    Ok(EXIT_MEMBERSHIP)
}

fn io_err(e: std::io::Error) -> Error {
    Error::Io(e.to_string())
}

/// Parses one algebra: `3` is `M_3`, `2+1` is `M_2 ⊕ ℂ`.
pub fn parse_algebra(text: &str) -> crate::error::Result<Algebra> {
    let dims = text
        .split('+')
        .map(|d| {
            d.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad dimension {d:?}")))
        })
        .collect::<crate::error::Result<Vec<_>>>()?;
    if dims.contains(&0) {
        return Err(Error::Parse(format!("dimensions must be at least 1 in {text:?}")));
    }
    Algebra::new(&dims)
}

pub fn parse_algebra_list(text: &str) -> crate::error::Result<Vec<Algebra>> {
    text.split(',').map(parse_algebra).collect()
}

fn parse_counts(text: &str, n: usize) -> crate::error::Result<Vec<String>> {
    let parts: Vec<String> = text.split(',').map(|s| s.trim().to_string()).collect();
    if parts.len() != n {
        return Err(Error::Parse(format!("expected {n} comma-separated dims, got {text:?}")));
    }
    Ok(parts)
}

fn parse_count(text: &str) -> crate::error::Result<usize> {
    match text.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::Parse(format!("bad count {text:?}"))),
    }
}

pub fn cmd_comb(algebras: &str, emit: EmitArg, out: &mut dyn Write) -> crate::error::Result<i32> {
    let algs = parse_algebra_list(algebras)?;
    if algs.len() < 2 {
        return Err(Error::Parse("need at least B_0 and B_1".into()));
    }
    let perp = comb_perp_basis(&algs)?;
    match emit {
        EmitArg::Dims => {
            let n = algs.len() - 1;
            let dim_a = comb_algebra(&algs, n)?.dim();
            let line = serde_json::json!({
                "n": n,
                "dim_algebra": dim_a,
                "dim_perp": perp.dim(),
                "dim_j": dim_a - perp.dim(),
            });
            writeln!(out, "{line}").map_err(io_err)?;
        }
        EmitArg::PerpBasis => {
            for b in perp.basis() {
                let f = OperatorFile::from_operator(&b, Some(Role::SubspaceBasisElement));
                writeln!(out, "{}", serde_json::to_string(&f).expect("json")).map_err(io_err)?;
            }
        }
    }
    Ok(0)
}

pub fn cmd_sample(
    kind: KindArg,
    dims: &str,
    seed: u64,
    constraint: ConstraintArg,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> crate::error::Result<i32> {
    let tol = Tolerance::default();
    let mut rng = sample::rng_from_seed(seed);
    let file = match kind {
        KindArg::Channel => {
            let p = parse_counts(dims, 2)?;
            let (input, output) = (parse_algebra(&p[0])?, parse_algebra(&p[1])?);
            let k = rng.random_range_kraus(input.total_dim() * output.total_dim());
            let map = sample::random_channel(&input, &output, k, &tol, &mut rng)?;
            let gi = GchanInstance::new(map, Subspace::whole(&input))?;
            ProblemFile::gchannel(&gi, SubspaceSpec::Full).with_generator(seed, "channel")
        }
        KindArg::Gchannel => {
            let (output, j, spec) = match constraint {
                ConstraintArg::Full => {
                    let p = parse_counts(dims, 2)?;
                    (parse_algebra(&p[1])?, Subspace::whole(&parse_algebra(&p[0])?), SubspaceSpec::Full)
                }
                ConstraintArg::Diag => {
                    let p = parse_counts(dims, 2)?;
                    let n = parse_count(&p[0])?;
                    let lambda = sample::random_probability(n, &mut rng);
                    let (j, _, _) = crate::gchannel::diag_subspace(&lambda, &tol)?;
                    (parse_algebra(&p[1])?, j, SubspaceSpec::Diag { lambda })
                }
                ConstraintArg::Comb => {
                    let p = parse_counts(dims, 3)?;
                    let (b0, b1) = (parse_algebra(&p[0])?, parse_algebra(&p[1])?);
                    let spec = SubspaceSpec::Comb {
                        algebras: vec![b0.block_dims(), b1.block_dims()],
                    };
                    let j = spec.resolve(&b1.tensor(&b0), &tol)?;
                    (parse_algebra(&p[2])?, j, spec)
                }
            };
            let map = sample::projected_gchannel(&output, &j, &tol, &mut rng)?;
            let gi = GchanInstance::new(map, j)?;
            ProblemFile::gchannel(&gi, spec).with_generator(seed, "gchannel")
        }
        KindArg::Povm | KindArg::Pvm => {
            let p = parse_counts(dims, 2)?;
            let alg = parse_algebra(&p[0])?;
            let m = parse_count(&p[1])?;
            let effects = if kind == KindArg::Pvm {
                sample::random_pvm(&alg, m, &mut rng)
            } else {
                sample::random_povm(&alg, m, None, &tol, &mut rng)?
            };
            let povm = Povm::unconstrained(effects)?;
            let label = if kind == KindArg::Pvm { "pvm" } else { "povm" };
            ProblemFile::gpovm(&povm, SubspaceSpec::Full).with_generator(seed, label)
        }
        KindArg::Tester => {
            let p = parse_counts(dims, 3)?;
            let (h0, h1) = (parse_algebra(&p[0])?, parse_algebra(&p[1])?);
            let m = parse_count(&p[2])?;
            let lambda = sample::random_povm(&h1.tensor(&h0), m, None, &tol, &mut rng)?;
            let t = sample::random_tester(&h1, &h0, &lambda, None, &tol, &mut rng)?;
            ProblemFile::tester(&t).with_generator(seed, "tester")
        }
    };
    match path {
        Some(p) => write_json(p, &file)?,
        None => writeln!(out, "{}", crate::io::to_json(&file)).map_err(io_err)?,
    }
    Ok(0)
}

trait KrausCount {
    fn random_range_kraus(&mut self, max: usize) -> usize;
}

impl<R: rand::Rng> KrausCount for R {
    fn random_range_kraus(&mut self, max: usize) -> usize {
        self.random_range(1..=max.clamp(1, 4))
    }
}
