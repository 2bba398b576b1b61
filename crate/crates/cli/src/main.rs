//! `frobexp` command-line front end. Every subcommand reads and writes JSON.

use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};
use serde_json::{json, Value};

use frobexp::arith::{Fp, Mat, Modulus};
use frobexp::exponential::{
    engel_flag, extract_tuple, one_param_from_tuple, tuple_to_infinitesimal, TupleJson,
};
use frobexp::morphisms::{AnyMorphism, MorphismJson};
use frobexp::oracle::{
    certify_surjectivity, enumerate_commuting_tuples, enumerate_morphisms, verify_bijection,
    verify_commutation_equivalence, verify_equivariance, SampleSource, DEFAULT_BUDGET,
};
use frobexp::rootsys::{build_root_system, Family, ParabolicDatum};
use frobexp::unipotent::{make_group, BlockUnipotentGroup};

const FORMATS: &str = "\
JSON formats (all numbers are integer residues mod p):
  datum     {\"family\": \"A\", \"rank\": 3, \"J\": [2]}            J is 1-based
  group     {\"p\": 5, \"blocks\": [1, 1, 1]}
  morphism  {\"group\": group, \"r\": 2, \"images\": {\"Y_1_2\": [0, 1], ...}}
            images map each generator Y_i_j to coefficients of 1, t, t^2, ...;
            omit \"r\" for a one-parameter subgroup of U (untruncated)
  tuple     {\"p\": 5, \"n\": 3, \"entries\": [[0, 1, 0, 0, 0, 0, 0, 0, 0], ...]}
            entries are n x n matrices in row-major order
  report    {\"instance\": str, \"counts\": {str: int}, \"failures\": [{\"check\": str, \"detail\": str}],
             \"wall_time_ms\": int, \"seed\": int (randomized runs only)}
  error     {\"error\": str} on stderr

Exit codes: 0 success, 1 domain error, 2 usage error.";

#[derive(Parser)]
#[command(name = "frobexp", version, about = "Canonical lifts of infinitesimal one-parameter subgroups", after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DatumArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    rank: usize,
    /// Simple roots (1-based) generating the Levi.
    #[arg(long = "J", value_delimiter = ',')]
    j: Vec<usize>,
}

#[derive(Args)]
struct GroupArgs {
    /// Block sizes, e.g. 1,1,1.
    #[arg(long, value_delimiter = ',', required = true)]
    blocks: Vec<usize>,
    #[arg(long)]
    p: u64,
}

#[derive(Args)]
struct InstanceArgs {
    #[command(flatten)]
    group: GroupArgs,
    #[arg(long)]
    r: u32,
    /// Maximum number of candidates to enumerate.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: u64,
}

#[derive(Args)]
struct Input {
    /// JSON input file; stdin when absent or "-".
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Positive roots, highest root, Coxeter number, and the radical roots and class of P_J.
    RootInfo(DatumArgs),
    /// Whether p is good for the root system.
    GoodPrime {
        #[command(flatten)]
        datum: DatumArgs,
        #[arg(long)]
        p: u64,
    },
    /// Nilpotence class of the unipotent radical of P_J.
    Class(DatumArgs),
    /// Generators, comultiplication and antipode of the block-unitriangular group.
    MakeGroup(GroupArgs),
    /// Check that a morphism JSON is a Hopf algebra map.
    Validate(Input),
    /// Canonical lift of a height-r morphism to a one-parameter subgroup.
    Lift(Input),
    /// Restrict a morphism to height r.
    Restrict {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        r: u32,
    },
    /// Whether two morphisms of the same kind commute.
    Commute {
        /// First morphism file ("-" for stdin).
        left: PathBuf,
        /// Second morphism file ("-" for stdin).
        right: PathBuf,
    },
    /// Conjugate a morphism by an invertible matrix x, giving x^{-1} φ x.
    Conjugate {
        #[command(flatten)]
        input: Input,
        /// Row-major entries of x.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        x: Vec<i64>,
    },
    /// One-parameter subgroup exp(t x_0) exp(t^p x_1) ... of a tuple.
    Exp {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
    },
    /// Height-r morphism of an r-tuple.
    TupleToMorphism {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_delimiter = ',', required = true)]
        blocks: Vec<usize>,
        /// Height; defaults to the tuple length.
        #[arg(long)]
        r: Option<u32>,
    },
    /// Recover the commuting tuple of a one-parameter subgroup.
    Extract(Input),
    /// Matrix g with g x g^{-1} strictly upper triangular for every entry of a tuple.
    Engel(Input),
    /// Exhaustive and randomized checks on small instances.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Check the tuple-to-morphism map on every commuting tuple.
    VerifyBijection(InstanceArgs),
    /// Number of commuting r-tuples.
    CountTuples(InstanceArgs),
    /// Number of height-r morphisms, found by solving the Hopf equations.
    CountMorphisms(InstanceArgs),
    /// Compare the morphism set with the image of the tuples.
    Surjectivity(InstanceArgs),
    /// Compare commutation of morphisms, of their lifts and of their tuples.
    Commutation {
        #[command(flatten)]
        instance: InstanceArgs,
        /// Check every pair of tuple-derived morphisms instead of sampling.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, required_unless_present = "exhaustive")]
        seed: Option<u64>,
    },
    /// Check lift(x.φ) = x.lift(φ) on random conjugators.
    Equivariance {
        #[command(flatten)]
        group: GroupArgs,
        #[arg(long)]
        r: u32,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long)]
        seed: u64,
    },
}

/// Failures reported as `{"error": ...}` with the given exit code.
struct Failure {
    message: String,
    code: u8,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            message: e.to_string(),
            code: 1,
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code: 2,
    }
}

type CliResult = Result<Value, Failure>;

fn read_text(path: Option<&PathBuf>) -> Result<String, Failure> {
    let mut text = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            text = fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        }
        _ => {
            io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| usage(format!("stdin: {e}")))?;
        }
    }
    Ok(text)
}

fn parse<T: serde::de::DeserializeOwned>(path: Option<&PathBuf>) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| usage(format!("malformed input: {e}")))
}

fn morphism(path: Option<&PathBuf>) -> Result<AnyMorphism, Failure> {
    let json: MorphismJson = parse(path)?;
    Ok(json.build()?)
}

fn datum(args: &DatumArgs) -> Result<ParabolicDatum, Failure> {
    let rs = build_root_system(args.family, args.rank)?;
    Ok(ParabolicDatum::from_one_based(rs, &args.j)?)
}

fn group(args: &GroupArgs) -> Result<Arc<BlockUnipotentGroup>, Failure> {
    Ok(make_group(&args.blocks, args.p)?)
}

fn to_value<T: serde::Serialize>(value: &T) -> CliResult {
    Ok(serde_json::to_value(value)?)
}

fn run(command: Command) -> CliResult {
    match command {
        Command::RootInfo(args) => {
            let d = datum(&args)?;
            let rs = d.root_system();
            Ok(json!({
                "family": rs.family(),
                "rank": rs.rank(),
                "J": args.j,
                "coxeter_number": rs.coxeter_number(),
                "highest_root": rs.highest_root(),
                "positive_roots": rs.positive_roots(),
                "radical_roots": d.radical_roots(),
                "class": d.nilpotence_class(),
            }))
        }
        Command::GoodPrime { datum: args, p } => {
            if !frobexp::arith::is_prime(p) {
                return Err(usage(format!("{p} is not prime")));
            }
            let d = datum(&args)?;
            Ok(json!({"good": d.root_system().is_good_prime(p)}))
        }
        Command::Class(args) => Ok(json!({"class": datum(&args)?.nilpotence_class()})),
        Command::MakeGroup(args) => {
            let g = group(&args)?;
            let generators: Vec<Value> = g
                .generators()
                .iter()
                .enumerate()
                .map(|(i, gen)| {
                    json!({
                        "name": gen.name(),
                        "row": gen.row + 1,
                        "col": gen.col + 1,
                        "grade": gen.grade,
                        "comultiplication": g.comultiplication(i).to_string(),
                        "antipode": g.antipode(i).to_string(),
                    })
                })
                .collect();
            Ok(json!({
                "group": g.descriptor(),
                "n": g.n(),
                "class": g.nilpotence_class(),
                "abelian": g.is_abelian(),
                "generators": generators,
            }))
        }
        Command::Validate(input) => {
            let m = morphism(input.input.as_ref())?;
            let kind = match m {
                AnyMorphism::Infinitesimal(_) => "infinitesimal",
                AnyMorphism::Global(_) => "one-parameter",
            };
            Ok(json!({"valid": true, "kind": kind}))
        }
        Command::Lift(input) => match morphism(input.input.as_ref())? {
            AnyMorphism::Infinitesimal(phi) => to_value(&phi.lift()?.to_json()),
            AnyMorphism::Global(_) => Err(usage("lift expects a morphism with \"r\"")),
        },
        Command::Restrict { input, r } => {
            let restricted = match morphism(input.input.as_ref())? {
                AnyMorphism::Infinitesimal(phi) => phi.restrict(r)?,
                AnyMorphism::Global(psi) => psi.restrict(r)?,
            };
            to_value(&restricted.to_json())
        }
        Command::Commute { left, right } => {
            if left.as_os_str() == "-" && right.as_os_str() == "-" {
                return Err(usage("at most one of the morphisms can come from stdin"));
            }
            let verdict = match (morphism(Some(&left))?, morphism(Some(&right))?) {
                (AnyMorphism::Infinitesimal(a), AnyMorphism::Infinitesimal(b)) => {
                    a.commutes_with(&b)?
                }
                (AnyMorphism::Global(a), AnyMorphism::Global(b)) => a.commutes_with(&b)?,
                _ => return Err(usage("both morphisms must be infinitesimal or both global")),
            };
            Ok(json!({"commute": verdict}))
        }
        Command::Conjugate { input, x } => {
            let m = morphism(input.input.as_ref())?;
            let g = match &m {
                AnyMorphism::Infinitesimal(phi) => phi.group().clone(),
                AnyMorphism::Global(psi) => psi.group().clone(),
            };
            let x = Mat::<Fp>::from_ints(g.modulus(), g.n(), &x)
                .map_err(|e| usage(format!("--x needs {} entries: {e}", g.n() * g.n())))?;
            match m {
                AnyMorphism::Infinitesimal(phi) => to_value(&phi.conjugate(&x)?.to_json()),
                AnyMorphism::Global(psi) => to_value(&psi.conjugate(&x)?.to_json()),
            }
        }
        Command::Exp { input, blocks } => {
            let tuple_json: TupleJson = parse(input.input.as_ref())?;
            let g = make_group(&blocks, tuple_json.p)?;
            to_value(&one_param_from_tuple(&tuple_json.to_tuple(&g)?)?.to_json())
        }
        Command::TupleToMorphism { input, blocks, r } => {
            let tuple_json: TupleJson = parse(input.input.as_ref())?;
            let g = make_group(&blocks, tuple_json.p)?;
            let tuple = tuple_json.to_tuple(&g)?;
            let r = r.unwrap_or(tuple.len() as u32);
            to_value(&tuple_to_infinitesimal(&tuple, r)?.to_json())
        }
        Command::Extract(input) => match morphism(input.input.as_ref())? {
            AnyMorphism::Global(psi) => to_value(&extract_tuple(&psi)?.to_json()),
            AnyMorphism::Infinitesimal(_) => {
                Err(usage("extract expects a one-parameter subgroup (no \"r\")"))
            }
        },
        Command::Engel(input) => {
            let tuple_json: TupleJson = parse(input.input.as_ref())?;
            let modulus = Modulus::new(tuple_json.p)?;
            let xs = tuple_json.matrices()?;
            let flag = engel_flag(modulus, tuple_json.n, &xs)?;
            let inv = flag.inverse()?;
            let conjugated: Vec<Mat<Fp>> = xs.iter().map(|x| flag.mul(x).mul(&inv)).collect();
            Ok(json!({
                "flag": flag.to_residues(),
                "conjugated": TupleJson::from_matrices(tuple_json.p, tuple_json.n, &conjugated),
            }))
        }
        Command::Oracle(cmd) => run_oracle(cmd),
    }
}

fn run_oracle(cmd: OracleCommand) -> CliResult {
    match cmd {
        OracleCommand::VerifyBijection(a) => {
            to_value(&verify_bijection(&group(&a.group)?, a.r, a.budget)?)
        }
        OracleCommand::CountTuples(a) => {
            let g = group(&a.group)?;
            let count = enumerate_commuting_tuples(&g, a.r, a.budget)?.len();
            Ok(json!({"group": g.descriptor(), "r": a.r, "tuples": count}))
        }
        OracleCommand::CountMorphisms(a) => {
            let g = group(&a.group)?;
            let count = enumerate_morphisms(&g, a.r, a.budget)?.len();
            Ok(json!({"group": g.descriptor(), "r": a.r, "morphisms": count}))
        }
        OracleCommand::Surjectivity(a) => {
            to_value(&certify_surjectivity(&group(&a.group)?, a.r, a.budget)?)
        }
        OracleCommand::Commutation {
            instance: a,
            exhaustive,
            samples,
            seed,
        } => {
            let source = match (exhaustive, seed) {
                (true, _) => SampleSource::AllTuples,
                (false, Some(seed)) => SampleSource::Random { samples, seed },
                (false, None) => return Err(usage("--seed is required unless --exhaustive")),
            };
            to_value(&verify_commutation_equivalence(
                &group(&a.group)?,
                a.r,
                source,
                a.budget,
            )?)
        }
        OracleCommand::Equivariance {
            group: args,
            r,
            samples,
            seed,
        } => to_value(&verify_equivariance(&group(&args)?, r, samples, seed)?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                return ExitCode::SUCCESS;
            }
            if e.kind() == ErrorKind::InvalidSubcommand {
                let names: Vec<String> = Cli::command()
                    .get_subcommands()
                    .map(|c| c.get_name().to_string())
                    .collect();
                eprintln!("valid subcommands: {}", names.join(", "));
            }
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(value) => {
            let text = serde_json::to_string_pretty(&value).expect("JSON values serialize");
            // A closed pipe downstream is not an error worth reporting.
            let _ = writeln!(io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("{}", json!({"error": failure.message}));
            ExitCode::from(failure.code)
        }
    }
}
