//! `mtype` — exact commutator-multitype computations for sum-of-squares
//! domains from the command line.
//!
//! Exit codes: 0 success, 1 usage/parse errors, 2 out-of-scope input,
//! 3 internal soundness failure (a result that failed its own
//! verification).

use std::io::Read;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mtype_core::domain::{parse, DomainSpec};
use mtype_core::report::{error_outcome, run, Command, RunFlags};
use mtype_core::weights::Weight;
use mtype_core::Error;

#[derive(Parser)]
#[command(
    name = "mtype",
    about = "Commutator multitype, boundary systems and normal forms for sum-of-squares domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(clap::Args, Clone)]
struct CommonArgs {
    /// Input file; "-" reads stdin.
    #[arg(default_value = "-")]
    input: String,
    /// Emit the JSON report only.
    #[arg(long)]
    json: bool,
    /// Maximum list length for oracle enumerations.
    #[arg(long, value_name = "N")]
    max_len: Option<usize>,
    /// Maximum denominator for oracle weight candidates.
    #[arg(long, value_name = "N")]
    max_denominator: Option<u64>,
    /// Skip the oracle cross-check.
    #[arg(long)]
    no_oracle: bool,
    /// Weight as comma-separated rationals, "inf" allowed (e.g. 1,4,14/3,inf).
    #[arg(long, value_name = "W")]
    weight: Option<String>,
    /// Test hook: corrupt the last computed entry so the soundness check fails.
    #[arg(long, hide = true)]
    sabotage: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the commutator multitype, boundary system and ideal.
    Compute(CommonArgs),
    /// Run only the brute-force oracle search for the multitype.
    Oracle(CommonArgs),
    /// Check a weight for Γ_n membership and distinguishedness.
    VerifyWeight(CommonArgs),
    /// Normalize the boundary system (Re z_j normal form).
    Normalize(CommonArgs),
    /// Sweep the model for torsion (antiholomorphic obstructions).
    TorsionCheck(CommonArgs),
    /// Run the randomized crossterm-inequality suite.
    CrosstermCheck {
        /// Emit the JSON report only.
        #[arg(long)]
        json: bool,
        /// Number of random triples.
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Error::Usage(format!("failed to read stdin: {e}")))?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("failed to read {path}: {e}")))
    }
}

fn seed_from_env() -> u64 {
    std::env::var("MTYPE_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(0x6d74)
}

fn flags_from(args: &CommonArgs) -> Result<RunFlags, Error> {
    let weight = match &args.weight {
        Some(w) => Some(Weight::parse(w)?),
        None => None,
    };
    Ok(RunFlags {
        json: args.json,
        max_len: args.max_len,
        max_denominator: args.max_denominator,
        no_oracle: args.no_oracle,
        weight,
        seed: seed_from_env(),
        count: 200,
        sabotage: args.sabotage,
    })
}

fn load_spec(args: &CommonArgs) -> Result<DomainSpec, Error> {
    parse(&read_input(&args.input)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, spec, flags) = match &cli.command {
        Cmd::Compute(a) => (Command::Compute, Some(a), flags_from(a)),
        Cmd::Oracle(a) => (Command::Oracle, Some(a), flags_from(a)),
        Cmd::VerifyWeight(a) => (Command::VerifyWeight, Some(a), flags_from(a)),
        Cmd::Normalize(a) => (Command::Normalize, Some(a), flags_from(a)),
        Cmd::TorsionCheck(a) => (Command::TorsionCheck, Some(a), flags_from(a)),
        Cmd::CrosstermCheck { json, count } => (
            Command::CrosstermCheck,
            None,
            Ok(RunFlags {
                json: *json,
                count: *count,
                seed: seed_from_env(),
                ..RunFlags::default()
            }),
        ),
    };

    let flags = match flags {
        Ok(f) => f,
        Err(e) => {
            let out = error_outcome(&e);
            eprintln!("{}", out.text);
            return ExitCode::from(out.exit as u8);
        }
    };

    let parsed = match spec {
        Some(args) => match load_spec(args) {
            Ok(s) => Some(s),
            Err(e) => {
                let out = error_outcome(&e);
                if flags.json {
                    println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
                } else {
                    eprintln!("{}", out.text);
                }
                return ExitCode::from(out.exit as u8);
            }
        },
        None => None,
    };

    let out = run(cmd, parsed.as_ref(), &flags);
    if flags.json {
        println!("{}", serde_json::to_string_pretty(&out.json).unwrap());
    } else {
        print!("{}", out.text);
        if out.exit != 0 {
            eprintln!("(exit code {})", out.exit);
        }
    }
    ExitCode::from(out.exit as u8)
}
