use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use toricdec::cli::{self, Config, Pipeline};
use toricdec::dsl::parse_angle;
use toricdec::torus::real::DEFAULT_MAX_BITS;
use toricdec::Result;

#[derive(Parser)]
#[command(name = "toricdec", about = "Decide Muller acceptance of fixed infinite words")]
struct Args {
    /// Bits of precision for real-number searches
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BITS)]
    precision_budget: u32,
    /// Letters simulated or substitution levels unfolded
    #[arg(long, global = true, default_value_t = 1 << 24)]
    step_budget: u64,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a prefix of a word (`@file` reads the expression from a file)
    Print {
        word: String,
        #[arg(short, default_value_t = 64)]
        n: u64,
    },
    /// Classify a finite factor as recurrent or transient
    Classify { word: String, factor: String },
    /// Decide acceptance; the automaton is a file or a built-in name
    Accept {
        word: String,
        automaton: String,
        #[arg(long, value_enum, default_value_t = Pipeline::Auto)]
        pipeline: Pipeline,
    },
    /// Orbit closure of a rotation
    Closure {
        #[arg(required = true)]
        angles: Vec<String>,
    },
    /// Compare both pipelines with a finite simulation
    Crosscheck {
        word: String,
        automaton: String,
        #[arg(long, default_value_t = 100_000)]
        horizon: u64,
    },
    /// Long (+,-)-free windows in the sign-pair word, and later occurrences
    Gaps { b: u64 },
    /// Check a golden-file directory, or write it with --write
    Fixtures {
        dir: PathBuf,
        #[arg(long)]
        write: bool,
    },
}

fn run(args: Args) -> Result<String> {
    let cfg = Config { precision_bits: args.precision_budget, step_budget: args.step_budget };
    match args.cmd {
        Cmd::Print { word, n } => cli::cmd_print(&cli::load_word(&word)?, n),
        Cmd::Classify { word, factor } => cli::cmd_classify(&cli::load_word(&word)?, &factor),
        Cmd::Accept { word, automaton, pipeline } => {
            let r = cli::cmd_accept(&cli::load_word(&word)?, &cli::load_automaton(&automaton)?, pipeline, &cfg)?;
            Ok(r.to_json())
        }
        Cmd::Closure { angles } => {
            let angles = angles.iter().map(|a| parse_angle(a)).collect::<Result<Vec<_>>>()?;
            cli::cmd_closure(&angles)
        }
        Cmd::Crosscheck { word, automaton, horizon } => {
            cli::cmd_crosscheck(&cli::load_word(&word)?, &cli::load_automaton(&automaton)?, horizon, &cfg)
        }
        Cmd::Gaps { b } => cli::cmd_gaps(b, &cfg),
        Cmd::Fixtures { dir, write } => cli::cmd_fixtures(&dir, write),
    }
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(s) => {
            println!("{s}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
