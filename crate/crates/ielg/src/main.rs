//! Command-line front end: parse, prove, check, transform, export.

use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ielg::document::{render_latex, render_text, ProofDoc};
use ielg::transform;
use ielg::{
    check_proof, prove, saturate_oracle, CalculusId, Formula, ProofTree, ProveOptions,
    SearchResult, Sequent,
};

#[derive(Parser)]
#[command(name = "ielg", version, about = "Decision procedure and proof toolkit for intuitionistic epistemic logic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a formula or sequent and print a proof when one exists
    Prove {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Abort with INCONCLUSIVE after expanding this many nodes
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Print search statistics to standard error
        #[arg(long)]
        stats: bool,
    },
    /// Check a structured proof document against a calculus
    Check {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_calculus)]
        calculus: CalculusId,
    },
    /// Eliminate all cuts (and IELG-only rules) from a proof, yielding IELG-
    ElimCut {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Rewrite an IELG++ proof into a monotone proof of the same end-sequent
    Monotonize {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Rewrite a monotone IELG++ proof into set form
    SetNormalize {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Replay IELG+/IELG++ shorthand rules by their IELG- simulations
    Expand {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_parser = parse_calculus, default_value = "ielg++")]
        calculus: CalculusId,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Decide a formula or sequent with the saturation oracle
    Oracle {
        #[command(flatten)]
        input: Input,
    },
}

#[derive(Args)]
struct Input {
    /// Literal input text; use '-' (or omit) to read standard input
    text: Option<String>,
    /// Read the input from a file instead
    #[arg(long, conflicts_with = "text")]
    file: Option<PathBuf>,
}

#[derive(Copy, Clone, ValueEnum)]
enum Format {
    Text,
    Json,
    Latex,
}

fn parse_calculus(s: &str) -> Result<CalculusId, String> {
    s.parse()
}

fn read_input(input: &Input) -> Result<String, String> {
    if let Some(path) = &input.file {
        return std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()));
    }
    match input.text.as_deref() {
        Some("-") | None => {
            let mut buf = String::new();
            std::io::stdin()
                .read_to_string(&mut buf)
                .map_err(|e| format!("standard input: {e}"))?;
            Ok(buf)
        }
        Some(text) => Ok(text.to_string()),
    }
}

/// Accepts either a sequent (`G1, G2 |- F`) or a bare formula (read as `|- F`).
fn parse_sequent(text: &str) -> Result<Sequent, String> {
    let text = text.trim();
    match Sequent::parse(text) {
        Ok(s) => Ok(s),
        Err(seq_err) => match Formula::parse(text) {
            Ok(f) => Ok(Sequent::from_goal(f)),
            Err(_) => Err(seq_err.to_string()),
        },
    }
}

fn parse_proof(text: &str) -> Result<ProofTree, String> {
    ProofDoc::from_json(text)
        .and_then(|d| d.to_tree())
        .map_err(|e| e.to_string())
}

fn render(t: &ProofTree, format: Format) -> String {
    match format {
        Format::Text => render_text(t),
        Format::Json => ProofDoc::from_tree(t).to_json() + "\n",
        Format::Latex => render_latex(t),
    }
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn transformed(
    input: &Input,
    format: Format,
    op: &dyn Fn(&ProofTree) -> Result<ProofTree, transform::TransformError>,
) -> ExitCode {
    let text = match read_input(input) {
        Ok(t) => t,
        Err(e) => return usage_error(&e),
    };
    let tree = match parse_proof(&text) {
        Ok(t) => t,
        Err(e) => return usage_error(&e),
    };
    match op(&tree) {
        Ok(out) => {
            print!("{}", render(&out, format));
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(&e.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Prove {
            input,
            format,
            max_nodes,
            stats,
        } => {
            let text = match read_input(input) {
                Ok(t) => t,
                Err(e) => return usage_error(&e),
            };
            let sequent = match parse_sequent(&text) {
                Ok(s) => s,
                Err(e) => return usage_error(&e),
            };
            let result = prove(
                &sequent,
                &ProveOptions {
                    max_nodes: *max_nodes,
                },
            );
            if *stats {
                let s = result.stats();
                eprintln!(
                    "nodes_expanded={} max_depth_reached={} cache_hits={}",
                    s.nodes_expanded, s.max_depth_reached, s.cache_hits
                );
            }
            match result {
                SearchResult::Proved { proof, .. } => {
                    println!("PROVED {}", proof.conclusion);
                    print!("{}", render(&proof, *format));
                    ExitCode::SUCCESS
                }
                SearchResult::Unprovable { stats } => {
                    println!(
                        "UNPROVABLE {} (nodes_expanded={} max_depth_reached={} cache_hits={})",
                        sequent, stats.nodes_expanded, stats.max_depth_reached, stats.cache_hits
                    );
                    ExitCode::from(1)
                }
                SearchResult::Inconclusive { stats } => {
                    println!(
                        "INCONCLUSIVE {} (node budget exhausted after {})",
                        sequent, stats.nodes_expanded
                    );
                    ExitCode::from(2)
                }
            }
        }
        Command::Check { input, calculus } => {
            let text = match read_input(input) {
                Ok(t) => t,
                Err(e) => return usage_error(&e),
            };
            let tree = match parse_proof(&text) {
                Ok(t) => t,
                Err(e) => return usage_error(&e),
            };
            let verdict = check_proof(*calculus, &tree);
            if verdict.is_valid() {
                println!("VALID");
                ExitCode::SUCCESS
            } else {
                println!("INVALID: {verdict}");
                ExitCode::from(1)
            }
        }
        Command::ElimCut { input, format } => {
            transformed(input, *format, &transform::eliminate_cuts)
        }
        Command::Monotonize { input, format } => {
            transformed(input, *format, &transform::monotonize)
        }
        Command::SetNormalize { input, format } => {
            transformed(input, *format, &transform::set_normalize)
        }
        Command::Expand {
            input,
            calculus,
            format,
        } => {
            let cal = *calculus;
            transformed(input, *format, &move |t| transform::expand_to_minus(cal, t))
        }
        Command::Oracle { input } => {
            let text = match read_input(input) {
                Ok(t) => t,
                Err(e) => return usage_error(&e),
            };
            let sequent = match parse_sequent(&text) {
                Ok(s) => s,
                Err(e) => return usage_error(&e),
            };
            match saturate_oracle(&sequent) {
                Some(true) => {
                    println!("PROVABLE {sequent}");
                    ExitCode::SUCCESS
                }
                Some(false) => {
                    println!("UNPROVABLE {sequent}");
                    ExitCode::from(1)
                }
                None => usage_error("subformula closure exceeds the oracle tabulation limit"),
            }
        }
    }
}
