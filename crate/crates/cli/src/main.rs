//! Command-line front end for the cyclic provability-logic toolkit: proof
//! search with certificate or countermodel output, certificate checking,
//! countermodel extraction and verification, model checking, first-order
//! translation, cut-degree reduction, and model enumeration.
//!
//! Exit codes: 0 success/provable/true, 1 refutable/invalid/false,
//! 2 unknown/unfinished, 3 usage error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;

use igl_core::countermodel::{extract_countermodel, verify_countermodel};
use igl_core::cutelim::{degree_of, degree_reduce_bounded, embed_multisuccedent, DegreeReduceOutcome};
use igl_core::cyclic::check_progress;
use igl_core::formula::standard_translation;
use igl_core::prover::{prove, DenierTree, SearchConfig, SearchOutcome};
use igl_core::semantics::{
    birel_satisfies, classical_satisfies, enumerate_igl_models, BirelModel,
};
use igl_core::{CyclicProof, Formula, Label, SystemId};

const EXIT_OK: u8 = 0;
const EXIT_INVALID: u8 = 1;
const EXIT_UNKNOWN: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "igl", about = "Cyclic proof search and countermodels for GL and IGL", version)]
struct Cli {
    /// Pretty-print JSON output
    #[arg(long, global = true)]
    pretty: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a cyclic proof; emit a certificate or a countermodel
    Prove {
        /// Formula, e.g. "[]([]p -> p) -> []p"
        #[arg(short, long)]
        formula: String,
        /// Proof system: gl (classical), igl, or migl (multi-succedent)
        #[arg(short, long, default_value = "igl")]
        system: String,
        /// Bound on the number of labels per sequent
        #[arg(long)]
        max_labels: Option<usize>,
        /// Bound on the search depth
        #[arg(long)]
        max_depth: Option<usize>,
        /// Write the certificate or countermodel here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the raw refutation tree here when refutable
        #[arg(long)]
        refutation: Option<PathBuf>,
    },
    /// Check a certificate: local rule instances plus the progress condition
    CheckProof {
        /// Certificate JSON file
        file: PathBuf,
    },
    /// Extract and verify a Kripke countermodel from a refutation tree
    Countermodel {
        /// Refutation-tree JSON file
        file: PathBuf,
    },
    /// Evaluate a formula at a world of a birelational model
    Modelcheck {
        /// Model JSON file
        #[arg(short, long)]
        model: PathBuf,
        /// World name
        #[arg(short, long)]
        world: String,
        /// Formula to evaluate
        #[arg(short, long)]
        formula: String,
        /// Use the classical clauses (ignore the intuitionistic order)
        #[arg(long)]
        classical: bool,
    },
    /// Print the first-order standard translation of a formula
    Translate {
        /// Formula to translate
        #[arg(short, long)]
        formula: String,
        /// Free world variable of the translation
        #[arg(long, default_value = "x")]
        var: String,
    },
    /// Reduce the cut degree of a certificate to at most one
    ReduceCut {
        /// Certificate JSON file
        file: PathBuf,
        /// Bound on the bar height swept during reduction
        #[arg(long, default_value_t = 12)]
        max_height: usize,
        /// Write the reduced certificate here instead of stdout
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Stream all birelational strict-order models up to a size bound
    EnumerateModels {
        /// Maximum number of worlds
        #[arg(long)]
        max_worlds: usize,
        /// Comma-separated propositional atoms
        #[arg(long, default_value = "p,q")]
        atoms: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are successes, not usage errors
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(cli: &Cli) -> Result<u8, String> {
    match &cli.command {
        Command::Prove {
            formula,
            system,
            max_labels,
            max_depth,
            output,
            refutation,
        } => cmd_prove(cli, formula, system, *max_labels, *max_depth, output, refutation),
        Command::CheckProof { file } => cmd_check_proof(file),
        Command::Countermodel { file } => cmd_countermodel(cli, file),
        Command::Modelcheck {
            model,
            world,
            formula,
            classical,
        } => cmd_modelcheck(model, world, formula, *classical),
        Command::Translate { formula, var } => cmd_translate(formula, var),
        Command::ReduceCut {
            file,
            max_height,
            output,
        } => cmd_reduce_cut(cli, file, *max_height, output),
        Command::EnumerateModels { max_worlds, atoms } => {
            cmd_enumerate_models(cli, *max_worlds, atoms)
        }
    }
}

fn parse_formula(text: &str) -> Result<Formula, String> {
    Formula::parse(text).map_err(|e| format!("cannot parse formula {text:?}: {e}"))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

fn render<T: Serialize>(value: &T, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(value).expect("serialization cannot fail")
    } else {
        serde_json::to_string(value).expect("serialization cannot fail")
    }
}

/// Write the JSON rendering of `value` to `output`, or to stdout if absent.
fn emit<T: Serialize>(value: &T, pretty: bool, output: &Option<PathBuf>) -> Result<(), String> {
    let text = render(value, pretty);
    match output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_prove(
    cli: &Cli,
    formula: &str,
    system: &str,
    max_labels: Option<usize>,
    max_depth: Option<usize>,
    output: &Option<PathBuf>,
    refutation: &Option<PathBuf>,
) -> Result<u8, String> {
    let f = parse_formula(formula)?;
    let sys = SystemId::from_str(system)?;
    let mut cfg = SearchConfig::for_system(sys);
    if let Some(n) = max_labels {
        cfg.max_labels = n;
    }
    if let Some(n) = max_depth {
        cfg.max_depth = n;
    }
    match prove(&f, &cfg) {
        SearchOutcome::Provable(proof) => {
            println!("Provable");
            emit(&proof, cli.pretty, output)?;
            Ok(EXIT_OK)
        }
        SearchOutcome::Refutable(denier) => {
            println!("Refutable");
            if let Some(path) = refutation {
                emit(&denier, cli.pretty, &Some(path.clone()))?;
            }
            let model = extract_countermodel(&denier)?;
            emit(&model, cli.pretty, output)?;
            Ok(EXIT_INVALID)
        }
        SearchOutcome::Unknown { reason, frontier } => {
            println!("Unknown: {reason} (frontier: {frontier})");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn cmd_check_proof(file: &PathBuf) -> Result<u8, String> {
    let proof: CyclicProof = read_json(file)?;
    if let Err(e) = proof.check_local() {
        println!("invalid: {e}");
        return Ok(EXIT_INVALID);
    }
    if let Err(e) = check_progress(&proof) {
        println!("non-progressing: {e}");
        return Ok(EXIT_INVALID);
    }
    println!(
        "ok: {} nodes, {} back-edges, conclusion {}",
        proof.nodes.len(),
        proof.back_edge_count(),
        proof.conclusion()
    );
    Ok(EXIT_OK)
}

fn cmd_countermodel(cli: &Cli, file: &PathBuf) -> Result<u8, String> {
    let denier: DenierTree = read_json(file)?;
    denier.validate()?;
    let model = extract_countermodel(&denier)?;
    emit(&model, cli.pretty, &None)?;
    let root = &denier.nodes[denier.root].sequent;
    let goals: Vec<_> = root
        .rhs()
        .iter()
        .filter_map(|d| d.as_single())
        .cloned()
        .collect();
    if goals.is_empty() {
        println!("not verified: root sequent has no single-formula goal");
        return Ok(EXIT_INVALID);
    }
    for g in &goals {
        if let Err(e) = verify_countermodel(&model, &g.label, &g.formula, denier.system) {
            println!("invalid: {e}");
            return Ok(EXIT_INVALID);
        }
    }
    println!("ok: falsifies the goal at world {}", model.root);
    Ok(EXIT_OK)
}

fn cmd_modelcheck(
    model: &PathBuf,
    world: &str,
    formula: &str,
    classical: bool,
) -> Result<u8, String> {
    let m: BirelModel = read_json(model)?;
    let f = parse_formula(formula)?;
    let w = m
        .world_index(world)
        .ok_or_else(|| format!("world {world:?} does not exist in the model"))?;
    let holds = if classical {
        classical_satisfies(&m, w, &f)
    } else {
        birel_satisfies(&m, w, &f)
    };
    println!("{holds}");
    Ok(if holds { EXIT_OK } else { EXIT_INVALID })
}

fn cmd_translate(formula: &str, var: &str) -> Result<u8, String> {
    let f = parse_formula(formula)?;
    println!("{}", standard_translation(&Label::new(var), &f));
    Ok(EXIT_OK)
}

fn cmd_reduce_cut(
    cli: &Cli,
    file: &PathBuf,
    max_height: usize,
    output: &Option<PathBuf>,
) -> Result<u8, String> {
    let proof: CyclicProof = read_json(file)?;
    proof.check_local().map_err(|e| format!("input certificate is invalid: {e}"))?;
    // multi-succedent certificates are first embedded into the
    // disjunction-formula calculus, which is where cuts are reduced
    let embedded = if proof.system == SystemId::MIK4 {
        embed_multisuccedent(&proof).map_err(|e| format!("embedding failed: {e}"))?
    } else {
        proof
    };
    match degree_reduce_bounded(&embedded, max_height) {
        DegreeReduceOutcome::Done(reduced) => {
            println!("Reduced: cut degree {}", degree_of(&reduced));
            emit(&reduced, cli.pretty, output)?;
            Ok(EXIT_OK)
        }
        DegreeReduceOutcome::Unfinished { reason, .. } => {
            println!("Unfinished: {reason}");
            Ok(EXIT_UNKNOWN)
        }
    }
}

fn cmd_enumerate_models(cli: &Cli, max_worlds: usize, atoms: &str) -> Result<u8, String> {
    let atoms: Vec<String> = atoms
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect();
    for m in enumerate_igl_models(max_worlds, &atoms) {
        println!("{}", render(&m, cli.pretty));
    }
    Ok(EXIT_OK)
}
