use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use qchemflow::data::{from_json, parse_xyz, Structure};
use qchemflow::registry;
use qchemflow::workflow::{run_workflow, WorkflowConfig};

#[derive(Parser)]
#[command(name = "qchemflow", about = "Ground-state energy workflow: SCF, CASCI and quantum phase estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline described by a config file on one structure.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// XYZ file (Ångström) or structure JSON document (Bohr).
        #[arg(long)]
        structure: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Overrides the seed of the final stage.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List algorithm kinds, or the implementations of one kind.
    List { kind: Option<String> },
    /// Print the toolkit version.
    Version,
}

/// Failure with its exit code: 1 for stage failures, 2 for bad input.
struct Failure(u8, String);

fn input_error(e: impl std::fmt::Display) -> Failure {
    Failure(2, e.to_string())
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        from_json::<Structure>(&text).map_err(|e| e.to_string())
    } else {
        parse_xyz(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn cmd_run(config: &Path, structure: &Path, output: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let text = fs::read_to_string(config).map_err(|e| input_error(format!("{}: {e}", config.display())))?;
    let cfg = WorkflowConfig::from_json(&text).map_err(|e| Failure(2, format!("{}: {e}", config.display())))?;
    let structure = load_structure(structure)?;
    let result = run_workflow(&cfg, &structure, seed).map_err(|e| Failure(e.exit_code() as u8, e.to_string()))?;
    let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let doc = result.to_json_value(Some(timestamp));
    let mut body = serde_json::to_string_pretty(&doc).expect("result serializes");
    body.push('\n');
    fs::write(output, body).map_err(|e| Failure(1, format!("{}: {e}", output.display())))?;
    println!("E_RHF   = {:.10}", result.summary.scf_energy);
    println!("E_CASCI = {:.10}", result.summary.casci_energy);
    println!("E       = {:.10}  (diff {:+.6})", result.energy(), result.energy() - result.summary.casci_energy);
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn cmd_list(kind: Option<&str>) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    let Some(kind) = kind else {
        for k in registry::list_kinds() {
            let _ = writeln!(out, "{k}");
        }
        return Ok(());
    };
    let listing = registry::list(kind);
    if !listing.found {
        return Err(Failure(2, format!("unknown kind {kind:?}; valid kinds: {}", registry::list_kinds().join(", "))));
    }
    for imp in listing.implementations {
        let _ = writeln!(out, "{}{}", imp.name, if imp.is_default { " (default)" } else { "" });
        for s in imp.schema {
            let _ = writeln!(out, "    {} = {}    {}", s.key, s.default, s.description);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let r = match cli.command {
        Command::Run { config, structure, output, seed } => cmd_run(&config, &structure, &output, seed),
        Command::List { kind } => cmd_list(kind.as_deref()),
        Command::Version => {
            println!("qchemflow {}", qchemflow::TOOLKIT_VERSION);
            Ok(())
        }
    };
    match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
