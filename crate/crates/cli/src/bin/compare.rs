use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use reach_cli::{compare, RunConfig, EXIT_INPUT_ERROR};
use subspace_reach::reach::DEFAULT_MAX_SEGMENTS;
use subspace_reach::{DecompositionMode, Representation};

/// Runs one model under several configurations and compares them.
#[derive(Debug, Parser)]
#[command(name = "reach-compare", version)]
struct Args {
    /// Model file.
    model: PathBuf,
    /// Decomposition modes to run.
    #[arg(long, value_delimiter = ',', default_value = "none,all")]
    modes: Vec<DecompositionMode>,
    /// Rest-sub-space representations to run.
    #[arg(long, value_delimiter = ',', default_value = "box")]
    reps: Vec<Representation>,
    /// Aggregation for every run (`on` or `off`); the model's setting if
    /// omitted.
    #[arg(long)]
    aggregation: Option<String>,
    /// Stop each run after this many segments.
    #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS)]
    max_segments: usize,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let aggregation = match args.aggregation.as_deref() {
        None => None,
        Some("on") => Some(true),
        Some("off") => Some(false),
        Some(other) => {
            eprintln!("error: --aggregation expects `on` or `off`, found `{other}`");
            return ExitCode::from(EXIT_INPUT_ERROR as u8);
        }
    };
    let mut configs = Vec::new();
    for &rep in &args.reps {
        for &mode in &args.modes {
            let mut c = RunConfig::new(&args.model);
            c.decomposition = Some(mode);
            c.representation = Some(rep);
            c.aggregation = aggregation;
            c.max_segments = args.max_segments;
            configs.push(c);
        }
    }
    match compare(&configs) {
        Ok(cmp) => {
            print!("{}", cmp.to_table());
            if cmp.checks.iter().all(|c| c.holds()) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
