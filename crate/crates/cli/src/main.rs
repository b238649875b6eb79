use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use reach_cli::{run, CliError, PlotFormat, PlotRequest, RunConfig, EXIT_INPUT_ERROR};
use subspace_reach::reach::DEFAULT_MAX_SEGMENTS;
use subspace_reach::{DecompositionMode, Representation};

/// Reachability analysis of a linear hybrid automaton.
///
/// Exit status: 0 when safe, 1 when safety could not be shown, 2 on input
/// errors.
#[derive(Debug, Parser)]
#[command(name = "reach", version)]
struct Args {
    /// Model file.
    model: PathBuf,
    /// Time step.
    #[arg(long)]
    delta: Option<f64>,
    /// Global time horizon.
    #[arg(long)]
    horizon: Option<f64>,
    /// Jump depth bound, or `unbounded`.
    #[arg(long, value_parser = parse_depth)]
    depth: Option<Depth>,
    /// Aggregate the successors of a flowpipe per jump (`on` or `off`).
    #[arg(long, value_parser = parse_switch)]
    aggregation: Option<bool>,
    /// Variable separation: none, timed, discrete, all, components.
    #[arg(long)]
    decompose: Option<DecompositionMode>,
    /// Representation of the rest sub-space: box or sf.
    #[arg(long)]
    rep: Option<Representation>,
    /// Plot the projection onto two variables: `--plot X,Y PATH`.
    #[arg(long, num_args = 2, value_names = ["VARS", "PATH"])]
    plot: Option<Vec<String>>,
    /// Plot format: csv, gnuplot or svg (default: from the file extension,
    /// else csv).
    #[arg(long)]
    plot_format: Option<PlotFormat>,
    /// Also write the statistics to this file.
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Stop after this many segments.
    #[arg(long, default_value_t = DEFAULT_MAX_SEGMENTS)]
    max_segments: usize,
}

#[derive(Debug, Clone, Copy)]
struct Depth(Option<usize>);

fn parse_depth(s: &str) -> Result<Depth, String> {
    if s == "unbounded" {
        return Ok(Depth(None));
    }
    s.parse()
        .map(|d| Depth(Some(d)))
        .map_err(|_| format!("`{s}` is neither a count nor `unbounded`"))
}

fn parse_switch(s: &str) -> Result<bool, String> {
    match s {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(format!("expected `on` or `off`, found `{s}`")),
    }
}

fn config(args: Args) -> Result<RunConfig, CliError> {
    let plot = match args.plot {
        None => None,
        Some(v) => {
            let (x, y) = v[0]
                .split_once(',')
                .ok_or_else(|| CliError::Config(format!("--plot expects `X,Y`, found `{}`", v[0])))?;
            let path = PathBuf::from(&v[1]);
            let format = args
                .plot_format
                .or_else(|| PlotFormat::from_path(&path))
                .unwrap_or(PlotFormat::Csv);
            Some(PlotRequest {
                x: x.trim().to_string(),
                y: y.trim().to_string(),
                path,
                format,
            })
        }
    };
    Ok(RunConfig {
        model: args.model,
        delta: args.delta,
        horizon: args.horizon,
        depth: args.depth.map(|d| d.0),
        aggregation: args.aggregation,
        decomposition: args.decompose,
        representation: args.rep,
        plot,
        stats: args.stats,
        max_segments: args.max_segments,
    })
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let outcome = config(args).and_then(|c| run(&c));
    match outcome {
        Ok(o) => {
            print!("{}", o.stats.to_text());
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
