use std::path::{Path, PathBuf};

use subspace_reach::reach::{analyze_with_cap, ReachResult, Verdict, DEFAULT_MAX_SEGMENTS};
use subspace_reach::{parse_model, DecompositionMode, Model, Representation};

use crate::plot::{polygons, to_csv, to_gnuplot, to_svg, PlotFormat};
use crate::stats::StatsRecord;
use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotRequest {
    pub x: String,
    pub y: String,
    pub path: PathBuf,
    pub format: PlotFormat,
}

/// One analysis invocation; `None` fields keep the model's settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: PathBuf,
    pub delta: Option<f64>,
    pub horizon: Option<f64>,
    /// `Some(None)` is an unbounded depth.
    pub depth: Option<Option<usize>>,
    pub aggregation: Option<bool>,
    pub decomposition: Option<DecompositionMode>,
    pub representation: Option<Representation>,
    pub plot: Option<PlotRequest>,
    pub stats: Option<PathBuf>,
    pub max_segments: usize,
}

impl RunConfig {
    pub fn new(model: impl Into<PathBuf>) -> Self {
        RunConfig {
            model: model.into(),
            delta: None,
            horizon: None,
            depth: None,
            aggregation: None,
            decomposition: None,
            representation: None,
            plot: None,
            stats: None,
            max_segments: DEFAULT_MAX_SEGMENTS,
        }
    }

    /// Loads the model and applies the overrides.
    pub fn load(&self) -> Result<Model, CliError> {
        let text =
            std::fs::read_to_string(&self.model).map_err(|e| CliError::Io(format!("{}: {e}", self.model.display())))?;
        let mut model = parse_model(&text).map_err(|e| CliError::Parse(format!("{}:{e}", self.model.display())))?;
        let s = &mut model.settings;
        if let Some(d) = self.delta {
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Config("--delta must be positive".into()));
            }
            s.delta = d;
        }
        if let Some(h) = self.horizon {
            if !(h > 0.0 && h.is_finite()) {
                return Err(CliError::Config("--horizon must be positive".into()));
            }
            s.horizon = h;
        }
        if let Some(d) = self.depth {
            s.depth = d;
        }
        if let Some(a) = self.aggregation {
            s.aggregation = a;
        }
        if let Some(m) = self.decomposition {
            s.decomposition = m;
        }
        if let Some(r) = self.representation {
            s.representation = r;
        }
        if let Some(p) = &self.plot {
            for v in [&p.x, &p.y] {
                if model.automaton.var_index(v).is_none() {
                    return Err(CliError::Config(format!("plot variable `{v}` is not declared")));
                }
            }
        }
        Ok(model)
    }
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub model: Model,
    pub result: ReachResult,
    pub stats: StatsRecord,
}

impl RunOutcome {
    /// 0 when safe, 1 when safety could not be shown.
    pub fn exit_code(&self) -> i32 {
        if self.stats.safe {
            0
        } else {
            1
        }
    }
}

/// Exit status for an input error.
pub const EXIT_INPUT_ERROR: i32 = 2;

pub fn stats_of(model: &Model, result: &ReachResult) -> StatsRecord {
    let s = &model.settings;
    StatsRecord {
        wall_time: result.stats.wall_time.as_secs_f64(),
        flowpipes: result.stats.flowpipes,
        segments: result.stats.segments,
        decomposition: s.decomposition,
        representation: s.representation,
        aggregation: s.aggregation,
        sizes: result.partition.sizes(),
        safe: result.is_safe(),
        truncated: result.stats.truncated,
        witnesses: match &result.verdict {
            Verdict::Safe => 0,
            Verdict::Unknown { witnesses } => witnesses.len(),
        },
    }
}

/// Loads, analyzes and writes the requested outputs.
pub fn run(config: &RunConfig) -> Result<RunOutcome, CliError> {
    let model = config.load()?;
    let result = analyze_with_cap(
        &model.automaton,
        &model.settings,
        &model.unsafe_spec,
        config.max_segments,
    )
    .map_err(|e| CliError::Analysis(e.to_string()))?;
    let stats = stats_of(&model, &result);
    if let Some(path) = &config.stats {
        write(path, &stats.to_text())?;
    }
    if let Some(p) = &config.plot {
        let h = &model.automaton;
        let (x, y) = (h.var_index(&p.x).expect("checked"), h.var_index(&p.y).expect("checked"));
        let recs = polygons(&result.segments, h, &result.partition, x, y).map_err(|e| CliError::Plot(e.to_string()))?;
        let text = match p.format {
            PlotFormat::Csv => to_csv(&recs),
            PlotFormat::Gnuplot => to_gnuplot(&recs, &p.x, &p.y),
            PlotFormat::Svg => to_svg(&recs),
        };
        write(&p.path, &text)?;
    }
    Ok(RunOutcome { model, result, stats })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}
