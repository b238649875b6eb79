use std::fmt::Write;

use subspace_reach::reach::{contained_in, match_segments};
use subspace_reach::{DecompositionMode, TemplateDirections};

use crate::run::{run, RunConfig, RunOutcome};
use crate::stats::StatsRecord;
use crate::CliError;

/// Octagonal directions are used for containment up to this dimension; box
/// directions above it.
const OCTAGONAL_LIMIT: usize = 10;

#[derive(Debug, Clone)]
pub struct ContainmentCheck {
    /// Row of the undecomposed run.
    pub base: usize,
    /// Row of the decomposed run.
    pub other: usize,
    /// Matched segment pairs.
    pub checked: usize,
    /// Pairs whose base segment lies outside the decomposed one.
    pub violations: usize,
    /// Base segments without a counterpart.
    pub unmatched: usize,
    /// Wall time of the base run divided by that of the decomposed run.
    pub speedup: f64,
}

impl ContainmentCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0 && self.unmatched == 0
    }
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub rows: Vec<StatsRecord>,
    pub checks: Vec<ContainmentCheck>,
}

/// Runs every configuration and checks each undecomposed run against the
/// decomposed runs sharing its representation and aggregation.
pub fn compare(configs: &[RunConfig]) -> Result<Comparison, CliError> {
    let outcomes: Vec<RunOutcome> = configs.iter().map(run).collect::<Result<_, _>>()?;
    let mut checks = Vec::new();
    for (i, a) in outcomes.iter().enumerate() {
        if a.stats.decomposition != DecompositionMode::None {
            continue;
        }
        for (j, b) in outcomes.iter().enumerate() {
            if b.stats.decomposition == DecompositionMode::None
                || b.stats.representation != a.stats.representation
                || b.stats.aggregation != a.stats.aggregation
            {
                continue;
            }
            checks.push(check(i, a, j, b)?);
        }
    }
    Ok(Comparison {
        rows: outcomes.into_iter().map(|o| o.stats).collect(),
        checks,
    })
}

fn check(i: usize, a: &RunOutcome, j: usize, b: &RunOutcome) -> Result<ContainmentCheck, CliError> {
    let dim = a.model.automaton.dim();
    let dirs = if dim <= OCTAGONAL_LIMIT {
        TemplateDirections::octagonal(dim)
    } else {
        TemplateDirections::boxed(dim)
    };
    let (mut checked, mut violations, mut unmatched) = (0, 0, 0);
    for (s, other) in match_segments(&a.result, &b.result) {
        let Some(o) = other else {
            unmatched += 1;
            continue;
        };
        checked += 1;
        let ok = contained_in(
            &a.result.segments[s],
            &a.result.partition,
            &b.result.segments[o],
            &b.result.partition,
            dirs.directions(),
            1e-9,
        )
        .map_err(|e| CliError::Analysis(e.to_string()))?;
        if !ok {
            violations += 1;
        }
    }
    let speedup = a.stats.wall_time / b.stats.wall_time.max(1e-12);
    Ok(ContainmentCheck {
        base: i,
        other: j,
        checked,
        violations,
        unmatched,
        speedup,
    })
}

impl Comparison {
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>3}  {:<10} {:<4} {:<4} {:>10} {:>9} {:>9} {:>12}  verdict",
            "#", "decompose", "rep", "agg", "time[s]", "flowpipes", "segments", "disc/clk/rest"
        );
        for (k, r) in self.rows.iter().enumerate() {
            let sizes = format!("{}/{}/{}", r.sizes.0, r.sizes.1, r.sizes.2);
            let _ = writeln!(
                s,
                "{:>3}  {:<10} {:<4} {:<4} {:>10.3} {:>9} {:>9} {:>12}  {}{}",
                k,
                r.decomposition.to_string(),
                r.representation.to_string(),
                if r.aggregation { "on" } else { "off" },
                r.wall_time,
                r.flowpipes,
                r.segments,
                sizes,
                r.verdict(),
                if r.truncated { " (truncated)" } else { "" }
            );
        }
        for c in &self.checks {
            let _ = writeln!(
                s,
                "containment {} in {}: {} ({} pairs, {} outside, {} unmatched); speedup {:.2}x",
                c.base,
                c.other,
                if c.holds() { "ok" } else { "FAILED" },
                c.checked,
                c.violations,
                c.unmatched,
                c.speedup
            );
        }
        s
    }
}
