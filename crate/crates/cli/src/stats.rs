use std::fmt::Write;

use subspace_reach::{DecompositionMode, Representation};

use crate::CliError;

/// Summary of one analysis run.
#[derive(Debug, Clone, PartialEq)]
pub struct StatsRecord {
    pub wall_time: f64,
    pub flowpipes: usize,
    pub segments: usize,
    pub decomposition: DecompositionMode,
    pub representation: Representation,
    pub aggregation: bool,
    /// `(disc, clock, rest)` sub-space sizes.
    pub sizes: (usize, usize, usize),
    pub safe: bool,
    pub truncated: bool,
    pub witnesses: usize,
}

impl StatsRecord {
    pub fn verdict(&self) -> &'static str {
        if self.safe {
            "safe"
        } else {
            "unknown"
        }
    }

    /// `key = value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "wall_time = {:.6}", self.wall_time);
        let _ = writeln!(s, "flowpipes = {}", self.flowpipes);
        let _ = writeln!(s, "segments = {}", self.segments);
        let _ = writeln!(s, "decomposition = {}", self.decomposition);
        let _ = writeln!(s, "representation = {}", self.representation);
        let _ = writeln!(s, "aggregation = {}", if self.aggregation { "on" } else { "off" });
        let _ = writeln!(s, "disc = {}", self.sizes.0);
        let _ = writeln!(s, "clock = {}", self.sizes.1);
        let _ = writeln!(s, "rest = {}", self.sizes.2);
        let _ = writeln!(s, "verdict = {}", self.verdict());
        let _ = writeln!(s, "truncated = {}", self.truncated);
        let _ = writeln!(s, "witnesses = {}", self.witnesses);
        s
    }

    /// Reads back the output of [`StatsRecord::to_text`].
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = std::collections::HashMap::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| CliError::Stats(format!("malformed line `{line}`")))?;
            map.insert(k.trim(), v.trim());
        }
        let get = |k: &str| {
            map.get(k)
                .copied()
                .ok_or_else(|| CliError::Stats(format!("missing key `{k}`")))
        };
        let num = |k: &str| -> Result<usize, CliError> {
            get(k)?
                .parse()
                .map_err(|_| CliError::Stats(format!("bad value for `{k}`")))
        };
        Ok(StatsRecord {
            wall_time: get("wall_time")?
                .parse()
                .map_err(|_| CliError::Stats("bad value for `wall_time`".into()))?,
            flowpipes: num("flowpipes")?,
            segments: num("segments")?,
            decomposition: get("decomposition")?.parse().map_err(CliError::Stats)?,
            representation: get("representation")?.parse().map_err(CliError::Stats)?,
            aggregation: get("aggregation")? == "on",
            sizes: (num("disc")?, num("clock")?, num("rest")?),
            safe: get("verdict")? == "safe",
            truncated: get("truncated")? == "true",
            witnesses: num("witnesses")?,
        })
    }
}
