//! Worklist reachability over decomposed automata.

mod containment;
mod flow;

pub use containment::{contained_in, match_segments, product_support};

pub use flow::{
    bloating_box, first_segment, first_segment_with, flow_step, jump_successor, next_segment, next_segment_with,
    BloatingBox, FlowMap, ReachStepError,
};

use std::collections::VecDeque;
use std::time::{Duration, Instant};

use thiserror::Error;

use crate::automaton::{HybridAutomaton, ReachSettings, UnsafeSpec};
use crate::decomposition::{
    classify, decompose, DecomposedAutomaton, DecompositionError, SubspaceTag, VariablePartition,
};
use crate::geometry::{
    aggregate, Condition, GeometryError, HPolytope, Representation, StateSet, SupportFunction, TemplateDirections,
};
use crate::linalg::LinalgError;

/// Default bound on the number of recorded segments.
pub const DEFAULT_MAX_SEGMENTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReachError {
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("initial set of location `{0}` is unbounded")]
    UnboundedInitial(String),
}

impl From<ReachStepError> for ReachError {
    fn from(e: ReachStepError) -> Self {
        match e {
            ReachStepError::Linalg(e) => ReachError::Linalg(e),
            ReachStepError::Geometry(e) => ReachError::Geometry(e),
        }
    }
}

/// How a flowpipe was started.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Origin {
    /// From the `k`-th initial condition.
    Initial(usize),
    /// Successor of `segment` of flowpipe `parent` via `jump`; `segment` is
    /// `None` for an aggregated successor.
    Jump {
        parent: usize,
        jump: usize,
        segment: Option<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct FlowpipeInfo {
    pub location: usize,
    pub depth: usize,
    pub origin: Origin,
    /// The task's starting sets, one per sub-space.
    pub initial: Vec<StateSet>,
    /// Range of this flowpipe's segments in [`ReachResult::segments`].
    pub segments: std::ops::Range<usize>,
}

#[derive(Debug, Clone)]
pub struct FlowpipeSegment {
    pub flowpipe: usize,
    pub index: usize,
    pub location: usize,
    /// One set per sub-space of the partition.
    pub sets: Vec<StateSet>,
    pub t1: f64,
    pub t2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Safe,
    /// Segments that may intersect an unsafe set.
    Unknown {
        witnesses: Vec<usize>,
    },
}

#[derive(Debug, Clone)]
pub struct ReachStats {
    pub flowpipes: usize,
    pub segments: usize,
    pub wall_time: Duration,
    /// Set when the segment cap stopped the search.
    pub truncated: bool,
}

#[derive(Debug, Clone)]
pub struct ReachResult {
    pub partition: VariablePartition,
    pub segments: Vec<FlowpipeSegment>,
    pub flowpipes: Vec<FlowpipeInfo>,
    pub stats: ReachStats,
    pub verdict: Verdict,
}

impl ReachResult {
    /// Safe verdict over a complete search.
    pub fn is_safe(&self) -> bool {
        self.verdict == Verdict::Safe && !self.stats.truncated
    }

    /// Identifies a flowpipe by its path from an initial condition: the
    /// initial index followed by `(jump, source segment)` per step. Equal
    /// across runs whose searches explore the same paths.
    pub fn path_key(&self, flowpipe: usize) -> Vec<usize> {
        let mut steps = Vec::new();
        let mut cur = flowpipe;
        loop {
            match self.flowpipes[cur].origin {
                Origin::Initial(k) => {
                    steps.push(k);
                    break;
                }
                Origin::Jump { parent, jump, segment } => {
                    steps.push(segment.map_or(usize::MAX, |s| self.segments[s].index));
                    steps.push(jump);
                    cur = parent;
                }
            }
        }
        steps.reverse();
        steps
    }

    /// The segments of one flowpipe.
    pub fn flowpipe_segments(&self, flowpipe: usize) -> &[FlowpipeSegment] {
        &self.segments[self.flowpipes[flowpipe].segments.clone()]
    }
}

/// A jump successor: sets, time window and source segment index.
type Successor = (Vec<StateSet>, f64, f64, usize);

struct Task {
    location: usize,
    sets: Vec<StateSet>,
    t1: f64,
    t2: f64,
    depth: usize,
    origin: Origin,
}

struct Engine<'a> {
    d: &'a DecomposedAutomaton,
    settings: &'a ReachSettings,
    reps: Vec<Representation>,
    /// Per location, per sub-space.
    maps: Vec<Vec<FlowMap>>,
    disc: Vec<usize>,
    flow_order: Vec<usize>,
    outgoing: Vec<Vec<usize>>,
}

/// Runs the search with the default segment cap.
pub fn analyze(
    h: &HybridAutomaton,
    settings: &ReachSettings,
    unsafe_spec: &UnsafeSpec,
) -> Result<ReachResult, ReachError> {
    analyze_with_cap(h, settings, unsafe_spec, DEFAULT_MAX_SEGMENTS)
}

/// Runs the search, stopping once `max_segments` segments are recorded.
pub fn analyze_with_cap(
    h: &HybridAutomaton,
    settings: &ReachSettings,
    unsafe_spec: &UnsafeSpec,
    max_segments: usize,
) -> Result<ReachResult, ReachError> {
    let start = Instant::now();
    let partition = classify(h, unsafe_spec, settings.decomposition);
    let d = decompose(h, unsafe_spec, &partition)?;
    let reps = partition
        .subspaces
        .iter()
        .map(|s| match s.tag {
            SubspaceTag::Rest => match settings.representation {
                Representation::Box => Representation::Box,
                _ => Representation::Support,
            },
            _ => Representation::Box,
        })
        .collect();
    let maps = d
        .locations
        .iter()
        .map(|l| {
            l.flow
                .iter()
                .map(|f| FlowMap::new(f, settings.delta))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let disc = partition
        .subspaces
        .iter()
        .enumerate()
        .filter(|(_, s)| s.tag == SubspaceTag::Disc)
        .map(|(k, _)| k)
        .collect();
    let engine = Engine {
        d: &d,
        settings,
        reps,
        maps,
        disc,
        flow_order: partition.flow_order(),
        outgoing: d.outgoing(),
    };
    let mut result = engine.run(max_segments)?;
    result.verdict = safety_check(&result.segments, &d)?;
    result.stats.wall_time = start.elapsed();
    Ok(result)
}

impl Engine<'_> {
    fn initial_tasks(&self) -> Result<Vec<Task>, ReachError> {
        let mut tasks = Vec::new();
        for (k, (loc, parts)) in self.d.init.iter().enumerate() {
            let mut sets = Vec::with_capacity(parts.len());
            for (s, part) in parts.iter().enumerate() {
                let cond = part.concat(&self.d.locations[*loc].invariant[s])?;
                let set = self.initial_set(cond, s);
                if set.is_empty() {
                    break;
                }
                if !set.bounding_box().is_bounded() {
                    return Err(ReachError::UnboundedInitial(
                        self.d.automaton.locations[*loc].name.clone(),
                    ));
                }
                sets.push(set);
            }
            if sets.len() == parts.len() {
                tasks.push(Task {
                    location: *loc,
                    sets,
                    t1: 0.0,
                    t2: 0.0,
                    depth: 0,
                    origin: Origin::Initial(k),
                });
            }
        }
        Ok(tasks)
    }

    fn initial_set(&self, cond: Condition, s: usize) -> StateSet {
        let poly = StateSet::Polytope(HPolytope::new(cond));
        match self.reps[s] {
            Representation::Box => poly.convert(Representation::Box),
            _ => StateSet::Support(poly.to_support()),
        }
    }

    fn run(&self, max_segments: usize) -> Result<ReachResult, ReachError> {
        let horizon = self.settings.horizon;
        let mut queue: VecDeque<Task> = self.initial_tasks()?.into();
        let mut segments: Vec<FlowpipeSegment> = Vec::new();
        let mut flowpipes: Vec<FlowpipeInfo> = Vec::new();
        let mut truncated = false;

        while let Some(task) = queue.pop_front() {
            if segments.len() >= max_segments {
                truncated = true;
                break;
            }
            let fp = flowpipes.len();
            let loc = task.location;
            let parts = &self.d.locations[loc];
            // Jumps whose disc part admits a successor.
            let mut enabled: Vec<(usize, Vec<Option<StateSet>>)> = Vec::new();
            for &j in &self.outgoing[loc] {
                let jp = &self.d.jumps[j];
                let target_inv = &self.d.locations[jp.target].invariant;
                let mut succ: Vec<Option<StateSet>> = vec![None; task.sets.len()];
                let mut ok = true;
                for &k in &self.disc {
                    let s = jump_successor(&task.sets[k], &jp.guard[k], &jp.reset[k], &target_inv[k])?;
                    if s.is_empty() {
                        ok = false;
                        break;
                    }
                    succ[k] = Some(s);
                }
                if ok {
                    enabled.push((j, succ));
                }
            }
            let mut pending: Vec<Vec<Successor>> = vec![Vec::new(); enabled.len()];

            let (mut t1, mut t2) = (task.t1, task.t2);
            let initial = task.sets.clone();
            let mut sets = task.sets;
            let mut is_first = true;
            let first_segment_ix = segments.len();
            loop {
                if t1 < horizon {
                    let mut emptied = false;
                    for &k in &self.flow_order {
                        let map = &self.maps[loc][k];
                        let next = if is_first {
                            first_segment_with(&sets[k], map, &parts.invariant[k])?
                        } else {
                            next_segment_with(&sets[k], map, &parts.invariant[k])?
                        };
                        if next.is_empty() {
                            emptied = true;
                            break;
                        }
                        sets[k] = next;
                    }
                    if emptied {
                        break;
                    }
                    t2 += self.settings.delta;
                    if !is_first {
                        t1 += self.settings.delta;
                    }
                }
                let seg_ix = segments.len();
                segments.push(FlowpipeSegment {
                    flowpipe: fp,
                    index: seg_ix - first_segment_ix,
                    location: loc,
                    sets: sets.clone(),
                    t1,
                    t2,
                });
                for (e, (j, disc_succ)) in enabled.iter().enumerate() {
                    let jp = &self.d.jumps[*j];
                    let target_inv = &self.d.locations[jp.target].invariant;
                    let mut succ: Vec<StateSet> = Vec::with_capacity(sets.len());
                    let mut ok = true;
                    for k in 0..sets.len() {
                        if let Some(s) = &disc_succ[k] {
                            succ.push(s.clone());
                            continue;
                        }
                        let s = jump_successor(&sets[k], &jp.guard[k], &jp.reset[k], &target_inv[k])?;
                        if s.is_empty() {
                            ok = false;
                            break;
                        }
                        succ.push(self.reduce(s));
                    }
                    if ok {
                        pending[e].push((succ, t1, t2, seg_ix));
                    }
                }
                is_first = false;
                if segments.len() >= max_segments {
                    truncated = true;
                    break;
                }
                if t1 >= horizon {
                    break;
                }
            }
            flowpipes.push(FlowpipeInfo {
                location: loc,
                depth: task.depth,
                origin: task.origin,
                initial,
                segments: first_segment_ix..segments.len(),
            });

            let depth = task.depth + 1;
            if self.settings.depth.is_some_and(|max| depth > max) {
                continue;
            }
            for (e, (j, _)) in enabled.iter().enumerate() {
                let succs = std::mem::take(&mut pending[e]);
                if succs.is_empty() {
                    continue;
                }
                let target = self.d.jumps[*j].target;
                if self.settings.aggregation {
                    let sets = self.aggregate_sets(&succs)?;
                    let t1 = succs.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
                    let t2 = succs.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
                    queue.push_back(Task {
                        location: target,
                        sets,
                        t1,
                        t2,
                        depth,
                        origin: Origin::Jump {
                            parent: fp,
                            jump: *j,
                            segment: None,
                        },
                    });
                } else {
                    for (sets, t1, t2, seg) in succs {
                        queue.push_back(Task {
                            location: target,
                            sets,
                            t1,
                            t2,
                            depth,
                            origin: Origin::Jump {
                                parent: fp,
                                jump: *j,
                                segment: Some(seg),
                            },
                        });
                    }
                }
            }
        }
        if !queue.is_empty() {
            truncated = true;
        }
        let stats = ReachStats {
            flowpipes: flowpipes.len(),
            segments: segments.len(),
            wall_time: Duration::ZERO,
            truncated,
        };
        Ok(ReachResult {
            partition: self.d.partition.clone(),
            segments,
            flowpipes,
            stats,
            verdict: Verdict::Safe,
        })
    }

    /// Replaces a support-function successor by a leaf over its outer
    /// halfspace representation, cutting the operation tree at jumps.
    fn reduce(&self, s: StateSet) -> StateSet {
        match s {
            StateSet::Support(sf) if sf.as_leaf().is_none() => {
                StateSet::Support(SupportFunction::from_polytope(sf.outer_polytope().clone()))
            }
            other => other,
        }
    }

    fn aggregate_sets(&self, succs: &[(Vec<StateSet>, f64, f64, usize)]) -> Result<Vec<StateSet>, ReachError> {
        let n = succs[0].0.len();
        let mut out = Vec::with_capacity(n);
        for k in 0..n {
            let parts: Vec<StateSet> = succs.iter().map(|s| s.0[k].clone()).collect();
            let d = parts[0].dim();
            let set = match self.reps[k] {
                Representation::Box => {
                    let hull = aggregate(&parts, &TemplateDirections::boxed(d))?;
                    StateSet::Polytope(hull).convert(Representation::Box)
                }
                _ => StateSet::Support(SupportFunction::from_polytope(aggregate(
                    &parts,
                    &TemplateDirections::octagonal(d),
                )?)),
            };
            out.push(set);
        }
        Ok(out)
    }
}

/// Safe when every segment misses every applicable unsafe set in at least
/// one sub-space.
pub fn safety_check(segments: &[FlowpipeSegment], d: &DecomposedAutomaton) -> Result<Verdict, ReachError> {
    let mut witnesses = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        let hit = d
            .unsafe_parts
            .iter()
            .filter(|(l, _)| l.is_none_or(|l| l == seg.location))
            .try_fold(false, |acc, (_, parts)| -> Result<bool, ReachError> {
                if acc {
                    return Ok(true);
                }
                for (set, part) in seg.sets.iter().zip(parts) {
                    if set.intersect(part)?.is_empty() {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?;
        if hit {
            witnesses.push(i);
        }
    }
    Ok(if witnesses.is_empty() {
        Verdict::Safe
    } else {
        Verdict::Unknown { witnesses }
    })
}
