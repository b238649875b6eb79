//! Separation of the variable set into syntactically independent
//! sub-spaces and the per-sub-space slicing of every model predicate.

use std::fmt;

use thiserror::Error;

use crate::automaton::{AffineFlow, AffineReset, DecompositionMode, HybridAutomaton, UnsafeSpec};
use crate::geometry::{Condition, GeometryError, StateSet};

/// Kind of a sub-space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubspaceTag {
    Disc,
    Clock,
    Rest,
}

impl fmt::Display for SubspaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SubspaceTag::Disc => "disc",
            SubspaceTag::Clock => "clock",
            SubspaceTag::Rest => "rest",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subspace {
    pub tag: SubspaceTag,
    /// Increasing variable indices.
    pub vars: Vec<usize>,
}

/// Disjoint cover of the variable indices by non-empty sub-spaces, ordered
/// disc, clock, rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariablePartition {
    pub dim: usize,
    pub subspaces: Vec<Subspace>,
}

impl VariablePartition {
    /// The single all-variable sub-space.
    pub fn whole(dim: usize) -> Self {
        VariablePartition {
            dim,
            subspaces: vec![Subspace {
                tag: SubspaceTag::Rest,
                vars: (0..dim).collect(),
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.subspaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subspaces.is_empty()
    }

    /// Number of variables carrying `tag`.
    pub fn size(&self, tag: SubspaceTag) -> usize {
        self.subspaces
            .iter()
            .filter(|s| s.tag == tag)
            .map(|s| s.vars.len())
            .sum()
    }

    /// `(disc, clock, rest)` sizes.
    pub fn sizes(&self) -> (usize, usize, usize) {
        (
            self.size(SubspaceTag::Disc),
            self.size(SubspaceTag::Clock),
            self.size(SubspaceTag::Rest),
        )
    }

    /// `(sub-space, position)` of every variable.
    pub fn locate(&self) -> Vec<(usize, usize)> {
        let mut at = vec![(usize::MAX, 0); self.dim];
        for (k, s) in self.subspaces.iter().enumerate() {
            for (p, &v) in s.vars.iter().enumerate() {
                at[v] = (k, p);
            }
        }
        at
    }

    /// Sub-space indices processed before the others in the flow loop: clock
    /// sub-spaces first, then the rest. Disc sub-spaces are not flowed.
    pub fn flow_order(&self) -> Vec<usize> {
        let of = |t: SubspaceTag| {
            self.subspaces
                .iter()
                .enumerate()
                .filter(move |(_, s)| s.tag == t)
                .map(|(k, _)| k)
        };
        of(SubspaceTag::Clock).chain(of(SubspaceTag::Rest)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecompositionError {
    #[error("{what} touches sub-spaces {subspaces:?}")]
    NotSeparable { what: String, subspaces: Vec<usize> },
    #[error("partition does not cover the {0} variables disjointly")]
    BadPartition(usize),
}

/// Undirected dependency graph as adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    pub adj: Vec<Vec<usize>>,
}

impl DependencyGraph {
    fn new(n: usize) -> Self {
        DependencyGraph {
            adj: vec![Vec::new(); n],
        }
    }

    fn link(&mut self, i: usize, j: usize) {
        if i != j && !self.adj[i].contains(&j) {
            self.adj[i].push(j);
            self.adj[j].push(i);
        }
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].contains(&j)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.adj.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                for &j in &self.adj[comp[k]] {
                    if !seen[j] {
                        seen[j] = true;
                        comp.push(j);
                    }
                }
                k += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Variables are linked when a flow or reset couples them or a condition
/// row mentions both.
pub fn dependency_graph(h: &HybridAutomaton, unsafe_spec: &UnsafeSpec) -> DependencyGraph {
    let n = h.dim();
    let mut g = DependencyGraph::new(n);
    let conditions = h.conditions().chain(unsafe_spec.entries.iter().map(|(_, c)| c));
    for c in conditions {
        for i in 0..c.len() {
            let vars = c.support_of_row(i);
            for w in vars.windows(2) {
                g.link(w[0], w[1]);
            }
        }
    }
    for m in h
        .locations
        .iter()
        .map(|l| &l.flow.a)
        .chain(h.jumps.iter().map(|j| &j.reset.a))
    {
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != 0.0 {
                    g.link(i, j);
                }
            }
        }
    }
    g
}

/// Splits the variables into disc, clock and rest sub-spaces at connected
/// component granularity.
pub fn classify(h: &HybridAutomaton, unsafe_spec: &UnsafeSpec, mode: DecompositionMode) -> VariablePartition {
    let n = h.dim();
    if mode == DecompositionMode::None || n == 0 {
        return VariablePartition::whole(n);
    }
    let comps = dependency_graph(h, unsafe_spec).components();
    let all = |comp: &[usize], p: &dyn Fn(&AffineFlow, usize) -> bool| {
        comp.iter().all(|&i| h.locations.iter().all(|l| p(&l.flow, i)))
    };
    let (mut disc, mut clock, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for comp in comps {
        if mode.separates_discrete() && all(&comp, &|f, i| f.is_constant(i)) {
            disc.extend(comp);
        } else if mode.separates_clocks() && all(&comp, &|f, i| f.is_clock(i)) {
            clock.extend(comp);
        } else {
            rest.push(comp);
        }
    }
    disc.sort_unstable();
    clock.sort_unstable();
    let mut subspaces = Vec::new();
    if !disc.is_empty() {
        subspaces.push(Subspace {
            tag: SubspaceTag::Disc,
            vars: disc,
        });
    }
    if !clock.is_empty() {
        subspaces.push(Subspace {
            tag: SubspaceTag::Clock,
            vars: clock,
        });
    }
    if mode == DecompositionMode::Components {
        subspaces.extend(rest.into_iter().map(|vars| Subspace {
            tag: SubspaceTag::Rest,
            vars,
        }));
    } else {
        let mut vars: Vec<usize> = rest.into_iter().flatten().collect();
        vars.sort_unstable();
        if !vars.is_empty() {
            subspaces.push(Subspace {
                tag: SubspaceTag::Rest,
                vars,
            });
        }
    }
    VariablePartition { dim: n, subspaces }
}

/// Per-sub-space slices of one location.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationParts {
    pub flow: Vec<AffineFlow>,
    pub invariant: Vec<Condition>,
}

/// Per-sub-space slices of one jump; indices refer to the automaton.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpParts {
    pub source: usize,
    pub target: usize,
    pub guard: Vec<Condition>,
    pub reset: Vec<AffineReset>,
}

/// An automaton with every flow, condition and reset sliced per sub-space.
#[derive(Debug, Clone)]
pub struct DecomposedAutomaton {
    pub automaton: HybridAutomaton,
    pub partition: VariablePartition,
    pub locations: Vec<LocationParts>,
    pub jumps: Vec<JumpParts>,
    /// `(location, parts)` in declaration order.
    pub init: Vec<(usize, Vec<Condition>)>,
    /// `(location or every location, parts)`.
    pub unsafe_parts: Vec<(Option<usize>, Vec<Condition>)>,
}

impl DecomposedAutomaton {
    /// Indices of the jumps leaving each location.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.locations.len()];
        for (k, j) in self.jumps.iter().enumerate() {
            out[j.source].push(k);
        }
        out
    }
}

/// Slices the automaton along `p`; fails when some row couples two
/// sub-spaces.
pub fn decompose(
    h: &HybridAutomaton,
    unsafe_spec: &UnsafeSpec,
    p: &VariablePartition,
) -> Result<DecomposedAutomaton, DecompositionError> {
    let n = h.dim();
    let mut covered = vec![0usize; n];
    for s in &p.subspaces {
        for &v in &s.vars {
            if v >= n {
                return Err(DecompositionError::BadPartition(n));
            }
            covered[v] += 1;
        }
    }
    if p.dim != n || covered.iter().any(|&c| c != 1) {
        return Err(DecompositionError::BadPartition(n));
    }
    let at = p.locate();

    let split_condition = |c: &Condition, what: &str| -> Result<Vec<Condition>, DecompositionError> {
        let mut parts: Vec<Condition> = p.subspaces.iter().map(|s| Condition::truth(s.vars.len())).collect();
        for i in 0..c.len() {
            let vars = c.support_of_row(i);
            let mut subs: Vec<usize> = vars.iter().map(|&v| at[v].0).collect();
            subs.dedup();
            subs.sort_unstable();
            subs.dedup();
            if subs.len() > 1 {
                return Err(DecompositionError::NotSeparable {
                    what: format!("{what}, row {i}"),
                    subspaces: subs,
                });
            }
            let k = subs.first().copied().unwrap_or(0);
            let row: Vec<f64> = p.subspaces[k].vars.iter().map(|&v| c.row(i)[v]).collect();
            parts[k].push(&row, c.bound(i));
        }
        Ok(parts)
    };
    let check_matrix = |m: &crate::linalg::Matrix, what: &str| -> Result<(), DecompositionError> {
        for i in 0..n {
            for j in 0..n {
                if m[(i, j)] != 0.0 && at[i].0 != at[j].0 {
                    return Err(DecompositionError::NotSeparable {
                        what: format!("{what}, entry ({i}, {j})"),
                        subspaces: vec![at[i].0.min(at[j].0), at[i].0.max(at[j].0)],
                    });
                }
            }
        }
        Ok(())
    };

    let mut locations = Vec::with_capacity(h.locations.len());
    for l in &h.locations {
        check_matrix(&l.flow.a, &format!("flow of `{}`", l.name))?;
        let flow = p
            .subspaces
            .iter()
            .map(|s| AffineFlow {
                a: l.flow.a.select(&s.vars, &s.vars),
                b: s.vars.iter().map(|&v| l.flow.b[v]).collect(),
            })
            .collect();
        let invariant = split_condition(&l.invariant, &format!("invariant of `{}`", l.name))?;
        locations.push(LocationParts { flow, invariant });
    }
    let loc_ix = |name: &str| h.location_index(name).expect("validated automaton");
    let mut jumps = Vec::with_capacity(h.jumps.len());
    for (k, j) in h.jumps.iter().enumerate() {
        let what = format!("jump {k} ({} -> {})", j.source, j.target);
        check_matrix(&j.reset.a, &format!("reset of {what}"))?;
        let guard = split_condition(&j.guard, &format!("guard of {what}"))?;
        let reset = p
            .subspaces
            .iter()
            .map(|s| AffineReset {
                a: j.reset.a.select(&s.vars, &s.vars),
                c: s.vars.iter().map(|&v| j.reset.c[v]).collect(),
            })
            .collect();
        jumps.push(JumpParts {
            source: loc_ix(&j.source),
            target: loc_ix(&j.target),
            guard,
            reset,
        });
    }
    let mut init = Vec::with_capacity(h.init.len());
    for (l, c) in &h.init {
        init.push((loc_ix(l), split_condition(c, &format!("initial condition of `{l}`"))?));
    }
    let mut unsafe_parts = Vec::with_capacity(unsafe_spec.entries.len());
    for (l, c) in &unsafe_spec.entries {
        let what = format!("unsafe condition of `{}`", l.as_deref().unwrap_or("*"));
        unsafe_parts.push((l.as_deref().map(loc_ix), split_condition(c, &what)?));
    }
    Ok(DecomposedAutomaton {
        automaton: h.clone(),
        partition: p.clone(),
        locations,
        jumps,
        init,
        unsafe_parts,
    })
}

/// Projections of `s` onto every sub-space.
pub fn projective_of(s: &StateSet, p: &VariablePartition) -> Result<Vec<StateSet>, GeometryError> {
    if s.dim() != p.dim {
        return Err(GeometryError::Dimension {
            expected: p.dim,
            got: s.dim(),
        });
    }
    p.subspaces.iter().map(|sub| s.project(&sub.vars)).collect()
}
