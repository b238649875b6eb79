//! Linear hybrid automata, analysis settings and the model text format.

mod parser;
mod printer;

pub use parser::{parse_model, ParseError, ParseErrorKind};

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::geometry::{Condition, Representation};
use crate::linalg::{Matrix, Vector};

/// `ẋ = Ax + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineFlow {
    pub a: Matrix,
    pub b: Vector,
}

impl AffineFlow {
    pub fn zero(dim: usize) -> Self {
        AffineFlow {
            a: Matrix::zeros(dim, dim),
            b: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    /// Whether variable `i` has derivative zero.
    pub fn is_constant(&self, i: usize) -> bool {
        self.b[i] == 0.0 && self.a.row(i).iter().all(|&x| x == 0.0)
    }

    /// Whether variable `i` has derivative exactly one.
    pub fn is_clock(&self, i: usize) -> bool {
        self.b[i] == 1.0 && self.a.row(i).iter().all(|&x| x == 0.0)
    }
}

/// `x′ = A′x + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineReset {
    pub a: Matrix,
    pub c: Vector,
}

impl AffineReset {
    pub fn identity(dim: usize) -> Self {
        AffineReset {
            a: Matrix::identity(dim),
            c: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    pub fn is_identity(&self) -> bool {
        self.a.is_identity() && self.c.iter().all(|&x| x == 0.0)
    }

    /// Whether row `i` is `xᵢ′ = xᵢ`.
    pub fn keeps(&self, i: usize) -> bool {
        self.c[i] == 0.0
            && self
                .a
                .row(i)
                .iter()
                .enumerate()
                .all(|(j, &x)| x == if i == j { 1.0 } else { 0.0 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub name: String,
    pub flow: AffineFlow,
    pub invariant: Condition,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jump {
    pub source: String,
    pub target: String,
    pub guard: Condition,
    pub reset: AffineReset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridAutomaton {
    pub vars: Vec<String>,
    pub locations: Vec<Location>,
    pub jumps: Vec<Jump>,
    /// Initial condition per location, in declaration order.
    pub init: Vec<(String, Condition)>,
}

impl HybridAutomaton {
    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l.name == name)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Jumps leaving each location, as indices into `jumps`.
    pub fn outgoing(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.locations.len()];
        for (k, j) in self.jumps.iter().enumerate() {
            if let Some(s) = self.location_index(&j.source) {
                out[s].push(k);
            }
        }
        out
    }

    /// Every condition of the automaton: invariants, guards and initial
    /// predicates.
    pub fn conditions(&self) -> impl Iterator<Item = &Condition> + '_ {
        self.locations
            .iter()
            .map(|l| &l.invariant)
            .chain(self.jumps.iter().map(|j| &j.guard))
            .chain(self.init.iter().map(|(_, c)| c))
    }
}

/// Which sub-spaces are split off before analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecompositionMode {
    None,
    Timed,
    Discrete,
    /// Timed and discrete.
    All,
    /// Timed and discrete, with the rest split into connected components.
    Components,
}

impl DecompositionMode {
    pub fn separates_discrete(self) -> bool {
        matches!(
            self,
            DecompositionMode::Discrete | DecompositionMode::All | DecompositionMode::Components
        )
    }

    pub fn separates_clocks(self) -> bool {
        matches!(
            self,
            DecompositionMode::Timed | DecompositionMode::All | DecompositionMode::Components
        )
    }
}

impl FromStr for DecompositionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(DecompositionMode::None),
            "timed" => Ok(DecompositionMode::Timed),
            "discrete" => Ok(DecompositionMode::Discrete),
            "all" | "timed-and-discrete" => Ok(DecompositionMode::All),
            "components" => Ok(DecompositionMode::Components),
            other => Err(format!(
                "unknown decomposition `{other}` (expected none, timed, discrete, all or components)"
            )),
        }
    }
}

impl fmt::Display for DecompositionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecompositionMode::None => "none",
            DecompositionMode::Timed => "timed",
            DecompositionMode::Discrete => "discrete",
            DecompositionMode::All => "all",
            DecompositionMode::Components => "components",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachSettings {
    pub delta: f64,
    pub horizon: f64,
    /// Jump depth bound; `None` is unbounded.
    pub depth: Option<usize>,
    pub aggregation: bool,
    pub decomposition: DecompositionMode,
    pub representation: Representation,
}

impl ReachSettings {
    pub fn new(horizon: f64) -> Self {
        ReachSettings {
            delta: 0.01,
            horizon,
            depth: None,
            aggregation: false,
            decomposition: DecompositionMode::None,
            representation: Representation::Box,
        }
    }
}

/// Unsafe states per location; `None` matches every location.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct UnsafeSpec {
    pub entries: Vec<(Option<String>, Condition)>,
}

impl UnsafeSpec {
    pub fn for_location<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a Condition> + 'a {
        self.entries
            .iter()
            .filter(move |(l, _)| l.as_deref().is_none_or(|l| l == name))
            .map(|(_, c)| c)
    }
}

/// A parsed model file.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub automaton: HybridAutomaton,
    pub settings: ReachSettings,
    pub unsafe_spec: UnsafeSpec,
}

/// Well-formedness problems; empty when the automaton is consistent.
pub fn validate(h: &HybridAutomaton) -> Vec<String> {
    let n = h.dim();
    let mut out = Vec::new();
    let mut names = HashSet::new();
    for v in &h.vars {
        if !names.insert(v.as_str()) {
            out.push(format!("duplicate variable `{v}`"));
        }
    }
    let mut locs: HashMap<&str, usize> = HashMap::new();
    for l in &h.locations {
        if locs.insert(l.name.as_str(), 0).is_some() {
            out.push(format!("duplicate location `{}`", l.name));
        }
        if l.flow.a.rows() != n || l.flow.a.cols() != n || l.flow.b.len() != n {
            out.push(format!(
                "location `{}`: flow is {}x{} with offset of length {}, expected {n}x{n}",
                l.name,
                l.flow.a.rows(),
                l.flow.a.cols(),
                l.flow.b.len()
            ));
        }
        if l.invariant.dim() != n {
            out.push(format!(
                "location `{}`: invariant has dimension {}, expected {n}",
                l.name,
                l.invariant.dim()
            ));
        }
    }
    for (k, j) in h.jumps.iter().enumerate() {
        for end in [&j.source, &j.target] {
            if !locs.contains_key(end.as_str()) {
                out.push(format!("jump {k}: unknown location `{end}`"));
            }
        }
        if j.guard.dim() != n {
            out.push(format!("jump {k}: guard has dimension {}, expected {n}", j.guard.dim()));
        }
        if j.reset.a.rows() != n || j.reset.a.cols() != n || j.reset.c.len() != n {
            out.push(format!("jump {k}: reset has the wrong dimension, expected {n}"));
        }
    }
    if h.init.is_empty() {
        out.push("no initial condition".to_string());
    }
    for (l, c) in &h.init {
        if !locs.contains_key(l.as_str()) {
            out.push(format!("initial condition for unknown location `{l}`"));
        }
        if c.dim() != n {
            out.push(format!(
                "initial condition for `{l}` has dimension {}, expected {n}",
                c.dim()
            ));
        }
    }
    out
}
