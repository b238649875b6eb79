//! Convex state sets: boxes, H-polytopes and lazy support functions behind
//! one interface.

mod boxset;
mod condition;
mod polygon;
mod polytope;
mod support;
mod template;

pub use boxset::BoxSet;
pub use condition::Condition;
pub use polygon::{polygon_area, polygon_vertices};
pub use polytope::HPolytope;
pub use support::{Leaf, SupportFunction};
pub use template::TemplateDirections;

use thiserror::Error;

use crate::linalg::Matrix;

/// Absolute tolerance for geometric comparisons.
pub const TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("operation undefined on the empty set")]
    EmptySet,
    #[error("index list must be non-empty, strictly increasing and in range")]
    BadIndices,
    #[error("empty list of sets")]
    EmptyList,
    #[error("zero template direction")]
    ZeroDirection,
}

/// Variant tag of a [`StateSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Box,
    Polytope,
    Support,
}

impl std::str::FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "box" => Ok(Representation::Box),
            "sf" | "support" => Ok(Representation::Support),
            other => Err(format!("unknown representation `{other}` (expected box or sf)")),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::Box => "box",
            Representation::Polytope => "hpoly",
            Representation::Support => "sf",
        })
    }
}

/// A convex set in one of the supported representations.
#[derive(Debug, Clone)]
pub enum StateSet {
    Box(BoxSet),
    Polytope(HPolytope),
    Support(SupportFunction),
}

impl From<BoxSet> for StateSet {
    fn from(b: BoxSet) -> Self {
        StateSet::Box(b)
    }
}

impl From<HPolytope> for StateSet {
    fn from(p: HPolytope) -> Self {
        StateSet::Polytope(p)
    }
}

impl From<SupportFunction> for StateSet {
    fn from(s: SupportFunction) -> Self {
        StateSet::Support(s)
    }
}

impl StateSet {
    pub fn representation(&self) -> Representation {
        match self {
            StateSet::Box(_) => Representation::Box,
            StateSet::Polytope(_) => Representation::Polytope,
            StateSet::Support(_) => Representation::Support,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            StateSet::Box(b) => b.dim(),
            StateSet::Polytope(p) => p.dim(),
            StateSet::Support(s) => s.dim(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            StateSet::Box(b) => b.is_empty(),
            StateSet::Polytope(p) => p.is_empty(),
            StateSet::Support(s) => s.is_empty(),
        }
    }

    /// Upper bound on `sup{dir·x | x ∈ S}`; `+∞` when unbounded.
    pub fn support(&self, dir: &[f64]) -> Result<f64, GeometryError> {
        self.check_dim(dir.len())?;
        if self.is_empty() {
            return Err(GeometryError::EmptySet);
        }
        Ok(self.raw_support(dir))
    }

    fn raw_support(&self, dir: &[f64]) -> f64 {
        match self {
            StateSet::Box(b) => b.support(dir),
            StateSet::Polytope(p) => p.support(dir),
            StateSet::Support(s) => s.support(dir),
        }
    }

    /// Membership with tolerance. For support functions this tests the
    /// cached outer representation.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            StateSet::Box(b) => b.contains(x, tol),
            StateSet::Polytope(p) => p.contains(x, tol),
            StateSet::Support(s) => !s.is_empty() && s.outer_polytope().contains(x, tol),
        }
    }

    /// `{Mx + v | x ∈ S}`. Boxes use interval arithmetic, which is exact
    /// for diagonal `M`.
    pub fn affine_map(&self, m: &Matrix, v: &[f64]) -> Result<StateSet, GeometryError> {
        self.check_dim(m.cols())?;
        if v.len() != m.rows() {
            return Err(GeometryError::Dimension {
                expected: m.rows(),
                got: v.len(),
            });
        }
        Ok(match self {
            StateSet::Box(b) => StateSet::Box(b.affine_map(m, v)),
            StateSet::Polytope(p) => {
                if m.is_square() {
                    if let Ok(inv) = m.inverse() {
                        return Ok(StateSet::Polytope(p.map_invertible(&inv, v)));
                    }
                }
                StateSet::Support(SupportFunction::from_polytope(p.clone()).affine_map(m, v)?)
            }
            StateSet::Support(s) => StateSet::Support(s.affine_map(m, v)?),
        })
    }

    /// [`StateSet::affine_map`] for a square `m` whose inverse is known.
    pub fn affine_map_with_inverse(&self, m: &Matrix, v: &[f64], inverse: &Matrix) -> Result<StateSet, GeometryError> {
        self.check_dim(m.cols())?;
        if v.len() != m.rows() || inverse.rows() != m.cols() {
            return Err(GeometryError::Dimension {
                expected: m.rows(),
                got: v.len(),
            });
        }
        Ok(match self {
            StateSet::Box(b) => StateSet::Box(b.affine_map(m, v)),
            StateSet::Polytope(p) => StateSet::Polytope(p.map_invertible(inverse, v)),
            StateSet::Support(s) => StateSet::Support(s.affine_map_with_inverse(m, v, inverse)?),
        })
    }

    pub fn minkowski_sum(&self, other: &StateSet) -> Result<StateSet, GeometryError> {
        self.check_dim(other.dim())?;
        if let (StateSet::Box(a), StateSet::Box(b)) = (self, other) {
            return Ok(StateSet::Box(a.minkowski_sum(b)));
        }
        Ok(StateSet::Support(self.to_support().minkowski_sum(&other.to_support())?))
    }

    /// Contains `S1 ∪ S2`. Boxes yield their interval hull.
    pub fn convex_hull_union(&self, other: &StateSet) -> Result<StateSet, GeometryError> {
        self.check_dim(other.dim())?;
        if let (StateSet::Box(a), StateSet::Box(b)) = (self, other) {
            return Ok(StateSet::Box(a.hull(b)));
        }
        Ok(StateSet::Support(self.to_support().hull(&other.to_support())?))
    }

    /// Over-approximates `S ∩ {x | Cx ≤ d}`. Exact for polytopes, support
    /// functions and boxes clipped by axis-aligned rows; other box
    /// intersections return the bounding box of the exact result.
    pub fn intersect(&self, c: &Condition) -> Result<StateSet, GeometryError> {
        self.check_dim(c.dim())?;
        if c.is_true() {
            return Ok(self.clone());
        }
        Ok(match self {
            StateSet::Box(b) => {
                if b.is_empty() {
                    return Ok(self.clone());
                }
                match c.axis_bounds() {
                    Some((_, _, true)) => StateSet::Box(BoxSet::empty(b.dim())),
                    Some((lo, hi, false)) => StateSet::Box(b.clip(&lo, &hi)),
                    None => StateSet::Box(HPolytope::from_box(b).intersect(c).bounding_box()),
                }
            }
            StateSet::Polytope(p) => StateSet::Polytope(p.intersect(c)),
            StateSet::Support(s) => StateSet::Support(s.intersect_condition(c)?),
        })
    }

    pub fn project(&self, dims: &[usize]) -> Result<StateSet, GeometryError> {
        check_dims(dims, self.dim())?;
        if dims.len() == self.dim() {
            return Ok(self.clone());
        }
        Ok(match self {
            StateSet::Box(b) => StateSet::Box(b.project(dims)),
            _ => StateSet::Support(self.to_support().project(dims)?),
        })
    }

    /// `{x | tᵢ·x ≤ support(S, tᵢ)}`; empty when `S` is.
    pub fn template_eval(&self, t: &TemplateDirections) -> Result<HPolytope, GeometryError> {
        self.check_dim(t.dim())?;
        if self.is_empty() {
            return Ok(HPolytope::new(Condition::falsity(self.dim())));
        }
        let values: Vec<f64> = t.directions().iter().map(|l| self.raw_support(l)).collect();
        Ok(pruned_template_polytope(self.dim(), t.directions(), &values))
    }

    /// Conversion to `target`; exact box→polytope and polytope→support,
    /// template over-approximation otherwise. Support functions convert to
    /// polytopes through their outer representation.
    pub fn convert(&self, target: Representation) -> StateSet {
        match (self, target) {
            (s, t) if s.representation() == t => s.clone(),
            (StateSet::Box(b), Representation::Polytope) => StateSet::Polytope(HPolytope::from_box(b)),
            (StateSet::Polytope(p), Representation::Box) => StateSet::Box(p.bounding_box()),
            (StateSet::Support(s), Representation::Polytope) => StateSet::Polytope(s.outer_polytope().clone()),
            (StateSet::Support(s), Representation::Box) => StateSet::Box(s.outer_polytope().bounding_box()),
            (s, _) => StateSet::Support(s.to_support()),
        }
    }

    /// Bounding box, tight for boxes and polytopes.
    pub fn bounding_box(&self) -> BoxSet {
        match self {
            StateSet::Box(b) => b.clone(),
            StateSet::Polytope(p) => p.bounding_box(),
            StateSet::Support(s) => {
                if s.is_empty() {
                    return BoxSet::empty(s.dim());
                }
                let d = s.dim();
                let mut lo = vec![0.0; d];
                let mut hi = vec![0.0; d];
                for i in 0..d {
                    let mut e = vec![0.0; d];
                    e[i] = 1.0;
                    hi[i] = s.support(&e);
                    e[i] = -1.0;
                    lo[i] = -s.support(&e);
                }
                BoxSet::new(lo, hi)
            }
        }
    }

    pub fn to_support(&self) -> SupportFunction {
        match self {
            StateSet::Box(b) => SupportFunction::from_box(b.clone()),
            StateSet::Polytope(p) => SupportFunction::from_polytope(p.clone()),
            StateSet::Support(s) => s.clone(),
        }
    }

    fn check_dim(&self, got: usize) -> Result<(), GeometryError> {
        if got != self.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }
}

/// Template hull of a non-empty list of sets: support per direction is the
/// maximum over the inputs. Empty inputs are ignored.
pub fn aggregate(sets: &[StateSet], t: &TemplateDirections) -> Result<HPolytope, GeometryError> {
    let first = sets.first().ok_or(GeometryError::EmptyList)?;
    let d = first.dim();
    for s in sets {
        s.check_dim(d)?;
    }
    if t.dim() != d {
        return Err(GeometryError::Dimension {
            expected: d,
            got: t.dim(),
        });
    }
    let live: Vec<&StateSet> = sets.iter().filter(|s| !s.is_empty()).collect();
    if live.is_empty() {
        return Ok(HPolytope::new(Condition::falsity(d)));
    }
    let values: Vec<f64> = t
        .directions()
        .iter()
        .map(|l| live.iter().map(|s| s.raw_support(l)).fold(f64::NEG_INFINITY, f64::max))
        .collect();
    Ok(pruned_template_polytope(d, t.directions(), &values))
}

pub(crate) fn check_dims(dims: &[usize], dim: usize) -> Result<(), GeometryError> {
    if dims.is_empty() || dims.windows(2).any(|w| w[0] >= w[1]) || dims.iter().any(|&i| i >= dim) {
        return Err(GeometryError::BadIndices);
    }
    Ok(())
}

/// Builds `{x | tᵢ·x ≤ vᵢ}` from template values, dropping infinite rows and
/// rows already implied by the box rows. The first `2·dim` directions must
/// be `+e₀, −e₀, +e₁, …`.
pub(crate) fn pruned_template_polytope(dim: usize, dirs: &[Vec<f64>], values: &[f64]) -> HPolytope {
    if values.contains(&f64::NEG_INFINITY) {
        return HPolytope::new(Condition::falsity(dim));
    }
    let mut lo = vec![f64::NEG_INFINITY; dim];
    let mut hi = vec![f64::INFINITY; dim];
    for i in 0..dim {
        hi[i] = values[2 * i];
        lo[i] = -values[2 * i + 1];
    }
    let mut cond = Condition::truth(dim);
    for (t, &v) in dirs.iter().zip(values).take(2 * dim) {
        if v.is_finite() {
            cond.push(t, v);
        }
    }
    for (t, &v) in dirs.iter().zip(values).skip(2 * dim) {
        if !v.is_finite() {
            continue;
        }
        let implied = condition::interval_support(&lo, &hi, t);
        if v < implied - 1e-12 * (1.0 + v.abs()) {
            cond.push(t, v);
        }
    }
    HPolytope::new(cond)
}
