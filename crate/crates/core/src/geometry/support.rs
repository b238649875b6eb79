//! Lazy support-function sets.
//!
//! A set is an immutable operation tree over box and polytope leaves.
//! Support queries recurse through the tree; emptiness and
//! intersection-aware support go through an outer halfspace
//! representation that each node computes once and caches. The outer
//! representation is exact along chains of leaves, intersections and
//! invertible affine maps; Minkowski sums, hulls, projections and singular
//! maps are replaced by their octagonal template polytope.

use std::sync::{Arc, OnceLock};

use crate::linalg::{dot, Matrix, Vector};

use super::{BoxSet, Condition, GeometryError, HPolytope, TemplateDirections};

#[derive(Debug, Clone)]
pub enum Leaf {
    Box(BoxSet),
    Polytope(HPolytope),
}

impl Leaf {
    fn support(&self, dir: &[f64]) -> f64 {
        match self {
            Leaf::Box(b) => b.support(dir),
            Leaf::Polytope(p) => p.support(dir),
        }
    }

    fn condition(&self) -> Condition {
        match self {
            Leaf::Box(b) => b.to_condition(),
            Leaf::Polytope(p) => p.condition().clone(),
        }
    }
}

#[derive(Debug)]
enum Kind {
    Leaf(Leaf),
    Map {
        m: Matrix,
        v: Vector,
        inverse: Option<Matrix>,
        identity: bool,
        child: Arc<Node>,
    },
    Sum(Arc<Node>, Arc<Node>),
    Intersection(Arc<Node>, Arc<Node>),
    Hull(Arc<Node>, Arc<Node>),
    Projection {
        dims: Vec<usize>,
        child: Arc<Node>,
    },
}

#[derive(Debug)]
struct Outer {
    poly: HPolytope,
    exact: bool,
}

#[derive(Debug)]
struct Node {
    kind: Kind,
    dim: usize,
    outer: OnceLock<Outer>,
}

impl Node {
    fn new(kind: Kind, dim: usize) -> Arc<Node> {
        Arc::new(Node {
            kind,
            dim,
            outer: OnceLock::new(),
        })
    }
}

/// Support-function set: a shared handle to an operation tree.
#[derive(Debug, Clone)]
pub struct SupportFunction {
    node: Arc<Node>,
}

impl SupportFunction {
    pub fn from_box(b: BoxSet) -> Self {
        let dim = b.dim();
        SupportFunction {
            node: Node::new(Kind::Leaf(Leaf::Box(b)), dim),
        }
    }

    pub fn from_polytope(p: HPolytope) -> Self {
        let dim = p.dim();
        SupportFunction {
            node: Node::new(Kind::Leaf(Leaf::Polytope(p)), dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.node.dim
    }

    /// Leaf content when the tree is a single leaf.
    pub fn as_leaf(&self) -> Option<&Leaf> {
        match &self.node.kind {
            Kind::Leaf(l) => Some(l),
            _ => None,
        }
    }

    pub fn affine_map(&self, m: &Matrix, v: &[f64]) -> Result<Self, GeometryError> {
        if m.cols() != self.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                got: m.cols(),
            });
        }
        if v.len() != m.rows() {
            return Err(GeometryError::Dimension {
                expected: m.rows(),
                got: v.len(),
            });
        }
        let identity = m.is_identity();
        let inverse = if identity {
            Some(m.clone())
        } else if m.is_square() {
            m.inverse().ok()
        } else {
            None
        };
        let kind = Kind::Map {
            m: m.clone(),
            v: v.to_vec(),
            inverse,
            identity,
            child: self.node.clone(),
        };
        Ok(SupportFunction {
            node: Node::new(kind, m.rows()),
        })
    }

    /// Affine image with a known inverse of `m`.
    pub fn affine_map_with_inverse(&self, m: &Matrix, v: &[f64], inverse: &Matrix) -> Result<Self, GeometryError> {
        if m.cols() != self.dim() || inverse.rows() != m.cols() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                got: m.cols(),
            });
        }
        if v.len() != m.rows() {
            return Err(GeometryError::Dimension {
                expected: m.rows(),
                got: v.len(),
            });
        }
        let kind = Kind::Map {
            m: m.clone(),
            v: v.to_vec(),
            inverse: Some(inverse.clone()),
            identity: m.is_identity(),
            child: self.node.clone(),
        };
        Ok(SupportFunction {
            node: Node::new(kind, m.rows()),
        })
    }

    pub fn minkowski_sum(&self, other: &SupportFunction) -> Result<Self, GeometryError> {
        self.same_dim(other)?;
        Ok(SupportFunction {
            node: Node::new(Kind::Sum(self.node.clone(), other.node.clone()), self.dim()),
        })
    }

    pub fn intersect(&self, other: &SupportFunction) -> Result<Self, GeometryError> {
        self.same_dim(other)?;
        let kind = Kind::Intersection(self.node.clone(), other.node.clone());
        Ok(SupportFunction {
            node: Node::new(kind, self.dim()),
        })
    }

    pub fn intersect_condition(&self, c: &Condition) -> Result<Self, GeometryError> {
        if c.dim() != self.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                got: c.dim(),
            });
        }
        if c.is_true() {
            return Ok(self.clone());
        }
        self.intersect(&SupportFunction::from_polytope(HPolytope::new(c.clone())))
    }

    pub fn hull(&self, other: &SupportFunction) -> Result<Self, GeometryError> {
        self.same_dim(other)?;
        Ok(SupportFunction {
            node: Node::new(Kind::Hull(self.node.clone(), other.node.clone()), self.dim()),
        })
    }

    pub fn project(&self, dims: &[usize]) -> Result<Self, GeometryError> {
        super::check_dims(dims, self.dim())?;
        if dims.len() == self.dim() {
            return Ok(self.clone());
        }
        let kind = Kind::Projection {
            dims: dims.to_vec(),
            child: self.node.clone(),
        };
        Ok(SupportFunction {
            node: Node::new(kind, dims.len()),
        })
    }

    /// Upper bound on `sup{ℓ·x | x ∈ S}`; exact for trees without
    /// intersections. `−∞` for an empty set.
    pub fn support(&self, dir: &[f64]) -> f64 {
        support(&self.node, dir)
    }

    pub fn is_empty(&self) -> bool {
        outer(&self.node).poly.is_empty()
    }

    /// Outer halfspace representation (cached).
    pub fn outer_polytope(&self) -> &HPolytope {
        &outer(&self.node).poly
    }

    /// Whether the outer representation is exact (no template step).
    pub fn outer_is_exact(&self) -> bool {
        outer(&self.node).exact
    }

    fn same_dim(&self, other: &SupportFunction) -> Result<(), GeometryError> {
        if self.dim() != other.dim() {
            return Err(GeometryError::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(())
    }
}

fn support(node: &Node, dir: &[f64]) -> f64 {
    match &node.kind {
        Kind::Leaf(l) => l.support(dir),
        Kind::Map {
            m, v, identity, child, ..
        } => {
            let inner = if *identity {
                support(child, dir)
            } else {
                support(child, &m.tr_mul_vec(dir))
            };
            if inner == f64::NEG_INFINITY {
                inner
            } else {
                inner + dot(dir, v)
            }
        }
        Kind::Sum(a, b) => {
            let (x, y) = (support(a, dir), support(b, dir));
            if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                x + y
            }
        }
        Kind::Hull(a, b) => {
            let (x, y) = (support(a, dir), support(b, dir));
            x.max(y)
        }
        Kind::Projection { dims, child } => {
            let mut lifted = vec![0.0; child.dim];
            for (k, &i) in dims.iter().enumerate() {
                lifted[i] = dir[k];
            }
            support(child, &lifted)
        }
        Kind::Intersection(a, b) => {
            let mut s = outer(node).poly.support(dir);
            for side in [a, b] {
                if let Kind::Leaf(l) = &side.kind {
                    s = s.min(l.support(dir));
                }
            }
            s
        }
    }
}

fn outer(node: &Node) -> &Outer {
    node.outer.get_or_init(|| compute_outer(node))
}

fn compute_outer(node: &Node) -> Outer {
    match &node.kind {
        Kind::Leaf(l) => Outer {
            poly: HPolytope::new(l.condition().normalized()),
            exact: true,
        },
        Kind::Intersection(a, b) => {
            let (oa, ob) = (outer(a), outer(b));
            let cond = oa
                .poly
                .condition()
                .concat(ob.poly.condition())
                .expect("intersection operands share a dimension")
                .normalized();
            Outer {
                poly: HPolytope::new(cond),
                exact: oa.exact && ob.exact,
            }
        }
        Kind::Map {
            v,
            inverse: Some(inv),
            child,
            ..
        } => {
            let oc = outer(child);
            let pushed = oc.poly.map_invertible(inv, v);
            Outer {
                poly: HPolytope::new(pushed.condition().normalized()),
                exact: oc.exact,
            }
        }
        _ => Outer {
            poly: template_outer(node),
            exact: false,
        },
    }
}

/// Octagonal template polytope of a node, with rows implied by the bounding
/// box dropped. Diagonal directions over a dimension of negligible width are
/// implied by the box and skipped.
fn template_outer(node: &Node) -> HPolytope {
    let d = node.dim;
    let template = TemplateDirections::octagonal(d);
    let dirs = template.directions();
    let mut values = vec![f64::INFINITY; dirs.len()];
    for k in 0..2 * d {
        values[k] = support(node, &dirs[k]);
        if values[k] == f64::NEG_INFINITY {
            return super::pruned_template_polytope(d, dirs, &values);
        }
    }
    let thin: Vec<bool> = (0..d).map(|i| values[2 * i] + values[2 * i + 1] <= 1e-9).collect();
    for (k, l) in dirs.iter().enumerate().skip(2 * d) {
        let mut nz = l.iter().enumerate().filter(|(_, x)| **x != 0.0).map(|(i, _)| i);
        let (i, j) = (nz.next().unwrap_or(0), nz.next().unwrap_or(0));
        if !thin[i] && !thin[j] {
            values[k] = support(node, l);
        }
    }
    super::pruned_template_polytope(d, dirs, &values)
}
