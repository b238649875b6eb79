use crate::linalg::{dot, Vector};

use super::GeometryError;

/// Ordered unit-length directions used to over-approximate sets by
/// H-polytopes. Always contains `±eᵢ` for every dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateDirections {
    dim: usize,
    dirs: Vec<Vector>,
}

impl TemplateDirections {
    /// `{±eᵢ}`.
    pub fn boxed(dim: usize) -> Self {
        let mut dirs = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            dirs.push(e.clone());
            e[i] = -1.0;
            dirs.push(e);
        }
        TemplateDirections { dim, dirs }
    }

    /// `{±eᵢ} ∪ {(±eᵢ ± eⱼ)/√2 : i < j}`; the regular octagon in 2-D.
    pub fn octagonal(dim: usize) -> Self {
        let mut t = TemplateDirections::boxed(dim);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..dim {
            for j in i + 1..dim {
                for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                    let mut v = vec![0.0; dim];
                    v[i] = a * s;
                    v[j] = b * s;
                    t.dirs.push(v);
                }
            }
        }
        t
    }

    /// Custom directions; they are normalized and the box directions are
    /// added where missing.
    pub fn from_directions(dim: usize, dirs: Vec<Vector>) -> Result<Self, GeometryError> {
        let mut t = TemplateDirections::boxed(dim);
        for d in dirs {
            if d.len() != dim {
                return Err(GeometryError::Dimension {
                    expected: dim,
                    got: d.len(),
                });
            }
            let n = dot(&d, &d).sqrt();
            if n == 0.0 {
                return Err(GeometryError::ZeroDirection);
            }
            let u: Vector = d.iter().map(|x| x / n).collect();
            if !t.dirs.contains(&u) {
                t.dirs.push(u);
            }
        }
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn directions(&self) -> &[Vector] {
        &self.dirs
    }
}
