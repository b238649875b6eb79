use crate::linalg::Matrix;

use super::condition::interval_support;
use super::{Condition, TOL};

/// Axis-aligned box, possibly unbounded in some directions, or empty.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSet {
    lo: Vec<f64>,
    hi: Vec<f64>,
    empty: bool,
}

impl BoxSet {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Self {
        assert_eq!(lo.len(), hi.len(), "box bound dimension mismatch");
        let empty = lo.iter().zip(&hi).any(|(l, h)| l > h);
        BoxSet { lo, hi, empty }
    }

    pub fn from_intervals(iv: &[(f64, f64)]) -> Self {
        BoxSet::new(iv.iter().map(|p| p.0).collect(), iv.iter().map(|p| p.1).collect())
    }

    pub fn point(x: &[f64]) -> Self {
        BoxSet::new(x.to_vec(), x.to_vec())
    }

    pub fn empty(dim: usize) -> Self {
        BoxSet {
            lo: vec![f64::INFINITY; dim],
            hi: vec![f64::NEG_INFINITY; dim],
            empty: true,
        }
    }

    pub fn universe(dim: usize) -> Self {
        BoxSet::new(vec![f64::NEG_INFINITY; dim], vec![f64::INFINITY; dim])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn interval(&self, i: usize) -> (f64, f64) {
        (self.lo[i], self.hi[i])
    }

    pub fn is_bounded(&self) -> bool {
        self.empty || self.lo.iter().chain(&self.hi).all(|x| x.is_finite())
    }

    pub fn support(&self, dir: &[f64]) -> f64 {
        if self.empty {
            return f64::NEG_INFINITY;
        }
        interval_support(&self.lo, &self.hi, dir)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        !self.empty
            && x.iter()
                .enumerate()
                .all(|(i, &v)| v >= self.lo[i] - tol && v <= self.hi[i] + tol)
    }

    pub fn to_condition(&self) -> Condition {
        if self.empty {
            return Condition::falsity(self.dim());
        }
        Condition::from_bounds(&self.lo, &self.hi)
    }

    /// Interval-arithmetic image of `x ↦ Mx + v`; exact when each row of
    /// `M` has at most one nonzero entry.
    pub fn affine_map(&self, m: &Matrix, v: &[f64]) -> BoxSet {
        if self.empty {
            return BoxSet::empty(m.rows());
        }
        let mut lo = vec![0.0; m.rows()];
        let mut hi = vec![0.0; m.rows()];
        for i in 0..m.rows() {
            let (mut l, mut h) = (v[i], v[i]);
            for (j, &a) in m.row(i).iter().enumerate() {
                if a > 0.0 {
                    l += a * self.lo[j];
                    h += a * self.hi[j];
                } else if a < 0.0 {
                    l += a * self.hi[j];
                    h += a * self.lo[j];
                }
            }
            lo[i] = l;
            hi[i] = h;
        }
        BoxSet::new(lo, hi)
    }

    pub fn minkowski_sum(&self, other: &BoxSet) -> BoxSet {
        if self.empty || other.empty {
            return BoxSet::empty(self.dim());
        }
        BoxSet::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a + b).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a + b).collect(),
        )
    }

    /// Smallest box containing both.
    pub fn hull(&self, other: &BoxSet) -> BoxSet {
        if self.empty {
            return other.clone();
        }
        if other.empty {
            return self.clone();
        }
        BoxSet::new(
            self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        )
    }

    /// Clip by per-dimension bounds. Bound violations within `TOL` are
    /// treated as touching, so the result is never spuriously empty.
    pub fn clip(&self, lo: &[f64], hi: &[f64]) -> BoxSet {
        if self.empty {
            return self.clone();
        }
        let mut nlo = self.lo.clone();
        let mut nhi = self.hi.clone();
        for i in 0..self.dim() {
            nlo[i] = nlo[i].max(lo[i]);
            nhi[i] = nhi[i].min(hi[i]);
            if nlo[i] > nhi[i] {
                if nlo[i] - nhi[i] <= TOL {
                    // Touching within tolerance: keep a degenerate interval
                    // that covers both readings.
                    let (a, b) = (nhi[i], nlo[i]);
                    nlo[i] = a;
                    nhi[i] = b;
                } else {
                    return BoxSet::empty(self.dim());
                }
            }
        }
        BoxSet::new(nlo, nhi)
    }

    pub fn project(&self, dims: &[usize]) -> BoxSet {
        if self.empty {
            return BoxSet::empty(dims.len());
        }
        BoxSet::new(
            dims.iter().map(|&i| self.lo[i]).collect(),
            dims.iter().map(|&i| self.hi[i]).collect(),
        )
    }

    /// Cartesian product `self × other`.
    pub fn product(&self, other: &BoxSet) -> BoxSet {
        if self.empty || other.empty {
            return BoxSet::empty(self.dim() + other.dim());
        }
        let mut lo = self.lo.clone();
        lo.extend_from_slice(&other.lo);
        let mut hi = self.hi.clone();
        hi.extend_from_slice(&other.hi);
        BoxSet::new(lo, hi)
    }

    /// Vertices of a bounded box (2^dim of them).
    pub fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                (0..d)
                    .map(|i| if mask >> i & 1 == 1 { self.hi[i] } else { self.lo[i] })
                    .collect()
            })
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translation_is_exact() {
        let b = BoxSet::from_intervals(&[(0.0, 1.0), (0.0, 1.0)]);
        let t = b.affine_map(&Matrix::identity(2), &[1.0, 0.0]);
        assert_eq!(t, BoxSet::from_intervals(&[(1.0, 2.0), (0.0, 1.0)]));
    }

    #[test]
    fn clip_within_tolerance_is_not_empty() {
        let b = BoxSet::from_intervals(&[(0.5 + 1e-12, 0.6)]);
        let c = b.clip(&[f64::NEG_INFINITY], &[0.5]);
        assert!(!c.is_empty());
        assert!(b.clip(&[0.7], &[1.0]).is_empty());
    }

    #[test]
    fn unbounded_dimensions_skip_zero_coefficients() {
        let b = BoxSet::new(vec![0.0, f64::NEG_INFINITY], vec![1.0, f64::INFINITY]);
        let m = Matrix::from_rows(&[vec![2.0, 0.0]]);
        assert_eq!(b.affine_map(&m, &[0.0]), BoxSet::from_intervals(&[(0.0, 2.0)]));
    }
}
