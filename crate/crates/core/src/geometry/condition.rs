use std::fmt;

use crate::linalg::{self, dot, LpOutcome, Matrix, Vector};

use super::{GeometryError, TOL};

/// A conjunction of linear inequalities `Cx ≤ d`. No rows means "true".
#[derive(Clone, PartialEq)]
pub struct Condition {
    dim: usize,
    coeffs: Vec<f64>,
    bounds: Vec<f64>,
}

impl Condition {
    pub fn new(matrix: &Matrix, bounds: Vector) -> Result<Self, GeometryError> {
        if matrix.rows() != bounds.len() {
            return Err(GeometryError::Dimension {
                expected: matrix.rows(),
                got: bounds.len(),
            });
        }
        Ok(Condition {
            dim: matrix.cols(),
            coeffs: matrix.as_slice().to_vec(),
            bounds,
        })
    }

    pub fn truth(dim: usize) -> Self {
        Condition {
            dim,
            coeffs: Vec::new(),
            bounds: Vec::new(),
        }
    }

    /// A condition no point satisfies.
    pub fn falsity(dim: usize) -> Self {
        let mut c = Condition::truth(dim);
        c.push(&vec![0.0; dim], -1.0);
        c
    }

    pub fn from_rows<I>(dim: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = (Vector, f64)>,
    {
        let mut c = Condition::truth(dim);
        for (r, b) in rows {
            c.push(&r, b);
        }
        c
    }

    /// `lo ≤ x ≤ hi` (infinite entries produce no row).
    pub fn from_bounds(lo: &[f64], hi: &[f64]) -> Self {
        let dim = lo.len();
        let mut c = Condition::truth(dim);
        for i in 0..dim {
            let mut e = vec![0.0; dim];
            if hi[i].is_finite() {
                e[i] = 1.0;
                c.push(&e, hi[i]);
            }
            if lo[i].is_finite() {
                e[i] = -1.0;
                c.push(&e, -lo[i]);
            }
        }
        c
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn is_true(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn bound(&self, i: usize) -> f64 {
        self.bounds[i]
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(move |i| (self.row(i), self.bounds[i]))
    }

    pub fn matrix(&self) -> Matrix {
        Matrix::from_vec(self.len(), self.dim, self.coeffs.clone())
    }

    pub fn push(&mut self, row: &[f64], bound: f64) {
        assert_eq!(row.len(), self.dim, "condition row dimension mismatch");
        self.coeffs.extend_from_slice(row);
        self.bounds.push(bound);
    }

    pub fn concat(&self, other: &Condition) -> Result<Condition, GeometryError> {
        if other.dim != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut c = self.clone();
        c.coeffs.extend_from_slice(&other.coeffs);
        c.bounds.extend_from_slice(&other.bounds);
        Ok(c)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.rows().all(|(r, b)| dot(r, x) <= b + tol)
    }

    /// Variables with a nonzero coefficient in row `i`.
    pub fn support_of_row(&self, i: usize) -> Vec<usize> {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0.0)
            .map(|(j, _)| j)
            .collect()
    }

    /// Per-dimension bounds when every row has at most one nonzero entry.
    pub fn axis_bounds(&self) -> Option<(Vec<f64>, Vec<f64>, bool)> {
        let mut lo = vec![f64::NEG_INFINITY; self.dim];
        let mut hi = vec![f64::INFINITY; self.dim];
        let mut contradictory = false;
        for (r, b) in self.rows() {
            let mut nz = r.iter().enumerate().filter(|(_, &a)| a != 0.0);
            match (nz.next(), nz.next()) {
                (None, _) => {
                    if b < -TOL {
                        contradictory = true;
                    }
                }
                (Some((j, &a)), None) => {
                    if a > 0.0 {
                        hi[j] = hi[j].min(b / a);
                    } else {
                        lo[j] = lo[j].max(b / a);
                    }
                }
                _ => return None,
            }
        }
        Some((lo, hi, contradictory))
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.rows().all(|(r, _)| r.iter().filter(|&&a| a != 0.0).count() <= 1)
    }

    pub fn is_satisfiable(&self) -> bool {
        if let Some((lo, hi, bad)) = self.axis_bounds() {
            return !bad && lo.iter().zip(&hi).all(|(l, h)| *l <= *h + TOL);
        }
        linalg::lp::is_feasible(&self.matrix(), &self.bounds)
    }

    /// `sup{ℓ·x | Cx ≤ d}`: `+∞` when unbounded, `−∞` when infeasible.
    pub fn support(&self, dir: &[f64]) -> f64 {
        if let Some((lo, hi, bad)) = self.axis_bounds() {
            if bad || lo.iter().zip(&hi).any(|(l, h)| *l > *h + TOL) {
                return f64::NEG_INFINITY;
            }
            return interval_support(&lo, &hi, dir);
        }
        match linalg::lp::maximize(&self.matrix(), &self.bounds, dir) {
            LpOutcome::Optimum { value, .. } => value,
            LpOutcome::Infeasible => f64::NEG_INFINITY,
            LpOutcome::Unbounded => f64::INFINITY,
        }
    }

    /// Maximizer of `ℓ·x`, if the program has a finite optimum.
    pub fn maximizer(&self, dir: &[f64]) -> Option<Vector> {
        match linalg::lp::maximize(&self.matrix(), &self.bounds, dir) {
            LpOutcome::Optimum { point, .. } => Some(point),
            _ => None,
        }
    }

    /// Restriction to the listed columns (rows keep their order).
    pub fn select_columns(&self, cols: &[usize]) -> Condition {
        let mut c = Condition::truth(cols.len());
        for (r, b) in self.rows() {
            let row: Vec<f64> = cols.iter().map(|&j| r[j]).collect();
            c.push(&row, b);
        }
        c
    }

    pub fn select_rows(&self, rows: &[usize]) -> Condition {
        let mut c = Condition::truth(self.dim);
        for &i in rows {
            c.push(self.row(i), self.bounds[i]);
        }
        c
    }

    /// Preimage under `x ↦ Mx + v`: `{x | C(Mx + v) ≤ d}`.
    pub fn pullback(&self, m: &Matrix, v: &[f64]) -> Condition {
        let mut c = Condition::truth(m.cols());
        for (r, b) in self.rows() {
            let row = m.tr_mul_vec(r);
            c.push(&row, b - dot(r, v));
        }
        c
    }

    /// Rows scaled to unit length, exact duplicates merged (tightest bound
    /// kept), trivially true rows dropped.
    pub fn normalized(&self) -> Condition {
        let mut out = Condition::truth(self.dim);
        let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
        for (r, b) in self.rows() {
            let norm = dot(r, r).sqrt();
            if norm == 0.0 {
                if b < -TOL {
                    return Condition::falsity(self.dim);
                }
                continue;
            }
            if b == f64::INFINITY {
                continue;
            }
            let row: Vec<f64> = r
                .iter()
                .map(|a| {
                    let x = a / norm;
                    if x == 0.0 {
                        0.0
                    } else {
                        x
                    }
                })
                .collect();
            let bound = b / norm;
            let key: Vec<u64> = row.iter().map(|x| x.to_bits()).collect();
            match seen.get(&key) {
                Some(&i) => {
                    if bound < out.bounds[i] {
                        out.bounds[i] = bound;
                    }
                }
                None => {
                    seen.insert(key, out.len());
                    out.push(&row, bound);
                }
            }
        }
        out
    }
}

pub(crate) fn interval_support(lo: &[f64], hi: &[f64], dir: &[f64]) -> f64 {
    let mut s = 0.0;
    for ((&l, &h), &d) in lo.iter().zip(hi).zip(dir) {
        if d > 0.0 {
            s += d * h;
        } else if d < 0.0 {
            s += d * l;
        }
    }
    s
}

impl fmt::Debug for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Condition(dim {}) [", self.dim)?;
        for (r, b) in self.rows() {
            write!(f, " {r:?}·x <= {b};")?;
        }
        write!(f, " ]")
    }
}
