//! Small dense LP kernel: two-phase tableau simplex with Bland's rule.
//!
//! The geometry layer asks for `max ℓ·x s.t. Cx ≤ d` with few variables and
//! possibly many constraints, so the solver works on the dual standard form
//! `min d·λ s.t. Cᵀλ = ℓ, λ ≥ 0`, whose tableau has one row per variable.

use super::{dot, Matrix, Vector};

const PIVOT_EPS: f64 = 1e-11;
const COST_EPS: f64 = 1e-9;
const FEAS_EPS: f64 = 1e-9;

/// `maximize objective·x subject to constraints·x ≤ bounds`.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub constraints: Matrix,
    pub bounds: Vector,
    pub objective: Vector,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimum { value: f64, point: Vector },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(constraints: Matrix, bounds: Vector, objective: Vector) -> Self {
        assert_eq!(constraints.rows(), bounds.len(), "constraint/bound count mismatch");
        assert_eq!(constraints.cols(), objective.len(), "objective dimension mismatch");
        LinearProgram {
            constraints,
            bounds,
            objective,
        }
    }
}

pub fn lp_optimize(lp: &LinearProgram) -> LpOutcome {
    maximize(&lp.constraints, &lp.bounds, &lp.objective)
}

/// Rows normalized to unit Euclidean length; all-zero rows are checked and
/// dropped. Returns `None` when a zero row is violated.
fn normalized(c: &Matrix, d: &[f64]) -> Option<(Matrix, Vector)> {
    let n = c.cols();
    let mut rows = Vec::with_capacity(c.rows() * n);
    let mut bounds = Vec::with_capacity(c.rows());
    for i in 0..c.rows() {
        let r = c.row(i);
        let norm = dot(r, r).sqrt();
        if norm == 0.0 {
            if d[i] < -FEAS_EPS {
                return None;
            }
            continue;
        }
        rows.extend(r.iter().map(|a| a / norm));
        bounds.push(d[i] / norm);
    }
    let m = bounds.len();
    Some((Matrix::from_vec(m, n, rows), bounds))
}

pub(crate) fn maximize(c: &Matrix, d: &[f64], objective: &[f64]) -> LpOutcome {
    let n = c.cols();
    let Some((c, d)) = normalized(c, d) else {
        return LpOutcome::Infeasible;
    };
    if c.rows() == 0 {
        return if objective.iter().all(|&o| o == 0.0) {
            LpOutcome::Optimum {
                value: 0.0,
                point: vec![0.0; n],
            }
        } else {
            LpOutcome::Unbounded
        };
    }
    // Dual: min dᵀλ, Cᵀλ = objective, λ ≥ 0.
    let ct = c.transpose();
    match StandardForm::solve(&ct, objective, &d) {
        StandardOutcome::Optimal { value, multipliers } => LpOutcome::Optimum {
            value,
            point: multipliers,
        },
        StandardOutcome::Unbounded => LpOutcome::Infeasible,
        StandardOutcome::Infeasible => {
            if is_feasible_normalized(&c, &d) {
                LpOutcome::Unbounded
            } else {
                LpOutcome::Infeasible
            }
        }
    }
}

/// Whether `{x | Cx ≤ d}` is non-empty.
pub(crate) fn is_feasible(c: &Matrix, d: &[f64]) -> bool {
    match normalized(c, d) {
        None => false,
        Some((c, d)) => c.rows() == 0 || is_feasible_normalized(&c, &d),
    }
}

// Farkas: Cx ≤ d is infeasible iff some λ ≥ 0 with Cᵀλ = 0, Σλ = 1 has dᵀλ < 0.
fn is_feasible_normalized(c: &Matrix, d: &[f64]) -> bool {
    let (m, n) = (c.rows(), c.cols());
    let mut a = Matrix::zeros(n + 1, m);
    for i in 0..m {
        for j in 0..n {
            a[(j, i)] = c[(i, j)];
        }
        a[(n, i)] = 1.0;
    }
    let mut rhs = vec![0.0; n + 1];
    rhs[n] = 1.0;
    match StandardForm::solve(&a, &rhs, d) {
        StandardOutcome::Optimal { value, .. } => value >= -FEAS_EPS,
        StandardOutcome::Infeasible => true,
        StandardOutcome::Unbounded => false,
    }
}

enum StandardOutcome {
    Optimal { value: f64, multipliers: Vector },
    Infeasible,
    Unbounded,
}

/// Tableau for `min cᵀλ s.t. Aλ = b, λ ≥ 0`. Columns are the structural
/// variables followed by one artificial per row, then the right-hand side.
struct StandardForm {
    rows: usize,
    structural: usize,
    width: usize,
    tab: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
}

impl StandardForm {
    fn solve(a: &Matrix, b: &[f64], c: &[f64]) -> StandardOutcome {
        let (rows, structural) = (a.rows(), a.cols());
        let width = structural + rows + 1;
        let mut tab = vec![0.0; rows * width];
        let mut sign = vec![1.0; rows];
        for i in 0..rows {
            let s = if b[i] < 0.0 { -1.0 } else { 1.0 };
            sign[i] = s;
            let row = &mut tab[i * width..(i + 1) * width];
            for j in 0..structural {
                row[j] = s * a[(i, j)];
            }
            row[structural + i] = 1.0;
            row[width - 1] = s * b[i];
        }
        let mut sf = StandardForm {
            rows,
            structural,
            width,
            tab,
            cost: vec![0.0; width],
            basis: (structural..structural + rows).collect(),
        };

        // Phase 1: minimize the sum of artificials.
        for i in 0..rows {
            for j in 0..width {
                if j < structural || j == width - 1 {
                    sf.cost[j] -= sf.tab[i * width + j];
                }
            }
        }
        if !sf.iterate(true) {
            unreachable!("phase one is bounded below by zero");
        }
        let infeasibility = -sf.cost[width - 1];
        let scale = 1.0 + b.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if infeasibility > FEAS_EPS * scale {
            return StandardOutcome::Infeasible;
        }
        sf.drive_out_artificials();

        // Phase 2.
        sf.cost.iter_mut().for_each(|x| *x = 0.0);
        sf.cost[..structural].copy_from_slice(c);
        for i in 0..rows {
            let bj = sf.basis[i];
            let cb = if bj < structural { c[bj] } else { 0.0 };
            if cb != 0.0 {
                for j in 0..width {
                    sf.cost[j] -= cb * sf.tab[i * width + j];
                }
            }
        }
        if !sf.iterate(false) {
            return StandardOutcome::Unbounded;
        }
        let value = -sf.cost[width - 1];
        let multipliers = (0..rows).map(|k| -sf.cost[structural + k] * sign[k]).collect();
        StandardOutcome::Optimal { value, multipliers }
    }

    /// Runs Bland-rule pivots; returns false on unboundedness.
    fn iterate(&mut self, allow_artificial: bool) -> bool {
        let limit = if allow_artificial {
            self.structural + self.rows
        } else {
            self.structural
        };
        loop {
            let Some(enter) = (0..limit).find(|&j| self.cost[j] < -COST_EPS) else {
                return true;
            };
            let w = self.width;
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let coef = self.tab[i * w + enter];
                if coef > PIVOT_EPS {
                    let ratio = self.tab[i * w + w - 1] / coef;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - 1e-12 || (ratio <= lr + 1e-12 && self.basis[i] < self.basis[li]) {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                None => return false,
                Some((row, _)) => self.pivot(row, enter),
            }
        }
    }

    fn drive_out_artificials(&mut self) {
        let w = self.width;
        for i in 0..self.rows {
            if self.basis[i] < self.structural {
                continue;
            }
            if let Some(j) = (0..self.structural).find(|&j| self.tab[i * w + j].abs() > 1e-9) {
                self.pivot(i, j);
            }
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.tab[row * w + col];
        for j in 0..w {
            self.tab[row * w + j] /= p;
        }
        let pivot_row: Vec<f64> = self.tab[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.tab[i * w + col];
            if f != 0.0 {
                let r = &mut self.tab[i * w..(i + 1) * w];
                for (x, &pr) in r.iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                r[col] = 0.0;
            }
        }
        let f = self.cost[col];
        if f != 0.0 {
            for (x, &pr) in self.cost.iter_mut().zip(&pivot_row) {
                *x -= f * pr;
            }
            self.cost[col] = 0.0;
        }
        self.basis[row] = col;
    }
}
