//! Flowpipe segments and jump successors for a single sub-space.

use crate::automaton::{AffineFlow, AffineReset};
use crate::geometry::{BoxSet, Condition, GeometryError, StateSet};
use crate::linalg::{affine_flow_map, LinalgError, Matrix, Vector};

/// Symmetric per-dimension radius added to the first segment.
#[derive(Debug, Clone, PartialEq)]
pub struct BloatingBox {
    pub radius: Vec<f64>,
}

impl BloatingBox {
    pub fn is_zero(&self) -> bool {
        self.radius.iter().all(|&r| r == 0.0)
    }

    pub fn to_box(&self) -> BoxSet {
        BoxSet::new(self.radius.iter().map(|r| -r).collect(), self.radius.clone())
    }
}

/// The time-δ map of an affine flow, its inverse and the data needed for
/// bloating. Rows with zero dynamics are kept exact.
#[derive(Debug, Clone)]
pub struct FlowMap {
    pub delta: f64,
    pub m: Matrix,
    pub v: Vector,
    pub inverse: Matrix,
    /// `ẋ = 0`.
    pub stationary: bool,
    /// Per dimension: the variables its dynamics depend on (transitively),
    /// and the norms of that closed subsystem.
    closures: Vec<Closure>,
}

#[derive(Debug, Clone)]
struct Closure {
    vars: Vec<usize>,
    a_norm: f64,
    b_norm: f64,
}

impl FlowMap {
    pub fn new(flow: &AffineFlow, delta: f64) -> Result<Self, LinalgError> {
        let n = flow.dim();
        let (mut m, mut v) = affine_flow_map(&flow.a, &flow.b, delta)?;
        let (mut inverse, _) = affine_flow_map(&flow.a, &flow.b, -delta)?;
        for i in 0..n {
            if flow.a.row(i).iter().all(|&x| x == 0.0) {
                for j in 0..n {
                    let e = if i == j { 1.0 } else { 0.0 };
                    m.row_mut(i)[j] = e;
                    inverse.row_mut(i)[j] = e;
                }
                v[i] = delta * flow.b[i];
            }
        }
        let closures = (0..n)
            .map(|i| {
                let mut vars = vec![i];
                let mut k = 0;
                while k < vars.len() {
                    let r = vars[k];
                    for j in 0..n {
                        if flow.a[(r, j)] != 0.0 && !vars.contains(&j) {
                            vars.push(j);
                        }
                    }
                    k += 1;
                }
                let a_norm = vars
                    .iter()
                    .map(|&r| flow.a.row(r).iter().map(|x| x.abs()).sum::<f64>())
                    .fold(0.0, f64::max);
                let b_norm = vars.iter().map(|&r| flow.b[r].abs()).fold(0.0, f64::max);
                Closure { vars, a_norm, b_norm }
            })
            .collect();
        let stationary = flow.a.is_zero() && flow.b.iter().all(|&x| x == 0.0);
        Ok(FlowMap {
            delta,
            m,
            v,
            inverse,
            stationary,
            closures,
        })
    }

    pub fn dim(&self) -> usize {
        self.v.len()
    }

    /// Radius bounding the distance between the trajectories from `p` over
    /// `[0, δ]` and the hull of `p` and its time-δ image. Per dimension the
    /// bound uses only the subsystem that dimension depends on.
    pub fn bloating(&self, p: &StateSet) -> BloatingBox {
        let n = self.dim();
        let mut extent: Vec<Option<f64>> = vec![None; n];
        let mut radius = vec![0.0; n];
        for (i, c) in self.closures.iter().enumerate() {
            if c.a_norm == 0.0 {
                continue;
            }
            let mut r_p: f64 = 0.0;
            for &j in &c.vars {
                let e = *extent[j].get_or_insert_with(|| {
                    let mut dir = vec![0.0; n];
                    dir[j] = 1.0;
                    let hi = p.support(&dir).unwrap_or(0.0);
                    dir[j] = -1.0;
                    let lo = p.support(&dir).unwrap_or(0.0);
                    hi.abs().max(lo.abs())
                });
                r_p = r_p.max(e);
            }
            let x = self.delta * c.a_norm;
            let grow = x.exp_m1();
            radius[i] = (grow - x) * r_p + grow * self.delta * c.b_norm;
        }
        BloatingBox { radius }
    }
}

/// [`bloating_box`] radius for a flow `ẋ = Ax + b` from the set `p`.
pub fn bloating_box(a: &Matrix, b: &[f64], p: &StateSet, delta: f64) -> Result<BloatingBox, LinalgError> {
    let flow = AffineFlow {
        a: a.clone(),
        b: b.to_vec(),
    };
    Ok(FlowMap::new(&flow, delta)?.bloating(p))
}

/// `(conv(p ∪ Φp) ⊕ 𝓑) ∩ inv` for the time-δ map `Φ`.
pub fn first_segment_with(p: &StateSet, map: &FlowMap, inv: &Condition) -> Result<StateSet, GeometryError> {
    if map.stationary {
        return p.intersect(inv);
    }
    let image = p.affine_map_with_inverse(&map.m, &map.v, &map.inverse)?;
    let mut omega = p.convex_hull_union(&image)?;
    let bloat = map.bloating(p);
    if !bloat.is_zero() {
        omega = omega.minkowski_sum(&StateSet::Box(bloat.to_box()))?;
    }
    omega.intersect(inv)
}

/// `Φ Ω ∩ inv`.
pub fn next_segment_with(omega: &StateSet, map: &FlowMap, inv: &Condition) -> Result<StateSet, GeometryError> {
    if map.stationary {
        return Ok(omega.clone());
    }
    omega
        .affine_map_with_inverse(&map.m, &map.v, &map.inverse)?
        .intersect(inv)
}

pub fn first_segment(p: &StateSet, flow: &AffineFlow, inv: &Condition, delta: f64) -> Result<StateSet, ReachStepError> {
    Ok(first_segment_with(p, &FlowMap::new(flow, delta)?, inv)?)
}

pub fn next_segment(
    omega: &StateSet,
    flow: &AffineFlow,
    inv: &Condition,
    delta: f64,
) -> Result<StateSet, ReachStepError> {
    Ok(next_segment_with(omega, &FlowMap::new(flow, delta)?, inv)?)
}

/// First or subsequent segment, selected by `is_first`.
pub fn flow_step(
    p: &StateSet,
    flow: &AffineFlow,
    inv: &Condition,
    delta: f64,
    is_first: bool,
) -> Result<StateSet, ReachStepError> {
    if is_first {
        first_segment(p, flow, inv, delta)
    } else {
        next_segment(p, flow, inv, delta)
    }
}

/// `(A′(p ∩ g) + c) ∩ inv′`; empty when the guard is not met.
pub fn jump_successor(
    p: &StateSet,
    guard: &Condition,
    reset: &AffineReset,
    target_inv: &Condition,
) -> Result<StateSet, GeometryError> {
    let hit = p.intersect(guard)?;
    if hit.is_empty() {
        return Ok(hit);
    }
    let moved = if reset.is_identity() {
        hit
    } else {
        hit.affine_map(&reset.a, &reset.c)?
    };
    moved.intersect(target_inv)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ReachStepError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}
