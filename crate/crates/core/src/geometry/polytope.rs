use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::linalg::Matrix;

use super::{BoxSet, Condition};

const CACHE_LIMIT: usize = 1 << 14;

/// Convex polytope in halfspace form. Support values are memoized per
/// direction; the memo is shared between clones.
#[derive(Clone)]
pub struct HPolytope {
    cond: Condition,
    memo: Arc<Mutex<HashMap<Vec<u64>, f64>>>,
}

impl HPolytope {
    pub fn new(cond: Condition) -> Self {
        HPolytope {
            cond,
            memo: Arc::default(),
        }
    }

    pub fn from_box(b: &BoxSet) -> Self {
        HPolytope::new(b.to_condition())
    }

    pub fn condition(&self) -> &Condition {
        &self.cond
    }

    pub fn dim(&self) -> usize {
        self.cond.dim()
    }

    pub fn is_empty(&self) -> bool {
        !self.cond.is_satisfiable()
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.cond.contains(x, tol)
    }

    pub fn support(&self, dir: &[f64]) -> f64 {
        if self.cond.len() <= 2 * self.dim() && self.cond.is_axis_aligned() {
            return self.cond.support(dir);
        }
        let key: Vec<u64> = dir.iter().map(|x| if *x == 0.0 { 0 } else { x.to_bits() }).collect();
        if let Some(v) = self.memo.lock().expect("support memo poisoned").get(&key) {
            return *v;
        }
        let v = self.cond.support(dir);
        let mut memo = self.memo.lock().expect("support memo poisoned");
        if memo.len() >= CACHE_LIMIT {
            memo.clear();
        }
        memo.insert(key, v);
        v
    }

    pub fn intersect(&self, c: &Condition) -> HPolytope {
        HPolytope::new(self.cond.concat(c).expect("dimension checked by caller"))
    }

    /// Image under an invertible map `x ↦ Mx + v`, given `M⁻¹`.
    pub fn map_invertible(&self, inverse: &Matrix, v: &[f64]) -> HPolytope {
        // Cx ≤ d, y = Mx + v  ⇒  C M⁻¹ y ≤ d + C M⁻¹ v
        let mut out = Condition::truth(inverse.cols());
        for (r, b) in self.cond.rows() {
            let row = inverse.tr_mul_vec(r);
            let shift = crate::linalg::dot(&row, v);
            out.push(&row, b + shift);
        }
        HPolytope::new(out)
    }

    /// Bounding box from 2·dim support queries.
    pub fn bounding_box(&self) -> BoxSet {
        let d = self.dim();
        let mut lo = vec![0.0; d];
        let mut hi = vec![0.0; d];
        for i in 0..d {
            let mut e = vec![0.0; d];
            e[i] = 1.0;
            hi[i] = self.support(&e);
            e[i] = -1.0;
            lo[i] = -self.support(&e);
        }
        if hi.contains(&f64::NEG_INFINITY) {
            return BoxSet::empty(d);
        }
        BoxSet::new(lo, hi)
    }
}

impl std::fmt::Debug for HPolytope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HPolytope({:?})", self.cond)
    }
}

impl PartialEq for HPolytope {
    fn eq(&self, other: &Self) -> bool {
        self.cond == other.cond
    }
}
