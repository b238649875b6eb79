//! Comparison of segments computed under different partitions.

use std::collections::HashMap;

use super::{FlowpipeSegment, ReachResult};
use crate::decomposition::VariablePartition;
use crate::geometry::GeometryError;

/// Support of the cross product of a segment's sub-space sets in the
/// global direction `dir`.
pub fn product_support(seg: &FlowpipeSegment, p: &VariablePartition, dir: &[f64]) -> Result<f64, GeometryError> {
    let mut total = 0.0;
    for (set, sub) in seg.sets.iter().zip(&p.subspaces) {
        let local: Vec<f64> = sub.vars.iter().map(|&v| dir[v]).collect();
        if local.iter().all(|&x| x == 0.0) {
            if set.is_empty() {
                return Err(GeometryError::EmptySet);
            }
            continue;
        }
        total += set.support(&local)?;
    }
    Ok(total)
}

/// Whether the cross product of `inner` is contained in that of `outer` in
/// every direction of `dirs`, up to `tol` (scaled by the magnitude of the
/// compared values).
pub fn contained_in(
    inner: &FlowpipeSegment,
    inner_p: &VariablePartition,
    outer: &FlowpipeSegment,
    outer_p: &VariablePartition,
    dirs: &[Vec<f64>],
    tol: f64,
) -> Result<bool, GeometryError> {
    for l in dirs {
        let a = product_support(inner, inner_p, l)?;
        let b = product_support(outer, outer_p, l)?;
        if a > b + tol * (1.0 + a.abs().max(b.abs())) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Pairs every segment of `a` with the segment of `b` on the same path and
/// at the same index, when there is one.
pub fn match_segments(a: &ReachResult, b: &ReachResult) -> Vec<(usize, Option<usize>)> {
    let mut index: HashMap<(Vec<usize>, usize), usize> = HashMap::new();
    for fp in 0..b.flowpipes.len() {
        let key = b.path_key(fp);
        for s in b.flowpipes[fp].segments.clone() {
            index.insert((key.clone(), b.segments[s].index), s);
        }
    }
    let mut out = Vec::with_capacity(a.segments.len());
    for fp in 0..a.flowpipes.len() {
        let key = a.path_key(fp);
        for s in a.flowpipes[fp].segments.clone() {
            out.push((s, index.get(&(key.clone(), a.segments[s].index)).copied()));
        }
    }
    out
}
