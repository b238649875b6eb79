use super::Condition;

/// Vertices of a bounded 2-D polytope in counter-clockwise order; empty when
/// the polytope is empty or not two-dimensional. Degenerate polytopes yield
/// one or two vertices.
pub fn polygon_vertices(c: &Condition) -> Vec<[f64; 2]> {
    if c.dim() != 2 {
        return Vec::new();
    }
    let rows: Vec<(&[f64], f64)> = c.rows().collect();
    let scale = 1.0 + rows.iter().map(|(_, b)| b.abs()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    let mut pts: Vec<[f64; 2]> = Vec::new();
    for i in 0..rows.len() {
        for j in i + 1..rows.len() {
            let (a, b) = (rows[i].0, rows[j].0);
            let det = a[0] * b[1] - a[1] * b[0];
            if det.abs() < 1e-12 {
                continue;
            }
            let x = (rows[i].1 * b[1] - a[1] * rows[j].1) / det;
            let y = (a[0] * rows[j].1 - rows[i].1 * b[0]) / det;
            if c.contains(&[x, y], tol) && !pts.iter().any(|p| (p[0] - x).abs() <= tol && (p[1] - y).abs() <= tol) {
                pts.push([x, y]);
            }
        }
    }
    if pts.len() < 3 {
        return pts;
    }
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
    pts.sort_by(|p, q| {
        let ap = (p[1] - cy).atan2(p[0] - cx);
        let aq = (q[1] - cy).atan2(q[0] - cx);
        ap.total_cmp(&aq)
    });
    pts
}

/// Signed area of a polygon given in order (positive when counter-clockwise).
pub fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    if n < 3 {
        return 0.0;
    }
    (0..n)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}
