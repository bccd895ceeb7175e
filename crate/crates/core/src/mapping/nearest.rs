use super::mesh::dist2;
use super::{CouplingMesh, MappingError};

pub(super) fn nearest_neighbor(source: &CouplingMesh, target: &CouplingMesh) -> Vec<Vec<(usize, f64)>> {
    (0..target.len())
        .map(|t| {
            let p = target.vertex(t);
            let mut best = (0, f64::INFINITY);
            for s in 0..source.len() {
                let d = dist2(p, source.vertex(s));
                if d < best.1 {
                    best = (s, d);
                }
            }
            vec![(best.0, 1.0)]
        })
        .collect()
}

pub(super) fn nearest_projection(
    source: &CouplingMesh,
    target: &CouplingMesh,
) -> Result<Vec<Vec<(usize, f64)>>, MappingError> {
    if source.triangles.is_empty() && source.edges.is_empty() {
        return Err(MappingError::MissingTopology(source.name.clone()));
    }
    Ok((0..target.len())
        .map(|t| {
            let p = target.vertex(t);
            let mut best: (f64, Vec<(usize, f64)>) = (f64::INFINITY, Vec::new());
            if !source.triangles.is_empty() {
                for tri in &source.triangles {
                    let (d, w) = project_triangle(p, source, tri);
                    if d < best.0 {
                        best = (d, tri.iter().copied().zip(w).filter(|(_, w)| *w != 0.0).collect());
                    }
                }
            } else {
                for &[a, b] in &source.edges {
                    let (d, s) = project_segment(p, source.vertex(a), source.vertex(b));
                    if d < best.0 {
                        best = (d, [(a, 1.0 - s), (b, s)].into_iter().filter(|(_, w)| *w != 0.0).collect());
                    }
                }
            }
            best.1
        })
        .collect())
}

/// Squared distance to the segment and the clamped parameter of the foot point.
pub(crate) fn project_segment(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for k in 0..p.len() {
        let e = b[k] - a[k];
        ab2 += e * e;
        ap_ab += (p[k] - a[k]) * e;
    }
    let s = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    let d: f64 = (0..p.len())
        .map(|k| {
            let q = a[k] + s * (b[k] - a[k]);
            (p[k] - q) * (p[k] - q)
        })
        .sum();
    (d, s)
}

/// Closest point on a triangle as barycentric weights (vertex regions,
/// edge regions and interior handled separately).
fn project_triangle(p: &[f64], mesh: &CouplingMesh, tri: &[usize; 3]) -> (f64, [f64; 3]) {
    let v = |i: usize| -> [f64; 3] {
        let x = mesh.vertex(tri[i]);
        let mut out = [0.0; 3];
        out[..x.len()].copy_from_slice(x);
        out
    };
    let (a, b, c) = (v(0), v(1), v(2));
    let mut pp = [0.0; 3];
    pp[..p.len()].copy_from_slice(p);
    let sub = |x: [f64; 3], y: [f64; 3]| [x[0] - y[0], x[1] - y[1], x[2] - y[2]];
    let dot = |x: [f64; 3], y: [f64; 3]| x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
    let ab = sub(b, a);
    let ac = sub(c, a);
    let ap = sub(pp, a);
    let d1 = dot(ab, ap);
    let d2 = dot(ac, ap);
    let w = if d1 <= 0.0 && d2 <= 0.0 {
        [1.0, 0.0, 0.0]
    } else {
        let bp = sub(pp, b);
        let d3 = dot(ab, bp);
        let d4 = dot(ac, bp);
        if d3 >= 0.0 && d4 <= d3 {
            [0.0, 1.0, 0.0]
        } else {
            let vc = d1 * d4 - d3 * d2;
            if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
                let s = d1 / (d1 - d3);
                [1.0 - s, s, 0.0]
            } else {
                let cp = sub(pp, c);
                let d5 = dot(ab, cp);
                let d6 = dot(ac, cp);
                if d6 >= 0.0 && d5 <= d6 {
                    [0.0, 0.0, 1.0]
                } else {
                    let vb = d5 * d2 - d1 * d6;
                    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
                        let s = d2 / (d2 - d6);
                        [1.0 - s, 0.0, s]
                    } else {
                        let va = d3 * d6 - d5 * d4;
                        if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
                            let s = (d4 - d3) / ((d4 - d3) + (d5 - d6));
                            [0.0, 1.0 - s, s]
                        } else {
                            let denom = 1.0 / (va + vb + vc);
                            let s = vb * denom;
                            let t = vc * denom;
                            [1.0 - s - t, s, t]
                        }
                    }
                }
            }
        }
    };
    let q: [f64; 3] = std::array::from_fn(|k| w[0] * a[k] + w[1] * b[k] + w[2] * c[k]);
    let d = dot(sub(pp, q), sub(pp, q));
    (d, w)
}
