use nalgebra::DMatrix;

use super::mesh::{dist, dist2};
use super::{CouplingMesh, MappingError, RbfBasis};

fn phi(basis: RbfBasis, eps: f64, r: f64) -> f64 {
    match basis {
        RbfBasis::Gaussian => (-(eps * r) * (eps * r)).exp(),
        RbfBasis::ThinPlateSpline => {
            if r > 0.0 {
                r * r * r.ln()
            } else {
                0.0
            }
        }
    }
}

/// Linear polynomial columns `1, x, y, ...` (centred) that are linearly
/// independent on the source vertices; flat interfaces drop a direction.
fn polynomial_columns(source: &CouplingMesh) -> (Vec<f64>, Vec<usize>) {
    let n = source.len();
    let d = source.dim;
    let mut centre = vec![0.0; d];
    for i in 0..n {
        for (c, x) in centre.iter_mut().zip(source.vertex(i)) {
            *c += x / n as f64;
        }
    }
    let column = |k: usize| -> Vec<f64> {
        (0..n)
            .map(|i| if k == 0 { 1.0 } else { source.vertex(i)[k - 1] - centre[k - 1] })
            .collect()
    };
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut kept = Vec::new();
    for k in 0..=d {
        let orig = column(k);
        let norm0 = orig.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm0 == 0.0 {
            continue;
        }
        let mut v = orig.clone();
        for q in &basis {
            let proj: f64 = v.iter().zip(q).map(|(a, b)| a * b).sum();
            for (x, y) in v.iter_mut().zip(q) {
                *x -= proj * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-9 * norm0 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
            kept.push(k);
        }
    }
    (centre, kept)
}

pub(super) fn rbf_rows(
    basis: RbfBasis,
    shape: Option<f64>,
    source: &CouplingMesh,
    target: &CouplingMesh,
) -> Result<Vec<Vec<(usize, f64)>>, MappingError> {
    let n = source.len();
    for i in 0..n {
        for j in 0..i {
            if dist2(source.vertex(i), source.vertex(j)) == 0.0 {
                return Err(MappingError::Singular(format!(
                    "source vertices {j} and {i} of {:?} coincide",
                    source.name
                )));
            }
        }
    }
    let eps = match shape {
        Some(e) if e > 0.0 && e.is_finite() => e,
        Some(e) => return Err(MappingError::Singular(format!("invalid shape parameter {e}"))),
        None => 1.0 / source.mean_spacing(),
    };
    let (centre, kept) = polynomial_columns(source);
    let m = kept.len();
    let poly = |x: &[f64], k: usize| if k == 0 { 1.0 } else { x[k - 1] - centre[k - 1] };

    let mut a = DMatrix::zeros(n + m, n + m);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] = phi(basis, eps, dist(source.vertex(i), source.vertex(j)));
        }
        for (c, &k) in kept.iter().enumerate() {
            let v = poly(source.vertex(i), k);
            a[(i, n + c)] = v;
            a[(n + c, i)] = v;
        }
    }
    let nt = target.len();
    let mut b = DMatrix::zeros(nt, n + m);
    for t in 0..nt {
        let x = target.vertex(t);
        for j in 0..n {
            b[(t, j)] = phi(basis, eps, dist(x, source.vertex(j)));
        }
        for (c, &k) in kept.iter().enumerate() {
            b[(t, n + c)] = poly(x, k);
        }
    }
    // The system is symmetric: solve A X = B^T, then refine once.
    let lu = a.clone().lu();
    let singular = || MappingError::Singular(format!("interpolation matrix on {:?}", source.name));
    let rhs = b.transpose();
    let mut x = lu.solve(&rhs).ok_or_else(singular)?;
    let residual = &rhs - &a * &x;
    x += lu.solve(&residual).ok_or_else(singular)?;
    let w = x.rows(0, n).transpose();
    if w.iter().any(|x| !x.is_finite()) {
        return Err(MappingError::Singular(format!("interpolation matrix on {:?}", source.name)));
    }
    Ok((0..nt).map(|t| (0..n).map(|s| (s, w[(t, s)])).collect()).collect())
}
