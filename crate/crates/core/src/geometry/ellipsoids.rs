use super::body::EllipsoidBody;
use super::{Body, GeometryError, Matrix, Vector};
use crate::tolerances::{JOHN_SLACK, MEMBERSHIP_SLACK, MVEE_MAX_ITER};

/// Relative optimality gap at which the enclosing-ellipsoid iteration stops.
const MVEE_TOL: f64 = 1e-7;

/// Inner and outer ellipsoids of a symmetric polytope `F`, with
/// `inner ⊆ F ⊆ outer ⊆ √n (1 + ε) inner`.
#[derive(Debug, Clone)]
pub struct JohnSandwich {
    pub inner: Body,
    pub outer: Body,
    /// Smallest `k` with `F ⊆ k · inner`, checked on the vertices.
    pub outer_factor: f64,
    pub iterations: usize,
}

/// Shape matrix `A` of the minimum-volume origin-centered ellipsoid
/// `{x : xᵀ A x ≤ 1}` containing `{±p_i}`, with the iteration count.
///
/// Uses multiplicative (Khachiyan) updates with away steps, which keep the
/// support small and converge linearly.
pub fn mvee_symmetric(points: &[Vector]) -> Result<(Matrix, usize), GeometryError> {
    let Some(first) = points.first() else {
        return Err(GeometryError::DegenerateGenerators);
    };
    let n = first.len();
    let m = points.len();
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    for iter in 0..MVEE_MAX_ITER {
        let mut x = Matrix::zeros(n, n);
        for (p, &w) in points.iter().zip(&u) {
            x += p * p.transpose() * w;
        }
        let xinv = x.clone().try_inverse().ok_or(GeometryError::DegenerateGenerators)?;
        if !xinv.iter().all(|v| v.is_finite()) {
            return Err(GeometryError::DegenerateGenerators);
        }
        let lev: Vec<f64> = points.iter().map(|p| p.dot(&(&xinv * p))).collect();
        let (j, &mj) = lev
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let (k, &mk) = lev
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty support");
        if mj <= nf * (1.0 + MVEE_TOL) {
            let mut shape = xinv / nf;
            let reach = points.iter().map(|p| p.dot(&(&shape * p))).fold(0.0, f64::max);
            shape /= reach;
            return Ok((shape, iter));
        }
        if mj - nf >= nf - mk {
            let step = (mj - nf) / (nf * (mj - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - step);
            u[j] += step;
        } else {
            let floor = -u[k] / (1.0 - u[k]);
            let step = ((mk - nf) / (nf * (mk - 1.0))).max(floor);
            u.iter_mut().for_each(|w| *w *= 1.0 - step);
            u[k] += step;
            if step == floor {
                u[k] = 0.0;
            }
        }
    }
    Err(GeometryError::NoConvergence(MVEE_MAX_ITER))
}

/// Ellipsoid `S` with `S ⊆ body ⊆ √n (1 + ε) S` for a symmetric V-polytope.
///
/// `S` is the minimum-volume enclosing ellipsoid shrunk by `√n`, shrunk further
/// if needed so that every facet supports it from outside.
pub fn loewner_john(body: &Body) -> Result<JohnSandwich, GeometryError> {
    let Body::SymPolytopeV(poly) = body else {
        return Err(GeometryError::InvalidBody("expected a symmetric V-polytope".into()));
    };
    let n = body.dim();
    let nf = n as f64;
    let (outer_shape, iterations) = mvee_symmetric(poly.vertices())?;
    let mut inner_shape = &outer_shape * nf;
    let inner_inv = inner_shape
        .clone()
        .try_inverse()
        .ok_or(GeometryError::DegenerateGenerators)?;
    let reach = poly
        .facets()
        .iter()
        .map(|a| a.dot(&(&inner_inv * a)).sqrt())
        .fold(0.0, f64::max);
    if reach > 1.0 {
        inner_shape /= reach * reach;
    }
    let outer_factor = poly
        .vertices()
        .iter()
        .map(|v| v.dot(&(&inner_shape * v)).sqrt())
        .fold(0.0, f64::max);
    if outer_factor > nf.sqrt() * (1.0 + JOHN_SLACK) {
        return Err(GeometryError::NoConvergence(iterations));
    }
    let zero = Vector::zeros(n);
    Ok(JohnSandwich {
        inner: Body::Ellipsoid(EllipsoidBody::new(zero.clone(), inner_shape)?),
        outer: Body::Ellipsoid(EllipsoidBody::new(zero, outer_shape)?),
        outer_factor,
        iterations,
    })
}

/// Box `R` aligned with the principal axes of an origin-centered ellipsoid,
/// with `R ⊆ S ⊆ √n R`.
pub fn rect_ellipsoid_sandwich(s: &Body) -> Result<Body, GeometryError> {
    let Body::Ellipsoid(e) = s else {
        return Err(GeometryError::InvalidBody("expected an ellipsoid".into()));
    };
    if e.center().amax() > MEMBERSHIP_SLACK {
        return Err(GeometryError::NotSymmetric);
    }
    let n = s.dim();
    let root = (n as f64).sqrt();
    let a = e.shape();
    let off_diag = Matrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { a[(i, j)] }).amax();
    if off_diag == 0.0 {
        let half = Vector::from_fn(n, |i, _| 1.0 / (a[(i, i)].sqrt() * root));
        return Body::aligned_box(Vector::zeros(n), half);
    }
    let axes = e.principal_axes();
    let half = Vector::from_iterator(n, axes.iter().map(|(len, _)| len / root));
    let rotation = Matrix::from_fn(n, n, |i, j| axes[j].1[i]);
    Body::rotated_box(Vector::zeros(n), half, rotation)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn square_mvee_is_the_circumscribed_disk() {
        let (shape, _) = mvee_symmetric(&[v(&[1.0, 1.0]), v(&[1.0, -1.0])]).unwrap();
        assert!((shape - Matrix::identity(2, 2) * 0.5).amax() < 1e-6);
    }

    #[test]
    fn sandwich_of_a_tilted_box_shape() {
        let s = Body::ellipsoid(Vector::zeros(2), Matrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0])).unwrap();
        let r = rect_ellipsoid_sandwich(&s).unwrap();
        for c in r.vertices().unwrap() {
            assert!(s.contains(&c));
            assert!(!s.contains(&(&c * 1.001)));
        }
    }
}
