use super::body::EllipsoidBody;
use super::{hull, Body, GeometryError, TranslatedBody, Vector};
use crate::tolerances::MEMBERSHIP_SLACK;

/// Polar `E° = {z : |x · z| ≤ 1 for all x ∈ E}` of a body containing the origin.
pub fn polar(body: &Body) -> Result<Body, GeometryError> {
    polar_of_shifted(body, &Vector::zeros(body.dim()))
}

/// Polar of `body + d`. The translated body must contain the origin.
///
/// Boxes and V-polytopes are handled in any position. Ellipsoids must land
/// centered at the origin, and H-polytopes must be origin-symmetric after the
/// shift.
pub fn polar_of_shifted(body: &Body, d: &Vector) -> Result<Body, GeometryError> {
    let n = body.dim();
    super::check_dim(n, d.len())?;
    if !body.contains(&(-d)) {
        return Err(GeometryError::BodyNotContainingOrigin);
    }
    let centered = |c: &Vector| (c + d).amax() <= MEMBERSHIP_SLACK;
    match body {
        Body::Box(b) if centered(b.center()) => {
            let gens = (0..n)
                .map(|i| b.rotation().column(i) / b.half_extents()[i])
                .collect();
            Body::sym_polytope(gens)
        }
        Body::Box(b) => {
            let pts: Vec<Vector> = b.corners().into_iter().map(|c| c + d).collect();
            slab_polytope(pts)
        }
        Body::Ellipsoid(e) if centered(e.center()) => {
            Ok(Body::Ellipsoid(EllipsoidBody::new(Vector::zeros(n), e.inverse_shape().clone())?))
        }
        Body::Ellipsoid(_) => Err(GeometryError::OffCenterEllipsoid),
        Body::SymPolytopeV(p) => {
            let pts: Vec<Vector> = if d.amax() == 0.0 {
                p.vertices().to_vec()
            } else {
                p.vertices().iter().map(|g| g + d).collect()
            };
            slab_polytope(pts)
        }
        Body::PolytopeH(h) => {
            let mut rows = Vec::with_capacity(h.normals().len());
            for (a, b) in h.normals().iter().zip(h.offsets()) {
                let shifted = b + a.dot(d);
                if shifted <= 0.0 {
                    return Err(GeometryError::BodyNotContainingOrigin);
                }
                rows.push(a / shifted);
            }
            let symmetric = rows.iter().all(|r| {
                let scale = 1.0 + r.amax();
                rows.iter().any(|s| (s + r).amax() <= 1e-9 * scale)
            });
            if !symmetric {
                return Err(GeometryError::NonSymmetricHPolytope);
            }
            let mut gens: Vec<Vector> = Vec::new();
            for r in hull::dedup(rows) {
                let scale = 1.0 + r.amax();
                if !gens.iter().any(|g| (g + &r).amax() <= 1e-9 * scale) {
                    gens.push(r);
                }
            }
            Body::sym_polytope(gens)
        }
    }
}

/// `{z : |p · z| ≤ 1 for every p}`.
fn slab_polytope(points: Vec<Vector>) -> Result<Body, GeometryError> {
    let points = hull::dedup(points);
    let mut normals = Vec::with_capacity(2 * points.len());
    for p in points {
        normals.push(-&p);
        normals.push(p);
    }
    let offsets = vec![1.0; normals.len()];
    Body::h_polytope(normals, offsets)
}

/// The pair `(base + mu, (base + mu)° + tau)`.
///
/// Requires `−mu ∈ base`, so that `base + mu` contains the origin.
pub fn polar_translated(
    base: &Body,
    mu: &Vector,
    tau: &Vector,
) -> Result<(TranslatedBody, TranslatedBody), GeometryError> {
    let shifted = TranslatedBody::new(base.clone(), mu.clone(), Vector::zeros(base.dim()))?;
    let dual = polar_of_shifted(base, mu)?;
    let dual = TranslatedBody::new(dual, Vector::zeros(base.dim()), tau.clone())?;
    Ok((shifted, dual))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn interval_polar() {
        let p = polar(&Body::cube(1, 2.0)).unwrap();
        let (lo, hi) = p.bbox();
        assert!((lo[0] + 0.5).abs() < 1e-12 && (hi[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn polar_requires_origin() {
        let b = Body::aligned_box(v(&[3.0]), v(&[1.0])).unwrap();
        assert_eq!(polar(&b).unwrap_err(), GeometryError::BodyNotContainingOrigin);
        let e = Body::ellipsoid(v(&[0.5, 0.0]), nalgebra::DMatrix::identity(2, 2)).unwrap();
        assert_eq!(polar(&e).unwrap_err(), GeometryError::OffCenterEllipsoid);
        let tri = Body::h_polytope(vec![v(&[-1.0, 0.0]), v(&[0.0, -1.0]), v(&[1.0, 1.0])], vec![1.0; 3]).unwrap();
        assert_eq!(polar(&tri).unwrap_err(), GeometryError::NonSymmetricHPolytope);
    }

    #[test]
    fn shifted_box_polar_is_symmetric_hull_dual() {
        // [0, 2] shifted by −1/2 is [−1/2, 3/2]; its symmetric hull is [−3/2, 3/2].
        let b = Body::aligned_box(v(&[1.0]), v(&[1.0])).unwrap();
        let p = polar_of_shifted(&b, &v(&[-0.5])).unwrap();
        let (lo, hi) = p.bbox();
        assert!((hi[0] - 2.0 / 3.0).abs() < 1e-9 && (lo[0] + 2.0 / 3.0).abs() < 1e-9);
    }
}
