use minilp::{ComparisonOp, OptimizationDirection, Problem};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{check_dim, hull, le_slack, GeometryError, Matrix, Vector};
use crate::tolerances::{MAX_EXACT_POLY_DIM, MEMBERSHIP_SLACK, ORTHOGONALITY_TOL};

/// Largest number of generator subsets examined when enumerating facets.
const MAX_FACET_CANDIDATES: usize = 5_000_000;

/// `{c + R y : |y_i| ≤ a_i}`.
#[derive(Debug, Clone)]
pub struct BoxBody {
    center: Vector,
    half_extents: Vector,
    rotation: Matrix,
}

/// `{x : (x − c)ᵀ A (x − c) ≤ 1}`.
#[derive(Debug, Clone)]
pub struct EllipsoidBody {
    center: Vector,
    shape: Matrix,
    inverse: Matrix,
    // L⁻ᵀ where A = L Lᵀ; maps the unit ball onto the centered ellipsoid.
    from_ball: Matrix,
}

/// Convex hull of `{±g_i}`.
#[derive(Debug, Clone)]
pub struct SymPolytope {
    generators: Vec<Vector>,
    facets: Vec<Vector>,
    vertices: Vec<Vector>,
}

/// `{x : a_i · x ≤ b_i}` with every `b_i > 0`.
#[derive(Debug, Clone)]
pub struct HPolytope {
    normals: Vec<Vector>,
    offsets: Vec<f64>,
    lower: Vector,
    upper: Vector,
    vertices: Option<Vec<Vector>>,
}

/// A bounded convex body with nonempty interior.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "super::json::BodyDoc", into = "super::json::BodyDoc")]
pub enum Body {
    Box(BoxBody),
    Ellipsoid(EllipsoidBody),
    SymPolytopeV(SymPolytope),
    PolytopeH(HPolytope),
}

fn finite(v: &Vector, what: &str) -> Result<(), GeometryError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::InvalidBody(format!("non-finite {what}")))
    }
}

impl BoxBody {
    pub fn new(center: Vector, half_extents: Vector, rotation: Matrix) -> Result<Self, GeometryError> {
        let n = center.len();
        if n == 0 {
            return Err(GeometryError::InvalidBody("dimension must be at least 1".into()));
        }
        check_dim(n, half_extents.len())?;
        check_dim(n, rotation.nrows())?;
        check_dim(n, rotation.ncols())?;
        finite(&center, "center")?;
        if half_extents.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
            return Err(GeometryError::InvalidBody("half extents must be positive".into()));
        }
        let defect = (rotation.transpose() * &rotation - Matrix::identity(n, n)).amax();
        if !(defect <= ORTHOGONALITY_TOL) {
            return Err(GeometryError::InvalidBody(format!(
                "rotation is not orthogonal (defect {defect:e})"
            )));
        }
        Ok(Self { center, half_extents, rotation })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
    pub fn half_extents(&self) -> &Vector {
        &self.half_extents
    }
    pub fn rotation(&self) -> &Matrix {
        &self.rotation
    }

    /// Halfspaces `(a, b)` with `a · x ≤ b`.
    fn halfspaces(&self) -> impl Iterator<Item = (Vector, f64)> + '_ {
        (0..self.center.len()).flat_map(move |i| {
            let col: Vector = self.rotation.column(i).into_owned();
            let c = col.dot(&self.center);
            let a = self.half_extents[i];
            [(col.clone(), a + c), (-col, a - c)]
        })
    }

    /// All `2^n` corners.
    pub fn corners(&self) -> Vec<Vector> {
        let n = self.center.len();
        (0..1usize << n)
            .map(|s| {
                let y = Vector::from_fn(n, |i, _| {
                    if s >> i & 1 == 1 {
                        -self.half_extents[i]
                    } else {
                        self.half_extents[i]
                    }
                });
                &self.center + &self.rotation * y
            })
            .collect()
    }
}

impl EllipsoidBody {
    pub fn new(center: Vector, shape: Matrix) -> Result<Self, GeometryError> {
        let n = center.len();
        if n == 0 {
            return Err(GeometryError::InvalidBody("dimension must be at least 1".into()));
        }
        check_dim(n, shape.nrows())?;
        check_dim(n, shape.ncols())?;
        finite(&center, "center")?;
        if shape.iter().any(|x| !x.is_finite()) {
            return Err(GeometryError::InvalidBody("non-finite shape".into()));
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-10 * (1.0 + shape.amax()) {
            return Err(GeometryError::InvalidBody("shape matrix is not symmetric".into()));
        }
        let shape = (&shape + shape.transpose()) * 0.5;
        let chol = nalgebra::Cholesky::new(shape.clone())
            .ok_or_else(|| GeometryError::InvalidBody("shape matrix is not positive definite".into()))?;
        let inverse = chol.inverse();
        let l = chol.l();
        let from_ball = l
            .transpose()
            .try_inverse()
            .ok_or_else(|| GeometryError::InvalidBody("shape matrix is singular".into()))?;
        Ok(Self { center, shape, inverse, from_ball })
    }

    pub fn center(&self) -> &Vector {
        &self.center
    }
    pub fn shape(&self) -> &Matrix {
        &self.shape
    }
    /// `A⁻¹`, the shape of the polar when centered.
    pub fn inverse_shape(&self) -> &Matrix {
        &self.inverse
    }
    /// Linear map sending the unit ball onto `E − c`.
    pub fn from_ball(&self) -> &Matrix {
        &self.from_ball
    }

    /// Semiaxis lengths with their unit directions, longest first.
    pub fn principal_axes(&self) -> Vec<(f64, Vector)> {
        let eig = nalgebra::SymmetricEigen::new(self.shape.clone());
        let mut axes: Vec<(f64, Vector)> = (0..self.center.len())
            .map(|i| (1.0 / eig.eigenvalues[i].sqrt(), eig.eigenvectors.column(i).into_owned()))
            .collect();
        axes.sort_by(|a, b| b.0.total_cmp(&a.0));
        axes
    }
}

impl SymPolytope {
    pub fn new(generators: Vec<Vector>) -> Result<Self, GeometryError> {
        let Some(first) = generators.first() else {
            return Err(GeometryError::DegenerateGenerators);
        };
        let n = first.len();
        if n == 0 {
            return Err(GeometryError::InvalidBody("dimension must be at least 1".into()));
        }
        for g in &generators {
            check_dim(n, g.len())?;
            finite(g, "generator")?;
        }
        let m = Matrix::from_fn(n, generators.len(), |i, j| generators[j][i]);
        let sv = m.singular_values();
        let top = sv.max();
        if generators.len() < n || !(sv.min() > 1e-10 * top) || top == 0.0 {
            return Err(GeometryError::DegenerateGenerators);
        }
        let candidates = binomial(generators.len(), n).saturating_mul(1usize << (n - 1).min(60));
        if candidates > MAX_FACET_CANDIDATES {
            return Err(GeometryError::InvalidBody(format!(
                "{} generators in dimension {n} exceed the facet enumeration budget",
                generators.len()
            )));
        }
        let facets = hull::symmetric_facets(&generators);
        let signed: Vec<Vector> = generators.iter().flat_map(|g| [g.clone(), -g]).collect();
        let vertices = hull::extreme_points(&signed, &facets);
        Ok(Self { generators, facets, vertices })
    }

    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }
    /// Facet normals `a` with `a · x ≤ 1`.
    pub fn facets(&self) -> &[Vector] {
        &self.facets
    }
    /// Extreme points, drawn from `{±g_i}`.
    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r: usize = 1;
    for i in 0..k.min(n - k) {
        r = r.saturating_mul(n - i) / (i + 1);
    }
    r
}

/// Maximizes `obj · x` over `{a_i · x ≤ b_i}`.
pub(crate) fn lp_max(normals: &[Vector], offsets: &[f64], obj: &Vector) -> Result<f64, GeometryError> {
    let n = obj.len();
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let vars: Vec<_> = (0..n)
        .map(|j| problem.add_var(obj[j], (f64::NEG_INFINITY, f64::INFINITY)))
        .collect();
    for (a, &b) in normals.iter().zip(offsets) {
        let expr: Vec<_> = vars.iter().enumerate().map(|(j, &v)| (v, a[j])).collect();
        problem.add_constraint(expr, ComparisonOp::Le, b);
    }
    match problem.solve() {
        Ok(sol) if sol.objective().is_finite() => Ok(sol.objective()),
        Ok(_) | Err(minilp::Error::Unbounded) => Err(GeometryError::UnboundedBody),
        Err(minilp::Error::Infeasible) => Err(GeometryError::InvalidBody("empty polytope".into())),
    }
}

impl HPolytope {
    /// Validates offsets and checks boundedness with `2n` linear programs.
    pub fn new(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self, GeometryError> {
        let Some(first) = normals.first() else {
            return Err(GeometryError::UnboundedBody);
        };
        let n = first.len();
        if n == 0 {
            return Err(GeometryError::InvalidBody("dimension must be at least 1".into()));
        }
        check_dim(normals.len(), offsets.len())?;
        for a in &normals {
            check_dim(n, a.len())?;
            finite(a, "normal")?;
        }
        if offsets.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return Err(GeometryError::InvalidBody("offsets must be positive".into()));
        }
        let mut lower = Vector::zeros(n);
        let mut upper = Vector::zeros(n);
        for j in 0..n {
            let mut e = Vector::zeros(n);
            e[j] = 1.0;
            upper[j] = lp_max(&normals, &offsets, &e)?;
            lower[j] = -lp_max(&normals, &offsets, &(-e))?;
        }
        let mut poly = Self { normals, offsets, lower, upper, vertices: None };
        if n <= MAX_EXACT_POLY_DIM {
            poly.vertices = Some(hull::halfspace_vertices(&poly.rows()));
        }
        Ok(poly)
    }

    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
    /// Normals scaled by their offsets, so the body is `{x : r_i · x ≤ 1}`.
    pub fn rows(&self) -> Vec<Vector> {
        self.normals.iter().zip(&self.offsets).map(|(a, b)| a / *b).collect()
    }
    /// Vertices, available for `n ≤ 3`.
    pub fn vertices(&self) -> Option<&[Vector]> {
        self.vertices.as_deref()
    }

    /// True when every scaled row `r` has a partner `−r`.
    pub fn is_origin_symmetric(&self) -> bool {
        let rows = self.rows();
        rows.iter().all(|r| {
            let scale = 1.0 + r.amax();
            rows.iter().any(|s| (s + r).amax() <= 1e-9 * scale)
        })
    }
}

fn chord_halfspaces(
    constraints: impl Iterator<Item = (Vector, f64)>,
    point: &Vector,
    axis: usize,
) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for (a, b) in constraints {
        let rest = a.dot(point) - a[axis] * point[axis];
        let k = a[axis];
        if k.abs() <= 1e-300 {
            if rest > b {
                return None;
            }
        } else if k > 0.0 {
            hi = hi.min((b - rest) / k);
        } else {
            lo = lo.max((b - rest) / k);
        }
    }
    (lo <= hi).then_some((lo, hi))
}

impl Body {
    /// Box `[−h, h]^n`.
    pub fn cube(n: usize, half: f64) -> Self {
        Body::Box(BoxBody::new(Vector::zeros(n), Vector::from_element(n, half), Matrix::identity(n, n)).expect("valid cube"))
    }

    /// Euclidean ball of radius `r` centered at the origin.
    pub fn ball(n: usize, r: f64) -> Self {
        Body::Ellipsoid(
            EllipsoidBody::new(Vector::zeros(n), Matrix::identity(n, n) / (r * r)).expect("valid ball"),
        )
    }

    /// Axis-aligned box with the given center and half extents.
    pub fn aligned_box(center: Vector, half_extents: Vector) -> Result<Self, GeometryError> {
        let n = center.len();
        Ok(Body::Box(BoxBody::new(center, half_extents, Matrix::identity(n, n))?))
    }

    pub fn rotated_box(center: Vector, half_extents: Vector, rotation: Matrix) -> Result<Self, GeometryError> {
        Ok(Body::Box(BoxBody::new(center, half_extents, rotation)?))
    }

    pub fn ellipsoid(center: Vector, shape: Matrix) -> Result<Self, GeometryError> {
        Ok(Body::Ellipsoid(EllipsoidBody::new(center, shape)?))
    }

    /// Origin-centered ellipsoid with the given semiaxes along the coordinate axes.
    pub fn axis_ellipsoid(semiaxes: &[f64]) -> Result<Self, GeometryError> {
        let n = semiaxes.len();
        let shape = Matrix::from_diagonal(&Vector::from_iterator(n, semiaxes.iter().map(|s| 1.0 / (s * s))));
        Self::ellipsoid(Vector::zeros(n), shape)
    }

    pub fn sym_polytope(generators: Vec<Vector>) -> Result<Self, GeometryError> {
        Ok(Body::SymPolytopeV(SymPolytope::new(generators)?))
    }

    /// `{z : Σ |z_i| / a_i ≤ 1}`.
    pub fn cross_polytope(a: &[f64]) -> Result<Self, GeometryError> {
        let n = a.len();
        let gens = (0..n)
            .map(|i| {
                let mut g = Vector::zeros(n);
                g[i] = a[i];
                g
            })
            .collect();
        Self::sym_polytope(gens)
    }

    pub fn h_polytope(normals: Vec<Vector>, offsets: Vec<f64>) -> Result<Self, GeometryError> {
        Ok(Body::PolytopeH(HPolytope::new(normals, offsets)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            Body::Box(b) => b.center.len(),
            Body::Ellipsoid(e) => e.center.len(),
            Body::SymPolytopeV(p) => p.generators[0].len(),
            Body::PolytopeH(h) => h.normals[0].len(),
        }
    }

    /// Membership with absolute slack on each defining inequality.
    pub fn contains(&self, x: &Vector) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            Body::Box(b) => {
                let y = b.rotation.tr_mul(&(x - &b.center));
                y.iter().zip(b.half_extents.iter()).all(|(y, a)| le_slack(y.abs(), *a))
            }
            Body::Ellipsoid(e) => {
                let d = x - &e.center;
                le_slack(d.dot(&(&e.shape * &d)), 1.0)
            }
            Body::SymPolytopeV(p) => p.facets.iter().all(|a| le_slack(a.dot(x), 1.0)),
            Body::PolytopeH(h) => h
                .normals
                .iter()
                .zip(&h.offsets)
                .all(|(a, b)| le_slack(a.dot(x), *b)),
        }
    }

    /// Tight axis-aligned bounding box `(lower, upper)`.
    pub fn bbox(&self) -> (Vector, Vector) {
        let n = self.dim();
        match self {
            Body::Box(b) => {
                let w = Vector::from_fn(n, |j, _| {
                    (0..n).map(|i| b.rotation[(j, i)].abs() * b.half_extents[i]).sum()
                });
                (&b.center - &w, &b.center + w)
            }
            Body::Ellipsoid(e) => {
                let w = Vector::from_fn(n, |j, _| e.inverse[(j, j)].sqrt());
                (&e.center - &w, &e.center + w)
            }
            Body::SymPolytopeV(p) => {
                let w = Vector::from_fn(n, |j, _| p.generators.iter().map(|g| g[j].abs()).fold(0.0, f64::max));
                (-&w, w)
            }
            Body::PolytopeH(h) => (h.lower.clone(), h.upper.clone()),
        }
    }

    /// Range of `x_axis` for which `point` (with that coordinate replaced) lies in the body.
    pub fn chord(&self, point: &Vector, axis: usize) -> Option<(f64, f64)> {
        match self {
            Body::Box(b) => chord_halfspaces(b.halfspaces(), point, axis),
            Body::Ellipsoid(e) => {
                let mut d = point - &e.center;
                d[axis] = 0.0;
                let a = e.shape[(axis, axis)];
                let b = (&e.shape * &d)[axis];
                let c = d.dot(&(&e.shape * &d)) - 1.0;
                let disc = b * b - a * c;
                if disc < 0.0 {
                    return None;
                }
                let r = disc.sqrt();
                Some(((-b - r) / a + e.center[axis], (-b + r) / a + e.center[axis]))
            }
            Body::SymPolytopeV(p) => chord_halfspaces(p.facets.iter().map(|a| (a.clone(), 1.0)), point, axis),
            Body::PolytopeH(h) => chord_halfspaces(
                h.normals.iter().cloned().zip(h.offsets.iter().copied()),
                point,
                axis,
            ),
        }
    }

    /// Support function `sup_{x ∈ E} x · z`.
    pub fn support(&self, z: &Vector) -> Result<f64, GeometryError> {
        Ok(match self {
            Body::Box(b) => {
                let w = b.rotation.tr_mul(z);
                b.center.dot(z) + w.iter().zip(b.half_extents.iter()).map(|(w, a)| w.abs() * a).sum::<f64>()
            }
            Body::Ellipsoid(e) => e.center.dot(z) + z.dot(&(&e.inverse * z)).sqrt(),
            Body::SymPolytopeV(p) => p.generators.iter().map(|g| g.dot(z).abs()).fold(0.0, f64::max),
            Body::PolytopeH(h) => match &h.vertices {
                Some(v) => v.iter().map(|v| v.dot(z)).fold(f64::NEG_INFINITY, f64::max),
                None => lp_max(&h.normals, &h.offsets, z)?,
            },
        })
    }

    /// Vertices when the body is a polytope with a known vertex list.
    pub fn vertices(&self) -> Option<Vec<Vector>> {
        match self {
            Body::Box(b) if b.center.len() <= 16 => Some(b.corners()),
            Body::SymPolytopeV(p) => Some(p.vertices.clone()),
            Body::PolytopeH(h) => h.vertices.clone(),
            _ => None,
        }
    }

    /// Whether `x ∈ E ⇒ −x ∈ E`.
    pub fn is_origin_symmetric(&self) -> bool {
        let tol = MEMBERSHIP_SLACK;
        match self {
            Body::Box(b) => b.center.amax() <= tol,
            Body::Ellipsoid(e) => e.center.amax() <= tol,
            Body::SymPolytopeV(_) => true,
            Body::PolytopeH(h) => h.is_origin_symmetric(),
        }
    }

    /// The dilate `kE` about the origin, `k > 0`.
    pub fn scaled(&self, k: f64) -> Result<Body, GeometryError> {
        if !(k.is_finite() && k > 0.0) {
            return Err(GeometryError::InvalidBody("scale factor must be positive".into()));
        }
        Ok(match self {
            Body::Box(b) => Body::Box(BoxBody::new(&b.center * k, &b.half_extents * k, b.rotation.clone())?),
            Body::Ellipsoid(e) => Body::Ellipsoid(EllipsoidBody::new(&e.center * k, &e.shape / (k * k))?),
            Body::SymPolytopeV(p) => {
                let mut q = p.clone();
                q.generators.iter_mut().for_each(|g| *g *= k);
                q.vertices.iter_mut().for_each(|g| *g *= k);
                q.facets.iter_mut().for_each(|a| *a /= k);
                Body::SymPolytopeV(q)
            }
            Body::PolytopeH(h) => {
                let mut q = h.clone();
                q.offsets.iter_mut().for_each(|b| *b *= k);
                q.lower *= k;
                q.upper *= k;
                if let Some(v) = q.vertices.as_mut() {
                    v.iter_mut().for_each(|x| *x *= k);
                }
                Body::PolytopeH(q)
            }
        })
    }

    /// Uniform sample from the body.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vector {
        let n = self.dim();
        match self {
            Body::Box(b) => {
                let y = Vector::from_fn(n, |i, _| b.half_extents[i] * rng.gen_range(-1.0..=1.0));
                &b.center + &b.rotation * y
            }
            Body::Ellipsoid(e) => &e.center + &e.from_ball * sample_ball(n, rng),
            _ => {
                let (lo, hi) = self.bbox();
                loop {
                    let x = Vector::from_fn(n, |j, _| rng.gen_range(lo[j]..=hi[j]));
                    if self.contains(&x) {
                        return x;
                    }
                }
            }
        }
    }

    /// Centroid for the symmetric variants and boxes/ellipsoids; `None` for a
    /// general H-polytope.
    pub fn center(&self) -> Option<Vector> {
        match self {
            Body::Box(b) => Some(b.center.clone()),
            Body::Ellipsoid(e) => Some(e.center.clone()),
            Body::SymPolytopeV(_) => Some(Vector::zeros(self.dim())),
            Body::PolytopeH(h) if h.is_origin_symmetric() => Some(Vector::zeros(self.dim())),
            Body::PolytopeH(_) => None,
        }
    }
}

/// Uniform point in the unit ball of `R^n`.
pub(crate) fn sample_ball<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    let d = sample_sphere(n, rng);
    let r: f64 = rng.gen::<f64>().powf(1.0 / n as f64);
    d * r
}

/// Uniform point on the unit sphere of `R^n`.
pub(crate) fn sample_sphere<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vector {
    loop {
        let g = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 1e-12 {
            return g / norm;
        }
    }
}

/// Haar-distributed orthogonal matrix.
pub fn random_rotation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matrix {
    let g = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            let mut col = q.column_mut(j);
            col *= -1.0;
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn membership_examples() {
        assert!(Body::ball(2, 1.0).contains(&v(&[0.5, 0.5])));
        assert!(!Body::cube(2, 1.0).contains(&v(&[1.0000001, 0.0])));
        let cross = Body::cross_polytope(&[1.0, 1.0]).unwrap();
        assert!(cross.contains(&v(&[0.5, 0.5])));
        assert!(!cross.contains(&v(&[0.5, 0.5001])));
    }

    #[test]
    fn rejects_invalid_bodies() {
        let bad_rot = Matrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0]);
        assert!(Body::rotated_box(v(&[0.0, 0.0]), v(&[1.0, 1.0]), bad_rot).is_err());
        let not_pd = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        assert!(Body::ellipsoid(v(&[0.0, 0.0]), not_pd).is_err());
        assert_eq!(
            Body::sym_polytope(vec![v(&[1.0, 1.0]), v(&[2.0, 2.0])]).unwrap_err(),
            GeometryError::DegenerateGenerators
        );
        let half_plane = Body::h_polytope(vec![v(&[1.0, 0.0]), v(&[-1.0, 0.0]), v(&[0.0, 1.0])], vec![1.0, 1.0, 1.0]);
        assert_eq!(half_plane.unwrap_err(), GeometryError::UnboundedBody);
    }

    #[test]
    fn h_polytope_bbox_and_vertices() {
        let tri = Body::h_polytope(
            vec![v(&[-1.0, 0.0]), v(&[0.0, -1.0]), v(&[1.0, 1.0])],
            vec![1.0, 1.0, 1.0],
        )
        .unwrap();
        let (lo, hi) = tri.bbox();
        assert!((lo - v(&[-1.0, -1.0])).amax() < 1e-9);
        assert!((hi - v(&[2.0, 2.0])).amax() < 1e-9);
        assert_eq!(tri.vertices().unwrap().len(), 3);
    }

    #[test]
    fn chords_match_membership() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rot = random_rotation(2, &mut rng);
        let bodies = [
            Body::rotated_box(v(&[0.3, -0.2]), v(&[1.0, 0.5]), rot).unwrap(),
            Body::ellipsoid(v(&[0.1, 0.0]), Matrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap(),
            Body::sym_polytope(vec![v(&[1.0, 0.2]), v(&[0.1, 1.0]), v(&[0.7, -0.7])]).unwrap(),
        ];
        for body in &bodies {
            for _ in 0..200 {
                let p = v(&[rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)]);
                let inside = body.contains(&p);
                match body.chord(&p, 0) {
                    Some((a, b)) => {
                        let within = p[0] >= a - 1e-9 && p[0] <= b + 1e-9;
                        assert_eq!(inside, within);
                    }
                    None => assert!(!inside),
                }
            }
        }
    }

    #[test]
    fn random_rotation_is_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_rotation(4, &mut rng);
        assert!((q.transpose() * &q - Matrix::identity(4, 4)).amax() < 1e-12);
    }
}
