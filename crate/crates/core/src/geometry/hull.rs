//! Brute-force facet and vertex enumeration for small polytopes.
//!
//! Every routine here assumes the origin is an interior point, so each facet
//! can be written as `r · x ≤ 1`.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::Vector;

const HULL_TOL: f64 = 1e-9;

/// Removes vectors that agree with an earlier one up to a relative tolerance.
pub(crate) fn dedup(points: Vec<Vector>) -> Vec<Vector> {
    let mut out: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        let scale = 1.0 + p.amax();
        if !out.iter().any(|q| (q - &p).amax() <= HULL_TOL * scale) {
            out.push(p);
        }
    }
    out
}

fn solve_rows(rows: &[&Vector], rhs: &DVector<f64>) -> Option<Vector> {
    let n = rows.len();
    let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let scale: f64 = rows.iter().map(|r| r.norm()).product();
    let det = m.determinant();
    if !det.is_finite() || det.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return None;
    }
    m.lu().solve(rhs)
}

/// Facet normals `a` (with `a · x ≤ 1`) of the hull of `{±g}`.
pub(crate) fn symmetric_facets(generators: &[Vector]) -> Vec<Vector> {
    let n = generators[0].len();
    if n == 1 {
        let r = generators.iter().map(|g| g[0].abs()).fold(0.0, f64::max);
        return vec![Vector::from_element(1, 1.0 / r), Vector::from_element(1, -1.0 / r)];
    }
    let ones = DVector::from_element(n, 1.0);
    let mut normals = Vec::new();
    for combo in (0..generators.len()).combinations(n) {
        for signs in 0..(1usize << (n - 1)) {
            let rows: Vec<Vector> = combo
                .iter()
                .enumerate()
                .map(|(k, &i)| {
                    let s = if k > 0 && signs >> (k - 1) & 1 == 1 { -1.0 } else { 1.0 };
                    &generators[i] * s
                })
                .collect();
            let refs: Vec<&Vector> = rows.iter().collect();
            let Some(a) = solve_rows(&refs, &ones) else { continue };
            if generators.iter().all(|g| a.dot(g).abs() <= 1.0 + HULL_TOL) {
                normals.push(-&a);
                normals.push(a);
            }
        }
    }
    dedup(normals)
}

/// Vertices of `{x : r_i · x ≤ 1}`, found by intersecting every choice of `n` rows.
pub(crate) fn halfspace_vertices(rows: &[Vector]) -> Vec<Vector> {
    let n = rows[0].len();
    let ones = DVector::from_element(n, 1.0);
    let mut verts = Vec::new();
    for combo in (0..rows.len()).combinations(n) {
        let refs: Vec<&Vector> = combo.iter().map(|&i| &rows[i]).collect();
        let Some(x) = solve_rows(&refs, &ones) else { continue };
        let worst = rows.iter().map(|r| r.dot(&x)).fold(f64::NEG_INFINITY, f64::max);
        if worst <= 1.0 + HULL_TOL {
            verts.push((worst, x));
        }
    }
    // Among near-duplicates, keep the one that violates the rows least.
    verts.sort_by(|a, b| a.0.total_cmp(&b.0));
    dedup(verts.into_iter().map(|(_, x)| x).collect())
}

/// Rows that carry a genuine facet, i.e. touch at least `n` affinely spanning vertices.
pub(crate) fn active_facets(rows: &[Vector], vertices: &[Vector]) -> Vec<Vector> {
    let n = rows[0].len();
    let facets: Vec<Vector> = rows
        .iter()
        .filter(|r| on_facet(r, vertices).len() >= n)
        .cloned()
        .collect();
    dedup(facets)
}

pub(crate) fn on_facet<'a>(normal: &Vector, vertices: &'a [Vector]) -> Vec<&'a Vector> {
    vertices
        .iter()
        .filter(|v| (normal.dot(v) - 1.0).abs() <= 1e-7)
        .collect()
}

/// Extreme points among `points`: those lying on some facet.
pub(crate) fn extreme_points(points: &[Vector], facets: &[Vector]) -> Vec<Vector> {
    let pts: Vec<Vector> = points
        .iter()
        .filter(|p| facets.iter().any(|a| (a.dot(p) - 1.0).abs() <= 1e-7))
        .cloned()
        .collect();
    dedup(pts)
}

/// Volume of a polytope containing the origin from its facets `r · x ≤ 1` and
/// vertices, as a cone decomposition with apex at the origin. Handles `n ≤ 3`.
pub(crate) fn fan_volume(facets: &[Vector], vertices: &[Vector]) -> f64 {
    let n = vertices[0].len();
    match n {
        1 => {
            let lo = vertices.iter().map(|v| v[0]).fold(f64::INFINITY, f64::min);
            let hi = vertices.iter().map(|v| v[0]).fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        }
        2 => polygon_area(vertices),
        3 => facets
            .iter()
            .map(|a| {
                let pts = on_facet(a, vertices);
                let area = planar_polygon_area(&pts, a);
                area / a.norm() / 3.0
            })
            .sum(),
        _ => unreachable!("fan_volume is limited to n <= 3"),
    }
}

/// Shoelace area of the convex hull of planar points.
fn polygon_area(points: &[Vector]) -> f64 {
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / points.len() as f64;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / points.len() as f64;
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    sorted.sort_by(|a, b| {
        let ta = (a.1 - cy).atan2(a.0 - cx);
        let tb = (b.1 - cy).atan2(b.0 - cx);
        ta.total_cmp(&tb)
    });
    let m = sorted.len();
    let twice: f64 = (0..m)
        .map(|i| {
            let (x0, y0) = sorted[i];
            let (x1, y1) = sorted[(i + 1) % m];
            x0 * y1 - x1 * y0
        })
        .sum();
    twice.abs() / 2.0
}

/// Area of a convex polygon lying in the plane with normal `normal`.
fn planar_polygon_area(points: &[&Vector], normal: &Vector) -> f64 {
    if points.len() < 3 {
        return 0.0;
    }
    let nz = normal.normalize();
    let seed = if nz[0].abs() < 0.9 {
        Vector::from_vec(vec![1.0, 0.0, 0.0])
    } else {
        Vector::from_vec(vec![0.0, 1.0, 0.0])
    };
    let e1 = (&seed - &nz * nz.dot(&seed)).normalize();
    let e2 = nz.cross(&e1);
    let flat: Vec<Vector> = points
        .iter()
        .map(|p| Vector::from_vec(vec![p.dot(&e1), p.dot(&e2)]))
        .collect();
    polygon_area(&flat)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn square_generators_give_four_facets() {
        let f = symmetric_facets(&[v(&[1.0, 1.0]), v(&[1.0, -1.0])]);
        assert_eq!(f.len(), 4);
        assert!(f.iter().any(|a| (a - v(&[1.0, 0.0])).amax() < 1e-12));
    }

    #[test]
    fn octahedron_vertices_and_volume() {
        let mut rows = Vec::new();
        for s in 0..8 {
            let sign = |k: usize| if s >> k & 1 == 1 { -1.0 } else { 1.0 };
            rows.push(v(&[sign(0), sign(1), sign(2)]));
        }
        let verts = halfspace_vertices(&rows);
        assert_eq!(verts.len(), 6);
        let facets = active_facets(&rows, &verts);
        assert_eq!(facets.len(), 8);
        assert!((fan_volume(&facets, &verts) - 4.0 / 3.0).abs() < 1e-12);
    }
}
