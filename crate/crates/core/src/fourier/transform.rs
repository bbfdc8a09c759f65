use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use super::{Complex, FourierError, GridFunction, GridSpec, QuadratureSpec, SimpleFunction};
use crate::geometry::{exact_volume, Body, Matrix, Vector};
use crate::tolerances::{MAX_QUADRATURE_NODES, QUADRATURE_TOL};

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss–Legendre nodes and weights on `[−1, 1]`, cached by degree.
fn rule(degree: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("rule cache poisoned");
    map.entry(degree)
        .or_insert_with(|| {
            let gl = GaussLegendre::new(NonZeroUsize::new(degree.max(1)).expect("nonzero"));
            Arc::new(gl.as_node_weight_pairs().to_vec())
        })
        .clone()
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `∫_a^b e^{−ixz} dx`.
fn chord_integral(a: f64, b: f64, z: f64) -> Complex {
    let len = b - a;
    Complex::from_polar(len * sinc(0.5 * z * len), -0.5 * z * (a + b))
}

/// Transform of the unit ball of `R^n` at radius `r = |ζ|`.
fn ball_transform(n: usize, r: f64) -> f64 {
    match n {
        1 => 2.0 * sinc(r),
        2 => {
            // 2π J₁(r)/r = ∫_{−π/2}^{π/2} 2 cos²θ cos(r sin θ) dθ
            let degree = (32 + r.ceil() as usize).div_ceil(32) * 32;
            let h = std::f64::consts::FRAC_PI_2;
            rule(degree.min(MAX_QUADRATURE_NODES))
                .iter()
                .map(|&(x, w)| {
                    let t = h * x;
                    w * 2.0 * t.cos().powi(2) * (r * t.sin()).cos()
                })
                .sum::<f64>()
                * h
        }
        _ => {
            let c = 4.0 * std::f64::consts::PI;
            if r < 1e-3 {
                c / 3.0 * (1.0 - r * r / 10.0)
            } else {
                c * (r.sin() - r * r.cos()) / r.powi(3)
            }
        }
    }
}

/// One term of a simple function, ready for evaluation.
enum Kernel {
    Box { center: Vector, half: Vector, rotation: Matrix },
    Ellipsoid { center: Vector, map: Matrix, det: f64 },
    Chord { body: Body },
}

struct Prepared {
    coefficient: Complex,
    offset: Vector,
    kernel: Kernel,
}

struct ChordNode {
    outer: Vector,
    weight: f64,
    a: f64,
    b: f64,
}

fn phase(t: &Vector, z: &Vector) -> Complex {
    Complex::from_polar(1.0, -t.dot(z))
}

impl Prepared {
    fn closed(&self, z: &Vector) -> Option<Complex> {
        let v = match &self.kernel {
            Kernel::Box { center, half, rotation } => {
                let w = rotation.transpose() * z;
                let mag: f64 = (0..w.len()).map(|j| 2.0 * half[j] * sinc(half[j] * w[j])).product();
                phase(center, z) * mag
            }
            Kernel::Ellipsoid { center, map, det } => {
                let r = (map.transpose() * z).norm();
                phase(center, z) * (det * ball_transform(z.len(), r))
            }
            Kernel::Chord { .. } => return None,
        };
        Some(self.coefficient * phase(&self.offset, z) * v)
    }
}

/// Outer composite Gauss–Legendre nodes at refinement `level`, with the chord
/// of the body along axis 0 at each.
fn chord_nodes(body: &Body, level: usize, points: usize) -> Result<(Vec<ChordNode>, usize), FourierError> {
    let n = body.dim();
    let (lo, hi) = body.bbox();
    let gl = rule(points);
    let axis_nodes = |a: f64, b: f64, breaks: Vec<f64>| -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = breaks.into_iter().filter(|x| *x > a && *x < b).collect();
        cuts.push(a);
        cuts.push(b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (b - a));
        let panels = 1usize << level;
        let mut out = Vec::new();
        for w in cuts.windows(2) {
            let step = (w[1] - w[0]) / panels as f64;
            for p in 0..panels {
                let (s, e) = (w[0] + p as f64 * step, w[0] + (p + 1) as f64 * step);
                for &(x, wt) in gl.iter() {
                    out.push((0.5 * (s + e) + 0.5 * (e - s) * x, 0.5 * (e - s) * wt));
                }
            }
        }
        out
    };
    let verts = body.vertices().unwrap_or_default();
    let per_axis: Vec<Vec<(f64, f64)>> = (1..n)
        .map(|j| {
            let breaks = if n == 2 { verts.iter().map(|v| v[j]).collect() } else { vec![] };
            axis_nodes(lo[j], hi[j], breaks)
        })
        .collect();
    let width = per_axis.iter().map(|a| a.len()).max().unwrap_or(0);
    let mut nodes = Vec::new();
    let combos: usize = per_axis.iter().map(|a| a.len()).product();
    for k in 0..combos {
        let mut rest = k;
        let mut point = Vector::zeros(n);
        let mut weight = 1.0;
        for (j, ax) in per_axis.iter().enumerate() {
            let (x, w) = ax[rest % ax.len()];
            rest /= ax.len();
            point[j + 1] = x;
            weight *= w;
        }
        if let Some((a, b)) = body.chord(&point, 0) {
            nodes.push(ChordNode { outer: point.rows(1, n - 1).into_owned(), weight, a, b });
        }
    }
    Ok((nodes, width))
}

fn chord_value(nodes: &[ChordNode], z: &Vector) -> Complex {
    let n = z.len();
    let zr = z.rows(1, n - 1);
    nodes
        .iter()
        .map(|c| chord_integral(c.a, c.b, z[0]) * Complex::from_polar(c.weight, -c.outer.dot(&zr)))
        .sum()
}

fn prepare(f: &SimpleFunction) -> Result<Vec<Prepared>, FourierError> {
    let n = f.dim();
    if n > 3 {
        return Err(FourierError::DimensionTooLarge(n));
    }
    Ok(f.terms()
        .iter()
        .map(|t| {
            let kernel = match t.region.base() {
                Body::Box(b) => Kernel::Box {
                    center: b.center().clone(),
                    half: b.half_extents().clone(),
                    rotation: b.rotation().clone(),
                },
                Body::Ellipsoid(e) => Kernel::Ellipsoid {
                    center: e.center().clone(),
                    map: e.from_ball().clone(),
                    det: e.from_ball().determinant().abs(),
                },
                body if n == 1 => {
                    let (lo, hi) = body.bbox();
                    Kernel::Box {
                        center: Vector::from_element(1, 0.5 * (lo[0] + hi[0])),
                        half: Vector::from_element(1, 0.5 * (hi[0] - lo[0])),
                        rotation: Matrix::identity(1, 1),
                    }
                }
                body => Kernel::Chord { body: body.clone() },
            };
            Prepared { coefficient: t.coefficient, offset: t.region.offset(), kernel }
        })
        .collect())
}

/// `f̂` at each point, with the number of quadrature refinements used.
///
/// Boxes and ellipsoids have closed forms. Other polytopes (dimensions 2 and
/// 3) are integrated along chords: exactly in the first coordinate and by
/// composite Gauss–Legendre in the rest, doubling the panels until successive
/// levels differ by less than the quadrature tolerance relative to `‖f‖₁`.
pub fn transform_points(
    f: &SimpleFunction,
    points: &[Vector],
    quad: &QuadratureSpec,
) -> Result<(Vec<Complex>, usize), FourierError> {
    let prepared = prepare(f)?;
    let n = f.dim();
    if let Some(z) = points.iter().find(|z| z.len() != n) {
        return Err(crate::geometry::GeometryError::DimensionMismatch { expected: n, got: z.len() }.into());
    }
    if quad.points == 0 {
        return Err(FourierError::InvalidGrid("quadrature needs at least one point per panel".into()));
    }
    let closed: Vec<Complex> = points
        .par_iter()
        .map(|z| prepared.iter().filter_map(|p| p.closed(z)).sum())
        .collect();
    let chords: Vec<&Prepared> = prepared.iter().filter(|p| matches!(p.kernel, Kernel::Chord { .. })).collect();
    if chords.is_empty() {
        return Ok((closed, 0));
    }
    let scale: f64 = chords
        .iter()
        .map(|p| {
            let Kernel::Chord { body } = &p.kernel else { unreachable!() };
            let vol = exact_volume(body).unwrap_or_else(|| {
                let (lo, hi) = body.bbox();
                (0..n).map(|j| hi[j] - lo[j]).product()
            });
            p.coefficient.norm() * vol
        })
        .sum();
    let eval = |level: usize| -> Result<(Vec<Complex>, usize), FourierError> {
        let mut width = 0;
        let mut sets = Vec::with_capacity(chords.len());
        for p in &chords {
            let Kernel::Chord { body } = &p.kernel else { unreachable!() };
            let (nodes, w) = chord_nodes(body, level, quad.points)?;
            width = width.max(w);
            sets.push(nodes);
        }
        let vals = points
            .par_iter()
            .map(|z| {
                chords
                    .iter()
                    .zip(&sets)
                    .map(|(p, nodes)| p.coefficient * phase(&p.offset, z) * chord_value(nodes, z))
                    .sum()
            })
            .collect();
        Ok((vals, width))
    };
    let (mut prev, _) = eval(0)?;
    let mut level = 1;
    loop {
        let (next, width) = eval(level)?;
        let change = prev.iter().zip(&next).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        if change <= QUADRATURE_TOL * scale {
            let out = closed.iter().zip(&next).map(|(a, b)| a + b).collect();
            return Ok((out, level));
        }
        if 2 * width > MAX_QUADRATURE_NODES {
            return Err(FourierError::QuadratureNotConverged { change, nodes: width });
        }
        prev = next;
        level += 1;
    }
}

/// `f̂(z)`.
pub fn transform_at(f: &SimpleFunction, z: &Vector, quad: &QuadratureSpec) -> Result<Complex, FourierError> {
    Ok(transform_points(f, std::slice::from_ref(z), quad)?.0[0])
}

/// `f̂` on every node of `grid`.
pub fn fourier_transform(
    f: &SimpleFunction,
    grid: &GridSpec,
    quad: &QuadratureSpec,
) -> Result<GridFunction, FourierError> {
    grid.validate()?;
    crate::geometry::check_dim(f.dim(), grid.dim())?;
    let (samples, quadrature_levels) = transform_points(f, &grid.nodes(), quad)?;
    Ok(GridFunction { grid: grid.clone(), samples, quadrature_levels })
}
