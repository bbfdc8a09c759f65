//! JSON documents for bodies. Matrices and vector lists are flat row-major arrays.

use serde::{Deserialize, Serialize};

use super::{Body, GeometryError, Matrix, Vector};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", deny_unknown_fields)]
pub(crate) enum BodyDoc {
    #[serde(rename = "box")]
    Box {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        half_extents: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rotation: Option<Vec<f64>>,
    },
    #[serde(rename = "ellipsoid")]
    Ellipsoid {
        dim: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        center: Option<Vec<f64>>,
        shape: Vec<f64>,
    },
    #[serde(rename = "sympoly_v")]
    SymPolyV { dim: usize, generators: Vec<f64> },
    #[serde(rename = "poly_h")]
    PolyH { dim: usize, normals: Vec<f64>, offsets: Vec<f64> },
}

fn vector(dim: usize, data: Option<Vec<f64>>) -> Result<Vector, GeometryError> {
    match data {
        None => Ok(Vector::zeros(dim)),
        Some(v) if v.len() == dim => Ok(Vector::from_vec(v)),
        Some(v) => Err(GeometryError::DimensionMismatch { expected: dim, got: v.len() }),
    }
}

fn matrix(dim: usize, data: Vec<f64>) -> Result<Matrix, GeometryError> {
    if data.len() != dim * dim {
        return Err(GeometryError::DimensionMismatch { expected: dim * dim, got: data.len() });
    }
    Ok(Matrix::from_row_slice(dim, dim, &data))
}

fn rows(dim: usize, data: &[f64]) -> Result<Vec<Vector>, GeometryError> {
    if dim == 0 || !data.len().is_multiple_of(dim) {
        return Err(GeometryError::DimensionMismatch { expected: dim, got: data.len() });
    }
    Ok(data.chunks(dim).map(Vector::from_row_slice).collect())
}

fn flatten(vs: &[Vector]) -> Vec<f64> {
    vs.iter().flat_map(|v| v.iter().copied()).collect()
}

fn flat_matrix(m: &Matrix) -> Vec<f64> {
    let n = m.nrows();
    (0..n).flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)])).collect()
}

impl TryFrom<BodyDoc> for Body {
    type Error = GeometryError;

    fn try_from(doc: BodyDoc) -> Result<Self, Self::Error> {
        match doc {
            BodyDoc::Box { dim, center, half_extents, rotation } => {
                let rotation = match rotation {
                    Some(r) => matrix(dim, r)?,
                    None => Matrix::identity(dim, dim),
                };
                Body::rotated_box(vector(dim, center)?, vector(dim, Some(half_extents))?, rotation)
            }
            BodyDoc::Ellipsoid { dim, center, shape } => Body::ellipsoid(vector(dim, center)?, matrix(dim, shape)?),
            BodyDoc::SymPolyV { dim, generators } => Body::sym_polytope(rows(dim, &generators)?),
            BodyDoc::PolyH { dim, normals, offsets } => Body::h_polytope(rows(dim, &normals)?, offsets),
        }
    }
}

impl From<Body> for BodyDoc {
    fn from(body: Body) -> Self {
        let dim = body.dim();
        match body {
            Body::Box(b) => BodyDoc::Box {
                dim,
                center: Some(b.center().iter().copied().collect()),
                half_extents: b.half_extents().iter().copied().collect(),
                rotation: Some(flat_matrix(b.rotation())),
            },
            Body::Ellipsoid(e) => BodyDoc::Ellipsoid {
                dim,
                center: Some(e.center().iter().copied().collect()),
                shape: flat_matrix(e.shape()),
            },
            Body::SymPolytopeV(p) => BodyDoc::SymPolyV { dim, generators: flatten(p.generators()) },
            Body::PolytopeH(h) => BodyDoc::PolyH {
                dim,
                normals: flatten(h.normals()),
                offsets: h.offsets().to_vec(),
            },
        }
    }
}

/// Serde adapter storing a [`Vector`] as a plain array.
pub(crate) mod vector {
    use super::Vector;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Vector, s: S) -> Result<S::Ok, S::Error> {
        v.as_slice().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vector, D::Error> {
        Ok(Vector::from_vec(Vec::<f64>::deserialize(d)?))
    }
}
