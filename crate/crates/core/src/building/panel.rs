//! Panel trees: projections of the building onto rank-2 lattice trees.

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::lattice::{elementary_divisors, lattice_normal_form};
use super::vertex::Vertex;
use super::BuildingError;
use crate::arith::{
    parse_scalar, primitive_integer_vector, scalar_to_string, Matrix, Prime, Scalar,
};

/// A vertex of the spherical building at infinity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VertexRepr", into = "VertexRepr")]
pub enum VertexAtInfinity {
    /// A line D of Q³, by a spanning vector.
    Point(Vec<Scalar>),
    /// A plane V of Q³, by a normal covector.
    Line(Vec<Scalar>),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexRepr {
    kind: String,
    coords: Vec<String>,
}

impl From<VertexAtInfinity> for VertexRepr {
    fn from(v: VertexAtInfinity) -> Self {
        let (kind, c) = match v {
            VertexAtInfinity::Point(c) => ("point", c),
            VertexAtInfinity::Line(c) => ("line", c),
        };
        VertexRepr {
            kind: kind.into(),
            coords: c.iter().map(scalar_to_string).collect(),
        }
    }
}

impl TryFrom<VertexRepr> for VertexAtInfinity {
    type Error = String;

    fn try_from(r: VertexRepr) -> Result<Self, String> {
        let c: Vec<Scalar> = r
            .coords
            .iter()
            .map(|s| parse_scalar(s))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if c.len() != 3 {
            return Err("expected three coordinates".into());
        }
        match r.kind.as_str() {
            "point" => VertexAtInfinity::point(&c),
            "line" => VertexAtInfinity::line(&c),
            other => return Err(format!("unknown vertex kind {other:?}")),
        }
        .map_err(|e| e.to_string())
    }
}

impl VertexAtInfinity {
    pub fn point(v: &[Scalar]) -> Result<Self, BuildingError> {
        Ok(VertexAtInfinity::Point(normalized(v)?))
    }

    pub fn line(normal: &[Scalar]) -> Result<Self, BuildingError> {
        Ok(VertexAtInfinity::Line(normalized(normal)?))
    }

    /// A rational basis adapted to v: first column spans D, or the first two span V.
    fn adapted_basis(&self) -> Matrix {
        match self {
            VertexAtInfinity::Point(d) => {
                let k = d.iter().position(|x| !x.is_zero()).expect("nonzero");
                let mut cols = vec![d.clone()];
                cols.extend((0..3).filter(|&j| j != k).map(unit));
                Matrix::from_columns(&cols)
            }
            VertexAtInfinity::Line(eta) => {
                let k = eta.iter().position(|x| !x.is_zero()).expect("nonzero");
                let mut cols: Vec<Vec<Scalar>> = (0..3)
                    .filter(|&j| j != k)
                    .map(|j| {
                        let mut w = unit(j);
                        w[k] = -(&eta[j] / &eta[k]);
                        w
                    })
                    .collect();
                cols.push(unit(k));
                Matrix::from_columns(&cols)
            }
        }
    }
}

fn normalized(v: &[Scalar]) -> Result<Vec<Scalar>, BuildingError> {
    let ints = primitive_integer_vector(v).ok_or(BuildingError::ZeroVector)?;
    Ok(ints.into_iter().map(Scalar::from_integer).collect())
}

fn unit(j: usize) -> Vec<Scalar> {
    let mut e = vec![Scalar::zero(); 3];
    e[j] = Scalar::one();
    e
}

/// A vertex of a rank-2 lattice tree, in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TreeVertex {
    basis: Matrix,
    prime: Prime,
}

impl TreeVertex {
    pub fn new(gens: &Matrix, prime: Prime) -> Result<Self, BuildingError> {
        Ok(TreeVertex {
            basis: lattice_normal_form(gens, prime)?,
            prime,
        })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn act(&self, g: &Matrix) -> Result<TreeVertex, BuildingError> {
        TreeVertex::new(&(g * &self.basis), self.prime)
    }
}

/// π_v(x): the class of L_x / (L_x ∩ D) for a point, or of L_x ∩ V for a line,
/// in the coordinates of the adapted basis of v.
pub fn panel_tree_project(v: &VertexAtInfinity, x: &Vertex) -> Result<TreeVertex, BuildingError> {
    let p = x.prime();
    let b = v.adapted_basis();
    let n = &b.inverse()? * x.basis();
    match v {
        VertexAtInfinity::Point(_) => TreeVertex::new(&n.submatrix(1, 3, 0, 3), p),
        VertexAtInfinity::Line(_) => {
            // (L ∩ V)* is the restriction of L* to V.
            let dual = n.inverse()?.transpose();
            let restricted = lattice_normal_form(&dual.submatrix(0, 2, 0, 3), p)?;
            TreeVertex::new(&restricted.inverse()?.transpose(), p)
        }
    }
}

/// The action of g ∈ Stab(v) on T_v, as a 2×2 matrix in the adapted coordinates.
pub fn induced_tree_action(v: &VertexAtInfinity, g: &Matrix) -> Result<Matrix, BuildingError> {
    let b = v.adapted_basis();
    let c = &(&b.inverse()? * g) * &b;
    match v {
        VertexAtInfinity::Point(_) => {
            if !(c[(1, 0)].is_zero() && c[(2, 0)].is_zero()) {
                return Err(BuildingError::NotStabilizing);
            }
            Ok(c.submatrix(1, 3, 1, 3))
        }
        VertexAtInfinity::Line(_) => {
            if !(c[(2, 0)].is_zero() && c[(2, 1)].is_zero()) {
                return Err(BuildingError::NotStabilizing);
            }
            Ok(c.submatrix(0, 2, 0, 2))
        }
    }
}

/// Graph distance in the tree: the spread of the two elementary divisors.
pub fn tree_distance(t1: &TreeVertex, t2: &TreeVertex) -> Result<u64, BuildingError> {
    if t1.prime != t2.prime {
        return Err(BuildingError::PrimeMismatch(t1.prime.get(), t2.prime.get()));
    }
    let d = elementary_divisors(&(&t1.basis.inverse()? * &t2.basis), t1.prime)?;
    Ok((d[1] - d[0]) as u64)
}
