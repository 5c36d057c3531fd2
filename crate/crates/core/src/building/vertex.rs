use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::lattice::{elementary_divisors, lattice_normal_form};
use super::residue::{projective_points, ResidueChamber};
use super::BuildingError;
use crate::arith::{val_finite, Matrix, Prime, Scalar};
use crate::coxeter::A2Vector;

/// A vertex of the building: the class of a Z_(p)-lattice in Q³.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Vertex {
    basis: Matrix,
    prime: Prime,
}

impl Vertex {
    /// Normal form of the lattice spanned by the columns of `m`.
    pub fn new(m: &Matrix, prime: Prime) -> Result<Self, BuildingError> {
        if m.rows() != 3 || m.cols() != 3 {
            return Err(BuildingError::Arith(crate::arith::ArithError::Dimension(
                "vertex basis must be 3×3".into(),
            )));
        }
        Ok(Vertex {
            basis: lattice_normal_form(m, prime)?,
            prime,
        })
    }

    /// The class of Z_(p)³.
    pub fn standard(prime: Prime) -> Self {
        Vertex {
            basis: Matrix::identity(3),
            prime,
        }
    }

    /// Class of the lattice spanned by `gens` (3 × m, m ≥ 3).
    pub fn from_generators(gens: &Matrix, prime: Prime) -> Result<Self, BuildingError> {
        Ok(Vertex {
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

    /// g·[L] = [gL].
    pub fn act(&self, g: &Matrix) -> Result<Vertex, BuildingError> {
        Vertex::new(&(g * &self.basis), self.prime)
    }

    /// val(det) mod 3.
    pub fn vertex_type(&self) -> u8 {
        val_finite(&self.basis.determinant(), self.prime).mod_floor(&3) as u8
    }

    /// The 2(p² + p + 1) vertices adjacent to this one.
    pub fn neighbors(&self) -> Vec<Vertex> {
        let p = self.prime;
        let pb = self.basis.scale(&p.pow(1));
        let mut out = Vec::new();
        for point in projective_points(p) {
            let v = lift(&point);
            let mut cols: Vec<Vec<Scalar>> = (0..3).map(|j| pb.column(j)).collect();
            cols.push(self.basis.apply(&v));
            out.push(Vertex::from_generators(&Matrix::from_columns(&cols), p).expect("full rank"));
        }
        for covector in projective_points(p) {
            let mut cols: Vec<Vec<Scalar>> = (0..3).map(|j| pb.column(j)).collect();
            for w in ResidueChamber::kernel_basis(&covector, p.get()) {
                cols.push(self.basis.apply(&lift(&w)));
            }
            out.push(Vertex::from_generators(&Matrix::from_columns(&cols), p).expect("full rank"));
        }
        out
    }

    fn check_prime(&self, other: &Vertex) -> Result<(), BuildingError> {
        if self.prime != other.prime {
            return Err(BuildingError::PrimeMismatch(
                self.prime.get(),
                other.prime.get(),
            ));
        }
        Ok(())
    }
}

fn lift(v: &[u64; 3]) -> Vec<Scalar> {
    v.iter()
        .map(|&x| Scalar::from_integer(BigInt::from(x)))
        .collect()
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex(p={}, {:?})", self.prime, self.basis)
    }
}

/// Vector distance θ(x, y), raw and PGL-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Theta {
    /// Descending elementary-divisor valuations of M_x⁻¹·M_y.
    pub raw: A2Vector,
    /// `raw` shifted so its last coordinate is 0.
    pub pgl: A2Vector,
}

/// θ(x, y) from the valuations of the minors of M_x⁻¹·M_y.
pub fn vector_distance(x: &Vertex, y: &Vertex) -> Result<Theta, BuildingError> {
    x.check_prime(y)?;
    let rel = &x.basis.inverse()? * &y.basis;
    theta_of_matrix(&rel, x.prime)
}

/// θ for a relative position matrix already expressed in the basis of x.
pub(crate) fn theta_of_matrix(rel: &Matrix, p: Prime) -> Result<Theta, BuildingError> {
    let d = elementary_divisors(rel, p)?;
    let raw = A2Vector::raw([d[2], d[1], d[0]].map(Rational64::from));
    Ok(Theta {
        raw,
        pgl: raw.pgl_normalize(),
    })
}

/// θ(y, x) = j(θ(x, y)) after PGL normalization.
pub fn theta_symmetry_check(x: &Vertex, y: &Vertex) -> Result<bool, BuildingError> {
    let forward = vector_distance(x, y)?;
    let backward = vector_distance(y, x)?;
    Ok(backward.pgl == forward.pgl.opposition())
}
