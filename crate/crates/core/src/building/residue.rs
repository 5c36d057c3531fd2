//! The residue at a vertex: flags of the projective plane over F_p.

use serde::{Deserialize, Serialize};

use super::lattice::{elementary_divisors, reduce_mod_p};
use super::vertex::{vector_distance, Vertex};
use super::BuildingError;
use crate::arith::{Matrix, Prime, Scalar};
use crate::coxeter::A2Vector;

/// A point–line flag of PG(2, p).
///
/// Both the point and the covector cutting out the line are stored with
/// their first nonzero coordinate equal to 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueChamber {
    pub point: [u64; 3],
    pub line: [u64; 3],
    pub prime: u64,
}

impl ResidueChamber {
    pub fn new(point: [u64; 3], line: [u64; 3], p: u64) -> Result<Self, BuildingError> {
        let point = normalize_projective(point, p).ok_or(BuildingError::ZeroVector)?;
        let line = normalize_projective(line, p).ok_or(BuildingError::ZeroVector)?;
        if dot(&point, &line, p) != 0 {
            return Err(BuildingError::NotIncident);
        }
        Ok(ResidueChamber {
            point,
            line,
            prime: p,
        })
    }

    /// Two vectors spanning the kernel of a nonzero covector over F_p.
    pub fn kernel_basis(covector: &[u64; 3], p: u64) -> Vec<[u64; 3]> {
        let k = covector
            .iter()
            .position(|&c| c % p != 0)
            .expect("nonzero covector");
        let inv = inv_mod(covector[k], p);
        (0..3)
            .filter(|&j| j != k)
            .map(|j| {
                let mut w = [0u64; 3];
                w[j] = 1;
                w[k] = (p - covector[j] % p) % p * inv % p;
                w
            })
            .collect()
    }

    /// Does the point of `self` lie on the line of `other`?
    pub fn point_on(&self, other: &ResidueChamber) -> bool {
        dot(&self.point, &other.line, self.prime) == 0
    }

    /// Image under an element of GL₃(Z_(p)) acting through its reduction.
    pub fn act(&self, g: &Matrix) -> Result<ResidueChamber, BuildingError> {
        let p = Prime::new(self.prime)?;
        let point = g.apply(&lift(&self.point));
        let line = g.inverse()?.apply_left(&lift(&self.line));
        let reduce = |v: Vec<Scalar>| -> [u64; 3] { [0, 1, 2].map(|i| reduce_mod_p(&v[i], p)) };
        ResidueChamber::new(reduce(point), reduce(line), self.prime)
    }
}

fn lift(v: &[u64; 3]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::from_integer(x.into())).collect()
}

fn dot(a: &[u64; 3], b: &[u64; 3], p: u64) -> u64 {
    (0..3).map(|i| a[i] % p * (b[i] % p) % p).sum::<u64>() % p
}

fn inv_mod(a: u64, p: u64) -> u64 {
    // p is prime, so a^(p-2) is the inverse.
    let (mut base, mut e, mut acc) = (a % p, p - 2, 1u64);
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc as u128 * base as u128 % p as u128) as u64;
        }
        base = (base as u128 * base as u128 % p as u128) as u64;
        e >>= 1;
    }
    acc
}

fn normalize_projective(v: [u64; 3], p: u64) -> Option<[u64; 3]> {
    let v = v.map(|x| x % p);
    let k = v.iter().position(|&x| x != 0)?;
    let inv = inv_mod(v[k], p);
    Some(v.map(|x| (x as u128 * inv as u128 % p as u128) as u64))
}

/// The p² + p + 1 points of PG(2, p), normalized.
pub(crate) fn projective_points(p: Prime) -> Vec<[u64; 3]> {
    let p = p.get();
    let mut out = vec![[0, 0, 1]];
    for c in 0..p {
        out.push([0, 1, c]);
    }
    for b in 0..p {
        for c in 0..p {
            out.push([1, b, c]);
        }
    }
    out
}

/// All (p² + p + 1)(p + 1) chambers of the residue.
pub fn residue_chambers(p: Prime) -> Vec<ResidueChamber> {
    let pts = projective_points(p);
    let mut out = Vec::new();
    for line in &pts {
        for point in &pts {
            if dot(point, line, p.get()) == 0 {
                out.push(ResidueChamber {
                    point: *point,
                    line: *line,
                    prime: p.get(),
                });
            }
        }
    }
    out
}

/// Opposition in the flag complex: neither point lies on the other line.
pub fn residue_opposite(c1: &ResidueChamber, c2: &ResidueChamber) -> bool {
    c1.prime == c2.prime && !c1.point_on(c2) && !c2.point_on(c1)
}

/// germ_o of the sector from o through x.
pub fn germ_flag(o: &Vertex, x: &Vertex) -> Result<ResidueChamber, BuildingError> {
    let theta = vector_distance(o, x)?;
    if !theta.pgl.is_regular() {
        return Err(BuildingError::SingularSegment(theta.pgl.to_string()));
    }
    germ_flag_of_matrix(&(&o.basis().inverse()? * x.basis()), o.prime())
}

/// Germ for the relative position `a` = M_o⁻¹·M_x, in the coordinates of o.
///
/// The point is the reduction of the direction of smallest elementary
/// divisor; the line is cut out by the dual direction of largest divisor.
pub fn germ_flag_of_matrix(a: &Matrix, p: Prime) -> Result<ResidueChamber, BuildingError> {
    let d = elementary_divisors(a, p)?;
    let t = A2Vector::from_ints(d[2], d[1], d[0]);
    if !t.is_regular() {
        return Err(BuildingError::SingularSegment(
            t.pgl_normalize().to_string(),
        ));
    }
    let point = rank_one_column(&a.scale(&p.pow(-d[0])), p);
    let dual = a.inverse()?.transpose().scale(&p.pow(d[2]));
    let line = rank_one_column(&dual, p);
    ResidueChamber::new(point, line, p.get())
}

/// Some nonzero column of an integral matrix whose reduction has rank one.
fn rank_one_column(m: &Matrix, p: Prime) -> [u64; 3] {
    (0..3)
        .map(|j| [0, 1, 2].map(|i| reduce_mod_p(&m[(i, j)], p)))
        .find(|c| c.iter().any(|&x| x != 0))
        .expect("reduction has rank one")
}

/// Opposition of the segments [o, x] and [o, y] at o, through their germs.
pub fn segments_opposite_at(o: &Vertex, x: &Vertex, y: &Vertex) -> Result<bool, BuildingError> {
    Ok(residue_opposite(&germ_flag(o, x)?, &germ_flag(o, y)?))
}
