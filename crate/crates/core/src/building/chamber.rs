//! Chambers at infinity (full flags of Q³), sectors and cylinders.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::lattice::{primitive_local, reduce_mod_p, smith_adapted};
use super::residue::ResidueChamber;
use super::vertex::{vector_distance, Vertex};
use super::BuildingError;
use crate::arith::{primitive_integer_vector, val, Matrix, Prime, Scalar, Valuation};

/// A full flag line ⊂ plane of Q³.
///
/// The plane is stored through a normal covector η, so the plane is ker η.
/// Both vectors are primitive integer vectors with first nonzero entry positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChamberAtInfinity {
    line: [BigInt; 3],
    normal: [BigInt; 3],
}

fn to_array(v: Vec<BigInt>) -> [BigInt; 3] {
    v.try_into().expect("three coordinates")
}

fn to_scalars(v: &[BigInt; 3]) -> Vec<Scalar> {
    v.iter().map(|x| Scalar::from_integer(x.clone())).collect()
}

fn dot(a: &[Scalar], b: &[Scalar]) -> Scalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    vec![
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

impl ChamberAtInfinity {
    /// Flag from a line vector and a normal covector with `normal · line = 0`.
    pub fn new(line: &[Scalar], normal: &[Scalar]) -> Result<Self, BuildingError> {
        let l = primitive_integer_vector(line).ok_or(BuildingError::ZeroVector)?;
        let n = primitive_integer_vector(normal).ok_or(BuildingError::ZeroVector)?;
        if !dot(line, normal).is_zero() {
            return Err(BuildingError::NotIncident);
        }
        Ok(ChamberAtInfinity {
            line: to_array(l),
            normal: to_array(n),
        })
    }

    /// Flag ⟨v⟩ ⊂ ⟨v, w⟩.
    pub fn from_vectors(v: &[Scalar], w: &[Scalar]) -> Result<Self, BuildingError> {
        let n = cross(v, w);
        if n.iter().all(Zero::is_zero) {
            return Err(BuildingError::ZeroVector);
        }
        ChamberAtInfinity::new(v, &n)
    }

    /// Flag ⟨c₁⟩ ⊂ ⟨c₁, c₂⟩ from the first two columns of `m`.
    pub fn from_basis(m: &Matrix) -> Result<Self, BuildingError> {
        ChamberAtInfinity::from_vectors(&m.column(0), &m.column(1))
    }

    /// ⟨e1⟩ ⊂ ⟨e1, e2⟩.
    pub fn standard() -> Self {
        ChamberAtInfinity::from_basis(&Matrix::identity(3)).expect("coordinate flag")
    }

    /// ⟨e3⟩ ⊂ ⟨e2, e3⟩.
    pub fn reversed() -> Self {
        let e = Matrix::identity(3);
        ChamberAtInfinity::from_vectors(&e.column(2), &e.column(1)).expect("coordinate flag")
    }

    pub fn line(&self) -> &[BigInt; 3] {
        &self.line
    }

    pub fn normal(&self) -> &[BigInt; 3] {
        &self.normal
    }

    pub fn line_vector(&self) -> Vec<Scalar> {
        to_scalars(&self.line)
    }

    pub fn normal_covector(&self) -> Vec<Scalar> {
        to_scalars(&self.normal)
    }

    /// g·(D ⊂ V) = (gD ⊂ gV); the normal transforms as η·g⁻¹.
    pub fn act(&self, g: &Matrix) -> Result<ChamberAtInfinity, BuildingError> {
        let line = g.apply(&self.line_vector());
        let normal = g.inverse()?.apply_left(&self.normal_covector());
        ChamberAtInfinity::new(&line, &normal)
    }
}

/// Transversality: neither line lies in the other plane.
pub fn flags_opposite(f: &ChamberAtInfinity, g: &ChamberAtInfinity) -> bool {
    !dot(&f.line_vector(), &g.normal_covector()).is_zero()
        && !dot(&g.line_vector(), &f.normal_covector()).is_zero()
}

/// germ at o of the sector Q(o, F): reductions of F ∩ L_o.
pub fn germ_of_chamber(o: &Vertex, f: &ChamberAtInfinity) -> Result<ResidueChamber, BuildingError> {
    let p = o.prime();
    let (line, normal) = local_coordinates(o, f)?;
    let reduce = |v: &[Scalar]| [0, 1, 2].map(|i| reduce_mod_p(&v[i], p));
    ResidueChamber::new(reduce(&line), reduce(&normal), p.get())
}

/// Line and normal of F in the basis of L_o, each primitive in Z_(p)³.
fn local_coordinates(
    o: &Vertex,
    f: &ChamberAtInfinity,
) -> Result<(Vec<Scalar>, Vec<Scalar>), BuildingError> {
    let p = o.prime();
    let line = o.basis().inverse()?.apply(&f.line_vector());
    let normal = o.basis().apply_left(&f.normal_covector());
    let line = primitive_local(&line, p).ok_or(BuildingError::ZeroVector)?;
    let normal = primitive_local(&normal, p).ok_or(BuildingError::ZeroVector)?;
    Ok((line, normal))
}

/// A basis (f1, f2, f3) of L_o with f1 spanning L_o ∩ line(F) and (f1, f2)
/// spanning L_o ∩ plane(F). Columns are in absolute coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SectorBasis {
    pub basis: Matrix,
    pub prime: Prime,
}

impl SectorBasis {
    pub fn new(o: &Vertex, f: &ChamberAtInfinity) -> Result<Self, BuildingError> {
        let p = o.prime();
        let (f1, eta) = local_coordinates(o, f)?;
        let k = (0..3)
            .find(|&i| val(&eta[i], p) == Valuation::Finite(0))
            .expect("primitive covector has a unit entry");
        let others: Vec<usize> = (0..3).filter(|&j| j != k).collect();
        let w = |j: usize| -> Vec<Scalar> {
            let mut v = vec![Scalar::zero(); 3];
            v[j] = Scalar::one();
            v[k] = -(&eta[j] / &eta[k]);
            v
        };
        // f1 = f1[j0]·w(j0) + f1[j1]·w(j1); keep the w whose partner coefficient is a unit.
        let f2 = if val(&f1[others[0]], p) == Valuation::Finite(0) {
            w(others[1])
        } else {
            w(others[0])
        };
        let mut f3 = vec![Scalar::zero(); 3];
        f3[k] = Scalar::one();
        let local = Matrix::from_columns(&[f1, f2, f3]);
        Ok(SectorBasis {
            basis: o.basis() * &local,
            prime: p,
        })
    }

    /// [span(p^b1 f1, p^b2 f2, p^b3 f3)]; a point of the sector when b1 ≤ b2 ≤ b3.
    pub fn point(&self, b: [i64; 3]) -> Vertex {
        let scaled = &self.basis * &Matrix::p_diagonal(self.prime, &b);
        Vertex::new(&scaled, self.prime).expect("adapted basis is invertible")
    }
}

/// Sector point of Q(o, F) with exponents `b`.
pub fn sector_point(
    o: &Vertex,
    f: &ChamberAtInfinity,
    b: [i64; 3],
) -> Result<Vertex, BuildingError> {
    Ok(SectorBasis::new(o, f)?.point(b))
}

/// Is y in the sector Q(o, F), i.e. F ∈ U_o(y)?
///
/// A sector point with exponents (0, b2, b3) sits at θ = (b3, b2, 0) from o,
/// so among the dominance pairs bounded by the spread of θ(o, y) only the one
/// matching θ(o, y) can equal y.
pub fn u_cylinder_contains(
    o: &Vertex,
    y: &Vertex,
    f: &ChamberAtInfinity,
) -> Result<bool, BuildingError> {
    let theta = vector_distance(o, y)?
        .pgl
        .to_ints()
        .expect("lattice distances are integral");
    let flag_basis = SectorBasis::new(o, f)?;
    Ok(flag_basis.point([0, theta[1], theta[0]]) == *y)
}

/// A chamber of U_o(y), read off a Smith-adapted basis of L_o relative to L_y.
pub fn cylinder_representative(o: &Vertex, y: &Vertex) -> Result<ChamberAtInfinity, BuildingError> {
    if o.prime() != y.prime() {
        return Err(BuildingError::PrimeMismatch(
            o.prime().get(),
            y.prime().get(),
        ));
    }
    let rel = &o.basis().inverse()? * y.basis();
    let s = smith_adapted(&rel, o.prime())?;
    ChamberAtInfinity::from_basis(&(o.basis() * &s.transform))
}

#[derive(Serialize, Deserialize)]
struct FlagRepr {
    line: [String; 3],
    normal: [String; 3],
}

impl Serialize for ChamberAtInfinity {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        FlagRepr {
            line: self.line.clone().map(|x| x.to_string()),
            normal: self.normal.clone().map(|x| x.to_string()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ChamberAtInfinity {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FlagRepr::deserialize(d)?;
        let parse = |v: &[String; 3]| -> Result<Vec<Scalar>, D::Error> {
            v.iter()
                .map(|s| {
                    s.parse::<BigInt>()
                        .map(Scalar::from_integer)
                        .map_err(serde::de::Error::custom)
                })
                .collect()
        };
        ChamberAtInfinity::new(&parse(&r.line)?, &parse(&r.normal)?)
            .map_err(serde::de::Error::custom)
    }
}
