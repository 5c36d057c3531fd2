//! The model Coxeter complex of type Ã₂.
//!
//! Vectors of the model apartment are triples of rationals in GL-coordinates:
//! the valuations of elementary divisors or of eigenvalues. The closed Weyl
//! chamber is the dominance cone a1 ≥ a2 ≥ a3; the PGL-normalized
//! representative additionally has a3 = 0.

use std::fmt;

use num_integer::Integer;
use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// A vector of the model apartment, in GL-coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct A2Vector([Rational64; 3]);

impl A2Vector {
    /// Raw triple, no ordering imposed.
    pub const fn raw(coords: [Rational64; 3]) -> Self {
        A2Vector(coords)
    }

    pub fn from_ints(a1: i64, a2: i64, a3: i64) -> Self {
        A2Vector([a1.into(), a2.into(), a3.into()])
    }

    pub fn zero() -> Self {
        A2Vector::from_ints(0, 0, 0)
    }

    pub fn coords(&self) -> [Rational64; 3] {
        self.0
    }

    /// Integer coordinates, if all coordinates are integers.
    pub fn to_ints(&self) -> Option<[i64; 3]> {
        let [a, b, c] = self.0;
        (a.is_integer() && b.is_integer() && c.is_integer())
            .then(|| [a.to_integer(), b.to_integer(), c.to_integer()])
    }

    /// Sorts coordinates descending: the unique dominant vector in the W-orbit.
    pub fn dominance_project(&self) -> Self {
        let mut c = self.0;
        c.sort_by(|a, b| b.cmp(a));
        A2Vector(c)
    }

    pub fn is_dominant(&self) -> bool {
        self.0[0] >= self.0[1] && self.0[1] >= self.0[2]
    }

    /// Shift so the minimum coordinate is 0.
    pub fn pgl_normalize(&self) -> Self {
        let m = *self.0.iter().min().expect("three coordinates");
        A2Vector(self.0.map(|x| x - m))
    }

    /// j(v) = w0(−v) in raw GL-coordinates: (−a3, −a2, −a1).
    pub fn opposition_raw(&self) -> Self {
        let [a1, a2, a3] = self.0;
        A2Vector([-a3, -a2, -a1])
    }

    /// The opposition involution followed by PGL normalization.
    pub fn opposition(&self) -> Self {
        self.opposition_raw().pgl_normalize()
    }

    /// a1 > a2 > a3: the vector lies in the open Weyl chamber.
    pub fn is_regular(&self) -> bool {
        self.0[0] > self.0[1] && self.0[1] > self.0[2]
    }

    pub fn sum(&self) -> Rational64 {
        self.0.iter().sum()
    }

    /// Σv mod 3 for integral vectors; this is the vertex-type shift.
    pub fn type_residue(&self) -> Option<u8> {
        let s = self.sum();
        s.is_integer().then(|| s.to_integer().mod_floor(&3) as u8)
    }

    /// Squared norm of the centered vector, exactly.
    pub fn squared_norm(&self) -> Rational64 {
        let mean = self.sum() / Rational64::from(3);
        self.0.iter().map(|&x| (x - mean) * (x - mean)).sum()
    }

    /// CAT(0) length of a segment of this type. Reporting only.
    pub fn euclidean_norm(&self) -> f64 {
        self.squared_norm().to_f64().unwrap_or(f64::NAN).sqrt()
    }

    /// Sup-norm distance between two vectors.
    pub fn sup_distance(&self, other: &A2Vector) -> Rational64 {
        (0..3)
            .map(|i| (self.0[i] - other.0[i]).abs())
            .max()
            .expect("three coordinates")
    }

    pub fn scale(&self, c: Rational64) -> Self {
        A2Vector(self.0.map(|x| x * c))
    }

    pub fn add(&self, other: &A2Vector) -> Self {
        A2Vector([
            self.0[0] + other.0[0],
            self.0[1] + other.0[1],
            self.0[2] + other.0[2],
        ])
    }

    /// Pairwise gaps (a1 − a2, a2 − a3) of a dominant vector.
    pub fn gaps(&self) -> (Rational64, Rational64) {
        (self.0[0] - self.0[1], self.0[1] - self.0[2])
    }

    pub fn is_zero_pgl(&self) -> bool {
        self.pgl_normalize().0.iter().all(Zero::is_zero)
    }

    pub fn to_strings(&self) -> [String; 3] {
        self.0.map(|x| x.to_string())
    }
}

impl fmt::Display for A2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

impl Serialize for A2Vector {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for A2Vector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let parts = <[String; 3]>::deserialize(d)?;
        let mut out = [Rational64::zero(); 3];
        for (slot, s) in out.iter_mut().zip(parts.iter()) {
            *slot = s.trim().parse().map_err(serde::de::Error::custom)?;
        }
        Ok(A2Vector(out))
    }
}

/// An element of the finite Weyl group S₃, acting on coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct WeylElement([usize; 3]);

impl WeylElement {
    pub const IDENTITY: WeylElement = WeylElement([0, 1, 2]);
    /// The longest element: reverses the coordinate order.
    pub const LONGEST: WeylElement = WeylElement([2, 1, 0]);

    pub fn new(perm: [usize; 3]) -> Option<Self> {
        let mut seen = [false; 3];
        for &i in &perm {
            if i > 2 || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(WeylElement(perm))
    }

    pub fn all() -> [WeylElement; 6] {
        [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ]
        .map(WeylElement)
    }

    /// (w·v)_i = v_{w(i)}.
    pub fn act(&self, v: &A2Vector) -> A2Vector {
        A2Vector(self.0.map(|i| v.0[i]))
    }

    /// Composition: (self ∘ other)·v = self·(other·v).
    pub fn compose(&self, other: &WeylElement) -> WeylElement {
        WeylElement([0, 1, 2].map(|i| other.0[self.0[i]]))
    }

    pub fn inverse(&self) -> WeylElement {
        let mut inv = [0; 3];
        for (i, &j) in self.0.iter().enumerate() {
            inv[j] = i;
        }
        WeylElement(inv)
    }

    /// Number of inversions.
    pub fn length(&self) -> usize {
        let p = self.0;
        (0..3)
            .flat_map(|i| (i + 1..3).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count()
    }
}
