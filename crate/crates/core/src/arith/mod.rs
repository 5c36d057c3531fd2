//! Exact arithmetic over the rationals with p-adic valuations.
//!
//! Everything in the algebra is exact: scalars are [`BigRational`]s, and the
//! only quantity ever read off them is the integer p-adic valuation.

mod hensel;
mod matrix;
mod newton;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use hensel::{
    rational_reconstruction, slope_factorize, LinearFactor, PadicApprox, PadicRoot,
    DEFAULT_PRECISION, MAX_PRECISION,
};
pub use matrix::Matrix;
pub use newton::{char_poly, newton_slopes};

/// Field element: an exact rational number.
pub type Scalar = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("cannot parse rational literal {0:?}")]
    BadLiteral(String),
    #[error("polynomial has zero constant term")]
    ZeroConstantTerm,
    #[error("polynomial must be monic of degree {expected}")]
    NotMonic { expected: usize },
    #[error("Newton slopes are not pairwise distinct integers")]
    SlopesNotDistinct,
    #[error("p-adic lift did not separate at {0} digits")]
    PrecisionExhausted(u32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// A rational prime, checked on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Prime(u64);

impl Prime {
    pub fn new(p: u64) -> Result<Self, ArithError> {
        if p < 2 {
            return Err(ArithError::NotPrime(p));
        }
        let mut d = 2u64;
        while d.saturating_mul(d) <= p {
            if p.is_multiple_of(d) {
                return Err(ArithError::NotPrime(p));
            }
            d += 1;
        }
        Ok(Prime(p))
    }

    pub fn get(self) -> u64 {
        self.0
    }

    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }

    /// p^e as an exact rational; `e` may be negative.
    pub fn pow(self, e: i64) -> Scalar {
        let base = BigInt::from(self.0).pow(e.unsigned_abs() as u32);
        if e >= 0 {
            Scalar::from_integer(base)
        } else {
            Scalar::new(BigInt::one(), base)
        }
    }

    /// p^e as an integer, e ≥ 0.
    pub fn pow_int(self, e: u32) -> BigInt {
        BigInt::from(self.0).pow(e)
    }
}

impl TryFrom<u64> for Prime {
    type Error = ArithError;
    fn try_from(p: u64) -> Result<Self, Self::Error> {
        Prime::new(p)
    }
}

impl From<Prime> for u64 {
    fn from(p: Prime) -> u64 {
        p.0
    }
}

impl fmt::Display for Prime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// p-adic valuation of a scalar; `Infinite` exactly for zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Valuation {
    Finite(i64),
    Infinite,
}

impl Valuation {
    pub fn finite(self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(v),
            Valuation::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Valuation::Infinite)
    }
}

impl PartialOrd for Valuation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Valuation {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Valuation::Finite(a), Valuation::Finite(b)) => a.cmp(b),
            (Valuation::Finite(_), Valuation::Infinite) => Ordering::Less,
            (Valuation::Infinite, Valuation::Finite(_)) => Ordering::Greater,
            (Valuation::Infinite, Valuation::Infinite) => Ordering::Equal,
        }
    }
}

impl std::ops::Add for Valuation {
    type Output = Valuation;
    fn add(self, rhs: Valuation) -> Valuation {
        match (self, rhs) {
            (Valuation::Finite(a), Valuation::Finite(b)) => Valuation::Finite(a + b),
            _ => Valuation::Infinite,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinite => write!(f, "+inf"),
        }
    }
}

/// Number of times p divides a nonzero integer.
pub fn int_valuation(n: &BigInt, p: Prime) -> i64 {
    debug_assert!(!n.is_zero());
    if p.0 == 2 {
        return n.trailing_zeros().unwrap_or(0) as i64;
    }
    let pb = p.to_bigint();
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

/// Exact p-adic valuation of a rational.
pub fn val(x: &Scalar, p: Prime) -> Valuation {
    if x.is_zero() {
        return Valuation::Infinite;
    }
    Valuation::Finite(int_valuation(x.numer(), p) - int_valuation(x.denom(), p))
}

/// Valuation of a scalar known to be nonzero.
pub fn val_finite(x: &Scalar, p: Prime) -> i64 {
    val(x, p).finite().expect("valuation of zero")
}

/// Parses "a/b" or "a" (surrounding whitespace allowed).
pub fn parse_scalar(s: &str) -> Result<Scalar, ArithError> {
    let t = s.trim();
    let bad = || ArithError::BadLiteral(s.to_string());
    match t.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Scalar::new(a, b))
        }
        None => Ok(Scalar::from_integer(
            BigInt::from_str(t).map_err(|_| bad())?,
        )),
    }
}

/// Canonical string form: "a/b" in lowest terms, or "a" for integers.
pub fn scalar_to_string(x: &Scalar) -> String {
    x.to_string()
}

/// Image of a p-integral rational in Z / modulus, where modulus is a power of p.
pub(crate) fn residue_mod(x: &Scalar, modulus: &BigInt) -> BigInt {
    let num = x.numer().mod_floor(modulus);
    let den = x.denom().mod_floor(modulus);
    let inv = mod_inverse(&den, modulus).expect("denominator must be a p-adic unit");
    (num * inv).mod_floor(modulus)
}

/// Inverse of `a` modulo `m`, if it exists.
pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// Canonical representative of the class x + p^k·Z_(p).
///
/// The representative is n / p^s with s = max(0, -val x) and 0 ≤ n < p^(k+s).
pub fn reduce_mod_power(x: &Scalar, p: Prime, k: i64) -> Scalar {
    let v = match val(x, p) {
        Valuation::Infinite => return Scalar::zero(),
        Valuation::Finite(v) => v,
    };
    if v >= k {
        return Scalar::zero();
    }
    let s = (-v).max(0);
    let e = k + s;
    if e <= 0 {
        return Scalar::zero();
    }
    let y = x * p.pow(s);
    let n = residue_mod(&y, &p.pow_int(e as u32));
    Scalar::new(n, p.pow_int(s as u32))
}

/// Integer vector with content 1 and first nonzero entry positive,
/// spanning the same line as `v`. Returns `None` for the zero vector.
pub fn primitive_integer_vector(v: &[Scalar]) -> Option<Vec<BigInt>> {
    if v.iter().all(|x| x.is_zero()) {
        return None;
    }
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<BigInt> = v
        .iter()
        .map(|x| (x * Scalar::from_integer(lcm.clone())).to_integer())
        .collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    let sign_negative = ints
        .iter()
        .find(|x| !x.is_zero())
        .is_some_and(|x| x.is_negative());
    for x in ints.iter_mut() {
        *x = &*x / &g;
        if sign_negative {
            *x = -&*x;
        }
    }
    Some(ints)
}

/// Serde adapter: a scalar as its canonical string.
pub mod scalar_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Scalar, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Scalar, D::Error> {
        let s = String::deserialize(d)?;
        parse_scalar(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter: a big integer as a decimal string.
pub mod bigint_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        BigInt::from_str(s.trim()).map_err(serde::de::Error::custom)
    }
}
