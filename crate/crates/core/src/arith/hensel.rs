//! Splitting a polynomial along its Newton slopes by Hensel lifting.
//!
//! For each integer slope s, the substitution x = p^s·y followed by division by
//! the content turns the root of valuation s into a simple unit root of the
//! reduction mod p. Newton's iteration then lifts it to any precision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{mod_inverse, newton_slopes, residue_mod, val, ArithError, Prime, Scalar, Valuation};

/// Default number of p-adic digits for lifts.
pub const DEFAULT_PRECISION: u32 = 32;
/// Precision escalation stops here.
pub const MAX_PRECISION: u32 = 512;

/// An element of Z_p known modulo p^precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicApprox {
    #[serde(with = "super::bigint_serde")]
    pub residue: BigInt,
    pub precision: u32,
}

impl PadicApprox {
    pub fn new(residue: BigInt, precision: u32, p: Prime) -> Self {
        let modulus = p.pow_int(precision);
        PadicApprox {
            residue: residue.mod_floor(&modulus),
            precision,
        }
    }
}

/// p^valuation · unit, with the unit known to `unit.precision` digits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicRoot {
    pub valuation: i64,
    pub unit: PadicApprox,
}

impl PadicRoot {
    /// The rational p^valuation · residue.
    pub fn to_scalar(&self, p: Prime) -> Scalar {
        p.pow(self.valuation) * Scalar::from_integer(self.unit.residue.clone())
    }
}

/// The factor (x − root), whose root has valuation `slope`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearFactor {
    pub slope: i64,
    pub root: PadicRoot,
}

/// Splits a monic polynomial with pairwise distinct integer Newton slopes
/// into linear factors over Z_p, each root known to `precision` digits of
/// relative precision. Factors are returned in descending slope order.
pub fn slope_factorize(
    coeffs: &[Scalar],
    p: Prime,
    precision: u32,
) -> Result<Vec<LinearFactor>, ArithError> {
    let slopes = newton_slopes(coeffs, p)?;
    if slopes.iter().any(|s| !s.is_integer()) || slopes.windows(2).any(|w| w[0] == w[1]) {
        return Err(ArithError::SlopesNotDistinct);
    }
    let precision = precision.max(1);
    slopes
        .iter()
        .map(|s| {
            let s = s.to_integer();
            let unit = lift_unit_root(coeffs, p, s, precision)?;
            Ok(LinearFactor {
                slope: s,
                root: PadicRoot {
                    valuation: s,
                    unit: PadicApprox {
                        residue: unit,
                        precision,
                    },
                },
            })
        })
        .collect()
}

/// Unit u with f(p^s·u) ≡ 0, lifted to u mod p^precision.
fn lift_unit_root(
    coeffs: &[Scalar],
    p: Prime,
    s: i64,
    precision: u32,
) -> Result<BigInt, ArithError> {
    // h(y) = f(p^s y) / p^c, primitive in Z_(p)[y]
    let scaled: Vec<Scalar> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * p.pow(s * i as i64))
        .collect();
    let content = scaled
        .iter()
        .filter_map(|c| val(c, p).finite())
        .min()
        .expect("nonzero polynomial");
    let inv_content = p.pow(-content);
    let modulus = p.pow_int(precision);
    let h: Vec<BigInt> = scaled
        .iter()
        .map(|c| residue_mod(&(c * &inv_content), &modulus))
        .collect();
    let dh: Vec<BigInt> = h
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigInt::from(i))
        .collect();

    let pb = p.to_bigint();
    let h_mod_p: Vec<BigInt> = h.iter().map(|c| c.mod_floor(&pb)).collect();
    let dh_mod_p: Vec<BigInt> = dh.iter().map(|c| c.mod_floor(&pb)).collect();
    let mut candidates = (1..p.get())
        .map(BigInt::from)
        .filter(|y| horner(&h_mod_p, y, &pb).is_zero() && !horner(&dh_mod_p, y, &pb).is_zero());
    let mut u = candidates
        .next()
        .ok_or(ArithError::PrecisionExhausted(precision))?;
    if candidates.next().is_some() {
        return Err(ArithError::PrecisionExhausted(precision));
    }

    // Newton: quadratic convergence since h'(u) is a unit.
    for _ in 0..(2 * (32 - precision.leading_zeros()) + 4) {
        let hu = horner(&h, &u, &modulus);
        if hu.is_zero() {
            return Ok(u);
        }
        let dhu = horner(&dh, &u, &modulus);
        let inv = mod_inverse(&dhu, &modulus).ok_or(ArithError::PrecisionExhausted(precision))?;
        u = (&u - hu * inv).mod_floor(&modulus);
    }
    Err(ArithError::PrecisionExhausted(precision))
}

fn horner(coeffs: &[BigInt], y: &BigInt, modulus: &BigInt) -> BigInt {
    coeffs
        .iter()
        .rev()
        .fold(BigInt::zero(), |acc, c| (acc * y + c).mod_floor(modulus))
}

/// The rational a/b with |a|, |b| ≤ sqrt(modulus / 2) and a ≡ b·residue, if one exists.
pub fn rational_reconstruction(residue: &BigInt, modulus: &BigInt) -> Option<Scalar> {
    let bound = (modulus / BigInt::from(2)).sqrt();
    let (mut r0, mut r1) = (modulus.clone(), residue.mod_floor(modulus));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(Scalar::new(r1, t1))
}

/// Exact evaluation f(x) == 0, coefficients ascending.
pub(crate) fn is_exact_root(coeffs: &[Scalar], x: &Scalar) -> bool {
    coeffs
        .iter()
        .rev()
        .fold(Scalar::zero(), |acc, c| acc * x + c)
        .is_zero()
}

impl LinearFactor {
    /// Exact rational root, when the lifted root is rational of small height.
    pub fn rationalize(&self, coeffs: &[Scalar], p: Prime) -> Option<Scalar> {
        let modulus = p.pow_int(self.root.unit.precision);
        let unit = rational_reconstruction(&self.root.unit.residue, &modulus)?;
        let root = p.pow(self.root.valuation) * unit;
        if val(&root, p) != Valuation::Finite(self.slope) {
            return None;
        }
        is_exact_root(coeffs, &root).then_some(root)
    }
}
