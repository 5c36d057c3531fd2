//! Group elements as isometries of the building.
//!
//! Classification is algebraic: the Newton slopes of the characteristic
//! polynomial are the Jordan projection. The geometric criterion at a basepoint
//! is kept as a cross-check.

use num_integer::Integer;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{
    char_poly, newton_slopes, reduce_mod_power, slope_factorize, val_finite, ArithError, Matrix,
    Prime, Scalar, DEFAULT_PRECISION, MAX_PRECISION,
};
use crate::building::{
    primitive_local, segments_opposite_at, vector_distance, BuildingError, ChamberAtInfinity,
    Vertex,
};
use crate::coxeter::A2Vector;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IsometryError {
    #[error("element shifts vertex types by {0}")]
    NotTypePreserving(u8),
    #[error("element is not strongly regular")]
    NotStronglyRegular,
    #[error("basepoint is fixed by the element")]
    FixedBasepoint,
    #[error("eigen-flag not recovered up to precision {0}")]
    PrecisionExhausted(u32),
    #[error("matrix is singular")]
    SingularMatrix,
    #[error(transparent)]
    Building(#[from] BuildingError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// An invertible 3×3 matrix over Q, viewed as an automorphism of the building.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupElement {
    matrix: Matrix,
    prime: Prime,
    type_shift: u8,
}

impl GroupElement {
    pub fn new(matrix: Matrix, prime: Prime) -> Result<Self, IsometryError> {
        if matrix.rows() != 3 || matrix.cols() != 3 {
            return Err(ArithError::Dimension("group elements are 3×3".into()).into());
        }
        let det = matrix.determinant();
        if det.is_zero() {
            return Err(IsometryError::SingularMatrix);
        }
        let type_shift = val_finite(&det, prime).mod_floor(&3) as u8;
        Ok(GroupElement {
            matrix,
            prime,
            type_shift,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    /// val(det) mod 3.
    pub fn type_shift(&self) -> u8 {
        self.type_shift
    }

    pub fn is_type_preserving(&self) -> bool {
        self.type_shift == 0
    }

    fn require_type_preserving(&self) -> Result<(), IsometryError> {
        if self.is_type_preserving() {
            Ok(())
        } else {
            Err(IsometryError::NotTypePreserving(self.type_shift))
        }
    }

    pub fn inverse(&self) -> GroupElement {
        let inv = self.matrix.inverse().expect("invertible by construction");
        GroupElement::new(inv, self.prime).expect("invertible by construction")
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement::new(&self.matrix * &other.matrix, self.prime).expect("product of invertibles")
    }

    pub fn pow(&self, n: i64) -> GroupElement {
        let m = self
            .matrix
            .pow_signed(n)
            .expect("invertible by construction");
        GroupElement::new(m, self.prime).expect("power of an invertible")
    }

    pub fn act(&self, x: &Vertex) -> Vertex {
        x.act(&self.matrix).expect("invertible by construction")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IsometryKind {
    Elliptic,
    Hyperbolic,
}

/// The record emitted by `classify`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsometryClass {
    pub kind: IsometryKind,
    /// Jordan projection, PGL-normalized.
    pub lambda: A2Vector,
    pub regular: bool,
    pub strongly_regular: bool,
    pub type_shift: u8,
    /// Some slope is not an integer: the eigenvalues need a ramified extension.
    pub non_integer_slopes: bool,
}

/// Descending Newton slopes of char(g), shifted so the last one is 0.
pub fn jordan_projection(g: &GroupElement) -> A2Vector {
    let slopes = newton_slopes(&char_poly(&g.matrix), g.prime)
        .expect("char poly of an invertible matrix is monic with nonzero constant term");
    A2Vector::raw([slopes[0], slopes[1], slopes[2]]).pgl_normalize()
}

/// Elliptic iff all slopes agree; strongly regular iff they are pairwise distinct.
pub fn classify(g: &GroupElement) -> Result<IsometryClass, IsometryError> {
    g.require_type_preserving()?;
    let lambda = jordan_projection(g);
    let regular = lambda.is_regular();
    let elliptic = lambda.is_zero_pgl();
    Ok(IsometryClass {
        kind: if elliptic {
            IsometryKind::Elliptic
        } else {
            IsometryKind::Hyperbolic
        },
        lambda,
        regular,
        strongly_regular: regular,
        type_shift: g.type_shift,
        non_integer_slopes: lambda.to_ints().is_none(),
    })
}

/// θ(o, g·o).
pub fn cartan_projection(g: &GroupElement, o: &Vertex) -> Result<A2Vector, IsometryError> {
    g.require_type_preserving()?;
    Ok(vector_distance(o, &g.act(o))?.pgl)
}

/// θ(o, g·o) regular and the segments [o, g⁻¹o], [o, go] opposite at o.
pub fn geometric_srh_criterion(g: &GroupElement, o: &Vertex) -> Result<bool, IsometryError> {
    g.require_type_preserving()?;
    let forward = g.act(o);
    if forward == *o {
        return Err(IsometryError::FixedBasepoint);
    }
    if !vector_distance(o, &forward)?.pgl.is_regular() {
        return Ok(false);
    }
    let backward = g.inverse().act(o);
    Ok(segments_opposite_at(o, &backward, &forward)?)
}

/// An eigenvalue, its valuation, and exact right and left eigenvectors,
/// each primitive over Z_(p).
#[derive(Debug, Clone)]
pub struct Eigenpair {
    pub value: Scalar,
    pub valuation: i64,
    pub right: Vec<Scalar>,
    pub left: Vec<Scalar>,
}

/// Exact rational eigendata of a strongly regular element, in descending
/// valuation order.
///
/// Roots are lifted p-adically at precision `precision`, rationalized, and
/// checked exactly; precision doubles up to the ceiling on failure.
pub fn rational_eigendata(
    g: &GroupElement,
    precision: u32,
) -> Result<Vec<Eigenpair>, IsometryError> {
    let class = classify(g)?;
    if !class.strongly_regular {
        return Err(IsometryError::NotStronglyRegular);
    }
    let f = char_poly(&g.matrix);
    let mut n = precision.max(1);
    loop {
        let roots: Option<Vec<_>> = match slope_factorize(&f, g.prime, n) {
            Ok(factors) => factors
                .iter()
                .map(|l| l.rationalize(&f, g.prime).map(|r| (r, l.slope)))
                .collect(),
            Err(ArithError::PrecisionExhausted(_)) => None,
            Err(e) => return Err(e.into()),
        };
        if let Some(roots) = roots {
            return roots
                .into_iter()
                .map(|(value, valuation)| {
                    let shifted = &g.matrix - &Matrix::identity(3).scale(&value);
                    let kernel = |m: &Matrix| {
                        null_vector(m)
                            .and_then(|v| primitive_local(&v, g.prime))
                            .ok_or(IsometryError::SingularMatrix)
                    };
                    Ok(Eigenpair {
                        right: kernel(&shifted)?,
                        left: kernel(&shifted.transpose())?,
                        value,
                        valuation,
                    })
                })
                .collect();
        }
        if n >= MAX_PRECISION {
            return Err(IsometryError::PrecisionExhausted(n));
        }
        n = (n * 2).min(MAX_PRECISION);
    }
}

/// A nonzero kernel vector of a rank-2 3×3 matrix: a cross product of two rows.
fn null_vector(m: &Matrix) -> Option<Vec<Scalar>> {
    for (a, b) in [(0, 1), (0, 2), (1, 2)] {
        let (r, s) = (m.row(a), m.row(b));
        let v = vec![
            &r[1] * &s[2] - &r[2] * &s[1],
            &r[2] * &s[0] - &r[0] * &s[2],
            &r[0] * &s[1] - &r[1] * &s[0],
        ];
        if v.iter().any(|x| !x.is_zero()) {
            return Some(v);
        }
    }
    None
}

/// The limit flag of gⁿ·F: the eigenline of the eigenvalue of smallest
/// valuation inside the plane of the two smallest.
pub fn attracting_flag(
    g: &GroupElement,
    precision: u32,
) -> Result<ChamberAtInfinity, IsometryError> {
    let eig = rational_eigendata(g, precision)?;
    // eig[0] has the largest valuation: its left eigenvector cuts out the plane.
    Ok(ChamberAtInfinity::new(&eig[2].right, &eig[0].left)?)
}

pub fn repelling_flag(
    g: &GroupElement,
    precision: u32,
) -> Result<ChamberAtInfinity, IsometryError> {
    attracting_flag(&g.inverse(), precision)
}

/// The lattice spanned by the three eigenvectors, a vertex of the axis of g.
pub fn axis_vertex(g: &GroupElement, precision: u32) -> Result<Vertex, IsometryError> {
    let eig = rational_eigendata(g, precision)?;
    let cols: Vec<Vec<Scalar>> = eig.iter().map(|e| e.right.clone()).collect();
    let v = Vertex::new(&Matrix::from_columns(&cols), g.prime)?;
    if cartan_projection(g, &v)? != jordan_projection(g) {
        return Err(IsometryError::PrecisionExhausted(precision));
    }
    Ok(v)
}

/// Default precision for eigen-flag recovery.
pub const FLAG_PRECISION: u32 = DEFAULT_PRECISION;

/// An eigen-flag known p-adically: `flag` is an exact rational flag whose
/// primitive line and normal agree with the true ones, up to units, modulo
/// p^precision.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicFlag {
    pub flag: ChamberAtInfinity,
    pub precision: u32,
}

/// Attracting and repelling flags of a strongly regular element whose
/// eigenvalues need not be rational. Each eigenvalue lies in Q_p because the
/// slopes are distinct integers, so its eigenvectors can be lifted.
pub fn padic_eigen_flags(
    g: &GroupElement,
    precision: u32,
) -> Result<[PadicFlag; 2], IsometryError> {
    let ginv = g.inverse();
    Ok([
        padic_attracting(g, precision)?,
        padic_attracting(&ginv, precision)?,
    ])
}

fn padic_attracting(g: &GroupElement, precision: u32) -> Result<PadicFlag, IsometryError> {
    if !classify(g)?.strongly_regular {
        return Err(IsometryError::NotStronglyRegular);
    }
    let p = g.prime;
    // g' = p^k·g has entries in Z_(p), so its eigenvalues are p-adic integers.
    let k = -g
        .matrix
        .min_valuation(p)
        .finite()
        .expect("invertible")
        .min(0);
    let scaled = g.matrix.scale(&p.pow(k));
    let f = char_poly(&scaled);
    let mut n = precision.max(1);
    loop {
        let factors = slope_factorize(&f, p, n)?;
        // Descending slope: factors[0] largest valuation, factors[2] smallest.
        let (hi, lo) = (&factors[0].root, &factors[2].root);
        let line = padic_kernel(&scaled, lo.to_scalar(p), p, n, false);
        let normal = padic_kernel(&scaled, hi.to_scalar(p), p, n, true);
        if let (Some((l, el)), Some((eta, en))) = (line, normal) {
            let e = el.min(en);
            if e >= 1 {
                return Ok(PadicFlag {
                    flag: make_incident(&l, &eta, p)?,
                    precision: e,
                });
            }
        }
        if n >= MAX_PRECISION {
            return Err(IsometryError::PrecisionExhausted(n));
        }
        n = (n * 2).min(MAX_PRECISION);
    }
}

/// A primitive kernel vector of (m − λ) (or its transpose) from the cross
/// product of two rows computed mod p^n, with its guaranteed precision.
fn padic_kernel(
    m: &Matrix,
    lambda: Scalar,
    p: Prime,
    n: u32,
    left: bool,
) -> Option<(Vec<Scalar>, u32)> {
    let n = n as i64;
    let mut a = m - &Matrix::identity(3).scale(&lambda);
    if left {
        a = a.transpose();
    }
    let a = Matrix::from_rows(
        (0..3)
            .map(|i| a.row(i).iter().map(|x| reduce_mod_power(x, p, n)).collect())
            .collect(),
    )
    .expect("3×3");
    let mut best: Option<(Vec<Scalar>, i64)> = None;
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let (r, s) = (a.row(i), a.row(j));
        let v: Vec<Scalar> = [(1, 2), (2, 0), (0, 1)]
            .iter()
            .map(|&(x, y)| reduce_mod_power(&(&r[x] * &s[y] - &r[y] * &s[x]), p, n))
            .collect();
        let mu = v
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| val_finite(x, p))
            .min();
        if let Some(mu) = mu {
            if best.as_ref().is_none_or(|b| mu < b.1) {
                best = Some((v, mu));
            }
        }
    }
    let (v, mu) = best?;
    let e = n - mu;
    let unit = p.pow(-mu);
    let v = v
        .iter()
        .map(|x| reduce_mod_power(&(x * &unit), p, e))
        .collect();
    Some((v, e as u32))
}

/// Moves the line by a multiple of a unit coordinate so that it lies exactly
/// in the plane; the change is divisible by the pairing.
fn make_incident(
    line: &[Scalar],
    normal: &[Scalar],
    p: Prime,
) -> Result<ChamberAtInfinity, IsometryError> {
    let k = (0..3)
        .find(|&i| !normal[i].is_zero() && val_finite(&normal[i], p) == 0)
        .expect("primitive normal");
    let pairing: Scalar = (0..3).map(|i| &line[i] * &normal[i]).sum();
    let mut l: Vec<Scalar> = line.iter().map(|x| x * &normal[k]).collect();
    l[k] -= pairing;
    Ok(ChamberAtInfinity::new(&l, normal)?)
}

/// Opposition of the true flags behind two p-adic approximations: each pairing
/// must have valuation below both precisions, which also rules out zero.
pub fn padic_flags_opposite(f: &PadicFlag, g: &PadicFlag, p: Prime) -> bool {
    let e = i64::from(f.precision.min(g.precision));
    let certified = |a: &ChamberAtInfinity, b: &ChamberAtInfinity| {
        let d: Scalar = a
            .line_vector()
            .iter()
            .zip(b.normal_covector())
            .map(|(x, y)| x * y)
            .sum();
        !d.is_zero() && val_finite(&d, p) < e
    };
    certified(&f.flag, &g.flag) && certified(&g.flag, &f.flag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::building::{flags_opposite, u_cylinder_contains};

    fn p2() -> Prime {
        Prime::new(2).unwrap()
    }

    fn el(m: Matrix) -> GroupElement {
        GroupElement::new(m, p2()).unwrap()
    }

    #[test]
    fn diagonal_classification() {
        let p = p2();
        let g = el(Matrix::p_diagonal(p, &[2, 1, 0]));
        let c = classify(&g).unwrap();
        assert_eq!(c.kind, IsometryKind::Hyperbolic);
        assert!(c.strongly_regular);
        assert_eq!(c.lambda, A2Vector::from_ints(2, 1, 0));
        let h = el(Matrix::p_diagonal(p, &[3, 0, 0]));
        let c = classify(&h).unwrap();
        assert_eq!((c.kind, c.regular), (IsometryKind::Hyperbolic, false));
        let cycle = el(Matrix::from_i64(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]));
        assert_eq!(classify(&cycle).unwrap().kind, IsometryKind::Elliptic);
        let shift = el(Matrix::p_diagonal(p, &[1, 0, 0]));
        assert_eq!(classify(&shift), Err(IsometryError::NotTypePreserving(1)));
    }

    #[test]
    fn ramified_but_hyperbolic() {
        // companion of (x² − 2)(x − 4): slopes 2, 1/2, 1/2
        let g = el(Matrix::from_i64(&[&[0, 0, 8], &[1, 0, -2], &[0, 1, 4]]));
        let c = classify(&g).unwrap();
        assert_eq!(c.kind, IsometryKind::Hyperbolic);
        assert!(c.non_integer_slopes);
        assert!(!c.regular);
    }

    #[test]
    fn diagonal_flags_and_axis() {
        let p = p2();
        let g = el(Matrix::p_diagonal(p, &[2, 1, 0]));
        assert_eq!(
            attracting_flag(&g, 16).unwrap(),
            ChamberAtInfinity::reversed()
        );
        assert_eq!(
            repelling_flag(&g, 16).unwrap(),
            ChamberAtInfinity::standard()
        );
        let o = Vertex::standard(p);
        assert_eq!(axis_vertex(&g, 16).unwrap(), o);
        assert!(geometric_srh_criterion(&g, &o).unwrap());
        assert!(u_cylinder_contains(&o, &g.act(&o), &attracting_flag(&g, 16).unwrap()).unwrap());
    }

    #[test]
    fn conjugate_moves_axis() {
        let p = p2();
        let d = el(Matrix::p_diagonal(p, &[2, 1, 0]));
        let u = el(Matrix::from_i64(&[&[1, 0, 0], &[1, 1, 0], &[1, 3, 1]]).scale(&p.pow(0)));
        let u = el(&u.matrix * &Matrix::from_i64(&[&[1, 1, 1], &[0, 1, 1], &[0, 0, 1]]));
        let g = u.mul(&d).mul(&u.inverse());
        let o = Vertex::standard(p);
        let axis = axis_vertex(&g, 16).unwrap();
        assert_eq!(axis, u.act(&o));
        assert!(geometric_srh_criterion(&g, &axis).unwrap());
        let a = attracting_flag(&g, 16).unwrap();
        assert!(flags_opposite(&a, &repelling_flag(&g, 16).unwrap()));
        assert_eq!(a.act(g.matrix()).unwrap(), a);
    }

    #[test]
    fn fixed_basepoint() {
        let g = el(Matrix::from_i64(&[&[0, 0, 1], &[1, 0, 0], &[0, 1, 0]]));
        let o = Vertex::standard(p2());
        assert_eq!(
            geometric_srh_criterion(&g, &o),
            Err(IsometryError::FixedBasepoint)
        );
    }

    fn min_val(v: &[Scalar], p: Prime) -> i64 {
        v.iter()
            .filter(|x| !x.is_zero())
            .map(|x| val_finite(x, p))
            .min()
            .unwrap_or(i64::MAX)
    }

    fn cross(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
        vec![
            &a[1] * &b[2] - &a[2] * &b[1],
            &a[2] * &b[0] - &a[0] * &b[2],
            &a[0] * &b[1] - &a[1] * &b[0],
        ]
    }

    #[test]
    fn padic_flags_match_exact_ones() {
        let p = p2();
        let d = el(Matrix::p_diagonal(p, &[2, 1, 0]));
        let u = el(Matrix::from_i64(&[&[2, 0, 1], &[0, 1, 0], &[1, 0, 1]]));
        let g = u.mul(&d).mul(&u.inverse());
        let [a, _] = padic_eigen_flags(&g, 24).unwrap();
        let exact = attracting_flag(&g, 24).unwrap();
        let e = i64::from(a.precision);
        assert!(e >= 20);
        assert!(min_val(&cross(&a.flag.line_vector(), &exact.line_vector()), p) >= e);
        assert!(
            min_val(
                &cross(&a.flag.normal_covector(), &exact.normal_covector()),
                p
            ) >= e
        );
    }

    #[test]
    fn padic_flags_of_irreducible_element() {
        // characteristic polynomial irreducible over Q, slopes 2, 0, -2
        let p = p2();
        let m = Matrix::parse_rows(&[
            vec!["3/4".into(), "-1/4".into(), "0".into()],
            vec!["1".into(), "1".into(), "0".into()],
            vec!["3/2".into(), "3/2".into(), "1".into()],
        ])
        .unwrap();
        let g = el(m);
        assert!(attracting_flag(&g, 16).is_err());
        let [a, r] = padic_eigen_flags(&g, 32).unwrap();
        assert!(padic_flags_opposite(&a, &r, p));
        assert!(!padic_flags_opposite(&a, &a, p));
        // residual of the eigen-equation: g'·ℓ ∧ ℓ ≡ 0 mod p^precision
        let k = -g.matrix().min_valuation(p).finite().unwrap().min(0);
        let scaled = g.matrix().scale(&p.pow(k));
        let l = a.flag.line_vector();
        assert!(min_val(&cross(&scaled.apply(&l), &l), p) >= i64::from(a.precision));
        let eta = r.flag.normal_covector();
        let inv = g.inverse().matrix().scale(
            &p.pow(
                -g.inverse()
                    .matrix()
                    .min_valuation(p)
                    .finite()
                    .unwrap()
                    .min(0),
            ),
        );
        assert!(min_val(&cross(&inv.apply_left(&eta), &eta), p) >= i64::from(r.precision));
    }
}
