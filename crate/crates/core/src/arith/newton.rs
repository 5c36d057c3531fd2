use num_rational::Rational64;
use num_traits::{One, Zero};

use super::{val, ArithError, Matrix, Prime, Scalar, Valuation};

/// Characteristic polynomial det(x·I − m) of a 2×2 or 3×3 matrix,
/// coefficients in ascending degree (the last one is 1).
pub fn char_poly(m: &Matrix) -> Vec<Scalar> {
    assert!(m.is_square());
    match m.rows() {
        2 => vec![m.determinant(), -m.trace(), Scalar::one()],
        3 => {
            let principal = |a: usize, b: usize| &m[(a, a)] * &m[(b, b)] - &m[(a, b)] * &m[(b, a)];
            let c2 = principal(0, 1) + principal(0, 2) + principal(1, 2);
            vec![-m.determinant(), c2, -m.trace(), Scalar::one()]
        }
        n => panic!("characteristic polynomial only implemented for n = 2, 3 (got {n})"),
    }
}

/// Valuations of the roots of a monic polynomial, with multiplicity, sorted descending.
///
/// These are the negated slopes of the lower convex hull of the points
/// (i, val(c_i)); a hull edge of horizontal width w contributes w roots.
pub fn newton_slopes(coeffs: &[Scalar], p: Prime) -> Result<Vec<Rational64>, ArithError> {
    let degree = coeffs.len().saturating_sub(1);
    if degree == 0 || !coeffs[degree].is_one() {
        return Err(ArithError::NotMonic {
            expected: degree.max(1),
        });
    }
    if coeffs[0].is_zero() {
        return Err(ArithError::ZeroConstantTerm);
    }
    let points: Vec<(i64, i64)> = coeffs
        .iter()
        .enumerate()
        .filter_map(|(i, c)| match val(c, p) {
            Valuation::Finite(v) => Some((i as i64, v)),
            Valuation::Infinite => None,
        })
        .collect();

    // Monotone chain, lower hull, left to right.
    let mut hull: Vec<(i64, i64)> = Vec::with_capacity(points.len());
    for &pt in &points {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b unless a -> b -> pt turns strictly left
            let cross = (b.0 - a.0) * (pt.1 - a.1) - (b.1 - a.1) * (pt.0 - a.0);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }

    let mut slopes = Vec::with_capacity(degree);
    for w in hull.windows(2) {
        let (dx, dy) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
        let root_val = Rational64::new(-dy, dx);
        slopes.extend(std::iter::repeat_n(root_val, dx as usize));
    }
    slopes.sort_by(|a, b| b.cmp(a));
    Ok(slopes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_scalar;

    fn q(s: &str) -> Scalar {
        parse_scalar(s).unwrap()
    }

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn split_cubic() {
        let p = Prime::new(2).unwrap();
        // (x-4)(x-2)(x-1) = x^3 - 7x^2 + 14x - 8
        let f = [q("-8"), q("14"), q("-7"), q("1")];
        assert_eq!(
            newton_slopes(&f, p).unwrap(),
            vec![r(2, 1), r(1, 1), r(0, 1)]
        );
    }

    #[test]
    fn scalar_cubic() {
        let p = Prime::new(3).unwrap();
        // (x-3)^3 = x^3 - 9x^2 + 27x - 27
        let f = [q("-27"), q("27"), q("-9"), q("1")];
        assert_eq!(newton_slopes(&f, p).unwrap(), vec![r(1, 1); 3]);
    }

    #[test]
    fn eisenstein_cubic() {
        let p = Prime::new(5).unwrap();
        let f = [q("-5"), q("-5"), q("0"), q("1")];
        assert_eq!(newton_slopes(&f, p).unwrap(), vec![r(1, 3); 3]);
    }

    #[test]
    fn errors() {
        let p = Prime::new(2).unwrap();
        assert_eq!(
            newton_slopes(&[q("0"), q("1"), q("0"), q("1")], p),
            Err(ArithError::ZeroConstantTerm)
        );
        assert!(matches!(
            newton_slopes(&[q("1"), q("2")], p),
            Err(ArithError::NotMonic { .. })
        ));
    }

    #[test]
    fn char_poly_of_companion() {
        let m = Matrix::from_i64(&[&[0, 0, 6], &[1, 0, -11], &[0, 1, 6]]);
        assert_eq!(char_poly(&m), vec![q("-6"), q("11"), q("-6"), q("1")]);
    }
}
