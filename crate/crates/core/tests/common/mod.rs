#![allow(dead_code, clippy::needless_range_loop)]

use a2_building::arith::{val_finite, Matrix, Prime, Scalar};
use a2_building::isometry::GroupElement;
use num_bigint::BigInt;
use num_rational::Rational64;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn p2() -> Prime {
    Prime::new(2).unwrap()
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn el(m: Matrix, p: Prime) -> GroupElement {
    GroupElement::new(m, p).unwrap()
}

/// p^k·n/d with n, d prime to p, or zero.
pub fn scalar_of(p: Prime, k: i64, n: i64, d: i64) -> Scalar {
    let fix = |mut x: i64| {
        while x % p.get() as i64 == 0 {
            x += 1;
        }
        x
    };
    if n == 0 {
        return Scalar::zero();
    }
    p.pow(k) * Scalar::new(BigInt::from(fix(n)), BigInt::from(fix(d.abs().max(1))))
}

pub fn random_scalar(r: &mut ChaCha8Rng, p: Prime, lo: i64, hi: i64) -> Scalar {
    let n = r.random_range(-6i64..=6);
    scalar_of(p, r.random_range(lo..=hi), n, r.random_range(1..=5))
}

/// A random invertible 3×3 matrix with entry valuations in [lo, hi].
pub fn random_matrix(r: &mut ChaCha8Rng, p: Prime, lo: i64, hi: i64) -> Matrix {
    loop {
        let rows = (0..3)
            .map(|_| (0..3).map(|_| random_scalar(r, p, lo, hi)).collect())
            .collect();
        let m = Matrix::from_rows(rows).unwrap();
        if !m.determinant().is_zero() {
            return m;
        }
    }
}

/// A random element of GL₃(Z_(p)): a signed permutation times elementary
/// matrices with p-integral entries.
pub fn random_unimodular(r: &mut ChaCha8Rng, p: Prime) -> Matrix {
    let mut m = Matrix::identity(3);
    for _ in 0..6 {
        let (i, j) = (r.random_range(0..3), r.random_range(0..3));
        if i == j {
            continue;
        }
        let mut e = Matrix::identity(3);
        e[(i, j)] = random_scalar(r, p, 0, 2);
        m = &m * &e;
    }
    let mut perm = Matrix::zeros(3, 3);
    let mut cols = [0usize, 1, 2];
    for k in (1..3).rev() {
        cols.swap(k, r.random_range(0..=k));
    }
    for (i, &c) in cols.iter().enumerate() {
        perm[(i, c)] = if r.random_bool(0.5) {
            Scalar::one()
        } else {
            -Scalar::one()
        };
    }
    &m * &perm
}

/// A random type-preserving element: a determinant of valuation ≡ 0 mod 3.
pub fn random_type_preserving(r: &mut ChaCha8Rng, p: Prime, lo: i64, hi: i64) -> GroupElement {
    loop {
        let g = el(random_matrix(r, p, lo, hi), p);
        if g.is_type_preserving() {
            return g;
        }
    }
}

/// Smith normal form over Z_(p) by pivoting on an entry of least valuation.
/// Returns the ascending exponents.
pub fn smith_oracle(m: &Matrix, p: Prime) -> Vec<i64> {
    let n = m.rows();
    let mut a: Vec<Vec<Scalar>> = (0..n).map(|i| m.row(i)).collect();
    let mut out = Vec::new();
    for k in 0..n {
        let (mut pi, mut pj, mut best) = (k, k, i64::MAX);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if !x.is_zero() && val_finite(x, p) < best {
                    (pi, pj, best) = (i, j, val_finite(x, p));
                }
            }
        }
        assert!(best < i64::MAX, "singular input");
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        let piv = a[k][k].clone();
        for i in k + 1..n {
            let f = &a[i][k] / &piv;
            for j in k..n {
                let d = &f * &a[k][j];
                a[i][j] -= d;
            }
        }
        for j in k + 1..n {
            let f = &a[k][j] / &piv;
            for i in k..n {
                let d = &f * &a[i][k];
                a[i][j] -= d;
            }
        }
        out.push(best);
    }
    out.sort();
    out
}

/// Root valuations from the lower convex hull of (i, v_i), descending. The
/// hull is evaluated pointwise as the least chord through each abscissa, and
/// unit steps give the slopes. Points must include both endpoints.
pub fn hull_slopes(points: &[(i64, i64)]) -> Vec<Rational64> {
    let last = points.iter().map(|p| p.0).max().unwrap();
    let height = |x: i64| -> Rational64 {
        let mut best: Option<Rational64> = None;
        for &(a, va) in points.iter().filter(|p| p.0 <= x) {
            for &(b, vb) in points.iter().filter(|p| p.0 >= x) {
                let h = if a == b {
                    Rational64::from(va)
                } else {
                    Rational64::from(va) + Rational64::new((vb - va) * (x - a), b - a)
                };
                best = Some(best.map_or(h, |m: Rational64| m.min(h)));
            }
        }
        best.unwrap()
    };
    let mut slopes: Vec<Rational64> = (0..last).map(|i| height(i) - height(i + 1)).collect();
    slopes.sort_by(|a, b| b.cmp(a));
    slopes
}
