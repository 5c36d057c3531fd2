//! Z_(p)-lattices in Q^n given by generating columns.

use num_traits::{One, Zero};

use super::BuildingError;
use crate::arith::{reduce_mod_power, val, val_finite, Matrix, Prime, Scalar, Valuation};

/// Canonical basis of the homothety class of the lattice spanned by the
/// columns of `gens` over Z_(p).
///
/// The result is upper triangular with diagonal p^(k_i), min k_i = 0, and each
/// entry above the diagonal in row i reduced to its canonical representative
/// modulo p^(k_i).
pub fn lattice_normal_form(gens: &Matrix, p: Prime) -> Result<Matrix, BuildingError> {
    let n = gens.rows();
    let mut active: Vec<Vec<Scalar>> = (0..gens.cols()).map(|j| gens.column(j)).collect();
    let mut placed: Vec<Option<Vec<Scalar>>> = vec![None; n];
    let mut exps = vec![0i64; n];

    for r in (0..n).rev() {
        let pivot = active
            .iter()
            .enumerate()
            .filter_map(|(j, c)| val(&c[r], p).finite().map(|v| (v, j)))
            .min()
            .ok_or(BuildingError::SingularMatrix)?;
        let (k, j) = pivot;
        let mut col = active.remove(j);
        let unit = p.pow(k) / &col[r];
        for x in col.iter_mut() {
            *x *= &unit;
        }
        for other in active.iter_mut() {
            if other[r].is_zero() {
                continue;
            }
            let f = &other[r] / &col[r];
            for i in 0..=r {
                let t = &f * &col[i];
                other[i] -= t;
            }
        }
        exps[r] = k;
        placed[r] = Some(col);
    }

    let shift = p.pow(-*exps.iter().min().expect("n ≥ 1"));
    let cols: Vec<Vec<Scalar>> = placed
        .into_iter()
        .map(|c| {
            c.expect("every row gets a pivot")
                .into_iter()
                .map(|x| x * &shift)
                .collect()
        })
        .collect();
    let min_exp = *exps.iter().min().expect("n ≥ 1");
    for e in exps.iter_mut() {
        *e -= min_exp;
    }
    let mut m = Matrix::from_columns(&cols);

    // Column j, rows j-1 down to 0: subtracting multiples of column i only
    // touches rows ≤ i.
    for j in 1..n {
        for i in (0..j).rev() {
            let x = m[(i, j)].clone();
            let r = reduce_mod_power(&x, p, exps[i]);
            if r == x {
                continue;
            }
            let q = (&x - &r) / &m[(i, i)];
            for row in 0..=i {
                let t = &q * &m[(row, i)];
                m[(row, j)] -= t;
            }
            m[(i, j)] = r;
        }
    }
    Ok(m)
}

/// Ascending elementary-divisor valuations of a 2×2 or 3×3 matrix over Z_(p),
/// from the minimal valuations of its k×k minors.
pub fn elementary_divisors(a: &Matrix, p: Prime) -> Result<Vec<i64>, BuildingError> {
    let det_val = val(&a.determinant(), p)
        .finite()
        .ok_or(BuildingError::SingularMatrix)?;
    let d1 = a
        .min_valuation(p)
        .finite()
        .ok_or(BuildingError::SingularMatrix)?;
    match a.rows() {
        2 => Ok(vec![d1, det_val - d1]),
        3 => {
            let d12 = a
                .minors2()
                .iter()
                .map(|m| val(m, p))
                .min()
                .and_then(Valuation::finite)
                .ok_or(BuildingError::SingularMatrix)?;
            Ok(vec![d1, d12 - d1, det_val - d12])
        }
        n => panic!("elementary divisors implemented for n = 2, 3 (got {n})"),
    }
}

/// A basis adapted to a pair of lattices: `a`·Z_(p)^n = `transform`·diag(p^e)·Z_(p)^n
/// with `transform` ∈ GL_n(Z_(p)) and exponents ascending.
#[derive(Debug, Clone)]
pub struct SmithAdapted {
    pub transform: Matrix,
    pub exponents: Vec<i64>,
}

/// Smith decomposition over Z_(p), keeping the left transform.
pub fn smith_adapted(a: &Matrix, p: Prime) -> Result<SmithAdapted, BuildingError> {
    let n = a.rows();
    let mut m = a.clone();
    let mut left_inv = Matrix::identity(n);
    let mut exps = Vec::with_capacity(n);
    for k in 0..n {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in k..n {
            for j in k..m.cols() {
                if let Valuation::Finite(v) = val(&m[(i, j)], p) {
                    if best.is_none_or(|(bv, _, _)| v < bv) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let (v, pi, pj) = best.ok_or(BuildingError::SingularMatrix)?;
        m.swap_rows(k, pi);
        left_inv.swap_rows(k, pi);
        m.swap_cols(k, pj);
        let pivot = m[(k, k)].clone();
        for i in k + 1..n {
            if m[(i, k)].is_zero() {
                continue;
            }
            let f = &m[(i, k)] / &pivot;
            for j in 0..m.cols() {
                let t = &f * &m[(k, j)];
                m[(i, j)] -= t;
            }
            for j in 0..n {
                let t = &f * &left_inv[(k, j)];
                left_inv[(i, j)] -= t;
            }
        }
        for j in k + 1..m.cols() {
            if m[(k, j)].is_zero() {
                continue;
            }
            let f = &m[(k, j)] / &pivot;
            for i in k..n {
                let t = &f * &m[(i, k)];
                m[(i, j)] -= t;
            }
        }
        exps.push(v);
    }
    let transform = left_inv.inverse()?;
    Ok(SmithAdapted {
        transform,
        exponents: exps,
    })
}

/// Scales a rational vector by a power of p so that its minimal valuation is 0.
pub fn primitive_local(v: &[Scalar], p: Prime) -> Option<Vec<Scalar>> {
    let m = v.iter().filter_map(|x| val(x, p).finite()).min()?;
    let s = p.pow(-m);
    Some(v.iter().map(|x| x * &s).collect())
}

/// Image in F_p of a p-integral rational.
pub fn reduce_mod_p(x: &Scalar, p: Prime) -> u64 {
    if x.is_zero() {
        return 0;
    }
    debug_assert!(val_finite(x, p) >= 0);
    let r = reduce_mod_power(x, p, 1);
    debug_assert!(r.denom().is_one());
    u64::try_from(r.numer()).expect("residue fits in u64")
}
