//! Ping-pong cylinders and the valuation-margin calculus.
//!
//! For a strongly regular h with rational eigenbasis (v1, v2, v3), ordered so
//! the eigenvalue valuations s1 < s2 < s3 increase, the cylinder of depth m is
//! U_o(y) with o = [⟨v1, v2, v3⟩] and y = [⟨v1, p^m v2, p^2m v3⟩]. In the
//! coordinates of the eigenbasis a flag (x ⊂ ker η) lies in it iff
//!
//!   x1 ≠ 0, v(x2/x1) ≥ m, v(x3/x1) ≥ 2m,  η3 ≠ 0, v(η2/η3) ≥ m, v(η1/η3) ≥ 2m.
//!
//! Images under h^N shift these ratios by N times the slope gaps, so inclusions
//! between cylinders reduce to finitely many inequalities between valuations.

use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::TitsError;
use crate::arith::{val, Matrix, Prime, Scalar, Valuation};
use crate::building::{flags_opposite, u_cylinder_contains, ChamberAtInfinity, Vertex};
use crate::dynamics::trial_rng;
use crate::isometry::{attracting_flag, rational_eigendata, repelling_flag, GroupElement};

/// Powers tried by the doubling search: 1, 2, 4, …, 2^20.
const MAX_DOUBLINGS: u32 = 20;

/// The eigen-frame of one of g1, g1⁻¹, g2, g2⁻¹.
#[derive(Debug, Clone)]
pub struct Frame {
    pub label: &'static str,
    pub element: GroupElement,
    /// Columns v1, v2, v3, primitive, by increasing eigenvalue valuation.
    pub basis: Matrix,
    /// s1 < s2 < s3.
    pub slopes: [i64; 3],
}

impl Frame {
    fn of(label: &'static str, g: &GroupElement, precision: u32) -> Result<Self, TitsError> {
        let eig = rational_eigendata(g, precision)?;
        // eigendata is sorted by decreasing valuation
        let cols: Vec<Vec<Scalar>> = eig.iter().rev().map(|e| e.right.clone()).collect();
        let slopes = [eig[2].valuation, eig[1].valuation, eig[0].valuation];
        Ok(Frame {
            label,
            element: g.clone(),
            basis: Matrix::from_columns(&cols),
            slopes,
        })
    }

    /// Apex o of the cylinder.
    pub fn apex(&self) -> Vertex {
        Vertex::new(&self.basis, self.element.prime()).expect("eigenbasis is invertible")
    }

    /// The vertex y with cylinder U_o(y) at depth m.
    pub fn direction(&self, m: i64) -> Vertex {
        let p = self.element.prime();
        Vertex::new(&(&self.basis * &Matrix::p_diagonal(p, &[0, m, 2 * m])), p)
            .expect("eigenbasis is invertible")
    }

    /// Exact membership of a flag in the depth-m cylinder, by coordinates.
    pub fn contains(&self, f: &ChamberAtInfinity, m: i64) -> bool {
        let p = self.element.prime();
        let x = self
            .basis
            .inverse()
            .expect("invertible")
            .apply(&f.line_vector());
        let eta = self.basis.apply_left(&f.normal_covector());
        let ratio_at_least =
            |num: &Scalar, den: &Scalar, w: i64| val(num, p) >= val(den, p) + Valuation::Finite(w);
        !x[0].is_zero()
            && ratio_at_least(&x[1], &x[0], m)
            && ratio_at_least(&x[2], &x[0], 2 * m)
            && !eta[2].is_zero()
            && ratio_at_least(&eta[1], &eta[2], m)
            && ratio_at_least(&eta[0], &eta[2], 2 * m)
    }

    /// A flag of the depth-m cylinder: the frame flag moved by the lower
    /// unitriangular matrix with entries p^m a, p^m b, p^2m c.
    pub fn cylinder_flag(&self, m: i64, a: Scalar, b: Scalar, c: Scalar) -> ChamberAtInfinity {
        let p = self.element.prime();
        let mut u = Matrix::identity(3);
        u[(1, 0)] = p.pow(m) * a;
        u[(2, 1)] = p.pow(m) * b;
        u[(2, 0)] = p.pow(2 * m) * c;
        ChamberAtInfinity::from_basis(&(&self.basis * &u)).expect("invertible frame")
    }
}

/// The four frames, in the order a⁺ = g1, a⁻ = g1⁻¹, b⁺ = g2, b⁻ = g2⁻¹.
pub fn frames(
    g1: &GroupElement,
    g2: &GroupElement,
    precision: u32,
) -> Result<[Frame; 4], TitsError> {
    Ok([
        Frame::of("a+", g1, precision)?,
        Frame::of("a-", &g1.inverse(), precision)?,
        Frame::of("b+", g2, precision)?,
        Frame::of("b-", &g2.inverse(), precision)?,
    ])
}

/// Index of the inverse letter.
fn inverse_of(i: usize) -> usize {
    i ^ 1
}

/// The four attracting and repelling flags must be pairwise opposite.
pub fn check_independent(
    g1: &GroupElement,
    g2: &GroupElement,
    precision: u32,
) -> Result<(), TitsError> {
    let flags = [
        attracting_flag(g1, precision)?,
        repelling_flag(g1, precision)?,
        attracting_flag(g2, precision)?,
        repelling_flag(g2, precision)?,
    ];
    for i in 0..4 {
        for j in i + 1..4 {
            if !flags_opposite(&flags[i], &flags[j]) {
                return Err(TitsError::NotIndependent(format!(
                    "flags {} and {} are not opposite",
                    ["C1+", "C1-", "C2+", "C2-"][i],
                    ["C1+", "C1-", "C2+", "C2-"][j]
                )));
            }
        }
    }
    Ok(())
}

fn v(x: &Scalar, p: Prime) -> Valuation {
    val(x, p)
}

fn plus(a: Valuation, w: i64) -> Valuation {
    a + Valuation::Finite(w)
}

/// Valuation bounds of the line and normal coordinates, in the frame of
/// `target`, of flags from the depth-m cylinder of `source`.
struct Bounds {
    /// Exact valuation of x1 (x1 ≠ 0), when one term dominates.
    x1: Option<i64>,
    /// Lower bounds on v(x1), v(x2), v(x3).
    x_lo: [Valuation; 3],
    /// Exact valuations of x2, x3 when their constant term dominates.
    x_exact: [Option<i64>; 3],
    eta3: Option<i64>,
    eta_lo: [Valuation; 3],
    eta_exact: [Option<i64>; 3],
}

fn bounds(target: &Frame, source: &Frame, m: i64) -> Bounds {
    let p = target.element.prime();
    let t = &target.basis.inverse().expect("invertible") * &source.basis;
    let r = t.inverse().expect("invertible");
    // x = T·(1, x2', x3') with v(x2') ≥ m, v(x3') ≥ 2m
    let lo_x = |j: usize| {
        v(&t[(j, 0)], p)
            .min(plus(v(&t[(j, 1)], p), m))
            .min(plus(v(&t[(j, 2)], p), 2 * m))
    };
    let exact_x = |j: usize| {
        let head = v(&t[(j, 0)], p);
        (head < plus(v(&t[(j, 1)], p), m).min(plus(v(&t[(j, 2)], p), 2 * m)))
            .then(|| head.finite())
            .flatten()
    };
    // η = (η1', η2', 1)·R with v(η1') ≥ 2m, v(η2') ≥ m
    let lo_eta = |j: usize| {
        v(&r[(2, j)], p)
            .min(plus(v(&r[(1, j)], p), m))
            .min(plus(v(&r[(0, j)], p), 2 * m))
    };
    let exact_eta = |j: usize| {
        let head = v(&r[(2, j)], p);
        (head < plus(v(&r[(1, j)], p), m).min(plus(v(&r[(0, j)], p), 2 * m)))
            .then(|| head.finite())
            .flatten()
    };
    Bounds {
        x1: exact_x(0),
        x_lo: [lo_x(0), lo_x(1), lo_x(2)],
        x_exact: [exact_x(0), exact_x(1), exact_x(2)],
        eta3: exact_eta(2),
        eta_lo: [lo_eta(0), lo_eta(1), lo_eta(2)],
        eta_exact: [exact_eta(0), exact_eta(1), exact_eta(2)],
    }
}

/// One inclusion h^N(Y_source) ⊆ Y_target, reduced to linear inequalities in N.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InclusionCheck {
    pub target: String,
    pub source: String,
    /// Smallest N for which all four inequalities hold.
    pub required_power: u64,
}

/// Smallest N ≥ 1 with h^N(Y_source) ⊆ Y_target, h the target's element.
fn required_power(target: &Frame, source: &Frame, m: i64) -> Result<u64, TitsError> {
    let b = bounds(target, source, m);
    let infeasible = |what: &str| {
        TitsError::MarginInfeasible(format!(
            "{} of the cylinder {} is not controlled in the frame of {} at margin {m}",
            what, source.label, target.label
        ))
    };
    let x1 = b.x1.ok_or_else(|| infeasible("the line"))?;
    let eta3 = b.eta3.ok_or_else(|| infeasible("the plane"))?;
    let s = target.slopes;
    // (lower bound of the ratio, weight, gap)
    let conditions = [
        (b.x_lo[1], x1, m, s[1] - s[0]),
        (b.x_lo[2], x1, 2 * m, s[2] - s[0]),
        (b.eta_lo[1], eta3, m, s[2] - s[1]),
        (b.eta_lo[0], eta3, 2 * m, s[2] - s[0]),
    ];
    let mut need = 1u64;
    for (lo, den, weight, gap) in conditions {
        let Valuation::Finite(lo) = lo else { continue };
        let deficit = weight - (lo - den);
        if deficit > 0 {
            need = need.max(((deficit + gap - 1) / gap) as u64);
        }
    }
    Ok(need)
}

/// Is Y_a ∩ Y_b = ∅ provable from the valuation bounds of Y_b in the frame of a?
fn disjoint_from(a: &Frame, b_frame: &Frame, m: i64) -> bool {
    let b = bounds(a, b_frame, m);
    // Some ratio of Y_b is bounded above strictly below the weight Y_a requires.
    let line = |j: usize, w: i64| match (b.x_exact[j], b.x_lo[0]) {
        (Some(up), Valuation::Finite(lo)) => up - lo < w,
        _ => false,
    };
    let plane = |j: usize, w: i64| match (b.eta_exact[j], b.eta_lo[2]) {
        (Some(up), Valuation::Finite(lo)) => up - lo < w,
        _ => false,
    };
    line(1, m) || line(2, 2 * m) || plane(1, m) || plane(0, 2 * m)
}

/// The margin certificate: disjointness of the four cylinders and the
/// inclusions h^N(Y_k) ⊆ Y_h for every k ≠ h⁻¹.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginReport {
    pub margin: i64,
    pub disjoint_pairs: Vec<(String, String)>,
    pub inclusions: Vec<InclusionCheck>,
    /// Smallest N making every inclusion hold.
    pub minimal_power: u64,
}

pub fn margin_report(fr: &[Frame; 4], m: i64) -> Result<MarginReport, TitsError> {
    if m < 1 {
        return Err(TitsError::MarginInfeasible(
            "margin must be at least 1".into(),
        ));
    }
    let mut disjoint_pairs = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if !(disjoint_from(&fr[i], &fr[j], m) || disjoint_from(&fr[j], &fr[i], m)) {
                return Err(TitsError::MarginInfeasible(format!(
                    "cylinders {} and {} not provably disjoint at margin {m}",
                    fr[i].label, fr[j].label
                )));
            }
            disjoint_pairs.push((fr[i].label.to_string(), fr[j].label.to_string()));
        }
    }
    let mut inclusions = Vec::new();
    for h in 0..4 {
        for k in (0..4).filter(|&k| k != inverse_of(h)) {
            inclusions.push(InclusionCheck {
                target: fr[h].label.into(),
                source: fr[k].label.into(),
                required_power: required_power(&fr[h], &fr[k], m)?,
            });
        }
    }
    let minimal_power = inclusions
        .iter()
        .map(|c| c.required_power)
        .max()
        .unwrap_or(1);
    Ok(MarginReport {
        margin: m,
        disjoint_pairs,
        inclusions,
        minimal_power,
    })
}

/// First N in the doubling search 1, 2, 4, … certified by the margin calculus.
pub fn pingpong_power(
    g1: &GroupElement,
    g2: &GroupElement,
    precision: u32,
    margin: i64,
) -> Result<u64, TitsError> {
    check_independent(g1, g2, precision)?;
    let fr = frames(g1, g2, precision)?;
    let report = margin_report(&fr, margin)?;
    (0..=MAX_DOUBLINGS)
        .map(|k| 1u64 << k)
        .find(|&n| n >= report.minimal_power)
        .ok_or_else(|| {
            TitsError::MarginInfeasible(format!("no power up to 2^{MAX_DOUBLINGS} suffices"))
        })
}

/// Counterexamples found by sampling flags from each cylinder.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FalsifierReport {
    pub samples_per_cylinder: usize,
    /// Images h^N(F) that left the target cylinder.
    pub inclusion_failures: usize,
    /// Samples lying in a second cylinder.
    pub overlap_failures: usize,
    /// Samples whose coordinate test disagrees with the sector test.
    pub membership_disagreements: usize,
}

fn random_local_integer<R: Rng>(rng: &mut R, p: Prime) -> Scalar {
    let k: i64 = rng.random_range(0..4);
    let n: i64 = rng.random_range(-64..=64);
    // a unit denominator keeps the entry in Z_(p)
    let mut d: u64 = rng.random_range(1..=9);
    while d.is_multiple_of(p.get()) {
        d += 1;
    }
    p.pow(k) * Scalar::new(BigInt::from(n), BigInt::from(d))
}

/// Tests the certified inclusions on random flags, exactly, with the sector
/// membership test of the building as the judge.
pub fn falsify_margins(
    g1: &GroupElement,
    g2: &GroupElement,
    precision: u32,
    margin: i64,
    n: u64,
    samples: usize,
    seed: u64,
) -> Result<FalsifierReport, TitsError> {
    let fr = frames(g1, g2, precision)?;
    let p = g1.prime();
    let powers: Vec<Matrix> = fr
        .iter()
        .map(|f| f.element.pow(n as i64).matrix().clone())
        .collect();
    let apexes: Vec<Vertex> = fr.iter().map(Frame::apex).collect();
    let directions: Vec<Vertex> = fr.iter().map(|f| f.direction(margin)).collect();
    let in_cylinder = |h: usize, f: &ChamberAtInfinity| -> Result<bool, TitsError> {
        Ok(u_cylinder_contains(&apexes[h], &directions[h], f)?)
    };
    let mut report = FalsifierReport {
        samples_per_cylinder: samples,
        inclusion_failures: 0,
        overlap_failures: 0,
        membership_disagreements: 0,
    };
    for (k, source) in fr.iter().enumerate() {
        let mut rng = trial_rng(seed, k as u64);
        for _ in 0..samples {
            let f = source.cylinder_flag(
                margin,
                random_local_integer(&mut rng, p),
                random_local_integer(&mut rng, p),
                random_local_integer(&mut rng, p),
            );
            if !in_cylinder(k, &f)? || !source.contains(&f, margin) {
                report.membership_disagreements += 1;
            }
            for h in 0..4 {
                if h != k && in_cylinder(h, &f)? {
                    report.overlap_failures += 1;
                }
                if h == inverse_of(k) {
                    continue;
                }
                let image = f.act(&powers[h])?;
                let inside = in_cylinder(h, &image)?;
                if inside != fr[h].contains(&image, margin) {
                    report.membership_disagreements += 1;
                }
                if !inside {
                    report.inclusion_failures += 1;
                }
            }
        }
    }
    Ok(report)
}
