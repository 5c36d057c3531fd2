//! Monte Carlo statistics over independent walk trials.

use std::collections::BTreeMap;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::{run_trials, sample_walk_stream, DynamicsError, MeasureSpec};
use crate::arith::{char_poly, scalar_to_string, slope_factorize, Matrix, Scalar};
use crate::building::{
    cylinder_representative, flags_opposite, germ_flag_of_matrix, residue_opposite,
    ChamberAtInfinity, ResidueChamber, SectorBasis, Vertex,
};
use crate::coxeter::A2Vector;
use crate::isometry::{
    attracting_flag, cartan_projection, classify, padic_eigen_flags, padic_flags_opposite,
    repelling_flag, GroupElement, IsometryError, PadicFlag,
};

/// 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval for k successes out of n at 95%.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let (k, n) = (k as f64, n as f64);
    let phat = k / n;
    let z2 = Z95 * Z95;
    let centre = phat + z2 / (2.0 * n);
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    let denom = 1.0 + z2 / n;
    (
        ((centre - half) / denom).max(0.0),
        ((centre + half) / denom).min(1.0),
    )
}

/// Floating-point rendering of a count, for humans only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FractionDisplay {
    pub fraction: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl FractionDisplay {
    fn of(k: usize, n: usize) -> Self {
        let (wilson_low, wilson_high) = wilson_interval(k, n);
        FractionDisplay {
            fraction: if n == 0 { 0.0 } else { k as f64 / n as f64 },
            wilson_low,
            wilson_high,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionRow {
    pub n: usize,
    pub trials: usize,
    pub srh_count: usize,
    pub display: FractionDisplay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionCurve {
    pub seed: u64,
    pub rows: Vec<ProportionRow>,
    /// Each point estimate is at least the lower Wilson bound of the previous one.
    pub monotone_within_bands: bool,
}

impl ProportionCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,trials,srh_count,fraction,wilson_low,wilson_high\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{:.6},{:.6},{:.6}\n",
                r.n,
                r.trials,
                r.srh_count,
                r.display.fraction,
                r.display.wilson_low,
                r.display.wilson_high
            ));
        }
        out
    }

    pub fn row(&self, n: usize) -> Option<&ProportionRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Fraction of trials whose Z_n is strongly regular, for every n of the grid.
/// All grid points of a trial share one walk.
pub fn srh_proportion_curve(
    spec: &MeasureSpec,
    n_grid: &[usize],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<ProportionCurve, DynamicsError> {
    let n_max = n_grid.iter().copied().max().unwrap_or(0);
    let hits = run_trials(trials, workers, |t| {
        let walk = sample_walk_stream(spec, n_max, seed, t);
        n_grid
            .iter()
            .map(|&n| {
                let z = GroupElement::new(walk.at(n), spec.prime())?;
                Ok(classify(&z)?.strongly_regular)
            })
            .collect::<Result<Vec<bool>, DynamicsError>>()
    })?;
    let rows: Vec<ProportionRow> = n_grid
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let srh_count = hits.iter().filter(|h| h[i]).count();
            ProportionRow {
                n,
                trials,
                srh_count,
                display: FractionDisplay::of(srh_count, trials),
            }
        })
        .collect();
    let monotone_within_bands = rows
        .windows(2)
        .all(|w| w[1].display.fraction >= w[0].display.wilson_low);
    Ok(ProportionCurve {
        seed,
        rows,
        monotone_within_bands,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub n: usize,
    pub trials: usize,
    /// Mean of θ(o, Z_n·o)/n, exactly.
    pub mean: A2Vector,
    pub min: A2Vector,
    pub max: A2Vector,
    pub regular: bool,
    pub display: DriftDisplay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftDisplay {
    pub mean: [f64; 3],
    pub gaps: [f64; 2],
}

/// Mean normalized Cartan projection of Z_n, with componentwise range.
pub fn drift_estimate(
    spec: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
    o: &Vertex,
) -> Result<DriftReport, DynamicsError> {
    if n == 0 || trials == 0 {
        return Err(DynamicsError::InvalidMeasure(
            "drift needs n ≥ 1 and at least one trial".into(),
        ));
    }
    let samples = run_trials(trials, workers, |t| {
        let walk = sample_walk_stream(spec, n, seed, t);
        let z = GroupElement::new(walk.last(), spec.prime())?;
        Ok(cartan_projection(&z, o)?)
    })?;
    let scale = Rational64::new(1, n as i64);
    let norm: Vec<A2Vector> = samples.iter().map(|c| c.scale(scale)).collect();
    let total = norm.iter().fold(A2Vector::zero(), |acc, v| acc.add(v));
    let mean = total.scale(Rational64::new(1, trials as i64));
    let coord = |f: fn(Rational64, Rational64) -> Rational64| {
        let mut out = norm[0].coords();
        for v in &norm[1..] {
            for (o, x) in out.iter_mut().zip(v.coords()) {
                *o = f(*o, x);
            }
        }
        A2Vector::raw(out)
    };
    let (g1, g2) = mean.gaps();
    let f = |x: Rational64| x.to_f64().unwrap_or(f64::NAN);
    let m = mean.coords();
    Ok(DriftReport {
        n,
        trials,
        mean,
        min: coord(std::cmp::min),
        max: coord(std::cmp::max),
        regular: g1.is_positive() && g2.is_positive(),
        display: DriftDisplay {
            mean: [f(m[0]), f(m[1]), f(m[2])],
            gaps: [f(g1), f(g2)],
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub n_max: usize,
    pub trials: usize,
    /// Per trial: the first n from which the germ at o is defined and constant
    /// through n_max.
    pub stabilization_times: Vec<Option<usize>>,
}

impl ConvergenceReport {
    /// Number of trials stabilized at or before step `n`.
    pub fn stabilized_by(&self, n: usize) -> usize {
        self.stabilization_times
            .iter()
            .filter(|t| t.is_some_and(|t| t <= n))
            .count()
    }
}

/// Stabilization times of germ_o(Z_n·o) over a horizon of n_max steps.
pub fn combinatorial_convergence_stats(
    spec: &MeasureSpec,
    n_max: usize,
    trials: usize,
    seed: u64,
    workers: usize,
    o: &Vertex,
) -> Result<ConvergenceReport, DynamicsError> {
    let stabilization_times = run_trials(trials, workers, |t| {
        let walk = sample_walk_stream(spec, n_max, seed, t);
        let germs: Vec<Option<ResidueChamber>> = walk
            .products
            .iter()
            .map(|z| germ_at(o, z).ok().flatten())
            .collect();
        Ok(stabilization_time(&germs))
    })?;
    Ok(ConvergenceReport {
        n_max,
        trials,
        stabilization_times,
    })
}

/// germ_o(z·o), or `None` when the segment type is singular. The germ only
/// depends on the relative position up to GL₃(Z_p) on the right, so the
/// normal form of z·o is never needed.
fn germ_at(o: &Vertex, z: &Matrix) -> Result<Option<ResidueChamber>, DynamicsError> {
    let inv = o
        .basis()
        .inverse()
        .map_err(crate::building::BuildingError::from)?;
    let rel = &(&inv * z) * o.basis();
    match germ_flag_of_matrix(&rel, o.prime()) {
        Ok(g) => Ok(Some(g)),
        Err(crate::building::BuildingError::SingularSegment(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// germs[k] is the germ at step k + 1.
fn stabilization_time(germs: &[Option<ResidueChamber>]) -> Option<usize> {
    let last = (*germs.last()?)?;
    let mut n0 = germs.len();
    while n0 > 1 && germs[n0 - 2] == Some(last) {
        n0 -= 1;
    }
    Some(n0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OppositePairReport {
    pub n: usize,
    pub trials: usize,
    /// Pairs whose cylinder representatives at o are opposite flags.
    pub global_opposite: usize,
    /// Pairs whose germs at o are defined and opposite in the residue.
    pub germ_opposite: usize,
    pub display: OppositeDisplay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OppositeDisplay {
    pub global: FractionDisplay,
    pub germ: FractionDisplay,
}

/// Two independent walks of the same measure per trial.
pub fn opposite_pair_frequency(
    spec: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
    o: &Vertex,
) -> Result<OppositePairReport, DynamicsError> {
    opposite_pair_frequency_between(spec, spec, n, trials, seed, workers, o)
}

/// Walk A of trial t uses stream 2t, walk B stream 2t + 1.
pub fn opposite_pair_frequency_between(
    spec_a: &MeasureSpec,
    spec_b: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
    o: &Vertex,
) -> Result<OppositePairReport, DynamicsError> {
    let outcomes = run_trials(trials, workers, |t| {
        let za = sample_walk_stream(spec_a, n, seed, 2 * t).last();
        let zb = sample_walk_stream(spec_b, n, seed, 2 * t + 1).last();
        let (ya, yb) = (o.act(&za)?, o.act(&zb)?);
        let global = flags_opposite(
            &cylinder_representative(o, &ya)?,
            &cylinder_representative(o, &yb)?,
        );
        let germ = match (germ_at(o, &za)?, germ_at(o, &zb)?) {
            (Some(a), Some(b)) => residue_opposite(&a, &b),
            _ => false,
        };
        Ok((global, germ))
    })?;
    let global_opposite = outcomes.iter().filter(|o| o.0).count();
    let germ_opposite = outcomes.iter().filter(|o| o.1).count();
    Ok(OppositePairReport {
        n,
        trials,
        global_opposite,
        germ_opposite,
        display: OppositeDisplay {
            global: FractionDisplay::of(global_opposite, trials),
            germ: FractionDisplay::of(germ_opposite, trials),
        },
    })
}

/// Two strongly regular elements whose attracting and repelling flags are
/// pairwise opposite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrhPair {
    pub g1: GroupElement,
    pub g2: GroupElement,
    /// C₁⁺, C₁⁻, C₂⁺, C₂⁻.
    pub flags: [ChamberAtInfinity; 4],
    /// `None` when the flags of g_i are exact; otherwise they agree with the
    /// true eigen-flags modulo p^precision, and opposition is certified for
    /// the true flags.
    pub flag_precision: [Option<u32>; 2],
    /// Walk step at which the pair was completed; 0 for the support itself.
    pub step: usize,
}

#[derive(Clone)]
struct Candidate {
    g: GroupElement,
    flags: [ChamberAtInfinity; 2],
    precision: Option<u32>,
}

/// Exact eigen-flags when the characteristic polynomial splits over Q at the
/// given precision, p-adic ones otherwise.
fn candidate(g: &GroupElement, precision: u32) -> Result<Option<Candidate>, DynamicsError> {
    if !classify(g)?.strongly_regular {
        return Ok(None);
    }
    let f = char_poly(g.matrix());
    let splits = slope_factorize(&f, g.prime(), precision)
        .is_ok_and(|fs| fs.iter().all(|l| l.rationalize(&f, g.prime()).is_some()));
    if splits {
        if let (Ok(a), Ok(r)) = (attracting_flag(g, precision), repelling_flag(g, precision)) {
            return Ok(Some(Candidate {
                g: g.clone(),
                flags: [a, r],
                precision: None,
            }));
        }
    }
    match padic_eigen_flags(g, precision) {
        Ok([a, r]) => Ok(Some(Candidate {
            g: g.clone(),
            precision: Some(a.precision.min(r.precision)),
            flags: [a.flag, r.flag],
        })),
        Err(IsometryError::PrecisionExhausted(_)) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

/// All four flags pairwise opposite, exactly or p-adically certified.
fn independent(a: &Candidate, b: &Candidate) -> bool {
    let p = a.g.prime();
    let f = [
        (&a.flags[0], a.precision),
        (&a.flags[1], a.precision),
        (&b.flags[0], b.precision),
        (&b.flags[1], b.precision),
    ];
    let opposite = |(x, ex): (&ChamberAtInfinity, Option<u32>),
                    (y, ey): (&ChamberAtInfinity, Option<u32>)| {
        match ex.into_iter().chain(ey).min() {
            None => flags_opposite(x, y),
            Some(e) => padic_flags_opposite(
                &PadicFlag {
                    flag: x.clone(),
                    precision: e,
                },
                &PadicFlag {
                    flag: y.clone(),
                    precision: e,
                },
                p,
            ),
        }
    };
    (0..4).all(|i| (i + 1..4).all(|j| opposite(f[i], f[j])))
}

fn pair(a: &Candidate, b: &Candidate, step: usize) -> SrhPair {
    SrhPair {
        g1: a.g.clone(),
        g2: b.g.clone(),
        flags: [
            a.flags[0].clone(),
            a.flags[1].clone(),
            b.flags[0].clone(),
            b.flags[1].clone(),
        ],
        flag_precision: [a.precision, b.precision],
        step,
    }
}

/// Searches the support, then the walk Z_1, …, Z_budget and conjugates of
/// earlier finds by Z_k, for an independent strongly regular pair.
///
/// Walk elements rarely have rational eigenvalues; their flags are then lifted
/// p-adically and opposition is certified from valuations.
pub fn find_independent_srh_pair(
    spec: &MeasureSpec,
    seed: u64,
    budget: usize,
    precision: u32,
) -> Result<SrhPair, DynamicsError> {
    const CONJUGATED: usize = 4;
    let mut pool: Vec<Candidate> = Vec::new();
    let offer = |pool: &mut Vec<Candidate>, c: Candidate, step: usize| -> Option<SrhPair> {
        if let Some(found) = pool.iter().find(|d| independent(d, &c)) {
            return Some(pair(found, &c, step));
        }
        if !pool.iter().any(|d| d.g == c.g) {
            pool.push(c);
        }
        None
    };
    for (g, _) in spec.support() {
        if let Some(c) = candidate(g, precision)? {
            if let Some(found) = offer(&mut pool, c, 0) {
                return Ok(found);
            }
        }
    }
    let walk = sample_walk_stream(spec, budget, seed, 0);
    for (k, z) in walk.products.iter().enumerate() {
        let zg = GroupElement::new(z.clone(), spec.prime())?;
        if let Some(c) = candidate(&zg, precision)? {
            if let Some(found) = offer(&mut pool, c, k + 1) {
                return Ok(found);
            }
        }
        let zinv = zg.inverse();
        for i in 0..pool.len().min(CONJUGATED) {
            let d = pool[i].clone();
            let conj = zg.mul(&d.g).mul(&zinv);
            let moved = match d.precision {
                None => Some(Candidate {
                    g: conj,
                    flags: [d.flags[0].act(z)?, d.flags[1].act(z)?],
                    precision: None,
                }),
                Some(_) => candidate(&conj, precision)?,
            };
            if let Some(c) = moved {
                if let Some(found) = offer(&mut pool, c, k + 1) {
                    return Ok(found);
                }
            }
        }
    }
    Err(DynamicsError::BudgetExhausted(budget))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub n: usize,
    pub depth: i64,
    pub trials: usize,
    /// Cylinder key (normal form of the depth-k sector vertex) and count.
    pub bins: Vec<(String, usize)>,
    /// Total variation between the histogram and its one-step μ-convolution.
    pub stationarity_defect: String,
    pub display: BoundaryDisplay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryDisplay {
    pub stationarity_defect: f64,
    pub occupied_bins: usize,
}

fn cylinder_key(o: &Vertex, f: &ChamberAtInfinity, depth: i64) -> Result<String, DynamicsError> {
    if depth == 0 {
        return Ok("root".into());
    }
    let x = SectorBasis::new(o, f)?.point([0, depth, 2 * depth]);
    Ok(x.basis()
        .to_string_rows()
        .iter()
        .map(|r| r.join(" "))
        .collect::<Vec<_>>()
        .join(";"))
}

/// Histogram of the walk's boundary point over depth-k cylinders at o.
///
/// The sample of trial t is a chamber of U_o(Z_n·o); it lands in the cylinder
/// of the sector vertex at type (2k, k, 0) from o.
pub fn empirical_boundary_measure(
    spec: &MeasureSpec,
    n: usize,
    trials: usize,
    seed: u64,
    workers: usize,
    o: &Vertex,
    depth: i64,
) -> Result<BoundaryReport, DynamicsError> {
    if depth < 0 {
        return Err(DynamicsError::InvalidMeasure(
            "depth must be nonnegative".into(),
        ));
    }
    let per_trial = run_trials(trials, workers, |t| {
        let z = sample_walk_stream(spec, n, seed, t).last();
        let f = cylinder_representative(o, &o.act(&z)?)?;
        let own = cylinder_key(o, &f, depth)?;
        let pushed = spec
            .support()
            .iter()
            .map(|(g, _)| cylinder_key(o, &f.act(g.matrix())?, depth))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((own, pushed))
    })?;
    let t = Scalar::from_integer(trials.into());
    let mut hist: BTreeMap<String, Scalar> = BTreeMap::new();
    let mut conv: BTreeMap<String, Scalar> = BTreeMap::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for (own, pushed) in &per_trial {
        *counts.entry(own.clone()).or_default() += 1;
        *hist.entry(own.clone()).or_insert_with(Scalar::zero) +=
            Scalar::from_integer(1.into()) / &t;
        for (key, (_, w)) in pushed.iter().zip(spec.support()) {
            *conv.entry(key.clone()).or_insert_with(Scalar::zero) += w / &t;
        }
    }
    let keys: std::collections::BTreeSet<&String> = hist.keys().chain(conv.keys()).collect();
    let zero = Scalar::zero();
    let defect: Scalar = keys
        .into_iter()
        .map(|k| (hist.get(k).unwrap_or(&zero) - conv.get(k).unwrap_or(&zero)).abs())
        .sum::<Scalar>()
        / Scalar::from_integer(2.into());
    Ok(BoundaryReport {
        n,
        depth,
        trials,
        display: BoundaryDisplay {
            stationarity_defect: defect.to_f64().unwrap_or(f64::NAN),
            occupied_bins: counts.len(),
        },
        bins: counts.into_iter().collect(),
        stationarity_defect: scalar_to_string(&defect),
    })
}
