//! Random walks on finitely supported measures and their Monte Carlo statistics.
//!
//! Every trial draws from its own ChaCha stream derived from (seed, trial), and
//! trial results are collected in trial order, so outputs do not depend on the
//! number of worker threads.

mod stats;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{scalar_to_string, Matrix, Prime, Scalar};
use crate::building::BuildingError;
use crate::isometry::{GroupElement, IsometryError};

pub use stats::{
    combinatorial_convergence_stats, drift_estimate, empirical_boundary_measure,
    find_independent_srh_pair, opposite_pair_frequency, opposite_pair_frequency_between,
    srh_proportion_curve, wilson_interval, BoundaryReport, ConvergenceReport, DriftReport,
    OppositePairReport, ProportionCurve, ProportionRow, SrhPair,
};

/// Walks longer than this are allowed but slow: entry heights grow linearly.
pub const SOFT_STEP_CAP: usize = 300;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DynamicsError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("no independent strongly regular pair within budget {0}")]
    BudgetExhausted(usize),
    #[error("invalid worker count {0}")]
    Workers(usize),
    #[error(transparent)]
    Isometry(#[from] IsometryError),
    #[error(transparent)]
    Building(#[from] BuildingError),
}

/// A finitely supported probability measure on the group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasureSpec {
    support: Vec<(GroupElement, Scalar)>,
    prime: Prime,
    /// Integer weights over a common denominator, for sampling.
    cumulative: Vec<u64>,
    denominator: u64,
}

impl MeasureSpec {
    /// Checks positivity, normalization, type preservation and symmetry.
    pub fn new(support: Vec<(GroupElement, Scalar)>) -> Result<Self, DynamicsError> {
        let spec = MeasureSpec::unchecked_symmetry(support)?;
        for (g, w) in &spec.support {
            let inv = g.inverse();
            let paired = spec
                .support
                .iter()
                .any(|(h, v)| h.matrix() == inv.matrix() && v == w);
            if !paired {
                return Err(DynamicsError::InvalidMeasure(format!(
                    "support is not symmetric: the inverse of {} is missing or has a different weight",
                    g.matrix()
                )));
            }
        }
        Ok(spec)
    }

    /// Test mode: same checks as `new` except symmetry, so forced walks are possible.
    pub fn degenerate(support: Vec<(GroupElement, Scalar)>) -> Result<Self, DynamicsError> {
        MeasureSpec::unchecked_symmetry(support)
    }

    fn unchecked_symmetry(support: Vec<(GroupElement, Scalar)>) -> Result<Self, DynamicsError> {
        let invalid = |m: &str| Err(DynamicsError::InvalidMeasure(m.into()));
        let Some((first, _)) = support.first() else {
            return invalid("empty support");
        };
        let prime = first.prime();
        if support.iter().any(|(g, _)| g.prime() != prime) {
            return invalid("support elements over different primes");
        }
        if support.iter().any(|(_, w)| *w <= Scalar::zero()) {
            return invalid("weights must be positive");
        }
        if support.iter().map(|(_, w)| w).sum::<Scalar>() != Scalar::one() {
            return invalid("weights must sum to 1");
        }
        if let Some((g, _)) = support.iter().find(|(g, _)| !g.is_type_preserving()) {
            return Err(DynamicsError::InvalidMeasure(format!(
                "element {} is not type-preserving",
                g.matrix()
            )));
        }
        if support.iter().all(|(g, _)| g.matrix().is_scalar()) {
            return invalid("support acts trivially on the building and does not generate");
        }
        let denom = support
            .iter()
            .fold(BigInt::one(), |acc, (_, w)| acc.lcm(w.denom()));
        let denominator = denom
            .to_u64()
            .ok_or_else(|| DynamicsError::InvalidMeasure("weight denominators too large".into()))?;
        let mut cumulative = Vec::with_capacity(support.len());
        let mut acc = 0u64;
        for (_, w) in &support {
            acc += (w * Scalar::from_integer(denom.clone()))
                .to_integer()
                .to_u64()
                .expect("bounded by denominator");
            cumulative.push(acc);
        }
        Ok(MeasureSpec {
            support,
            prime,
            cumulative,
            denominator,
        })
    }

    /// Uniform weights on `elements`.
    pub fn uniform(elements: Vec<GroupElement>) -> Result<Self, DynamicsError> {
        let w = Scalar::new(BigInt::one(), BigInt::from(elements.len()));
        MeasureSpec::new(elements.into_iter().map(|g| (g, w.clone())).collect())
    }

    /// Uniform measure on the elementary matrices E_ij(±1), E_ij(±1/p), i ≠ j,
    /// a symmetric generating set of SL₃(Z[1/p]).
    pub fn sl3_elementary(p: Prime) -> Self {
        let mut elements = Vec::new();
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    continue;
                }
                for c in [Scalar::one(), -Scalar::one(), p.pow(-1), -p.pow(-1)] {
                    let mut m = Matrix::identity(3);
                    m[(i, j)] = c;
                    elements.push(GroupElement::new(m, p).expect("unipotent"));
                }
            }
        }
        MeasureSpec::uniform(elements).expect("elementary generators are symmetric")
    }

    pub fn prime(&self) -> Prime {
        self.prime
    }

    pub fn support(&self) -> &[(GroupElement, Scalar)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.support[i].0
    }

    /// Draws a support index according to the weights.
    pub fn draw(&self, rng: &mut ChaCha8Rng) -> usize {
        let u = rng.random_range(0..self.denominator);
        self.cumulative.partition_point(|&c| c <= u)
    }

    /// Weights as strings, for reports.
    pub fn weight_strings(&self) -> Vec<String> {
        self.support
            .iter()
            .map(|(_, w)| scalar_to_string(w))
            .collect()
    }
}

/// The generator for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A sampled trajectory: Z_k = Z_(k−1)·g_k with Z_0 = 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkSample {
    pub increments: Vec<usize>,
    /// Z_1, …, Z_n.
    pub products: Vec<Matrix>,
    pub seed: u64,
    pub stream: u64,
    pub n: usize,
}

impl WalkSample {
    /// Z_n, or the identity for n = 0.
    pub fn last(&self) -> Matrix {
        self.products
            .last()
            .cloned()
            .unwrap_or_else(|| Matrix::identity(3))
    }

    /// Z_k for 0 ≤ k ≤ n.
    pub fn at(&self, k: usize) -> Matrix {
        if k == 0 {
            Matrix::identity(3)
        } else {
            self.products[k - 1].clone()
        }
    }
}

/// The walk for stream 0 of `seed`.
pub fn sample_walk(spec: &MeasureSpec, n: usize, seed: u64) -> WalkSample {
    sample_walk_stream(spec, n, seed, 0)
}

pub fn sample_walk_stream(spec: &MeasureSpec, n: usize, seed: u64, stream: u64) -> WalkSample {
    let mut rng = trial_rng(seed, stream);
    let mut z = Matrix::identity(3);
    let mut increments = Vec::with_capacity(n);
    let mut products = Vec::with_capacity(n);
    for _ in 0..n {
        let i = spec.draw(&mut rng);
        z = &z * spec.element(i).matrix();
        increments.push(i);
        products.push(z.clone());
    }
    WalkSample {
        increments,
        products,
        seed,
        stream,
        n,
    }
}

/// Runs `f(trial)` for every trial on a pool of `workers` threads, in trial order.
pub(crate) fn run_trials<T, F>(trials: usize, workers: usize, f: F) -> Result<Vec<T>, DynamicsError>
where
    T: Send,
    F: Fn(u64) -> Result<T, DynamicsError> + Sync + Send,
{
    if workers == 0 {
        return Err(DynamicsError::Workers(workers));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|_| DynamicsError::Workers(workers))?;
    pool.install(|| (0..trials as u64).into_par_iter().map(&f).collect())
}
