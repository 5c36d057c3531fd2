//! Free-subgroup certificates: margins plus an exhaustive reduced-word check.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::pingpong::{check_independent, frames, margin_report, MarginReport};
use super::TitsError;
use crate::arith::{Matrix, Prime};
use crate::building::{vector_distance, Vertex};
use crate::isometry::GroupElement;

const LETTERS: [&str; 4] = ["a", "A", "b", "B"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Margins certified and no reduced word up to the depth is trivial.
    Pass,
    /// Words are nontrivial but the margins could not be certified.
    Inconclusive,
}

/// A cylinder U_o(y) by its apex and direction vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderRecord {
    pub label: String,
    pub basepoint: Vertex,
    pub direction: Vertex,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordCheck {
    pub depth: usize,
    /// Reduced words of length 1..=depth.
    pub words_checked: u64,
    /// Reduced words of length exactly `depth`.
    pub words_at_depth: u64,
    /// Words whose prefix chain has non-increasing |θ(o, w·o)|².
    pub displacement_non_monotone: u64,
    /// Largest |θ(o, w·o)|² over words of length `depth`, exactly.
    pub max_squared_displacement: String,
    pub min_squared_displacement_at_depth: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PingPongCertificate {
    pub prime: Prime,
    pub g1: Matrix,
    pub g2: Matrix,
    pub power: u64,
    pub margin: i64,
    pub precision: u32,
    pub cylinders: Vec<CylinderRecord>,
    /// `None` when the margin calculus failed; the reason is in `margin_failure`.
    pub margins: Option<MarginReport>,
    pub margin_failure: Option<String>,
    pub margins_certified: bool,
    pub word_check: WordCheck,
    pub verdict: Verdict,
    /// What a pass does and does not prove.
    pub note: String,
}

const NOTE: &str =
    "pass means the four cylinders are pairwise disjoint and each generator power maps \
the three admissible cylinders into its own, which proves freeness by ping-pong; the word check is \
an independent necessary condition";

/// Builds the certificate for a = g1^N, b = g2^N.
pub fn free_group_certificate(
    g1: &GroupElement,
    g2: &GroupElement,
    power: u64,
    depth: usize,
    margin: i64,
    precision: u32,
) -> Result<PingPongCertificate, TitsError> {
    if g1.prime() != g2.prime() {
        return Err(TitsError::NotIndependent(
            "elements over different primes".into(),
        ));
    }
    if power == 0 {
        return Err(TitsError::MarginInfeasible("power must be positive".into()));
    }
    let a = g1.pow(power as i64);
    let b = g2.pow(power as i64);
    let word_check = check_words(&a, &b, depth)?;

    let margins = check_independent(g1, g2, precision)
        .and_then(|_| frames(g1, g2, precision))
        .and_then(|fr| Ok((margin_report(&fr, margin)?, fr)));
    let (margins, margin_failure, cylinders) = match margins {
        Ok((report, fr)) => {
            let cyl = fr
                .iter()
                .map(|f| CylinderRecord {
                    label: f.label.into(),
                    basepoint: f.apex(),
                    direction: f.direction(margin),
                })
                .collect();
            (Some(report), None, cyl)
        }
        Err(e) => (None, Some(e.to_string()), Vec::new()),
    };
    let margins_certified = margins.as_ref().is_some_and(|r| power >= r.minimal_power);
    Ok(PingPongCertificate {
        prime: g1.prime(),
        g1: g1.matrix().clone(),
        g2: g2.matrix().clone(),
        power,
        margin,
        precision,
        cylinders,
        margins,
        margin_failure,
        margins_certified,
        word_check,
        verdict: if margins_certified {
            Verdict::Pass
        } else {
            Verdict::Inconclusive
        },
        note: NOTE.into(),
    })
}

/// Depth-first enumeration of reduced words with exact products.
fn check_words(a: &GroupElement, b: &GroupElement, depth: usize) -> Result<WordCheck, TitsError> {
    let p = a.prime();
    let gens = [
        a.matrix().clone(),
        a.inverse().matrix().clone(),
        b.matrix().clone(),
        b.inverse().matrix().clone(),
    ];
    let o = Vertex::standard(p);
    let mut check = WordCheck {
        depth,
        words_checked: 0,
        words_at_depth: 0,
        displacement_non_monotone: 0,
        max_squared_displacement: String::new(),
        min_squared_displacement_at_depth: String::new(),
    };
    let mut max_at_depth = Rational64::from(0);
    let mut min_at_depth: Option<Rational64> = None;
    // (word, product, |θ|² of the product, chain still increasing)
    let mut stack: Vec<(Vec<usize>, Matrix, Rational64, bool)> =
        vec![(Vec::new(), Matrix::identity(3), Rational64::from(0), true)];
    while let Some((word, prod, disp, increasing)) = stack.pop() {
        if word.len() == depth {
            continue;
        }
        for letter in (0..4).rev() {
            if word.last().is_some_and(|&l| l ^ 1 == letter) {
                continue;
            }
            let next = &prod * &gens[letter];
            let mut w = word.clone();
            w.push(letter);
            if next.is_identity() {
                return Err(TitsError::WordCollision(
                    w.iter().map(|&l| LETTERS[l]).collect(),
                ));
            }
            let d = vector_distance(&o, &o.act(&next)?)?.pgl.squared_norm();
            let still = increasing && d > disp;
            check.words_checked += 1;
            if w.len() == depth {
                check.words_at_depth += 1;
                if !still {
                    check.displacement_non_monotone += 1;
                }
                max_at_depth = max_at_depth.max(d);
                min_at_depth = Some(min_at_depth.map_or(d, |m| m.min(d)));
            }
            stack.push((w, next, d, still));
        }
    }
    check.max_squared_displacement = max_at_depth.to_string();
    check.min_squared_displacement_at_depth = min_at_depth.unwrap_or_default().to_string();
    Ok(check)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "reason", rename_all = "lowercase")]
pub enum VerifyOutcome {
    Pass,
    Inconclusive,
    Refuted(String),
}

/// Recomputes a certificate from its inputs and compares every field.
pub fn verify_certificate(cert: &PingPongCertificate) -> VerifyOutcome {
    let rebuild = GroupElement::new(cert.g1.clone(), cert.prime)
        .and_then(|g1| Ok((g1, GroupElement::new(cert.g2.clone(), cert.prime)?)));
    let (g1, g2) = match rebuild {
        Ok(pair) => pair,
        Err(e) => return VerifyOutcome::Refuted(format!("generators invalid: {e}")),
    };
    let fresh = match free_group_certificate(
        &g1,
        &g2,
        cert.power,
        cert.word_check.depth,
        cert.margin,
        cert.precision,
    ) {
        Ok(c) => c,
        Err(e) => return VerifyOutcome::Refuted(e.to_string()),
    };
    if fresh != *cert {
        return VerifyOutcome::Refuted(
            "recomputed certificate differs from the recorded one".into(),
        );
    }
    match fresh.verdict {
        Verdict::Pass => VerifyOutcome::Pass,
        Verdict::Inconclusive => VerifyOutcome::Inconclusive,
    }
}
