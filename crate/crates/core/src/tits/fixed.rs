//! Local-to-global fixed points and translation lengths on panel trees.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::TitsError;
use crate::building::{
    induced_tree_action, tree_distance, vector_distance, TreeVertex, Vertex, VertexAtInfinity,
};
use crate::coxeter::A2Vector;
use crate::isometry::{classify, GroupElement, IsometryClass, IsometryKind};

/// Guard on the number of vertices visited by the fixed-point search.
pub const MAX_SEARCHED_VERTICES: usize = 50_000;

/// max(0, d(x, g²x) − d(x, gx)) on the panel tree of v.
pub fn tree_translation_length(
    g: &GroupElement,
    v: &VertexAtInfinity,
    x: &TreeVertex,
) -> Result<u64, TitsError> {
    let h = induced_tree_action(v, g.matrix())?;
    let hx = x.act(&h)?;
    let h2x = hx.act(&h)?;
    let d1 = tree_distance(x, &hx)?;
    let d2 = tree_distance(x, &h2x)?;
    Ok(d2.saturating_sub(d1))
}

/// A word in the generators: (generator index, exponent ±1) letters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word(pub Vec<(usize, i8)>);

impl Word {
    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|&(i, e)| {
                if e > 0 {
                    format!("g{}", i + 1)
                } else {
                    format!("g{}^-1", i + 1)
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }

    fn evaluate(&self, gens: &[GroupElement], inverses: &[GroupElement]) -> GroupElement {
        let mut acc = GroupElement::new(crate::arith::Matrix::identity(3), gens[0].prime())
            .expect("identity");
        for &(i, e) in &self.0 {
            acc = acc.mul(if e > 0 { &gens[i] } else { &inverses[i] });
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FixedPointVerdict {
    /// A vertex fixed by every generator, at graph distance `distance` from the basepoint.
    FixedVertex { vertex: Vertex, distance: usize },
    /// A hyperbolic element of the group.
    HyperbolicWitness { word: String, class: IsometryClass },
    /// Every tested word elliptic and no fixed vertex within the radius.
    Inconclusive {
        vertices_searched: usize,
        displacement: Vec<A2Vector>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub classes: Vec<IsometryClass>,
    pub word_depth: usize,
    pub search_radius: usize,
    pub result: FixedPointVerdict,
}

/// Tries, in order: a hyperbolic generator, a hyperbolic reduced word up to
/// `word_depth` in shortlex order, then a vertex within graph distance
/// `radius` of `o` fixed by all generators. The default radius is the largest
/// graph displacement of a generator at o.
pub fn local_global_fixed_point(
    generators: &[GroupElement],
    radius: Option<usize>,
    word_depth: usize,
    o: &Vertex,
) -> Result<FixedPointReport, TitsError> {
    if generators.is_empty() {
        return Err(TitsError::NotIndependent("no generators".into()));
    }
    let classes = generators
        .iter()
        .map(classify)
        .collect::<Result<Vec<_>, _>>()?;
    let displacement: Vec<A2Vector> = generators
        .iter()
        .map(|g| Ok(vector_distance(o, &g.act(o))?.pgl))
        .collect::<Result<_, TitsError>>()?;
    let search_radius = radius.unwrap_or_else(|| {
        displacement
            .iter()
            .map(|d| d.to_ints().map_or(0, |c| c[0] as usize))
            .max()
            .unwrap_or(0)
    });
    let report = |result| FixedPointReport {
        classes: classes.clone(),
        word_depth,
        search_radius,
        result,
    };

    if let Some(i) = classes
        .iter()
        .position(|c| c.kind == IsometryKind::Hyperbolic)
    {
        let word = Word(vec![(i, 1)]).render();
        return Ok(report(FixedPointVerdict::HyperbolicWitness {
            word,
            class: classes[i].clone(),
        }));
    }
    let inverses: Vec<GroupElement> = generators.iter().map(GroupElement::inverse).collect();
    for len in 2..=word_depth {
        for word in reduced_words(generators.len(), len) {
            let class = classify(&word.evaluate(generators, &inverses))?;
            if class.kind == IsometryKind::Hyperbolic {
                return Ok(report(FixedPointVerdict::HyperbolicWitness {
                    word: word.render(),
                    class,
                }));
            }
        }
    }

    let mut seen: HashSet<Vertex> = HashSet::from([o.clone()]);
    let mut queue = VecDeque::from([(o.clone(), 0usize)]);
    while let Some((x, d)) = queue.pop_front() {
        if generators.iter().all(|g| g.act(&x) == x) {
            return Ok(report(FixedPointVerdict::FixedVertex {
                vertex: x,
                distance: d,
            }));
        }
        if d == search_radius || seen.len() >= MAX_SEARCHED_VERTICES {
            continue;
        }
        for y in x.neighbors() {
            if seen.insert(y.clone()) {
                queue.push_back((y, d + 1));
            }
        }
    }
    Ok(report(FixedPointVerdict::Inconclusive {
        vertices_searched: seen.len(),
        displacement,
    }))
}

/// Reduced words of length `len` over g_i^±1, in shortlex order
/// (g1 < g1⁻¹ < g2 < …).
fn reduced_words(k: usize, len: usize) -> Vec<Word> {
    let letters: Vec<(usize, i8)> = (0..k).flat_map(|i| [(i, 1), (i, -1)]).collect();
    let mut words = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::new();
        for w in &words {
            for &l in &letters {
                if w.last()
                    .is_some_and(|&(i, e): &(usize, i8)| i == l.0 && e == -l.1)
                {
                    continue;
                }
                let mut w2: Vec<(usize, i8)> = w.clone();
                w2.push(l);
                next.push(w2);
            }
        }
        words = next;
    }
    words.into_iter().map(Word).collect()
}
