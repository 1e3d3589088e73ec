//! Greedy lower bound for the supremum of the sparse form.

use std::cmp::Ordering;
use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::check::{check_sparse, SparseOutcome, Witness};
use crate::dyadic::{bucket_counts, rect_from_key, DyadicRect, FamilyKind, IndexKey, Window, MAX_DIM};
use crate::error::Result;
use crate::flow::Cap;
use crate::measure::PointMassMeasure;

/// Candidates considered by the greedy pass, heaviest first.
pub const GREEDY_POOL: usize = 64;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct GreedyResult {
    pub rects: Vec<DyadicRect>,
    pub value: f64,
    /// Rectangles in the window holding points of both measures.
    pub candidates: u64,
    pub pool: usize,
    pub truncated: bool,
    pub witness: Witness,
}

struct Scored {
    weight: f64,
    levels: [i32; MAX_DIM],
    key: IndexKey,
}

/// Adds candidates in order of decreasing `⟨μ⟩_{R,r}⟨ν⟩_{R,s}|R|` while the
/// collection stays η-sparse. Candidates come from the level window.
pub fn greedy_extremal(
    mu: &PointMassMeasure,
    nu: &PointMassMeasure,
    family: FamilyKind,
    window: &Window,
    r: f64,
    s: f64,
    eta: Cap,
) -> Result<GreedyResult> {
    let dim = mu.dim();
    let tuples = family.level_tuples(dim, window)?;
    let norm = mu.len() as f64 * nu.len() as f64;
    let sigma = 1.0 / r + 1.0 / s;
    let per_tuple: Vec<(u64, Vec<Scored>)> = tuples
        .par_iter()
        .map(|t| {
            let cm = bucket_counts(mu.support(), t);
            let cn: HashMap<_, _> = bucket_counts(nu.support(), t);
            let log_measure = -t[..dim].iter().sum::<i32>() as f64;
            let mut out = Vec::new();
            for (k, &a) in &cm {
                if let Some(&b) = cn.get(k) {
                    let weight = (a as f64).powf(1.0 / r) * (b as f64).powf(1.0 / s) / norm
                        * (log_measure * (1.0 - sigma)).exp2();
                    out.push(Scored { weight, levels: *t, key: *k });
                }
            }
            (out.len() as u64, out)
        })
        .collect();
    let candidates = per_tuple.iter().map(|(n, _)| n).sum();
    let mut all: Vec<Scored> = per_tuple.into_iter().flat_map(|(_, v)| v).collect();
    all.sort_by(|a, b| {
        b.weight
            .partial_cmp(&a.weight)
            .unwrap_or(Ordering::Equal)
            .then(a.levels.cmp(&b.levels))
            .then(a.key.cmp(&b.key))
    });
    let truncated = all.len() > GREEDY_POOL;
    all.truncate(GREEDY_POOL);

    let mut rects = Vec::new();
    let mut value = 0.0;
    let mut witness = Witness { sets: Vec::new() };
    for c in &all {
        rects.push(rect_from_key(family, dim, &c.levels, &c.key));
        match check_sparse(&rects, eta)? {
            SparseOutcome::Feasible(w) => {
                value += c.weight;
                witness = w;
            }
            SparseOutcome::Infeasible(_) => {
                rects.pop();
            }
        }
    }
    Ok(GreedyResult {
        rects,
        value,
        candidates,
        pool: all.len(),
        truncated,
        witness,
    })
}
