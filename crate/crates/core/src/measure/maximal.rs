use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PointMassMeasure;
use crate::dyadic::{
    bucket_counts, index_key, DyadicRational, DyadicRect, FamilyKind, IndexKey, Point, Window,
    MAX_DIM,
};
use crate::error::{DslError, Result};

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MaximalValue {
    Finite {
        value: f64,
        /// An extremal rectangle.
        rect: DyadicRect,
        count: u32,
    },
    /// The supremum diverges: `witness` is at family distance 0.
    Infinite { witness: Point },
}

impl MaximalValue {
    pub fn value(&self) -> f64 {
        match self {
            MaximalValue::Finite { value, .. } => *value,
            MaximalValue::Infinite { .. } => f64::INFINITY,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, MaximalValue::Infinite { .. })
    }
}

/// Support points at family distance 0 from a query point, found through
/// coordinate projections instead of a full scan.
struct ZeroDistanceIndex {
    keys: Vec<HashMap<Vec<DyadicRational>, usize>>,
    projections: Vec<Vec<usize>>,
}

impl ZeroDistanceIndex {
    fn new(support: &[Point], family: FamilyKind, dim: usize) -> Self {
        // Distance 0 means every factor of the family's size vanishes: some
        // axis subset in the list below where all coordinates agree.
        let projections: Vec<Vec<usize>> = match family {
            FamilyKind::Cube => vec![(0..dim).collect()],
            FamilyKind::Full => (0..dim).map(|a| vec![a]).collect(),
            FamilyKind::Zygmund => vec![vec![0, 2], vec![1, 2]],
            FamilyKind::Flag => vec![vec![0]],
        };
        let keys = projections
            .iter()
            .map(|axes| {
                let mut m = HashMap::new();
                for (i, p) in support.iter().enumerate() {
                    m.entry(axes.iter().map(|&a| p.coord(a)).collect()).or_insert(i);
                }
                m
            })
            .collect();
        ZeroDistanceIndex { keys, projections }
    }

    fn find(&self, z: &Point) -> Option<usize> {
        self.projections.iter().zip(&self.keys).find_map(|(axes, m)| {
            let key: Vec<_> = axes.iter().map(|&a| z.coord(a)).collect();
            m.get(&key).copied()
        })
    }
}

/// Evaluates `𝓜μ` for one measure at many points. Range counts are bucketed
/// once per level tuple of the window.
pub struct MaximalEvaluator<'a> {
    mu: &'a PointMassMeasure,
    family: FamilyKind,
    dim: usize,
    tuples: Vec<[i32; MAX_DIM]>,
    interior: Vec<bool>,
    buckets: Vec<HashMap<IndexKey, u32>>,
    zero: ZeroDistanceIndex,
}

impl<'a> MaximalEvaluator<'a> {
    pub fn new(mu: &'a PointMassMeasure, family: FamilyKind, window: &Window) -> Result<Self> {
        let dim = mu.dim();
        window.validate()?;
        let tuples = family.level_tuples(dim, window)?;
        let free = if family == FamilyKind::Zygmund { 2 } else { dim };
        let interior = tuples
            .iter()
            .map(|t| t[..free].iter().all(|&l| l > window.coarse && l < window.fine))
            .collect();
        let buckets = tuples.par_iter().map(|t| bucket_counts(mu.support(), t)).collect();
        Ok(MaximalEvaluator {
            mu,
            family,
            dim,
            tuples,
            interior,
            buckets,
            zero: ZeroDistanceIndex::new(mu.support(), family, dim),
        })
    }

    pub fn tuples_scanned(&self) -> usize {
        self.tuples.len()
    }

    pub fn eval(&self, z: &Point) -> Result<MaximalValue> {
        if z.dim() != self.dim {
            return Err(DslError::DimensionMismatch { expected: self.dim, got: z.dim() });
        }
        if let Some(i) = self.zero.find(z) {
            return Ok(MaximalValue::Infinite { witness: self.mu.support()[i] });
        }
        // count · 2^(level sum) is exact in f64 for the sizes in play.
        let mut best: Option<(f64, usize, u32)> = None;
        let mut best_interior: Option<f64> = None;
        for (i, t) in self.tuples.iter().enumerate() {
            let count = self.buckets[i].get(&index_key(z, t)).copied().unwrap_or(0);
            let score = count as f64 * (t[..self.dim].iter().sum::<i32>() as f64).exp2();
            if best.is_none_or(|b| score > b.0) {
                best = Some((score, i, count));
            }
            if self.interior[i] && best_interior.is_none_or(|b| score > b) {
                best_interior = Some(score);
            }
        }
        let (score, i, count) = best.expect("window has at least one level tuple");
        if let Some(inner) = best_interior {
            if score > inner {
                return Err(DslError::WindowTooNarrow(format!(
                    "maximum at levels {:?} for {z}",
                    &self.tuples[i][..self.dim]
                )));
            }
        }
        Ok(MaximalValue::Finite {
            value: score * self.mu.weight(),
            rect: DyadicRect::containing(self.family, z, &self.tuples[i][..self.dim]),
            count,
        })
    }
}

/// `𝓜μ(z)` over the family rectangles of the window.
pub fn maximal_at(mu: &PointMassMeasure, z: &Point, family: FamilyKind, window: &Window) -> Result<MaximalValue> {
    MaximalEvaluator::new(mu, family, window)?.eval(z)
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct MaximalPairing {
    /// `⟨𝓜μ, ν⟩`.
    pub value: f64,
    /// Smallest `𝓜μ(z)` over the support of `ν`, and where.
    pub min_value: f64,
    pub argmin: Point,
    pub rects_scanned: u64,
}

/// `⟨𝓜μ, ν⟩ = (1/#supp ν) Σ_z 𝓜μ(z)`.
pub fn maximal_pairing(
    mu: &PointMassMeasure,
    nu: &PointMassMeasure,
    family: FamilyKind,
    window: &Window,
) -> Result<MaximalPairing> {
    let eval = MaximalEvaluator::new(mu, family, window)?;
    let values: Vec<(Point, f64)> = nu
        .support()
        .par_iter()
        .map(|z| match eval.eval(z)? {
            MaximalValue::Infinite { witness } => Err(DslError::Divergent {
                z: z.to_string(),
                p: witness.to_string(),
            }),
            v => Ok((*z, v.value())),
        })
        .collect::<Result<_>>()?;
    let (argmin, min_value) = values
        .iter()
        .copied()
        .fold((values[0].0, f64::INFINITY), |acc, (z, v)| if v < acc.1 { (z, v) } else { acc });
    let sum: f64 = values.iter().map(|(_, v)| v).sum();
    Ok(MaximalPairing {
        value: sum * nu.weight(),
        min_value,
        argmin,
        rects_scanned: (eval.tuples_scanned() * nu.len()) as u64,
    })
}
