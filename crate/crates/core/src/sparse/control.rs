//! Stopping-interval sparse domination on the line, where it does hold.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::check::{check_sparse, SparseOutcome, Witness};
use crate::dyadic::{DyadicInterval, DyadicRational, DyadicRect, FamilyKind};
use crate::error::{DslError, Result};
use crate::flow::Cap;
use crate::measure::GridFunction;

/// Largest allowed pointwise constant.
const CONTROL_CONSTANT: f64 = 4.0;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ControlResult {
    /// `None` for the zero function.
    pub root: Option<DyadicInterval>,
    pub cubes: Vec<DyadicRect>,
    pub averages: Vec<f64>,
    /// `max_x M_d f(x) / Σ_{Q ∋ x} ⟨f⟩_Q` over the cells of the root.
    pub constant: f64,
    pub cells_checked: u64,
    pub dominated: bool,
    pub witness: Witness,
}

struct Prefix {
    index: Vec<i64>,
    sums: Vec<DyadicRational>,
}

impl Prefix {
    fn new(f: &GridFunction) -> Self {
        let mut index = Vec::new();
        let mut sums = vec![DyadicRational::ZERO];
        for (k, v) in &f.cells {
            if !v.is_zero() {
                index.push(k[0]);
                sums.push(*sums.last().unwrap() + *v);
            }
        }
        Prefix { index, sums }
    }

    /// Sum of the cell numerators with index in `[lo, hi)`.
    fn sum(&self, lo: i64, hi: i64) -> DyadicRational {
        let a = self.index.partition_point(|&i| i < lo);
        let b = self.index.partition_point(|&i| i < hi);
        self.sums[b] - self.sums[a]
    }
}

/// Deepest root handled, in levels above the grid.
const MAX_DEPTH: i32 = 24;

/// Builds the stopping intervals of a one-dimensional grid function: a
/// dyadic subinterval stops once its average exceeds twice the average of
/// the stopping interval above it. The result is 1/2-sparse, and every cell
/// of the root is checked: the dyadic maximal function there is at most
/// `4 Σ_{Q ∋ x} ⟨f⟩_Q`.
pub fn cz_sparse_dominate_1param(f: &GridFunction) -> Result<ControlResult> {
    if f.dim != 1 {
        return Err(DslError::DimensionMismatch { expected: 1, got: f.dim });
    }
    let g = f.level;
    let pre = Prefix::new(f);
    let (Some(&first), Some(&last)) = (pre.index.first(), pre.index.last()) else {
        return Ok(ControlResult {
            root: None,
            cubes: Vec::new(),
            averages: Vec::new(),
            constant: 0.0,
            cells_checked: 0,
            dominated: true,
            witness: Witness { sets: Vec::new() },
        });
    };
    let mut level = g;
    while first >> (g - level) != last >> (g - level) {
        level -= 1;
        if g - level > MAX_DEPTH {
            return Err(DslError::Degenerate("support is not inside one dyadic interval".into()));
        }
    }
    if (first < 0) != (last < 0) {
        return Err(DslError::Degenerate("support is not inside one dyadic interval".into()));
    }
    let root = DyadicInterval::new(level, first >> (g - level));

    let cell_range = |iv: &DyadicInterval| {
        let shift = g - iv.level;
        (iv.index << shift, (iv.index + 1) << shift)
    };
    // Averages up to the common factor 2^-g / denominator.
    let avg = |iv: &DyadicInterval| {
        let (lo, hi) = cell_range(iv);
        pre.sum(lo, hi) * DyadicRational::pow2(iv.level - g)
    };
    let two = DyadicRational::from_int(2);
    let mut stopping: Vec<(DyadicInterval, DyadicRational)> = vec![(root, avg(&root))];
    let mut next = 0;
    while next < stopping.len() {
        let (q, a) = stopping[next];
        next += 1;
        let mut stack = vec![q];
        while let Some(iv) = stack.pop() {
            if iv.level == g {
                continue;
            }
            for c in [DyadicInterval::new(iv.level + 1, 2 * iv.index), DyadicInterval::new(iv.level + 1, 2 * iv.index + 1)] {
                let (lo, hi) = cell_range(&c);
                if pre.sum(lo, hi).is_zero() {
                    continue;
                }
                let ac = avg(&c);
                if ac > two * a {
                    stopping.push((c, ac));
                } else {
                    stack.push(c);
                }
            }
        }
    }
    stopping.sort();

    let by_iv: HashMap<DyadicInterval, DyadicRational> = stopping.iter().copied().collect();
    let mut constant: f64 = 0.0;
    let (lo, hi) = cell_range(&root);
    for cell in lo..hi {
        let mut sparse = DyadicRational::ZERO;
        let mut maximal = DyadicRational::ZERO;
        for l in level..=g {
            let iv = DyadicInterval::new(l, cell >> (g - l));
            maximal = maximal.max(avg(&iv));
            if let Some(a) = by_iv.get(&iv) {
                sparse = sparse + *a;
            }
        }
        constant = constant.max(maximal.to_f64() / sparse.to_f64());
    }
    let scale = 1.0 / f.denominator as f64;
    let cubes: Vec<DyadicRect> = stopping
        .iter()
        .map(|(iv, _)| DyadicRect::new(FamilyKind::Cube, &[*iv]))
        .collect::<Result<_>>()?;
    let witness = match check_sparse(&cubes, Cap::new(1, 2))? {
        SparseOutcome::Feasible(w) => w,
        SparseOutcome::Infeasible(_) => return Err(DslError::Uncertified("stopping intervals are not 1/2-sparse".into())),
    };
    Ok(ControlResult {
        root: Some(root),
        cells_checked: (hi - lo) as u64,
        averages: stopping.iter().map(|(_, a)| a.to_f64() * scale).collect(),
        cubes,
        constant,
        dominated: constant <= CONTROL_CONSTANT,
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Point;
    use crate::measure::{mollify, PointMassMeasure};

    fn grid(points: &[(i128, u32)], g: i32) -> GridFunction {
        let pts: Vec<Point> = points.iter().map(|&(n, e)| Point::new(&[DyadicRational::new(n, e)]).unwrap()).collect();
        mollify(&PointMassMeasure::new(&pts).unwrap(), g).unwrap()
    }

    #[test]
    fn clustered_atoms() {
        let f = grid(&[(1, 6), (3, 6), (5, 6), (40, 6), (63, 6)], 6);
        let c = cz_sparse_dominate_1param(&f).unwrap();
        assert_eq!(c.root, Some(DyadicInterval::new(0, 0)));
        assert_eq!(c.cells_checked, 64);
        assert!(c.dominated, "{}", c.constant);
        assert!(c.constant <= 2.0);
        assert!(c.cubes.len() > 1);
    }

    #[test]
    fn indicator_of_the_root() {
        let cells = (0..8).map(|i| ([i, 0, 0], DyadicRational::ONE)).collect();
        let f = GridFunction { dim: 1, level: 3, denominator: 1, cells };
        let c = cz_sparse_dominate_1param(&f).unwrap();
        assert_eq!(c.cubes.len(), 1);
        assert_eq!(c.constant, 1.0);
    }

    #[test]
    fn zero_function() {
        let f = GridFunction { dim: 1, level: 3, denominator: 1, cells: Default::default() };
        let c = cz_sparse_dominate_1param(&f).unwrap();
        assert!(c.cubes.is_empty() && c.dominated);
    }

    #[test]
    fn split_support_is_rejected() {
        let f = grid(&[(-1, 3), (1, 3)], 3);
        assert!(cz_sparse_dominate_1param(&f).is_err());
    }
}
