//! Superlevel sets `Ω_j = {𝓜χ_[0,1)^n > 2^-j}`.
//!
//! A family rectangle meeting the unit cube has clip ratio `2^-a` with
//! `a = Σ a_i`, where `a_i = max(0, -level_i)`; on an axis with `a_i > 0` the
//! interval is `[0, 2^a_i)`. So `Ω_j` is the union of the boxes
//! `∏ [0, 2^a_i)` over the achievable exponent vectors with `Σ a_i <= j - 1`,
//! and its measure is exact on the shells `[0,1)`, `[2^(t-1), 2^t)`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicInterval, DyadicRational, DyadicRect, FamilyKind, Window, MAX_DIM};
use crate::error::Result;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct OmegaSet {
    pub family: FamilyKind,
    pub dim: usize,
    pub j: u32,
    /// Maximal boxes `∏ [0, 2^a_i)` whose union is `Ω_j`.
    pub components: Vec<DyadicRect>,
    pub measure: DyadicRational,
}

/// Clip exponent vectors `(a_i)` achievable in the family with `Σ a_i <= max_sum`.
pub fn omega_profile(family: FamilyKind, dim: usize, max_sum: u32) -> Result<BTreeSet<[u32; MAX_DIM]>> {
    let reach = max_sum as i32 + 1;
    let mut out = BTreeSet::new();
    for t in family.level_tuples(dim, &Window::new(-reach, reach))? {
        let mut a = [0u32; MAX_DIM];
        for axis in 0..dim {
            a[axis] = (-t[axis]).max(0) as u32;
        }
        if a.iter().sum::<u32>() <= max_sum {
            out.insert(a);
        }
    }
    Ok(out)
}

fn dominated(a: &[u32; MAX_DIM], b: &[u32; MAX_DIM]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn shell_length(t: u32) -> DyadicRational {
    if t == 0 {
        DyadicRational::ONE
    } else {
        DyadicRational::pow2(t as i32 - 1)
    }
}

pub fn omega_measure(family: FamilyKind, dim: usize, j: u32) -> Result<OmegaSet> {
    family.check_dim(dim)?;
    let maximal: Vec<[u32; MAX_DIM]> = if j == 0 {
        Vec::new()
    } else {
        let all = omega_profile(family, dim, j - 1)?;
        all.iter()
            .filter(|a| !all.iter().any(|b| b != *a && dominated(a, b)))
            .copied()
            .collect()
    };
    let mut measure = DyadicRational::ZERO;
    if !maximal.is_empty() {
        let sizes: Vec<u32> = (0..dim).map(|axis| maximal.iter().map(|a| a[axis]).max().unwrap() + 1).collect();
        let total: u32 = sizes.iter().product();
        for flat in 0..total {
            let mut cell = [0u32; MAX_DIM];
            let mut r = flat;
            for axis in (0..dim).rev() {
                cell[axis] = r % sizes[axis];
                r /= sizes[axis];
            }
            if maximal.iter().any(|a| dominated(&cell, a)) {
                measure = measure + (0..dim).fold(DyadicRational::ONE, |acc, axis| acc * shell_length(cell[axis]));
            }
        }
    }
    let components = maximal
        .iter()
        .map(|a| {
            let ivs: Vec<_> = (0..dim).map(|axis| DyadicInterval::new(-(a[axis] as i32), 0)).collect();
            DyadicRect::new(FamilyKind::Full, &ivs)
        })
        .collect::<Result<_>>()?;
    Ok(OmegaSet { family, dim, j, components, measure })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn measure(f: FamilyKind, dim: usize, j: u32) -> f64 {
        omega_measure(f, dim, j).unwrap().measure.to_f64()
    }

    #[test]
    fn full_2d_examples() {
        assert_eq!(measure(FamilyKind::Full, 2, 0), 0.0);
        assert_eq!(measure(FamilyKind::Full, 2, 1), 1.0);
        assert_eq!(measure(FamilyKind::Full, 2, 2), 3.0);
        let o = omega_measure(FamilyKind::Full, 2, 2).unwrap();
        assert_eq!(o.components.len(), 2);
    }

    /// Inclusion–exclusion over the component boxes; intersections of
    /// origin-anchored boxes take per-axis minima.
    fn inclusion_exclusion(o: &OmegaSet) -> f64 {
        let comps: Vec<Vec<i32>> = o.components.iter().map(|r| r.levels()).collect();
        let n = comps.len();
        let mut total = 0.0;
        for mask in 1u32..(1 << n) {
            let mut inter = vec![i32::MIN; o.dim];
            for (i, c) in comps.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    for a in 0..o.dim {
                        inter[a] = inter[a].max(c[a]);
                    }
                }
            }
            let vol = (-inter.iter().sum::<i32>() as f64).exp2();
            total += if mask.count_ones() % 2 == 1 { vol } else { -vol };
        }
        total
    }

    #[test]
    fn matches_inclusion_exclusion() {
        for (f, dim) in [(FamilyKind::Full, 2), (FamilyKind::Flag, 2), (FamilyKind::Zygmund, 3), (FamilyKind::Cube, 2)] {
            for j in 1..=7 {
                let o = omega_measure(f, dim, j).unwrap();
                assert_eq!(o.measure.to_f64(), inclusion_exclusion(&o), "{f:?} j={j}");
            }
        }
    }

    #[test]
    fn nested_and_bounded() {
        for (f, dim) in [(FamilyKind::Full, 2), (FamilyKind::Flag, 2), (FamilyKind::Zygmund, 3)] {
            let mut prev = 0.0;
            for j in 0..=10u32 {
                let m = measure(f, dim, j);
                assert!(m >= prev);
                if j > 0 {
                    assert!(m <= (j as f64) * 2f64.powi(j as i32), "{f:?} j={j} {m}");
                }
                prev = m;
            }
        }
    }

    #[test]
    fn components_have_large_ratio() {
        let o = omega_measure(FamilyKind::Zygmund, 3, 5).unwrap();
        for r in &o.components {
            assert!(r.measure() < DyadicRational::pow2(5));
        }
    }
}
