//! Enumeration of the family rectangles around a point set.
//!
//! Everything is organized per level tuple: for a fixed tuple the rectangles
//! containing a point are indexed by `floor(x · 2^level)` on each axis, so a
//! hash bucket per tuple turns range counting into a single pass.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;

use super::{DyadicInterval, DyadicRect, FamilyKind, Point, Window, MAX_DIM};
use crate::error::{DslError, Result};

pub type IndexKey = [i64; MAX_DIM];

pub fn index_key(p: &Point, levels: &[i32; MAX_DIM]) -> IndexKey {
    let mut k = [0i64; MAX_DIM];
    for (axis, c) in p.coords().iter().enumerate() {
        k[axis] = c.floor_at(levels[axis]);
    }
    k
}

pub fn rect_from_key(family: FamilyKind, dim: usize, levels: &[i32; MAX_DIM], key: &IndexKey) -> DyadicRect {
    let ivs: Vec<_> = (0..dim)
        .map(|a| DyadicInterval::new(levels[a], key[a]))
        .collect();
    DyadicRect::new_unchecked(family, &ivs)
}

/// Point counts per occupied cell at one level tuple.
pub fn bucket_counts(points: &[Point], levels: &[i32; MAX_DIM]) -> HashMap<IndexKey, u32> {
    let mut map = HashMap::with_capacity(points.len());
    for p in points {
        *map.entry(index_key(p, levels)).or_insert(0) += 1;
    }
    map
}

/// Every family rectangle in the window containing `p`, in lexicographic
/// order of the level tuple.
pub fn ancestors_of(p: &Point, family: FamilyKind, window: &Window) -> Result<Vec<DyadicRect>> {
    let tuples = family.level_tuples(p.dim(), window)?;
    Ok(tuples
        .iter()
        .map(|t| DyadicRect::containing(family, p, &t[..p.dim()]))
        .collect())
}

/// The distinct family rectangles in the window containing at least one of
/// the points, with their point counts, sorted.
pub fn enumerate_nonempty(
    points: &[Point],
    family: FamilyKind,
    window: &Window,
) -> Result<Vec<(DyadicRect, u32)>> {
    let Some(dim) = points.first().map(|p| p.dim()) else {
        return Ok(Vec::new());
    };
    if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
        return Err(DslError::DimensionMismatch {
            expected: dim,
            got: bad.dim(),
        });
    }
    let tuples = family.level_tuples(dim, window)?;
    let mut out: Vec<(DyadicRect, u32)> = tuples
        .par_iter()
        .flat_map_iter(|t| {
            let counts: BTreeMap<_, _> = bucket_counts(points, t).into_iter().collect();
            counts
                .into_iter()
                .map(|(k, c)| (rect_from_key(family, dim, t, &k), c))
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicRational;

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn cube_ancestors_at_origin() {
        let p = Point::new(&[d(0, 0), d(0, 0)]).unwrap();
        let a = ancestors_of(&p, FamilyKind::Cube, &Window::new(0, 1)).unwrap();
        assert_eq!(a.len(), 2);
        assert_eq!(a[0], DyadicRect::unit(FamilyKind::Cube, 2).unwrap());
        assert_eq!(a[1].measure(), d(1, 2));
    }

    #[test]
    fn zygmund_ancestors_at_origin() {
        let p = Point::new(&[d(0, 0), d(0, 0), d(0, 0)]).unwrap();
        let a = ancestors_of(&p, FamilyKind::Zygmund, &Window::new(0, 1)).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a[3].levels(), vec![1, 1, 2]);
        assert_eq!(a[3].to_string(), "[0/2^0, 1/2^1)×[0/2^0, 1/2^1)×[0/2^0, 1/2^2)");
    }

    #[test]
    fn flag_ancestors_exclude_wide_first_side() {
        let p = Point::new(&[d(0, 0), d(0, 0)]).unwrap();
        let a = ancestors_of(&p, FamilyKind::Flag, &Window::new(0, 1)).unwrap();
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|r| r.levels()[0] >= r.levels()[1]));
    }

    #[test]
    fn enumerate_single_point_matches_ancestors() {
        let p = Point::new(&[d(3, 3), d(5, 3)]).unwrap();
        let w = Window::new(-1, 4);
        let mut a = ancestors_of(&p, FamilyKind::Full, &w).unwrap();
        a.sort();
        let e: Vec<_> = enumerate_nonempty(&[p], FamilyKind::Full, &w)
            .unwrap()
            .into_iter()
            .map(|(r, c)| {
                assert_eq!(c, 1);
                r
            })
            .collect();
        assert_eq!(a, e);
    }

    #[test]
    fn empty_window_is_an_error() {
        let p = Point::new(&[d(0, 0)]).unwrap();
        assert!(ancestors_of(&p, FamilyKind::Cube, &Window::new(3, 2)).is_err());
    }
}
