use std::fmt;

use serde::{Deserialize, Serialize};

use super::DyadicRational;
use crate::error::{DslError, Result};

/// Maximum supported ambient dimension.
pub const MAX_DIM: usize = 3;

/// A point of `R^n` (`n <= 3`) with exact dyadic coordinates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<DyadicRational>", into = "Vec<DyadicRational>")]
pub struct Point {
    dim: u8,
    coords: [DyadicRational; MAX_DIM],
}

impl Point {
    pub fn new(coords: &[DyadicRational]) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(DslError::DimensionMismatch {
                expected: MAX_DIM,
                got: coords.len(),
            });
        }
        let mut c = [DyadicRational::ZERO; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Point {
            dim: coords.len() as u8,
            coords: c,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[DyadicRational] {
        &self.coords[..self.dim as usize]
    }

    pub fn coord(&self, axis: usize) -> DyadicRational {
        self.coords[axis]
    }

    /// Appends one coordinate (used by the Zygmund lift).
    pub fn extended(&self, c: DyadicRational) -> Result<Self> {
        let mut v = self.coords().to_vec();
        v.push(c);
        Point::new(&v)
    }

    pub fn in_unit_cube(&self) -> bool {
        self.coords()
            .iter()
            .all(|c| !c.is_negative() && *c < DyadicRational::ONE)
    }

    /// Finest binary resolution among the coordinates.
    pub fn resolution(&self) -> u32 {
        self.coords().iter().map(|c| c.exponent()).max().unwrap_or(0)
    }
}

impl TryFrom<Vec<DyadicRational>> for Point {
    type Error = DslError;
    fn try_from(v: Vec<DyadicRational>) -> Result<Self> {
        Point::new(&v)
    }
}

impl From<Point> for Vec<DyadicRational> {
    fn from(p: Point) -> Self {
        p.coords().to_vec()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Debug for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// `[index * 2^-level, (index + 1) * 2^-level)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: i32,
    pub index: i64,
}

impl DyadicInterval {
    pub fn new(level: i32, index: i64) -> Self {
        DyadicInterval { level, index }
    }

    /// The level-`level` interval containing `x` (half-open convention).
    pub fn of(x: DyadicRational, level: i32) -> Self {
        DyadicInterval {
            level,
            index: x.floor_at(level),
        }
    }

    pub fn length(&self) -> DyadicRational {
        DyadicRational::pow2(-self.level)
    }

    pub fn start(&self) -> DyadicRational {
        DyadicRational::from_int(self.index) * self.length()
    }

    pub fn end(&self) -> DyadicRational {
        DyadicRational::from_int(self.index + 1) * self.length()
    }

    pub fn contains(&self, x: DyadicRational) -> bool {
        x.floor_at(self.level) == self.index
    }

    pub fn parent(&self) -> Self {
        DyadicInterval {
            level: self.level - 1,
            index: self.index.div_euclid(2),
        }
    }

    /// Ancestor at a coarser (or equal) level.
    pub fn ancestor(&self, level: i32) -> Self {
        debug_assert!(level <= self.level);
        let shift = (self.level - level) as u32;
        DyadicInterval {
            level,
            index: if shift >= 63 {
                if self.index < 0 {
                    -1
                } else {
                    0
                }
            } else {
                self.index >> shift
            },
        }
    }

    pub fn contains_interval(&self, other: &DyadicInterval) -> bool {
        other.level >= self.level && other.ancestor(self.level) == *self
    }

    pub fn intersect(&self, other: &DyadicInterval) -> Option<DyadicInterval> {
        if self.contains_interval(other) {
            Some(*other)
        } else if other.contains_interval(self) {
            Some(*self)
        } else {
            None
        }
    }

    /// Length of `self ∩ [0, 1)`.
    pub fn clipped_length(&self) -> DyadicRational {
        match self.clipped_level() {
            Some(l) => DyadicRational::pow2(-l),
            None => DyadicRational::ZERO,
        }
    }

    /// Level of `self ∩ [0, 1)` when that intersection is nonempty.
    pub fn clipped_level(&self) -> Option<i32> {
        if self.level >= 0 {
            let count = 1i128 << self.level.min(100);
            (self.index >= 0 && (self.index as i128) < count).then_some(self.level)
        } else {
            (self.index == 0).then_some(0)
        }
    }
}

impl fmt::Display for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start(), self.end())
    }
}

/// The four rectangle bases behind the dyadic maximal operators.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    /// Cubes: all side lengths equal.
    Cube,
    /// All dyadic rectangles (strong maximal function).
    Full,
    /// `I × J × S` with `|S| = |I|·|J|`.
    Zygmund,
    /// `I × J` with `|I| <= |J|`.
    Flag,
}

impl FamilyKind {
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        let ok = match self {
            FamilyKind::Cube | FamilyKind::Full => (1..=MAX_DIM).contains(&dim),
            FamilyKind::Zygmund => dim == 3,
            FamilyKind::Flag => dim == 2,
        };
        if ok {
            Ok(())
        } else {
            Err(DslError::BadFamilyDimension { family: *self, dim })
        }
    }

    /// Whether a level tuple is admissible for this family.
    pub fn admits(&self, levels: &[i32]) -> bool {
        match self {
            FamilyKind::Cube => levels.windows(2).all(|w| w[0] == w[1]),
            FamilyKind::Full => true,
            FamilyKind::Zygmund => levels.len() == 3 && levels[2] == levels[0] + levels[1],
            FamilyKind::Flag => levels.len() == 2 && levels[0] >= levels[1],
        }
    }

    /// Every admissible level tuple whose free levels lie in the window, in
    /// lexicographic order of the free levels. For the Zygmund family the
    /// third level is derived and not clamped.
    pub fn level_tuples(&self, dim: usize, window: &Window) -> Result<Vec<[i32; MAX_DIM]>> {
        self.check_dim(dim)?;
        window.validate()?;
        let range = window.coarse..=window.fine;
        let mut out = Vec::new();
        match self {
            FamilyKind::Cube => {
                for l in range {
                    out.push([l; MAX_DIM]);
                }
            }
            FamilyKind::Full => {
                let mut t = [0i32; MAX_DIM];
                fill_product(dim, 0, window, &mut t, &mut out);
            }
            FamilyKind::Zygmund => {
                for li in range.clone() {
                    for lj in range.clone() {
                        out.push([li, lj, li + lj]);
                    }
                }
            }
            FamilyKind::Flag => {
                for li in range.clone() {
                    for lj in range.clone() {
                        if li >= lj {
                            out.push([li, lj, 0]);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn name(&self) -> &'static str {
        match self {
            FamilyKind::Cube => "cube",
            FamilyKind::Full => "full",
            FamilyKind::Zygmund => "zygmund",
            FamilyKind::Flag => "flag",
        }
    }
}

fn fill_product(
    dim: usize,
    axis: usize,
    window: &Window,
    t: &mut [i32; MAX_DIM],
    out: &mut Vec<[i32; MAX_DIM]>,
) {
    if axis == dim {
        out.push(*t);
        return;
    }
    for l in window.coarse..=window.fine {
        t[axis] = l;
        fill_product(dim, axis + 1, window, t, out);
    }
}

/// Range of levels scanned on each free axis.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct Window {
    /// Coarsest level (may be negative: intervals longer than 1).
    pub coarse: i32,
    /// Finest level.
    pub fine: i32,
}

impl Window {
    pub const DEFAULT_COARSE: i32 = -4;
    pub const DEFAULT_GUARD: i32 = 2;

    pub fn new(coarse: i32, fine: i32) -> Self {
        Window { coarse, fine }
    }

    pub fn validate(&self) -> Result<()> {
        if self.coarse > self.fine {
            Err(DslError::EmptyWindow {
                coarse: self.coarse,
                fine: self.fine,
            })
        } else {
            Ok(())
        }
    }

    /// Default window for points of the given binary resolution: finest level
    /// is the resolution plus the guard, coarsest is level −4.
    pub fn for_resolution(resolution: u32) -> Self {
        Window::new(
            Self::DEFAULT_COARSE,
            resolution as i32 + guard_levels(),
        )
    }

    pub fn for_points<'a>(points: impl IntoIterator<Item = &'a Point>) -> Self {
        let res = points.into_iter().map(|p| p.resolution()).max().unwrap_or(0);
        Self::for_resolution(res)
    }

    pub fn doubled(&self) -> Self {
        let width = self.fine - self.coarse;
        Window::new(self.coarse - width.max(1), self.fine + width.max(1))
    }

    pub fn contains(&self, level: i32) -> bool {
        (self.coarse..=self.fine).contains(&level)
    }
}

/// Guard levels past the construction resolution; `DSL_WINDOW_GUARD`
/// overrides the default of 2.
pub fn guard_levels() -> i32 {
    std::env::var("DSL_WINDOW_GUARD")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(Window::DEFAULT_GUARD)
}

/// A dyadic rectangle tagged with its family.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RectRepr", into = "RectRepr")]
pub struct DyadicRect {
    family: FamilyKind,
    dim: u8,
    iv: [DyadicInterval; MAX_DIM],
}

#[derive(Serialize, Deserialize)]
struct RectRepr {
    family: FamilyKind,
    levels: Vec<i32>,
    indices: Vec<i64>,
}

impl TryFrom<RectRepr> for DyadicRect {
    type Error = DslError;
    fn try_from(r: RectRepr) -> Result<Self> {
        if r.levels.len() != r.indices.len() {
            return Err(DslError::Parse("levels/indices length mismatch".into()));
        }
        let ivs: Vec<_> = r
            .levels
            .iter()
            .zip(&r.indices)
            .map(|(&l, &i)| DyadicInterval::new(l, i))
            .collect();
        DyadicRect::new(r.family, &ivs)
    }
}

impl From<DyadicRect> for RectRepr {
    fn from(r: DyadicRect) -> Self {
        RectRepr {
            family: r.family,
            levels: r.intervals().iter().map(|i| i.level).collect(),
            indices: r.intervals().iter().map(|i| i.index).collect(),
        }
    }
}

impl DyadicRect {
    pub fn new(family: FamilyKind, intervals: &[DyadicInterval]) -> Result<Self> {
        family.check_dim(intervals.len())?;
        let levels: Vec<i32> = intervals.iter().map(|i| i.level).collect();
        if !family.admits(&levels) {
            let reason = match family {
                FamilyKind::Zygmund => "level_S must equal level_I + level_J",
                FamilyKind::Flag => "|I| must not exceed |J|",
                FamilyKind::Cube => "all side lengths must be equal",
                FamilyKind::Full => unreachable!(),
            };
            return Err(DslError::FamilyConstraint {
                family,
                reason: reason.into(),
            });
        }
        Ok(Self::new_unchecked(family, intervals))
    }

    pub(crate) fn new_unchecked(family: FamilyKind, intervals: &[DyadicInterval]) -> Self {
        let mut iv = [DyadicInterval::new(0, 0); MAX_DIM];
        iv[..intervals.len()].copy_from_slice(intervals);
        DyadicRect {
            family,
            dim: intervals.len() as u8,
            iv,
        }
    }

    /// The rectangle with the given levels containing `p`.
    pub fn containing(family: FamilyKind, p: &Point, levels: &[i32]) -> Self {
        let ivs: Vec<_> = p
            .coords()
            .iter()
            .zip(levels)
            .map(|(&c, &l)| DyadicInterval::of(c, l))
            .collect();
        Self::new_unchecked(family, &ivs)
    }

    /// The unit cube `[0,1)^n` as a member of `family`.
    pub fn unit(family: FamilyKind, dim: usize) -> Result<Self> {
        let ivs = vec![DyadicInterval::new(0, 0); dim];
        Self::new(family, &ivs)
    }

    pub fn family(&self) -> FamilyKind {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn intervals(&self) -> &[DyadicInterval] {
        &self.iv[..self.dim as usize]
    }

    pub fn levels(&self) -> Vec<i32> {
        self.intervals().iter().map(|i| i.level).collect()
    }

    pub fn level_sum(&self) -> i32 {
        self.intervals().iter().map(|i| i.level).sum()
    }

    pub fn measure(&self) -> DyadicRational {
        DyadicRational::pow2(-self.level_sum())
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.dim() == self.dim() && self.intervals().iter().zip(p.coords()).all(|(i, &c)| i.contains(c))
    }

    pub fn contains_rect(&self, other: &DyadicRect) -> bool {
        self.dim == other.dim
            && self
                .intervals()
                .iter()
                .zip(other.intervals())
                .all(|(a, b)| a.contains_interval(b))
    }

    /// Intersection as a plain (`Full`) dyadic box.
    pub fn intersect(&self, other: &DyadicRect) -> Option<DyadicRect> {
        if self.dim != other.dim {
            return None;
        }
        let ivs: Option<Vec<_>> = self
            .intervals()
            .iter()
            .zip(other.intervals())
            .map(|(a, b)| a.intersect(b))
            .collect();
        ivs.map(|v| DyadicRect::new_unchecked(FamilyKind::Full, &v))
    }

    /// Smallest family-compatible strict enlargement: the parent on the
    /// first axis (for Zygmund the third axis follows).
    pub fn family_parent(&self) -> DyadicRect {
        let mut iv = self.iv;
        match self.family {
            FamilyKind::Cube => {
                for i in iv.iter_mut().take(self.dim()) {
                    *i = i.parent();
                }
            }
            FamilyKind::Full => iv[0] = iv[0].parent(),
            FamilyKind::Zygmund => {
                iv[0] = iv[0].parent();
                iv[2] = iv[2].parent();
            }
            // Growing J keeps |I| <= |J|.
            FamilyKind::Flag => iv[1] = iv[1].parent(),
        }
        DyadicRect::new_unchecked(self.family, &iv[..self.dim()])
    }

    /// Per-axis levels of `R ∩ [0,1)^n`, or `None` when it is empty.
    pub fn clipped_levels(&self) -> Option<Vec<i32>> {
        self.intervals().iter().map(|i| i.clipped_level()).collect()
    }

    /// `R ∩ [0,1)^n` as a plain dyadic box.
    pub fn clipped(&self) -> Option<DyadicRect> {
        let ivs: Option<Vec<_>> = self
            .intervals()
            .iter()
            .map(|i| {
                i.clipped_level().map(|l| {
                    if i.level >= 0 {
                        *i
                    } else {
                        DyadicInterval::new(l, 0)
                    }
                })
            })
            .collect();
        ivs.map(|v| DyadicRect::new_unchecked(FamilyKind::Full, &v))
    }

    /// `(|R ∩ [0,1)^n|, |R ∩ [0,1)^n| / |R|)`; both powers of two or zero.
    pub fn clip_to_unit(&self) -> (DyadicRational, DyadicRational) {
        match self.clip_exponent() {
            Some(a) => {
                let ratio = DyadicRational::pow2(-a);
                (self.measure() * ratio, ratio)
            }
            None => (DyadicRational::ZERO, DyadicRational::ZERO),
        }
    }

    /// `t` with `|R_0| / |R| = 2^-t`, when `R` meets the unit cube.
    pub fn clip_exponent(&self) -> Option<i32> {
        let clipped = self.clipped_levels()?;
        Some(
            self.intervals()
                .iter()
                .zip(clipped)
                .map(|(i, c)| c - i.level)
                .sum(),
        )
    }
}

impl fmt::Display for DyadicRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, iv) in self.intervals().iter().enumerate() {
            if i > 0 {
                write!(f, "×")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DyadicRect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.family, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn interval_of_examples() {
        assert_eq!(DyadicInterval::of(d(0, 0), 0), DyadicInterval::new(0, 0));
        let i = DyadicInterval::of(d(1, 1), 1);
        assert_eq!((i.start(), i.end()), (d(1, 1), d(1, 0)));
        let i = DyadicInterval::of(d(3, 3), 2);
        assert_eq!((i.start(), i.end()), (d(1, 2), d(1, 1)));
        assert!(i.contains(d(3, 3)));
    }

    #[test]
    fn family_constraints() {
        let iv = |l, k| DyadicInterval::new(l, k);
        assert!(DyadicRect::new(FamilyKind::Zygmund, &[iv(1, 0), iv(1, 0), iv(2, 0)]).is_ok());
        assert!(DyadicRect::new(FamilyKind::Zygmund, &[iv(1, 0), iv(1, 0), iv(1, 0)]).is_err());
        assert!(DyadicRect::new(FamilyKind::Flag, &[iv(2, 0), iv(1, 0)]).is_ok());
        assert!(DyadicRect::new(FamilyKind::Flag, &[iv(1, 0), iv(2, 0)]).is_err());
        assert!(DyadicRect::new(FamilyKind::Cube, &[iv(1, 0), iv(2, 0)]).is_err());
        assert!(DyadicRect::new(FamilyKind::Flag, &[iv(1, 0)]).is_err());
    }

    #[test]
    fn clip_examples() {
        let unit = DyadicRect::unit(FamilyKind::Zygmund, 3).unwrap();
        assert_eq!(unit.clip_to_unit(), (d(1, 0), d(1, 0)));
        let iv = |l, k| DyadicInterval::new(l, k);
        let r = DyadicRect::new(FamilyKind::Zygmund, &[iv(-1, 0), iv(0, 0), iv(-1, 0)]).unwrap();
        assert_eq!(r.clip_to_unit(), (d(1, 0), d(1, 2)));
        let far = DyadicRect::new(FamilyKind::Full, &[iv(0, 3), iv(0, 0)]).unwrap();
        assert_eq!(far.clip_to_unit(), (DyadicRational::ZERO, DyadicRational::ZERO));
        let neg = DyadicRect::new(FamilyKind::Full, &[iv(-2, -1), iv(0, 0)]).unwrap();
        assert_eq!(neg.clip_to_unit().0, DyadicRational::ZERO);
    }

    #[test]
    fn level_tuple_counts() {
        let w = Window::new(0, 1);
        assert_eq!(FamilyKind::Cube.level_tuples(2, &w).unwrap().len(), 2);
        assert_eq!(FamilyKind::Full.level_tuples(2, &w).unwrap().len(), 4);
        assert_eq!(FamilyKind::Zygmund.level_tuples(3, &w).unwrap().len(), 4);
        assert_eq!(FamilyKind::Flag.level_tuples(2, &w).unwrap().len(), 3);
        assert!(FamilyKind::Full.level_tuples(2, &Window::new(2, 1)).is_err());
    }

    fn arb_interval() -> impl Strategy<Value = DyadicInterval> {
        (-4i32..8).prop_flat_map(|l| {
            let span = if l >= 0 { 1i64 << l } else { 1 };
            (Just(l), -2i64..span + 2).prop_map(|(l, k)| DyadicInterval::new(l, k))
        })
    }

    proptest! {
        #[test]
        fn nested_or_disjoint(a in arb_interval(), b in arb_interval()) {
            let nested = a.contains_interval(&b) || b.contains_interval(&a);
            let disjoint = a.end() <= b.start() || b.end() <= a.start();
            prop_assert!(nested ^ disjoint);
        }

        #[test]
        fn parent_contains(a in arb_interval()) {
            let p = a.parent();
            prop_assert_eq!(p.level, a.level - 1);
            prop_assert!(p.contains_interval(&a));
            prop_assert!(p.contains(a.start()));
        }

        #[test]
        fn family_parent_monotone(li in -3i32..6, lj in -3i32..6, x in 0i128..64, y in 0i128..64, s in 0i128..64) {
            let p = Point::new(&[d(x, 6), d(y, 6), d(s, 6)]).unwrap();
            let r = DyadicRect::containing(FamilyKind::Zygmund, &p, &[li, lj, li + lj]);
            let up = r.family_parent();
            prop_assert!(up.contains_rect(&r));
            prop_assert!(up.measure() >= r.measure());
            let (_, ratio) = r.clip_to_unit();
            let (_, up_ratio) = up.clip_to_unit();
            prop_assert!(up_ratio <= ratio);
            prop_assert!(r.measure().log2_exact().is_some());
        }
    }
}
