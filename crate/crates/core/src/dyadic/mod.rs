//! Exact dyadic geometry: rationals, intervals, rectangle families and the
//! dyadic distances.

mod distance;
mod enumerate;
mod geometry;
mod rational;

pub use distance::{common_length, common_level, dyadic_distance, DyadicDistance};
pub use enumerate::{
    ancestors_of, bucket_counts, enumerate_nonempty, index_key, rect_from_key, IndexKey,
};
pub use geometry::{
    guard_levels, DyadicInterval, DyadicRect, FamilyKind, Point, Window, MAX_DIM,
};
pub use rational::DyadicRational;

/// Level-`level` interval containing `x`.
pub fn interval_of(x: DyadicRational, level: i32) -> DyadicInterval {
    DyadicInterval::of(x, level)
}
