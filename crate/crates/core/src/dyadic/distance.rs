use serde::{Deserialize, Serialize};

use super::{DyadicRational, FamilyKind, Point};
use crate::error::{DslError, Result};

/// Level of the smallest dyadic interval containing both `x` and `y`, or
/// `None` when `x == y` (arbitrarily small intervals contain both).
///
/// Coordinates of opposite sign share no dyadic interval; the search stops
/// at level −120, which stands in for "infinitely long".
pub fn common_level(x: DyadicRational, y: DyadicRational) -> Option<i32> {
    if x == y {
        return None;
    }
    let e = x.exponent().max(y.exponent()) as i32;
    let (mut a, mut b) = (x.floor_at(e) as i128, y.floor_at(e) as i128);
    let mut level = e;
    while a != b && level > -120 {
        a >>= 1;
        b >>= 1;
        level -= 1;
    }
    Some(level)
}

/// Length of the smallest dyadic interval containing both points; zero when
/// they coincide.
pub fn common_length(x: DyadicRational, y: DyadicRational) -> DyadicRational {
    match common_level(x, y) {
        Some(l) => DyadicRational::pow2(-l),
        None => DyadicRational::ZERO,
    }
}

/// Infimum of `|R|` over the family rectangles containing two points.
///
/// The dyadic distance itself is the square root; keeping the squared value
/// keeps everything exact. A zero value means the points are unboundedly
/// close in that family.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct DyadicDistance {
    pub squared: DyadicRational,
}

impl DyadicDistance {
    pub fn value(&self) -> f64 {
        self.squared.to_f64().sqrt()
    }

    pub fn is_degenerate(&self) -> bool {
        self.squared.is_zero()
    }
}

pub fn dyadic_distance(p: &Point, q: &Point, family: FamilyKind) -> Result<DyadicDistance> {
    if p.dim() != q.dim() {
        return Err(DslError::DimensionMismatch {
            expected: p.dim(),
            got: q.dim(),
        });
    }
    family.check_dim(p.dim())?;
    let ell: Vec<DyadicRational> = p
        .coords()
        .iter()
        .zip(q.coords())
        .map(|(&a, &b)| common_length(a, b))
        .collect();
    let squared = match family {
        FamilyKind::Full => ell.iter().fold(DyadicRational::ONE, |acc, &l| acc * l),
        FamilyKind::Cube => {
            let side = ell.iter().copied().fold(DyadicRational::ZERO, DyadicRational::max);
            (0..ell.len()).fold(DyadicRational::ONE, |acc, _| acc * side)
        }
        FamilyKind::Zygmund => {
            let side = (ell[0] * ell[1]).max(ell[2]);
            side * side
        }
        FamilyKind::Flag => ell[0] * ell[0].max(ell[1]),
    };
    Ok(DyadicDistance { squared })
}
