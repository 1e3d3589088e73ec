//! Point-mass measures, their averages and the dyadic maximal operators.

mod grid;
mod maximal;
mod omega;

pub use grid::{mollify, GridFunction};
pub use maximal::{maximal_at, maximal_pairing, MaximalEvaluator, MaximalPairing, MaximalValue};
pub use omega::{omega_measure, omega_profile, OmegaSet};

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicRational, DyadicRect, Point};
use crate::error::{DslError, Result};

/// Uniform probability measure on a finite set of distinct points.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PointMassMeasure {
    support: Vec<Point>,
}

impl PointMassMeasure {
    pub fn new(points: &[Point]) -> Result<Self> {
        let dim = points.first().map(|p| p.dim()).unwrap_or(0);
        let mut set = BTreeSet::new();
        for p in points {
            if p.dim() != dim {
                return Err(DslError::DimensionMismatch { expected: dim, got: p.dim() });
            }
            if !set.insert(*p) {
                return Err(DslError::Degenerate(format!("repeated support point {p}")));
            }
        }
        if set.is_empty() {
            return Err(DslError::Degenerate("empty support".into()));
        }
        Ok(PointMassMeasure { support: set.into_iter().collect() })
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.support[0].dim()
    }

    pub fn weight(&self) -> f64 {
        1.0 / self.support.len() as f64
    }

    pub fn count_in(&self, rect: &DyadicRect) -> usize {
        self.support.iter().filter(|p| rect.contains(p)).count()
    }

    /// `μ(R)`.
    pub fn mass_of(&self, rect: &DyadicRect) -> f64 {
        self.count_in(rect) as f64 * self.weight()
    }
}

/// `(1/#F) · (count / |R|)^(1/r)`, zero for an empty rectangle.
pub fn lr_average(mu: &PointMassMeasure, rect: &DyadicRect, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(DslError::InvalidConfig(format!("exponent r = {r} must be at least 1")));
    }
    let count = mu.count_in(rect);
    if count == 0 {
        return Ok(0.0);
    }
    Ok(mu.weight() * ratio_pow(count as f64, rect.measure(), 1.0 / r))
}

/// `(count / |R|)^e` with the power of two handled exactly.
pub(crate) fn ratio_pow(count: f64, measure: DyadicRational, e: f64) -> f64 {
    let log2_inv = -measure.log2_exact().expect("rectangle measures are powers of two");
    count.powf(e) * (log2_inv as f64 * e).exp2()
}

/// `∫ f dμ`, the average of `values` over the support.
pub fn pair_measure(values: &HashMap<Point, f64>, mu: &PointMassMeasure) -> Result<f64> {
    let mut sum = 0.0;
    for p in &mu.support {
        sum += values
            .get(p)
            .ok_or_else(|| DslError::MissingValue(p.to_string()))?;
    }
    Ok(sum * mu.weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::FamilyKind;

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    fn two_points() -> PointMassMeasure {
        PointMassMeasure::new(&[
            Point::new(&[d(0, 0), d(0, 0)]).unwrap(),
            Point::new(&[d(1, 1), d(1, 1)]).unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn lr_average_examples() {
        let mu = two_points();
        let unit = DyadicRect::unit(FamilyKind::Full, 2).unwrap();
        assert_eq!(lr_average(&mu, &unit, 1.0).unwrap(), 1.0);
        assert!((lr_average(&mu, &unit, 2.0).unwrap() - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        let q = Point::new(&[d(3, 2), d(1, 2)]).unwrap();
        let empty = DyadicRect::containing(FamilyKind::Full, &q, &[2, 2]);
        assert_eq!(lr_average(&mu, &empty, 1.0).unwrap(), 0.0);
        assert!(lr_average(&mu, &unit, 0.5).is_err());
    }

    #[test]
    fn pairing_examples() {
        let mu = two_points();
        let ones: HashMap<_, _> = mu.support().iter().map(|p| (*p, 1.0)).collect();
        assert_eq!(pair_measure(&ones, &mu).unwrap(), 1.0);
        let half: HashMap<_, _> = mu.support().iter().enumerate().map(|(i, p)| (*p, (i == 0) as u8 as f64)).collect();
        assert_eq!(pair_measure(&half, &mu).unwrap(), 0.5);
        assert!(pair_measure(&HashMap::new(), &mu).is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let p = Point::new(&[d(0, 0)]).unwrap();
        assert!(PointMassMeasure::new(&[p, p]).is_err());
        assert!(PointMassMeasure::new(&[]).is_err());
    }
}
