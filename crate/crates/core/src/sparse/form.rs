use crate::dyadic::DyadicRect;
use crate::error::Result;
use crate::measure::{lr_average, PointMassMeasure};

/// `Σ_R ⟨μ⟩_{R,r} ⟨ν⟩_{R,s} |R|`.
pub fn sparse_form(rects: &[DyadicRect], mu: &PointMassMeasure, nu: &PointMassMeasure, r: f64, s: f64) -> Result<f64> {
    let mut sum = 0.0;
    for rect in rects {
        let a = lr_average(mu, rect, r)?;
        if a == 0.0 {
            continue;
        }
        sum += a * lr_average(nu, rect, s)? * rect.measure().to_f64();
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicRational, FamilyKind, Point};

    fn pt(x: i128, y: i128, e: u32) -> Point {
        Point::new(&[DyadicRational::new(x, e), DyadicRational::new(y, e)]).unwrap()
    }

    #[test]
    fn examples() {
        let mu = PointMassMeasure::new(&[pt(1, 1, 2), pt(3, 1, 2)]).unwrap();
        let nu = PointMassMeasure::new(&[pt(1, 3, 3), pt(5, 3, 3)]).unwrap();
        let unit = DyadicRect::unit(FamilyKind::Full, 2).unwrap();
        assert_eq!(sparse_form(&[unit], &mu, &nu, 1.0, 1.0).unwrap(), 1.0);
        let far = DyadicRect::containing(FamilyKind::Full, &pt(7, 7, 3), &[1, 1]);
        assert_eq!(sparse_form(&[far], &mu, &nu, 1.0, 1.0).unwrap(), 0.0);
        let lower = DyadicRect::containing(FamilyKind::Full, &pt(0, 0, 0), &[0, 1]);
        let one = sparse_form(&[lower], &mu, &nu, 1.0, 2.0).unwrap();
        let two = sparse_form(&[lower, lower], &mu, &nu, 1.0, 2.0).unwrap();
        assert_eq!(two, 2.0 * one);
    }
}
