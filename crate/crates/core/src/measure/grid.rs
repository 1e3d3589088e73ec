use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PointMassMeasure;
use crate::dyadic::{
    index_key, DyadicInterval, DyadicRational, DyadicRect, FamilyKind, IndexKey, Point, Window,
    MAX_DIM,
};
use crate::error::{DslError, Result};

/// Nonnegative step function on the level-`level` dyadic cubes. A cell's
/// value is its dyadic numerator divided by the shared `denominator`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct GridFunction {
    pub dim: usize,
    pub level: i32,
    pub denominator: u64,
    pub cells: BTreeMap<IndexKey, DyadicRational>,
}

/// Replaces each atom by the normalized indicator of its level-`g` cube.
pub fn mollify(mu: &PointMassMeasure, g: i32) -> Result<GridFunction> {
    let dim = mu.dim();
    let levels = [g; MAX_DIM];
    let mut cells = BTreeMap::new();
    let mut owner: HashMap<IndexKey, Point> = HashMap::new();
    let density = DyadicRational::pow2(g * dim as i32);
    for p in mu.support() {
        let key = index_key(p, &levels);
        if let Some(q) = owner.insert(key, *p) {
            return Err(DslError::CellCollision(q.to_string(), p.to_string(), g));
        }
        cells.insert(key, density);
    }
    Ok(GridFunction {
        dim,
        level: g,
        denominator: mu.len() as u64,
        cells,
    })
}

impl GridFunction {
    pub fn cell_measure(&self) -> DyadicRational {
        DyadicRational::pow2(-self.level * self.dim as i32)
    }

    pub fn value(&self, key: &IndexKey) -> f64 {
        self.cells
            .get(key)
            .map_or(0.0, |v| v.to_f64() / self.denominator as f64)
    }

    /// `∫ f`, as (dyadic numerator, denominator).
    pub fn integral_exact(&self) -> (DyadicRational, u64) {
        let sum: DyadicRational = self.cells.values().copied().sum();
        (sum * self.cell_measure(), self.denominator)
    }

    pub fn integral(&self) -> f64 {
        let (n, d) = self.integral_exact();
        n.to_f64() / d as f64
    }

    fn overlap(&self, key: &IndexKey, rect: &DyadicRect) -> DyadicRational {
        let mut out = DyadicRational::ONE;
        for (axis, r) in rect.intervals().iter().enumerate() {
            let c = DyadicInterval::new(self.level, key[axis]);
            out = out
                * if r.contains_interval(&c) {
                    c.length()
                } else if c.contains_interval(r) {
                    r.length()
                } else {
                    return DyadicRational::ZERO;
                };
        }
        out
    }

    /// `((1/|R|) ∫_R f^r)^(1/r)`.
    pub fn lr_average(&self, rect: &DyadicRect, r: f64) -> f64 {
        let inv = 1.0 / rect.measure().to_f64();
        let sum: f64 = self
            .cells
            .iter()
            .map(|(k, _)| self.value(k).powf(r) * self.overlap(k, rect).to_f64())
            .sum();
        (sum * inv).powf(1.0 / r)
    }

    pub fn average(&self, rect: &DyadicRect) -> f64 {
        self.lr_average(rect, 1.0)
    }

    /// Maximal function of `f` at many points. A rectangle finer than the
    /// grid on some axis averages like the grid interval containing it, so
    /// each level tuple is clamped at the grid level and summed per cell.
    pub fn maximal_evaluator(&self, family: FamilyKind, window: &Window) -> Result<GridMaximal> {
        window.validate()?;
        let tuples = family.level_tuples(self.dim, window)?;
        let mut clamped: Vec<[i32; MAX_DIM]> = tuples
            .iter()
            .map(|t| {
                let mut c = [0; MAX_DIM];
                for a in 0..self.dim {
                    c[a] = t[a].min(self.level);
                }
                c
            })
            .collect();
        clamped.sort();
        clamped.dedup();
        let sums = clamped
            .par_iter()
            .map(|c| {
                let mut m: HashMap<IndexKey, f64> = HashMap::new();
                for (k, v) in &self.cells {
                    let mut key = [0i64; MAX_DIM];
                    for a in 0..self.dim {
                        key[a] = k[a] >> (self.level - c[a]);
                    }
                    *m.entry(key).or_insert(0.0) += v.to_f64();
                }
                m
            })
            .collect();
        Ok(GridMaximal {
            dim: self.dim,
            scale: self.cell_measure().to_f64() / self.denominator as f64,
            clamped,
            sums,
        })
    }

    /// CSV rows `i0,..,level,numerator,exponent,denominator`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (0..self.dim).map(|a| format!("i{a}")).collect();
        header.extend(["level", "numerator", "exponent", "denominator"].map(String::from));
        out.write_record(&header)?;
        for (k, v) in &self.cells {
            let mut row: Vec<String> = k[..self.dim].iter().map(|i| i.to_string()).collect();
            row.push(self.level.to_string());
            row.push(v.numerator().to_string());
            row.push(v.exponent().to_string());
            row.push(self.denominator.to_string());
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let dim = rdr.headers()?.len().checked_sub(4).filter(|d| (1..=MAX_DIM).contains(d));
        let dim = dim.ok_or_else(|| DslError::Parse("grid CSV needs 1 to 3 index columns".into()))?;
        let mut level = None;
        let mut denominator = 1;
        let mut cells = BTreeMap::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| rec.get(i).unwrap_or("");
            let parse_err = |i: usize| DslError::Parse(format!("bad grid field {:?}", field(i)));
            let mut key = [0i64; MAX_DIM];
            for a in 0..dim {
                key[a] = field(a).parse().map_err(|_| parse_err(a))?;
            }
            let l: i32 = field(dim).parse().map_err(|_| parse_err(dim))?;
            if level.replace(l).is_some_and(|prev| prev != l) {
                return Err(DslError::Parse("grid CSV mixes levels".into()));
            }
            let num: i128 = field(dim + 1).parse().map_err(|_| parse_err(dim + 1))?;
            let exp: u32 = field(dim + 2).parse().map_err(|_| parse_err(dim + 2))?;
            denominator = field(dim + 3).parse().map_err(|_| parse_err(dim + 3))?;
            if num < 0 {
                return Err(DslError::Parse("grid values must be nonnegative".into()));
            }
            cells.insert(key, DyadicRational::new(num, exp));
        }
        Ok(GridFunction {
            dim,
            level: level.unwrap_or(0),
            denominator,
            cells,
        })
    }
}

pub struct GridMaximal {
    dim: usize,
    scale: f64,
    clamped: Vec<[i32; MAX_DIM]>,
    sums: Vec<HashMap<IndexKey, f64>>,
}

impl GridMaximal {
    pub fn eval(&self, z: &Point) -> f64 {
        self.clamped
            .iter()
            .zip(&self.sums)
            .map(|(c, m)| {
                let s = m.get(&index_key(z, c)).copied().unwrap_or(0.0);
                s * self.scale * (c[..self.dim].iter().sum::<i32>() as f64).exp2()
            })
            .fold(0.0, f64::max)
    }
}
