//! η-sparse collections: feasibility, the sparse form, the certified upper
//! bounds and the one-parameter positive control.

mod check;
mod control;
mod form;
mod greedy;
mod profile;

pub use check::{check_sparse, union_measure, validate_witness, HallCertificate, SparseOutcome, Witness, WitnessPiece};
pub use control::{cz_sparse_dominate_1param, ControlResult};
pub use form::sparse_form;
pub use greedy::{greedy_extremal, GreedyResult, GREEDY_POOL};
pub use profile::{
    layered_upper_bound, per_rectangle_bound, tail_sum, CandidateProfile, LayerRow, LayerTable,
    PerRectangleReport,
};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::dyadic::{DyadicRational, DyadicRect, FamilyKind};
use crate::error::{DslError, Result};
use crate::flow::Cap;

/// Parses `"3/5"`, `"0.6"` or `"1"` into an exact ratio.
pub fn parse_ratio(s: &str) -> Result<Cap> {
    let bad = || DslError::Parse(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: i128 = n.trim().parse().map_err(|_| bad())?;
        let d: i128 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 30 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10i128.pow(frac.len() as u32);
    let int_part: i128 = if int.is_empty() || int == "-" { 0 } else { int.parse().map_err(|_| bad())? };
    let frac_part: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let sign = if int.starts_with('-') { -1 } else { 1 };
    Ok(Ratio::new(int_part * den + sign * frac_part, den))
}

pub fn ratio_to_f64(r: &Cap) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub(crate) fn dyadic_to_ratio(x: DyadicRational) -> Cap {
    Ratio::new(x.numerator(), 1i128 << x.exponent())
}

/// Serde as the string `"n/d"`.
pub mod ratio_str {
    use super::{parse_ratio, Cap};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Cap, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Cap, D::Error> {
        let s = String::deserialize(d)?;
        parse_ratio(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct SparseCollection {
    pub family: FamilyKind,
    pub rects: Vec<DyadicRect>,
    #[serde(with = "ratio_str")]
    pub eta: Cap,
    pub witness: Option<Witness>,
}

impl SparseCollection {
    pub fn new(family: FamilyKind, rects: Vec<DyadicRect>, eta: Cap) -> Result<Self> {
        if rects.iter().any(|r| r.family() != family) {
            return Err(DslError::MixedFamilies);
        }
        Ok(SparseCollection { family, rects, eta, witness: None })
    }

    /// Runs the feasibility check and keeps the witness when there is one.
    pub fn certify(&mut self) -> Result<SparseOutcome> {
        let out = check_sparse(&self.rects, self.eta)?;
        if let SparseOutcome::Feasible(w) = &out {
            self.witness = Some(w.clone());
        }
        Ok(out)
    }
}
