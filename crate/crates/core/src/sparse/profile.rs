//! Candidate rectangles summarized by clip shape, and the bounds built on
//! them.
//!
//! For a rectangle `R` meeting `[0,1)^n` with clip `R_0` and clip ratio
//! `|R_0|/|R| = 2^-j`, both point counts depend on `R_0` only, so
//! `⟨μ⟩_{R,r}⟨ν⟩_{R,s} = B(R_0) · 2^{-jσ}` with `σ = 1/r + 1/s` and
//! `B(R_0) = c_μ^{1/r} c_ν^{1/s} |R_0|^{-σ} / (#μ #ν)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{bucket_counts, DyadicRational, FamilyKind, Window, MAX_DIM};
use crate::error::{DslError, Result};
use crate::measure::{omega_measure, PointMassMeasure};
use crate::net::NetConfig;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShapeEntry {
    pub shape: [i32; MAX_DIM],
    /// `|R_0| = 2^-level_sum`.
    pub level_sum: i32,
    /// Pareto-maximal `(c_μ, c_ν)` over the cells of this shape.
    pub frontier: Vec<(u32, u32)>,
    /// Cells holding points of both measures.
    pub joint_cells: u64,
}

impl ShapeEntry {
    fn weight(&self, r: f64, s: f64, n_mu: usize, n_nu: usize) -> f64 {
        let sigma = 1.0 / r + 1.0 / s;
        self.frontier
            .iter()
            .map(|&(a, b)| (a as f64).powf(1.0 / r) * (b as f64).powf(1.0 / s))
            .fold(0.0, f64::max)
            * (self.level_sum as f64 * sigma).exp2()
            / (n_mu as f64 * n_nu as f64)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateProfile {
    pub family: FamilyKind,
    pub dim: usize,
    pub n_mu: usize,
    pub n_nu: usize,
    /// Layers `0..=cutoff` are tabulated; the rest go to the tail.
    pub cutoff: u32,
    pub fine: i32,
    pub shapes: Vec<ShapeEntry>,
    /// Layer `j` → (shape index, number of level tuples with that clip).
    pub layers: BTreeMap<u32, Vec<(usize, u64)>>,
    /// `|Ω_j|` for `j = 0..=cutoff + 1`.
    pub omega: Vec<DyadicRational>,
}

fn pareto(pairs: impl Iterator<Item = (u32, u32)>) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = pairs.collect::<BTreeSet<_>>().into_iter().collect();
    v.sort_by(|a, b| b.cmp(a));
    let mut out: Vec<(u32, u32)> = Vec::new();
    for p in v {
        if out.last().is_none_or(|q| p.1 > q.1) {
            out.push(p);
        }
    }
    out
}

impl CandidateProfile {
    /// Default cutoff `4m + 2k + 8`.
    pub fn default_cutoff(cfg: &NetConfig) -> u32 {
        4 * cfg.m + 2 * cfg.k + 8
    }

    pub fn build(mu: &PointMassMeasure, nu: &PointMassMeasure, family: FamilyKind, cutoff: u32, window: &Window) -> Result<Self> {
        let dim = mu.dim();
        if nu.dim() != dim {
            return Err(DslError::DimensionMismatch { expected: dim, got: nu.dim() });
        }
        // Distinct free coordinates keep every rectangle finer than the
        // window from holding points of both measures.
        let free = if family == FamilyKind::Zygmund { 2 } else { dim };
        for axis in 0..free {
            let xs: BTreeSet<_> = mu.support().iter().map(|p| p.coord(axis)).collect();
            if let Some(z) = nu.support().iter().find(|z| xs.contains(&z.coord(axis))) {
                return Err(DslError::Degenerate(format!("{z} shares its axis-{axis} coordinate with the first measure")));
            }
        }
        let fine = window.fine;
        let tuples = family.level_tuples(dim, &Window::new(-(cutoff as i32 + 1), fine))?;
        let mut by_shape: BTreeMap<[i32; MAX_DIM], BTreeMap<u32, u64>> = BTreeMap::new();
        for t in &tuples {
            let mut shape = [0; MAX_DIM];
            let mut j = 0u32;
            for a in 0..dim {
                shape[a] = t[a].max(0);
                j += (-t[a]).max(0) as u32;
            }
            if j <= cutoff {
                *by_shape.entry(shape).or_default().entry(j).or_insert(0) += 1;
            }
        }
        // Shapes reachable only past the cutoff still feed the tail constant.
        for t in family.level_tuples(dim, &Window::new(-1, fine))? {
            let mut shape = [0; MAX_DIM];
            for a in 0..dim {
                shape[a] = t[a].max(0);
            }
            by_shape.entry(shape).or_default();
        }
        let shape_list: Vec<[i32; MAX_DIM]> = by_shape.keys().copied().collect();
        let shapes: Vec<ShapeEntry> = shape_list
            .par_iter()
            .map(|s| {
                let cm = bucket_counts(mu.support(), s);
                let cn: HashMap<_, _> = bucket_counts(nu.support(), s);
                let joint: Vec<(u32, u32)> = cm
                    .iter()
                    .filter_map(|(k, &a)| cn.get(k).map(|&b| (a, b)))
                    .collect();
                ShapeEntry {
                    shape: *s,
                    level_sum: s.iter().sum(),
                    joint_cells: joint.len() as u64,
                    frontier: pareto(joint.into_iter()),
                }
            })
            .collect();
        let mut layers: BTreeMap<u32, Vec<(usize, u64)>> = BTreeMap::new();
        for (i, s) in shape_list.iter().enumerate() {
            for (&j, &n) in &by_shape[s] {
                layers.entry(j).or_default().push((i, n));
            }
        }
        let omega = (0..=cutoff + 1)
            .into_par_iter()
            .map(|j| omega_measure(family, dim, j).map(|o| o.measure))
            .collect::<Result<_>>()?;
        Ok(CandidateProfile {
            family,
            dim,
            n_mu: mu.len(),
            n_nu: nu.len(),
            cutoff,
            fine,
            shapes,
            layers,
            omega,
        })
    }

    /// `max_R ⟨μ⟩_{R,r}⟨ν⟩_{R,s} / (|R_0|/|R|)^σ` over all candidates.
    pub fn max_weight(&self, r: f64, s: f64) -> f64 {
        self.shapes
            .iter()
            .map(|e| e.weight(r, s, self.n_mu, self.n_nu))
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct PerRectangleReport {
    /// Threshold level: the first regime is `|R_0| >= 2^-threshold`.
    pub threshold: i32,
    pub a1: f64,
    pub a2: f64,
    pub a1_raw: f64,
    pub a2_raw: f64,
    pub a1_shape: Option<Vec<i32>>,
    pub a2_shape: Option<Vec<i32>>,
}

/// Normalized per-rectangle constants in the large-clip and small-clip
/// regimes.
pub fn per_rectangle_bound(profile: &CandidateProfile, cfg: &NetConfig, r: f64, s: f64) -> PerRectangleReport {
    let (m, k) = (cfg.m as f64, cfg.k as f64);
    let sigma = 1.0 / r + 1.0 / s;
    let zyg = profile.family == FamilyKind::Zygmund;
    let threshold = if zyg { 4 * cfg.m as i32 + 2 } else { 2 * cfg.m as i32 + 1 };
    let lift = if zyg { 3.0 } else { 1.0 };
    let n1 = k.powf(1.0 / s);
    let n2 = n1 * (lift * k * sigma).exp2() / m;
    let mut best = [(0.0, None), (0.0, None)];
    for e in &profile.shapes {
        let w = e.weight(r, s, profile.n_mu, profile.n_nu);
        let slot = usize::from(e.level_sum > threshold);
        if w > best[slot].0 {
            best[slot] = (w, Some(e.shape[..profile.dim].to_vec()));
        }
    }
    let [(a1_raw, a1_shape), (a2_raw, a2_shape)] = best;
    PerRectangleReport {
        threshold,
        a1: a1_raw / n1,
        a2: a2_raw / n2,
        a1_raw,
        a2_raw,
        a1_shape,
        a2_shape,
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LayerRow {
    pub j: u32,
    pub candidates: u64,
    /// Max of `⟨μ⟩_{R,r}⟨ν⟩_{R,s}` over the layer.
    pub weight: f64,
    /// `|Ω_{j+1}|`, which contains every rectangle of the layer.
    pub omega: f64,
    pub bound: f64,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct LayerTable {
    pub rows: Vec<LayerRow>,
    pub cutoff: u32,
    pub sigma: f64,
    pub eta: f64,
    pub tail_constant: f64,
    pub tail: f64,
    pub total: f64,
}

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Upper bound for `Σ_{j > cutoff} C(j+n, n) 2^{-j(σ-1)}`: exact terms
/// until the remainder is negligible, then a geometric bound on it (the
/// term ratio decreases in `j`).
pub fn tail_sum(sigma: f64, dim: usize, cutoff: u32) -> Result<f64> {
    if !(sigma > 1.0) {
        return Err(DslError::DivergentTail);
    }
    let n = dim as u64;
    let q = (-(sigma - 1.0)).exp2();
    let mut j = cutoff as u64 + 1;
    let mut term = binomial(j + n, n) * q.powf(j as f64);
    let mut sum = 0.0;
    loop {
        let ratio = (j + n + 1) as f64 / (j + 1) as f64 * q;
        if ratio < 1.0 {
            let rest = term / (1.0 - ratio);
            if rest <= 1e-9 * sum {
                return Ok(sum + rest);
            }
        }
        sum += term;
        term *= ratio;
        j += 1;
        if j > 1_000_000 {
            return Err(DslError::DivergentTail);
        }
    }
}

/// `U = Σ_{j<=J} W_j |Ω_{j+1}| / η + tail`, an upper bound for the sparse
/// form over every η-sparse collection.
pub fn layered_upper_bound(profile: &CandidateProfile, r: f64, s: f64, eta: f64) -> Result<LayerTable> {
    let sigma = 1.0 / r + 1.0 / s;
    if !(sigma > 1.0) {
        return Err(DslError::DivergentTail);
    }
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(DslError::InvalidConfig(format!("eta = {eta} must lie in (0, 1]")));
    }
    let mut rows = Vec::new();
    for (&j, members) in &profile.layers {
        let mut candidates = 0;
        let mut weight: f64 = 0.0;
        for &(i, tuples) in members {
            let e = &profile.shapes[i];
            candidates += tuples * e.joint_cells;
            if e.joint_cells > 0 {
                weight = weight.max(e.weight(r, s, profile.n_mu, profile.n_nu));
            }
        }
        if candidates == 0 {
            continue;
        }
        let weight = weight * (-(j as f64) * sigma).exp2();
        let omega = profile.omega[j as usize + 1].to_f64();
        rows.push(LayerRow { j, candidates, weight, omega, bound: weight * omega / eta });
    }
    let tail_constant = profile.max_weight(r, s);
    let tail = tail_constant / eta * tail_sum(sigma, profile.dim, profile.cutoff)?;
    let total = rows.iter().map(|r| r.bound).sum::<f64>() + tail;
    Ok(LayerTable {
        rows,
        cutoff: profile.cutoff,
        sigma,
        eta,
        tail_constant,
        tail,
        total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::{build_p, build_z, lift_zygmund};

    fn zygmund_profile(m: u32, k: u32, cutoff: u32) -> CandidateProfile {
        let cfg = NetConfig::new(m, k);
        let p = lift_zygmund(&build_p(m), m).unwrap();
        let z = lift_zygmund(&build_z(&build_p(m), &cfg).unwrap(), m).unwrap();
        let mu = PointMassMeasure::new(&p.points).unwrap();
        let nu = PointMassMeasure::new(&z.points).unwrap();
        let w = Window::for_points(p.points.iter().chain(&z.points));
        CandidateProfile::build(&mu, &nu, FamilyKind::Zygmund, cutoff, &w).unwrap()
    }

    #[test]
    fn pareto_frontier() {
        let f = pareto([(1, 5), (2, 2), (3, 1), (2, 4), (1, 1)].into_iter());
        assert_eq!(f, vec![(3, 1), (2, 4), (1, 5)]);
    }

    #[test]
    fn tail_matches_direct_sum() {
        let direct: f64 = (11..4000u64).map(|j| binomial(j + 3, 3) * (-(j as f64) / 3.0).exp2()).sum();
        let t = tail_sum(4.0 / 3.0, 3, 10).unwrap();
        assert!(t >= direct && t <= direct * 1.001, "{t} {direct}");
        assert!(tail_sum(1.0, 2, 5).is_err());
    }

    #[test]
    fn eta_scaling_and_truncation() {
        let prof = zygmund_profile(1, 1, 12);
        let a = layered_upper_bound(&prof, 1.0, 1.0, 0.5).unwrap();
        let b = layered_upper_bound(&prof, 1.0, 1.0, 0.25).unwrap();
        assert!((b.total - 2.0 * a.total).abs() <= 1e-12 * b.total);
        assert!(a.total.is_finite() && a.total > 0.0);
        let longer = zygmund_profile(1, 1, 14);
        let c = layered_upper_bound(&longer, 1.0, 1.0, 0.5).unwrap();
        assert!(c.total <= a.total * (1.0 + 1e-12));
        let shared: Vec<_> = a.rows.iter().collect();
        for (x, y) in shared.iter().zip(&c.rows) {
            assert_eq!(*x, y);
        }
    }

    #[test]
    fn degenerate_supports_rejected() {
        use crate::dyadic::Point;
        let d = |n, e| DyadicRational::new(n, e);
        let mu = PointMassMeasure::new(&[Point::new(&[d(1, 2), d(1, 2)]).unwrap()]).unwrap();
        let nu = PointMassMeasure::new(&[Point::new(&[d(1, 2), d(3, 3)]).unwrap()]).unwrap();
        assert!(CandidateProfile::build(&mu, &nu, FamilyKind::Full, 8, &Window::new(-4, 6)).is_err());
    }
}
