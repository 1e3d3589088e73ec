//! Point families: the bit-reversal net `P`, the companion set `Z`, their
//! Zygmund lifts and the flag-compatible `Z`.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dyadic::{dyadic_distance, DyadicRational, FamilyKind, Point};
use crate::error::{DslError, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct NetConfig {
    /// Scale parameter: `#P = 2^(2m+1)`.
    pub m: u32,
    /// Gap parameter: each `z` sits at squared distance `2^-(2m+k)` from its parent.
    pub k: u32,
    pub offset_seed: u64,
    /// Extra resolution bits used to place `Z` off the grid of `P`.
    pub fine_guard: u32,
}

impl NetConfig {
    pub fn new(m: u32, k: u32) -> Self {
        NetConfig {
            m,
            k,
            offset_seed: 0,
            fine_guard: 2,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.offset_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.k == 0 {
            return Err(DslError::InvalidConfig("m and k must be positive".into()));
        }
        if self.k > self.m {
            return Err(DslError::InvalidConfig(format!(
                "k = {} exceeds m = {}",
                self.k, self.m
            )));
        }
        if self.fine_guard < 2 {
            return Err(DslError::InvalidConfig("fine_guard must be at least 2".into()));
        }
        if 2 * self.m + self.k + self.fine_guard > 60 {
            return Err(DslError::InvalidConfig("resolution exceeds 60 bits".into()));
        }
        Ok(())
    }

    /// Binary resolution of the `Z` coordinates.
    pub fn z_resolution(&self) -> u32 {
        2 * self.m + self.k + self.fine_guard
    }

    /// `#Z` lower bound demanded by the construction.
    pub fn required_z(&self) -> usize {
        self.m as usize * (1usize << (2 * self.m))
    }

    /// Splits `(a, b)`, `a + b = 2m + k`, used by the plain `Z`.
    pub fn splits(&self) -> Vec<(u32, u32)> {
        let total = 2 * self.m + self.k;
        (self.k..self.k + self.m).map(|a| (a, total - a)).collect()
    }

    /// Splits with `a >= b`, so the parent rectangle has `|I| <= |J|`.
    pub fn flag_splits(&self) -> Vec<(u32, u32)> {
        let total = 2 * self.m + self.k;
        let first = total.div_ceil(2);
        (first..first + self.m).map(|a| (a, total - a)).collect()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum FamilyTag {
    P,
    Z,
    PLift,
    ZLift,
    ZFlag,
}

impl FamilyTag {
    pub fn is_z(&self) -> bool {
        matches!(self, FamilyTag::Z | FamilyTag::ZLift | FamilyTag::ZFlag)
    }

    fn name(&self) -> &'static str {
        match self {
            FamilyTag::P => "P",
            FamilyTag::Z => "Z",
            FamilyTag::PLift => "P_lift",
            FamilyTag::ZLift => "Z_lift",
            FamilyTag::ZFlag => "Z_flag",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "P" => FamilyTag::P,
            "Z" => FamilyTag::Z,
            "P_lift" => FamilyTag::PLift,
            "Z_lift" => FamilyTag::ZLift,
            "Z_flag" => FamilyTag::ZFlag,
            _ => return Err(DslError::Parse(format!("unknown family kind `{s}`"))),
        })
    }
}

/// Where a `z` came from: its parent's index in the companion `P`-family and
/// the split `(a, b)` of the common rectangle.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ParentLink {
    pub parent: usize,
    pub a: u32,
    pub b: u32,
}

#[derive(Clone, Default, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BuildLog {
    pub candidates: usize,
    /// Candidates that coincided with an earlier point after every retry.
    pub dropped_collision: usize,
    /// Candidates with some other `P` point strictly closer than the parent.
    pub dropped_locality: usize,
    /// Kept points whose parent distance is tied by another `P` point.
    pub kept_with_ties: usize,
    pub dropped_tie: usize,
    pub retries: usize,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PointFamily {
    pub kind: FamilyTag,
    pub dim: usize,
    pub m: u32,
    pub k: u32,
    pub seed: u64,
    pub points: Vec<Point>,
    /// Parallel to `points` for Z-kinds.
    pub parents: Option<Vec<ParentLink>>,
    /// Number of points of the `P`-family the parent indices refer to.
    pub parent_len: usize,
    pub log: BuildLog,
}

impl PointFamily {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn resolution(&self) -> u32 {
        self.points.iter().map(|p| p.resolution()).max().unwrap_or(0)
    }

    /// Structural invariants: dimension, unit cube, distinctness and
    /// totality of the parent map.
    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.points.len());
        for p in &self.points {
            if p.dim() != self.dim {
                return Err(DslError::DimensionMismatch {
                    expected: self.dim,
                    got: p.dim(),
                });
            }
            if !p.in_unit_cube() {
                return Err(DslError::Degenerate(format!("{p} lies outside the unit cube")));
            }
            if !seen.insert(*p) {
                return Err(DslError::Degenerate(format!("{p} appears twice")));
            }
        }
        if self.kind.is_z() {
            match &self.parents {
                Some(v) if v.len() == self.points.len() => {
                    if let Some(l) = v.iter().find(|l| l.parent >= self.parent_len) {
                        return Err(DslError::Degenerate(format!(
                            "parent index {} out of range",
                            l.parent
                        )));
                    }
                }
                _ => return Err(DslError::Degenerate("parent map is not total".into())),
            }
        }
        Ok(())
    }

    /// Line-oriented text form: a header line, then one point per line.
    pub fn write_text(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "# dsl-points kind={} dim={} m={} k={} seed={} parent_len={}",
            self.kind.name(),
            self.dim,
            self.m,
            self.k,
            self.seed,
            self.parent_len
        )?;
        for (i, p) in self.points.iter().enumerate() {
            let mut line = p
                .coords()
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            if let Some(links) = &self.parents {
                let l = links[i];
                let _ = write!(line, " | {} {} {}", l.parent, l.a, l.b);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_text(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| DslError::Parse("empty point file".into()))??;
        let rest = header
            .strip_prefix("# dsl-points ")
            .ok_or_else(|| DslError::Parse("missing `# dsl-points` header".into()))?;
        let mut kind = None;
        let (mut dim, mut m, mut k, mut seed, mut parent_len) = (0usize, 0u32, 0u32, 0u64, 0usize);
        for kv in rest.split_whitespace() {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| DslError::Parse(format!("bad header field `{kv}`")))?;
            let bad = |_| DslError::Parse(format!("bad value in `{kv}`"));
            match key {
                "kind" => kind = Some(FamilyTag::parse(val)?),
                "dim" => dim = val.parse().map_err(bad)?,
                "m" => m = val.parse().map_err(bad)?,
                "k" => k = val.parse().map_err(bad)?,
                "seed" => seed = val.parse().map_err(bad)?,
                "parent_len" => parent_len = val.parse().map_err(bad)?,
                _ => return Err(DslError::Parse(format!("unknown header field `{key}`"))),
            }
        }
        let kind = kind.ok_or_else(|| DslError::Parse("header lacks kind".into()))?;
        let mut points = Vec::new();
        let mut parents = kind.is_z().then(Vec::new);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let (coords, link) = match line.split_once('|') {
                Some((c, l)) => (c, Some(l)),
                None => (line.as_str(), None),
            };
            let cs: Vec<DyadicRational> = coords
                .split_whitespace()
                .map(str::parse)
                .collect::<Result<_>>()?;
            points.push(Point::new(&cs)?);
            match (&mut parents, link) {
                (Some(v), Some(l)) => {
                    let nums: Vec<u64> = l
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| DslError::Parse(format!("bad link `{l}`"))))
                        .collect::<Result<_>>()?;
                    if nums.len() != 3 {
                        return Err(DslError::Parse(format!("bad link `{l}`")));
                    }
                    v.push(ParentLink {
                        parent: nums[0] as usize,
                        a: nums[1] as u32,
                        b: nums[2] as u32,
                    });
                }
                (None, None) => {}
                _ => return Err(DslError::Parse(format!("unexpected parent link in `{line}`"))),
            }
        }
        Ok(PointFamily {
            kind,
            dim,
            m,
            k,
            seed,
            points,
            parents,
            parent_len,
            log: BuildLog::default(),
        })
    }
}

/// Reverses the low `bits` bits of `i`.
pub fn bit_reverse(i: u64, bits: u32) -> u64 {
    if bits == 0 {
        return 0;
    }
    i.reverse_bits() >> (64 - bits)
}

/// The Hammersley bit-reversal net with `2^(2m+1)` points: every dyadic
/// rectangle of area `2^-(2m+1)` in the unit square holds exactly one point.
pub fn build_p(m: u32) -> PointFamily {
    let n = 2 * m + 1;
    let points = (0..1u64 << n)
        .map(|i| {
            Point::new(&[
                DyadicRational::new(i as i128, n),
                DyadicRational::new(bit_reverse(i, n) as i128, n),
            ])
            .expect("two coordinates")
        })
        .collect();
    PointFamily {
        kind: FamilyTag::P,
        dim: 2,
        m,
        k: 0,
        seed: 0,
        points,
        parents: None,
        parent_len: 0,
        log: BuildLog::default(),
    }
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn placement_hash(seed: u64, parent: usize, a: u32, attempt: u32) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ parent as u64);
    h = splitmix64(h ^ ((a as u64) << 32 | attempt as u64));
    h
}

/// Length of the common binary prefix of two `res`-bit coordinates, capped
/// at `cap`.
fn common_prefix(u: u64, v: u64, res: u32, cap: u32) -> u32 {
    let diff = (u ^ v) << (64 - res);
    (if diff == 0 { res } else { diff.leading_zeros() }).min(cap)
}

/// Fills the free bits of one coordinate below a fixed prefix of length
/// `fixed`, so that no forbidden prefix `(len, value)` is matched and the
/// result has a nonzero bit below depth `grid_bits`. Depth-first, with the
/// child order at each depth taken from `order`.
fn fill_free_bits(
    prefix: u64,
    fixed: u32,
    res: u32,
    grid_bits: u32,
    forbidden: &HashSet<(u32, u64)>,
    order: u64,
) -> Option<u64> {
    fn go(v: u64, depth: u32, res: u32, grid_bits: u32, forbidden: &HashSet<(u32, u64)>, order: u64) -> Option<u64> {
        if depth == res {
            let off_grid = v & ((1u64 << (res - grid_bits)) - 1) != 0;
            return off_grid.then_some(v);
        }
        let d = depth + 1;
        let first = (order >> (d % 64)) & 1;
        for bit in [first, first ^ 1] {
            let w = v | (bit << (res - d));
            if forbidden.contains(&(d, w >> (res - d))) {
                continue;
            }
            if let Some(found) = go(w, d, res, grid_bits, forbidden, order) {
                return Some(found);
            }
        }
        None
    }
    go(prefix, fixed, res, grid_bits, forbidden, order)
}

/// One candidate's placement problem. The fixed part of each coordinate is
/// the parent prefix with the next bit flipped; every other `P` point either
/// already violates the distance bound or forbids one prefix of the free
/// bits on a single axis.
struct Candidate {
    zx: u64,
    zy: u64,
    a: u32,
    b: u32,
}

impl Candidate {
    fn new(px: u64, py: u64, a: u32, b: u32, res: u32) -> Self {
        let fixed = |v: u64, split: u32| {
            let keep = !0u64 << (res - split) & ((1u64 << res) - 1);
            (v & keep) | (!v & (1u64 << (res - split - 1)))
        };
        Candidate {
            zx: fixed(px, a),
            zy: fixed(py, b),
            a,
            b,
        }
    }

    /// Forbidden prefixes for `z` to keep `cx + cy < bound` against every
    /// other point, or `None` when some point already breaks it.
    fn constraints(
        &self,
        others: impl Iterator<Item = (u64, u64)>,
        res: u32,
        bound: u32,
    ) -> Option<(HashSet<(u32, u64)>, HashSet<(u32, u64)>)> {
        let (fa, fb) = (self.a + 1, self.b + 1);
        let mut fx = HashSet::new();
        let mut fy = HashSet::new();
        for (qx, qy) in others {
            let cx = common_prefix(qx, self.zx, res, fa);
            let cy = common_prefix(qy, self.zy, res, fb);
            match (cx == fa, cy == fb) {
                (false, false) if cx + cy >= bound => return None,
                (false, false) => {}
                (false, true) => {
                    let len = bound.checked_sub(cx).filter(|&l| l > fb)?;
                    if len <= res {
                        fy.insert((len, qy >> (res - len)));
                    }
                }
                (true, false) => {
                    let len = bound.checked_sub(cy).filter(|&l| l > fa)?;
                    if len <= res {
                        fx.insert((len, qx >> (res - len)));
                    }
                }
                (true, true) => return None,
            }
        }
        Some((fx, fy))
    }
}

const MAX_ATTEMPTS: u32 = 32;

fn build_z_with(p: &PointFamily, cfg: &NetConfig, splits: &[(u32, u32)], kind: FamilyTag) -> Result<PointFamily> {
    cfg.validate()?;
    if p.kind != FamilyTag::P || p.m != cfg.m {
        return Err(DslError::InvalidConfig("Z needs the P family built for the same m".into()));
    }
    let res = cfg.z_resolution();
    let grid_bits = 2 * cfg.m + 1;
    let scale = res - grid_bits;
    let to_bits = |c: DyadicRational| (c.numerator() as u64) << (grid_bits - c.exponent()) << scale;
    let coords: Vec<(u64, u64)> = p.points.iter().map(|q| (to_bits(q.coord(0)), to_bits(q.coord(1)))).collect();
    let strict = 2 * cfg.m + cfg.k;
    let mut taken: HashSet<Point> = p.points.iter().copied().collect();
    let mut placed: Vec<(Point, ParentLink, bool)> = Vec::new();
    let mut log = BuildLog::default();

    for (pi, &(px, py)) in coords.iter().enumerate() {
        for &(a, b) in splits {
            log.candidates += 1;
            let cand = Candidate::new(px, py, a, b, res);
            let others = || coords.iter().enumerate().filter(|&(qi, _)| qi != pi).map(|(_, &c)| c);
            // Tie-free placement first, then one with ties but nothing closer.
            let modes = [(strict, false), (strict + 1, true)];
            let Some((fx, fy, tied)) = modes
                .iter()
                .find_map(|&(bound, tied)| cand.constraints(others(), res, bound).map(|(fx, fy)| (fx, fy, tied)))
            else {
                log.dropped_locality += 1;
                continue;
            };
            let mut found = None;
            let mut blocked = false;
            for attempt in 0..MAX_ATTEMPTS {
                let h = placement_hash(cfg.offset_seed, pi, a, attempt);
                let zx = fill_free_bits(cand.zx, a + 1, res, grid_bits, &fx, h);
                let zy = fill_free_bits(cand.zy, b + 1, res, grid_bits, &fy, splitmix64(h));
                let (Some(zx), Some(zy)) = (zx, zy) else {
                    blocked = true;
                    break;
                };
                let z = Point::new(&[DyadicRational::new(zx as i128, res), DyadicRational::new(zy as i128, res)])?;
                if !taken.contains(&z) {
                    log.retries += attempt as usize;
                    found = Some(z);
                    break;
                }
            }
            let Some(z) = found else {
                if blocked {
                    log.dropped_locality += 1;
                } else {
                    log.dropped_collision += 1;
                }
                continue;
            };
            debug_assert_eq!(
                dyadic_distance(&p.points[pi], &z, FamilyKind::Full)?.squared,
                DyadicRational::pow2(-(strict as i32))
            );
            taken.insert(z);
            placed.push((z, ParentLink { parent: pi, a, b }, tied));
        }
    }
    let required = cfg.required_z();
    // Tied candidates are only kept when the tie-free ones fall short.
    let tie_free = placed.iter().filter(|c| !c.2).count();
    if tie_free >= required {
        log.dropped_tie = placed.len() - tie_free;
        placed.retain(|c| !c.2);
    } else {
        log.kept_with_ties = placed.len() - tie_free;
    }
    let (points, parents): (Vec<Point>, Vec<ParentLink>) = placed.into_iter().map(|(z, l, _)| (z, l)).unzip();
    if points.len() < required {
        return Err(DslError::InsufficientZ {
            kept: points.len(),
            required,
        });
    }
    Ok(PointFamily {
        kind,
        dim: 2,
        m: cfg.m,
        k: cfg.k,
        seed: cfg.offset_seed,
        points,
        parents: Some(parents),
        parent_len: p.len(),
        log,
    })
}

/// The companion set `Z`: for every `p` and every split `(a, b)` one point
/// whose common rectangle with `p` has side lengths `2^-a × 2^-b`.
pub fn build_z(p: &PointFamily, cfg: &NetConfig) -> Result<PointFamily> {
    build_z_with(p, cfg, &cfg.splits(), FamilyTag::Z)
}

/// `Z` restricted to flag-compatible parent rectangles (`a >= b`).
pub fn build_z_flag(p: &PointFamily, cfg: &NetConfig) -> Result<PointFamily> {
    build_z_with(p, cfg, &cfg.flag_splits(), FamilyTag::ZFlag)
}

/// Union of the copies `F × {j 2^-2m}`, `j = 0 .. 2^2m - 1`, ordered by
/// height. Parent links point into the lifted `P` at the same height.
pub fn lift_zygmund(f: &PointFamily, m: u32) -> Result<PointFamily> {
    if f.dim != 2 {
        return Err(DslError::DimensionMismatch {
            expected: 2,
            got: f.dim,
        });
    }
    let levels = 1usize << (2 * m);
    let mut points = Vec::with_capacity(f.len() * levels);
    let mut parents = f.parents.as_ref().map(|_| Vec::with_capacity(f.len() * levels));
    for j in 0..levels {
        let h = DyadicRational::new(j as i128, 2 * m);
        for (i, p) in f.points.iter().enumerate() {
            points.push(p.extended(h)?);
            if let (Some(out), Some(src)) = (&mut parents, &f.parents) {
                let l = src[i];
                out.push(ParentLink {
                    parent: j * f.parent_len + l.parent,
                    ..l
                });
            }
        }
    }
    let kind = if f.kind.is_z() {
        FamilyTag::ZLift
    } else {
        FamilyTag::PLift
    };
    Ok(PointFamily {
        kind,
        dim: 3,
        m: f.m,
        k: f.k,
        seed: f.seed,
        points,
        parents,
        parent_len: f.parent_len * levels,
        log: f.log.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(n: i128, e: u32) -> DyadicRational {
        DyadicRational::new(n, e)
    }

    #[test]
    fn p_small_cases() {
        let p0 = build_p(0);
        assert_eq!(p0.len(), 2);
        assert_eq!(p0.points[0].coords(), &[d(0, 0), d(0, 0)]);
        assert_eq!(p0.points[1].coords(), &[d(1, 1), d(1, 1)]);
        assert_eq!(build_p(1).len(), 8);
        p0.validate().unwrap();
    }

    #[test]
    fn bit_reverse_examples() {
        assert_eq!(bit_reverse(0b001, 3), 0b100);
        assert_eq!(bit_reverse(0b110, 3), 0b011);
        assert_eq!(bit_reverse(1, 1), 1);
    }

    #[test]
    fn candidate_keeps_prefix_and_flips() {
        // resolution 8, parent 0b1011_0000, split 2 -> keep "10", flip depth 3.
        let c = Candidate::new(0b1011_0000, 0, 2, 1, 8);
        assert_eq!(c.zx, 0b1000_0000);
        assert_eq!(common_prefix(c.zx, 0b1011_0000, 8, 8), 2);
    }

    #[test]
    fn free_bits_avoid_forbidden_prefixes() {
        let forbidden: HashSet<(u32, u64)> = [(4, 0b1000), (5, 0b10010)].into_iter().collect();
        for order in 0..16 {
            let v = fill_free_bits(0b1000_0000, 3, 8, 5, &forbidden, order).unwrap();
            assert_eq!(v >> 5, 0b100);
            assert_eq!(v >> 4, 0b1001);
            assert_ne!(v >> 3, 0b10010);
            assert_ne!(v & 0b111, 0);
        }
        let all: HashSet<(u32, u64)> = [(4, 0b1000), (4, 0b1001)].into_iter().collect();
        assert!(fill_free_bits(0b1000_0000, 3, 8, 5, &all, 0).is_none());
    }

    #[test]
    fn split_ranges() {
        let cfg = NetConfig::new(2, 1);
        assert_eq!(cfg.splits(), vec![(1, 4), (2, 3)]);
        assert_eq!(cfg.flag_splits(), vec![(3, 2), (4, 1)]);
        assert!(cfg.flag_splits().iter().all(|&(a, b)| a >= b && 2 * a >= 5));
    }

    #[test]
    fn z_counts_and_parent_distance() {
        let cfg = NetConfig::new(2, 1);
        let p = build_p(2);
        let z = build_z(&p, &cfg).unwrap();
        assert!(z.len() >= cfg.required_z());
        assert!(z.len() <= 64);
        z.validate().unwrap();
        let target = DyadicRational::pow2(-5);
        for (zp, link) in z.points.iter().zip(z.parents.as_ref().unwrap()) {
            let dist = dyadic_distance(&p.points[link.parent], zp, FamilyKind::Full).unwrap();
            assert_eq!(dist.squared, target);
        }
        let zf = build_z_flag(&p, &cfg).unwrap();
        assert!(zf.len() <= z.len());
    }

    #[test]
    fn config_validation() {
        assert!(NetConfig::new(1, 2).validate().is_err());
        assert!(NetConfig::new(0, 0).validate().is_err());
        let mut c = NetConfig::new(2, 1);
        c.fine_guard = 1;
        assert!(c.validate().is_err());
    }

    #[test]
    fn lift_single_point() {
        let mut f = build_p(0);
        f.points.truncate(1);
        let l = lift_zygmund(&f, 1).unwrap();
        let heights: Vec<_> = l.points.iter().map(|p| p.coord(2)).collect();
        assert_eq!(heights, vec![d(0, 0), d(1, 2), d(1, 1), d(3, 2)]);
    }

    #[test]
    fn text_round_trip() {
        let cfg = NetConfig::new(1, 1).with_seed(7);
        let p = build_p(1);
        let z = build_z(&p, &cfg).unwrap();
        for fam in [&p, &z] {
            let text = fam.to_text();
            let back = PointFamily::read_text(text.as_bytes()).unwrap();
            assert_eq!(back.points, fam.points);
            assert_eq!(back.parents, fam.parents);
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = NetConfig::new(2, 2).with_seed(3);
        let p = build_p(2);
        assert_eq!(build_z(&p, &cfg).unwrap(), build_z(&p, &cfg).unwrap());
    }
}
