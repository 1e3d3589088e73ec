//! Exact η-sparsity feasibility.
//!
//! The rectangles cut space into atoms (products of elementary segments
//! between consecutive endpoints); atoms with the same set of containing
//! rectangles are merged into one supply node. Each rectangle demands
//! `η|R|`, and the collection is η-sparse iff the max-flow saturates every
//! demand.

use std::collections::HashMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{dyadic_to_ratio, ratio_str};
use crate::dyadic::{DyadicRational, DyadicRect};
use crate::error::{DslError, Result};
use crate::flow::{Cap, FlowNetwork};

/// A slice `[from, to)` (fractions along the first axis) of one atom.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct WitnessPiece {
    pub lo: Vec<DyadicRational>,
    pub hi: Vec<DyadicRational>,
    #[serde(with = "ratio_str")]
    pub from: Cap,
    #[serde(with = "ratio_str")]
    pub to: Cap,
}

impl WitnessPiece {
    pub fn measure(&self) -> Cap {
        let vol = self
            .lo
            .iter()
            .zip(&self.hi)
            .fold(DyadicRational::ONE, |acc, (&l, &h)| acc * (h - l));
        dyadic_to_ratio(vol) * (self.to - self.from)
    }
}

/// `E_R` for every rectangle, as disjoint atom slices.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct Witness {
    pub sets: Vec<Vec<WitnessPiece>>,
}

/// A subfamily violating `η Σ|R| <= |⋃R|`.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct HallCertificate {
    pub subfamily: Vec<usize>,
    pub rects: Vec<DyadicRect>,
    #[serde(with = "ratio_str")]
    pub demand: Cap,
    #[serde(with = "ratio_str")]
    pub union_measure: Cap,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "lowercase")]
pub enum SparseOutcome {
    Feasible(Witness),
    Infeasible(HallCertificate),
}

impl SparseOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, SparseOutcome::Feasible(_))
    }
}

type Mask = Vec<u64>;

struct Segment {
    lo: DyadicRational,
    hi: DyadicRational,
    mask: Mask,
}

struct AtomClass {
    mask: Mask,
    measure: Cap,
    atoms: Vec<[usize; 3]>,
}

fn words(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

fn axis_segments(rects: &[DyadicRect], axis: usize) -> Vec<Segment> {
    let mut ends: Vec<DyadicRational> = rects
        .iter()
        .flat_map(|r| [r.intervals()[axis].start(), r.intervals()[axis].end()])
        .collect();
    ends.sort();
    ends.dedup();
    ends.windows(2)
        .filter_map(|w| {
            let mut mask = vec![0u64; words(rects.len())];
            for (i, r) in rects.iter().enumerate() {
                let iv = r.intervals()[axis];
                if iv.start() <= w[0] && w[1] <= iv.end() {
                    mask[i / 64] |= 1 << (i % 64);
                }
            }
            mask.iter().any(|&m| m != 0).then(|| Segment { lo: w[0], hi: w[1], mask })
        })
        .collect()
}

/// Atoms covered by at least one rectangle, merged by containment pattern,
/// in first-seen order.
fn atom_classes(rects: &[DyadicRect]) -> Result<(Vec<Vec<Segment>>, Vec<AtomClass>)> {
    let Some(first) = rects.first() else {
        return Ok((Vec::new(), Vec::new()));
    };
    if rects.iter().any(|r| r.family() != first.family()) {
        return Err(DslError::MixedFamilies);
    }
    let dim = first.intervals().len();
    let segs: Vec<Vec<Segment>> = (0..dim).map(|a| axis_segments(rects, a)).collect();
    let mut index: HashMap<Mask, usize> = HashMap::new();
    let mut classes: Vec<AtomClass> = Vec::new();
    let mut add = |mask: &[u64], atom: [usize; 3], vol: DyadicRational| {
        let id = *index.entry(mask.to_vec()).or_insert_with(|| {
            classes.push(AtomClass {
                mask: mask.to_vec(),
                measure: Cap::zero(),
                atoms: Vec::new(),
            });
            classes.len() - 1
        });
        classes[id].measure += dyadic_to_ratio(vol);
        classes[id].atoms.push(atom);
    };
    let and = |a: &[u64], b: &[u64], out: &mut Vec<u64>| {
        out.clear();
        out.extend(a.iter().zip(b).map(|(x, y)| x & y));
        out.iter().any(|&w| w != 0)
    };
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    for (i, sx) in segs[0].iter().enumerate() {
        let lx = sx.hi - sx.lo;
        if dim == 1 {
            add(&sx.mask, [i, 0, 0], lx);
            continue;
        }
        for (j, sy) in segs[1].iter().enumerate() {
            if !and(&sx.mask, &sy.mask, &mut m1) {
                continue;
            }
            let lxy = lx * (sy.hi - sy.lo);
            if dim == 2 {
                add(&m1, [i, j, 0], lxy);
                continue;
            }
            for (l, sz) in segs[2].iter().enumerate() {
                if and(&m1, &sz.mask, &mut m2) {
                    add(&m2, [i, j, l], lxy * (sz.hi - sz.lo));
                }
            }
        }
    }
    Ok((segs, classes))
}

fn has(mask: &[u64], i: usize) -> bool {
    mask[i / 64] >> (i % 64) & 1 == 1
}

/// `|⋃ R|`, exactly.
pub fn union_measure(rects: &[DyadicRect]) -> Result<Cap> {
    let (_, classes) = atom_classes(rects)?;
    Ok(classes.iter().map(|c| c.measure).sum())
}

pub fn check_sparse(rects: &[DyadicRect], eta: Cap) -> Result<SparseOutcome> {
    if eta <= Cap::zero() || eta > Cap::from_integer(1) {
        return Err(DslError::InvalidConfig(format!("eta = {eta} must lie in (0, 1]")));
    }
    if rects.is_empty() {
        return Ok(SparseOutcome::Feasible(Witness { sets: Vec::new() }));
    }
    let (segs, classes) = atom_classes(rects)?;
    let n = rects.len();
    let source = 0;
    let sink = 1 + n + classes.len();
    let mut net = FlowNetwork::new(sink + 1);
    let demands: Vec<Cap> = rects.iter().map(|r| eta * dyadic_to_ratio(r.measure())).collect();
    let total: Cap = demands.iter().sum();
    let bound = total + Cap::from_integer(1);
    for (i, d) in demands.iter().enumerate() {
        net.add_edge(source, 1 + i, *d);
    }
    let mut links = Vec::new();
    for (c, class) in classes.iter().enumerate() {
        for i in 0..n {
            if has(&class.mask, i) {
                links.push((i, c, net.add_edge(1 + i, 1 + n + c, bound)));
            }
        }
        net.add_edge(1 + n + c, sink, class.measure);
    }
    let flow = net.max_flow(source, sink, bound);
    if flow < total {
        let side = net.source_side(source);
        let subfamily: Vec<usize> = (0..n).filter(|&i| side[1 + i]).collect();
        let chosen: Vec<DyadicRect> = subfamily.iter().map(|&i| rects[i]).collect();
        let demand = subfamily.iter().map(|&i| demands[i]).sum();
        return Ok(SparseOutcome::Infeasible(HallCertificate {
            union_measure: union_measure(&chosen)?,
            subfamily,
            rects: chosen,
            demand,
        }));
    }

    // Slice each class's atoms, in order, among the rectangles it feeds.
    let mut sets: Vec<Vec<WitnessPiece>> = vec![Vec::new(); n];
    let mut per_class: Vec<Vec<(usize, Cap)>> = vec![Vec::new(); classes.len()];
    for (i, c, e) in links {
        let f = net.flow(e);
        if f > Cap::zero() {
            per_class[c].push((i, f));
        }
    }
    let dim = rects[0].intervals().len();
    for (c, class) in classes.iter().enumerate() {
        let mut atom = 0;
        let mut offset = Cap::zero();
        for &(i, mut need) in &per_class[c] {
            while need > Cap::zero() {
                let a = class.atoms[atom];
                let lo: Vec<_> = (0..dim).map(|ax| segs[ax][a[ax]].lo).collect();
                let hi: Vec<_> = (0..dim).map(|ax| segs[ax][a[ax]].hi).collect();
                let vol = lo
                    .iter()
                    .zip(&hi)
                    .fold(DyadicRational::ONE, |acc, (&l, &h)| acc * (h - l));
                let vol = dyadic_to_ratio(vol);
                let room = (Cap::from_integer(1) - offset) * vol;
                let take = if need < room { need } else { room };
                let to = offset + take / vol;
                sets[i].push(WitnessPiece { lo, hi, from: offset, to });
                need -= take;
                if to == Cap::from_integer(1) {
                    atom += 1;
                    offset = Cap::zero();
                } else {
                    offset = to;
                }
            }
        }
    }
    Ok(SparseOutcome::Feasible(Witness { sets }))
}

/// Re-checks a witness from scratch: pieces inside their rectangle, enough
/// measure, and pairwise disjoint.
pub fn validate_witness(rects: &[DyadicRect], eta: Cap, w: &Witness) -> bool {
    if w.sets.len() != rects.len() {
        return false;
    }
    for (r, set) in rects.iter().zip(&w.sets) {
        let inside = set.iter().all(|p| {
            p.from >= Cap::zero()
                && p.from < p.to
                && p.to <= Cap::from_integer(1)
                && r.intervals().iter().enumerate().all(|(a, iv)| iv.start() <= p.lo[a] && p.hi[a] <= iv.end())
        });
        let total: Cap = set.iter().map(|p| p.measure()).sum();
        if !inside || total < eta * dyadic_to_ratio(r.measure()) {
            return false;
        }
    }
    let pieces: Vec<&WitnessPiece> = w.sets.iter().flatten().collect();
    for (i, p) in pieces.iter().enumerate() {
        for q in &pieces[i + 1..] {
            let overlap = (0..p.lo.len()).all(|a| p.lo[a] < q.hi[a] && q.lo[a] < p.hi[a]);
            if !overlap {
                continue;
            }
            let same_atom = p.lo == q.lo && p.hi == q.hi;
            if !same_atom || (p.from < q.to && q.from < p.to) {
                return false;
            }
        }
    }
    true
}
