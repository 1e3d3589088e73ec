//! One PASS/FAIL line per acceptance criterion, with details. Runs without
//! the test harness so the lines always print.
//!
//! Criteria 2, 3 and 11 include k = 1 configurations, where the uniqueness
//! clause cannot hold: next to each parent there is a rectangle of area
//! 2^-(2m+1), so the net puts exactly one point of P in it, and that point
//! ties with the parent at squared distance 2^-(2m+1). Those criteria
//! report FAIL; the test only checks that uniqueness on k = 1 is the sole
//! cause.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::time::Instant;

use dsl_core::certify::{certify_2d, certify_flag, certify_zygmund, CertReport};
use dsl_core::dyadic::{bucket_counts, dyadic_distance, DyadicInterval, DyadicRational, FamilyKind, Window};
use dsl_core::experiment::{build_families, run_experiment, ExperimentConfig, ExperimentReport, Setting};
use dsl_core::flow::Cap;
use dsl_core::measure::{maximal_pairing, omega_measure, GridFunction, PointMassMeasure};
use dsl_core::net::{build_p, build_z, build_z_flag, lift_zygmund, NetConfig};
use dsl_core::sparse::{
    cz_sparse_dominate_1param, per_rectangle_bound, sparse_form, validate_witness, CandidateProfile,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    lines: Vec<String>,
    /// Failures attributed to k = 1 uniqueness.
    k1_unique_only: bool,
}

impl Outcome {
    fn new() -> Self {
        Outcome { pass: true, lines: Vec::new(), k1_unique_only: true }
    }

    fn check(&mut self, ok: bool, line: String) {
        self.pass &= ok;
        self.lines.push(format!("{} {line}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, line: String) {
        self.lines.push(format!("     {line}"));
    }

    /// Records a certification; a failure other than k = 1 uniqueness marks
    /// the outcome as unexpected.
    fn cert(&mut self, label: &str, k: u32, rep: &CertReport) {
        let failed: Vec<&str> = rep.clauses.iter().filter(|c| !c.pass).map(|c| c.id.as_str()).collect();
        self.k1_unique_only &= failed.is_empty() || (k == 1 && failed == ["c.unique"]);
        self.check(failed.is_empty(), format!("{label}: {} clauses, failed {failed:?}", rep.clauses.len()));
    }
}

fn ratio_spread(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (a, b) if a == 0.0 && b == 0.0 => 1.0,
            (a, b) if a == 0.0 || b == 0.0 => f64::INFINITY,
            (a, b) => (a / b).max(b / a),
        })
        .fold(1.0, f64::max)
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    for m in 0..=4u32 {
        let p = build_p(m);
        let n = 1usize << (2 * m + 1);
        let mut ok = p.len() == n;
        let mut min = DyadicRational::pow2(10);
        for (i, a) in p.points.iter().enumerate() {
            for b in &p.points[i + 1..] {
                min = min.min(dyadic_distance(a, b, FamilyKind::Full).unwrap().squared);
            }
        }
        ok &= p.len() < 2 || min == DyadicRational::pow2(-2 * m as i32);
        let big = 2 * m as i32 + 1;
        let mut rects = 0;
        for a in 0..=big {
            for b in 0..=big - a {
                let counts = bucket_counts(&p.points, &[a, b, 0]);
                let want = 1u32 << (big - a - b);
                rects += 1u64 << (a + b);
                ok &= counts.len() == 1 << (a + b) && counts.values().all(|&c| c == want);
            }
        }
        out.check(ok, format!("m={m}: #P={} min squared distance {min}, {rects} rectangles exact", p.len()));
    }
    out
}

fn criterion_2(setting: Setting) -> Outcome {
    let mut out = Outcome::new();
    let mut by_k: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for m in 2..=4u32 {
        for k in (1..=2u32).filter(|&k| k < m) {
            let cfg = NetConfig::new(m, k);
            let p = build_p(m);
            let (z, rep) = if setting == Setting::Flag {
                let z = build_z_flag(&p, &cfg).unwrap();
                let rep = certify_flag(&p, &z, &cfg).unwrap();
                (z, rep)
            } else {
                let z = build_z(&p, &cfg).unwrap();
                let rep = certify_2d(&p, &z, &cfg).unwrap();
                (z, rep)
            };
            out.cert(&format!("m={m} k={k} #Z={} (need {})", z.len(), cfg.required_z()), k, &rep);
            let c = rep.constant("d_ii.z_bound").unwrap();
            out.note(format!("m={m} k={k}: max small-rectangle Z count = {:.0} = {c}·k", c * k as f64));
            by_k.entry(k).or_default().push(c);
        }
    }
    for (k, cs) in by_k {
        let spread = ratio_spread(&cs);
        out.check(spread <= 2.0, format!("k={k}: C across m = {cs:?}, spread {spread}"));
    }
    out
}

fn zygmund_cert(m: u32, k: u32) -> CertReport {
    let cfg = NetConfig::new(m, k);
    let p = build_p(m);
    let z = build_z(&p, &cfg).unwrap();
    certify_zygmund(&lift_zygmund(&p, m).unwrap(), &lift_zygmund(&z, m).unwrap(), &cfg).unwrap()
}

const ZYGMUND_GRID: [(u32, u32); 4] = [(1, 1), (2, 1), (2, 2), (3, 1)];

fn criterion_3(certified: &mut Vec<(u32, u32)>) -> Outcome {
    let mut out = Outcome::new();
    for (m, k) in ZYGMUND_GRID {
        let t = Instant::now();
        let rep = zygmund_cert(m, k);
        out.cert(&format!("m={m} k={k} ({} rectangles, {:.1}s)", rep.rectangles_scanned, t.elapsed().as_secs_f64()), k, &rep);
        if rep.certified() {
            certified.push((m, k));
        }
    }
    out
}

/// Experiments for the three exponent triples.
fn experiments(setting: Setting, m: u32, k: u32) -> Vec<ExperimentReport> {
    [(1.0, 1.0, Cap::new(1, 2)), (1.0, 2.0, Cap::new(1, 2)), (1.5, 1.5, Cap::new(1, 4))]
        .into_iter()
        .map(|(r, s, eta)| {
            let mut cfg = ExperimentConfig::new(setting, m, k);
            cfg.r = r;
            cfg.s = s;
            cfg.eta = eta;
            run_experiment(&cfg).unwrap()
        })
        .collect()
}

fn criterion_4(setting: Setting, configs: &[(u32, u32)]) -> Outcome {
    let mut out = Outcome::new();
    for &(m, k) in configs {
        let rep = run_experiment(&ExperimentConfig::new(setting, m, k)).unwrap();
        let p = rep.pairing.unwrap();
        out.check(p.lhs >= p.floor, format!("{} m={m} k={k}: <Mμ,ν> = {} >= {}", setting.name(), p.lhs, p.floor));
    }
    out.pass &= !configs.is_empty();
    out
}

fn criterion_5(setting: Setting, configs: &[(u32, u32)]) -> Outcome {
    let mut out = Outcome::new();
    for &(m, k) in configs {
        let (p, z) = build_families(setting, &NetConfig::new(m, k)).unwrap();
        let mu = PointMassMeasure::new(&p.points).unwrap();
        let nu = PointMassMeasure::new(&z.points).unwrap();
        for rep in experiments(setting, m, k) {
            let c = &rep.config;
            let u = rep.upper.as_ref().unwrap();
            let g = rep.greedy.as_ref().unwrap();
            let mut ok = u.total.is_finite() && g.value <= u.total;
            // Every prefix of the greedy collection is itself η-sparse.
            for len in 1..=g.rects.len() {
                let v = sparse_form(&g.rects[..len], &mu, &nu, c.r, c.s).unwrap();
                ok &= v <= u.total * (1.0 + TOL);
            }
            ok &= validate_witness(&g.rects, c.eta, &g.witness);
            let lhs = rep.pairing.as_ref().unwrap().lhs;
            out.check(
                ok,
                format!(
                    "{} m={m} k={k} r={} s={} eta={}: U={:.6} L_g={:.6} ({} rects{}), LHS/U={:.3}",
                    setting.name(),
                    c.r,
                    c.s,
                    c.eta,
                    u.total,
                    g.value,
                    g.rects.len(),
                    if g.truncated { ", pool truncated" } else { "" },
                    lhs / u.total
                ),
            );
        }
    }
    out.pass &= !configs.is_empty();
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let mut a1: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut a2: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    for (m, k) in ZYGMUND_GRID {
        let cfg = NetConfig::new(m, k);
        let (p, z) = build_families(Setting::Zygmund, &cfg).unwrap();
        let mu = PointMassMeasure::new(&p.points).unwrap();
        let nu = PointMassMeasure::new(&z.points).unwrap();
        let w = Window::for_points(p.points.iter().chain(&z.points));
        let prof = CandidateProfile::build(&mu, &nu, FamilyKind::Zygmund, CandidateProfile::default_cutoff(&cfg), &w).unwrap();
        let rep = per_rectangle_bound(&prof, &cfg, 1.0, 1.0);
        let finite = rep.a1.is_finite() && rep.a2.is_finite();
        out.check(finite, format!("m={m} k={k} r=s=1: A1={} A2={} (threshold 2^-{})", rep.a1, rep.a2, rep.threshold));
        a1.entry(k).or_default().push(rep.a1);
        a2.entry(k).or_default().push(rep.a2);
        for (r, s) in [(1.0, 2.0), (1.5, 1.5)] {
            let other = per_rectangle_bound(&prof, &cfg, r, s);
            out.note(format!("m={m} k={k} r={r} s={s}: A1={:.6} A2={:.6}", other.a1, other.a2));
        }
    }
    for k in a1.keys() {
        let (s1, s2) = (ratio_spread(&a1[k]), ratio_spread(&a2[k]));
        out.check(s1 <= 2.0 && s2 <= 2.0, format!("k={k}: consecutive-m spread A1 {s1}, A2 {s2}"));
    }
    out
}

fn criterion_7() -> Outcome {
    // The exhaustive Hall-condition comparison lives in tests/sparse_oracle.rs;
    // here a smaller independent run keeps the line self-contained.
    use dsl_core::dyadic::DyadicRect;
    use dsl_core::sparse::{check_sparse, SparseOutcome};
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut agree = 0;
    let mut total = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=12);
        let rects: Vec<DyadicRect> = (0..n)
            .map(|_| {
                let (lx, ly) = (rng.gen_range(0..=2), rng.gen_range(0..=2));
                let ivs = [DyadicInterval::new(lx, rng.gen_range(0..2i64 << lx)), DyadicInterval::new(ly, rng.gen_range(0..2i64 << ly))];
                DyadicRect::new(FamilyKind::Full, &ivs).unwrap()
            })
            .collect();
        let eta = Cap::new(rng.gen_range(1..=4), 4);
        // Cells of [0,2)^2 at level 2, as bitmasks.
        let masks: Vec<u64> = rects
            .iter()
            .map(|r| {
                let mut m = 0u64;
                for x in 0..8i64 {
                    for y in 0..8i64 {
                        let [ix, iy] = [r.intervals()[0], r.intervals()[1]];
                        if x >> (2 - ix.level) == ix.index && y >> (2 - iy.level) == iy.index {
                            m |= 1 << (x * 8 + y);
                        }
                    }
                }
                m
            })
            .collect();
        let area = |r: &DyadicRect| Cap::new(1, 1i128 << (r.intervals()[0].level + r.intervals()[1].level));
        let oracle = (1u32..1 << n).all(|s| {
            let members: Vec<usize> = (0..n).filter(|i| s >> i & 1 == 1).collect();
            let demand: Cap = members.iter().map(|&i| eta * area(&rects[i])).sum();
            let union = members.iter().fold(0u64, |acc, &i| acc | masks[i]).count_ones();
            demand <= Cap::new(union as i128, 16)
        });
        let ok = match check_sparse(&rects, eta).unwrap() {
            SparseOutcome::Feasible(w) => oracle && validate_witness(&rects, eta, &w),
            SparseOutcome::Infeasible(c) => {
                let demand: Cap = c.subfamily.iter().map(|&i| eta * area(&rects[i])).sum();
                let union = c.subfamily.iter().fold(0u64, |acc, &i| acc | masks[i]).count_ones();
                !oracle && demand > Cap::new(union as i128, 16)
            }
        };
        agree += usize::from(ok);
        total += 1;
    }
    out.check(agree == total, format!("{agree}/{total} collections agree with the Hall oracle"));
    out
}

fn criterion_8() -> Outcome {
    // Brute-force infimum over rectangles, 1000 pairs per family; see
    // tests/distance_oracle.rs for the full version.
    use dsl_core::dyadic::{DyadicRect, Point};
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for (family, dim) in [(FamilyKind::Full, 2), (FamilyKind::Zygmund, 3), (FamilyKind::Flag, 2)] {
        let tuples = |fine| family.level_tuples(dim, &Window::new(-3, fine)).unwrap();
        let (t9, t8) = (tuples(9), tuples(8));
        let mut agree = 0;
        for _ in 0..1000 {
            let mut draw = |q: Option<&Point>| {
                let c: Vec<DyadicRational> = (0..dim)
                    .map(|a| match q {
                        Some(q) if rng.gen_bool(0.15) => q.coord(a),
                        _ => {
                            let e = rng.gen_range(0..=5u32);
                            DyadicRational::new(rng.gen_range(0..(2i128 << e)), e)
                        }
                    })
                    .collect();
                Point::new(&c).unwrap()
            };
            let p = draw(None);
            let q = draw(Some(&p));
            let smallest = |ts: &[[i32; 3]]| {
                ts.iter()
                    .map(|t| DyadicRect::containing(family, &p, &t[..dim]))
                    .filter(|r| r.contains(&q))
                    .map(|r| r.measure())
                    .min()
                    .unwrap()
            };
            let (a, b) = (smallest(&t9), smallest(&t8));
            let brute = if a < b { DyadicRational::ZERO } else { a };
            agree += usize::from(dyadic_distance(&p, &q, family).unwrap().squared == brute);
        }
        out.check(agree == 1000, format!("{family:?}: {agree}/1000 pairs exact"));
    }
    out
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    for (family, dim) in [(FamilyKind::Full, 2), (FamilyKind::Flag, 2), (FamilyKind::Zygmund, 3)] {
        let mut table = Vec::new();
        let mut c_max: f64 = 0.0;
        let mut exact = true;
        for j in 0..=8u32 {
            let got = omega_measure(family, dim, j).unwrap().measure;
            // Ω_j is a union of unit cells: mark the cells of every clip box
            // ∏[0, 2^a_i) with Σ a_i <= j - 1 reached by a family rectangle.
            let mut cells: HashSet<[u32; 3]> = HashSet::new();
            if j > 0 {
                let reach = j as i32;
                let boxes: BTreeSet<[u32; 3]> = family
                    .level_tuples(dim, &Window::new(-reach, reach))
                    .unwrap()
                    .iter()
                    .map(|t| {
                        let mut a = [0u32; 3];
                        for i in 0..dim {
                            a[i] = (-t[i]).max(0) as u32;
                        }
                        a
                    })
                    .filter(|a| a.iter().sum::<u32>() < j)
                    .collect();
                for a in boxes {
                    for x in 0..1u32 << a[0] {
                        for y in 0..1u32 << a[1] {
                            for s in 0..1u32 << a[2] {
                                cells.insert([x, y, s]);
                            }
                        }
                    }
                }
            }
            exact &= got == DyadicRational::from_int(cells.len() as i64);
            if j > 0 {
                c_max = c_max.max(got.to_f64() / (j as f64 * (j as f64).exp2()));
            }
            table.push(got.to_f64());
        }
        if family == FamilyKind::Full {
            exact &= table[..3] == [0.0, 1.0, 3.0];
        }
        out.check(exact && c_max <= 1.0, format!("{family:?}: |Ω_0..8| = {table:?}, C = {c_max:.4}"));
    }
    out
}

fn random_grid(rng: &mut ChaCha8Rng) -> GridFunction {
    let level = rng.gen_range(2..=9);
    let n = 1i64 << level;
    let mut cells = BTreeMap::new();
    let density = rng.gen_range(0.05..0.9);
    for i in 0..n {
        if rng.gen_bool(density) {
            cells.insert([i, 0, 0], DyadicRational::new(rng.gen_range(1..=32), rng.gen_range(0..=3)));
        }
    }
    // Occasional spike.
    if rng.gen_bool(0.5) {
        cells.insert([rng.gen_range(0..n), 0, 0], DyadicRational::from_int(rng.gen_range(64..=1024)));
    }
    GridFunction { dim: 1, level, denominator: 1, cells }
}

fn criterion_10() -> Outcome {
    let mut out = Outcome::new();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut ok_count, mut worst): (usize, f64) = (0, 0.0);
    for _ in 0..100 {
        let f = random_grid(&mut rng);
        let c = cz_sparse_dominate_1param(&f).unwrap();
        let mut ok = validate_witness(&c.cubes, Cap::new(1, 2), &c.witness);
        if let Some(root) = c.root {
            let g = f.level;
            let sum = |iv: &DyadicInterval| {
                let (lo, hi) = (iv.index << (g - iv.level), (iv.index + 1) << (g - iv.level));
                f.cells.range([lo, 0, 0]..[hi, 0, 0]).map(|(_, v)| *v).sum::<DyadicRational>() * DyadicRational::pow2(iv.level - g)
            };
            let cubes: Vec<DyadicInterval> = c.cubes.iter().map(|r| r.intervals()[0]).collect();
            let lo = root.index << (g - root.level);
            for cell in lo..lo + (1 << (g - root.level)) {
                let here = DyadicInterval::new(g, cell);
                let mut maximal = DyadicRational::ZERO;
                for l in root.level - 2..=g {
                    maximal = maximal.max(sum(&DyadicInterval::new(l, cell >> (g - l))));
                }
                let sparse: DyadicRational = cubes.iter().filter(|q| q.contains_interval(&here)).map(sum).sum();
                ok &= maximal <= DyadicRational::from_int(4) * sparse;
                worst = worst.max(maximal.to_f64() / sparse.to_f64());
            }
        }
        ok_count += usize::from(ok && c.dominated);
    }
    out.check(ok_count == 100, format!("{ok_count}/100 grid functions: 1/2-sparse and M_d f <= 4·sparse, worst ratio {worst}"));
    out
}

fn criterion_11(two_d: &[(u32, u32)]) -> Outcome {
    let mut out = Outcome::new();
    for setting in [Setting::Flag, Setting::Strong2d] {
        let c2 = criterion_2(setting);
        out.k1_unique_only &= c2.k1_unique_only;
        out.check(c2.pass, format!("criterion 2 with {}", setting.name()));
        out.lines.extend(c2.lines.iter().map(|l| format!("       {l}")));
        for (name, sub) in [("4", criterion_4(setting, two_d)), ("5", criterion_5(setting, two_d))] {
            out.check(sub.pass, format!("criterion {name} with {}", setting.name()));
            out.lines.extend(sub.lines.iter().map(|l| format!("       {l}")));
        }
    }
    for &(m, k) in two_d {
        let cfg = NetConfig::new(m, k);
        let p = build_p(m);
        let z = build_z_flag(&p, &cfg).unwrap();
        let mu = PointMassMeasure::new(&p.points).unwrap();
        let nu = PointMassMeasure::new(&z.points).unwrap();
        let w = Window::for_points(p.points.iter().chain(&z.points));
        let flag = maximal_pairing(&mu, &nu, FamilyKind::Flag, &w).unwrap().value;
        let strong = maximal_pairing(&mu, &nu, FamilyKind::Full, &w).unwrap().value;
        out.check(flag <= strong * (1.0 + TOL), format!("m={m} k={k} on Z_flag: flag LHS {flag} <= strong LHS {strong}"));
    }
    out
}

fn main() {
    let start = Instant::now();
    let mut zyg_certified = Vec::new();
    // Certified 2D configurations of the criterion 2 grid.
    let two_d: Vec<(u32, u32)> = vec![(3, 2), (4, 2)];
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut run = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!("criterion {id:>2} {} {name} ({:.1}s)", if o.pass { "PASS" } else { "FAIL" }, t.elapsed().as_secs_f64());
        for l in &o.lines {
            println!("    {l}");
        }
        results.push((id, name, o));
    };
    run(1, "net certification", &mut criterion_1);
    run(2, "2D Z certification", &mut || criterion_2(Setting::Strong2d));
    run(3, "Zygmund certification", &mut || criterion_3(&mut zyg_certified));
    let zyg = zyg_certified.clone();
    run(4, "pairing lower bound", &mut || criterion_4(Setting::Zygmund, &zyg));
    let certified_all = |setting| -> Vec<(Setting, u32, u32)> {
        let list = if setting == Setting::Zygmund { &zyg } else { &two_d };
        list.iter().map(|&(m, k)| (setting, m, k)).collect()
    };
    let five: Vec<_> = certified_all(Setting::Zygmund).into_iter().chain(certified_all(Setting::Strong2d)).collect();
    run(5, "layered bound soundness", &mut || {
        let mut o = Outcome::new();
        for &(s, m, k) in &five {
            let sub = criterion_5(s, &[(m, k)]);
            o.pass &= sub.pass;
            o.lines.extend(sub.lines);
        }
        o.pass &= !five.is_empty();
        o
    });
    run(6, "per-rectangle constants", &mut criterion_6);
    run(7, "sparsity checker", &mut criterion_7);
    run(8, "distance oracle", &mut criterion_8);
    run(9, "omega tables", &mut criterion_9);
    run(10, "one-parameter control", &mut criterion_10);
    run(11, "flag and strong variants", &mut || criterion_11(&two_d));
    println!("total {:.1}s", start.elapsed().as_secs_f64());

    for (id, name, o) in &results {
        if !o.pass {
            assert!([2, 3, 11].contains(id), "criterion {id} ({name}) failed");
            assert!(o.k1_unique_only, "criterion {id} ({name}) failed beyond k = 1 uniqueness");
        }
    }
}
