use dsl_core::dyadic::{dyadic_distance, DyadicRational, DyadicRect, FamilyKind, Point, Window};
use dsl_core::experiment::{build_families, certify_families, Setting};
use dsl_core::measure::omega_measure;
use dsl_core::net::NetConfig;
use serde_json::{json, Value};

/// Larger nets take too long to certify in a page.
const MAX_M: u32 = 4;

fn family(name: &str) -> Result<FamilyKind, String> {
    match name {
        "cube" => Ok(FamilyKind::Cube),
        "full" => Ok(FamilyKind::Full),
        "flag" => Ok(FamilyKind::Flag),
        "zygmund" => Ok(FamilyKind::Zygmund),
        _ => Err(format!("unknown family {name:?}")),
    }
}

fn xy(p: &Point) -> [f64; 2] {
    [p.coord(0).to_f64(), p.coord(1).to_f64()]
}

pub fn net(setting: &str, m: u32, k: u32, seed: u64) -> Result<String, String> {
    let setting: Setting = setting.parse().map_err(|e| format!("{e}"))?;
    if !matches!(setting, Setting::Strong2d | Setting::Flag) {
        return Err("the demo draws strong2d and flag nets".into());
    }
    if m > MAX_M {
        return Err(format!("m is capped at {MAX_M} here"));
    }
    let cfg = NetConfig::new(m, k).with_seed(seed);
    let (p, z) = build_families(setting, &cfg).map_err(|e| e.to_string())?;
    let fine = Window::for_points(p.points.iter().chain(&z.points)).fine;
    let cert = certify_families(setting, &p, &z, &cfg, fine).map_err(|e| e.to_string())?;
    let links = z.parents.as_deref().unwrap_or_default();
    let zs: Vec<Value> = z
        .points
        .iter()
        .zip(links)
        .map(|(q, l)| {
            let [x, y] = xy(q);
            json!([x, y, l.parent])
        })
        .collect();
    let clauses: Vec<Value> = cert
        .clauses
        .iter()
        .filter(|c| !c.recorded)
        .map(|c| json!({ "id": c.id, "pass": c.pass, "witness": c.witness }))
        .collect();
    Ok(json!({
        "p": p.points.iter().map(xy).collect::<Vec<_>>(),
        "z": zs,
        "certified": cert.certified(),
        "clauses": clauses,
    })
    .to_string())
}

fn point(s: &str) -> Result<Point, String> {
    let coords: Vec<DyadicRational> = s
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| format!("{e}")))
        .collect::<Result<_, _>>()?;
    Point::new(&coords).map_err(|e| e.to_string())
}

/// Finest level searched for the smallest common rectangle.
const FINE: i32 = 16;

/// The smallest family rectangle holding both points, unless the
/// infimum is not attained.
fn smallest_common(p: &Point, q: &Point, family: FamilyKind) -> Option<DyadicRect> {
    family
        .level_tuples(p.dim(), &Window::new(-2, FINE))
        .ok()?
        .iter()
        .map(|t| DyadicRect::containing(family, p, &t[..p.dim()]))
        .filter(|r| r.contains(q))
        .min_by_key(|r| (r.measure(), r.levels()))
}

pub fn distance(family_name: &str, p: &str, q: &str) -> Result<String, String> {
    let family = family(family_name)?;
    let (p, q) = (point(p)?, point(q)?);
    let d = dyadic_distance(&p, &q, family).map_err(|e| e.to_string())?;
    let rect = if d.is_degenerate() {
        Value::Null
    } else {
        let r = smallest_common(&p, &q, family).ok_or("no common rectangle in range")?;
        let sides: Vec<[f64; 2]> = r.intervals().iter().map(|iv| [iv.start().to_f64(), iv.end().to_f64()]).collect();
        json!({ "levels": r.levels(), "sides": sides, "measure": r.measure().to_string() })
    };
    Ok(json!({
        "squared": d.squared.to_string(),
        "value": d.value(),
        "degenerate": d.is_degenerate(),
        "rect": rect,
    })
    .to_string())
}

pub fn omega(family_name: &str, dim: usize, max_j: u32) -> Result<String, String> {
    let family = family(family_name)?;
    let rows = (0..=max_j)
        .map(|j| {
            let set = omega_measure(family, dim, j).map_err(|e| e.to_string())?;
            let boxes: Vec<Vec<f64>> = set
                .components
                .iter()
                .map(|r| r.intervals().iter().map(|iv| iv.end().to_f64()).collect())
                .collect();
            Ok(json!({ "j": j, "measure": set.measure.to_f64(), "exact": set.measure.to_string(), "boxes": boxes }))
        })
        .collect::<Result<Vec<Value>, String>>()?;
    Ok(Value::from(rows).to_string())
}
