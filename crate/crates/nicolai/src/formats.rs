//! JSON and CSV encodings of specs, sequences, spectra and ground states.

use std::fs;
use std::io::Write;
use std::path::Path;

use nicolai_core::charges::{ConservedSequence, Sign, Support};
use nicolai_core::dynamics::Spectrum;
use nicolai_core::{Boundary, Lattice, ModelSpec, Site, Variant};
use serde_json::{json, Value};

use crate::AppError;

pub const SCHEMA: u64 = 1;

/// Rounds to 15 significant digits so the shortest round-trip printing is stable.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().unwrap_or(x)
}

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(sig15(x))
    } else {
        Value::Null
    }
}

/// Adds the top-level schema marker.
pub fn with_schema(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("schema".into(), json!(SCHEMA));
    }
    v
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Nicolai1d => "nicolai-1d",
        Variant::Nicolai2d => "nicolai-2d",
    }
}

pub fn spec_to_json(spec: &ModelSpec) -> Value {
    let lattice = spec.lattice();
    let extent = match (lattice.interval(), lattice.rectangle_bounds()) {
        (Some((lo, hi)), _) => json!([lo, hi]),
        (None, Some(((x0, x1), (y0, y1)))) => json!([[x0, x1], [y0, y1]]),
        _ => Value::Null,
    };
    json!({
        "dimension": lattice.dimension(),
        "extent": extent,
        "boundary": if lattice.is_periodic() { "periodic" } else { "open" },
        "variant": variant_name(spec.variant()),
    })
}

fn pair(v: &Value) -> Option<(i64, i64)> {
    match v.as_array()?.as_slice() {
        [a, b] => Some((a.as_i64()?, b.as_i64()?)),
        _ => None,
    }
}

pub fn spec_from_json(text: &str) -> Result<ModelSpec, AppError> {
    let bad = |why: &str| AppError::Config(format!("model spec: {why}"));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let boundary = match v.get("boundary").and_then(Value::as_str) {
        Some("open") => Boundary::Open,
        Some("periodic") => Boundary::Periodic,
        _ => return Err(bad("boundary must be \"open\" or \"periodic\"")),
    };
    let extent = v.get("extent").ok_or_else(|| bad("missing extent"))?;
    let dimension = v.get("dimension").and_then(Value::as_u64).ok_or_else(|| bad("missing dimension"))?;
    let lattice = match dimension {
        1 => {
            let (lo, hi) = pair(extent).ok_or_else(|| bad("1D extent must be [lo, hi]"))?;
            Lattice::line(lo, hi, boundary)?
        }
        2 => {
            let arr = extent.as_array().ok_or_else(|| bad("2D extent must be [[x0, x1], [y0, y1]]"))?;
            let (xs, ys) = match arr.as_slice() {
                [x, y] => (pair(x), pair(y)),
                _ => (None, None),
            };
            let ((x0, x1), (y0, y1)) =
                xs.zip(ys).ok_or_else(|| bad("2D extent must be [[x0, x1], [y0, y1]]"))?;
            match boundary {
                Boundary::Open => Lattice::rectangle(x0, x1, y0, y1)?,
                Boundary::Periodic if x0 == 0 && y0 == 0 => Lattice::torus(x1 + 1, y1 + 1)?,
                Boundary::Periodic => return Err(bad("periodic 2D extent must start at (0, 0)")),
            }
        }
        d => return Err(bad(&format!("unsupported dimension {d}"))),
    };
    let variant = match v.get("variant").and_then(Value::as_str) {
        Some("nicolai-1d") => Variant::Nicolai1d,
        Some("nicolai-2d") => Variant::Nicolai2d,
        None if dimension == 1 => Variant::Nicolai1d,
        None => Variant::Nicolai2d,
        Some(other) => return Err(bad(&format!("unknown variant {other:?}"))),
    };
    Ok(ModelSpec::new(lattice, variant)?)
}

fn site_json(s: Site) -> Value {
    match s {
        Site::Line(x) => json!(x),
        Site::Grid(x, y) => json!([x, y]),
    }
}

/// `[{site, value}, ...]` in support order.
pub fn sequence_to_json(f: &ConservedSequence) -> Value {
    Value::Array(
        f.entries()
            .map(|(s, v)| json!({"site": site_json(s), "value": v.value()}))
            .collect(),
    )
}

/// Reads an interval or rectangle sequence; sites must be listed in site order.
pub fn sequence_from_json(v: &Value) -> Result<ConservedSequence, AppError> {
    let bad = |why: &str| AppError::Config(format!("sequence: {why}"));
    let items = v.as_array().ok_or_else(|| bad("expected an array"))?;
    let mut sites = Vec::with_capacity(items.len());
    let mut values = Vec::with_capacity(items.len());
    for item in items {
        let site = match item.get("site") {
            Some(Value::Number(n)) => Site::Line(n.as_i64().ok_or_else(|| bad("site must be an integer"))?),
            Some(p @ Value::Array(_)) => {
                let (x, y) = pair(p).ok_or_else(|| bad("2D site must be [x, y]"))?;
                Site::Grid(x, y)
            }
            _ => return Err(bad("missing site")),
        };
        let value = item
            .get("value")
            .and_then(Value::as_i64)
            .and_then(Sign::from_value)
            .ok_or_else(|| bad("value must be -1 or +1"))?;
        sites.push(site);
        values.push(value);
    }
    let support = match (sites.first(), sites.last()) {
        (Some(&Site::Line(lo)), Some(&Site::Line(hi))) => Support::Interval { lo, hi },
        (Some(&Site::Grid(x0, y0)), Some(&Site::Grid(x1, y1))) => Support::Rectangle { x0, x1, y0, y1 },
        _ => return Err(bad("empty or mixed sites")),
    };
    if support.sites() != sites {
        return Err(bad("sites must cover an interval or rectangle in site order"));
    }
    Ok(ConservedSequence::new(support, values)?)
}

/// A named sequence from a reference table.
#[derive(Clone, Debug)]
pub struct TableRow {
    pub name: String,
    pub sequence: ConservedSequence,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub k: i64,
    pub l: i64,
    pub rows: Vec<TableRow>,
}

pub fn table_from_json(text: &str) -> Result<Table, AppError> {
    let bad = |why: &str| AppError::Config(format!("table: {why}"));
    let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
    let k = v.get("k").and_then(Value::as_i64).ok_or_else(|| bad("missing k"))?;
    let l = v.get("l").and_then(Value::as_i64).ok_or_else(|| bad("missing l"))?;
    let rows = v
        .get("rows")
        .and_then(Value::as_array)
        .ok_or_else(|| bad("missing rows"))?
        .iter()
        .map(|r| {
            let name = r.get("name").and_then(Value::as_str).ok_or_else(|| bad("row without name"))?;
            let sequence = sequence_from_json(r.get("sequence").ok_or_else(|| bad("row without sequence"))?)?;
            Ok(TableRow { name: name.to_string(), sequence })
        })
        .collect::<Result<Vec<_>, AppError>>()?;
    Ok(Table { k, l, rows })
}

/// The three shipped tables for `[0, 2]`, `[0, 4]` and `[0, 6]`.
pub fn reference_tables() -> Vec<Table> {
    [
        include_str!("../fixtures/xi_hat_0_1.json"),
        include_str!("../fixtures/xi_hat_0_2.json"),
        include_str!("../fixtures/xi_hat_0_3.json"),
    ]
    .iter()
    .map(|t| table_from_json(t).expect("shipped fixtures parse"))
    .collect()
}

/// `sector,eigenvalue,multiplicity` rows sorted by sector then eigenvalue.
pub fn spectrum_csv(s: &Spectrum) -> String {
    let mut rows = s.sector_table();
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out = String::from("sector,eigenvalue,multiplicity\n");
    for (sector, e, m) in rows {
        let sector = sector.map_or_else(|| String::from("all"), |n| n.to_string());
        out.push_str(&format!("{sector},{},{m}\n", sig15(clean_zero(e))));
    }
    out
}

/// Maps roundoff around zero to an exact zero.
pub fn clean_zero(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        0.0
    } else {
        x
    }
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), AppError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| AppError::Config(format!("bad output path {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        AppError::Io(format!("{}: {e}", path.display()))
    })
}
