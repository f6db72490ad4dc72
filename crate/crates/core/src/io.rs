//! JSON and CSV artifacts.
//!
//! Numbers are written as JSON numbers on the float backend (shortest
//! round-trip form) and as `"num/den"` strings on the rational backend.
//! Readers accept either form. All writes go through a temporary file in
//! the destination directory followed by an atomic rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::auctions::{DiscreteDistribution, Mechanism, MenuEntry};
use crate::error::{Error, Result};
use crate::gapcore::{AllocationSequence, PointSequence, ScalarSequence};
use crate::scalar::Scalar;

fn parse_err(path: &Path, field: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        field: field.into(),
        reason: reason.into(),
    }
}

/// Attaches the file path to validation errors raised while building a value.
fn in_file(path: &Path, err: Error) -> Error {
    match err {
        Error::InvalidValue { field, reason } => parse_err(path, field, reason),
        Error::DimensionMismatch { expected, found } => parse_err(
            path,
            "k",
            format!("expected dimension {expected}, found {found}"),
        ),
        Error::LengthMismatch { what } => parse_err(path, "length", what),
        Error::ZeroPoint { index } => {
            parse_err(path, format!("points[{}]", index - 1), "zero vector")
        }
        other => other,
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| parse_err(path, "<document>", e.to_string()))
}

fn object<'a>(v: &'a Value, path: &Path, field: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| parse_err(path, field, "expected an object"))
}

fn member<'a>(obj: &'a Map<String, Value>, key: &str, path: &Path, ctx: &str) -> Result<&'a Value> {
    let name = if ctx.is_empty() {
        key.to_string()
    } else {
        format!("{ctx}.{key}")
    };
    obj.get(key).ok_or_else(|| parse_err(path, name, "missing"))
}

fn usize_field(obj: &Map<String, Value>, key: &str, path: &Path) -> Result<usize> {
    member(obj, key, path, "")?
        .as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| parse_err(path, key, "expected a nonnegative integer"))
}

fn number<T: Scalar>(v: &Value, path: &Path, field: &str) -> Result<T> {
    T::from_json(v).map_err(|e| parse_err(path, field, e.to_string()))
}

fn vector<T: Scalar>(v: &Value, path: &Path, field: &str) -> Result<Vec<T>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(path, field, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| number(x, path, &format!("{field}[{i}]")))
        .collect()
}

fn rows<T: Scalar>(v: &Value, path: &Path, field: &str) -> Result<Vec<Vec<T>>> {
    let arr = v
        .as_array()
        .ok_or_else(|| parse_err(path, field, "expected an array of arrays"))?;
    arr.iter()
        .enumerate()
        .map(|(i, r)| vector(r, path, &format!("{field}[{i}]")))
        .collect()
}

fn num_json<T: Scalar>(x: &T) -> Value {
    x.to_json()
}

fn vec_json<T: Scalar>(x: &[T]) -> Value {
    Value::Array(x.iter().map(num_json).collect())
}

fn rows_json<T: Scalar>(x: &[Vec<T>]) -> Value {
    Value::Array(x.iter().map(|r| vec_json(r)).collect())
}

pub fn points_from_json<T: Scalar>(v: &Value, path: &Path) -> Result<PointSequence<T>> {
    let obj = object(v, path, "<document>")?;
    let k = usize_field(obj, "k", path)?;
    let pts = rows(member(obj, "points", path, "")?, path, "points")?;
    for (i, p) in pts.iter().enumerate() {
        if p.len() != k {
            return Err(parse_err(
                path,
                format!("points[{i}]"),
                format!("has {} coordinates, k is {k}", p.len()),
            ));
        }
    }
    PointSequence::new(k, pts).map_err(|e| in_file(path, e))
}

pub fn points_to_json<T: Scalar>(x: &PointSequence<T>) -> Value {
    json!({ "k": x.k(), "points": rows_json(x.points()) })
}

pub fn allocations_from_json<T: Scalar>(v: &Value, path: &Path) -> Result<AllocationSequence<T>> {
    let obj = object(v, path, "<document>")?;
    let k = usize_field(obj, "k", path)?;
    let allocs = rows(member(obj, "allocations", path, "")?, path, "allocations")?;
    AllocationSequence::new(k, allocs).map_err(|e| in_file(path, e))
}

pub fn allocations_to_json<T: Scalar>(q: &AllocationSequence<T>) -> Value {
    json!({ "k": q.k(), "allocations": rows_json(q.allocations()) })
}

pub fn scalars_from_json<T: Scalar>(
    v: &Value,
    path: &Path,
    x: &PointSequence<T>,
) -> Result<ScalarSequence<T>> {
    let obj = object(v, path, "<document>")?;
    let c = vector(member(obj, "scalars", path, "")?, path, "scalars")?;
    ScalarSequence::new(c, x).map_err(|e| in_file(path, e))
}

pub fn scalars_to_json<T: Scalar>(c: &ScalarSequence<T>) -> Value {
    json!({ "scalars": vec_json(c.scalars()) })
}

pub fn distribution_from_json<T: Scalar>(
    v: &Value,
    path: &Path,
) -> Result<DiscreteDistribution<T>> {
    let obj = object(v, path, "<document>")?;
    let k = usize_field(obj, "k", path)?;
    let support = member(obj, "support", path, "")?
        .as_array()
        .ok_or_else(|| parse_err(path, "support", "expected an array"))?;
    let mut out = Vec::with_capacity(support.len());
    for (i, s) in support.iter().enumerate() {
        let ctx = format!("support[{i}]");
        let so = object(s, path, &ctx)?;
        let vv: Vec<T> = vector(member(so, "v", path, &ctx)?, path, &format!("{ctx}.v"))?;
        if vv.len() != k {
            return Err(parse_err(
                path,
                format!("{ctx}.v"),
                format!("has {} coordinates, k is {k}", vv.len()),
            ));
        }
        let p = number(member(so, "p", path, &ctx)?, path, &format!("{ctx}.p"))?;
        out.push((vv, p));
    }
    DiscreteDistribution::new(k, out).map_err(|e| in_file(path, e))
}

pub fn distribution_to_json<T: Scalar>(d: &DiscreteDistribution<T>) -> Value {
    let support: Vec<Value> = d
        .support()
        .iter()
        .map(|(v, p)| json!({ "v": vec_json(v), "p": num_json(p) }))
        .collect();
    json!({ "k": d.k(), "support": support })
}

/// A mechanism file, with the optional intended entry per support point.
#[derive(Clone, Debug)]
pub struct MechanismFile<T> {
    pub mechanism: Mechanism<T>,
    pub assignment: Option<Vec<usize>>,
}

pub fn mechanism_from_json<T: Scalar>(v: &Value, path: &Path) -> Result<MechanismFile<T>> {
    let obj = object(v, path, "<document>")?;
    let menu = member(obj, "menu", path, "")?
        .as_array()
        .ok_or_else(|| parse_err(path, "menu", "expected an array"))?;
    let mut entries = Vec::with_capacity(menu.len());
    for (i, e) in menu.iter().enumerate() {
        let ctx = format!("menu[{i}]");
        let eo = object(e, path, &ctx)?;
        let q = vector(member(eo, "q", path, &ctx)?, path, &format!("{ctx}.q"))?;
        let price = number(
            member(eo, "price", path, &ctx)?,
            path,
            &format!("{ctx}.price"),
        )?;
        entries.push(MenuEntry { q, price });
    }
    let k = match obj.get("k") {
        Some(_) => usize_field(obj, "k", path)?,
        None => entries
            .first()
            .map(|e| e.q.len())
            .ok_or_else(|| parse_err(path, "k", "missing, and the menu is empty"))?,
    };
    let had_zero = entries.iter().any(MenuEntry::is_zero_option);
    let mechanism = Mechanism::new(k, entries).map_err(|e| in_file(path, e))?;
    let assignment = match obj.get("assignment") {
        None | Some(Value::Null) => None,
        Some(a) => {
            let arr = a
                .as_array()
                .ok_or_else(|| parse_err(path, "assignment", "expected an array of indices"))?;
            let shift = usize::from(!had_zero);
            let mut out = Vec::with_capacity(arr.len());
            for (i, x) in arr.iter().enumerate() {
                let idx = x.as_u64().ok_or_else(|| {
                    parse_err(path, format!("assignment[{i}]"), "expected a menu index")
                })? as usize;
                let idx = idx + shift;
                if idx >= mechanism.len() {
                    return Err(parse_err(
                        path,
                        format!("assignment[{i}]"),
                        "index out of range",
                    ));
                }
                out.push(idx);
            }
            Some(out)
        }
    };
    Ok(MechanismFile {
        mechanism,
        assignment,
    })
}

pub fn mechanism_to_json<T: Scalar>(m: &Mechanism<T>, assignment: Option<&[usize]>) -> Value {
    let menu: Vec<Value> = m
        .menu()
        .iter()
        .map(|e| json!({ "q": vec_json(&e.q), "price": num_json(&e.price) }))
        .collect();
    let mut out = json!({ "k": m.k(), "menu": menu });
    if let Some(a) = assignment {
        out["assignment"] = json!(a);
    }
    out
}

/// Writes `bytes` to `path` via a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(io_err)?;
    tmp.write_all(bytes).map_err(io_err)?;
    tmp.as_file().sync_all().map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(())
}

pub fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(v)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Serializes rows with a header derived from the row type.
pub fn csv_bytes<R: Serialize>(rows: &[R]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    w.into_inner()
        .map_err(|e| Error::Solver(format!("csv buffer: {e}")))
}

pub fn write_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    write_atomic(path, &csv_bytes(rows)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    #[test]
    fn rational_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.json");
        let d = DiscreteDistribution::new(
            2,
            vec![
                (
                    vec![Rational::ratio(1, 3), Rational::from_i64(2)],
                    Rational::ratio(1, 3),
                ),
                (
                    vec![Rational::from_i64(0), Rational::from_i64(5)],
                    Rational::ratio(2, 3),
                ),
            ],
        )
        .unwrap();
        write_json(&path, &distribution_to_json(&d)).unwrap();
        let back: DiscreteDistribution<Rational> =
            distribution_from_json(&read_json(&path).unwrap(), &path).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn float_round_trip_is_bit_exact() {
        let x = PointSequence::new(
            2,
            vec![vec![0.1, 1.0 / 3.0], vec![std::f64::consts::PI, 1e-300]],
        )
        .unwrap();
        let v = points_to_json(&x);
        let text = serde_json::to_string(&v).unwrap();
        let back: PointSequence<f64> =
            points_from_json(&serde_json::from_str(&text).unwrap(), Path::new("x.json")).unwrap();
        assert_eq!(back, x);
    }

    #[test]
    fn decimal_input_is_exact_on_rationals() {
        let v: Value = serde_json::from_str(r#"{"k":1,"support":[{"v":[0.1],"p":1}]}"#).unwrap();
        let d: DiscreteDistribution<Rational> =
            distribution_from_json(&v, Path::new("d.json")).unwrap();
        assert_eq!(d.support()[0].0[0], Rational::ratio(1, 10));
    }

    #[test]
    fn field_level_diagnostics() {
        let v: Value =
            serde_json::from_str(r#"{"k":2,"support":[{"v":[1,2],"p":0.5},{"v":[1],"p":0.5}]}"#)
                .unwrap();
        let err = distribution_from_json::<f64>(&v, Path::new("d.json")).unwrap_err();
        assert!(err.to_string().contains("support[1].v"), "{err}");
        let v: Value = serde_json::from_str(r#"{"k":1,"support":[{"v":[1],"p":"x"}]}"#).unwrap();
        let err = distribution_from_json::<f64>(&v, Path::new("d.json")).unwrap_err();
        assert!(err.to_string().contains("support[0].p"), "{err}");
    }

    #[test]
    fn mechanism_assignment_shifts_for_inserted_zero() {
        let v: Value =
            serde_json::from_str(r#"{"menu":[{"q":[1],"price":1}],"assignment":[0]}"#).unwrap();
        let f: MechanismFile<f64> = mechanism_from_json(&v, Path::new("m.json")).unwrap();
        assert_eq!(f.mechanism.len(), 2);
        assert_eq!(f.assignment, Some(vec![1]));
    }
}
