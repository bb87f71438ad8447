//! JSON model files.
//!
//! ```json
//! {"name": "p2", "git": {"charges": [[1],[1],[1]], "omega": [1]},
//!  "defaults": {"bound": 6, "tol": 1e-10}}
//! {"name": "f1", "fan": {"rays": [[1,0],[0,1],[-1,1],[0,-1]],
//!                        "max_cones": [[0,1],[1,2],[2,3],[0,3]]}}
//! ```
//!
//! Rationals are integers or `"num/den"` strings. A fan may carry an
//! optional `omega` selecting the stability vector in its own charge basis.

use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::{Map, Value};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::IntMatrix;
use crate::toric_geom::{Fan, GitPresentation, ToricVariety};

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    Git { charges: IntMatrix, omega: Vec<BigRational> },
    Fan { rays: IntMatrix, max_cones: Vec<Vec<usize>>, omega: Option<Vec<BigRational>> },
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Defaults {
    pub bound: Option<u32>,
    pub tol: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct ModelFile {
    pub name: String,
    pub source: ModelSource,
    pub defaults: Defaults,
    pub variety: ToricVariety,
}

pub fn load_model(path: &Path) -> Result<ModelFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_model(&bytes)
}

pub fn parse_model(text: &[u8]) -> Result<ModelFile> {
    let text = std::str::from_utf8(text).map_err(|e| Error::schema("", format!("not UTF-8: {e}")))?;
    let root: Value = serde_json::from_str(text).map_err(|e| Error::schema("", format!("invalid JSON: {e}")))?;
    let obj = object(&root, "")?;
    reject_unknown(obj, "", &["name", "git", "fan", "defaults"])?;
    let name = match obj.get("name") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => return Err(Error::schema("/name", "expected a nonempty string")),
        None => return Err(Error::schema("/name", "missing")),
    };
    let defaults = match obj.get("defaults") {
        Some(v) => parse_defaults(v)?,
        None => Defaults::default(),
    };
    let (source, variety) = match (obj.get("git"), obj.get("fan")) {
        (Some(g), None) => parse_git(g)?,
        (None, Some(f)) => parse_fan(f)?,
        (Some(_), Some(_)) => return Err(Error::schema("", "give exactly one of \"git\" and \"fan\"")),
        (None, None) => return Err(Error::schema("", "missing \"git\" or \"fan\"")),
    };
    Ok(ModelFile { name, source, defaults, variety })
}

fn object<'a>(v: &'a Value, ptr: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::schema(ptr, "expected an object"))
}

fn reject_unknown(obj: &Map<String, Value>, ptr: &str, allowed: &[&str]) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(Error::schema(format!("{ptr}/{k}"), "unknown field")),
        None => Ok(()),
    }
}

fn field<'a>(obj: &'a Map<String, Value>, ptr: &str, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::schema(format!("{ptr}/{key}"), "missing"))
}

fn array<'a>(v: &'a Value, ptr: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::schema(ptr, "expected an array"))
}

fn integer(v: &Value, ptr: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| Error::schema(ptr, "expected an integer"))
}

fn rational(v: &Value, ptr: &str) -> Result<BigRational> {
    match v {
        Value::Number(_) => Ok(BigRational::from_integer(BigInt::from(integer(v, ptr)?))),
        Value::String(s) => {
            let r: BigRational = s.trim().parse().map_err(|_| Error::schema(ptr, format!("\"{s}\" is not a rational")))?;
            Ok(r)
        }
        _ => Err(Error::schema(ptr, "expected an integer or a \"num/den\" string")),
    }
}

fn int_matrix(v: &Value, ptr: &str) -> Result<IntMatrix> {
    let rows = array(v, ptr)?;
    if rows.is_empty() {
        return Err(Error::schema(ptr, "matrix has no rows"));
    }
    let mut out = Vec::with_capacity(rows.len());
    let mut width = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{ptr}/{i}");
        let entries = array(row, &rp)?;
        match width {
            None if entries.is_empty() => return Err(Error::schema(rp, "row is empty")),
            None => width = Some(entries.len()),
            Some(w) if w != entries.len() => {
                return Err(Error::schema(rp, format!("row has length {}, expected {w}", entries.len())))
            }
            _ => {}
        }
        out.push(entries.iter().enumerate().map(|(j, x)| integer(x, &format!("{rp}/{j}"))).collect::<Result<_>>()?);
    }
    Ok(out)
}

fn rational_vector(v: &Value, ptr: &str, len: usize) -> Result<Vec<BigRational>> {
    let entries = array(v, ptr)?;
    if entries.len() != len {
        return Err(Error::schema(ptr, format!("has length {}, expected {len}", entries.len())));
    }
    entries.iter().enumerate().map(|(j, x)| rational(x, &format!("{ptr}/{j}"))).collect()
}

fn parse_defaults(v: &Value) -> Result<Defaults> {
    let obj = object(v, "/defaults")?;
    reject_unknown(obj, "/defaults", &["bound", "tol"])?;
    let bound = match obj.get("bound") {
        Some(b) => Some(
            b.as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::schema("/defaults/bound", "expected a nonnegative integer"))?,
        ),
        None => None,
    };
    let tol = match obj.get("tol") {
        Some(t) => match t.as_f64() {
            Some(x) if x > 0.0 && x.is_finite() => Some(x),
            _ => return Err(Error::schema("/defaults/tol", "expected a positive number")),
        },
        None => None,
    };
    Ok(Defaults { bound, tol })
}

fn parse_git(v: &Value) -> Result<(ModelSource, ToricVariety)> {
    let obj = object(v, "/git")?;
    reject_unknown(obj, "/git", &["charges", "omega"])?;
    let charges = int_matrix(field(obj, "/git", "charges")?, "/git/charges")?;
    let k = charges[0].len();
    let omega = rational_vector(field(obj, "/git", "omega")?, "/git/omega", k)?;
    let git = GitPresentation::new(charges.clone(), omega.clone()).map_err(|e| Error::geometry("/git/charges", e))?;
    let variety = ToricVariety::from_git(git).map_err(|e| {
        let ptr = if matches!(e, Error::Unstable { .. }) { "/git/omega" } else { "/git" };
        Error::geometry(ptr, e)
    })?;
    Ok((ModelSource::Git { charges, omega }, variety))
}

fn parse_fan(v: &Value) -> Result<(ModelSource, ToricVariety)> {
    let obj = object(v, "/fan")?;
    reject_unknown(obj, "/fan", &["rays", "max_cones", "omega"])?;
    let rays = int_matrix(field(obj, "/fan", "rays")?, "/fan/rays")?;
    let m = rays.len();
    let cones_value = array(field(obj, "/fan", "max_cones")?, "/fan/max_cones")?;
    let mut max_cones = Vec::with_capacity(cones_value.len());
    for (c, cone) in cones_value.iter().enumerate() {
        let cp = format!("/fan/max_cones/{c}");
        let mut idx = Vec::new();
        for (j, x) in array(cone, &cp)?.iter().enumerate() {
            let i = integer(x, &format!("{cp}/{j}"))?;
            if i < 0 || i as usize >= m {
                return Err(Error::schema(format!("{cp}/{j}"), format!("ray index {i} out of range 0..{m}")));
            }
            idx.push(i as usize);
        }
        max_cones.push(idx);
    }
    let fan = Fan::new(rays.clone(), max_cones.clone()).map_err(|e| Error::geometry("/fan", e))?;
    let k = m.saturating_sub(rays[0].len());
    let omega = match obj.get("omega") {
        Some(w) => Some(rational_vector(w, "/fan/omega", k)?),
        None => None,
    };
    let variety = ToricVariety::from_fan(fan, omega.as_deref()).map_err(|e| Error::geometry("/fan", e))?;
    Ok((ModelSource::Fan { rays, max_cones, omega }, variety))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kind_and_pointer(text: &str) -> (String, String) {
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::SchemaError { pointer, .. } => ("SchemaError".into(), pointer),
            Error::GeometryError { pointer, source } => (format!("GeometryError/{}", source.kind()), pointer),
            e => (e.kind().into(), String::new()),
        }
    }

    #[test]
    fn parses_git_and_fan_inputs() {
        let p2 = parse_model(br#"{"name":"p2","git":{"charges":[[1],[1],[1]],"omega":["1/2"]},"defaults":{"bound":4}}"#)
            .unwrap();
        assert_eq!(p2.name, "p2");
        assert_eq!(p2.variety.n(), 2);
        assert_eq!(p2.defaults.bound, Some(4));
        let f1 = parse_model(br#"{"name":"f1","fan":{"rays":[[1,0],[0,1],[-1,1],[0,-1]],"max_cones":[[0,1],[1,2],[2,3],[0,3]]}}"#)
            .unwrap();
        assert_eq!(f1.variety.k(), 2);
        assert_eq!(f1.variety.fan().max_cones().len(), 4);
    }

    #[test]
    fn schema_errors_point_at_the_field() {
        let bad_ray = r#"{"name":"x","fan":{"rays":[[1,0],[0,1],[-1],[0,-1]],"max_cones":[[0,1]]}}"#;
        assert_eq!(kind_and_pointer(bad_ray), ("SchemaError".into(), "/fan/rays/2".into()));
        let bad_index = r#"{"name":"x","fan":{"rays":[[1],[-1]],"max_cones":[[0],[2]]}}"#;
        assert_eq!(kind_and_pointer(bad_index), ("SchemaError".into(), "/fan/max_cones/1/0".into()));
        assert_eq!(kind_and_pointer(r#"{"git":{}}"#), ("SchemaError".into(), "/name".into()));
        assert_eq!(kind_and_pointer(r#"{"name":"x"}"#).0, "SchemaError");
        assert_eq!(kind_and_pointer("[1,2"), ("SchemaError".into(), "".into()));
        let bad_omega = r#"{"name":"x","git":{"charges":[[1],[1]],"omega":["a/b"]}}"#;
        assert_eq!(kind_and_pointer(bad_omega), ("SchemaError".into(), "/git/omega/0".into()));
    }

    #[test]
    fn zero_omega_is_a_geometry_error_on_condition_b() {
        let text = r#"{"name":"x","git":{"charges":[[1],[1],[1]],"omega":[0]}}"#;
        match parse_model(text.as_bytes()).unwrap_err() {
            Error::GeometryError { pointer, source } => {
                assert_eq!(pointer, "/git/omega");
                assert!(matches!(*source, Error::Unstable { condition: 'b', .. }));
            }
            e => panic!("unexpected {e:?}"),
        }
    }
}
