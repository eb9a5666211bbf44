//! Instance and strategy file formats.
//!
//! Instance (JSON):
//!
//! ```json
//! {
//!   "n": 2,
//!   "normalization": "unit-sum",
//!   "valuations": [
//!     ["1/2", "1/2"],
//!     ["3/4", "0.25"]
//!   ]
//! }
//! ```
//!
//! Entries are `"p/q"` strings or finite decimals, read exactly. Plain JSON
//! integers are accepted; JSON floats are rejected because they are not exact.
//!
//! Strategy file (JSON): `{"orders": [[1, 2, 3], [2, 1, 3], [1, 3, 2]]}`, one
//! 1-based ranking per agent.

use std::fmt::Write as _;

use serde::de::{self, Deserializer};
use serde::Deserialize;

use crate::profile::{Normalization, PreferenceProfile, ValuationProfile};
use crate::rational::{format_rational, parse_rational, Rational};
use crate::{Error, Result};

struct Cell(Rational);

impl<'de> Deserialize<'de> for Cell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> de::Visitor<'de> for V {
            type Value = Cell;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a rational string such as \"3/4\" or \"0.75\", or an integer")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> std::result::Result<Cell, E> {
                parse_rational(s).map(Cell).map_err(|e| match e {
                    Error::Parse { message, .. } => E::custom(message),
                    other => E::custom(other),
                })
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Cell, E> {
                Ok(Cell(crate::rational::int(v)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Cell, E> {
                Ok(Cell(Rational::from_integer(v.into())))
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Cell, E> {
                Err(E::custom(format!(
                    "inexact float {v}; write the value as a string"
                )))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    n: usize,
    normalization: Normalization,
    valuations: Vec<Vec<Cell>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStrategies {
    orders: Vec<Vec<usize>>,
}

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        Error::Parse {
            line: inner.line(),
            column: inner.column(),
            field,
            message: strip_position(&inner.to_string()),
        }
    })?;
    de.end().map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        field: ".".into(),
        message: strip_position(&e.to_string()),
    })?;
    Ok(value)
}

// serde_json appends " at line L column C"; the location lives in our own fields.
fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(idx) => msg[..idx].to_string(),
        None => msg.to_string(),
    }
}

/// Parses an instance. The normalization is recorded but not validated.
pub fn parse_instance(text: &str) -> Result<ValuationProfile> {
    let raw: RawInstance = from_json(text)?;
    if raw.valuations.len() != raw.n {
        return Err(Error::Shape(format!(
            "declared n = {} but found {} valuation rows",
            raw.n,
            raw.valuations.len()
        )));
    }
    let values = raw
        .valuations
        .into_iter()
        .map(|row| row.into_iter().map(|c| c.0).collect())
        .collect();
    ValuationProfile::new(values, raw.normalization)
}

/// Canonical text form; `parse_instance(&serialize_instance(p)) == p`.
pub fn serialize_instance(profile: &ValuationProfile) -> String {
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"n\": {},", profile.n());
    let _ = writeln!(out, "  \"normalization\": \"{}\",", profile.normalization());
    out.push_str("  \"valuations\": [\n");
    for (i, row) in profile.rows().iter().enumerate() {
        out.push_str("    [");
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "\"{}\"", format_rational(v));
        }
        out.push(']');
        if i + 1 < profile.n() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}

pub fn parse_strategies(text: &str) -> Result<PreferenceProfile> {
    let raw: RawStrategies = from_json(text)?;
    PreferenceProfile::from_one_based(&raw.orders)
}

pub fn serialize_strategies(profile: &PreferenceProfile) -> String {
    let mut out = String::from("{\n  \"orders\": [\n");
    for (i, o) in profile.orders().iter().enumerate() {
        let labels: Vec<String> = o.one_based().iter().map(|x| x.to_string()).collect();
        let _ = write!(out, "    [{}]", labels.join(", "));
        if i + 1 < profile.n() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    out
}
