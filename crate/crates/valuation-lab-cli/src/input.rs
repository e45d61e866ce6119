//! Structured inputs for the group, closure, and tower verbs: value pairs
//! "a,b" (or "inf"), semicolon-separated generator lists, tower
//! descriptions as JSON, and closure schedules as JSON.

use valuation_lab::config::Config;
use valuation_lab::error::{Error, Result};
use valuation_lab::exact::rat::{parse_rat, Rat};
use valuation_lab::numberfields::extend_tower;
use valuation_lab::padic_closure::MonomialElem;
use valuation_lab::tower::TowerField;
use valuation_lab::value::Value;
use valuation_lab::valuegroup::FGGroup;

use crate::parse::parse_tower_poly;

fn bad(message: impl Into<String>) -> Error {
    Error::ParseError {
        offset: 0,
        message: message.into(),
    }
}

/// "a,b" with rational components, or "inf".
pub fn parse_value(src: &str) -> Result<Value> {
    let src = src.trim();
    if src == "inf" {
        return Ok(Value::Infinity);
    }
    let (a, b) = src
        .split_once(',')
        .ok_or_else(|| bad(format!("expected \"a,b\" or \"inf\", got {src:?}")))?;
    if b.contains(',') {
        return Err(bad(format!("expected exactly two components in {src:?}")));
    }
    Ok(Value::from_parts(parse_rat(a.trim())?, parse_rat(b.trim())?))
}

/// Semicolon-separated list of values, e.g. "1,0;0,1".
pub fn parse_group(src: &str) -> Result<FGGroup> {
    let gens = src
        .split(';')
        .filter(|s| !s.trim().is_empty())
        .map(parse_value)
        .collect::<Result<Vec<_>>>()?;
    if gens.is_empty() {
        return Err(bad("expected at least one generator"));
    }
    FGGroup::new(gens)
}

/// Comma-separated rationals.
pub fn parse_rat_list(src: &str) -> Result<Vec<Rat>> {
    src.split(',').map(|s| parse_rat(s.trim())).collect()
}

/// JSON tower description: a list of {"name": "...", "minpoly": "..."} with
/// each minimal polynomial written over the tower built so far.
pub fn parse_tower(src: &str, config: &Config) -> Result<TowerField> {
    let doc: serde_json::Value =
        serde_json::from_str(src).map_err(|e| bad(format!("tower is not valid JSON: {e}")))?;
    let levels = doc
        .as_array()
        .ok_or_else(|| bad("tower must be a JSON list of levels"))?;
    let mut k = TowerField::q();
    for level in levels {
        let name = level
            .get("name")
            .and_then(|n| n.as_str())
            .ok_or_else(|| bad("tower level needs a \"name\" string"))?;
        let minpoly = level
            .get("minpoly")
            .and_then(|m| m.as_str())
            .ok_or_else(|| bad("tower level needs a \"minpoly\" string"))?;
        let g = parse_tower_poly(&k, minpoly)?;
        k = extend_tower(&k, name, &g, config)?;
    }
    Ok(k)
}

pub fn tower_to_json(k: &TowerField) -> serde_json::Value {
    serde_json::Value::Array(
        k.tower()
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let sub = k.prefix(i);
                let minpoly =
                    valuation_lab::exact::poly::Poly::from_coeffs(l.minpoly.clone());
                serde_json::json!({
                    "name": l.name,
                    "minpoly": crate::parse::print_tower_poly(&sub, &minpoly),
                })
            })
            .collect(),
    )
}

/// JSON schedule: a list of {"target": {"exponents": [...], "unit": bool},
/// "q": prime}.
pub fn parse_schedule(src: &str) -> Result<Vec<(MonomialElem, u64)>> {
    let doc: serde_json::Value =
        serde_json::from_str(src).map_err(|e| bad(format!("schedule is not valid JSON: {e}")))?;
    let entries = doc
        .as_array()
        .ok_or_else(|| bad("schedule must be a JSON list"))?;
    let mut out = Vec::with_capacity(entries.len());
    for entry in entries {
        let target = entry
            .get("target")
            .ok_or_else(|| bad("schedule entry needs a \"target\""))?;
        let target = MonomialElem::from_json(target)?;
        let q = entry
            .get("q")
            .and_then(|q| q.as_u64())
            .ok_or_else(|| bad("schedule entry needs a prime \"q\""))?;
        out.push((target, q));
    }
    Ok(out)
}
