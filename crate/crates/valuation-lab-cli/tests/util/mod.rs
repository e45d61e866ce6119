//! Shared helpers for the CLI integration suites: a subprocess runner, the
//! regression corpus, and a small draft-07 validator covering the subset of
//! JSON Schema the shipped files use.

// Each test target compiles this module separately and uses a different
// slice of it.
#![allow(dead_code)]

use std::path::PathBuf;
use std::process::Command;

pub struct Invocation {
    pub name: &'static str,
    pub args: &'static [&'static str],
    pub exit: i32,
    /// Schema file (without extension) every stdout line must match.
    pub schema: &'static str,
}

pub const TOWER_I: &str = r#"[{"name":"i","minpoly":"x^2+1"}]"#;
pub const SCHEDULE_23: &str = r#"[{"target":{"exponents":[0,1],"unit":true},"q":2},{"target":{"exponents":[0,1],"unit":true},"q":3}]"#;

/// Every invocation exercised by the regression tests. Streamed outputs
/// (padic-close) validate line by line against the same schema.
pub const CORPUS: &[Invocation] = &[
    Invocation {
        name: "newton-basic",
        args: &["newton", "--p", "2", "--poly", "x^4 + 2*x^2 + 8"],
        exit: 0,
        schema: "newton",
    },
    Invocation {
        name: "newton-fractional",
        args: &["newton", "--p", "5", "--poly", "25*x^3 + 5*x + 1/5"],
        exit: 0,
        schema: "newton",
    },
    Invocation {
        name: "extensions-split",
        args: &["extensions", "--p", "3", "--poly", "x^2 - 2*x - 6"],
        exit: 0,
        schema: "extensions",
    },
    Invocation {
        name: "extensions-ramified",
        args: &["extensions", "--p", "2", "--poly", "x^2 - 2"],
        exit: 0,
        schema: "extensions",
    },
    Invocation {
        name: "extensions-inert",
        args: &["extensions", "--p", "5", "--poly", "x^2 - 2"],
        exit: 0,
        schema: "extensions",
    },
    Invocation {
        name: "factor-gauss",
        args: &["factor", "--tower", TOWER_I, "--poly", "x^2 + 1"],
        exit: 0,
        schema: "factor",
    },
    Invocation {
        name: "factor-rational",
        args: &["factor", "--poly", "x^4 - 1"],
        exit: 0,
        schema: "factor",
    },
    Invocation {
        name: "minpoly-gauss",
        args: &["minpoly", "--tower", TOWER_I, "--elem", "1 + 2*i"],
        exit: 0,
        schema: "minpoly",
    },
    Invocation {
        name: "hensel-lift-worked",
        args: &["hensel-lift", "--p", "7", "--n", "2", "--poly", "x^2 - 2", "--seed", "3"],
        exit: 0,
        schema: "approx",
    },
    Invocation {
        name: "hensel-lift-deep",
        args: &["hensel-lift", "--p", "7", "--n", "48", "--poly", "x^2 - 2", "--seed", "3"],
        exit: 0,
        schema: "approx",
    },
    Invocation {
        name: "hensel-set-member",
        args: &["hensel-set", "--p", "3", "--poly", "x^2 - 2*x - 6"],
        exit: 0,
        schema: "hensel-set",
    },
    Invocation {
        name: "hensel-set-eisenstein",
        args: &["hensel-set", "--p", "2", "--poly", "x^2 - 2"],
        exit: 0,
        schema: "hensel-set",
    },
    Invocation {
        name: "hensel-set-unit",
        args: &["hensel-set", "--p", "3", "--poly", "x^2 + 1"],
        exit: 0,
        schema: "hensel-set",
    },
    Invocation {
        name: "div-outside",
        args: &["div", "--gens", "1,0;0,1", "--x", "0,1", "--k", "2"],
        exit: 0,
        schema: "div",
    },
    Invocation {
        name: "div-inside",
        args: &["div", "--gens", "1,0;0,1/2", "--x", "0,1", "--k", "2"],
        exit: 0,
        schema: "div",
    },
    Invocation {
        name: "group-extend-halving",
        args: &["group-extend", "--gens", "1,0;0,1", "--b", "0,1", "--n", "2"],
        exit: 0,
        schema: "group-extend",
    },
    Invocation {
        name: "padic-check-initial",
        args: &["padic-check", "--p", "2"],
        exit: 0,
        schema: "padic-check",
    },
    Invocation {
        name: "padic-check-dense-line",
        args: &["padic-check", "--p", "3", "--gens", "1/2,0;0,1"],
        exit: 0,
        schema: "padic-check",
    },
    Invocation {
        name: "padic-close-two-steps",
        args: &["padic-close", "--p", "2", "--schedule", SCHEDULE_23],
        exit: 0,
        schema: "stage",
    },
    Invocation {
        name: "weak-approx-pair",
        args: &["weak-approx", "--primes", "2,3", "--targets", "1,0"],
        exit: 0,
        schema: "weak-approx",
    },
    Invocation {
        name: "weak-approx-triple",
        args: &["weak-approx", "--primes", "2,3,5", "--targets", "1/3,4,0"],
        exit: 0,
        schema: "weak-approx",
    },
    Invocation {
        name: "common-ext-same-slot",
        args: &["common-ext", "--p", "3", "--poly1", "x^2 - 2*x - 6", "--poly2", "x^2 - 2*x - 6"],
        exit: 0,
        schema: "common-ext",
    },
    Invocation {
        name: "common-ext-crossed",
        args: &[
            "common-ext", "--p", "3", "--poly1", "x^2 - 2*x - 6", "--poly2", "x^2 - 2*x - 6",
            "--which2", "1",
        ],
        exit: 0,
        schema: "common-ext",
    },
    Invocation {
        name: "sim-no-comp-ext",
        args: &["simulate", "no-comp-ext", "--r", "3", "--members", "1", "--budget", "2"],
        exit: 0,
        schema: "sim-report",
    },
    Invocation {
        name: "sim-henselization",
        args: &["simulate", "henselization", "--r", "7", "--members", "1", "--budget", "2"],
        exit: 0,
        schema: "sim-report",
    },
    Invocation {
        name: "sim-adversary",
        args: &["simulate", "padic-adversary", "--q", "2", "--m", "0", "--gamma", "0,1/2"],
        exit: 0,
        schema: "sim-report",
    },
    Invocation {
        name: "err-composite-prime",
        args: &["newton", "--p", "4", "--poly", "x"],
        exit: 1,
        schema: "error",
    },
    Invocation {
        name: "err-reducible",
        args: &["extensions", "--p", "3", "--poly", "x^2 - 1"],
        exit: 1,
        schema: "error",
    },
    Invocation {
        name: "err-not-a-member",
        args: &["div", "--gens", "1,0", "--x", "0,1", "--k", "2"],
        exit: 1,
        schema: "error",
    },
    Invocation {
        name: "err-bad-grammar",
        args: &["newton", "--p", "2", "--poly", "x^^2"],
        exit: 1,
        schema: "error",
    },
];

/// Run the binary under test, returning (stdout, exit code).
pub fn vlab(args: &[&str]) -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_vlab"))
        .args(args)
        .env_remove("VALUATION_LAB_SEED")
        .output()
        .expect("binary runs");
    (
        String::from_utf8(out.stdout).expect("stdout is UTF-8"),
        out.status.code().unwrap_or(-1),
    )
}

pub fn schema_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas")
}

pub fn load_schema(name: &str) -> serde_json::Value {
    let path = schema_dir().join(format!("{name}.json"));
    let text = std::fs::read_to_string(&path)
        .unwrap_or_else(|e| panic!("read {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parse {}: {e}", path.display()))
}

/// Validate `doc` against `schema`. Supports the subset the shipped schemas
/// use: type, properties, required, additionalProperties:false, items,
/// oneOf, const, and internal "#/definitions/..." references. An empty
/// schema accepts anything.
pub fn validate(schema: &serde_json::Value, doc: &serde_json::Value) -> Result<(), String> {
    check(schema, schema, doc, "$")
}

fn check(
    root: &serde_json::Value,
    schema: &serde_json::Value,
    doc: &serde_json::Value,
    at: &str,
) -> Result<(), String> {
    use serde_json::Value::*;

    let obj = match schema {
        Object(map) => map,
        Bool(true) => return Ok(()),
        _ => return Err(format!("{at}: unsupported schema form")),
    };

    if let Some(String(r)) = obj.get("$ref") {
        let target = resolve_ref(root, r).ok_or_else(|| format!("{at}: broken $ref {r}"))?;
        return check(root, target, doc, at);
    }

    if let Some(branches) = obj.get("oneOf").and_then(|b| b.as_array()) {
        let hits = branches
            .iter()
            .filter(|b| check(root, b, doc, at).is_ok())
            .count();
        if hits != 1 {
            return Err(format!("{at}: {hits} of {} oneOf branches match", branches.len()));
        }
        return Ok(());
    }

    if let Some(expected) = obj.get("const") {
        if expected != doc {
            return Err(format!("{at}: expected const {expected}"));
        }
        return Ok(());
    }

    if let Some(ty) = obj.get("type") {
        let names: Vec<&str> = match ty {
            String(s) => vec![s.as_str()],
            Array(ts) => ts.iter().filter_map(|t| t.as_str()).collect(),
            _ => return Err(format!("{at}: malformed type keyword")),
        };
        let matches = names.iter().any(|n| match *n {
            "object" => doc.is_object(),
            "array" => doc.is_array(),
            "string" => doc.is_string(),
            "boolean" => doc.is_boolean(),
            "null" => doc.is_null(),
            "integer" => doc.as_i64().is_some() || doc.as_u64().is_some(),
            "number" => doc.is_number(),
            _ => false,
        });
        if !matches {
            return Err(format!("{at}: type is not one of {names:?}"));
        }
    }

    if let Some(props) = obj.get("properties").and_then(|p| p.as_object()) {
        let fields = doc
            .as_object()
            .ok_or_else(|| format!("{at}: properties apply to objects"))?;
        for (key, sub) in props {
            if let Some(v) = fields.get(key) {
                check(root, sub, v, &format!("{at}.{key}"))?;
            }
        }
        if obj.get("additionalProperties") == Some(&Bool(false)) {
            for key in fields.keys() {
                if !props.contains_key(key) {
                    return Err(format!("{at}: unexpected field {key:?}"));
                }
            }
        }
    }

    if let Some(required) = obj.get("required").and_then(|r| r.as_array()) {
        let fields = doc
            .as_object()
            .ok_or_else(|| format!("{at}: required applies to objects"))?;
        for key in required.iter().filter_map(|k| k.as_str()) {
            if !fields.contains_key(key) {
                return Err(format!("{at}: missing field {key:?}"));
            }
        }
    }

    if let Some(items) = obj.get("items") {
        let entries = doc
            .as_array()
            .ok_or_else(|| format!("{at}: items apply to arrays"))?;
        for (i, entry) in entries.iter().enumerate() {
            check(root, items, entry, &format!("{at}[{i}]"))?;
        }
    }

    Ok(())
}

fn resolve_ref<'a>(root: &'a serde_json::Value, r: &str) -> Option<&'a serde_json::Value> {
    let path = r.strip_prefix("#/")?;
    let mut here = root;
    for step in path.split('/') {
        here = here.get(step)?;
    }
    Some(here)
}
