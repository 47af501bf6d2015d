//! JSON wire formats for every object the command-line tool reads or
//! writes.
//!
//! Conventions, chosen so that equal objects serialize to identical bytes:
//!
//! * all exact numbers (coefficients, weights, cutoffs, cycle means) are
//!   canonical rational *strings* — `"p"` or `"p/q"` in lowest terms with
//!   `q > 0` — never floats; the symbol `"-inf"` stands for an absent
//!   cutoff (an exact series);
//! * series terms are emitted sorted by weight, heaviest (closest to zero)
//!   first, ties broken by the canonical element order; free-group terms
//!   are keyed `"word"`, free-abelian ones `"vector"` (exponent vectors),
//!   class series `"class"`;
//! * a series may be supplied as a bare array of terms, which means it is
//!   exact; the object form `{"terms": …, "cutoff": …}` is what the tool
//!   emits;
//! * matrices are row-major nested arrays; square matrices are wrapped as
//!   `{"n": …, "entries": …}`, and dimension-indexed families are arrays
//!   of `{"dim": …, …}` that must cover `0 ‥ k` exactly once each;
//! * object keys appear in alphabetical order; the tool's word for each
//!   index in a witness cycle is 1-based.

use std::sync::Arc;

use serde_json::{json, Map, Value};

use crate::chains::{ConeData, FreeChainComplex};
use crate::error::Error;
use crate::groups::{GroupElement, GroupKind, GroupSpec, Weighting};
use crate::level::{format_rational, parse_level, parse_rational, Level};
use crate::orbits::DescentData;
use crate::regmat::{RegularityCertificate, RingMatrix, Sign, TorsionClass};
use crate::series::{ConjClassSeries, NovikovSeries};
use crate::{Rational, Result};

fn schema(reason: impl Into<String>) -> Error {
    Error::Schema {
        reason: reason.into(),
    }
}

fn get<'a>(v: &'a Value, key: &str, ctx: &str) -> Result<&'a Value> {
    v.as_object()
        .ok_or_else(|| schema(format!("{ctx}: expected an object")))?
        .get(key)
        .ok_or_else(|| schema(format!("{ctx}: missing key `{key}`")))
}

fn as_str<'a>(v: &'a Value, ctx: &str) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| schema(format!("{ctx}: expected a string")))
}

fn as_array<'a>(v: &'a Value, ctx: &str) -> Result<&'a [Value]> {
    v.as_array()
        .map(Vec::as_slice)
        .ok_or_else(|| schema(format!("{ctx}: expected an array")))
}

fn as_usize(v: &Value, ctx: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| schema(format!("{ctx}: expected a non-negative integer")))
}

fn as_i64(v: &Value, ctx: &str) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| schema(format!("{ctx}: expected an integer")))
}

fn rational_from(v: &Value, ctx: &str) -> Result<Rational> {
    parse_rational(as_str(v, ctx)?)
}

fn level_from(v: &Value, ctx: &str) -> Result<Level> {
    parse_level(as_str(v, ctx)?)
}

pub fn rational_value(q: &Rational) -> Value {
    Value::String(format_rational(q))
}

pub fn level_value(l: &Level) -> Value {
    Value::String(l.to_string())
}

/// Pretty-print with a trailing newline; keys are already alphabetical, so
/// the bytes are canonical.
pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------------
// groups and weightings
// ---------------------------------------------------------------------------

pub fn group_to_value(spec: &GroupSpec) -> Value {
    json!({
        "generators": spec.generator_names(),
        "kind": match spec.kind() {
            GroupKind::Free => "free",
            GroupKind::FreeAbelian => "free-abelian",
        },
    })
}

pub fn parse_group(v: &Value) -> Result<Arc<GroupSpec>> {
    let kind = match as_str(get(v, "kind", "group")?, "group.kind")? {
        "free" => GroupKind::Free,
        "free-abelian" => GroupKind::FreeAbelian,
        other => {
            return Err(schema(format!(
                "group.kind: expected \"free\" or \"free-abelian\", got \"{other}\""
            )))
        }
    };
    let generators = as_array(get(v, "generators", "group")?, "group.generators")?
        .iter()
        .map(|g| as_str(g, "group.generators[]").map(str::to_owned))
        .collect::<Result<Vec<_>>>()?;
    GroupSpec::new(kind, generators)
}

/// Serialize the `"group"` and `"weights"` fields into an object under
/// construction.
fn put_weighting(obj: &mut Map<String, Value>, xi: &Weighting) {
    obj.insert("group".into(), group_to_value(xi.spec()));
    obj.insert(
        "weights".into(),
        Value::Array(xi.generator_weights().iter().map(rational_value).collect()),
    );
}

/// Read a weighting from an object holding `"group"` and `"weights"`.
pub fn parse_weighting(v: &Value) -> Result<Arc<Weighting>> {
    let spec = parse_group(get(v, "group", "input")?)?;
    let weights = as_array(get(v, "weights", "input")?, "weights")?
        .iter()
        .map(|w| rational_from(w, "weights[]"))
        .collect::<Result<Vec<_>>>()?;
    Weighting::new(&spec, weights)
}

pub fn weighting_to_value(xi: &Weighting) -> Value {
    let mut obj = Map::new();
    put_weighting(&mut obj, xi);
    Value::Object(obj)
}

// ---------------------------------------------------------------------------
// series
// ---------------------------------------------------------------------------

fn element_key_value(g: &GroupElement) -> (&'static str, Value) {
    match g.exponents() {
        Some(v) => (
            "vector",
            Value::Array(v.iter().map(|e| json!(e)).collect()),
        ),
        None => ("word", Value::String(g.to_word_string())),
    }
}

fn parse_element(term: &Value, spec: &Arc<GroupSpec>, ctx: &str) -> Result<GroupElement> {
    let obj = term
        .as_object()
        .ok_or_else(|| schema(format!("{ctx}: expected an object")))?;
    if let Some(word) = obj.get("word") {
        return GroupElement::parse(spec, as_str(word, ctx)?);
    }
    if let Some(vector) = obj.get("vector") {
        if spec.kind() != GroupKind::FreeAbelian {
            return Err(schema(format!(
                "{ctx}: key `vector` is only valid over a free-abelian group"
            )));
        }
        let exps = as_array(vector, ctx)?
            .iter()
            .map(|e| as_i64(e, ctx))
            .collect::<Result<Vec<_>>>()?;
        return GroupElement::from_exponents(spec, exps);
    }
    Err(schema(format!("{ctx}: missing key `word` or `vector`")))
}

/// Emit a series: `{"cutoff": …, "terms": [{"coeff": …, "word"/"vector": …}]}`
/// with terms sorted by weight descending, then element order.
pub fn series_to_value(s: &NovikovSeries) -> Value {
    let mut terms: Vec<(&GroupElement, &Rational)> = s.terms().collect();
    terms.sort_by(|(g1, _), (g2, _)| {
        s.weight_of(g2)
            .cmp(&s.weight_of(g1))
            .then_with(|| g1.cmp(g2))
    });
    let terms: Vec<Value> = terms
        .into_iter()
        .map(|(g, c)| {
            let (key, val) = element_key_value(g);
            json!({ "coeff": rational_value(c), key: val })
        })
        .collect();
    json!({ "cutoff": level_value(s.cutoff()), "terms": terms })
}

/// Parse a series: either the object form or a bare term array (exact).
pub fn parse_series(v: &Value, xi: &Arc<Weighting>) -> Result<NovikovSeries> {
    let (terms_value, cutoff) = match v {
        Value::Array(_) => (v, Level::NegInf),
        Value::Object(_) => {
            let cutoff = match v.get("cutoff") {
                None | Some(Value::Null) => Level::NegInf,
                Some(c) => level_from(c, "series.cutoff")?,
            };
            (get(v, "terms", "series")?, cutoff)
        }
        _ => return Err(schema("series: expected an object or a term array")),
    };
    let mut raw = Vec::new();
    for term in as_array(terms_value, "series.terms")? {
        let coeff = rational_from(get(term, "coeff", "series term")?, "series term coeff")?;
        let g = parse_element(term, xi.spec(), "series term")?;
        raw.push((g, coeff));
    }
    NovikovSeries::from_terms(xi, raw, cutoff)
}

/// Emit a class series: terms keyed `"class"` by the canonical
/// representative's word, sorted by weight descending then class order.
pub fn class_series_to_value(s: &ConjClassSeries) -> Value {
    let mut terms: Vec<_> = s.terms().collect();
    terms.sort_by(|(c1, _), (c2, _)| {
        s.class_weight(c2)
            .cmp(&s.class_weight(c1))
            .then_with(|| c1.cmp(c2))
    });
    let terms: Vec<Value> = terms
        .into_iter()
        .map(|(class, coeff)| {
            json!({
                "class": class.representative().to_word_string(),
                "coeff": rational_value(coeff),
            })
        })
        .collect();
    json!({ "cutoff": level_value(s.cutoff()), "terms": terms })
}

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

/// Row-major nested array of series values.
pub fn matrix_entries_value(m: &RingMatrix) -> Value {
    let rows: Vec<Value> = (0..m.rows())
        .map(|i| {
            Value::Array(
                (0..m.cols())
                    .map(|j| series_to_value(m.entry(i, j)))
                    .collect(),
            )
        })
        .collect();
    Value::Array(rows)
}

pub fn parse_matrix_entries(
    v: &Value,
    xi: &Arc<Weighting>,
    rows: usize,
    cols: usize,
    ctx: &str,
) -> Result<RingMatrix> {
    let row_values = as_array(v, ctx)?;
    if row_values.len() != rows {
        return Err(schema(format!(
            "{ctx}: expected {rows} rows, got {}",
            row_values.len()
        )));
    }
    let mut out = Vec::with_capacity(rows);
    for (i, row) in row_values.iter().enumerate() {
        let entries = as_array(row, &format!("{ctx}[{i}]"))?;
        if entries.len() != cols {
            return Err(schema(format!(
                "{ctx}[{i}]: expected {cols} columns, got {}",
                entries.len()
            )));
        }
        let mut parsed = Vec::with_capacity(cols);
        for e in entries {
            parsed.push(parse_series(e, xi)?);
        }
        out.push(parsed);
    }
    RingMatrix::from_rows(xi, out)
}

pub fn square_matrix_to_value(m: &RingMatrix) -> Value {
    json!({ "entries": matrix_entries_value(m), "n": m.rows() })
}

pub fn parse_square_matrix(v: &Value, xi: &Arc<Weighting>) -> Result<RingMatrix> {
    let n = as_usize(get(v, "n", "matrix")?, "matrix.n")?;
    parse_matrix_entries(get(v, "entries", "matrix")?, xi, n, n, "matrix.entries")
}

// ---------------------------------------------------------------------------
// certificates and torsion classes
// ---------------------------------------------------------------------------

/// Witness indices are emitted 1-based.
pub fn certificate_to_value(c: &RegularityCertificate) -> Value {
    json!({
        "max_cycle_mean": level_value(c.max_cycle_mean()),
        "regular": c.is_regular(),
        "witness": c.witness().map(|w| w.iter().map(|i| i + 1).collect::<Vec<_>>()),
    })
}

pub fn torsion_to_value(tc: &TorsionClass) -> Value {
    let summands: Vec<Value> = tc
        .summands()
        .iter()
        .map(|s| {
            json!({
                "matrix": square_matrix_to_value(s.matrix()),
                "sign": match s.sign() {
                    Sign::Plus => "+",
                    Sign::Minus => "-",
                },
            })
        })
        .collect();
    json!({ "summands": summands })
}

// ---------------------------------------------------------------------------
// dimension-indexed families
// ---------------------------------------------------------------------------

/// Parse `[{"dim": i, <key>: …}]` covering dimensions `0‥len` exactly.
fn parse_dim_family<'a>(
    v: &'a Value,
    len: usize,
    key: &str,
    ctx: &str,
) -> Result<Vec<&'a Value>> {
    let items = as_array(v, ctx)?;
    if items.len() != len {
        return Err(schema(format!(
            "{ctx}: expected {len} entries, got {}",
            items.len()
        )));
    }
    let mut out: Vec<Option<&Value>> = vec![None; len];
    for item in items {
        let dim = as_usize(get(item, "dim", ctx)?, &format!("{ctx}[].dim"))?;
        if dim >= len {
            return Err(schema(format!("{ctx}: dimension {dim} out of range")));
        }
        if out[dim].is_some() {
            return Err(schema(format!("{ctx}: dimension {dim} appears twice")));
        }
        out[dim] = Some(get(item, key, &format!("{ctx}[dim={dim}]"))?);
    }
    Ok(out.into_iter().map(|o| o.expect("all dims filled")).collect())
}

// ---------------------------------------------------------------------------
// descent data
// ---------------------------------------------------------------------------

pub fn descent_to_value(d: &DescentData) -> Value {
    let mut obj = Map::new();
    put_weighting(&mut obj, d.weighting());
    let matrices: Vec<Value> = d
        .matrices()
        .iter()
        .enumerate()
        .map(|(dim, m)| json!({ "dim": dim, "matrix": square_matrix_to_value(m) }))
        .collect();
    obj.insert("matrices".into(), Value::Array(matrices));
    Value::Object(obj)
}

pub fn parse_descent(v: &Value) -> Result<DescentData> {
    let xi = parse_weighting(v)?;
    let raw = as_array(get(v, "matrices", "descent")?, "descent.matrices")?;
    let values = parse_dim_family(
        get(v, "matrices", "descent")?,
        raw.len(),
        "matrix",
        "descent.matrices",
    )?;
    let matrices = values
        .into_iter()
        .map(|m| parse_square_matrix(m, &xi))
        .collect::<Result<Vec<_>>>()?;
    DescentData::new(&xi, matrices)
}

// ---------------------------------------------------------------------------
// complexes and cone data
// ---------------------------------------------------------------------------

pub fn complex_to_value(c: &FreeChainComplex) -> Value {
    let boundaries: Vec<Value> = c
        .boundaries()
        .iter()
        .enumerate()
        .map(|(j, b)| json!({ "dim": j + 1, "entries": matrix_entries_value(b) }))
        .collect();
    json!({ "boundaries": boundaries, "ranks": c.ranks() })
}

pub fn parse_complex(v: &Value, xi: &Arc<Weighting>) -> Result<FreeChainComplex> {
    let ranks = as_array(get(v, "ranks", "complex")?, "complex.ranks")?
        .iter()
        .map(|r| as_usize(r, "complex.ranks[]"))
        .collect::<Result<Vec<usize>>>()?;
    let n_bound = ranks.len().saturating_sub(1);
    let items = as_array(get(v, "boundaries", "complex")?, "complex.boundaries")?;
    if items.len() != n_bound {
        return Err(schema(format!(
            "complex.boundaries: expected {n_bound} matrices, got {}",
            items.len()
        )));
    }
    let mut boundaries: Vec<Option<RingMatrix>> = vec![None; n_bound];
    for item in items {
        let dim = as_usize(get(item, "dim", "complex.boundaries")?, "boundary.dim")?;
        if dim == 0 || dim > n_bound {
            return Err(schema(format!(
                "complex.boundaries: dimension {dim} out of range 1‥{n_bound}"
            )));
        }
        if boundaries[dim - 1].is_some() {
            return Err(schema(format!(
                "complex.boundaries: dimension {dim} appears twice"
            )));
        }
        let entries = get(item, "entries", "complex.boundaries")?;
        boundaries[dim - 1] = Some(parse_matrix_entries(
            entries,
            xi,
            ranks[dim],
            ranks[dim - 1],
            &format!("boundary[dim={dim}]"),
        )?);
    }
    let boundaries = boundaries
        .into_iter()
        .map(|b| b.expect("all dims filled"))
        .collect();
    FreeChainComplex::new(xi, ranks, boundaries)
}

pub fn cone_to_value(data: &ConeData) -> Value {
    let mut obj = Map::new();
    put_weighting(&mut obj, data.weighting());
    obj.insert("ambient".into(), complex_to_value(data.ambient()));
    obj.insert("sub".into(), complex_to_value(data.sub()));
    let family = |ms: &[RingMatrix]| -> Value {
        Value::Array(
            ms.iter()
                .enumerate()
                .map(|(dim, m)| json!({ "dim": dim, "entries": matrix_entries_value(m) }))
                .collect(),
        )
    };
    obj.insert("inclusion".into(), family(data.inclusion()));
    obj.insert("flow".into(), family(data.flow()));
    Value::Object(obj)
}

pub fn parse_cone(v: &Value) -> Result<ConeData> {
    let xi = parse_weighting(v)?;
    let sub = parse_complex(get(v, "sub", "cone")?, &xi)?;
    let ambient = parse_complex(get(v, "ambient", "cone")?, &xi)?;
    let dims = sub.dimensions();
    let parse_family = |key: &str| -> Result<Vec<RingMatrix>> {
        let values = parse_dim_family(get(v, key, "cone")?, dims, "entries", key)?;
        values
            .into_iter()
            .enumerate()
            .map(|(dim, entries)| {
                parse_matrix_entries(
                    entries,
                    &xi,
                    sub.ranks()[dim],
                    ambient.ranks()[dim],
                    &format!("{key}[dim={dim}]"),
                )
            })
            .collect()
    };
    let inclusion = parse_family("inclusion")?;
    let flow = parse_family("flow")?;
    ConeData::new(sub, ambient, inclusion, flow)
}
