//! JSON forms shared by the command line and fixtures.
//!
//! element: `[[i, c], ...]` with `c` a bare integer, a decimal string or "a/p^k".
//! matrix: row-major nested arrays of elements.
//! module: `{"ctx": {...}, "frob_power": f, "matrix": [...], "radius": "a/b"}`,
//! where `ctx`, `frob_power` and `radius` are optional.

use serde_json::{json, Value};

use crate::context::{Ctx, CtxJson, RingContext};
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{fmt_q, parse_q, qi, Q};
use crate::scalar::PAdicScalar;
use crate::sigma::SigmaModule;

fn parse_err(path: &str, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{path}: {msg}"))
}

pub fn element_to_json(x: &LaurentElement) -> Value {
    Value::Array(x.to_literal().into_iter().map(|(i, c)| json!([i, c])).collect())
}

pub fn parse_element_at(ctx: &Ctx, v: &Value, path: &str) -> Result<LaurentElement> {
    let arr = v.as_array().ok_or_else(|| parse_err(path, "expected an array of [exponent, coefficient] pairs"))?;
    let mut terms = Vec::with_capacity(arr.len());
    for (k, t) in arr.iter().enumerate() {
        let at = format!("{path}[{k}]");
        let pair = t.as_array().filter(|a| a.len() == 2).ok_or_else(|| parse_err(&at, "expected [exponent, coefficient]"))?;
        let i = pair[0].as_i64().ok_or_else(|| parse_err(&format!("{at}[0]"), "exponent must be an integer"))?;
        let c = match &pair[1] {
            Value::Number(n) => {
                let c = n.as_i64().ok_or_else(|| parse_err(&format!("{at}[1]"), "coefficient must be an integer"))?;
                PAdicScalar::from_int(ctx, c as i128)
            }
            Value::String(s) => PAdicScalar::parse(ctx, s).map_err(|e| parse_err(&format!("{at}[1]"), e))?,
            _ => return Err(parse_err(&format!("{at}[1]"), "coefficient must be an integer or a string")),
        };
        if i < ctx.lo() || i > ctx.hi() {
            return Err(parse_err(&format!("{at}[0]"), format!("exponent {i} outside the window [{}, {}]", ctx.lo(), ctx.hi())));
        }
        terms.push((i, c));
    }
    Ok(LaurentElement::from_terms(ctx, &terms))
}

pub fn parse_element(ctx: &Ctx, v: &Value) -> Result<LaurentElement> {
    parse_element_at(ctx, v, "element")
}

pub fn matrix_to_json(m: &Matrix) -> Value {
    Value::Array(m.to_rows().iter().map(|r| Value::Array(r.iter().map(element_to_json).collect())).collect())
}

pub fn parse_matrix_at(ctx: &Ctx, v: &Value, path: &str) -> Result<Matrix> {
    let rows = v.as_array().ok_or_else(|| parse_err(path, "expected an array of rows"))?;
    let mut out = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let at = format!("{path}[{i}]");
        let row = row.as_array().ok_or_else(|| parse_err(&at, "expected a row of elements"))?;
        let els = row
            .iter()
            .enumerate()
            .map(|(j, e)| parse_element_at(ctx, e, &format!("{at}[{j}]")))
            .collect::<Result<Vec<_>>>()?;
        out.push(els);
    }
    Matrix::from_rows(ctx, out).map_err(|e| parse_err(path, e))
}

pub fn parse_matrix(ctx: &Ctx, v: &Value) -> Result<Matrix> {
    parse_matrix_at(ctx, v, "matrix")
}

pub fn ctx_to_json(ctx: &RingContext) -> Value {
    serde_json::to_value(ctx.to_json()).expect("context serializes")
}

pub fn parse_ctx(v: &Value) -> Result<Ctx> {
    let c: CtxJson = serde_json::from_value(v.clone()).map_err(|e| parse_err("ctx", e))?;
    c.build()
}

pub fn module_to_json(m: &SigmaModule) -> Value {
    json!({
        "ctx": ctx_to_json(m.ctx()),
        "frob_power": m.frob_power(),
        "matrix": matrix_to_json(m.matrix()),
        "radius": fmt_q(&m.radius()),
    })
}

fn parse_rational(v: &Value, path: &str) -> Result<Q> {
    match v {
        Value::String(s) => parse_q(s).map_err(|e| parse_err(path, e)),
        Value::Number(n) => n.as_i64().map(qi).ok_or_else(|| parse_err(path, "expected an integer or \"a/b\"")),
        _ => Err(parse_err(path, "expected an integer or \"a/b\"")),
    }
}

/// Parses a module; `fallback` supplies the context when the document has none.
/// Failures of the module's own invariants come back as `InvariantViolation`.
pub fn parse_module(v: &Value, fallback: &Ctx) -> Result<SigmaModule> {
    let obj = v.as_object().ok_or_else(|| parse_err("module", "expected an object"))?;
    let ctx = match obj.get("ctx") {
        Some(c) => parse_ctx(c)?,
        None => fallback.clone(),
    };
    let matrix = parse_matrix(&ctx, obj.get("matrix").ok_or_else(|| parse_err("module", "missing \"matrix\""))?)?;
    let frob_power = match obj.get("frob_power") {
        None => 1,
        Some(f) => f
            .as_u64()
            .and_then(|f| u32::try_from(f).ok())
            .ok_or_else(|| parse_err("frob_power", "expected a positive integer"))?,
    };
    let radius = match obj.get("radius") {
        None => ctx.r0(),
        Some(r) => parse_rational(r, "radius")?,
    };
    SigmaModule::new(matrix, frob_power, radius).map_err(|e| match e {
        Error::InvalidArgument(m) => Error::InvariantViolation(m),
        e @ (Error::DetHasSlopes | Error::SingularAtPrecision | Error::PrecisionExhausted(_)) => {
            Error::InvariantViolation(format!("module determinant: {e}"))
        }
        e => e,
    })
}

/// Line and column of a serde_json syntax error, folded into the message.
pub fn parse_document(text: &str, what: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: line {} column {}: {e}", e.line(), e.column())))
}
