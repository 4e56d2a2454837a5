//! One function per verb: read the input document, run the computation and
//! assemble the JSON report.

use std::path::Path;

use serde_json::{json, Map, Value};

use robba::cohomology::solve_h1_rank1;
use robba::division::div_rem;
use robba::json::{element_to_json, matrix_to_json, module_to_json, parse_ctx, parse_document, parse_element, parse_matrix, parse_module};
use robba::matrix::Matrix;
use robba::normal_form::{self, NormalForm};
use robba::rational::{fmt_q, parse_q, qi};
use robba::sigma::SigmaModule;
use robba::slopes::{compare_polygons, generic_hn, special_hn_polygon_dwork, Comparison};
use robba::valuation::{is_unit, newton_polygon};
use robba::{suites, Ctx, Error, Interval, NewtonPolygon, RingContext, Q};

use crate::{Failure, Opts};

pub fn base_ctx(opts: &Opts) -> Result<Ctx, Failure> {
    Ok(apply_overrides(RingContext::default_ctx(), opts)?)
}

fn apply_overrides(mut ctx: Ctx, opts: &Opts) -> Result<Ctx, Error> {
    if let Some(prec) = opts.prec {
        ctx = ctx.with_prec(prec)?;
    }
    if let Some((lo, hi)) = opts.window {
        ctx = RingContext::new(ctx.p(), ctx.q(), ctx.prec(), (lo, hi), ctx.r0())?;
    }
    Ok(ctx)
}

struct Doc {
    ctx: Ctx,
    body: Value,
}

/// Reads a document. A "ctx" key replaces the defaults and is itself
/// subject to the command-line overrides.
fn read(path: &Path, base: &Ctx, opts: &Opts) -> Result<Doc, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let mut body = parse_document(&text, &path.display().to_string())?;
    let ctx = match body.as_object_mut().and_then(|o| o.remove("ctx")) {
        Some(c) => apply_overrides(parse_ctx(&c)?, opts)?,
        None => base.clone(),
    };
    Ok(Doc { ctx, body })
}

fn field<'a>(body: &'a Value, key: &str) -> Result<&'a Value, Error> {
    body.get(key).ok_or_else(|| Error::Parse(format!("missing field \"{key}\"")))
}

fn rational(body: &Value, key: &str) -> Result<Q, Error> {
    match field(body, key)? {
        Value::String(s) => parse_q(s).map_err(|e| Error::Parse(format!("{key}: {e}"))),
        Value::Number(n) => n.as_i64().map(qi).ok_or_else(|| Error::Parse(format!("{key}: expected an integer or \"a/b\""))),
        _ => Err(Error::Parse(format!("{key}: expected an integer or \"a/b\""))),
    }
}

fn integer(body: &Value, key: &str) -> Result<i64, Error> {
    field(body, key)?.as_i64().ok_or_else(|| Error::Parse(format!("{key}: expected an integer")))
}

fn module(doc: &Doc) -> Result<SigmaModule, Error> {
    parse_module(&doc.body, &doc.ctx)
}

fn slopes(p: &NewtonPolygon) -> Value {
    p.slope_list().iter().map(fmt_q).collect()
}

pub fn polygon(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let doc = read(path, base, opts)?;
    // Either a bare element or {"element": ..., "interval": ["lo", "hi"]}.
    let (raw, iv) = match &doc.body {
        Value::Object(_) => {
            let iv = match doc.body.get("interval") {
                None => Interval::up_to(doc.ctx.r0()),
                Some(v) => {
                    let ends = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| Error::Parse("interval: expected [lo, hi]".into()))?;
                    let w = json!({ "lo": ends[0], "hi": ends[1] });
                    let (lo, hi) = (rational(&w, "lo")?, rational(&w, "hi")?);
                    let iv = if lo == qi(0) { Interval::up_to(hi) } else { Interval::closed(lo, hi) };
                    iv.validate()?;
                    iv
                }
            };
            (field(&doc.body, "element")?, iv)
        }
        other => (other, Interval::up_to(doc.ctx.r0())),
    };
    let x = parse_element(&doc.ctx, raw)?;
    let poly = newton_polygon(&x, &iv)?;
    Ok(json!({
        "element": element_to_json(&x),
        "polygon": poly.to_json(),
        "slopes": slopes(&poly),
        "is_unit": is_unit(&x, &iv),
    }))
}

pub fn divrem(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let doc = read(path, base, opts)?;
    let y = parse_element(&doc.ctx, field(&doc.body, "y")?)?;
    let x = parse_element(&doc.ctx, field(&doc.body, "x")?)?;
    let r = rational(&doc.body, "r")?;
    let d = div_rem(&y, &x, &r, opts.target.unwrap_or(16))?;
    Ok(json!({
        "quotient": element_to_json(&d.quotient),
        "remainder": element_to_json(&d.remainder),
        "certificate": d.cert.to_json(),
    }))
}

pub fn hn_generic(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let m = module(&read(path, base, opts)?)?;
    let g = generic_hn(&m)?;
    Ok(json!({
        "generic": g.polygon.to_json(),
        "slopes": slopes(&g.polygon),
        "method": g.method,
        "cyclic_vector": g.cyclic_vector.as_ref().map(|v| v.iter().map(element_to_json).collect::<Vec<_>>()),
    }))
}

pub fn hn_special(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let m = module(&read(path, base, opts)?)?;
    let s = special_hn_polygon_dwork(&m)?;
    Ok(json!({ "special": s.to_json(), "slopes": slopes(&s) }))
}

fn comparison_report(m: &SigmaModule) -> Result<Value, Failure> {
    let report = compare_polygons(m)?;
    let v = report.to_json();
    if report.comparison == Comparison::Violation {
        return Err(Failure::Violation(v));
    }
    Ok(v)
}

pub fn compare(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    comparison_report(&module(&read(path, base, opts)?)?)
}

fn normal_form_input(doc: &Doc) -> Result<(Matrix, Matrix, Q), Error> {
    let a = parse_matrix(&doc.ctx, field(&doc.body, "matrix")?)?;
    let d = parse_matrix(&doc.ctx, field(&doc.body, "d")?)?;
    Ok((a, d, rational(&doc.body, "radius")?))
}

fn normal_form_report(nf: &NormalForm) -> Value {
    json!({ "u": matrix_to_json(&nf.u), "b": matrix_to_json(&nf.b), "certificate": nf.cert.to_json() })
}

pub fn triangularize(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let (a, d, r) = normal_form_input(&read(path, base, opts)?)?;
    Ok(normal_form_report(&normal_form::triangularize(&a, &d, &r, opts.target.unwrap_or(12))?))
}

pub fn goodmodel(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let (a, d, r) = normal_form_input(&read(path, base, opts)?)?;
    Ok(normal_form_report(&normal_form::good_model_turnover(&a, &d, &r, opts.target.unwrap_or(12))?))
}

pub fn solve_h1(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let doc = read(path, base, opts)?;
    let n = integer(&doc.body, "n")?;
    let x = parse_element(&doc.ctx, field(&doc.body, "x")?)?;
    Ok(solve_h1_rank1(n, &x, opts.target.unwrap_or(16))?.to_json())
}

fn small(body: &Value, key: &str) -> Result<u32, Error> {
    let v = integer(body, key)?;
    u32::try_from(v).ok().filter(|&v| v > 0).ok_or_else(|| Error::InvariantViolation(format!("{key} must be a positive integer, got {v}")))
}

pub fn module_algebra(base: &Ctx, opts: &Opts, path: &Path) -> Result<Value, Failure> {
    let doc = read(path, base, opts)?;
    let op = field(&doc.body, "op")?.as_str().ok_or_else(|| Error::Parse("op: expected a string".into()))?;
    let sub = |key: &str| parse_module(field(&doc.body, key)?, &doc.ctx);
    let m = sub("module")?;
    let out = match op {
        "twist" => m.twist(integer(&doc.body, "c")?),
        "dual" => m.dual()?,
        "tensor" => m.tensor(&sub("other")?)?,
        "direct_sum" => m.direct_sum(&sub("other")?)?,
        "wedge" => m.wedge(small(&doc.body, "k")? as usize)?,
        "pushforward" => m.pushforward(small(&doc.body, "a")?)?,
        "pullback" => m.pullback(small(&doc.body, "a")?)?,
        other => return Err(Error::Parse(format!("op: unknown operation \"{other}\"")).into()),
    };
    let mut report = Map::new();
    report.insert("module".into(), module_to_json(&out));
    report.insert("rank".into(), json!(out.rank()));
    report.insert("degree".into(), json!(out.degree()));
    report.insert("slope".into(), json!(fmt_q(&out.slope())));
    // The polygon is best effort: pushforwards and pullbacks of large modules
    // can run out of precision even when the module itself is fine.
    match generic_hn(&out) {
        Ok(g) => report.insert("generic_slopes".into(), slopes(&g.polygon)),
        Err(e) => report.insert("generic_error".into(), json!(e.to_string())),
    };
    Ok(Value::Object(report))
}

pub fn selftest(opts: &Opts) -> Result<Value, Failure> {
    if opts.instances == 0 {
        return Err(Error::InvalidArgument("--instances must be positive".into()).into());
    }
    let results = suites::run_all(opts.seed, opts.instances);
    for r in &results {
        eprintln!("{}", r.line());
        for f in &r.failures {
            eprintln!("    {f}");
        }
    }
    let passed = results.iter().all(|r| r.passed());
    let report = json!({
        "seed": opts.seed,
        "instances": opts.instances,
        "passed": passed,
        "checks": results.iter().map(|r| r.checked).sum::<usize>(),
        "failed": results.iter().map(|r| r.failed).sum::<usize>(),
        "suites": results.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
    });
    if passed {
        Ok(report)
    } else {
        Err(Failure::Violation(report))
    }
}

pub fn example_7_3(ctx: &Ctx) -> Result<Value, Failure> {
    let m = suites::worked_example(ctx);
    let mut report = comparison_report(&m)?;
    report["module"] = module_to_json(&m);
    Ok(report)
}
