//! Inverses of elements that are units on a radius interval.
//!
//! A unit on [s1, s2] has a single dominant term a p^m u^e there, so
//! x = a p^m u^e (1 - t) with w_s(t) > 0 at both ends, and the inverse is a
//! geometric series in t. The series is summed as (1+t)(1+t^2)(1+t^4)... in
//! a window wide enough that nothing dropped at its edges can come back
//! into the caller's window above the working precision.

use crate::context::Ctx;
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::modarith;
use crate::polygon::Interval;
use crate::rational::{ceil_q, qi, Q};
use crate::scalar::PAdicScalar;
use crate::valuation::{self, weighted_valuation};

const MAX_DOUBLINGS: usize = 64;
const MAX_WORK_WIDTH: i64 = 1 << 18;

/// The dominant staircase point (v, n) of a unit on the interval, or an
/// error naming why there is none.
fn dominant_point(x: &LaurentElement, iv: &Interval) -> Result<(i64, i64)> {
    let p = valuation::newton_polygon(x, iv)?;
    if !p.is_empty() {
        return Err(Error::NotAUnit);
    }
    if p.precision_limited {
        return Err(Error::PrecisionExhausted("unit test depends on digits beyond the working precision".into()));
    }
    Ok(p.anchor)
}

/// Inverse of a unit on (0, r].
pub fn invert_unit(x: &LaurentElement, r: &Q) -> Result<LaurentElement> {
    invert_on(x, &Interval::up_to(*r))
}

/// Inverse of a unit on the interval; `iv.lo = 0` with an open end means (0, hi].
pub fn invert_on(x: &LaurentElement, iv: &Interval) -> Result<LaurentElement> {
    if x.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    iv.validate()?;
    let ctx = x.ctx().clone();
    let (e, m) = dominant_point(x, iv)?;
    let lead = x.coeff(e);
    debug_assert_eq!(lead.vexp(), Some(m));
    let prec = ctx.prec();

    // t = 1 - x / (a p^m u^e), computed in a frame where the dominant term is 1.
    let k = (prec - m).clamp(1, ctx.max_k() as i64) as u32;
    let a_inv = modarith::inv_unit(lead.mantissa(), ctx.p(), ctx.pow(k));
    let hi_f = ctx.hi() + e;
    let lo_f = ctx.lo() + e;
    let s2 = iv.hi;
    let span_ctx = ctx.with_window(ctx.lo() - e.abs() - 1, ctx.hi() + e.abs() + 1);
    let scale = LaurentElement::monomial(&span_ctx, 0, PAdicScalar::new(&ctx, 0, a_inv));
    let normalized = x.mul_p_pow(-m).reframe(&span_ctx, -e).mul(&scale);
    let t = LaurentElement::one(&span_ctx).sub(&normalized);
    if t.is_zero() {
        return Ok(LaurentElement::monomial(&ctx, -e, PAdicScalar::new(&ctx, -m, a_inv)));
    }

    // Every product of k terms of t has s2 E + val >= k c.
    let c = weighted_valuation(&t, &s2).unwrap();
    let c = match weighted_valuation(&t, &iv.lo) {
        Some(cl) if iv.lo_closed && iv.lo > qi(0) => c.min(cl),
        _ => c,
    };
    if c <= qi(0) {
        return Err(Error::NotAUnit);
    }
    let max_pos = t.max_exp().unwrap().max(1);
    let max_neg = (-t.min_exp().unwrap()).max(1);
    let reach = qi(prec) + s2 * qi(hi_f.max(0));
    let guard_hi = ceil_q(&(qi(max_pos) * reach / c)) as i64;
    let guard_lo = ceil_q(&(qi(max_neg) * reach / c)) as i64;
    // Terms pushed past one edge can only return through terms of t pointing
    // the other way, so a one-sided t needs no guard on the far side.
    let (t_lo, t_hi) = (t.min_exp().unwrap(), t.max_exp().unwrap());
    let w_lo = if t_hi > 0 { lo_f.min(-guard_lo) } else { lo_f }.min(t_lo);
    let w_hi = if t_lo < 0 { hi_f.max(guard_hi) } else { hi_f }.max(t_hi);
    if w_hi - w_lo > MAX_WORK_WIDTH {
        return Err(Error::PrecisionExhausted(format!(
            "inverse needs a working window of width {} (limit {MAX_WORK_WIDTH})",
            w_hi - w_lo
        )));
    }
    let wide: Ctx = ctx.with_window(w_lo, w_hi);
    let t = t.reframe(&wide, 0);
    let mut sum = LaurentElement::one(&wide).add(&t);
    let mut power = t.square();
    let mut steps = 1;
    while !power.is_zero() {
        if steps == MAX_DOUBLINGS {
            return Err(Error::PrecisionExhausted("geometric series did not reach the working precision".into()));
        }
        sum = sum.add(&sum.mul(&power));
        power = power.square();
        steps += 1;
    }

    // The series runs past the caller's window when the wide sum has terms
    // there or was itself cut at a shared edge.
    let past_lo = sum.min_exp().is_some_and(|e| e < lo_f) || (sum.truncated_lo() && w_lo == lo_f);
    let past_hi = sum.max_exp().is_some_and(|e| e > hi_f) || (sum.truncated_hi() && w_hi == hi_f);
    let y = sum
        .mul(&LaurentElement::monomial(&wide, 0, PAdicScalar::new(&ctx, 0, a_inv)))
        .reframe(&ctx, -e)
        .mul_p_pow(-m)
        .with_flags(past_lo, past_hi);
    verify_inverse(x, &y)?;
    Ok(y)
}

/// Checks x y = 1 on the part of the window where y's truncation cannot
/// interfere, up to the precision the absolute model can certify.
pub fn verify_inverse(x: &LaurentElement, y: &LaurentElement) -> Result<()> {
    let ctx = x.ctx();
    let (lo, hi) = ctx.window();
    let a = lo + x.max_exp().unwrap_or(0).max(0);
    let b = hi + x.min_exp().unwrap_or(0).min(0);
    let resid = x.mul(y).sub(&LaurentElement::one(ctx)).restrict(a, b);
    let need = ctx.prec() + x.valuation().unwrap_or(0).min(0);
    match resid.valuation() {
        Some(v) if v < need => Err(Error::PrecisionExhausted(format!(
            "inverse residual has valuation {v}, needed {need}"
        ))),
        _ => Ok(()),
    }
}

/// An inverse of x in the fraction field: x is inverted at a single radius
/// halfway below its smallest slope (or at r0 when it has none).
pub fn field_inverse(x: &LaurentElement) -> Result<LaurentElement> {
    if x.is_zero() {
        return Err(Error::ZeroDivisor);
    }
    let r0 = x.ctx().r0();
    let poly = valuation::newton_polygon(x, &Interval::up_to(r0))?;
    let s = match poly.slopes.first() {
        Some(&(s, _)) => s / qi(2),
        None => r0,
    };
    invert_on(x, &Interval::closed(s, s))
}
