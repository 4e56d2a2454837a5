//! Semiunit presentations x = sum p^i u_i (each u_i zero or a unit digit
//! polynomial), the splitting at p^0, bounded approximation, and positioning.

use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::inverse::invert_unit;
use crate::polygon::Interval;
use crate::rational::{mid, qi, Q};
use crate::valuation::{self, min_negative_partial, minimizers, partial_weighted, weighted_valuation};

/// Digits of x with each nonzero digit checked to be a unit on (0, r0].
pub fn semiunit_presentation(x: &LaurentElement) -> Result<Vec<(i64, LaurentElement)>> {
    let iv = Interval::up_to(x.ctx().r0());
    let digits = x.digit_decompose();
    for (i, d) in &digits {
        if !valuation::is_unit(d, &iv) {
            return Err(Error::InvariantViolation(format!("digit {i} is not a unit")));
        }
    }
    Ok(digits)
}

/// (digits at p^i with i <= 0, digits with i > 0).
pub fn split_at_zero(x: &LaurentElement) -> (LaurentElement, LaurentElement) {
    (x.digit_range(i64::MIN, 0), x.digit_range(1, i64::MAX))
}

/// The digits at nonnegative p-powers up to the smallest cutoff m for which
/// w_s(x - y) >= min_{n<0} v_{n,s}(x) at both ends and the middle of `iv`.
pub fn bounded_approx(x: &LaurentElement, r: &Q, iv: &Interval) -> Result<LaurentElement> {
    iv.validate()?;
    if iv.hi > *r || *r >= x.ctx().r0() {
        return Err(Error::InvalidArgument("bounded approximation needs I within [0, r] and r < r0".into()));
    }
    if x.is_zero() {
        return Ok(x.clone());
    }
    let radii = [iv.lo, mid(&iv.lo, &iv.hi), iv.hi];
    let ok = |rest: &LaurentElement| {
        radii.iter().all(|s| match (min_negative_partial(x, s), weighted_valuation(rest, s)) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(b), Some(w)) => w >= b,
        })
    };
    let mut y = LaurentElement::zero(x.ctx());
    if ok(x) {
        return Ok(y);
    }
    for m in 0..x.ctx().prec() {
        y = y.add(&x.digit_range(m, m));
        if ok(&x.sub(&y)) {
            return Ok(y);
        }
    }
    Err(Error::PrecisionExhausted("no digit cutoff meets the approximation bound".into()))
}

#[derive(Clone, Debug)]
pub struct Positioned {
    pub unit: LaurentElement,
    pub shift: i64,
    pub y: LaurentElement,
}

/// A unit u on (0, r0] and a shift i with y = u p^i x satisfying w_r(y) = 0,
/// v_0(y - 1) > 0 and v_{n,r}(y) > 0 for n < 0.
pub fn position(x: &LaurentElement, r: &Q) -> Result<Positioned> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let ctx = x.ctx();
    if *r <= qi(0) || *r > ctx.r0() {
        return Err(Error::InvalidArgument("positioning needs 0 < r <= r0".into()));
    }
    // Smallest minimizing n, so the shift i = -n is the largest one.
    let n_star = minimizers(x, r)[0].1;
    let shift = -n_star;
    let xs = x.mul_p_pow(shift);
    let d0 = xs.digit_range(0, 0);
    let unit = invert_unit(&d0, &ctx.r0())?;
    let y = unit.mul(&xs);
    check_positioned(&y, r)?;
    Ok(Positioned { unit, shift, y })
}

/// The three positioning conditions, checked exactly.
pub fn check_positioned(y: &LaurentElement, r: &Q) -> Result<()> {
    let fail = |what: &str| Err(Error::PrecisionExhausted(format!("positioned element fails {what}")));
    if weighted_valuation(y, r) != Some(qi(0)) {
        return fail("w_r(y) = 0");
    }
    let d = y.sub(&LaurentElement::one(y.ctx()));
    if valuation::partial_valuation(&d, 0).value.is_some_and(|v| v <= 0) {
        return fail("v_0(y - 1) > 0");
    }
    let w = y.valuation().unwrap();
    for n in w..0 {
        if partial_weighted(y, n, r).is_some_and(|v| v <= qi(0)) {
            return fail("v_{n,r}(y) > 0 for n < 0");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;
    use crate::rational::q;
    use crate::scalar::PAdicScalar;

    fn el(t: &[(i64, i128)]) -> LaurentElement {
        LaurentElement::from_ints(&RingContext::default_ctx(), t)
    }

    #[test]
    fn presentations() {
        let x = el(&[(1, 1), (3, 5)]);
        assert_eq!(semiunit_presentation(&x).unwrap(), vec![(0, el(&[(1, 1)])), (1, el(&[(3, 1)]))]);
        assert_eq!(semiunit_presentation(&el(&[(0, 25)])).unwrap(), vec![(2, el(&[(0, 1)]))]);
    }

    #[test]
    fn splitting() {
        let ctx = RingContext::default_ctx();
        let x = el(&[(-1, 1), (1, 5)]);
        assert_eq!(split_at_zero(&x), (el(&[(-1, 1)]), el(&[(1, 5)])));
        let z = LaurentElement::monomial(&ctx, 2, PAdicScalar::p_power(&ctx, -1)).add(&x);
        let (a, b) = split_at_zero(&z);
        assert_eq!(a.add(&b), z);
        assert_eq!(b, el(&[(1, 5)]));
    }

    #[test]
    fn approximation() {
        let x = el(&[(-1, 1), (1, 5)]);
        let iv = Interval::closed(q(1, 4), q(1, 2));
        let y = bounded_approx(&x, &q(1, 2), &iv).unwrap();
        for s in [q(1, 4), q(1, 2)] {
            let lhs = weighted_valuation(&x.sub(&y), &s);
            assert!(lhs.is_none() || lhs.unwrap() >= min_negative_partial(&x, &s).unwrap_or(qi(1000)));
        }
        let u = el(&[(3, 2)]);
        assert_eq!(bounded_approx(&u, &q(1, 2), &iv).unwrap(), u);
        assert!(bounded_approx(&el(&[]), &q(1, 2), &iv).unwrap().is_zero());
    }

    #[test]
    fn positioning() {
        let p = position(&el(&[(0, 125)]), &q(1, 2)).unwrap();
        assert_eq!(p.shift, -3);
        assert!(p.unit.is_one() && p.y.is_one());
        let p = position(&el(&[(1, 1)]), &q(1, 2)).unwrap();
        assert_eq!(p.shift, 0);
        assert_eq!(p.unit, el(&[(-1, 1)]));
        for r in [q(1, 2), qi(1)] {
            let p = position(&el(&[(5, 1), (0, 5)]), &r).unwrap();
            assert_eq!(p.shift, -1);
            check_positioned(&p.y, &r).unwrap();
        }
    }
}
