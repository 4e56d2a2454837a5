//! Partial and weighted valuations, element Newton polygons, unit and height tests.
//!
//! For x = sum c_i u^i, v_n(x) is the least i with w(c_i) <= n, and
//! w_r(x) = min_n (r v_n(x) + n), which is also min_i (r i + w(c_i)). Only
//! n below the working precision are ever examined.

use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::polygon::{lower_hull, Interval, NewtonPolygon, PolygonKind};
use crate::rational::{qi, Q};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PartialValuation {
    /// `None` is +infinity.
    pub value: Option<i64>,
    /// n is at or beyond the working precision, so the value may change with more digits.
    pub precision_limited: bool,
}

pub fn partial_valuation(x: &LaurentElement, n: i64) -> PartialValuation {
    let value = x.term_valuations().into_iter().filter(|&(_, c)| c <= n).map(|(e, _)| e).min();
    PartialValuation { value, precision_limited: n >= x.ctx().prec() }
}

/// The points (v_n, n) at which v_n strictly drops, by increasing n. Every
/// other (v_n, n) lies directly above one of these.
pub fn staircase(x: &LaurentElement) -> Vec<(i64, i64)> {
    let mut tv = x.term_valuations();
    tv.sort_by_key(|&(e, c)| (c, e));
    let mut out: Vec<(i64, i64)> = Vec::new();
    for (e, c) in tv {
        match out.last() {
            Some(&(v, _)) if e >= v => {}
            _ => out.push((e, c)),
        }
    }
    out
}

/// v_{n,r}(x) = r v_n(x) + n.
pub fn partial_weighted(x: &LaurentElement, n: i64, r: &Q) -> Option<Q> {
    partial_valuation(x, n).value.map(|v| r * qi(v) + qi(n))
}

/// w_r(x); `None` for zero. At r = 0 this is the p-adic valuation.
pub fn weighted_valuation(x: &LaurentElement, r: &Q) -> Option<Q> {
    x.term_valuations().into_iter().map(|(e, c)| r * qi(e) + qi(c)).min()
}

/// min over s in [lo, hi] of w_s(x). s -> w_s(x) is concave, so the
/// minimum sits at an endpoint.
pub fn min_weighted_on(x: &LaurentElement, lo: &Q, hi: &Q) -> Option<Q> {
    let a = weighted_valuation(x, lo)?;
    let b = weighted_valuation(x, hi)?;
    Some(a.min(b))
}

/// min over n < 0 of v_{n,s}(x); `None` when x has no digits below p^0.
pub fn min_negative_partial(x: &LaurentElement, s: &Q) -> Option<Q> {
    x.term_valuations().into_iter().filter(|&(_, c)| c < 0).map(|(e, c)| s * qi(e) + qi(c)).min()
}

/// Staircase points attaining w_r, by increasing n.
pub fn minimizers(x: &LaurentElement, r: &Q) -> Vec<(i64, i64)> {
    let st = staircase(x);
    let Some(m) = st.iter().map(|&(v, n)| r * qi(v) + qi(n)).min() else {
        return vec![];
    };
    st.into_iter().filter(|&(v, n)| r * qi(v) + qi(n) == m).collect()
}

pub fn is_integral(x: &LaurentElement) -> bool {
    x.valuation().is_none_or(|v| v >= 0)
}

/// The largest n with v_{n,r}(x) = w_r(x).
pub fn height(x: &LaurentElement, r: &Q) -> Result<i64> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    if *r <= qi(0) {
        return Err(Error::InvalidArgument("height needs a positive radius".into()));
    }
    let h = minimizers(x, r).last().expect("nonzero element has a minimizer").1;
    debug_assert_eq!(
        h,
        x.valuation().unwrap() + newton_polygon(x, &Interval::up_to(*r)).unwrap().total_multiplicity() as i64
    );
    Ok(h)
}

/// Lower hull of the partial-valuation points with segments whose negated
/// slope falls outside `iv` removed.
pub fn newton_polygon(x: &LaurentElement, iv: &Interval) -> Result<NewtonPolygon> {
    if x.is_zero() {
        return Err(Error::ZeroElement);
    }
    let pts: Vec<(i64, Q)> = staircase(x).into_iter().map(|(v, n)| (v, qi(n))).collect();
    let hull = lower_hull(&pts);
    let vert: Vec<(i64, i64)> = hull.iter().rev().map(|(v, n)| (*v, n.to_integer() as i64)).collect();
    // vert runs bottom-right to top-left; segment k joins vert[k] and vert[k + 1].
    let seg = |k: usize| -> (Q, u64) {
        let (a, b) = (vert[k], vert[k + 1]);
        let m = b.1 - a.1;
        (qi(m) / qi(a.0 - b.0), m as u64)
    };
    let mut start = 0;
    while start + 1 < vert.len() && iv.below(&seg(start).0) {
        start += 1;
    }
    let mut end = start;
    let mut slopes = Vec::new();
    while end + 1 < vert.len() && iv.contains(&seg(end).0) {
        slopes.push(seg(end));
        end += 1;
    }
    let prec = x.ctx().prec();
    let mut limited = x.truncated() || vert[start..=end].iter().any(|&(_, n)| n >= prec - 1);
    if let Some(l) = x.lost() {
        // A term (l, N) beyond the working precision could lower the hull somewhere in iv.
        let mut radii = vec![iv.lo, iv.hi];
        radii.extend(slopes.iter().map(|s| s.0));
        limited |= radii.iter().any(|r| r * qi(l) + qi(prec) <= weighted_valuation(x, r).unwrap());
    }
    Ok(NewtonPolygon {
        kind: PolygonKind::Element,
        slopes,
        anchor: vert[start],
        interval: Some(iv.clone()),
        precision_limited: limited,
    })
}

/// No slopes in `iv` and a hull that does not depend on missing digits.
pub fn is_unit(x: &LaurentElement, iv: &Interval) -> bool {
    match newton_polygon(x, iv) {
        Ok(p) => p.is_empty() && !p.precision_limited,
        Err(_) => false,
    }
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
    fn partial_valuations() {
        let x = el(&[(-3, 5), (2, 1)]);
        assert_eq!(partial_valuation(&x, 0).value, Some(2));
        assert_eq!(partial_valuation(&x, 1).value, Some(-3));
        assert_eq!(partial_valuation(&el(&[]), 4).value, None);
        assert!(partial_valuation(&x, 24).precision_limited);
        assert_eq!(weighted_valuation(&x, &qi(1)), Some(qi(-2)));
        assert_eq!(weighted_valuation(&el(&[(5, 1), (0, 5)]), &qi(0)), Some(qi(0)));
    }

    #[test]
    fn staircase_drops() {
        let x = el(&[(0, 25), (3, 5), (4, 1), (7, 1), (-1, 125)]);
        assert_eq!(staircase(&x), vec![(4, 0), (3, 1), (0, 2), (-1, 3)]);
    }

    #[test]
    fn polygons_by_hand() {
        let x = el(&[(5, 1), (0, 5)]);
        let p = newton_polygon(&x, &Interval::up_to(qi(1))).unwrap();
        assert_eq!(p.slopes, vec![(q(1, 5), 1)]);
        assert!(!p.precision_limited);
        let p2 = newton_polygon(&x.square(), &Interval::up_to(qi(1))).unwrap();
        assert_eq!(p2.slopes, vec![(q(1, 5), 2)]);
        assert!(newton_polygon(&el(&[(1, 1)]), &Interval::up_to(qi(1))).unwrap().is_empty());
        assert!(newton_polygon(&el(&[]), &Interval::up_to(qi(1))).is_err());
        // Slope 1/5 lies outside (0, 1/10].
        let p3 = newton_polygon(&x, &Interval::up_to(q(1, 10))).unwrap();
        assert!(p3.is_empty());
        assert_eq!(p3.anchor, (5, 0));
    }

    #[test]
    fn vertices_regenerate() {
        let x = el(&[(12, 1), (4, 5), (0, 125), (-2, 5 * 5 * 5 * 5 * 5)]);
        let p = newton_polygon(&x, &Interval::up_to(qi(1))).unwrap();
        let v = p.vertices();
        assert_eq!(v.first().unwrap(), &(qi(12), qi(0)));
        for (a, b) in v.iter().zip(v.iter().skip(1)) {
            assert!(staircase(&x).contains(&(b.0.to_integer() as i64, b.1.to_integer() as i64)), "{a:?} {b:?}");
        }
    }

    #[test]
    fn units_and_heights() {
        assert!(is_unit(&el(&[(1, 1)]), &Interval::up_to(qi(1))));
        assert!(!is_unit(&el(&[(5, 1), (0, 5)]), &Interval::up_to(qi(1))));
        assert!(is_unit(&el(&[(0, 5), (1, 1)]), &Interval::up_to(q(1, 2))));
        let x = el(&[(5, 1), (0, 5)]);
        assert_eq!(height(&x, &qi(1)).unwrap(), 1);
        assert_eq!(height(&x, &q(1, 10)).unwrap(), 0);
        assert_eq!(height(&el(&[(0, 125)]), &q(1, 3)).unwrap(), 3);
        assert!(height(&el(&[]), &qi(1)).is_err());
    }

    #[test]
    fn ceiling_flag() {
        let ctx = RingContext::default_ctx();
        let x = LaurentElement::from_terms(
            &ctx,
            &[(30, PAdicScalar::from_int(&ctx, 1)), (0, PAdicScalar::p_power(&ctx, 23))],
        );
        assert!(newton_polygon(&x, &Interval::up_to(qi(1))).unwrap().precision_limited);
        assert!(!newton_polygon(&x, &Interval::up_to(q(1, 2))).unwrap().precision_limited);
    }
}
