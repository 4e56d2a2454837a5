//! M = U V with U over the smaller radii and V over the larger ones, and
//! approximate right inverses with finitely many negative p-power digits.

use crate::division::{FactorizationCertificate, ResidualCheck};
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::inverse::{invert_on, invert_unit};
use crate::matrix::{distance_from_identity, sample_radii, Matrix};
use crate::polygon::Interval;
use crate::rational::{qi, Q};
use crate::valuation;

pub const MAX_PASSES: usize = 64;
const MAX_DOUBLINGS: usize = 64;

/// Restriction to the exponents where a product of factors with the given
/// spans is unaffected by their truncation at the window edges.
pub fn product_interior(m: &Matrix, spans: &[(i64, i64)]) -> Matrix {
    let (lo, hi) = m.ctx().window();
    let up: i64 = spans.iter().map(|s| s.1.max(0)).sum();
    let down: i64 = spans.iter().map(|s| s.0.min(0)).sum();
    m.restrict(lo + up, hi + down)
}

#[derive(Clone, Debug)]
pub struct MatrixFactor {
    pub u: Matrix,
    pub v: Matrix,
    pub cert: FactorizationCertificate,
}

/// Splits M - I at each pass into its positive p-power digits Y (kept on the
/// small-radius side) and the rest Z, then updates U <- U (I + Y),
/// V <- (I + Z) V and M <- (I + Y)^{-1} M (I + Z)^{-1}. The defect squares
/// at every pass on the overlap [c, b].
pub fn matrix_factor(m: &Matrix, i: &Interval, j: &Interval, target: i64) -> Result<MatrixFactor> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix_factor needs a square matrix".into()));
    }
    let ctx = m.ctx();
    let (a, b, c, d) = (i.lo, i.hi, j.lo, j.hi);
    if !(qi(0) <= a && a <= c && c <= b && b <= d && d < ctx.r0()) {
        return Err(Error::InvalidArgument("intervals must satisfy 0 <= a <= c <= b <= d < r0".into()));
    }
    let overlap = sample_radii(&c, &b);
    let e0: Vec<Option<Q>> = overlap.iter().map(|s| distance_from_identity(m, s)).collect();
    if e0.iter().any(|w| w.is_some_and(|w| w <= qi(0))) {
        return Err(Error::BadOverlap("w_s(M - I) > 0 fails on the overlap".into()));
    }
    let n = m.rows();
    let id = Matrix::identity(ctx, n);
    let mut u = id.clone();
    let mut v = id.clone();
    let mut ml = m.clone();
    let mut cert = FactorizationCertificate::default();
    let mut done = false;
    for l in 0..=MAX_PASSES {
        cert.iterations_used = l;
        let e = ml.sub(&id);
        let w = overlap.iter().filter_map(|s| e.weighted_valuation(s)).min();
        match w {
            None => {
                done = true;
                break;
            }
            Some(w) if w >= qi(target) => {
                done = true;
                break;
            }
            Some(w) => cert.gains.push(w),
        }
        if l == MAX_PASSES {
            break;
        }
        let y = e.map(|x| x.digit_range(1, i64::MAX));
        let z = e.sub(&y);
        u = u.mul(&id.add(&y));
        v = id.add(&z).mul(&v);
        let yi = Matrix::neumann_inverse(&y, MAX_DOUBLINGS)?;
        let zi = Matrix::neumann_inverse(&z, MAX_DOUBLINGS)?;
        ml = yi.mul(&ml).mul(&zi);
    }
    if !done {
        return Err(Error::PrecisionExhausted(format!("factorization defect did not reach {target} in {MAX_PASSES} passes")));
    }

    let resid = product_interior(&m.sub(&u.mul(&v)), &[u.span(), v.span()]);
    for s in &overlap {
        cert.push(ResidualCheck::new("w_s(M - U V)", *s, qi(target), resid.weighted_valuation(s)));
    }
    let du = u.sub(&id);
    let dv = v.sub(&id);
    let wc = distance_from_identity(m, &c);
    let wb = distance_from_identity(m, &b);
    if let Some(wc) = wc {
        for s in [a, c] {
            if c > qi(0) {
                cert.push(ResidualCheck::new("w_s(U - I) - (s/c) w_c(M - I)", s, qi(0), du.weighted_valuation(&s).map(|x| x - s / c * wc)));
            }
        }
    }
    if let Some(wb) = wb {
        for s in [b, d] {
            cert.push(ResidualCheck::new("w_s(V - I) - (s/b) w_b(M - I)", s, qi(0), dv.weighted_valuation(&s).map(|x| x - s / b * wb)));
        }
    }
    for (s, w0) in overlap.iter().zip(&e0) {
        if let Some(w0) = w0 {
            let wu = du.weighted_valuation(s);
            let wv = dv.weighted_valuation(s);
            let least = match (wu, wv) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, y) => x.or(y),
            };
            cert.push(ResidualCheck::new("min(w_s(U - I), w_s(V - I)) - w_s(M - I)", *s, qi(0), least.map(|x| x - w0)));
        }
    }
    cert.truncated = u.truncated() || v.truncated();
    if !valuation::is_unit(&u.det().clear_flags(), i) || !valuation::is_unit(&v.det().clear_flags(), j) {
        return Err(Error::PrecisionExhausted("factor determinants are not certified units".into()));
    }
    if !cert.all_hold() {
        return Err(Error::PrecisionExhausted("matrix factorization certificate fails".into()));
    }
    Ok(MatrixFactor { u, v, cert })
}

#[derive(Clone, Debug)]
pub struct Approximation {
    pub u: Matrix,
    pub cert: FactorizationCertificate,
}

/// U with w_s(M U - I) > 0 at the ends and middle of `iv`, built from the
/// adjugate inverse of M with digits below p^-K dropped for the least K
/// that keeps the bound.
pub fn matrix_approximate(m: &Matrix, iv: &Interval, r: &Q, unimodular: bool) -> Result<Approximation> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("matrix_approximate needs a square matrix".into()));
    }
    let ctx = m.ctx();
    if iv.lo < qi(0) || iv.hi > *r || *r >= ctx.r0() || iv.lo > iv.hi {
        return Err(Error::InvalidArgument("needs I within [0, r] and r < r0".into()));
    }
    let closed = Interval::closed(iv.lo, iv.hi);
    let radii = sample_radii(&iv.lo, &iv.hi);
    let id = Matrix::identity(ctx, m.rows());
    let det = m.det();
    if det.is_zero() {
        return Err(Error::SingularAtPrecision);
    }
    if unimodular && radii.iter().any(|s| valuation::weighted_valuation(&det.sub(&LaurentElement::one(ctx)), s).is_none_or(|w| w <= qi(0))) {
        return Err(Error::HypothesisFailed("w_s(det M - 1) > 0 fails on I".into()));
    }
    let det_inv = match invert_on(&det, &closed) {
        Ok(x) => x,
        Err(Error::NotAUnit) => return Err(Error::SingularAtPrecision),
        Err(e) => return Err(e),
    };
    let full = m.inverse_with(&det_inv);
    let good = |u: &Matrix| {
        let resid = product_interior(&m.mul(u).sub(&id), &[m.span(), u.span()]);
        radii.iter().all(|s| resid.weighted_valuation(s).is_none_or(|w| w > qi(0)))
    };
    let deepest = full.valuation().unwrap_or(0).min(0);
    let mut u = None;
    for k in 0..=-deepest {
        let cand = full.map(|x| x.digit_range(-k, i64::MAX));
        if good(&cand) {
            u = Some(cand);
            break;
        }
    }
    let Some(mut u) = u else {
        return Err(Error::PrecisionExhausted("no digit cutoff of the inverse meets the bound".into()));
    };
    if unimodular {
        let du = u.det();
        let fix = invert_unit(&du, r).map_err(|_| Error::PrecisionExhausted("det U is not a unit on (0, r]".into()))?;
        for i in 0..u.rows() {
            let x = u.get(i, 0).mul(&fix);
            u.set(i, 0, x);
        }
    }
    let mut cert = FactorizationCertificate::default();
    let resid = product_interior(&m.mul(&u).sub(&id), &[m.span(), u.span()]);
    for s in &radii {
        let w = resid.weighted_valuation(s);
        cert.push(ResidualCheck::new_strict("w_s(M U - I)", *s, qi(0), w));
        if w.is_some_and(|w| w <= qi(0)) {
            return Err(Error::PrecisionExhausted("approximate inverse fails w_s(M U - I) > 0".into()));
        }
    }
    if unimodular {
        let d = product_interior(&Matrix::diagonal(ctx, &[u.det().sub(&LaurentElement::one(ctx))]), &[u.span()]);
        cert.push(ResidualCheck::new("w(det U - 1)", qi(0), qi(ctx.prec() + u.valuation().unwrap_or(0).min(0)), d.valuation().map(qi)));
    }
    cert.truncated = u.truncated();
    if !cert.all_hold() {
        return Err(Error::PrecisionExhausted("approximation certificate fails".into()));
    }
    Ok(Approximation { u, cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::{Ctx, RingContext};
    use crate::rational::q;

    fn ctx() -> Ctx {
        RingContext::default_ctx()
    }

    #[test]
    fn identity_factors_trivially() {
        let id = Matrix::identity(&ctx(), 2);
        let f = matrix_factor(&id, &Interval::closed(q(1, 8), q(1, 2)), &Interval::closed(q(1, 4), q(3, 4)), 16).unwrap();
        assert!(f.u.is_identity() && f.v.is_identity());
        let a = matrix_approximate(&id, &Interval::closed(q(1, 4), q(1, 2)), &q(1, 2), false).unwrap();
        assert!(a.u.is_identity());
    }

    #[test]
    fn unipotent_with_a_p_entry() {
        let m = Matrix::from_int_rows(&ctx(), &[vec![vec![(0, 1)], vec![(0, 5)]], vec![vec![], vec![(0, 1)]]]);
        let f = matrix_factor(&m, &Interval::closed(q(1, 8), q(1, 2)), &Interval::closed(q(1, 4), q(3, 4)), 16).unwrap();
        assert_eq!(f.u.mul(&f.v), m);
        assert!(f.cert.iterations_used <= 4);
    }

    #[test]
    fn mixed_digits_split_across_radii() {
        let c = ctx();
        let mut m = Matrix::identity(&c, 2);
        let x = LaurentElement::from_ints(&c, &[(-1, 25)]).add(&LaurentElement::from_ints(&c, &[(8, 1)]).mul_p_pow(-1));
        m.set(0, 1, x);
        m.set(1, 0, LaurentElement::from_ints(&c, &[(3, 5)]));
        let f = matrix_factor(&m, &Interval::closed(q(1, 8), q(1, 2)), &Interval::closed(q(1, 4), q(3, 4)), 16).unwrap();
        assert!(f.cert.all_hold(), "{:?}", f.cert);
    }

    #[test]
    fn bad_overlap_is_reported() {
        let c = ctx();
        let m = Matrix::diagonal(&c, &[LaurentElement::from_int(&c, 2), LaurentElement::one(&c)]);
        let r = matrix_factor(&m, &Interval::closed(q(1, 8), q(1, 2)), &Interval::closed(q(1, 4), q(3, 4)), 16);
        assert!(matches!(r, Err(Error::BadOverlap(_))));
    }

    #[test]
    fn diagonal_p_powers() {
        let c = ctx();
        let small = Matrix::from_int_rows(&c, &[vec![vec![(0, 1)], vec![(2, 5)]], vec![vec![(1, 5)], vec![(0, 1)]]]);
        let d = Matrix::diagonal(&c, &[LaurentElement::p_power(&c, 1), LaurentElement::p_power(&c, -1)]);
        let m = d.mul(&small);
        let a = matrix_approximate(&m, &Interval::closed(q(1, 4), q(1, 2)), &q(1, 2), false).unwrap();
        assert!(a.cert.all_hold());
        assert_eq!(a.u.get(0, 0).valuation(), Some(-1));
        let one = Matrix::from_int_rows(&c, &[vec![vec![(0, 3), (1, 1)]]]);
        let a1 = matrix_approximate(&one, &Interval::closed(q(1, 4), q(1, 2)), &q(1, 2), false).unwrap();
        assert!(a1.cert.all_hold());
    }

    #[test]
    fn unimodular_correction() {
        let c = ctx();
        let m = Matrix::from_int_rows(&c, &[vec![vec![(0, 1), (1, 5)], vec![(2, 1)]], vec![vec![], vec![(0, 1)]]]);
        let a = matrix_approximate(&m, &Interval::closed(q(1, 4), q(1, 2)), &q(1, 2), true).unwrap();
        assert!(a.cert.all_hold());
        let singular = Matrix::zeros(&c, 2, 2);
        assert_eq!(matrix_approximate(&singular, &Interval::closed(q(1, 4), q(1, 2)), &q(1, 2), false).unwrap_err(), Error::SingularAtPrecision);
    }
}
