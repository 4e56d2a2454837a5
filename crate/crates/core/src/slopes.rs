//! Generic and special slope polygons of Frobenius modules.
//!
//! The generic polygon comes from a twisted characteristic polynomial: for a
//! cyclic vector v, F^n v + a_(n-1) F^(n-1) v + ... + a_0 v = 0, and the
//! polygon is the lower hull of (n - i, w(a_i)). Because w is multiplicative
//! on the bounded field, w(a_i) = w(det W_i) - w(det W) by Cramer's rule
//! with W = [v, Fv, ..., F^(n-1) v], so no division is needed. Constant
//! matrices use their exact characteristic polynomial instead.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::context::Ctx;
use crate::division::{FactorizationCertificate, ResidualCheck};
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::inverse::field_inverse;
use crate::matrix::{determinant, minor_precision, rational_pval, Matrix};
use crate::polygon::NewtonPolygon;
use crate::rational::{fmt_q, qi, Q};
use crate::sigma::SigmaModule;

pub const DEFAULT_ATTEMPTS: usize = 64;
const MAX_WORKSPACE: i64 = 1 << 22;

/// Module polygon through (x, w) points with some w only known to be at
/// least a bound. Unknown points that could reach the hull mark the result
/// precision-limited.
fn polygon_with_bounds(n: usize, pts: &[(i64, Option<i64>, i64)]) -> Result<NewtonPolygon> {
    let known: Vec<(i64, Q)> = pts
        .iter()
        .filter_map(|&(x, w, b)| w.filter(|&w| w < b).map(|w| (x, qi(w))))
        .collect();
    if !known.iter().any(|p| p.0 == n as i64) || !known.iter().any(|p| p.0 == 0) {
        return Err(Error::SingularAtPrecision);
    }
    let mut poly = NewtonPolygon::module_from_points(&known);
    poly.precision_limited = pts
        .iter()
        .filter(|&&(_, w, b)| w.is_none_or(|w| w >= b))
        .any(|&(x, _, b)| qi(b) <= poly.value_at(&qi(x)));
    Ok(poly)
}

/// Polygon of the exact characteristic polynomial of a constant matrix.
fn constant_polygon(a: &Matrix) -> Result<NewtonPolygon> {
    let ctx = a.ctx();
    let c = a.rational_char_poly();
    let pts: Vec<(i64, Option<i64>, i64)> = c
        .iter()
        .enumerate()
        .map(|(k, ck)| {
            let bound = if k == 0 { i64::MAX } else { minor_precision(a, k) };
            (k as i64, rational_pval(ck, ctx.p()), bound)
        })
        .collect();
    polygon_with_bounds(a.rows(), &pts)
}

/// Iterates v, Fv, ..., F^n v in a window wide enough that no iterate and
/// no n x n determinant built from them is truncated.
struct Krylov {
    cols: Vec<Vec<LaurentElement>>,
    det_w: LaurentElement,
    /// Valuations of determinants below this are reliable.
    bound: i64,
}

fn workspace(m: &SigmaModule, v: &[LaurentElement]) -> Result<Ctx> {
    let ctx = m.ctx();
    let n = m.rank();
    let (alo, ahi) = m.matrix().span();
    let vlo = v.iter().filter_map(LaurentElement::min_exp).min().unwrap_or(0);
    let vhi = v.iter().filter_map(LaurentElement::max_exp).max().unwrap_or(0);
    let qf = (ctx.q() as i64).checked_pow(m.frob_power());
    let too_wide = || Error::PrecisionExhausted("cyclic vector iterates leave any workable window".into());
    let qf = qf.ok_or_else(too_wide)?;
    let (mut lo, mut hi) = (vlo.min(0), vhi.max(0));
    let (mut sum_lo, mut sum_hi) = (lo, hi);
    for _ in 0..n {
        lo = lo.checked_mul(qf).and_then(|x| x.checked_add(alo.min(0))).ok_or_else(too_wide)?;
        hi = hi.checked_mul(qf).and_then(|x| x.checked_add(ahi.max(0))).ok_or_else(too_wide)?;
        sum_lo = sum_lo.checked_add(lo).ok_or_else(too_wide)?;
        sum_hi = sum_hi.checked_add(hi).ok_or_else(too_wide)?;
    }
    let (w_lo, w_hi) = (sum_lo.min(ctx.lo()), sum_hi.max(ctx.hi()));
    if w_hi - w_lo > MAX_WORKSPACE {
        return Err(too_wide());
    }
    Ok(ctx.with_window(w_lo, w_hi))
}

fn krylov(m: &SigmaModule, v: &[LaurentElement]) -> Result<Krylov> {
    let n = m.rank();
    let wide = workspace(m, v)?;
    let a = m.matrix().rehome(&wide);
    let mut cols = vec![v.iter().map(|x| x.rehome(&wide)).collect::<Vec<_>>()];
    for k in 0..n {
        let fv: Vec<LaurentElement> = cols[k].iter().map(|x| x.frobenius(m.frob_power())).collect();
        cols.push(a.mul_vec(&fv));
    }
    let w: Vec<Vec<LaurentElement>> = (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect();
    let det_w = determinant(&w);
    let prec = wide.prec();
    let bound = prec
        + cols
            .iter()
            .map(|c| c.iter().filter_map(LaurentElement::valuation).min().unwrap_or(0).min(0))
            .sum::<i64>();
    Ok(Krylov { cols, det_w, bound })
}

impl Krylov {
    fn is_cyclic(&self) -> bool {
        self.det_w.valuation().is_some_and(|d| d < self.bound)
    }

    fn n(&self) -> usize {
        self.cols.len() - 1
    }

    /// det of W with column i replaced by F^n v.
    fn cramer_numerator(&self, i: usize) -> LaurentElement {
        let n = self.n();
        let rows: Vec<Vec<LaurentElement>> = (0..n)
            .map(|r| (0..n).map(|j| if j == i { self.cols[n][r].clone() } else { self.cols[j][r].clone() }).collect())
            .collect();
        determinant(&rows)
    }

    /// (n - i, w(a_i), bound) for i = 0..n, with a_n = 1.
    fn coefficient_points(&self) -> Vec<(i64, Option<i64>, i64)> {
        let n = self.n();
        let dw = self.det_w.valuation().expect("cyclic");
        let mut pts: Vec<(i64, Option<i64>, i64)> = (0..n)
            .map(|i| {
                let num = self.cramer_numerator(i).valuation();
                (
                    (n - i) as i64,
                    num.filter(|&w| w < self.bound).map(|w| w - dw),
                    self.bound - dw,
                )
            })
            .collect();
        pts.push((0, Some(0), i64::MAX));
        pts
    }
}

/// Candidate vectors: basis vectors, then e_1 + p^j e_i, then e_1 + u^j e_i,
/// then seeded random small combinations.
fn candidates(ctx: &Ctx, n: usize, max_attempts: usize) -> Vec<Vec<LaurentElement>> {
    let basis = |i: usize| -> Vec<LaurentElement> {
        (0..n).map(|k| if k == i { LaurentElement::one(ctx) } else { LaurentElement::zero(ctx) }).collect()
    };
    let mut out: Vec<Vec<LaurentElement>> = (0..n).map(basis).collect();
    for j in 0..3 {
        for i in 1..n {
            let mut v = basis(0);
            v[i] = LaurentElement::p_power(ctx, j);
            out.push(v);
        }
    }
    for j in 1..3 {
        for i in 1..n {
            let mut v = basis(0);
            v[i] = LaurentElement::u_power(ctx, j);
            out.push(v);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + n as u64);
    while out.len() < max_attempts {
        let v = (0..n)
            .map(|_| {
                let terms: Vec<(i64, i128)> = (0..3).map(|e| (e, rng.gen_range(-2..=2))).collect();
                LaurentElement::from_ints(ctx, &terms)
            })
            .collect();
        out.push(v);
    }
    out.truncate(max_attempts);
    out
}

/// The first candidate v whose iterates v, Fv, ..., F^(n-1) v have a
/// determinant that is nonzero at the working precision.
pub fn cyclic_vector(m: &SigmaModule, max_attempts: usize) -> Result<Vec<LaurentElement>> {
    for v in candidates(m.ctx(), m.rank(), max_attempts) {
        match krylov(m, &v) {
            Ok(k) if k.is_cyclic() => return Ok(v),
            Ok(_) => continue,
            Err(Error::PrecisionExhausted(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::NoCyclicVectorFound(max_attempts))
}

/// x^n + a_(n-1) x^(n-1) + ... + a_0, coefficients low degree first.
#[derive(Clone, Debug)]
pub struct TwistedPoly {
    pub coeffs: Vec<LaurentElement>,
    pub valuations: Vec<Option<i64>>,
    pub cert: FactorizationCertificate,
}

impl TwistedPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }
}

/// Inverse in the bounded field; monomials are inverted exactly.
fn bounded_field_inverse(x: &LaurentElement) -> Result<LaurentElement> {
    if x.len() == 1 {
        let ctx = x.ctx();
        let (e, c) = x.terms()[0];
        let v = c.vexp().expect("nonzero term");
        let k = (ctx.prec() - v).min(ctx.max_k() as i64) as u32;
        let inv = crate::modarith::inv_unit(c.mantissa(), ctx.p(), ctx.pow(k));
        return Ok(LaurentElement::monomial(ctx, -e, crate::scalar::PAdicScalar::new(ctx, -v, inv)));
    }
    field_inverse(x)
}

pub fn twisted_char_poly(m: &SigmaModule, v: &[LaurentElement]) -> Result<TwistedPoly> {
    let k = krylov(m, v)?;
    if !k.is_cyclic() {
        return Err(Error::SingularAtPrecision);
    }
    let n = k.n();
    let inv = bounded_field_inverse(&k.det_w)?;
    let coeffs_wide: Vec<LaurentElement> = (0..n).map(|i| k.cramer_numerator(i).mul(&inv).neg()).collect();
    let valuations = k.coefficient_points().iter().take(n).map(|p| p.1).collect();

    // F^n v + sum a_i F^i v on the part of the workspace untouched by truncation.
    let mut resid = k.cols[n].clone();
    for (i, a) in coeffs_wide.iter().enumerate() {
        for (r, x) in resid.iter_mut().enumerate() {
            *x = x.add(&a.mul(&k.cols[i][r]));
        }
    }
    let (lo, hi) = m.ctx().window();
    let achieved = resid.iter().filter_map(|x| x.restrict(lo, hi).valuation()).min().map(qi);
    let dw = k.det_w.valuation().unwrap();
    let mut cert = FactorizationCertificate::default();
    cert.push(ResidualCheck::new("w(F^n v + sum a_i F^i v)", qi(0), qi(k.bound - dw.max(0)), achieved));
    let coeffs: Vec<LaurentElement> = coeffs_wide.iter().map(|a| a.rehome(m.ctx())).collect();
    cert.truncated = coeffs.iter().any(LaurentElement::truncated);
    Ok(TwistedPoly { coeffs, valuations, cert })
}

#[derive(Clone, Debug)]
pub struct GenericHn {
    pub polygon: NewtonPolygon,
    pub cyclic_vector: Option<Vec<LaurentElement>>,
    pub method: &'static str,
}

pub fn generic_hn(m: &SigmaModule) -> Result<GenericHn> {
    if m.matrix().is_constant() {
        return Ok(GenericHn { polygon: constant_polygon(m.matrix())?, cyclic_vector: None, method: "characteristic polynomial" });
    }
    let v = cyclic_vector(m, DEFAULT_ATTEMPTS)?;
    let polygon = generic_hn_with(m, &v)?;
    Ok(GenericHn { polygon, cyclic_vector: Some(v), method: "cyclic vector" })
}

/// The generic polygon computed from a given cyclic vector.
pub fn generic_hn_with(m: &SigmaModule, v: &[LaurentElement]) -> Result<NewtonPolygon> {
    let k = krylov(m, v)?;
    if !k.is_cyclic() {
        return Err(Error::SingularAtPrecision);
    }
    polygon_with_bounds(m.rank(), &k.coefficient_points())
}

pub fn generic_hn_polygon(m: &SigmaModule) -> Result<NewtonPolygon> {
    generic_hn(m).map(|g| g.polygon)
}

/// Polygon of the constant module A(0), for matrices with no negative powers of u.
pub fn special_hn_polygon_dwork(m: &SigmaModule) -> Result<NewtonPolygon> {
    if !m.matrix().has_nonnegative_support() {
        return Err(Error::NegativeSupport);
    }
    let a0 = m.matrix().at_zero();
    if a0.det().is_zero() {
        return Err(Error::SingularSpecialization);
    }
    constant_polygon(&a0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    SpecialAbove,
    Violation,
    NotComputed,
}

impl Comparison {
    pub fn as_str(&self) -> &'static str {
        match self {
            Comparison::Equal => "equal",
            Comparison::SpecialAbove => "special_above",
            Comparison::Violation => "violation",
            Comparison::NotComputed => "not_computed",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SlopeReport {
    pub generic: NewtonPolygon,
    pub special: Option<NewtonPolygon>,
    pub comparison: Comparison,
    pub certificates: Vec<FactorizationCertificate>,
    pub cyclic_vector_used: Option<Vec<LaurentElement>>,
    pub note: Option<String>,
}

impl SlopeReport {
    pub fn to_json(&self) -> Value {
        let (ex, ey) = self.generic.endpoint();
        json!({
            "generic": self.generic.to_json(),
            "generic_slopes": self.generic.slope_list().iter().map(fmt_q).collect::<Vec<_>>(),
            "special": self.special.as_ref().map(NewtonPolygon::to_json),
            "special_slopes": self.special.as_ref().map(|p| p.slope_list().iter().map(fmt_q).collect::<Vec<_>>()),
            "comparison": self.comparison.as_str(),
            "endpoint": [fmt_q(&ex), fmt_q(&ey)],
            "certificates": self.certificates.iter().map(FactorizationCertificate::to_json).collect::<Vec<_>>(),
            "cyclic_vector_used": self.cyclic_vector_used.as_ref().map(|v| v.iter().map(crate::json::element_to_json).collect::<Vec<_>>()),
            "note": self.note,
        })
    }
}

pub fn compare_polygons(m: &SigmaModule) -> Result<SlopeReport> {
    let g = generic_hn(m)?;
    let (special, note) = match special_hn_polygon_dwork(m) {
        Ok(s) => (Some(s), None),
        Err(e @ (Error::NegativeSupport | Error::SingularSpecialization)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let (comparison, note) = match &special {
        None => (Comparison::NotComputed, note),
        Some(s) if s.endpoint() != g.polygon.endpoint() => {
            (Comparison::NotComputed, Some("generic and special endpoints differ".to_string()))
        }
        Some(s) if s.slopes == g.polygon.slopes => (Comparison::Equal, None),
        Some(s) => {
            let v = s.lies_above(&g.polygon);
            if v.holds {
                (Comparison::SpecialAbove, None)
            } else {
                (Comparison::Violation, v.reason.map(|r| r.describe()))
            }
        }
    };
    Ok(SlopeReport {
        generic: g.polygon,
        special,
        comparison,
        certificates: vec![],
        cyclic_vector_used: g.cyclic_vector,
        note,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeVerdict {
    pub min_slope: Q,
    pub all_zero: bool,
    pub det_is_unit: bool,
    pub holds: bool,
}

/// For an integral matrix: every generic slope is nonnegative, and all of
/// them vanish exactly when det A has valuation zero.
pub fn lattice_slope_check(m: &SigmaModule) -> Result<LatticeVerdict> {
    if !m.matrix().is_integral() {
        return Err(Error::NonIntegralMatrix);
    }
    let poly = generic_hn_polygon(m)?;
    let slopes = poly.slope_list();
    let min_slope = slopes.iter().copied().min().unwrap_or(qi(0));
    let all_zero = slopes.iter().all(|s| *s == qi(0));
    let det_is_unit = m.degree() == 0;
    Ok(LatticeVerdict { min_slope, all_zero, det_is_unit, holds: min_slope >= qi(0) && all_zero == det_is_unit })
}
