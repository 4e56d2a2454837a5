//! Changes of basis B = U^{-1} A sigma(U) that bring A D^{-1} - I into a
//! prescribed shape, for D a diagonal matrix of powers of p.

use crate::context::Ctx;
use crate::division::{FactorizationCertificate, ResidualCheck};
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rational::{qi, Q};

pub const MAX_PASSES: usize = 64;
const NEUMANN_DOUBLINGS: usize = 64;

#[derive(Clone, Debug)]
pub struct NormalForm {
    pub u: Matrix,
    pub b: Matrix,
    pub cert: FactorizationCertificate,
}

/// The exponents k_i of D = diag(p^k_i), rejecting anything else.
pub fn p_power_diagonal(d: &Matrix) -> Result<Vec<i64>> {
    let bad = |m: String| Error::InvalidArgument(format!("D must be a diagonal matrix of powers of p: {m}"));
    if !d.is_square() {
        return Err(bad("not square".into()));
    }
    let mut ks = Vec::with_capacity(d.rows());
    for i in 0..d.rows() {
        for j in 0..d.cols() {
            let x = d.get(i, j);
            if i != j {
                if !x.is_zero() {
                    return Err(bad(format!("entry ({i}, {j}) is off the diagonal")));
                }
                continue;
            }
            let terms = x.terms();
            match terms.as_slice() {
                [(0, c)] if c.mantissa() == 1 => ks.push(c.vexp().unwrap()),
                _ => return Err(bad(format!("entry ({i}, {i}) is not a power of p"))),
            }
        }
    }
    Ok(ks)
}

fn diag_p(ctx: &Ctx, ks: &[i64]) -> Matrix {
    let d: Vec<LaurentElement> = ks.iter().map(|&k| LaurentElement::p_power(ctx, k)).collect();
    Matrix::diagonal(ctx, &d)
}

/// Exponent range of a product of the given factors that window truncation
/// cannot have touched. Only factors that actually lost terms shrink it.
fn reliable_range(ctx: &Ctx, factors: &[&Matrix]) -> (i64, i64) {
    let (lo, hi) = ctx.window();
    let lost_lo = factors.iter().any(|m| m.entries().any(LaurentElement::truncated_lo));
    let lost_hi = factors.iter().any(|m| m.entries().any(LaurentElement::truncated_hi));
    let up: i64 = factors.iter().map(|m| m.span().1.max(0)).sum();
    let down: i64 = factors.iter().map(|m| m.span().0.min(0)).sum();
    (if lost_lo { lo + up } else { lo }, if lost_hi { hi + down } else { hi })
}

fn restrict_to(m: &Matrix, range: (i64, i64)) -> Matrix {
    m.restrict(range.0, range.1)
}

/// (I + X)^{-1} A sigma(I + X) and U (I + X).
fn conjugate(a: &Matrix, u: &Matrix, x: &Matrix) -> Result<(Matrix, Matrix)> {
    let id = Matrix::identity(a.ctx(), a.rows());
    let inv = Matrix::neumann_inverse(x, NEUMANN_DOUBLINGS)?;
    let step = id.add(x);
    Ok((inv.mul(a).mul(&step.frobenius(1)), u.mul(&step)))
}

/// Solves x - p^-n sigma(x) = c termwise. Terms u^e with e > 0 use the
/// series sum_m p^(-n m) sigma^m(c u^e), which leaves the window after
/// finitely many steps; constant terms need n >= 1. Other terms would need
/// an inverse Frobenius, which the bounded rings here do not have.
fn solve_twisted(c: &LaurentElement, n: i64) -> Result<LaurentElement> {
    let ctx = c.ctx();
    let hi = ctx.hi();
    let mut x = LaurentElement::zero(ctx);
    let mut cut = false;
    for (e, coef) in c.terms() {
        let t = LaurentElement::monomial(ctx, e, coef);
        if e > 0 {
            let (mut m, mut ex) = (0i64, e);
            while ex <= hi {
                x = x.add(&LaurentElement::monomial(ctx, ex, coef).mul_p_pow(-n * m));
                m += 1;
                ex = match ex.checked_mul(ctx.q() as i64) {
                    Some(v) => v,
                    None => break,
                };
            }
            cut = true;
        } else if e == 0 && n >= 1 {
            // x = c / (1 - p^-n) = -c p^n / (1 - p^n)
            let mut geo = LaurentElement::zero(ctx);
            let mut k = 1;
            while n * k < ctx.prec() + n {
                geo = geo.add(&LaurentElement::p_power(ctx, n * k));
                k += 1;
            }
            x = x.sub(&t.mul(&geo));
        } else {
            return Err(Error::HypothesisFailed(format!(
                "term u^{e} at valuation gap {n} cannot be removed without an inverse Frobenius"
            )));
        }
    }
    Ok(if cut { x.with_flags(false, true) } else { x })
}

fn check_radius(ctx: &Ctx, r: &Q) -> Result<()> {
    if *r <= qi(0) || *r >= ctx.r0() {
        return Err(Error::InvalidArgument("radius must lie in (0, r0)".into()));
    }
    Ok(())
}

/// Brings A D^{-1} - I to strictly upper triangular form. Each pass writes
/// A_l D^{-1} - I = C_l + B_l with C_l the lower part including the
/// diagonal, solves the linearized equation for X with the shape of C_l and
/// conjugates by I + X. The gains w_r(C_l) must increase strictly.
pub fn triangularize(a: &Matrix, d: &Matrix, r: &Q, target: i64) -> Result<NormalForm> {
    let ctx = a.ctx().clone();
    check_radius(&ctx, r)?;
    let ks = p_power_diagonal(d)?;
    if a.rows() != ks.len() || !a.is_square() {
        return Err(Error::InvalidArgument("A and D must be square of the same size".into()));
    }
    if let Some(i) = (1..ks.len()).find(|&i| ks[i - 1] < ks[i]) {
        return Err(Error::HypothesisFailed(format!(
            "w(D_{i}{i}) = {} is below w(D_{j}{j}) = {}; the diagonal of D must have descending valuations",
            ks[i - 1],
            ks[i],
            i = i,
            j = i + 1
        )));
    }
    let n = ks.len();
    let id = Matrix::identity(&ctx, n);
    let d_inv = diag_p(&ctx, &ks.iter().map(|k| -k).collect::<Vec<_>>());
    let e0 = a.mul(&d_inv).sub(&id);
    if e0.valuation().is_some_and(|w| w <= 0) {
        return Err(Error::HypothesisFailed(format!("w(A D^-1 - I) = {} is not positive", e0.valuation().unwrap())));
    }
    if let Some(w) = e0.weighted_valuation(r).filter(|w| *w <= qi(0)) {
        return Err(Error::HypothesisFailed(format!("w_r(A D^-1 - I) = {w} is not positive at r = {r}")));
    }

    let tq = qi(target);
    let mut al = a.clone();
    let mut u = id.clone();
    let mut cert = FactorizationCertificate::default();
    let mut done = false;
    for l in 0..=MAX_PASSES {
        cert.iterations_used = l;
        let range = reliable_range(&ctx, &[&u, &al]);
        let (c, _) = restrict_to(&al.mul(&d_inv).sub(&id), range).split_lower();
        let (cw, cwr) = (c.valuation().map(qi), c.weighted_valuation(r));
        if cw.is_none_or(|w| w >= tq) && cwr.is_none_or(|w| w >= tq) {
            done = true;
            break;
        }
        let gain = cwr.unwrap_or(tq);
        if cert.gains.last().is_some_and(|g| *g >= gain) {
            return Err(Error::PrecisionExhausted(format!("residual gain stalled at w_r = {gain} on pass {l}")));
        }
        cert.gains.push(gain);
        if l == MAX_PASSES {
            break;
        }
        let mut x = Matrix::zeros(&ctx, n, n);
        for i in 0..n {
            for j in 0..=i {
                x.set(i, j, solve_twisted(c.get(i, j), ks[j] - ks[i])?);
            }
        }
        (al, u) = conjugate(&al, &u, &x)?;
    }
    if !done {
        return Err(Error::PrecisionExhausted(format!("lower part still above target after {MAX_PASSES} passes")));
    }

    let range = reliable_range(&ctx, &[&u, &al, a]);
    let (c, _) = restrict_to(&al.mul(&d_inv).sub(&id), range).split_lower();
    cert.push(ResidualCheck::new("w(lower part of B D^-1 - I)", qi(0), tq, c.valuation().map(qi)));
    cert.push(ResidualCheck::new("w_r(lower part of B D^-1 - I)", *r, tq, c.weighted_valuation(r)));
    let recon = restrict_to(&u.mul(&al).sub(&a.mul(&u.frobenius(1))), range);
    // U picks up negative p-powers on high u-powers, where absolute precision N
    // leaves only N + w(U) digits, so the identity is certified at radius r.
    cert.push(ResidualCheck::new("w_r(U B - A sigma(U))", *r, tq, recon.weighted_valuation(r)));

    let du = restrict_to(&u.sub(&id), range);
    let dsu = restrict_to(&diag_p(&ctx, &ks).mul(&u.frobenius(1)).mul(&d_inv).sub(&id), range);
    cert.diagnostics.push(ResidualCheck::new("w(U B - A sigma(U))", qi(0), tq, recon.valuation().map(qi)));
    cert.diagnostics.push(ResidualCheck::new("w(U - I)", qi(0), qi(0), du.valuation().map(qi)));
    cert.diagnostics.push(ResidualCheck::new("w_r(U - I)", *r, qi(0), du.weighted_valuation(r)));
    cert.diagnostics.push(ResidualCheck::new("w(D sigma(U) D^-1 - I)", qi(0), qi(0), dsu.valuation().map(qi)));
    cert.diagnostics.push(ResidualCheck::new("w_r(D sigma(U) D^-1 - I)", *r, qi(0), dsu.weighted_valuation(r)));
    cert.truncated = u.truncated() || al.truncated();
    if !cert.all_hold() {
        return Err(Error::PrecisionExhausted("triangularization certificate fails".into()));
    }
    Ok(NormalForm { u, b: al, cert })
}

/// Clears the digits at p-powers <= 0 of A D^{-1} - I. Each pass takes X as
/// those digits and conjugates by I + X; the result has B D^{-1} - I with
/// entries divisible by p and positive w_r. Needs r0 > q r and
/// w_r(A D^{-1} - I) > h / (q - 1), where h is the spread of valuations on
/// the diagonal of D.
pub fn good_model_turnover(a: &Matrix, d: &Matrix, r: &Q, target: i64) -> Result<NormalForm> {
    let ctx = a.ctx().clone();
    check_radius(&ctx, r)?;
    let qf = qi(ctx.q() as i64);
    if ctx.r0() <= qf * r {
        return Err(Error::HypothesisFailed(format!("r0 = {} must exceed q r = {}", ctx.r0(), qf * r)));
    }
    let ks = p_power_diagonal(d)?;
    if a.rows() != ks.len() || !a.is_square() {
        return Err(Error::InvalidArgument("A and D must be square of the same size".into()));
    }
    let n = ks.len();
    let h = ks.iter().max().unwrap() - ks.iter().min().unwrap();
    let thr = qi(h) / (qf - qi(1));
    let id = Matrix::identity(&ctx, n);
    let d_inv = diag_p(&ctx, &ks.iter().map(|k| -k).collect::<Vec<_>>());
    if let Some(w) = a.mul(&d_inv).sub(&id).weighted_valuation(r).filter(|w| *w <= thr) {
        return Err(Error::HypothesisFailed(format!("w_r(A D^-1 - I) = {w} does not exceed h/(q-1) = {thr}")));
    }

    let mut al = a.clone();
    let mut u = id.clone();
    let mut cert = FactorizationCertificate::default();
    let mut done = false;
    for l in 0..=MAX_PASSES {
        cert.iterations_used = l;
        let range = reliable_range(&ctx, &[&u, &al]);
        let e = restrict_to(&al.mul(&d_inv).sub(&id), range);
        let x = e.map(|v| v.digit_range(i64::MIN, 0));
        if x.is_zero() {
            done = true;
            break;
        }
        if l == MAX_PASSES {
            break;
        }
        cert.gains.push(x.weighted_valuation(r).unwrap() - thr);
        (al, u) = conjugate(&al, &u, &x)?;
    }
    if !done {
        return Err(Error::PrecisionExhausted(format!("digits at p-powers <= 0 persist after {MAX_PASSES} passes")));
    }

    let range = reliable_range(&ctx, &[&u, &al, a]);
    let f = restrict_to(&al.mul(&d_inv).sub(&id), range);
    cert.push(ResidualCheck::new("w(B D^-1 - I)", qi(0), qi(1), f.valuation().map(qi)));
    cert.push(ResidualCheck::new_strict("w_r(B D^-1 - I)", *r, qi(0), f.weighted_valuation(r)));
    let leftover = f.map(|v| v.digit_range(i64::MIN, 0));
    cert.push(ResidualCheck::new("w_r(digits <= 0 of B D^-1 - I)", *r, qi(target), leftover.weighted_valuation(r)));
    let recon = restrict_to(&u.mul(&al).sub(&a.mul(&u.frobenius(1))), range);
    cert.push(ResidualCheck::new("w(U B - A sigma(U))", qi(0), qi(target), recon.valuation().map(qi)));
    let du = restrict_to(&u.sub(&id), range);
    let qr = qf * r;
    cert.diagnostics.push(ResidualCheck::new("w_r(U - I)", *r, qi(0), du.weighted_valuation(r)));
    cert.diagnostics.push(ResidualCheck::new("w_qr(U - I)", qr, qi(0), du.weighted_valuation(&qr)));
    cert.truncated = u.truncated() || al.truncated();
    if !cert.all_hold() {
        return Err(Error::PrecisionExhausted("good model certificate fails".into()));
    }
    Ok(NormalForm { u, b: al, cert })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;
    use crate::rational::q;

    fn ctx() -> Ctx {
        RingContext::default_ctx()
    }

    fn m(rows: &[Vec<Vec<(i64, i128)>>]) -> Matrix {
        Matrix::from_int_rows(&ctx(), rows)
    }

    fn d51() -> Matrix {
        m(&[vec![vec![(0, 5)], vec![]], vec![vec![], vec![(0, 1)]]])
    }

    #[test]
    fn d_itself_needs_nothing() {
        let t = triangularize(&d51(), &d51(), &q(1, 2), 12).unwrap();
        assert!(t.u.is_identity());
        assert_eq!(t.b, d51());
        let g = good_model_turnover(&d51(), &d51(), &q(1, 6), 12).unwrap();
        assert!(g.u.is_identity());
    }

    #[test]
    fn upper_triangular_input_is_kept() {
        let a = m(&[vec![vec![(0, 5)], vec![(1, 5)]], vec![vec![], vec![(0, 1)]]]);
        let t = triangularize(&a, &d51(), &q(1, 2), 12).unwrap();
        assert!(t.u.is_identity());
        assert_eq!(t.cert.iterations_used, 0);
    }

    #[test]
    fn lower_entry_is_cleared() {
        // A D^-1 - I has p u in the lower-left corner and p u^2 on the diagonal.
        let a = m(&[vec![vec![(0, 5), (2, 25)], vec![]], vec![vec![(1, 25)], vec![(0, 1)]]]);
        let t = triangularize(&a, &d51(), &q(1, 2), 12).unwrap();
        assert!(t.cert.all_hold(), "{:?}", t.cert);
        assert!(t.cert.gains.windows(2).all(|w| w[0] < w[1]));
        assert!(!t.u.is_identity());
    }

    #[test]
    fn hypotheses_are_checked() {
        let a = m(&[vec![vec![(0, 5)], vec![]], vec![vec![(1, 5)], vec![(0, 1)]]]);
        assert!(matches!(triangularize(&a, &d51(), &q(1, 2), 12), Err(Error::HypothesisFailed(_))));
        let up = m(&[vec![vec![(0, 1)], vec![]], vec![vec![], vec![(0, 5)]]]);
        assert!(matches!(triangularize(&up, &up, &q(1, 2), 12), Err(Error::HypothesisFailed(_))));
        assert!(matches!(good_model_turnover(&d51(), &d51(), &q(1, 2), 12), Err(Error::HypothesisFailed(_))));
    }

    #[test]
    fn nonpositive_digits_are_turned_over() {
        let id = Matrix::identity(&ctx(), 2);
        let a = m(&[vec![vec![(0, 1), (3, 1)], vec![(2, 2)]], vec![vec![(1, 1)], vec![(0, 1), (1, 3)]]]);
        let g = good_model_turnover(&a, &id, &q(1, 6), 12).unwrap();
        assert!(g.cert.all_hold(), "{:?}", g.cert);
        assert!(!g.u.is_identity());
    }
}
