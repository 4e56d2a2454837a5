//! Finite Laurent polynomials in u over p-adic coefficients known modulo p^N.
//!
//! An element is stored as p^val * sum a_i u^i with residues a_i modulo
//! p^(N - val), at least one of them prime to p, so `val` is the p-adic
//! valuation w of the element. Exponents outside the context window are
//! dropped with sticky truncation flags. `lost` records the smallest exponent
//! at which some nonzero contribution was reduced away modulo p^N; the
//! polygon code uses it to decide whether a hull could depend on digits
//! beyond the working precision.

use std::fmt;
use std::sync::Arc;

use crate::context::{Ctx, RingContext};
use crate::error::{Error, Result};
use crate::modarith::{self, addmod, mulmod, negmod};
use crate::scalar::PAdicScalar;

#[derive(Clone, Debug)]
pub struct LaurentElement {
    ctx: Ctx,
    val: i64,
    terms: Vec<(i64, u128)>,
    trunc_lo: bool,
    trunc_hi: bool,
    lost: Option<i64>,
}

fn min_opt(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// Modulus exponent for residues at base valuation `base`; `None` when the
/// whole element would vanish at precision.
fn modulus_exp(ctx: &RingContext, base: i64) -> Option<(u32, bool)> {
    let k = ctx.prec() - base;
    if k <= 0 {
        None
    } else if k > ctx.max_k() as i64 {
        Some((ctx.max_k(), true))
    } else {
        Some((k as u32, false))
    }
}

/// Re-reads a residue modulo p^from as one modulo p^to. Growing moduli
/// sign-extend the balanced representative, so small exact values such as
/// -1 stay exact when a product needs more digits than an operand carries.
fn lift(ctx: &RingContext, a: u128, from: u32, to: u32) -> u128 {
    let mt = ctx.pow(to);
    if to <= from {
        return a % mt;
    }
    let mf = ctx.pow(from);
    if a > mf / 2 {
        mt - (mf - a)
    } else {
        a
    }
}

impl LaurentElement {
    /// Canonicalizes residues given at base valuation `base`. `raw` must be
    /// sorted by exponent with distinct exponents and residues below p^k(base).
    fn build(
        ctx: &Ctx,
        base: i64,
        raw: Vec<(i64, u128)>,
        flags: (bool, bool),
        mut lost: Option<i64>,
    ) -> LaurentElement {
        let (mut tl, mut th) = flags;
        let (lo, hi) = ctx.window();
        let mut terms = Vec::with_capacity(raw.len());
        for (e, a) in raw {
            if a == 0 {
                continue;
            }
            if e < lo {
                tl = true;
                continue;
            }
            if e > hi {
                th = true;
                continue;
            }
            terms.push((e, a));
        }
        if terms.is_empty() {
            return LaurentElement { ctx: ctx.clone(), val: 0, terms, trunc_lo: tl, trunc_hi: th, lost };
        }
        let p = ctx.p();
        let t = terms.iter().map(|&(_, a)| modarith::pval(a, p)).min().unwrap();
        if let Some((_, true)) = modulus_exp(ctx, base) {
            // Residues were held below the nominal modulus; digits beyond it are unknown.
            lost = min_opt(lost, Some(terms[0].0));
        }
        if t > 0 {
            let d = ctx.pow(t);
            for term in terms.iter_mut() {
                term.1 /= d;
            }
        }
        let val = base + t as i64;
        LaurentElement { ctx: ctx.clone(), val, terms, trunc_lo: tl, trunc_hi: th, lost }
    }

    pub fn zero(ctx: &Ctx) -> LaurentElement {
        LaurentElement { ctx: ctx.clone(), val: 0, terms: vec![], trunc_lo: false, trunc_hi: false, lost: None }
    }

    pub fn one(ctx: &Ctx) -> LaurentElement {
        Self::monomial(ctx, 0, PAdicScalar::from_int(ctx, 1))
    }

    /// c * u^i.
    pub fn monomial(ctx: &Ctx, i: i64, c: PAdicScalar) -> LaurentElement {
        Self::from_terms(ctx, &[(i, c)])
    }

    /// p^k (k may be negative).
    pub fn p_power(ctx: &Ctx, k: i64) -> LaurentElement {
        Self::monomial(ctx, 0, PAdicScalar::p_power(ctx, k))
    }

    /// u^i.
    pub fn u_power(ctx: &Ctx, i: i64) -> LaurentElement {
        Self::monomial(ctx, i, PAdicScalar::from_int(ctx, 1))
    }

    pub fn from_int(ctx: &Ctx, c: i128) -> LaurentElement {
        Self::monomial(ctx, 0, PAdicScalar::from_int(ctx, c))
    }

    /// Sum of c * u^i over the given terms; repeated exponents are added.
    pub fn from_terms(ctx: &Ctx, terms: &[(i64, PAdicScalar)]) -> LaurentElement {
        let nz: Vec<(i64, i64, u128)> = terms
            .iter()
            .filter_map(|&(i, c)| c.vexp().map(|v| (i, v, c.mantissa())))
            .collect();
        if nz.is_empty() {
            return Self::zero(ctx);
        }
        let base = nz.iter().map(|t| t.1).min().unwrap();
        let Some((k, _)) = modulus_exp(ctx, base) else {
            return Self::zero(ctx);
        };
        let m = ctx.pow(k);
        let mut raw: Vec<(i64, u128)> = nz
            .into_iter()
            .map(|(i, v, a)| {
                let shift = ((v - base) as u32).min(k);
                let (ka, _) = modulus_exp(ctx, v).unwrap();
                (i, mulmod(lift(ctx, a, ka, k - shift), ctx.pow(shift), m))
            })
            .collect();
        raw.sort_by_key(|t| t.0);
        let mut merged: Vec<(i64, u128)> = Vec::with_capacity(raw.len());
        for (i, a) in raw {
            match merged.last_mut() {
                Some(last) if last.0 == i => last.1 = addmod(last.1, a, m),
                _ => merged.push((i, a)),
            }
        }
        Self::build(ctx, base, merged, (false, false), None)
    }

    /// Integer coefficients: sum c * u^i.
    pub fn from_ints(ctx: &Ctx, terms: &[(i64, i128)]) -> LaurentElement {
        let t: Vec<(i64, PAdicScalar)> = terms.iter().map(|&(i, c)| (i, PAdicScalar::from_int(ctx, c))).collect();
        Self::from_terms(ctx, &t)
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.val == 0 && self.terms.len() == 1 && self.terms[0] == (0, 1)
    }

    /// Number of stored terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The p-adic valuation w(x); `None` for zero.
    pub fn valuation(&self) -> Option<i64> {
        if self.is_zero() {
            None
        } else {
            Some(self.val)
        }
    }

    pub fn min_exp(&self) -> Option<i64> {
        self.terms.first().map(|t| t.0)
    }

    pub fn max_exp(&self) -> Option<i64> {
        self.terms.last().map(|t| t.0)
    }

    pub fn truncated_lo(&self) -> bool {
        self.trunc_lo
    }

    pub fn truncated_hi(&self) -> bool {
        self.trunc_hi
    }

    pub fn truncated(&self) -> bool {
        self.trunc_lo || self.trunc_hi
    }

    /// Smallest exponent at which a contribution vanished modulo p^N.
    pub fn lost(&self) -> Option<i64> {
        self.lost
    }

    /// ORs extra truncation flags in.
    pub fn with_flags(mut self, lo: bool, hi: bool) -> LaurentElement {
        self.trunc_lo |= lo;
        self.trunc_hi |= hi;
        self
    }

    pub fn clear_flags(mut self) -> LaurentElement {
        self.trunc_lo = false;
        self.trunc_hi = false;
        self.lost = None;
        self
    }

    fn modulus(&self) -> u128 {
        self.ctx.pow(self.residue_exp())
    }

    /// Residues are kept modulo p^residue_exp.
    fn residue_exp(&self) -> u32 {
        modulus_exp(&self.ctx, self.val).expect("nonzero element has a modulus").0
    }

    /// Coefficients as scalars, in increasing exponent order.
    pub fn terms(&self) -> Vec<(i64, PAdicScalar)> {
        self.terms.iter().map(|&(e, a)| (e, PAdicScalar::new(&self.ctx, self.val, a))).collect()
    }

    /// (exponent, coefficient valuation) for every stored term.
    pub fn term_valuations(&self) -> Vec<(i64, i64)> {
        let p = self.ctx.p();
        self.terms.iter().map(|&(e, a)| (e, self.val + modarith::pval(a, p) as i64)).collect()
    }

    pub fn coeff(&self, i: i64) -> PAdicScalar {
        match self.terms.binary_search_by_key(&i, |t| t.0) {
            Ok(j) => PAdicScalar::new(&self.ctx, self.val, self.terms[j].1),
            Err(_) => PAdicScalar::ZERO,
        }
    }

    pub fn constant_term(&self) -> PAdicScalar {
        self.coeff(0)
    }

    /// True when every stored exponent is zero.
    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|t| t.0 == 0)
    }

    fn check(&self, other: &LaurentElement) {
        assert!(
            Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx,
            "operands come from different ring contexts"
        );
    }

    fn same_ctx(&self, other: &LaurentElement) -> Result<()> {
        if Arc::ptr_eq(&self.ctx, &other.ctx) || *self.ctx == *other.ctx {
            Ok(())
        } else {
            Err(Error::ContextMismatch)
        }
    }

    /// Residues rescaled to base valuation `base <= self.val`, modulo p^k.
    fn residues_at(&self, base: i64, k: u32) -> Vec<(i64, u128)> {
        let m = self.ctx.pow(k);
        let shift = (self.val - base) as u32;
        if shift >= k {
            return vec![];
        }
        let s = self.ctx.pow(shift);
        let kx = self.residue_exp();
        self.terms.iter().map(|&(e, a)| (e, mulmod(lift(&self.ctx, a, kx, k - shift), s, m))).collect()
    }

    pub fn try_add(&self, other: &LaurentElement) -> Result<LaurentElement> {
        self.same_ctx(other)?;
        Ok(self.add_impl(other, false))
    }

    pub fn try_mul(&self, other: &LaurentElement) -> Result<LaurentElement> {
        self.same_ctx(other)?;
        Ok(self.mul(other))
    }

    fn add_impl(&self, other: &LaurentElement, negate_other: bool) -> LaurentElement {
        self.check(other);
        let flags = (self.trunc_lo || other.trunc_lo, self.trunc_hi || other.trunc_hi);
        let lost = min_opt(self.lost, other.lost);
        if other.is_zero() {
            let mut r = self.clone();
            (r.trunc_lo, r.trunc_hi, r.lost) = (flags.0, flags.1, lost);
            return r;
        }
        if self.is_zero() {
            let mut r = if negate_other { other.neg() } else { other.clone() };
            (r.trunc_lo, r.trunc_hi, r.lost) = (flags.0, flags.1, lost);
            return r;
        }
        let base = self.val.min(other.val);
        let (k, _) = modulus_exp(&self.ctx, base).expect("nonzero operands have valuation below N");
        let m = self.ctx.pow(k);
        let xs = self.residues_at(base, k);
        let mut ys = other.residues_at(base, k);
        if negate_other {
            for t in ys.iter_mut() {
                t.1 = negmod(t.1, m);
            }
        }
        let mut out = Vec::with_capacity(xs.len() + ys.len());
        let mut lost_here: Option<i64> = None;
        let (mut i, mut j) = (0, 0);
        while i < xs.len() || j < ys.len() {
            if j == ys.len() || (i < xs.len() && xs[i].0 < ys[j].0) {
                out.push(xs[i]);
                i += 1;
            } else if i == xs.len() || ys[j].0 < xs[i].0 {
                out.push(ys[j]);
                j += 1;
            } else {
                let s = addmod(xs[i].1, ys[j].1, m);
                if s == 0 && xs[i].1 != 0 && ys[j].1 != 0 && lost_here.is_none() {
                    lost_here = Some(xs[i].0);
                }
                out.push((xs[i].0, s));
                i += 1;
                j += 1;
            }
        }
        Self::build(&self.ctx, base, out, flags, min_opt(lost, lost_here))
    }

    pub fn neg(&self) -> LaurentElement {
        if self.is_zero() {
            return self.clone();
        }
        let m = self.modulus();
        let mut r = self.clone();
        for t in r.terms.iter_mut() {
            t.1 = negmod(t.1, m);
        }
        r
    }

    pub fn add(&self, other: &LaurentElement) -> LaurentElement {
        self.add_impl(other, false)
    }

    pub fn sub(&self, other: &LaurentElement) -> LaurentElement {
        self.add_impl(other, true)
    }

    /// Convolution product; exponents leaving the window are dropped and flagged.
    pub fn mul(&self, other: &LaurentElement) -> LaurentElement {
        self.check(other);
        let flags = (self.trunc_lo || other.trunc_lo, self.trunc_hi || other.trunc_hi);
        let mut lost = None;
        if let (Some(l), Some(e)) = (self.lost, other.min_exp()) {
            lost = min_opt(lost, Some(l + e));
        }
        if let (Some(l), Some(e)) = (other.lost, self.min_exp()) {
            lost = min_opt(lost, Some(l + e));
        }
        if self.is_zero() || other.is_zero() {
            let mut z = Self::zero(&self.ctx);
            (z.trunc_lo, z.trunc_hi, z.lost) = (flags.0, flags.1, lost);
            return z;
        }
        // Terms whose every product leaves the window cannot matter; leaving
        // them out keeps the base valuation (and so the residue width) honest.
        let (lo, hi) = self.ctx.window();
        let (mut tl, mut th) = flags;
        let (ymin, ymax) = (other.min_exp().unwrap(), other.max_exp().unwrap());
        let reach = |e: i64, a: i64, b: i64, tl: &mut bool, th: &mut bool| {
            if e + a > hi {
                *th = true;
                false
            } else if e + b < lo {
                *tl = true;
                false
            } else {
                true
            }
        };
        let xk: Vec<(i64, u128)> =
            self.terms.iter().copied().filter(|t| reach(t.0, ymin, ymax, &mut tl, &mut th)).collect();
        if xk.is_empty() {
            let mut z = Self::zero(&self.ctx);
            (z.trunc_lo, z.trunc_hi, z.lost) = (tl, th, lost);
            return z;
        }
        let (xmin, xmax) = (xk[0].0, xk[xk.len() - 1].0);
        let yk: Vec<(i64, u128)> =
            other.terms.iter().copied().filter(|t| reach(t.0, xmin, xmax, &mut tl, &mut th)).collect();
        let (vx, kx, xk) = self.rescale(xk);
        let (vy, ky, yk) = other.rescale(yk);
        let base = vx + vy;
        let Some((k, _)) = modulus_exp(&self.ctx, base) else {
            let mut z = Self::zero(&self.ctx);
            (z.trunc_lo, z.trunc_hi) = (tl, th);
            z.lost = min_opt(lost, Some(xk[0].0 + yk[0].0));
            return z;
        };
        let m = self.ctx.pow(k);
        let xs: Vec<(i64, u128)> = xk.into_iter().map(|(e, a)| (e, lift(&self.ctx, a, kx, k))).collect();
        let ys: Vec<(i64, u128)> = yk.into_iter().map(|(e, a)| (e, lift(&self.ctx, a, ky, k))).collect();
        let (raw, lost_here) = convolve(&xs, &ys, m);
        Self::build(&self.ctx, base, raw, (tl, th), min_opt(lost, lost_here))
    }

    /// A nonempty subset of this element's terms re-expressed at its own
    /// valuation: (valuation, residue exponent, residues).
    fn rescale(&self, part: Vec<(i64, u128)>) -> (i64, u32, Vec<(i64, u128)>) {
        let p = self.ctx.p();
        let t = part.iter().map(|&(_, a)| modarith::pval(a, p)).min().unwrap();
        let k = self.residue_exp();
        if t == 0 {
            return (self.val, k, part);
        }
        let d = self.ctx.pow(t);
        (self.val + t as i64, k - t, part.into_iter().map(|(e, a)| (e, a / d)).collect())
    }

    pub fn square(&self) -> LaurentElement {
        self.mul(self)
    }

    pub fn pow(&self, mut e: u64) -> LaurentElement {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// Multiplication by p^k, k of either sign.
    pub fn mul_p_pow(&self, k: i64) -> LaurentElement {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let nv = self.val + k;
        let Some((kk, _)) = modulus_exp(&self.ctx, nv) else {
            let mut z = Self::zero(&self.ctx);
            (z.trunc_lo, z.trunc_hi) = (self.trunc_lo, self.trunc_hi);
            z.lost = min_opt(self.lost, self.min_exp());
            return z;
        };
        let kx = self.residue_exp();
        let raw: Vec<(i64, u128)> = self.terms.iter().map(|&(e, a)| (e, lift(&self.ctx, a, kx, kk))).collect();
        Self::build(&self.ctx, nv, raw, (self.trunc_lo, self.trunc_hi), self.lost)
    }

    /// Multiplication by u^k.
    pub fn mul_u_pow(&self, k: i64) -> LaurentElement {
        if self.is_zero() || k == 0 {
            return self.clone();
        }
        let raw: Vec<(i64, u128)> = self.terms.iter().map(|&(e, a)| (e + k, a)).collect();
        Self::build(&self.ctx, self.val, raw, (self.trunc_lo, self.trunc_hi), self.lost.map(|l| l + k))
    }

    /// Multiplication by an integer.
    pub fn mul_int(&self, c: i128) -> LaurentElement {
        self.mul(&Self::from_int(&self.ctx, c))
    }

    /// The standard Frobenius lift applied `iterations` times: u^i -> u^(i q^iterations),
    /// coefficients fixed.
    pub fn frobenius(&self, iterations: u32) -> LaurentElement {
        if iterations == 0 || self.is_zero() {
            return self.clone();
        }
        let factor = (self.ctx.q() as i64).checked_pow(iterations);
        let mut raw = Vec::with_capacity(self.terms.len());
        let (mut tl, mut th) = (self.trunc_lo, self.trunc_hi);
        for &(e, a) in &self.terms {
            match factor.and_then(|f| e.checked_mul(f)) {
                Some(ne) => raw.push((ne, a)),
                None if e < 0 => tl = true,
                None => th = true,
            }
        }
        let lost = self.lost.map(|l| factor.and_then(|f| l.checked_mul(f)).unwrap_or(if l < 0 { i64::MIN } else { i64::MAX }));
        Self::build(&self.ctx, self.val, raw, (tl, th), lost)
    }

    /// Re-expresses the element in a context with the same ring and a
    /// different window, dropping (and flagging) exponents outside it.
    pub fn rehome(&self, ctx: &Ctx) -> LaurentElement {
        assert!(self.ctx.same_ring(ctx), "rehome needs the same ring");
        Self::build(ctx, self.val, self.terms.clone(), (self.trunc_lo, self.trunc_hi), self.lost)
    }

    /// Shifts every exponent by `shift` and rebuilds in `ctx` (same ring,
    /// any window). Earlier truncation flags are dropped; trimming to the new
    /// window sets fresh ones.
    pub fn reframe(&self, ctx: &Ctx, shift: i64) -> LaurentElement {
        assert!(self.ctx.same_ring(ctx), "reframe needs the same ring");
        let raw: Vec<(i64, u128)> = self.terms.iter().map(|&(e, a)| (e + shift, a)).collect();
        Self::build(ctx, self.val, raw, (false, false), self.lost.map(|l| l + shift))
    }

    /// Terms with exponent in [lo, hi], flags cleared.
    pub fn restrict(&self, lo: i64, hi: i64) -> LaurentElement {
        let raw: Vec<(i64, u128)> = self.terms.iter().copied().filter(|t| t.0 >= lo && t.0 <= hi).collect();
        Self::build(&self.ctx, self.val, raw, (false, false), None)
    }

    /// Terms whose coefficient valuation satisfies `keep`, flags preserved.
    pub fn filter_by_valuation(&self, keep: impl Fn(i64) -> bool) -> LaurentElement {
        let p = self.ctx.p();
        let raw: Vec<(i64, u128)> = self
            .terms
            .iter()
            .copied()
            .filter(|&(_, a)| keep(self.val + modarith::pval(a, p) as i64))
            .collect();
        Self::build(&self.ctx, self.val, raw, (self.trunc_lo, self.trunc_hi), self.lost)
    }

    /// The part of the base-p digit expansion at p-powers i in [lo_i, hi_i].
    pub fn digit_range(&self, lo_i: i64, hi_i: i64) -> LaurentElement {
        if self.is_zero() {
            return self.clone();
        }
        let (k, _) = modulus_exp(&self.ctx, self.val).unwrap();
        let t0 = lo_i.saturating_sub(self.val).clamp(0, k as i64) as u32;
        let t1 = hi_i.saturating_add(1).saturating_sub(self.val).clamp(0, k as i64) as u32;
        if t0 >= t1 {
            let mut z = Self::zero(&self.ctx);
            (z.trunc_lo, z.trunc_hi) = (self.trunc_lo, self.trunc_hi);
            return z;
        }
        let (m0, m1) = (self.ctx.pow(t0), self.ctx.pow(t1));
        let raw: Vec<(i64, u128)> = self.terms.iter().map(|&(e, a)| (e, (a % m1) / m0 * m0)).collect();
        Self::build(&self.ctx, self.val, raw, (self.trunc_lo, self.trunc_hi), self.lost)
    }

    /// Base-p digits: pairs (i, d_i) with x = sum p^i d_i, each d_i a Laurent
    /// polynomial with coefficients in [0, p-1]; i runs over [w(x), N).
    pub fn digit_decompose(&self) -> Vec<(i64, LaurentElement)> {
        if self.is_zero() {
            return vec![];
        }
        let (k, _) = modulus_exp(&self.ctx, self.val).unwrap();
        let p = self.ctx.p() as u128;
        let mut per: Vec<Vec<(i64, u128)>> = vec![Vec::new(); k as usize];
        for &(e, a) in &self.terms {
            let mut a = a;
            let mut t = 0usize;
            while a > 0 {
                let d = a % p;
                if d != 0 {
                    per[t].push((e, d));
                }
                a /= p;
                t += 1;
            }
        }
        per.into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_empty())
            .map(|(t, v)| (self.val + t as i64, Self::build(&self.ctx, 0, v, (false, false), None)))
            .collect()
    }

    /// Equality of stored coefficients (flags ignored).
    pub fn eq_at_precision(&self, other: &LaurentElement) -> bool {
        self.ctx.same_ring(&other.ctx)
            && self.terms == other.terms
            && (self.terms.is_empty() || self.val == other.val)
    }

    /// Coefficient literals `[(i, "c")]`.
    pub fn to_literal(&self) -> Vec<(i64, String)> {
        self.terms().into_iter().map(|(e, c)| (e, c.to_literal(&self.ctx))).collect()
    }
}

/// Sum over pairs of exponent-shifted products modulo m. Returns sorted
/// (exponent, residue) pairs and the smallest exponent where nonzero
/// products summed to zero modulo m.
fn convolve(xs: &[(i64, u128)], ys: &[(i64, u128)], m: u128) -> (Vec<(i64, u128)>, Option<i64>) {
    let e0 = xs[0].0 + ys[0].0;
    let e1 = xs[xs.len() - 1].0 + ys[ys.len() - 1].0;
    let span = (e1 - e0 + 1) as u128;
    let pairs = (xs.len() as u128) * (ys.len() as u128);
    let mut lost = None;
    if span <= 8 * pairs + 64 && span <= 1 << 24 {
        let span = span as usize;
        let mut acc = vec![0u128; span];
        let mut hit = vec![false; span];
        if m - 1 <= u64::MAX as u128 {
            let sq = ((m - 1) * (m - 1)).max(1);
            let rows_per_reduce = ((u128::MAX - m) / sq).max(1);
            let mut rows = 0u128;
            for &(ei, a) in xs {
                if rows == rows_per_reduce {
                    for v in acc.iter_mut() {
                        *v %= m;
                    }
                    rows = 0;
                }
                let off = (ei - xs[0].0) as usize;
                for &(ej, b) in ys {
                    let idx = off + (ej - ys[0].0) as usize;
                    acc[idx] += a * b;
                    hit[idx] = true;
                }
                rows += 1;
            }
            for v in acc.iter_mut() {
                *v %= m;
            }
        } else {
            for &(ei, a) in xs {
                let off = (ei - xs[0].0) as usize;
                for &(ej, b) in ys {
                    let idx = off + (ej - ys[0].0) as usize;
                    acc[idx] = addmod(acc[idx], mulmod(a, b, m), m);
                    hit[idx] = true;
                }
            }
        }
        let mut out = Vec::new();
        for (j, (&v, &h)) in acc.iter().zip(hit.iter()).enumerate() {
            if !h {
                continue;
            }
            let e = e0 + j as i64;
            if v == 0 {
                if lost.is_none() {
                    lost = Some(e);
                }
            } else {
                out.push((e, v));
            }
        }
        (out, lost)
    } else {
        let mut prods: Vec<(i64, u128)> = Vec::with_capacity(pairs as usize);
        for &(ei, a) in xs {
            for &(ej, b) in ys {
                prods.push((ei + ej, mulmod(a, b, m)));
            }
        }
        prods.sort_unstable_by_key(|t| t.0);
        let mut out: Vec<(i64, u128)> = Vec::new();
        let mut cur: Option<(i64, u128)> = None;
        for (e, v) in prods {
            match cur {
                Some((ce, cv)) if ce == e => cur = Some((ce, addmod(cv, v, m))),
                Some((ce, cv)) => {
                    if cv == 0 {
                        lost = min_opt(lost, Some(ce));
                    } else {
                        out.push((ce, cv));
                    }
                    cur = Some((e, v));
                }
                None => cur = Some((e, v)),
            }
        }
        if let Some((ce, cv)) = cur {
            if cv == 0 {
                lost = min_opt(lost, Some(ce));
            } else {
                out.push((ce, cv));
            }
        }
        (out, lost)
    }
}

impl PartialEq for LaurentElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_at_precision(other)
    }
}

impl fmt::Display for LaurentElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .to_literal()
            .into_iter()
            .map(|(e, c)| match e {
                0 => c,
                1 => format!("({c})*u"),
                _ => format!("({c})*u^{e}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl std::ops::Add for &LaurentElement {
    type Output = LaurentElement;
    fn add(self, rhs: &LaurentElement) -> LaurentElement {
        LaurentElement::add(self, rhs)
    }
}

impl std::ops::Sub for &LaurentElement {
    type Output = LaurentElement;
    fn sub(self, rhs: &LaurentElement) -> LaurentElement {
        LaurentElement::sub(self, rhs)
    }
}

impl std::ops::Mul for &LaurentElement {
    type Output = LaurentElement;
    fn mul(self, rhs: &LaurentElement) -> LaurentElement {
        LaurentElement::mul(self, rhs)
    }
}

impl std::ops::Neg for &LaurentElement {
    type Output = LaurentElement;
    fn neg(self) -> LaurentElement {
        LaurentElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;

    fn el(ctx: &Ctx, t: &[(i64, i128)]) -> LaurentElement {
        LaurentElement::from_ints(ctx, t)
    }

    #[test]
    fn cancellation_and_identity() {
        let ctx = RingContext::default_ctx();
        let x = el(&ctx, &[(1, 1), (0, 5)]);
        assert_eq!(x.add(&el(&ctx, &[(1, -1)])), el(&ctx, &[(0, 5)]));
        assert_eq!(x.add(&LaurentElement::zero(&ctx)), x);
        assert_eq!(x.mul(&LaurentElement::one(&ctx)), x);
    }

    #[test]
    fn precision_ceiling_drops_coefficient() {
        let ctx = RingContext::new(2, 2, 10, (-64, 256), crate::rational::qi(1)).unwrap();
        let x = LaurentElement::monomial(&ctx, 1, PAdicScalar::p_power(&ctx, 9));
        let s = x.add(&x);
        assert!(s.is_zero());
        assert_eq!(s.lost(), Some(1));
    }

    #[test]
    fn small_products() {
        let ctx = RingContext::default_ctx();
        let a = el(&ctx, &[(0, 1), (1, 1)]);
        let b = el(&ctx, &[(0, 1), (1, -1)]);
        assert_eq!(a.mul(&b), el(&ctx, &[(0, 1), (2, -1)]));
        let c = el(&ctx, &[(5, 1), (0, 5)]);
        assert_eq!(c.square(), el(&ctx, &[(10, 1), (5, 10), (0, 25)]));
    }

    #[test]
    fn sparse_and_dense_paths_agree() {
        let ctx = RingContext::default_ctx();
        let a = el(&ctx, &[(-60, 3), (0, 7), (200, -2)]);
        let b = el(&ctx, &[(1, 11), (60, 5)]);
        let mut expect = LaurentElement::zero(&ctx);
        for (i, c) in a.terms() {
            for (j, d) in b.terms() {
                let prod = LaurentElement::monomial(&ctx, i, c).mul(&LaurentElement::monomial(&ctx, j, d));
                expect = expect.add(&prod);
            }
        }
        let got = a.mul(&b);
        assert_eq!(got, expect);
        assert!(got.truncated_hi());
    }

    #[test]
    fn frobenius_lift() {
        let ctx = RingContext::default_ctx();
        let x = el(&ctx, &[(1, 1), (0, 5)]);
        assert_eq!(x.frobenius(1), el(&ctx, &[(5, 1), (0, 5)]));
        assert_eq!(el(&ctx, &[(1, 1)]).frobenius(2), el(&ctx, &[(25, 1)]));
        assert!(el(&ctx, &[(100, 1)]).frobenius(1).truncated_hi());
    }

    #[test]
    fn digits() {
        let ctx = RingContext::default_ctx();
        let x = el(&ctx, &[(1, 1), (3, 5)]);
        let d = x.digit_decompose();
        assert_eq!(d, vec![(0, el(&ctx, &[(1, 1)])), (1, el(&ctx, &[(3, 1)]))]);
        let ctx2 = RingContext::new(2, 2, 10, (-64, 256), crate::rational::qi(1)).unwrap();
        let d = el(&ctx2, &[(1, 3)]).digit_decompose();
        assert_eq!(d, vec![(0, el(&ctx2, &[(1, 1)])), (1, el(&ctx2, &[(1, 1)]))]);
        assert!(LaurentElement::zero(&ctx).digit_decompose().is_empty());
        let y = el(&ctx, &[(0, -1), (2, 31)]);
        let mut back = LaurentElement::zero(&ctx);
        for (i, di) in y.digit_decompose() {
            back = back.add(&di.mul_p_pow(i));
        }
        assert_eq!(back, y);
        assert_eq!(y.digit_range(1, 1).add(&y.digit_range(0, 0)).add(&y.digit_range(2, 100)), y);
    }

    #[test]
    fn negative_valuations() {
        let ctx = RingContext::default_ctx();
        let x = LaurentElement::monomial(&ctx, -1, PAdicScalar::p_power(&ctx, -3));
        assert_eq!(x.valuation(), Some(-3));
        assert!(x.mul(&LaurentElement::monomial(&ctx, 1, PAdicScalar::p_power(&ctx, 3))).is_one());
    }
}
