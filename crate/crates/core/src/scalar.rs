//! Coefficients: p-adic numbers known to absolute precision p^N.

use crate::context::RingContext;
use crate::error::{Error, Result};
use crate::modarith;

/// mantissa * p^vexp, known modulo p^N. Zero at precision has `vexp = None`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PAdicScalar {
    vexp: Option<i64>,
    mantissa: u128,
}

impl PAdicScalar {
    pub const ZERO: PAdicScalar = PAdicScalar { vexp: None, mantissa: 0 };

    /// Canonicalizes `mantissa * p^vexp`: strips factors of p, reduces modulo
    /// p^(N - vexp) and collapses to zero when vexp reaches N.
    pub fn new(ctx: &RingContext, vexp: i64, mantissa: u128) -> PAdicScalar {
        if mantissa == 0 {
            return Self::ZERO;
        }
        let t = modarith::pval(mantissa, ctx.p());
        let v = vexp + t as i64;
        let mut m = mantissa;
        for _ in 0..t {
            m /= ctx.p() as u128;
        }
        if v >= ctx.prec() {
            return Self::ZERO;
        }
        let k = (ctx.prec() - v).min(ctx.max_k() as i64) as u32;
        PAdicScalar { vexp: Some(v), mantissa: m % ctx.pow(k) }
    }

    pub fn from_int(ctx: &RingContext, c: i128) -> PAdicScalar {
        if c == 0 {
            return Self::ZERO;
        }
        let mut a = c.unsigned_abs();
        let mut v = 0i64;
        let p = ctx.p() as u128;
        while a % p == 0 {
            a /= p;
            v += 1;
        }
        if v >= ctx.prec() {
            return Self::ZERO;
        }
        let k = (ctx.prec() - v).min(ctx.max_k() as i64) as u32;
        let m = ctx.pow(k);
        let a = a % m;
        let a = if c < 0 { modarith::negmod(a, m) } else { a };
        PAdicScalar { vexp: Some(v), mantissa: a }
    }

    /// p^k (k may be negative).
    pub fn p_power(ctx: &RingContext, k: i64) -> PAdicScalar {
        Self::new(ctx, k, 1)
    }

    /// Parses a decimal integer or `"a/p^k"`.
    pub fn parse(ctx: &RingContext, s: &str) -> Result<PAdicScalar> {
        let s = s.trim();
        let bad = || Error::Parse(format!("coefficient {s:?} is neither an integer nor \"a/p^k\""));
        match s.split_once('/') {
            None => {
                let c: i128 = s.parse().map_err(|_| bad())?;
                Ok(Self::from_int(ctx, c))
            }
            Some((a, den)) => {
                let a: i128 = a.trim().parse().map_err(|_| bad())?;
                let den = den.trim();
                let k: i64 = if let Some(e) = den.strip_prefix("p^") {
                    e.parse().map_err(|_| bad())?
                } else if den == "p" {
                    1
                } else {
                    return Err(bad());
                };
                let x = Self::from_int(ctx, a);
                Ok(match x.vexp {
                    None => Self::ZERO,
                    Some(v) => {
                        // Re-widen the mantissa modulus for the lower exponent.
                        let mut m = a.unsigned_abs();
                        let p = ctx.p() as u128;
                        while m % p == 0 {
                            m /= p;
                        }
                        let vv = v - k;
                        if vv >= ctx.prec() {
                            return Ok(Self::ZERO);
                        }
                        let kk = (ctx.prec() - vv).min(ctx.max_k() as i64) as u32;
                        let modulus = ctx.pow(kk);
                        let m = m % modulus;
                        let m = if a < 0 { modarith::negmod(m, modulus) } else { m };
                        PAdicScalar { vexp: Some(vv), mantissa: m }
                    }
                })
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.vexp.is_none()
    }

    /// p-adic valuation; `None` is +infinity.
    pub fn vexp(&self) -> Option<i64> {
        self.vexp
    }

    pub fn mantissa(&self) -> u128 {
        self.mantissa
    }

    /// Decimal integer when integral, otherwise `"a/p^k"`, with the balanced
    /// representative of the mantissa.
    pub fn to_literal(&self, ctx: &RingContext) -> String {
        match self.vexp {
            None => "0".into(),
            Some(v) => {
                let k = (ctx.prec() - v).min(ctx.max_k() as i64) as u32;
                let m = ctx.pow(k);
                if v >= 0 {
                    // value = mantissa * p^v modulo p^N
                    let kn = ctx.prec().min(ctx.max_k() as i64) as u32;
                    let mn = ctx.pow(kn);
                    let val = modarith::mulmod(self.mantissa, ctx.pow(v as u32) % mn, mn);
                    modarith::balanced_string(val, mn)
                } else {
                    format!("{}/p^{}", modarith::balanced_string(self.mantissa, m), -v)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;

    #[test]
    fn canonical_forms() {
        let ctx = RingContext::default_ctx();
        let x = PAdicScalar::from_int(&ctx, 75);
        assert_eq!(x.vexp(), Some(2));
        assert_eq!(x.mantissa(), 3);
        assert!(PAdicScalar::from_int(&ctx, 0).is_zero());
        let big = 5i128.pow(24);
        assert!(PAdicScalar::from_int(&ctx, big).is_zero());
        let y = PAdicScalar::parse(&ctx, "3/p^2").unwrap();
        assert_eq!(y.vexp(), Some(-2));
        assert_eq!(y.to_literal(&ctx), "3/p^2");
        let z = PAdicScalar::parse(&ctx, "-10/p^3").unwrap();
        assert_eq!(z.vexp(), Some(-2));
        assert_eq!(z.to_literal(&ctx), "-2/p^2");
        assert_eq!(PAdicScalar::parse(&ctx, "-1").unwrap().to_literal(&ctx), "-1");
        assert!(PAdicScalar::parse(&ctx, "1/q^2").is_err());
    }
}
