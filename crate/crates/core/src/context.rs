//! Ring context: the prime, the Frobenius power, the absolute precision,
//! the retained exponent window and the outer radius.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Q};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingContext {
    p: u64,
    q: u64,
    frob_exp: u32,
    prec: i64,
    lo: i64,
    hi: i64,
    r0: Q,
    /// Largest k with p^k < 2^127; residues are kept modulo p^k for k up to this.
    max_k: u32,
    pows: Vec<u128>,
}

pub type Ctx = Arc<RingContext>;

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl RingContext {
    pub fn new(p: u64, q: u64, prec: i64, window: (i64, i64), r0: Q) -> Result<Ctx> {
        if !is_prime(p) {
            return Err(Error::InvalidContext(format!("p = {p} is not prime")));
        }
        let mut frob_exp = 0u32;
        let mut t = q;
        while t > 1 && t % p == 0 {
            t /= p;
            frob_exp += 1;
        }
        if t != 1 || frob_exp == 0 {
            return Err(Error::InvalidContext(format!("q = {q} is not a positive power of p = {p}")));
        }
        if prec < 1 {
            return Err(Error::InvalidContext("precision must be at least 1".into()));
        }
        if window.0 >= window.1 {
            return Err(Error::InvalidContext(format!("empty window [{}, {}]", window.0, window.1)));
        }
        if r0 <= Q::from_integer(0) {
            return Err(Error::InvalidContext("r0 must be positive".into()));
        }
        let limit = 1u128 << 127;
        let mut pows = vec![1u128];
        while let Some(next) = pows.last().unwrap().checked_mul(p as u128) {
            if next >= limit {
                break;
            }
            pows.push(next);
        }
        let max_k = (pows.len() - 1) as u32;
        if prec > max_k as i64 {
            return Err(Error::InvalidContext(format!(
                "p^{prec} does not fit the 127-bit residue representation"
            )));
        }
        Ok(Arc::new(RingContext { p, q, frob_exp, prec, lo: window.0, hi: window.1, r0, max_k, pows }))
    }

    /// p = 5, q = 5, N = 24, window [-64, 256], r0 = 1.
    pub fn default_ctx() -> Ctx {
        Self::new(5, 5, 24, (-64, 256), Q::from_integer(1)).expect("default context is valid")
    }

    pub fn p(&self) -> u64 {
        self.p
    }
    pub fn q(&self) -> u64 {
        self.q
    }
    /// s with q = p^s.
    pub fn frob_exp(&self) -> u32 {
        self.frob_exp
    }
    /// Absolute precision N: coefficients are known modulo p^N.
    pub fn prec(&self) -> i64 {
        self.prec
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.hi
    }
    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }
    pub fn r0(&self) -> Q {
        self.r0
    }
    pub fn max_k(&self) -> u32 {
        self.max_k
    }

    /// p^k for 0 <= k <= max_k.
    pub fn pow(&self, k: u32) -> u128 {
        self.pows[k as usize]
    }

    /// Same ring with a different exponent window.
    pub fn with_window(&self, lo: i64, hi: i64) -> Ctx {
        assert!(lo < hi, "empty window");
        let mut c = self.clone();
        c.lo = lo;
        c.hi = hi;
        Arc::new(c)
    }

    /// Same ring with a different absolute precision.
    pub fn with_prec(&self, prec: i64) -> Result<Ctx> {
        Self::new(self.p, self.q, prec, (self.lo, self.hi), self.r0)
    }

    /// Contexts agree on everything but possibly the window.
    pub fn same_ring(&self, other: &RingContext) -> bool {
        self.p == other.p && self.q == other.q && self.prec == other.prec && self.r0 == other.r0
    }

    pub fn to_json(&self) -> CtxJson {
        CtxJson { p: self.p, q: self.q, prec: self.prec, window: [self.lo, self.hi], r0: self.r0 }
    }
}

/// `{"p":…, "q":…, "prec":…, "window":[lo,hi], "r0":"num/den"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CtxJson {
    pub p: u64,
    pub q: u64,
    pub prec: i64,
    pub window: [i64; 2],
    #[serde(with = "rational::serde_q")]
    pub r0: Q,
}

impl CtxJson {
    pub fn build(&self) -> Result<Ctx> {
        RingContext::new(self.p, self.q, self.prec, (self.window[0], self.window[1]), self.r0)
    }
}
