//! The rank-one equations x = y - p^n sigma(y) and p^n sigma(x) = x.

use serde_json::{json, Value};

use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::json::element_to_json;

#[derive(Clone, Debug)]
pub struct H1Solution {
    pub y: LaurentElement,
    /// Frobenius iterates summed.
    pub terms: u32,
    /// w(y - p^n sigma(y) - x) on the window; `None` when it vanishes.
    pub residual_valuation: Option<i64>,
    pub truncated: bool,
}

impl H1Solution {
    pub fn to_json(&self) -> Value {
        json!({
            "y": element_to_json(&self.y),
            "terms": self.terms,
            "residual_valuation": self.residual_valuation,
            "truncated": self.truncated,
        })
    }
}

/// y = sum over n m < target of p^(n m) sigma^m(x). Iterates whose support
/// leaves the window are cut there and reported through `truncated`.
pub fn solve_h1_rank1(n: i64, x: &LaurentElement, target: i64) -> Result<H1Solution> {
    if n < 1 {
        return Err(Error::InvalidArgument(format!("need n >= 1, got {n}")));
    }
    let ctx = x.ctx();
    let wx = x.valuation().unwrap_or(0);
    let mut y = LaurentElement::zero(ctx);
    let mut term = x.clone();
    let mut m = 0i64;
    while !term.is_zero() && n * m + wx.min(0) < target {
        y = y.add(&term.mul_p_pow(n * m));
        term = term.frobenius(1);
        m += 1;
    }
    let resid = y.sub(&y.frobenius(1).mul_p_pow(n)).sub(x);
    let truncated = y.truncated() || term.truncated();
    Ok(H1Solution { y, terms: m as u32, residual_valuation: resid.clear_flags().valuation(), truncated })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum H0Space {
    /// The constants.
    Constants,
    Zero,
    /// n < 0 needs a perfect residue field; not handled here.
    Unsupported,
}

impl H0Space {
    pub fn as_str(&self) -> &'static str {
        match self {
            H0Space::Constants => "constants",
            H0Space::Zero => "zero",
            H0Space::Unsupported => "unsupported",
        }
    }
}

/// Solutions of p^n sigma(x) = x.
pub fn solve_h0_rank1(n: i64) -> H0Space {
    match n {
        0 => H0Space::Constants,
        n if n > 0 => H0Space::Zero,
        _ => H0Space::Unsupported,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;

    #[test]
    fn geometric_series() {
        let ctx = RingContext::default_ctx();
        let s = solve_h1_rank1(1, &LaurentElement::one(&ctx), 16).unwrap();
        let expect = (0..16).fold(LaurentElement::zero(&ctx), |acc, k| acc.add(&LaurentElement::p_power(&ctx, k)));
        assert_eq!(s.y, expect);
        assert_eq!(s.residual_valuation, Some(16));
    }

    #[test]
    fn frobenius_orbit_of_u() {
        let ctx = RingContext::default_ctx();
        let s = solve_h1_rank1(1, &LaurentElement::u_power(&ctx, 1), 16).unwrap();
        let expect = LaurentElement::from_ints(&ctx, &[(1, 1), (5, 5), (25, 25), (125, 125)]);
        assert_eq!(s.y.clone().clear_flags(), expect);
        assert!(s.truncated);
        assert_eq!(s.residual_valuation, None);
        assert!(solve_h1_rank1(2, &LaurentElement::zero(&ctx), 16).unwrap().y.is_zero());
    }

    #[test]
    fn fixed_points() {
        assert_eq!(solve_h0_rank1(0), H0Space::Constants);
        assert_eq!(solve_h0_rank1(1), H0Space::Zero);
        assert_eq!(solve_h0_rank1(-1), H0Space::Unsupported);
    }
}
