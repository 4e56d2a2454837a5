//! Frobenius modules F(v) = A sigma^a(v) given by a matrix, and their algebra.

use num_integer::Integer;

use crate::context::Ctx;
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::inverse::invert_unit;
use crate::matrix::Matrix;
use crate::polygon::Interval;
use crate::rational::{qi, Q};
use crate::valuation;

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaModule {
    matrix: Matrix,
    frob_power: u32,
    radius: Q,
    degree: i64,
}

/// w(det) after checking that det / p^w(det) has no slopes on (0, r].
fn certify_det(det: &LaurentElement, r: &Q) -> Result<i64> {
    if det.is_zero() {
        return Err(Error::SingularAtPrecision);
    }
    let c = det.valuation().unwrap();
    let poly = valuation::newton_polygon(&det.mul_p_pow(-c), &Interval::up_to(*r))?;
    if !poly.is_empty() {
        return Err(Error::DetHasSlopes);
    }
    if poly.precision_limited && !det.truncated() {
        return Err(Error::PrecisionExhausted("degree depends on digits beyond the working precision".into()));
    }
    Ok(c)
}

impl SigmaModule {
    pub fn new(matrix: Matrix, frob_power: u32, radius: Q) -> Result<SigmaModule> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument("module matrix must be square".into()));
        }
        if frob_power == 0 {
            return Err(Error::InvalidArgument("Frobenius power must be positive".into()));
        }
        if radius <= qi(0) || radius > matrix.ctx().r0() {
            return Err(Error::InvalidArgument("module radius must lie in (0, r0]".into()));
        }
        let degree = certify_det(&matrix.det(), &radius)?;
        Ok(SigmaModule { matrix, frob_power, radius, degree })
    }

    /// The rank-one module (x) over sigma.
    pub fn rank_one(x: LaurentElement) -> Result<SigmaModule> {
        let r0 = x.ctx().r0();
        let ctx = x.ctx().clone();
        Self::new(Matrix::diagonal(&ctx, &[x]), 1, r0)
    }

    /// Basis e_1..e_d with F e_i = e_(i+1) and F e_d = p^c e_1.
    pub fn standard(ctx: &Ctx, c: i64, d: usize) -> Result<SigmaModule> {
        if d == 0 || c.gcd(&(d as i64)) != 1 {
            return Err(Error::NotCoprime { c, d: d as i64 });
        }
        let mut a = Matrix::zeros(ctx, d, d);
        for i in 0..d - 1 {
            a.set(i + 1, i, LaurentElement::one(ctx));
        }
        a.set(0, d - 1, LaurentElement::p_power(ctx, c));
        Self::new(a, 1, ctx.r0())
    }

    pub fn ctx(&self) -> &Ctx {
        self.matrix.ctx()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn rank(&self) -> usize {
        self.matrix.rows()
    }

    pub fn frob_power(&self) -> u32 {
        self.frob_power
    }

    pub fn radius(&self) -> Q {
        self.radius
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    pub fn slope(&self) -> Q {
        qi(self.degree) / qi(self.rank() as i64)
    }

    /// F applied to a coordinate vector.
    pub fn apply(&self, v: &[LaurentElement]) -> Vec<LaurentElement> {
        let fv: Vec<LaurentElement> = v.iter().map(|x| x.frobenius(self.frob_power)).collect();
        self.matrix.mul_vec(&fv)
    }

    pub fn twist(&self, c: i64) -> SigmaModule {
        SigmaModule {
            matrix: self.matrix.mul_p_pow(c),
            frob_power: self.frob_power,
            radius: self.radius,
            degree: self.degree + c * self.rank() as i64,
        }
    }

    /// A^{-1}, with det A inverted as p^-c times a unit inverse on (0, r].
    pub fn inverse_matrix(&self) -> Result<Matrix> {
        let det = self.matrix.det();
        let unit = det.mul_p_pow(-self.degree);
        let inv = invert_unit(&unit, &self.radius).map_err(|e| match e {
            Error::NotAUnit => Error::SingularAtPrecision,
            e => e,
        })?;
        Ok(self.matrix.inverse_with(&inv.mul_p_pow(-self.degree)))
    }

    pub fn dual(&self) -> Result<SigmaModule> {
        let m = self.inverse_matrix()?.transpose();
        SigmaModule::new(m, self.frob_power, self.radius)
    }

    fn same_frobenius(&self, other: &SigmaModule) -> Result<()> {
        if self.frob_power != other.frob_power {
            return Err(Error::InvalidArgument("modules have different Frobenius powers".into()));
        }
        if !self.ctx().same_ring(other.ctx()) {
            return Err(Error::ContextMismatch);
        }
        Ok(())
    }

    pub fn tensor(&self, other: &SigmaModule) -> Result<SigmaModule> {
        self.same_frobenius(other)?;
        SigmaModule::new(self.matrix.kron(&other.matrix), self.frob_power, self.radius.min(other.radius))
    }

    pub fn direct_sum(&self, other: &SigmaModule) -> Result<SigmaModule> {
        self.same_frobenius(other)?;
        let (n, m) = (self.rank(), other.rank());
        let a = Matrix::from_fn(self.ctx(), n + m, n + m, |i, j| match (i < n, j < n) {
            (true, true) => self.matrix.get(i, j).clone(),
            (false, false) => other.matrix.get(i - n, j - n).clone(),
            _ => LaurentElement::zero(self.ctx()),
        });
        SigmaModule::new(a, self.frob_power, self.radius.min(other.radius))
    }

    pub fn wedge(&self, k: usize) -> Result<SigmaModule> {
        if k == 0 || k > self.rank() {
            return Err(Error::InvalidArgument(format!("wedge power {k} outside 1..={}", self.rank())));
        }
        SigmaModule::new(self.matrix.compound(k), self.frob_power, self.radius)
    }

    /// The same space under F^a: matrix A sigma^f(A) ... sigma^((a-1) f)(A).
    pub fn pushforward(&self, a: u32) -> Result<SigmaModule> {
        if a == 0 {
            return Err(Error::InvalidArgument("pushforward needs a >= 1".into()));
        }
        let mut m = self.matrix.clone();
        for k in 1..a {
            m = m.mul(&self.matrix.frobenius(k * self.frob_power));
        }
        SigmaModule::new(m, self.frob_power * a, self.radius)
    }

    /// From a module over sigma^(a f) to one over sigma^f of rank a * rank:
    /// block j maps to block j + 1 by the identity and the last block returns
    /// to the first through the original matrix.
    pub fn pullback(&self, a: u32) -> Result<SigmaModule> {
        if a == 0 || self.frob_power % a != 0 {
            return Err(Error::InvalidArgument(format!(
                "pullback by {a} needs a Frobenius power divisible by it (have {})",
                self.frob_power
            )));
        }
        let m = self.rank();
        let a_us = a as usize;
        let ctx = self.ctx().clone();
        let big = Matrix::from_fn(&ctx, a_us * m, a_us * m, |i, j| {
            let (bi, ri) = (i / m, i % m);
            let (bj, rj) = (j / m, j % m);
            if bj + 1 == a_us && bi == 0 {
                self.matrix.get(ri, rj).clone()
            } else if bi == bj + 1 && ri == rj {
                LaurentElement::one(&ctx)
            } else {
                LaurentElement::zero(&ctx)
            }
        });
        SigmaModule::new(big, self.frob_power / a, self.radius)
    }

    /// Same matrix regarded over sigma^a; used to build pullback inputs.
    pub fn with_frob_power(&self, a: u32) -> Result<SigmaModule> {
        SigmaModule::new(self.matrix.clone(), a, self.radius)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;

    fn ctx() -> Ctx {
        RingContext::default_ctx()
    }

    #[test]
    fn standard_modules() {
        let c = ctx();
        let m = SigmaModule::standard(&c, 1, 2).unwrap();
        assert_eq!(m.matrix(), &Matrix::from_int_rows(&c, &[vec![vec![], vec![(0, 5)]], vec![vec![(0, 1)], vec![]]]));
        assert_eq!(m.degree(), 1);
        assert_eq!(m.slope(), Q::new(1, 2));
        assert_eq!(SigmaModule::standard(&c, 0, 1).unwrap().matrix(), &Matrix::identity(&c, 1));
        assert_eq!(SigmaModule::standard(&c, -1, 1).unwrap().degree(), -1);
        assert_eq!(SigmaModule::standard(&c, 2, 4).unwrap_err(), Error::NotCoprime { c: 2, d: 4 });
    }

    #[test]
    fn algebra_degrees() {
        let c = ctx();
        let m = SigmaModule::standard(&c, 1, 2).unwrap();
        let n = SigmaModule::standard(&c, -1, 3).unwrap();
        assert_eq!(m.twist(3).degree(), 1 + 6);
        assert_eq!(m.twist(2).twist(-2), m);
        assert_eq!(m.dual().unwrap().degree(), -1);
        assert_eq!(m.tensor(&n).unwrap().degree(), 3 * 1 + 2 * -1);
        assert_eq!(m.pushforward(2).unwrap().degree(), 2);
        let w = m.wedge(2).unwrap();
        assert_eq!(w.matrix().get(0, 0), &LaurentElement::from_int(&c, -5));
        let d1 = SigmaModule::standard(&c, 1, 1).unwrap();
        assert_eq!(d1.dual().unwrap().matrix().get(0, 0), &LaurentElement::p_power(&c, -1));
        assert_eq!(d1.tensor(&d1).unwrap().matrix().get(0, 0), &LaurentElement::from_int(&c, 25));
    }

    #[test]
    fn pullback_of_rank_one_is_standard() {
        let c = ctx();
        for (cc, d) in [(1, 2), (-1, 3), (3, 4)] {
            let n = SigmaModule::rank_one(LaurentElement::p_power(&c, cc)).unwrap().with_frob_power(d).unwrap();
            let pb = n.pullback(d).unwrap();
            assert_eq!(pb.matrix(), SigmaModule::standard(&c, cc, d as usize).unwrap().matrix());
            assert_eq!(pb.frob_power(), 1);
            assert_eq!(pb.degree(), cc);
        }
        let m = SigmaModule::standard(&c, 1, 2).unwrap();
        assert_eq!(m.pullback(1).unwrap(), m);
        assert_eq!(m.pushforward(1).unwrap(), m);
    }

    #[test]
    fn rejects_slope_bearing_determinant() {
        let c = ctx();
        let a = Matrix::from_int_rows(&c, &[vec![vec![(0, 5), (5, 1)]]]);
        assert_eq!(SigmaModule::new(a, 1, qi(1)).unwrap_err(), Error::DetHasSlopes);
    }
}
