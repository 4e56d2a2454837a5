//! Dense matrices over the truncated Laurent ring.
//!
//! Conventions: entries are stored row-major; Kronecker products index
//! (i1, i2) -> i1 * n2 + i2; compound (wedge) matrices use the lexicographic
//! order of k-subsets.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::context::Ctx;
use crate::element::LaurentElement;
use crate::error::{Error, Result};
use crate::rational::{qi, Q};
use crate::valuation::weighted_valuation;

/// The handful of ring operations the determinant algorithms need.
pub trait RingOps: Clone {
    fn r_zero(&self) -> Self;
    fn r_one(&self) -> Self;
    fn r_add(&self, o: &Self) -> Self;
    fn r_sub(&self, o: &Self) -> Self;
    fn r_mul(&self, o: &Self) -> Self;
    fn r_neg(&self) -> Self;
}

impl RingOps for LaurentElement {
    fn r_zero(&self) -> Self {
        LaurentElement::zero(self.ctx())
    }
    fn r_one(&self) -> Self {
        LaurentElement::one(self.ctx())
    }
    fn r_add(&self, o: &Self) -> Self {
        self.add(o)
    }
    fn r_sub(&self, o: &Self) -> Self {
        self.sub(o)
    }
    fn r_mul(&self, o: &Self) -> Self {
        self.mul(o)
    }
    fn r_neg(&self) -> Self {
        self.neg()
    }
}

impl RingOps for BigRational {
    fn r_zero(&self) -> Self {
        BigRational::zero()
    }
    fn r_one(&self) -> Self {
        BigRational::one()
    }
    fn r_add(&self, o: &Self) -> Self {
        self + o
    }
    fn r_sub(&self, o: &Self) -> Self {
        self - o
    }
    fn r_mul(&self, o: &Self) -> Self {
        self * o
    }
    fn r_neg(&self) -> Self {
        -self
    }
}

/// Coefficients [1, c_1, ..., c_n] of det(x I - A) = x^n + c_1 x^(n-1) + ...,
/// by Berkowitz's division-free recursion. `a` is square and nonempty.
pub fn berkowitz<T: RingOps>(a: &[Vec<T>]) -> Vec<T> {
    let n = a.len();
    let one = a[0][0].r_one();
    let mut poly = vec![one.clone()];
    for k in 0..n {
        let mut col: Vec<T> = (0..k).map(|i| a[i][k].clone()).collect();
        let row: Vec<T> = (0..k).map(|j| a[k][j].clone()).collect();
        let mut toe = vec![one.clone(), a[k][k].r_neg()];
        for _ in 0..k {
            let dot = row.iter().zip(&col).fold(one.r_zero(), |s, (r, c)| s.r_add(&r.r_mul(c)));
            toe.push(dot.r_neg());
            col = (0..k)
                .map(|i| (0..k).fold(one.r_zero(), |s, j| s.r_add(&a[i][j].r_mul(&col[j]))))
                .collect();
        }
        poly = (0..k + 2)
            .map(|i| (0..=k.min(i)).fold(one.r_zero(), |s, j| s.r_add(&toe[i - j].r_mul(&poly[j]))))
            .collect();
    }
    poly
}

fn laplace<T: RingOps>(a: &[Vec<T>], rows: &[usize], cols: &[usize]) -> T {
    match rows.len() {
        1 => a[rows[0]][cols[0]].clone(),
        2 => a[rows[0]][cols[0]]
            .r_mul(&a[rows[1]][cols[1]])
            .r_sub(&a[rows[0]][cols[1]].r_mul(&a[rows[1]][cols[0]])),
        _ => {
            let r0 = rows[0];
            let mut acc = a[r0][cols[0]].r_zero();
            for (k, &c) in cols.iter().enumerate() {
                let entry = &a[r0][c];
                let sub_cols: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
                let term = entry.r_mul(&laplace(a, &rows[1..], &sub_cols));
                acc = if k % 2 == 0 { acc.r_add(&term) } else { acc.r_sub(&term) };
            }
            acc
        }
    }
}

pub fn determinant<T: RingOps>(a: &[Vec<T>]) -> T {
    let n = a.len();
    if n <= 4 {
        let idx: Vec<usize> = (0..n).collect();
        return laplace(a, &idx, &idx);
    }
    let c = berkowitz(a).pop().unwrap();
    if n % 2 == 0 {
        c
    } else {
        c.r_neg()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    ctx: Ctx,
    rows: usize,
    cols: usize,
    data: Vec<LaurentElement>,
}

impl Matrix {
    pub fn zeros(ctx: &Ctx, rows: usize, cols: usize) -> Matrix {
        Matrix { ctx: ctx.clone(), rows, cols, data: vec![LaurentElement::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &Ctx, n: usize) -> Matrix {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, LaurentElement::one(ctx));
        }
        m
    }

    pub fn from_fn(ctx: &Ctx, rows: usize, cols: usize, f: impl Fn(usize, usize) -> LaurentElement) -> Matrix {
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Matrix { ctx: ctx.clone(), rows, cols, data }
    }

    pub fn from_rows(ctx: &Ctx, rows: Vec<Vec<LaurentElement>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidArgument("matrix must be nonempty".into()));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("matrix rows have different lengths".into()));
        }
        if rows.iter().flatten().any(|e| !e.ctx().same_ring(ctx)) {
            return Err(Error::ContextMismatch);
        }
        Ok(Matrix { ctx: ctx.clone(), rows: r, cols: c, data: rows.into_iter().flatten().map(|e| e.rehome(ctx)).collect() })
    }

    /// Integer-coefficient Laurent polynomial entries, row-major.
    pub fn from_int_rows(ctx: &Ctx, rows: &[Vec<Vec<(i64, i128)>>]) -> Matrix {
        let els = rows
            .iter()
            .map(|row| row.iter().map(|t| LaurentElement::from_ints(ctx, t)).collect())
            .collect();
        Self::from_rows(ctx, els).expect("well-formed integer matrix")
    }

    pub fn diagonal(ctx: &Ctx, d: &[LaurentElement]) -> Matrix {
        let mut m = Self::zeros(ctx, d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    pub fn ctx(&self) -> &Ctx {
        &self.ctx
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LaurentElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: LaurentElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn entries(&self) -> impl Iterator<Item = &LaurentElement> {
        self.data.iter()
    }

    pub fn to_rows(&self) -> Vec<Vec<LaurentElement>> {
        self.data.chunks(self.cols).map(<[LaurentElement]>::to_vec).collect()
    }

    pub fn map(&self, f: impl Fn(&LaurentElement) -> LaurentElement) -> Matrix {
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn rehome(&self, ctx: &Ctx) -> Matrix {
        let mut m = self.map(|e| e.rehome(ctx));
        m.ctx = ctx.clone();
        m
    }

    pub fn add(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shapes differ");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect();
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, o: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols), "matrix shapes differ");
        let data = self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect();
        Matrix { ctx: self.ctx.clone(), rows: self.rows, cols: self.cols, data }
    }

    pub fn neg(&self) -> Matrix {
        self.map(LaurentElement::neg)
    }

    pub fn mul(&self, o: &Matrix) -> Matrix {
        assert_eq!(self.cols, o.rows, "matrix shapes do not compose");
        Matrix::from_fn(&self.ctx, self.rows, o.cols, |i, j| {
            (0..self.cols).fold(LaurentElement::zero(&self.ctx), |s, k| {
                let (a, b) = (self.get(i, k), o.get(k, j));
                if a.is_zero() || b.is_zero() {
                    s
                } else {
                    s.add(&a.mul(b))
                }
            })
        })
    }

    pub fn mul_vec(&self, v: &[LaurentElement]) -> Vec<LaurentElement> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).fold(LaurentElement::zero(&self.ctx), |s, k| s.add(&self.get(i, k).mul(&v[k]))))
            .collect()
    }

    pub fn scale(&self, x: &LaurentElement) -> Matrix {
        self.map(|e| e.mul(x))
    }

    pub fn mul_p_pow(&self, k: i64) -> Matrix {
        self.map(|e| e.mul_p_pow(k))
    }

    pub fn frobenius(&self, iterations: u32) -> Matrix {
        self.map(|e| e.frobenius(iterations))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(&self.ctx, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn restrict(&self, lo: i64, hi: i64) -> Matrix {
        self.map(|e| e.restrict(lo, hi))
    }

    pub fn clear_flags(&self) -> Matrix {
        self.map(|e| e.clone().clear_flags())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(LaurentElement::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| {
                let e = self.get(i, j);
                if i == j {
                    e.is_one()
                } else {
                    e.is_zero()
                }
            }))
    }

    pub fn is_constant(&self) -> bool {
        self.data.iter().all(LaurentElement::is_constant)
    }

    pub fn truncated(&self) -> bool {
        self.data.iter().any(LaurentElement::truncated)
    }

    /// min w over the entries; `None` for the zero matrix.
    pub fn valuation(&self) -> Option<i64> {
        self.data.iter().filter_map(LaurentElement::valuation).min()
    }

    /// min w_r over the entries.
    pub fn weighted_valuation(&self, r: &Q) -> Option<Q> {
        self.data.iter().filter_map(|e| weighted_valuation(e, r)).min()
    }

    /// (smallest, largest) exponent over all entries, (0, 0) for zero.
    pub fn span(&self) -> (i64, i64) {
        let lo = self.data.iter().filter_map(LaurentElement::min_exp).min().unwrap_or(0);
        let hi = self.data.iter().filter_map(LaurentElement::max_exp).max().unwrap_or(0);
        (lo, hi)
    }

    /// Entries whose digits all sit at nonnegative powers of p.
    pub fn is_integral(&self) -> bool {
        self.valuation().is_none_or(|v| v >= 0)
    }

    /// The smallest exponent over entries is nonnegative.
    pub fn has_nonnegative_support(&self) -> bool {
        self.data.iter().all(|e| e.min_exp().is_none_or(|m| m >= 0))
    }

    /// Substitutes u = 0; callers check nonnegative support first.
    pub fn at_zero(&self) -> Matrix {
        self.map(|e| e.restrict(0, 0))
    }

    /// Entries with i >= j kept (lower triangle including the diagonal), and the rest.
    pub fn split_lower(&self) -> (Matrix, Matrix) {
        let lower = Matrix::from_fn(&self.ctx, self.rows, self.cols, |i, j| {
            if i >= j {
                self.get(i, j).clone()
            } else {
                LaurentElement::zero(&self.ctx)
            }
        });
        let upper = self.sub(&lower);
        (lower, upper)
    }

    pub fn kron(&self, o: &Matrix) -> Matrix {
        Matrix::from_fn(&self.ctx, self.rows * o.rows, self.cols * o.cols, |i, j| {
            self.get(i / o.rows, j / o.cols).mul(o.get(i % o.rows, j % o.cols))
        })
    }

    pub fn det(&self) -> LaurentElement {
        assert!(self.is_square());
        determinant(&self.to_rows())
    }

    /// [1, c_1, ..., c_n] with det(x I - A) = x^n + c_1 x^(n-1) + ... + c_n.
    pub fn char_poly(&self) -> Vec<LaurentElement> {
        assert!(self.is_square());
        berkowitz(&self.to_rows())
    }

    /// adj(A) = (-1)^(n+1) (A^(n-1) + c_1 A^(n-2) + ... + c_(n-1) I).
    pub fn adjugate(&self) -> Matrix {
        let n = self.rows;
        if n == 1 {
            return Matrix::identity(&self.ctx, 1);
        }
        let c = self.char_poly();
        let mut acc = Matrix::identity(&self.ctx, n);
        for ck in c.iter().take(n).skip(1) {
            acc = self.mul(&acc).add(&Matrix::identity(&self.ctx, n).scale(ck));
        }
        if n % 2 == 0 {
            acc.neg()
        } else {
            acc
        }
    }

    /// A^{-1} given an inverse of det A.
    pub fn inverse_with(&self, det_inv: &LaurentElement) -> Matrix {
        self.adjugate().scale(det_inv)
    }

    /// (I + X)^{-1} as (I - X)(I + X^2)(I + X^4)..., stopping when the power
    /// vanishes in the window.
    pub fn neumann_inverse(x: &Matrix, max_doublings: usize) -> Result<Matrix> {
        let n = x.rows;
        let id = Matrix::identity(&x.ctx, n);
        let mut acc = id.sub(x);
        let mut pw = x.mul(x);
        for _ in 0..max_doublings {
            if pw.is_zero() {
                return Ok(acc);
            }
            acc = acc.add(&acc.mul(&pw));
            pw = pw.mul(&pw);
        }
        Err(Error::PrecisionExhausted("Neumann series did not vanish in the window".into()))
    }

    /// The k-th compound matrix: minors indexed by lexicographically ordered k-subsets.
    pub fn compound(&self, k: usize) -> Matrix {
        let rs = subsets(self.rows, k);
        let cs = subsets(self.cols, k);
        let rows = self.to_rows();
        Matrix::from_fn(&self.ctx, rs.len(), cs.len(), |i, j| laplace_any(&rows, &rs[i], &cs[j]))
    }

    /// Exact characteristic polynomial of a constant matrix, with each entry
    /// read as the rational balanced mantissa * p^v.
    pub fn rational_char_poly(&self) -> Vec<BigRational> {
        assert!(self.is_square());
        let a: Vec<Vec<BigRational>> = self.to_rows().iter().map(|r| r.iter().map(|e| scalar_to_rational(e)).collect()).collect();
        berkowitz(&a)
    }
}

fn laplace_any(a: &[Vec<LaurentElement>], rows: &[usize], cols: &[usize]) -> LaurentElement {
    if rows.len() <= 4 {
        return laplace(a, rows, cols);
    }
    let sub: Vec<Vec<LaurentElement>> = rows.iter().map(|&i| cols.iter().map(|&j| a[i][j].clone()).collect()).collect();
    determinant(&sub)
}

/// All k-subsets of 0..n in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// The constant term of `e` as an exact rational.
pub fn scalar_to_rational(e: &LaurentElement) -> BigRational {
    let c = e.constant_term();
    let Some(v) = c.vexp() else {
        return BigRational::zero();
    };
    let ctx = e.ctx();
    let k = (ctx.prec() - v).min(ctx.max_k() as i64) as u32;
    let m = ctx.pow(k);
    let a = c.mantissa();
    let signed = if a > m / 2 { -BigInt::from(m - a) } else { BigInt::from(a) };
    let pk = BigInt::from(ctx.p()).pow(v.unsigned_abs() as u32);
    if v >= 0 {
        BigRational::from_integer(signed * pk)
    } else {
        BigRational::new(signed, pk)
    }
}

/// p-adic valuation of a nonzero rational.
pub fn rational_pval(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let pv = |n: &BigInt| -> i64 {
        let p = BigInt::from(p);
        let mut n = n.abs();
        let mut v = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        v
    };
    Some(pv(x.numer()) - pv(x.denom()))
}

/// Valuations of k x k minor sums of `m` are reliable below this bound:
/// each term takes one entry from each of k distinct rows (and columns), so
/// an error of p^N in one factor is multiplied by entries from the k - 1
/// worst other rows at most.
pub fn minor_precision(m: &Matrix, k: usize) -> i64 {
    let worst = |mins: Vec<i64>| -> i64 {
        let mut v: Vec<i64> = mins.into_iter().map(|x| x.min(0)).collect();
        v.sort();
        v.iter().take(k.saturating_sub(1)).sum()
    };
    let val = |i: usize, j: usize| m.get(i, j).valuation().unwrap_or(0);
    let rows = worst((0..m.rows()).map(|i| (0..m.cols()).map(|j| val(i, j)).min().unwrap_or(0)).collect());
    let cols = worst((0..m.cols()).map(|j| (0..m.rows()).map(|i| val(i, j)).min().unwrap_or(0)).collect());
    m.ctx().prec() + rows.max(cols)
}

/// w_r(M - I) for a square matrix.
pub fn distance_from_identity(m: &Matrix, r: &Q) -> Option<Q> {
    m.sub(&Matrix::identity(m.ctx(), m.rows())).weighted_valuation(r)
}

/// Three-point sample of a closed interval.
pub fn sample_radii(lo: &Q, hi: &Q) -> Vec<Q> {
    let mut v = vec![*lo, (lo + hi) / qi(2), *hi];
    v.dedup();
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::RingContext;

    fn ctx() -> Ctx {
        RingContext::default_ctx()
    }

    fn m(rows: &[Vec<Vec<(i64, i128)>>]) -> Matrix {
        Matrix::from_int_rows(&ctx(), rows)
    }

    #[test]
    fn determinants_agree() {
        let a = m(&[
            vec![vec![(0, 2)], vec![(1, 1)], vec![(0, 3)], vec![(2, 1)], vec![(0, 1)]],
            vec![vec![(0, 1)], vec![(0, 5)], vec![(1, -1)], vec![], vec![(0, 7)]],
            vec![vec![(3, 1)], vec![(0, 1)], vec![(0, 1)], vec![(0, 2)], vec![]],
            vec![vec![(0, 4)], vec![], vec![(0, 1), (1, 1)], vec![(0, 1)], vec![(0, 1)]],
            vec![vec![(0, 1)], vec![(0, 1)], vec![(0, 1)], vec![(0, 1)], vec![(0, 2)]],
        ]);
        let rows = a.to_rows();
        let idx: Vec<usize> = (0..5).collect();
        assert_eq!(a.det(), laplace(&rows, &idx, &idx));
        let adj = a.adjugate();
        let d = a.det();
        assert_eq!(a.mul(&adj), Matrix::identity(&ctx(), 5).scale(&d));
    }

    #[test]
    fn char_poly_of_companion() {
        // [[0, p], [1, u]] has characteristic polynomial x^2 - u x - p.
        let a = m(&[vec![vec![], vec![(0, 5)]], vec![vec![(0, 1)], vec![(1, 1)]]]);
        let c = a.char_poly();
        assert_eq!(c[1], LaurentElement::from_ints(&ctx(), &[(1, -1)]));
        assert_eq!(c[2], LaurentElement::from_int(&ctx(), -5));
        assert_eq!(a.det(), LaurentElement::from_int(&ctx(), -5));
    }

    #[test]
    fn compound_and_kron() {
        let a = m(&[vec![vec![], vec![(0, 5)]], vec![vec![(0, 1)], vec![]]]);
        assert_eq!(a.compound(2).get(0, 0), &LaurentElement::from_int(&ctx(), -5));
        assert_eq!(a.compound(1), a);
        let k = a.kron(&Matrix::identity(&ctx(), 2));
        assert_eq!(k.rows(), 4);
        assert_eq!(k.get(0, 2), &LaurentElement::from_int(&ctx(), 5));
        assert_eq!(subsets(4, 2).len(), 6);
        assert_eq!(subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn neumann() {
        let x = m(&[vec![vec![], vec![(0, 5)]], vec![vec![], vec![]]]);
        let inv = Matrix::neumann_inverse(&x, 64).unwrap();
        let id = Matrix::identity(&ctx(), 2);
        assert!(id.add(&x).mul(&inv).is_identity());
    }

    #[test]
    fn rational_char_poly_of_constant() {
        let a = m(&[vec![vec![(0, 1)], vec![]], vec![vec![], vec![(0, 5)]]]);
        let c = a.rational_char_poly();
        let p = 5u64;
        assert_eq!(rational_pval(&c[1], p), Some(0));
        assert_eq!(rational_pval(&c[2], p), Some(1));
    }
}
