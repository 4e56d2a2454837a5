//! Seeded random inputs for the property sweeps. Every generator takes the
//! RNG explicitly so a sweep is reproducible from its seed.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::context::Ctx;
use crate::element::LaurentElement;
use crate::matrix::Matrix;
use crate::rational::{q, Q};

fn unit_coeff(rng: &mut ChaCha8Rng, p: i128) -> i128 {
    loop {
        let c: i128 = rng.gen_range(-(p * p)..=p * p);
        if c % p != 0 {
            return c;
        }
    }
}

/// A nonzero Laurent polynomial with exponents in [lo, hi] and coefficients
/// p^v times a unit, v in [0, vmax].
pub fn element(rng: &mut ChaCha8Rng, ctx: &Ctx, lo: i64, hi: i64, vmax: i64, max_terms: usize) -> LaurentElement {
    let p = ctx.p() as i128;
    loop {
        let n = rng.gen_range(1..=max_terms);
        let terms: Vec<(i64, i128)> = (0..n)
            .map(|_| {
                let v = rng.gen_range(0..=vmax) as u32;
                (rng.gen_range(lo..=hi), unit_coeff(rng, p) * p.pow(v))
            })
            .collect();
        let x = LaurentElement::from_ints(ctx, &terms);
        if !x.is_zero() {
            return x;
        }
    }
}

/// An integral element with nonnegative exponents and small coefficients.
pub fn small_poly(rng: &mut ChaCha8Rng, ctx: &Ctx, lo: i64, hi: i64, max_terms: usize) -> LaurentElement {
    let n = rng.gen_range(0..=max_terms);
    let terms: Vec<(i64, i128)> = (0..n).map(|_| (rng.gen_range(lo..=hi), rng.gen_range(-2..=2))).collect();
    LaurentElement::from_ints(ctx, &terms)
}

/// Radii in (0, 1) with small denominators.
pub fn radius(rng: &mut ChaCha8Rng) -> Q {
    let d = rng.gen_range(2..=8);
    q(rng.gen_range(1..d), d)
}

pub fn diagonal_p_powers(ctx: &Ctx, ks: &[i64]) -> Matrix {
    let d: Vec<LaurentElement> = ks.iter().map(|&k| LaurentElement::p_power(ctx, k)).collect();
    Matrix::diagonal(ctx, &d)
}

/// Unitriangular polynomial matrix (lower or upper at random) together with
/// its inverse; both are exact.
pub fn unitriangular(rng: &mut ChaCha8Rng, ctx: &Ctx, n: usize, max_deg: i64) -> (Matrix, Matrix) {
    let lower = rng.gen_bool(0.5);
    let mut t = Matrix::identity(ctx, n);
    for i in 0..n {
        for j in 0..n {
            if (lower && i > j) || (!lower && i < j) {
                t.set(i, j, small_poly(rng, ctx, 0, max_deg, 2));
            }
        }
    }
    let x = t.sub(&Matrix::identity(ctx, n));
    let inv = Matrix::neumann_inverse(&x, 8).expect("nilpotent");
    (t, inv)
}

/// Companion matrix with last column (p^k, a_1, ..., a_(n-1)), where the
/// a_i mix p-powers and multiples of u. The determinant is +-p^k.
pub fn companion(rng: &mut ChaCha8Rng, ctx: &Ctx, n: usize) -> Matrix {
    let mut a = Matrix::zeros(ctx, n, n);
    for i in 1..n {
        a.set(i, i - 1, LaurentElement::one(ctx));
    }
    a.set(0, n - 1, LaurentElement::p_power(ctx, rng.gen_range(1..=3)));
    for i in 1..n {
        let c = LaurentElement::p_power(ctx, rng.gen_range(0..=2)).mul_int(rng.gen_range(-2..=2));
        a.set(i, n - 1, c.add(&small_poly(rng, ctx, 1, 2, 1)));
    }
    a
}

/// A module matrix with nonnegative u-support: U^{-1} A U for a product of
/// unitriangular polynomial matrices U, where A is either a random diagonal
/// of p-powers or a companion matrix.
pub fn integral_module_matrix(rng: &mut ChaCha8Rng, ctx: &Ctx, max_rank: usize) -> Matrix {
    let n = rng.gen_range(1..=max_rank);
    let mut a = if n > 1 && rng.gen_bool(0.5) {
        companion(rng, ctx, n)
    } else {
        let ks: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=2)).collect();
        diagonal_p_powers(ctx, &ks)
    };
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    a = Matrix::from_fn(ctx, n, n, |i, j| a.get(perm[i], perm[j]).clone());
    for _ in 0..2 {
        let (t, inv) = unitriangular(rng, ctx, n, 1);
        a = inv.mul(&a).mul(&t);
    }
    a
}

/// D = diag(p^k) with descending k and gaps of at most one, and
/// A = (I + P) D with P divisible by p and supported on u^1, u^2.
pub fn triangularize_instance(rng: &mut ChaCha8Rng, ctx: &Ctx) -> (Matrix, Matrix) {
    let n = rng.gen_range(2..=3);
    let mut ks = vec![rng.gen_range(0..=1)];
    for _ in 1..n {
        let last = *ks.last().unwrap();
        ks.push(last - rng.gen_range(0..=1));
    }
    let k0 = *ks.last().unwrap();
    ks.iter_mut().for_each(|k| *k -= k0);
    let d = diagonal_p_powers(ctx, &ks);
    let mut p = Matrix::zeros(ctx, n, n);
    for i in 0..n {
        for j in 0..n {
            p.set(i, j, small_poly(rng, ctx, 1, 2, 2).mul_p_pow(1));
        }
    }
    let a = Matrix::identity(ctx, n).add(&p).mul(&d);
    (a, d)
}

/// D with valuation spread h in {0, 1} and A = (I + E) D, where E has
/// digits at p^0 on u^e (e >= 1, e >= 2 when h = 1) and occasionally a
/// p^-1 u^40..60 term.
pub fn good_model_instance(rng: &mut ChaCha8Rng, ctx: &Ctx) -> (Matrix, Matrix) {
    let n = rng.gen_range(1..=3);
    let h = if n > 1 { rng.gen_range(0..=1) } else { 0 };
    let mut ks: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=h)).collect();
    if h == 1 {
        ks[0] = 0;
        ks[n - 1] = 1;
    }
    let d = diagonal_p_powers(ctx, &ks);
    let emin = 1 + h;
    let mut e = Matrix::zeros(ctx, n, n);
    for i in 0..n {
        for j in 0..n {
            let mut x = small_poly(rng, ctx, emin, 3, 2);
            if rng.gen_bool(0.2) {
                x = x.add(&LaurentElement::from_ints(ctx, &[(rng.gen_range(40..=60), 1)]).mul_p_pow(-1));
            }
            e.set(i, j, x);
        }
    }
    if e.is_zero() {
        e.set(0, 0, LaurentElement::u_power(ctx, emin));
    }
    let a = Matrix::identity(ctx, n).add(&e).mul(&d);
    (a, d)
}
