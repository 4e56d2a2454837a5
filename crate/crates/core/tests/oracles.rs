//! Hand-computed values, each checked against something other than the
//! routine that produced it: brute-force valuations over the raw terms,
//! hulls drawn by hand, or substitution back into the defining equation.

use robba::cohomology::solve_h1_rank1;
use robba::division::{div_rem, factor_unit};
use robba::matfactor::{matrix_approximate, matrix_factor};
use robba::matrix::Matrix;
use robba::normal_form::{good_model_turnover, triangularize};
use robba::polygon::filtration_check;
use robba::rational::{q, qi};
use robba::semiunit::position;
use robba::sigma::SigmaModule;
use robba::slopes::{cyclic_vector, generic_hn_polygon, special_hn_polygon_dwork};
use robba::valuation::{height, is_unit, newton_polygon, weighted_valuation};
use robba::{Ctx, Error, Interval, LaurentElement, NewtonPolygon, RingContext, Q};

fn ctx() -> Ctx {
    RingContext::default_ctx()
}

fn el(t: &[(i64, i128)]) -> LaurentElement {
    LaurentElement::from_ints(&ctx(), t)
}

fn m(rows: &[Vec<Vec<(i64, i128)>>]) -> Matrix {
    Matrix::from_int_rows(&ctx(), rows)
}

fn v5(mut c: i128) -> i64 {
    let mut v = 0;
    while c % 5 == 0 {
        c /= 5;
        v += 1;
    }
    v
}

/// min over terms c u^e of v_5(c) + r e.
fn w_brute(terms: &[(i64, i128)], r: Q) -> Q {
    terms.iter().filter(|t| t.1 != 0).map(|&(e, c)| qi(v5(c)) + r * qi(e)).min().unwrap()
}

#[test]
fn unit_inverse_multiplies_back_to_one() {
    let x = el(&[(0, 1), (1, -5)]);
    let y = robba::inverse::invert_unit(&x, &q(1, 2)).unwrap();
    // Oracle: the geometric series sum p^m u^m, m < 24.
    let series: Vec<(i64, i128)> = (0..24).map(|k| (k, 5i128.pow(k as u32))).collect();
    assert_eq!(y, el(&series));
    assert!(x.mul(&y).sub(&LaurentElement::one(&ctx())).is_zero());
}

#[test]
fn weighted_valuation_is_multiplicative() {
    let t = [(5, 1), (0, 5)];
    let x = el(&t);
    let sq: Vec<(i64, i128)> = vec![(10, 1), (5, 10), (0, 25)];
    assert_eq!(w_brute(&t, qi(1)), qi(1));
    assert_eq!(w_brute(&sq, qi(1)), qi(2));
    assert_eq!(weighted_valuation(&x.mul(&x), &qi(1)), Some(qi(2)));
    for r in [q(1, 10), q(1, 5), q(1, 3), q(7, 8)] {
        assert_eq!(weighted_valuation(&x, &r), Some(w_brute(&t, r)));
        assert_eq!(weighted_valuation(&x.mul(&x), &r), Some(w_brute(&sq, r)));
    }
}

#[test]
fn polygons_of_u5_plus_p() {
    // Points (exponent, valuation): (5, 0) and (0, 1); the hull drops one
    // unit of valuation over five exponents, so the slope is 1/5.
    let iv = Interval::up_to(qi(1));
    let x = el(&[(5, 1), (0, 5)]);
    assert_eq!(newton_polygon(&x, &iv).unwrap().slopes, vec![(q(1, 5), 1)]);
    // (10, 0), (5, 1), (0, 2) are collinear: one slope 1/5 of length 2.
    assert_eq!(newton_polygon(&x.mul(&x), &iv).unwrap().slopes, vec![(q(1, 5), 2)]);
    assert!(!is_unit(&x, &iv));
    assert!(is_unit(&el(&[(0, 5), (1, 1)]), &Interval::up_to(q(1, 2))));
}

#[test]
fn heights_of_u5_plus_p() {
    // w_1: terms give 5 and 1, minimum at n = 1. w_(1/10): 1/2 and 1, minimum at n = 0.
    let x = el(&[(5, 1), (0, 5)]);
    assert_eq!(w_brute(&[(5, 1), (0, 5)], qi(1)), qi(1));
    assert_eq!(height(&x, &qi(1)).unwrap(), 1);
    assert_eq!(height(&x, &q(1, 10)).unwrap(), 0);
}

#[test]
fn positioning_conditions() {
    for (x, r) in [(el(&[(1, 1)]), qi(1)), (el(&[(5, 1), (0, 5)]), qi(1))] {
        let pos = position(&x, &r).unwrap();
        let y = &pos.y;
        assert_eq!(y, &pos.unit.mul(&x).mul_p_pow(pos.shift));
        assert_eq!(weighted_valuation(y, &r), Some(qi(0)));
        // v_0(y - 1) > 0: terms of y - 1 with integral coefficient carry u^e, e > 0.
        let d = y.sub(&LaurentElement::one(&ctx()));
        assert!(d.digit_range(i64::MIN, 0).terms().iter().all(|(e, _)| *e > 0));
    }
}

#[test]
fn division_examples() {
    let r = q(1, 2);
    let d = div_rem(&el(&[(0, 1)]), &el(&[(0, 5), (1, 1)]), &r, 16).unwrap();
    assert!(d.remainder.is_zero());
    // Substitute back: q (p + u) = 1 on the part of the window the truncated
    // quotient determines.
    let back = d.quotient.mul(&el(&[(0, 5), (1, 1)]));
    assert!(back.restrict(-64, 200).is_one());

    let x = el(&[(5, 1), (0, 5)]);
    let y = el(&[(0, 5)]);
    let d = div_rem(&y, &x, &r, 16).unwrap();
    let z = &d.remainder;
    assert_eq!(height(z, &r).unwrap(), 0);
    assert!(weighted_valuation(z, &r).unwrap() >= w_brute(&[(0, 5)], r));
    assert!(y.sub(z).sub(&d.quotient.mul(&x)).restrict(-64, 200).is_zero());
}

#[test]
fn factor_of_p_cubed_times_a_unit() {
    let w = el(&[(0, 1), (1, 5)]);
    let f = factor_unit(&w.mul_p_pow(3), &q(1, 4), &q(1, 2), 16).unwrap();
    // g is p^3 up to a unit: g / p^3 has valuation 0 and no slopes.
    let g0 = f.factor.mul_p_pow(-3);
    assert_eq!(g0.valuation(), Some(0));
    assert!(newton_polygon(&f.factor, &Interval::up_to(q(1, 2))).unwrap().is_empty());
    assert!(is_unit(&g0, &Interval::closed(q(1, 4), q(1, 2))));
    assert!(f.factor.sub(&f.unit.mul(&w.mul_p_pow(3))).restrict(-64, 200).is_zero());
}

#[test]
fn unipotent_factorization_converges_quickly() {
    let a = m(&[vec![vec![(0, 1)], vec![(0, 5)]], vec![vec![], vec![(0, 1)]]]);
    let f = matrix_factor(&a, &Interval::closed(q(1, 8), q(1, 2)), &Interval::closed(q(1, 4), q(3, 4)), 16).unwrap();
    assert!(f.cert.iterations_used <= 4, "log2(16) passes, used {}", f.cert.iterations_used);
    assert!(f.u.mul(&f.v).sub(&a).is_zero());
}

#[test]
fn approximate_inverse_of_a_unit() {
    let a = m(&[vec![vec![(0, 1), (1, 5), (-1, 5)]]]);
    let r = q(1, 2);
    let ap = matrix_approximate(&a, &Interval::closed(q(1, 4), r), &r, false).unwrap();
    let prod = a.mul(&ap.u).sub(&Matrix::identity(&ctx(), 1));
    for s in [q(1, 4), q(3, 8), q(1, 2)] {
        assert!(prod.weighted_valuation(&s).is_none_or(|w| w > qi(0)));
    }
}

#[test]
fn wedge_of_rank_two_standard() {
    // det [[0, p], [1, 0]] = -p.
    let w = SigmaModule::standard(&ctx(), 1, 2).unwrap().wedge(2).unwrap();
    assert_eq!(w.matrix().get(0, 0), &el(&[(0, -5)]));
    assert_eq!(w.degree(), 1);
}

#[test]
fn pushforward_of_pullback() {
    // pullback of (p) over sigma^2 is [[0, p], [1, 0]]; its square is p I.
    let n = SigmaModule::rank_one(el(&[(0, 5)])).unwrap().with_frob_power(2).unwrap();
    let pf = n.pullback(2).unwrap().pushforward(2).unwrap();
    assert_eq!(pf.matrix(), &Matrix::identity(&ctx(), 2).mul_p_pow(1));
    assert_eq!(generic_hn_polygon(&pf).unwrap().slope_list(), vec![qi(1), qi(1)]);
}

#[test]
fn filtration_in_the_wrong_direction() {
    let v = filtration_check(&NewtonPolygon::from_ints(&[0, 1]), &[NewtonPolygon::from_slopes(vec![q(1, 2), q(1, 2)])]).unwrap();
    assert!(!v.holds);
}

#[test]
fn cyclic_vector_of_diag_one_p() {
    // e_1 spans a stable line; e_1 + e_2 gives W = [[1, 1], [1, p]] with det p - 1.
    let a = m(&[vec![vec![(0, 1)], vec![]], vec![vec![], vec![(0, 5)]]]);
    let md = SigmaModule::new(a, 1, qi(1)).unwrap();
    assert_eq!(cyclic_vector(&md, 4).unwrap(), vec![el(&[(0, 1)]), el(&[(0, 1)])]);
}

#[test]
fn twisted_worked_example() {
    let a = m(&[vec![vec![], vec![(0, 5)]], vec![vec![(0, 1)], vec![(1, 1)]]]);
    let md = SigmaModule::new(a, 1, qi(1)).unwrap();
    assert_eq!(generic_hn_polygon(&md.twist(1)).unwrap().slope_list(), vec![qi(1), qi(2)]);
}

#[test]
fn triangular_specialization_polygon() {
    // x^2 - (1 + p) x + p: valuations 0, 0, 1 at degrees 2, 1, 0.
    let (c1, c0) = (-(1 + 5i128), 5i128);
    assert_eq!((v5(c1), v5(c0)), (0, 1));
    let a = m(&[vec![vec![(0, 1)], vec![(1, 1)]], vec![vec![], vec![(0, 5)]]]);
    let md = SigmaModule::new(a, 1, qi(1)).unwrap();
    assert_eq!(special_hn_polygon_dwork(&md).unwrap().slope_list(), vec![qi(0), qi(1)]);
}

#[test]
fn triangularize_lower_left() {
    let d = m(&[vec![vec![(0, 5)], vec![]], vec![vec![], vec![(0, 1)]]]);
    // A D^-1 - I = [[0, 0], [u, 0]] has valuation 0: the hypothesis fails.
    let a = m(&[vec![vec![(0, 5)], vec![]], vec![vec![(1, 5)], vec![(0, 1)]]]);
    assert!(matches!(triangularize(&a, &d, &q(1, 2), 12), Err(Error::HypothesisFailed(_))));
    // With p u in the corner the iteration applies.
    let a = m(&[vec![vec![(0, 5)], vec![]], vec![vec![(1, 25)], vec![(0, 1)]]]);
    let r = q(1, 2);
    let t = triangularize(&a, &d, &r, 12).unwrap();
    let id = Matrix::identity(&ctx(), 2);
    let d_inv = Matrix::diagonal(&ctx(), &[LaurentElement::p_power(&ctx(), -1), LaurentElement::one(&ctx())]);
    let e = t.b.mul(&d_inv).sub(&id).restrict(-64, 200);
    for (i, j) in [(0, 0), (1, 0), (1, 1)] {
        let x = e.get(i, j);
        assert!(x.valuation().is_none_or(|v| v >= 12), "({i}, {j})");
        assert!(weighted_valuation(x, &r).is_none_or(|v| v >= qi(12)), "({i}, {j})");
    }
    let recon = t.u.mul(&t.b).sub(&a.mul(&t.u.frobenius(1))).restrict(-64, 200);
    assert!(recon.valuation().is_none_or(|v| v >= 12));
    assert_eq!(t.cert.diagnostics.len(), 5);
}

#[test]
fn good_model_with_only_positive_digits() {
    // p u^-1 sits at the p^1 digit, so nothing needs turning over.
    let d = Matrix::identity(&ctx(), 2);
    let a = m(&[vec![vec![(0, 1)], vec![(-1, 5)]], vec![vec![], vec![(0, 1)]]]);
    let g = good_model_turnover(&a, &d, &q(1, 6), 12).unwrap();
    assert!(g.u.is_identity());
    assert_eq!(g.b, a);
}

#[test]
fn h1_orbit_of_u_substitutes_back() {
    let x = el(&[(1, 1)]);
    let s = solve_h1_rank1(1, &x, 16).unwrap();
    let y = s.y.clone().clear_flags();
    // y - p sigma(y) telescopes to u once u^625 has left the window.
    let lhs = y.sub(&y.frobenius(1).mul_p_pow(1));
    assert_eq!(lhs, x);
}
