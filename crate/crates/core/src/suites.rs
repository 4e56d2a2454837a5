//! The property sweeps behind the acceptance target and `selftest`. Each
//! suite returns counts and the first few failure descriptions.

use std::time::{Duration, Instant};

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cohomology::solve_h1_rank1;
use crate::context::{Ctx, RingContext};
use crate::division::div_rem;
use crate::element::LaurentElement;
use crate::instances;
use crate::matrix::Matrix;
use crate::normal_form::{good_model_turnover, triangularize};
use crate::polygon::{filtration_check, Interval, NewtonPolygon};
use crate::rational::{fmt_q, q, qi, Q};
use crate::sigma::SigmaModule;
use crate::slopes::{compare_polygons, generic_hn_polygon, special_hn_polygon_dwork, Comparison};
use crate::valuation::{height, newton_polygon, weighted_valuation};

const MAX_REPORTED: usize = 5;

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub checked: usize,
    pub failed: usize,
    pub failures: Vec<String>,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.failed == 0 && self.checked > 0
    }

    pub fn within_budget(&self) -> bool {
        self.elapsed <= self.budget
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {}/{} checks passed in {:.2}s (budget {}s)",
            if self.passed() { "PASS" } else { "FAIL" },
            self.name,
            self.checked - self.failed,
            self.checked,
            self.elapsed.as_secs_f64(),
            self.budget.as_secs()
        )
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "name": self.name,
            "passed": self.passed(),
            "checked": self.checked,
            "failed": self.failed,
            "failures": self.failures,
            "elapsed_ms": self.elapsed.as_millis() as u64,
            "budget_s": self.budget.as_secs(),
        })
    }
}

struct Tally {
    name: &'static str,
    checked: usize,
    failed: usize,
    failures: Vec<String>,
    start: Instant,
    budget: Duration,
}

impl Tally {
    fn new(name: &'static str, budget_s: u64) -> Tally {
        Tally { name, checked: 0, failed: 0, failures: vec![], start: Instant::now(), budget: Duration::from_secs(budget_s) }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.failed += 1;
            if self.failures.len() < MAX_REPORTED {
                self.failures.push(what());
            }
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name,
            checked: self.checked,
            failed: self.failed,
            failures: self.failures,
            elapsed: self.start.elapsed(),
            budget: self.budget,
        }
    }
}

fn slopes_str(p: &NewtonPolygon) -> String {
    let s: Vec<String> = p.slope_list().iter().map(fmt_q).collect();
    format!("[{}]", s.join(", "))
}

/// F v1 = v2, F v2 = p v1 + u v2.
pub fn worked_example(ctx: &Ctx) -> SigmaModule {
    let a = Matrix::from_int_rows(ctx, &[vec![vec![], vec![(0, ctx.p() as i128)]], vec![vec![(0, 1)], vec![(1, 1)]]]);
    SigmaModule::new(a, 1, ctx.r0()).expect("worked example is a module")
}

pub fn golden(ctx: &Ctx) -> SuiteResult {
    let mut t = Tally::new("worked example polygons", 1);
    let m = worked_example(ctx);
    match generic_hn_polygon(&m) {
        Ok(g) => t.check(g.slope_list() == vec![qi(0), qi(1)], || format!("generic slopes {}", slopes_str(&g))),
        Err(e) => t.check(false, || format!("generic polygon: {e}")),
    }
    match special_hn_polygon_dwork(&m) {
        Ok(s) => t.check(s.slope_list() == vec![q(1, 2), q(1, 2)], || format!("special slopes {}", slopes_str(&s))),
        Err(e) => t.check(false, || format!("special polygon: {e}")),
    }
    match compare_polygons(&m) {
        Ok(r) => {
            t.check(r.comparison == Comparison::SpecialAbove, || format!("comparison {}", r.comparison.as_str()));
            t.check(r.generic.endpoint() == (qi(2), qi(1)), || "generic endpoint is not (2, 1)".into());
            let se = r.special.as_ref().map(NewtonPolygon::endpoint);
            t.check(se == Some((qi(2), qi(1))), || "special endpoint is not (2, 1)".into());
        }
        Err(e) => t.check(false, || format!("comparison: {e}")),
    }
    t.finish()
}

pub fn multiplicativity(ctx: &Ctx, seed: u64, pairs: usize) -> SuiteResult {
    let mut t = Tally::new("polygon multiplicativity", 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let iv = Interval::up_to(ctx.r0());
    let mut done = 0;
    let mut tries = 0;
    while done < pairs && tries < 20 * pairs {
        tries += 1;
        let x = instances::element(&mut rng, ctx, -6, 6, 3, 5);
        let y = instances::element(&mut rng, ctx, -6, 6, 3, 5);
        let xy = x.mul(&y);
        let (Ok(px), Ok(py), Ok(pxy)) = (newton_polygon(&x, &iv), newton_polygon(&y, &iv), newton_polygon(&xy, &iv)) else {
            t.check(false, || format!("polygon failed for {:?} * {:?}", x.to_literal(), y.to_literal()));
            done += 1;
            continue;
        };
        if px.precision_limited || py.precision_limited || pxy.precision_limited {
            continue;
        }
        done += 1;
        let mut expect = px.slope_list();
        expect.extend(py.slope_list());
        expect.sort();
        t.check(pxy.slope_list() == expect, || {
            format!("{:?} * {:?}: product slopes {} vs {}", x.to_literal(), y.to_literal(), slopes_str(&pxy), slopes_str(&px.sum(&py)))
        });
        for _ in 0..3 {
            let r = instances::radius(&mut rng);
            let lhs = weighted_valuation(&xy, &r);
            let rhs = weighted_valuation(&x, &r).zip(weighted_valuation(&y, &r)).map(|(a, b)| a + b);
            t.check(lhs == rhs, || format!("w_{r}: {lhs:?} vs {rhs:?} for {:?} * {:?}", x.to_literal(), y.to_literal()));
        }
    }
    t.check(done == pairs, || format!("only {done} of {pairs} pairs had hulls free of precision limits"));
    t.finish()
}

pub fn division(ctx: &Ctx, seed: u64, pairs: usize, target: i64) -> SuiteResult {
    let mut t = Tally::new("division with remainder", 30);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..pairs {
        let x = instances::element(&mut rng, ctx, -4, 8, 3, 4);
        let y = instances::element(&mut rng, ctx, -4, 8, 3, 5);
        let r = instances::radius(&mut rng);
        let d = match div_rem(&y, &x, &r, target) {
            Ok(d) => d,
            Err(e) => {
                t.check(false, || format!("div_rem({:?}, {:?}, {r}): {e}", y.to_literal(), x.to_literal()));
                continue;
            }
        };
        let z = &d.remainder;
        let hx = height(&x, &r).unwrap();
        t.check(z.is_zero() || height(z, &r).unwrap() < hx, || format!("height of remainder not below {hx}"));
        t.check(
            z.is_zero() || weighted_valuation(z, &r) >= weighted_valuation(&y, &r),
            || format!("w_r(z) < w_r(y) at r = {r}"),
        );
        let resid = crate::division::interior(
            &y.sub(z).sub(&d.quotient.mul(&x)),
            x.min_exp().unwrap().min(0) + y.min_exp().unwrap().min(0),
            x.max_exp().unwrap().max(0) + y.max_exp().unwrap().max(0),
        );
        t.check(resid.valuation().is_none_or(|v| v >= target), || format!("residual valuation {:?}", resid.valuation()));
    }
    t.finish()
}

fn standard_list() -> Vec<(i64, usize)> {
    let mut out = vec![];
    for d in 1..=4usize {
        for c in -4..=4i64 {
            if c.gcd(&(d as i64)) == 1 {
                out.push((c, d));
            }
        }
    }
    out
}

pub fn slope_arithmetic(ctx: &Ctx, seed: u64, random_pairs: usize) -> SuiteResult {
    let mut t = Tally::new("slope arithmetic", 30);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let list = standard_list();
    let poly = |m: &SigmaModule| generic_hn_polygon(m).map(|p| p.slope_list());
    let expect = |s: Vec<Q>| NewtonPolygon::from_slopes(s).slope_list();
    for &(c, d) in &list {
        let m = SigmaModule::standard(ctx, c, d).unwrap();
        let s = qi(c) / qi(d as i64);
        let base = vec![s; d];
        let tag = format!("standard({c}, {d})");
        t.check(poly(&m).ok() == Some(base.clone()), || format!("{tag}: slopes"));
        for b in [-2i64, 1, 3] {
            let tw = m.twist(b);
            t.check(poly(&tw).ok() == Some(expect(base.iter().map(|x| x + qi(b)).collect())), || format!("{tag} twist {b}"));
            t.check(tw.degree() == m.degree() + b * d as i64, || format!("{tag} twist degree"));
        }
        match m.dual() {
            Ok(du) => {
                t.check(poly(&du).ok() == Some(expect(base.iter().map(|x| -x).collect())), || format!("{tag} dual"));
                t.check(du.degree() == -m.degree(), || format!("{tag} dual degree"));
            }
            Err(e) => t.check(false, || format!("{tag} dual: {e}")),
        }
        for a in [2u32, 3] {
            match m.pushforward(a) {
                Ok(pf) => {
                    t.check(poly(&pf).ok() == Some(expect(base.iter().map(|x| x * qi(a as i64)).collect())), || {
                        format!("{tag} pushforward {a}")
                    });
                    t.check(pf.degree() == a as i64 * m.degree(), || format!("{tag} pushforward degree"));
                    match pf.pullback(a) {
                        Ok(pb) => {
                            t.check(poly(&pb).ok() == Some(vec![s; d * a as usize]), || format!("{tag} pullback {a}"));
                            t.check(pb.degree() == pf.degree(), || format!("{tag} pullback degree"));
                        }
                        Err(e) => t.check(false, || format!("{tag} pullback: {e}")),
                    }
                }
                Err(e) => t.check(false, || format!("{tag} pushforward: {e}")),
            }
        }
        if d > 1 || c.abs() > 1 {
            continue;
        }
        let n = SigmaModule::rank_one(LaurentElement::p_power(ctx, c)).unwrap();
        for a in 2..=4u32 {
            let pb = n.with_frob_power(a).and_then(|x| x.pullback(a));
            t.check(pb.ok().map(|x| poly(&x).ok()) == Some(Some(vec![qi(c) / qi(a as i64); a as usize])), || {
                format!("pullback of rank one p^{c} by {a}")
            });
        }
    }
    for _ in 0..random_pairs {
        let (c1, d1) = list[rng.gen_range(0..list.len())];
        let (c2, d2) = list[rng.gen_range(0..list.len())];
        // The tensor determinant is p^degree, which needs degree < N to survive.
        let degree = c1 * d2 as i64 + c2 * d1 as i64;
        let pctx = if degree < ctx.prec() { ctx.clone() } else { ctx.with_prec((degree + 8).min(ctx.max_k() as i64)).unwrap() };
        let m1 = SigmaModule::standard(&pctx, c1, d1).unwrap();
        let m2 = SigmaModule::standard(&pctx, c2, d2).unwrap();
        let tag = format!("standard({c1}, {d1}) with standard({c2}, {d2})");
        let s1 = qi(c1) / qi(d1 as i64);
        let s2 = qi(c2) / qi(d2 as i64);
        match m1.tensor(&m2) {
            Ok(tm) => {
                t.check(poly(&tm).ok() == Some(vec![s1 + s2; d1 * d2]), || format!("{tag}: tensor"));
                t.check(tm.degree() == degree, || format!("{tag}: tensor degree"));
            }
            Err(e) => t.check(false, || format!("{tag}: tensor: {e}")),
        }
        match m1.direct_sum(&m2) {
            Ok(sm) => {
                let mut e = vec![s1; d1];
                e.extend(vec![s2; d2]);
                t.check(poly(&sm).ok() == Some(expect(e)), || format!("{tag}: direct sum"));
                t.check(sm.degree() == c1 + c2, || format!("{tag}: direct sum degree"));
            }
            Err(e) => t.check(false, || format!("{tag}: direct sum: {e}")),
        }
    }
    t.finish()
}

pub fn comparison_sweep(ctx: &Ctx, seed: u64, modules: usize) -> SuiteResult {
    let mut t = Tally::new("comparison sweep", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..modules {
        let a = instances::integral_module_matrix(&mut rng, ctx, 4);
        let m = match SigmaModule::new(a, 1, ctx.r0()) {
            Ok(m) => m,
            Err(e) => {
                t.check(false, || format!("instance {k}: {e}"));
                continue;
            }
        };
        match compare_polygons(&m) {
            Ok(r) => {
                t.check(r.comparison != Comparison::Violation, || format!("instance {k}: violation {:?}", r.note));
                t.check(
                    matches!(r.comparison, Comparison::Equal | Comparison::SpecialAbove),
                    || format!("instance {k}: {} ({:?})", r.comparison.as_str(), r.note),
                );
                let want = (qi(m.rank() as i64), qi(m.degree()));
                t.check(r.generic.endpoint() == want, || format!("instance {k}: generic endpoint"));
                t.check(r.special.as_ref().map(NewtonPolygon::endpoint) == Some(want), || format!("instance {k}: special endpoint"));
            }
            Err(e) => t.check(false, || format!("instance {k} (rank {}): {e}", m.rank())),
        }
    }
    t.finish()
}

pub fn triangularization(ctx: &Ctx, seed: u64, count: usize, target: i64) -> SuiteResult {
    let mut t = Tally::new("triangularization", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = q(1, 2);
    for k in 0..count {
        let (a, d) = instances::triangularize_instance(&mut rng, ctx);
        match triangularize(&a, &d, &r, target) {
            Ok(nf) => {
                t.check(nf.cert.all_hold(), || format!("instance {k}: certificate {:?}", nf.cert.residual_valuations));
                t.check(nf.cert.gains.windows(2).all(|w| w[0] < w[1]), || format!("instance {k}: gains {:?}", nf.cert.gains));
            }
            Err(e) => t.check(false, || format!("instance {k}: {e}")),
        }
    }
    t.finish()
}

pub fn good_model(ctx: &Ctx, seed: u64, count: usize, target: i64) -> SuiteResult {
    let mut t = Tally::new("good model turnover", 60);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = q(1, 6);
    for k in 0..count {
        let (a, d) = instances::good_model_instance(&mut rng, ctx);
        match good_model_turnover(&a, &d, &r, target) {
            Ok(nf) => t.check(nf.cert.all_hold(), || format!("instance {k}: certificate {:?}", nf.cert.residual_valuations)),
            Err(e) => t.check(false, || format!("instance {k}: {e}")),
        }
    }
    t.finish()
}

pub fn h1(ctx: &Ctx, seed: u64, per_n: usize, target: i64) -> SuiteResult {
    let mut t = Tally::new("rank-one H1 solver", 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 1..=3 {
        for _ in 0..per_n {
            let x = instances::element(&mut rng, ctx, 0, 12, 2, 4);
            match solve_h1_rank1(n, &x, target) {
                Ok(s) => t.check(s.residual_valuation.is_none_or(|v| v >= target), || {
                    format!("n = {n}, x = {:?}: residual valuation {:?}", x.to_literal(), s.residual_valuation)
                }),
                Err(e) => t.check(false, || format!("n = {n}: {e}")),
            }
        }
    }
    t.finish()
}

/// Random slope multisets of length n summing to `total`.
fn random_polygon(rng: &mut ChaCha8Rng, n: usize, total: i64) -> NewtonPolygon {
    let mut s: Vec<Q> = (0..n - 1).map(|_| q(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect();
    let rest = qi(total) - s.iter().sum::<Q>();
    s.push(rest);
    NewtonPolygon::from_slopes(s)
}

pub fn filtration(ctx: &Ctx, seed: u64, trials: usize) -> SuiteResult {
    let mut t = Tally::new("filtration polygons", 5);
    let m = worked_example(ctx);
    let whole = special_hn_polygon_dwork(&m).ok();
    let parts = [NewtonPolygon::from_ints(&[0]), NewtonPolygon::from_ints(&[1])];
    t.check(whole.as_ref().map(|w| w.slope_list()) == Some(vec![q(1, 2); 2]), || "special polygon of the worked example".into());
    if let Some(w) = &whole {
        let v = filtration_check(w, &parts);
        t.check(v.as_ref().is_ok_and(|v| v.holds), || format!("filtration check {v:?}"));
        let reversed = filtration_check(&NewtonPolygon::from_ints(&[0, 1]), &[NewtonPolygon::from_slopes(vec![q(1, 2), q(1, 2)])]);
        t.check(reversed.as_ref().is_ok_and(|v| !v.holds), || "a lower polygon must fail the check".into());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let n = rng.gen_range(1..=5);
        let total = rng.gen_range(-6..=6);
        let a = random_polygon(&mut rng, n, total);
        let b = random_polygon(&mut rng, n, total);
        let c = random_polygon(&mut rng, n, total);
        let flat = NewtonPolygon::from_slopes(vec![qi(total) / qi(n as i64); n]);
        t.check(a.lies_above(&a).holds, || format!("reflexivity fails for {}", slopes_str(&a)));
        let (ab, ba) = (a.lies_above(&b).holds, b.lies_above(&a).holds);
        t.check(!(ab && ba) || a == b, || format!("antisymmetry fails for {} and {}", slopes_str(&a), slopes_str(&b)));
        let bc = b.lies_above(&c).holds;
        t.check(!(ab && bc) || a.lies_above(&c).holds, || "transitivity fails".into());
        t.check(flat.lies_above(&a).holds, || format!("the straight segment is not above {}", slopes_str(&a)));
        let parts: Vec<NewtonPolygon> = a.slope_list().into_iter().map(|s| NewtonPolygon::from_slopes(vec![s])).collect();
        t.check(filtration_check(&a, &parts).is_ok_and(|v| v.holds), || "a polygon must lie above its own pieces".into());
    }
    t.finish()
}

/// Every suite at the sizes used for acceptance, scaled by `instances`.
pub fn run_all(seed: u64, instances: usize) -> Vec<SuiteResult> {
    let ctx = RingContext::default_ctx();
    let scale = |full: usize| (full * instances).div_ceil(50).max(1);
    vec![
        golden(&ctx),
        multiplicativity(&ctx, seed, scale(200)),
        division(&ctx, seed.wrapping_add(1), scale(100), 16),
        slope_arithmetic(&ctx, seed.wrapping_add(2), scale(20)),
        comparison_sweep(&ctx, seed.wrapping_add(3), scale(50)),
        triangularization(&ctx, seed.wrapping_add(4), scale(25), 12),
        good_model(&ctx, seed.wrapping_add(5), scale(25), 12),
        h1(&ctx, seed.wrapping_add(6), scale(10), 16),
        filtration(&ctx, seed.wrapping_add(7), scale(100)),
    ]
}
