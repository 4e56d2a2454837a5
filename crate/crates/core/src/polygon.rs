//! Newton polygons as slope multisets, for elements and for Frobenius modules.
//!
//! Element polygons live in the (v, n) plane: vertices are partial-valuation
//! points, slopes are negated segment slopes, multiplicities are vertical
//! lengths, and slopes increase going up and to the left. Module polygons
//! start at the origin, multiplicities are horizontal lengths, and the
//! endpoint is (rank, degree).

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::rational::{fmt_q, parse_q, qi, Q};

/// Radius interval (lo, hi] or [lo, hi].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Q,
    pub hi: Q,
    pub lo_closed: bool,
}

impl Interval {
    /// (lo, hi].
    pub fn open_closed(lo: Q, hi: Q) -> Interval {
        Interval { lo, hi, lo_closed: false }
    }

    /// [lo, hi].
    pub fn closed(lo: Q, hi: Q) -> Interval {
        Interval { lo, hi, lo_closed: true }
    }

    /// (0, r].
    pub fn up_to(r: Q) -> Interval {
        Interval::open_closed(qi(0), r)
    }

    pub fn contains(&self, s: &Q) -> bool {
        (if self.lo_closed { *s >= self.lo } else { *s > self.lo }) && *s <= self.hi
    }

    /// True when `s` lies to the left of the interval.
    pub fn below(&self, s: &Q) -> bool {
        if self.lo_closed {
            *s < self.lo
        } else {
            *s <= self.lo
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo < qi(0) || self.lo > self.hi || (self.lo == self.hi && !self.lo_closed) {
            return Err(Error::InvalidArgument(format!(
                "bad radius interval {}{}, {}]",
                if self.lo_closed { "[" } else { "(" },
                fmt_q(&self.lo),
                fmt_q(&self.hi)
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolygonKind {
    Element,
    Module,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NewtonPolygon {
    pub kind: PolygonKind,
    /// Strictly increasing slopes with positive multiplicities.
    pub slopes: Vec<(Q, u64)>,
    /// Starting vertex: the bottom-right end of the retained hull for
    /// elements, the origin for modules.
    pub anchor: (i64, i64),
    pub interval: Option<Interval>,
    pub precision_limited: bool,
}

fn group(mut s: Vec<Q>) -> Vec<(Q, u64)> {
    s.sort();
    let mut out: Vec<(Q, u64)> = Vec::new();
    for x in s {
        match out.last_mut() {
            Some(last) if last.0 == x => last.1 += 1,
            _ => out.push((x, 1)),
        }
    }
    out
}

/// Vertices of the lower convex hull of `pts`, left to right. For each x
/// only the smallest y is kept.
pub fn lower_hull(pts: &[(i64, Q)]) -> Vec<(i64, Q)> {
    let mut v: Vec<(i64, Q)> = pts.to_vec();
    v.sort();
    v.dedup_by(|b, a| a.0 == b.0);
    let mut hull: Vec<(i64, Q)> = Vec::with_capacity(v.len());
    for pt in v {
        while hull.len() >= 2 {
            let (a, b) = (&hull[hull.len() - 2], &hull[hull.len() - 1]);
            // Drop b unless it lies strictly below segment a..pt.
            let lhs = (b.1 - a.1) * qi(pt.0 - a.0);
            let rhs = (pt.1 - a.1) * qi(b.0 - a.0);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    hull
}

/// Why `lies_above` failed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AboveReason {
    EndpointMismatch { upper: (Q, Q), lower: (Q, Q) },
    VertexBelow { x: Q, upper: Q, lower: Q },
}

impl AboveReason {
    pub fn code(&self) -> &'static str {
        match self {
            AboveReason::EndpointMismatch { .. } => "endpoint_mismatch",
            AboveReason::VertexBelow { .. } => "vertex_below",
        }
    }

    pub fn describe(&self) -> String {
        match self {
            AboveReason::EndpointMismatch { upper, lower } => format!(
                "endpoints ({}, {}) and ({}, {}) differ",
                fmt_q(&upper.0),
                fmt_q(&upper.1),
                fmt_q(&lower.0),
                fmt_q(&lower.1)
            ),
            AboveReason::VertexBelow { x, upper, lower } => {
                format!("at x = {} the first polygon is at {} below {}", fmt_q(x), fmt_q(upper), fmt_q(lower))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AboveVerdict {
    pub holds: bool,
    pub reason: Option<AboveReason>,
}

impl NewtonPolygon {
    /// Module polygon with the given slope multiset.
    pub fn from_slopes(slopes: Vec<Q>) -> NewtonPolygon {
        NewtonPolygon {
            kind: PolygonKind::Module,
            slopes: group(slopes),
            anchor: (0, 0),
            interval: None,
            precision_limited: false,
        }
    }

    pub fn from_ints(slopes: &[i64]) -> NewtonPolygon {
        Self::from_slopes(slopes.iter().map(|&s| qi(s)).collect())
    }

    /// Module polygon with the slopes of the lower hull of `pts`, re-anchored
    /// at the origin.
    pub fn module_from_points(pts: &[(i64, Q)]) -> NewtonPolygon {
        let hull = lower_hull(pts);
        let mut slopes = Vec::new();
        for w in hull.windows(2) {
            let s = (w[1].1 - w[0].1) / qi(w[1].0 - w[0].0);
            for _ in 0..(w[1].0 - w[0].0) {
                slopes.push(s);
            }
        }
        Self::from_slopes(slopes)
    }

    /// Slopes repeated by multiplicity, ascending.
    pub fn slope_list(&self) -> Vec<Q> {
        self.slopes.iter().flat_map(|&(s, m)| std::iter::repeat(s).take(m as usize)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.slopes.iter().map(|t| t.1).sum()
    }

    /// Module polygons: (rank, degree).
    pub fn endpoint(&self) -> (Q, Q) {
        self.vertices().last().copied().unwrap_or((qi(self.anchor.0), qi(self.anchor.1)))
    }

    /// Vertices regenerated from the anchor and slope multiset.
    pub fn vertices(&self) -> Vec<(Q, Q)> {
        let mut cur = (qi(self.anchor.0), qi(self.anchor.1));
        let mut out = vec![cur];
        for &(s, m) in &self.slopes {
            let m = qi(m as i64);
            cur = match self.kind {
                PolygonKind::Module => (cur.0 + m, cur.1 + s * m),
                PolygonKind::Element => (cur.0 - m / s, cur.1 + m),
            };
            out.push(cur);
        }
        out
    }

    /// Height of a module polygon at abscissa x in [0, rank].
    pub fn value_at(&self, x: &Q) -> Q {
        let v = self.vertices();
        for w in v.windows(2) {
            if *x >= w[0].0 && *x <= w[1].0 {
                return w[0].1 + (w[1].1 - w[0].1) * (x - w[0].0) / (w[1].0 - w[0].0);
            }
        }
        v[0].1
    }

    /// Multiset union.
    pub fn sum(&self, other: &NewtonPolygon) -> NewtonPolygon {
        let mut s = self.slope_list();
        s.extend(other.slope_list());
        let mut p = Self::from_slopes(s);
        p.precision_limited = self.precision_limited || other.precision_limited;
        p
    }

    pub fn sum_all(parts: &[NewtonPolygon]) -> NewtonPolygon {
        parts.iter().fold(Self::from_slopes(vec![]), |acc, p| acc.sum(p))
    }

    /// Applies `f` to every slope.
    pub fn map_slopes(&self, f: impl Fn(Q) -> Q) -> NewtonPolygon {
        Self::from_slopes(self.slope_list().into_iter().map(f).collect())
    }

    /// Whether `self` lies on or above `other` with the same endpoint.
    pub fn lies_above(&self, other: &NewtonPolygon) -> AboveVerdict {
        let (e1, e2) = (self.endpoint(), other.endpoint());
        if e1 != e2 {
            return AboveVerdict {
                holds: false,
                reason: Some(AboveReason::EndpointMismatch { upper: e1, lower: e2 }),
            };
        }
        let mut xs: Vec<Q> = self.vertices().into_iter().chain(other.vertices()).map(|v| v.0).collect();
        xs.sort();
        xs.dedup();
        for x in xs {
            let (a, b) = (self.value_at(&x), other.value_at(&x));
            if a < b {
                return AboveVerdict {
                    holds: false,
                    reason: Some(AboveReason::VertexBelow { x, upper: a, lower: b }),
                };
            }
        }
        AboveVerdict { holds: true, reason: None }
    }

    pub fn to_json(&self) -> Value {
        let slopes: Vec<Value> = self.slopes.iter().map(|(s, m)| json!([fmt_q(s), m])).collect();
        let mut v = json!({
            "kind": self.kind,
            "slopes": slopes,
            "anchor": [self.anchor.0, self.anchor.1],
            "interval": self.interval.as_ref().map(|i| json!([fmt_q(&i.lo), fmt_q(&i.hi)])),
            "precision_limited": self.precision_limited,
        });
        if let Some(i) = &self.interval {
            v["left_closed"] = json!(i.lo_closed);
        }
        v
    }

    pub fn from_json(v: &Value) -> Result<NewtonPolygon> {
        let bad = |m: &str| Error::Parse(format!("polygon: {m}"));
        let kind = match v.get("kind") {
            None => PolygonKind::Module,
            Some(k) => serde_json::from_value(k.clone()).map_err(|_| bad("unknown kind"))?,
        };
        let arr = v.get("slopes").and_then(Value::as_array).ok_or_else(|| bad("missing \"slopes\" array"))?;
        let mut slopes = Vec::new();
        for (i, item) in arr.iter().enumerate() {
            let pair = item.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad(&format!("slopes[{i}] is not a pair")))?;
            let s = match &pair[0] {
                Value::String(s) => parse_q(s).map_err(|e| bad(&format!("slopes[{i}]: {e}")))?,
                Value::Number(n) => qi(n.as_i64().ok_or_else(|| bad(&format!("slopes[{i}] is not an integer")))?),
                _ => return Err(bad(&format!("slopes[{i}] slope must be a string"))),
            };
            let m = pair[1].as_u64().filter(|&m| m > 0).ok_or_else(|| bad(&format!("slopes[{i}] multiplicity")))?;
            slopes.push((s, m));
        }
        if slopes.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(bad("slopes must be strictly increasing"));
        }
        let anchor = match v.get("anchor").and_then(Value::as_array) {
            Some(a) if a.len() == 2 => (
                a[0].as_i64().ok_or_else(|| bad("anchor"))?,
                a[1].as_i64().ok_or_else(|| bad("anchor"))?,
            ),
            _ => (0, 0),
        };
        let interval = match v.get("interval") {
            None | Some(Value::Null) => None,
            Some(Value::Array(a)) if a.len() == 2 => {
                let f = |x: &Value| -> Result<Q> {
                    x.as_str()
                        .map(parse_q)
                        .unwrap_or_else(|| x.as_i64().map(qi).ok_or_else(|| "not a rational".to_string()))
                        .map_err(|e| bad(&format!("interval: {e}")))
                };
                let lo_closed = v.get("left_closed").and_then(Value::as_bool).unwrap_or(false);
                Some(Interval { lo: f(&a[0])?, hi: f(&a[1])?, lo_closed })
            }
            _ => return Err(bad("interval must be a pair")),
        };
        let precision_limited = v.get("precision_limited").and_then(Value::as_bool).unwrap_or(false);
        Ok(NewtonPolygon { kind, slopes, anchor, interval, precision_limited })
    }
}

/// Outcome of comparing a whole polygon against a filtration's pieces.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiltrationVerdict {
    pub holds: bool,
    pub parts_sum: NewtonPolygon,
    pub reason: Option<AboveReason>,
}

/// Whether `whole` lies above the sum of the filtration pieces.
pub fn filtration_check(whole: &NewtonPolygon, parts: &[NewtonPolygon]) -> Result<FiltrationVerdict> {
    let sum = NewtonPolygon::sum_all(parts);
    if sum.endpoint() != whole.endpoint() {
        let (a, b) = (whole.endpoint(), sum.endpoint());
        return Err(Error::EndpointMismatch(format!(
            "whole ends at ({}, {}), pieces at ({}, {})",
            fmt_q(&a.0),
            fmt_q(&a.1),
            fmt_q(&b.0),
            fmt_q(&b.1)
        )));
    }
    let v = whole.lies_above(&sum);
    Ok(FiltrationVerdict { holds: v.holds, parts_sum: sum, reason: v.reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    fn poly(s: &[(i128, i128)]) -> NewtonPolygon {
        NewtonPolygon::from_slopes(s.iter().map(|&(a, b)| q(a, b)).collect())
    }

    #[test]
    fn sums_and_order() {
        let a = poly(&[(0, 1), (1, 1)]);
        let b = poly(&[(1, 2), (1, 2)]);
        assert_eq!(a.sum(&b), poly(&[(0, 1), (1, 2), (1, 2), (1, 1)]));
        assert!(b.lies_above(&a).holds);
        assert!(!a.lies_above(&b).holds);
        assert!(a.lies_above(&a).holds);
        let c = poly(&[(1, 1)]);
        let v = c.lies_above(&a);
        assert_eq!(v.reason.unwrap().code(), "endpoint_mismatch");
    }

    #[test]
    fn filtrations() {
        let whole = poly(&[(1, 2), (1, 2)]);
        let parts = [poly(&[(0, 1)]), poly(&[(1, 1)])];
        assert!(filtration_check(&whole, &parts).unwrap().holds);
        assert!(filtration_check(&whole, &[whole.clone()]).unwrap().holds);
        let other = poly(&[(0, 1), (1, 1)]);
        assert!(!filtration_check(&other, &[whole.clone()]).unwrap().holds);
        assert!(filtration_check(&whole, &[poly(&[(0, 1)])]).is_err());
    }

    #[test]
    fn hull_of_points() {
        let p = NewtonPolygon::module_from_points(&[(0, qi(0)), (1, qi(0)), (2, qi(1))]);
        assert_eq!(p, poly(&[(0, 1), (1, 1)]));
        let p = NewtonPolygon::module_from_points(&[(0, qi(0)), (1, qi(5)), (2, qi(1))]);
        assert_eq!(p, poly(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn json_round_trip() {
        let mut p = poly(&[(-1, 3), (2, 1)]);
        p.interval = Some(Interval::closed(q(1, 4), q(1, 2)));
        assert_eq!(NewtonPolygon::from_json(&p.to_json()).unwrap(), p);
    }
}
