//! Exact rationals used for radii, slopes and weighted valuations.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

/// Radii, slopes and valuations are small, so `i128` numerators and
/// denominators are ample; arithmetic panics rather than wraps on overflow.
pub type Q = Ratio<i128>;

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(n as i128)
}

/// Parses `"a"`, `"-a"` or `"a/b"`.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: i128 = num.parse().map_err(|_| format!("bad rational numerator in {s:?}"))?;
    let d: i128 = den.parse().map_err(|_| format!("bad rational denominator in {s:?}"))?;
    if d.is_zero() {
        return Err(format!("zero denominator in {s:?}"));
    }
    Ok(Q::new(n, d))
}

/// `"a"` for integers, `"a/b"` otherwise.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn floor_q(x: &Q) -> i128 {
    x.numer().div_floor(x.denom())
}

pub fn ceil_q(x: &Q) -> i128 {
    x.numer().div_ceil(x.denom())
}

pub fn abs_q(x: &Q) -> Q {
    x.abs()
}

/// Midpoint of two rationals.
pub fn mid(a: &Q, b: &Q) -> Q {
    (a + b) / Q::from_integer(2)
}

pub mod serde_q {
    //! Serde adapter writing rationals as `"a/b"` strings.
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        match v {
            serde_json::Value::String(s) => parse_q(&s).map_err(serde::de::Error::custom),
            serde_json::Value::Number(n) => n
                .as_i64()
                .map(|i| Q::from_integer(i as i128))
                .ok_or_else(|| serde::de::Error::custom("rational must be an integer or \"a/b\"")),
            _ => Err(serde::de::Error::custom("rational must be an integer or \"a/b\"")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        for s in ["0", "1", "-3", "1/2", "-7/5", "6/4"] {
            let x = parse_q(s).unwrap();
            assert_eq!(parse_q(&fmt_q(&x)).unwrap(), x);
        }
        assert_eq!(fmt_q(&parse_q("6/4").unwrap()), "3/2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn floors_and_ceils() {
        assert_eq!(floor_q(&q(-3, 2)), -2);
        assert_eq!(ceil_q(&q(-3, 2)), -1);
        assert_eq!(ceil_q(&q(4, 2)), 2);
    }
}
