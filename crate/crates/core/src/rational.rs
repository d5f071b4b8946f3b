use std::fmt;

use num_traits::{One, Zero};
use serde::{de, Deserialize, Deserializer, Serializer};

/// Exact rational used for every distance and cost in the crate.
pub type Rational = num_rational::Ratio<i64>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed rational {0:?}, expected \"p/q\" or \"p\"")]
pub struct ParseRationalError(pub String);

/// Parses `"p/q"` or a bare integer `"p"`. The result is reduced.
pub fn parse(s: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(s.to_string());
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: i64 = p.trim().parse().map_err(|_| err())?;
            let q: i64 = q.trim().parse().map_err(|_| err())?;
            if q == 0 {
                return Err(err());
            }
            Ok(Rational::new(p, q))
        }
        None => s.parse::<i64>().map(Rational::from_integer).map_err(|_| err()),
    }
}

/// Canonical text form, always `"p/q"` with `q > 0` and the fraction reduced.
pub fn format(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Smallest `2^i >= w` with integer `i >= 0`, returned with its exponent.
///
/// Requires `w >= 1`.
pub fn ceil_power_of_two(w: &Rational) -> Option<(u32, Rational)> {
    if *w < Rational::one() {
        return None;
    }
    let mut exp = 0u32;
    let mut p = Rational::one();
    while p < *w {
        p *= 2;
        exp += 1;
    }
    Some((exp, p))
}

pub fn is_power_of_two(w: &Rational) -> bool {
    w.is_integer() && *w.numer() > 0 && (*w.numer() as u64).is_power_of_two()
}

pub fn max(a: Rational, b: Rational) -> Rational {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}

/// Serde adapter for rationals stored as `"p/q"` strings.
pub mod serde_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(de::Error::custom)
    }
}

/// Display wrapper printing the canonical `"p/q"` form.
pub struct Exact<'a>(pub &'a Rational);

impl fmt::Display for Exact<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_both_forms() {
        assert_eq!(parse("3/2").unwrap(), Rational::new(3, 2));
        assert_eq!(parse("6/4").unwrap(), Rational::new(3, 2));
        assert_eq!(parse("7").unwrap(), Rational::from_integer(7));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn ceil_power_of_two_matches_definition() {
        let cases = [(1, 1, 0, 1), (3, 2, 1, 2), (3, 1, 2, 4), (5, 1, 3, 8), (4, 1, 2, 4)];
        for (p, q, e, v) in cases {
            let (exp, val) = ceil_power_of_two(&Rational::new(p, q)).unwrap();
            assert_eq!((exp, val), (e, Rational::from_integer(v)));
        }
        assert!(ceil_power_of_two(&Rational::new(1, 2)).is_none());
    }

    proptest! {
        #[test]
        fn format_parse_roundtrip(p in -10_000i64..10_000, q in 1i64..10_000) {
            let r = Rational::new(p, q);
            prop_assert_eq!(parse(&format(&r)).unwrap(), r);
        }

        #[test]
        fn rounding_stays_within_factor_two(p in 1i64..5_000, q in 1i64..100) {
            let w = Rational::new(p, q);
            prop_assume!(w >= Rational::one());
            let (_, r) = ceil_power_of_two(&w).unwrap();
            prop_assert!(r >= w);
            prop_assert!(r < w * 2);
        }
    }
}
