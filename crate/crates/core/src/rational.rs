//! Exact rational numbers for valuations, prices and probabilities.
//!
//! Mechanism logic never touches floating point. `f64` only appears in
//! [`Rational::to_f64`] and the decimal renderings used by reports.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

/// A canonical (reduced, positive denominator) arbitrary-precision rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Rational(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseRationalError {
    #[error("empty rational literal")]
    Empty,
    #[error("invalid integer `{0}` in rational literal")]
    BadInteger(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
}

impl Rational {
    /// `numer / denom`. Panics if `denom == 0`.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn max(self, other: Self) -> Self {
        std::cmp::max(self, other)
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    /// Smallest integer `>= self`.
    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }

    /// Rounds up to the grid `1/denom`, i.e. the least `m/denom >= self`.
    pub fn ceil_to_denominator(&self, denom: u64) -> Self {
        let scaled = &self.0 * BigRational::from_integer(denom.into());
        Rational::from_bigints(scaled.ceil().to_integer(), denom.into())
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            if self.0.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        })
    }

    /// Decimal rendering with `sig` significant digits, rounded half away
    /// from zero, derived from the exact value.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0".to_string();
        }
        let negative = self.is_negative();
        let n = self.numer().abs();
        let d = self.denom().clone();

        // Decimal exponent e with 10^e <= |x| < 10^(e+1).
        let mut e = n.to_string().len() as i64 - d.to_string().len() as i64;
        if cmp_scaled(&n, &d, e) == Ordering::Less {
            e -= 1;
        }

        let shift = sig as i64 - 1 - e;
        let mut q = round_scaled(&n, &d, shift);
        if q.to_string().len() > sig {
            e += 1;
            q = round_scaled(&n, &d, shift - 1);
        }
        let digits = q.to_string();
        debug_assert_eq!(digits.len(), sig);

        let body = if !(-6..21).contains(&e) {
            let (head, tail) = digits.split_at(1);
            let tail = tail.trim_end_matches('0');
            if tail.is_empty() {
                format!("{head}e{e}")
            } else {
                format!("{head}.{tail}e{e}")
            }
        } else if e < 0 {
            let frac = format!("{}{}", "0".repeat((-e - 1) as usize), digits);
            format!("0.{}", frac.trim_end_matches('0'))
        } else {
            let int_len = (e + 1) as usize;
            if int_len >= digits.len() {
                format!("{}{}", digits, "0".repeat(int_len - digits.len()))
            } else {
                let (int, frac) = digits.split_at(int_len);
                let frac = frac.trim_end_matches('0');
                if frac.is_empty() {
                    int.to_string()
                } else {
                    format!("{int}.{frac}")
                }
            }
        };
        if negative {
            format!("-{body}")
        } else {
            body
        }
    }
}

fn pow10(p: u32) -> BigInt {
    num_traits::pow(BigInt::from(10u8), p as usize)
}

/// Compares n/d with 10^e.
fn cmp_scaled(n: &BigInt, d: &BigInt, e: i64) -> Ordering {
    if e >= 0 {
        n.cmp(&(d * pow10(e as u32)))
    } else {
        (n * pow10((-e) as u32)).cmp(d)
    }
}

/// round(n/d * 10^shift), half away from zero, for n, d > 0.
fn round_scaled(n: &BigInt, d: &BigInt, shift: i64) -> BigInt {
    let (num, den) = if shift >= 0 {
        (n * pow10(shift as u32), d.clone())
    } else {
        (n.clone(), d * pow10((-shift) as u32))
    };
    let (q, r) = num.div_rem(&den);
    if r * 2u8 >= den {
        q + 1u8
    } else {
        q
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<u64> for Rational {
    fn from(n: u64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl From<usize> for Rational {
    fn from(n: usize) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }
}

impl From<BigRational> for Rational {
    fn from(r: BigRational) -> Self {
        Rational(r)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(ParseRationalError::Empty);
        }
        let parse_int = |t: &str| -> Result<BigInt, ParseRationalError> {
            let t = t.trim();
            let digits = t.strip_prefix(['-', '+']).unwrap_or(t);
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(ParseRationalError::BadInteger(t.to_string()));
            }
            t.parse::<BigInt>()
                .map_err(|_| ParseRationalError::BadInteger(t.to_string()))
        };
        match s.split_once('/') {
            None => Ok(Rational(BigRational::from_integer(parse_int(s)?))),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(ParseRationalError::ZeroDenominator(s.to_string()));
                }
                Ok(Rational(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;

        impl de::Visitor<'_> for Visitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational string such as \"10\" or \"21/4\", or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from_integer(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }
        }

        deserializer.deserialize_any(Visitor)
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self.small(), other.small()) {
            // Denominators are positive, so cross-multiplying keeps the order.
            (Some((a, b)), Some((c, d))) => (i128::from(a) * i128::from(d)).cmp(&(i128::from(c) * i128::from(b))),
            _ => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Rational {
    /// `(numer, denom)` when both fit in `i64`.
    fn small(&self) -> Option<(i64, i64)> {
        Some((self.0.numer().to_i64()?, self.0.denom().to_i64()?))
    }

    fn from_i128(n: i128, d: i128) -> Option<Rational> {
        if d == 0 {
            return None;
        }
        let g = n.gcd(&d);
        let (mut n, mut d) = (n / g, d / g);
        if d < 0 {
            n = -n;
            d = -d;
        }
        Some(Rational(BigRational::new_raw(n.into(), d.into())))
    }
}

fn small_add(a: (i64, i64), b: (i64, i64)) -> Option<Rational> {
    let n = (i128::from(a.0) * i128::from(b.1)).checked_add(i128::from(b.0) * i128::from(a.1))?;
    Rational::from_i128(n, i128::from(a.1) * i128::from(b.1))
}

fn small_sub(a: (i64, i64), b: (i64, i64)) -> Option<Rational> {
    let n = (i128::from(a.0) * i128::from(b.1)).checked_sub(i128::from(b.0) * i128::from(a.1))?;
    Rational::from_i128(n, i128::from(a.1) * i128::from(b.1))
}

fn small_mul(a: (i64, i64), b: (i64, i64)) -> Option<Rational> {
    Rational::from_i128(i128::from(a.0) * i128::from(b.0), i128::from(a.1) * i128::from(b.1))
}

fn small_div(a: (i64, i64), b: (i64, i64)) -> Option<Rational> {
    Rational::from_i128(i128::from(a.0) * i128::from(b.1), i128::from(a.1) * i128::from(b.0))
}

// Word-sized operands take an i128 path; anything larger (or a zero
// divisor, which then panics as usual) falls through to BigRational.
macro_rules! forward_binop {
    ($trait:ident, $method:ident, $small:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$method(&rhs)
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                if let (Some(a), Some(b)) = (self.small(), rhs.small()) {
                    if let Some(r) = $small(a, b) {
                        return r;
                    }
                }
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add, small_add);
forward_binop!(Sub, sub, small_sub);
forward_binop!(Mul, mul, small_mul);
forward_binop!(Div, div, small_div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        *self = &*self + rhs;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = &*self + &rhs;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl From<Rational> for BigRational {
    fn from(r: Rational) -> Self {
        r.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(q("10"), Rational::from_integer(10));
        assert_eq!(q("21/4"), Rational::new(21, 4));
        assert_eq!(q("6/4"), Rational::new(3, 2));
        assert_eq!(q(" -3/9 "), Rational::new(-1, 3));
        assert_eq!(q("0/7"), Rational::zero());
    }

    #[test]
    fn rejects_malformed_literals() {
        assert!(matches!(
            "1/0".parse::<Rational>(),
            Err(ParseRationalError::ZeroDenominator(_))
        ));
        for bad in ["", "abc", "1/", "/2", "1.5", "1/2/3", "--1"] {
            assert!(bad.parse::<Rational>().is_err(), "{bad:?} should fail");
        }
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Rational::new(8, 6).to_string(), "4/3");
        assert_eq!(Rational::new(-8, -4).to_string(), "2");
        assert_eq!(Rational::new(3, -9).to_string(), "-1/3");
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::new(8, 3).to_decimal(12), "2.66666666667");
        assert_eq!(Rational::new(83, 9).to_decimal(12), "9.22222222222");
        assert_eq!(Rational::from_integer(6).to_decimal(12), "6");
        assert_eq!(Rational::new(1, 3).to_decimal(12), "0.333333333333");
        assert_eq!(Rational::new(1, 1000).to_decimal(12), "0.001");
        assert_eq!(Rational::new(-5, 2).to_decimal(12), "-2.5");
        assert_eq!(Rational::new(9_999_999_999_999, 10).to_decimal(12), "1000000000000");
        assert_eq!(Rational::new(1, 3_000_000_000).to_decimal(3), "3.33e-10");
        assert_eq!(Rational::from_integer(123456).to_decimal(3), "123000");
        assert_eq!(Rational::zero().to_decimal(12), "0");
    }

    #[test]
    fn ceil_to_grid_is_an_upper_bound() {
        let x = Rational::new(1, 3);
        let up = x.ceil_to_denominator(1000);
        assert_eq!(up, Rational::new(334, 1000));
        assert!(up >= x);
        assert_eq!(Rational::new(1, 2).ceil_to_denominator(10), Rational::new(1, 2));
    }

    #[test]
    fn serde_uses_strings() {
        let v: Rational = serde_json_free_parse("\"21/4\"");
        assert_eq!(v, Rational::new(21, 4));
    }

    // Minimal string deserializer so the core crate does not need serde_json.
    fn serde_json_free_parse(s: &str) -> Rational {
        use serde::de::value::{Error, StrDeserializer};
        use serde::de::IntoDeserializer;
        let inner = s.trim_matches('"');
        let d: StrDeserializer<'_, Error> = inner.into_deserializer();
        Rational::deserialize(d).unwrap()
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(n in -1_000_000i64..1_000_000, d in 1i64..100_000) {
            let r = Rational::new(n, d);
            let back: Rational = r.to_string().parse().unwrap();
            prop_assert_eq!(back, r);
        }

        #[test]
        fn decimal_close_to_f64(n in 1i64..1_000_000_000, d in 1i64..1_000_000) {
            let r = Rational::new(n, d);
            let dec: f64 = r.to_decimal(12).parse().unwrap();
            let f = r.to_f64();
            prop_assert!((dec - f).abs() <= f * 1e-11);
        }

        #[test]
        fn fast_path_matches_bigrational(
            a in any::<i64>(), b in 1i64..=i64::MAX, c in any::<i64>(), d in 1i64..=i64::MAX, small in -50i64..50,
        ) {
            let x = Rational::new(a, b);
            let y = Rational::new(c, d);
            let z = Rational::new(small, 7);
            for (p, q) in [(&x, &y), (&x, &z), (&z, &y)] {
                let (bp, bq) = (&p.0, &q.0);
                prop_assert_eq!(&(p + q).0, &(bp + bq));
                prop_assert_eq!(&(p - q).0, &(bp - bq));
                prop_assert_eq!(&(p * q).0, &(bp * bq));
                if !q.is_zero() {
                    prop_assert_eq!(&(p / q).0, &(bp / bq));
                }
                prop_assert_eq!(p.cmp(q), bp.cmp(bq));
            }
        }
    }
}
