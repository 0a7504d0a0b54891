//! Exact rational numbers.
//!
//! Every coefficient, bound and threshold in the crate is a [`Rational`];
//! there is no floating point anywhere.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub use num_rational::BigRational as Rational;

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `n / d`, reduced. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Formats as `"n"` for integers and `"p/q"` otherwise.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parses `"n"`, `"-n"`, `"p/q"` or `"-p/q"`. Decimal notation is rejected.
pub fn parse_rational(text: &str) -> Option<Rational> {
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), Some(d.trim())),
        None => (text, None),
    };
    let valid_int = |s: &str, signed: bool| {
        let digits = if signed {
            s.strip_prefix('-').unwrap_or(s)
        } else {
            s
        };
        !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit())
    };
    if !valid_int(num, true) {
        return None;
    }
    let numer: BigInt = num.parse().ok()?;
    let denom: BigInt = match den {
        Some(d) if valid_int(d, false) => d.parse().ok()?,
        Some(_) => return None,
        None => BigInt::one(),
    };
    if denom.is_zero() {
        return None;
    }
    Some(Rational::new(numer, denom))
}

/// Least common multiple of the denominators, always positive.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()))
}

/// Greatest common divisor of the numerators of integer values; zero if all are zero.
pub fn numerator_gcd<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, q| acc.gcd(&q.numer().abs()))
}

pub fn max_rational(a: &Rational, b: &Rational) -> Rational {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formats_integers_and_fractions() {
        assert_eq!(format_rational(&int(-2)), "-2");
        assert_eq!(format_rational(&ratio(6, 4)), "3/2");
        assert_eq!(format_rational(&ratio(3, -6)), "-1/2");
    }

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3/2"), Some(ratio(3, 2)));
        assert_eq!(parse_rational("-2"), Some(int(-2)));
        assert_eq!(parse_rational("4/8"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("1.5"), None);
        assert_eq!(parse_rational("1/-2"), None);
        assert_eq!(parse_rational(""), None);
    }

    #[test]
    fn lcm_of_denominators() {
        let v = [ratio(1, 2), ratio(2, 3), int(5)];
        assert_eq!(denominator_lcm(&v), BigInt::from(6));
    }

    proptest! {
        #[test]
        fn addition_matches_cross_multiplication(
            p in -1000i64..1000, q in 1i64..1000, r in -1000i64..1000, s in 1i64..1000
        ) {
            let sum = ratio(p, q) + ratio(r, s);
            let expected_num = BigInt::from(p) * BigInt::from(s) + BigInt::from(r) * BigInt::from(q);
            let expected_den = BigInt::from(q) * BigInt::from(s);
            prop_assert_eq!(sum.numer() * &expected_den, expected_num * sum.denom());
            prop_assert!(sum.denom().is_positive());
            prop_assert!(sum.numer().gcd(sum.denom()).is_one());
        }

        #[test]
        fn format_parse_round_trip(p in -100000i64..100000, q in 1i64..1000) {
            let value = ratio(p, q);
            prop_assert_eq!(parse_rational(&format_rational(&value)), Some(value));
        }
    }
}
