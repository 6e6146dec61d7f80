//! Exact rationals and their `p/q` text form.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

pub type Rational = num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid rational {0:?}")]
pub struct ParseRationalError(pub String);

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let t = text.trim();
    let err = || ParseRationalError(text.to_string());
    let (num, den) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| err())?;
    let den: BigInt = den.parse().map_err(|_| err())?;
    if den.is_zero() {
        return Err(err());
    }
    Ok(Rational::new(num, den))
}

/// `p/q` in lowest terms, or `p` when the denominator is one.
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn is_integer_one(q: &Rational) -> bool {
    q.is_one()
}
