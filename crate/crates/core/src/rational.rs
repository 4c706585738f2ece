//! Exact rationals used by every formula in the crate.

use core::fmt;
use core::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

/// Exact rational number.
pub type Q = Ratio<i128>;

/// Builds `num/den` in lowest terms. Panics on a zero denominator.
pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn int(n: i128) -> Q {
    Q::from_integer(n)
}

/// `Some(n)` when `x` is an integer.
pub fn as_integer(x: &Q) -> Option<i128> {
    x.is_integer().then(|| x.to_integer())
}

pub fn floor(x: &Q) -> i128 {
    x.numer().div_floor(x.denom())
}

pub fn ceil(x: &Q) -> i128 {
    x.numer().div_ceil(x.denom())
}

pub fn to_f64(x: &Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Integer power by repeated squaring.
pub fn pow(base: Q, mut exp: u32) -> Q {
    let mut acc = Q::one();
    let mut b = base;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= b;
        }
        b = b * b;
        exp >>= 1;
    }
    acc
}

pub fn min(a: Q, b: Q) -> Q {
    if a <= b {
        a
    } else {
        b
    }
}

/// Parses `"a/b"`, `"a"`, or a terminating decimal such as `"0.25"`.
pub fn parse(s: &str) -> Result<Q, ParseRationalError> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = i128::from_str(n.trim()).map_err(|_| ParseRationalError)?;
        let d = i128::from_str(d.trim()).map_err(|_| ParseRationalError)?;
        if d.is_zero() {
            return Err(ParseRationalError);
        }
        return Ok(q(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || frac.len() > 30 || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseRationalError);
        }
        let negative = whole.starts_with('-');
        let w = if whole.is_empty() || whole == "-" {
            0
        } else {
            i128::from_str(whole).map_err(|_| ParseRationalError)?
        };
        let scale = 10i128.pow(frac.len() as u32);
        let f = i128::from_str(frac).map_err(|_| ParseRationalError)?;
        let magnitude = q(w.abs() * scale + f, scale);
        return Ok(if negative { -magnitude } else { magnitude });
    }
    i128::from_str(s).map(int).map_err(|_| ParseRationalError)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseRationalError;

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("expected a rational like 3/8, 2 or 0.375")
    }
}

impl core::error::Error for ParseRationalError {}

/// Formats as `num/den` (or `num` when the denominator is 1).
pub struct Frac<'a>(pub &'a Q);

impl fmt::Display for Frac<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

pub fn is_nonnegative(x: &Q) -> bool {
    !x.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("3/8"), Ok(q(3, 8)));
        assert_eq!(parse(" 2 "), Ok(int(2)));
        assert_eq!(parse("0.375"), Ok(q(3, 8)));
        assert_eq!(parse("-1.5"), Ok(q(-3, 2)));
        assert!(parse("1/0").is_err());
        assert!(parse("x").is_err());
        assert!(parse("1.").is_err());
    }

    #[test]
    fn floor_ceil_negative() {
        assert_eq!(floor(&q(-3, 2)), -2);
        assert_eq!(ceil(&q(-3, 2)), -1);
        assert_eq!(floor(&q(3, 2)), 1);
        assert_eq!(ceil(&q(3, 2)), 2);
        assert_eq!(ceil(&int(2)), 2);
    }

    #[test]
    fn pow_matches_product() {
        assert_eq!(pow(q(3, 4), 4), q(81, 256));
        assert_eq!(pow(q(3, 4), 0), int(1));
    }
}
