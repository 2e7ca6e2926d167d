//! Exact rational scalars: parsing, formatting and small helpers.
//!
//! All user-facing numbers are rationals written either as `p/q` or as a
//! decimal string (`-0.25` means -1/4 exactly). Floating point never enters
//! any computation; `to_f64` exists only for optional display columns.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Rat = BigRational;

/// Shorthand for small constants.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(num: i64) -> Rat {
    Rat::from_integer(BigInt::from(num))
}

/// Parses `p/q`, an integer, or a plain decimal such as `0.125`.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::parse("empty number"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n: BigInt = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad numerator in `{s}`")))?;
        let d: BigInt = den
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad denominator in `{s}`")))?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in `{s}`")));
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let (sign, int_digits) = match int_part.trim() {
            t if t.starts_with('-') => (-1, &t[1..]),
            t if t.starts_with('+') => (1, &t[1..]),
            t => (1, t),
        };
        if !int_digits.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
            || frac_part.is_empty()
        {
            return Err(Error::parse(format!("bad decimal `{s}`")));
        }
        let digits = format!("{int_digits}{frac_part}");
        let n: BigInt = digits
            .parse()
            .map_err(|_| Error::parse(format!("bad decimal `{s}`")))?;
        let den = BigInt::from(10u32).pow(frac_part.len() as u32);
        return Ok(Rat::new(n * BigInt::from(sign), den));
    }
    let n: BigInt = s
        .parse()
        .map_err(|_| Error::parse(format!("bad number `{s}`")))?;
    Ok(Rat::from_integer(n))
}

/// Canonical display form: `p` when the denominator is 1, else `p/q`.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Floor as a BigInt (toward negative infinity).
pub fn rat_floor(r: &Rat) -> BigInt {
    r.floor().numer().clone()
}

/// Best-effort f64 rendering for display-only columns.
pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Sum of a slice of rationals.
pub fn rat_sum<'a>(xs: impl IntoIterator<Item = &'a Rat>) -> Rat {
    let mut acc = Rat::zero();
    for x in xs {
        acc += x;
    }
    acc
}

pub fn is_nonneg(r: &Rat) -> bool {
    !r.is_negative()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rat("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rat("-2/4").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("7").unwrap(), rat_int(7));
        assert_eq!(parse_rat("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rat("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rat(" 3/9 ").unwrap(), rat(1, 3));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "1/0", "x", "1.2.3", "1.", "--2", "0x1f"] {
            assert!(parse_rat(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn formats_reduced() {
        assert_eq!(fmt_rat(&rat(2, 4)), "1/2");
        assert_eq!(fmt_rat(&rat(-6, 3)), "-2");
        assert_eq!(fmt_rat(&rat(0, 5)), "0");
        assert_eq!(fmt_rat(&rat(7, -2)), "-7/2");
    }

    #[test]
    fn floor_is_toward_negative_infinity() {
        assert_eq!(rat_floor(&rat(7, 2)), BigInt::from(3));
        assert_eq!(rat_floor(&rat(-7, 2)), BigInt::from(-4));
        assert_eq!(rat_floor(&rat_int(5)), BigInt::from(5));
    }
}
