//! Exact rational lengths.
//!
//! Every distance, weight and offset in this crate is a [`Rational`]. Input
//! strings are either fractions `p/q` or finite decimals, both converted
//! without rounding.

use alloc::string::ToString;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `n / d` as a rational. Panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `2^e` for any integer exponent.
pub fn pow2(e: i64) -> Rational {
    let p = BigInt::from(2u8).pow(e.unsigned_abs());
    if e >= 0 {
        Rational::from_integer(p)
    } else {
        Rational::new(BigInt::one(), p)
    }
}

/// Largest `i` with `2^i <= r`. `r` must be positive.
pub fn floor_log2(r: &Rational) -> i64 {
    debug_assert!(r.is_positive());
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    // 2^(nb-1) <= numer < 2^nb and likewise for denom, so the answer is
    // nb - db or nb - db - 1.
    let guess = nb - db;
    if pow2(guess) <= *r {
        guess
    } else {
        guess - 1
    }
}

/// Largest `i` with `2^i < r`. `r` must be positive.
pub fn floor_log2_strict(r: &Rational) -> i64 {
    let f = floor_log2(r);
    if pow2(f) == *r {
        f - 1
    } else {
        f
    }
}

/// Smallest `i` with `2^i >= r`. `r` must be positive.
pub fn ceil_log2(r: &Rational) -> i64 {
    let f = floor_log2(r);
    if pow2(f) == *r {
        f
    } else {
        f + 1
    }
}

/// Parses `p/q`, an integer, or a finite decimal such as `-12.375`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let bad = || Error::ParseRational(s.to_string());
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p = parse_int(p.trim()).ok_or_else(bad)?;
        let q = parse_int(q.trim()).ok_or_else(bad)?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole
        .bytes()
        .chain(frac.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    let mut n = BigInt::zero();
    for b in whole.bytes().chain(frac.bytes()) {
        n = n * 10u8 + BigInt::from(b - b'0');
    }
    if neg {
        n = -n;
    }
    let scale = exp - frac.len() as i64;
    let ten = BigInt::from(10u8);
    let p = ten.pow(scale.unsigned_abs());
    Ok(if scale >= 0 {
        Rational::from_integer(n * p)
    } else {
        Rational::new(n, p)
    })
}

fn parse_int(s: &str) -> Option<BigInt> {
    let (sign, digits) = match s.as_bytes().first()? {
        b'-' => (Sign::Minus, &s[1..]),
        b'+' => (Sign::Plus, &s[1..]),
        _ => (Sign::Plus, s),
    };
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    let v = BigInt::parse_bytes(digits.as_bytes(), 10)?;
    Some(if sign == Sign::Minus { -v } else { v })
}

/// Nearest `f64`; used only for convenience renderings and for mixing with
/// floating-point values in the extension pipeline.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Ratio of huge integers: shift both down first.
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Least common multiple of the denominators of `values`.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
