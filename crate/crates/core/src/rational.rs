//! Small helpers around `BigRational`: parsing, float conversion, logarithms
//! and the textual formats used in CSV output.

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"3"`, `"-3/4"`, `"0.125"` or `"1.5e-3"` into an exact rational.
pub fn parse(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::InvalidProfile(format!("cannot parse rational from {s:?}"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => {
            let e: i64 = s[i + 1..].parse().map_err(|_| bad())?;
            (&s[..i], e)
        }
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (ip, fp) = digits.split_once('.').unwrap_or((digits, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{ip}{fp}");
    let num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().map_err(|_| bad())? };
    let scale = exp - fp.len() as i64;
    let ten = BigInt::from(10u32);
    let mut r = if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        r = -r;
    }
    Ok(r)
}

/// Natural logarithm of a positive big integer, accurate to f64 precision
/// for arbitrarily large values.
pub fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Natural logarithm of a positive rational. Returns `-inf` for zero.
pub fn ln(x: &BigRational) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    assert!(x.is_positive(), "ln of a negative rational");
    let (_, n) = x.numer().clone().into_parts();
    let (_, d) = x.denom().clone().into_parts();
    ln_biguint(&n) - ln_biguint(&d)
}

/// Float value of a rational, correct even when numerator and denominator
/// individually overflow f64.
pub fn to_f64(x: &BigRational) -> f64 {
    if let (Some(n), Some(d)) = (x.numer().to_f64(), x.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && d != 0.0 {
            return n / d;
        }
    }
    if x.is_zero() {
        return 0.0;
    }
    let sign = if x.is_negative() { -1.0 } else { 1.0 };
    sign * ln(&x.abs()).exp()
}

/// Exact rational value of a finite double.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Smallest integer not below `x`.
pub fn ceil(x: &BigRational) -> BigInt {
    x.ceil().to_integer()
}

pub fn pow(x: &BigRational, e: u32) -> BigRational {
    num_traits::pow(x.clone(), e as usize)
}

/// `num/den` form with the sign carried by the numerator.
pub fn exact_string(x: &BigRational) -> String {
    if x.denom().is_one() {
        format!("{}/1", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Fixed 17-significant-digit scientific format; round-trips through `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Decimal rendering in the [`fmt_f64`] format. Values outside the `f64`
/// range are scaled by an exact power of ten first.
pub fn decimal_string(x: &BigRational) -> String {
    let v = to_f64(x);
    if x.is_zero() || (v.is_finite() && v.abs() >= f64::MIN_POSITIVE) {
        return fmt_f64(v);
    }
    let mut e = (ln(&x.abs()) / std::f64::consts::LN_10).floor() as i64;
    let pow10 = |k: i64| BigRational::from_integer(num_traits::pow(BigInt::from(10), k.unsigned_abs() as usize));
    let scaled = |e: i64| if e >= 0 { x / pow10(e) } else { x * pow10(e) };
    let mut mant = to_f64(&scaled(e));
    if mant.abs() >= 10.0 {
        e += 1;
        mant = to_f64(&scaled(e));
    } else if mant.abs() < 1.0 {
        e -= 1;
        mant = to_f64(&scaled(e));
    }
    let s = fmt_f64(mant);
    let (m, k) = s.split_once('e').unwrap_or((&s, "0"));
    format!("{m}e{}", e + k.parse::<i64>().unwrap_or(0))
}

pub fn is_nonnegative(x: &BigRational) -> bool {
    x.numer().sign() != Sign::Minus
}
