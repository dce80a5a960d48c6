//! Small helpers around `BigRational`: parsing, formatting and integer scaling.

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{invalid, Result};

pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rat {
    BigRational::from_integer(BigInt::from(v))
}

/// Parses `"a/b"`, an integer, or a plain decimal such as `"0.3"` or `"-1.25e-2"` exactly.
pub fn parse_rational(text: &str) -> Result<Rat> {
    let s = text.trim();
    if s.is_empty() {
        return invalid("empty rational");
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n.trim().parse().map_err(|_| bad(text))?;
        let den: BigInt = d.trim().parse().map_err(|_| bad(text))?;
        if den.is_zero() {
            return invalid(format!("zero denominator in {text:?}"));
        }
        return Ok(BigRational::new(num, den));
    }
    parse_decimal(s).ok_or_else(|| bad(text))
}

fn bad(text: &str) -> crate::error::Error {
    crate::error::Error::Invalid(format!("cannot parse {text:?} as a rational"))
}

fn parse_decimal(s: &str) -> Option<Rat> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{whole}{frac}");
    let mut num: BigInt = if all.is_empty() { BigInt::zero() } else { all.parse().ok()? };
    if neg {
        num = -num;
    }
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10u8);
    Some(if scale >= 0 {
        BigRational::from_integer(num * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(num, num_traits::pow(ten, (-scale) as usize))
    })
}

/// `"num/den"`, or just `"num"` for integers.
pub fn format_rational(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn to_f64(r: &Rat) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Fall back to scaling by bit length for very large numerators or denominators.
    let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
    let n = r.numer().abs();
    let d = r.denom().clone();
    let (n, d) = if shift > 0 { (n, d << shift as usize) } else { (n << (-shift) as usize, d) };
    let m = BigRational::new(n, d).to_f64().unwrap_or(f64::NAN);
    let v = m * 2f64.powi(shift as i32);
    if r.is_negative() {
        -v
    } else {
        v
    }
}

pub fn log2_biguint(v: &BigUint) -> f64 {
    if v.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = v.bits();
    if bits <= 1000 {
        return v.to_f64().map(f64::log2).unwrap_or(f64::NAN);
    }
    let shift = bits - 64;
    let top = (v >> shift).to_f64().unwrap_or(f64::NAN);
    top.log2() + shift as f64
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rat>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Scales every value by `scale` and returns the results as integers.
pub fn scaled_integers<'a>(values: impl IntoIterator<Item = &'a Rat>, scale: &BigInt) -> Vec<BigInt> {
    values
        .into_iter()
        .map(|v| {
            let s = v * BigRational::from_integer(scale.clone());
            debug_assert!(s.is_integer());
            s.to_integer()
        })
        .collect()
}

pub fn to_biguint(v: &BigInt) -> Option<BigUint> {
    match v.sign() {
        Sign::Minus => None,
        _ => Some(v.magnitude().clone()),
    }
}

/// Formats a real with 12 significant digits, trimming trailing zeros.
pub fn format_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&mag) {
        let s = format!("{:.11e}", x);
        let (m, e) = s.split_once('e').unwrap();
        return format!("{}e{}", trim_zeros(m), e);
    }
    let decimals = (11 - mag).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}
