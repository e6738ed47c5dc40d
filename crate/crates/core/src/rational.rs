//! Exact rational helpers.
//!
//! Every duration, area and interval length in the crate is a
//! [`Rational`]. Parameters that are irrational in closed form (the golden
//! ratio based `mu`, the square-root based `rho`) enter exact computations
//! through the exact binary value of their `f64` approximation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn zero() -> Rational {
    Rational::zero()
}

pub fn one() -> Rational {
    Rational::one()
}

/// Exact value of a finite `f64`.
pub fn from_f64(v: f64) -> Option<Rational> {
    Rational::from_float(v)
}

pub fn to_f64(v: &Rational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Smallest integer `>= v`.
pub fn ceil_int(v: &Rational) -> BigInt {
    v.ceil().to_integer()
}

/// `ceil(v)` as a `u64`, saturating at zero for negative values.
pub fn ceil_u64(v: &Rational) -> u64 {
    let c = ceil_int(v);
    if c.is_negative() {
        0
    } else {
        c.to_u64().unwrap_or(u64::MAX)
    }
}

/// Canonical `"num/den"` rendering (always with a denominator).
pub fn format(v: &Rational) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

/// Parses `"num/den"`, a plain integer, or a finite decimal such as `"0.382"`.
/// Decimals are converted exactly (`"0.4"` is `2/5`).
pub fn parse(s: &str) -> Result<Rational, String> {
    let s = s.trim();
    if s.is_empty() {
        return Err("empty rational".into());
    }
    if let Some((n, d)) = s.split_once('/') {
        let num: BigInt = n
            .trim()
            .parse()
            .map_err(|_| format!("bad numerator in {s:?}"))?;
        let den: BigInt = d
            .trim()
            .parse()
            .map_err(|_| format!("bad denominator in {s:?}"))?;
        if den.is_zero() {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let negative = whole.trim_start().starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let w: BigInt = if whole_digits.is_empty() {
            BigInt::zero()
        } else {
            whole_digits
                .parse()
                .map_err(|_| format!("bad decimal {s:?}"))?
        };
        let f: BigInt = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let scale = num_traits::pow(BigInt::from(10), frac.len());
        let mag = Rational::new(w * &scale + f, scale);
        return Ok(if negative { -mag } else { mag });
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Rational::from_integer(n))
}

/// Rounds `v` up onto the grid `1/den` when its denominator exceeds `den`.
pub fn ceil_to_denominator(v: &Rational, den: u32) -> Rational {
    if v.denom() <= &BigInt::from(den) {
        return v.clone();
    }
    let scale = Rational::from_integer(BigInt::from(den));
    (v * &scale).ceil() / scale
}

/// Least common multiple of the denominators.
pub fn lcm_denominators<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}
