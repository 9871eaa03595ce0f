//! Exact rational arithmetic used throughout: ratios like α and job densities
//! are never represented as floats, and every ceiling involving Euler's number
//! is computed under two certified rational brackets that must agree.

use num_rational::Ratio;
use thiserror::Error;

use crate::domain::TimeStep;

/// Exact rational number. i128 components leave ample headroom for products
/// like `E_NUM_UPPER * job_count`.
pub type Rational = Ratio<i128>;

/// Certified bracket around e: `E_NUM_LOWER / E_DEN < e < E_NUM_UPPER / E_DEN`.
pub const E_NUM_LOWER: i128 = 2_718_281_828_459_045;
pub const E_NUM_UPPER: i128 = 2_718_281_828_459_046;
pub const E_DEN: i128 = 1_000_000_000_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("ceil(e * {x}) differs between certified e bounds: {lower} vs {upper}")]
    CertifiedCeilMismatch {
        x: Rational,
        lower: i128,
        upper: i128,
    },
    #[error("ceil(e * x) requires x >= 0, got {x}")]
    NegativeArgument { x: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseRatioError {
    #[error("empty fraction string")]
    Empty,
    #[error("`{0}` is not an integer (decimals are rejected; write fractions as p/q)")]
    InvalidInteger(String),
    #[error("denominator must be positive in `{0}`")]
    NonPositiveDenominator(String),
    #[error("too many `/` in `{0}`")]
    TooManySlashes(String),
}

pub fn e_lower() -> Rational {
    Ratio::new(E_NUM_LOWER, E_DEN)
}

pub fn e_upper() -> Rational {
    Ratio::new(E_NUM_UPPER, E_DEN)
}

pub fn rational(num: i64, den: i64) -> Rational {
    Ratio::new(num as i128, den as i128)
}

pub fn from_int(value: TimeStep) -> Rational {
    Ratio::from_integer(value as i128)
}

pub fn ceil_to_int(x: &Rational) -> i64 {
    x.ceil().to_integer() as i64
}

pub fn floor_to_int(x: &Rational) -> i64 {
    x.floor().to_integer() as i64
}

/// `ceil(e * x)` for rational `x >= 0`, evaluated under both certified bounds
/// of e. A disagreement between the bounds is a hard error, never a silently
/// chosen side.
pub fn ceil_e_times(x: &Rational) -> Result<i64, ExactError> {
    if *x < Ratio::from_integer(0) {
        return Err(ExactError::NegativeArgument { x: *x });
    }
    let lower = ceil_div(E_NUM_LOWER * x.numer(), E_DEN * x.denom());
    let upper = ceil_div(E_NUM_UPPER * x.numer(), E_DEN * x.denom());
    if lower != upper {
        return Err(ExactError::CertifiedCeilMismatch {
            x: *x,
            lower,
            upper,
        });
    }
    Ok(lower as i64)
}

/// Ceiling division for a positive denominator, sign-correct in the numerator.
pub fn ceil_div(num: i128, den: i128) -> i128 {
    debug_assert!(den > 0);
    (num + den - 1).div_euclid(den)
}

/// Parses an exact fraction string: `p/q` or a bare integer `p`.
pub fn parse_ratio(s: &str) -> Result<Rational, ParseRatioError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseRatioError::Empty);
    }
    let mut parts = s.split('/');
    let num_str = parts.next().ok_or(ParseRatioError::Empty)?;
    let num: i128 = num_str
        .trim()
        .parse()
        .map_err(|_| ParseRatioError::InvalidInteger(num_str.to_string()))?;
    let den: i128 = match parts.next() {
        None => 1,
        Some(den_str) => den_str
            .trim()
            .parse()
            .map_err(|_| ParseRatioError::InvalidInteger(den_str.to_string()))?,
    };
    if parts.next().is_some() {
        return Err(ParseRatioError::TooManySlashes(s.to_string()));
    }
    if den <= 0 {
        return Err(ParseRatioError::NonPositiveDenominator(s.to_string()));
    }
    Ok(Ratio::new(num, den))
}

/// Formats a rational as `p/q` (or `p` when integral), inverse of [`parse_ratio`].
pub fn format_ratio(x: &Rational) -> String {
    if x.is_integer() {
        format!("{}", x.numer())
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}
