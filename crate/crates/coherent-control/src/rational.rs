//! Exact rational scalars and fraction-literal parsing.
//!
//! Every quantity in the finite engine is a [`Rational`] with arbitrary
//! precision; overflow cannot occur and equality is decidable. Input files
//! carry fractions as strings (`"1/6"`, `"-2"`); floating-point literals are
//! rejected so that no rounding can sneak into an exactness claim.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Builds `n/d` from machine integers.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Builds the integer rational `n`.
pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses an exact fraction literal: an optionally signed integer or a pair
/// `numer/denom`. Decimal points and exponents are rejected.
pub fn parse_fraction(text: &str) -> Result<Rational> {
    let s = text.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty fraction literal".into()));
    }
    if s.contains(['.', 'e', 'E']) {
        return Err(Error::Parse(format!(
            "floating-point literal {s:?} rejected: inputs must be exact fractions like \"1/6\""
        )));
    }
    let (numer, denom) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = numer
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in fraction {s:?}")))?;
    let d: BigInt = denom
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in fraction {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in fraction {s:?}")));
    }
    Ok(Rational::new(n, d))
}

/// Formats a rational as an exact fraction literal, the inverse of
/// [`parse_fraction`].
pub fn format_fraction(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Lossy conversion for display and Monte Carlo cross-checks.
pub fn to_f64(r: &Rational) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // Good enough for the magnitudes this crate produces.
    let nf: f64 = n.to_string().parse().unwrap_or(if n.is_negative() {
        f64::NEG_INFINITY
    } else {
        f64::INFINITY
    });
    let df: f64 = d.to_string().parse().unwrap_or(f64::INFINITY);
    nf / df
}
