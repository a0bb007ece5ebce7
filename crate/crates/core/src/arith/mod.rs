//! Exact arithmetic kernel.
//!
//! Rationals and integers come from GMP via `rug`; fixed-precision reals are
//! MPFR floats carrying their own precision. On top of that this module adds
//! the combinatorial primitives used throughout the crate, the polynomial type
//! [`VPoly`], and the formal ring ℚ[v, w]/(w² − 2pq) ⊗ Laurent(ε) used by the
//! symbolic expansion engine.

mod combinatorics;
mod poly;
mod series;

pub use combinatorics::{
    bernoulli_number, binomial, double_factorial, falling_factorial, falling_factorial_real,
    weighted_partitions, WeightedPartition,
};
pub use poly::VPoly;
pub use series::{AsymptoticSeries, RadicalCoeff};

pub use rug::{Float, Integer, Rational};

use rug::ops::Pow;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{ensure, Error, Result};

/// Floating scalar with explicit precision. The precision travels with the
/// value (MPFR semantics).
pub type PreciseReal = Float;

/// Working precision in bits (at least 64).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Precision(u32);

impl Precision {
    pub const DEFAULT: Precision = Precision(256);
    pub const MIN_BITS: u32 = 64;

    pub fn new(bits: u32) -> Result<Self> {
        ensure!(
            bits >= Self::MIN_BITS,
            "precision must be at least {} bits, got {bits}",
            Self::MIN_BITS
        );
        Ok(Precision(bits))
    }

    pub fn bits(self) -> u32 {
        self.0
    }

    pub fn doubled(self) -> Self {
        Precision(self.0 * 2)
    }

    /// Precision widened by `extra` guard bits.
    pub fn guarded(self, extra: u32) -> Self {
        Precision(self.0 + extra)
    }

    /// Number of decimal digits that are meaningful at this precision.
    pub fn decimal_digits(self) -> usize {
        (f64::from(self.0) * std::f64::consts::LOG10_2).floor() as usize
    }
}

impl Default for Precision {
    fn default() -> Self {
        Self::DEFAULT
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

pub fn real<T>(prec: Precision, value: T) -> Float
where
    Float: rug::Assign<T>,
{
    let mut f = Float::new(prec.bits());
    rug::Assign::assign(&mut f, value);
    f
}

pub fn rational_to_real(r: &Rational, prec: Precision) -> Float {
    Float::with_val(prec.bits(), r)
}

/// √(2pq), the numeric value of the formal radical `w`.
pub fn radical_w(p: &Rational, prec: Precision) -> Float {
    rational_to_real(&two_pq(p), prec).sqrt()
}

/// 2pq with q = 1 − p.
pub fn two_pq(p: &Rational) -> Rational {
    let q = Rational::from(1) - p;
    Rational::from(2) * p * q
}

pub fn complement(p: &Rational) -> Rational {
    Rational::from(1) - p
}

/// Validates 0 < p < 1.
pub fn check_probability(p: &Rational) -> Result<()> {
    ensure!(
        *p > 0 && *p < 1,
        "p must lie strictly between 0 and 1, got {p}"
    );
    Ok(())
}

/// Parses an exact rational literal: `a/b`, an integer, or a terminating
/// decimal such as `-0.25`.
pub fn parse_rational(literal: &str) -> Result<Rational> {
    let s = literal.trim();
    let err = |reason: &str| Error::Parse {
        literal: literal.to_string(),
        reason: reason.to_string(),
    };
    if let Some((num, den)) = s.split_once('/') {
        let num: Integer = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let den: Integer = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if den == 0 {
            return Err(err("zero denominator"));
        }
        return Ok(Rational::from((num, den)));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        let negative = int_part.trim_start().starts_with('-');
        let int_digits = int_part.trim_start_matches(['-', '+']);
        if !frac_part.chars().all(|c| c.is_ascii_digit())
            || !int_digits.chars().all(|c| c.is_ascii_digit())
            || (int_digits.is_empty() && frac_part.is_empty())
        {
            return Err(err("not a decimal literal"));
        }
        let digits = format!("{int_digits}{frac_part}");
        let mantissa: Integer = if digits.is_empty() {
            Integer::new()
        } else {
            digits.parse().map_err(|_| err("bad digits"))?
        };
        let scale = Integer::from(10).pow(frac_part.len() as u32);
        let r = Rational::from((mantissa, scale));
        return Ok(if negative { -r } else { r });
    }
    let n: Integer = s.parse().map_err(|_| err("not a rational literal"))?;
    Ok(Rational::from(n))
}

/// Parses a real literal (rational or decimal, with optional exponent) at the
/// given precision.
pub fn parse_real(literal: &str, prec: Precision) -> Result<Float> {
    if let Ok(r) = parse_rational(literal) {
        return Ok(rational_to_real(&r, prec));
    }
    let parsed = Float::parse(literal.trim()).map_err(|e| Error::Parse {
        literal: literal.to_string(),
        reason: e.to_string(),
    })?;
    Ok(Float::with_val(prec.bits(), parsed))
}

/// Fixed decimal rendering: `digits` significant digits in scientific form.
pub fn format_real(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}
