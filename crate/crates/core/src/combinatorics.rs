//! Exact arbitrary-precision combinatorial primitives: binomial coefficients,
//! harmonic numbers, falling factorials and alternating binomial-harmonic sums.
//!
//! Everything here is exact rational or integer arithmetic; floating-point
//! conversion happens at the caller's boundary.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator.
pub type Rational = num_rational::BigRational;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinatoricsError {
    #[error("partial sum length {j_max} exceeds n = {n}")]
    JMaxExceedsN { n: u64, j_max: u64 },
}

/// Binomial coefficient C(n, k). Returns 0 for k < 0 or k > n, matching the
/// empty-term convention of the alternating sums built on top of it.
pub fn binomial(n: u64, k: i64) -> BigInt {
    if k < 0 || (k as u64) > n {
        return BigInt::zero();
    }
    let k = (k as u64).min(n - k as u64);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc *= n - j;
        acc /= j + 1; // exact at every step
    }
    acc
}

/// n! as a big integer.
pub fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for j in 2..=n {
        acc *= j;
    }
    acc
}

/// First-order harmonic number H_n = sum_{k=1}^{n} 1/k, with H_0 = 0.
pub fn harmonic(n: u64) -> Rational {
    let mut acc = Rational::zero();
    for k in 1..=n {
        acc += Rational::new(BigInt::one(), BigInt::from(k));
    }
    acc
}

/// Second-order harmonic number H_n^(2) = sum_{k=1}^{n} 1/k^2, with H_0^(2) = 0.
pub fn harmonic2(n: u64) -> Rational {
    let mut acc = Rational::zero();
    for k in 1..=n {
        acc += Rational::new(BigInt::one(), BigInt::from(k * k));
    }
    acc
}

/// Falling factorial x(x-1)...(x-m+1); the empty product (m = 0) is 1.
pub fn falling_factorial(x: &Rational, m: u64) -> Rational {
    let mut acc = Rational::one();
    for j in 0..m {
        acc *= x - Rational::from(BigInt::from(j));
    }
    acc
}

/// Exponent selector for [`alt_harmonic_sum`]: 1/k or 1/k^2 terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HarmonicPower {
    One,
    Two,
}

/// Partial alternating binomial-harmonic sum
/// sum_{k=1}^{j_max} (-1)^(k-1) / k^power * C(n, k).
///
/// The full sums (j_max = n) collapse to H_n for power 1 and to
/// (H_n^2 + H_n^(2)) / 2 for power 2; the closed-form moment formulas consume
/// the partial sums with j_max = p - 1.
pub fn alt_harmonic_sum(
    n: u64,
    j_max: u64,
    power: HarmonicPower,
) -> Result<Rational, CombinatoricsError> {
    if j_max > n {
        return Err(CombinatoricsError::JMaxExceedsN { n, j_max });
    }
    let mut acc = Rational::zero();
    for k in 1..=j_max {
        let den = match power {
            HarmonicPower::One => BigInt::from(k),
            HarmonicPower::Two => BigInt::from(k * k),
        };
        let mut term = Rational::new(binomial(n, k as i64), den);
        if k.is_multiple_of(2) {
            term = -term;
        }
        acc += term;
    }
    Ok(acc)
}

/// Convert a ratio of (possibly huge) big integers to f64 without overflowing
/// the intermediate conversions.
pub fn big_ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    assert!(!den.is_zero(), "zero denominator");
    let negative = num.is_negative() != den.is_negative();
    let num = num.abs();
    let den = den.abs();
    // Scale so the integer quotient carries ~64 significant bits, then
    // correct with an exact power of two.
    let shift = den.bits() as i64 + 64 - num.bits() as i64;
    let scaled = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    let mut q = 0.0f64;
    for (i, digit) in scaled.to_u64_digits().1.iter().enumerate() {
        q += (*digit as f64) * 2f64.powi(64 * i as i32);
    }
    let val = q * 2f64.powi(-shift as i32);
    if negative {
        -val
    } else {
        val
    }
}

/// f64 value of an exact rational.
pub fn rational_to_f64(r: &Rational) -> f64 {
    big_ratio_to_f64(r.numer(), r.denom())
}
