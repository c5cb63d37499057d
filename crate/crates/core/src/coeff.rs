//! Exact complex-rational coefficients.

use num_bigint::BigInt;
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::C64;

pub type Coeff = Complex<BigRational>;

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn from_ints(re: i64, im: i64) -> Coeff {
    Coeff::new(rat(re, 1), rat(im, 1))
}

pub fn real(r: BigRational) -> Coeff {
    Coeff::new(r, BigRational::zero())
}

pub fn imag(r: BigRational) -> Coeff {
    Coeff::new(BigRational::zero(), r)
}

pub fn one() -> Coeff {
    Coeff::one()
}

pub fn i() -> Coeff {
    Coeff::i()
}

/// `i^k` for any integer `k`.
pub fn i_pow(k: i64) -> Coeff {
    match k.rem_euclid(4) {
        0 => from_ints(1, 0),
        1 => from_ints(0, 1),
        2 => from_ints(-1, 0),
        _ => from_ints(0, -1),
    }
}

pub fn to_c64(c: &Coeff) -> C64 {
    C64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

pub fn scale(c: &Coeff, r: &BigRational) -> Coeff {
    Coeff::new(&c.re * r, &c.im * r)
}

fn fmt_rat(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Human-readable form such as `3/4`, `-i/8` or `(1/2-3/4i)`.
pub fn format(c: &Coeff) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (true, true) => "0".to_string(),
        (false, true) => fmt_rat(&c.re),
        (true, false) => {
            let mag = c.im.abs();
            let sign = if c.im.is_negative() { "-" } else { "" };
            if mag.is_one() {
                format!("{sign}i")
            } else {
                format!("{sign}{}i", fmt_rat(&mag))
            }
        }
        (false, false) => {
            let sign = if c.im.is_negative() { "-" } else { "+" };
            format!("({}{}{}i)", fmt_rat(&c.re), sign, fmt_rat(&c.im.abs()))
        }
    }
}

/// Numerator and denominator of a rational as `i64`, if they fit.
pub fn rat_parts(r: &BigRational) -> Option<(i64, i64)> {
    Some((r.numer().to_i64()?, r.denom().to_i64()?))
}
