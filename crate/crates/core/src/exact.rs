//! Big-integer helpers shared by the exact weight construction.

use core::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

/// Field operations needed by the generic row solver.
pub(crate) trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn int(n: i64) -> Self;

    fn ratio(n: i64, d: i64) -> Self {
        Self::int(n) / Self::int(d)
    }

    fn zero() -> Self {
        Self::int(0)
    }
}

impl Scalar for f64 {
    fn int(n: i64) -> Self {
        n as f64
    }
}

impl Scalar for BigRational {
    fn int(n: i64) -> Self {
        BigRational::from_integer(BigInt::from(n))
    }

    fn ratio(n: i64, d: i64) -> Self {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }
}

/// Top `bits` bits of `|x|` as a float, plus the binary exponent dropped.
fn leading(x: &BigInt, bits: u64) -> (f64, i64) {
    let n = x.bits();
    let shift = n.saturating_sub(bits);
    let top = x.magnitude() >> shift;
    (top.to_f64().unwrap_or(f64::NAN), shift as i64)
}

/// `num / den` rounded to the nearest float (within a few ulp), for
/// operands far outside the float range.
pub(crate) fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    if num.is_zero() {
        return 0.0;
    }
    let negative = (num.sign() == Sign::Minus) != (den.sign() == Sign::Minus);
    let (a, ea) = leading(num, 112);
    let (b, eb) = leading(den, 112);
    let q = libm::scalbn(a / b, (ea - eb).clamp(i32::MIN as i64, i32::MAX as i64) as i32);
    if negative {
        -q
    } else {
        q
    }
}

/// A float mantissa with an unbounded binary exponent, for forming
/// ratios of integers far outside the float range.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Wide {
    m: f64,
    e: i64,
}

impl Wide {
    pub(crate) fn of(x: &BigInt) -> Wide {
        if x.is_zero() {
            return Wide { m: 0.0, e: 0 };
        }
        let (a, e) = leading(x, 64);
        let m = if x.sign() == Sign::Minus { -a } else { a };
        Wide { m, e }.norm()
    }

    pub(crate) fn float(x: f64) -> Wide {
        Wide { m: x, e: 0 }.norm()
    }

    fn norm(self) -> Wide {
        if self.m == 0.0 || !self.m.is_finite() {
            return self;
        }
        let (f, e) = libm::frexp(self.m);
        Wide { m: f, e: self.e + e as i64 }
    }

    pub(crate) fn mul(self, o: Wide) -> Wide {
        Wide { m: self.m * o.m, e: self.e + o.e }.norm()
    }

    pub(crate) fn div(self, o: Wide) -> Wide {
        Wide { m: self.m / o.m, e: self.e - o.e }.norm()
    }

    pub(crate) fn to_f64(self) -> f64 {
        libm::scalbn(self.m, self.e.clamp(-4000, 4000) as i32)
    }
}

#[cfg(test)]
pub(crate) fn big_pow(base: i64, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

/// Determinant of a 3x3 integer matrix.
pub(crate) fn det3(m: &[[BigInt; 3]; 3]) -> BigInt {
    let minor = |a: usize, b: usize, c: usize, d: usize| &m[1][a] * &m[2][b] - &m[1][c] * &m[2][d];
    &m[0][0] * minor(1, 2, 2, 1) - &m[0][1] * minor(0, 2, 2, 0) + &m[0][2] * minor(0, 1, 1, 0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_in_range_matches_float_division() {
        let n = BigInt::from(22i64);
        let d = BigInt::from(7i64);
        assert_eq!(ratio_to_f64(&n, &d), 22.0 / 7.0);
        assert_eq!(ratio_to_f64(&-n, &d), -22.0 / 7.0);
    }

    #[test]
    fn ratio_far_out_of_range() {
        let big = big_pow(3, 2000);
        let num = &big * BigInt::from(5);
        let den = &big * BigInt::from(4);
        assert_eq!(ratio_to_f64(&num, &den), 1.25);
        let x = ratio_to_f64(&big_pow(10, 400), &big_pow(10, 390));
        assert!((x / 1e10 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn determinant() {
        let m = [
            [BigInt::from(2), BigInt::from(0), BigInt::from(1)],
            [BigInt::from(1), BigInt::from(3), BigInt::from(2)],
            [BigInt::from(1), BigInt::from(1), BigInt::from(2)],
        ];
        assert_eq!(det3(&m), BigInt::from(6));
    }
}
