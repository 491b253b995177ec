//! Ten-significant-digit decimal floating point.
//!
//! Every arithmetic operation, square root and cube root is correctly rounded
//! to ten significant digits with ties to even. This mirrors a computer
//! algebra system running at ten working digits, which is how published
//! iteration tables of this kind are usually produced.
//!
//! `exp`, `ln` and `powf` go through `f64` and are then rounded to ten digits;
//! they are faithful, not correctly rounded in every tie case.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};
use std::str::FromStr;

use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::format::positional;
use crate::scalar::Scalar;

/// Number of significant decimal digits carried by [`Decimal10`].
pub const DIGITS: u32 = 10;

const MANT_MIN: u128 = 1_000_000_000;
const MANT_LIM: u128 = 10_000_000_000;
const SPECIAL: i32 = i32::MAX;
const EXP_LIMIT: i32 = 1_000_000;

/// Decimal number `mant * 10^exp` with a ten-digit normalized mantissa.
///
/// Zero is `(0, 0)`. Non-finite values use `exp == i32::MAX` with `mant`
/// 0 (NaN), 1 (+inf) or -1 (-inf).
#[derive(Clone, Copy)]
pub struct Decimal10 {
    mant: i64,
    exp: i32,
}

fn pow10(n: u32) -> u128 {
    10u128.pow(n)
}

fn digit_count(mut n: u128) -> u32 {
    let mut d = 0;
    while n > 0 {
        n /= 10;
        d += 1;
    }
    d
}

fn icbrt(n: u128) -> u128 {
    let mut r = (n as f64).cbrt() as u128;
    while r > 0 && r * r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn isqrt(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r > 0 && r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

impl Decimal10 {
    pub const ZERO: Self = Self { mant: 0, exp: 0 };
    pub const ONE: Self = Self { mant: MANT_MIN as i64, exp: -9 };
    pub const NAN: Self = Self { mant: 0, exp: SPECIAL };
    pub const INFINITY: Self = Self { mant: 1, exp: SPECIAL };
    pub const NEG_INFINITY: Self = Self { mant: -1, exp: SPECIAL };

    /// Rounds `±mag * 10^exp` (plus a nonzero tail below `mag` when `sticky`)
    /// to ten digits, ties to even.
    fn round(negative: bool, mag: u128, exp: i32, sticky: bool) -> Self {
        if mag == 0 {
            return Self::ZERO;
        }
        let digits = digit_count(mag);
        let (mut q, mut e) = if digits <= DIGITS {
            debug_assert!(!sticky, "not enough guard digits");
            let shift = DIGITS - digits;
            (mag * pow10(shift), exp - shift as i32)
        } else {
            let drop = digits - DIGITS;
            let p = pow10(drop);
            let mut q = mag / p;
            let rem = mag % p;
            let half = p / 2;
            let up = match rem.cmp(&half) {
                Ordering::Greater => true,
                Ordering::Less => false,
                Ordering::Equal => sticky || q % 2 == 1,
            };
            if up {
                q += 1;
            }
            (q, exp + drop as i32)
        };
        if q == MANT_LIM {
            q = MANT_MIN;
            e += 1;
        }
        if e > EXP_LIMIT {
            return if negative { Self::NEG_INFINITY } else { Self::INFINITY };
        }
        if e < -EXP_LIMIT {
            return Self::ZERO;
        }
        let mant = q as i64;
        Self { mant: if negative { -mant } else { mant }, exp: e }
    }

    /// Builds `mant * 10^exp` rounded to ten digits.
    pub fn from_parts(mant: i64, exp: i32) -> Self {
        Self::round(mant < 0, mant.unsigned_abs() as u128, exp, false)
    }

    pub fn is_nan(self) -> bool {
        self.exp == SPECIAL && self.mant == 0
    }

    fn is_special(self) -> bool {
        self.exp == SPECIAL
    }

    fn is_zero_value(self) -> bool {
        self.mant == 0 && self.exp != SPECIAL
    }

    fn negative(self) -> bool {
        self.mant < 0
    }

    fn magnitude(self) -> u128 {
        self.mant.unsigned_abs() as u128
    }

    /// Ten-digit mantissa and exponent, `None` for non-finite values.
    pub fn parts(self) -> Option<(i64, i32)> {
        (!self.is_special()).then_some((self.mant, self.exp))
    }

    fn to_f64_exact(self) -> f64 {
        if self.is_special() {
            return match self.mant {
                0 => f64::NAN,
                1 => f64::INFINITY,
                _ => f64::NEG_INFINITY,
            };
        }
        if self.mant == 0 {
            return 0.0;
        }
        format!("{}e{}", self.mant, self.exp).parse().expect("valid float literal")
    }

    fn from_f64_nearest(value: f64) -> Self {
        if value.is_nan() {
            return Self::NAN;
        }
        if value.is_infinite() {
            return if value > 0.0 { Self::INFINITY } else { Self::NEG_INFINITY };
        }
        if value == 0.0 {
            return Self::ZERO;
        }
        let sci = format!("{:.9e}", value);
        let (mantissa, exponent) = sci.split_once('e').expect("exponent marker");
        let exponent: i32 = exponent.parse().expect("integer exponent");
        let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
        let mag: u128 = digits.parse().expect("digit string");
        Self::round(value < 0.0, mag, exponent - 9, false)
    }

    fn add_impl(self, other: Self) -> Self {
        if self.is_special() || other.is_special() {
            return Self::from_f64_nearest(self.to_f64_exact() + other.to_f64_exact());
        }
        if self.is_zero_value() {
            return other;
        }
        if other.is_zero_value() {
            return self;
        }
        let (hi, lo) = if self.exp >= other.exp { (self, other) } else { (other, self) };
        let shift = (hi.exp - lo.exp) as u32;
        if shift > 25 {
            // lo is below half an ulp of hi even after cancellation of one digit.
            return hi;
        }
        let a = hi.mant as i128 * pow10(shift) as i128;
        let b = lo.mant as i128;
        let sum = a + b;
        Self::round(sum < 0, sum.unsigned_abs(), lo.exp, false)
    }

    fn mul_impl(self, other: Self) -> Self {
        if self.is_special() || other.is_special() {
            return Self::from_f64_nearest(self.to_f64_exact() * other.to_f64_exact());
        }
        let mag = self.magnitude() * other.magnitude();
        Self::round(self.negative() != other.negative(), mag, self.exp + other.exp, false)
    }

    fn div_impl(self, other: Self) -> Self {
        if self.is_special() || other.is_special() || other.is_zero_value() {
            return Self::from_f64_nearest(self.to_f64_exact() / other.to_f64_exact());
        }
        if self.is_zero_value() {
            return Self::ZERO;
        }
        let num = self.magnitude() * pow10(12);
        let den = other.magnitude();
        let q = num / den;
        let sticky = !num.is_multiple_of(den);
        Self::round(self.negative() != other.negative(), q, self.exp - other.exp - 12, sticky)
    }

    /// Correctly rounded cube root.
    pub fn cbrt(self) -> Self {
        if self.is_special() {
            return Self::from_f64_nearest(self.to_f64_exact().cbrt());
        }
        if self.is_zero_value() {
            return Self::ZERO;
        }
        // Scale to a 34..36 digit integer with exponent divisible by three so
        // the integer root carries two guard digits.
        let shift = (24..=26).find(|s| (self.exp - s).rem_euclid(3) == 0).expect("residue");
        let n = self.magnitude() * pow10(shift as u32);
        let r = icbrt(n);
        let sticky = r * r * r != n;
        Self::round(self.negative(), r, (self.exp - shift) / 3, sticky)
    }

    /// Correctly rounded square root; NaN for negative input.
    pub fn sqrt(self) -> Self {
        if self.negative() {
            return Self::NAN;
        }
        if self.is_special() {
            return Self::from_f64_nearest(self.to_f64_exact().sqrt());
        }
        if self.is_zero_value() {
            return Self::ZERO;
        }
        let shift = (13..=14).find(|s| (self.exp - s).rem_euclid(2) == 0).expect("parity");
        let n = self.magnitude() * pow10(shift as u32);
        let r = isqrt(n);
        let sticky = r * r != n;
        Self::round(false, r, (self.exp - shift) / 2, sticky)
    }

    fn digit_string(self) -> String {
        self.magnitude().to_string()
    }
}

impl Default for Decimal10 {
    fn default() -> Self {
        Self::ZERO
    }
}

impl PartialEq for Decimal10 {
    fn eq(&self, other: &Self) -> bool {
        !self.is_nan() && !other.is_nan() && self.mant == other.mant && self.exp == other.exp
    }
}

impl PartialOrd for Decimal10 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.is_nan() || other.is_nan() {
            return None;
        }
        if self.is_special() || other.is_special() {
            return self.to_f64_exact().partial_cmp(&other.to_f64_exact());
        }
        let sign = |d: &Self| d.mant.signum();
        match sign(self).cmp(&sign(other)) {
            Ordering::Equal => {}
            ord => return Some(ord),
        }
        if self.mant == 0 {
            return Some(Ordering::Equal);
        }
        // Normalized mantissas: the exponent orders magnitudes.
        let by_magnitude = self.exp.cmp(&other.exp).then(self.magnitude().cmp(&other.magnitude()));
        Some(if self.negative() { by_magnitude.reverse() } else { by_magnitude })
    }
}

impl fmt::Debug for Decimal10 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Decimal10({})", self)
    }
}

impl fmt::Display for Decimal10 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&Scalar::to_significant(*self, DIGITS as usize))
    }
}

impl Add for Decimal10 {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.add_impl(rhs)
    }
}

impl Sub for Decimal10 {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.add_impl(-rhs)
    }
}

impl Mul for Decimal10 {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        self.mul_impl(rhs)
    }
}

impl Div for Decimal10 {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self.div_impl(rhs)
    }
}

/// Remainder is computed through `f64`; it is not used by the schemes.
impl Rem for Decimal10 {
    type Output = Self;
    fn rem(self, rhs: Self) -> Self {
        Self::from_f64_nearest(self.to_f64_exact() % rhs.to_f64_exact())
    }
}

impl Neg for Decimal10 {
    type Output = Self;
    fn neg(self) -> Self {
        if self.is_nan() {
            return self;
        }
        Self { mant: -self.mant, exp: self.exp }
    }
}

impl Zero for Decimal10 {
    fn zero() -> Self {
        Self::ZERO
    }
    fn is_zero(&self) -> bool {
        self.is_zero_value()
    }
}

impl One for Decimal10 {
    fn one() -> Self {
        Self::ONE
    }
}

/// Error returned when a string is not a decimal literal.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid decimal literal {0:?}")]
pub struct ParseDecimalError(String);

impl FromStr for Decimal10 {
    type Err = ParseDecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseDecimalError(s.to_string());
        let t = s.trim();
        let (negative, body) = match t.as_bytes().first() {
            Some(b'-') => (true, &t[1..]),
            Some(b'+') => (false, &t[1..]),
            _ => (false, t),
        };
        let (number, exponent) = match body.find(['e', 'E']) {
            Some(i) => (&body[..i], body[i + 1..].parse::<i32>().map_err(|_| err())?),
            None => (body, 0),
        };
        let (int_part, frac_part) = number.split_once('.').unwrap_or((number, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let all = format!("{int_part}{frac_part}");
        let trimmed = all.trim_start_matches('0');
        if trimmed.is_empty() {
            return Ok(Self::ZERO);
        }
        let mut exp = exponent - frac_part.len() as i32;
        let (kept, dropped) = trimmed.split_at(trimmed.len().min(30));
        let sticky = dropped.bytes().any(|b| b != b'0');
        exp += dropped.len() as i32;
        let mag: u128 = kept.parse().map_err(|_| err())?;
        Ok(Self::round(negative, mag, exp, sticky))
    }
}

impl Num for Decimal10 {
    type FromStrRadixErr = ParseDecimalError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        if radix != 10 {
            return Err(ParseDecimalError(format!("radix {radix} unsupported")));
        }
        s.parse()
    }
}

impl Signed for Decimal10 {
    fn abs(&self) -> Self {
        if self.negative() {
            -*self
        } else {
            *self
        }
    }

    fn abs_sub(&self, other: &Self) -> Self {
        if *self <= *other {
            Self::ZERO
        } else {
            *self - *other
        }
    }

    fn signum(&self) -> Self {
        if self.is_nan() {
            *self
        } else if self.mant > 0 {
            Self::ONE
        } else if self.mant < 0 {
            -Self::ONE
        } else {
            Self::ZERO
        }
    }

    fn is_positive(&self) -> bool {
        self.mant > 0
    }

    fn is_negative(&self) -> bool {
        self.mant < 0
    }
}

impl ToPrimitive for Decimal10 {
    fn to_i64(&self) -> Option<i64> {
        let v = self.to_f64_exact().trunc();
        (v.is_finite() && v.abs() < 9.2e18).then_some(v as i64)
    }

    fn to_u64(&self) -> Option<u64> {
        let v = self.to_f64_exact().trunc();
        (v.is_finite() && (0.0..1.8e19).contains(&v)).then_some(v as u64)
    }

    fn to_f64(&self) -> Option<f64> {
        Some(self.to_f64_exact())
    }
}

impl FromPrimitive for Decimal10 {
    fn from_i64(n: i64) -> Option<Self> {
        Some(Self::round(n < 0, n.unsigned_abs() as u128, 0, false))
    }

    fn from_u64(n: u64) -> Option<Self> {
        Some(Self::round(false, n as u128, 0, false))
    }

    fn from_f64(n: f64) -> Option<Self> {
        Some(Self::from_f64_nearest(n))
    }
}

impl Scalar for Decimal10 {
    fn cbrt(self) -> Self {
        Decimal10::cbrt(self)
    }

    fn sqrt(self) -> Self {
        Decimal10::sqrt(self)
    }

    fn exp(self) -> Self {
        Self::from_f64_nearest(self.to_f64_exact().exp())
    }

    fn ln(self) -> Self {
        Self::from_f64_nearest(self.to_f64_exact().ln())
    }

    fn powf(self, exponent: Self) -> Self {
        Self::from_f64_nearest(self.to_f64_exact().powf(exponent.to_f64_exact()))
    }

    fn is_finite(self) -> bool {
        !self.is_special()
    }

    fn lit(value: f64) -> Self {
        Self::from_f64_nearest(value)
    }

    fn as_f64(self) -> f64 {
        self.to_f64_exact()
    }

    /// Exact rounding of the stored decimal digits, half away from zero.
    fn to_significant(self, digits: usize) -> String {
        if self.is_special() {
            return crate::format::significant(self.to_f64_exact(), digits);
        }
        if self.mant == 0 {
            return positional(false, &"0".repeat(digits), 0);
        }
        let own = self.digit_string();
        let mut exponent = self.exp + DIGITS as i32 - 1;
        let shown = if digits >= own.len() {
            format!("{own}{}", "0".repeat(digits - own.len()))
        } else {
            let head: u128 = own[..digits].parse().expect("digits");
            let up = own.as_bytes()[digits] >= b'5';
            let mut q = head + u128::from(up);
            if q == pow10(digits as u32) {
                q /= 10;
                exponent += 1;
            }
            q.to_string()
        };
        positional(self.negative(), &shown, exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Decimal10 {
        s.parse().unwrap()
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(d("3").to_string(), "3.000000000");
        assert_eq!(d("12.999239547").to_string(), "12.99923955");
        assert_eq!(d("-0.00012345678901").to_string(), "-0.0001234567890");
        assert_eq!(d("1000").to_string(), "1000.000000");
        assert_eq!(d("0.000").to_string(), "0.000000000");
        assert!("abc".parse::<Decimal10>().is_err());
        assert!("1e".parse::<Decimal10>().is_err());
    }

    #[test]
    fn ties_to_even() {
        // 1.0000000005 sits exactly between two ten-digit neighbours.
        assert_eq!(d("1.0000000005"), d("1.000000000"));
        assert_eq!(d("1.0000000015"), d("1.000000002"));
        assert_eq!(d("1.00000000050000000000000000000001"), d("1.000000001"));
    }

    #[test]
    fn arithmetic_rounds_each_operation() {
        assert_eq!(d("1") / d("3"), d("0.3333333333"));
        assert_eq!(d("2") / d("3"), d("0.6666666667"));
        assert_eq!(d("0.5") * d("1000") + d("0.5") * d("14.45128320"), d("507.2256416"));
        assert_eq!(d("1") - d("1e-20"), d("1"));
        assert_eq!(d("1e10") - d("1"), d("9999999999"));
        assert_eq!(d("1.000000000") - d("0.9999999999"), d("1e-10"));
    }

    #[test]
    fn roots_are_correctly_rounded() {
        assert_eq!(d("27").cbrt(), d("3"));
        assert_eq!(d("-8").cbrt(), d("-2"));
        assert_eq!(d("3018").cbrt(), d("14.45128320"));
        assert_eq!(d("2").sqrt(), d("1.414213562"));
        assert_eq!(d("1e-7").cbrt().to_f64().unwrap(), 0.004641588834);
        assert!(d("-1").sqrt().is_nan());
    }

    #[test]
    fn ordering() {
        assert!(d("2") > d("1.999999999"));
        assert!(d("-2") < d("-1.999999999"));
        assert!(d("0.001") > d("-5"));
        assert!(d("1e5") > d("9e4"));
        assert!(Decimal10::NAN.partial_cmp(&Decimal10::ONE).is_none());
    }

    #[test]
    fn f64_round_trip() {
        let x = Decimal10::lit(0.1);
        assert_eq!(x, d("0.1"));
        assert_eq!(x.as_f64(), 0.1);
        assert_eq!(Decimal10::lit(1.0 / 3.0), d("0.3333333333"));
    }

    #[test]
    fn division_by_zero() {
        assert_eq!(Decimal10::ONE / Decimal10::ZERO, Decimal10::INFINITY);
        assert!((Decimal10::ZERO / Decimal10::ZERO).is_nan());
        assert!(!Scalar::is_finite(Decimal10::INFINITY));
    }

    #[test]
    fn fewer_significant_digits() {
        assert_eq!(d("3.848449787").to_significant(4), "3.848");
        assert_eq!(d("9.999999999").to_significant(3), "10.0");
        assert_eq!(d("2.5").to_significant(1), "3");
    }
}
