//! Scalar abstraction shared by every scheme.
//!
//! All recursions, bounds and the delay-equation solver are written against
//! [`Scalar`], so the same code runs in `f32`, `f64` or in ten-digit decimal
//! arithmetic ([`Decimal10`](crate::Decimal10)).

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, Signed, ToPrimitive};

use crate::format;

/// Real scalar type usable by the schemes: `f32`, `f64` or `Decimal10`.
pub trait Scalar:
    Num + Signed + FromPrimitive + ToPrimitive + Copy + PartialOrd + Debug + Display + Send + Sync + 'static
{
    fn cbrt(self) -> Self;
    fn sqrt(self) -> Self;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn powf(self, exponent: Self) -> Self;
    fn is_finite(self) -> bool;

    /// Converts an `f64` literal, rounding to the nearest representable value.
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal must be representable")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Positional string rounded half away from zero to `digits` significant digits.
    fn to_significant(self, digits: usize) -> String {
        format::significant(self.as_f64(), digits)
    }

    fn larger(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

macro_rules! float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            fn cbrt(self) -> Self {
                num_traits::Float::cbrt(self)
            }

            fn sqrt(self) -> Self {
                num_traits::Float::sqrt(self)
            }

            fn exp(self) -> Self {
                num_traits::Float::exp(self)
            }

            fn ln(self) -> Self {
                num_traits::Float::ln(self)
            }

            fn powf(self, exponent: Self) -> Self {
                num_traits::Float::powf(self, exponent)
            }

            fn is_finite(self) -> bool {
                num_traits::Float::is_finite(self)
            }

            fn lit(value: f64) -> Self {
                value as $t
            }
        }
    };
}

float_scalar!(f32);
float_scalar!(f64);

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_root_of_27<S: Scalar>() -> S {
        S::lit(27.0).cbrt()
    }

    #[test]
    fn generic_cbrt() {
        assert_eq!(cube_root_of_27::<f64>(), 3.0);
        assert_eq!(cube_root_of_27::<f32>(), 3.0);
    }

    #[test]
    fn significant_digits_for_floats() {
        assert_eq!(12.999239547_f64.to_significant(10), "12.99923955");
        assert_eq!(3.0_f64.to_significant(10), "3.000000000");
    }

    #[test]
    fn maximum_picks_larger() {
        assert_eq!(2.0_f64.larger(3.0), 3.0);
        assert_eq!(3.0_f64.larger(-1.0), 3.0);
    }
}
