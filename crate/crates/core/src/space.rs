//! Normed-space points: scalars, fixed-dimension vectors and grid functions,
//! all measured in the sup (Chebyshev) norm.

use crate::dde::GridFunction;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub enum Point<S> {
    Scalar(S),
    Vector(Vec<S>),
    Grid(GridFunction<S>),
}

/// Nonnegative distance or norm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormValue<S>(S);

impl<S: Scalar> NormValue<S> {
    pub fn value(self) -> S {
        self.0
    }
}

impl<S: Scalar> Point<S> {
    pub fn kind(&self) -> String {
        match self {
            Point::Scalar(_) => "scalar".to_string(),
            Point::Vector(v) => format!("vector[{}]", v.len()),
            Point::Grid(g) => format!("grid[{} nodes from {} step {}]", g.len(), g.t_start(), g.step()),
        }
    }

    pub fn components(&self) -> &[S] {
        match self {
            Point::Scalar(s) => std::slice::from_ref(s),
            Point::Vector(v) => v,
            Point::Grid(g) => g.values(),
        }
    }

    pub fn as_scalar(&self) -> Option<S> {
        match self {
            Point::Scalar(s) => Some(*s),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridFunction<S>> {
        match self {
            Point::Grid(g) => Some(g),
            _ => None,
        }
    }

    /// Index of the first non-finite component, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.components().iter().position(|c| !c.is_finite())
    }

    pub fn sup_norm(&self) -> NormValue<S> {
        NormValue(self.components().iter().fold(S::zero(), |m, c| m.larger(c.abs())))
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        let compatible = match (self, other) {
            (Point::Scalar(_), Point::Scalar(_)) => true,
            (Point::Vector(a), Point::Vector(b)) => a.len() == b.len(),
            (Point::Grid(a), Point::Grid(b)) => a.same_geometry(b),
            _ => false,
        };
        if compatible {
            Ok(())
        } else {
            Err(Error::Structural { left: self.kind(), right: other.kind() })
        }
    }

    fn zip_with(&self, other: &Self, f: impl Fn(S, S) -> S) -> Point<S> {
        match (self, other) {
            (Point::Scalar(a), Point::Scalar(b)) => Point::Scalar(f(*a, *b)),
            (Point::Vector(a), Point::Vector(b)) => {
                Point::Vector(a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect())
            }
            (Point::Grid(a), Point::Grid(b)) => {
                let values = a.values().iter().zip(b.values()).map(|(x, y)| f(*x, *y)).collect();
                Point::Grid(a.with_values(values))
            }
            _ => unreachable!("compatibility checked by caller"),
        }
    }
}

/// `(1 - weight) * a + weight * b`, evaluated component-wise in that order.
pub fn affine_combine<S: Scalar>(a: &Point<S>, b: &Point<S>, weight: S) -> Result<Point<S>> {
    a.check_compatible(b)?;
    if !(weight >= S::zero() && weight <= S::one()) {
        return Err(Error::WeightOutOfRange(weight.as_f64()));
    }
    if weight.is_zero() {
        return Ok(a.clone());
    }
    if weight.is_one() {
        return Ok(b.clone());
    }
    let keep = S::one() - weight;
    Ok(a.zip_with(b, |x, y| keep * x + weight * y))
}

/// Sup-norm distance `max_i |a_i - b_i|`.
pub fn sup_distance<S: Scalar>(a: &Point<S>, b: &Point<S>) -> Result<NormValue<S>> {
    a.check_compatible(b)?;
    let d = a
        .components()
        .iter()
        .zip(b.components())
        .fold(S::zero(), |m, (x, y)| m.larger((*x - *y).abs()));
    Ok(NormValue(d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Decimal10;
    use proptest::prelude::*;

    fn grid(values: &[f64]) -> Point<f64> {
        Point::Grid(GridFunction::new(0.0, 1.0, values.to_vec()).unwrap())
    }

    #[test]
    fn affine_examples() {
        let p = affine_combine(&Point::Scalar(1000.0), &Point::Scalar(14.45128320), 0.5).unwrap();
        assert_eq!(p.as_scalar().unwrap().to_significant(11), "507.22564160");
        let q = Point::Vector(vec![1.5, -2.0, 7.25]);
        assert_eq!(affine_combine(&q, &q, 0.7).unwrap(), q);
        assert_eq!(affine_combine(&Point::Scalar(2.0), &Point::Scalar(6.0), 0.25).unwrap(), Point::Scalar(3.0));
    }

    #[test]
    fn affine_in_decimal() {
        let a = Point::Scalar(Decimal10::lit(1000.0));
        let b = Point::Scalar("14.45128320".parse::<Decimal10>().unwrap());
        let p = affine_combine(&a, &b, Decimal10::lit(0.5)).unwrap();
        assert_eq!(p.as_scalar().unwrap().to_string(), "507.2256416");
    }

    #[test]
    fn affine_errors() {
        let e = affine_combine(&Point::Vector(vec![1.0]), &Point::Vector(vec![1.0, 2.0]), 0.5);
        assert!(matches!(e, Err(Error::Structural { .. })));
        let e = affine_combine(&Point::Scalar(1.0), &Point::Vector(vec![1.0]), 0.5);
        assert!(matches!(e, Err(Error::Structural { .. })));
        assert!(matches!(
            affine_combine(&Point::Scalar(1.0), &Point::Scalar(2.0), 1.5),
            Err(Error::WeightOutOfRange(_))
        ));
        assert!(matches!(
            affine_combine(&Point::Scalar(1.0), &Point::Scalar(2.0), f64::NAN),
            Err(Error::WeightOutOfRange(_))
        ));
    }

    #[test]
    fn distance_examples() {
        let d = sup_distance(&Point::Scalar(3.848449787_f64), &Point::Scalar(3.0)).unwrap();
        assert!((d.value() - 0.848449787).abs() < 1e-15);
        let p = Point::Vector(vec![1.0, 2.0]);
        assert_eq!(sup_distance(&p, &p).unwrap().value(), 0.0);
        assert_eq!(sup_distance(&grid(&[1.0, 2.0, 5.0]), &grid(&[1.0, 0.0, 4.0])).unwrap().value(), 2.0);
    }

    #[test]
    fn grid_geometry_mismatch() {
        let a = grid(&[1.0, 2.0]);
        let b = Point::Grid(GridFunction::new(0.5, 1.0, vec![1.0, 2.0]).unwrap());
        assert!(sup_distance(&a, &b).is_err());
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1e6..1e6f64, 3)
    }

    proptest! {
        #[test]
        fn triangle_and_symmetry(a in vec3(), b in vec3(), c in vec3()) {
            let (a, b, c) = (Point::Vector(a), Point::Vector(b), Point::Vector(c));
            let ab = sup_distance(&a, &b).unwrap().value();
            let ba = sup_distance(&b, &a).unwrap().value();
            let bc = sup_distance(&b, &c).unwrap().value();
            let ac = sup_distance(&a, &c).unwrap().value();
            prop_assert_eq!(ab, ba);
            prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12));
        }

        #[test]
        fn endpoint_weights_are_exact(a in vec3(), b in vec3()) {
            let (a, b) = (Point::Vector(a), Point::Vector(b));
            prop_assert_eq!(affine_combine(&a, &b, 0.0).unwrap(), a.clone());
            prop_assert_eq!(affine_combine(&a, &b, 1.0).unwrap(), b);
        }

        #[test]
        fn norm_zero_iff_zero(v in vec3()) {
            let p = Point::Vector(v.clone());
            let n = p.sup_norm().value();
            prop_assert!(n >= 0.0);
            prop_assert_eq!(n == 0.0, v.iter().all(|x| *x == 0.0));
        }
    }
}
