//! Dimensioned magnitudes and the order-of-magnitude comparison behind `~`.

use std::fmt;

use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::dimension::{DimOp, Dimension, Exponent};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantityError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: Dimension, right: Dimension },
    #[error("division by zero")]
    DivisionByZero,
    #[error("result is not finite")]
    Overflow,
    #[error("fractional power with even root of negative magnitude {0}")]
    NegativeBase(f64),
    #[error("logarithm of non-positive magnitude {0}")]
    NonPositive(f64),
    #[error("tolerance must be a finite non-negative number of decades, got {0}")]
    InvalidTolerance(f64),
}

/// Arithmetic operator for [`Quantity::arith`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArithOp {
    Multiply,
    Divide,
    Add,
    Subtract,
}

/// A finite magnitude paired with its dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantity<T> {
    magnitude: T,
    dimension: Dimension,
}

impl<T: Real> Quantity<T> {
    pub fn new(magnitude: T, dimension: Dimension) -> Result<Self, QuantityError> {
        if magnitude.is_finite() {
            Ok(Self { magnitude, dimension })
        } else {
            Err(QuantityError::Overflow)
        }
    }

    pub fn dimensionless(magnitude: T) -> Result<Self, QuantityError> {
        Self::new(magnitude, Dimension::dimensionless())
    }

    pub fn magnitude(&self) -> T {
        self.magnitude
    }

    pub fn dimension(&self) -> Dimension {
        self.dimension
    }

    /// Same magnitude, different dimension. Used by test registries that
    /// mutate a constant's dimension.
    pub fn with_dimension(self, dimension: Dimension) -> Self {
        Self { dimension, ..self }
    }

    pub fn arith(self, rhs: Self, op: ArithOp) -> Result<Self, QuantityError> {
        let (magnitude, dimension) = match op {
            ArithOp::Multiply => (
                self.magnitude * rhs.magnitude,
                self.dimension.combine(rhs.dimension, DimOp::Multiply),
            ),
            ArithOp::Divide => {
                if rhs.magnitude.is_zero() {
                    return Err(QuantityError::DivisionByZero);
                }
                (
                    self.magnitude / rhs.magnitude,
                    self.dimension.combine(rhs.dimension, DimOp::Divide),
                )
            }
            ArithOp::Add | ArithOp::Subtract => {
                if self.dimension != rhs.dimension {
                    return Err(QuantityError::DimensionMismatch {
                        left: self.dimension,
                        right: rhs.dimension,
                    });
                }
                let m = if op == ArithOp::Add {
                    self.magnitude + rhs.magnitude
                } else {
                    self.magnitude - rhs.magnitude
                };
                (m, self.dimension)
            }
        };
        Self::new(magnitude, dimension)
    }

    pub fn mul(self, rhs: Self) -> Result<Self, QuantityError> {
        self.arith(rhs, ArithOp::Multiply)
    }

    pub fn div(self, rhs: Self) -> Result<Self, QuantityError> {
        self.arith(rhs, ArithOp::Divide)
    }

    pub fn add(self, rhs: Self) -> Result<Self, QuantityError> {
        self.arith(rhs, ArithOp::Add)
    }

    pub fn sub(self, rhs: Self) -> Result<Self, QuantityError> {
        self.arith(rhs, ArithOp::Subtract)
    }

    /// Rational power. Odd roots of negative magnitudes are real and allowed;
    /// even roots are not.
    pub fn pow(self, r: Exponent) -> Result<Self, QuantityError> {
        let dimension = self.dimension.pow(r);
        let m = self.magnitude;
        let magnitude = if r.is_integer() {
            match r.numer().to_i32() {
                Some(n) => m.powi(n),
                None => m.powf(T::of(*r.numer() as f64)),
            }
        } else {
            let p = T::of(*r.numer() as f64) / T::of(*r.denom() as f64);
            if m < T::zero() {
                if r.denom().is_even() {
                    return Err(QuantityError::NegativeBase(m.as_f64()));
                }
                let abs = (-m).powf(p);
                if r.numer().is_odd() {
                    -abs
                } else {
                    abs
                }
            } else {
                m.powf(p)
            }
        };
        if m.is_zero() && r < Exponent::zero() {
            return Err(QuantityError::DivisionByZero);
        }
        Self::new(magnitude, dimension)
    }

    pub fn log10_magnitude(&self) -> Result<T, QuantityError> {
        if self.magnitude > T::zero() {
            Ok(self.magnitude.log10())
        } else {
            Err(QuantityError::NonPositive(self.magnitude.as_f64()))
        }
    }

    /// Order-of-magnitude comparison. The dimension gate dominates: unequal
    /// dimensions fail regardless of the ratio.
    pub fn coincide(&self, other: &Self, tol_decades: T) -> Result<CoincidenceVerdict<T>, QuantityError> {
        if !(tol_decades >= T::zero()) || !tol_decades.is_finite() {
            return Err(QuantityError::InvalidTolerance(tol_decades.as_f64()));
        }
        let log10_ratio = self.log10_magnitude()? - other.log10_magnitude()?;
        Ok(CoincidenceVerdict::new(
            log10_ratio,
            tol_decades,
            self.dimension == other.dimension,
        ))
    }
}

/// Outcome of an order-of-magnitude comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoincidenceVerdict<T> {
    pub log10_ratio: T,
    pub tol_decades: T,
    pub dimensions_match: bool,
    pub pass: bool,
}

impl<T: Real> CoincidenceVerdict<T> {
    pub fn new(log10_ratio: T, tol_decades: T, dimensions_match: bool) -> Self {
        let pass = dimensions_match && log10_ratio.abs() <= tol_decades;
        Self { log10_ratio, tol_decades, dimensions_match, pass }
    }
}

/// Decimal scientific notation with 9 significant digits. Values whose
/// 9-digit form would not read back to the same `f64` get the shortest
/// round-trip form instead, so serialized constants stay bit-exact.
pub fn format_sig9(x: f64) -> String {
    let nine = format!("{x:.8e}");
    if nine.parse::<f64>().ok() == Some(x) {
        nine
    } else {
        format!("{x:e}")
    }
}

impl<T: Real> fmt::Display for Quantity<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", format_sig9(self.magnitude.as_f64()), self.dimension)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn q(m: f64, d: Dimension) -> Quantity<f64> {
        Quantity::new(m, d).unwrap()
    }

    fn half() -> Exponent {
        Exponent::new(1, 2)
    }

    #[test]
    fn add_same_dimension() {
        let s = q(2.0, Dimension::mass()).add(q(3.0, Dimension::mass())).unwrap();
        assert_eq!(s, q(5.0, Dimension::mass()));
    }

    #[test]
    fn add_across_dimensions_fails() {
        let err = q(1.0, Dimension::length()).add(q(1.0, Dimension::time())).unwrap_err();
        assert!(matches!(err, QuantityError::DimensionMismatch { .. }));
    }

    #[test]
    fn pion_compton_wavelength() {
        let hbar = q(1.054571817e-27, Dimension::mlt(1, 2, -1));
        let mc = q(2.488e-25 * 2.99792458e10, Dimension::mlt(1, 1, -1));
        let l = hbar.div(mc).unwrap();
        assert_eq!(l.dimension(), Dimension::length());
        assert_relative_eq!(l.magnitude(), 1.41385568e-13, max_relative = 1e-8);
    }

    #[test]
    fn divide_by_zero() {
        let err = q(1.0, Dimension::length()).div(q(0.0, Dimension::time())).unwrap_err();
        assert_eq!(err, QuantityError::DivisionByZero);
    }

    #[test]
    fn overflow_is_reported() {
        let big = q(1e200, Dimension::length());
        assert_eq!(big.mul(big).unwrap_err(), QuantityError::Overflow);
    }

    #[test]
    fn square_root_of_area() {
        let a = q(4.0, Dimension::mlt(0, 2, 0)).pow(half()).unwrap();
        assert_eq!(a, q(2.0, Dimension::length()));
    }

    #[test]
    fn sqrt_of_particle_number() {
        let n = q(5.0e81, Dimension::dimensionless()).pow(half()).unwrap();
        assert_relative_eq!(n.magnitude(), 7.0710678e40, max_relative = 1e-7);
    }

    #[test]
    fn negative_base_even_root() {
        let err = q(-1.0, Dimension::dimensionless()).pow(half()).unwrap_err();
        assert!(matches!(err, QuantityError::NegativeBase(_)));
    }

    #[test]
    fn negative_base_odd_root_is_real() {
        let c = q(-8.0, Dimension::dimensionless()).pow(Exponent::new(1, 3)).unwrap();
        assert_relative_eq!(c.magnitude(), -2.0, max_relative = 1e-15);
    }

    #[test]
    fn log10_values() {
        assert_eq!(q(1e28, Dimension::length()).log10_magnitude().unwrap(), 28.0);
        assert_eq!(q(1.0, Dimension::dimensionless()).log10_magnitude().unwrap(), 0.0);
        let lp = q(2.488e-25, Dimension::mass()).log10_magnitude().unwrap();
        assert!((lp - (-24.604149624)).abs() < 1e-8);
        assert!(matches!(
            q(0.0, Dimension::mass()).log10_magnitude(),
            Err(QuantityError::NonPositive(_))
        ));
    }

    #[test]
    fn coincide_dimension_gate() {
        let v = q(1.0, Dimension::length())
            .coincide(&q(1.0, Dimension::time()), 10.0)
            .unwrap();
        assert!(!v.dimensions_match);
        assert!(!v.pass);
    }

    #[test]
    fn coincide_reflexive_at_zero_tolerance() {
        let x = q(3.7e-9, Dimension::mlt(1, 3, -2));
        let v = x.coincide(&x, 0.0).unwrap();
        assert!(v.pass);
        assert_eq!(v.log10_ratio, 0.0);
    }

    #[test]
    fn coincide_rejects_negative_tolerance() {
        let x = q(1.0, Dimension::length());
        assert!(matches!(x.coincide(&x, -1.0), Err(QuantityError::InvalidTolerance(_))));
    }

    #[test]
    fn sig9_formatting() {
        assert_eq!(format_sig9(2.99792458e10), "2.99792458e10");
        // ħ has ten significant digits and falls back to the round-trip form.
        assert_eq!(format_sig9(1.054571817e-27), "1.054571817e-27");
        assert_eq!(format_sig9(1.0), "1.00000000e0");
    }

    #[test]
    fn works_for_f32() {
        let a = Quantity::<f32>::new(4.0, Dimension::mlt(0, 2, 0)).unwrap();
        assert_eq!(a.pow(half()).unwrap().magnitude(), 2.0f32);
    }

    fn arb_q() -> impl Strategy<Value = Quantity<f64>> {
        (1e-30f64..1e30, -3i64..=3, -3i64..=3).prop_map(|(m, a, b)| q(m, Dimension::mlt(a, b, 0)))
    }

    proptest! {
        #[test]
        fn multiply_commutes(a in arb_q(), b in arb_q()) {
            let ab = a.mul(b).unwrap();
            let ba = b.mul(a).unwrap();
            prop_assert_eq!(ab, ba);
        }

        #[test]
        fn multiply_associates_within_an_ulp(a in arb_q(), b in arb_q(), c in arb_q()) {
            let l = a.mul(b).unwrap().mul(c).unwrap();
            let r = a.mul(b.mul(c).unwrap()).unwrap();
            prop_assert_eq!(l.dimension(), r.dimension());
            let rel = ((l.magnitude() - r.magnitude()) / l.magnitude()).abs();
            prop_assert!(rel <= 2.0 * f64::EPSILON, "rel = {rel}");
        }

        #[test]
        fn coincide_is_antisymmetric(a in arb_q(), b in arb_q()) {
            let ab = a.coincide(&b, 1.0).unwrap().log10_ratio;
            let ba = b.coincide(&a, 1.0).unwrap().log10_ratio;
            prop_assert!((ab + ba).abs() <= 1e-12);
        }

        #[test]
        fn sig9_round_trips_bit_exactly(x in proptest::num::f64::NORMAL) {
            prop_assert_eq!(format_sig9(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }
}
