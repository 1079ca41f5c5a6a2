//! Exact dimensional algebra over the CGS-Gaussian base dimensions.
//!
//! Gaussian charge carries half-integer exponents (`e` is `M^1/2 L^3/2 T^-1`),
//! so exponents are exact rationals rather than integers.

use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

/// Exact rational exponent.
pub type Exponent = Ratio<i64>;

/// Base dimensions of the CGS system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    Mass,
    Length,
    Time,
}

impl Base {
    pub const ALL: [Base; 3] = [Base::Mass, Base::Length, Base::Time];

    pub fn symbol(self) -> &'static str {
        match self {
            Base::Mass => "M",
            Base::Length => "L",
            Base::Time => "T",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Exponent vector over {M, L, T}.
///
/// `Ratio` keeps every entry reduced with a positive denominator, and a zero
/// entry is the only representation of an absent base, so derived equality is
/// structural equality.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Dimension {
    exponents: [Exponent; 3],
}

impl Dimension {
    pub fn dimensionless() -> Self {
        Self::default()
    }

    pub fn new(mass: Exponent, length: Exponent, time: Exponent) -> Self {
        Self { exponents: [mass, length, time] }
    }

    /// Integer-exponent shorthand: `Dimension::mlt(1, 2, -1)` is action.
    pub fn mlt(mass: i64, length: i64, time: i64) -> Self {
        Self::new(mass.into(), length.into(), time.into())
    }

    pub fn mass() -> Self {
        Self::mlt(1, 0, 0)
    }

    pub fn length() -> Self {
        Self::mlt(0, 1, 0)
    }

    pub fn time() -> Self {
        Self::mlt(0, 0, 1)
    }

    pub fn exponent(&self, base: Base) -> Exponent {
        self.exponents[base.index()]
    }

    pub fn with_exponent(mut self, base: Base, exponent: Exponent) -> Self {
        self.exponents[base.index()] = exponent;
        self
    }

    pub fn is_dimensionless(&self) -> bool {
        self.exponents.iter().all(Zero::is_zero)
    }

    /// Non-zero entries in M, L, T order.
    pub fn iter(&self) -> impl Iterator<Item = (Base, Exponent)> + '_ {
        Base::ALL
            .into_iter()
            .map(|b| (b, self.exponent(b)))
            .filter(|(_, e)| !e.is_zero())
    }

    pub fn combine(self, other: Dimension, op: DimOp) -> Dimension {
        let mut exponents = self.exponents;
        for (e, o) in exponents.iter_mut().zip(other.exponents) {
            match op {
                DimOp::Multiply => *e += o,
                DimOp::Divide => *e -= o,
            }
        }
        Dimension { exponents }
    }

    pub fn pow(self, r: Exponent) -> Dimension {
        Dimension { exponents: self.exponents.map(|e| e * r) }
    }

    pub fn recip(self) -> Dimension {
        self.pow(-Exponent::one())
    }
}

/// Operator accepted by [`Dimension::combine`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimOp {
    Multiply,
    Divide,
}

impl Mul for Dimension {
    type Output = Dimension;
    fn mul(self, rhs: Dimension) -> Dimension {
        self.combine(rhs, DimOp::Multiply)
    }
}

impl Div for Dimension {
    type Output = Dimension;
    fn div(self, rhs: Dimension) -> Dimension {
        self.combine(rhs, DimOp::Divide)
    }
}

impl fmt::Display for Dimension {
    /// `M^1 L^2 T^-1`, `M^1/2 L^3/2 T^-1`, or `dimensionless`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_dimensionless() {
            return f.write_str("dimensionless");
        }
        let mut first = true;
        for (base, e) in self.iter() {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{}^{}", base.symbol(), e)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed dimension string {0:?}")]
pub struct ParseDimensionError(pub String);

impl FromStr for Dimension {
    type Err = ParseDimensionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let err = || ParseDimensionError(s.to_string());
        if s == "dimensionless" {
            return Ok(Dimension::dimensionless());
        }
        let mut dim = Dimension::dimensionless();
        for term in s.split_whitespace() {
            let (sym, exp) = term.split_once('^').ok_or_else(err)?;
            let base = Base::ALL
                .into_iter()
                .find(|b| b.symbol() == sym)
                .ok_or_else(err)?;
            let exp: Exponent = exp.parse().map_err(|_| err())?;
            if exp.is_zero() || !dim.exponent(base).is_zero() {
                return Err(err());
            }
            dim = dim.with_exponent(base, exp);
        }
        if dim.is_dimensionless() {
            return Err(err());
        }
        Ok(dim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    #[test]
    fn inverse_pair_cancels() {
        let d = Dimension::mass().combine(Dimension::mlt(-1, 0, 0), DimOp::Multiply);
        assert!(d.is_dimensionless());
    }

    #[test]
    fn velocity_times_time_is_length() {
        let v = Dimension::mlt(0, 1, -1);
        assert_eq!(v * Dimension::time(), Dimension::length());
    }

    #[test]
    fn compton_length_audit() {
        let hbar = Dimension::mlt(1, 2, -1);
        let momentum = Dimension::mlt(1, 1, -1);
        assert_eq!(hbar.combine(momentum, DimOp::Divide), Dimension::length());
    }

    #[test]
    fn square_root_of_area() {
        assert_eq!(Dimension::mlt(0, 2, 0).pow(r(1, 2)), Dimension::length());
    }

    #[test]
    fn zeroth_power_is_dimensionless() {
        assert!(Dimension::mlt(3, -2, 7).pow(r(0, 1)).is_dimensionless());
    }

    #[test]
    fn weinberg_numerator_cube_root() {
        let num = Dimension::mlt(2, 4, -3);
        assert_eq!(num.pow(r(1, 3)), Dimension::new(r(2, 3), r(4, 3), r(-1, 1)));
    }

    #[test]
    fn gaussian_charge_squared_is_energy_times_length() {
        let e = Dimension::new(r(1, 2), r(3, 2), r(-1, 1));
        assert_eq!(e.pow(r(2, 1)), Dimension::mlt(1, 3, -2));
    }

    #[test]
    fn display_forms() {
        assert_eq!(Dimension::mlt(1, 2, -1).to_string(), "M^1 L^2 T^-1");
        assert_eq!(Dimension::dimensionless().to_string(), "dimensionless");
        assert_eq!(
            Dimension::new(r(1, 2), r(3, 2), r(-1, 1)).to_string(),
            "M^1/2 L^3/2 T^-1"
        );
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!("M^1 M^2".parse::<Dimension>().is_err());
        assert!("Q^1".parse::<Dimension>().is_err());
        assert!("M1".parse::<Dimension>().is_err());
        assert!("".parse::<Dimension>().is_err());
    }

    fn arb_exp() -> impl Strategy<Value = Exponent> {
        (-12i64..=12, 1i64..=6).prop_map(|(n, d)| Exponent::new(n, d))
    }

    fn arb_dim() -> impl Strategy<Value = Dimension> {
        (arb_exp(), arb_exp(), arb_exp()).prop_map(|(m, l, t)| Dimension::new(m, l, t))
    }

    proptest! {
        #[test]
        fn self_quotient_is_dimensionless(d in arb_dim()) {
            prop_assert!(d.combine(d, DimOp::Divide).is_dimensionless());
        }

        #[test]
        fn pow_then_inverse_pow_round_trips(d in arb_dim(), r in arb_exp()) {
            prop_assume!(!r.is_zero());
            prop_assert_eq!(d.pow(r).pow(r.recip()), d);
        }

        #[test]
        fn display_parses_back(d in arb_dim()) {
            prop_assert_eq!(d.to_string().parse::<Dimension>().unwrap(), d);
        }
    }
}
