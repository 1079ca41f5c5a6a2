use std::fmt;

use crate::dimension::Exponent;

/// Decimal literal `mantissa × 10^exponent`, normalized so the mantissa has no
/// trailing zeros (zero is `0 × 10^0`). Normalization makes structural
/// equality agree with numeric equality of the written digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Decimal {
    mantissa: u64,
    exponent: i32,
}

impl Decimal {
    pub fn new(mut mantissa: u64, mut exponent: i32) -> Self {
        if mantissa == 0 {
            return Self { mantissa: 0, exponent: 0 };
        }
        while mantissa.is_multiple_of(10) {
            mantissa /= 10;
            exponent += 1;
        }
        Self { mantissa, exponent }
    }

    pub fn integer(n: u64) -> Self {
        Self::new(n, 0)
    }

    pub fn mantissa(&self) -> u64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa == 0
    }

    /// Correctly rounded `f64` value.
    pub fn to_f64(&self) -> f64 {
        format!("{}e{}", self.mantissa, self.exponent)
            .parse()
            .expect("decimal literal text is a valid float")
    }
}

impl fmt::Display for Decimal {
    /// Plain notation for adjusted exponents in [-4, 5], scientific otherwise.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.mantissa.to_string();
        let n = digits.len() as i64;
        let adjusted = n - 1 + self.exponent as i64;
        if self.mantissa == 0 {
            f.write_str("0")
        } else if self.exponent >= 0 && adjusted <= 5 {
            write!(f, "{}{}", digits, "0".repeat(self.exponent as usize))
        } else if self.exponent < 0 && adjusted >= -4 {
            if adjusted >= 0 {
                let (int, frac) = digits.split_at(adjusted as usize + 1);
                write!(f, "{int}.{frac}")
            } else {
                write!(f, "0.{}{}", "0".repeat((-adjusted - 1) as usize), digits)
            }
        } else {
            let (lead, rest) = digits.split_at(1);
            if rest.is_empty() {
                write!(f, "{lead}e{adjusted}")
            } else {
                write!(f, "{lead}.{rest}e{adjusted}")
            }
        }
    }
}

/// Expression tree of a relation side.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Symbol(String),
    Literal(Decimal),
    Product(Box<Expr>, Box<Expr>),
    Quotient(Box<Expr>, Box<Expr>),
    Sum(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Power(Box<Expr>, Exponent),
}

impl Expr {
    pub fn symbol(name: impl Into<String>) -> Self {
        Expr::Symbol(name.into())
    }

    pub fn literal(mantissa: u64, exponent: i32) -> Self {
        Expr::Literal(Decimal::new(mantissa, exponent))
    }

    pub fn product(a: Expr, b: Expr) -> Self {
        Expr::Product(Box::new(a), Box::new(b))
    }

    pub fn quotient(a: Expr, b: Expr) -> Self {
        Expr::Quotient(Box::new(a), Box::new(b))
    }

    pub fn sum(a: Expr, b: Expr) -> Self {
        Expr::Sum(Box::new(a), Box::new(b))
    }

    pub fn difference(a: Expr, b: Expr) -> Self {
        Expr::Difference(Box::new(a), Box::new(b))
    }

    pub fn power(base: Expr, exponent: Exponent) -> Self {
        Expr::Power(Box::new(base), exponent)
    }

    /// Unary minus is sugar for `0 - x`.
    pub fn negate(x: Expr) -> Self {
        Expr::difference(Expr::Literal(Decimal::integer(0)), x)
    }

    pub fn is_zero_literal(&self) -> bool {
        matches!(self, Expr::Literal(d) if d.is_zero())
    }

    /// Number of `Symbol(name)` leaves.
    pub fn occurrences(&self, name: &str) -> usize {
        match self {
            Expr::Symbol(s) => usize::from(s == name),
            Expr::Literal(_) => 0,
            Expr::Power(b, _) => b.occurrences(name),
            Expr::Product(a, b) | Expr::Quotient(a, b) | Expr::Sum(a, b) | Expr::Difference(a, b) => {
                a.occurrences(name) + b.occurrences(name)
            }
        }
    }

    /// Distinct symbol names in first-occurrence order.
    pub fn symbols(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Symbol(s) => {
                    if !out.contains(s) {
                        out.push(s.clone());
                    }
                }
                Expr::Literal(_) => {}
                Expr::Power(b, _) => walk(b, out),
                Expr::Product(a, b) | Expr::Quotient(a, b) | Expr::Sum(a, b) | Expr::Difference(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Symbol(_) | Expr::Literal(_) => 1,
            Expr::Power(b, _) => 1 + b.depth(),
            Expr::Product(a, b) | Expr::Quotient(a, b) | Expr::Sum(a, b) | Expr::Difference(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }
}

/// `=` demands agreement to a relative tolerance; `~` to a number of decades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelOp {
    ExactEq,
    OrderOfMagnitude,
}

impl RelOp {
    pub fn symbol(self) -> char {
        match self {
            RelOp::ExactEq => '=',
            RelOp::OrderOfMagnitude => '~',
        }
    }
}

/// Default `~` tolerance in decades when a relation carries no `@tol`.
pub const DEFAULT_TOL_DECADES: f64 = 2.0;

/// Relative tolerance of `=` relations.
pub const EXACT_REL_TOL: f64 = 1e-6;

/// A catalog line: two sides joined by `=` or `~`, plus annotations.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub lhs: Expr,
    pub rhs: Expr,
    pub operator: RelOp,
    /// Explicit `@tol(decades=...)`; `None` means the operator's default.
    pub tol: Option<f64>,
    pub name: String,
    pub paper_tag: String,
    /// `@let(sym=expr, ...)` local bindings, evaluated in order before the
    /// relation sides.
    pub bindings: Vec<(String, Expr)>,
    /// `@defines(sym)`: the registry derives `sym` from this very relation,
    /// which makes the row circular while that derivation is in effect.
    pub defines: Option<String>,
}

impl Relation {
    pub fn new(lhs: Expr, operator: RelOp, rhs: Expr) -> Self {
        Self {
            lhs,
            rhs,
            operator,
            tol: None,
            name: String::new(),
            paper_tag: String::new(),
            bindings: Vec::new(),
            defines: None,
        }
    }

    /// Effective tolerance in decades. `=` maps its relative tolerance onto
    /// the decade scale, `log10(1 + 1e-6)`.
    pub fn tol_decades(&self) -> f64 {
        match self.operator {
            RelOp::OrderOfMagnitude => self.tol.unwrap_or(DEFAULT_TOL_DECADES),
            RelOp::ExactEq => (1.0 + EXACT_REL_TOL).log10(),
        }
    }

    pub fn occurrences(&self, name: &str) -> usize {
        self.lhs.occurrences(name) + self.rhs.occurrences(name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_normalizes_trailing_zeros() {
        assert_eq!(Decimal::new(2500, -3), Decimal::new(25, -1));
        assert_eq!(Decimal::new(0, 7), Decimal::integer(0));
    }

    #[test]
    fn decimal_display() {
        assert_eq!(Decimal::new(1, -40).to_string(), "1e-40");
        assert_eq!(Decimal::new(25, -1).to_string(), "2.5");
        assert_eq!(Decimal::new(1, 28).to_string(), "1e28");
        assert_eq!(Decimal::integer(2).to_string(), "2");
        assert_eq!(Decimal::new(1, 3).to_string(), "1000");
        assert_eq!(Decimal::new(6674, -11).to_string(), "6.674e-8");
        assert_eq!(Decimal::new(5, -4).to_string(), "0.0005");
        assert_eq!(Decimal::new(123, 7).to_string(), "1.23e9");
    }

    #[test]
    fn decimal_value_is_correctly_rounded() {
        assert_eq!(Decimal::new(1054571817, -36).to_f64(), 1.054571817e-27);
    }

    #[test]
    fn exact_tolerance_in_decades() {
        let r = Relation::new(Expr::symbol("a"), RelOp::ExactEq, Expr::symbol("b"));
        assert!((r.tol_decades() - 4.342942647e-7).abs() < 1e-15);
        let r = Relation::new(Expr::symbol("a"), RelOp::OrderOfMagnitude, Expr::symbol("b"));
        assert_eq!(r.tol_decades(), DEFAULT_TOL_DECADES);
    }
}
